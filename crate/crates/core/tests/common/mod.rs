//! Independent time-domain reference for the steady state.
//!
//! Everything here works with 3x3 matrices in the local basis. Jump
//! operators are built from spectral projectors of the Hamiltonian, so no
//! eigenvector sign convention is shared with the library.

#![allow(dead_code)]

use nalgebra::Matrix3;
use num_complex::Complex64;

pub type M3 = Matrix3<Complex64>;

#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    /// Emitter, collector, base.
    pub temperature: [f64; 3],
    pub gamma: [f64; 3],
    pub gamma0: f64,
    pub interference: bool,
}

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn unit(i: usize, j: usize) -> M3 {
    let mut m = M3::zeros();
    m[(i, j)] = r(1.0);
    m
}

fn occupation(v: f64, t: f64) -> f64 {
    1.0 / ((v / t).exp() - 1.0)
}

/// One Lindblad-type block `sum_ij g_ij (A_i X A_j^dag - 1/2 {A_j^dag A_i, X})`.
struct Block {
    ops: Vec<M3>,
    kossakowski: Vec<Vec<f64>>,
}

impl Block {
    fn apply(&self, x: &M3) -> M3 {
        let mut out = M3::zeros();
        for (i, ai) in self.ops.iter().enumerate() {
            for (j, aj) in self.ops.iter().enumerate() {
                let g = self.kossakowski[i][j];
                if g == 0.0 {
                    continue;
                }
                let ajd = aj.adjoint();
                let k = ajd * ai;
                out += (ai * x * ajd - (k * x + x * k) * r(0.5)) * r(g);
            }
        }
        out
    }
}

pub struct Model {
    pub h: M3,
    /// Per bath: a list of independent blocks.
    blocks: [Vec<Block>; 3],
}

impl Model {
    pub fn new(p: &Params) -> Self {
        let mut h = M3::zeros();
        h[(1, 1)] = r(p.eps1);
        h[(2, 2)] = r(p.eps2);
        h[(1, 2)] = r(p.delta);
        h[(2, 1)] = r(p.delta);

        // Spectral projectors of the excited doublet.
        let mean = 0.5 * (p.eps1 + p.eps2);
        let root = ((0.5 * (p.eps1 - p.eps2)).powi(2) + p.delta * p.delta).sqrt();
        let (lp, lm) = (mean + root, mean - root);
        let mut doublet = h;
        doublet[(0, 0)] = r(0.0);
        let p_excited = unit(1, 1) + unit(2, 2);
        let proj_p = (doublet - p_excited * r(lm)) * r(1.0 / (lp - lm));
        let proj_m = (doublet - p_excited * r(lp)) * r(1.0 / (lm - lp));
        let proj_g = unit(0, 0);
        let omega = lp - lm;

        let rate = |k: usize, v: f64| -> f64 {
            if v > 0.0 {
                p.gamma[k] * (1.0 + occupation(v, p.temperature[k]))
            } else {
                p.gamma[k] * occupation(-v, p.temperature[k])
            }
        };

        let mut blocks: [Vec<Block>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        // Emitter couples |0><1|, collector |0><2|.
        for (k, coupling) in [(0usize, unit(0, 1)), (1usize, unit(0, 2))] {
            let a_p = proj_g * coupling * proj_p;
            let a_m = proj_g * coupling * proj_m;
            let (dp, dm) = (rate(k, lp), rate(k, lm));
            let (up, um) = (rate(k, -lp), rate(k, -lm));
            let (cross_down, cross_up) = if p.interference { ((dp * dm).sqrt(), (up * um).sqrt()) } else { (0.0, 0.0) };
            blocks[k].push(Block { ops: vec![a_p, a_m], kossakowski: vec![vec![dp, cross_down], vec![cross_down, dm]] });
            blocks[k].push(Block {
                ops: vec![a_p.adjoint(), a_m.adjoint()],
                kossakowski: vec![vec![up, cross_up], vec![cross_up, um]],
            });
        }
        // Base couples the doublet population difference.
        let sz = unit(1, 1) - unit(2, 2);
        let lower = proj_m * sz * proj_p;
        let flat = proj_p * sz * proj_p + proj_m * sz * proj_m;
        blocks[2].push(Block { ops: vec![lower], kossakowski: vec![vec![rate(2, omega)]] });
        blocks[2].push(Block { ops: vec![lower.adjoint()], kossakowski: vec![vec![rate(2, -omega)]] });
        blocks[2].push(Block { ops: vec![flat], kossakowski: vec![vec![p.gamma0]] });

        Self { h, blocks }
    }

    pub fn dissipator(&self, bath: usize, x: &M3) -> M3 {
        self.blocks[bath].iter().map(|b| b.apply(x)).fold(M3::zeros(), |a, b| a + b)
    }

    pub fn rhs(&self, x: &M3) -> M3 {
        let i = Complex64::new(0.0, 1.0);
        let mut out = (self.h * x - x * self.h) * (-i);
        for bath in 0..3 {
            out += self.dissipator(bath, x);
        }
        out
    }

    /// `Tr(H D_bath[rho])`.
    pub fn heat(&self, bath: usize, rho: &M3) -> f64 {
        (self.h * self.dissipator(bath, rho)).trace().re
    }
}

fn norm(m: &M3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn rk4(model: &Model, x: &M3, dt: f64) -> M3 {
    let k1 = model.rhs(x);
    let k2 = model.rhs(&(x + k1 * r(0.5 * dt)));
    let k3 = model.rhs(&(x + k2 * r(0.5 * dt)));
    let k4 = model.rhs(&(x + k3 * r(dt)));
    x + (k1 + k2 * r(2.0) + k3 * r(2.0) + k4) * r(dt / 6.0)
}

pub struct Relaxed {
    pub rho: M3,
    pub time: f64,
    pub derivative: f64,
}

/// Integrates from the maximally mixed state with step-doubling RK4 until
/// `max|drho/dt| < rate_tol` or `t_max` is reached.
pub fn relax(model: &Model, rate_tol: f64, t_max: f64) -> Relaxed {
    let mut x = M3::identity() * r(1.0 / 3.0);
    let mut t = 0.0;
    let mut dt = 1e-3;
    let local_tol = 1e-13;
    loop {
        let derivative = norm(&model.rhs(&x));
        if derivative < rate_tol || t >= t_max {
            return Relaxed { rho: x, time: t, derivative };
        }
        let full = rk4(model, &x, dt);
        let half = rk4(model, &rk4(model, &x, 0.5 * dt), 0.5 * dt);
        let err = norm(&(full - half)) / 15.0;
        if err <= local_tol {
            // Richardson-corrected step.
            x = half + (half - full) * r(1.0 / 15.0);
            x = (x + x.adjoint()) * r(0.5);
            t += dt;
        }
        let factor = if err == 0.0 { 2.0 } else { (0.9 * (local_tol / err).powf(0.2)).clamp(0.2, 2.0) };
        dt *= factor;
    }
}
