//! The three-level system, its dressed basis, the three baths and the jump
//! operators through which each bath acts on the system.
//!
//! Basis ordering is fixed throughout the crate:
//!
//! * local basis   `{|0>, |1>, |2>}` (index 0, 1, 2)
//! * dressed basis `{|0>, |+>, |->}` (index 0, 1, 2)
//!
//! with `|+> = cos t |1> + sin t |2>` and `|-> = sin t |1> - cos t |2>`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix3 = Matrix3<Complex64>;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter { name, value, reason: "must be finite" });
    }
    if value <= 0.0 {
        return Err(Error::InvalidParameter { name, value, reason: "must be positive" });
    }
    Ok(value)
}

fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter { name, value, reason: "must be finite" });
    }
    if value < 0.0 {
        return Err(Error::InvalidParameter { name, value, reason: "must be non-negative" });
    }
    Ok(value)
}

/// Level energies and excitonic coupling of the three-level system. The
/// ground-state energy is identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    eps1: f64,
    eps2: f64,
    delta: f64,
}

impl SystemSpec {
    pub fn new(eps1: f64, eps2: f64, delta: f64) -> Result<Self> {
        Ok(Self {
            eps1: positive("eps1", eps1)?,
            eps2: positive("eps2", eps2)?,
            delta: positive("delta", delta)?,
        })
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `H_S` in the local basis.
    pub fn hamiltonian(&self) -> CMatrix3 {
        build_hamiltonian(self)
    }

    pub fn dress(&self) -> DressedBasis {
        dress(self)
    }
}

/// `diag(0, eps1, eps2)` plus `delta` on the (1,2) and (2,1) entries.
pub fn build_hamiltonian(spec: &SystemSpec) -> CMatrix3 {
    let mut h = CMatrix3::zeros();
    h[(1, 1)] = c(spec.eps1);
    h[(2, 2)] = c(spec.eps2);
    h[(1, 2)] = c(spec.delta);
    h[(2, 1)] = c(spec.delta);
    h
}

/// Mixing angle and eigenvalues of the excited 2x2 block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedBasis {
    pub theta: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub omega: f64,
}

/// Rotates the excited block of `H_S` onto its eigenbasis.
///
/// The angle is taken as `atan2(2 delta, eps1 - eps2) / 2`, which stays in
/// `(0, pi/2)` and is continuous through `eps1 = eps2`, so `sin 2t` never
/// changes sign.
pub fn dress(spec: &SystemSpec) -> DressedBasis {
    let theta = 0.5 * (2.0 * spec.delta).atan2(spec.eps1 - spec.eps2);
    let mean = 0.5 * (spec.eps1 + spec.eps2);
    let half_split = (0.5 * (spec.eps1 - spec.eps2)).hypot(spec.delta);
    DressedBasis {
        theta,
        eps_plus: mean + half_split,
        eps_minus: mean - half_split,
        omega: 2.0 * half_split,
    }
}

impl DressedBasis {
    pub fn cos(&self) -> f64 {
        self.theta.cos()
    }

    pub fn sin(&self) -> f64 {
        self.theta.sin()
    }

    pub fn sin2(&self) -> f64 {
        (2.0 * self.theta).sin()
    }

    pub fn cos2(&self) -> f64 {
        (2.0 * self.theta).cos()
    }

    /// Columns are the dressed states written in the local basis. The matrix
    /// is real, symmetric and orthogonal, hence its own inverse.
    pub fn rotation(&self) -> CMatrix3 {
        let (s, co) = self.theta.sin_cos();
        let mut u = CMatrix3::zeros();
        u[(0, 0)] = c(1.0);
        u[(1, 1)] = c(co);
        u[(2, 1)] = c(s);
        u[(1, 2)] = c(s);
        u[(2, 2)] = c(-co);
        u
    }

    /// Local-basis operator to dressed-basis components.
    pub fn to_dressed(&self, local: &CMatrix3) -> CMatrix3 {
        let u = self.rotation();
        u.adjoint() * local * u
    }

    /// Dressed-basis operator to local-basis components.
    pub fn to_local(&self, dressed: &CMatrix3) -> CMatrix3 {
        let u = self.rotation();
        u * dressed * u.adjoint()
    }

    /// `H_S` in the dressed basis: `diag(0, eps_plus, eps_minus)`.
    pub fn hamiltonian(&self) -> CMatrix3 {
        CMatrix3::from_diagonal(&nalgebra::Vector3::new(
            c(0.0),
            c(self.eps_plus),
            c(self.eps_minus),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BathRole {
    Emitter,
    Collector,
    Base,
}

impl BathRole {
    pub const ALL: [BathRole; 3] = [BathRole::Emitter, BathRole::Collector, BathRole::Base];

    pub fn label(self) -> &'static str {
        match self {
            BathRole::Emitter => "E",
            BathRole::Collector => "C",
            BathRole::Base => "B",
        }
    }
}

/// One thermal reservoir in the wide-band limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub role: BathRole,
    pub temperature: f64,
    pub gamma_wideband: f64,
    /// Pure-dephasing rate; only the base carries one.
    pub dephasing_rate: Option<f64>,
}

impl BathSpec {
    pub fn emitter(temperature: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            role: BathRole::Emitter,
            temperature: positive("T_E", temperature)?,
            gamma_wideband: non_negative("Gamma_E", gamma)?,
            dephasing_rate: None,
        })
    }

    pub fn collector(temperature: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            role: BathRole::Collector,
            temperature: positive("T_C", temperature)?,
            gamma_wideband: non_negative("Gamma_C", gamma)?,
            dephasing_rate: None,
        })
    }

    pub fn base(temperature: f64, gamma: f64, dephasing: f64) -> Result<Self> {
        Ok(Self {
            role: BathRole::Base,
            temperature: positive("T_B", temperature)?,
            gamma_wideband: non_negative("Gamma_B", gamma)?,
            dephasing_rate: Some(non_negative("gamma0", dephasing)?),
        })
    }

    pub fn dephasing(&self) -> f64 {
        self.dephasing_rate.unwrap_or(0.0)
    }
}

/// The emitter, collector and base, each present exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baths {
    pub emitter: BathSpec,
    pub collector: BathSpec,
    pub base: BathSpec,
}

impl Baths {
    pub fn new(emitter: BathSpec, collector: BathSpec, base: BathSpec) -> Result<Self> {
        Self::from_specs(&[emitter, collector, base])
    }

    pub fn from_specs(specs: &[BathSpec]) -> Result<Self> {
        let mut slots: [Option<BathSpec>; 3] = [None; 3];
        for spec in specs {
            let slot = &mut slots[spec.role as usize];
            if slot.is_some() {
                return Err(Error::DuplicateBath(spec.role));
            }
            if (spec.role == BathRole::Base) != spec.dephasing_rate.is_some() {
                return Err(Error::InvalidParameter {
                    name: "gamma0",
                    value: spec.dephasing(),
                    reason: "a dephasing rate belongs to the base bath only",
                });
            }
            *slot = Some(*spec);
        }
        let take = |role: BathRole| slots[role as usize].ok_or(Error::MissingBath(role));
        Ok(Self {
            emitter: take(BathRole::Emitter)?,
            collector: take(BathRole::Collector)?,
            base: take(BathRole::Base)?,
        })
    }

    pub fn get(&self, role: BathRole) -> &BathSpec {
        match role {
            BathRole::Emitter => &self.emitter,
            BathRole::Collector => &self.collector,
            BathRole::Base => &self.base,
        }
    }

    pub fn get_mut(&mut self, role: BathRole) -> &mut BathSpec {
        match role {
            BathRole::Emitter => &mut self.emitter,
            BathRole::Collector => &mut self.collector,
            BathRole::Base => &mut self.base,
        }
    }
}

/// A single Bohr-frequency component `A_i(v)` of a bath coupling operator,
/// written in the dressed basis. For `v > 0` the operator lowers the energy;
/// its adjoint is the matching `-v` component.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpChannel {
    pub bath: BathRole,
    pub frequency: f64,
    pub operator: CMatrix3,
    /// `Gamma_i` for transition channels, `gamma0` for pure dephasing.
    pub base_rate: f64,
}

fn dyad(i: usize, j: usize, amplitude: f64) -> CMatrix3 {
    let mut m = CMatrix3::zeros();
    m[(i, j)] = c(amplitude);
    m
}

/// Expands `|0><1|`, `|0><2|` and `|1><1| - |2><2|` in the dressed basis.
///
/// Channel order: emitter (eps_plus, eps_minus), collector (eps_plus,
/// eps_minus), base relaxation (omega), base dephasing (0).
pub fn derive_jump_channels(spec: &SystemSpec, baths: &[BathSpec]) -> Result<Vec<JumpChannel>> {
    let baths = Baths::from_specs(baths)?;
    Ok(jump_channels(&spec.dress(), &baths))
}

pub(crate) fn jump_channels(dressed: &DressedBasis, baths: &Baths) -> Vec<JumpChannel> {
    const G: usize = 0;
    const P: usize = 1;
    const M: usize = 2;
    let (s, co) = dressed.theta.sin_cos();
    let ge = baths.emitter.gamma_wideband;
    let gc = baths.collector.gamma_wideband;
    let gb = baths.base.gamma_wideband;

    let mut dephasing = CMatrix3::zeros();
    dephasing[(P, P)] = c(dressed.cos2());
    dephasing[(M, M)] = c(-dressed.cos2());

    vec![
        JumpChannel {
            bath: BathRole::Emitter,
            frequency: dressed.eps_plus,
            operator: dyad(G, P, co),
            base_rate: ge,
        },
        JumpChannel {
            bath: BathRole::Emitter,
            frequency: dressed.eps_minus,
            operator: dyad(G, M, s),
            base_rate: ge,
        },
        JumpChannel {
            bath: BathRole::Collector,
            frequency: dressed.eps_plus,
            operator: dyad(G, P, s),
            base_rate: gc,
        },
        JumpChannel {
            bath: BathRole::Collector,
            frequency: dressed.eps_minus,
            operator: dyad(G, M, -co),
            base_rate: gc,
        },
        JumpChannel {
            bath: BathRole::Base,
            frequency: dressed.omega,
            operator: dyad(M, P, dressed.sin2()),
            base_rate: gb,
        },
        JumpChannel {
            bath: BathRole::Base,
            frequency: 0.0,
            operator: dephasing,
            base_rate: baths.base.dephasing(),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference() -> SystemSpec {
        SystemSpec::new(10.0, 7.0, 1.0).unwrap()
    }

    fn baths() -> Vec<BathSpec> {
        vec![
            BathSpec::emitter(1.0 / 0.003, 1.0).unwrap(),
            BathSpec::collector(1.0 / 0.15, 1.0).unwrap(),
            BathSpec::base(100.0, 1.0, 1.0).unwrap(),
        ]
    }

    fn max_abs(m: &CMatrix3) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn hamiltonian_entries() {
        let h = reference().hamiltonian();
        let expected = [[0.0, 0.0, 0.0], [0.0, 10.0, 1.0], [0.0, 1.0, 7.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[(i, j)], c(expected[i][j]));
            }
        }
    }

    #[test]
    fn hamiltonian_weak_coupling_limit() {
        let h = SystemSpec::new(1.0, 1.0, 1e-300).unwrap().hamiltonian();
        assert_eq!(h[(1, 1)], c(1.0));
        assert_eq!(h[(2, 2)], c(1.0));
        assert!(h[(1, 2)].norm() < 1e-299);
    }

    #[test]
    fn symmetric_block_eigenvalues() {
        let d = SystemSpec::new(5.0, 5.0, 2.0).unwrap().dress();
        assert_relative_eq!(d.eps_plus, 7.0, epsilon = 1e-14);
        assert_relative_eq!(d.eps_minus, 3.0, epsilon = 1e-14);
        assert_eq!(d.theta, std::f64::consts::FRAC_PI_4);
    }

    #[test]
    fn rejects_bad_energies() {
        assert!(SystemSpec::new(-1.0, 7.0, 1.0).is_err());
        assert!(SystemSpec::new(10.0, 0.0, 1.0).is_err());
        assert!(SystemSpec::new(10.0, 7.0, f64::NAN).is_err());
        assert!(SystemSpec::new(f64::INFINITY, 7.0, 1.0).is_err());
        match SystemSpec::new(10.0, 7.0, 0.0) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "delta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reference_dressed_values() {
        // 30-digit reference values for tan 2t = 2/3 and omega = sqrt(13).
        let d = reference().dress();
        assert_relative_eq!(d.theta, 0.294001301773783775622805540313, max_relative = 1e-14);
        assert_relative_eq!(d.omega, 3.60555127546398929311922126747, max_relative = 1e-14);
        assert_relative_eq!(d.eps_plus, 10.3027756377319946465596106337, max_relative = 1e-14);
        assert_relative_eq!(d.eps_minus, 6.69722436226800535344038936626, max_relative = 1e-14);
        assert_relative_eq!((2.0 * d.theta).tan(), 2.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn reference_eigenvalues_match_generic_solver() {
        let h = nalgebra::Matrix2::new(10.0, 1.0, 1.0, 7.0);
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let d = reference().dress();
        assert_relative_eq!(ev[0], d.eps_minus, max_relative = 1e-13);
        assert_relative_eq!(ev[1], d.eps_plus, max_relative = 1e-13);
    }

    #[test]
    fn reference_emitter_amplitudes() {
        let ch = derive_jump_channels(&reference(), &baths()).unwrap();
        assert_eq!(ch.len(), 6);
        assert_relative_eq!(ch[0].operator[(0, 1)].re, 0.957092026489052849592220722565, max_relative = 1e-14);
        assert_relative_eq!(ch[1].operator[(0, 2)].re, 0.289784148688430089716825558518, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_case_kills_dephasing() {
        let ch = derive_jump_channels(&SystemSpec::new(4.0, 4.0, 1.0).unwrap(), &baths()).unwrap();
        let relax = &ch[4];
        assert_eq!(relax.frequency, 2.0);
        assert_relative_eq!(relax.operator[(2, 1)].re, 1.0, epsilon = 1e-15);
        assert!(max_abs(&ch[5].operator) < 1e-15);
        assert_eq!(ch[5].base_rate, 1.0);
    }

    #[test]
    fn decoupled_limit() {
        let ch = derive_jump_channels(&SystemSpec::new(10.0, 7.0, 1e-12).unwrap(), &baths()).unwrap();
        assert!(ch[4].operator[(2, 1)].norm() < 1e-11);
        assert_relative_eq!(ch[0].operator[(0, 1)].re, 1.0, epsilon = 1e-15);
        assert!(ch[1].operator[(0, 2)].norm() < 1e-12);
    }

    #[test]
    fn bath_roles_validated() {
        let b = baths();
        assert_eq!(
            derive_jump_channels(&reference(), &[b[0], b[0], b[2]]).unwrap_err(),
            Error::DuplicateBath(BathRole::Emitter)
        );
        assert_eq!(
            derive_jump_channels(&reference(), &[b[0], b[2]]).unwrap_err(),
            Error::MissingBath(BathRole::Collector)
        );
        let mut bad = b[0];
        bad.dephasing_rate = Some(1.0);
        assert!(derive_jump_channels(&reference(), &[bad, b[1], b[2]]).is_err());
        assert!(BathSpec::base(0.0, 1.0, 1.0).is_err());
        assert!(BathSpec::emitter(10.0, -1.0).is_err());
    }

    #[test]
    fn theta_approaches_quarter_pi_from_below() {
        let mut last = 0.0;
        for k in 1..12 {
            let gap = 10f64.powi(-k);
            let t = SystemSpec::new(5.0 + gap, 5.0, 1.0).unwrap().dress().theta;
            assert!(t < std::f64::consts::FRAC_PI_4);
            assert!(t > last);
            last = t;
        }
        assert!(std::f64::consts::FRAC_PI_4 - last < 1e-11);
    }

    fn local(i: usize, j: usize) -> CMatrix3 {
        dyad(i, j, 1.0)
    }

    proptest! {
        #[test]
        fn rotation_diagonalises_and_inverts(e1 in 0.1f64..30.0, e2 in 0.1f64..30.0, d in 0.05f64..5.0) {
            let spec = SystemSpec::new(e1, e2, d).unwrap();
            let dressed = spec.dress();
            let h = spec.hamiltonian();
            let hd = dressed.to_dressed(&h);
            let scale = e1.max(e2).max(d);
            prop_assert!(max_abs(&(hd - dressed.hamiltonian())) < 1e-12 * scale);
            prop_assert!(max_abs(&(dressed.to_local(&hd) - h)) < 1e-12 * scale);
            prop_assert!(dressed.theta > 0.0 && dressed.theta < std::f64::consts::FRAC_PI_2);
            prop_assert!(dressed.eps_plus > dressed.eps_minus);
            prop_assert!(dressed.omega > 0.0);
        }

        #[test]
        fn channels_reconstruct_local_couplings(e1 in 0.1f64..30.0, e2 in 0.1f64..30.0, d in 0.05f64..5.0) {
            let spec = SystemSpec::new(e1, e2, d).unwrap();
            let dressed = spec.dress();
            let ch = derive_jump_channels(&spec, &baths()).unwrap();
            let sum = |role: BathRole| -> CMatrix3 {
                ch.iter().filter(|x| x.bath == role).map(|x| x.operator).sum()
            };
            let emitter = dressed.to_dressed(&local(0, 1));
            let collector = dressed.to_dressed(&local(0, 2));
            let base_local = local(1, 1) - local(2, 2);
            let base = dressed.to_dressed(&base_local);
            prop_assert!(max_abs(&(sum(BathRole::Emitter) - emitter)) < 1e-12);
            prop_assert!(max_abs(&(sum(BathRole::Collector) - collector)) < 1e-12);
            // The base coupling is Hermitian: the relaxation channel contributes
            // itself plus its adjoint (the -omega component).
            let relax = ch[4].operator;
            let rebuilt = relax + relax.adjoint() + ch[5].operator;
            prop_assert!(max_abs(&(rebuilt - base)) < 1e-12);
        }
    }
}
