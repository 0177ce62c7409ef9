//! Nonequilibrium steady state of a Liouvillian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::{unvectorize, vectorize, Liouvillian, StateVec};
use crate::model::{CMatrix3, DressedBasis};

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Local,
    Dressed,
}

/// A 3x3 density matrix tagged with the basis its entries refer to. It carries
/// the dressed rotation so that it can convert itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix3,
    basis: Basis,
    dressed: DressedBasis,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix3, basis: Basis, dressed: DressedBasis) -> Self {
        Self { entries, basis, dressed }
    }

    pub fn entries(&self) -> &CMatrix3 {
        &self.entries
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dressed_basis(&self) -> &DressedBasis {
        &self.dressed
    }

    pub fn to_basis(&self, basis: Basis) -> Self {
        let entries = match (self.basis, basis) {
            (Basis::Local, Basis::Dressed) => self.dressed.to_dressed(&self.entries),
            (Basis::Dressed, Basis::Local) => self.dressed.to_local(&self.entries),
            _ => self.entries,
        };
        Self { entries, basis, dressed: self.dressed }
    }

    pub fn local(&self) -> Self {
        self.to_basis(Basis::Local)
    }

    pub fn in_dressed(&self) -> Self {
        self.to_basis(Basis::Dressed)
    }

    /// Real part of `<i|rho|i>` in the current basis.
    pub fn population(&self, i: usize) -> f64 {
        self.entries[(i, i)].re
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let m = &self.entries;
        let asym = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITICITY_TOLERANCE {
            return Err(Error::UnphysicalState(format!("not Hermitian (max |rho - rho^dag| = {asym:e})")));
        }
        let tr = m.trace();
        if (tr - Complex64::from(1.0)).norm() > TRACE_TOLERANCE {
            return Err(Error::UnphysicalState(format!("trace {tr} != 1")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOLERANCE {
            return Err(Error::UnphysicalState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.entries + self.entries.adjoint()) * Complex64::from(0.5);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `<1|rho|2>` in the local basis.
pub fn local_coherence(rho: &DensityMatrix) -> Complex64 {
    rho.local().entries[(1, 2)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Dressed-basis steady state.
    pub rho: DensityMatrix,
    /// `max |L vec(rho)|`.
    pub residual: f64,
}

/// Solves `L vec(rho) = 0`, `Tr rho = 1`.
///
/// One of the population rows (indices 0, 4, 8) is replaced by the trace
/// functional; of those, the row with the smallest norm is dropped since it
/// carries the least independent information. The kernel dimension is
/// checked first with an SVD so that multiple steady states are reported
/// instead of silently picking one.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let sv = l.matrix.singular_values();
    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let max = sorted[8];
    let rank = sorted.iter().filter(|&&s| s > RANK_TOLERANCE * max).count();
    if rank < 8 {
        return Err(Error::DegenerateKernel { rank, sv: [sorted[0], sorted[1]] });
    }

    let drop = [0usize, 4, 8]
        .into_iter()
        .min_by(|&a, &b| l.matrix.row(a).norm().total_cmp(&l.matrix.row(b).norm()))
        .unwrap();
    let mut system = l.matrix;
    for col in 0..9 {
        system[(drop, col)] = Complex64::from(if col % 4 == 0 { 1.0 } else { 0.0 });
    }
    let mut rhs = StateVec::zeros();
    rhs[drop] = Complex64::from(1.0);
    let x = system
        .lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateKernel { rank, sv: [sorted[0], sorted[1]] })?;

    let raw = unvectorize(&x);
    let entries = (raw + raw.adjoint()) * Complex64::from(0.5);
    let residual = (l.matrix * vectorize(&entries)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::NoConvergence { residual, tolerance: RESIDUAL_TOLERANCE });
    }
    let rho = DensityMatrix::new(entries, Basis::Dressed, l.dressed);
    rho.validate()?;
    Ok(SteadyState { rho, residual })
}
