//! Bath dissipators and the full Liouvillian as 9x9 superoperators.
//!
//! Density matrices are vectorised by stacking columns: entry `(i, j)` of a
//! 3x3 matrix lives at index `i + 3 j`. With this convention
//! `vec(A X B) = (B^T (x) A) vec(X)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{jump_channels, BathRole, BathSpec, Baths, CMatrix3, DressedBasis, JumpChannel, SystemSpec};

pub type SuperOp = SMatrix<Complex64, 9, 9>;
pub type StateVec = SVector<Complex64, 9>;

pub fn vectorize(m: &CMatrix3) -> StateVec {
    // nalgebra storage is already column-major.
    StateVec::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &StateVec) -> CMatrix3 {
    CMatrix3::from_column_slice(v.as_slice())
}

/// Superoperator of `X -> a X b`.
pub fn sandwich(a: &CMatrix3, b: &CMatrix3) -> SuperOp {
    SuperOp::from_fn(|row, col| {
        let (i, k) = (row % 3, row / 3);
        let (j, l) = (col % 3, col / 3);
        b[(l, k)] * a[(i, j)]
    })
}

pub fn left_multiplier(a: &CMatrix3) -> SuperOp {
    sandwich(a, &CMatrix3::identity())
}

pub fn right_multiplier(b: &CMatrix3) -> SuperOp {
    sandwich(&CMatrix3::identity(), b)
}

/// `X -> a X b^dag - 1/2 {b^dag a, X}`. With `a == b` this is the usual
/// Lindblad dissipator; with `a != b` it is one half of a cross term.
pub fn lindblad_pair(a: &CMatrix3, b: &CMatrix3) -> SuperOp {
    let bd = b.adjoint();
    let bda = bd * a;
    sandwich(a, &bd) - (left_multiplier(&bda) + right_multiplier(&bda)) * Complex64::new(0.5, 0.0)
}

/// `-i [h, X]`.
pub fn commutator(h: &CMatrix3) -> SuperOp {
    (left_multiplier(h) - right_multiplier(h)) * Complex64::new(0.0, -1.0)
}

/// Bose-Einstein occupation `1 / (exp(v/T) - 1)` with `k_B = 1`.
pub fn bose_occupation(v: f64, temperature: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter { name: "v", value: v, reason: "mode energy must be positive" });
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "temperature",
            value: temperature,
            reason: "must be positive",
        });
    }
    Ok(occupation(v, temperature))
}

#[inline]
fn occupation(v: f64, temperature: f64) -> f64 {
    (v / temperature).exp_m1().recip()
}

/// Transition rates `gamma_i(v)` of one bath in the wide-band limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFunction {
    pub role: BathRole,
    pub gamma: f64,
    pub temperature: f64,
    pub dephasing: f64,
}

impl RateFunction {
    pub fn new(bath: &BathSpec) -> Self {
        Self {
            role: bath.role,
            gamma: bath.gamma_wideband,
            temperature: bath.temperature,
            dephasing: bath.dephasing(),
        }
    }

    /// Emission (`v > 0`), absorption (`v < 0`) or pure dephasing (`v = 0`).
    /// Absorption uses the occupation of the `|v|` mode.
    pub fn rate(&self, v: f64) -> f64 {
        if v > 0.0 {
            self.gamma * (1.0 + occupation(v, self.temperature))
        } else if v < 0.0 {
            self.gamma * occupation(-v, self.temperature)
        } else {
            self.dephasing
        }
    }
}

/// Contribution of one jump channel: the downward jump at `gamma(v)` plus the
/// upward jump `A^dag` at `gamma(-v)`, or a single dephasing term at `v = 0`.
pub fn dissipator(channel: &JumpChannel, rates: &RateFunction) -> SuperOp {
    debug_assert_eq!(channel.bath, rates.role);
    let a = &channel.operator;
    if channel.frequency == 0.0 {
        return lindblad_pair(a, a) * Complex64::from(rates.rate(0.0));
    }
    let down = rates.rate(channel.frequency);
    let up = rates.rate(-channel.frequency);
    let ad = a.adjoint();
    lindblad_pair(a, a) * Complex64::from(down) + lindblad_pair(&ad, &ad) * Complex64::from(up)
}

/// Interference between two channels of the same bath. Both the downward
/// and the upward pair use the geometric mean of the two rates, which keeps
/// the Kossakowski matrix positive semidefinite.
pub fn cross_dissipator(first: &JumpChannel, second: &JumpChannel, rates: &RateFunction) -> SuperOp {
    debug_assert_eq!(first.bath, second.bath);
    let (a1, a2) = (&first.operator, &second.operator);
    let (a1d, a2d) = (a1.adjoint(), a2.adjoint());
    let down = (rates.rate(first.frequency) * rates.rate(second.frequency)).sqrt();
    let up = (rates.rate(-first.frequency) * rates.rate(-second.frequency)).sqrt();
    (lindblad_pair(a1, a2) + lindblad_pair(a2, a1)) * Complex64::from(down)
        + (lindblad_pair(&a1d, &a2d) + lindblad_pair(&a2d, &a1d)) * Complex64::from(up)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Independent Lindblad terms for every Bohr frequency.
    Secular,
    /// Keeps the emitter and collector cross terms between the `eps_plus`
    /// and `eps_minus` channels, which feed the dressed coherence.
    #[default]
    PartialSecular,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Secular, Variant::PartialSecular];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Secular => "secular",
            Variant::PartialSecular => "partial",
        }
    }
}


impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "secular" => Ok(Variant::Secular),
            "partial" | "partial_secular" | "partialsecular" | "partial-secular" => Ok(Variant::PartialSecular),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }
}

/// The generator `-i[H_S, .] + D_E + D_C + D_B`, expressed in the dressed
/// basis, together with the per-bath pieces needed for heat currents.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub matrix: SuperOp,
    pub variant: Variant,
    pub dressed: DressedBasis,
    /// Per-bath dissipators, indexed by `BathRole as usize`.
    pub parts: [SuperOp; 3],
}

impl Liouvillian {
    pub fn part(&self, role: BathRole) -> &SuperOp {
        &self.parts[role as usize]
    }

    /// `H_S` in the dressed basis.
    pub fn hamiltonian(&self) -> CMatrix3 {
        self.dressed.hamiltonian()
    }

    pub fn apply(&self, rho: &CMatrix3) -> CMatrix3 {
        unvectorize(&(self.matrix * vectorize(rho)))
    }

    pub fn apply_part(&self, role: BathRole, rho: &CMatrix3) -> CMatrix3 {
        unvectorize(&(self.part(role) * vectorize(rho)))
    }
}

pub fn assemble(spec: &SystemSpec, baths: &Baths, variant: Variant) -> Liouvillian {
    let dressed = spec.dress();
    let channels = jump_channels(&dressed, baths);
    let mut parts = [SuperOp::zeros(); 3];
    for ch in &channels {
        let rates = RateFunction::new(baths.get(ch.bath));
        parts[ch.bath as usize] += dissipator(ch, &rates);
    }
    if variant == Variant::PartialSecular {
        for role in [BathRole::Emitter, BathRole::Collector] {
            let pair: Vec<&JumpChannel> = channels.iter().filter(|c| c.bath == role).collect();
            let rates = RateFunction::new(baths.get(role));
            parts[role as usize] += cross_dissipator(pair[0], pair[1], &rates);
        }
    }
    let matrix = commutator(&dressed.hamiltonian()) + parts[0] + parts[1] + parts[2];
    Liouvillian { matrix, variant, dressed, parts }
}
