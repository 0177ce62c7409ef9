//! Steady-state heat transport through a three-level system coupled to an
//! emitter, a collector and a base reservoir.
//!
//! The pipeline is: [`model`] (Hamiltonian, dressed basis, jump operators)
//! → [`liouville`] (9x9 generator) → [`steady`] (stationary density matrix)
//! → [`thermo`] (heat currents, conductances, amplification). [`cli`] wraps
//! it in configuration parsing, parameter sweeps and CSV/JSON output.

pub mod cli;
pub mod error;
pub mod liouville;
pub mod model;
pub mod point;
pub mod steady;
pub mod thermo;

pub use error::{Error, Result};
pub use liouville::{assemble, Liouvillian, Variant};
pub use model::{BathRole, BathSpec, Baths, DressedBasis, JumpChannel, SystemSpec};
pub use point::{OperatingPoint, Solution, SweepAxis};
pub use steady::{local_coherence, steady_state, Basis, DensityMatrix, SteadyState};
