//! Thin-layer Pauli operators for a charged spin-1/2 particle on a curved surface.
//!
//! The crate covers surface geometry ([`geometry`]), the spinor frame ([`spin`]),
//! electromagnetic potentials ([`em_field`]), operator assembly with closed-form
//! references ([`hamiltonian`]) and the discrete eigenproblem ([`solver`]).

pub mod checks;
pub mod em_field;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod numdiff;
pub mod solver;
pub mod spin;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use em_field::{EMField, GaugeFunction};
pub use geometry::{
    bulk_metric_at, build_chart, geometric_potential_at, geometry_at, BulkMetric, ChartParams, Domain, GeometryPoint,
    SurfaceChart,
};
pub use hamiltonian::{
    assemble_surface_operator, AssemblyOptions, Representation, SpinorField, SurfacePauliOperator, TermGroup,
};
pub use solver::{discretize, eigensolve, Boundary, DiscreteOperator, EigenOptions, GridSpec, SpectrumResult};
pub use spin::{SpinFrame, SpinIdentityReport};

use serde::{Deserialize, Serialize};

/// Physical constants of a run. Defaults to `hbar = m = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

impl Units {
    /// `hbar^2 / 2m`.
    pub fn kinetic(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    /// `hbar` must be finite and positive; `mass` positive, possibly infinite.
    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::Units(format!("hbar = {}", self.hbar)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::Units(format!("mass = {}", self.mass)));
        }
        Ok(())
    }
}
