//! Grids, discretization, eigenpairs and observables.

pub mod discretize;
pub mod eigen;
pub mod grid;
pub mod io;
pub mod sparse;

pub use discretize::{discretize, DiscreteOperator};
pub use eigen::{eigensolve, multiplets, EigenOptions, Multiplet, SpectrumResult};
pub use grid::{Boundary, GridSpec};
pub use sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::{SpinorField, SurfacePauliOperator};
use crate::spin::{pauli, CMat2};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// The normal Pauli matrix.
    SigmaRho,
    Sigma1,
    Sigma2,
    /// `<q_axis^power>`.
    Position { axis: usize, power: i32 },
    GeometricPotential,
}

/// Expectation value in the weighted inner product of a normalized field.
pub fn expectation(op: &SurfacePauliOperator, field: &SpinorField, obs: Observable) -> Result<f64> {
    let norm = field.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(norm));
    }
    if field.values.len() != op.node_count() * field.components {
        return Err(Error::GridMismatch("field and operator have different grids".into()));
    }
    let spin_obs = matches!(obs, Observable::SigmaRho | Observable::Sigma1 | Observable::Sigma2);
    if spin_obs && field.components != 2 {
        return Err(Error::Observable("spin observables need a two-component field".into()));
    }
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    for (k, w) in field.weights.iter().enumerate() {
        let v = field.spinor(k);
        let m: CMat2 = match obs {
            Observable::SigmaRho => io::normal_matrix(op, field.representation, k),
            Observable::Sigma1 => pauli()[0],
            Observable::Sigma2 => pauli()[1],
            Observable::Position { axis, power } => {
                CMat2::identity() * num_complex::Complex64::new(field.coords[k][axis].powi(power), 0.0)
            }
            Observable::GeometricPotential => {
                CMat2::identity() * num_complex::Complex64::new(op.nodes[k].geometric_potential, 0.0)
            }
        };
        total += (v.adjoint() * m * v)[(0, 0)] * *w;
    }
    if total.im.abs() > 1e-12 * total.re.abs().max(1.0) {
        return Err(Error::Observable(format!("expectation has imaginary part {}", total.im)));
    }
    Ok(total.re)
}
