//! Surface Pauli operator: coefficient assembly, closed-form references and comparison.

pub mod compare;
pub mod continuum;
pub mod normal;
pub mod oracle;

use crate::em_field::EMField;
use crate::error::{Error, Result};
use crate::geometry::{geometric_potential, geometry_at_tol, Domain, GeometryPoint, SurfaceChart, DEFAULT_DEGENERACY_TOL};
use crate::solver::GridSpec;
use crate::spin::{self, pauli, CMat2};
use crate::Units;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub use compare::{compare_operators, ComparisonReport, TermStatus};
pub use continuum::{ContinuumOperator, SpinorJet};
pub use normal::{normal_mode_report, NormalModel};
pub use oracle::{closed_form_oracle, ClosedFormOperator, OracleParams};

pub type CVec2 = Vector2<Complex64>;

/// The separately tracked pieces of the surface operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermGroup {
    /// `-(hbar^2/2m) (1/sqrt g) d_a sqrt g g^ab d_b`
    Kinetic,
    /// `-(i e hbar/m) g^ab A_a d_b`
    MagneticFirstOrder,
    /// `-(i e hbar/2m sqrt g) d_a (sqrt g g^ab A_b)`
    MagneticDivergence,
    /// `(e^2/2m) g^ab A_a A_b`
    MagneticQuadratic,
    /// `(e hbar/2m sqrt g) eps^ab d_a A_b sigma_3`
    ZeemanNormal,
    /// `(e hbar/2m sqrt g) eps^ab sigma_a d_b A_3`
    ZeemanTangential,
    GeometricPotential,
    /// `-e phi_e`
    Electric,
    /// `-(hbar^2/m) g^ab Omega_a d_b` with `Omega_a = U d_a U^-1`
    SpinConnectionFirstOrder,
    /// `-(hbar^2/2m) [(1/sqrt g) d_a (sqrt g g^ab Omega_b) + g^ab Omega_a Omega_b]`
    SpinConnectionScalar,
    /// `-(i e hbar/m) g^ab A_a Omega_b`
    SpinConnectionMagnetic,
}

impl TermGroup {
    pub const ALL: [TermGroup; 11] = [
        TermGroup::Kinetic,
        TermGroup::MagneticFirstOrder,
        TermGroup::MagneticDivergence,
        TermGroup::MagneticQuadratic,
        TermGroup::ZeemanNormal,
        TermGroup::ZeemanTangential,
        TermGroup::GeometricPotential,
        TermGroup::Electric,
        TermGroup::SpinConnectionFirstOrder,
        TermGroup::SpinConnectionScalar,
        TermGroup::SpinConnectionMagnetic,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TermGroup::Kinetic => "kinetic",
            TermGroup::MagneticFirstOrder => "magnetic_first_order",
            TermGroup::MagneticDivergence => "magnetic_divergence",
            TermGroup::MagneticQuadratic => "magnetic_quadratic",
            TermGroup::ZeemanNormal => "zeeman_normal",
            TermGroup::ZeemanTangential => "zeeman_tangential",
            TermGroup::GeometricPotential => "geometric_potential",
            TermGroup::Electric => "electric",
            TermGroup::SpinConnectionFirstOrder => "spin_connection_first_order",
            TermGroup::SpinConnectionScalar => "spin_connection_scalar",
            TermGroup::SpinConnectionMagnetic => "spin_connection_magnetic",
        }
    }

    pub fn from_tag(tag: &str) -> Option<TermGroup> {
        TermGroup::ALL.into_iter().find(|g| g.tag() == tag)
    }

    pub fn involves_spin(self) -> bool {
        matches!(
            self,
            TermGroup::ZeemanNormal
                | TermGroup::ZeemanTangential
                | TermGroup::SpinConnectionFirstOrder
                | TermGroup::SpinConnectionScalar
                | TermGroup::SpinConnectionMagnetic
        )
    }
}

/// Which spinor basis the operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// `chi' = U chi`: the normal Pauli matrix is the constant `sigma_3`.
    Primed,
    /// Fixed Cartesian spin axes; the normal matrix is `n . sigma`.
    Lab,
}

/// Finite-difference order of the derivative stencils along each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilOrder {
    Second,
    Fourth,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Drop every spin-dependent term and act on scalar fields.
    pub spinless: bool,
    pub representation: Representation,
    pub stencil: StencilOrder,
    /// Test hook: flip the sign of one term group.
    pub corrupt_sign: Option<TermGroup>,
    pub degeneracy_tol: f64,
    /// Largest `|A_3|` on the surface accepted without a thin-layer gauge.
    pub a3_tol: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            spinless: false,
            representation: Representation::Primed,
            stencil: StencilOrder::Fourth,
            corrupt_sign: None,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            a3_tol: 1e-10,
        }
    }
}

impl AssemblyOptions {
    pub fn spinless() -> Self {
        Self { spinless: true, ..Self::default() }
    }

    pub fn lab() -> Self {
        Self { representation: Representation::Lab, ..Self::default() }
    }

    pub(crate) fn sign(&self, g: TermGroup) -> f64 {
        if self.corrupt_sign == Some(g) {
            -1.0
        } else {
            1.0
        }
    }

    /// Whether the spinor rotation is applied.
    pub fn rotates(&self) -> bool {
        !self.spinless && self.representation == Representation::Primed
    }
}

/// Coefficients of every term of the surface operator at one node.
#[derive(Clone, Debug, Serialize)]
pub struct PointCoefficients {
    pub q: [f64; 2],
    pub sqrt_g: f64,
    pub g_inv: Matrix2<f64>,
    /// Kinetic flux tensor `sqrt g g^ab`.
    pub flux: Matrix2<f64>,
    /// Surface components `A_a` at `q3 = 0`.
    pub a: [f64; 2],
    /// `g^ab A_a`, the first-order magnetic coefficients.
    pub magnetic_first_order: [f64; 2],
    /// `(1/sqrt g) d_a (sqrt g g^ab A_b)`.
    pub divergence: f64,
    /// `g^ab A_a A_b`.
    pub a_squared: f64,
    pub geometric_potential: f64,
    /// `-e phi_e`.
    pub electric: f64,
    /// Coefficient of the normal Pauli matrix, `(e hbar/2m sqrt g) eps^ab d_a A_b`.
    pub zeeman_normal: f64,
    /// Coefficients of `sigma_a`, `(e hbar/2m sqrt g) eps^ab d_b A_3`.
    pub zeeman_tangential: [f64; 2],
    /// Spinor rotation at the node (identity when not rotating).
    pub u: CMat2,
    /// Normal Pauli matrix in the operator's representation.
    pub sigma_normal: CMat2,
    /// Covariant tangential Pauli matrices `sigma_a = g_ab sigma^b` in the representation.
    pub sigma_lower: [CMat2; 2],
}

impl PointCoefficients {
    /// On-site matrix: geometric, electric and Zeeman terms.
    pub fn potential_matrix(&self, options: &AssemblyOptions) -> CMat2 {
        let scalar = options.sign(TermGroup::GeometricPotential) * self.geometric_potential
            + options.sign(TermGroup::Electric) * self.electric;
        let mut m = Matrix2::identity() * Complex64::new(scalar, 0.0);
        if !options.spinless {
            m += self.sigma_normal * Complex64::new(options.sign(TermGroup::ZeemanNormal) * self.zeeman_normal, 0.0);
            let zt = options.sign(TermGroup::ZeemanTangential);
            for a in 0..2 {
                m += self.sigma_lower[a] * Complex64::new(zt * self.zeeman_tangential[a], 0.0);
            }
        }
        m
    }
}

/// Spinor rotation at `q`, continued from `hint` for charts without a closed form.
pub fn spinor_rotation(chart: &dyn SurfaceChart, geom: &GeometryPoint, hint: Option<&CMat2>) -> CMat2 {
    spin::spin_frame_at(chart, geom, hint).u
}

/// Assembled coefficient data of the surface operator on a grid.
#[derive(Clone)]
pub struct SurfacePauliOperator {
    pub chart: Arc<dyn SurfaceChart>,
    pub field: EMField,
    pub units: Units,
    pub grid: GridSpec,
    pub domain: Domain,
    pub options: AssemblyOptions,
    /// Row-major node data, `nodes[i * n2 + j]`.
    pub nodes: Vec<PointCoefficients>,
}

impl std::fmt::Debug for SurfacePauliOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfacePauliOperator")
            .field("chart", &self.chart.name())
            .field("field", &self.field.label)
            .field("grid", &self.grid)
            .field("options", &self.options)
            .finish()
    }
}

impl SurfacePauliOperator {
    pub fn components(&self) -> usize {
        if self.options.spinless {
            1
        } else {
            2
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn continuum(&self) -> ContinuumOperator<'_> {
        ContinuumOperator::new(self.chart.as_ref(), &self.field, self.units, self.options.clone())
    }

    /// Largest tangential (`sigma_1`, `sigma_2`) Pauli coefficient of the on-site Zeeman slots.
    pub fn zeeman_tangential_coefficients(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for p in &self.nodes {
            let mut m = p.sigma_normal * Complex64::new(p.zeeman_normal, 0.0);
            for a in 0..2 {
                m += p.sigma_lower[a] * Complex64::new(p.zeeman_tangential[a], 0.0);
            }
            let (_, c) = spin::pauli_coefficients(&m);
            worst = worst.max(c[0].norm()).max(c[1].norm());
        }
        worst
    }
}

/// Build the node coefficients of the surface operator.
///
/// The field must already be in the thin-layer gauge: a nonzero `A_3` on the
/// surface is rejected.
pub fn assemble_surface_operator(
    chart: Arc<dyn SurfaceChart>,
    field: &EMField,
    grid: &GridSpec,
    units: Units,
    options: &AssemblyOptions,
) -> Result<SurfacePauliOperator> {
    units.validate()?;
    let domain = grid.validate(chart.as_ref(), options)?;
    let coords = grid.node_coordinates(&domain);
    let n2 = grid.n[1];
    let ch = chart.as_ref();

    let geoms: Vec<GeometryPoint> = coords
        .par_iter()
        .map(|q| geometry_at_tol(ch, q[0], q[1], options.degeneracy_tol))
        .collect::<Result<_>>()?;

    let us: Vec<CMat2> = if !options.rotates() {
        vec![Matrix2::identity(); coords.len()]
    } else if coords.first().and_then(|q| ch.closed_form_spinor(*q)).is_some() {
        coords.iter().map(|q| ch.closed_form_spinor(*q).unwrap()).collect()
    } else {
        let axis0: Vec<f64> = (0..grid.n[0]).map(|i| coords[i * n2][0]).collect();
        let axis1: Vec<f64> = (0..n2).map(|j| coords[j][1]).collect();
        spin::propagate_branch(ch, [&axis0, &axis1], [None, None])?.u
    };

    let e = field.e_charge;
    let zeeman_scale = e * units.hbar / (2.0 * units.mass);
    let nodes: Vec<PointCoefficients> = geoms
        .par_iter()
        .zip(us.par_iter())
        .map(|(p, u)| -> Result<PointCoefficients> {
            let q = p.q;
            let a_full = field.vector_potential([q[0], q[1], 0.0]);
            if a_full[2].abs() > options.a3_tol {
                return Err(Error::GaugePrecondition { q1: q[0], q2: q[1], a3: a_full[2] });
            }
            let a = [a_full[0], a_full[1]];
            let mfo = [
                p.g_inv[(0, 0)] * a[0] + p.g_inv[(0, 1)] * a[1],
                p.g_inv[(1, 0)] * a[0] + p.g_inv[(1, 1)] * a[1],
            ];
            let a_squared = a[0] * mfo[0] + a[1] * mfo[1];
            let flux_a = |x: [f64; 2]| -> Vector2<f64> {
                match geometry_at_tol(ch, x[0], x[1], 0.0) {
                    Ok(gp) => {
                        let av = field.vector_potential([x[0], x[1], 0.0]);
                        gp.g_inv * Vector2::new(av[0], av[1]) * gp.sqrt_g
                    }
                    Err(_) => Vector2::new(f64::NAN, f64::NAN),
                }
            };
            let divergence = (crate::numdiff::partial(flux_a, q, 0, crate::numdiff::FIRST_STEP)[0]
                + crate::numdiff::partial(flux_a, q, 1, crate::numdiff::FIRST_STEP)[1])
                / p.sqrt_g;
            let curl = field.surface_curl(q[0], q[1]);
            let da3 = field.normal_component_gradient(q[0], q[1]);
            let induced = spin::induced_pauli_at(p);
            let ud = u.adjoint();
            let (sigma_normal, sigma_upper) = if options.rotates() {
                (pauli()[2], [u * induced.tangential[0] * ud, u * induced.tangential[1] * ud])
            } else {
                (induced.normal, induced.tangential)
            };
            let lower = |a: usize| {
                sigma_upper[0] * Complex64::new(p.g[(a, 0)], 0.0) + sigma_upper[1] * Complex64::new(p.g[(a, 1)], 0.0)
            };
            Ok(PointCoefficients {
                q,
                sqrt_g: p.sqrt_g,
                g_inv: p.g_inv,
                flux: p.g_inv * p.sqrt_g,
                a,
                magnetic_first_order: mfo,
                divergence,
                a_squared,
                geometric_potential: geometric_potential(p, units.hbar, units.mass),
                electric: -e * field.scalar_potential([q[0], q[1], 0.0]),
                zeeman_normal: zeeman_scale * curl / p.sqrt_g,
                zeeman_tangential: [zeeman_scale * da3[1] / p.sqrt_g, -zeeman_scale * da3[0] / p.sqrt_g],
                u: *u,
                sigma_normal,
                sigma_lower: [lower(0), lower(1)],
            })
        })
        .collect::<Result<_>>()?;

    Ok(SurfacePauliOperator {
        chart,
        field: field.clone(),
        units,
        grid: grid.clone(),
        domain,
        options: options.clone(),
        nodes,
    })
}

/// Two-component field on the grid nodes.
#[derive(Clone, Debug, Serialize)]
pub struct SpinorField {
    pub n: [usize; 2],
    pub components: usize,
    pub representation: Representation,
    /// Node-major values, `values[node * components + s]`.
    pub values: Vec<Complex64>,
    /// Quadrature weights `sqrt g dq1 dq2` per node.
    pub weights: Vec<f64>,
    pub coords: Vec<[f64; 2]>,
}

impl SpinorField {
    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    /// Weighted inner product `sum_nodes w <a, b>`.
    pub fn inner(&self, other: &SpinorField) -> Complex64 {
        let c = self.components;
        self.weights
            .iter()
            .enumerate()
            .map(|(k, w)| {
                (0..c)
                    .map(|s| self.values[k * c + s].conj() * other.values[k * c + s])
                    .sum::<Complex64>()
                    * *w
            })
            .sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        for v in &mut self.values {
            *v /= n;
        }
        self
    }

    pub fn spinor(&self, node: usize) -> CVec2 {
        if self.components == 1 {
            CVec2::new(self.values[node], Complex64::new(0.0, 0.0))
        } else {
            CVec2::new(self.values[2 * node], self.values[2 * node + 1])
        }
    }

    /// Convert between primed and lab bases with the operator's node rotations.
    pub fn to_representation(&self, op: &SurfacePauliOperator, target: Representation) -> SpinorField {
        let mut out = self.clone();
        out.representation = target;
        if self.components == 1 || self.representation == target {
            return out;
        }
        for (k, node) in op.nodes.iter().enumerate() {
            let v = self.spinor(k);
            let w = match target {
                Representation::Primed => node.u * v,
                Representation::Lab => node.u.adjoint() * v,
            };
            out.values[2 * k] = w[0];
            out.values[2 * k + 1] = w[1];
        }
        out
    }
}
