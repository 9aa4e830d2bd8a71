//! Printed closed-form surface operators for the sphere, cylinder and torus presets.
//!
//! Each term is transcribed as printed and tagged with the group of the
//! assembled operator it corresponds to. Known disagreements carry an
//! allowance with a dimensionally consistent replacement.

use super::continuum::SpinorJet;
use super::{CVec2, TermGroup};
use crate::em_field::ScalarFn;
use crate::error::{Error, Result};
use crate::spin::{pauli, CMat2};
use crate::Units;
use num_complex::Complex64;
use std::sync::Arc;

pub type TermFn = Arc<dyn Fn([f64; 2], &SpinorJet) -> CVec2 + Send + Sync>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// One printed term.
#[derive(Clone)]
pub struct OracleTerm {
    pub tag: &'static str,
    pub group: TermGroup,
    pub apply: TermFn,
}

/// A group whose printed form is known to disagree with the assembly.
#[derive(Clone)]
pub struct Allowance {
    pub group: TermGroup,
    pub note: &'static str,
    /// Replacement checked against the assembled group instead.
    pub alternative: TermFn,
}

/// A statement in the surrounding text that conflicts with the printed equation.
#[derive(Clone)]
pub struct ProseNote {
    pub tag: &'static str,
    pub group: TermGroup,
    pub note: &'static str,
    pub term: TermFn,
}

#[derive(Clone)]
pub struct OracleParams {
    pub units: Units,
    pub e_charge: f64,
    /// Sphere or tube radius.
    pub r: f64,
    /// Torus centre-line radius.
    pub big_r: f64,
    /// Sphere `B`, cylinder and torus `B0`.
    pub b0: f64,
    pub b1: f64,
    pub phi_e: Option<ScalarFn>,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { units: Units::default(), e_charge: 1.0, r: 1.0, big_r: 3.0, b0: 0.0, b1: 0.0, phi_e: None }
    }
}

#[derive(Clone)]
pub struct ClosedFormOperator {
    pub chart: &'static str,
    pub terms: Vec<OracleTerm>,
    pub allowances: Vec<Allowance>,
    pub prose: Vec<ProseNote>,
}

impl ClosedFormOperator {
    pub fn terms_for(&self, group: TermGroup) -> Vec<&OracleTerm> {
        self.terms.iter().filter(|t| t.group == group).collect()
    }

    pub fn allowance(&self, group: TermGroup) -> Option<&Allowance> {
        self.allowances.iter().find(|a| a.group == group)
    }

    pub fn apply_group(&self, group: TermGroup, q: [f64; 2], jet: &SpinorJet) -> CVec2 {
        self.terms_for(group).iter().map(|t| (t.apply)(q, jet)).sum()
    }

    pub fn apply(&self, q: [f64; 2], jet: &SpinorJet) -> CVec2 {
        self.terms.iter().map(|t| (t.apply)(q, jet)).sum()
    }
}

fn second(a: usize, b: usize, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> TermFn {
    Arc::new(move |q, j| j.hess[a][b] * c(f(q)))
}

fn first(a: usize, f: impl Fn([f64; 2]) -> CMat2 + Send + Sync + 'static) -> TermFn {
    Arc::new(move |q, j| f(q) * j.grad[a])
}

fn scalar_first(a: usize, f: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static) -> TermFn {
    Arc::new(move |q, j| j.grad[a] * f(q))
}

fn local(f: impl Fn([f64; 2]) -> CMat2 + Send + Sync + 'static) -> TermFn {
    Arc::new(move |q, j| f(q) * j.value)
}

fn scalar(f: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static) -> TermFn {
    Arc::new(move |q, j| j.value * f(q))
}

fn sum(parts: Vec<TermFn>) -> TermFn {
    Arc::new(move |q, j| parts.iter().map(|p| p(q, j)).sum())
}

fn term(tag: &'static str, group: TermGroup, apply: TermFn) -> OracleTerm {
    OracleTerm { tag, group, apply }
}

fn electric(p: &OracleParams, factor: f64) -> TermFn {
    let phi = p.phi_e.clone();
    let e = p.e_charge;
    scalar(move |q| c(factor * e * phi.as_ref().map_or(0.0, |f| f([q[0], q[1], 0.0]))))
}

/// `cos(theta) sigma_3 - sin(theta) sigma_1`.
fn tilted(theta: f64) -> CMat2 {
    let s = pauli();
    s[2] * c(theta.cos()) - s[0] * c(theta.sin())
}

/// Closed-form operator for `chart_name` with its built-in field preset.
pub fn closed_form_oracle(chart_name: &str, p: &OracleParams) -> Result<ClosedFormOperator> {
    match chart_name {
        "sphere" => Ok(sphere(p)),
        "cylinder" => Ok(cylinder(p)),
        "torus" => Ok(torus(p)),
        other => Err(Error::UnsupportedOracle(format!("no closed form for chart '{other}'"))),
    }
}

fn sphere(p: &OracleParams) -> ClosedFormOperator {
    let (h, m, e, r, b) = (p.units.hbar, p.units.mass, p.e_charge, p.r, p.b0);
    let s3 = pauli()[2];
    let s2 = pauli()[1];
    let k = h * h / (2.0 * m);
    let sin2 = |q: [f64; 2]| q[0].sin().powi(2);
    let terms = vec![
        term("d2_theta", TermGroup::Kinetic, second(0, 0, move |_| -k / (r * r))),
        term(
            "cot_d_theta",
            TermGroup::Kinetic,
            scalar_first(0, move |q| c(-k * q[0].cos() / (r * r * q[0].sin()))),
        ),
        term("d2_phi", TermGroup::Kinetic, second(1, 1, move |q| -k / (r * r * sin2(q)))),
        term(
            "sigma_rho_d_phi",
            TermGroup::SpinConnectionFirstOrder,
            first(1, move |q| s3 * (I * h * h / (2.0 * m * r * r * sin2(q)))),
        ),
        term("magnetic_d_phi", TermGroup::MagneticFirstOrder, scalar_first(1, move |_| -I * e * h * b / (2.0 * m))),
        term(
            "magnetic_quadratic",
            TermGroup::MagneticQuadratic,
            scalar(move |q| c(e * e * b * b * r * r * sin2(q) / (8.0 * m))),
        ),
        term("zeeman_cos", TermGroup::ZeemanNormal, local(move |q| s3 * c(e * h * b * q[0].cos() / (2.0 * m)))),
        term("zeeman_half", TermGroup::SpinConnectionMagnetic, local(move |_| s3 * c(e * h * b / (4.0 * m)))),
        term("spin_scalar", TermGroup::SpinConnectionScalar, scalar(move |q| c(h * h / (8.0 * m * r * r * sin2(q))))),
        term("electric", TermGroup::Electric, electric(p, 1.0 / (2.0 * m))),
    ];
    let allowances = vec![
        Allowance {
            group: TermGroup::SpinConnectionFirstOrder,
            note: "printed sigma_rho d_phi term lacks the cos(theta) factor and the sigma_1, sigma_2 d_theta parts",
            alternative: sum(vec![
                first(0, move |_| s2 * (I * h * h / (2.0 * m * r * r))),
                first(1, move |q| tilted(q[0]) * (I * h * h / (2.0 * m * r * r * sin2(q)))),
            ]),
        },
        Allowance {
            group: TermGroup::SpinConnectionScalar,
            note: "printed scalar omits the constant hbar^2/8mr^2 and the sigma_2 cot(theta) term",
            alternative: sum(vec![
                local(move |q| s2 * (I * h * h * q[0].cos() / (4.0 * m * r * r * q[0].sin()))),
                scalar(move |q| c(h * h / (8.0 * m * r * r) + h * h / (8.0 * m * r * r * sin2(q)))),
            ]),
        },
        Allowance {
            group: TermGroup::SpinConnectionMagnetic,
            note: "printed half-Zeeman term has the opposite sign and no cos(theta), sigma_1 structure",
            alternative: local(move |q| tilted(q[0]) * c(-e * h * b / (4.0 * m))),
        },
        Allowance {
            group: TermGroup::Electric,
            note: "printed inside the -1/2m bracket as +e phi_e",
            alternative: electric(p, -1.0),
        },
    ];
    let prose = vec![ProseNote {
        tag: "spin_scalar_text",
        group: TermGroup::SpinConnectionScalar,
        note: "text quotes -hbar^2/(8mr^2 sin^2 theta), the equation has +",
        term: scalar(move |q| c(-h * h / (8.0 * m * r * r * sin2(q)))),
    }];
    ClosedFormOperator { chart: "sphere", terms, allowances, prose }
}

fn cylinder(p: &OracleParams) -> ClosedFormOperator {
    let (h, m, e, r, b0, b1) = (p.units.hbar, p.units.mass, p.e_charge, p.r, p.b0, p.b1);
    let s3 = pauli()[2];
    let s2 = pauli()[1];
    let k = h * h / (2.0 * m);
    let terms = vec![
        term("d2_theta", TermGroup::Kinetic, second(0, 0, move |_| -k / (r * r))),
        term("d2_y", TermGroup::Kinetic, second(1, 1, move |_| -k)),
        term("magnetic_d_theta", TermGroup::MagneticFirstOrder, scalar_first(0, move |_| -I * e * h * b0 / (2.0 * m))),
        term(
            "magnetic_d_y",
            TermGroup::MagneticFirstOrder,
            scalar_first(1, move |q| -I * e * h * r * b1 * q[0].sin() / m),
        ),
        term(
            "magnetic_quadratic",
            TermGroup::MagneticQuadratic,
            scalar(move |q| c(e * e / (2.0 * m) * (0.25 * r * r * b0 * b0 + r * r * b1 * b1 * q[0].sin().powi(2)))),
        ),
        term("zeeman", TermGroup::ZeemanNormal, local(move |q| s3 * c(e * h * b1 * q[0].cos() / (2.0 * m)))),
        term("constant", TermGroup::SpinConnectionScalar, scalar(move |_| c(h * h / (8.0 * m * r * r)))),
    ];
    let allowances = vec![
        Allowance {
            group: TermGroup::GeometricPotential,
            note: "geometric potential absent from the printed equation",
            alternative: scalar(move |_| c(-h * h / (8.0 * m * r * r))),
        },
        Allowance {
            group: TermGroup::SpinConnectionFirstOrder,
            note: "sigma_2 d_theta term absent from the printed equation",
            alternative: first(0, move |_| s2 * (I * h * h / (2.0 * m * r * r))),
        },
        Allowance {
            group: TermGroup::SpinConnectionMagnetic,
            note: "sigma_2 B0 term absent from the printed equation",
            alternative: local(move |_| s2 * c(-e * h * b0 / (4.0 * m))),
        },
        Allowance { group: TermGroup::Electric, note: "electric potential absent from the printed equation", alternative: electric(p, -1.0) },
    ];
    let prose = vec![
        ProseNote {
            tag: "geometric_potential_text",
            group: TermGroup::GeometricPotential,
            note: "text quotes V_g = +hbar^2/8mr^2; the curvature formula gives -hbar^2/8mr^2",
            term: scalar(move |_| c(h * h / (8.0 * m * r * r))),
        },
        ProseNote {
            tag: "zeeman_text",
            group: TermGroup::ZeemanNormal,
            note: "text quotes the coupling as -(1/2m) e hbar B1 cos(theta) sigma_rho",
            term: local(move |q| s3 * c(-e * h * b1 * q[0].cos() / (2.0 * m))),
        },
    ];
    ClosedFormOperator { chart: "cylinder", terms, allowances, prose }
}

fn torus(p: &OracleParams) -> ClosedFormOperator {
    let (h, m, e, r, r0, b0, b1) = (p.units.hbar, p.units.mass, p.e_charge, p.r, p.big_r, p.b0, p.b1);
    let s3 = pauli()[2];
    let s2 = pauli()[1];
    let k = h * h / (2.0 * m);
    let big = move |q: [f64; 2]| r0 + r * q[0].sin();
    // B0 R - B1 r cos(theta) cos(phi)
    let w = move |q: [f64; 2]| b0 * big(q) - b1 * r * q[0].cos() * q[1].cos();
    let terms = vec![
        term("d2_theta", TermGroup::Kinetic, second(0, 0, move |_| -k / (r * r))),
        term("cos_d_theta", TermGroup::Kinetic, scalar_first(0, move |q| c(-k * q[0].cos() / (r * big(q))))),
        term("d2_phi", TermGroup::Kinetic, second(1, 1, move |q| -k / big(q).powi(2))),
        term("spin_scalar", TermGroup::SpinConnectionScalar, scalar(move |q| c(h * h / (8.0 * m * big(q).powi(2))))),
        term(
            "sigma_rho_d_phi",
            TermGroup::SpinConnectionFirstOrder,
            first(1, move |q| s3 * (I * h * h / (2.0 * m * big(q).powi(2)))),
        ),
        term(
            "magnetic_d_theta",
            TermGroup::MagneticFirstOrder,
            scalar_first(0, move |q| -I * e * h * b1 * (r0 * q[0].sin() + r) * q[1].sin() / (2.0 * m * r)),
        ),
        term(
            "magnetic_d_phi",
            TermGroup::MagneticFirstOrder,
            scalar_first(1, move |q| -I * e * h * w(q) / (2.0 * m * big(q))),
        ),
        term("sigma_rho_half", TermGroup::SpinConnectionMagnetic, local(move |q| s3 * c(-e * h * w(q) / (4.0 * m * big(q))))),
        term(
            "magnetic_divergence_pair",
            TermGroup::MagneticDivergence,
            scalar(move |q| {
                let rr = big(q);
                let first = (r0 * r0 + r * r + 2.0 * r * r0 * q[0].sin()) / (2.0 * r * rr);
                let second = r / (2.0 * rr);
                -I * e * h * b1 * q[0].cos() * q[1].sin() * (first + second) / (2.0 * m)
            }),
        ),
        term(
            "magnetic_quadratic",
            TermGroup::MagneticQuadratic,
            scalar(move |q| {
                let a = b1 * q[1].sin() * (r0 * q[0].sin() + r);
                c(e * e / (8.0 * m) * (a * a + w(q).powi(2)))
            }),
        ),
        term(
            "zeeman",
            TermGroup::ZeemanNormal,
            local(move |q| {
                let ct = q[0].cos();
                s3 * c(e * h / (2.0 * m) * (b0 + r / big(q) * b1 * ct * q[1].cos()) * ct)
            }),
        ),
        term(
            "geometric_potential",
            TermGroup::GeometricPotential,
            scalar(move |q| c(-h * r0 * r0 / (2.0 * m * (2.0 * r * big(q)).powi(2)))),
        ),
    ];
    let allowances = vec![
        Allowance {
            group: TermGroup::GeometricPotential,
            note: "printed with hbar to the first power",
            alternative: scalar(move |q| c(-h * h * r0 * r0 / (8.0 * m * r * r * big(q).powi(2)))),
        },
        Allowance {
            group: TermGroup::ZeemanNormal,
            note: "printed with + on the B1 part; the curl of the preset gives -",
            alternative: local(move |q| {
                let ct = q[0].cos();
                s3 * c(e * h / (2.0 * m) * (b0 - r / big(q) * b1 * ct * q[1].cos()) * ct)
            }),
        },
        Allowance {
            group: TermGroup::SpinConnectionFirstOrder,
            note: "printed sigma_rho d_phi term lacks the cos(theta) factor and the sigma_1, sigma_2 d_theta parts",
            alternative: sum(vec![
                first(0, move |_| s2 * (I * h * h / (2.0 * m * r * r))),
                first(1, move |q| tilted(q[0]) * (I * h * h / (2.0 * m * big(q).powi(2)))),
            ]),
        },
        Allowance {
            group: TermGroup::SpinConnectionScalar,
            note: "printed scalar omits hbar^2/8mr^2 and the sigma_2 cos(theta)/rR term",
            alternative: sum(vec![
                local(move |q| s2 * (I * h * h * q[0].cos() / (4.0 * m * r * big(q)))),
                scalar(move |q| c(h * h / (8.0 * m * r * r) + h * h / (8.0 * m * big(q).powi(2)))),
            ]),
        },
        Allowance {
            group: TermGroup::SpinConnectionMagnetic,
            note: "printed sigma_rho term lacks the cos(theta), sigma_1 structure and the sigma_2 B1 part",
            alternative: local(move |q| {
                tilted(q[0]) * c(-e * h * w(q) / (4.0 * m * big(q)))
                    - s2 * c(e * h * b1 * q[1].sin() * (r0 * q[0].sin() + r) / (4.0 * m * r))
            }),
        },
        Allowance { group: TermGroup::Electric, note: "electric potential absent from the printed equation", alternative: electric(p, -1.0) },
    ];
    ClosedFormOperator { chart: "torus", terms, allowances, prose: Vec::new() }
}
