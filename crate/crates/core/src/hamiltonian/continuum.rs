//! Pointwise action of each term group on analytic trial spinors.

use super::{AssemblyOptions, CVec2, Representation, TermGroup};
use crate::em_field::EMField;
use crate::error::Result;
use crate::geometry::{geometric_potential, geometry_at_tol, GeometryPoint, SurfaceChart};
use crate::numdiff::{partial, second_partial, FIRST_STEP, SECOND_STEP};
use crate::spin::{self, pauli, CMat2};
use crate::Units;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Value, gradient and Hessian of a spinor field at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorJet {
    pub value: CVec2,
    pub grad: [CVec2; 2],
    pub hess: [[CVec2; 2]; 2],
}

impl SpinorJet {
    /// `s exp(i k.(q - q0) - |q - q0|^2 / 2w^2)` evaluated at `q`; `width = inf` gives a plane wave.
    pub fn gaussian(q: [f64; 2], center: [f64; 2], width: f64, k: [f64; 2], s: CVec2) -> Self {
        let d = [q[0] - center[0], q[1] - center[1]];
        let inv = if width.is_finite() { 1.0 / (width * width) } else { 0.0 };
        let phase = I * (k[0] * d[0] + k[1] * d[1]) - c(0.5 * inv * (d[0] * d[0] + d[1] * d[1]));
        let f = phase.exp();
        let l = [I * k[0] - c(d[0] * inv), I * k[1] - c(d[1] * inv)];
        let value = s * f;
        let grad = [s * (f * l[0]), s * (f * l[1])];
        let mut hess = [[CVec2::zeros(); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let delta = if a == b { inv } else { 0.0 };
                hess[a][b] = s * (f * (l[a] * l[b] - c(delta)));
            }
        }
        Self { value, grad, hess }
    }

    pub fn plane_wave(q: [f64; 2], k: [f64; 2], s: CVec2) -> Self {
        Self::gaussian(q, [0.0, 0.0], f64::INFINITY, k, s)
    }

    /// Jet of `m(q) chi(q)` given the jet of `m`.
    pub fn left_multiply(&self, m: &CMat2, dm: &[CMat2; 2], ddm: &[[CMat2; 2]; 2]) -> Self {
        let value = m * self.value;
        let grad = [dm[0] * self.value + m * self.grad[0], dm[1] * self.value + m * self.grad[1]];
        let mut hess = [[CVec2::zeros(); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                hess[a][b] = ddm[a][b] * self.value + dm[a] * self.grad[b] + dm[b] * self.grad[a] + m * self.hess[a][b];
            }
        }
        Self { value, grad, hess }
    }

    /// Multiply by the scalar `exp(i s(q))` given `s`, its gradient and Hessian.
    pub fn phase(&self, s: f64, ds: [f64; 2], dds: [[f64; 2]; 2]) -> Self {
        let f = (I * s).exp();
        let df = [f * I * ds[0], f * I * ds[1]];
        let mut ddf = [[Complex64::new(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                ddf[a][b] = f * (I * dds[a][b] - c(ds[a] * ds[b]));
            }
        }
        let id = CMat2::identity();
        let m = id * f;
        let dm = [id * df[0], id * df[1]];
        let ddm = [[id * ddf[0][0], id * ddf[0][1]], [id * ddf[1][0], id * ddf[1][1]]];
        self.left_multiply(&m, &dm, &ddm)
    }
}

/// Coefficient data of every term group at one point.
#[derive(Clone, Debug)]
pub struct ContinuumCoefficients {
    pub geometry: GeometryPoint,
    /// `(1/sqrt g) d_a (sqrt g g^ab)` for each `b`.
    pub flux_divergence: [f64; 2],
    pub a: [f64; 2],
    /// `(1/sqrt g) d_a (sqrt g g^ab A_b)`.
    pub a_divergence: f64,
    pub geometric_potential: f64,
    pub electric: f64,
    pub zeeman_normal: f64,
    pub zeeman_tangential: [f64; 2],
    pub u: CMat2,
    /// `Omega_a = U d_a U^-1`.
    pub omega: [CMat2; 2],
    /// `(1/sqrt g) d_a (sqrt g g^ab Omega_b)`.
    pub omega_divergence: CMat2,
    pub sigma_normal: CMat2,
    pub sigma_lower: [CMat2; 2],
}

/// The surface operator evaluated analytically (up to Richardson differences of coefficients).
pub struct ContinuumOperator<'a> {
    pub chart: &'a dyn SurfaceChart,
    pub field: &'a EMField,
    pub units: Units,
    pub options: AssemblyOptions,
}

impl<'a> ContinuumOperator<'a> {
    pub fn new(chart: &'a dyn SurfaceChart, field: &'a EMField, units: Units, options: AssemblyOptions) -> Self {
        Self { chart, field, units, options }
    }

    fn with_representation(&self, r: Representation) -> ContinuumOperator<'a> {
        let mut options = self.options.clone();
        options.representation = r;
        ContinuumOperator { chart: self.chart, field: self.field, units: self.units, options }
    }

    /// Spinor rotation at `q`, continued from the lift at `anchor`.
    fn rotation(&self, q: [f64; 2], anchor: &CMat2) -> CMat2 {
        if let Some(u) = self.chart.closed_form_spinor(q) {
            return u;
        }
        match geometry_at_tol(self.chart, q[0], q[1], 0.0) {
            Ok(p) => spin::spinor_lift(&spin::frame_rotation_at(&p), Some(anchor)),
            Err(_) => CMat2::from_element(Complex64::new(f64::NAN, 0.0)),
        }
    }

    /// `U`, `d_a U^-1` and `d_a d_b U^-1` at `q`.
    pub fn rotation_jet(&self, q: [f64; 2]) -> Result<(CMat2, [CMat2; 2], [[CMat2; 2]; 2])> {
        let p = geometry_at_tol(self.chart, q[0], q[1], self.options.degeneracy_tol)?;
        let u0 = spin::spin_frame_at(self.chart, &p, None).u;
        let ud = |x: [f64; 2]| self.rotation(x, &u0).adjoint();
        let d = [partial(ud, q, 0, FIRST_STEP), partial(ud, q, 1, FIRST_STEP)];
        let dd01 = second_partial(ud, q, 0, 1, SECOND_STEP);
        let dd = [
            [second_partial(ud, q, 0, 0, SECOND_STEP), dd01],
            [dd01, second_partial(ud, q, 1, 1, SECOND_STEP)],
        ];
        Ok((u0, d, dd))
    }

    pub fn coefficients(&self, q: [f64; 2]) -> Result<ContinuumCoefficients> {
        let p = geometry_at_tol(self.chart, q[0], q[1], self.options.degeneracy_tol)?;
        let field = self.field;
        let chart = self.chart;
        let flux = |x: [f64; 2]| -> Matrix2<f64> {
            match geometry_at_tol(chart, x[0], x[1], 0.0) {
                Ok(gp) => gp.g_inv * gp.sqrt_g,
                Err(_) => Matrix2::from_element(f64::NAN),
            }
        };
        let d0 = partial(flux, q, 0, FIRST_STEP);
        let d1 = partial(flux, q, 1, FIRST_STEP);
        let flux_divergence = [(d0[(0, 0)] + d1[(1, 0)]) / p.sqrt_g, (d0[(0, 1)] + d1[(1, 1)]) / p.sqrt_g];

        let a_full = field.vector_potential([q[0], q[1], 0.0]);
        let a = [a_full[0], a_full[1]];
        let flux_a = |x: [f64; 2]| -> Vector2<f64> {
            let av = field.vector_potential([x[0], x[1], 0.0]);
            flux(x) * Vector2::new(av[0], av[1])
        };
        let a_divergence =
            (partial(flux_a, q, 0, FIRST_STEP)[0] + partial(flux_a, q, 1, FIRST_STEP)[1]) / p.sqrt_g;

        let scale = field.e_charge * self.units.hbar / (2.0 * self.units.mass);
        let curl = field.surface_curl(q[0], q[1]);
        let da3 = field.normal_component_gradient(q[0], q[1]);

        let rotates = self.options.rotates();
        let (u, omega, omega_divergence) = if rotates {
            let (u, dud, ddud) = self.rotation_jet(q)?;
            let du = [-(u * dud[0] * u), -(u * dud[1] * u)];
            let omega = [u * dud[0], u * dud[1]];
            let mut dom = [[CMat2::zeros(); 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    dom[a][b] = du[a] * dud[b] + u * ddud[a][b];
                }
            }
            let mut div = CMat2::zeros();
            for b in 0..2 {
                div += omega[b] * c(flux_divergence[b]);
                for a in 0..2 {
                    div += dom[a][b] * c(p.g_inv[(a, b)]);
                }
            }
            (u, omega, div)
        } else {
            (CMat2::identity(), [CMat2::zeros(); 2], CMat2::zeros())
        };

        let induced = spin::induced_pauli_at(&p);
        let (sigma_normal, upper) = if rotates {
            let t = spin::transform_induced(&u, &induced);
            (pauli()[2], t.tangential)
        } else {
            (induced.normal, induced.tangential)
        };
        let lower = |a: usize| upper[0] * c(p.g[(a, 0)]) + upper[1] * c(p.g[(a, 1)]);
        Ok(ContinuumCoefficients {
            flux_divergence,
            a,
            a_divergence,
            geometric_potential: geometric_potential(&p, self.units.hbar, self.units.mass),
            electric: -field.e_charge * field.scalar_potential([q[0], q[1], 0.0]),
            zeeman_normal: scale * curl / p.sqrt_g,
            zeeman_tangential: [scale * da3[1] / p.sqrt_g, -scale * da3[0] / p.sqrt_g],
            u,
            omega,
            omega_divergence,
            sigma_normal,
            sigma_lower: [lower(0), lower(1)],
            geometry: p,
        })
    }

    /// Action of one term group on the jet, with the configured sign.
    pub fn apply_group_with(&self, cf: &ContinuumCoefficients, group: TermGroup, jet: &SpinorJet) -> CVec2 {
        if self.options.spinless && group.involves_spin() {
            return CVec2::zeros();
        }
        let (hbar, m, e) = (self.units.hbar, self.units.mass, self.field.e_charge);
        let gi = cf.geometry.g_inv;
        let kin = hbar * hbar / (2.0 * m);
        let chi = &jet.value;
        let out = match group {
            TermGroup::Kinetic => {
                let mut acc = CVec2::zeros();
                for a in 0..2 {
                    for b in 0..2 {
                        acc += jet.hess[a][b] * c(gi[(a, b)]);
                    }
                    acc += jet.grad[a] * c(cf.flux_divergence[a]);
                }
                acc * c(-kin)
            }
            TermGroup::MagneticFirstOrder => {
                let mut acc = CVec2::zeros();
                for a in 0..2 {
                    for b in 0..2 {
                        acc += jet.grad[b] * c(gi[(a, b)] * cf.a[a]);
                    }
                }
                acc * (-I * e * hbar / m)
            }
            TermGroup::MagneticDivergence => chi * (-I * e * hbar / (2.0 * m) * cf.a_divergence),
            TermGroup::MagneticQuadratic => {
                let a2: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| gi[(a, b)] * cf.a[a] * cf.a[b]).sum();
                chi * c(e * e / (2.0 * m) * a2)
            }
            TermGroup::ZeemanNormal => cf.sigma_normal * chi * c(cf.zeeman_normal),
            TermGroup::ZeemanTangential => {
                (cf.sigma_lower[0] * c(cf.zeeman_tangential[0]) + cf.sigma_lower[1] * c(cf.zeeman_tangential[1])) * chi
            }
            TermGroup::GeometricPotential => chi * c(cf.geometric_potential),
            TermGroup::Electric => chi * c(cf.electric),
            TermGroup::SpinConnectionFirstOrder => {
                let mut acc = CVec2::zeros();
                for a in 0..2 {
                    for b in 0..2 {
                        acc += cf.omega[a] * jet.grad[b] * c(gi[(a, b)]);
                    }
                }
                acc * c(-hbar * hbar / m)
            }
            TermGroup::SpinConnectionScalar => {
                let mut mat = cf.omega_divergence;
                for a in 0..2 {
                    for b in 0..2 {
                        mat += cf.omega[a] * cf.omega[b] * c(gi[(a, b)]);
                    }
                }
                mat * chi * c(-kin)
            }
            TermGroup::SpinConnectionMagnetic => {
                let mut mat = CMat2::zeros();
                for a in 0..2 {
                    for b in 0..2 {
                        mat += cf.omega[b] * c(gi[(a, b)] * cf.a[a]);
                    }
                }
                mat * chi * (-I * e * hbar / m)
            }
        };
        out * c(self.options.sign(group))
    }

    pub fn apply_group(&self, group: TermGroup, q: [f64; 2], jet: &SpinorJet) -> Result<CVec2> {
        let cf = self.coefficients(q)?;
        Ok(self.apply_group_with(&cf, group, jet))
    }

    /// Sum of all term groups.
    pub fn apply(&self, q: [f64; 2], jet: &SpinorJet) -> Result<CVec2> {
        let cf = self.coefficients(q)?;
        Ok(TermGroup::ALL.iter().map(|g| self.apply_group_with(&cf, *g, jet)).sum())
    }

    /// `U H_lab (U^-1 chi')`: the rotation applied to the field before differentiating.
    pub fn apply_through_rotation(&self, q: [f64; 2], jet: &SpinorJet) -> Result<CVec2> {
        if !self.options.rotates() {
            return self.apply(q, jet);
        }
        let (u, dud, ddud) = self.rotation_jet(q)?;
        let lab_jet = jet.left_multiply(&u.adjoint(), &dud, &ddud);
        let lab = self.with_representation(Representation::Lab);
        Ok(u * lab.apply(q, &lab_jet)?)
    }
}
