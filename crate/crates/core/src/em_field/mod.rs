//! Electromagnetic potentials in covariant curvilinear components.

pub mod expr;

use crate::error::{Error, Result};
use crate::geometry::{bulk_metric_from, geometry_at, SurfaceChart};
use crate::numdiff;
use nalgebra::Vector3;
use num_complex::Complex64;
use std::fmt;
use std::sync::{Arc, OnceLock};

pub use expr::Expr;

pub type ScalarFn = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(8))
}

fn gl_segment(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl8();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

/// Adaptive Gauss-Legendre quadrature; `None` when the refinement limit is hit.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Option<f64> {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Option<f64> {
        let m = 0.5 * (a + b);
        let (l, r) = (gl_segment(f, a, m), gl_segment(f, m, b));
        if !(l + r).is_finite() {
            return None;
        }
        if (l + r - whole).abs() <= tol * (1.0 + (l + r).abs()) {
            return Some(l + r);
        }
        if depth == 0 {
            return None;
        }
        Some(rec(f, a, m, l, tol, depth - 1)? + rec(f, m, b, r, tol, depth - 1)?)
    }
    if a == b {
        return Some(0.0);
    }
    let whole = gl_segment(f, a, b);
    rec(f, a, b, whole, tol, 30)
}

/// A static gauge function `gamma(q1, q2, q3)`.
#[derive(Clone)]
pub struct GaugeFunction {
    pub label: String,
    value: ScalarFn,
    gradient: Option<VectorFn>,
}

impl fmt::Debug for GaugeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeFunction").field("label", &self.label).finish()
    }
}

impl GaugeFunction {
    pub fn new(label: &str, value: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.to_string(), value: Arc::new(value), gradient: None }
    }

    pub fn with_gradient(
        label: &str,
        value: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.to_string(), value: Arc::new(value), gradient: Some(Arc::new(gradient)) }
    }

    pub fn constant(c: f64) -> Self {
        Self::with_gradient(&format!("const({c})"), move |_| c, |_| [0.0; 3])
    }

    pub fn from_expr(src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        Ok(Self::new(src, move |q| e.eval(q)))
    }

    pub fn value(&self, q: [f64; 3]) -> f64 {
        (self.value)(q)
    }

    pub fn gradient(&self, q: [f64; 3]) -> [f64; 3] {
        match &self.gradient {
            Some(g) => g(q),
            None => {
                let f = |p: [f64; 3]| (self.value)(p);
                [0, 1, 2].map(|a| numdiff::partial(f, q, a, numdiff::FIRST_STEP))
            }
        }
    }

    pub fn negated(&self) -> Self {
        let v = self.value.clone();
        let g = self.gradient.clone();
        Self {
            label: format!("-({})", self.label),
            value: Arc::new(move |q| -v(q)),
            gradient: g.map(|g| -> VectorFn { Arc::new(move |q| g(q).map(|x| -x)) }),
        }
    }
}

/// Covariant vector potential `A_i(q1, q2, q3)`, scalar potential and coupling.
///
/// The potential is stored as a base field plus a list of applied gauge
/// functions, so line integrals of pure-gauge parts are exact differences.
#[derive(Clone)]
pub struct EMField {
    pub label: String,
    base: VectorFn,
    phi_e: ScalarFn,
    pub e_charge: f64,
    gauges: Vec<GaugeFunction>,
}

impl fmt::Debug for EMField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EMField")
            .field("label", &self.label)
            .field("e_charge", &self.e_charge)
            .field("gauges", &self.gauges)
            .finish()
    }
}

impl EMField {
    pub fn new(label: &str, a: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        Self {
            label: label.to_string(),
            base: Arc::new(a),
            phi_e: Arc::new(|_| 0.0),
            e_charge: 1.0,
            gauges: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| [0.0; 3])
    }

    /// Field from expression strings for `A_1, A_2, A_3` and `phi_e`.
    pub fn from_expressions(a: [&str; 3], phi_e: &str) -> Result<Self> {
        let ex = [Expr::parse(a[0])?, Expr::parse(a[1])?, Expr::parse(a[2])?];
        let label = format!("custom({}, {}, {})", a[0], a[1], a[2]);
        Ok(Self::new(&label, move |q| [ex[0].eval(q), ex[1].eval(q), ex[2].eval(q)]).with_phi_expr(phi_e)?)
    }

    pub fn with_phi(mut self, phi: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        self.phi_e = Arc::new(phi);
        self
    }

    pub fn with_phi_expr(self, src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        Ok(self.with_phi(move |q| e.eval(q)))
    }

    pub fn with_charge(mut self, e: f64) -> Self {
        self.e_charge = e;
        self
    }

    pub fn gauge_functions(&self) -> &[GaugeFunction] {
        &self.gauges
    }

    pub fn base_potential(&self, q: [f64; 3]) -> [f64; 3] {
        (self.base)(q)
    }

    /// Full `A_i`, base plus every applied gauge gradient.
    pub fn vector_potential(&self, q: [f64; 3]) -> [f64; 3] {
        let mut a = (self.base)(q);
        for g in &self.gauges {
            let d = g.gradient(q);
            for k in 0..3 {
                a[k] += d[k];
            }
        }
        a
    }

    pub fn scalar_potential(&self, q: [f64; 3]) -> f64 {
        (self.phi_e)(q)
    }

    /// Sum of all applied gauge functions at `q`.
    pub fn total_gauge(&self, q: [f64; 3]) -> f64 {
        self.gauges.iter().map(|g| g.value(q)).sum()
    }

    /// `int A_a dq^a` on the surface along a polyline in parameter space.
    pub fn line_integral(&self, path: &[[f64; 2]]) -> f64 {
        let mut total = 0.0;
        for w in path.windows(2) {
            let (p, r) = (w[0], w[1]);
            let d = [r[0] - p[0], r[1] - p[1]];
            let f = |t: f64| {
                let q = [p[0] + t * d[0], p[1] + t * d[1], 0.0];
                let a = (self.base)(q);
                a[0] * d[0] + a[1] * d[1]
            };
            total += gl_segment(&f, 0.0, 1.0);
        }
        if let (Some(first), Some(last)) = (path.first(), path.last()) {
            let (a, b) = ([first[0], first[1], 0.0], [last[0], last[1], 0.0]);
            total += self.total_gauge(b) - self.total_gauge(a);
        }
        total
    }

    /// `eps^ab d_a A_b` of the base potential at `q3 = 0`; gauge parts are curl-free.
    pub fn surface_curl(&self, q1: f64, q2: f64) -> f64 {
        let f = |p: [f64; 2]| (self.base)([p[0], p[1], 0.0]);
        let d1 = numdiff::partial(|p| f(p)[1], [q1, q2], 0, numdiff::FIRST_STEP);
        let d2 = numdiff::partial(|p| f(p)[0], [q1, q2], 1, numdiff::FIRST_STEP);
        d1 - d2
    }

    /// `(d_1 A_3, d_2 A_3)` of the full potential at `q3 = 0`.
    pub fn normal_component_gradient(&self, q1: f64, q2: f64) -> [f64; 2] {
        let f = |p: [f64; 2]| self.vector_potential([p[0], p[1], 0.0])[2];
        [
            numdiff::partial(f, [q1, q2], 0, numdiff::FIRST_STEP),
            numdiff::partial(f, [q1, q2], 1, numdiff::FIRST_STEP),
        ]
    }
}

/// `A'_i = A_i + d_i gamma`. Wavefunctions pick up [`gauge_phase`].
pub fn gauge_transform(field: &EMField, gamma: &GaugeFunction) -> EMField {
    let mut out = field.clone();
    out.gauges.push(gamma.clone());
    out.label = format!("{} + grad({})", field.label, gamma.label);
    out
}

/// Companion wavefunction factor `exp(-i e gamma / hbar)`.
pub fn gauge_phase(gamma: &GaugeFunction, q: [f64; 3], e_charge: f64, hbar: f64) -> Complex64 {
    Complex64::from_polar(1.0, -e_charge * gamma.value(q) / hbar)
}

/// `-int_0^q3 A_3(q1, q2, z) dz`, or NaN if quadrature fails.
fn a3_primitive(field: &EMField, q: [f64; 3]) -> f64 {
    let f = |z: f64| field.vector_potential([q[0], q[1], z])[2];
    integrate(&f, 0.0, q[2], 1e-13).map(|v| -v).unwrap_or(f64::NAN)
}

/// Gauge with `gamma = -int_0^q3 A_3 dz`, removing the normal component.
pub fn thin_layer_gauge(field: &EMField) -> Result<EMField> {
    let snapshot = field.clone();
    let value = {
        let f = snapshot.clone();
        move |q: [f64; 3]| a3_primitive(&f, q)
    };
    let gradient = {
        let f = snapshot.clone();
        move |q: [f64; 3]| {
            let h = numdiff::FIRST_STEP;
            let d = |axis: usize| {
                let g = |z: f64| {
                    let at = |p: [f64; 2]| f.vector_potential([p[0], p[1], z])[2];
                    numdiff::partial(at, [q[0], q[1]], axis, h)
                };
                integrate(&g, 0.0, q[2], 1e-11).map(|v| -v).unwrap_or(f64::NAN)
            };
            [d(0), d(1), -f.vector_potential(q)[2]]
        }
    };
    let gamma = GaugeFunction::with_gradient("thin-layer", value, gradient);
    // Probe once so quadrature trouble surfaces here rather than deep in assembly.
    for q in [[0.1, 0.2, 0.05], [0.3, -0.2, -0.05]] {
        let v = gamma.value(q);
        if !v.is_finite() {
            return Err(Error::IntegrationFailure { q1: q[0], q2: q[1], q3: q[2] });
        }
    }
    let mut out = gauge_transform(field, &gamma);
    out.label = format!("thin-layer({})", field.label);
    Ok(out)
}

/// Contravariant curl components `xi^i = (1/sqrt G) eps^ijk d_j A_k` at `(q1, q2, q3)`.
pub fn magnetic_field_at(field: &EMField, chart: &dyn SurfaceChart, q: [f64; 3]) -> Result<Vector3<f64>> {
    let p = geometry_at(chart, q[0], q[1])?;
    let bm = bulk_metric_from(&p, q[2])?;
    let sqrt_big_g = bm.f * p.sqrt_g;
    let mut d = [[0.0; 3]; 3];
    for (j, dj) in d.iter_mut().enumerate() {
        let col = numdiff::partial(|x| Vector3::from(field.vector_potential(x)), q, j, numdiff::FIRST_STEP);
        for k in 0..3 {
            dj[k] = col[k];
        }
    }
    let xi = Vector3::new(d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]) / sqrt_big_g;
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationFailure { q1: q[0], q2: q[1], q3: q[2] });
    }
    Ok(xi)
}

/// Tangent vectors `d_i R` of the shell embedding `R = r + q3 n`.
pub fn shell_basis(chart: &dyn SurfaceChart, q: [f64; 3]) -> Result<[Vector3<f64>; 3]> {
    let p = geometry_at(chart, q[0], q[1])?;
    let dn = |a: usize| p.tangents[0] * p.alpha[(a, 0)] + p.tangents[1] * p.alpha[(a, 1)];
    Ok([p.tangents[0] + dn(0) * q[2], p.tangents[1] + dn(1) * q[2], p.normal])
}

/// Magnetic field in Cartesian components.
pub fn magnetic_field_cartesian(field: &EMField, chart: &dyn SurfaceChart, q: [f64; 3]) -> Result<Vector3<f64>> {
    let xi = magnetic_field_at(field, chart, q)?;
    let e = shell_basis(chart, q)?;
    Ok(e[0] * xi[0] + e[1] * xi[1] + e[2] * xi[2])
}

/// `g^ab d_a A_b + d_3 A_3` on the surface.
pub fn lorentz_gauge_residual(field: &EMField, chart: &dyn SurfaceChart, q1: f64, q2: f64) -> Result<f64> {
    let p = geometry_at(chart, q1, q2)?;
    let q = [q1, q2, 0.0];
    let mut s = 0.0;
    for a in 0..2 {
        let da = numdiff::partial(|x| Vector3::from(field.vector_potential(x)), q, a, numdiff::FIRST_STEP);
        for b in 0..2 {
            s += p.g_inv[(a, b)] * da[b];
        }
    }
    let d3 = numdiff::partial(|x| field.vector_potential(x)[2], q, 2, numdiff::FIRST_STEP);
    Ok(s + d3)
}

/// Covariant components `A_i = A_cart(R) . d_i R` of a Cartesian potential.
pub fn from_cartesian(
    chart: Arc<dyn SurfaceChart>,
    label: &str,
    a_cart: impl Fn(Vector3<f64>) -> Vector3<f64> + Send + Sync + 'static,
) -> EMField {
    EMField::new(label, move |q| {
        let p = match geometry_at(chart.as_ref(), q[0], q[1]) {
            Ok(p) => p,
            Err(_) => return [f64::NAN; 3],
        };
        let dn = |a: usize| p.tangents[0] * p.alpha[(a, 0)] + p.tangents[1] * p.alpha[(a, 1)];
        let pos = p.position + p.normal * q[2];
        let a = a_cart(pos);
        [
            a.dot(&(p.tangents[0] + dn(0) * q[2])),
            a.dot(&(p.tangents[1] + dn(1) * q[2])),
            a.dot(&p.normal),
        ]
    })
}

/// Gauge presets matched to the built-in charts. Off the surface the radius
/// `r` is continued as `r + q3`.
pub mod presets {
    use super::EMField;

    /// `(0, B rho^2 sin^2(theta) / 2, 0)`: uniform field `B` along the polar axis.
    pub fn sphere_uniform(r: f64, b: f64) -> EMField {
        EMField::new(&format!("sphere_uniform(B={b})"), move |q| {
            let rho = r + q[2];
            let s = q[0].sin();
            [0.0, 0.5 * b * rho * rho * s * s, 0.0]
        })
    }

    /// `(rho^2 B0 / 2, rho B1 sin(theta), 0)` on the cylinder.
    pub fn cylinder_mixed(r: f64, b0: f64, b1: f64) -> EMField {
        EMField::new(&format!("cylinder_mixed(B0={b0}, B1={b1})"), move |q| {
            let rho = r + q[2];
            [0.5 * rho * rho * b0, rho * b1 * q[0].sin(), 0.0]
        })
    }

    /// Torus preset with `R = R0 + rho sin(theta)`.
    pub fn torus_mixed(big_r: f64, r: f64, b0: f64, b1: f64) -> EMField {
        EMField::new(&format!("torus_mixed(B0={b0}, B1={b1})"), move |q| {
            let rho = r + q[2];
            let (st, ct) = q[0].sin_cos();
            let (sp, cp) = q[1].sin_cos();
            let rr = big_r + rho * st;
            [
                0.5 * b1 * rho * sp * (big_r * st + rho),
                0.5 * rr * (b0 * rr - b1 * rho * ct * cp),
                0.0,
            ]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_quadrature() {
        let v = integrate(&|x: f64| (3.0 * x).cos(), 0.0, 2.0, 1e-13).unwrap();
        assert!((v - (6.0f64).sin() / 3.0).abs() < 1e-13);
        assert!(integrate(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-13).is_none());
    }

    #[test]
    fn constant_and_linear_a3() {
        let f = EMField::new("c", |_| [0.0, 0.0, 2.5]);
        let t = thin_layer_gauge(&f).unwrap();
        let g = &t.gauge_functions()[0];
        assert!((g.value([0.3, 0.1, 0.4]) + 1.0).abs() < 1e-13);
        assert_eq!(t.vector_potential([0.3, 0.1, 0.4])[2], 0.0);

        let f = EMField::new("lin", |q| [0.0, 0.0, q[2]]);
        let t = thin_layer_gauge(&f).unwrap();
        let g = &t.gauge_functions()[0];
        assert!((g.value([0.3, 0.1, 0.6]) + 0.18).abs() < 1e-13);
    }

    #[test]
    fn line_integral_of_pure_gauge_is_difference() {
        let gamma = GaugeFunction::new("g", |q| (q[0] * 2.0).sin() * q[1]);
        let f = gauge_transform(&EMField::zero(), &gamma);
        let v = f.line_integral(&[[0.1, 0.2], [0.5, 0.2], [0.5, 0.9]]);
        let expect = gamma.value([0.5, 0.9, 0.0]) - gamma.value([0.1, 0.2, 0.0]);
        assert!((v - expect).abs() < 1e-15);
    }
}
