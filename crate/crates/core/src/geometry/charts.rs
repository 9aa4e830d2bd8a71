//! Built-in charts and the name-keyed registry.

use super::{Domain, SurfaceChart};
use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `exp(i theta sigma_2 / 2) exp(i phi sigma_3 / 2)`.
pub fn polar_spinor(theta: f64, phi: f64) -> Matrix2<Complex64> {
    let (ct, st) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let ep = Complex64::from_polar(1.0, 0.5 * phi);
    let em = ep.conj();
    Matrix2::new(ep * ct, em * st, -ep * st, em * ct)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::ChartParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Round sphere of radius `r` in coordinates `(theta, phi)`.
#[derive(Clone, Debug)]
pub struct Sphere {
    pub r: f64,
}

impl Sphere {
    pub fn new(r: f64) -> Result<Self> {
        Ok(Self { r: positive("r", r)? })
    }
}

impl SurfaceChart for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }
    fn domain(&self) -> Domain {
        Domain { q1: (0.0, PI), q2: (0.0, 2.0 * PI) }
    }
    fn periodic(&self) -> [bool; 2] {
        [false, true]
    }
    fn coordinate_names(&self) -> [&str; 2] {
        ["theta", "phi"]
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("r".into(), self.r)]
    }
    fn embedding(&self, q: [f64; 2]) -> Vector3<f64> {
        let (st, ct) = q[0].sin_cos();
        let (sp, cp) = q[1].sin_cos();
        Vector3::new(st * cp, st * sp, ct) * self.r
    }
    fn tangents(&self, q: [f64; 2]) -> [Vector3<f64>; 2] {
        let (st, ct) = q[0].sin_cos();
        let (sp, cp) = q[1].sin_cos();
        [
            Vector3::new(ct * cp, ct * sp, -st) * self.r,
            Vector3::new(-st * sp, st * cp, 0.0) * self.r,
        ]
    }
    fn second_derivatives(&self, q: [f64; 2]) -> [[Vector3<f64>; 2]; 2] {
        let (st, ct) = q[0].sin_cos();
        let (sp, cp) = q[1].sin_cos();
        let r = self.r;
        let r11 = Vector3::new(-st * cp, -st * sp, -ct) * r;
        let r12 = Vector3::new(-ct * sp, ct * cp, 0.0) * r;
        let r22 = Vector3::new(-st * cp, -st * sp, 0.0) * r;
        [[r11, r12], [r12, r22]]
    }
    fn closed_form_spinor(&self, q: [f64; 2]) -> Option<Matrix2<Complex64>> {
        Some(polar_spinor(q[0], q[1]))
    }
}

/// Circular cylinder `(r sin theta, y, r cos theta)` of radius `r` and axial length `length`.
#[derive(Clone, Debug)]
pub struct Cylinder {
    pub r: f64,
    pub length: f64,
    pub y_periodic: bool,
}

impl Cylinder {
    pub fn new(r: f64, length: f64, y_periodic: bool) -> Result<Self> {
        Ok(Self { r: positive("r", r)?, length: positive("L", length)?, y_periodic })
    }
}

impl SurfaceChart for Cylinder {
    fn name(&self) -> &str {
        "cylinder"
    }
    fn domain(&self) -> Domain {
        Domain { q1: (0.0, 2.0 * PI), q2: (0.0, self.length) }
    }
    fn periodic(&self) -> [bool; 2] {
        [true, self.y_periodic]
    }
    fn coordinate_names(&self) -> [&str; 2] {
        ["theta", "y"]
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("r".into(), self.r),
            ("L".into(), self.length),
            ("y_periodic".into(), if self.y_periodic { 1.0 } else { 0.0 }),
        ]
    }
    fn embedding(&self, q: [f64; 2]) -> Vector3<f64> {
        let (st, ct) = q[0].sin_cos();
        Vector3::new(self.r * st, q[1], self.r * ct)
    }
    fn tangents(&self, q: [f64; 2]) -> [Vector3<f64>; 2] {
        let (st, ct) = q[0].sin_cos();
        [Vector3::new(self.r * ct, 0.0, -self.r * st), Vector3::new(0.0, 1.0, 0.0)]
    }
    fn second_derivatives(&self, q: [f64; 2]) -> [[Vector3<f64>; 2]; 2] {
        let (st, ct) = q[0].sin_cos();
        let z = Vector3::zeros();
        [[Vector3::new(-self.r * st, 0.0, -self.r * ct), z], [z, z]]
    }
    fn closed_form_spinor(&self, q: [f64; 2]) -> Option<Matrix2<Complex64>> {
        let (ct, st) = ((0.5 * q[0]).cos(), (0.5 * q[0]).sin());
        Some(Matrix2::new(c(ct, 0.0), c(st, 0.0), c(-st, 0.0), c(ct, 0.0)))
    }
}

/// Torus with tube radius `r` around a centre circle of radius `big_r`.
#[derive(Clone, Debug)]
pub struct Torus {
    pub big_r: f64,
    pub r: f64,
}

impl Torus {
    pub fn new(big_r: f64, r: f64) -> Result<Self> {
        let big_r = positive("R0", big_r)?;
        let r = positive("r", r)?;
        if r >= big_r {
            return Err(Error::ChartParameter(format!("tube radius {r} must be below R0 = {big_r}")));
        }
        Ok(Self { big_r, r })
    }

    /// Distance from the symmetry axis, `R0 + r sin theta`.
    pub fn axis_distance(&self, theta: f64) -> f64 {
        self.big_r + self.r * theta.sin()
    }
}

impl SurfaceChart for Torus {
    fn name(&self) -> &str {
        "torus"
    }
    fn domain(&self) -> Domain {
        Domain { q1: (0.0, 2.0 * PI), q2: (0.0, 2.0 * PI) }
    }
    fn periodic(&self) -> [bool; 2] {
        [true, true]
    }
    fn coordinate_names(&self) -> [&str; 2] {
        ["theta", "phi"]
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("R0".into(), self.big_r), ("r".into(), self.r)]
    }
    fn embedding(&self, q: [f64; 2]) -> Vector3<f64> {
        let (st, ct) = q[0].sin_cos();
        let (sp, cp) = q[1].sin_cos();
        let rr = self.big_r + self.r * st;
        Vector3::new(rr * cp, rr * sp, self.r * ct)
    }
    fn tangents(&self, q: [f64; 2]) -> [Vector3<f64>; 2] {
        let (st, ct) = q[0].sin_cos();
        let (sp, cp) = q[1].sin_cos();
        let rr = self.big_r + self.r * st;
        [
            Vector3::new(ct * cp, ct * sp, -st) * self.r,
            Vector3::new(-sp, cp, 0.0) * rr,
        ]
    }
    fn second_derivatives(&self, q: [f64; 2]) -> [[Vector3<f64>; 2]; 2] {
        let (st, ct) = q[0].sin_cos();
        let (sp, cp) = q[1].sin_cos();
        let rr = self.big_r + self.r * st;
        let r11 = Vector3::new(-st * cp, -st * sp, -ct) * self.r;
        let r12 = Vector3::new(-ct * sp, ct * cp, 0.0) * self.r;
        let r22 = Vector3::new(-cp, -sp, 0.0) * rr;
        [[r11, r12], [r12, r22]]
    }
    fn closed_form_spinor(&self, q: [f64; 2]) -> Option<Matrix2<Complex64>> {
        Some(polar_spinor(q[0], q[1]))
    }
}

/// Flat rectangle `r = (x + s y, y, 0)`; a nonzero shear `s` gives an oblique metric.
#[derive(Clone, Debug)]
pub struct Plane {
    pub l1: f64,
    pub l2: f64,
    pub shear: f64,
    pub periodic: bool,
}

impl Plane {
    pub fn new(l1: f64, l2: f64, shear: f64, periodic: bool) -> Result<Self> {
        if !shear.is_finite() {
            return Err(Error::ChartParameter("shear must be finite".into()));
        }
        Ok(Self { l1: positive("L1", l1)?, l2: positive("L2", l2)?, shear, periodic })
    }
}

impl SurfaceChart for Plane {
    fn name(&self) -> &str {
        "plane"
    }
    fn domain(&self) -> Domain {
        Domain { q1: (0.0, self.l1), q2: (0.0, self.l2) }
    }
    fn periodic(&self) -> [bool; 2] {
        [self.periodic, self.periodic]
    }
    fn coordinate_names(&self) -> [&str; 2] {
        ["x", "y"]
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("L1".into(), self.l1),
            ("L2".into(), self.l2),
            ("shear".into(), self.shear),
            ("periodic".into(), if self.periodic { 1.0 } else { 0.0 }),
        ]
    }
    fn embedding(&self, q: [f64; 2]) -> Vector3<f64> {
        Vector3::new(q[0] + self.shear * q[1], q[1], 0.0)
    }
    fn tangents(&self, _q: [f64; 2]) -> [Vector3<f64>; 2] {
        [Vector3::new(1.0, 0.0, 0.0), Vector3::new(self.shear, 1.0, 0.0)]
    }
    fn second_derivatives(&self, _q: [f64; 2]) -> [[Vector3<f64>; 2]; 2] {
        let z = Vector3::zeros();
        [[z, z], [z, z]]
    }
    fn closed_form_spinor(&self, _q: [f64; 2]) -> Option<Matrix2<Complex64>> {
        Some(Matrix2::identity())
    }
}

/// Named numeric chart parameters as read from a run configuration.
#[derive(Clone, Debug, Default)]
pub struct ChartParams(pub BTreeMap<String, f64>);

impl ChartParams {
    pub fn get(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    pub fn flag(&self, key: &str, default: bool) -> bool {
        self.0.get(key).map(|v| *v != 0.0).unwrap_or(default)
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.0.insert(key.to_string(), v);
        self
    }
}

/// Registry lookup for the built-in charts.
pub fn build_chart(name: &str, params: &ChartParams) -> Result<Arc<dyn SurfaceChart>> {
    let allowed: &[&str] = match name {
        "sphere" => &["r"],
        "cylinder" => &["r", "L", "y_periodic"],
        "torus" => &["R0", "r"],
        "plane" => &["L1", "L2", "shear", "periodic"],
        other => return Err(Error::UnknownChart(other.to_string())),
    };
    if let Some(bad) = params.0.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::ChartParameter(format!("unknown parameter `{bad}` for chart `{name}`")));
    }
    Ok(match name {
        "sphere" => Arc::new(Sphere::new(params.get("r", 1.0))?),
        "cylinder" => Arc::new(Cylinder::new(
            params.get("r", 1.0),
            params.get("L", 2.0 * PI),
            params.flag("y_periodic", true),
        )?),
        "torus" => Arc::new(Torus::new(params.get("R0", 3.0), params.get("r", 1.0))?),
        _ => Arc::new(Plane::new(
            params.get("L1", 1.0),
            params.get("L2", 1.0),
            params.get("shear", 0.0),
            params.flag("periodic", false),
        )?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::geometry_at;
    use crate::numdiff;

    fn charts() -> Vec<Box<dyn SurfaceChart>> {
        vec![
            Box::new(Sphere::new(1.3).unwrap()),
            Box::new(Cylinder::new(0.8, 5.0, false).unwrap()),
            Box::new(Torus::new(2.5, 0.9).unwrap()),
            Box::new(Plane::new(2.0, 3.0, 0.4, true).unwrap()),
        ]
    }

    #[test]
    fn analytic_derivatives_match_step_halving() {
        let q = [0.7, 1.9];
        for ch in charts() {
            let t = ch.tangents(q);
            let rr = ch.second_derivatives(q);
            let emb = |p: [f64; 2]| ch.embedding(p);
            // Plain central differences: error drops by ~4 when the step halves.
            let central = |a: usize, h: f64| {
                let mut p = q;
                let mut m = q;
                p[a] += h;
                m[a] -= h;
                (emb(p) - emb(m)) / (2.0 * h)
            };
            for a in 0..2 {
                let e1 = (central(a, 1e-2) - t[a]).norm();
                let e2 = (central(a, 5e-3) - t[a]).norm();
                assert!(e1 < 1e-3, "{} {a}", ch.name());
                if e1 > 1e-12 {
                    assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "{}: ratio {}", ch.name(), e1 / e2);
                }
                for b in 0..2 {
                    let fd = numdiff::second_partial(emb, q, a, b, 1e-3);
                    assert!((fd - rr[a][b]).norm() < 1e-8, "{} r_{a}{b}", ch.name());
                }
            }
        }
    }

    #[test]
    fn registry_rejects_unknown() {
        assert!(matches!(build_chart("klein", &ChartParams::default()), Err(Error::UnknownChart(_))));
        let p = ChartParams::default().with("R", 2.0);
        assert!(build_chart("sphere", &p).is_err());
        assert!(build_chart("torus", &ChartParams::default().with("R0", 1.0).with("r", 2.0)).is_err());
        let s = build_chart("sphere", &ChartParams::default().with("r", 2.0)).unwrap();
        assert_eq!(s.name(), "sphere");
    }

    #[test]
    fn documented_values() {
        let s = Sphere::new(1.0).unwrap();
        let p = geometry_at(&s, PI / 2.0, 0.4).unwrap();
        assert!((p.g - Matrix2::identity()).norm() < 1e-14);
        // Outward normal: alpha = -h g^-1 is +identity for the unit sphere.
        assert!((p.alpha - Matrix2::identity()).norm() < 1e-14);
        assert!((p.mean_curvature - 1.0).abs() < 1e-14);
        assert!((p.gaussian_curvature - 1.0).abs() < 1e-14);

        let cy = Cylinder::new(2.0, 1.0, false).unwrap();
        let p = geometry_at(&cy, 1.1, 0.3).unwrap();
        assert!((p.alpha.trace() - 0.5).abs() < 1e-14);
        assert!(p.alpha.determinant().abs() < 1e-14);

        let t = Torus::new(3.0, 1.0).unwrap();
        let p = geometry_at(&t, PI / 2.0, 0.2).unwrap();
        assert!((p.gaussian_curvature - 0.25).abs() < 1e-14);
    }
}
