//! Differential geometry of a parametrized surface and its thin normal shell.

pub mod charts;
pub mod tabulated;

use crate::error::{Error, Result};
use crate::numdiff::{self, extrapolate_to_zero};
use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

pub use charts::{build_chart, ChartParams, Cylinder, Plane, Sphere, Torus};
pub use tabulated::TabulatedChart;

/// Default tolerance on `det g` below which a point is treated as a coordinate singularity.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-12;

/// Rectangle `[q1_min, q1_max] x [q2_min, q2_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub q1: (f64, f64),
    pub q2: (f64, f64),
}

impl Domain {
    pub fn axis(&self, a: usize) -> (f64, f64) {
        if a == 0 {
            self.q1
        } else {
            self.q2
        }
    }

    pub fn extent(&self, a: usize) -> f64 {
        let (lo, hi) = self.axis(a);
        hi - lo
    }

    pub fn contains(&self, q: [f64; 2]) -> bool {
        q[0] >= self.q1.0 && q[0] <= self.q1.1 && q[1] >= self.q2.0 && q[1] <= self.q2.1
    }
}

/// A parametrization `r(q1, q2)` of a surface in Euclidean 3-space.
///
/// Implementors must provide the embedding; analytic derivatives are optional
/// and default to Richardson-extrapolated central differences.
pub trait SurfaceChart: Send + Sync {
    fn name(&self) -> &str;

    fn domain(&self) -> Domain;

    /// Per-axis periodicity flag.
    fn periodic(&self) -> [bool; 2];

    fn coordinate_names(&self) -> [&str; 2] {
        ["q1", "q2"]
    }

    /// Numeric parameters, for metadata.
    fn parameters(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn embedding(&self, q: [f64; 2]) -> Vector3<f64>;

    fn tangents(&self, q: [f64; 2]) -> [Vector3<f64>; 2] {
        let f = |p: [f64; 2]| self.embedding(p);
        [
            numdiff::partial(f, q, 0, numdiff::FIRST_STEP),
            numdiff::partial(f, q, 1, numdiff::FIRST_STEP),
        ]
    }

    /// `[[r_11, r_12], [r_21, r_22]]`.
    fn second_derivatives(&self, q: [f64; 2]) -> [[Vector3<f64>; 2]; 2] {
        let f = |p: [f64; 2]| self.embedding(p);
        let h = numdiff::SECOND_STEP;
        let r11 = numdiff::second_partial(f, q, 0, 0, h);
        let r12 = numdiff::second_partial(f, q, 0, 1, h);
        let r22 = numdiff::second_partial(f, q, 1, 1, h);
        [[r11, r12], [r12, r22]]
    }

    /// Closed-form SU(2) frame lift, when the chart has one.
    fn closed_form_spinor(&self, _q: [f64; 2]) -> Option<Matrix2<num_complex::Complex64>> {
        None
    }
}

/// All first- and second-order surface data at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryPoint {
    pub q: [f64; 2],
    pub position: Vector3<f64>,
    pub tangents: [Vector3<f64>; 2],
    pub normal: Vector3<f64>,
    pub g: Matrix2<f64>,
    pub g_inv: Matrix2<f64>,
    pub det_g: f64,
    pub sqrt_g: f64,
    /// Second fundamental form `h_ac = n . r_ac`.
    pub h: Matrix2<f64>,
    /// Weingarten matrix, row `a` column `b` holds `alpha_a^b = -h_ac g^cb`.
    pub alpha: Matrix2<f64>,
    pub mean_curvature: f64,
    pub gaussian_curvature: f64,
    /// `gamma2[c][a][b]` is the surface Christoffel symbol of the second kind.
    pub gamma2: [[[f64; 2]; 2]; 2],
    /// Columns are the orthonormal triad `n1, n2, n3`.
    pub frame: Matrix3<f64>,
}

impl GeometryPoint {
    /// Cartesian gradient of the surface coordinate `q^a`, i.e. `g^ab r_b`.
    pub fn coordinate_gradient(&self, a: usize) -> Vector3<f64> {
        self.tangents[0] * self.g_inv[(a, 0)] + self.tangents[1] * self.g_inv[(a, 1)]
    }

    pub fn frame_vector(&self, i: usize) -> Vector3<f64> {
        self.frame.column(i).into_owned()
    }
}

pub fn geometry_at(chart: &dyn SurfaceChart, q1: f64, q2: f64) -> Result<GeometryPoint> {
    geometry_at_tol(chart, q1, q2, DEFAULT_DEGENERACY_TOL)
}

pub fn geometry_at_tol(chart: &dyn SurfaceChart, q1: f64, q2: f64, tol: f64) -> Result<GeometryPoint> {
    let q = [q1, q2];
    let t = chart.tangents(q);
    let g = Matrix2::new(t[0].dot(&t[0]), t[0].dot(&t[1]), t[1].dot(&t[0]), t[1].dot(&t[1]));
    let det_g = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
    if !(det_g > tol) {
        return Err(Error::DegenerateMetric { q1, q2, det: det_g });
    }
    let g_inv = Matrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det_g;
    let cross = t[0].cross(&t[1]);
    let normal = cross / cross.norm();
    let rr = chart.second_derivatives(q);
    let mut h = Matrix2::zeros();
    for a in 0..2 {
        for c in 0..2 {
            h[(a, c)] = normal.dot(&rr[a][c]);
        }
    }
    let h = (h + h.transpose()) * 0.5;
    let alpha = -h * g_inv;
    let mean_curvature = 0.5 * alpha.trace();
    let gaussian_curvature = alpha.determinant();

    let mut gamma2 = [[[0.0; 2]; 2]; 2];
    for (c, gc) in gamma2.iter_mut().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                gc[a][b] = (0..2).map(|d| g_inv[(c, d)] * t[d].dot(&rr[a][b])).sum();
            }
        }
    }

    let n1 = t[0] / t[0].norm();
    let u2 = t[1] - n1 * n1.dot(&t[1]);
    let n2 = u2 / u2.norm();
    let n3 = n1.cross(&n2);
    let frame = Matrix3::from_columns(&[n1, n2, n3]);

    Ok(GeometryPoint {
        q,
        position: chart.embedding(q),
        tangents: t,
        normal,
        g,
        g_inv,
        det_g,
        sqrt_g: det_g.sqrt(),
        h,
        alpha,
        mean_curvature,
        gaussian_curvature,
        gamma2,
        frame,
    })
}

/// `-(hbar^2 / 2m)(M^2 - K)`.
pub fn geometric_potential_at(chart: &dyn SurfaceChart, q1: f64, q2: f64, hbar: f64, mass: f64) -> Result<f64> {
    let p = geometry_at(chart, q1, q2)?;
    Ok(geometric_potential(&p, hbar, mass))
}

pub fn geometric_potential(p: &GeometryPoint, hbar: f64, mass: f64) -> f64 {
    let m = p.mean_curvature;
    -(hbar * hbar / (2.0 * mass)) * (m * m - p.gaussian_curvature)
}

/// Metric of the normal shell `R = r + q3 n` at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BulkMetric {
    pub q3: f64,
    pub metric: Matrix3<f64>,
    pub f: f64,
    pub det: f64,
}

fn bulk_block(p: &GeometryPoint, q3: f64) -> Matrix3<f64> {
    let gab = p.g - p.h * (2.0 * q3) + p.h * p.g_inv * p.h * (q3 * q3);
    let mut m = Matrix3::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&gab);
    m[(2, 2)] = 1.0;
    m
}

pub fn bulk_metric_at(chart: &dyn SurfaceChart, q1: f64, q2: f64, q3: f64) -> Result<BulkMetric> {
    let p = geometry_at(chart, q1, q2)?;
    bulk_metric_from(&p, q3)
}

pub fn bulk_metric_from(p: &GeometryPoint, q3: f64) -> Result<BulkMetric> {
    let f = 1.0 + p.alpha.trace() * q3 + p.alpha.determinant() * q3 * q3;
    if f <= 0.0 {
        return Err(Error::FanCollapse { q3, f });
    }
    let metric = bulk_block(p, q3);
    Ok(BulkMetric { q3, metric, f, det: metric.determinant() })
}

pub type Christoffel2 = [[[f64; 2]; 2]; 2];
pub type Christoffel3 = [[[f64; 3]; 3]; 3];

pub fn christoffel_2d(chart: &dyn SurfaceChart, q1: f64, q2: f64) -> Result<Christoffel2> {
    Ok(geometry_at(chart, q1, q2)?.gamma2)
}

/// `Gamma[k][i][j]` of the shell metric at `(q1, q2, q3)`.
pub fn christoffel_3d(chart: &dyn SurfaceChart, q1: f64, q2: f64, q3: f64) -> Result<Christoffel3> {
    let base = geometry_at(chart, q1, q2)?;
    let bm = bulk_metric_from(&base, q3)?;
    let inv = bm
        .metric
        .try_inverse()
        .ok_or(Error::DegenerateMetric { q1, q2, det: bm.det })?;
    let metric_at = |p: [f64; 2]| -> Matrix3<f64> {
        match geometry_at(chart, p[0], p[1]) {
            Ok(gp) => bulk_block(&gp, q3),
            Err(_) => Matrix3::from_element(f64::NAN),
        }
    };
    let d1 = numdiff::partial(metric_at, [q1, q2], 0, numdiff::FIRST_STEP);
    let d2 = numdiff::partial(metric_at, [q1, q2], 1, numdiff::FIRST_STEP);
    let mut d3 = Matrix3::zeros();
    let d3ab = -base.h * 2.0 + base.h * base.g_inv * base.h * (2.0 * q3);
    d3.fixed_view_mut::<2, 2>(0, 0).copy_from(&d3ab);
    let dg = [d1, d2, d3];
    if dg.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
        return Err(Error::DegenerateMetric { q1, q2, det: 0.0 });
    }
    let mut out = [[[0.0; 3]; 3]; 3];
    for (k, ok) in out.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                ok[i][j] = 0.5
                    * (0..3)
                        .map(|l| inv[(k, l)] * (dg[j][(l, i)] + dg[i][(l, j)] - dg[l][(i, j)]))
                        .sum::<f64>();
            }
        }
    }
    Ok(out)
}

/// Outcome of the thin-shell limit check.
#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub q3_sequence: Vec<f64>,
    /// Extrapolated `G^ab Gamma^c_ab` for `c = 1, 2`.
    pub tangential_limit: [f64; 2],
    pub tangential_target: [f64; 2],
    /// Extrapolated `G^ab Gamma^3_ab`.
    pub normal_limit: f64,
    pub normal_target: f64,
    pub max_error: f64,
    /// Observed order of the raw values approaching the target.
    pub order: f64,
    pub converged: bool,
}

pub fn limit_relations_check(chart: &dyn SurfaceChart, q1: f64, q2: f64, q3_sequence: &[f64]) -> Result<LimitReport> {
    let base = geometry_at(chart, q1, q2)?;
    let mut tan = [Vec::new(), Vec::new()];
    let mut nor = Vec::new();
    for &q3 in q3_sequence {
        let gam = christoffel_3d(chart, q1, q2, q3)?;
        let bm = bulk_metric_from(&base, q3)?;
        let inv = bm.metric.try_inverse().ok_or(Error::FanCollapse { q3, f: bm.f })?;
        let contract = |c: usize| -> f64 {
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    s += inv[(a, b)] * gam[c][a][b];
                }
            }
            s
        };
        tan[0].push(contract(0));
        tan[1].push(contract(1));
        nor.push(contract(2));
    }
    let mut target_t = [0.0; 2];
    for (c, tc) in target_t.iter_mut().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                *tc += base.g_inv[(a, b)] * base.gamma2[c][a][b];
            }
        }
    }
    let target_n = -base.alpha.trace();
    let lim_t = [
        extrapolate_to_zero(q3_sequence, &tan[0]),
        extrapolate_to_zero(q3_sequence, &tan[1]),
    ];
    let lim_n = extrapolate_to_zero(q3_sequence, &nor);
    let max_error = (lim_t[0] - target_t[0])
        .abs()
        .max((lim_t[1] - target_t[1]).abs())
        .max((lim_n - target_n).abs());

    // Per-pair orders drift linearly in q3 toward the asymptotic one, so the
    // last two estimates are extrapolated. Series already at round-off are skipped.
    let mut order = f64::INFINITY;
    let series: [(&Vec<f64>, f64); 3] = [(&tan[0], target_t[0]), (&tan[1], target_t[1]), (&nor, target_n)];
    for (vals, target) in series {
        let errs: Vec<f64> = vals.iter().map(|v| (v - target).abs()).collect();
        if errs.iter().all(|e| *e < 1e-9 * target.abs().max(1.0)) {
            continue;
        }
        let pair = |i: usize| (errs[i] / errs[i + 1]).ln() / (q3_sequence[i] / q3_sequence[i + 1]).ln();
        let m = errs.len();
        let p = match m {
            0 | 1 => continue,
            2 => pair(0),
            _ => 2.0 * pair(m - 2) - pair(m - 3),
        };
        order = order.min(p);
    }
    if !order.is_finite() {
        order = f64::NAN;
    }
    Ok(LimitReport {
        q3_sequence: q3_sequence.to_vec(),
        tangential_limit: lim_t,
        tangential_target: target_t,
        normal_limit: lim_n,
        normal_target: target_n,
        max_error,
        order,
        converged: max_error <= 1e-6 && (order.is_nan() || (order * 100.0).round() / 100.0 >= 1.0),
    })
}

/// Gaussian curvature from the metric alone (Brioschi formula).
pub fn intrinsic_gaussian_curvature(chart: &dyn SurfaceChart, q1: f64, q2: f64) -> Result<f64> {
    geometry_at(chart, q1, q2)?;
    let comp = |i: usize, j: usize| {
        move |p: [f64; 2]| -> f64 {
            let t = chart.tangents(p);
            t[i].dot(&t[j])
        }
    };
    let q = [q1, q2];
    let hs = numdiff::SECOND_STEP;
    let hf = numdiff::FIRST_STEP;
    let e = comp(0, 0)(q);
    let f = comp(0, 1)(q);
    let g = comp(1, 1)(q);
    let e_u = numdiff::partial(comp(0, 0), q, 0, hf);
    let e_v = numdiff::partial(comp(0, 0), q, 1, hf);
    let f_u = numdiff::partial(comp(0, 1), q, 0, hf);
    let f_v = numdiff::partial(comp(0, 1), q, 1, hf);
    let g_u = numdiff::partial(comp(1, 1), q, 0, hf);
    let g_v = numdiff::partial(comp(1, 1), q, 1, hf);
    let e_vv = numdiff::second_partial(comp(0, 0), q, 1, 1, hs);
    let f_uv = numdiff::second_partial(comp(0, 1), q, 0, 1, hs);
    let g_uu = numdiff::second_partial(comp(1, 1), q, 0, 0, hs);
    let a = Matrix3::new(
        -0.5 * e_vv + f_uv - 0.5 * g_uu,
        0.5 * e_u,
        f_u - 0.5 * e_v,
        f_v - 0.5 * g_u,
        e,
        f,
        0.5 * g_v,
        f,
        g,
    );
    let b = Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, g);
    let denom = (e * g - f * f).powi(2);
    Ok((a.determinant() - b.determinant()) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fallback_derivatives_match_analytic() {
        struct Raw(Torus);
        impl SurfaceChart for Raw {
            fn name(&self) -> &str {
                "raw"
            }
            fn domain(&self) -> Domain {
                self.0.domain()
            }
            fn periodic(&self) -> [bool; 2] {
                [true, true]
            }
            fn embedding(&self, q: [f64; 2]) -> Vector3<f64> {
                self.0.embedding(q)
            }
        }
        let t = Torus::new(3.0, 1.0).unwrap();
        let raw = Raw(t.clone());
        let q = [0.4, 1.3];
        let a = geometry_at(&t, q[0], q[1]).unwrap();
        let b = geometry_at(&raw, q[0], q[1]).unwrap();
        assert!((a.g - b.g).norm() < 1e-9);
        assert!((a.h - b.h).norm() < 1e-7);
        assert!((a.gaussian_curvature - b.gaussian_curvature).abs() < 1e-7);
    }

    #[test]
    fn weingarten_from_normal_derivative() {
        let s = Sphere::new(1.7).unwrap();
        let q = [0.9, 2.2];
        let p = geometry_at(&s, q[0], q[1]).unwrap();
        let n = |x: [f64; 2]| {
            let t = s.tangents(x);
            let c = t[0].cross(&t[1]);
            c / c.norm()
        };
        for a in 0..2 {
            let dn = numdiff::partial(n, q, a, 1e-5);
            for c in 0..2 {
                let h_ac = -dn.dot(&p.tangents[c]);
                assert!((h_ac - p.h[(a, c)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pole_is_degenerate() {
        let s = Sphere::new(1.0).unwrap();
        assert!(matches!(geometry_at(&s, 0.0, 0.3), Err(Error::DegenerateMetric { .. })));
        assert!(geometry_at(&s, 1e-3, 0.3).is_ok());
        assert!(geometry_at_tol(&s, 1e-3, 0.3, 1e-4).is_err());
        let _ = PI;
    }
}
