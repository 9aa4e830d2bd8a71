//! User chart given as a uniform table of embedding points.

use super::{Domain, SurfaceChart};
use crate::error::{Error, Result};
use nalgebra::Vector3;
use std::path::Path;

/// Natural cubic spline through uniformly spaced samples.
#[derive(Clone, Debug)]
struct Spline {
    start: f64,
    step: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl Spline {
    fn new(start: f64, step: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the natural spline moments (uniform spacing).
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let rhs = 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (step * step);
                let denom = 4.0 - c[i - 1];
                c[i] = 1.0 / denom;
                d[i] = (rhs - d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                second[i] = d[i] - c[i] * second[i + 1];
            }
        }
        Self { start, step, values, second }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (x - self.start) / self.step;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        let a = (i + 1) as f64 - t;
        let b = t - i as f64;
        let h2 = self.step * self.step / 6.0;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h2
    }
}

/// Embedding interpolated from a `q1,q2,x,y,z` table on a uniform grid.
#[derive(Clone, Debug)]
pub struct TabulatedChart {
    name: String,
    domain: Domain,
    periodic: [bool; 2],
    q2_start: f64,
    q2_step: f64,
    /// One spline along q1 per (padded) q2 row and per Cartesian component.
    rows: Vec<[Spline; 3]>,
}

const PAD: usize = 3;

impl TabulatedChart {
    pub fn from_csv(path: &Path, periodic: [bool; 2]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 5 {
                return Err(Error::Tabulated(format!("expected 5 columns, found {}", rec.len())));
            }
            let mut v = [0.0; 5];
            for (k, field) in rec.iter().enumerate() {
                v[k] = field
                    .parse()
                    .map_err(|_| Error::Tabulated(format!("not a number: `{field}`")))?;
            }
            rows.push(v);
        }
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("tabulated").to_string();
        Self::from_samples(&name, &rows, periodic)
    }

    /// Build from `[q1, q2, x, y, z]` samples covering a full uniform grid in any order.
    pub fn from_samples(name: &str, samples: &[[f64; 5]], periodic: [bool; 2]) -> Result<Self> {
        let axis = |k: usize| -> Vec<f64> {
            let mut v: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
            v
        };
        let (a1, a2) = (axis(0), axis(1));
        let (n1, n2) = (a1.len(), a2.len());
        if n1 < 4 || n2 < 4 {
            return Err(Error::Tabulated("need at least 4 samples per axis".into()));
        }
        if n1 * n2 != samples.len() {
            return Err(Error::Tabulated(format!(
                "{} samples do not form a {n1} x {n2} grid",
                samples.len()
            )));
        }
        let step = |a: &[f64]| -> Result<f64> {
            let h = (a[a.len() - 1] - a[0]) / (a.len() - 1) as f64;
            if a.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
                return Err(Error::Tabulated("grid is not uniform".into()));
            }
            Ok(h)
        };
        let (h1, h2) = (step(&a1)?, step(&a2)?);
        let mut grid = vec![[f64::NAN; 3]; n1 * n2];
        for s in samples {
            let i = ((s[0] - a1[0]) / h1).round() as usize;
            let j = ((s[1] - a2[0]) / h2).round() as usize;
            grid[i * n2 + j] = [s[2], s[3], s[4]];
        }
        if grid.iter().any(|p| p[0].is_nan()) {
            return Err(Error::Tabulated("duplicate or missing grid samples".into()));
        }
        let pad = |p: bool| if p { PAD as isize } else { 0 };
        let (p1, p2) = (pad(periodic[0]), pad(periodic[1]));
        let idx = |k: isize, n: usize| -> usize { k.rem_euclid(n as isize) as usize };
        let mut rows = Vec::new();
        for jj in -p2..(n2 as isize + p2) {
            let j = idx(jj, n2);
            let mut comps: [Vec<f64>; 3] = Default::default();
            for ii in -p1..(n1 as isize + p1) {
                let i = idx(ii, n1);
                for (c, comp) in comps.iter_mut().enumerate() {
                    comp.push(grid[i * n2 + j][c]);
                }
            }
            let start = a1[0] - p1 as f64 * h1;
            let [x, y, z] = comps;
            rows.push([Spline::new(start, h1, x), Spline::new(start, h1, y), Spline::new(start, h1, z)]);
        }
        let extent = |a: &[f64], h: f64, p: bool| if p { (a[0], a[0] + a.len() as f64 * h) } else { (a[0], a[a.len() - 1]) };
        Ok(Self {
            name: name.to_string(),
            domain: Domain { q1: extent(&a1, h1, periodic[0]), q2: extent(&a2, h2, periodic[1]) },
            periodic,
            q2_start: a2[0] - p2 as f64 * h2,
            q2_step: h2,
            rows,
        })
    }
}

impl SurfaceChart for TabulatedChart {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn periodic(&self) -> [bool; 2] {
        self.periodic
    }
    fn embedding(&self, q: [f64; 2]) -> Vector3<f64> {
        let wrap = |x: f64, a: usize| {
            if self.periodic[a] {
                let (lo, hi) = self.domain.axis(a);
                lo + (x - lo).rem_euclid(hi - lo)
            } else {
                x
            }
        };
        let (x1, x2) = (wrap(q[0], 0), wrap(q[1], 1));
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let column: Vec<f64> = self.rows.iter().map(|r| r[c].eval(x1)).collect();
            *o = Spline::new(self.q2_start, self.q2_step, column).eval(x2);
        }
        Vector3::new(out[0], out[1], out[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{charts::Torus, geometry_at};
    use std::f64::consts::PI;
    use std::io::Write;

    #[test]
    fn spline_reproduces_cubic_interior() {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.1).sin()).collect();
        let s = Spline::new(0.0, 0.1, xs);
        assert!((s.eval(1.234) - 1.234f64.sin()).abs() < 1e-5);
    }

    #[test]
    fn tabulated_torus_curvature() {
        let t = Torus::new(3.0, 1.0).unwrap();
        let (n1, n2) = (128, 128);
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "q1,q2,x,y,z").unwrap();
        for i in 0..n1 {
            for j in 0..n2 {
                let q = [2.0 * PI * i as f64 / n1 as f64, 2.0 * PI * j as f64 / n2 as f64];
                let p = t.embedding(q);
                writeln!(file, "{},{},{},{},{}", q[0], q[1], p.x, p.y, p.z).unwrap();
            }
        }
        let tab = TabulatedChart::from_csv(file.path(), [true, true]).unwrap();
        let q = [1.1, 0.6];
        let a = geometry_at(&tab, q[0], q[1]).unwrap();
        let b = geometry_at(&t, q[0], q[1]).unwrap();
        assert!((a.gaussian_curvature - b.gaussian_curvature).abs() < 1e-3);
        assert!((a.mean_curvature - b.mean_curvature).abs() < 1e-3);
    }

    #[test]
    fn rejects_ragged_tables() {
        let s = [[0.0, 0.0, 0.0, 0.0, 0.0]; 3];
        assert!(TabulatedChart::from_samples("x", &s, [false, false]).is_err());
    }
}
