//! Structured grids over a chart's parameter rectangle.

use crate::error::{Error, Result};
use crate::geometry::{geometry_at_tol, Domain, SurfaceChart};
use crate::hamiltonian::AssemblyOptions;
use serde::{Deserialize, Serialize};

/// Closure rule along one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Periodic with a sign flip on wrap-around couplings.
    Antiperiodic,
    /// Both ends are coordinate poles; nodes sit half a step off them and the
    /// stencil continues across each pole onto the opposite meridian.
    PoleRegular,
    /// Dirichlet walls one step beyond the first and last node.
    Box,
}

impl Boundary {
    pub fn wraps(self) -> bool {
        matches!(self, Boundary::Periodic | Boundary::Antiperiodic)
    }

    /// Node offset from the lower edge, in units of the spacing.
    pub fn offset(self) -> f64 {
        match self {
            Boundary::Periodic | Boundary::Antiperiodic => 0.0,
            Boundary::PoleRegular => 0.5,
            Boundary::Box => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: [usize; 2],
    pub boundary: [Boundary; 2],
    /// Parameter rectangle; defaults to the chart domain. Wrapping axes may
    /// cover an integer number of periods.
    #[serde(default)]
    pub domain: Option<Domain>,
}

pub const MIN_POINTS: usize = 8;

impl GridSpec {
    pub fn new(n1: usize, n2: usize, b1: Boundary, b2: Boundary) -> Self {
        Self { n: [n1, n2], boundary: [b1, b2], domain: None }
    }

    /// Default closure for `chart`: wrapping axes are antiperiodic when the
    /// spinor rotation changes sign around them, pole pairs use the pole
    /// closure and everything else gets walls.
    pub fn natural(chart: &dyn SurfaceChart, n: [usize; 2], options: &AssemblyOptions) -> Result<Self> {
        let d = chart.domain();
        let periodic = chart.periodic();
        let mut boundary = [Boundary::Box; 2];
        for a in 0..2 {
            let (lo, hi) = d.axis(a);
            let other = d.axis(1 - a);
            let mid = 0.5 * (other.0 + other.1);
            let at = |x: f64| if a == 0 { [x, mid] } else { [mid, x] };
            if periodic[a] {
                boundary[a] = if options.rotates() && rotation_holonomy(chart, a)? < 0.0 {
                    Boundary::Antiperiodic
                } else {
                    Boundary::Periodic
                };
            } else {
                let pole = |x: f64| {
                    let q = at(x);
                    geometry_at_tol(chart, q[0], q[1], options.degeneracy_tol).is_err()
                };
                if pole(lo) && pole(hi) {
                    boundary[a] = Boundary::PoleRegular;
                }
            }
        }
        Ok(Self { n, boundary, domain: None })
    }

    pub fn with_domain(mut self, d: Domain) -> Self {
        self.domain = Some(d);
        self
    }

    pub fn node_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn dimension(&self, components: usize) -> usize {
        self.node_count() * components
    }

    pub fn pole_axis(&self) -> Option<usize> {
        (0..2).find(|&a| self.boundary[a] == Boundary::PoleRegular)
    }

    /// Check the grid against the chart and return the resolved domain.
    pub fn validate(&self, chart: &dyn SurfaceChart, options: &AssemblyOptions) -> Result<Domain> {
        for a in 0..2 {
            if self.n[a] < MIN_POINTS {
                return Err(Error::InvalidGrid(format!("axis {a} has {} points, need at least {MIN_POINTS}", self.n[a])));
            }
        }
        let base = chart.domain();
        let domain = self.domain.unwrap_or(base);
        let periodic = chart.periodic();
        for a in 0..2 {
            let (lo, hi) = domain.axis(a);
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidGrid(format!("axis {a} has an empty range [{lo}, {hi}]")));
            }
            match self.boundary[a] {
                Boundary::Periodic | Boundary::Antiperiodic => {
                    if !periodic[a] {
                        return Err(Error::Boundary(format!("axis {a} of '{}' is not periodic", chart.name())));
                    }
                    let ratio = domain.extent(a) / base.extent(a);
                    if ratio < 0.5 || (ratio - ratio.round()).abs() > 1e-9 {
                        return Err(Error::Boundary(format!(
                            "axis {a} range must cover a whole number of periods, got {ratio}"
                        )));
                    }
                }
                Boundary::PoleRegular => {
                    let other = 1 - a;
                    if !self.boundary[other].wraps() || self.n[other] % 2 != 0 {
                        return Err(Error::Boundary(
                            "pole closure needs a wrapping partner axis with an even point count".into(),
                        ));
                    }
                    if domain.axis(a) != base.axis(a) {
                        return Err(Error::Boundary("pole closure needs the full chart range".into()));
                    }
                    if (domain.extent(other) - base.extent(other)).abs() > 1e-12 {
                        return Err(Error::Boundary("pole closure needs a single period on the partner axis".into()));
                    }
                    let mid = 0.5 * (domain.axis(other).0 + domain.axis(other).1);
                    for end in [lo, hi] {
                        let q = if a == 0 { [end, mid] } else { [mid, end] };
                        if geometry_at_tol(chart, q[0], q[1], options.degeneracy_tol).is_ok() {
                            return Err(Error::Boundary(format!(
                                "axis {a} end {end} is not a coordinate pole of '{}'",
                                chart.name()
                            )));
                        }
                    }
                }
                Boundary::Box => {}
            }
        }
        Ok(domain)
    }

    pub fn spacing(&self, domain: &Domain) -> [f64; 2] {
        let mut h = [0.0; 2];
        for a in 0..2 {
            let cells = match self.boundary[a] {
                Boundary::Box => self.n[a] + 1,
                _ => self.n[a],
            };
            h[a] = domain.extent(a) / cells as f64;
        }
        h
    }

    /// Coordinate of position `k` along `axis`; positions outside `0..n` are ghosts.
    pub fn coordinate(&self, domain: &Domain, axis: usize, k: f64) -> f64 {
        let h = self.spacing(domain)[axis];
        domain.axis(axis).0 + (k + self.boundary[axis].offset()) * h
    }

    /// Row-major node coordinates, `index = i * n2 + j`.
    pub fn node_coordinates(&self, domain: &Domain) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.node_count());
        for i in 0..self.n[0] {
            for j in 0..self.n[1] {
                out.push([self.coordinate(domain, 0, i as f64), self.coordinate(domain, 1, j as f64)]);
            }
        }
        out
    }
}

/// Sign picked up by the spinor rotation once around periodic axis `a`.
pub fn rotation_holonomy(chart: &dyn SurfaceChart, a: usize) -> Result<f64> {
    let d = chart.domain();
    let (lo, hi) = d.axis(a);
    let other = d.axis(1 - a);
    let mid = 0.5 * (other.0 + other.1);
    let at = |x: f64| if a == 0 { [x, mid] } else { [mid, x] };
    if let (Some(u0), Some(u1)) = (chart.closed_form_spinor(at(lo)), chart.closed_form_spinor(at(hi))) {
        return Ok(if (u1 - u0).norm() < (u1 + u0).norm() { 1.0 } else { -1.0 });
    }
    let line: Vec<f64> = (0..128).map(|k| lo + (hi - lo) * k as f64 / 128.0).collect();
    let fixed = [mid];
    let coords: [&[f64]; 2] = if a == 0 { [&line, &fixed] } else { [&fixed, &line] };
    let mut periods = [None, None];
    periods[a] = Some(hi - lo);
    let sweep = crate::spin::propagate_branch(chart, coords, periods)?;
    Ok(sweep.holonomy[a].as_ref().map_or(1.0, |h| h[0]))
}
