//! Sparse Hermitian matrix of the surface operator on a structured grid.
//!
//! The kinetic part is assembled as a sum of squares of covariant difference
//! quotients. Neighbouring nodes are compared through link matrices
//! `s exp(i e/hbar int A) U_p U_q^-1`, which carry the Peierls phase, the
//! spinor rotation and the boundary sign at once, so the magnetic and spin
//! connection terms need no separate stencils and gauge covariance is exact.

use super::grid::{Boundary, GridSpec};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::{geometry_at_tol, Domain};
use crate::hamiltonian::{Representation, StencilOrder, SurfacePauliOperator};
use crate::spin::{spinor_lift, frame_rotation_at, CMat2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Discretized operator in symmetric form `S = W^-1/2 M W^-1/2`.
#[derive(Clone, Debug, Serialize)]
pub struct DiscreteOperator {
    pub n: [usize; 2],
    pub components: usize,
    pub representation: Representation,
    #[serde(skip)]
    pub matrix: CsrMatrix,
    /// Node quadrature weights `sqrt g dq1 dq2` (with endpoint corrections).
    pub weights: Vec<f64>,
    pub coords: Vec<[f64; 2]>,
    /// Lowest eigenvalue of any on-site potential matrix.
    pub potential_floor: f64,
    pub hermiticity_residual: f64,
}

impl DiscreteOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.n
    }

    /// Convert a vector of `S` into node values, `chi = W^-1/2 y`.
    pub fn to_field_values(&self, y: &[Complex64]) -> Vec<Complex64> {
        let c = self.components;
        y.iter().enumerate().map(|(k, v)| v / self.weights[k / c].sqrt()).collect()
    }

    pub fn from_field_values(&self, chi: &[Complex64]) -> Vec<Complex64> {
        let c = self.components;
        chi.iter().enumerate().map(|(k, v)| v * self.weights[k / c].sqrt()).collect()
    }

    /// `<a, H b>` in the weighted inner product, for node-value vectors.
    pub fn weighted_form(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let hb = self.matrix.matvec(&self.from_field_values(b));
        self.from_field_values(a).iter().zip(&hb).map(|(x, y)| x.conj() * y).sum()
    }
}

#[derive(Clone, Copy)]
enum Step {
    Node(usize, CMat2),
    Wall,
}

struct Lattice<'a> {
    op: &'a SurfacePauliOperator,
    grid: &'a GridSpec,
    domain: Domain,
    h: [f64; 2],
    /// Link from each node to its successor along each axis (None past a wall or pole).
    forward: [Vec<Option<CMat2>>; 2],
    pole_axis: Option<usize>,
    /// Links across the lower and upper pole, indexed by the partner-axis index.
    pole_links: [Vec<(usize, CMat2)>; 2],
}

impl<'a> Lattice<'a> {
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.grid.n[1] + j
    }

    fn position(&self, node: usize) -> [usize; 2] {
        [node / self.grid.n[1], node % self.grid.n[1]]
    }

    fn at(&self, axis: usize, k: usize, other: usize) -> usize {
        if axis == 0 {
            self.index(k, other)
        } else {
            self.index(other, k)
        }
    }

    fn point(&self, axis: usize, along: f64, across: f64) -> [f64; 2] {
        if axis == 0 {
            [along, across]
        } else {
            [across, along]
        }
    }

    fn step(&self, node: usize, axis: usize, forward: bool) -> Step {
        let pos = self.position(node);
        let (k, other) = (pos[axis], pos[1 - axis]);
        let n = self.grid.n[axis];
        let b = self.grid.boundary[axis];
        if forward {
            if k + 1 < n || b.wraps() {
                let next = self.at(axis, (k + 1) % n, other);
                return Step::Node(next, self.forward[axis][node].expect("forward link"));
            }
            match b {
                Boundary::PoleRegular => {
                    let (q, l) = self.pole_links[1][other];
                    Step::Node(q, l)
                }
                _ => Step::Wall,
            }
        } else {
            if k > 0 || b.wraps() {
                let prev = self.at(axis, (k + n - 1) % n, other);
                return Step::Node(prev, self.forward[axis][prev].expect("forward link").adjoint());
            }
            match b {
                Boundary::PoleRegular => {
                    let (q, l) = self.pole_links[0][other];
                    Step::Node(q, l)
                }
                _ => Step::Wall,
            }
        }
    }

    /// Transport of the node `steps` away along `axis` into the frame of `node`.
    fn walk(&self, node: usize, axis: usize, steps: isize) -> Option<(usize, CMat2)> {
        let mut cur = node;
        let mut t = CMat2::identity();
        for _ in 0..steps.unsigned_abs() {
            match self.step(cur, axis, steps > 0) {
                Step::Node(q, l) => {
                    t *= l;
                    cur = q;
                }
                Step::Wall => return None,
            }
        }
        Some((cur, t))
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Rotation at coordinates `q` continued from `hint`.
fn continued_rotation(op: &SurfacePauliOperator, q: [f64; 2], hint: &CMat2) -> Result<CMat2> {
    if !op.options.rotates() {
        return Ok(CMat2::identity());
    }
    if let Some(u) = op.chart.closed_form_spinor(q) {
        return Ok(u);
    }
    let p = geometry_at_tol(op.chart.as_ref(), q[0], q[1], op.options.degeneracy_tol)?;
    Ok(spinor_lift(&frame_rotation_at(&p), Some(hint)))
}

fn peierls(op: &SurfacePauliOperator, path: &[[f64; 2]]) -> Complex64 {
    let theta = op.field.e_charge / op.units.hbar * op.field.line_integral(path);
    Complex64::from_polar(1.0, theta)
}

fn build_lattice<'a>(op: &'a SurfacePauliOperator) -> Result<Lattice<'a>> {
    let grid = &op.grid;
    let domain = op.domain;
    let h = grid.spacing(&domain);
    let n = grid.n;
    let nodes = &op.nodes;
    let mut forward: [Vec<Option<CMat2>>; 2] = [Vec::new(), Vec::new()];
    for axis in 0..2 {
        let b = grid.boundary[axis];
        let sign = if b == Boundary::Antiperiodic { -1.0 } else { 1.0 };
        forward[axis] = (0..nodes.len())
            .into_par_iter()
            .map(|p| -> Result<Option<CMat2>> {
                let pos = [p / n[1], p % n[1]];
                let k = pos[axis];
                let qp = nodes[p].q;
                if k + 1 < n[axis] {
                    let next = if axis == 0 { p + n[1] } else { p + 1 };
                    let qq = nodes[next].q;
                    let l = (nodes[p].u * nodes[next].u.adjoint()) * peierls(op, &[qp, qq]);
                    Ok(Some(l))
                } else if b.wraps() {
                    let next = if axis == 0 { pos[1] } else { pos[0] * n[1] };
                    let mut qq = nodes[next].q;
                    qq[axis] = qp[axis] + h[axis];
                    let u_cont = continued_rotation(op, qq, &nodes[p].u)?;
                    let l = (nodes[p].u * u_cont.adjoint()) * (peierls(op, &[qp, qq]) * sign);
                    Ok(Some(l))
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?;
    }

    let pole_axis = grid.pole_axis();
    let mut pole_links: [Vec<(usize, CMat2)>; 2] = [Vec::new(), Vec::new()];
    if let Some(pa) = pole_axis {
        let oa = 1 - pa;
        // The lab field must be single valued around the partner axis.
        let wrap_sign = if grid.boundary[oa] == Boundary::Antiperiodic { -1.0 } else { 1.0 };
        let probe = if pa == 0 { n[1] / 2 } else { (n[0] / 2) * n[1] };
        let mut q_end = nodes[probe].q;
        q_end[oa] += domain.extent(oa);
        let u_end = continued_rotation(op, q_end, &nodes[probe].u)?;
        let holonomy = if (u_end - nodes[probe].u).norm() < (u_end + nodes[probe].u).norm() { 1.0 } else { -1.0 };
        if wrap_sign * holonomy < 0.0 {
            return Err(Error::Boundary(
                "pole closure needs a single-valued lab field: choose antiperiodic for rotated spinors, periodic otherwise"
                    .into(),
            ));
        }
        let (lo, hi) = domain.axis(pa);
        let half = n[oa] / 2;
        for (side, (row, pole)) in [(0usize, lo), (n[pa] - 1, hi)].into_iter().enumerate() {
            pole_links[side] = (0..n[oa])
                .map(|j| {
                    let p = if pa == 0 { row * n[1] + j } else { j * n[1] + row };
                    let jq = (j + half) % n[oa];
                    let q = if pa == 0 { row * n[1] + jq } else { jq * n[1] + row };
                    let (qp, qq) = (nodes[p].q, nodes[q].q);
                    let mid_p = if pa == 0 { [pole, qp[1]] } else { [qp[0], pole] };
                    let mid_q = if pa == 0 { [pole, qq[1]] } else { [qq[0], pole] };
                    let l = (nodes[p].u * nodes[q].u.adjoint()) * peierls(op, &[qp, mid_p, mid_q, qq]);
                    (q, l)
                })
                .collect();
        }
    }
    Ok(Lattice { op, grid, domain, h, forward, pole_axis, pole_links })
}

type Block = (usize, usize, CMat2);

/// Contributions `w c_k c_l T_k^+ T_l` of one squared difference quotient.
fn push_square(out: &mut Vec<Block>, w: f64, sites: &[(usize, f64, CMat2)]) {
    for (k, ck, tk) in sites {
        let tkd = tk.adjoint();
        for (l, cl, tl) in sites {
            out.push((*k, *l, tkd * tl * c(w * ck * cl)));
        }
    }
}

fn stencil(order: StencilOrder, h: f64) -> Vec<(isize, f64)> {
    match order {
        StencilOrder::Second => vec![(0, -1.0 / h), (1, 1.0 / h)],
        StencilOrder::Fourth => {
            let s = 1.0 / (24.0 * h);
            vec![(-1, s), (0, -27.0 * s), (1, 27.0 * s), (2, -s)]
        }
    }
}

const POLE_MASS: f64 = 11.0 / 12.0;
const POLE_EDGE: f64 = 13.0 / 12.0;

fn axis_faces(lat: &Lattice<'_>, axis: usize) -> Result<Vec<Block>> {
    let op = lat.op;
    let grid = lat.grid;
    let n = grid.n[axis];
    let n_other = grid.n[1 - axis];
    let b = grid.boundary[axis];
    let order = op.options.stencil;
    let kin = op.units.kinetic();
    let area = lat.h[0] * lat.h[1];
    let first_face: isize = if b == Boundary::Box { -1 } else { 0 };
    let last_face: isize = match b {
        Boundary::Periodic | Boundary::Antiperiodic | Boundary::Box => n as isize - 1,
        Boundary::PoleRegular => n as isize - 2,
    };
    let weights = stencil(order, lat.h[axis]);
    let faces: Vec<(isize, usize)> =
        (first_face..=last_face).flat_map(|f| (0..n_other).map(move |o| (f, o))).collect();
    let chunks: Vec<Vec<Block>> = faces
        .par_iter()
        .map(|&(f, o)| -> Result<Vec<Block>> {
            let along = grid.coordinate(&lat.domain, axis, f as f64 + 0.5);
            let across = grid.coordinate(&lat.domain, 1 - axis, o as f64);
            let q = lat.point(axis, along, across);
            let geom = geometry_at_tol(op.chart.as_ref(), q[0], q[1], op.options.degeneracy_tol)?;
            let mut w = kin * geom.sqrt_g * geom.g_inv[(axis, axis)] * area;
            if order == StencilOrder::Fourth {
                if let Some(pa) = lat.pole_axis {
                    if pa != axis && (o == 0 || o == n_other - 1) {
                        w *= POLE_EDGE;
                    }
                }
            }
            let base_k = f.max(0) as usize;
            let base = lat.at(axis, base_k, o);
            let mut sites = Vec::with_capacity(4);
            for &(off, coeff) in &weights {
                let pos = f + off;
                let (target, sign) = if b == Boundary::Box {
                    if pos == -1 || pos == n as isize {
                        continue;
                    } else if pos == -2 {
                        (0, -1.0)
                    } else if pos == n as isize + 1 {
                        (n as isize - 1, -1.0)
                    } else {
                        (pos, 1.0)
                    }
                } else {
                    (pos, 1.0)
                };
                match lat.walk(base, axis, target - base_k as isize) {
                    Some((node, t)) => sites.push((node, coeff * sign, t)),
                    None => return Err(Error::Boundary(format!("stencil on axis {axis} leaves the grid at {pos}"))),
                }
            }
            let mut out = Vec::with_capacity(sites.len() * sites.len());
            push_square(&mut out, w, &sites);
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Second-order cell terms `2 kappa Re(D1^+ D2)` for charts with `g^12 != 0`.
fn mixed_cells(lat: &Lattice<'_>) -> Result<Vec<Block>> {
    let op = lat.op;
    let grid = lat.grid;
    let scale = op.nodes.iter().map(|p| p.g_inv[(0, 0)].abs().max(p.g_inv[(1, 1)].abs())).fold(0.0, f64::max);
    let mixed = op.nodes.iter().map(|p| p.g_inv[(0, 1)].abs()).fold(0.0, f64::max);
    if mixed <= 1e-14 * scale {
        return Ok(Vec::new());
    }
    if lat.pole_axis.is_some() {
        return Err(Error::Boundary("pole closure is not supported for non-orthogonal coordinates".into()));
    }
    let range = |a: usize| -> (isize, isize) {
        match grid.boundary[a] {
            Boundary::Box => (-1, grid.n[a] as isize - 1),
            _ => (0, grid.n[a] as isize - 1),
        }
    };
    let real = |a: usize, k: isize| grid.boundary[a].wraps() || (k >= 0 && k < grid.n[a] as isize);
    let wrap = |a: usize, k: isize| k.rem_euclid(grid.n[a] as isize) as usize;
    let (r0, r1) = (range(0), range(1));
    let cells: Vec<(isize, isize)> = (r0.0..=r0.1).flat_map(|i| (r1.0..=r1.1).map(move |j| (i, j))).collect();
    let kin = op.units.kinetic();
    let area = lat.h[0] * lat.h[1];
    let (h0, h1) = (lat.h[0], lat.h[1]);
    let chunks: Vec<Vec<Block>> = cells
        .par_iter()
        .map(|&(i, j)| -> Result<Vec<Block>> {
            let corners = [(0isize, 0isize), (1, 0), (0, 1), (1, 1)];
            let d1 = [-0.5 / h0, 0.5 / h0, -0.5 / h0, 0.5 / h0];
            let d2 = [-0.5 / h1, -0.5 / h1, 0.5 / h1, 0.5 / h1];
            let Some(bi) = corners.iter().position(|&(di, dj)| real(0, i + di) && real(1, j + dj)) else {
                return Ok(Vec::new());
            };
            let (bdi, bdj) = corners[bi];
            let base = lat.index(wrap(0, i + bdi), wrap(1, j + bdj));
            let mut sites: Vec<(usize, usize, CMat2)> = Vec::new();
            for (ci, &(di, dj)) in corners.iter().enumerate() {
                if !(real(0, i + di) && real(1, j + dj)) {
                    continue;
                }
                let (s0, s1) = (di - bdi, dj - bdj);
                let path_a = lat.walk(base, 0, s0).and_then(|(m, t)| lat.walk(m, 1, s1).map(|(q, u)| (q, t * u)));
                let path = path_a.or_else(|| lat.walk(base, 1, s1).and_then(|(m, t)| lat.walk(m, 0, s0).map(|(q, u)| (q, t * u))));
                let (node, t) = path.ok_or_else(|| Error::Boundary("cell corner unreachable".into()))?;
                sites.push((ci, node, t));
            }
            let q = [
                grid.coordinate(&lat.domain, 0, i as f64 + 0.5),
                grid.coordinate(&lat.domain, 1, j as f64 + 0.5),
            ];
            let geom = geometry_at_tol(op.chart.as_ref(), q[0], q[1], op.options.degeneracy_tol)?;
            let kappa = kin * geom.sqrt_g * geom.g_inv[(0, 1)] * area;
            let mut out = Vec::with_capacity(16);
            for (ck, k, tk) in &sites {
                for (cl, l, tl) in &sites {
                    let coeff = kappa * (d1[*ck] * d2[*cl] + d2[*ck] * d1[*cl]);
                    out.push((*k, *l, tk.adjoint() * tl * c(coeff)));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn min_eigenvalue(m: &CMat2) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    0.5 * (a + d) - ((0.5 * (a - d)).powi(2) + b.norm_sqr()).sqrt()
}

/// Assemble the sparse symmetric-form matrix of `op` on its grid.
pub fn discretize(op: &SurfacePauliOperator) -> Result<DiscreteOperator> {
    let lat = build_lattice(op)?;
    let grid = &op.grid;
    let comps = op.components();
    let area = lat.h[0] * lat.h[1];
    let fourth = op.options.stencil == StencilOrder::Fourth;

    let weights: Vec<f64> = op
        .nodes
        .iter()
        .enumerate()
        .map(|(p, node)| {
            let mut w = node.sqrt_g * area;
            if fourth {
                if let Some(pa) = lat.pole_axis {
                    let k = lat.position(p)[pa];
                    if k == 0 || k == grid.n[pa] - 1 {
                        w *= POLE_MASS;
                    }
                }
            }
            w
        })
        .collect();

    let mut blocks = axis_faces(&lat, 0)?;
    blocks.extend(axis_faces(&lat, 1)?);
    blocks.extend(mixed_cells(&lat)?);
    let mut floor = f64::INFINITY;
    for (p, node) in op.nodes.iter().enumerate() {
        let v = node.potential_matrix(&op.options);
        floor = floor.min(if comps == 1 { v[(0, 0)].re } else { min_eigenvalue(&v) });
        blocks.push((p, p, v * c(weights[p])));
    }

    blocks.par_sort_unstable_by_key(|b| (b.0, b.1));
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(blocks.len() * comps * comps);
    let mut iter = blocks.into_iter().peekable();
    while let Some((r, col, mut m)) = iter.next() {
        while let Some(next) = iter.peek() {
            if next.0 == r && next.1 == col {
                m += next.2;
                iter.next();
            } else {
                break;
            }
        }
        let scale = 1.0 / (weights[r] * weights[col]).sqrt();
        for s in 0..comps {
            for t in 0..comps {
                let v = m[(s, t)] * scale;
                if v != Complex64::new(0.0, 0.0) {
                    triplets.push((r * comps + s, col * comps + t, v));
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(grid.node_count() * comps, &triplets);
    let hermiticity_residual = matrix.hermiticity_residual();
    Ok(DiscreteOperator {
        n: grid.n,
        components: comps,
        representation: op.options.representation,
        matrix,
        weights,
        coords: op.nodes.iter().map(|p| p.q).collect(),
        potential_floor: floor,
        hermiticity_residual,
    })
}
