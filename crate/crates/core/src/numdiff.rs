//! Richardson-extrapolated central differences.
//!
//! All helpers evaluate `(4 D(h/2) - D(h)) / 3`, which cancels the leading
//! `h^2` error of the central stencil.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use std::ops::{Add, Sub};

/// Step used for first derivatives of smooth analytic functions.
pub const FIRST_STEP: f64 = 1e-5;

/// Step used for second derivatives; smaller steps lose digits to cancellation.
pub const SECOND_STEP: f64 = 1e-3;

/// Values that can be combined linearly by a difference stencil.
pub trait Linear: Clone + Add<Output = Self> + Sub<Output = Self> {
    fn scale(self, s: f64) -> Self;
}

impl Linear for f64 {
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Complex64 {
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Vector3<f64> {
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Vector2<f64> {
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Matrix2<f64> {
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Matrix3<f64> {
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Matrix2<Complex64> {
    fn scale(self, s: f64) -> Self {
        self * Complex64::new(s, 0.0)
    }
}

fn central<T: Linear>(f: &impl Fn(f64) -> T, x: f64, h: f64) -> T {
    (f(x + h) - f(x - h)).scale(0.5 / h)
}

/// First derivative of a scalar-argument function.
pub fn derivative<T: Linear>(f: impl Fn(f64) -> T, x: f64, h: f64) -> T {
    let coarse = central(&f, x, h);
    let fine = central(&f, x, 0.5 * h);
    (fine.scale(4.0) - coarse).scale(1.0 / 3.0)
}

fn second_central<T: Linear>(f: &impl Fn(f64) -> T, x: f64, f0: &T, h: f64) -> T {
    (f(x + h) + f(x - h) - f0.clone().scale(2.0)).scale(1.0 / (h * h))
}

/// Second derivative of a scalar-argument function.
pub fn second_derivative<T: Linear>(f: impl Fn(f64) -> T, x: f64, h: f64) -> T {
    let f0 = f(x);
    let coarse = second_central(&f, x, &f0, h);
    let fine = second_central(&f, x, &f0, 0.5 * h);
    (fine.scale(4.0) - coarse).scale(1.0 / 3.0)
}

/// Partial derivative of `f` along `axis` at `q`.
pub fn partial<T: Linear, const N: usize>(
    f: impl Fn([f64; N]) -> T,
    q: [f64; N],
    axis: usize,
    h: f64,
) -> T {
    derivative(
        |t| {
            let mut p = q;
            p[axis] = t;
            f(p)
        },
        q[axis],
        h,
    )
}

/// Second partial derivative `d^2 f / dq_a dq_b`.
pub fn second_partial<T: Linear, const N: usize>(
    f: impl Fn([f64; N]) -> T,
    q: [f64; N],
    a: usize,
    b: usize,
    h: f64,
) -> T {
    if a == b {
        return second_derivative(
            |t| {
                let mut p = q;
                p[a] = t;
                f(p)
            },
            q[a],
            h,
        );
    }
    let cross = |h: f64| {
        let at = |sa: f64, sb: f64| {
            let mut p = q;
            p[a] += sa * h;
            p[b] += sb * h;
            f(p)
        };
        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)).scale(0.25 / (h * h))
    };
    let coarse = cross(h);
    let fine = cross(0.5 * h);
    (fine.scale(4.0) - coarse).scale(1.0 / 3.0)
}

/// Polynomial extrapolation of samples `(x_i, y_i)` to `x = 0` (Neville).
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            p[i] = (xb * p[i] - xa * p[i + 1]) / (xb - xa);
        }
    }
    p[0]
}
