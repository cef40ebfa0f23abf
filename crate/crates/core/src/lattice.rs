//! Lattice coordinates, the four-point (hyperbolic) equation and the
//! five-point (elliptic) operator on the even sublattice.
//!
//! Two coordinate systems are used throughout:
//!
//! * diagonal coordinates `(m, n)`, in which the wave function satisfies the
//!   four-point equation
//!   `Ψ(m+1,n+1) − Ψ(m,n) = i f(m,n) (Ψ(m+1,n) − Ψ(m,n+1))`;
//! * sublattice coordinates `(μ, ν)` with `m = μ − ν`, `n = μ + ν`, covering
//!   exactly the points with `m + n` even, on which the five-point operator
//!   acts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("(m, n) = ({m}, {n}) is not on the even sublattice: m + n is odd")]
    Parity { m: i64, n: i64 },
    #[error("f({m}, {n}) = {value} makes a five-point coefficient singular")]
    SingularCoefficient { m: i64, n: i64, value: f64 },
    #[error("index ({i}, {j}) lies outside the field window")]
    OutOfWindow { i: i64, j: i64 },
    #[error("window [{x_min}, {x_max}] x [{y_min}, {y_max}] is empty or too small")]
    EmptyWindow {
        x_min: i64,
        x_max: i64,
        y_min: i64,
        y_max: i64,
    },
}

/// A site of the even sublattice in `(μ, ν)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub mu: i64,
    pub nu: i64,
}

impl Site {
    pub const fn new(mu: i64, nu: i64) -> Self {
        Self { mu, nu }
    }

    /// Converts diagonal coordinates; `m + n` must be even.
    pub fn from_diagonal(m: i64, n: i64) -> Result<Self, LatticeError> {
        let (mu, nu) = to_sublattice(m, n)?;
        Ok(Self { mu, nu })
    }

    pub const fn m(self) -> i64 {
        self.mu - self.nu
    }

    pub const fn n(self) -> i64 {
        self.mu + self.nu
    }

    pub const fn shifted(self, dmu: i64, dnu: i64) -> Self {
        Self {
            mu: self.mu + dmu,
            nu: self.nu + dnu,
        }
    }
}

/// `(m, n) ↦ (μ, ν) = ((m + n)/2, (n − m)/2)`. Odd `m + n` is a hard error.
pub fn to_sublattice(m: i64, n: i64) -> Result<(i64, i64), LatticeError> {
    if (m + n).rem_euclid(2) != 0 {
        return Err(LatticeError::Parity { m, n });
    }
    Ok(((m + n) / 2, (n - m) / 2))
}

/// `(μ, ν) ↦ (m, n) = (μ − ν, μ + ν)`.
pub const fn to_diagonal(mu: i64, nu: i64) -> (i64, i64) {
    (mu - nu, mu + nu)
}

/// Inclusive rectangular index range `[x_min, x_max] × [y_min, y_max]`.
///
/// The two axes are `(μ, ν)` or `(m, n)` depending on the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: i64,
    pub x_max: i64,
    pub y_min: i64,
    pub y_max: i64,
}

impl Window {
    pub fn new(x_min: i64, x_max: i64, y_min: i64, y_max: i64) -> Result<Self, LatticeError> {
        if x_min > x_max || y_min > y_max {
            return Err(LatticeError::EmptyWindow {
                x_min,
                x_max,
                y_min,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// `|x − cx| ≤ half`, `|y − cy| ≤ half`.
    pub fn square_around(cx: i64, cy: i64, half: u32) -> Self {
        let h = i64::from(half);
        Self {
            x_min: cx - h,
            x_max: cx + h,
            y_min: cy - h,
            y_max: cy + h,
        }
    }

    pub fn square(half: u32) -> Self {
        Self::square_around(0, 0, half)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    pub fn width(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.y_max - self.y_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grows (or shrinks, for negative `k`) the window by `k` on every side.
    pub fn expanded(&self, k: i64) -> Result<Self, LatticeError> {
        Self::new(
            self.x_min - k,
            self.x_max + k,
            self.y_min - k,
            self.y_max + k,
        )
    }

    /// Row-major iteration, `x` outer and `y` inner.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> {
        let (y_min, y_max) = (self.y_min, self.y_max);
        (self.x_min..=self.x_max).flat_map(move |x| (y_min..=y_max).map(move |y| (x, y)))
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> {
        self.iter().map(|(mu, nu)| Site::new(mu, nu))
    }

    fn offset(&self, x: i64, y: i64) -> Option<usize> {
        self.contains(x, y)
            .then(|| ((x - self.x_min) as usize) * self.height() + (y - self.y_min) as usize)
    }
}

/// Complex samples on every point of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    window: Window,
    values: Vec<Complex64>,
}

impl LatticeField {
    pub fn from_fn<F>(window: Window, mut f: F) -> Self
    where
        F: FnMut(i64, i64) -> Complex64,
    {
        let values = window.iter().map(|(x, y)| f(x, y)).collect();
        Self { window, values }
    }

    pub fn try_from_fn<F, E>(window: Window, mut f: F) -> Result<Self, E>
    where
        F: FnMut(i64, i64) -> Result<Complex64, E>,
    {
        let values = window
            .iter()
            .map(|(x, y)| f(x, y))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Self { window, values })
    }

    /// Builds a field from values laid out in [`Window::iter`] order.
    pub fn from_values(window: Window, values: Vec<Complex64>) -> Option<Self> {
        (values.len() == window.len()).then_some(Self { window, values })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, x: i64, y: i64) -> Result<Complex64, LatticeError> {
        self.window
            .offset(x, y)
            .map(|k| self.values[k])
            .ok_or(LatticeError::OutOfWindow { i: x, j: y })
    }

    pub fn at(&self, site: Site) -> Result<Complex64, LatticeError> {
        self.get(site.mu, site.nu)
    }

    pub fn scaled_sum(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Option<Self> {
        (self.window == other.window).then(|| Self {
            window: self.window,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }
}

/// Coefficients of the five-point operator at one site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveptCoefficients {
    /// `a_{μ,ν} = 1/f(m, n)`
    pub a_right: f64,
    /// `a_{μ−1,ν} = 1/f(m−1, n−1)`
    pub a_left: f64,
    /// `b_{μ,ν} = f(m−1, n)`
    pub b_up: f64,
    /// `b_{μ,ν−1} = f(m, n−1)`
    pub b_down: f64,
    pub c: f64,
}

impl FiveptCoefficients {
    pub fn off_diagonal_sum(&self) -> f64 {
        self.a_right + self.a_left + self.b_up + self.b_down
    }
}

/// Five-point coefficients at `site` built from the real function `f(m, n)`.
pub fn coefficients_from_f<F>(f: &F, site: Site) -> Result<FiveptCoefficients, LatticeError>
where
    F: Fn(i64, i64) -> f64 + ?Sized,
{
    let (m, n) = (site.m(), site.n());
    let sample = |m: i64, n: i64| {
        let value = f(m, n);
        if value == 0.0 || !value.is_finite() {
            Err(LatticeError::SingularCoefficient { m, n, value })
        } else {
            Ok(value)
        }
    };
    let a_right = 1.0 / sample(m, n)?;
    let a_left = 1.0 / sample(m - 1, n - 1)?;
    let b_up = sample(m - 1, n)?;
    let b_down = sample(m, n - 1)?;
    Ok(FiveptCoefficients {
        a_right,
        a_left,
        b_up,
        b_down,
        c: a_right + a_left + b_up + b_down,
    })
}

/// `(LΦ)_{μ,ν}` with explicitly supplied coefficients for that site.
pub fn apply_five_point(
    field: &LatticeField,
    coeffs: &FiveptCoefficients,
    site: Site,
) -> Result<Complex64, LatticeError> {
    let Site { mu, nu } = site;
    Ok(coeffs.a_right * field.get(mu + 1, nu)?
        + coeffs.a_left * field.get(mu - 1, nu)?
        + coeffs.b_up * field.get(mu, nu + 1)?
        + coeffs.b_down * field.get(mu, nu - 1)?
        - coeffs.c * field.get(mu, nu)?)
}

/// The five-point operator `L` for a given `f`, with coefficients recomputed
/// per site on demand.
#[derive(Clone)]
pub struct FivePointOperator<F> {
    f: F,
}

impl<F> FivePointOperator<F>
where
    F: Fn(i64, i64) -> f64,
{
    pub fn new(f: F) -> Self {
        Self { f }
    }

    pub fn f(&self, m: i64, n: i64) -> f64 {
        (self.f)(m, n)
    }

    pub fn coefficients(&self, site: Site) -> Result<FiveptCoefficients, LatticeError> {
        coefficients_from_f(&self.f, site)
    }

    pub fn apply(&self, field: &LatticeField, site: Site) -> Result<Complex64, LatticeError> {
        apply_five_point(field, &self.coefficients(site)?, site)
    }

    /// `max |LΦ|` over the interior of the field window (one site in from
    /// every edge).
    pub fn max_residual(&self, field: &LatticeField) -> Result<f64, LatticeError> {
        let interior = field.window().expanded(-1)?;
        interior.sites().try_fold(0.0_f64, |acc, site| {
            Ok(acc.max(self.apply(field, site)?.norm()))
        })
    }
}

/// Maximum residual of the four-point equation over a field sampled in
/// `(m, n)` coordinates.
pub fn check_four_point<F>(psi: &LatticeField, f: F) -> Result<f64, LatticeError>
where
    F: Fn(i64, i64) -> f64,
{
    let w = *psi.window();
    let inner = Window::new(w.x_min, w.x_max - 1, w.y_min, w.y_max - 1)?;
    let i = Complex64::i();
    inner.iter().try_fold(0.0_f64, |acc, (m, n)| {
        let lhs = psi.get(m + 1, n + 1)? - psi.get(m, n)?;
        let rhs = i * f(m, n) * (psi.get(m + 1, n)? - psi.get(m, n + 1)?);
        Ok(acc.max((lhs - rhs).norm()))
    })
}

/// Maximum residual of the five-point equation written in `(m, n)`
/// coordinates, over the window interior. Both sublattices are checked.
pub fn check_five_point_diagonal<F>(psi: &LatticeField, f: F) -> Result<f64, LatticeError>
where
    F: Fn(i64, i64) -> f64,
{
    let interior = psi.window().expanded(-1)?;
    interior.iter().try_fold(0.0_f64, |acc, (m, n)| {
        let centre = psi.get(m, n)?;
        let r = (psi.get(m + 1, n + 1)? - centre) / f(m, n)
            + f(m, n - 1) * (psi.get(m + 1, n - 1)? - centre)
            + f(m - 1, n) * (psi.get(m - 1, n + 1)? - centre)
            + (psi.get(m - 1, n - 1)? - centre) / f(m - 1, n - 1);
        Ok(acc.max(r.norm()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sublattice_examples() {
        assert_eq!(to_sublattice(0, 0).unwrap(), (0, 0));
        assert_eq!(to_sublattice(1, 1).unwrap(), (1, 0));
        assert_eq!(to_sublattice(-1, 1).unwrap(), (0, 1));
    }

    #[test]
    fn odd_parity_is_rejected() {
        assert_eq!(
            to_sublattice(1, 0),
            Err(LatticeError::Parity { m: 1, n: 0 })
        );
        assert!(Site::from_diagonal(-3, 0).is_err());
    }

    #[test]
    fn coefficients_for_constant_f() {
        let one = coefficients_from_f(&|_, _| 1.0, Site::new(3, -2)).unwrap();
        assert_eq!(
            one,
            FiveptCoefficients {
                a_right: 1.0,
                a_left: 1.0,
                b_up: 1.0,
                b_down: 1.0,
                c: 4.0
            }
        );
        let two = coefficients_from_f(&|_, _| 2.0, Site::new(0, 0)).unwrap();
        assert_eq!((two.a_right, two.a_left, two.b_up, two.b_down), (0.5, 0.5, 2.0, 2.0));
        assert_eq!(two.c, 5.0);
        let neg = coefficients_from_f(&|_, _| -1.0, Site::new(1, 1)).unwrap();
        assert_eq!((neg.a_right, neg.a_left, neg.b_up, neg.b_down), (-1.0, -1.0, -1.0, -1.0));
        assert_eq!(neg.c, -4.0);
    }

    #[test]
    fn coefficients_use_the_right_f_arguments() {
        // f(m, n) = 10 m + n + 100 keeps every argument distinguishable.
        let f = |m: i64, n: i64| (10 * m + n + 100) as f64;
        let site = Site::new(2, 1); // (m, n) = (1, 3)
        let k = coefficients_from_f(&f, site).unwrap();
        assert_eq!(k.a_right, 1.0 / f(1, 3));
        assert_eq!(k.a_left, 1.0 / f(0, 2));
        assert_eq!(k.b_up, f(0, 3));
        assert_eq!(k.b_down, f(1, 2));
    }

    #[test]
    fn zero_f_is_singular() {
        let f = |m: i64, n: i64| if (m, n) == (-1, -1) { 0.0 } else { 1.0 };
        let err = coefficients_from_f(&f, Site::new(0, 0)).unwrap_err();
        assert!(matches!(err, LatticeError::SingularCoefficient { m: -1, n: -1, .. }));
    }

    #[test]
    fn five_point_on_constants_and_delta() {
        let w = Window::square(3);
        let op = FivePointOperator::new(|_, _| 1.0);
        let ones = LatticeField::from_fn(w, |_, _| c(1.0));
        assert_eq!(op.max_residual(&ones).unwrap(), 0.0);

        let delta = LatticeField::from_fn(w, |x, y| c(if (x, y) == (1, -1) { 1.0 } else { 0.0 }));
        assert_eq!(op.apply(&delta, Site::new(1, -1)).unwrap(), c(-4.0));
        assert_eq!(op.apply(&delta, Site::new(0, -1)).unwrap(), c(1.0));
    }

    #[test]
    fn five_point_outside_window_fails() {
        let field = LatticeField::from_fn(Window::square(1), |_, _| c(1.0));
        let op = FivePointOperator::new(|_, _| 1.0);
        assert!(matches!(
            op.apply(&field, Site::new(1, 0)),
            Err(LatticeError::OutOfWindow { i: 2, j: 0 })
        ));
    }

    #[test]
    fn four_point_trivial_solutions() {
        let w = Window::square(4);
        let f = |m: i64, n: i64| 0.3 + (m * m) as f64 - 0.7 * n as f64;
        let konst = LatticeField::from_fn(w, |_, _| Complex64::new(2.0, -1.0));
        assert_eq!(check_four_point(&konst, f).unwrap(), 0.0);
        let alternating = LatticeField::from_fn(w, |m, n| c(if (m + n) % 2 == 0 { 1.0 } else { -1.0 }));
        assert_eq!(check_four_point(&alternating, f).unwrap(), 0.0);
    }

    #[test]
    fn four_point_detects_violation() {
        let w = Window::square(2);
        let field = LatticeField::from_fn(w, |m, _| c(m as f64));
        assert!(check_four_point(&field, |_, _| 1.0).unwrap() > 0.5);
    }

    proptest! {
        #[test]
        fn sublattice_round_trip(mu in -1000i64..1000, nu in -1000i64..1000) {
            let (m, n) = to_diagonal(mu, nu);
            prop_assert_eq!((m + n).rem_euclid(2), 0);
            prop_assert_eq!(to_sublattice(m, n).unwrap(), (mu, nu));
        }

        #[test]
        fn coefficient_sum_identity(
            mu in -20i64..20,
            nu in -20i64..20,
            seed in 0.1f64..3.0,
        ) {
            let f = move |m: i64, n: i64| seed + 0.25 * ((m * 7 + n * 3).rem_euclid(5) as f64);
            let k = coefficients_from_f(&f, Site::new(mu, nu)).unwrap();
            prop_assert!((k.c - k.off_diagonal_sum()).abs() <= f64::EPSILON * k.c.abs());
        }

        #[test]
        fn five_point_is_linear(
            ar in -3.0f64..3.0, ai in -3.0f64..3.0,
            br in -3.0f64..3.0, bi in -3.0f64..3.0,
            s1 in 0u64..1000, s2 in 0u64..1000,
        ) {
            let w = Window::square(3);
            let noise = |s: u64| move |x: i64, y: i64| {
                let h = (x * 31 + y * 17 + s as i64).rem_euclid(97) as f64;
                Complex64::new(h.sin(), h.cos())
            };
            let p1 = LatticeField::from_fn(w, noise(s1));
            let p2 = LatticeField::from_fn(w, noise(s2));
            let (a, b) = (Complex64::new(ar, ai), Complex64::new(br, bi));
            let mix = p1.scaled_sum(a, &p2, b).unwrap();
            let op = FivePointOperator::new(|m: i64, n: i64| 1.5 + 0.1 * (m - n) as f64);
            for site in w.expanded(-1).unwrap().sites() {
                let lhs = op.apply(&mix, site).unwrap();
                let rhs = a * op.apply(&p1, site).unwrap() + b * op.apply(&p2, site).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}
