//! Genus-zero spectral data on the Riemann sphere.
//!
//! Marked points `P± = ±1`, `Q± = ±i`, `R₊ = ∞`, `R₋ = 0`; involutions
//! `σz = −z`, `τz = 1/z̄`; `Ω = −dz/(2z)`;
//! `Ψ(z, m, n) = ((z+1)/(z−1))^m ((z+i)/(z−i))^n` with `f ≡ 1`.
//!
//! Level sets of `Im p_n = ln|(z−i)/(z+i)|` are the circles `|w| = r` of the
//! Möbius coordinate `w = (z−i)/(z+i)`, which is how `C_λ` is built.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::backend::{GreenContour, MarkedPoints, SpectralBackend, WeightedArc};
use crate::contour::{
    normalize_orientation, Contour, Curve, OpenArc, Orientation, QuadError, GL_PANEL_ORDER,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const P_PLUS: Complex64 = ONE;
pub const P_MINUS: Complex64 = Complex64::new(-1.0, 0.0);
pub const Q_PLUS: Complex64 = I;
pub const Q_MINUS: Complex64 = Complex64::new(0.0, -1.0);

/// `|Ψ(z, m, n)| = exp(−(m Im p_m(z) + n Im p_n(z)))` exactly: `Ψ` has a pole
/// at `P⁺` where `Im p_m = −∞`.
pub const GROWTH_SIGN: f64 = -1.0;

/// Radius in `w` of the circle that replaces `C_λ` when the level set
/// passes through the marked points.
pub const LIMIT_CIRCLE_RADIUS: f64 = 0.5;
/// `||w(λ)| − 1|` below which `λ` is treated as lying on that level.
pub const DEGENERATE_LEVEL_TOL: f64 = 1e-9;
/// Gauss–Legendre panels on each radial connector of the limit contour.
const RADIAL_PANELS: usize = 4;

/// A point of the Riemann sphere; infinity is a separate variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self::Finite(Complex64::new(re, im))
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            Self::Finite(z) => Some(z),
            Self::Infinity => None,
        }
    }

    /// `σz = −z`.
    pub fn sigma(self) -> Self {
        match self {
            Self::Finite(z) => Self::Finite(-z),
            Self::Infinity => Self::Infinity,
        }
    }

    /// `τz = 1/z̄`, exchanging `0` and `∞`.
    pub fn tau(self) -> Self {
        match self {
            Self::Finite(z) if z == ZERO => Self::Infinity,
            Self::Finite(z) => Self::Finite(ONE / z.conj()),
            Self::Infinity => Self::Finite(ZERO),
        }
    }

    /// Möbius coordinate `w = (z−i)/(z+i)`; `Q⁻` goes to infinity.
    pub fn to_w(self) -> Self {
        match self {
            Self::Infinity => Self::Finite(ONE),
            Self::Finite(z) if z == Q_MINUS => Self::Infinity,
            Self::Finite(z) => Self::Finite((z - I) / (z + I)),
        }
    }

    /// Inverse of [`SpherePoint::to_w`]: `z = i(1+w)/(1−w)`.
    pub fn from_w(w: Self) -> Self {
        match w {
            Self::Infinity => Self::Finite(Q_MINUS),
            Self::Finite(w) if w == ONE => Self::Infinity,
            Self::Finite(w) => Self::Finite(I * (ONE + w) / (ONE - w)),
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        Self::Finite(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(z) => write!(f, "{z}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphereError {
    #[error("pole of order {order} at {at}")]
    Pole { at: SpherePoint, order: u64 },
    #[error("degenerate contour: C_λ collapses to the point λ = {0}")]
    DegenerateContour(SpherePoint),
    #[error("λ = {0} is a marked point on the level Im p_n = 0; C_λ is not defined there")]
    MarkedPointOnLevel(SpherePoint),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// `(num/den)^k` by binary exponentiation of the exact ratio; negative `k`
/// uses `den/num`.
fn ratio_pow(num: Complex64, den: Complex64, k: i64) -> Complex64 {
    let (num, den) = if k >= 0 { (num, den) } else { (den, num) };
    let mut base = num / den;
    let mut e = k.unsigned_abs();
    let mut acc = ONE;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        e >>= 1;
        if e > 0 {
            base *= base;
        }
    }
    acc
}

fn psi_chart(z: Complex64, m: i64, n: i64) -> Complex64 {
    ratio_pow(z + ONE, z - ONE, m) * ratio_pow(z + I, z - I, n)
}

/// `Ψ(z, m, n)`. Returns 1 at `∞`; a pole is an error carrying its order.
pub fn psi(z: SpherePoint, m: i64, n: i64) -> Result<Complex64, SphereError> {
    let z = match z {
        SpherePoint::Infinity => return Ok(ONE),
        SpherePoint::Finite(z) => z,
    };
    let pole = [(P_PLUS, m), (P_MINUS, -m), (Q_PLUS, n), (Q_MINUS, -n)]
        .into_iter()
        .find(|&(p, k)| z == p && k > 0);
    if let Some((p, k)) = pole {
        return Err(SphereError::Pole {
            at: SpherePoint::Finite(p),
            order: k.unsigned_abs(),
        });
    }
    Ok(psi_chart(z, m, n))
}

/// `Ψ⁺(z, m, n) = Ψ(−z, m, n)`.
pub fn psi_dual(z: SpherePoint, m: i64, n: i64) -> Result<Complex64, SphereError> {
    psi(z.sigma(), m, n)
}

/// Coefficient `−1/(2z)` of `dz` in `Ω`.
pub fn omega_coeff(z: SpherePoint) -> Result<Complex64, SphereError> {
    match z {
        SpherePoint::Finite(z) if z != ZERO => Ok(-0.5 / z),
        at => Err(SphereError::Pole { at, order: 1 }),
    }
}

/// `Im p_m = ln|(z−1)/(z+1)|`: `−∞` at `P⁺`, `+∞` at `P⁻`, `0` at `∞`.
pub fn im_p_m(z: SpherePoint) -> f64 {
    match z {
        SpherePoint::Infinity => 0.0,
        SpherePoint::Finite(z) => log_ratio(z, ONE),
    }
}

/// `Im p_n = ln|(z−i)/(z+i)|`: `−∞` at `Q⁺`, `+∞` at `Q⁻`, `0` at `∞`.
pub fn im_p_n(z: SpherePoint) -> f64 {
    match z {
        SpherePoint::Infinity => 0.0,
        SpherePoint::Finite(z) => log_ratio(z, I),
    }
}

fn log_ratio(z: Complex64, a: Complex64) -> f64 {
    (z - a).norm().ln() - (z + a).norm().ln()
}

/// Coefficient of `dz` in `dp_m = i dz/(z−1) − i dz/(z+1)`.
///
/// At `∞` the coefficient vanishes (the differential is regular there).
pub fn dp_m_coeff(z: SpherePoint) -> Result<Complex64, SphereError> {
    dp_coeff(z, ONE)
}

/// Coefficient of `dz` in `dp_n = i dz/(z−i) − i dz/(z+i)`.
pub fn dp_n_coeff(z: SpherePoint) -> Result<Complex64, SphereError> {
    dp_coeff(z, I)
}

fn dp_coeff(z: SpherePoint, a: Complex64) -> Result<Complex64, SphereError> {
    match z {
        SpherePoint::Infinity => Ok(ZERO),
        SpherePoint::Finite(z) if z == a || z == -a => Err(SphereError::Pole {
            at: SpherePoint::Finite(z),
            order: 1,
        }),
        SpherePoint::Finite(z) => Ok(I / (z - a) - I / (z + a)),
    }
}

fn mobius_z(w: Complex64) -> Complex64 {
    if w == ONE {
        return Complex64::new(f64::INFINITY, f64::INFINITY);
    }
    I * (ONE + w) / (ONE - w)
}

/// `dz/dw` for `z = i(1+w)/(1−w)`.
fn mobius_dz_dw(w: Complex64) -> Complex64 {
    2.0 * I / ((ONE - w) * (ONE - w))
}

/// The level set `|w| = radius`, parameterized counterclockwise in `w`:
/// `w(t) = radius·e^{2πit}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelCircle {
    pub radius: f64,
}

impl LevelCircle {
    pub fn w(&self, t: f64) -> Complex64 {
        // exact at whole turns, so the curve closes through w = 1 exactly
        let frac = t.rem_euclid(1.0);
        if frac == 0.0 {
            return Complex64::new(self.radius, 0.0);
        }
        Complex64::from_polar(self.radius, 2.0 * PI * frac)
    }

    /// Parameter of the point of the circle with the same argument as `w`.
    pub fn parameter_of(w: Complex64) -> f64 {
        (w.arg() / (2.0 * PI)).rem_euclid(1.0)
    }
}

impl Curve for LevelCircle {
    fn point(&self, t: f64) -> Complex64 {
        mobius_z(self.w(t))
    }

    fn velocity(&self, t: f64) -> Complex64 {
        let w = self.w(t);
        mobius_dz_dw(w) * Complex64::new(0.0, 2.0 * PI) * w
    }
}

/// Radial segment in `w` at fixed argument `2π·angle`, with `|w|` going
/// linearly from `from` to `to` as the parameter runs over `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSegment {
    pub angle: f64,
    pub from: f64,
    pub to: f64,
}

impl RadialSegment {
    fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.angle)
    }
}

impl Curve for RadialSegment {
    fn point(&self, s: f64) -> Complex64 {
        mobius_z((self.from + (self.to - self.from) * s) * self.direction())
    }

    fn velocity(&self, s: f64) -> Complex64 {
        let e = self.direction();
        let w = (self.from + (self.to - self.from) * s) * e;
        mobius_dz_dw(w) * (self.to - self.from) * e
    }
}

fn dp_n_chart(z: Complex64) -> Complex64 {
    I / (z - I) - I / (z + I)
}

/// The level set `C_λ = {Im p_n(γ) = Im p_n(λ)}` as a closed contour with
/// `nodes` trapezoidal samples, oriented so that `∮ dp_n = +2π` (clockwise
/// in `w`).
///
/// For `|w(λ)| = 1` this is the real axis through `∞`; the contour is built
/// but it passes through poles of `Ω` and of `Ψ`, so integrals over it fail.
pub fn c_contour(lambda: SpherePoint, nodes: usize) -> Result<Contour, SphereError> {
    let radius = level_radius(lambda)?;
    let raw = Contour::single(Arc::new(LevelCircle { radius }), nodes)?;
    if (radius - 1.0).abs() < DEGENERATE_LEVEL_TOL {
        // dp_n = i dw/w has no pole on |w| = 1, but the z chart does (at ∞);
        // clockwise in w always gives +2π.
        return Ok(match raw.orientation() {
            Orientation::Positive => raw.flipped(),
            Orientation::Negative => raw,
        });
    }
    Ok(normalize_orientation(&raw, &dp_n_chart)?)
}

/// `|w(λ)|`, rejecting `λ = Q±` where the level set is a single point.
pub fn level_radius(lambda: SpherePoint) -> Result<f64, SphereError> {
    match lambda.to_w() {
        SpherePoint::Finite(w) if w != ZERO => Ok(w.norm()),
        _ => Err(SphereError::DegenerateContour(lambda)),
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The genus-zero backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sphere;

impl Sphere {
    /// Parameters on `|w| = r` of the two points where the sgn weight of the
    /// normalized Green's function jumps: `λ` and `τλ`, the only
    /// intersections of `C_λ` with the circle `Im p_m = Im p_m(λ)`.
    fn breakpoints(lambda: SpherePoint) -> (f64, f64) {
        let param = |p: SpherePoint| match p.to_w() {
            SpherePoint::Finite(w) => LevelCircle::parameter_of(w),
            SpherePoint::Infinity => unreachable!("λ = Q⁻ is rejected before"),
        };
        (param(lambda), param(lambda.tau()))
    }

    /// Splits the parameter circle at the breakpoints; returns `(t0, t1)`
    /// intervals, `t0 < t1`, covering one full turn.
    fn split_turn(a: f64, b: f64) -> Vec<(f64, f64)> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if hi - lo < 1e-14 || 1.0 - (hi - lo) < 1e-14 {
            vec![(lo, lo + 1.0)]
        } else {
            vec![(lo, hi), (hi, lo + 1.0)]
        }
    }

    fn weight_at(im_p_m_lambda: f64, radius: f64, t: f64) -> f64 {
        let w = LevelCircle { radius }.w(t);
        let z = SpherePoint::from_w(SpherePoint::Finite(w));
        sgn(GROWTH_SIGN * (im_p_m_lambda - im_p_m(z)))
    }
}

impl SpectralBackend for Sphere {
    type Point = SpherePoint;
    type Error = SphereError;

    fn psi(&self, z: Complex64, m: i64, n: i64) -> Complex64 {
        psi_chart(z, m, n)
    }

    fn psi_dual(&self, z: Complex64, m: i64, n: i64) -> Complex64 {
        psi_chart(-z, m, n)
    }

    fn omega(&self, z: Complex64) -> Complex64 {
        -0.5 / z
    }

    fn dp_m(&self, z: Complex64) -> Complex64 {
        I / (z - ONE) - I / (z + ONE)
    }

    fn dp_n(&self, z: Complex64) -> Complex64 {
        dp_n_chart(z)
    }

    fn im_p_m(&self, z: Complex64) -> f64 {
        log_ratio(z, ONE)
    }

    fn im_p_n(&self, z: Complex64) -> f64 {
        log_ratio(z, I)
    }

    fn growth_sign(&self) -> f64 {
        GROWTH_SIGN
    }

    fn f(&self, _m: i64, _n: i64) -> f64 {
        1.0
    }

    fn marked_points(&self) -> MarkedPoints {
        MarkedPoints {
            p_plus: P_PLUS,
            p_minus: P_MINUS,
            q_plus: Q_PLUS,
            q_minus: Q_MINUS,
            r_plus: None,
            r_minus: Some(ZERO),
        }
    }

    fn quasimomenta_at(&self, lambda: SpherePoint) -> (f64, f64) {
        (im_p_m(lambda), im_p_n(lambda))
    }

    fn green_contour(&self, lambda: SpherePoint, nodes: usize) -> Result<GreenContour, SphereError> {
        let radius = level_radius(lambda)?;
        let (im_pm, im_pn) = self.quasimomenta_at(lambda);
        let (ta, tb) = Self::breakpoints(lambda);
        let intervals = Self::split_turn(ta, tb);
        let panels_for = |len: f64| ((len * nodes as f64) / GL_PANEL_ORDER as f64).ceil().max(1.0) as usize;

        if (radius - 1.0).abs() >= DEGENERATE_LEVEL_TOL {
            let closed = c_contour(lambda, nodes)?;
            let sign = closed.orientation().sign();
            let curve: Arc<dyn Curve> = Arc::new(LevelCircle { radius });
            let arcs = intervals
                .into_iter()
                .map(|(t0, t1)| WeightedArc {
                    arc: OpenArc::new(Arc::clone(&curve), t0, t1, sign),
                    panels: panels_for(t1 - t0),
                    weight: Self::weight_at(im_pm, radius, 0.5 * (t0 + t1)),
                })
                .collect();
            return Ok(GreenContour {
                closed,
                arcs,
                im_p_m: im_pm,
                im_p_n: im_pn,
                one_sided_limit: false,
            });
        }

        // λ on the level of R± and P±: take the limit of C_λ' as |w(λ')| → 1
        // from the Q⁺ side. Each weighted arc of the unit w-circle (indented
        // inward around the poles on it) is deformed into a radial segment
        // down to |w| = r₀, the arc of |w| = r₀, and a radial segment back.
        let on_level = [P_PLUS, P_MINUS, ZERO]
            .iter()
            .any(|&p| lambda == SpherePoint::Finite(p))
            || lambda == SpherePoint::Infinity;
        if on_level {
            return Err(SphereError::MarkedPointOnLevel(lambda));
        }
        let r0 = LIMIT_CIRCLE_RADIUS;
        let closed = c_contour(SpherePoint::from_w(SpherePoint::new(0.0, r0)), nodes)?;
        let sign = closed.orientation().sign();
        debug_assert_eq!(sign, -1.0);
        let inner: Arc<dyn Curve> = Arc::new(LevelCircle { radius: r0 });
        let mut arcs = Vec::new();
        for (t0, t1) in intervals {
            let weight = Self::weight_at(im_pm, 1.0, 0.5 * (t0 + t1));
            // Clockwise in w: the arc runs from t1 down to t0.
            arcs.push(WeightedArc {
                arc: OpenArc::new(
                    Arc::new(RadialSegment {
                        angle: t1,
                        from: 1.0,
                        to: r0,
                    }),
                    0.0,
                    1.0,
                    1.0,
                ),
                panels: RADIAL_PANELS,
                weight,
            });
            arcs.push(WeightedArc {
                arc: OpenArc::new(Arc::clone(&inner), t0, t1, sign),
                panels: panels_for(t1 - t0),
                weight,
            });
            arcs.push(WeightedArc {
                arc: OpenArc::new(
                    Arc::new(RadialSegment {
                        angle: t0,
                        from: r0,
                        to: 1.0,
                    }),
                    0.0,
                    1.0,
                    1.0,
                ),
                panels: RADIAL_PANELS,
                weight,
            });
        }
        Ok(GreenContour {
            closed,
            arcs,
            im_p_m: im_pm,
            im_p_n: im_pn,
            one_sided_limit: true,
        })
    }
}
