//! Oriented closed contours, quadrature of differentials along them, and
//! residues by small-circle quadrature.
//!
//! Differentials are handled through their coefficient against the chart
//! coordinate `z`: a differential `ω = h(z) dz` is integrated along a curve
//! `z(t)` as `∫ h(z(t)) z'(t) dt`. Closed components use the trapezoidal rule
//! (exponentially convergent for analytic periodic integrands); open arcs use
//! composite Gauss–Legendre panels.

use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use thiserror::Error;

/// Default trapezoidal nodes per closed component.
pub const DEFAULT_NODES: usize = 512;
/// Points per Gauss–Legendre panel on open arcs.
pub const GL_PANEL_ORDER: usize = 16;
/// Value of `∮ dp_n` on a correctly oriented C-contour.
pub const ORIENTATION_TARGET: f64 = 2.0 * PI;
/// Relative distance to `±2π` beyond which a contour is rejected.
pub const ORIENTATION_SLACK: f64 = 0.1;
/// Relative residue change under radius halving that triggers a warning.
pub const RESIDUE_HALVING_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand is not finite at z = {z} on the contour")]
    PoleOnContour { z: Complex64 },
    #[error("∮ dp_n = {integral} is not ±2π; not a C-contour")]
    NotACContour { integral: Complex64 },
    #[error("curve does not close: |z(1) − z(0)| = {gap:e}")]
    OpenCurve { gap: f64 },
    #[error("quadrature needs at least one node")]
    NoNodes,
    #[error("residue radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
}

/// A smooth parameterized curve in the chart coordinate.
///
/// Closed curves are parameterized over `t ∈ [0, 1)`; the same trait serves
/// open arcs, integrated over a sub-interval of the parameter.
pub trait Curve: Send + Sync + fmt::Debug {
    fn point(&self, t: f64) -> Complex64;
    /// `dz/dt`.
    fn velocity(&self, t: f64) -> Complex64;
}

/// Counterclockwise circle `z = center + radius·e^{2πit}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Curve for Circle {
    fn point(&self, t: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, 2.0 * PI * t)
    }

    fn velocity(&self, t: f64) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI) * Complex64::from_polar(self.radius, 2.0 * PI * t)
    }
}

/// A differential `h(z) dz`, evaluated through its coefficient `h`.
pub trait Differential {
    fn coefficient(&self, z: Complex64) -> Complex64;
}

impl<F> Differential for F
where
    F: Fn(Complex64) -> Complex64,
{
    fn coefficient(&self, z: Complex64) -> Complex64 {
        self(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// As parameterized.
    Positive,
    /// Reversed.
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Self::Positive => Self::Negative,
            Self::Negative => Self::Positive,
        }
    }
}

/// A quadrature node: the point and its weight already multiplied by `dz/dt`
/// and the orientation sign, so `∫ ω ≈ Σ h(z_k) dz_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub z: Complex64,
    pub dz: Complex64,
}

#[derive(Debug, Clone)]
pub struct Component {
    curve: Arc<dyn Curve>,
    nodes: usize,
}

impl Component {
    pub fn curve(&self) -> &Arc<dyn Curve> {
        &self.curve
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

/// Oriented union of closed curves.
#[derive(Debug, Clone)]
pub struct Contour {
    components: Vec<Component>,
    orientation: Orientation,
}

const CLOSURE_TOL: f64 = 1e-12;

impl Contour {
    pub fn new(curves: Vec<(Arc<dyn Curve>, usize)>) -> Result<Self, QuadError> {
        let mut components = Vec::with_capacity(curves.len());
        for (curve, nodes) in curves {
            if nodes == 0 {
                return Err(QuadError::NoNodes);
            }
            let (a, b) = (curve.point(0.0), curve.point(1.0));
            // Both ends at infinity counts as closed.
            let both_infinite = !a.is_finite() && !b.is_finite();
            if !both_infinite {
                let gap = (b - a).norm();
                if !(gap <= CLOSURE_TOL * (1.0 + a.norm())) {
                    return Err(QuadError::OpenCurve { gap });
                }
            }
            components.push(Component { curve, nodes });
        }
        if components.is_empty() {
            return Err(QuadError::NoNodes);
        }
        Ok(Self {
            components,
            orientation: Orientation::Positive,
        })
    }

    pub fn single(curve: Arc<dyn Curve>, nodes: usize) -> Result<Self, QuadError> {
        Self::new(vec![(curve, nodes)])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    #[must_use]
    pub fn flipped(&self) -> Self {
        Self {
            components: self.components.clone(),
            orientation: self.orientation.reversed(),
        }
    }

    /// Same curves and orientation, `nodes` per component.
    #[must_use]
    pub fn with_nodes(&self, nodes: usize) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| Component {
                    curve: Arc::clone(&c.curve),
                    nodes: nodes.max(1),
                })
                .collect(),
            orientation: self.orientation,
        }
    }

    /// Trapezoidal nodes `t_k = k/N` on every component.
    pub fn quad_nodes(&self) -> Vec<QuadNode> {
        let sign = self.orientation.sign();
        self.components
            .iter()
            .flat_map(|c| {
                let h = sign / c.nodes as f64;
                (0..c.nodes).map(move |k| {
                    let t = k as f64 / c.nodes as f64;
                    QuadNode {
                        z: c.curve.point(t),
                        dz: c.curve.velocity(t) * h,
                    }
                })
            })
            .collect()
    }
}

/// An open arc `t ∈ [t0, t1]` of a curve, traversed with the given sign.
#[derive(Debug, Clone)]
pub struct OpenArc {
    pub curve: Arc<dyn Curve>,
    pub t0: f64,
    pub t1: f64,
    pub sign: f64,
}

impl OpenArc {
    pub fn new(curve: Arc<dyn Curve>, t0: f64, t1: f64, sign: f64) -> Self {
        Self { curve, t0, t1, sign }
    }

    /// Composite Gauss–Legendre nodes with `panels` equal panels of
    /// [`GL_PANEL_ORDER`] points.
    pub fn quad_nodes(&self, panels: usize, rule: &GaussLegendre) -> Vec<QuadNode> {
        let panels = panels.max(1);
        let width = (self.t1 - self.t0) / panels as f64;
        let mut out = Vec::with_capacity(panels * rule.degree());
        for p in 0..panels {
            let a = self.t0 + p as f64 * width;
            let mid = a + 0.5 * width;
            for &(x, w) in rule.as_node_weight_pairs() {
                let t = mid + 0.5 * width * x;
                out.push(QuadNode {
                    z: self.curve.point(t),
                    dz: self.curve.velocity(t) * (0.5 * width * w * self.sign),
                });
            }
        }
        out
    }
}

/// Gauss–Legendre rule with `order` points on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(order.max(1)).expect("order is positive"))
}

/// `Σ h(z_k) dz_k` in node order. Any non-finite sample is reported as a pole
/// on the path.
pub fn integrate_nodes<D>(omega: &D, nodes: &[QuadNode]) -> Result<Complex64, QuadError>
where
    D: Differential + ?Sized,
{
    let mut sum = Complex64::new(0.0, 0.0);
    for node in nodes {
        let term = if node.z.is_finite() {
            omega.coefficient(node.z) * node.dz
        } else {
            Complex64::new(f64::NAN, f64::NAN)
        };
        if !term.is_finite() {
            return Err(QuadError::PoleOnContour { z: node.z });
        }
        sum += term;
    }
    Ok(sum)
}

/// Trapezoidal quadrature of `ω` over every component, with orientation.
pub fn integrate<D>(omega: &D, contour: &Contour) -> Result<Complex64, QuadError>
where
    D: Differential + ?Sized,
{
    integrate_nodes(omega, &contour.quad_nodes())
}

/// Residue estimate from two concentric circles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueEstimate {
    pub value: Complex64,
    /// `|res(r) − res(r/2)|`.
    pub halving_discrepancy: f64,
}

impl ResidueEstimate {
    /// Set when halving the radius moved the value: another singularity sits
    /// in the annulus, or the node count is too low for the pole order.
    pub fn warning(&self) -> bool {
        self.halving_discrepancy > RESIDUE_HALVING_TOL * self.value.norm().max(1.0)
    }
}

/// `(1/2πi) ∮ ω` over the counterclockwise circle `|z − center| = radius`,
/// cross-checked against the circle of half the radius.
pub fn residue<D>(
    omega: &D,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<ResidueEstimate, QuadError>
where
    D: Differential + ?Sized,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(QuadError::InvalidRadius(radius));
    }
    let on_circle = |r: f64| -> Result<Complex64, QuadError> {
        let c = Contour::single(Arc::new(Circle { center, radius: r }), nodes)?;
        Ok(integrate(omega, &c)? / Complex64::new(0.0, 2.0 * PI))
    };
    let value = on_circle(radius)?;
    let half = on_circle(0.5 * radius)?;
    Ok(ResidueEstimate {
        value,
        halving_discrepancy: (value - half).norm(),
    })
}

/// Half the distance from `center` to the nearest other point of `marked`.
pub fn default_residue_radius(center: Complex64, marked: &[Complex64]) -> f64 {
    marked
        .iter()
        .map(|p| (p - center).norm())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min)
        * 0.5
}

/// Flips the contour if needed so that `∮ dp_n = +2π`.
pub fn normalize_orientation<D>(contour: &Contour, dp_n: &D) -> Result<Contour, QuadError>
where
    D: Differential + ?Sized,
{
    let integral = integrate(dp_n, contour)?;
    let target = Complex64::new(ORIENTATION_TARGET, 0.0);
    let slack = ORIENTATION_SLACK * ORIENTATION_TARGET;
    if (integral - target).norm() <= slack {
        Ok(contour.clone())
    } else if (integral + target).norm() <= slack {
        Ok(contour.flipped())
    } else {
        Err(QuadError::NotACContour { integral })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_circle(nodes: usize) -> Contour {
        Contour::single(
            Arc::new(Circle {
                center: Complex64::new(0.0, 0.0),
                radius: 1.0,
            }),
            nodes,
        )
        .unwrap()
    }

    fn dp_n(z: Complex64) -> Complex64 {
        let i = Complex64::i();
        i / (z - i) - i / (z + i)
    }

    #[test]
    fn cauchy_on_unit_circle() {
        let v = integrate(&|z: Complex64| 1.0 / z, &unit_circle(64)).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn pole_on_contour_is_reported() {
        let err = integrate(&|z: Complex64| 1.0 / (z - 1.0), &unit_circle(8)).unwrap_err();
        assert!(matches!(err, QuadError::PoleOnContour { .. }));
    }

    #[test]
    fn residues_of_simple_and_double_poles() {
        let omega = |z: Complex64| -0.5 / z;
        let r = residue(&omega, Complex64::new(0.0, 0.0), 0.5, 64).unwrap();
        assert_abs_diff_eq!(r.value.re, -0.5, epsilon = 1e-14);
        assert!(!r.warning());

        let dpm = |z: Complex64| Complex64::i() / (z - 1.0) - Complex64::i() / (z + 1.0);
        let r = residue(&dpm, Complex64::new(1.0, 0.0), 0.5, 64).unwrap();
        assert_abs_diff_eq!(r.value.im, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.value.re, 0.0, epsilon = 1e-13);

        let r = residue(&|z: Complex64| 1.0 / (z * z), Complex64::new(0.0, 0.0), 0.5, 64).unwrap();
        assert!(r.value.norm() < 1e-14);
    }

    #[test]
    fn residue_warns_on_misplaced_centre() {
        // Pole at 0.4 lies between radii 0.25 and 0.5 around the origin.
        let omega = |z: Complex64| 1.0 / (z - 0.4);
        let r = residue(&omega, Complex64::new(0.0, 0.0), 0.5, 128).unwrap();
        assert!(r.warning());
        assert!(residue(&omega, Complex64::new(0.0, 0.0), -1.0, 8).is_err());
    }

    #[test]
    fn orientation_normalization() {
        let around_qplus = Contour::single(
            Arc::new(Circle {
                center: Complex64::i(),
                radius: 0.5,
            }),
            128,
        )
        .unwrap();
        // counterclockwise around Q+ gives −2π, so it must flip
        let fixed = normalize_orientation(&around_qplus, &dp_n).unwrap();
        assert_eq!(fixed.orientation(), Orientation::Negative);
        assert_abs_diff_eq!(integrate(&dp_n, &fixed).unwrap().re, 2.0 * PI, epsilon = 1e-12);
        // idempotent
        let again = normalize_orientation(&fixed, &dp_n).unwrap();
        assert_eq!(again.orientation(), fixed.orientation());

        // enclosing both Q+ and Q− gives zero
        let both = Contour::single(
            Arc::new(Circle {
                center: Complex64::new(0.0, 0.0),
                radius: 3.0,
            }),
            256,
        )
        .unwrap();
        assert!(matches!(
            normalize_orientation(&both, &dp_n),
            Err(QuadError::NotACContour { .. })
        ));
    }

    #[test]
    fn open_curve_rejected() {
        #[derive(Debug)]
        struct Segment;
        impl Curve for Segment {
            fn point(&self, t: f64) -> Complex64 {
                Complex64::new(t, 0.0)
            }
            fn velocity(&self, _: f64) -> Complex64 {
                Complex64::new(1.0, 0.0)
            }
        }
        assert!(matches!(
            Contour::single(Arc::new(Segment), 8),
            Err(QuadError::OpenCurve { .. })
        ));
    }

    #[test]
    fn gauss_legendre_arc_matches_closed_form() {
        // ∫ z² dz along the upper half of the unit circle from 1 to −1 is −2/3.
        let arc = OpenArc::new(
            Arc::new(Circle {
                center: Complex64::new(0.0, 0.0),
                radius: 1.0,
            }),
            0.0,
            0.5,
            1.0,
        );
        let rule = gauss_legendre(GL_PANEL_ORDER);
        let v = integrate_nodes(&|z: Complex64| z * z, &arc.quad_nodes(3, &rule)).unwrap();
        assert_abs_diff_eq!(v.re, -2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn node_doubling_is_spectrally_stable() {
        let omega = |z: Complex64| (z + 2.0).powi(3) / (z - 0.3) / (z + 1.7);
        let c = unit_circle(128);
        let a = integrate(&omega, &c).unwrap();
        let b = integrate(&omega, &c.with_nodes(256)).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn default_radius_is_half_nearest_distance() {
        let marked = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::i(),
            -Complex64::i(),
            Complex64::new(0.0, 0.0),
        ];
        assert_abs_diff_eq!(default_residue_radius(Complex64::i(), &marked), 0.5);
    }
}
