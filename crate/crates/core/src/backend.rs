//! The evaluation surface consumed by the Green's function assembly.

use num_complex::Complex64;

use crate::contour::{Contour, OpenArc};

/// Marked points in the chart coordinate. `R±` may sit at the chart's point
/// at infinity, hence the options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedPoints {
    pub p_plus: Complex64,
    pub p_minus: Complex64,
    pub q_plus: Complex64,
    pub q_minus: Complex64,
    pub r_plus: Option<Complex64>,
    pub r_minus: Option<Complex64>,
}

impl MarkedPoints {
    pub fn finite(&self) -> Vec<Complex64> {
        let mut pts = vec![self.p_plus, self.p_minus, self.q_plus, self.q_minus];
        pts.extend(self.r_plus);
        pts.extend(self.r_minus);
        pts
    }
}

/// One arc of a C-contour on which the sgn weight of the normalized Green's
/// function is constant.
#[derive(Debug, Clone)]
pub struct WeightedArc {
    pub arc: OpenArc,
    pub panels: usize,
    /// The constant value of the sgn factor on this arc (−1, 0 or 1).
    pub weight: f64,
}

/// Everything the Green's function needs from the level set `C_λ`.
#[derive(Debug, Clone)]
pub struct GreenContour {
    /// Closed C-contour for the kernel `K` and `G₀` (trapezoidal rule).
    pub closed: Contour,
    /// `C_λ` split at the points where the sgn weight jumps.
    pub arcs: Vec<WeightedArc>,
    pub im_p_m: f64,
    pub im_p_n: f64,
    /// `C_λ` ran through marked points and was replaced by its one-sided
    /// limit from the `Q⁺` side.
    pub one_sided_limit: bool,
}

/// Wave functions, differentials and level sets of a spectral curve.
///
/// Evaluation methods take chart coordinates and return non-finite values at
/// poles instead of failing, so quadrature can report the offending node.
pub trait SpectralBackend: Send + Sync {
    type Point: Copy + std::fmt::Debug + Send + Sync;
    type Error: std::error::Error + Send + Sync + 'static;

    fn psi(&self, z: Complex64, m: i64, n: i64) -> Complex64;
    /// `Ψ⁺(γ, m, n) = Ψ(σγ, m, n)`.
    fn psi_dual(&self, z: Complex64, m: i64, n: i64) -> Complex64;
    /// Coefficient of `dz` in `Ω`.
    fn omega(&self, z: Complex64) -> Complex64;
    fn dp_m(&self, z: Complex64) -> Complex64;
    fn dp_n(&self, z: Complex64) -> Complex64;
    fn im_p_m(&self, z: Complex64) -> f64;
    fn im_p_n(&self, z: Complex64) -> f64;
    /// Sign `s` with `|Ψ(γ, m, n)| ≍ exp(s·(m Im p_m(γ) + n Im p_n(γ)))`. It
    /// orients the sgn weight of the normalized Green's function and the
    /// growth normalizer.
    fn growth_sign(&self) -> f64 {
        1.0
    }
    /// The real function `f(m, n)` of the four-point equation.
    fn f(&self, m: i64, n: i64) -> f64;
    fn marked_points(&self) -> MarkedPoints;
    /// `(Im p_m(λ), Im p_n(λ))`.
    fn quasimomenta_at(&self, lambda: Self::Point) -> (f64, f64);
    fn green_contour(&self, lambda: Self::Point, nodes: usize) -> Result<GreenContour, Self::Error>;
}

impl GreenContour {
    /// Reverses every piece; used to inject an orientation fault.
    #[must_use]
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.closed = self.closed.flipped();
        for a in &mut out.arcs {
            a.arc.sign = -a.arc.sign;
        }
        out
    }
}
