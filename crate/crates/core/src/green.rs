//! Kernel `K`, the Green's function `G₀`, the normalized Green's function `G`
//! and the checks built on them.
//!
//! With `m = μ − ν`, `n = μ + ν` and the target `(μ̃, ν̃)`:
//!
//! * `K = ∮ Ψ(γ, m, n) Ψ⁺(γ, m̃, ñ) Ω` over a C-contour,
//! * `G₀ = sgn(m − m̃) K / 4π`,
//! * `G = (1/4π) ∮_{C_λ} (sgn(m − m̃) + sgn(s(Im p_m(λ) − Im p_m(γ)))) Ψ Ψ⁺ Ω`
//!
//! where `s` is the backend's growth sign.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::backend::{GreenContour, SpectralBackend};
use crate::contour::{
    default_residue_radius, gauss_legendre, integrate, integrate_nodes, residue, Contour, Differential, QuadError,
    QuadNode, ResidueEstimate, GL_PANEL_ORDER,
};
use crate::lattice::{FivePointOperator, LatticeError, LatticeField, Site, Window};

#[derive(Debug, Error)]
pub enum GreenError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("contour construction failed: {0}")]
    Contour(#[source] Box<dyn std::error::Error + Send + Sync>),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

fn sgn_i(x: i64) -> f64 {
    x.signum() as f64
}

/// `Ω̃(γ) = Ψ(γ, m, n) Ψ⁺(γ, m̃, ñ) Ω(γ)` at fixed indices.
#[derive(Debug, Clone, Copy)]
pub struct WaveDifferential<'a, B> {
    pub backend: &'a B,
    pub m: i64,
    pub n: i64,
    pub m_dual: i64,
    pub n_dual: i64,
}

impl<'a, B: SpectralBackend> WaveDifferential<'a, B> {
    pub fn new(backend: &'a B, site: Site, target: Site) -> Self {
        Self::diagonal(backend, site.m(), site.n(), target.m(), target.n())
    }

    /// Indices given directly in `(m, n)` coordinates.
    pub fn diagonal(backend: &'a B, m: i64, n: i64, m_dual: i64, n_dual: i64) -> Self {
        Self {
            backend,
            m,
            n,
            m_dual,
            n_dual,
        }
    }
}

impl<B: SpectralBackend> Differential for WaveDifferential<'_, B> {
    fn coefficient(&self, z: Complex64) -> Complex64 {
        let b = self.backend;
        b.psi(z, self.m, self.n) * b.psi_dual(z, self.m_dual, self.n_dual) * b.omega(z)
    }
}

/// `K(μ, ν, μ̃, ν̃)` over a C-contour.
pub fn kernel_k<B: SpectralBackend>(
    backend: &B,
    contour: &Contour,
    site: Site,
    target: Site,
) -> Result<Complex64, GreenError> {
    Ok(integrate(&WaveDifferential::new(backend, site, target), contour)?)
}

/// `G₀ = sgn(m − m̃) K / 4π`.
pub fn g0<B: SpectralBackend>(
    backend: &B,
    contour: &Contour,
    site: Site,
    target: Site,
) -> Result<Complex64, GreenError> {
    let s = sgn_i(site.m() - target.m());
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(s * kernel_k(backend, contour, site, target)? / (4.0 * PI))
}

/// Which Green's function a table or check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreenKind {
    /// `G₀` on the closed contour.
    G0,
    /// The normalized `G`.
    G,
}

impl GreenKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::G0 => "G0",
            Self::G => "G",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct WeightedNode {
    node: QuadNode,
    weight: f64,
}

/// Precomputed quadrature for `G₀`, `Z` and `G` on one `C_λ`.
pub struct GreenEvaluator<'a, B: SpectralBackend> {
    backend: &'a B,
    contour: GreenContour,
    closed_nodes: Vec<QuadNode>,
    arc_nodes: Vec<WeightedNode>,
    nodes: usize,
}

impl<'a, B: SpectralBackend> GreenEvaluator<'a, B> {
    pub fn new(backend: &'a B, lambda: B::Point, nodes: usize) -> Result<Self, GreenError> {
        let contour = backend
            .green_contour(lambda, nodes)
            .map_err(|e| GreenError::Contour(Box::new(e)))?;
        Ok(Self::from_contour(backend, contour, nodes))
    }

    pub fn from_contour(backend: &'a B, contour: GreenContour, nodes: usize) -> Self {
        let rule = gauss_legendre(GL_PANEL_ORDER);
        let closed_nodes = contour.closed.quad_nodes();
        let arc_nodes = contour
            .arcs
            .iter()
            .flat_map(|a| {
                a.arc
                    .quad_nodes(a.panels, &rule)
                    .into_iter()
                    .map(move |node| WeightedNode { node, weight: a.weight })
            })
            .collect();
        Self {
            backend,
            contour,
            closed_nodes,
            arc_nodes,
            nodes,
        }
    }

    pub fn backend(&self) -> &B {
        self.backend
    }

    pub fn contour(&self) -> &GreenContour {
        &self.contour
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn kernel(&self, site: Site, target: Site) -> Result<Complex64, GreenError> {
        Ok(integrate_nodes(
            &WaveDifferential::new(self.backend, site, target),
            &self.closed_nodes,
        )?)
    }

    pub fn g0(&self, site: Site, target: Site) -> Result<Complex64, GreenError> {
        let s = sgn_i(site.m() - target.m());
        if s == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(s * self.kernel(site, target)? / (4.0 * PI))
    }

    /// `Z = (1/4π) ∮ sgn(s(Im p_m(λ) − Im p_m(γ))) Ψ Ψ⁺ Ω`.
    pub fn z_correction(&self, site: Site, target: Site) -> Result<Complex64, GreenError> {
        self.weighted(site, target, 0.0)
    }

    pub fn green(&self, site: Site, target: Site) -> Result<Complex64, GreenError> {
        self.weighted(site, target, sgn_i(site.m() - target.m()))
    }

    pub fn eval(&self, kind: GreenKind, site: Site, target: Site) -> Result<Complex64, GreenError> {
        match kind {
            GreenKind::G0 => self.g0(site, target),
            GreenKind::G => self.green(site, target),
        }
    }

    fn weighted(&self, site: Site, target: Site, offset: f64) -> Result<Complex64, GreenError> {
        let omega = WaveDifferential::new(self.backend, site, target);
        let mut sum = Complex64::new(0.0, 0.0);
        for wn in &self.arc_nodes {
            let w = offset + wn.weight;
            if w == 0.0 {
                continue;
            }
            let z = wn.node.z;
            let term = if z.is_finite() {
                omega.coefficient(z) * wn.node.dz * w
            } else {
                Complex64::new(f64::NAN, f64::NAN)
            };
            if !term.is_finite() {
                return Err(QuadError::PoleOnContour { z }.into());
            }
            sum += term;
        }
        Ok(sum / (4.0 * PI))
    }

    /// Values on every site of `window`, evaluated in parallel.
    pub fn field(&self, kind: GreenKind, window: Window, target: Site) -> Result<LatticeField, GreenError> {
        let sites: Vec<(i64, i64)> = window.iter().collect();
        let values = sites
            .par_iter()
            .map(|&(mu, nu)| self.eval(kind, Site::new(mu, nu), target))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LatticeField::from_values(window, values).expect("one value per site"))
    }

    /// `max |LG − δ|` over `window`, with `G` sampled on the window grown by
    /// one site.
    pub fn verify_delta(&self, kind: GreenKind, window: Window, target: Site) -> Result<f64, GreenError> {
        let field = self.field(kind, window.expanded(1)?, target)?;
        let op = FivePointOperator::new(|m, n| self.backend.f(m, n));
        let mut worst = 0.0_f64;
        for site in window.sites() {
            let delta = if site == target { 1.0 } else { 0.0 };
            worst = worst.max((op.apply(&field, site)? - delta).norm());
        }
        Ok(worst)
    }

    /// `exp(s((μ − μ̃) Im p_μ(λ) + (ν − ν̃) Im p_ν(λ)))` with
    /// `p_μ = p_n + p_m`, `p_ν = p_n − p_m`.
    pub fn growth_normalizer(&self, site: Site, target: Site) -> f64 {
        let (pm, pn) = (self.contour.im_p_m, self.contour.im_p_n);
        let d_mu = (site.mu - target.mu) as f64;
        let d_nu = (site.nu - target.nu) as f64;
        (self.backend.growth_sign() * (d_mu * (pn + pm) + d_nu * (pn - pm))).exp()
    }

    /// Fits `R₁ = max |G| / normalizer` over the window and counts ratios
    /// above `cap`.
    pub fn growth_check(
        &self,
        kind: GreenKind,
        window: Window,
        target: Site,
        cap: f64,
    ) -> Result<GrowthFit, GreenError> {
        let field = self.field(kind, window, target)?;
        let mut fit = GrowthFit {
            r1: 0.0,
            violations: 0,
        };
        for (site, value) in window.sites().zip(field.values()) {
            let ratio = value.norm() / self.growth_normalizer(site, target);
            fit.r1 = fit.r1.max(ratio);
            if ratio > cap {
                fit.violations += 1;
            }
        }
        Ok(fit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub r1: f64,
    pub violations: usize,
}

/// Default trapezoidal nodes for residue circles.
pub const RESIDUE_NODES: usize = 256;

fn residue_at<B: SpectralBackend>(
    backend: &B,
    at: Complex64,
    (m, n): (i64, i64),
    (m_dual, n_dual): (i64, i64),
    nodes: usize,
) -> Result<ResidueEstimate, GreenError> {
    let radius = default_residue_radius(at, &backend.marked_points().finite());
    let omega = WaveDifferential::diagonal(backend, m, n, m_dual, n_dual);
    Ok(residue(&omega, at, radius, nodes)?)
}

/// `res_{Q⁺} Ψ(m, n) Ψ⁺(m̃, ñ) Ω` in diagonal coordinates.
pub fn residue_at_q_plus<B: SpectralBackend>(
    backend: &B,
    mn: (i64, i64),
    mn_dual: (i64, i64),
    nodes: usize,
) -> Result<ResidueEstimate, GreenError> {
    residue_at(backend, backend.marked_points().q_plus, mn, mn_dual, nodes)
}

/// `res_{Q⁺} a_{μ,ν} Ψ_{μ+1,ν} Ψ⁺_{μ,ν} Ω`, expected to equal `i`.
pub fn residue_lemma_q<B: SpectralBackend>(backend: &B, site: Site, nodes: usize) -> Result<ResidueEstimate, GreenError> {
    let (m, n) = (site.m(), site.n());
    let a = 1.0 / backend.f(m, n);
    let mut r = residue_at_q_plus(backend, (m + 1, n + 1), (m, n), nodes)?;
    r.value *= a;
    r.halving_discrepancy *= a.abs();
    Ok(r)
}

/// `|res_{P⁺} a_{μ,ν} Ψ_{μ+1,ν} Ψ⁺_{μ̃,ν̃} Ω + res_{P⁺} b_{μ,ν−1} Ψ_{μ,ν−1} Ψ⁺_{μ̃,ν̃} Ω|`,
/// expected to vanish when `μ − ν = μ̃ − ν̃`.
pub fn residue_lemma_p<B: SpectralBackend>(
    backend: &B,
    site: Site,
    target: Site,
    nodes: usize,
) -> Result<f64, GreenError> {
    if site.m() != target.m() {
        return Err(GreenError::Precondition(format!(
            "μ − ν = {} differs from μ̃ − ν̃ = {}",
            site.m(),
            target.m()
        )));
    }
    let (m, n) = (site.m(), site.n());
    let dual = (target.m(), target.n());
    let p = backend.marked_points().p_plus;
    let a = 1.0 / backend.f(m, n);
    let b = backend.f(m, n - 1);
    let right = site.shifted(1, 0);
    let down = site.shifted(0, -1);
    let r1 = residue_at(backend, p, (right.m(), right.n()), dual, nodes)?;
    let r2 = residue_at(backend, p, (down.m(), down.n()), dual, nodes)?;
    Ok((a * r1.value + b * r2.value).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::Circle;
    use crate::sphere::{c_contour, Sphere, SpherePoint};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn site_mn(m: i64, n: i64) -> Site {
        Site::from_diagonal(m, n).unwrap()
    }

    /// Clockwise circle around `Q⁺`.
    fn q_plus_circle() -> Contour {
        Contour::single(
            Arc::new(Circle {
                center: c(0.0, 1.0),
                radius: 0.5,
            }),
            512,
        )
        .unwrap()
        .flipped()
    }

    #[test]
    fn g0_examples_on_q_minus_side() {
        let contour = c_contour(SpherePoint::new(0.0, -2.0), 512).unwrap();
        let origin = Site::new(0, 0);
        let v = g0(&Sphere, &contour, site_mn(1, -1), origin).unwrap();
        assert!((v - 0.5).norm() < 1e-12);
        let v = g0(&Sphere, &contour, site_mn(2, -2), origin).unwrap();
        assert!((v - 2.0).norm() < 1e-12);
        let v = g0(&Sphere, &contour, site_mn(4, -2), origin).unwrap();
        assert!((v + 4.0).norm() < 1e-12);
        for (m, n) in [(1, 1), (-3, 1), (2, 0), (5, 3)] {
            assert!(g0(&Sphere, &contour, site_mn(m, n), origin).unwrap().norm() < 1e-12);
        }
        let k = kernel_k(&Sphere, &contour, site_mn(1, -1), origin).unwrap();
        assert!((k - 2.0 * PI).norm() < 1e-10);
    }

    #[test]
    fn g0_on_q_plus_circle_is_the_mirrored_table() {
        let contour = q_plus_circle();
        let origin = Site::new(0, 0);
        for m in -5i64..=5 {
            for n in -2i64..=2 {
                if (m + n) % 2 != 0 {
                    continue;
                }
                let mirrored = match -n {
                    -1 => -0.5 * sgn_i(m) * c(0.0, -1.0).powi((m + 1) as i32),
                    -2 => -sgn_i(m) * m as f64 * c(0.0, -1.0).powi(m as i32),
                    _ => c(0.0, 0.0),
                };
                let got = g0(&Sphere, &contour, site_mn(m, n), origin).unwrap();
                assert!((got - mirrored).norm() < 1e-10, "({m},{n}): {got} vs {mirrored}");
            }
        }
    }

    #[test]
    fn contour_independence() {
        let small = q_plus_circle();
        let level = c_contour(SpherePoint::new(2.0, 2.0), 512).unwrap();
        let target = Site::new(1, -1);
        for site in Window::square(3).sites() {
            let a = g0(&Sphere, &small, site, target).unwrap();
            let b = g0(&Sphere, &level, site, target).unwrap();
            assert!((a - b).norm() < 2e-9, "{site:?}");
        }
    }

    #[test]
    fn green_splits_into_g0_and_z() {
        let ev = GreenEvaluator::new(&Sphere, SpherePoint::new(2.0, 2.0), 512).unwrap();
        let target = Site::new(0, 1);
        for site in Window::square(3).sites() {
            let g = ev.green(site, target).unwrap();
            let split = ev.g0(site, target).unwrap() + ev.z_correction(site, target).unwrap();
            assert!((g - split).norm() < 1e-10 * g.norm().max(1.0));
        }
    }

    #[test]
    fn delta_property_small_windows() {
        for lambda in [SpherePoint::new(2.0, 2.0), SpherePoint::new(3.0, 0.0), SpherePoint::new(0.0, -2.0)] {
            let ev = GreenEvaluator::new(&Sphere, lambda, 512).unwrap();
            for kind in [GreenKind::G0, GreenKind::G] {
                let r = ev.verify_delta(kind, Window::square(3), Site::new(1, 0)).unwrap();
                assert!(r < 1e-8, "{lambda} {kind:?}: {r}");
            }
        }
        // single-site window
        let ev = GreenEvaluator::new(&Sphere, SpherePoint::new(2.0, 2.0), 256).unwrap();
        let w = Window::square_around(2, -1, 0);
        assert!(ev.verify_delta(GreenKind::G, w, Site::new(2, -1)).unwrap() < 1e-8);
    }

    #[test]
    fn z_correction_is_annihilated() {
        let ev = GreenEvaluator::new(&Sphere, SpherePoint::new(1.0, 0.5), 512).unwrap();
        let target = Site::new(0, 0);
        let w = Window::square(4);
        let field = LatticeField::try_from_fn(w, |mu, nu| ev.z_correction(Site::new(mu, nu), target)).unwrap();
        let op = FivePointOperator::new(|_, _| 1.0);
        assert!(op.max_residual(&field).unwrap() < 1e-10);
    }

    #[test]
    fn growth_trivial_ratio_at_target() {
        let ev = GreenEvaluator::new(&Sphere, SpherePoint::new(2.0, 2.0), 256).unwrap();
        let t = Site::new(1, 1);
        assert_eq!(ev.growth_normalizer(t, t), 1.0);
        let fit = ev.growth_check(GreenKind::G, Window::square_around(1, 1, 0), t, 1e9).unwrap();
        assert!((fit.r1 - ev.green(t, t).unwrap().norm()).abs() < 1e-15);
        assert_eq!(fit.violations, 0);
    }

    #[test]
    fn residue_lemmas() {
        for site in [Site::new(0, 0), Site::new(2, -1), Site::new(-3, 4)] {
            let r = residue_lemma_q(&Sphere, site, RESIDUE_NODES).unwrap();
            assert!((r.value - c(0.0, 1.0)).norm() < 1e-9, "{site:?} {}", r.value);
            assert!(!r.warning());
        }
        let (m, n) = (3, -1);
        let r = residue_at_q_plus(&Sphere, (m, n + 1), (m, n), RESIDUE_NODES).unwrap();
        assert!((r.value + 1.0).norm() < 1e-9);
        assert!(residue_lemma_p(&Sphere, Site::new(0, 0), Site::new(0, 0), RESIDUE_NODES).unwrap() < 1e-9);
        assert!(residue_lemma_p(&Sphere, Site::new(1, 1), Site::new(2, 2), RESIDUE_NODES).unwrap() < 1e-9);
        assert!(matches!(
            residue_lemma_p(&Sphere, Site::new(1, 0), Site::new(0, 0), RESIDUE_NODES),
            Err(GreenError::Precondition(_))
        ));
    }

    #[test]
    fn sigma_lambda_swaps_site_and_target() {
        let a = GreenEvaluator::new(&Sphere, SpherePoint::new(2.0, 2.0), 512).unwrap();
        let b = GreenEvaluator::new(&Sphere, SpherePoint::new(-2.0, -2.0), 512).unwrap();
        let (s, t) = (Site::new(2, -1), Site::new(0, 1));
        let lhs = b.green(s, t).unwrap();
        let rhs = a.green(t, s).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0), "{lhs} {rhs}");
    }

    #[test]
    fn marked_lambda_rejected() {
        assert!(matches!(
            GreenEvaluator::new(&Sphere, SpherePoint::new(0.0, 1.0), 64),
            Err(GreenError::Contour(_))
        ));
        assert!(GreenEvaluator::new(&Sphere, SpherePoint::Infinity, 64).is_err());
    }
}
