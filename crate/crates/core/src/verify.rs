//! The invariant suite behind `latgreen verify`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::backend::SpectralBackend;
use crate::contour::integrate;
use crate::green::{residue_lemma_p, residue_lemma_q, GreenError, GreenEvaluator, GreenKind, RESIDUE_NODES};
use crate::lattice::{check_five_point_diagonal, check_four_point, FivePointOperator, LatticeField, Site, Window};
use crate::sphere::{psi, Sphere, SpherePoint};
use crate::theta::{monodromy_check, psi_theta, theta, theta_quasi_period_factor, JacobianSpectralData, ThetaError};

/// Growth check: allowed relative spread of the fitted `R₁` when the
/// window doubles.
pub const GROWTH_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed: residual < tolerance,
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{status} {:<28} residual {:.3e} (tol {:.1e})", self.name, self.residual, self.tolerance)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }

    fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSuite {
    pub lambda: SpherePoint,
    pub target: Site,
    /// Half-size of the `(μ, ν)` window.
    pub half: u32,
    pub nodes: usize,
    pub tol: f64,
    /// Run every contour check on the reversed contour.
    pub flip_orientation: bool,
}

impl Default for SphereSuite {
    fn default() -> Self {
        Self {
            lambda: SpherePoint::new(2.0, 2.0),
            target: Site::new(0, 0),
            half: 4,
            nodes: crate::contour::DEFAULT_NODES,
            tol: 1e-8,
            flip_orientation: false,
        }
    }
}

/// Evaluation point for the four- and five-point checks.
const WAVE_SAMPLE_POINT: Complex64 = Complex64::new(2.0, 0.0);

impl SphereSuite {
    pub fn run(&self) -> Result<VerifyReport, GreenError> {
        let mut report = VerifyReport::default();
        let half = i64::from(self.half);
        let tol = self.tol;

        let mn = Window::new(-half, half, -half, half)?;
        let psi_mn = LatticeField::from_fn(mn, |m, n| Sphere.psi(WAVE_SAMPLE_POINT, m, n));
        report.push(CheckResult::new("four-point equation", check_four_point(&psi_mn, |_, _| 1.0)?, tol));
        report.push(CheckResult::new(
            "five-point (m,n) form",
            check_five_point_diagonal(&psi_mn, |_, _| 1.0)?,
            tol,
        ));
        let sub = Window::square(self.half);
        let psi_sub = LatticeField::from_fn(sub, |mu, nu| {
            let s = Site::new(mu, nu);
            Sphere.psi(WAVE_SAMPLE_POINT, s.m(), s.n())
        });
        let op = FivePointOperator::new(|_, _| 1.0);
        report.push(CheckResult::new("five-point operator LΨ", op.max_residual(&psi_sub)?, tol));

        let mut contour = Sphere.green_contour(self.lambda, self.nodes).map_err(|e| GreenError::Contour(Box::new(e)))?;
        if self.flip_orientation {
            contour = contour.flipped();
        }
        let orientation = integrate(&|z| Sphere.dp_n(z), &contour.closed)?;
        report.push(CheckResult::new(
            "orientation ∮dp_n = 2π",
            (orientation - Complex64::new(2.0 * PI, 0.0)).norm(),
            tol,
        ));
        let ev = GreenEvaluator::from_contour(&Sphere, contour, self.nodes);

        let mut k_diag = 0.0_f64;
        for site in sub.sites() {
            for shift in -2..=2 {
                let other = site.shifted(shift, shift);
                k_diag = k_diag.max(ev.kernel(site, other)?.norm());
            }
        }
        report.push(CheckResult::new("kernel K on diagonal", k_diag, tol));

        let mut res_q = 0.0_f64;
        let mut res_p = 0.0_f64;
        for site in Window::square(self.half.min(3)).sites() {
            let r = residue_lemma_q(&Sphere, site, RESIDUE_NODES)?;
            res_q = res_q.max((r.value - Complex64::i()).norm());
            res_p = res_p.max(residue_lemma_p(&Sphere, site, site.shifted(1, 1), RESIDUE_NODES)?);
        }
        report.push(CheckResult::new("residue at Q+ equals i", res_q, tol));
        report.push(CheckResult::new("residues at P+ cancel", res_p, tol));

        report.push(CheckResult::new(
            "delta property G0",
            ev.verify_delta(GreenKind::G0, sub, self.target)?,
            tol,
        ));
        report.push(CheckResult::new(
            "delta property G",
            ev.verify_delta(GreenKind::G, sub, self.target)?,
            tol,
        ));

        let big = Window::square_around(self.target.mu, self.target.nu, 2 * self.half);
        let small = Window::square_around(self.target.mu, self.target.nu, self.half);
        let r_small = ev.growth_check(GreenKind::G, small, self.target, f64::INFINITY)?.r1;
        let r_big = ev.growth_check(GreenKind::G, big, self.target, f64::INFINITY)?.r1;
        report.push(CheckResult::new(
            "growth R1 stabilizes",
            r_big / r_small - 1.0,
            GROWTH_SLACK,
        ));

        let mut growth_identity = 0.0_f64;
        for (m, n) in mn.iter() {
            let z = SpherePoint::new(0.7, -0.4);
            let modulus = psi(z, m, n).map_err(|e| GreenError::Contour(Box::new(e)))?.norm().ln();
            let exponent = Sphere.growth_sign() * (m as f64 * crate::sphere::im_p_m(z) + n as f64 * crate::sphere::im_p_n(z));
            growth_identity = growth_identity.max((modulus - exponent).abs());
        }
        report.push(CheckResult::new("|Ψ| growth exponent", growth_identity, tol));
        Ok(report)
    }
}

/// Checks on user-supplied Jacobian data: theta quasi-periodicity, the
/// normalization of the theta-quotient and its monodromy.
pub fn theta_suite(data: &JacobianSpectralData, tol: f64, check_tol: f64) -> Result<VerifyReport, ThetaError> {
    let mut report = VerifyReport::default();
    let g = data.genus();
    let mut points: Vec<Vec<Complex64>> = data.samples.iter().map(|s| s.abel.clone()).collect();
    if points.is_empty() {
        points.push(
            (0..g)
                .map(|k| Complex64::new(0.1 + 0.07 * k as f64, -0.05 * k as f64))
                .collect(),
        );
    }
    let b = data.b.matrix();

    let mut quasi = 0.0_f64;
    for z in &points {
        let base = theta(z, &data.b, tol)?;
        let scale = base.norm().max(1.0);
        for k in 0..g {
            let mut shifted = z.clone();
            shifted[k] += 1.0;
            quasi = quasi.max((theta(&shifted, &data.b, tol)? - base).norm() / scale);
            let shifted: Vec<_> = (0..g).map(|j| z[j] + b[(j, k)]).collect();
            let lhs = theta(&shifted, &data.b, tol)?;
            let rhs = theta_quasi_period_factor(z, &data.b, k + 1)? * base;
            quasi = quasi.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
    }
    report.push(CheckResult::new("theta quasi-periodicity", quasi, check_tol));

    let origin = vec![Complex64::new(0.0, 0.0); g];
    let mut norm = 0.0_f64;
    for (m, n) in [(1, 0), (0, 1), (2, -1), (-3, 2)] {
        norm = norm.max((psi_theta(data, &origin, Complex64::new(1.0, 0.0), m, n, tol)? - 1.0).norm());
    }
    report.push(CheckResult::new("Ψ(R+) = 1", norm, check_tol));

    let mut mono = 0.0_f64;
    let mut increment = 0.0_f64;
    for (i, z) in points.iter().enumerate() {
        for k in 0..g {
            for sign in [1i64, -1] {
                let mut m_vec = vec![0i64; g];
                m_vec[k] = sign;
                if g > 1 {
                    m_vec[(k + 1) % g] -= sign;
                }
                for (m, n) in [(1, 1), (2, -1)] {
                    let exp_val = data
                        .samples
                        .get(i)
                        .map_or(Complex64::new(1.0, 0.0), |s| s.exp.value(m, n));
                    mono = mono.max(monodromy_check(data, z, exp_val, m, n, &m_vec, tol)? / exp_val.norm().max(1.0));
                    if let Some(s) = data.samples.get(i) {
                        let moved: Vec<_> = z.iter().zip(data.b.times_integer(&m_vec)).map(|(a, b)| a + b).collect();
                        let lhs = psi_theta(data, &moved, s.exp.around_b_cycles(data, &m_vec).value(m, n), m, n, tol)?;
                        let rhs = psi_theta(data, z, s.exp.value(m, n), m, n, tol)?;
                        increment = increment.max((lhs - rhs).norm() / rhs.norm().max(1.0));
                    }
                }
            }
        }
    }
    report.push(CheckResult::new("monodromy cancellation", mono, check_tol));
    if !data.samples.is_empty() {
        report.push(CheckResult::new("b-period relation on samples", increment, check_tol));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = SphereSuite::default().run().unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c}");
        }
        assert!(report.checks.len() >= 10);
    }

    #[test]
    fn flipped_orientation_fails() {
        let suite = SphereSuite {
            half: 2,
            flip_orientation: true,
            ..SphereSuite::default()
        };
        let report = suite.run().unwrap();
        assert!(!report.passed());
        let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"orientation ∮dp_n = 2π"));
    }

    #[test]
    fn display_line() {
        let c = CheckResult::new("x", 1e-3, 1e-8);
        assert!(c.to_string().starts_with("FAIL x"));
    }
}
