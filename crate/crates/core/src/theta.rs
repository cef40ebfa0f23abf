//! Riemann theta function and the theta-quotient wave function on
//! Jacobian-level data.
//!
//! `θ(z|B) = Σ_{N ∈ ℤ^g} exp(πi⟨BN, N⟩ + 2πi⟨N, z⟩)`, summed over the
//! lattice points of an ellipsoid around the dominant term. With
//! `Y = Im B = TᵀT` and `y = Im z` every term has modulus
//! `exp(π yᵀY⁻¹y) · exp(−π‖T(N + Y⁻¹y)‖²)`, so the ellipsoid is centred at
//! `−Y⁻¹y` and the error is controlled relative to `exp(π yᵀY⁻¹y)`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-12;
/// `‖B − Bᵀ‖_max` allowed relative to `max(1, ‖B‖_max)`.
const SYMMETRY_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error("Riemann matrix is not symmetric (max |B − Bᵀ| = {0:e})")]
    NotSymmetric(f64),
    #[error("imaginary part of the Riemann matrix is not positive definite; the series diverges")]
    NotPositiveDefinite,
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("period index {k} out of range 1..={g}")]
    IndexOutOfRange { k: usize, g: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("theta vanishes in the denominator ({0}); the point hits the divisor")]
    DivisorSingularity(&'static str),
    #[error("invalid spectral data: {0}")]
    InvalidData(String),
}

/// Symmetric `g × g` complex matrix with positive-definite imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannMatrix {
    b: DMatrix<Complex64>,
    /// Upper-triangular `T` with `Im B = TᵀT`.
    t: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    lambda_min: f64,
}

impl RiemannMatrix {
    pub fn new(b: DMatrix<Complex64>) -> Result<Self, ThetaError> {
        if b.nrows() != b.ncols() || b.nrows() == 0 {
            return Err(ThetaError::InvalidData(format!(
                "Riemann matrix must be square and non-empty, got {}×{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(ThetaError::InvalidData("Riemann matrix has non-finite entries".into()));
        }
        let scale = b.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let asym = (&b - b.transpose()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if asym > SYMMETRY_TOL * scale {
            return Err(ThetaError::NotSymmetric(asym));
        }
        let y = b.map(|v| v.im);
        let y = (&y + y.transpose()) * 0.5;
        let chol = y.clone().cholesky().ok_or(ThetaError::NotPositiveDefinite)?;
        let t = chol.l().transpose();
        let y_inv = chol.inverse();
        let lambda_min = y.symmetric_eigenvalues().min();
        if !(lambda_min > 0.0) {
            return Err(ThetaError::NotPositiveDefinite);
        }
        Ok(Self {
            b,
            t,
            y_inv,
            lambda_min,
        })
    }

    /// Row-major constructor.
    pub fn from_row_slice(g: usize, entries: &[Complex64]) -> Result<Self, ThetaError> {
        if entries.len() != g * g {
            return Err(ThetaError::DimensionMismatch {
                expected: g * g,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(g, g, entries))
    }

    pub fn genus(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    /// `B·M` for an integer vector `M`.
    pub fn times_integer(&self, m: &[i64]) -> Vec<Complex64> {
        let v = DVector::from_iterator(m.len(), m.iter().map(|&k| Complex64::new(k as f64, 0.0)));
        (&self.b * v).iter().copied().collect()
    }

    fn check_len(&self, z: &[Complex64]) -> Result<(), ThetaError> {
        if z.len() != self.genus() {
            return Err(ThetaError::DimensionMismatch {
                expected: self.genus(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Ellipsoid radius `R` such that the discarded tail is below `tol`
    /// times the dominant-term scale:
    /// `exp(−πR²/2)·(1 + √(2/λ_min))^g ≤ tol`.
    fn radius(&self, tol: f64) -> f64 {
        let g = self.genus() as f64;
        let growth = g * (1.0 + (2.0 / self.lambda_min).sqrt()).ln();
        ((2.0 / PI) * (growth - tol.ln()).max(0.0)).sqrt()
    }
}

/// The theta series split as `mantissa · exp(log_scale)`, so ratios can be
/// formed without overflow when `Im z` is large.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ThetaValue {
    pub fn value(self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    fn ratio(self, other: Self) -> Complex64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

/// `θ(z|B)` with relative truncation error below `tol`.
pub fn theta(z: &[Complex64], b: &RiemannMatrix, tol: f64) -> Result<Complex64, ThetaError> {
    theta_scaled(z, b, tol).map(ThetaValue::value)
}

/// `θ(z|B)` as mantissa and log-scale; the scale is `π yᵀY⁻¹y`.
pub fn theta_scaled(z: &[Complex64], b: &RiemannMatrix, tol: f64) -> Result<ThetaValue, ThetaError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ThetaError::InvalidTolerance(tol));
    }
    b.check_len(z)?;
    let g = b.genus();
    let y = DVector::from_iterator(g, z.iter().map(|v| v.im));
    let shift = &b.y_inv * &y;
    let log_scale = PI * y.dot(&shift);
    let centre: Vec<f64> = shift.iter().map(|s| -s).collect();
    let radius = b.radius(tol);

    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = vec![0i64; g];
    enumerate(&b.t, &centre, radius * radius, g, 0.0, &mut n, &mut |n| {
        let mut quad = Complex64::new(0.0, 0.0);
        let mut lin = Complex64::new(0.0, 0.0);
        for j in 0..g {
            let nj = n[j] as f64;
            lin += nj * z[j];
            for k in 0..g {
                quad += b.b[(j, k)] * (nj * n[k] as f64);
            }
        }
        sum += (PI * I * quad + 2.0 * PI * I * lin - log_scale).exp();
    });
    Ok(ThetaValue {
        mantissa: sum,
        log_scale,
    })
}

/// Fincke–Pohst enumeration of integer `N` with `‖T(N − c)‖² ≤ r2`, last
/// coordinate outermost; `level` counts fixed trailing coordinates.
fn enumerate(
    t: &DMatrix<f64>,
    centre: &[f64],
    r2: f64,
    level: usize,
    used: f64,
    n: &mut [i64],
    visit: &mut impl FnMut(&[i64]),
) {
    if level == 0 {
        visit(n);
        return;
    }
    let i = level - 1;
    let g = n.len();
    let offset: f64 = (i + 1..g).map(|j| t[(i, j)] * (n[j] as f64 - centre[j])).sum();
    let room = r2 - used;
    if room < 0.0 {
        return;
    }
    let half = room.sqrt() / t[(i, i)];
    let mid = centre[i] - offset / t[(i, i)];
    let lo = (mid - half).ceil() as i64;
    let hi = (mid + half).floor() as i64;
    for k in lo..=hi {
        n[i] = k;
        let d = t[(i, i)] * (k as f64 - centre[i]) + offset;
        enumerate(t, centre, r2, i, used + d * d, n, visit);
    }
    n[i] = 0;
}

/// `exp(−πi B_kk − 2πi z_k)` for 1-based `k`, so that
/// `θ(z + B e_k) = factor · θ(z)`.
pub fn theta_quasi_period_factor(z: &[Complex64], b: &RiemannMatrix, k: usize) -> Result<Complex64, ThetaError> {
    b.check_len(z)?;
    let g = b.genus();
    if k == 0 || k > g {
        return Err(ThetaError::IndexOutOfRange { k, g });
    }
    let j = k - 1;
    Ok((-PI * I * b.b[(j, j)] - 2.0 * PI * I * z[j]).exp())
}

/// `exp(m∫Ω(P⁺,P⁻) + n∫Ω(Q⁺,Q⁻))` along a path from `R₊`, given by the two
/// path integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpIncrement {
    pub int_omega_p: Complex64,
    pub int_omega_q: Complex64,
}

impl ExpIncrement {
    pub fn value(&self, m: i64, n: i64) -> Complex64 {
        (m as f64 * self.int_omega_p + n as f64 * self.int_omega_q).exp()
    }

    /// The same integrals after the path winds `M_k` times around `b_k`,
    /// using `∮_{b_k} Ω(P⁺,P⁻) = 2πi(Δ_P)_k` and likewise for `Q`.
    pub fn around_b_cycles(&self, data: &JacobianSpectralData, m_vec: &[i64]) -> Self {
        let dot = |v: &[Complex64]| -> Complex64 { v.iter().zip(m_vec).map(|(a, &k)| a * k as f64).sum() };
        Self {
            int_omega_p: self.int_omega_p + 2.0 * PI * I * dot(&data.delta_p),
            int_omega_q: self.int_omega_q + 2.0 * PI * I * dot(&data.delta_q),
        }
    }
}

/// An evaluation point: its Abel image and the path integrals that go
/// with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub abel: Vec<Complex64>,
    pub exp: ExpIncrement,
}

/// Jacobian-level description of a spectral curve. The Abel map is based
/// at `R₊`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianSpectralData {
    pub b: RiemannMatrix,
    pub k: Vec<Complex64>,
    pub delta_p: Vec<Complex64>,
    pub delta_q: Vec<Complex64>,
    pub a_gamma: Vec<Vec<Complex64>>,
    pub samples: Vec<SpectralSample>,
}

impl JacobianSpectralData {
    pub fn new(
        b: RiemannMatrix,
        k: Vec<Complex64>,
        delta_p: Vec<Complex64>,
        delta_q: Vec<Complex64>,
        a_gamma: Vec<Vec<Complex64>>,
    ) -> Result<Self, ThetaError> {
        let g = b.genus();
        for v in [&k, &delta_p, &delta_q] {
            b.check_len(v)?;
        }
        if a_gamma.len() != g {
            return Err(ThetaError::InvalidData(format!(
                "A_gamma must list {g} Abel images, got {}",
                a_gamma.len()
            )));
        }
        for a in &a_gamma {
            b.check_len(a)?;
        }
        Ok(Self {
            b,
            k,
            delta_p,
            delta_q,
            a_gamma,
            samples: Vec::new(),
        })
    }

    pub fn genus(&self) -> usize {
        self.b.genus()
    }

    /// `K − ΣA(γ_k)`.
    fn base_shift(&self) -> Vec<Complex64> {
        (0..self.genus())
            .map(|j| self.k[j] - self.a_gamma.iter().map(|a| a[j]).sum::<Complex64>())
            .collect()
    }

    fn lattice_shift(&self, m: i64, n: i64) -> Vec<Complex64> {
        self.delta_p
            .iter()
            .zip(&self.delta_q)
            .map(|(p, q)| m as f64 * p + n as f64 * q)
            .collect()
    }

    pub fn from_json_str(s: &str) -> Result<Self, ThetaError> {
        let raw: RawSpectralData = serde_json::from_str(s).map_err(|e| ThetaError::InvalidData(e.to_string()))?;
        raw.try_into()
    }

    pub fn from_json_file(path: &Path) -> Result<Self, ThetaError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ThetaError::InvalidData(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawSpectralData::from(self);
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }
}

type Pair = [f64; 2];

fn to_c(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn to_pair(c: &Complex64) -> Pair {
    [c.re, c.im]
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSample {
    a_point: Vec<Pair>,
    int_omega_p: Pair,
    int_omega_q: Pair,
}

/// On-disk layout; complex numbers are `[re, im]` pairs.
#[derive(Debug, Serialize, Deserialize)]
struct RawSpectralData {
    g: usize,
    #[serde(rename = "B")]
    b: Vec<Pair>,
    #[serde(rename = "K")]
    k: Vec<Pair>,
    #[serde(rename = "delta_P")]
    delta_p: Vec<Pair>,
    #[serde(rename = "delta_Q")]
    delta_q: Vec<Pair>,
    #[serde(rename = "A_gamma")]
    a_gamma: Vec<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    samples: Vec<RawSample>,
}

impl TryFrom<RawSpectralData> for JacobianSpectralData {
    type Error = ThetaError;

    fn try_from(raw: RawSpectralData) -> Result<Self, ThetaError> {
        let vec = |v: &[Pair]| v.iter().map(to_c).collect::<Vec<_>>();
        let b = RiemannMatrix::from_row_slice(raw.g, &vec(&raw.b))?;
        let mut data = Self::new(
            b,
            vec(&raw.k),
            vec(&raw.delta_p),
            vec(&raw.delta_q),
            raw.a_gamma.iter().map(|a| vec(a)).collect(),
        )?;
        for s in &raw.samples {
            let abel = vec(&s.a_point);
            data.b.check_len(&abel)?;
            data.samples.push(SpectralSample {
                abel,
                exp: ExpIncrement {
                    int_omega_p: to_c(&s.int_omega_p),
                    int_omega_q: to_c(&s.int_omega_q),
                },
            });
        }
        Ok(data)
    }
}

impl From<&JacobianSpectralData> for RawSpectralData {
    fn from(d: &JacobianSpectralData) -> Self {
        let vec = |v: &[Complex64]| v.iter().map(to_pair).collect::<Vec<_>>();
        let g = d.genus();
        let m = d.b.matrix();
        Self {
            g,
            b: (0..g).flat_map(|r| (0..g).map(move |c| to_pair(&m[(r, c)]))).collect(),
            k: vec(&d.k),
            delta_p: vec(&d.delta_p),
            delta_q: vec(&d.delta_q),
            a_gamma: d.a_gamma.iter().map(|a| vec(a)).collect(),
            samples: d
                .samples
                .iter()
                .map(|s| RawSample {
                    a_point: vec(&s.abel),
                    int_omega_p: to_pair(&s.exp.int_omega_p),
                    int_omega_q: to_pair(&s.exp.int_omega_q),
                })
                .collect(),
        }
    }
}

fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Relative modulus below which a theta denominator counts as zero.
const DIVISOR_TOL: f64 = 1e-13;

/// Theta-quotient wave function
/// `exp_val · θ(A + mΔ_P + nΔ_Q + s)/θ(A + s) · θ(s)/θ(mΔ_P + nΔ_Q + s)`
/// with `s = K − ΣA(γ_k)`.
pub fn psi_theta(
    data: &JacobianSpectralData,
    abel: &[Complex64],
    exp_val: Complex64,
    m: i64,
    n: i64,
    tol: f64,
) -> Result<Complex64, ThetaError> {
    data.b.check_len(abel)?;
    if m == 0 && n == 0 {
        return Ok(exp_val);
    }
    let s = data.base_shift();
    let d = data.lattice_shift(m, n);
    let a_s = add(abel, &s);
    let num1 = theta_scaled(&add(&a_s, &d), &data.b, tol)?;
    let den1 = theta_scaled(&a_s, &data.b, tol)?;
    let num2 = theta_scaled(&s, &data.b, tol)?;
    let den2 = theta_scaled(&add(&d, &s), &data.b, tol)?;
    for (v, what) in [(den1, "θ(A(γ) − ΣA(γ_k) + K)"), (den2, "θ(mΔ_P + nΔ_Q − ΣA(γ_k) + K)")] {
        if v.mantissa.norm() < DIVISOR_TOL {
            return Err(ThetaError::DivisorSingularity(what));
        }
    }
    Ok(exp_val * num1.ratio(den1) * num2.ratio(den2))
}

/// `|Ψ(A + BM, exp_val·t⁻¹) − Ψ(A, exp_val)|` with
/// `t = exp(−2πi⟨M, mΔ_P + nΔ_Q⟩)`.
pub fn monodromy_check(
    data: &JacobianSpectralData,
    abel: &[Complex64],
    exp_val: Complex64,
    m: i64,
    n: i64,
    m_vec: &[i64],
    tol: f64,
) -> Result<f64, ThetaError> {
    if m_vec.len() != data.genus() {
        return Err(ThetaError::DimensionMismatch {
            expected: data.genus(),
            got: m_vec.len(),
        });
    }
    let d = data.lattice_shift(m, n);
    let phase: Complex64 = m_vec.iter().zip(&d).map(|(&k, v)| k as f64 * v).sum();
    let t = (-2.0 * PI * I * phase).exp();
    let moved = add(abel, &data.b.times_integer(m_vec));
    let a = psi_theta(data, &moved, exp_val / t, m, n, tol)?;
    let b = psi_theta(data, abel, exp_val, m, n, tol)?;
    Ok((a - b).norm())
}
