//! Plot-ready samples of `Im p_m`, `Im p_n` on the sphere: a rectangular
//! grid plus polylines along level sets `C_λ`.
//!
//! CSV columns: `kind,curve,index,re,im,im_p_m,im_p_n,singular`. Grid rows
//! have `kind = grid` and `curve = 0`; polyline rows have `kind = contour`
//! and `curve` numbering the requested `λ` from zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sphere::{im_p_m, im_p_n, level_radius, SphereError, SpherePoint, P_MINUS, P_PLUS, Q_MINUS, Q_PLUS};

/// Closed rectangle `[re_min, re_max] × [im_min, im_max]` sampled at
/// `re_steps × im_steps` points, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub re_steps: usize,
    pub im_steps: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            re_min: -3.0,
            re_max: 3.0,
            im_min: -3.0,
            im_max: 3.0,
            re_steps: 61,
            im_steps: 61,
        }
    }
}

impl Grid {
    fn axis(min: f64, max: f64, steps: usize, j: usize) -> f64 {
        if steps < 2 {
            return min;
        }
        min + (max - min) * j as f64 / (steps - 1) as f64
    }

    fn spacing(min: f64, max: f64, steps: usize) -> f64 {
        if steps < 2 {
            0.0
        } else {
            (max - min) / (steps - 1) as f64
        }
    }

    /// Grid points row by row, real part fastest.
    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.im_steps).flat_map(move |k| {
            let y = Self::axis(self.im_min, self.im_max, self.im_steps, k);
            (0..self.re_steps).map(move |j| Complex64::new(Self::axis(self.re_min, self.re_max, self.re_steps, j), y))
        })
    }

    /// A cell is singular when a pole of `dp_m` or `dp_n` lies in it.
    fn is_singular(&self, z: Complex64) -> bool {
        let hx = 0.5 * Self::spacing(self.re_min, self.re_max, self.re_steps);
        let hy = 0.5 * Self::spacing(self.im_min, self.im_max, self.im_steps);
        [P_PLUS, P_MINUS, Q_PLUS, Q_MINUS].iter().any(|p| {
            let d = z - p;
            d.re.abs() <= hx && d.im.abs() <= hy
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub kind: MapKind,
    pub curve: usize,
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub im_p_m: f64,
    pub im_p_n: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Grid,
    Contour,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasimomentumMap {
    pub rows: Vec<MapRow>,
}

impl QuasimomentumMap {
    /// Grid samples followed by `samples` points on each `C_λ`, taken at
    /// the midpoints `t = (j + ½)/samples` of the circle `|w| = |w(λ)|` so
    /// that no point lands on `z = ∞`.
    pub fn compute(grid: &Grid, lambdas: &[SpherePoint], samples: usize) -> Result<Self, SphereError> {
        let mut rows: Vec<MapRow> = grid
            .points()
            .enumerate()
            .map(|(index, z)| {
                let p = SpherePoint::Finite(z);
                let singular = grid.is_singular(z);
                MapRow {
                    kind: MapKind::Grid,
                    curve: 0,
                    index,
                    re: z.re,
                    im: z.im,
                    im_p_m: if is_pole(z) { f64::NAN } else { im_p_m(p) },
                    im_p_n: if is_pole(z) { f64::NAN } else { im_p_n(p) },
                    singular,
                }
            })
            .collect();
        for (curve, &lambda) in lambdas.iter().enumerate() {
            let radius = level_radius(lambda)?;
            for index in 0..samples {
                let t = (index as f64 + 0.5) / samples as f64;
                let w = SpherePoint::Finite(Complex64::from_polar(radius, 2.0 * PI * t));
                let SpherePoint::Finite(z) = SpherePoint::from_w(w) else {
                    continue;
                };
                let p = SpherePoint::Finite(z);
                rows.push(MapRow {
                    kind: MapKind::Contour,
                    curve,
                    index,
                    re: z.re,
                    im: z.im,
                    im_p_m: im_p_m(p),
                    im_p_n: im_p_n(p),
                    singular: is_pole(z),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }

    /// Non-finite values become `null`.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }
}

fn is_pole(z: Complex64) -> bool {
    [P_PLUS, P_MINUS, Q_PLUS, Q_MINUS].contains(&z)
}
