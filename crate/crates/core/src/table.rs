//! Tables of Green's function values and their CSV/JSON forms.
//!
//! CSV columns: `mu,nu,mu_t,nu_t,re,im`. JSON carries the same rows under
//! `values` together with the metadata of the run. Floats are written in
//! shortest round-trip form, so equal inputs give byte-identical files.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::SpectralBackend;
use crate::green::{GreenError, GreenEvaluator, GreenKind};
use crate::lattice::{Site, Window};

/// A spectral parameter as written to metadata: `{"re": .., "im": ..}` or
/// the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaLabel {
    Finite { re: f64, im: f64 },
    Infinity(InfTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

impl LambdaLabel {
    pub fn finite(z: Complex64) -> Self {
        Self::Finite { re: z.re, im: z.im }
    }

    pub const INFINITY: Self = Self::Infinity(InfTag::Inf);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub mu: i64,
    pub nu: i64,
    pub mu_t: i64,
    pub nu_t: i64,
    pub re: f64,
    pub im: f64,
}

impl TableRow {
    pub fn site(&self) -> Site {
        Site::new(self.mu, self.nu)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenTable {
    pub kind: String,
    pub lambda: LambdaLabel,
    pub target: Site,
    pub window: Window,
    pub nodes: usize,
    /// `max |value(nodes) − value(2·nodes)|` over the window.
    pub error_estimate: f64,
    /// The contour was replaced by its one-sided limit.
    pub one_sided_limit: bool,
    pub values: Vec<TableRow>,
}

impl GreenTable {
    /// Evaluates `kind` on every site of `window`; the error estimate comes
    /// from a second pass with doubled nodes.
    pub fn compute<B: SpectralBackend>(
        backend: &B,
        lambda: B::Point,
        label: LambdaLabel,
        kind: GreenKind,
        window: Window,
        target: Site,
        nodes: usize,
    ) -> Result<Self, GreenError> {
        let coarse = GreenEvaluator::new(backend, lambda, nodes)?;
        let fine = GreenEvaluator::new(backend, lambda, 2 * nodes)?;
        let sites: Vec<Site> = window.sites().collect();
        let pairs = sites
            .par_iter()
            .map(|&s| Ok((coarse.eval(kind, s, target)?, fine.eval(kind, s, target)?)))
            .collect::<Result<Vec<_>, GreenError>>()?;
        let error_estimate = pairs.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let values = sites
            .iter()
            .zip(&pairs)
            .map(|(s, (v, _))| TableRow {
                mu: s.mu,
                nu: s.nu,
                mu_t: target.mu,
                nu_t: target.nu,
                re: v.re,
                im: v.im,
            })
            .collect();
        Ok(Self {
            kind: kind.label().to_string(),
            lambda: label,
            target,
            window,
            nodes,
            error_estimate,
            one_sided_limit: coarse.contour().one_sided_limit,
            values,
        })
    }

    pub fn get(&self, site: Site) -> Option<Complex64> {
        self.values.iter().find(|r| r.site() == site).map(TableRow::value)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.values {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }

    pub fn read_csv_rows(text: &str) -> csv::Result<Vec<TableRow>> {
        csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
    }
}
