//! The sample-splitting contract: estimate on the first f_n observations
//! (the analysis split), compute residuals over the last l_n time points
//! (the assessment split), and report the regime coefficients
//! k_ra = l_n / f_n and k_ov = max(0, f_n + l_n - n) / f_n.
//!
//! Residuals at assessment times use the full observed past x[1..=j]; only
//! the parameter estimate is restricted to the analysis split.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    fit_ar_ls, fit_arma_pmle, fit_garch_qmle, FitResult, GarchSpace, ModelEstimate,
};
use crate::models::{arma_residuals_truncated, garch_residuals, ArmaParams};

/// An (f_n, l_n) splitting pair for a series of length n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SplitSpecRaw", into = "SplitSpecRaw")]
pub struct SplitSpec {
    f: usize,
    l: usize,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct SplitSpecRaw {
    f: usize,
    l: usize,
    n: usize,
}

impl From<SplitSpec> for SplitSpecRaw {
    fn from(s: SplitSpec) -> Self {
        SplitSpecRaw { f: s.f, l: s.l, n: s.n }
    }
}

impl TryFrom<SplitSpecRaw> for SplitSpec {
    type Error = Error;
    fn try_from(raw: SplitSpecRaw) -> Result<Self> {
        SplitSpec::new(raw.f, raw.l, raw.n)
    }
}

impl SplitSpec {
    pub fn new(f: usize, l: usize, n: usize) -> Result<Self> {
        if f == 0 || f > n {
            return Err(Error::InvalidParameter(format!(
                "analysis split must satisfy 1 <= f_n <= n, got f={f}, n={n}"
            )));
        }
        if l == 0 || l > n {
            return Err(Error::InvalidParameter(format!(
                "assessment split must satisfy 1 <= l_n <= n, got l={l}, n={n}"
            )));
        }
        Ok(SplitSpec { f, l, n })
    }

    /// The paper's recommended regime: f_n = floor(n/2), l_n = n.
    pub fn half(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(
                "half split needs at least two observations".into(),
            ));
        }
        SplitSpec::new(n / 2, n, n)
    }

    /// Full-sample regime f_n = l_n = n.
    pub fn full(n: usize) -> Result<Self> {
        SplitSpec::new(n, n, n)
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Finite-n plug-in values of (k_ra, k_ov).
    pub fn coefficients(&self) -> (f64, f64) {
        let f = self.f as f64;
        let k_ra = self.l as f64 / f;
        let overlap = (self.f + self.l).saturating_sub(self.n);
        (k_ra, overlap as f64 / f)
    }

    /// Short text form "f=...,l=..." used in reports.
    pub fn label(&self) -> String {
        format!("f={},l={}", self.f, self.l)
    }
}

/// Which model family and order to fit on the analysis split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// AR(p) by ordinary least squares.
    Ar { p: usize },
    /// ARMA(p, q) by Gaussian pseudo maximum likelihood.
    Arma { p: usize, q: usize },
    /// GARCH(p, q) by quasi maximum likelihood.
    Garch { p: usize, q: usize },
}

impl ModelKind {
    /// Parse compact CLI forms: "ar:1", "arma:2,1", "garch:1,1".
    pub fn parse(text: &str) -> Result<Self> {
        let (name, orders) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("bad model spec '{text}'")))?;
        let parts: Vec<usize> = orders
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad model order in '{text}'")))
            })
            .collect::<Result<_>>()?;
        match (name, parts.as_slice()) {
            ("ar", [p]) => Ok(ModelKind::Ar { p: *p }),
            ("arma", [p, q]) => Ok(ModelKind::Arma { p: *p, q: *q }),
            ("garch", [p, q]) => Ok(ModelKind::Garch { p: *p, q: *q }),
            _ => Err(Error::InvalidArgument(format!(
                "bad model spec '{text}' (expected ar:p, arma:p,q or garch:p,q)"
            ))),
        }
    }
}

/// Estimator options threaded through [`split_residuals`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Optional ARMA starting point for the likelihood search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arma_init: Option<ArmaParams>,
    /// GARCH parameter-space bounds; defaults are u_lo=1e-6, u_hi=10,
    /// rho0=0.999.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub garch_space: Option<GarchSpace>,
}

/// Residuals on the assessment split, with the fit that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResiduals {
    /// Z-hat_{n-l+1}, ..., Z-hat_n; exactly l_n values.
    pub z_hat: Vec<f64>,
    pub fit: FitResult,
    pub split: SplitSpec,
}

/// Fit on x[1..=f_n], then reconstruct residuals over the assessment window
/// using the full history and the analysis-split estimate.
pub fn split_residuals(
    x: &[f64],
    model: ModelKind,
    split: SplitSpec,
    options: &FitOptions,
) -> Result<SplitResiduals> {
    if split.n() != x.len() {
        return Err(Error::InvalidArgument(format!(
            "split is for n={} but the series has length {}",
            split.n(),
            x.len()
        )));
    }
    let analysis = &x[..split.f()];
    let fit = match model {
        ModelKind::Ar { p } => fit_ar_ls(analysis, p)?,
        ModelKind::Arma { p, q } => fit_arma_pmle(analysis, p, q, options.arma_init.as_ref())?,
        ModelKind::Garch { p, q } => {
            let space = options.garch_space.unwrap_or_default();
            fit_garch_qmle(analysis, p, q, &space)?
        }
    };
    let z_hat = residuals_from_estimate(&fit.estimate, x, split)?;
    Ok(SplitResiduals { z_hat, fit, split })
}

/// Assessment-window residuals for an already-fitted model.
pub fn residuals_from_estimate(
    estimate: &ModelEstimate,
    x: &[f64],
    split: SplitSpec,
) -> Result<Vec<f64>> {
    let all = match estimate {
        ModelEstimate::Arma(params) => arma_residuals_truncated(params, x),
        ModelEstimate::Garch(params) => garch_residuals(params, x),
    };
    let z_hat = all[x.len() - split.l()..].to_vec();
    if z_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite residual produced".into()));
    }
    debug_assert_eq!(z_hat.len(), split.l());
    Ok(z_hat)
}
