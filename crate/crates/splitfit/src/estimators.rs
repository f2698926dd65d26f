//! Parameter estimation: AR least squares, ARMA Gaussian pseudo maximum
//! likelihood (exact innovations-algorithm likelihood, sigma^2 profiled
//! out) and GARCH quasi maximum likelihood.
//!
//! Both likelihood optimizers run Nelder-Mead on an unconstrained
//! reparameterization: reflection coefficients for ARMA (causality and
//! invertibility hold by construction), a bounded logistic/softmax map
//! onto the GARCH parameter space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{arma_autocovariance_unit, garch_cond_var_truncated, ArmaParams, GarchParams};
use crate::optim::nelder_mead;

/// Flag margin: a characteristic root within 1 + this of the unit circle
/// marks a boundary estimate.
const BOUNDARY_ROOT_MARGIN: f64 = 1e-6;

const NM_REL_TOL: f64 = 1e-9;
const NM_MAX_ITER: usize = 500;

/// The fitted model, as a validated parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelEstimate {
    Arma(ArmaParams),
    Garch(GarchParams),
}

impl ModelEstimate {
    pub fn as_arma(&self) -> Option<&ArmaParams> {
        match self {
            ModelEstimate::Arma(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_garch(&self) -> Option<&GarchParams> {
        match self {
            ModelEstimate::Garch(p) => Some(p),
            _ => None,
        }
    }

    /// Flat parameter vector in the conventional order.
    pub fn as_vec(&self) -> Vec<f64> {
        match self {
            ModelEstimate::Arma(p) => p.as_vec(),
            ModelEstimate::Garch(p) => p.as_vec(),
        }
    }
}

/// An estimate plus fitting diagnostics.
///
/// Serializes with the estimate as a flat parameter vector:
/// `{"model":"arma","p":2,"q":1,"estimate":[...],"sigma2":...,"loglik":...,
/// "converged":true,"iterations":N,"boundary":false}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FitResultRaw", into = "FitResultRaw")]
pub struct FitResult {
    pub estimate: ModelEstimate,
    /// Innovation variance estimate; ARMA-family fits only.
    pub sigma2_hat: Option<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Estimate sits on (or hugs) the edge of the admissible region.
    pub boundary: bool,
    pub stderr_proxy: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct FitResultRaw {
    model: String,
    p: usize,
    q: usize,
    estimate: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma2: Option<f64>,
    loglik: f64,
    converged: bool,
    iterations: usize,
    boundary: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr_proxy: Option<Vec<f64>>,
}

impl From<FitResult> for FitResultRaw {
    fn from(fit: FitResult) -> Self {
        let (model, p, q) = match &fit.estimate {
            ModelEstimate::Arma(m) => ("arma", m.p(), m.q()),
            ModelEstimate::Garch(m) => ("garch", m.p(), m.q()),
        };
        FitResultRaw {
            model: model.to_string(),
            p,
            q,
            estimate: fit.estimate.as_vec(),
            sigma2: fit.sigma2_hat,
            loglik: fit.loglik,
            converged: fit.converged,
            iterations: fit.iterations,
            boundary: fit.boundary,
            stderr_proxy: fit.stderr_proxy,
        }
    }
}

impl TryFrom<FitResultRaw> for FitResult {
    type Error = Error;
    fn try_from(raw: FitResultRaw) -> Result<Self> {
        let estimate = match raw.model.as_str() {
            "arma" => {
                if raw.estimate.len() != raw.p + raw.q {
                    return Err(Error::InvalidParameter(
                        "estimate length does not match p + q".into(),
                    ));
                }
                ModelEstimate::Arma(ArmaParams::new(
                    raw.estimate[..raw.p].to_vec(),
                    raw.estimate[raw.p..].to_vec(),
                )?)
            }
            "garch" => {
                if raw.estimate.len() != 1 + raw.p + raw.q {
                    return Err(Error::InvalidParameter(
                        "estimate length does not match 1 + p + q".into(),
                    ));
                }
                ModelEstimate::Garch(GarchParams::new(
                    raw.estimate[0],
                    raw.estimate[1..1 + raw.p].to_vec(),
                    raw.estimate[1 + raw.p..].to_vec(),
                )?)
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown model kind '{other}'"
                )))
            }
        };
        Ok(FitResult {
            estimate,
            sigma2_hat: raw.sigma2,
            loglik: raw.loglik,
            converged: raw.converged,
            iterations: raw.iterations,
            boundary: raw.boundary,
            stderr_proxy: raw.stderr_proxy,
        })
    }
}

// ---------------------------------------------------------------------------
// Small dense symmetric solve (normal equations)
// ---------------------------------------------------------------------------

/// Cholesky solve of a symmetric positive definite system given in
/// row-major order. Returns None when the matrix is (numerically) singular.
fn solve_spd(a: &[f64], b: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    let scale = a
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = a[i * dim + j];
            for k in 0..j {
                sum -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if sum <= scale * 1e-12 {
                    return None;
                }
                l[i * dim + i] = sum.sqrt();
            } else {
                l[i * dim + j] = sum / l[j * dim + j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = vec![0.0; dim];
    for i in 0..dim {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * dim + k] * y[k];
        }
        y[i] = sum / l[i * dim + i];
    }
    let mut x = vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut sum = y[i];
        for k in i + 1..dim {
            sum -= l[k * dim + i] * x[k];
        }
        x[i] = sum / l[i * dim + i];
    }
    Some(x)
}

/// Least squares AR(p) coefficients (no intercept), or None if singular.
fn ls_ar_coefficients(x: &[f64], p: usize) -> Option<Vec<f64>> {
    let n = x.len();
    let mut a = vec![0.0; p * p];
    let mut b = vec![0.0; p];
    for t in p..n {
        for i in 0..p {
            b[i] += x[t - 1 - i] * x[t];
            for j in 0..=i {
                a[i * p + j] += x[t - 1 - i] * x[t - 1 - j];
            }
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            a[i * p + j] = a[j * p + i];
        }
    }
    solve_spd(&a, &b, p)
}

/// Ordinary least squares fit of an AR(p) model on the raw observations,
/// X_j regressed on (X_{j-1}, ..., X_{j-p}).
pub fn fit_ar_ls(x: &[f64], p: usize) -> Result<FitResult> {
    if p == 0 {
        return Err(Error::InvalidArgument("AR order must be at least 1".into()));
    }
    if x.len() < 10 * p {
        return Err(Error::InvalidArgument(format!(
            "need at least {} observations for AR({p}) least squares, got {}",
            10 * p,
            x.len()
        )));
    }
    let phi = ls_ar_coefficients(x, p)
        .ok_or_else(|| Error::Estimation("singular least squares design".into()))?;
    let params = ArmaParams::ar(phi)
        .map_err(|e| Error::Estimation(format!("least squares estimate rejected: {e}")))?;

    let n = x.len();
    let rows = (n - p) as f64;
    let rss: f64 = (p..n)
        .map(|t| {
            let pred: f64 = (0..p).map(|k| params.phi()[k] * x[t - 1 - k]).sum();
            let e = x[t] - pred;
            e * e
        })
        .sum();
    let sigma2 = rss / rows;
    let loglik = -0.5 * rows * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let boundary = params.min_root_modulus() < 1.0 + BOUNDARY_ROOT_MARGIN;
    Ok(FitResult {
        estimate: ModelEstimate::Arma(params),
        sigma2_hat: Some(sigma2),
        loglik,
        converged: true,
        iterations: 1,
        boundary,
        stderr_proxy: None,
    })
}

// ---------------------------------------------------------------------------
// Innovations-algorithm Gaussian likelihood for ARMA
// ---------------------------------------------------------------------------

/// Exact Gaussian likelihood pieces for an ARMA model, by the innovations
/// algorithm applied to the AR-filtered process.
///
/// Returns (S, sum_ln_r) where S = sum (x_t - xhat_t)^2 / r_{t-1} and the
/// r's are the unit-variance one-step prediction MSE factors, or None if
/// the recursion loses positive definiteness.
fn innovations_pieces(params: &ArmaParams, x: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    let p = params.p();
    let q = params.q();
    let m = p.max(q);
    let phi = params.phi();
    let theta = params.theta();

    let gamma = arma_autocovariance_unit(params, m + p + q + 1);
    // theta_0 = 1 convention for the MA coefficient lookups.
    let tcoef = |r: usize| -> f64 {
        if r == 0 {
            1.0
        } else if r <= q {
            theta[r - 1]
        } else {
            0.0
        }
    };
    // Covariance kernel of the transformed process (1-based indices).
    let kappa = |i: usize, j: usize| -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if hi <= m {
            gamma[d]
        } else if lo <= m {
            if d > q {
                0.0
            } else {
                let mut v = gamma[d];
                for (r, &ph) in phi.iter().enumerate() {
                    let lag = (r + 1) as i64 - d as i64;
                    v -= ph * gamma[lag.unsigned_abs() as usize];
                }
                v
            }
        } else if d > q {
            0.0
        } else {
            (0..=q - d).map(|r| tcoef(r) * tcoef(r + d)).sum()
        }
    };

    // Innovations recursion with the banded tail. rows[t-1] holds
    // theta_{t,1..w}; beyond m + q only q coefficients are nonzero.
    let mut v = vec![0.0; n];
    v[0] = kappa(1, 1);
    if !(v[0].is_finite() && v[0] > 0.0) {
        return None;
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(1));
    let width = |t: usize| -> usize {
        if t > m + q {
            q
        } else {
            t
        }
    };
    for t in 1..n {
        let w = width(t);
        let mut row = vec![0.0; w];
        for k in (t - w)..t {
            let j_min = (t - w).max(k.saturating_sub(width(k)));
            let mut acc = kappa(t + 1, k + 1);
            for j in j_min..k {
                let th_k = if k - j <= rows[k - 1].len() {
                    rows[k - 1][k - j - 1]
                } else {
                    0.0
                };
                acc -= th_k * row[t - j - 1] * v[j];
            }
            row[t - k - 1] = acc / v[k];
        }
        let mut vt = kappa(t + 1, t + 1);
        for j in (t - w)..t {
            vt -= row[t - j - 1] * row[t - j - 1] * v[j];
        }
        if !(vt.is_finite() && vt > 0.0) {
            return None;
        }
        v[t] = vt;
        rows.push(row);
    }

    // One-step predictors of the raw process.
    let mut xhat = vec![0.0; n];
    for t in 1..n {
        let row = &rows[t - 1];
        let mut pred = 0.0;
        if t < m {
            for (j, &th) in row.iter().enumerate() {
                pred += th * (x[t - j - 1] - xhat[t - j - 1]);
            }
        } else {
            for (k, &ph) in phi.iter().enumerate() {
                pred += ph * x[t - k - 1];
            }
            for j in 0..q.min(row.len()) {
                pred += row[j] * (x[t - j - 1] - xhat[t - j - 1]);
            }
        }
        xhat[t] = pred;
    }

    let mut s = 0.0;
    let mut sum_ln_r = 0.0;
    for t in 0..n {
        let e = x[t] - xhat[t];
        s += e * e / v[t];
        sum_ln_r += v[t].ln();
    }
    if s.is_finite() && sum_ln_r.is_finite() {
        Some((s, sum_ln_r))
    } else {
        None
    }
}

/// Profile Gaussian log-likelihood of an ARMA model: sigma^2 maximized out.
///
/// Returns (loglik, sigma2_hat).
pub fn arma_profile_loglik(params: &ArmaParams, x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    let (s, sum_ln_r) = innovations_pieces(params, x)
        .ok_or_else(|| Error::Numeric("innovations recursion lost positivity".into()))?;
    let sigma2 = s / n as f64;
    if !(sigma2 > 0.0) {
        return Err(Error::DegenerateInput("zero innovation variance".into()));
    }
    let nf = n as f64;
    let loglik = -0.5 * (nf * (2.0 * std::f64::consts::PI * sigma2).ln() + nf + sum_ln_r);
    Ok((loglik, sigma2))
}

// ---------------------------------------------------------------------------
// Reflection-coefficient parameterization
// ---------------------------------------------------------------------------

/// Durbin-Levinson map from reflection coefficients in (-1,1) to the
/// coefficients of a causal AR polynomial.
fn pacf_to_ar(u: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::new();
    for (k, &uk) in u.iter().enumerate() {
        let mut next = vec![0.0; k + 1];
        next[k] = uk;
        for j in 0..k {
            next[j] = phi[j] - uk * phi[k - 1 - j];
        }
        phi = next;
    }
    phi
}

/// Inverse Durbin-Levinson; None when the polynomial is not causal.
fn ar_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let mut work = phi.to_vec();
    let p = work.len();
    let mut u = vec![0.0; p];
    for k in (0..p).rev() {
        let a = work[k];
        if !(a.abs() < 1.0) {
            return None;
        }
        u[k] = a;
        if k > 0 {
            let denom = 1.0 - a * a;
            let mut prev = vec![0.0; k];
            for j in 0..k {
                prev[j] = (work[j] + a * work[k - 1 - j]) / denom;
            }
            work = prev;
        }
    }
    Some(u)
}

fn squash(x: f64) -> f64 {
    x / (1.0 + x * x).sqrt()
}

fn unsquash(u: f64) -> f64 {
    let u = u.clamp(-1.0 + 1e-9, 1.0 - 1e-9);
    u / (1.0 - u * u).sqrt()
}

/// Unconstrained vector -> (phi, theta) guaranteed causal and invertible.
fn arma_from_unconstrained(y: &[f64], p: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    let u_ar: Vec<f64> = y[..p].iter().map(|&v| squash(v)).collect();
    let u_ma: Vec<f64> = y[p..p + q].iter().map(|&v| squash(v)).collect();
    let phi = pacf_to_ar(&u_ar);
    // theta(z) = 1 + sum theta z^l is invertible iff 1 - sum (-theta) z^l
    // is causal; parameterize the negated coefficients.
    let theta: Vec<f64> = pacf_to_ar(&u_ma).iter().map(|b| -b).collect();
    (phi, theta)
}

/// (phi, theta) -> unconstrained start vector; None off the feasible set.
fn arma_to_unconstrained(phi: &[f64], theta: &[f64]) -> Option<Vec<f64>> {
    let u_ar = ar_to_pacf(phi)?;
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    let u_ma = ar_to_pacf(&neg)?;
    Some(
        u_ar.iter()
            .chain(u_ma.iter())
            .map(|&u| unsquash(u))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Hannan-Rissanen initialization
// ---------------------------------------------------------------------------

fn hannan_rissanen(x: &[f64], p: usize, q: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    if q == 0 {
        return ls_ar_coefficients(x, p).map(|phi| (phi, Vec::new()));
    }
    let long = ((n as f64).ln().ceil() as usize * 2)
        .max(p + q + 1)
        .min(n / 4);
    if long == 0 || n <= long + q + p {
        return None;
    }
    let ar_long = ls_ar_coefficients(x, long)?;
    let mut e = vec![0.0; n];
    for t in long..n {
        let pred: f64 = (0..long).map(|k| ar_long[k] * x[t - 1 - k]).sum();
        e[t] = x[t] - pred;
    }
    // Regress X_t on lagged X and lagged residual proxies.
    let dim = p + q;
    let start = (long + q).max(p);
    let mut a = vec![0.0; dim * dim];
    let mut b = vec![0.0; dim];
    let reg = |t: usize, i: usize| -> f64 {
        if i < p {
            x[t - 1 - i]
        } else {
            e[t - 1 - (i - p)]
        }
    };
    for t in start..n {
        for i in 0..dim {
            let ri = reg(t, i);
            b[i] += ri * x[t];
            for j in 0..=i {
                a[i * dim + j] += ri * reg(t, j);
            }
        }
    }
    for i in 0..dim {
        for j in i + 1..dim {
            a[i * dim + j] = a[j * dim + i];
        }
    }
    let beta = solve_spd(&a, &b, dim)?;
    Some((beta[..p].to_vec(), beta[p..].to_vec()))
}

/// Gaussian pseudo maximum likelihood fit of an ARMA(p, q) model.
///
/// The likelihood is evaluated exactly through the innovations algorithm
/// with sigma^2 profiled out; the search runs over a reflection-coefficient
/// reparameterization so every iterate is causal and invertible.
/// Initialized from `init` when given, otherwise by Hannan-Rissanen
/// (falling back to zero coefficients if that regression is singular).
pub fn fit_arma_pmle(x: &[f64], p: usize, q: usize, init: Option<&ArmaParams>) -> Result<FitResult> {
    if p + q == 0 {
        return Err(Error::InvalidArgument(
            "ARMA fit needs at least one parameter (p + q >= 1)".into(),
        ));
    }
    if x.len() < 20 * (p + q) {
        return Err(Error::InvalidArgument(format!(
            "need at least {} observations for ARMA({p},{q}), got {}",
            20 * (p + q),
            x.len()
        )));
    }

    let objective = |y: &[f64]| -> f64 {
        let (phi, theta) = arma_from_unconstrained(y, p, q);
        let Ok(params) = ArmaParams::new(phi, theta) else {
            return f64::INFINITY;
        };
        match innovations_pieces(&params, x) {
            Some((s, sum_ln_r)) => {
                let n = x.len() as f64;
                n * (s / n).ln() + sum_ln_r
            }
            None => f64::INFINITY,
        }
    };

    let start = init
        .map(|prm| arma_to_unconstrained(prm.phi(), prm.theta()))
        .unwrap_or_else(|| {
            hannan_rissanen(x, p, q).and_then(|(phi, theta)| arma_to_unconstrained(&phi, &theta))
        })
        .unwrap_or_else(|| vec![0.0; p + q]);

    let mut best = nelder_mead(objective, &start, 0.25, NM_REL_TOL, NM_MAX_ITER);
    if !best.converged || !best.fx.is_finite() {
        // One retry from the white-noise origin.
        let alt = nelder_mead(objective, &vec![0.0; p + q], 0.25, NM_REL_TOL, NM_MAX_ITER);
        if alt.fx < best.fx {
            best = alt;
        }
    }
    if !best.fx.is_finite() {
        return Err(Error::Estimation("ARMA likelihood not finite anywhere visited".into()));
    }

    let (phi, theta) = arma_from_unconstrained(&best.x, p, q);
    let params = ArmaParams::new(phi, theta)
        .map_err(|e| Error::Estimation(format!("optimizer left the feasible set: {e}")))?;
    let (loglik, sigma2) = arma_profile_loglik(&params, x)?;
    let boundary = params.min_root_modulus() < 1.0 + BOUNDARY_ROOT_MARGIN;
    Ok(FitResult {
        estimate: ModelEstimate::Arma(params),
        sigma2_hat: Some(sigma2),
        loglik,
        converged: best.converged,
        iterations: best.iterations,
        boundary,
        stderr_proxy: None,
    })
}

// ---------------------------------------------------------------------------
// GARCH QMLE
// ---------------------------------------------------------------------------

/// Parameter-space bounds for the GARCH QMLE search.
///
/// Coefficients live in [u_lo, u_hi]; alpha and beta jointly keep their sum
/// below rho0, which also keeps every estimate covariance stationary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchSpace {
    pub u_lo: f64,
    pub u_hi: f64,
    pub rho0: f64,
}

impl Default for GarchSpace {
    fn default() -> Self {
        GarchSpace {
            u_lo: 1e-6,
            u_hi: 10.0,
            rho0: 0.999,
        }
    }
}

impl GarchSpace {
    fn validate(&self, n_coefs: usize) -> Result<()> {
        if !(self.u_lo > 0.0 && self.u_lo < self.u_hi) {
            return Err(Error::InvalidParameter("need 0 < u_lo < u_hi".into()));
        }
        if !(self.rho0 > 0.0 && self.rho0 < 1.0) {
            return Err(Error::InvalidParameter("need 0 < rho0 < 1".into()));
        }
        if n_coefs as f64 * self.u_lo >= self.rho0 {
            return Err(Error::InvalidParameter(
                "u_lo too large for the coefficient count".into(),
            ));
        }
        Ok(())
    }

    fn coef_budget(&self, n_coefs: usize) -> f64 {
        self.rho0 - n_coefs as f64 * self.u_lo
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

fn garch_from_unconstrained(y: &[f64], p: usize, q: usize, space: &GarchSpace) -> GarchParams {
    let omega = space.u_lo + (space.u_hi - space.u_lo) * sigmoid(y[0]);
    let exps: Vec<f64> = y[1..1 + p + q]
        .iter()
        .map(|&v| v.clamp(-35.0, 35.0).exp())
        .collect();
    let denom = 1.0 + exps.iter().sum::<f64>();
    let budget = space.coef_budget(p + q);
    let coefs: Vec<f64> = exps.iter().map(|e| space.u_lo + budget * e / denom).collect();
    let alpha = coefs[..p].to_vec();
    let beta = coefs[p..].to_vec();
    GarchParams::new(omega, alpha, beta).expect("in-space parameters are always admissible")
}

fn garch_to_unconstrained(params: &GarchParams, space: &GarchSpace) -> Vec<f64> {
    let p = params.p();
    let q = params.q();
    let budget = space.coef_budget(p + q);
    let mut shares: Vec<f64> = params
        .alpha()
        .iter()
        .chain(params.beta().iter())
        .map(|&c| ((c - space.u_lo) / budget).max(1e-9))
        .collect();
    let total: f64 = shares.iter().sum();
    if total >= 0.999 {
        for s in &mut shares {
            *s *= 0.998 / total;
        }
    }
    let rest = 1.0 - shares.iter().sum::<f64>();
    let mut y = Vec::with_capacity(1 + p + q);
    y.push(logit((params.omega() - space.u_lo) / (space.u_hi - space.u_lo)));
    y.extend(shares.iter().map(|&s| (s / rest).ln()));
    y
}

/// Quasi log-likelihood sum_j -(1/2) log sigma-hat_j^2 - x_j^2 / (2 sigma-hat_j^2),
/// with the conditional variances from the truncated recursion.
pub fn garch_quasi_loglik(params: &GarchParams, x: &[f64]) -> f64 {
    let sig2 = garch_cond_var_truncated(params, x);
    x.iter()
        .zip(&sig2)
        .map(|(xj, s2)| -0.5 * s2.ln() - xj * xj / (2.0 * s2))
        .sum()
}

/// Quasi maximum likelihood fit of a GARCH(p, q) model over the bounded
/// parameter space `space`.
pub fn fit_garch_qmle(x: &[f64], p: usize, q: usize, space: &GarchSpace) -> Result<FitResult> {
    if p == 0 {
        return Err(Error::InvalidArgument("GARCH fit needs p >= 1".into()));
    }
    space.validate(p + q)?;
    if x.len() < 20 * (1 + p + q) {
        return Err(Error::InvalidArgument(format!(
            "series too short for GARCH({p},{q}) QMLE: {}",
            x.len()
        )));
    }

    let n = x.len() as f64;
    let objective = |y: &[f64]| -> f64 {
        let params = garch_from_unconstrained(y, p, q, space);
        let ll = garch_quasi_loglik(&params, x);
        if ll.is_finite() {
            -ll / n
        } else {
            f64::INFINITY
        }
    };

    // Start: omega = 0.1 var(x), alpha = 0.05 each, beta = 0.8/q each,
    // projected into the space.
    let var_x = x.iter().map(|v| v * v).sum::<f64>() / n;
    let omega0 = (0.1 * var_x).clamp(2.0 * space.u_lo, 0.9 * space.u_hi);
    let alpha0 = vec![0.05; p];
    let beta0 = if q > 0 { vec![0.8 / q as f64; q] } else { Vec::new() };
    let start_params = GarchParams::new(omega0, alpha0, beta0)
        .expect("projected start point is admissible");
    let start = garch_to_unconstrained(&start_params, space);

    let best = nelder_mead(objective, &start, 0.5, NM_REL_TOL, NM_MAX_ITER);
    if !best.fx.is_finite() {
        return Err(Error::Estimation("GARCH quasi-likelihood not finite".into()));
    }
    let params = garch_from_unconstrained(&best.x, p, q, space);
    let loglik = garch_quasi_loglik(&params, x);

    let coefs: Vec<f64> = params
        .alpha()
        .iter()
        .chain(params.beta().iter())
        .copied()
        .collect();
    let coef_sum: f64 = coefs.iter().sum();
    let edge = 1e-5 * (space.u_hi - space.u_lo);
    let boundary = params.omega() - space.u_lo < edge
        || space.u_hi - params.omega() < edge
        || coefs
            .iter()
            .any(|&c| c - space.u_lo < 1e-5 || space.u_hi - c < edge)
        || space.rho0 - coef_sum < 1e-4;

    Ok(FitResult {
        estimate: ModelEstimate::Garch(params),
        sigma2_hat: None,
        loglik,
        converged: best.converged,
        iterations: best.iterations,
        boundary,
        stderr_proxy: None,
    })
}
