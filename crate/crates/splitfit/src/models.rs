//! ARMA and GARCH processes: parameter validation, simulation, coefficient
//! expansions and truncated residual / conditional variance reconstruction.
//!
//! Truncation convention: observations before time 1 are treated as zero,
//! so every reconstructed quantity at time j uses the observed x[0..=j-1]
//! only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::poly;
use crate::rng::{stream_rng, StreamRng};

/// Margin used for the strict root checks: roots of the AR and MA
/// polynomials must lie outside the circle of radius 1 + MARGIN.
const ROOT_MARGIN: f64 = 1e-8;

/// ARMA(p, q) coefficients; causal and invertible by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArmaParamsRaw", into = "ArmaParamsRaw")]
pub struct ArmaParams {
    phi: Vec<f64>,
    theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ArmaParamsRaw {
    #[serde(default)]
    phi: Vec<f64>,
    #[serde(default)]
    theta: Vec<f64>,
}

impl From<ArmaParams> for ArmaParamsRaw {
    fn from(p: ArmaParams) -> Self {
        ArmaParamsRaw {
            phi: p.phi,
            theta: p.theta,
        }
    }
}

impl TryFrom<ArmaParamsRaw> for ArmaParams {
    type Error = Error;
    fn try_from(raw: ArmaParamsRaw) -> Result<Self> {
        ArmaParams::new(raw.phi, raw.theta)
    }
}

impl ArmaParams {
    /// Validates causality (roots of 1 - sum phi_k z^k outside the unit
    /// circle) and invertibility (same for 1 + sum theta_l z^l).
    pub fn new(phi: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        for v in phi.iter().chain(theta.iter()) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter("non-finite ARMA coefficient".into()));
            }
        }
        let ar_char: Vec<f64> = phi.iter().map(|p| -p).collect();
        if poly::min_root_modulus_char(&ar_char)? <= 1.0 + ROOT_MARGIN {
            return Err(Error::InvalidParameter(
                "causality violated: AR polynomial has a root inside or on the unit circle"
                    .into(),
            ));
        }
        if poly::min_root_modulus_char(&theta)? <= 1.0 + ROOT_MARGIN {
            return Err(Error::InvalidParameter(
                "invertibility violated: MA polynomial has a root inside or on the unit circle"
                    .into(),
            ));
        }
        Ok(ArmaParams { phi, theta })
    }

    pub fn ar(phi: Vec<f64>) -> Result<Self> {
        Self::new(phi, Vec::new())
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn p(&self) -> usize {
        self.phi.len()
    }

    pub fn q(&self) -> usize {
        self.theta.len()
    }

    /// Flat (phi..., theta...) parameter vector.
    pub fn as_vec(&self) -> Vec<f64> {
        self.phi.iter().chain(self.theta.iter()).copied().collect()
    }

    /// Smallest root modulus across both characteristic polynomials.
    pub fn min_root_modulus(&self) -> f64 {
        let ar_char: Vec<f64> = self.phi.iter().map(|p| -p).collect();
        let a = poly::min_root_modulus_char(&ar_char).unwrap_or(f64::INFINITY);
        let b = poly::min_root_modulus_char(&self.theta).unwrap_or(f64::INFINITY);
        a.min(b)
    }
}

/// GARCH(p, q) coefficients with positivity and covariance stationarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GarchParamsRaw", into = "GarchParamsRaw")]
pub struct GarchParams {
    omega: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GarchParamsRaw {
    omega: f64,
    #[serde(default)]
    alpha: Vec<f64>,
    #[serde(default)]
    beta: Vec<f64>,
}

impl From<GarchParams> for GarchParamsRaw {
    fn from(p: GarchParams) -> Self {
        GarchParamsRaw {
            omega: p.omega,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl TryFrom<GarchParamsRaw> for GarchParams {
    type Error = Error;
    fn try_from(raw: GarchParamsRaw) -> Result<Self> {
        GarchParams::new(raw.omega, raw.alpha, raw.beta)
    }
}

impl GarchParams {
    pub fn new(omega: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {omega}"
            )));
        }
        if alpha.iter().chain(beta.iter()).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "alpha and beta entries must be nonnegative".into(),
            ));
        }
        let persistence: f64 = alpha.iter().sum::<f64>() + beta.iter().sum::<f64>();
        if persistence >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sum(alpha) + sum(beta) must be below 1 for stationarity, got {persistence}"
            )));
        }
        Ok(GarchParams { omega, alpha, beta })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn p(&self) -> usize {
        self.alpha.len()
    }

    pub fn q(&self) -> usize {
        self.beta.len()
    }

    /// Flat (omega, alpha..., beta...) parameter vector.
    pub fn as_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.alpha.len() + self.beta.len());
        v.push(self.omega);
        v.extend_from_slice(&self.alpha);
        v.extend_from_slice(&self.beta);
        v
    }

    /// Unconditional variance omega / (1 - sum alpha - sum beta).
    pub fn stationary_variance(&self) -> f64 {
        let persistence: f64 =
            self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>();
        self.omega / (1.0 - persistence)
    }

    fn beta_sum(&self) -> f64 {
        self.beta.iter().sum()
    }
}

/// What generated a simulated series; kept for oracle tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruth {
    /// Innovations for the kept window (Z_1 ... Z_n).
    pub innovations: Vec<f64>,
    /// True conditional variances, GARCH-type models only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<Vec<f64>>,
}

/// A simulated or imported series, optionally with its generating truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<SeriesTruth>,
}

impl SeriesSample {
    pub fn from_values(x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("series contains non-finite values".into()));
        }
        Ok(SeriesSample { x, truth: None })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Default burn-in: 1000 plus a term growing with the slowest AR decay.
pub fn default_arma_burn_in(params: &ArmaParams) -> usize {
    let ar_char: Vec<f64> = params.phi.iter().map(|p| -p).collect();
    let min_mod = poly::min_root_modulus_char(&ar_char).unwrap_or(f64::INFINITY);
    let decay = if min_mod.is_finite() { 1.0 / min_mod } else { 0.0 };
    1000 + (10.0 / (1.0 - decay)).ceil() as usize
}

/// Default burn-in for GARCH simulation, driven by the persistence.
pub fn default_garch_burn_in(params: &GarchParams) -> usize {
    let persistence: f64 =
        params.alpha.iter().sum::<f64>() + params.beta.iter().sum::<f64>();
    1000 + (10.0 / (1.0 - persistence)).ceil() as usize
}

/// Simulate an ARMA(p, q) path of length `n` after `burn_in` discarded steps.
pub fn simulate_arma(
    params: &ArmaParams,
    noise: &NoiseSpec,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> SeriesSample {
    let mut rng = stream_rng(seed, 0);
    simulate_arma_with(params, noise, n, burn_in, &mut rng)
}

/// Same as [`simulate_arma`] drawing from an existing stream.
pub fn simulate_arma_with(
    params: &ArmaParams,
    noise: &NoiseSpec,
    n: usize,
    burn_in: usize,
    rng: &mut StreamRng,
) -> SeriesSample {
    let total = burn_in + n;
    let z = noise.sample_with(total, rng);
    let mut x = vec![0.0; total];
    for j in 0..total {
        let mut v = z[j];
        for (k, &phi) in params.phi.iter().enumerate() {
            if j > k {
                v += phi * x[j - k - 1];
            }
        }
        for (l, &theta) in params.theta.iter().enumerate() {
            if j > l {
                v += theta * z[j - l - 1];
            }
        }
        x[j] = v;
    }
    SeriesSample {
        x: x.split_off(burn_in),
        truth: Some(SeriesTruth {
            innovations: z[burn_in..].to_vec(),
            sigma2: None,
        }),
    }
}

/// Coefficients pi_0..pi_k of the expansion phi(z)/theta(z) = sum pi_j z^j.
///
/// Computed by the exact long-division recursion from theta * pi = phi;
/// pi_0 = 1.
pub fn pi_coefficients(params: &ArmaParams, k: usize) -> Vec<f64> {
    let mut pi = Vec::with_capacity(k + 1);
    pi.push(1.0);
    for j in 1..=k {
        // Coefficient of z^j in phi(z) = 1 - sum phi_k z^k.
        let mut v = if j <= params.p() { -params.phi[j - 1] } else { 0.0 };
        for (l, &theta) in params.theta.iter().enumerate() {
            let lag = l + 1;
            if lag > j {
                break;
            }
            v -= theta * pi[j - lag];
        }
        pi.push(v);
    }
    pi
}

/// Coefficients psi_0..psi_k of theta(z)/phi(z) = sum psi_j z^j (MA-infinity
/// weights); psi_0 = 1.
pub fn psi_coefficients(params: &ArmaParams, k: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(k + 1);
    psi.push(1.0);
    for j in 1..=k {
        let mut v = if j <= params.q() { params.theta[j - 1] } else { 0.0 };
        for (kk, &phi) in params.phi.iter().enumerate() {
            let lag = kk + 1;
            if lag > j {
                break;
            }
            v += phi * psi[j - lag];
        }
        psi.push(v);
    }
    psi
}

/// Autocovariance of the ARMA process at lags 0..=max_lag for unit noise
/// variance, via the MA-infinity weights.
pub fn arma_autocovariance_unit(params: &ArmaParams, max_lag: usize) -> Vec<f64> {
    // Truncate once the psi tail is negligible.
    let mut k = 64.max(8 * (params.p() + params.q() + 1)).max(max_lag + 1);
    let psi = loop {
        let psi = psi_coefficients(params, k);
        let tail = psi[psi.len().saturating_sub(20)..]
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b.abs()));
        if tail < 1e-16 || k >= 65_536 {
            break psi;
        }
        k *= 2;
    };
    (0..=max_lag)
        .map(|h| {
            let mut acc = 0.0;
            for j in 0..psi.len().saturating_sub(h) {
                acc += psi[j] * psi[j + h];
            }
            acc
        })
        .collect()
}

/// Truncated ARMA residuals: Z-hat_j = sum_{k=0}^{j-1} pi_k x_{j-k}
/// for j = 1..=n, using only observations from time 1 on.
///
/// Evaluated by the equivalent recursion
/// Z-hat_j = x_j - sum phi_k x_{j-k} - sum theta_l Z-hat_{j-l}
/// with zeros before time 1, which reproduces the pi expansion exactly.
pub fn arma_residuals_truncated(params: &ArmaParams, x: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; x.len()];
    for j in 0..x.len() {
        let mut v = x[j];
        for (k, &phi) in params.phi.iter().enumerate() {
            if j > k {
                v -= phi * x[j - k - 1];
            }
        }
        for (l, &theta) in params.theta.iter().enumerate() {
            if j > l {
                v -= theta * z[j - l - 1];
            }
        }
        z[j] = v;
    }
    z
}

/// Literal pi-expansion evaluation of the truncated residuals; O(n^2).
/// Retained as the cross-check route for [`arma_residuals_truncated`].
pub fn arma_residuals_pi_sum(params: &ArmaParams, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let pi = pi_coefficients(params, n - 1);
    (0..n)
        .map(|j| (0..=j).map(|k| pi[k] * x[j - k]).sum())
        .collect()
}

/// Simulate a GARCH(p, q) path. The noise must have unit variance.
pub fn simulate_garch(
    params: &GarchParams,
    noise: &NoiseSpec,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<SeriesSample> {
    let mut rng = stream_rng(seed, 0);
    simulate_garch_with(params, noise, n, burn_in, &mut rng)
}

/// Same as [`simulate_garch`] drawing from an existing stream.
pub fn simulate_garch_with(
    params: &GarchParams,
    noise: &NoiseSpec,
    n: usize,
    burn_in: usize,
    rng: &mut StreamRng,
) -> Result<SeriesSample> {
    if (noise.variance() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(
            "GARCH innovations must have unit variance".into(),
        ));
    }
    let total = burn_in + n;
    let stat_var = params.stationary_variance();
    let mut x = vec![0.0; total];
    let mut sig2 = vec![0.0; total];
    let mut z = vec![0.0; total];
    for j in 0..total {
        let mut s2 = params.omega;
        for (k, &alpha) in params.alpha.iter().enumerate() {
            s2 += alpha * if j > k { x[j - k - 1] * x[j - k - 1] } else { 0.0 };
        }
        for (l, &beta) in params.beta.iter().enumerate() {
            // Presample variance seeded at the stationary mean.
            s2 += beta * if j > l { sig2[j - l - 1] } else { stat_var };
        }
        let e = noise.draw(rng);
        sig2[j] = s2;
        z[j] = e;
        x[j] = s2.sqrt() * e;
    }
    Ok(SeriesSample {
        x: x.split_off(burn_in),
        truth: Some(SeriesTruth {
            innovations: z.split_off(burn_in),
            sigma2: Some(sig2.split_off(burn_in)),
        }),
    })
}

/// Truncated conditional variances sigma-hat^2_j for j = 1..=n.
///
/// Matches the ARCH-infinity expansion c_0 + sum_{k=1}^{j-1} c_k x_{j-k}^2
/// exactly: the recursion is seeded with presample x^2 = 0 and presample
/// sigma^2 = omega / (1 - sum beta) = c_0.
pub fn garch_cond_var_truncated(params: &GarchParams, x: &[f64]) -> Vec<f64> {
    let c0 = params.omega / (1.0 - params.beta_sum());
    let mut sig2 = vec![0.0; x.len()];
    for j in 0..x.len() {
        let mut s2 = params.omega;
        for (k, &alpha) in params.alpha.iter().enumerate() {
            if j > k {
                s2 += alpha * x[j - k - 1] * x[j - k - 1];
            }
        }
        for (l, &beta) in params.beta.iter().enumerate() {
            s2 += beta * if j > l { sig2[j - l - 1] } else { c0 };
        }
        sig2[j] = s2;
    }
    sig2
}

/// ARCH-infinity coefficients c_0..c_k of the conditional variance
/// expansion; the cross-check route for [`garch_cond_var_truncated`].
pub fn garch_arch_infinity_coefficients(params: &GarchParams, k: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(k + 1);
    c.push(params.omega / (1.0 - params.beta_sum()));
    for j in 1..=k {
        let mut v = if j <= params.p() { params.alpha[j - 1] } else { 0.0 };
        for (l, &beta) in params.beta.iter().enumerate() {
            let lag = l + 1;
            if lag >= j {
                break;
            }
            v += beta * c[j - lag];
        }
        // lag == j reaches c_0, which multiplies x^2 terms only through
        // the constant; the expansion separates it, so skip it here.
        c.push(v);
    }
    c
}

/// Conditional variances via the truncated ARCH-infinity expansion,
/// keeping at most `trunc_k` squared-observation terms; O(n * trunc_k).
pub fn garch_cond_var_expansion(params: &GarchParams, x: &[f64], trunc_k: usize) -> Vec<f64> {
    let c = garch_arch_infinity_coefficients(params, trunc_k.min(x.len().saturating_sub(1)));
    (0..x.len())
        .map(|j| {
            let mut s2 = c[0];
            for k in 1..c.len().min(j + 1) {
                s2 += c[k] * x[j - k] * x[j - k];
            }
            s2
        })
        .collect()
}

/// Truncated GARCH residuals Z-hat_j = x_j / sigma-hat_j.
pub fn garch_residuals(params: &GarchParams, x: &[f64]) -> Vec<f64> {
    garch_cond_var_truncated(params, x)
        .iter()
        .zip(x)
        .map(|(s2, xj)| xj / s2.sqrt())
        .collect()
}
