//! Residual ACF and squared-residual ACF statistics with their chi-squared
//! portmanteau tests.
//!
//! The plain residual ACF is the uncentered ratio
//! rho(h) = sum_j z_j z_{j+h} / sum_j z_j^2 (residuals have mean ~0 by
//! construction); the squared-residual ACF is mean-corrected exactly as
//! displayed in the source formulas. The two deliberately differ.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{chi2_quantile, chi2_sf};

/// Which ACF statistic a report holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcfKind {
    Plain,
    Squared,
}

/// Per-lag autocorrelations of a residual vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfReport {
    pub kind: AcfKind,
    /// rho[k-1] is the value at lag k; lags are contiguous from 1.
    pub rho: Vec<f64>,
    /// Number of residuals (l_n) behind the report.
    pub n_eff: usize,
    /// The iid reference band 1.96 / sqrt(l_n).
    pub bound_iid: f64,
    /// Model-adjusted standard deviation per lag, when a closed form exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_h: Option<Vec<f64>>,
    /// Lags where |rho| > 1 (possible only for the mean-corrected squared
    /// statistic in small samples; values are reported raw, never clamped).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub out_of_range_lags: Vec<usize>,
}

impl AcfReport {
    pub fn max_lag(&self) -> usize {
        self.rho.len()
    }

    /// rho at lag h (1-based).
    pub fn rho_at(&self, h: usize) -> Option<f64> {
        if h == 0 {
            None
        } else {
            self.rho.get(h - 1).copied()
        }
    }

    /// Tidy CSV: lag, rho, bound, sigma_h (sigma_h blank when absent).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lag,rho,bound,sigma_h")?;
        for (i, r) in self.rho.iter().enumerate() {
            let sigma = self
                .sigma_h
                .as_ref()
                .map(|s| s[i].to_string())
                .unwrap_or_default();
            writeln!(w, "{},{},{},{}", i + 1, r, self.bound_iid, sigma)?;
        }
        Ok(())
    }
}

/// Outcome of a single portmanteau test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    /// Degrees of freedom for chi-squared tests; the critical value itself
    /// for simulation-calibrated tests.
    pub df_or_quantile: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub reject_5pct: bool,
}

/// Uncentered residual ACF at lags 1..=h_max.
pub fn residual_acf(z_hat: &[f64], h_max: usize) -> Result<AcfReport> {
    let l = z_hat.len();
    if h_max == 0 || h_max >= l {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= h_max < {l}, got {h_max}"
        )));
    }
    let denom: f64 = z_hat.iter().map(|z| z * z).sum();
    if denom <= 0.0 {
        return Err(Error::DegenerateInput("all residuals are zero".into()));
    }
    let rho: Vec<f64> = (1..=h_max)
        .map(|h| {
            let num: f64 = (0..l - h).map(|j| z_hat[j] * z_hat[j + h]).sum();
            num / denom
        })
        .collect();
    Ok(AcfReport {
        kind: AcfKind::Plain,
        rho,
        n_eff: l,
        bound_iid: 1.96 / (l as f64).sqrt(),
        sigma_h: None,
        out_of_range_lags: Vec::new(),
    })
}

/// Mean-corrected ACF of the squared residuals at lags 1..=h_max.
pub fn squared_residual_acf(z_hat: &[f64], h_max: usize) -> Result<AcfReport> {
    let l = z_hat.len();
    if h_max == 0 || h_max >= l {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= h_max < {l}, got {h_max}"
        )));
    }
    let lf = l as f64;
    let sq: Vec<f64> = z_hat.iter().map(|z| z * z).collect();
    let sum_sq: f64 = sq.iter().sum();
    let sum_quad: f64 = sq.iter().map(|s| s * s).sum();
    let correction = sum_sq * sum_sq / lf;
    let denom = sum_quad - correction;
    if denom.abs() < 1e-12 * sum_quad.max(1.0) {
        return Err(Error::DegenerateInput(
            "squared residuals are constant; squared ACF undefined".into(),
        ));
    }
    let mut out_of_range = Vec::new();
    let rho: Vec<f64> = (1..=h_max)
        .map(|h| {
            let num: f64 = (0..l - h).map(|j| sq[j] * sq[j + h]).sum::<f64>() - correction;
            let r = num / denom;
            if r.abs() > 1.0 {
                out_of_range.push(h);
            }
            r
        })
        .collect();
    Ok(AcfReport {
        kind: AcfKind::Squared,
        rho,
        n_eff: l,
        bound_iid: 1.96 / lf.sqrt(),
        sigma_h: None,
        out_of_range_lags: out_of_range,
    })
}

/// Closed-form asymptotic standard deviation of the sample-splitting AR(1)
/// residual ACF at lag h: sqrt(1 + (k_ra - 2 k_ov) beta^{2(h-1)} (1 - beta^2)).
pub fn ar1_sigma_h(beta: f64, h: usize, k_ra: f64, k_ov: f64) -> Result<f64> {
    Ok(ar1_acf_covariance(beta, h, h, k_ra, k_ov)?.sqrt())
}

/// Asymptotic covariance of the AR(1) residual ACF at lag pair (j, k):
/// 1{j=k} + (k_ra - 2 k_ov) beta^{j+k-2} (1 - beta^2).
pub fn ar1_acf_covariance(beta: f64, j: usize, k: usize, k_ra: f64, k_ov: f64) -> Result<f64> {
    if beta.abs() >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "AR(1) coefficient must satisfy |beta| < 1, got {beta}"
        )));
    }
    if j == 0 || k == 0 {
        return Err(Error::InvalidArgument("lags start at 1".into()));
    }
    let diag = if j == k { 1.0 } else { 0.0 };
    Ok(diag + (k_ra - 2.0 * k_ov) * beta.powi((j + k - 2) as i32) * (1.0 - beta * beta))
}

/// Q_ACF(h) = n_eff * sum_{k=1..h} rho(k)^2 against the chi-squared(h)
/// 0.95 quantile.
pub fn q_acf(report: &AcfReport, h: usize) -> Result<TestOutcome> {
    chi_squared_portmanteau(report, h)
}

/// Q_ACF2(h): the same statistic computed from a squared-residual report.
pub fn q_acf2(report: &AcfReport, h: usize) -> Result<TestOutcome> {
    if report.kind != AcfKind::Squared {
        return Err(Error::InvalidArgument(
            "q_acf2 needs a squared-residual ACF report".into(),
        ));
    }
    chi_squared_portmanteau(report, h)
}

fn chi_squared_portmanteau(report: &AcfReport, h: usize) -> Result<TestOutcome> {
    if h == 0 || h > report.max_lag() {
        return Err(Error::InvalidArgument(format!(
            "test lag {h} outside the report's 1..={}",
            report.max_lag()
        )));
    }
    let statistic =
        report.n_eff as f64 * report.rho[..h].iter().map(|r| r * r).sum::<f64>();
    let df = h as f64;
    let critical = chi2_quantile(0.95, df)?;
    Ok(TestOutcome {
        statistic,
        df_or_quantile: df,
        p_value: Some(chi2_sf(statistic, df)?),
        reject_5pct: statistic > critical,
    })
}

/// Ljung-Box statistic on full-sample residuals:
/// Q_LB(h) = n(n+2) sum_{k=1..h} rho(k)^2 / (n-k), rejected above the
/// chi-squared(h - fitted_params) 0.95 quantile.
pub fn q_ljung_box(
    report: &AcfReport,
    h: usize,
    fitted_params_count_adjust: usize,
) -> Result<TestOutcome> {
    if report.kind != AcfKind::Plain {
        return Err(Error::InvalidArgument(
            "Ljung-Box runs on the plain residual ACF".into(),
        ));
    }
    if h == 0 || h > report.max_lag() {
        return Err(Error::InvalidArgument(format!(
            "test lag {h} outside the report's 1..={}",
            report.max_lag()
        )));
    }
    if h <= fitted_params_count_adjust {
        return Err(Error::InvalidArgument(format!(
            "Ljung-Box df = h - {fitted_params_count_adjust} must be positive, got h = {h}"
        )));
    }
    let n = report.n_eff as f64;
    let statistic = n
        * (n + 2.0)
        * (1..=h)
            .map(|k| report.rho[k - 1] * report.rho[k - 1] / (n - k as f64))
            .sum::<f64>();
    let df = (h - fitted_params_count_adjust) as f64;
    let critical = chi2_quantile(0.95, df)?;
    Ok(TestOutcome {
        statistic,
        df_or_quantile: df,
        p_value: Some(chi2_sf(statistic, df)?),
        reject_5pct: statistic > critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plain_acf_hand_computed() {
        // z = (1,-1,1,-1), h=1: numerator -3, denominator 4.
        let r = residual_acf(&[1.0, -1.0, 1.0, -1.0], 1).unwrap();
        assert_eq!(r.rho[0], -0.75);
        assert_eq!(r.n_eff, 4);
    }

    #[test]
    fn plain_acf_matches_brute_force() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(99, 0);
        for _ in 0..20 {
            let z: Vec<f64> = (0..50).map(|_| rng.random::<f64>() - 0.5).collect();
            let report = residual_acf(&z, 10).unwrap();
            for h in 1..=10usize {
                let mut num = 0.0;
                let mut den = 0.0;
                for j in 0..z.len() {
                    if j + h < z.len() {
                        num += z[j] * z[j + h];
                    }
                    den += z[j] * z[j];
                }
                assert!((report.rho[h - 1] - num / den).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plain_acf_null_band() {
        let noise = crate::noise::NoiseSpec::gaussian(1.0).unwrap();
        let z = noise.sample(100_000, 5);
        let r = residual_acf(&z, 5).unwrap();
        let bound = 4.0 / (z.len() as f64).sqrt();
        for (h, rho) in r.rho.iter().enumerate() {
            assert!(rho.abs() < bound, "lag {}: {rho}", h + 1);
        }
    }

    #[test]
    fn squared_acf_hand_computed() {
        // z = (1,2,1,2), h=1: numerator 12 - 25 = -13, denominator 34 - 25 = 9.
        let r = squared_residual_acf(&[1.0, 2.0, 1.0, 2.0], 1).unwrap();
        assert!((r.rho[0] - (-13.0 / 9.0)).abs() < 1e-12);
        // |rho| > 1 is reported raw and flagged, never clamped.
        assert_eq!(r.out_of_range_lags, vec![1]);
    }

    #[test]
    fn squared_acf_null_is_small() {
        let noise = crate::noise::NoiseSpec::gaussian(1.0).unwrap();
        let z = noise.sample(100_000, 6);
        let r = squared_residual_acf(&z, 5).unwrap();
        for rho in &r.rho {
            assert!(rho.abs() < 4.0 / (z.len() as f64).sqrt());
        }
        assert!(r.out_of_range_lags.is_empty());
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(matches!(
            residual_acf(&[0.0; 10], 2),
            Err(Error::DegenerateInput(_))
        ));
        // Constant |z|: squared ACF denominator vanishes.
        assert!(matches!(
            squared_residual_acf(&[1.0, -1.0, 1.0, -1.0], 1),
            Err(Error::DegenerateInput(_))
        ));
        assert!(residual_acf(&[1.0, 2.0], 5).is_err());
    }

    #[test]
    fn ar1_sigma_reference_values() {
        // Half-split regime: k_ra = 2 k_ov, unit variance at every lag.
        let v = ar1_acf_covariance(0.5, 1, 1, 2.0, 1.0).unwrap();
        assert_eq!(v, 1.0);
        // Full sample: 1 - beta^{2(h-1)}(1 - beta^2) = 0.25 at h = 1.
        let v = ar1_acf_covariance(0.5, 1, 1, 1.0, 1.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        // Large lags forget the estimation effect.
        let v = ar1_acf_covariance(0.5, 40, 40, 1.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-20);
        // Off-diagonal form.
        let v = ar1_acf_covariance(0.5, 1, 2, 1.0, 0.0).unwrap();
        assert!((v - 0.5 * 0.75).abs() < 1e-15);
        assert!(ar1_acf_covariance(1.0, 1, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn q_acf_reference_cases() {
        let report = AcfReport {
            kind: AcfKind::Plain,
            rho: vec![0.08],
            n_eff: 1000,
            bound_iid: 1.96 / 1000.0_f64.sqrt(),
            sigma_h: None,
            out_of_range_lags: Vec::new(),
        };
        let t = q_acf(&report, 1).unwrap();
        assert!((t.statistic - 6.4).abs() < 1e-12);
        assert!(t.reject_5pct, "6.4 > 3.841 must reject");

        let zero = AcfReport {
            rho: vec![0.0; 5],
            ..report.clone()
        };
        let t = q_acf(&zero, 5).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!(!t.reject_5pct);
        assert!((t.p_value.unwrap() - 1.0).abs() < 1e-12);

        assert!(q_acf(&zero, 6).is_err());
    }

    #[test]
    fn ljung_box_reference_case() {
        // n=500, rho(1)=0.1, rho(2)=0: Q = 500*502*0.01/499 ~ 5.0301.
        let report = AcfReport {
            kind: AcfKind::Plain,
            rho: vec![0.1, 0.0],
            n_eff: 500,
            bound_iid: 1.96 / 500.0_f64.sqrt(),
            sigma_h: None,
            out_of_range_lags: Vec::new(),
        };
        let t = q_ljung_box(&report, 2, 1).unwrap();
        assert!((t.statistic - 500.0 * 502.0 * 0.01 / 499.0).abs() < 1e-10);
        assert_eq!(t.df_or_quantile, 1.0);
        // df = h - adjust must stay positive.
        assert!(q_ljung_box(&report, 1, 1).is_err());

        let zero = AcfReport {
            rho: vec![0.0, 0.0],
            ..report
        };
        assert_eq!(q_ljung_box(&zero, 2, 1).unwrap().statistic, 0.0);
    }

    #[test]
    fn q_acf2_wants_squared_reports() {
        let plain = residual_acf(&[1.0, -0.5, 0.25, 0.7, -1.2], 2).unwrap();
        assert!(q_acf2(&plain, 2).is_err());
        let squared = squared_residual_acf(&[1.0, -0.5, 0.25, 0.7, -1.2], 2).unwrap();
        assert!(q_acf2(&squared, 2).is_ok());
    }

    #[test]
    fn csv_shape() {
        let r = residual_acf(&[1.0, -1.0, 1.0, -1.0], 2).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "lag,rho,bound,sigma_h");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,-0.75,"));
    }

    proptest! {
        #[test]
        fn acf_is_scale_invariant(
            scale in prop_oneof![(-8.0_f64..8.0).prop_filter("nonzero", |c| c.abs() > 1e-3)],
            seed in 0u64..50,
        ) {
            let noise = crate::noise::NoiseSpec::gaussian(1.0).unwrap();
            let z = noise.sample(64, seed);
            let scaled: Vec<f64> = z.iter().map(|v| scale * v).collect();
            let a = residual_acf(&z, 6).unwrap();
            let b = residual_acf(&scaled, 6).unwrap();
            for (x, y) in a.rho.iter().zip(&b.rho) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let a2 = squared_residual_acf(&z, 6).unwrap();
            let b2 = squared_residual_acf(&scaled, 6).unwrap();
            for (x, y) in a2.rho.iter().zip(&b2.rho) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn plain_acf_bounded_by_one(seed in 0u64..100) {
            let noise = crate::noise::NoiseSpec::laplace(1.0).unwrap();
            let z = noise.sample(40, seed);
            let report = residual_acf(&z, 10).unwrap();
            for r in &report.rho {
                prop_assert!(r.abs() <= 1.0 + 1e-12);
            }
        }
    }
}
