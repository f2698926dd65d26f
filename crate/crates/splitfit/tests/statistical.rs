//! Monte Carlo properties beyond the acceptance criteria: the stochastic
//! ordering of ADCF null quantiles across split regimes, the half-split
//! variance band, and the one-sided variance dominance of disjoint splits.

use std::collections::BTreeMap;

use rayon::prelude::*;

use splitfit::adcf::{adcf, WeightMeasure};
use splitfit::harness::{run_experiment, ExperimentConfig, GeneratorSpec, SplitToken, Statistic};
use splitfit::models::{simulate_arma_with, ArmaParams};
use splitfit::noise::NoiseSpec;
use splitfit::rng::stream_rng;
use splitfit::special::empirical_quantile;
use splitfit::splitting::{split_residuals, FitOptions, ModelKind, SplitSpec};

/// Standard error of an empirical p-quantile via the sample's local
/// quantile spacing.
fn quantile_se(sorted: &[f64], p: f64) -> f64 {
    let r = sorted.len() as f64;
    let delta = 0.02;
    let spread = empirical_quantile(sorted, p + delta) - empirical_quantile(sorted, p - delta);
    let density = (2.0 * delta / spread).max(1e-9);
    (p * (1.0 - p) / r).sqrt() / density
}

#[test]
fn adcf_null_quantiles_order_by_split_regime() {
    // AR(1) fitting with Gaussian noise: the 95% quantile of l * R(1) is
    // largest under disjoint splits, then the half split, then the full
    // sample, with gaps beyond Monte Carlo noise.
    let n = 1000;
    let reps: u64 = 1000;
    let w = WeightMeasure::default_gaussian();
    let params = ArmaParams::ar(vec![0.5]).unwrap();
    let noise = NoiseSpec::gaussian(1.0).unwrap();

    let quantile_for = |split: SplitSpec| -> (f64, f64) {
        let mut stats: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(0xD0_0001, r);
                let sample = simulate_arma_with(&params, &noise, n, 800, &mut rng);
                let res =
                    split_residuals(&sample.x, ModelKind::Ar { p: 1 }, split, &FitOptions::default())
                        .unwrap();
                let rep = adcf(&res.z_hat, 1, &w).unwrap();
                split.l() as f64 * rep.r[0]
            })
            .collect();
        stats.sort_by(|a, b| a.total_cmp(b));
        (
            empirical_quantile(&stats, 0.95),
            quantile_se(&stats, 0.95),
        )
    };

    let (q_disjoint, se_d) = quantile_for(SplitSpec::new(333, 667, n).unwrap());
    let (q_half, se_h) = quantile_for(SplitSpec::half(n).unwrap());
    let (q_full, se_f) = quantile_for(SplitSpec::full(n).unwrap());

    let gap_dh = q_disjoint - q_half;
    let se_dh = (se_d * se_d + se_h * se_h).sqrt();
    assert!(
        gap_dh > 2.0 * se_dh,
        "disjoint {q_disjoint:.3} not above half {q_half:.3} by 2 se ({se_dh:.3})"
    );
    let gap_hf = q_half - q_full;
    let se_hf = (se_h * se_h + se_f * se_f).sqrt();
    assert!(
        gap_hf > 2.0 * se_hf,
        "half {q_half:.3} not above full {q_full:.3} by 2 se ({se_hf:.3})"
    );
    println!(
        "ADCF null quantile ordering: disjoint {q_disjoint:.2} > half {q_half:.2} > full {q_full:.2}"
    );
}

#[test]
fn half_split_arma_residual_acf_variance_band() {
    // Half-split ARMA(2,1) residual ACF behaves like iid noise: the
    // variance of sqrt(l) * rho(h) stays within 10% of 1 for h = 1..5.
    let mut cfg = ExperimentConfig {
        label: None,
        generator: GeneratorSpec::Arma {
            params: ArmaParams::new(vec![0.8, 0.1], vec![0.3]).unwrap(),
            noise: NoiseSpec::laplace(1.0).unwrap(),
            burn_in: Some(1500),
        },
        fit: ModelKind::Arma { p: 2, q: 1 },
        splits: vec![SplitToken::Named("half".into())],
        statistics: vec![Statistic::Acf],
        lags: vec![1, 2, 3, 4, 5],
        n: 2000,
        reps: 2000,
        seed: 0xD0_0002,
        weight: WeightMeasure::default_gaussian(),
        critical_values: BTreeMap::new(),
        lb_df_adjust: 1,
        fit_options: FitOptions::default(),
        full_scale: None,
    };
    cfg.label = Some("variance-band".into());
    let result = run_experiment(&cfg, 0).unwrap();
    let table = result.splits[0].acf.as_ref().unwrap();
    for h in 1..=5usize {
        let v = table.var_scaled[h - 1];
        assert!(
            (0.9..=1.1).contains(&v),
            "half-split variance at lag {h} is {v:.4}, outside [0.9, 1.1]"
        );
    }
    println!(
        "half-split variance of sqrt(l) rho, lags 1..5: {:?}",
        table.var_scaled
    );
}

#[test]
fn disjoint_split_variance_dominates_iid() {
    // With k_ov = 0 the residual ACF is stochastically larger than for
    // true noise: empirical variance of sqrt(l) * rho >= 1 at every lag
    // (one-sided, 2 Monte Carlo standard errors of slack).
    let reps = 2000;
    let mut cfg = ExperimentConfig {
        label: Some("disjoint-dominance".into()),
        generator: GeneratorSpec::Arma {
            params: ArmaParams::ar(vec![0.5]).unwrap(),
            noise: NoiseSpec::gaussian(1.0).unwrap(),
            burn_in: Some(800),
        },
        fit: ModelKind::Ar { p: 1 },
        splits: vec![SplitToken::Explicit { f: 500, l: 1500 }],
        statistics: vec![Statistic::Acf],
        lags: vec![1, 2, 3, 4, 5],
        n: 2000,
        reps,
        seed: 0xD0_0003,
        weight: WeightMeasure::default_gaussian(),
        critical_values: BTreeMap::new(),
        lb_df_adjust: 1,
        fit_options: FitOptions::default(),
        full_scale: None,
    };
    cfg.label = Some("disjoint".into());
    let result = run_experiment(&cfg, 0).unwrap();
    let table = result.splits[0].acf.as_ref().unwrap();
    let se = (2.0 / (reps as f64 - 1.0)).sqrt();
    for h in 1..=5usize {
        let v = table.var_scaled[h - 1];
        assert!(
            v >= 1.0 - 2.0 * se,
            "disjoint-split variance at lag {h} is {v:.4}, below the iid floor"
        );
    }
}
