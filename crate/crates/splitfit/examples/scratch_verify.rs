// scratch: empirical verification before freezing acceptance tolerances
use splitfit::harness::*;
use splitfit::models::ArmaParams;
use splitfit::noise::NoiseSpec;
use splitfit::splitting::ModelKind;
use std::collections::BTreeMap;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "remark1" => remark1(),
        "adcfnull" => adcfnull(),
        "n500" => n500(),
        "limit" => limit_check(),
        "table1" => table1(),
        "noburn" => noburn(),
        "truth" => truth(),
        "varband" => varband(),
        _ => println!("usage: remark1|adcfnull|n500|limit|table1|noburn|truth"),
    }
}

fn remark1() {
    // AR(1) beta=0.5 Gaussian, n=2000, 2000 reps; variance of sqrt(l)*rho
    for (f, l, name) in [(2000usize, 2000usize, "full"), (1000, 2000, "half"), (1000, 1000, "disj-1"), (666, 1334, "disj-2")] {
        let cfg = ExperimentConfig {
            label: Some(name.into()),
            generator: GeneratorSpec::Arma {
                params: ArmaParams::ar(vec![0.5]).unwrap(),
                noise: NoiseSpec::gaussian(1.0).unwrap(),
                burn_in: Some(1000),
            },
            fit: ModelKind::Ar { p: 1 },
            splits: vec![SplitToken::Explicit { f, l }],
            statistics: vec![Statistic::Acf],
            lags: vec![1, 2, 3],
            n: 2000,
            reps: 2000,
            seed: 20260811,
            weight: splitfit::adcf::WeightMeasure::default_gaussian(),
            critical_values: BTreeMap::new(),
            lb_df_adjust: 1,
            fit_options: Default::default(),
            full_scale: None,
        };
        let t0 = std::time::Instant::now();
        let res = run_experiment(&cfg, 0).unwrap();
        let acf = res.splits[0].acf.as_ref().unwrap();
        let (k_ra, k_ov) = (res.splits[0].k_ra, res.splits[0].k_ov);
        print!("{name:8} f={f:5} l={l:5} k_ra={k_ra:.3} k_ov={k_ov:.3} | var(sqrt(l) rho):");
        for h in 1..=3usize {
            let theory = splitfit::acf::ar1_acf_covariance(0.5, h, h, k_ra, k_ov).unwrap();
            print!(" h{h}: {:.4} (thy {:.4})", acf.var_scaled[h-1], theory);
        }
        println!("  [{:.1}s]", t0.elapsed().as_secs_f64());
    }
}

fn adcfnull() {
    use splitfit::adcf::*;
    let noise = NoiseSpec::gaussian(1.0).unwrap();
    let w = WeightMeasure::default_gaussian();
    let t0 = std::time::Instant::now();
    let q = calibrate_adcf_quantile(&noise, 2000, QuantileTarget::Lag(1), &w, 1000, 1, 0.95).unwrap();
    println!("n*R(1) 95% quantile at n=2000 (1000 reps): {q:.4}  [{:.1}s]", t0.elapsed().as_secs_f64());
    for (h, expect) in [(2usize, 7.84), (5, 14.2), (8, 20.0)] {
        let t1 = std::time::Instant::now();
        let q = calibrate_adcf_quantile(&noise, 2000, QuantileTarget::SumUpTo(h), &w, 1000, 1, 0.95).unwrap();
        println!("Q_ADCF({h}) 95% quantile: {q:.4} (paper {expect})  [{:.1}s]", t1.elapsed().as_secs_f64());
    }
}

fn n500() {
    use splitfit::adcf::*;
    use splitfit::splitting::*;
    use rayon::prelude::*;
    let noise = NoiseSpec::gaussian(1.0).unwrap();
    let w = WeightMeasure::default_gaussian();
    // raw-noise null quantiles at n=500
    for (h, paper) in [(2usize, 7.84), (5, 14.2), (8, 20.0)] {
        let q = calibrate_adcf_quantile(&noise, 500, QuantileTarget::SumUpTo(h), &w, 1000, 1, 0.95).unwrap();
        println!("raw noise Q_ADCF({h}) 95%: {q:.3} (paper {paper})");
    }
    // half-split AR(1) residual null quantiles at n=500 (phi=0.5)
    let truth = ArmaParams::ar(vec![0.5]).unwrap();
    for (h, paper) in [(2usize, 7.84), (5, 14.2), (8, 20.0)] {
        let stats: Vec<f64> = (0..1000u64).into_par_iter().map(|r| {
            let s = splitfit::models::simulate_arma(&truth, &noise, 500, 1000, 77u64.wrapping_mul(1) ^ r);
            let split = SplitSpec::half(500).unwrap();
            let res = split_residuals(&s.x, ModelKind::Ar{p:1}, split, &FitOptions::default()).unwrap();
            let rep = adcf(&res.z_hat, h, &w).unwrap();
            500.0 * rep.r[..h].iter().sum::<f64>()
        }).collect();
        let mut sorted = stats; sorted.sort_by(|a,b| a.total_cmp(b));
        let q = splitfit::special::empirical_quantile(&sorted, 0.95);
        println!("half-split AR(1) residual Q_ADCF({h}) 95%: {q:.3} (paper crit {paper})");
    }
}

fn limit_check() {
    use splitfit::adcf::*;
    use rayon::prelude::*;
    // Asymptotic (Gaussian noise, N(0,0.5)^2 weight):
    //   E||G||^2 = (1 - 1/sqrt(2))^2 = 0.0857864
    //   T(0)     = 2/sqrt(12) - 4/sqrt(15) + 1/2 = 0.0445544
    //   => mean of n R(h) -> 1.92543
    let noise = NoiseSpec::gaussian(1.0).unwrap();
    let w = WeightMeasure::default_gaussian();
    for n in [500usize, 2000, 8000] {
        let reps: u64 = if n == 8000 { 400 } else { 1000 };
        let vals: Vec<f64> = (0..reps).into_par_iter().map(|r| {
            let z = noise.sample(n, 1000 + r);
            let rep = adcf(&z, 1, &w).unwrap();
            n as f64 * rep.r[0]
        }).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let mut sorted = vals; sorted.sort_by(|a,b| a.total_cmp(b));
        let q95 = splitfit::special::empirical_quantile(&sorted, 0.95);
        println!("n={n:5} reps={reps}: mean n*R(1) = {mean:.4} (limit 1.9254), q95 = {q95:.4} (paper 4.41-4.5)");
    }
}

fn table1() {
    use splitfit::adcf::*;
    use rayon::prelude::*;
    let t0 = std::time::Instant::now();
    let noise = NoiseSpec::gaussian(1.0).unwrap();
    let w = WeightMeasure::default_gaussian();
    // Calibrate Q_ADCF criticals at n=500 under Gaussian noise (one pass).
    let cal_reps = 2000u64;
    let sums: Vec<[f64; 3]> = (0..cal_reps).into_par_iter().map(|r| {
        let z = noise.sample(500, 4242 ^ r);
        let rep = adcf(&z, 8, &w).unwrap();
        let q2: f64 = 500.0 * rep.r[..2].iter().sum::<f64>();
        let q5: f64 = 500.0 * rep.r[..5].iter().sum::<f64>();
        let q8: f64 = 500.0 * rep.r[..8].iter().sum::<f64>();
        [q2, q5, q8]
    }).collect();
    let mut crits = [0.0; 3];
    for i in 0..3 {
        let mut v: Vec<f64> = sums.iter().map(|s| s[i]).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        crits[i] = splitfit::special::empirical_quantile(&v, 0.95);
    }
    println!("calibrated criticals (n=500, {cal_reps} reps): h2={:.3} h5={:.3} h8={:.3}  [{:.0}s]", crits[0], crits[1], crits[2], t0.elapsed().as_secs_f64());

    let phis = [0.2, 0.5, 0.8];
    let cells = [(0.0, 0.0), (0.3, 0.3), (0.3, 0.6)];
    for &phi in &phis {
        for &(a, b) in &cells {
            let cfg = ExperimentConfig {
                label: Some(format!("phi{phi}a{a}b{b}")),
                generator: GeneratorSpec::ArGarch { phi, alpha: a, beta: b, noise: noise.clone(), burn_in: 0, stationary_start: false },
                fit: ModelKind::Ar { p: 1 },
                splits: vec![SplitToken::Named("half".into())],
                statistics: vec![Statistic::QAcf, Statistic::QAdcf, Statistic::QLb],
                lags: vec![2, 5, 8],
                n: 500,
                reps: 500,
                seed: 20260811,
                weight: w,
                critical_values: [(2usize, crits[0]), (5, crits[1]), (8, crits[2])].into_iter().collect(),
                lb_df_adjust: 1,
                fit_options: Default::default(),
                full_scale: None,
            };
            let res = run_experiment(&cfg, 0).unwrap();
            print!("phi={phi} (a,b)=({a},{b}): ");
            for split in &res.splits {
                for t in &split.tests {
                    print!("{}{}={:.1} ", t.test.name(), t.h, t.reject_pct);
                }
            }
            println!();
        }
    }
    println!("total [{:.0}s]", t0.elapsed().as_secs_f64());
}

fn noburn() {
    // paper-literal generator: sigma_1^2 = 1, zero burn-in
    use splitfit::adcf::*;
    use splitfit::splitting::*;
    use splitfit::acf::*;
    use rayon::prelude::*;
    let w = WeightMeasure::default_gaussian();
    let noise = NoiseSpec::gaussian(1.0).unwrap();
    // calibrated criticals from the previous run
    let crits = [(2usize, 7.769), (5, 15.477), (8, 22.826)];
    for (phi, a, b) in [(0.5, 0.3, 0.6), (0.2, 0.3, 0.3), (0.2, 0.3, 0.6)] {
        let n = 500usize;
        let reps = 1000u64;
        let rates: Vec<[f64; 9]> = (0..reps).into_par_iter().map(|r| {
            let mut rng = splitfit::rng::stream_rng(20260811, r);
            // sigma_1^2 = 1, no burn-in, x_0 = 0
            let mut x = vec![0.0; n];
            let mut s2 = 1.0_f64; let mut zprev = 0.0_f64; let mut xprev = 0.0_f64;
            for j in 0..n {
                if j > 0 { s2 = 1.0 + a * zprev * zprev + b * s2; }
                let eps = noise.draw(&mut rng);
                let z = s2.sqrt() * eps;
                x[j] = phi * xprev + z;
                zprev = z; xprev = x[j];
            }
            let split = SplitSpec::half(n).unwrap();
            let res = split_residuals(&x, ModelKind::Ar{p:1}, split, &FitOptions::default()).unwrap();
            let acf = residual_acf(&res.z_hat, 8).unwrap();
            let adcf_rep = adcf(&res.z_hat, 8, &w).unwrap();
            let full = split_residuals(&x, ModelKind::Ar{p:1}, SplitSpec::full(n).unwrap(), &FitOptions::default()).unwrap();
            let lb_acf = residual_acf(&full.z_hat, 8).unwrap();
            let mut out = [0.0; 9];
            for (i, (h, crit)) in crits.iter().enumerate() {
                out[i] = q_acf(&acf, *h).unwrap().reject_5pct as u8 as f64 * 100.0;
                out[3 + i] = q_adcf(&adcf_rep, *h, *crit).unwrap().reject_5pct as u8 as f64 * 100.0;
                out[6 + i] = q_ljung_box(&lb_acf, *h, 1).unwrap().reject_5pct as u8 as f64 * 100.0;
            }
            out
        }).collect();
        let mut mean = [0.0; 9];
        for row in &rates { for i in 0..9 { mean[i] += row[i] / reps as f64; } }
        println!("phi={phi} (a,b)=({a},{b}) NO-BURN: q_acf(2,5,8)=({:.1},{:.1},{:.1}) q_adcf=({:.1},{:.1},{:.1}) q_lb=({:.1},{:.1},{:.1})",
            mean[0], mean[1], mean[2], mean[3], mean[4], mean[5], mean[6], mean[7], mean[8]);
    }
    println!("paper:  phi=0.5 (.3,.6): q_acf=(24.7,34.2,34.1) q_adcf=(98.2,99.9,100.0) q_lb=(19.2,30.1,31.5)");
    println!("paper:  phi=0.2 (.3,.3): q_acf=(14.0,15.3,12.0) q_adcf=(71.2,73.9,74.4) q_lb=(9.3,11.3,10.3)");
    println!("paper:  phi=0.2 (.3,.6): q_acf=(24.8,33.2,35.7) q_adcf=(98.9,99.9,100.0) q_lb=(19.2,29.9,31.7)");
}

fn truth() {
    // High-rep estimates of the borderline acceptance quantities.
    use std::collections::BTreeMap;
    // (1) criterion 2: half-split ARMA(2,1) Laplace Q_ACF(5) size at n=2000.
    let cfg = ExperimentConfig {
        label: Some("c2".into()),
        generator: GeneratorSpec::Arma {
            params: ArmaParams::new(vec![0.8, 0.1], vec![0.3]).unwrap(),
            noise: NoiseSpec::laplace(1.0).unwrap(),
            burn_in: Some(1500),
        },
        fit: ModelKind::Arma { p: 2, q: 1 },
        splits: vec![SplitToken::Named("half".into())],
        statistics: vec![Statistic::QAcf],
        lags: vec![5],
        n: 2000,
        reps: 4000,
        seed: 999_001,
        weight: splitfit::adcf::WeightMeasure::default_gaussian(),
        critical_values: BTreeMap::new(),
        lb_df_adjust: 1,
        fit_options: Default::default(),
        full_scale: None,
    };
    let t0 = std::time::Instant::now();
    let res = run_experiment(&cfg, 0).unwrap();
    println!("criterion-2 size at 4000 reps: {:.2}% (se ~0.35) [{:.0}s]",
        res.splits[0].tests[0].reject_pct, t0.elapsed().as_secs_f64());

    // (2) suspect table cells at 4000 reps, cold-start generator.
    let noise = NoiseSpec::gaussian(1.0).unwrap();
    for (phi, a, b, what) in [
        (0.8, 0.0, 0.0, "sizes phi=0.8 (0,0)"),
        (0.8, 0.3, 0.6, "powers phi=0.8 (.3,.6)"),
    ] {
        let cfg = ExperimentConfig {
            label: Some(what.into()),
            generator: GeneratorSpec::ArGarch { phi, alpha: a, beta: b, noise, burn_in: 0, stationary_start: false },
            fit: ModelKind::Ar { p: 1 },
            splits: vec![SplitToken::Named("half".into())],
            statistics: vec![Statistic::QAcf, Statistic::QLb],
            lags: vec![2, 5, 8],
            n: 500,
            reps: 4000,
            seed: 999_002,
            weight: splitfit::adcf::WeightMeasure::default_gaussian(),
            critical_values: BTreeMap::new(),
            lb_df_adjust: 1,
            fit_options: Default::default(),
            full_scale: None,
        };
        let res = run_experiment(&cfg, 0).unwrap();
        print!("{what}: ");
        for split in &res.splits {
            for t in &split.tests {
                print!("{}{}={:.2} ", t.test.name(), t.h, t.reject_pct);
            }
        }
        println!();
    }
}

fn varband() {
    use std::collections::BTreeMap;
    for (n, reps, noise, label) in [
        (2000usize, 6000usize, NoiseSpec::laplace(1.0).unwrap(), "laplace n=2000"),
        (2000, 6000, NoiseSpec::gaussian(1.0).unwrap(), "gaussian n=2000"),
        (8000, 1500, NoiseSpec::laplace(1.0).unwrap(), "laplace n=8000"),
    ] {
        let cfg = ExperimentConfig {
            label: Some(label.into()),
            generator: GeneratorSpec::Arma {
                params: ArmaParams::new(vec![0.8, 0.1], vec![0.3]).unwrap(),
                noise,
                burn_in: Some(1500),
            },
            fit: ModelKind::Arma { p: 2, q: 1 },
            splits: vec![SplitToken::Named("half".into())],
            statistics: vec![Statistic::Acf],
            lags: vec![1, 2, 3, 4, 5],
            n,
            reps,
            seed: 777_001,
            weight: splitfit::adcf::WeightMeasure::default_gaussian(),
            critical_values: BTreeMap::new(),
            lb_df_adjust: 1,
            fit_options: Default::default(),
            full_scale: None,
        };
        let t0 = std::time::Instant::now();
        let res = run_experiment(&cfg, 0).unwrap();
        let v = &res.splits[0].acf.as_ref().unwrap().var_scaled;
        println!("{label} ({reps} reps): var(sqrt(l) rho) lags 1..5 = {:?} [{:.0}s]",
                 v.iter().map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
                 t0.elapsed().as_secs_f64());
    }
}
