//! Implementations of the five subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use splitfit::acf::{
    q_acf, q_acf2, q_ljung_box, residual_acf, squared_residual_acf, AcfReport, TestOutcome,
};
use splitfit::adcf::{
    adcf, calibrate_adcf_quantile, q_adcf, AdcfReport, QuantileTarget, WeightMeasure,
};
use splitfit::error::{Error, Result};
use splitfit::estimators::{fit_ar_ls, fit_arma_pmle, fit_garch_qmle, FitResult, GarchSpace};
use splitfit::harness::{
    emit_many, run_experiment, EmitFormat, ExperimentConfig, ExperimentResult, Statistic,
};
use splitfit::models::{
    default_arma_burn_in, default_garch_burn_in, simulate_arma, simulate_garch, ArmaParams,
    GarchParams, SeriesSample,
};
use splitfit::noise::NoiseSpec;
use splitfit::series_io::{read_series_csv, write_series_csv, write_truth_json};
use splitfit::splitting::{split_residuals, FitOptions, ModelKind, SplitSpec, SplitResiduals};

use crate::{CalibrateArgs, DiagnoseArgs, ExperimentArgs, FitArgs, SimulateArgs};

/// Simulated Q_ADCF critical values for the N(0, 0.5) product weight at
/// the 5% level (Gaussian noise).
const DEFAULT_ADCF_CRITICALS: [(usize, f64); 3] = [(2, 7.84), (5, 14.2), (8, 20.0)];

fn parse_noise(family: &str, variance: f64, df: Option<f64>) -> Result<NoiseSpec> {
    match family {
        "gaussian" | "normal" => NoiseSpec::gaussian(variance),
        "laplace" => NoiseSpec::laplace(variance),
        "student_t" | "student-t" | "t" => {
            let df = df.ok_or_else(|| {
                Error::InvalidArgument("student_t noise needs --df".into())
            })?;
            NoiseSpec::student_t(df, variance)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown noise family '{other}'"
        ))),
    }
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let noise = parse_noise(&args.noise, args.variance, args.df)?;
    let sample: SeriesSample = match args.model.as_str() {
        "ar" | "ma" | "arma" => {
            let params = ArmaParams::new(args.phi.clone(), args.theta.clone())?;
            let burn_in = args.burn_in.unwrap_or_else(|| default_arma_burn_in(&params));
            simulate_arma(&params, &noise, args.n, burn_in, args.seed)
        }
        "garch" => {
            let omega = args
                .omega
                .ok_or_else(|| Error::InvalidArgument("garch model needs --omega".into()))?;
            let params = GarchParams::new(omega, args.alpha.clone(), args.beta.clone())?;
            let burn_in = args
                .burn_in
                .unwrap_or_else(|| default_garch_burn_in(&params));
            simulate_garch(&params, &noise, args.n, burn_in, args.seed)?
        }
        "ar-garch" | "ar_garch" => {
            let scalar = |v: &[f64], name: &str| -> Result<f64> {
                if v.len() != 1 {
                    return Err(Error::InvalidArgument(format!(
                        "ar-garch takes exactly one --{name} value"
                    )));
                }
                Ok(v[0])
            };
            let start = splitfit::harness::ArGarchStart {
                burn_in: args.burn_in.unwrap_or(0),
                stationary_start: false,
            };
            splitfit::harness::generate_ar_garch(
                scalar(&args.phi, "phi")?,
                scalar(&args.alpha, "alpha")?,
                scalar(&args.beta, "beta")?,
                &noise,
                args.n,
                start,
                args.seed,
            )?
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown model '{other}' (expected ar, ma, arma, garch or ar-garch)"
            )))
        }
    };
    write_series_csv(&args.out, &sample.x)?;
    println!("wrote {} observations to {}", sample.x.len(), args.out.display());
    if let Some(path) = args.truth_out {
        let truth = sample
            .truth
            .as_ref()
            .expect("simulators always record truth");
        write_truth_json(&path, truth)?;
        println!("wrote truth sidecar to {}", path.display());
    }
    Ok(())
}

fn run_fit(x: &[f64], model: ModelKind) -> Result<FitResult> {
    match model {
        ModelKind::Ar { p } => fit_ar_ls(x, p),
        ModelKind::Arma { p, q } => fit_arma_pmle(x, p, q, None),
        ModelKind::Garch { p, q } => fit_garch_qmle(x, p, q, &GarchSpace::default()),
    }
}

pub fn fit(args: FitArgs) -> Result<()> {
    let sample = read_series_csv(&args.input)?;
    let model = ModelKind::parse(&args.model)?;
    let result = run_fit(&sample.x, model)?;
    let json = serde_json::to_string_pretty(&result)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    match args.out {
        Some(path) => {
            std::fs::write(&path, format!("{json}\n"))?;
            println!("wrote fit to {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn parse_split(text: &str, n: usize) -> Result<SplitSpec> {
    match text {
        "half" => SplitSpec::half(n),
        "full" => SplitSpec::full(n),
        other => {
            let (f, l) = other.split_once(',').ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "bad split '{other}' (expected half, full or f,l)"
                ))
            })?;
            let f: usize = f.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("bad split component '{f}'"))
            })?;
            let l: usize = l.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("bad split component '{l}'"))
            })?;
            SplitSpec::new(f, l, n)
        }
    }
}

fn parse_weight(text: &str) -> Result<WeightMeasure> {
    let (s, t) = text
        .split_once(',')
        .ok_or_else(|| Error::InvalidArgument(format!("bad weight '{text}' (expected s,t)")))?;
    let s: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad weight variance '{s}'")))?;
    let t: f64 = t
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad weight variance '{t}'")))?;
    WeightMeasure::gaussian_product(s, t)
}

/// Critical values for Q_ADCF: built-in defaults for the default weight,
/// overlaid by --crit-file and --crit pairs.
fn adcf_criticals(args: &DiagnoseArgs, weight: &WeightMeasure) -> Result<BTreeMap<usize, f64>> {
    let mut map = BTreeMap::new();
    if *weight == WeightMeasure::default_gaussian() {
        for (h, v) in DEFAULT_ADCF_CRITICALS {
            map.insert(h, v);
        }
    }
    if let Some(path) = &args.crit_file {
        let text = std::fs::read_to_string(path)?;
        let table: QuantileTable = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for entry in table.quantiles {
            if entry.mode == "sum" {
                map.insert(entry.h, entry.quantile);
            }
        }
    }
    for pair in &args.crit {
        let (h, v) = pair.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("bad --crit pair '{pair}' (expected h=value)"))
        })?;
        let h: usize = h.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("bad --crit lag '{h}'"))
        })?;
        let v: f64 = v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("bad --crit value '{v}'"))
        })?;
        map.insert(h, v);
    }
    Ok(map)
}

#[derive(Serialize)]
struct NamedTest {
    test: String,
    h: usize,
    #[serde(flatten)]
    outcome: TestOutcome,
}

#[derive(Serialize)]
struct DiagnoseReport {
    n: usize,
    model: String,
    split: SplitSpec,
    k_ra: f64,
    k_ov: f64,
    fit: FitResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    acf: Option<AcfReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    acf2: Option<AcfReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adcf: Option<AdcfReport>,
    tests: Vec<NamedTest>,
}

pub fn diagnose(args: DiagnoseArgs, _workers: usize) -> Result<()> {
    let sample = read_series_csv(&args.input)?;
    let n = sample.x.len();
    let model = ModelKind::parse(&args.model)?;
    let split = parse_split(&args.split, n)?;
    let weight = parse_weight(&args.weight)?;
    let stats: Vec<Statistic> = args
        .stats
        .iter()
        .map(|s| Statistic::parse(s))
        .collect::<Result<_>>()?;
    if args.lags.is_empty() {
        return Err(Error::InvalidArgument("no lags given".into()));
    }
    let max_lag = *args.lags.iter().max().unwrap();
    let has = |s: Statistic| stats.contains(&s);

    let res = split_residuals(&sample.x, model, split, &FitOptions::default())?;
    if !res.fit.converged {
        return Err(Error::Estimation(
            "fit did not converge on the analysis split".into(),
        ));
    }
    let (k_ra, k_ov) = split.coefficients();

    let acf_rep = if has(Statistic::Acf) || has(Statistic::QAcf) {
        Some(residual_acf(&res.z_hat, max_lag)?)
    } else {
        None
    };
    let acf2_rep = if has(Statistic::Acf2) || has(Statistic::QAcf2) {
        Some(squared_residual_acf(&res.z_hat, max_lag)?)
    } else {
        None
    };
    let adcf_rep = if has(Statistic::Adcf) || has(Statistic::QAdcf) {
        Some(adcf(&res.z_hat, max_lag, &weight)?)
    } else {
        None
    };

    // Ljung-Box runs on the conventional full-sample residuals.
    let lb_acf: Option<AcfReport> = if has(Statistic::QLb) {
        let full: SplitResiduals = if split == SplitSpec::full(n)? {
            res.clone()
        } else {
            split_residuals(&sample.x, model, SplitSpec::full(n)?, &FitOptions::default())?
        };
        Some(residual_acf(&full.z_hat, max_lag)?)
    } else {
        None
    };

    let criticals = adcf_criticals(&args, &weight)?;
    let mut tests: Vec<NamedTest> = Vec::new();
    for &h in &args.lags {
        if has(Statistic::QAcf) {
            tests.push(NamedTest {
                test: "q_acf".into(),
                h,
                outcome: q_acf(acf_rep.as_ref().unwrap(), h)?,
            });
        }
        if has(Statistic::QAcf2) {
            tests.push(NamedTest {
                test: "q_acf2".into(),
                h,
                outcome: q_acf2(acf2_rep.as_ref().unwrap(), h)?,
            });
        }
        if has(Statistic::QAdcf) {
            let crit = *criticals.get(&h).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "no Q_ADCF critical value for lag {h}; pass --crit {h}=... or run calibrate"
                ))
            })?;
            tests.push(NamedTest {
                test: "q_adcf".into(),
                h,
                outcome: q_adcf(adcf_rep.as_ref().unwrap(), h, crit)?,
            });
        }
        if has(Statistic::QLb) {
            tests.push(NamedTest {
                test: "q_lb".into(),
                h,
                outcome: q_ljung_box(lb_acf.as_ref().unwrap(), h, args.lb_df_adjust)?,
            });
        }
    }

    // Human summary.
    println!("series: {} (n = {n})", args.input.display());
    println!(
        "model:  {} estimate {:?} converged {}",
        args.model,
        res.fit.estimate.as_vec(),
        res.fit.converged
    );
    println!(
        "split:  f={}, l={} (k_ra = {:.4}, k_ov = {:.4})",
        split.f(),
        split.l(),
        k_ra,
        k_ov
    );
    if (k_ra - 2.0 * k_ov).abs() > 0.05 && tests.iter().any(|t| t.test != "q_lb") {
        println!(
            "note:   calibrations assume the half-split regime k_ra = 2 k_ov; \
             this split has k_ra - 2 k_ov = {:.4}",
            k_ra - 2.0 * k_ov
        );
    }
    for t in &tests {
        let verdict = if t.outcome.reject_5pct { "REJECT" } else { "PASS" };
        let p = t
            .outcome
            .p_value
            .map(|p| format!(" p {p:.4}"))
            .unwrap_or_default();
        println!(
            "{:<7} h={:<3} statistic {:>10.4}  critical {:>8.4}{}  {}",
            t.test,
            t.h,
            t.outcome.statistic,
            match t.test.as_str() {
                "q_adcf" => t.outcome.df_or_quantile,
                _ => splitfit::special::chi2_quantile(0.95, t.outcome.df_or_quantile)?,
            },
            p,
            verdict
        );
    }

    if let Some(prefix) = &args.out {
        let stem = prefix.to_string_lossy();
        match args.format.as_str() {
            "csv" => {
                if let Some(rep) = &acf_rep {
                    write_report_csv(&format!("{stem}_acf.csv"), |w| rep.write_csv(w))?;
                }
                if let Some(rep) = &acf2_rep {
                    write_report_csv(&format!("{stem}_acf2.csv"), |w| rep.write_csv(w))?;
                }
                if let Some(rep) = &adcf_rep {
                    write_report_csv(&format!("{stem}_adcf.csv"), |w| rep.write_csv(w))?;
                }
            }
            "json" => {
                let report = DiagnoseReport {
                    n,
                    model: args.model.clone(),
                    split,
                    k_ra,
                    k_ov,
                    fit: res.fit.clone(),
                    acf: acf_rep,
                    acf2: acf2_rep,
                    adcf: adcf_rep,
                    tests,
                };
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                std::fs::write(format!("{stem}.json"), format!("{json}\n"))?;
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown format '{other}' (expected csv or json)"
                )))
            }
        }
        println!("reports written under prefix {stem}");
    }
    Ok(())
}

fn write_report_csv(
    path: &str,
    write: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write(&mut w)?;
    Ok(())
}

fn default_level() -> f64 {
    0.95
}

fn default_mode() -> String {
    "sum".into()
}

#[derive(Deserialize)]
struct CalibrateConfig {
    noise: NoiseSpec,
    n: usize,
    #[serde(default = "WeightMeasure::default_gaussian")]
    weight: WeightMeasure,
    reps: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_level")]
    level: f64,
    lags: Vec<usize>,
    /// "sum" for the Q_ADCF sum form, "lag" for single-lag n*R(h).
    #[serde(default = "default_mode")]
    mode: String,
}

#[derive(Serialize, Deserialize)]
pub struct QuantileEntry {
    pub h: usize,
    pub mode: String,
    pub level: f64,
    pub quantile: f64,
}

#[derive(Serialize, Deserialize)]
pub struct QuantileTable {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub weight: WeightMeasure,
    pub quantiles: Vec<QuantileEntry>,
}

pub fn calibrate(args: CalibrateArgs, workers: usize) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg: CalibrateConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let make_target = |h: usize| -> Result<QuantileTarget> {
        match cfg.mode.as_str() {
            "sum" => Ok(QuantileTarget::SumUpTo(h)),
            "lag" => Ok(QuantileTarget::Lag(h)),
            other => Err(Error::Config(format!(
                "unknown calibration mode '{other}' (expected sum or lag)"
            ))),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut quantiles = Vec::new();
    for &h in &cfg.lags {
        let target = make_target(h)?;
        let q = pool.install(|| {
            calibrate_adcf_quantile(
                &cfg.noise, cfg.n, target, &cfg.weight, cfg.reps, cfg.seed, cfg.level,
            )
        })?;
        quantiles.push(QuantileEntry {
            h,
            mode: cfg.mode.clone(),
            level: cfg.level,
            quantile: q,
        });
        eprintln!("h = {h}: {} quantile = {q:.4}", cfg.level);
    }
    let table = QuantileTable {
        n: cfg.n,
        reps: cfg.reps,
        seed: cfg.seed,
        weight: cfg.weight,
        quantiles,
    };
    let json = serde_json::to_string_pretty(&table)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    match args.out {
        Some(path) => {
            std::fs::write(&path, format!("{json}\n"))?;
            println!("wrote quantile table to {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

pub fn experiment(args: ExperimentArgs, workers: usize) -> Result<()> {
    let format = match args.format.as_str() {
        "csv" => EmitFormat::Csv,
        "json" => EmitFormat::Json,
        "both" => EmitFormat::Both,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown format '{other}' (expected csv, json or both)"
            )))
        }
    };
    let full_scale = match args.scale.as_str() {
        "desk" => false,
        "full" => true,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown scale '{other}' (expected desk or full)"
            )))
        }
    };
    let mut results: Vec<ExperimentResult> = Vec::new();
    for path in &args.config {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if full_scale {
            cfg.apply_full_scale();
        }
        let started = std::time::Instant::now();
        let result = run_experiment(&cfg, workers)?;
        eprintln!(
            "{}: {} reps in {:.1}s ({} excluded)",
            result.label,
            cfg.reps,
            started.elapsed().as_secs_f64(),
            result.metadata.excluded_reps
        );
        results.push(result);
    }
    let written = emit_many(&results, format, Path::new(&args.out))?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
