//! File-level plumbing behind the `opo-cmdp` binary: config parsing, CSV and
//! summary writers, the SVG plot and the four subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use opo_cmdp::harness::{
    azuma_gap_check, baseline_known_model, baseline_uniform, concentration_check, expected_regret, lemma_suite,
    loglog_slope, pseudo_regret, regret_bound, run_experiment, AzumaCheck, ConcentrationCheck, ExperimentConfig, Run,
    RunRecord, SuiteResult,
};
use rayon::prelude::*;

pub const METRICS_HEADER: &str = "episode,context,realized_value,optimal_value,regret_increment,cum_regret,\
expected_regret_increment,cum_expected_regret,loss_estimator_idx,dyn_estimator_idx,bonus_mass,sq_err_diag,\
hellinger_diag";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Suite(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Suite(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<opo_cmdp::Error> for CliError {
    fn from(e: opo_cmdp::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Reads and validates a JSON config; missing optional keys take their
/// defaults.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn float(out: &mut String, x: f64) {
    write!(out, ",{x:.16e}").unwrap();
}

fn index(out: &mut String, i: Option<usize>) {
    match i {
        Some(i) => write!(out, ",{i}").unwrap(),
        None => out.push(','),
    }
}

/// Header plus one row per record; floats carry 17 significant digits.
pub fn metrics_csv(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(256 * (records.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in records {
        write!(out, "{},{}", r.episode, r.context).unwrap();
        for x in [r.realized_value, r.optimal_value, r.regret_increment, r.cum_regret] {
            float(&mut out, x);
        }
        for x in [r.expected_regret_increment, r.cum_expected_regret] {
            float(&mut out, x);
        }
        index(&mut out, r.loss_estimator);
        index(&mut out, r.dyn_estimator);
        for x in [r.bonus_mass, r.sq_err_diag, r.hellinger_diag] {
            float(&mut out, x);
        }
        out.push('\n');
    }
    out
}

/// A learner run with its baselines and every check the summary reports.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: Run,
    pub uniform: Vec<RunRecord>,
    pub known_model: Vec<RunRecord>,
    pub suite: SuiteResult,
    pub concentration: ConcentrationCheck,
    pub azuma: AzumaCheck,
    pub slope: Option<f64>,
    pub bound: f64,
}

impl RunOutcome {
    /// Lemma suites and oracle concentration. The Azuma gap holds only with
    /// probability `1 − δ/4` and is reported without failing the run.
    pub fn passed(&self) -> bool {
        self.suite.passed() && self.concentration.holds()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut failed: Vec<String> = self
            .suite
            .reports()
            .iter()
            .filter(|r| !r.passed())
            .map(|r| format!("{} ({} of {} checks violated)", r.name, r.violations, r.checks))
            .collect();
        if !self.concentration.holds() {
            failed.push("oracle concentration".to_string());
        }
        failed
    }
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let run = run_experiment(config)?;
    let uniform = baseline_uniform(config)?;
    let known_model = baseline_known_model(config)?;
    let suite = lemma_suite(&run)?;
    let concentration = concentration_check(config, &run.records)?;
    let azuma = azuma_gap_check(&run.records, config.horizon, config.delta)?;
    let cumulative: Vec<f64> = run.records.iter().map(|r| r.cum_regret).collect();
    Ok(RunOutcome {
        slope: loglog_slope(&cumulative),
        bound: regret_bound(config)?,
        run,
        uniform,
        known_model,
        suite,
        concentration,
        azuma,
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn summary_text(outcome: &RunOutcome) -> String {
    let config = &outcome.run.config;
    let records = &outcome.run.records;
    let mut s = String::new();
    writeln!(s, "episodes              {}", config.episodes).unwrap();
    writeln!(s, "seed                  {}", config.seed).unwrap();
    writeln!(s, "bonus_scale           {}", config.bonus_scale).unwrap();
    writeln!(s, "pseudo_regret         {:.6}", pseudo_regret(records).unwrap_or(0.0)).unwrap();
    writeln!(s, "expected_regret       {:.6}", expected_regret(records).unwrap_or(0.0)).unwrap();
    writeln!(s, "uniform_regret        {:.6}", pseudo_regret(&outcome.uniform).unwrap_or(0.0)).unwrap();
    writeln!(s, "known_model_regret    {:.6}", pseudo_regret(&outcome.known_model).unwrap_or(0.0)).unwrap();
    match outcome.slope {
        Some(slope) => writeln!(s, "loglog_slope          {slope:.4}").unwrap(),
        None => writeln!(s, "loglog_slope          n/a").unwrap(),
    }
    writeln!(s, "regret_bound          {:.6e}", outcome.bound).unwrap();
    writeln!(
        s,
        "azuma                 {} (gap {:.6} <= {:.6})",
        verdict(outcome.azuma.holds()),
        outcome.azuma.gap,
        outcome.azuma.bound
    )
    .unwrap();
    let c = &outcome.concentration;
    writeln!(
        s,
        "concentration         {} (sq_err {:.6} <= {:.6}, hellinger {:.6} <= {:.6})",
        verdict(c.holds()),
        c.max_sq_err,
        c.sq_err_bound,
        c.max_hellinger,
        c.hellinger_bound
    )
    .unwrap();
    for report in outcome.suite.reports() {
        writeln!(
            s,
            "{:<22}{} ({} checks, {} violations, worst slack {:.6e})",
            report.name,
            verdict(report.passed()),
            report.checks,
            report.violations,
            report.worst_slack
        )
        .unwrap();
    }
    writeln!(s, "suites                {}", verdict(outcome.passed())).unwrap();
    s
}

/// Static line chart of cumulative regret curves, one `(label, colour,
/// values)` triple per series.
pub fn regret_svg(series: &[(&str, &str, Vec<f64>)]) -> String {
    let (width, height, margin) = (720.0, 440.0, 60.0);
    let n = series.iter().map(|s| s.2.len()).max().unwrap_or(0).max(2);
    let top = series
        .iter()
        .flat_map(|s| s.2.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let x = |i: usize| margin + (width - 2.0 * margin) * i as f64 / (n - 1) as f64;
    let y = |v: f64| height - margin - (height - 2.0 * margin) * v / top;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = margin,
        b = height - margin,
        r = width - margin
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">episode (1 to {})</text>"#,
        width / 2.0,
        height - margin / 3.0,
        n
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">cumulative regret (max {:.3})</text>"#,
        margin,
        margin - 12.0,
        top
    )
    .unwrap();

    // Thin long series to about one point per horizontal pixel.
    let stride = (n / 1000).max(1);
    for (k, (label, colour, values)) in series.iter().enumerate() {
        let mut points = String::new();
        for (i, v) in values.iter().enumerate() {
            if i % stride == 0 || i + 1 == values.len() {
                write!(points, "{:.2},{:.2} ", x(i), y(*v)).unwrap();
            }
        }
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            points.trim_end()
        )
        .unwrap();
        let ly = margin + 16.0 * k as f64;
        writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="12" fill="{colour}">{label}</text>"#,
            width - margin - 130.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn cumulative(records: &[RunRecord]) -> Vec<f64> {
    records.iter().map(|r| r.cum_regret).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_error(path))
}

/// Runs one experiment and writes `metrics.csv`, `summary.txt`,
/// `config.json` and, with `plot`, `regret.svg` into `out`.
///
/// Files are written before the suite verdict, so a failing run still
/// leaves its metrics behind.
pub fn cmd_run(config: &ExperimentConfig, out: &Path, plot: bool) -> Result<RunOutcome, CliError> {
    let outcome = execute(config)?;
    fs::create_dir_all(out).map_err(io_error(out))?;
    write_file(&out.join("metrics.csv"), &metrics_csv(&outcome.run.records))?;
    write_file(&out.join("summary.txt"), &summary_text(&outcome))?;
    let resolved = serde_json::to_string_pretty(config).expect("config serializes");
    write_file(&out.join("config.json"), &(resolved + "\n"))?;
    if plot {
        let svg = regret_svg(&[
            ("OPO-CMDP", "#1f77b4", cumulative(&outcome.run.records)),
            ("uniform", "#d62728", cumulative(&outcome.uniform)),
            ("known model", "#2ca02c", cumulative(&outcome.known_model)),
        ]);
        write_file(&out.join("regret.svg"), &svg)?;
    }
    if outcome.passed() {
        Ok(outcome)
    } else {
        Err(CliError::Suite(outcome.failures().join(", ")))
    }
}

/// Parses a comma-separated seed list such as `1,2,7`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| CliError::Config(format!("seeds: invalid seed {s:?}: {e}")))
        })
        .collect()
}

/// One `cmd_run` per seed, in parallel, into `out/seed-<n>/`. Returns the
/// per-seed results in the order of `seeds`.
pub fn cmd_sweep(
    config: &ExperimentConfig,
    seeds: &[u64],
    out: &Path,
    plot: bool,
) -> Vec<(u64, Result<RunOutcome, CliError>)> {
    seeds
        .par_iter()
        .map(|&seed| {
            let config = ExperimentConfig { seed, ..config.clone() };
            (seed, cmd_run(&config, &out.join(format!("seed-{seed}")), plot))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub metrics_match: bool,
    pub suite: SuiteResult,
    pub concentration: ConcentrationCheck,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.metrics_match && self.suite.passed() && self.concentration.holds()
    }
}

/// Reruns the experiment recorded in `dir` (from `dir/config.json` unless a
/// config is given), checks that it reproduces `metrics.csv` byte for byte,
/// and reruns the lemma suite and concentration checks.
pub fn cmd_verify(dir: &Path, config: Option<ExperimentConfig>) -> Result<VerifyOutcome, CliError> {
    let config = match config {
        Some(c) => c,
        None => parse_config(&dir.join("config.json"))?,
    };
    let metrics_path = dir.join("metrics.csv");
    let recorded = fs::read_to_string(&metrics_path).map_err(io_error(&metrics_path))?;
    let run: Run = run_experiment(&config)?;
    let outcome = VerifyOutcome {
        metrics_match: metrics_csv(&run.records) == recorded,
        suite: lemma_suite(&run)?,
        concentration: concentration_check(&config, &run.records)?,
    };
    if outcome.passed() {
        Ok(outcome)
    } else {
        let mut failed = Vec::new();
        if !outcome.metrics_match {
            failed.push("metrics.csv does not match a fresh run".to_string());
        }
        failed.extend(outcome.suite.reports().iter().filter(|r| !r.passed()).map(|r| r.name.clone()));
        if !outcome.concentration.holds() {
            failed.push("oracle concentration".to_string());
        }
        Err(CliError::Suite(failed.join(", ")))
    }
}

pub fn cmd_bound(config: &ExperimentConfig) -> Result<f64, CliError> {
    Ok(regret_bound(config)?)
}
