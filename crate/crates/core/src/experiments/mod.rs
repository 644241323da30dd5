//! Monte-Carlo harness: repeated trials of basis pursuit and min-ℓ2
//! interpolation over a grid of dimensions or noise levels, CSV/SVG output,
//! and the path/auxiliary verification sweeps behind the CLI.
//!
//! Trials run in a rayon pool; results are collected in key order, so the
//! CSV output does not depend on the number of threads.

pub mod config;
pub mod csv;
pub mod svg;
pub mod verify;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::datagen::{gen_instance, FeatureDistribution, InstanceConfig};
use crate::error::{Error, Result};
use crate::interpolators::{basis_pursuit, min_l2_interpolator, prediction_error, InterpolatorResult};
use svg::{PlotStyle, Series, SeriesPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    BP,
    MinL2,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::BP => "BP",
            Estimator::MinL2 => "MinL2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "BP" => Some(Estimator::BP),
            "MinL2" => Some(Estimator::MinL2),
            _ => None,
        }
    }

    pub fn fit(self, x: &crate::optim::Matrix, y: &[f64]) -> Result<InterpolatorResult> {
        match self {
            Estimator::BP => basis_pursuit(x, y),
            Estimator::MinL2 => min_l2_interpolator(x, y),
        }
    }
}

/// One trial of one estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub run_index: u64,
    pub n: usize,
    pub d: usize,
    pub sigma2: f64,
    pub dist: FeatureDistribution,
    pub estimator: Estimator,
    pub err_l2sq: f64,
    pub l1_norm: f64,
    pub support_size: usize,
    pub theory_rate: f64,
    pub wall_time_ms: f64,
    /// Solver status, or the error for failed trials.
    pub status: String,
}

pub fn theory_rate(n: usize, d: usize, sigma2: f64) -> f64 {
    sigma2 / (d as f64 / n as f64).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Fig1a,
    Fig1b,
    Custom,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Fig1a => "fig1a",
            Mode::Fig1b => "fig1b",
            Mode::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Small,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Scale::Paper),
            "small" => Ok(Scale::Small),
            other => Err(Error::Parse(format!("unknown scale '{other}' (expected paper or small)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n: usize,
    pub d_grid: Vec<usize>,
    pub sigma2_grid: Vec<f64>,
    pub dists: Vec<FeatureDistribution>,
    pub estimators: Vec<Estimator>,
    pub runs: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// `0` lets rayon pick.
    pub threads: usize,
    /// Store measured wall time; otherwise `wall_time_ms` is 0 and the CSV
    /// is reproducible byte for byte.
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn fig1a(scale: Scale) -> Self {
        let (n, d_grid, runs) = match scale {
            Scale::Paper => (400, vec![1000, 2000, 5000, 10000, 20000], 20),
            Scale::Small => (100, vec![1000, 3000, 8000], 10),
        };
        Self {
            mode: Mode::Fig1a,
            n,
            d_grid,
            sigma2_grid: vec![1.0],
            dists: FeatureDistribution::ALL.to_vec(),
            estimators: vec![Estimator::BP],
            runs,
            seed: 0,
            out_dir: None,
            threads: 0,
            record_wall_time: false,
        }
    }

    pub fn fig1b(scale: Scale) -> Self {
        let (n, d, sigma2_grid, runs) = match scale {
            Scale::Paper => (400, 20000, vec![0.25, 0.5, 1.0, 2.0, 4.0], 20),
            Scale::Small => (100, 5000, vec![0.25, 1.0, 4.0], 10),
        };
        Self {
            mode: Mode::Fig1b,
            n,
            d_grid: vec![d],
            sigma2_grid,
            dists: vec![FeatureDistribution::Normal],
            estimators: vec![Estimator::BP, Estimator::MinL2],
            runs,
            seed: 0,
            out_dir: None,
            threads: 0,
            record_wall_time: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.runs == 0 {
            return bad("runs must be ≥ 1");
        }
        if self.n == 0 {
            return bad("n must be ≥ 1");
        }
        if self.d_grid.is_empty() || self.sigma2_grid.is_empty() || self.dists.is_empty() || self.estimators.is_empty() {
            return bad("grids, distributions and estimators must be nonempty");
        }
        if !self.d_grid.windows(2).all(|w| w[0] < w[1]) {
            return bad("d grid must be strictly increasing");
        }
        if !self.sigma2_grid.windows(2).all(|w| w[0] < w[1]) {
            return bad("sigma2 grid must be strictly increasing");
        }
        if self.d_grid[0] < self.n {
            return bad("every d must be ≥ n");
        }
        if self.sigma2_grid.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
            return bad("sigma2 values must be finite and ≥ 0");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct TrialKey {
    dist: FeatureDistribution,
    d: usize,
    sigma2: f64,
    run: u64,
}

fn trial(cfg: &ExperimentConfig, key: TrialKey) -> Vec<ExperimentRecord> {
    let icfg = InstanceConfig::new(cfg.n, key.d, key.sigma2, key.dist, cfg.seed, key.run);
    let rate = theory_rate(cfg.n, key.d, key.sigma2);
    let base = |estimator| ExperimentRecord {
        seed: cfg.seed,
        run_index: key.run,
        n: cfg.n,
        d: key.d,
        sigma2: key.sigma2,
        dist: key.dist,
        estimator,
        err_l2sq: f64::NAN,
        l1_norm: f64::NAN,
        support_size: 0,
        theory_rate: rate,
        wall_time_ms: 0.0,
        status: String::new(),
    };
    let inst = match gen_instance(&icfg) {
        Ok(i) => i,
        Err(e) => {
            return cfg
                .estimators
                .iter()
                .map(|&est| ExperimentRecord { status: error_status(&e), ..base(est) })
                .collect()
        }
    };
    cfg.estimators
        .iter()
        .map(|&est| {
            let start = Instant::now();
            let fit = est.fit(&inst.x, &inst.y);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let mut rec = base(est);
            if cfg.record_wall_time {
                rec.wall_time_ms = elapsed;
            }
            match fit {
                Ok(r) => {
                    rec.err_l2sq = prediction_error(&r.w_hat, &inst.w_star).unwrap_or(f64::NAN);
                    rec.l1_norm = r.l1_norm;
                    rec.support_size = r.support_size;
                    rec.status = r.solver_status.as_str().to_string();
                }
                Err(e) => rec.status = error_status(&e),
            }
            rec
        })
        .collect()
}

fn error_status(e: &Error) -> String {
    match e {
        Error::Lp(s) => s.as_str().to_string(),
        Error::NotPositiveDefinite { .. } => "NotPositiveDefinite".into(),
        _ => "Error".into(),
    }
}

pub(crate) fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every `(dist, d, σ², run)` combination of the config, in that key order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let mut keys = Vec::new();
    for &dist in &cfg.dists {
        for &d in &cfg.d_grid {
            for &sigma2 in &cfg.sigma2_grid {
                for run in 0..cfg.runs as u64 {
                    keys.push(TrialKey { dist, d, sigma2, run });
                }
            }
        }
    }
    let nested: Vec<Vec<ExperimentRecord>> = with_pool(cfg.threads, || keys.par_iter().map(|&k| trial(cfg, k)).collect())?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn run_fig1a(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.mode != Mode::Fig1a {
        return Err(Error::InvalidConfig("run_fig1a needs mode fig1a".into()));
    }
    run_trials(cfg)
}

pub fn run_fig1b(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.mode != Mode::Fig1b {
        return Err(Error::InvalidConfig("run_fig1b needs mode fig1b".into()));
    }
    run_trials(cfg)
}

/// Mean and sample standard deviation of the error for one grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub dist: FeatureDistribution,
    pub estimator: Estimator,
    pub n: usize,
    pub d: usize,
    pub sigma2: f64,
    /// Trials with a finite error.
    pub runs: usize,
    pub failed: usize,
    pub mean_err: f64,
    pub std_err: f64,
    pub theory_rate: f64,
}

pub fn summarize(records: &[ExperimentRecord]) -> Vec<GroupSummary> {
    let mut groups: Vec<GroupSummary> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for r in records {
        let pos = groups.iter().position(|g| {
            g.dist == r.dist && g.estimator == r.estimator && g.d == r.d && g.sigma2 == r.sigma2 && g.n == r.n
        });
        let idx = pos.unwrap_or_else(|| {
            groups.push(GroupSummary {
                dist: r.dist,
                estimator: r.estimator,
                n: r.n,
                d: r.d,
                sigma2: r.sigma2,
                runs: 0,
                failed: 0,
                mean_err: f64::NAN,
                std_err: f64::NAN,
                theory_rate: r.theory_rate,
            });
            values.push(Vec::new());
            groups.len() - 1
        });
        if r.err_l2sq.is_finite() {
            values[idx].push(r.err_l2sq);
        } else {
            groups[idx].failed += 1;
        }
    }
    for (g, v) in groups.iter_mut().zip(&values) {
        g.runs = v.len();
        if !v.is_empty() {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            g.mean_err = mean;
            g.std_err = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
        }
    }
    groups
}

pub fn summary_csv(groups: &[GroupSummary]) -> String {
    let mut out = String::from("dist,estimator,n,d,sigma2,runs,failed,mean_err,std_err,theory_rate\n");
    for g in groups {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            g.dist.name(),
            g.estimator.name(),
            g.n,
            g.d,
            csv::fmt_f64(g.sigma2),
            g.runs,
            g.failed,
            csv::fmt_f64(g.mean_err),
            csv::fmt_f64(g.std_err),
            csv::fmt_f64(g.theory_rate),
        ));
    }
    out
}

/// Least-squares slope of `y` on `x` (with intercept).
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Number of increases along a sequence that should be non-increasing.
pub fn inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

fn plot(cfg: &ExperimentConfig, groups: &[GroupSummary]) -> (Vec<Series>, PlotStyle) {
    match cfg.mode {
        Mode::Fig1b => {
            let d = cfg.d_grid[0];
            let series = cfg
                .estimators
                .iter()
                .map(|&est| Series {
                    label: est.name().to_string(),
                    points: groups
                        .iter()
                        .filter(|g| g.estimator == est)
                        .map(|g| SeriesPoint { x: g.sigma2, y: g.mean_err, spread: Some(g.std_err) })
                        .collect(),
                })
                .collect();
            let lo = cfg.sigma2_grid[0];
            let hi = *cfg.sigma2_grid.last().unwrap_or(&lo);
            let trend = Series {
                label: "σ²/log(d/n)".into(),
                points: [lo, hi]
                    .iter()
                    .map(|&s| SeriesPoint { x: s, y: theory_rate(cfg.n, d, s), spread: None })
                    .collect(),
            };
            let style = PlotStyle {
                title: format!("Prediction error vs σ² (n={}, d={d})", cfg.n),
                x_label: "σ²".into(),
                y_label: "‖ŵ − w*‖²".into(),
                trend: Some(trend),
                band: true,
            };
            (series, style)
        }
        _ => {
            let estimator = cfg.estimators[0];
            let x = |d: usize| (d as f64 / cfg.n as f64).ln();
            let series = cfg
                .dists
                .iter()
                .map(|&dist| Series {
                    label: dist.name().to_string(),
                    points: groups
                        .iter()
                        .filter(|g| g.dist == dist && g.estimator == estimator)
                        .map(|g| SeriesPoint { x: x(g.d), y: g.mean_err, spread: Some(g.std_err) })
                        .collect(),
                })
                .collect();
            let sigma2 = cfg.sigma2_grid[0];
            let (x0, x1) = (x(cfg.d_grid[0]), x(*cfg.d_grid.last().unwrap_or(&cfg.d_grid[0])));
            let trend = Series {
                label: "σ²/log(d/n)".into(),
                points: (0..=40)
                    .map(|i| {
                        let xv = x0 + (x1 - x0) * i as f64 / 40.0;
                        SeriesPoint { x: xv, y: sigma2 / xv, spread: None }
                    })
                    .collect(),
            };
            let style = PlotStyle {
                title: format!("{} prediction error vs log(d/n) (n={}, σ²={sigma2})", estimator.name(), cfg.n),
                x_label: "log(d/n)".into(),
                y_label: "‖ŵ − w*‖²".into(),
                trend: Some(trend),
                band: false,
            };
            (series, style)
        }
    }
}

/// Writes `<mode>_records.csv`, `<mode>_summary.csv` and `<mode>.svg` into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, records: &[ExperimentRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let stem = cfg.mode.name();
    let groups = summarize(records);
    let rec_path = dir.join(format!("{stem}_records.csv"));
    csv::write_csv(records, &rec_path)?;
    let sum_path = dir.join(format!("{stem}_summary.csv"));
    std::fs::write(&sum_path, summary_csv(&groups))?;
    let mut paths = vec![rec_path, sum_path];
    let (series, style) = plot(cfg, &groups);
    let svg_path = dir.join(format!("{stem}.svg"));
    match svg::render_svg(&series, &svg_path, &style) {
        Ok(()) => paths.push(svg_path),
        // A one-point grid has nothing to plot against.
        Err(Error::DegenerateAxis) => {}
        Err(e) => return Err(e),
    }
    Ok(paths)
}
