use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use bpinterp::auxiliary::{b_radius, AuxParams, MVariant};
use bpinterp::datagen::{gen_instance, FeatureDistribution, InstanceConfig};
use bpinterp::error::{Error, Result};
use bpinterp::experiments::config::KeyValues;
use bpinterp::experiments::verify::{aux_verify, aux_verify_csv, path_verify, path_verify_csv};
use bpinterp::experiments::{
    csv, run_fig1a, run_fig1b, summarize, summary_csv, theory_rate, write_outputs, Estimator, ExperimentConfig,
    ExperimentRecord, Scale,
};
use bpinterp::interpolators::prediction_error;
use bpinterp::quantiles::t_quantile;

#[derive(Parser, Debug)]
#[command(name = "bpinterp", version, about = "Basis pursuit vs min-ℓ2 interpolation: experiments and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Dimension, or a comma-separated grid for fig1a.
    #[arg(long, global = true)]
    d: Option<String>,
    /// Noise variance, or a comma-separated grid for fig1b.
    #[arg(long, global = true)]
    sigma2: Option<String>,
    /// normal, lognormal, rademacher (comma-separated for fig1a).
    #[arg(long, global = true)]
    dist: Option<String>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// paper or small.
    #[arg(long, global = true)]
    scale: Option<String>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    s: Option<u64>,
    #[arg(long, global = true)]
    draws: Option<usize>,
    #[arg(long, global = true)]
    seeds: Option<usize>,
    #[arg(long, global = true)]
    rho: Option<f64>,
    #[arg(long = "cB", global = true)]
    c_b: Option<f64>,
    /// Sparsity-window width used by aux-verify.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Store measured wall times in the CSV (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// BP error vs log(d/n) across distributions.
    Fig1a,
    /// BP and min-ℓ2 error vs σ².
    Fig1b,
    /// Closed-form path invariants over Gaussian draws.
    PathVerify,
    /// Auxiliary programs over Gaussian draws.
    AuxVerify,
    /// Gaussian quantile t_s and its sandwich bounds.
    Quantile,
    /// Fit BP and min-ℓ2 on one generated instance.
    Solve,
}

/// CLI flags layered over the config file.
struct Settings {
    cli: Cli,
    file: KeyValues,
}

impl Settings {
    fn raw(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.file.raw(key).map(str::to_string))
    }

    fn value<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key),
        }
    }

    fn list<T: FromStr>(&self, key: &str, flag: &Option<String>) -> Result<Option<Vec<T>>> {
        match self.raw(key, flag.clone()) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|item| item.trim().parse().map_err(|_| Error::Parse(format!("--{key}: cannot parse {item:?}"))))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn single<T: FromStr>(&self, key: &str, flag: &Option<String>) -> Result<Option<T>> {
        Ok(match self.list::<T>(key, flag)? {
            None => None,
            Some(mut v) if v.len() == 1 => v.pop(),
            Some(_) => return Err(Error::Parse(format!("--{key} takes a single value here"))),
        })
    }

    fn dists(&self) -> Result<Option<Vec<FeatureDistribution>>> {
        self.list("dist", &self.cli.dist)
    }

    fn out(&self) -> Option<PathBuf> {
        self.cli.out.clone().or_else(|| self.file.raw("out").map(PathBuf::from))
    }

    fn scale(&self) -> Result<Scale> {
        self.raw("scale", self.cli.scale.clone()).map(|s| s.parse()).unwrap_or(Ok(Scale::Small))
    }

    fn threads(&self) -> Result<usize> {
        Ok(self.value("threads", self.cli.threads)?.unwrap_or(0))
    }

    fn seed(&self) -> Result<u64> {
        Ok(self.value("seed", self.cli.seed)?.unwrap_or(0))
    }
}

enum Outcome {
    Ok,
    ChecksFailed,
}

fn emit(text: &str, out: Option<&Path>, file: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(file);
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn experiment(st: &Settings, mut cfg: ExperimentConfig) -> Result<Outcome> {
    if let Some(n) = st.value("n", st.cli.n)? {
        cfg.n = n;
    }
    if let Some(d) = st.list("d", &st.cli.d)? {
        cfg.d_grid = d;
    }
    if let Some(s) = st.list("sigma2", &st.cli.sigma2)? {
        cfg.sigma2_grid = s;
    }
    if let Some(dists) = st.dists()? {
        cfg.dists = dists;
    }
    if let Some(r) = st.value("runs", st.cli.runs)? {
        cfg.runs = r;
    }
    cfg.seed = st.seed()?;
    cfg.threads = st.threads()?;
    cfg.record_wall_time = st.cli.timing || st.file.get::<bool>("timing")?.unwrap_or(false);
    let out = st.out().unwrap_or_else(|| PathBuf::from("out"));
    cfg.out_dir = Some(out.clone());
    let records = match cfg.mode {
        bpinterp::experiments::Mode::Fig1b => run_fig1b(&cfg)?,
        _ => run_fig1a(&cfg)?,
    };
    for path in write_outputs(&cfg, &records, &out)? {
        eprintln!("wrote {}", path.display());
    }
    print!("{}", summary_csv(&summarize(&records)));
    Ok(Outcome::Ok)
}

fn cmd_path_verify(st: &Settings) -> Result<Outcome> {
    let d = st.single("d", &st.cli.d)?.unwrap_or(200);
    let seeds = st.value("seeds", st.cli.seeds)?.unwrap_or(100);
    let rows = path_verify(d, seeds, st.seed()?, 50, st.threads()?)?;
    emit(&path_verify_csv(&rows), st.out().as_deref(), "path_verify.csv")?;
    let failed = rows.iter().filter(|r| !r.pass()).count();
    eprintln!("path-verify: {}/{} draws pass", rows.len() - failed, rows.len());
    Ok(if failed == 0 { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn cmd_aux_verify(st: &Settings) -> Result<Outcome> {
    let n = st.value("n", st.cli.n)?.unwrap_or(100);
    let d = st.single("d", &st.cli.d)?.unwrap_or(5000);
    let sigma2 = st.single("sigma2", &st.cli.sigma2)?.unwrap_or(1.0);
    let draws = st.value("draws", st.cli.draws)?.unwrap_or(50);
    let mut params = AuxParams::new(n, d, sigma2)?;
    if let Some(rho) = st.value("rho", st.cli.rho)? {
        params.rho = rho;
    }
    if let Some(c) = st.value("cB", st.cli.c_b)? {
        params.c_b = c;
    }
    params.b = b_radius(&params, MVariant::ProofSketch)?;
    if let Some(l) = st.value("lambda", st.cli.lambda)? {
        if l != 1.0 {
            eprintln!("note: the window columns always use λ = 1");
        }
    }
    let (rows, summary) = aux_verify(&params, draws, st.seed()?, st.threads()?)?;
    emit(&aux_verify_csv(&rows, &summary), st.out().as_deref(), "aux_verify.csv")?;
    Ok(if summary.pass() { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn cmd_quantile(st: &Settings) -> Result<Outcome> {
    let s = st.value("s", st.cli.s)?.ok_or_else(|| Error::InvalidConfig("quantile needs --s".into()))?;
    let d: u64 = st.single("d", &st.cli.d)?.ok_or_else(|| Error::InvalidConfig("quantile needs --d".into()))?;
    let q = t_quantile(s, d)?;
    let verdict = |b: Option<bool>| match b {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "NA",
    };
    let f = |v: Option<f64>| v.map(csv::fmt_f64).unwrap_or_default();
    let text = format!(
        "s,d,t,t2,t_bar,t_bar2,log_bounds,t_bar_bounds\n{},{},{},{},{},{},{},{}\n",
        s,
        d,
        csv::fmt_f64(q.t),
        csv::fmt_f64(q.t * q.t),
        f(q.t_bar),
        f(q.t_bar.map(|v| v * v)),
        verdict(q.sandwich.map(|v| v.log_bounds)),
        verdict(q.sandwich.map(|v| v.t_bar_bounds)),
    );
    emit(&text, st.out().as_deref(), "quantile.csv")?;
    Ok(if q.sandwich.is_some_and(|v| !(v.log_bounds && v.t_bar_bounds)) { Outcome::ChecksFailed } else { Outcome::Ok })
}

fn cmd_solve(st: &Settings) -> Result<Outcome> {
    let n = st.value("n", st.cli.n)?.unwrap_or(100);
    let d = st.single("d", &st.cli.d)?.unwrap_or(1000);
    let sigma2 = st.single("sigma2", &st.cli.sigma2)?.unwrap_or(1.0);
    let dist = match st.dists()? {
        None => FeatureDistribution::Normal,
        Some(v) if v.len() == 1 => v[0],
        Some(_) => return Err(Error::Parse("--dist takes a single value here".into())),
    };
    let seed = st.seed()?;
    let inst = gen_instance(&InstanceConfig::new(n, d, sigma2, dist, seed, 0))?;
    let mut records = Vec::new();
    for est in [Estimator::BP, Estimator::MinL2] {
        let start = std::time::Instant::now();
        let fit = est.fit(&inst.x, &inst.y)?;
        records.push(ExperimentRecord {
            seed,
            run_index: 0,
            n,
            d,
            sigma2,
            dist,
            estimator: est,
            err_l2sq: prediction_error(&fit.w_hat, &inst.w_star)?,
            l1_norm: fit.l1_norm,
            support_size: fit.support_size,
            theory_rate: theory_rate(n, d, sigma2),
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            status: fit.solver_status.as_str().to_string(),
        });
    }
    emit(&csv::to_csv_string(&records), st.out().as_deref(), "solve.csv")?;
    Ok(Outcome::Ok)
}

fn run(cli: Cli) -> Result<Outcome> {
    let file = match &cli.config {
        Some(p) => KeyValues::load(p)?,
        None => KeyValues::default(),
    };
    let command = cli.command;
    let st = Settings { cli, file };
    match command {
        Command::Fig1a => experiment(&st, ExperimentConfig::fig1a(st.scale()?)),
        Command::Fig1b => experiment(&st, ExperimentConfig::fig1b(st.scale()?)),
        Command::PathVerify => cmd_path_verify(&st),
        Command::AuxVerify => cmd_aux_verify(&st),
        Command::Quantile => cmd_quantile(&st),
        Command::Solve => cmd_solve(&st),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
