//! Command-line front end. Every number it prints comes straight from a
//! library call.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use scanmax_core::{
    brownian_grid_sup, constant_h, darling_erdos_max, erdos_renyi_window, evr_value,
    excursion_tail_rect_grid, normalization, pickands_f, scan_max_naive, scan_max_pruned,
    spitzer_p_inf, HMethod, RateTableEntry, RegionRect, SamplePath, SpitzerParams, Theorem,
    CONSTANTS_TOL,
};

use crate::error::{Error, Result};
use crate::formats::{
    read_increments, write_text, EnsembleSection, ExperimentManifest, Metadata, OracleSection,
    OutputRecord, OutputSection, SamplesFile, ToleranceSection,
};
use crate::harness::{
    gumbel_ks, mc_p_inf, mc_pickands_f, mc_tail_exceedance, run_ensemble, ScanEngine,
};

#[derive(Debug, Parser)]
#[command(
    name = "scanmax",
    version,
    about = "Extreme values of standardized Gaussian increments"
)]
pub struct Cli {
    /// Worker threads for ensembles and oracles (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate H, p_inf(a), F(a) and the normalizing constants.
    Constants(ConstantsArgs),
    /// Run an ensemble and write a samples CSV.
    Simulate(SimulateArgs),
    /// KS distance of a samples CSV to the Gumbel law.
    Gof(GofArgs),
    /// Monte Carlo oracle for p_inf, F or a grid tail probability.
    Oracle(OracleArgs),
    /// Scan statistic of a CSV of increments.
    Scan(ScanArgs),
    /// Extreme-value rate table evaluated at n.
    Rates(RatesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatArg {
    #[value(alias = "MAIN_DISCRETE", alias = "main")]
    MainDiscrete,
    #[value(alias = "ERDOS_RENYI")]
    ErdosRenyi,
    #[value(alias = "DARLING_ERDOS")]
    DarlingErdos,
    #[value(alias = "BROWNIAN")]
    Brownian,
}

impl StatArg {
    fn tag(self) -> &'static str {
        match self {
            StatArg::MainDiscrete => "MAIN_DISCRETE",
            StatArg::ErdosRenyi => "ERDOS_RENYI",
            StatArg::DarlingErdos => "DARLING_ERDOS",
            StatArg::Brownian => "BROWNIAN",
        }
    }
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Absolute tolerance for H, p_inf and F.
    #[arg(long, default_value_t = CONSTANTS_TOL)]
    pub tol: f64,
    /// Window constant for the Erdős–Rényi normalization.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML manifest; when absent the ensemble is built from flags.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub stat: Option<StatArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub oversample: Option<usize>,
    /// Fail (exit 4) if the KS distance to Gumbel exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Use the quadratic reference scanner instead of the pruned one.
    #[arg(long)]
    pub naive: bool,
    /// Overrides the manifest's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Fail (exit 4) if the KS distance exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    PInf,
    Pickands,
    Tail,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub kind: OracleKind,
    /// Grid parameter a (p-inf, pickands).
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    /// Walk length for p-inf [default: 10000].
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Time horizon T for pickands [default: 200].
    #[arg(long)]
    pub t: Option<f64>,
    /// Level u for tail.
    #[arg(long, default_value_t = 3.5)]
    pub u: f64,
    /// Region x_lo,x_hi,y_lo,y_hi for tail.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [0.0, 1.0, 1.0, 2.0])]
    pub region: Vec<f64>,
    /// Mesh points per unit time for tail.
    #[arg(long, default_value_t = 256)]
    pub steps_per_unit: usize,
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
    /// Master seed [default: the manifest's, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Manifest supplying `[oracle]` settings and the master seed.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Tolerance of the analytic reference value.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Increments, one per line, optional header.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = StatArg::MainDiscrete)]
    pub stat: StatArg,
    #[arg(long)]
    pub c: Option<f64>,
    /// Brownian: number of unit cells; the file must hold n*oversample increments.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub oversample: Option<usize>,
    /// Main statistic: smallest allowed j - i.
    #[arg(long, default_value_t = 1)]
    pub min_sep: usize,
    #[arg(long)]
    pub naive: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// Sample size; scientific notation such as 1e8 is accepted.
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if v.fract() == 0.0 && (1.0..1.8e19).contains(&v) {
        Ok(v as u64)
    } else {
        Err(format!("not a positive integer: {s}"))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn core_err(e: scanmax_core::Error) -> Error {
    Error::Core(e)
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        // A pool can only be installed once per process; later calls keep the first.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
    let started = Instant::now();
    match cli.command {
        Command::Constants(a) => cmd_constants(&a, started),
        Command::Simulate(a) => cmd_simulate(&a, started),
        Command::Gof(a) => cmd_gof(&a, started),
        Command::Oracle(a) => cmd_oracle(&a, started),
        Command::Scan(a) => cmd_scan(&a, started),
        Command::Rates(a) => cmd_rates(&a, started),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HRow {
    pub method: String,
    pub value: f64,
    pub err_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub a: f64,
    pub p_inf: f64,
    pub p_inf_err: f64,
    pub f: f64,
    pub f_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub theorem: String,
    pub n: u64,
    pub a_n: f64,
    pub b_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsPayload {
    pub tol: f64,
    pub c: f64,
    pub h: Vec<HRow>,
    pub h_routes_agree: bool,
    pub grid: Vec<GridRow>,
    pub normalizations: Vec<NormRow>,
}

pub const CONSTANTS_GRID: [f64; 9] = [0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 50.0];
pub const CONSTANTS_NS: [u64; 3] = [1_000, 10_000, 1_000_000];

pub fn cmd_constants(args: &ConstantsArgs, started: Instant) -> Result<()> {
    let mut h = Vec::new();
    for method in [HMethod::AForm, HMethod::YForm] {
        let e = constant_h(args.tol, method)?;
        h.push(HRow {
            method: method.tag().into(),
            value: e.value,
            err_bound: e.err_bound,
        });
    }
    let h_routes_agree = (h[0].value - h[1].value).abs() <= h[0].err_bound + h[1].err_bound;
    let mut grid = Vec::new();
    for a in CONSTANTS_GRID {
        let p = spitzer_p_inf(SpitzerParams::new(a, args.tol)?)?;
        let f = pickands_f(a, args.tol)?;
        grid.push(GridRow {
            a,
            p_inf: p.value,
            p_inf_err: p.err_bound,
            f: f.f_value,
            f_err: f.err_bound,
        });
    }
    let theorems = [
        Theorem::IidMax,
        Theorem::DarlingErdos,
        Theorem::MainDiscrete,
        Theorem::ErdosRenyi(args.c),
        Theorem::BrownianContinuous,
    ];
    let mut normalizations = Vec::new();
    for t in theorems {
        for n in CONSTANTS_NS {
            let p = normalization(t, n)?;
            normalizations.push(NormRow {
                theorem: t.tag().into(),
                n,
                a_n: p.a_n,
                b_n: p.b_n,
            });
        }
    }
    let payload = ConstantsPayload {
        tol: args.tol,
        c: args.c,
        h,
        h_routes_agree,
        grid,
        normalizations,
    };
    let metadata = Metadata {
        wall_time_s: started.elapsed().as_secs_f64(),
        ..Metadata::new("constants")
    };
    emit(
        args.out.as_deref(),
        &OutputRecord { metadata, payload }.to_json(),
    )?;
    if !h_routes_agree {
        return Err(Error::Tolerance(
            "the two H integration routes disagree beyond their error bounds".into(),
        ));
    }
    Ok(())
}

fn manifest_from_flags(a: &SimulateArgs) -> Result<ExperimentManifest> {
    let missing = |f: &str| Error::Manifest(format!("without --in, --{f} is required"));
    Ok(ExperimentManifest {
        ensemble: EnsembleSection {
            statistic: a.stat.ok_or_else(|| missing("stat"))?.tag().into(),
            n: a.n.ok_or_else(|| missing("n"))?,
            replications: a.reps.ok_or_else(|| missing("reps"))?,
            master_seed: a.seed.ok_or_else(|| missing("seed"))?,
            c: a.c,
            oversample: a.oversample,
            engine: a.naive.then_some(ScanEngine::Naive),
        },
        output: None,
        tolerances: a.tol.map(|t| ToleranceSection { ks_max: Some(t) }),
        oracle: None,
    })
}

pub fn cmd_simulate(args: &SimulateArgs, started: Instant) -> Result<()> {
    let manifest = match &args.input {
        Some(p) => ExperimentManifest::load(p)?,
        None => manifest_from_flags(args)?,
    };
    let cfg = manifest.ensemble_config()?;
    let emp = run_ensemble(&cfg)?;
    let metadata = Metadata {
        master_seed: Some(cfg.master_seed),
        manifest_hash: Some(manifest.hash()),
        wall_time_s: started.elapsed().as_secs_f64(),
        ..Metadata::new("simulate")
    };
    let file = SamplesFile::from_distribution(metadata, &emp);
    let out = args.out.clone().or_else(|| {
        manifest
            .output
            .as_ref()
            .map(|o: &OutputSection| o.path.clone())
    });
    emit(out.as_deref(), &file.to_csv())?;
    let ks_max = args
        .tol
        .or(manifest.tolerances.as_ref().and_then(|t| t.ks_max));
    if let Some(limit) = ks_max {
        let ks = gumbel_ks(&emp.samples)?;
        if ks > limit {
            return Err(Error::Tolerance(format!(
                "KS distance {ks} exceeds {limit}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofPayload {
    pub statistic: String,
    pub n: usize,
    pub replications: usize,
    pub ks: f64,
    pub ks_max: Option<f64>,
}

pub fn cmd_gof(args: &GofArgs, started: Instant) -> Result<()> {
    let file = SamplesFile::read(&args.input)?;
    let ks = gumbel_ks(&file.standardized_sorted())?;
    let payload = GofPayload {
        statistic: file.statistic.clone(),
        n: file.n,
        replications: file.records.len(),
        ks,
        ks_max: args.tol,
    };
    let metadata = Metadata {
        master_seed: file.metadata.master_seed,
        manifest_hash: file.metadata.manifest_hash.clone(),
        wall_time_s: started.elapsed().as_secs_f64(),
        ..Metadata::new("gof")
    };
    emit(
        args.out.as_deref(),
        &OutputRecord { metadata, payload }.to_json(),
    )?;
    match args.tol {
        Some(limit) if ks > limit => Err(Error::Tolerance(format!(
            "KS distance {ks} exceeds {limit}"
        ))),
        _ => Ok(()),
    }
}

pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_T: f64 = 200.0;

pub fn cmd_oracle(args: &OracleArgs, started: Instant) -> Result<()> {
    let manifest = args
        .input
        .as_deref()
        .map(ExperimentManifest::load)
        .transpose()?;
    let section = manifest
        .as_ref()
        .and_then(|m| m.oracle.clone())
        .unwrap_or(OracleSection {
            horizon: None,
            t: None,
        });
    let horizon = args.horizon.or(section.horizon).unwrap_or(DEFAULT_HORIZON);
    let t = args.t.or(section.t).unwrap_or(DEFAULT_T);
    let seed = args
        .seed
        .or(manifest.as_ref().map(|m| m.ensemble.master_seed))
        .unwrap_or(0);
    let payload = match args.kind {
        OracleKind::PInf => {
            let est = mc_p_inf(args.a, horizon, args.reps, seed)?;
            let exact = spitzer_p_inf(SpitzerParams::new(args.a, args.tol)?)?;
            json!({
                "kind": "p_inf", "a": args.a, "horizon": horizon, "estimate": est,
                "analytic": exact.value, "analytic_err": exact.err_bound,
            })
        }
        OracleKind::Pickands => {
            let est = mc_pickands_f(args.a, t, args.reps, seed)?;
            let exact = pickands_f(args.a, args.tol)?;
            json!({
                "kind": "pickands", "a": args.a, "t": t, "estimate": est.estimate,
                "median_of_means": est.median_of_means, "groups": est.groups,
                "analytic": exact.f_value, "analytic_err": exact.err_bound,
            })
        }
        OracleKind::Tail => {
            let r = &args.region;
            let region = RegionRect::new(r[0], r[1], r[2], r[3])?;
            let est = mc_tail_exceedance(&region, args.u, args.steps_per_unit, args.reps, seed)?;
            let q = 1.0 / args.steps_per_unit as f64;
            let approx = excursion_tail_rect_grid(&region, args.u, q * args.u * args.u)?;
            json!({
                "kind": "tail", "region": r, "u": args.u, "steps_per_unit": args.steps_per_unit,
                "estimate": est, "analytic": approx.probability,
            })
        }
    };
    let metadata = Metadata {
        master_seed: Some(seed),
        manifest_hash: manifest.as_ref().map(ExperimentManifest::hash),
        wall_time_s: started.elapsed().as_secs_f64(),
        ..Metadata::new("oracle")
    };
    emit(
        args.out.as_deref(),
        &OutputRecord { metadata, payload }.to_json(),
    )
}

pub fn cmd_scan(args: &ScanArgs, started: Instant) -> Result<()> {
    let path = SamplePath::from_increments(read_increments(&args.input)?).map_err(core_err)?;
    let scan_json = |r: scanmax_core::ScanResult| {
        json!({
            "value": r.value, "i": r.i, "j": r.j,
            "pairs_examined": r.pairs_examined, "bounds_checked": r.bounds_checked,
        })
    };
    let window_json =
        |w: scanmax_core::WindowStat| json!({ "value": w.value, "k": w.k, "window": w.window });
    let mut payload = match args.stat {
        StatArg::MainDiscrete => scan_json(if args.naive {
            scan_max_naive(&path, args.min_sep)?
        } else {
            scan_max_pruned(&path, args.min_sep)?
        }),
        StatArg::ErdosRenyi => {
            let c = args
                .c
                .ok_or_else(|| Error::Manifest("ERDOS_RENYI needs --c".into()))?;
            window_json(erdos_renyi_window(&path, c)?)
        }
        StatArg::DarlingErdos => window_json(darling_erdos_max(&path)?),
        StatArg::Brownian => {
            let os = args
                .oversample
                .ok_or_else(|| Error::Manifest("BROWNIAN needs --oversample".into()))?;
            let n = args.n.unwrap_or(path.len() / os.max(1));
            scan_json(brownian_grid_sup(&path, n, os)?)
        }
    };
    payload["statistic"] = json!(args.stat.tag());
    let metadata = Metadata {
        wall_time_s: started.elapsed().as_secs_f64(),
        ..Metadata::new("scan")
    };
    emit(
        args.out.as_deref(),
        &OutputRecord { metadata, payload }.to_json(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub row: u8,
    pub field: String,
    pub formula: String,
    pub coef: f64,
    pub value: f64,
}

pub fn cmd_rates(args: &RatesArgs, started: Instant) -> Result<()> {
    let mut rows = Vec::new();
    for id in 1..=7u8 {
        let e = RateTableEntry::row(id, Some(args.c))?;
        rows.push(RateRow {
            row: id,
            field: e.field().into(),
            formula: e.formula().into(),
            coef: e.coef,
            value: evr_value(&e, args.n)?,
        });
    }
    match &args.out {
        Some(p) => {
            let metadata = Metadata {
                wall_time_s: started.elapsed().as_secs_f64(),
                ..Metadata::new("rates")
            };
            let payload = json!({ "n": args.n, "c": args.c, "rows": rows });
            write_text(p, &OutputRecord { metadata, payload }.to_json())
        }
        None => {
            println!("n = {}, c = {}", args.n, args.c);
            println!(
                "{:<4} {:<44} {:<18} {:>14}",
                "row", "field", "f(n)", "value"
            );
            for r in rows {
                println!(
                    "{:<4} {:<44} {:<18} {:>14.6e}",
                    r.row, r.field, r.formula, r.value
                );
            }
            Ok(())
        }
    }
}
