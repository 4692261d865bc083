//! `hierfl` — run, sweep, plan and analyze hierarchical quantized federated
//! learning simulations.
//!
//! Every failure exits non-zero with a machine-readable JSON error object on
//! stderr: `{"error": {"kind": "...", "message": "..."}}`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use hierfl_core::adaptive::tau2_from_delays;
use hierfl_core::bound::{
    compute_g, flip_threshold, optimal_intervals, stationarity_bound, time_budget_bound,
    BoundParams,
};
use hierfl_core::config::{AdaptiveConfig, ExperimentConfig, LatencyConfig};
use hierfl_core::error::{Error, Result};
use hierfl_core::harness::{
    collect_traces, compare_groups, comparison_csv, run_experiment, CompareMode,
};
use hierfl_core::latency::round_seconds;
use hierfl_core::quantizer::{certify, default_probes, variance_factor, CertifyOptions, QuantizerSpec};

#[derive(Parser)]
#[command(name = "hierfl", version, about = "Hierarchical quantized federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single experiment from a JSON config.
    Run(RunArgs),
    /// Execute the config's sweep axes times repetitions.
    Sweep(SweepArgs),
    /// Evaluate the convergence-bound formulas.
    Bound(BoundArgs),
    /// Recommend aggregation intervals for given delays and a time budget.
    Plan(PlanArgs),
    /// Empirically certify a quantizer and emit a CSV report.
    QuantizeBench(QuantizeBenchArgs),
    /// Compare finished runs at matched checkpoints.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "runs/run")]
    out: PathBuf,
    /// Enable windowed adaptive interval control.
    #[arg(long)]
    adaptive: bool,
    /// Initial client-edge interval for the adaptive controller.
    #[arg(long)]
    tau1_initial: Option<u32>,
    /// Adaptation window length in seconds.
    #[arg(long)]
    window_seconds: Option<f64>,
    /// Override the per-iteration computation delay (seconds).
    #[arg(long)]
    d_comp_seconds: Option<f64>,
    /// Override the client-edge upload delay (seconds).
    #[arg(long)]
    d_de_seconds: Option<f64>,
    /// Override the edge-cloud upload delay (seconds).
    #[arg(long)]
    d_ec_seconds: Option<f64>,
    /// Worker threads for client simulation (0 = default pool).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "runs/sweep")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct BoundArgs {
    /// Smoothness constant L.
    #[arg(long)]
    l: f64,
    /// Step size.
    #[arg(long)]
    eta: f64,
    /// Gradient-noise variance bound.
    #[arg(long)]
    sigma2: f64,
    /// Clients.
    #[arg(long)]
    n: u32,
    /// Edge servers.
    #[arg(long)]
    s: u32,
    #[arg(long)]
    tau1: u32,
    #[arg(long)]
    tau2: u32,
    /// Client-quantizer variance factor.
    #[arg(long, default_value_t = 0.0)]
    q1: f64,
    /// Edge-quantizer variance factor.
    #[arg(long, default_value_t = 0.0)]
    q2: f64,
    /// Cloud rounds.
    #[arg(long)]
    k: u32,
    /// Initial loss f(x0).
    #[arg(long)]
    f0: f64,
    /// Loss lower bound.
    #[arg(long, default_value_t = 0.0)]
    f_star: f64,
    #[arg(long)]
    d_comp_seconds: Option<f64>,
    #[arg(long)]
    d_de_seconds: Option<f64>,
    #[arg(long)]
    d_ec_seconds: Option<f64>,
    /// Wall-clock budget for the time-budget bound.
    #[arg(long)]
    t_total_seconds: Option<f64>,
    /// Sweep one parameter: tau1, tau2, eta, sigma2, q1, q2, k or s.
    #[arg(long)]
    sweep_field: Option<String>,
    /// Comma-separated values for the swept parameter.
    #[arg(long)]
    sweep_values: Option<String>,
    /// Write the sweep as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    l: f64,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    sigma2: f64,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    s: u32,
    #[arg(long, default_value_t = 0.0)]
    q1: f64,
    #[arg(long, default_value_t = 0.0)]
    q2: f64,
    #[arg(long)]
    f0: f64,
    #[arg(long, default_value_t = 0.0)]
    f_star: f64,
    #[arg(long, default_value_t = 0.0)]
    d_comp_seconds: f64,
    #[arg(long)]
    d_de_seconds: f64,
    #[arg(long)]
    d_ec_seconds: f64,
    /// Wall-clock training budget in seconds.
    #[arg(long)]
    t_total_seconds: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantKind {
    Identity,
    Sparsification,
    Rounding,
}

#[derive(Args)]
struct QuantizeBenchArgs {
    #[arg(long, value_enum)]
    kind: QuantKind,
    #[arg(long)]
    dim: usize,
    /// Kept coordinates (sparsification).
    #[arg(long)]
    r: Option<usize>,
    /// Quantization levels (rounding).
    #[arg(long)]
    levels: Option<u32>,
    /// Sign-magnitude bit budget; sets levels = 2^(bits-1) (rounding).
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-probe report CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareAt {
    Rounds,
    Wall,
}

#[derive(Args)]
struct CompareArgs {
    /// Input groups: directories (all traces underneath) or trace files.
    #[arg(long, value_delimiter = ',', required = true)]
    inputs: Vec<PathBuf>,
    /// Group labels; default to the input paths.
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "rounds")]
    at: CompareAt,
    /// Write the comparison CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Plan(args) => cmd_plan(args),
        Command::QuantizeBench(args) => cmd_quantize_bench(args),
        Command::Compare(args) => cmd_compare(args),
    };
    if let Err(e) = result {
        let payload = serde_json::json!({
            "error": { "kind": e.kind(), "message": e.to_string() }
        });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}

fn apply_common_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) -> Result<()> {
    if args.d_comp_seconds.is_some() || args.d_de_seconds.is_some() || args.d_ec_seconds.is_some() {
        let base = cfg.build_latency()?;
        cfg.latency = LatencyConfig::Direct {
            d_comp_seconds: args.d_comp_seconds.unwrap_or(base.d_comp_seconds),
            d_de_seconds: args.d_de_seconds.unwrap_or(base.d_de_seconds),
            d_ec_seconds: args.d_ec_seconds.unwrap_or(base.d_ec_seconds),
        };
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if args.adaptive {
        let mut adaptive = cfg.adaptive.unwrap_or(AdaptiveConfig {
            tau1_initial: cfg.schedule.tau1,
            window_seconds: 0.0,
            use_decay_rule: None,
            enabled: true,
        });
        if let Some(t) = args.tau1_initial {
            adaptive.tau1_initial = t;
        }
        if let Some(w) = args.window_seconds {
            adaptive.window_seconds = w;
        }
        adaptive.enabled = true;
        if adaptive.window_seconds <= 0.0 {
            return Err(Error::Config(
                "adaptive runs need --window-seconds (or an adaptive section in the config)".into(),
            ));
        }
        cfg.adaptive = Some(adaptive);
    } else if args.tau1_initial.is_some() || args.window_seconds.is_some() {
        return Err(Error::Config(
            "--tau1-initial/--window-seconds require --adaptive".into(),
        ));
    }
    Ok(())
}

fn surface_run_outputs(out: &std::path::Path, summaries_len: usize) -> Result<()> {
    // Surface per-run warnings (e.g. a negative feasibility constant).
    let mut metas = Vec::new();
    let mut stack = vec![out.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == "meta.json") {
                metas.push(path);
            }
        }
    }
    metas.sort();
    for path in metas {
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        if let Some(warnings) = meta["warnings"].as_array() {
            for w in warnings {
                eprintln!("warning [{}]: {}", path.display(), w.as_str().unwrap_or(""));
            }
        }
    }
    println!("{} run(s) written under {}", summaries_len, out.display());
    println!("summary: {}", out.join("summary.csv").display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if !cfg.sweep.is_empty() {
        return Err(Error::Config(
            "config declares sweep axes; use the sweep subcommand".into(),
        ));
    }
    apply_common_overrides(&mut cfg, &args)?;
    let result = run_experiment(&cfg, &args.out)?;
    for s in &result.summaries {
        println!(
            "final_loss={} final_grad_norm_sq={} wall_clock_s={} rounds={} diverged={}",
            s.final_loss, s.final_grad_norm_sq, s.wall_clock_s, s.rounds, s.diverged
        );
    }
    surface_run_outputs(&args.out, result.summaries.len())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let result = run_experiment(&cfg, &args.out)?;
    surface_run_outputs(&args.out, result.summaries.len())
}

fn bound_params(args: &BoundArgs) -> BoundParams {
    BoundParams {
        l: args.l,
        eta: args.eta,
        sigma2: args.sigma2,
        n: args.n,
        s: args.s,
        tau1: args.tau1,
        tau2: args.tau2,
        q1: args.q1,
        q2: args.q2,
        k: args.k,
        f0: args.f0,
        f_star: args.f_star,
    }
}

fn print_bound_table(p: &BoundParams, args: &BoundArgs) -> Result<()> {
    p.validate()?;
    let eval = stationarity_bound(p);
    println!("G                    {}", eval.g);
    println!("bound_valid (G >= 0) {}", eval.valid);
    println!("stationarity_bound   {}", eval.value);
    println!("flip_threshold_q1    {}", flip_threshold(p.n, p.s));
    if let (Some(d_comp), Some(d_de), Some(d_ec), Some(t)) = (
        args.d_comp_seconds,
        args.d_de_seconds,
        args.d_ec_seconds,
        args.t_total_seconds,
    ) {
        let tb = time_budget_bound(p, d_comp, d_de, d_ec, t)?;
        println!("time_budget_bound    {tb}");
        match optimal_intervals(p, d_de, d_ec, t) {
            Ok(opt) => {
                println!("tau1_star            {} (ceil {})", opt.tau1, opt.tau1.ceil());
                println!("tau2_star            {} (ceil {})", opt.tau2, opt.tau2.ceil());
            }
            Err(e) => println!("optimal_intervals    unavailable: {e}"),
        }
    }
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<()> {
    let base = bound_params(&args);
    match (&args.sweep_field, &args.sweep_values) {
        (None, None) => print_bound_table(&base, &args),
        (Some(field), Some(values)) => {
            let values: Vec<f64> = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad sweep value {v}: {e}")))
                })
                .collect::<Result<_>>()?;
            let mut rows = Vec::new();
            for &v in &values {
                let mut p = base;
                match field.as_str() {
                    "tau1" => p.tau1 = v as u32,
                    "tau2" => p.tau2 = v as u32,
                    "eta" => p.eta = v,
                    "sigma2" => p.sigma2 = v,
                    "q1" => p.q1 = v,
                    "q2" => p.q2 = v,
                    "k" => p.k = v as u32,
                    "s" => p.s = v as u32,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown bound sweep field {other}; supported: tau1, tau2, eta, sigma2, q1, q2, k, s"
                        )))
                    }
                }
                p.validate()?;
                let eval = stationarity_bound(&p);
                let tb = match (
                    args.d_comp_seconds,
                    args.d_de_seconds,
                    args.d_ec_seconds,
                    args.t_total_seconds,
                ) {
                    (Some(dc), Some(dde), Some(dec), Some(t)) => {
                        Some(time_budget_bound(&p, dc, dde, dec, t)?)
                    }
                    _ => None,
                };
                rows.push((v, eval.g, eval.value, eval.valid, tb));
            }
            let mut csv = String::from("field,value,g,stationarity_bound,valid,time_budget_bound\n");
            for (v, g, bound, valid, tb) in &rows {
                let tb = tb.map_or(String::new(), |x| x.to_string());
                csv.push_str(&format!("{field},{v},{g},{bound},{valid},{tb}\n"));
                println!("{field}={v}: G={g} bound={bound} valid={valid} {}",
                    if tb.is_empty() { String::new() } else { format!("time_budget={tb}") });
            }
            if let Some(path) = &args.csv {
                std::fs::write(path, csv)?;
                println!("csv: {}", path.display());
            }
            Ok(())
        }
        _ => Err(Error::Config(
            "--sweep-field and --sweep-values must be given together".into(),
        )),
    }
}

fn cmd_plan(args: PlanArgs) -> Result<()> {
    let p = BoundParams {
        l: args.l,
        eta: args.eta,
        sigma2: args.sigma2,
        n: args.n,
        s: args.s,
        tau1: 1,
        tau2: 1,
        q1: args.q1,
        q2: args.q2,
        k: 1,
        f0: args.f0,
        f_star: args.f_star,
    };
    p.validate()?;
    let opt = optimal_intervals(&p, args.d_de_seconds, args.d_ec_seconds, args.t_total_seconds)?;
    let tau1 = (opt.tau1.ceil() as u32).max(1);
    let tau2 = tau2_from_delays(args.d_de_seconds, args.d_ec_seconds, args.n, args.s, args.q1)?;
    let latency = hierfl_core::latency::LatencyModel {
        d_comp_seconds: args.d_comp_seconds,
        d_de_seconds: args.d_de_seconds,
        d_ec_seconds: args.d_ec_seconds,
    };
    latency.validate()?;
    let per_round = round_seconds(tau1, tau2, &latency);
    let rounds = (args.t_total_seconds / per_round).floor() as u32;
    let mut check = p;
    check.tau1 = tau1;
    check.tau2 = tau2;
    check.k = rounds.max(1);
    println!("tau1_star        {} -> tau1 = {tau1}", opt.tau1);
    println!("tau2_star        {} -> tau2 = {tau2}", opt.tau2);
    println!("round_seconds    {per_round}");
    println!("rounds_in_budget {rounds}");
    println!("G_at_plan        {}", compute_g(&check));
    println!(
        "time_budget_bound_at_plan {}",
        time_budget_bound(
            &check,
            args.d_comp_seconds,
            args.d_de_seconds,
            args.d_ec_seconds,
            args.t_total_seconds
        )?
    );
    Ok(())
}

fn cmd_quantize_bench(args: QuantizeBenchArgs) -> Result<()> {
    let spec = match args.kind {
        QuantKind::Identity => QuantizerSpec::Identity { dim: args.dim },
        QuantKind::Sparsification => QuantizerSpec::RandomSparsification {
            dim: args.dim,
            r: args.r.ok_or_else(|| Error::Config("sparsification needs --r".into()))?,
        },
        QuantKind::Rounding => match (args.levels, args.bits) {
            (Some(levels), None) => QuantizerSpec::StochasticRounding { dim: args.dim, levels },
            (None, Some(bits)) => QuantizerSpec::rounding_from_bits(args.dim, bits)?,
            _ => {
                return Err(Error::Config(
                    "rounding needs exactly one of --levels or --bits".into(),
                ))
            }
        },
    };
    spec.validate()?;
    let probes = default_probes(args.dim, args.seed);
    let report = certify(&spec, &probes, args.draws, args.seed, CertifyOptions::default())?;
    let params = match spec {
        QuantizerSpec::Identity { dim } => format!("dim={dim}"),
        QuantizerSpec::RandomSparsification { dim, r } => format!("dim={dim};r={r}"),
        QuantizerSpec::StochasticRounding { dim, levels } => format!("dim={dim};levels={levels}"),
    };
    let kind = match spec {
        QuantizerSpec::Identity { .. } => "identity",
        QuantizerSpec::RandomSparsification { .. } => "random-sparsification",
        QuantizerSpec::StochasticRounding { .. } => "stochastic-rounding",
    };
    let mut csv = String::from("kind,params,probe_id,mean_dev,var_ratio,q_bound,pass\n");
    for probe in &report.probes {
        let ratio = probe.variance_ratio.map_or(String::new(), |r| r.to_string());
        csv.push_str(&format!(
            "{kind},{params},{},{},{ratio},{},{}\n",
            probe.probe, probe.mean_deviation, report.q_bound, probe.pass
        ));
        println!(
            "probe {}: mean_dev={} (limit {}) var_ratio={} q_bound={} pass={}",
            probe.probe,
            probe.mean_deviation,
            probe.mean_deviation_limit,
            if ratio.is_empty() { "n/a" } else { &ratio },
            report.q_bound,
            probe.pass
        );
    }
    println!(
        "certification: {} (q_bound = {}, variance factor = {})",
        if report.pass { "PASS" } else { "FAIL" },
        report.q_bound,
        variance_factor(&spec)
    );
    if let Some(path) = &args.out {
        std::fs::write(path, csv)?;
        println!("csv: {}", path.display());
    }
    if !report.pass {
        return Err(Error::Config("quantizer certification failed".into()));
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let mode = match args.at {
        CompareAt::Rounds => CompareMode::Rounds,
        CompareAt::Wall => CompareMode::WallClock,
    };
    let labels: Vec<String> = match &args.labels {
        Some(labels) => {
            if labels.len() != args.inputs.len() {
                return Err(Error::Config(format!(
                    "{} labels for {} inputs",
                    labels.len(),
                    args.inputs.len()
                )));
            }
            labels.clone()
        }
        None => args
            .inputs
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    };
    let mut groups = Vec::new();
    for (input, label) in args.inputs.iter().zip(labels) {
        groups.push((label, collect_traces(input, mode)?));
    }
    let rows = compare_groups(&groups)?;
    let mut interpolated_any = false;
    for row in &rows {
        interpolated_any |= row.interpolated;
        println!(
            "checkpoint={} group={} n={} mean_loss={} se_loss={}{}",
            row.checkpoint,
            row.group,
            row.count,
            row.mean_loss,
            row.se_loss,
            if row.interpolated { " (interpolated)" } else { "" }
        );
    }
    if interpolated_any {
        eprintln!("warning: checkpoint grids differed; values interpolated to the coarsest grid");
    }
    if let Some(path) = &args.out {
        std::fs::write(path, comparison_csv(&rows)?)?;
        println!("csv: {}", path.display());
    }
    Ok(())
}
