//! `qpsim`: estimate Born probabilities of small qubit circuits by signed
//! Monte Carlo sampling over frame representations, with gate merging and
//! dynamic frame optimisation as negativity-reducing pre-processing passes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpsim_cli::experiments::{run_experiment, ExperimentFile};
use qpsim_cli::format::{
    parse_circuit, parse_frames, serialize_circuit, serialize_frames, to_canonical_json,
};
use qpsim_cli::reports::{
    EstimateReportDoc, MergeReport, Meta, NegativityReport, OracleReport, PipelineReport,
};
use qpsim_cli::CliError;

use qpsim_core::circuit::{gen_clifford_t, gen_haar_circuit, Circuit};
use qpsim_core::frameopt::{optimise_frames, OptConfig, Selection};
use qpsim_core::frames::FrameKind;
use qpsim_core::merging::{merge_circuit, MergeConfig};
use qpsim_core::oracle::exact_probability;
use qpsim_core::quasiprob::{circuit_negativity, negativity_report, FrameAssignment};
use qpsim_core::sampler::{compile, estimate, required_samples};

#[derive(Parser)]
#[command(
    name = "qpsim",
    version,
    about = "Quasi-probability Born-probability estimation with gate merging and frame optimisation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random circuit file.
    Gen(GenArgs),
    /// Report per-component and total circuit negativity.
    Negativity(NegativityArgs),
    /// Merge gates up to a spatial truncation and write the merged circuit.
    Merge(MergeArgs),
    /// Optimise per-segment frames and write the assignment and trace.
    Optimize(OptimizeArgs),
    /// Estimate the outcome probability by signed Monte Carlo sampling.
    Estimate(EstimateArgs),
    /// Exact outcome probability by brute-force evolution.
    Oracle(OracleArgs),
    /// Merge, optimise and estimate in one pass.
    Pipeline(PipelineArgs),
    /// Run an experiment spec (fig2_histogram, fig3_reduction,
    /// fig4_error_hist, toffoli_anchor).
    Run(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Wigner,
    #[value(name = "rotated_pauli", alias = "pauli")]
    RotatedPauli,
}

impl From<FamilyArg> for FrameKind {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Wigner => FrameKind::Wigner,
            FamilyArg::RotatedPauli => FrameKind::RotatedPauli,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    CliffordT,
    Haar,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long)]
    wires: usize,
    /// Clifford gate count (clifford-t only).
    #[arg(long)]
    cliffords: Option<usize>,
    /// T gate count (clifford-t only).
    #[arg(long)]
    t_gates: Option<usize>,
    /// Two-qubit Haar gate count (haar only).
    #[arg(long)]
    gates: Option<usize>,
    #[arg(long)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FrameSource {
    /// Frame assignment file; defaults to the reference frames of --family.
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Frame family for the default reference assignment.
    #[arg(long, value_enum, default_value = "rotated_pauli")]
    family: FamilyArg,
}

impl FrameSource {
    fn load(&self, circuit: &Circuit) -> Result<FrameAssignment, CliError> {
        match &self.frames {
            Some(path) => Ok(parse_frames(&read_text(path)?, circuit)?),
            None => Ok(FrameAssignment::reference(circuit, self.family.into())),
        }
    }
}

#[derive(Args)]
struct NegativityArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    frames: FrameSource,
    /// Report path; stdout when omitted.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct MergeArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Spatial parameter: largest merged-gate wire count.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Frame family used for the before/after negativity report.
    #[arg(long, value_enum, default_value = "rotated_pauli")]
    family: FamilyArg,
    /// Merged circuit output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    frames: FrameSource,
    /// Temporal parameter: frames optimised jointly per cycle.
    #[arg(long, default_value_t = 2)]
    ell: usize,
    /// Cycle count; defaults to ceil(num_segments / ell).
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long, default_value_t = 10)]
    hops: usize,
    #[arg(long, default_value_t = 200)]
    local_iters: usize,
    #[arg(long, default_value_t = 0.5)]
    step_scale: f64,
    /// Target selection order: sequential or random.
    #[arg(long, default_value = "sequential")]
    selection: String,
    #[arg(long)]
    seed: u64,
    /// Optimised frame assignment output path.
    #[arg(long)]
    out_frames: PathBuf,
    /// Optional per-cycle negativity trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    frames: FrameSource,
    /// Explicit sample count (conflicts with --epsilon/--delta).
    #[arg(long, conflicts_with_all = ["epsilon", "delta"])]
    samples: Option<u64>,
    /// Target additive error for the Hoeffding bound.
    #[arg(long, requires = "delta")]
    epsilon: Option<f64>,
    /// Failure probability for the Hoeffding bound.
    #[arg(long, requires = "epsilon")]
    delta: Option<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Report path; stdout when omitted.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Report path; stdout when omitted.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "wigner")]
    family: FamilyArg,
    #[arg(long, default_value_t = 10)]
    hops: usize,
    #[arg(long, default_value_t = 200)]
    local_iters: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Refuse to run when the Hoeffding bound exceeds this many samples.
    #[arg(long)]
    max_samples: Option<u64>,
    /// Directory for the report and intermediate artifacts.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec JSON path.
    spec: PathBuf,
    /// Directory for the experiment artifacts.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))
}

fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))
                .map_err(CliError::Internal)?;
        }
    }
    fs::write(path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::Internal)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_text(path, content)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (circuit, spec) = match args.kind {
        GenKind::CliffordT => {
            let cliffords = args.cliffords.ok_or_else(|| {
                CliError::Validation("--cliffords is required for --kind clifford-t".into())
            })?;
            let t_gates = args.t_gates.unwrap_or(0);
            let c = gen_clifford_t(args.wires, cliffords, t_gates, &mut rng)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            (
                c,
                serde_json::json!({
                    "kind": "clifford-t", "wires": args.wires,
                    "cliffords": cliffords, "t_gates": t_gates,
                }),
            )
        }
        GenKind::Haar => {
            let gates = args.gates.ok_or_else(|| {
                CliError::Validation("--gates is required for --kind haar".into())
            })?;
            let c = gen_haar_circuit(args.wires, gates, &mut rng)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            (
                c,
                serde_json::json!({"kind": "haar", "wires": args.wires, "gates": gates}),
            )
        }
    };
    let meta = Meta::new(Some(args.seed), spec);
    let text = serialize_circuit(&circuit, Some(meta.to_value()))?;
    emit(&args.out, &text)
}

fn cmd_negativity(args: &NegativityArgs) -> Result<(), CliError> {
    let circuit = parse_circuit(&read_text(&args.circuit)?)?;
    let fa = args.frames.load(&circuit)?;
    let (parts, total) = negativity_report(&circuit, &fa).map_err(CliError::internal_core)?;
    let report = NegativityReport {
        meta: Meta::new(None, serde_json::json!({"command": "negativity"})).to_value(),
        per_component: parts.into_iter().map(Into::into).collect(),
        total_log2_negativity: total,
    };
    emit(&args.json_out, &to_canonical_json(&report)?)
}

fn cmd_merge(args: &MergeArgs) -> Result<(), CliError> {
    let circuit = parse_circuit(&read_text(&args.circuit)?)?;
    let cfg = MergeConfig::new(args.n).map_err(|e| CliError::Validation(e.to_string()))?;
    let kind: FrameKind = args.family.into();
    let before = circuit_negativity(&circuit, &FrameAssignment::reference(&circuit, kind))
        .map_err(CliError::internal_core)?;
    let merged = merge_circuit(&circuit, &cfg).map_err(|e| CliError::Validation(e.to_string()))?;
    let after = circuit_negativity(&merged, &FrameAssignment::reference(&merged, kind))
        .map_err(CliError::internal_core)?;

    let meta = Meta::new(None, serde_json::json!({"command": "merge", "n": args.n}));
    write_text(
        &args.out,
        &serialize_circuit(&merged, Some(meta.to_value()))?,
    )?;
    println!("wrote {}", args.out.display());

    let report = MergeReport {
        meta: meta.to_value(),
        gates_before: circuit.gates.len(),
        gates_after: merged.gates.len(),
        log2_negativity_before: before,
        log2_negativity_after: after,
    };
    if let Some(path) = &args.report {
        write_text(path, &to_canonical_json(&report)?)?;
        println!("wrote {}", path.display());
    }
    println!(
        "merged {} gates into {}; log2 negativity {before:.4} -> {after:.4}",
        report.gates_before, report.gates_after
    );
    Ok(())
}

fn parse_selection(name: &str) -> Result<Selection, CliError> {
    match name {
        "sequential" => Ok(Selection::Sequential),
        "random" => Ok(Selection::Random),
        other => Err(CliError::Validation(format!(
            "unknown selection '{other}' (expected sequential or random)"
        ))),
    }
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    let circuit = parse_circuit(&read_text(&args.circuit)?)?;
    let fa0 = args.frames.load(&circuit)?;
    let cfg = OptConfig {
        ell: args.ell,
        cycles: args.cycles,
        hops: args.hops,
        local_iters: args.local_iters,
        step_scale: args.step_scale,
        seed: args.seed,
        selection: parse_selection(&args.selection)?,
    };
    let out =
        optimise_frames(&circuit, &fa0, &cfg).map_err(|e| CliError::Validation(e.to_string()))?;
    write_text(&args.out_frames, &serialize_frames(&out.assignment)?)?;
    println!("wrote {}", args.out_frames.display());

    if let Some(path) = &args.trace {
        let meta = Meta::new(
            Some(args.seed),
            serde_json::json!({"command": "optimize", "ell": args.ell, "hops": args.hops}),
        );
        let meta_line = serde_json::to_string(&meta).expect("meta serializes");
        let mut csv = format!("# {meta_line}\ncycle,log2_negativity\n");
        for (cycle, v) in out.trace.iter().enumerate() {
            csv.push_str(&format!("{cycle},{v}\n"));
        }
        write_text(path, &csv)?;
        println!("wrote {}", path.display());
    }
    println!(
        "log2 negativity {:.4} -> {:.4} over {} cycles",
        out.trace.first().expect("trace"),
        out.trace.last().expect("trace"),
        out.trace.len() - 1
    );
    Ok(())
}

fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let circuit = parse_circuit(&read_text(&args.circuit)?)?;
    let fa = args.frames.load(&circuit)?;
    let cc = compile(&circuit, &fa).map_err(CliError::internal_core)?;
    let samples = match (args.samples, args.epsilon, args.delta) {
        (Some(m), None, None) => m,
        (None, Some(eps), Some(delta)) => required_samples(eps, delta, cc.log2_negativity().exp2())
            .map_err(|e| CliError::Validation(e.to_string()))?,
        _ => {
            return Err(CliError::Validation(
                "specify either --samples or both --epsilon and --delta".into(),
            ))
        }
    };
    let report = estimate(&cc, samples, args.seed, args.workers)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let meta = Meta::new(
        Some(args.seed),
        serde_json::json!({"command": "estimate", "samples": samples, "workers": args.workers}),
    );
    let doc = EstimateReportDoc::new(meta.to_value(), &report);
    emit(&args.json_out, &to_canonical_json(&doc)?)?;
    eprintln!(
        "p_est = {:.6} +- {:.6} ({} samples, log2 N_C = {:.4})",
        report.p_est, report.std_error, report.samples, report.n_c_log2
    );
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), CliError> {
    let circuit = parse_circuit(&read_text(&args.circuit)?)?;
    let p = exact_probability(&circuit).map_err(|e| CliError::Validation(e.to_string()))?;
    let report = OracleReport {
        meta: Meta::new(None, serde_json::json!({"command": "oracle"})).to_value(),
        p_exact: p,
    };
    emit(&args.json_out, &to_canonical_json(&report)?)
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<(), CliError> {
    let circuit = parse_circuit(&read_text(&args.circuit)?)?;
    let kind: FrameKind = args.family.into();
    let spec = serde_json::json!({
        "command": "pipeline", "n": args.n, "ell": args.ell,
        "epsilon": args.epsilon, "delta": args.delta,
        "family": kind.name(), "hops": args.hops,
    });
    let meta = Meta::new(Some(args.seed), spec);

    let initial = circuit_negativity(&circuit, &FrameAssignment::reference(&circuit, kind))
        .map_err(CliError::internal_core)?;

    let cfg_merge = MergeConfig::new(args.n).map_err(|e| CliError::Validation(e.to_string()))?;
    let merged =
        merge_circuit(&circuit, &cfg_merge).map_err(|e| CliError::Validation(e.to_string()))?;
    write_text(
        &args.out_dir.join("merged_circuit.json"),
        &serialize_circuit(&merged, Some(meta.to_value()))?,
    )?;
    let merged_neg = circuit_negativity(&merged, &FrameAssignment::reference(&merged, kind))
        .map_err(CliError::internal_core)?;

    let cfg_opt = OptConfig {
        ell: args.ell,
        cycles: None,
        hops: args.hops,
        local_iters: args.local_iters,
        step_scale: 0.5,
        seed: args.seed,
        selection: Selection::Sequential,
    };
    let fa0 = FrameAssignment::reference(&merged, kind);
    let opt = optimise_frames(&merged, &fa0, &cfg_opt).map_err(CliError::internal_core)?;
    write_text(
        &args.out_dir.join("frames.json"),
        &serialize_frames(&opt.assignment)?,
    )?;
    let meta_line = serde_json::to_string(&meta).expect("meta serializes");
    let mut trace_csv = format!("# {meta_line}\ncycle,log2_negativity\n");
    for (cycle, v) in opt.trace.iter().enumerate() {
        trace_csv.push_str(&format!("{cycle},{v}\n"));
    }
    write_text(&args.out_dir.join("negativity_trace.csv"), &trace_csv)?;

    let cc = compile(&merged, &opt.assignment).map_err(CliError::internal_core)?;
    let n_c = cc.log2_negativity().exp2();
    let samples = required_samples(args.epsilon, args.delta, n_c.max(1.0))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if let Some(cap) = args.max_samples {
        if samples > cap {
            return Err(CliError::Validation(format!(
                "Hoeffding bound needs {samples} samples, above the --max-samples cap {cap}"
            )));
        }
    }
    let report = estimate(&cc, samples, args.seed, args.workers)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let doc = PipelineReport {
        meta: meta.to_value(),
        log2_negativity_initial: initial,
        log2_negativity_merged: merged_neg,
        log2_negativity_optimised: cc.log2_negativity(),
        gates_before: circuit.gates.len(),
        gates_after: merged.gates.len(),
        samples,
        p_est: report.p_est,
        std_error: report.std_error,
        elapsed_seconds: report.elapsed_seconds,
        seed: args.seed,
    };
    write_text(
        &args.out_dir.join("pipeline_report.json"),
        &to_canonical_json(&doc)?,
    )?;
    println!(
        "pipeline: log2 N_C {initial:.4} -> {merged_neg:.4} (merged) -> {:.4} (optimised); \
         p_est = {:.6} from {samples} samples",
        cc.log2_negativity(),
        report.p_est
    );
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let text = read_text(&args.spec)?;
    let spec: ExperimentFile =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("spec: {e}")))?;
    run_experiment(&spec, &args.out_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Negativity(args) => cmd_negativity(args),
        Cmd::Merge(args) => cmd_merge(args),
        Cmd::Optimize(args) => cmd_optimize(args),
        Cmd::Estimate(args) => cmd_estimate(args),
        Cmd::Oracle(args) => cmd_oracle(args),
        Cmd::Pipeline(args) => cmd_pipeline(args),
        Cmd::Run(args) => cmd_run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(err)) => {
            eprintln!("internal error: {err:#}");
            ExitCode::from(1)
        }
    }
}
