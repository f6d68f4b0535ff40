//! Experiment harness: ensemble studies emitted as CSV/JSON data files.
//!
//! Every artifact embeds the full experiment spec, seed and tool version for
//! replay; re-running with identical inputs produces byte-identical files.
//! Wall-clock timestamps go to a `<name>.log` sidecar only.

use std::fs;
use std::path::Path;

use anyhow::Context;
use qpsim_core::circuit::{gen_clifford_t, gen_haar_circuit, library, Gate};
use qpsim_core::frameopt::{optimise_frames, OptConfig};
use qpsim_core::frames::FrameKind;
use qpsim_core::merging::{merge_circuit, MergeConfig};
use qpsim_core::numerics::WireSupport;
use qpsim_core::oracle::exact_probability;
use qpsim_core::quasiprob::{circuit_negativity, gate_tensor, FrameAssignment};
use qpsim_core::sampler::{compile, estimate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::format::to_canonical_json;
use crate::reports::Meta;
use crate::CliError;

/// Top-level experiment document: `{"name": ..., "seed": ..., "parameters": {...}}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ExperimentFile {
    pub seed: u64,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "name", content = "parameters", rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig2Histogram(Fig2Params),
    Fig3Reduction(Fig3Params),
    Fig4ErrorHist(Fig4Params),
    ToffoliAnchor(ToffoliParams),
}

fn default_ensemble_fig2() -> usize {
    1000
}
fn default_wires_fig2() -> usize {
    5
}
fn default_cliffords() -> usize {
    100
}
fn default_t_gates() -> usize {
    15
}
fn default_n_fig2() -> usize {
    5
}

/// Negativity-per-T histogram over random merged Clifford+T circuits.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Fig2Params {
    #[serde(default = "default_ensemble_fig2")]
    pub ensemble: usize,
    #[serde(default = "default_wires_fig2")]
    pub wires: usize,
    #[serde(default = "default_cliffords")]
    pub cliffords: usize,
    #[serde(default = "default_t_gates")]
    pub t_gates: usize,
    #[serde(default = "default_n_fig2")]
    pub n: usize,
}

fn default_wires_fig3() -> usize {
    6
}
fn default_gates_fig3() -> usize {
    15
}
fn default_n_values() -> Vec<usize> {
    vec![2, 3, 4]
}
fn default_ell_values() -> Vec<usize> {
    vec![1, 2, 5]
}
fn default_families() -> Vec<String> {
    vec!["wigner".into(), "rotated_pauli".into()]
}
fn default_hops() -> usize {
    10
}
fn default_local_iters() -> usize {
    200
}
fn default_step_scale() -> f64 {
    0.5
}

/// Per-cycle negativity reduction traces over a truncation-parameter grid.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Fig3Params {
    #[serde(default = "default_wires_fig3")]
    pub wires: usize,
    #[serde(default = "default_gates_fig3")]
    pub gates: usize,
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_ell_values")]
    pub ell_values: Vec<usize>,
    #[serde(default = "default_families")]
    pub families: Vec<String>,
    #[serde(default = "default_hops")]
    pub hops: usize,
    #[serde(default = "default_local_iters")]
    pub local_iters: usize,
    #[serde(default = "default_step_scale")]
    pub step_scale: f64,
}

fn default_ensemble_fig4() -> usize {
    500
}
fn default_wires_fig4() -> usize {
    3
}
fn default_gates_fig4() -> usize {
    8
}
fn default_n_fig4() -> usize {
    2
}
fn default_ell_fig4() -> usize {
    1
}
fn default_samples() -> u64 {
    1_000_000
}
fn default_hops_fig4() -> usize {
    4
}

/// Estimation-error histograms for unmerged / merged / merged+optimised arms.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Fig4Params {
    #[serde(default = "default_ensemble_fig4")]
    pub ensemble: usize,
    #[serde(default = "default_wires_fig4")]
    pub wires: usize,
    #[serde(default = "default_gates_fig4")]
    pub gates: usize,
    #[serde(default = "default_n_fig4")]
    pub n: usize,
    #[serde(default = "default_ell_fig4")]
    pub ell: usize,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_hops_fig4")]
    pub hops: usize,
    #[serde(default = "default_local_iters")]
    pub local_iters: usize,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
pub struct ToffoliParams {}

impl ExperimentFile {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Validation(msg.to_string()));
        match &self.kind {
            ExperimentKind::Fig2Histogram(p) => {
                if p.ensemble == 0 || p.wires < 2 || p.t_gates == 0 || p.n < 2 {
                    return bad("fig2: ensemble, t_gates must be positive; wires, n >= 2");
                }
            }
            ExperimentKind::Fig3Reduction(p) => {
                if p.wires < 2
                    || p.gates == 0
                    || p.n_values.is_empty()
                    || p.ell_values.is_empty()
                    || p.families.is_empty()
                    || p.n_values.iter().any(|&n| n < 2)
                    || p.ell_values.contains(&0)
                {
                    return bad("fig3: need wires >= 2, gates >= 1, non-empty n/ell/family lists");
                }
                for f in &p.families {
                    if FrameKind::from_name(f).is_none() {
                        return Err(CliError::Validation(format!("fig3: unknown family '{f}'")));
                    }
                }
            }
            ExperimentKind::Fig4ErrorHist(p) => {
                if p.ensemble == 0
                    || p.wires < 2
                    || p.gates == 0
                    || p.samples == 0
                    || p.n < 2
                    || p.ell == 0
                {
                    return bad("fig4: ensemble, gates, samples, ell positive; wires, n >= 2");
                }
            }
            ExperimentKind::ToffoliAnchor(_) => {}
        }
        Ok(())
    }
}

fn write_artifact(out_dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(CliError::Internal)?;
    let path = out_dir.join(name);
    fs::write(&path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::Internal)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_sidecar_log(
    out_dir: &Path,
    name: &str,
    started: std::time::SystemTime,
) -> Result<(), CliError> {
    let to_secs = |t: std::time::SystemTime| {
        t.duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    };
    let content = format!(
        "started_unix_seconds={}\nfinished_unix_seconds={}\n",
        to_secs(started),
        to_secs(std::time::SystemTime::now())
    );
    let path = out_dir.join(format!("{name}.log"));
    fs::write(&path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::Internal)
}

fn csv_with_meta(meta: &Meta, header: &str, rows: &[String]) -> String {
    let meta_line = serde_json::to_string(meta).expect("meta serializes");
    let mut out = String::with_capacity(rows.len() * 32 + 128);
    out.push_str("# ");
    out.push_str(&meta_line);
    out.push('\n');
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

/// Mix a per-task index into the experiment seed.
fn substream_seed(seed: u64, index: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1))
}

/// Dispatch an experiment spec to its runner.
pub fn run_experiment(spec: &ExperimentFile, out_dir: &Path) -> Result<(), CliError> {
    spec.validate()?;
    let started = std::time::SystemTime::now();
    let name = match &spec.kind {
        ExperimentKind::Fig2Histogram(p) => {
            run_fig2(spec.seed, p, out_dir)?;
            "fig2_histogram"
        }
        ExperimentKind::Fig3Reduction(p) => {
            run_fig3(spec.seed, p, out_dir)?;
            "fig3_reduction"
        }
        ExperimentKind::Fig4ErrorHist(p) => {
            run_fig4(spec.seed, p, out_dir)?;
            "fig4_error_hist"
        }
        ExperimentKind::ToffoliAnchor(p) => {
            run_toffoli(spec.seed, p, out_dir)?;
            "toffoli_anchor"
        }
    };
    write_sidecar_log(out_dir, name, started)
}

#[derive(Serialize)]
struct Fig2Summary {
    meta: serde_json::Value,
    ensemble: usize,
    mean_per_t: f64,
    std_per_t: f64,
    /// Fraction of merged blocks with per-T exponent below the robustness
    /// scaling constant 0.272 (base-4 runtime exponents).
    frac_below_0272: f64,
    frac_above_0272: f64,
    /// Fraction below the dyadic-negativity scaling constant 0.228.
    frac_below_0228: f64,
}

fn run_fig2(seed: u64, p: &Fig2Params, out_dir: &Path) -> Result<(), CliError> {
    let meta = Meta::new(
        Some(seed),
        serde_json::json!({"name": "fig2_histogram", "parameters": p}),
    );
    let per_circuit: Vec<(f64, f64)> = (0..p.ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, i));
            let c = gen_clifford_t(p.wires, p.cliffords, p.t_gates, &mut rng)
                .expect("generator parameters validated");
            let merged = merge_circuit(&c, &MergeConfig { n: p.n }).expect("merge");
            let fa = FrameAssignment::reference(&merged, FrameKind::RotatedPauli);
            let log2_n = circuit_negativity(&merged, &fa).expect("negativity");
            (log2_n, log2_n / p.t_gates as f64)
        })
        .collect();

    let rows: Vec<String> = per_circuit
        .iter()
        .enumerate()
        .map(|(i, (log2_n, per_t))| format!("{i},{log2_n},{per_t}"))
        .collect();
    write_artifact(
        out_dir,
        "fig2_per_t.csv",
        &csv_with_meta(&meta, "circuit,log2_negativity,per_t_exponent", &rows),
    )?;

    let xs: Vec<f64> = per_circuit.iter().map(|x| x.1).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    let frac = |limit: f64| xs.iter().filter(|&&x| x < limit).count() as f64 / xs.len() as f64;
    let summary = Fig2Summary {
        meta: meta.to_value(),
        ensemble: p.ensemble,
        mean_per_t: mean,
        std_per_t: var.sqrt(),
        frac_below_0272: frac(0.272),
        frac_above_0272: 1.0 - frac(0.272),
        frac_below_0228: frac(0.228),
    };
    write_artifact(out_dir, "fig2_summary.json", &to_canonical_json(&summary)?)?;
    println!(
        "fig2: mean per-T exponent {:.4}, {:.1}% below 0.272",
        mean,
        100.0 * summary.frac_below_0272
    );
    Ok(())
}

#[derive(Serialize)]
struct Fig3Cell {
    family: String,
    n: usize,
    ell: usize,
    cycles: usize,
    merged_initial: f64,
    final_log2_negativity: f64,
}

#[derive(Serialize)]
struct Fig3Summary {
    meta: serde_json::Value,
    unmerged_initial: serde_json::Value,
    cells: Vec<Fig3Cell>,
}

fn run_fig3(seed: u64, p: &Fig3Params, out_dir: &Path) -> Result<(), CliError> {
    let meta = Meta::new(
        Some(seed),
        serde_json::json!({"name": "fig3_reduction", "parameters": p}),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let circuit = gen_haar_circuit(p.wires, p.gates, &mut rng)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let mut unmerged = serde_json::Map::new();
    for family in &p.families {
        let kind = FrameKind::from_name(family).expect("validated");
        let total = circuit_negativity(&circuit, &FrameAssignment::reference(&circuit, kind))
            .map_err(CliError::internal_core)?;
        unmerged.insert(family.clone(), serde_json::json!(total));
    }

    let grid: Vec<(String, usize, usize)> = p
        .families
        .iter()
        .flat_map(|f| {
            p.n_values
                .iter()
                .flat_map(move |&n| p.ell_values.iter().map(move |&ell| (f.clone(), n, ell)))
        })
        .collect();

    let results: Vec<(String, usize, usize, Vec<f64>)> = grid
        .par_iter()
        .map(|(family, n, ell)| {
            let kind = FrameKind::from_name(family).expect("validated");
            let merged = merge_circuit(&circuit, &MergeConfig { n: *n }).expect("merge");
            let fa0 = FrameAssignment::reference(&merged, kind);
            let cfg = OptConfig {
                ell: *ell,
                hops: p.hops,
                local_iters: p.local_iters,
                step_scale: p.step_scale,
                seed,
                ..OptConfig::default()
            };
            let out = optimise_frames(&merged, &fa0, &cfg).expect("optimisation");
            (family.clone(), *n, *ell, out.trace)
        })
        .collect();

    let mut cells = Vec::new();
    for (family, n, ell, trace) in &results {
        let rows: Vec<String> = trace
            .iter()
            .enumerate()
            .map(|(cycle, v)| format!("{cycle},{v}"))
            .collect();
        write_artifact(
            out_dir,
            &format!("fig3_{family}_n{n}_ell{ell}.csv"),
            &csv_with_meta(&meta, "cycle,log2_negativity", &rows),
        )?;
        cells.push(Fig3Cell {
            family: family.clone(),
            n: *n,
            ell: *ell,
            cycles: trace.len() - 1,
            merged_initial: trace[0],
            final_log2_negativity: *trace.last().expect("trace non-empty"),
        });
    }
    let summary = Fig3Summary {
        meta: meta.to_value(),
        unmerged_initial: serde_json::Value::Object(unmerged),
        cells,
    };
    write_artifact(out_dir, "fig3_summary.json", &to_canonical_json(&summary)?)?;
    Ok(())
}

#[derive(Serialize)]
struct Fig4Summary {
    meta: serde_json::Value,
    ensemble: usize,
    median_err_unmerged: f64,
    median_err_merged: f64,
    median_err_optimised: f64,
    mean_err_unmerged: f64,
    mean_err_merged: f64,
    mean_err_optimised: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v[v.len() / 2]
}

fn run_fig4(seed: u64, p: &Fig4Params, out_dir: &Path) -> Result<(), CliError> {
    let meta = Meta::new(
        Some(seed),
        serde_json::json!({"name": "fig4_error_hist", "parameters": p}),
    );
    let rows_data: Vec<(f64, f64, f64, f64)> = (0..p.ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, i));
            let c = gen_haar_circuit(p.wires, p.gates, &mut rng).expect("generator");
            let p_exact = exact_probability(&c).expect("oracle");

            let fa = FrameAssignment::reference(&c, FrameKind::Wigner);
            let cc = compile(&c, &fa).expect("compile");
            let p_unmerged = estimate(&cc, p.samples, substream_seed(seed, 3 * i + 1), 1)
                .expect("estimate")
                .p_est;

            let merged = merge_circuit(&c, &MergeConfig { n: p.n }).expect("merge");
            let merged_fa = FrameAssignment::reference(&merged, FrameKind::Wigner);
            let cc_merged = compile(&merged, &merged_fa).expect("compile");
            let p_merged = estimate(&cc_merged, p.samples, substream_seed(seed, 3 * i + 2), 1)
                .expect("estimate")
                .p_est;

            let cfg = OptConfig {
                ell: p.ell,
                hops: p.hops,
                local_iters: p.local_iters,
                seed: substream_seed(seed, i),
                ..OptConfig::default()
            };
            let opt = optimise_frames(&merged, &merged_fa, &cfg).expect("optimisation");
            let cc_opt = compile(&merged, &opt.assignment).expect("compile");
            let p_opt = estimate(&cc_opt, p.samples, substream_seed(seed, 3 * i + 3), 1)
                .expect("estimate")
                .p_est;
            (p_exact, p_unmerged, p_merged, p_opt)
        })
        .collect();

    let rows: Vec<String> = rows_data
        .iter()
        .enumerate()
        .map(|(i, (pe, pu, pm, po))| {
            format!(
                "{i},{pe},{pu},{pm},{po},{},{},{}",
                (pu - pe).abs(),
                (pm - pe).abs(),
                (po - pe).abs()
            )
        })
        .collect();
    write_artifact(
        out_dir,
        "fig4_errors.csv",
        &csv_with_meta(
            &meta,
            "circuit,p_exact,p_unmerged,p_merged,p_optimised,err_unmerged,err_merged,err_optimised",
            &rows,
        ),
    )?;

    let errs = |f: fn(&(f64, f64, f64, f64)) -> f64| rows_data.iter().map(f).collect::<Vec<_>>();
    let e_un = errs(|r| (r.1 - r.0).abs());
    let e_me = errs(|r| (r.2 - r.0).abs());
    let e_op = errs(|r| (r.3 - r.0).abs());
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let summary = Fig4Summary {
        meta: meta.to_value(),
        ensemble: p.ensemble,
        median_err_unmerged: median(e_un.clone()),
        median_err_merged: median(e_me.clone()),
        median_err_optimised: median(e_op.clone()),
        mean_err_unmerged: mean(&e_un),
        mean_err_merged: mean(&e_me),
        mean_err_optimised: mean(&e_op),
    };
    write_artifact(out_dir, "fig4_summary.json", &to_canonical_json(&summary)?)?;
    println!(
        "fig4: median |p_est - p_exact| unmerged {:.4}, merged {:.5}, optimised {:.5}",
        summary.median_err_unmerged, summary.median_err_merged, summary.median_err_optimised
    );
    Ok(())
}

#[derive(Serialize)]
struct ToffoliAnchorReport {
    meta: serde_json::Value,
    toffoli: f64,
    t_fourth_power: f64,
}

fn run_toffoli(seed: u64, p: &ToffoliParams, out_dir: &Path) -> Result<(), CliError> {
    let meta = Meta::new(
        Some(seed),
        serde_json::json!({"name": "toffoli_anchor", "parameters": p}),
    );
    let fp = FrameKind::RotatedPauli.reference();
    let toffoli = Gate::new(
        library::ccx(),
        WireSupport::new(vec![0, 1, 2]).expect("distinct"),
        "CCX",
    )
    .expect("unitary");
    let frames = [&fp, &fp, &fp];
    let n_toffoli = gate_tensor(&toffoli, &frames, &frames)
        .map_err(CliError::internal_core)?
        .negativity();

    let t = Gate::new(
        library::t(),
        WireSupport::new(vec![0]).expect("distinct"),
        "T",
    )
    .expect("unitary");
    let n_t = gate_tensor(&t, &[&fp], &[&fp])
        .map_err(CliError::internal_core)?
        .negativity();

    let report = ToffoliAnchorReport {
        meta: meta.to_value(),
        toffoli: n_toffoli,
        t_fourth_power: n_t.powi(4),
    };
    write_artifact(out_dir, "toffoli_anchor.json", &to_canonical_json(&report)?)?;
    println!(
        "toffoli_anchor: N_Toffoli = {n_toffoli}, [N_T]^4 = {}",
        report.t_fourth_power
    );
    Ok(())
}
