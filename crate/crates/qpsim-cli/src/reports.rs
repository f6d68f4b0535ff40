//! Serializable report structures emitted by the subcommands.

use qpsim_core::quasiprob::ComponentNegativity;
use qpsim_core::EstimateReport;
use serde::Serialize;

/// Replay metadata embedded in every artifact file.
#[derive(Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub spec: serde_json::Value,
}

impl Meta {
    pub fn new(seed: Option<u64>, spec: serde_json::Value) -> Self {
        Self {
            tool: "qpsim",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            spec,
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("meta serializes")
    }
}

#[derive(Serialize)]
pub struct ComponentReport {
    pub kind: &'static str,
    pub label: String,
    pub wires: Vec<usize>,
    pub log2_negativity: f64,
}

impl From<ComponentNegativity> for ComponentReport {
    fn from(c: ComponentNegativity) -> Self {
        Self {
            kind: c.kind,
            label: c.label,
            wires: c.wires,
            log2_negativity: c.log2_negativity,
        }
    }
}

#[derive(Serialize)]
pub struct NegativityReport {
    pub meta: serde_json::Value,
    pub per_component: Vec<ComponentReport>,
    pub total_log2_negativity: f64,
}

#[derive(Serialize)]
pub struct MergeReport {
    pub meta: serde_json::Value,
    pub gates_before: usize,
    pub gates_after: usize,
    pub log2_negativity_before: f64,
    pub log2_negativity_after: f64,
}

#[derive(Serialize)]
pub struct EstimateReportDoc {
    pub meta: serde_json::Value,
    pub p_est: f64,
    pub samples: u64,
    pub n_c_log2: f64,
    pub std_error: f64,
    pub elapsed_seconds: f64,
    pub seed: u64,
}

impl EstimateReportDoc {
    pub fn new(meta: serde_json::Value, r: &EstimateReport) -> Self {
        Self {
            meta,
            p_est: r.p_est,
            samples: r.samples,
            n_c_log2: r.n_c_log2,
            std_error: r.std_error,
            elapsed_seconds: r.elapsed_seconds,
            seed: r.seed,
        }
    }
}

#[derive(Serialize)]
pub struct OracleReport {
    pub meta: serde_json::Value,
    pub p_exact: f64,
}

#[derive(Serialize)]
pub struct PipelineReport {
    pub meta: serde_json::Value,
    pub log2_negativity_initial: f64,
    pub log2_negativity_merged: f64,
    pub log2_negativity_optimised: f64,
    pub gates_before: usize,
    pub gates_after: usize,
    pub samples: u64,
    pub p_est: f64,
    pub std_error: f64,
    pub elapsed_seconds: f64,
    pub seed: u64,
}
