//! Circuit and frame-assignment file formats.
//!
//! Circuits are UTF-8 JSON documents:
//!
//! ```json
//! {
//!   "d": 2,
//!   "wires": 2,
//!   "inputs": ["zero", "plus"],
//!   "gates": [
//!     {"name": "H", "wires": [0]},
//!     {"name": "PHASE", "wires": [1], "phase": 0.25},
//!     {"matrix": [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]], "wires": [0]}
//!   ],
//!   "effects": ["proj0", "identity"]
//! }
//! ```
//!
//! Inputs and effects are either library names or 2x2 complex matrices given
//! as rows of `[re, im]` pairs. Canonical serialization sorts object keys
//! (via `serde_json::Value`) and prints every float with 17 significant
//! digits, so re-serialising a parsed document is byte-stable and lossless.

use std::io;

use qpsim_core::circuit::{library, Circuit, Gate};
use qpsim_core::frames::{make_frame, FrameKind, FramePair};
use qpsim_core::numerics::{CMatrix, WireSupport};
use qpsim_core::quasiprob::{FrameAssignment, SegmentTopology};
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

/// Errors from reading or validating document files.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("JSON syntax: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {source}")]
    Invalid {
        context: String,
        source: qpsim_core::Error,
    },
    #[error("{0}")]
    Schema(String),
}

impl FormatError {
    fn schema(msg: impl Into<String>) -> Self {
        FormatError::Schema(msg.into())
    }
}

fn invalid(context: impl Into<String>) -> impl FnOnce(qpsim_core::Error) -> FormatError {
    let context = context.into();
    move |source| FormatError::Invalid { context, source }
}

// ---------------------------------------------------------------------------
// canonical JSON writer

struct CanonicalFormatter<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

impl<'a> CanonicalFormatter<'a> {
    fn new() -> Self {
        Self {
            inner: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

impl<'a> serde_json::ser::Formatter for CanonicalFormatter<'a> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // 17 significant digits: enough to reproduce any f64 exactly.
        write!(writer, "{:.16e}", value)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_array(&mut self.inner, writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_array(&mut self.inner, writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        serde_json::ser::Formatter::begin_array_value(&mut self.inner, writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_array_value(&mut self.inner, writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object(&mut self.inner, writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_object(&mut self.inner, writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object_key(&mut self.inner, writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object_value(&mut self.inner, writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_object_value(&mut self.inner, writer)
    }
}

/// Serialize any value as canonical JSON: sorted keys, 17-significant-digit
/// floats, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, FormatError> {
    let tree = serde_json::to_value(value)?; // Value objects sort their keys
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter::new());
    tree.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

// ---------------------------------------------------------------------------
// circuit documents

type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OperatorSpec {
    Named(String),
    Matrix(MatrixRows),
}

#[derive(Serialize, Deserialize)]
struct GateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<MatrixRows>,
    wires: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    d: usize,
    wires: usize,
    inputs: Vec<OperatorSpec>,
    gates: Vec<GateSpec>,
    effects: Vec<OperatorSpec>,
    /// Replay metadata attached by generators; ignored on parse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

fn matrix_from_rows(rows: &MatrixRows, what: &str) -> Result<CMatrix, FormatError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(FormatError::schema(format!(
            "{what}: matrix must be square and non-empty"
        )));
    }
    let entries = rows
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    CMatrix::new(n, n, entries).map_err(invalid(format!("{what}: bad matrix")))
}

fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

fn resolve_state(spec: &OperatorSpec, idx: usize) -> Result<CMatrix, FormatError> {
    match spec {
        OperatorSpec::Named(name) => library::state_by_name(name)
            .ok_or_else(|| FormatError::schema(format!("inputs[{idx}]: unknown state '{name}'"))),
        OperatorSpec::Matrix(rows) => matrix_from_rows(rows, &format!("inputs[{idx}]")),
    }
}

fn resolve_effect(spec: &OperatorSpec, idx: usize) -> Result<CMatrix, FormatError> {
    match spec {
        OperatorSpec::Named(name) => library::effect_by_name(name)
            .ok_or_else(|| FormatError::schema(format!("effects[{idx}]: unknown effect '{name}'"))),
        OperatorSpec::Matrix(rows) => matrix_from_rows(rows, &format!("effects[{idx}]")),
    }
}

fn resolve_gate(spec: &GateSpec, idx: usize) -> Result<Gate, FormatError> {
    let support = WireSupport::new(spec.wires.clone())
        .map_err(invalid(format!("gates[{idx}]: bad wires")))?;
    let (matrix, label) = match (&spec.name, &spec.matrix) {
        (Some(name), None) => {
            if spec.phase.is_some() && !name.eq_ignore_ascii_case("phase") {
                return Err(FormatError::schema(format!(
                    "gates[{idx}]: 'phase' is only valid for the PHASE gate"
                )));
            }
            let m = library::gate_by_name(name, spec.phase).ok_or_else(|| {
                if name.eq_ignore_ascii_case("phase") && spec.phase.is_none() {
                    FormatError::schema(format!("gates[{idx}]: PHASE requires a 'phase' angle"))
                } else {
                    FormatError::schema(format!("gates[{idx}]: unknown gate '{name}'"))
                }
            })?;
            (m, name.to_uppercase())
        }
        (None, Some(rows)) => {
            let m = matrix_from_rows(rows, &format!("gates[{idx}]"))?;
            let label = format!("U{}", spec.wires.len());
            (m, label)
        }
        _ => {
            return Err(FormatError::schema(format!(
                "gates[{idx}]: exactly one of 'name' or 'matrix' is required"
            )))
        }
    };
    Gate::new(matrix, support, label).map_err(invalid(format!("gates[{idx}]")))
}

/// Parse a circuit document, resolving named components from the library and
/// validating every invariant (unitarity, state and effect constraints).
pub fn parse_circuit(text: &str) -> Result<Circuit, FormatError> {
    let doc: CircuitDoc = serde_json::from_str(text)?;
    if doc.inputs.len() != doc.wires || doc.effects.len() != doc.wires {
        return Err(FormatError::schema(format!(
            "document declares {} wires but has {} inputs and {} effects",
            doc.wires,
            doc.inputs.len(),
            doc.effects.len()
        )));
    }
    let inputs = doc
        .inputs
        .iter()
        .enumerate()
        .map(|(i, s)| resolve_state(s, i))
        .collect::<Result<Vec<_>, _>>()?;
    let effects = doc
        .effects
        .iter()
        .enumerate()
        .map(|(i, s)| resolve_effect(s, i))
        .collect::<Result<Vec<_>, _>>()?;
    let gates = doc
        .gates
        .iter()
        .enumerate()
        .map(|(i, s)| resolve_gate(s, i))
        .collect::<Result<Vec<_>, _>>()?;
    Circuit::new(doc.d, doc.wires, inputs, gates, effects).map_err(invalid("circuit"))
}

fn state_spec(m: &CMatrix) -> OperatorSpec {
    for name in ["zero", "one", "plus", "minus", "magic_t"] {
        if library::state_by_name(name).unwrap().approx_eq(m, 1e-15) {
            return OperatorSpec::Named(name.to_string());
        }
    }
    OperatorSpec::Matrix(matrix_to_rows(m))
}

fn effect_spec(m: &CMatrix) -> OperatorSpec {
    for name in ["proj0", "proj1", "identity"] {
        if library::effect_by_name(name).unwrap().approx_eq(m, 1e-15) {
            return OperatorSpec::Named(name.to_string());
        }
    }
    OperatorSpec::Matrix(matrix_to_rows(m))
}

fn gate_spec(g: &Gate) -> GateSpec {
    // Emit a library name when the label identifies a parameter-free library
    // gate and the matrix matches it exactly; everything else goes as an
    // explicit matrix.
    if let Some(m) = library::gate_by_name(&g.label, None) {
        if m.approx_eq(&g.matrix, 1e-15) {
            return GateSpec {
                name: Some(g.label.clone()),
                matrix: None,
                wires: g.support.wires().to_vec(),
                phase: None,
            };
        }
    }
    GateSpec {
        name: None,
        matrix: Some(matrix_to_rows(&g.matrix)),
        wires: g.support.wires().to_vec(),
        phase: None,
    }
}

/// Serialize a circuit canonically, with optional replay metadata.
pub fn serialize_circuit(
    c: &Circuit,
    meta: Option<serde_json::Value>,
) -> Result<String, FormatError> {
    let doc = CircuitDoc {
        d: c.d,
        wires: c.num_wires,
        inputs: c.inputs.iter().map(state_spec).collect(),
        gates: c.gates.iter().map(gate_spec).collect(),
        effects: c.effects.iter().map(effect_spec).collect(),
        meta,
    };
    to_canonical_json(&doc)
}

// ---------------------------------------------------------------------------
// frame assignment documents

#[derive(Serialize, Deserialize)]
struct SegmentFrameSpec {
    segment_id: usize,
    kind: String,
    params: Vec<f64>,
}

/// Parse a frame-assignment file against a circuit's segment topology.
///
/// The file must cover every segment id exactly once.
pub fn parse_frames(text: &str, circuit: &Circuit) -> Result<FrameAssignment, FormatError> {
    let specs: Vec<SegmentFrameSpec> = serde_json::from_str(text)?;
    let topology = SegmentTopology::new(circuit);
    let n = topology.num_segments();
    let mut slots: Vec<Option<FramePair>> = vec![None; n];
    for spec in &specs {
        if spec.segment_id >= n {
            return Err(FormatError::schema(format!(
                "segment_id {} out of range (circuit has {} segments)",
                spec.segment_id, n
            )));
        }
        if slots[spec.segment_id].is_some() {
            return Err(FormatError::schema(format!(
                "segment_id {} assigned twice",
                spec.segment_id
            )));
        }
        let kind = FrameKind::from_name(&spec.kind)
            .ok_or_else(|| FormatError::schema(format!("unknown frame kind '{}'", spec.kind)))?;
        let frame = make_frame(kind, &spec.params)
            .map_err(invalid(format!("segment {}", spec.segment_id)))?;
        slots[spec.segment_id] = Some(frame);
    }
    let frames: Vec<FramePair> = slots
        .into_iter()
        .enumerate()
        .map(|(i, f)| f.ok_or_else(|| FormatError::schema(format!("segment {i} has no frame"))))
        .collect::<Result<_, _>>()?;
    FrameAssignment::from_frames(topology, frames).map_err(invalid("frame assignment"))
}

/// Serialize a frame assignment canonically.
pub fn serialize_frames(fa: &FrameAssignment) -> Result<String, FormatError> {
    let specs: Vec<SegmentFrameSpec> = fa
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| SegmentFrameSpec {
            segment_id: i,
            kind: f.kind().name().to_string(),
            params: f.params().to_vec(),
        })
        .collect();
    to_canonical_json(&specs)
}
