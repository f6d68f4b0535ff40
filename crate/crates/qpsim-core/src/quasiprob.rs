//! Quasi-probability representations of circuit components and their
//! negativities.
//!
//! Under a frame assignment, a state becomes the real vector
//! `W_rho(l) = Tr[F(l) rho]`, a gate the real matrix
//! `W_U(l'|l) = Tr[F'(l') U G(l) U^dagger]` and an effect the vector
//! `W_E(l) = Tr[E G(l)]`. Negativities are 1-norm-type quantities of these
//! objects; their product over the circuit is the sampling overhead.
//!
//! Multi-qudit phase points over a gate's support are indexed
//! lexicographically in the support's wire order: the first support wire is
//! the most significant base-`d^2` digit.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::error::Error;
use crate::frames::{displacement, phase_points, FrameKind, FramePair};
use crate::numerics::{kron_all, pow_usize, trace_inner, CMatrix};
use crate::Result;

/// Tolerance on imaginary residues of traces that must be real.
///
/// Applied relative to the trace magnitude (with an absolute floor of the
/// same value): frame operators may carry coefficients up to `1/g_min`, so a
/// mathematically real trace of size ~1e4 legitimately carries an absolute
/// imaginary rounding residue above 1e-10 while a genuine phase error shows
/// up at relative O(1) and is always rejected.
pub const IMAG_TOL: f64 = 1e-10;

#[inline]
fn real_part_checked(tr: num_complex::Complex64) -> Result<f64> {
    if tr.im.abs() > IMAG_TOL * tr.norm().max(1.0) {
        return Err(Error::ImaginaryResidue {
            residue: tr.im.abs(),
        });
    }
    Ok(tr.re)
}

/// Role of a quasi-probability vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistRole {
    State,
    Effect,
}

/// Real quasi-probability vector of a single-qudit state or effect.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiDist {
    pub values: Vec<f64>,
    pub role: DistRole,
}

impl QuasiDist {
    /// `sum_l |W(l)|` — the state negativity `N_rho`.
    pub fn one_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// `max_l |W(l)|` — the effect negativity.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Real transition matrix of one gate, columns indexed by input phase points.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionTensor {
    n_points: usize,
    /// Column-major storage: `values[col * n_points + row]`.
    values: Vec<f64>,
    col_norms: Vec<f64>,
    negativity: f64,
}

impl TransitionTensor {
    fn from_col_major(n_points: usize, values: Vec<f64>) -> Self {
        let col_norms: Vec<f64> = (0..n_points)
            .map(|c| {
                values[c * n_points..(c + 1) * n_points]
                    .iter()
                    .map(|v| v.abs())
                    .sum()
            })
            .collect();
        let negativity = col_norms.iter().copied().fold(0.0, f64::max);
        Self {
            n_points,
            values,
            col_norms,
            negativity,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// `W(l'|l)` with `l'` the row (output) and `l` the column (input).
    pub fn value(&self, out_point: usize, in_point: usize) -> f64 {
        self.values[in_point * self.n_points + out_point]
    }

    pub fn column(&self, in_point: usize) -> &[f64] {
        &self.values[in_point * self.n_points..(in_point + 1) * self.n_points]
    }

    /// Column 1-norms `N_U(l)`.
    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    /// `max_l N_U(l)` — the gate negativity.
    pub fn negativity(&self) -> f64 {
        self.negativity
    }
}

/// Per-wire quasi-probability of a single-qudit state: `Tr[F(l) rho]`.
pub fn state_dist(rho: &CMatrix, fp: &FramePair) -> Result<QuasiDist> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::InvalidState {
            context: format!(
                "expected single-qudit state, got {}x{}",
                rho.rows(),
                rho.cols()
            ),
        });
    }
    if !rho.is_hermitian(IMAG_TOL) {
        return Err(Error::InvalidState {
            context: String::from("state is not Hermitian"),
        });
    }
    let mut values = Vec::with_capacity(fp.num_points());
    for idx in 0..fp.num_points() {
        values.push(real_part_checked(trace_inner(fp.f_op(idx), rho)?)?);
    }
    Ok(QuasiDist {
        values,
        role: DistRole::State,
    })
}

/// Per-wire quasi-probability of a single-qudit effect: `Tr[E G(l)]`.
pub fn effect_dist(e: &CMatrix, fp: &FramePair) -> Result<QuasiDist> {
    if e.rows() != 2 || e.cols() != 2 {
        return Err(Error::InvalidEffect {
            context: format!(
                "expected single-qudit effect, got {}x{}",
                e.rows(),
                e.cols()
            ),
        });
    }
    if !e.is_hermitian(IMAG_TOL) {
        return Err(Error::InvalidEffect {
            context: String::from("effect is not Hermitian"),
        });
    }
    let mut values = Vec::with_capacity(fp.num_points());
    for idx in 0..fp.num_points() {
        values.push(real_part_checked(trace_inner(e, fp.g_op(idx))?)?);
    }
    Ok(QuasiDist {
        values,
        role: DistRole::Effect,
    })
}

fn check_frame_arity(
    arity: usize,
    in_frames: &[&FramePair],
    out_frames: &[&FramePair],
) -> Result<()> {
    if in_frames.len() != arity || out_frames.len() != arity {
        return Err(Error::DimensionMismatch {
            context: format!(
                "gate on {} wires got {} input and {} output frames",
                arity,
                in_frames.len(),
                out_frames.len()
            ),
        });
    }
    Ok(())
}

/// Tensor product of per-wire frame operators for a joint phase point.
fn joint_op(frames: &[&FramePair], joint: usize, dual: bool) -> CMatrix {
    let k = frames.len();
    let factors: Vec<&CMatrix> = (0..k)
        .map(|i| {
            let digit = (joint / pow_usize(4, k - 1 - i)) % 4;
            if dual {
                frames[i].g_op(digit)
            } else {
                frames[i].f_op(digit)
            }
        })
        .collect();
    kron_all(&factors)
}

/// Transition tensor `W_U(l'|l) = Tr[F'(l') U G(l) U^dagger]` of one gate.
///
/// Column-major evaluation: each input point's dual operator is conjugated by
/// the gate once, then traced against every output frame operator. Columns
/// are independent and run in parallel when the `parallel` feature is on.
pub fn gate_tensor(
    gate: &Gate,
    in_frames: &[&FramePair],
    out_frames: &[&FramePair],
) -> Result<TransitionTensor> {
    check_frame_arity(gate.arity(), in_frames, out_frames)?;
    tensor_from_matrix(&gate.matrix, in_frames, out_frames)
}

pub(crate) fn tensor_from_matrix(
    u: &CMatrix,
    in_frames: &[&FramePair],
    out_frames: &[&FramePair],
) -> Result<TransitionTensor> {
    let k = in_frames.len();
    let n_points = pow_usize(4, k);
    let f_out: Vec<CMatrix> = (0..n_points)
        .map(|row| joint_op(out_frames, row, false))
        .collect();

    let column = |col: usize| -> Result<Vec<f64>> {
        let g_in = joint_op(in_frames, col, true);
        let conj = g_in.conjugate_by(u)?;
        let mut out = Vec::with_capacity(n_points);
        for f in &f_out {
            out.push(real_part_checked(trace_inner(f, &conj)?)?);
        }
        Ok(out)
    };

    #[cfg(feature = "parallel")]
    let columns: Vec<Vec<f64>> = if n_points >= 64 {
        (0..n_points)
            .into_par_iter()
            .map(column)
            .collect::<Result<_>>()?
    } else {
        (0..n_points).map(column).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let columns: Vec<Vec<f64>> = (0..n_points).map(column).collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(n_points * n_points);
    for col in columns {
        values.extend_from_slice(&col);
    }
    Ok(TransitionTensor::from_col_major(n_points, values))
}

/// Frame-independent kernel of a gate: its transition matrix in the
/// displacement basis, `K(m'|m) = Tr[D(m') U D(m) U^dagger]`.
///
/// Building `K` costs as much as one `gate_tensor` call, but afterwards the
/// tensor for *any* frame choice is assembled from the frames' cached
/// displacement-basis coefficients with a few dense 4x4 leg contractions.
/// The frame optimiser evaluates thousands of frame candidates per gate, so
/// it works through kernels; results agree with [`gate_tensor`] to within
/// floating-point roundoff.
#[derive(Clone, Debug)]
pub struct GateKernel {
    arity: usize,
    n_points: usize,
    /// Row-major `K[out * n_points + in]`.
    k: Vec<f64>,
}

impl GateKernel {
    pub fn new(gate: &Gate) -> Result<Self> {
        Self::from_matrix(&gate.matrix)
    }

    pub fn from_matrix(u: &CMatrix) -> Result<Self> {
        let dim = u.rows();
        let mut arity = 0usize;
        while pow_usize(2, arity) < dim {
            arity += 1;
        }
        if pow_usize(2, arity) != dim || !u.is_square() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "gate matrix {}x{} is not a qubit operator",
                    u.rows(),
                    u.cols()
                ),
            });
        }
        let n_points = pow_usize(4, arity);

        let single: Vec<CMatrix> = phase_points(2)
            .iter()
            .map(|pt| displacement(pt.p, pt.q, 2))
            .collect::<Result<_>>()?;
        let joint_disp = |joint: usize| -> CMatrix {
            let factors: Vec<&CMatrix> = (0..arity)
                .map(|i| &single[(joint / pow_usize(4, arity - 1 - i)) % 4])
                .collect();
            kron_all(&factors)
        };
        let disp: Vec<CMatrix> = (0..n_points).map(joint_disp).collect();

        let column = |col: usize| -> Result<Vec<f64>> {
            let conj = disp[col].conjugate_by(u)?;
            let mut out = Vec::with_capacity(n_points);
            for dm in &disp {
                out.push(real_part_checked(trace_inner(dm, &conj)?)?);
            }
            Ok(out)
        };

        #[cfg(feature = "parallel")]
        let columns: Vec<Vec<f64>> = if n_points >= 64 {
            (0..n_points)
                .into_par_iter()
                .map(column)
                .collect::<Result<_>>()?
        } else {
            (0..n_points).map(column).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let columns: Vec<Vec<f64>> = (0..n_points).map(column).collect::<Result<_>>()?;

        let mut k = vec![0.0f64; n_points * n_points];
        for (col, vals) in columns.iter().enumerate() {
            for (row, &v) in vals.iter().enumerate() {
                k[row * n_points + col] = v;
            }
        }
        Ok(Self { arity, n_points, k })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Assemble the transition tensor for the given frames.
    pub fn tensor(
        &self,
        in_frames: &[&FramePair],
        out_frames: &[&FramePair],
    ) -> Result<TransitionTensor> {
        check_frame_arity(self.arity, in_frames, out_frames)?;
        let p = self.n_points;
        let mut data = self.k.clone();
        // Input side: G(l) = sum_m g_disp[l, m] D(m), contracted digit by
        // digit on the column index.
        for (i, fp) in in_frames.iter().enumerate() {
            let stride = pow_usize(4, self.arity - 1 - i);
            transform_col_digit(&mut data, p, stride, fp.g_disp_coeffs());
        }
        // Output side: F'(l') expansion carries the 1/d per wire, contracted
        // on the row index. Tr[D(m') D(n')] = d^k delta soaks up the rest.
        for (j, fp) in out_frames.iter().enumerate() {
            let stride = pow_usize(4, self.arity - 1 - j);
            transform_row_digit(&mut data, p, stride, fp.f_disp_coeffs());
        }
        // data is row-major W[l'][l]; the tensor wants column-major.
        let mut values = vec![0.0f64; p * p];
        for row in 0..p {
            for col in 0..p {
                values[col * p + row] = data[row * p + col];
            }
        }
        Ok(TransitionTensor::from_col_major(p, values))
    }
}

/// Replace digit `t` of the column index: `new[.., l] = sum_m m4[l, m] old[.., m]`.
fn transform_col_digit(data: &mut [f64], p: usize, stride: usize, m4: &[f64]) {
    let block = stride * 4;
    for row in 0..p {
        let slice = &mut data[row * p..(row + 1) * p];
        for big in (0..p).step_by(block) {
            for small in 0..stride {
                let base = big + small;
                let old = [
                    slice[base],
                    slice[base + stride],
                    slice[base + 2 * stride],
                    slice[base + 3 * stride],
                ];
                for t in 0..4 {
                    slice[base + t * stride] = m4[t * 4] * old[0]
                        + m4[t * 4 + 1] * old[1]
                        + m4[t * 4 + 2] * old[2]
                        + m4[t * 4 + 3] * old[3];
                }
            }
        }
    }
}

/// Replace digit `t` of the row index: `new[l, ..] = sum_m m4[l, m] old[m, ..]`.
fn transform_row_digit(data: &mut [f64], p: usize, stride: usize, m4: &[f64]) {
    let block = stride * 4;
    let mut old_rows = vec![0.0f64; 4 * p];
    for big in (0..p).step_by(block) {
        for small in 0..stride {
            let base = big + small;
            for t in 0..4 {
                old_rows[t * p..(t + 1) * p]
                    .copy_from_slice(&data[(base + t * stride) * p..(base + t * stride + 1) * p]);
            }
            for t in 0..4 {
                let row = &mut data[(base + t * stride) * p..(base + t * stride + 1) * p];
                for c in 0..p {
                    row[c] = m4[t * 4] * old_rows[c]
                        + m4[t * 4 + 1] * old_rows[p + c]
                        + m4[t * 4 + 2] * old_rows[2 * p + c]
                        + m4[t * 4 + 3] * old_rows[3 * p + c];
                }
            }
        }
    }
}

/// One circuit component, identified positionally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentRef {
    /// Input state of a wire.
    State(usize),
    /// Gate by index into the circuit's gate list.
    Gate(usize),
    /// Measurement effect of a wire.
    Effect(usize),
}

/// Wire-segment structure of a circuit.
///
/// A segment spans one wire between consecutive components: from the input
/// state to the first gate touching the wire, between consecutive gates, and
/// from the last gate to the effect. Each segment carries one frame.
///
/// Segments are numbered in temporal order: ids `0..N` are the input
/// segments of wires `0..N`, and each gate then appends one fresh segment per
/// support wire (in support order) for its output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentTopology {
    num_wires: usize,
    num_segments: usize,
    input_seg: Vec<usize>,
    gate_in: Vec<Vec<usize>>,
    gate_out: Vec<Vec<usize>>,
    effect_seg: Vec<usize>,
    seg_components: Vec<Vec<ComponentRef>>,
}

impl SegmentTopology {
    pub fn new(c: &Circuit) -> Self {
        let n = c.num_wires;
        let mut current: Vec<usize> = (0..n).collect();
        let mut next_id = n;
        let mut gate_in = Vec::with_capacity(c.gates.len());
        let mut gate_out = Vec::with_capacity(c.gates.len());
        for g in &c.gates {
            let ins: Vec<usize> = g.support.wires().iter().map(|&w| current[w]).collect();
            let outs: Vec<usize> = g
                .support
                .wires()
                .iter()
                .map(|&w| {
                    let id = next_id;
                    next_id += 1;
                    current[w] = id;
                    id
                })
                .collect();
            gate_in.push(ins);
            gate_out.push(outs);
        }
        let effect_seg = current;
        let input_seg: Vec<usize> = (0..n).collect();

        let mut seg_components = vec![Vec::new(); next_id];
        for w in 0..n {
            seg_components[input_seg[w]].push(ComponentRef::State(w));
            seg_components[effect_seg[w]].push(ComponentRef::Effect(w));
        }
        for (gi, (ins, outs)) in gate_in.iter().zip(&gate_out).enumerate() {
            for &s in ins.iter().chain(outs.iter()) {
                seg_components[s].push(ComponentRef::Gate(gi));
            }
        }

        Self {
            num_wires: n,
            num_segments: next_id,
            input_seg,
            gate_in,
            gate_out,
            effect_seg,
            seg_components,
        }
    }

    pub fn num_segments(&self) -> usize {
        self.num_segments
    }

    pub fn num_wires(&self) -> usize {
        self.num_wires
    }

    pub fn input_segment(&self, wire: usize) -> usize {
        self.input_seg[wire]
    }

    pub fn effect_segment(&self, wire: usize) -> usize {
        self.effect_seg[wire]
    }

    pub fn gate_in_segments(&self, gate: usize) -> &[usize] {
        &self.gate_in[gate]
    }

    pub fn gate_out_segments(&self, gate: usize) -> &[usize] {
        &self.gate_out[gate]
    }

    /// Components adjacent to a segment.
    pub fn segment_components(&self, seg: usize) -> &[ComponentRef] {
        &self.seg_components[seg]
    }

    /// Segments adjacent to a component.
    pub fn component_segments(&self, comp: ComponentRef) -> Vec<usize> {
        match comp {
            ComponentRef::State(w) => vec![self.input_seg[w]],
            ComponentRef::Effect(w) => vec![self.effect_seg[w]],
            ComponentRef::Gate(g) => {
                let mut segs = self.gate_in[g].clone();
                segs.extend_from_slice(&self.gate_out[g]);
                segs
            }
        }
    }
}

/// Map from every wire segment to its frame: the optimisation variable.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameAssignment {
    topology: SegmentTopology,
    frames: Vec<FramePair>,
}

impl FrameAssignment {
    /// Same frame on every segment.
    pub fn uniform(c: &Circuit, frame: &FramePair) -> Self {
        let topology = SegmentTopology::new(c);
        let frames = vec![frame.clone(); topology.num_segments()];
        Self { topology, frames }
    }

    /// Reference frame of a family on every segment.
    pub fn reference(c: &Circuit, kind: FrameKind) -> Self {
        Self::uniform(c, &kind.reference())
    }

    /// Explicit per-segment frames; must cover the topology exactly.
    pub fn from_frames(topology: SegmentTopology, frames: Vec<FramePair>) -> Result<Self> {
        if frames.len() != topology.num_segments() {
            return Err(Error::InvalidConfig {
                context: format!(
                    "{} segments need {} frames, got {}",
                    topology.num_segments(),
                    topology.num_segments(),
                    frames.len()
                ),
            });
        }
        Ok(Self { topology, frames })
    }

    pub fn topology(&self) -> &SegmentTopology {
        &self.topology
    }

    pub fn num_segments(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, seg: usize) -> &FramePair {
        &self.frames[seg]
    }

    pub fn frames(&self) -> &[FramePair] {
        &self.frames
    }

    pub fn set_frame(&mut self, seg: usize, frame: FramePair) {
        self.frames[seg] = frame;
    }

    pub fn state_frame(&self, wire: usize) -> &FramePair {
        &self.frames[self.topology.input_segment(wire)]
    }

    pub fn effect_frame(&self, wire: usize) -> &FramePair {
        &self.frames[self.topology.effect_segment(wire)]
    }

    pub fn gate_in_frames(&self, gate: usize) -> Vec<&FramePair> {
        self.topology
            .gate_in_segments(gate)
            .iter()
            .map(|&s| &self.frames[s])
            .collect()
    }

    pub fn gate_out_frames(&self, gate: usize) -> Vec<&FramePair> {
        self.topology
            .gate_out_segments(gate)
            .iter()
            .map(|&s| &self.frames[s])
            .collect()
    }
}

/// Negativity of one circuit component, for reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentNegativity {
    pub kind: &'static str,
    pub label: String,
    pub wires: Vec<usize>,
    pub log2_negativity: f64,
}

/// Per-component negativities and the total, all in log2.
pub fn negativity_report(
    c: &Circuit,
    fa: &FrameAssignment,
) -> Result<(Vec<ComponentNegativity>, f64)> {
    let mut parts = Vec::new();
    let mut total = 0.0f64;
    for w in 0..c.num_wires {
        let dist = state_dist(&c.inputs[w], fa.state_frame(w))?;
        let l = dist.one_norm().log2();
        total += l;
        parts.push(ComponentNegativity {
            kind: "state",
            label: format!("rho{w}"),
            wires: vec![w],
            log2_negativity: l,
        });
    }
    for (gi, g) in c.gates.iter().enumerate() {
        let tensor = gate_tensor(g, &fa.gate_in_frames(gi), &fa.gate_out_frames(gi))?;
        let l = tensor.negativity().log2();
        total += l;
        parts.push(ComponentNegativity {
            kind: "gate",
            label: g.label.clone(),
            wires: g.support.wires().to_vec(),
            log2_negativity: l,
        });
    }
    for w in 0..c.num_wires {
        let dist = effect_dist(&c.effects[w], fa.effect_frame(w))?;
        let l = dist.max_abs().log2();
        total += l;
        parts.push(ComponentNegativity {
            kind: "effect",
            label: format!("E{w}"),
            wires: vec![w],
            log2_negativity: l,
        });
    }
    Ok((parts, total))
}

/// Total circuit negativity `N_C` under the assignment, as log2.
///
/// `N_C = prod_w N_rho_w x prod_l N_U_l x prod_w max_l |W_E_w|`, each factor
/// evaluated with its own segment's frames.
pub fn circuit_negativity(c: &Circuit, fa: &FrameAssignment) -> Result<f64> {
    let mut total = 0.0f64;
    for w in 0..c.num_wires {
        total += state_dist(&c.inputs[w], fa.state_frame(w))?
            .one_norm()
            .log2();
    }
    for (gi, g) in c.gates.iter().enumerate() {
        total += gate_tensor(g, &fa.gate_in_frames(gi), &fa.gate_out_frames(gi))?
            .negativity()
            .log2();
    }
    for w in 0..c.num_wires {
        total += effect_dist(&c.effects[w], fa.effect_frame(w))?
            .max_abs()
            .log2();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{library, Gate};
    use crate::frames::{make_pauli_frame, make_wigner_frame};
    use crate::numerics::{haar_unitary, WireSupport};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pauli_ref() -> FramePair {
        make_pauli_frame([0.0, 0.0, 0.0]).unwrap()
    }

    fn wigner_ref() -> FramePair {
        make_wigner_frame(&[1.0; 4]).unwrap()
    }

    fn random_frame(rng: &mut ChaCha8Rng) -> FramePair {
        if rng.gen_bool(0.5) {
            make_pauli_frame([
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ])
            .unwrap()
        } else {
            let mut g = [1.0; 4];
            for v in g.iter_mut().skip(1) {
                *v = (rng.gen_range(-1.5..1.5f64)).exp();
            }
            make_wigner_frame(&g).unwrap()
        }
    }

    fn random_density(rng: &mut ChaCha8Rng) -> CMatrix {
        // Mix two Haar-random pure states.
        let u = haar_unitary(2, rng);
        let p: f64 = rng.gen_range(0.0..1.0);
        let mut rho = CMatrix::zeros(2, 2);
        for (col, weight) in [(0usize, p), (1usize, 1.0 - p)] {
            for r in 0..2 {
                for c in 0..2 {
                    let add = u[(r, col)] * u[(c, col)].conj() * weight;
                    let cur = rho[(r, c)];
                    rho[(r, c)] = cur + add;
                }
            }
        }
        rho
    }

    #[test]
    fn state_dist_zero_in_bloch_frame() {
        let dist = state_dist(&library::state_zero(), &pauli_ref()).unwrap();
        let expect = [0.5, 0.0, 0.5, 0.0]; // over (I, X, Z, -Y)
        for (v, e) in dist.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!((dist.one_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wigner_state_dist_normalises() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let rho = random_density(&mut rng);
            let dist = state_dist(&rho, &wigner_ref()).unwrap();
            assert!((dist.values.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn magic_state_is_negative_in_bloch_frame() {
        let dist = state_dist(&library::state_magic_t(), &pauli_ref()).unwrap();
        // direct traces: (1/2, cos(pi/4)/2, 0, -sin(pi/4)/2), 1-norm = (1+sqrt2)/2
        assert!(dist.values.iter().any(|v| *v < -1e-12));
        let expect = (1.0 + 2.0f64.sqrt()) / 2.0;
        assert!((dist.one_norm() - expect).abs() < 1e-12);
        assert!(dist.one_norm() > 1.0);
    }

    #[test]
    fn identity_gate_tensor_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..6 {
            let fp = random_frame(&mut rng);
            let gate = Gate::new(
                CMatrix::identity(2),
                WireSupport::new(vec![0]).unwrap(),
                "I",
            )
            .unwrap();
            let t = gate_tensor(&gate, &[&fp], &[&fp]).unwrap();
            for r in 0..4 {
                for c in 0..4 {
                    let e = if r == c { 1.0 } else { 0.0 };
                    assert!((t.value(r, c) - e).abs() < 1e-10);
                }
            }
            assert!((t.negativity() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn t_gate_bloch_column_and_negativity() {
        let fp = pauli_ref();
        let gate = Gate::new(library::t(), WireSupport::new(vec![0]).unwrap(), "T").unwrap();
        let tensor = gate_tensor(&gate, &[&fp], &[&fp]).unwrap();
        // input point (0,1) = X: T X T^dag = (X + Y)/sqrt2 -> (0, 1/sqrt2, 0, -1/sqrt2)
        let col = tensor.column(1);
        let s = 1.0 / 2.0f64.sqrt();
        let expect = [0.0, s, 0.0, -s];
        for (v, e) in col.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12, "column {col:?}");
        }
        assert!((tensor.negativity() - 2.0f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn clifford_gates_are_bloch_classical() {
        let fp = pauli_ref();
        for (label, m, wires) in [
            ("H", library::h(), vec![0]),
            ("S", library::s(), vec![0]),
            ("CX", library::cx(), vec![0, 1]),
            ("CZ", library::cz(), vec![0, 1]),
        ] {
            let gate = Gate::new(m, WireSupport::new(wires).unwrap(), label).unwrap();
            let frames: Vec<&FramePair> = gate.support.wires().iter().map(|_| &fp).collect();
            let t = gate_tensor(&gate, &frames, &frames).unwrap();
            assert!(
                (t.negativity() - 1.0).abs() < 1e-10,
                "{label} negativity {}",
                t.negativity()
            );
            // signed permutation: every column has a single unit entry
            for c in 0..t.n_points() {
                let nonzero = t.column(c).iter().filter(|v| v.abs() > 1e-9).count();
                assert_eq!(nonzero, 1, "{label} column {c} not a permutation");
            }
        }
    }

    #[test]
    fn hadamard_and_cx_are_wigner_negative() {
        let fp = wigner_ref();
        for (label, m, wires) in [
            ("H", library::h(), vec![0]),
            ("CX", library::cx(), vec![0, 1]),
        ] {
            let gate = Gate::new(m, WireSupport::new(wires).unwrap(), label).unwrap();
            let frames: Vec<&FramePair> = gate.support.wires().iter().map(|_| &fp).collect();
            let t = gate_tensor(&gate, &frames, &frames).unwrap();
            assert!(
                t.negativity() > 1.0 + 1e-6,
                "{label} conventional-Wigner negativity {}",
                t.negativity()
            );
        }
    }

    #[test]
    fn toffoli_bloch_negativity_is_two() {
        let fp = pauli_ref();
        let gate = Gate::new(
            library::ccx(),
            WireSupport::new(vec![0, 1, 2]).unwrap(),
            "CCX",
        )
        .unwrap();
        let frames = [&fp, &fp, &fp];
        let t = gate_tensor(&gate, &frames, &frames).unwrap();
        assert!((t.negativity() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn effect_dist_anchors() {
        let dist = effect_dist(&library::effect_proj0(), &pauli_ref()).unwrap();
        let expect = [1.0, 0.0, 1.0, 0.0];
        for (v, e) in dist.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!((dist.max_abs() - 1.0).abs() < 1e-12);

        // Tr G(l) = 1 for every Wigner frame, so the identity effect is flat.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut g = [1.0; 4];
        for v in g.iter_mut().skip(1) {
            *v = (rng.gen_range(-1.5..1.5f64)).exp();
        }
        let fp = make_wigner_frame(&g).unwrap();
        let dist = effect_dist(&library::effect_identity(), &fp).unwrap();
        for v in &dist.values {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn proj0_effect_negativity_is_one_for_any_rotation() {
        // W_E(l) = Tr[proj0 D_theta(l)] is 1 at l = 0 and a Bloch z-component
        // otherwise, so the max is exactly 1.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let fp = make_pauli_frame([
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ])
            .unwrap();
            let dist = effect_dist(&library::effect_proj0(), &fp).unwrap();
            assert!((dist.max_abs() - 1.0).abs() < 1e-12);
        }
    }

    fn circuit_of(gates: Vec<Gate>, n: usize) -> Circuit {
        Circuit::new(
            2,
            n,
            (0..n).map(|_| library::state_zero()).collect(),
            gates,
            (0..n).map(|_| library::effect_proj0()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn clifford_circuit_has_zero_bloch_negativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let c = crate::circuit::gen_clifford_t(4, 30, 0, &mut rng).unwrap();
        let fa = FrameAssignment::reference(&c, FrameKind::RotatedPauli);
        let total = circuit_negativity(&c, &fa).unwrap();
        assert!(total.abs() < 1e-9, "log2 negativity {total}");
    }

    #[test]
    fn isolated_t_gates_contribute_half_bit_each() {
        let t = 4;
        let gates = (0..t)
            .map(|w| Gate::new(library::t(), WireSupport::new(vec![w]).unwrap(), "T").unwrap())
            .collect();
        let c = circuit_of(gates, t);
        let fa = FrameAssignment::reference(&c, FrameKind::RotatedPauli);
        let total = circuit_negativity(&c, &fa).unwrap();
        assert!((total - t as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_toffoli_contributes_one_bit() {
        let gate = Gate::new(
            library::ccx(),
            WireSupport::new(vec![0, 1, 2]).unwrap(),
            "CCX",
        )
        .unwrap();
        let c = circuit_of(vec![gate], 3);
        let fa = FrameAssignment::reference(&c, FrameKind::RotatedPauli);
        let total = circuit_negativity(&c, &fa).unwrap();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kernel_tensor_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..8 {
            let arity = rng.gen_range(1..=2usize);
            let u = haar_unitary(1 << arity, &mut rng);
            let gate = Gate::new(u, WireSupport::new((0..arity).collect()).unwrap(), "U").unwrap();
            let in_frames: Vec<FramePair> = (0..arity).map(|_| random_frame(&mut rng)).collect();
            let out_frames: Vec<FramePair> = (0..arity).map(|_| random_frame(&mut rng)).collect();
            let in_refs: Vec<&FramePair> = in_frames.iter().collect();
            let out_refs: Vec<&FramePair> = out_frames.iter().collect();
            let direct = gate_tensor(&gate, &in_refs, &out_refs).unwrap();
            let kernel = GateKernel::new(&gate).unwrap();
            let fast = kernel.tensor(&in_refs, &out_refs).unwrap();
            for c in 0..direct.n_points() {
                for r in 0..direct.n_points() {
                    assert!(
                        (direct.value(r, c) - fast.value(r, c)).abs() < 1e-10,
                        "mismatch at ({r},{c})"
                    );
                }
            }
            assert!((direct.negativity() - fast.negativity()).abs() < 1e-10);
        }
    }

    #[test]
    fn gate_negativity_is_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..6 {
            let u = haar_unitary(2, &mut rng);
            let phi: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
            let v = u.scale(Complex64::from_polar(1.0, phi));
            let fp = random_frame(&mut rng);
            let gu = Gate::new(u, WireSupport::new(vec![0]).unwrap(), "U").unwrap();
            let gv = Gate::new(v, WireSupport::new(vec![0]).unwrap(), "V").unwrap();
            let tu = gate_tensor(&gu, &[&fp], &[&fp]).unwrap();
            let tv = gate_tensor(&gv, &[&fp], &[&fp]).unwrap();
            assert!((tu.negativity() - tv.negativity()).abs() < 1e-10);
        }
    }

    #[test]
    fn same_family_tensors_have_negativity_at_least_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let arity = rng.gen_range(1..=2usize);
            let u = haar_unitary(1 << arity, &mut rng);
            let gate = Gate::new(u, WireSupport::new((0..arity).collect()).unwrap(), "U").unwrap();
            for kind in [FrameKind::Wigner, FrameKind::RotatedPauli] {
                let frames: Vec<FramePair> = (0..2 * arity)
                    .map(|_| match kind {
                        FrameKind::RotatedPauli => make_pauli_frame([
                            rng.gen_range(-3.0..3.0),
                            rng.gen_range(-3.0..3.0),
                            rng.gen_range(-3.0..3.0),
                        ])
                        .unwrap(),
                        FrameKind::Wigner => {
                            let mut g = [1.0; 4];
                            for v in g.iter_mut().skip(1) {
                                *v = (rng.gen_range(-1.5..1.5f64)).exp();
                            }
                            make_wigner_frame(&g).unwrap()
                        }
                    })
                    .collect();
                let in_refs: Vec<&FramePair> = frames[..arity].iter().collect();
                let out_refs: Vec<&FramePair> = frames[arity..].iter().collect();
                let t = gate_tensor(&gate, &in_refs, &out_refs).unwrap();
                assert!(t.negativity() >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn segment_topology_small_circuit() {
        // wire 0: rho - g0 - g1 - E ; wire 1: rho - g1 - E
        let g0 = Gate::new(library::h(), WireSupport::new(vec![0]).unwrap(), "H").unwrap();
        let g1 = Gate::new(library::cx(), WireSupport::new(vec![0, 1]).unwrap(), "CX").unwrap();
        let c = circuit_of(vec![g0, g1], 2);
        let topo = SegmentTopology::new(&c);
        assert_eq!(topo.num_segments(), 2 + 1 + 2);
        assert_eq!(topo.input_segment(0), 0);
        assert_eq!(topo.input_segment(1), 1);
        assert_eq!(topo.gate_in_segments(0), &[0]);
        assert_eq!(topo.gate_out_segments(0), &[2]);
        assert_eq!(topo.gate_in_segments(1), &[2, 1]);
        assert_eq!(topo.gate_out_segments(1), &[3, 4]);
        assert_eq!(topo.effect_segment(0), 3);
        assert_eq!(topo.effect_segment(1), 4);
        assert_eq!(
            topo.segment_components(2),
            &[ComponentRef::Gate(0), ComponentRef::Gate(1)]
        );
    }
}
