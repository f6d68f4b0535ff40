//! Signed Monte Carlo trajectory sampler.
//!
//! Trajectories walk phase points through the circuit: the initial point of
//! each wire is drawn from `|W_rho| / N_rho`, each gate advances its support
//! points by drawing a row of the current column from `|W_U| / N_U(l)`, and
//! pass-through wires keep their points. The contribution of a trajectory is
//! `sign x N_rho x prod_l N_U(l_{l-1}) x prod_w W_E(l_L)`; its mean over
//! trajectories is the Born probability.
//!
//! Determinism contract: sampling is split into fixed-size chunks, chunk `c`
//! drawing from an independent ChaCha substream `(seed, stream = c)`, and
//! partial sums are reduced in chunk order with compensated summation. The
//! estimate is therefore bit-identical for any worker count.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::Circuit;
use crate::error::Error;
use crate::quasiprob::{self, FrameAssignment};
use crate::Result;

/// Trajectories per RNG substream; fixed so results do not depend on the
/// worker count.
pub const CHUNK_SIZE: u64 = 4096;

/// Real-valued Hoeffding sample bound `(2 / eps^2) N_C^2 ln(2 / delta)`.
pub fn hoeffding_bound(epsilon: f64, delta: f64, n_c: f64) -> f64 {
    (2.0 / (epsilon * epsilon)) * n_c * n_c * (2.0 / delta).ln()
}

/// Samples guaranteeing error below `epsilon` with probability `1 - delta`.
pub fn required_samples(epsilon: f64, delta: f64, n_c: f64) -> Result<u64> {
    // negated forms also reject NaN arguments
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) || !(n_c >= 1.0) {
        return Err(Error::InvalidConfig {
            context: format!(
                "required_samples needs epsilon > 0, 0 < delta < 1, n_c >= 1; got ({epsilon}, {delta}, {n_c})"
            ),
        });
    }
    Ok(hoeffding_bound(epsilon, delta, n_c).ceil() as u64)
}

#[derive(Clone, Debug, PartialEq)]
struct WireTable {
    /// Signed quasi-probabilities over the wire's phase points.
    values: Vec<f64>,
    /// Cumulative absolute values; last entry is the 1-norm.
    cum: Vec<f64>,
    norm: f64,
}

impl WireTable {
    fn new(values: Vec<f64>) -> Result<Self> {
        let mut cum = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for v in &values {
            acc += v.abs();
            cum.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::InvalidState {
                context: format!("state distribution has zero 1-norm: {values:?}"),
            });
        }
        Ok(Self {
            values,
            cum,
            norm: acc,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
struct GateTable {
    support: Vec<usize>,
    n_points: usize,
    /// Signed entries, column-major.
    values: Vec<f64>,
    /// Per-column cumulative absolute values.
    cum: Vec<f64>,
    col_norms: Vec<f64>,
}

/// Draw an index from a cumulative table spanning `[0, norm)`.
#[inline]
fn draw(cum: &[f64], norm: f64, u01: f64) -> usize {
    let target = u01 * norm;
    let mut idx = cum.partition_point(|&c| c <= target);
    if idx >= cum.len() {
        idx = cum.len() - 1;
    }
    // Skip zero-measure entries a boundary draw may have landed on.
    while idx > 0 && cum[idx] == cum[idx - 1] {
        idx -= 1;
    }
    idx
}

/// A circuit with all quasi-probability tensors materialised for sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledCircuit {
    num_wires: usize,
    points_per_wire: usize,
    inputs: Vec<WireTable>,
    input_norm_product: f64,
    gates: Vec<GateTable>,
    /// Signed effect values per wire.
    effects: Vec<Vec<f64>>,
    log2_negativity: f64,
}

impl CompiledCircuit {
    pub fn num_wires(&self) -> usize {
        self.num_wires
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    /// Total circuit log2 negativity `log2 N_C`.
    pub fn log2_negativity(&self) -> f64 {
        self.log2_negativity
    }
}

/// Materialise every transition tensor and sampling table for a circuit
/// under a frame assignment.
pub fn compile(c: &Circuit, fa: &FrameAssignment) -> Result<CompiledCircuit> {
    let points_per_wire = c.d * c.d;
    let mut log2_total = 0.0f64;

    let mut inputs = Vec::with_capacity(c.num_wires);
    let mut input_norm_product = 1.0f64;
    for w in 0..c.num_wires {
        let dist = quasiprob::state_dist(&c.inputs[w], fa.state_frame(w))?;
        let table = WireTable::new(dist.values)?;
        log2_total += table.norm.log2();
        input_norm_product *= table.norm;
        inputs.push(table);
    }

    let mut gates = Vec::with_capacity(c.gates.len());
    for (gi, g) in c.gates.iter().enumerate() {
        let tensor = quasiprob::gate_tensor(g, &fa.gate_in_frames(gi), &fa.gate_out_frames(gi))?;
        let p = tensor.n_points();
        let mut values = Vec::with_capacity(p * p);
        let mut cum = Vec::with_capacity(p * p);
        for col in 0..p {
            let column = tensor.column(col);
            let mut acc = 0.0;
            for &v in column {
                values.push(v);
                acc += v.abs();
                cum.push(acc);
            }
            if acc <= 0.0 {
                return Err(Error::InvalidCircuit {
                    context: format!(
                        "gate '{}' has an all-zero transition column; frames are not dual",
                        g.label
                    ),
                });
            }
        }
        log2_total += tensor.negativity().log2();
        gates.push(GateTable {
            support: g.support.wires().to_vec(),
            n_points: p,
            values,
            cum,
            col_norms: tensor.col_norms().to_vec(),
        });
    }

    let mut effects = Vec::with_capacity(c.num_wires);
    for w in 0..c.num_wires {
        let dist = quasiprob::effect_dist(&c.effects[w], fa.effect_frame(w))?;
        log2_total += dist.max_abs().log2();
        effects.push(dist.values);
    }

    Ok(CompiledCircuit {
        num_wires: c.num_wires,
        points_per_wire,
        inputs,
        input_norm_product,
        gates,
        effects,
        log2_negativity: log2_total,
    })
}

fn trajectory_with_buffer<R: Rng + ?Sized>(
    cc: &CompiledCircuit,
    rng: &mut R,
    points: &mut [usize],
) -> f64 {
    let ppw = cc.points_per_wire;
    let mut weight = cc.input_norm_product;
    let mut negative = false;

    for (w, table) in cc.inputs.iter().enumerate() {
        let idx = draw(&table.cum, table.norm, rng.gen::<f64>());
        points[w] = idx;
        if table.values[idx] < 0.0 {
            negative = !negative;
        }
    }

    for gate in &cc.gates {
        let k = gate.support.len();
        let mut col = 0usize;
        for &w in &gate.support {
            col = col * ppw + points[w];
        }
        let p = gate.n_points;
        let norm = gate.col_norms[col];
        weight *= norm;
        let slice = &gate.cum[col * p..(col + 1) * p];
        let row = draw(slice, norm, rng.gen::<f64>());
        if gate.values[col * p + row] < 0.0 {
            negative = !negative;
        }
        let mut rest = row;
        for i in (0..k).rev() {
            points[gate.support[i]] = rest % ppw;
            rest /= ppw;
        }
    }

    let mut effect = 1.0f64;
    for (w, vals) in cc.effects.iter().enumerate() {
        effect *= vals[points[w]];
    }
    let signed = if negative { -weight } else { weight };
    signed * effect
}

/// Draw one signed trajectory contribution.
pub fn sample_trajectory<R: Rng + ?Sized>(cc: &CompiledCircuit, rng: &mut R) -> f64 {
    let mut points = vec![0usize; cc.num_wires];
    trajectory_with_buffer(cc, rng, &mut points)
}

/// Compensated (Kahan) accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    #[inline]
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Partial sums of one sampling chunk.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChunkSums {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
}

/// Sample `count` trajectories from substream `(seed, stream = chunk_index)`.
pub fn sample_chunk(cc: &CompiledCircuit, seed: u64, chunk_index: u64, count: u64) -> ChunkSums {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk_index);
    let mut points = vec![0usize; cc.num_wires];
    let mut sum = KahanSum::default();
    let mut sum_sq = KahanSum::default();
    for _ in 0..count {
        let x = trajectory_with_buffer(cc, &mut rng, &mut points);
        sum.add(x);
        sum_sq.add(x * x);
    }
    ChunkSums {
        sum: sum.sum,
        sum_sq: sum_sq.sum,
        count,
    }
}

/// Chunk layout for `m` samples: `(chunk_index, count)` pairs.
pub fn chunk_layout(m: u64) -> Vec<(u64, u64)> {
    let full = m / CHUNK_SIZE;
    let tail = m % CHUNK_SIZE;
    let mut chunks: Vec<(u64, u64)> = (0..full).map(|c| (c, CHUNK_SIZE)).collect();
    if tail > 0 {
        chunks.push((full, tail));
    }
    chunks
}

/// Reduce chunk partials (in chunk order) into an estimate.
pub fn reduce_chunks(
    cc: &CompiledCircuit,
    partials: &[ChunkSums],
    seed: u64,
    elapsed_seconds: f64,
) -> EstimateReport {
    let mut sum = KahanSum::default();
    let mut sum_sq = KahanSum::default();
    let mut m = 0u64;
    for part in partials {
        sum.add(part.sum);
        sum_sq.add(part.sum_sq);
        m += part.count;
    }
    let mf = m as f64;
    let p_est = sum.sum / mf;
    let std_error = if m > 1 {
        ((sum_sq.sum - mf * p_est * p_est).max(0.0) / (mf * (mf - 1.0))).sqrt()
    } else {
        0.0
    };
    EstimateReport {
        p_est,
        samples: m,
        n_c_log2: cc.log2_negativity,
        std_error,
        elapsed_seconds,
        seed,
    }
}

/// Result of one estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    /// Arithmetic mean of the signed trajectory contributions.
    pub p_est: f64,
    pub samples: u64,
    /// `log2 N_C` of the compiled circuit.
    pub n_c_log2: f64,
    /// Empirical standard error of the mean.
    pub std_error: f64,
    pub elapsed_seconds: f64,
    pub seed: u64,
}

/// Estimate the Born probability from `m` trajectories.
///
/// `workers` only controls parallelism (a local thread pool when the
/// `parallel` feature is enabled); the result is identical for any value.
pub fn estimate(cc: &CompiledCircuit, m: u64, seed: u64, workers: usize) -> Result<EstimateReport> {
    if m < 1 {
        return Err(Error::InvalidConfig {
            context: format!("need at least one sample, got {m}"),
        });
    }
    #[cfg(feature = "std")]
    let start = std::time::Instant::now();

    let chunks = chunk_layout(m);
    #[cfg(feature = "parallel")]
    let partials: Vec<ChunkSums> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig {
                context: format!("thread pool: {e}"),
            })?;
        pool.install(|| {
            use rayon::prelude::*;
            chunks
                .par_iter()
                .map(|&(idx, count)| sample_chunk(cc, seed, idx, count))
                .collect()
        })
    } else {
        chunks
            .iter()
            .map(|&(idx, count)| sample_chunk(cc, seed, idx, count))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<ChunkSums> = {
        let _ = workers;
        chunks
            .iter()
            .map(|&(idx, count)| sample_chunk(cc, seed, idx, count))
            .collect()
    };

    #[cfg(feature = "std")]
    let elapsed = start.elapsed().as_secs_f64();
    #[cfg(not(feature = "std"))]
    let elapsed = 0.0;

    Ok(reduce_chunks(cc, &partials, seed, elapsed))
}

/// Evaluate the full trajectory sum exactly by propagating the joint
/// quasi-probability vector through the compiled tensors.
///
/// Exponential in the wire count; guarded to 8 wires. This is the
/// representation-side half of the trajectory identity: its output must match
/// the oracle probability for any valid frame assignment.
pub fn exhaustive_probability(cc: &CompiledCircuit) -> Result<f64> {
    if cc.num_wires > 8 {
        return Err(Error::SizeGuard {
            context: format!(
                "exhaustive trajectory sum limited to 8 wires, got {}",
                cc.num_wires
            ),
        });
    }
    let ppw = cc.points_per_wire;
    let n = cc.num_wires;
    let dim = crate::numerics::pow_usize(ppw, n);
    let place: Vec<usize> = (0..n)
        .map(|w| crate::numerics::pow_usize(ppw, n - 1 - w))
        .collect();

    let mut v = vec![1.0f64; dim];
    for (joint, entry) in v.iter_mut().enumerate() {
        for (table, &pw) in cc.inputs.iter().zip(&place) {
            *entry *= table.values[(joint / pw) % ppw];
        }
    }

    for gate in &cc.gates {
        let k = gate.support.len();
        let p = gate.n_points;
        let offsets: Vec<usize> = (0..p)
            .map(|joint| {
                let mut off = 0;
                let mut rest = joint;
                for i in (0..k).rev() {
                    off += (rest % ppw) * place[gate.support[i]];
                    rest /= ppw;
                }
                off
            })
            .collect();
        let rest_wires: Vec<usize> = (0..n).filter(|w| !gate.support.contains(w)).collect();
        let rest_count = dim / p;
        let mut new_v = vec![0.0f64; dim];
        let mut old = vec![0.0f64; p];
        for rest in 0..rest_count {
            let mut base = 0;
            let mut r = rest;
            for &w in rest_wires.iter().rev() {
                base += (r % ppw) * place[w];
                r /= ppw;
            }
            for (i, &off) in offsets.iter().enumerate() {
                old[i] = v[base + off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let mut acc = 0.0;
                for (col, &x) in old.iter().enumerate() {
                    acc += gate.values[col * p + row] * x;
                }
                new_v[base + off] = acc;
            }
        }
        v = new_v;
    }

    let mut total = 0.0f64;
    for (joint, &entry) in v.iter().enumerate() {
        let mut e = entry;
        for (vals, &pw) in cc.effects.iter().zip(&place) {
            e *= vals[(joint / pw) % ppw];
        }
        total += e;
    }
    Ok(total)
}
