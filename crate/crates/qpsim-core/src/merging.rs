//! Greedy frontier-based gate merging under a spatial truncation.
//!
//! Merging a connected gate sequence into one gate never increases its
//! negativity, so merging is always worthwhile up to the cost of handling
//! larger gates. The pass keeps a frontier of pairwise-disjoint pending
//! gates; each incoming gate absorbs connected frontier gates while the union
//! support stays within `n` qudits and retires the ones that would overflow.
//!
//! The output preserves the circuit unitary: any two gates whose emission
//! order differs from their input order were simultaneously in the frontier,
//! hence support-disjoint and commuting.

use alloc::format;
use alloc::vec::Vec;

use crate::circuit::{Circuit, Gate};
use crate::error::Error;
use crate::numerics::{embed_gate, WireSupport};
use crate::Result;

/// Configuration for the merge pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MergeConfig {
    /// Maximum number of qudits a merged gate may act on.
    pub n: usize,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self { n: 3 }
    }
}

impl MergeConfig {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig {
                context: format!("spatial parameter n must be at least 2, got {n}"),
            });
        }
        Ok(Self { n })
    }
}

/// Two gates are connected iff their supports intersect.
pub fn connected(a: &Gate, b: &Gate) -> bool {
    a.support.intersects(&b.support)
}

/// Merge `v` (earlier in circuit order) into `target`: a gate on the sorted
/// union support whose matrix is `embed(target) * embed(v)`.
pub fn merge_two(target: &Gate, v: &Gate, max_wires: usize, d: usize) -> Result<Gate> {
    let union = target.support.union_sorted(&v.support);
    if union.len() > max_wires {
        return Err(Error::MergeTooLarge {
            union: union.len(),
            n: max_wires,
        });
    }
    // Positions of each constituent's wires within the union space.
    let rel = |sup: &WireSupport| -> WireSupport {
        let wires: Vec<usize> = sup
            .wires()
            .iter()
            .map(|w| union.wires().iter().position(|u| u == w).expect("subset"))
            .collect();
        WireSupport::new(wires).expect("distinct")
    };
    let k = union.len();
    let t_emb = embed_gate(&target.matrix, &rel(&target.support), k, d)?;
    let v_emb = embed_gate(&v.matrix, &rel(&v.support), k, d)?;
    let matrix = t_emb.mul(&v_emb)?;
    Gate::new_d(matrix, union, format!("{}*{}", target.label, v.label), d)
}

/// One full merging pass over a gate list.
///
/// `U_comp` collects finished gates, `U_disj` is the frontier of pending
/// pairwise-disjoint gates. Each incoming gate scans the frontier in order;
/// connected gates are merged greedily one at a time while the union stays
/// within `n` qudits, and retired to `U_comp` otherwise. The frontier is
/// appended at the end.
pub fn merge_pass(gates: &[Gate], cfg: &MergeConfig, d: usize) -> Result<Vec<Gate>> {
    let max_arity = gates.iter().map(Gate::arity).max().unwrap_or(0);
    if cfg.n < max_arity {
        return Err(Error::InvalidConfig {
            context: format!(
                "spatial parameter n={} below the largest input gate arity {}",
                cfg.n, max_arity
            ),
        });
    }
    let mut completed: Vec<Gate> = Vec::new();
    let mut frontier: Vec<Gate> = Vec::new();
    for incoming in gates {
        let mut target = incoming.clone();
        let mut kept: Vec<Gate> = Vec::with_capacity(frontier.len());
        for v in frontier {
            if !connected(&target, &v) {
                kept.push(v);
                continue;
            }
            let union = target.support.union_sorted(&v.support);
            if union.len() > cfg.n {
                completed.push(v);
            } else {
                target = merge_two(&target, &v, cfg.n, d)?;
            }
        }
        debug_assert!(kept.iter().all(|g| !connected(g, &target)));
        kept.push(target);
        frontier = kept;
    }
    completed.extend(frontier);
    Ok(completed)
}

/// Merge a whole circuit, leaving inputs and effects untouched.
pub fn merge_circuit(c: &Circuit, cfg: &MergeConfig) -> Result<Circuit> {
    let gates = merge_pass(&c.gates, cfg, c.d)?;
    Circuit::new(c.d, c.num_wires, c.inputs.clone(), gates, c.effects.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, gen_clifford_t, library};
    use crate::frames::FrameKind;
    use crate::quasiprob::{circuit_negativity, FrameAssignment};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(matrix: crate::numerics::CMatrix, wires: &[usize], label: &str) -> Gate {
        Gate::new(matrix, WireSupport::new(wires.to_vec()).unwrap(), label).unwrap()
    }

    #[test]
    fn connectivity_cases() {
        let h0 = g(library::h(), &[0], "H");
        let cx01 = g(library::cx(), &[0, 1], "CX");
        let cx12 = g(library::cx(), &[1, 2], "CX");
        let cx10 = g(library::cx(), &[1, 0], "CX");
        let cz21 = g(library::cz(), &[2, 1], "CZ");
        assert!(connected(&h0, &cx01));
        assert!(!connected(&h0, &cx12));
        assert!(connected(&cx10, &cz21));
    }

    #[test]
    fn t_t_merges_to_s_up_to_phase() {
        let t1 = g(library::t(), &[0], "T");
        let t2 = g(library::t(), &[0], "T");
        let merged = merge_two(&t2, &t1, 2, 2).unwrap();
        assert!(merged.matrix.approx_eq_up_to_phase(&library::s(), 1e-12));

        // Merged negativity 1 <= N_T^2 = 2 in the Bloch frame.
        let fp = FrameKind::RotatedPauli.reference();
        let tensor = crate::quasiprob::gate_tensor(&merged, &[&fp], &[&fp]).unwrap();
        assert!((tensor.negativity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn h_then_cx_merges_to_embedded_product() {
        let h0 = g(library::h(), &[0], "H");
        let cx = g(library::cx(), &[0, 1], "CX");
        let merged = merge_two(&cx, &h0, 2, 2).unwrap();
        let h_emb = embed_gate(&library::h(), &WireSupport::new(vec![0]).unwrap(), 2, 2).unwrap();
        let expect = library::cx().mul(&h_emb).unwrap();
        assert!(merged.matrix.approx_eq(&expect, 1e-12));
        assert_eq!(merged.support.wires(), &[0, 1]);
    }

    #[test]
    fn merge_two_refuses_oversized_union() {
        let cx01 = g(library::cx(), &[0, 1], "CX");
        let cx12 = g(library::cx(), &[1, 2], "CX");
        assert!(matches!(
            merge_two(&cx12, &cx01, 2, 2),
            Err(Error::MergeTooLarge { union: 3, n: 2 })
        ));
    }

    #[test]
    fn disjoint_gates_pass_through() {
        let gates = vec![g(library::h(), &[0], "H"), g(library::h(), &[1], "H")];
        let out = merge_pass(&gates, &MergeConfig { n: 2 }, 2).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out, gates);
    }

    #[test]
    fn six_gates_on_four_wires_merge_to_three_blocks() {
        // With n = 2: {g1, g2, g3} collapse onto wires {0,1}, g4 forces the
        // block out, {g4, g5} collapse onto {1,2}, g6 stays disjoint.
        let gates = vec![
            g(library::h(), &[0], "H"),
            g(library::s(), &[1], "S"),
            g(library::cx(), &[0, 1], "CX"),
            g(library::cx(), &[1, 2], "CX"),
            g(library::h(), &[2], "H"),
            g(library::h(), &[3], "H"),
        ];
        let input = Circuit::new(
            2,
            4,
            (0..4).map(|_| library::state_zero()).collect(),
            gates.clone(),
            (0..4).map(|_| library::effect_proj0()).collect(),
        )
        .unwrap();
        let out = merge_pass(&gates, &MergeConfig { n: 2 }, 2).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|gate| gate.arity() <= 2));
        let merged = Circuit::new(2, 4, input.inputs.clone(), out, input.effects.clone()).unwrap();
        let u_in = circuit_unitary(&input).unwrap();
        let u_out = circuit_unitary(&merged).unwrap();
        assert!(u_in.approx_eq_up_to_phase(&u_out, 1e-10));
    }

    #[test]
    fn random_clifford_t_merge_preserves_unitary_and_reduces_negativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for trial in 0..5 {
            let c = gen_clifford_t(5, 20, 5, &mut rng).unwrap();
            let merged = merge_circuit(&c, &MergeConfig { n: 3 }).unwrap();
            assert!(merged.gates.len() <= c.gates.len());
            assert!(merged.gates.iter().all(|gate| gate.arity() <= 3));

            let u_in = circuit_unitary(&c).unwrap();
            let u_out = circuit_unitary(&merged).unwrap();
            assert!(
                u_in.approx_eq_up_to_phase(&u_out, 1e-8),
                "unitary mismatch in trial {trial}"
            );

            let fa_in = FrameAssignment::reference(&c, FrameKind::RotatedPauli);
            let fa_out = FrameAssignment::reference(&merged, FrameKind::RotatedPauli);
            let before = circuit_negativity(&c, &fa_in).unwrap();
            let after = circuit_negativity(&merged, &fa_out).unwrap();
            assert!(
                after <= before + 1e-9,
                "negativity grew: {before} -> {after}"
            );
        }
    }

    #[test]
    fn pairwise_observation_bound_at_each_merge() {
        // N_{VU} <= N_V * N_U with matched intermediate frames.
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let fp = FrameKind::RotatedPauli.reference();
        for _ in 0..10 {
            let c = gen_clifford_t(4, 8, 3, &mut rng).unwrap();
            let mut frontier: Vec<Gate> = Vec::new();
            let mut completed: Vec<Gate> = Vec::new();
            for incoming in &c.gates {
                let mut target = incoming.clone();
                let mut kept = Vec::new();
                for v in frontier {
                    if !connected(&target, &v) {
                        kept.push(v);
                        continue;
                    }
                    if target.support.union_sorted(&v.support).len() > 3 {
                        completed.push(v);
                        continue;
                    }
                    let merged = merge_two(&target, &v, 3, 2).unwrap();
                    let neg = |gate: &Gate| {
                        let frames: alloc::vec::Vec<&crate::frames::FramePair> =
                            gate.support.wires().iter().map(|_| &fp).collect();
                        crate::quasiprob::gate_tensor(gate, &frames, &frames)
                            .unwrap()
                            .negativity()
                    };
                    assert!(neg(&merged) <= neg(&target) * neg(&v) + 1e-9);
                    target = merged;
                }
                kept.push(target);
                frontier = kept;
            }
        }
    }

    #[test]
    fn merge_pass_rejects_undersized_n() {
        let gates = vec![g(library::ccx(), &[0, 1, 2], "CCX")];
        assert!(merge_pass(&gates, &MergeConfig { n: 2 }, 2).is_err());
    }

    #[test]
    fn merge_pass_quadratic_runtime_bound() {
        // Generous regression guard on the O(L^2) scaling at fixed n.
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let c_small = gen_clifford_t(8, 200, 20, &mut rng).unwrap();
        let c_large = gen_clifford_t(8, 800, 80, &mut rng).unwrap();
        let cfg = MergeConfig { n: 3 };

        let time = |gates: &[Gate]| {
            let start = std::time::Instant::now();
            let out = merge_pass(gates, &cfg, 2).unwrap();
            (start.elapsed().as_secs_f64(), out.len())
        };
        // Warm-up to stabilise allocator effects.
        let _ = merge_pass(&c_small.gates, &cfg, 2).unwrap();
        let (t_small, _) = time(&c_small.gates);
        let (t_large, _) = time(&c_large.gates);
        // 4x the gates: quadratic predicts 16x; allow a wide margin.
        assert!(
            t_large <= (64.0 * t_small).max(0.5),
            "merge_pass scaling: {t_small}s -> {t_large}s"
        );
    }
}
