//! Exact Born probabilities by brute-force state evolution.
//!
//! Ground truth for every statistical test in the crate: a statevector path
//! for pure product inputs (gates applied over strided amplitude groups, no
//! `d^N x d^N` matrices) and a density-matrix path for mixed inputs, which
//! treats `vec(rho)` as a `2N`-wire state so the same strided kernel applies.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::circuit::Circuit;
use crate::error::Error;
use crate::numerics::CMatrix;
use crate::Result;

/// Wire guard for the statevector path.
pub const PURE_WIRE_GUARD: usize = 12;
/// Wire guard for the density-matrix path.
pub const MIXED_WIRE_GUARD: usize = 6;

/// Apply a `k`-qubit operator to `state` on the given wires (`n` wires total,
/// wire 0 owning the most significant bit). The operator need not be unitary.
pub(crate) fn apply_operator(state: &mut [Complex64], op: &CMatrix, wires: &[usize], n: usize) {
    let k = wires.len();
    let dim_k = 1usize << k;
    debug_assert_eq!(op.rows(), dim_k);
    debug_assert_eq!(state.len(), 1usize << n);

    // Bit position of each support wire, and the positions of the rest.
    let sup_bits: Vec<usize> = wires.iter().map(|&w| n - 1 - w).collect();
    let mut rest_bits: Vec<usize> = (0..n).filter(|b| !sup_bits.contains(b)).collect();
    rest_bits.sort_unstable();

    // Offsets of each k-bit gate index within the full index, first support
    // wire most significant.
    let offsets: Vec<usize> = (0..dim_k)
        .map(|gi| {
            let mut off = 0usize;
            for (pos, &bit) in sup_bits.iter().enumerate() {
                if (gi >> (k - 1 - pos)) & 1 == 1 {
                    off |= 1 << bit;
                }
            }
            off
        })
        .collect();

    let mut amps = vec![Complex64::new(0.0, 0.0); dim_k];
    for rest in 0..(1usize << rest_bits.len()) {
        let mut base = 0usize;
        for (pos, &bit) in rest_bits.iter().enumerate() {
            if (rest >> pos) & 1 == 1 {
                base |= 1 << bit;
            }
        }
        for gi in 0..dim_k {
            amps[gi] = state[base + offsets[gi]];
        }
        for gi in 0..dim_k {
            let mut acc = Complex64::new(0.0, 0.0);
            for (gj, &a) in amps.iter().enumerate() {
                acc += op[(gi, gj)] * a;
            }
            state[base + offsets[gi]] = acc;
        }
    }
}

fn purity(rho: &CMatrix) -> f64 {
    crate::numerics::trace_inner(rho, rho).expect("2x2").re
}

/// Extract the statevector of a pure density matrix (up to global phase).
fn pure_state_vector(rho: &CMatrix) -> [Complex64; 2] {
    let col = if rho[(0, 0)].re >= rho[(1, 1)].re {
        0
    } else {
        1
    };
    let norm = rho[(col, col)].re.max(0.0).sqrt();
    [rho[(0, col)] / norm, rho[(1, col)] / norm]
}

fn statevector_probability(c: &Circuit) -> Result<f64> {
    let n = c.num_wires;
    let dim = 1usize << n;
    // psi = tensor product of per-wire statevectors
    let locals: Vec<[Complex64; 2]> = c.inputs.iter().map(pure_state_vector).collect();
    let mut psi = vec![Complex64::new(1.0, 0.0); dim];
    for (idx, amp) in psi.iter_mut().enumerate() {
        for (w, local) in locals.iter().enumerate() {
            let bit = (idx >> (n - 1 - w)) & 1;
            *amp *= local[bit];
        }
    }
    for g in &c.gates {
        apply_operator(&mut psi, &g.matrix, g.support.wires(), n);
    }
    // p = <psi| (tensor E_w) |psi>
    let mut phi = psi.clone();
    for (w, e) in c.effects.iter().enumerate() {
        apply_operator(&mut phi, e, &[w], n);
    }
    let p: Complex64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
    debug_assert!(p.im.abs() < 1e-9);
    Ok(p.re)
}

fn density_probability(c: &Circuit) -> Result<f64> {
    let n = c.num_wires;
    let dim = 1usize << (2 * n);
    // vec(rho) over 2N wires: row wires 0..N, column wires N..2N.
    let mut rho = vec![Complex64::new(1.0, 0.0); dim];
    for (idx, amp) in rho.iter_mut().enumerate() {
        for (w, local) in c.inputs.iter().enumerate() {
            let r = (idx >> (2 * n - 1 - w)) & 1;
            let col = (idx >> (2 * n - 1 - (w + n))) & 1;
            *amp *= local[(r, col)];
        }
    }
    for g in &c.gates {
        // rho -> U rho U^dagger: U on the row wires, conj(U) on the column wires.
        apply_operator(&mut rho, &g.matrix, g.support.wires(), 2 * n);
        let conj = g.matrix.conj_elementwise();
        let col_wires: Vec<usize> = g.support.wires().iter().map(|&w| w + n).collect();
        apply_operator(&mut rho, &conj, &col_wires, 2 * n);
    }
    // Tr[rho E]: apply E^T on the column wires, then sum the diagonal.
    for (w, e) in c.effects.iter().enumerate() {
        apply_operator(&mut rho, &e.transpose(), &[w + n], 2 * n);
    }
    let mut p = Complex64::new(0.0, 0.0);
    for r in 0..(1usize << n) {
        p += rho[r * (1usize << n) + r];
    }
    debug_assert!(p.im.abs() < 1e-9);
    Ok(p.re)
}

/// Exact outcome probability `Tr[U_L ... U_1 rho U_1^dag ... U_L^dag E]`.
///
/// Pure product inputs evolve as a statevector (up to 12 wires); any mixed
/// input falls back to density-matrix evolution (up to 6 wires). Tiny
/// negative residue is clamped to zero.
pub fn exact_probability(c: &Circuit) -> Result<f64> {
    let all_pure = c.inputs.iter().all(|rho| (purity(rho) - 1.0).abs() < 1e-9);
    let p = if all_pure {
        if c.num_wires > PURE_WIRE_GUARD {
            return Err(Error::SizeGuard {
                context: format!(
                    "statevector oracle limited to {} wires, got {}",
                    PURE_WIRE_GUARD, c.num_wires
                ),
            });
        }
        statevector_probability(c)?
    } else {
        if c.num_wires > MIXED_WIRE_GUARD {
            return Err(Error::SizeGuard {
                context: format!(
                    "density-matrix oracle limited to {} wires, got {}",
                    MIXED_WIRE_GUARD, c.num_wires
                ),
            });
        }
        density_probability(c)?
    };
    if p < -1e-10 {
        return Err(Error::InvalidCircuit {
            context: format!("oracle probability {p} below zero"),
        });
    }
    Ok(p.max(0.0))
}

/// Density-matrix-path probability regardless of input purity; used to
/// cross-check the statevector path.
pub fn exact_probability_density_path(c: &Circuit) -> Result<f64> {
    if c.num_wires > MIXED_WIRE_GUARD {
        return Err(Error::SizeGuard {
            context: format!(
                "density-matrix oracle limited to {} wires, got {}",
                MIXED_WIRE_GUARD, c.num_wires
            ),
        });
    }
    Ok(density_probability(c)?.max(0.0))
}
