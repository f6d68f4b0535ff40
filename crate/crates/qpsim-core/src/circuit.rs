//! Circuit intermediate representation, gate library and random generators.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Error;
use crate::numerics::{self, embed_gate, pow_usize, CMatrix, WireSupport, TOL};
use crate::Result;

/// One unitary gate with its wire support.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub matrix: CMatrix,
    pub support: WireSupport,
    pub label: String,
}

impl Gate {
    /// Validates unitarity and the matrix/support dimension match.
    pub fn new(matrix: CMatrix, support: WireSupport, label: impl Into<String>) -> Result<Self> {
        let dim = pow_usize(2, support.len());
        Self::new_d(matrix, support, label, 2).map_err(|e| match e {
            Error::DimensionMismatch { .. } => Error::DimensionMismatch {
                context: format!("gate matrix must be {}x{} for its support", dim, dim),
            },
            other => other,
        })
    }

    pub fn new_d(
        matrix: CMatrix,
        support: WireSupport,
        label: impl Into<String>,
        d: usize,
    ) -> Result<Self> {
        let dim = pow_usize(d, support.len());
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "gate matrix is {}x{} but support has {} wires (d={})",
                    matrix.rows(),
                    matrix.cols(),
                    support.len(),
                    d
                ),
            });
        }
        let dev = matrix.unitarity_deviation();
        if dev >= TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self {
            matrix,
            support,
            label: label.into(),
        })
    }

    pub fn arity(&self) -> usize {
        self.support.len()
    }
}

/// An `N`-qudit circuit with product input state and product measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub d: usize,
    pub num_wires: usize,
    /// Per-wire single-qudit density matrices.
    pub inputs: Vec<CMatrix>,
    pub gates: Vec<Gate>,
    /// Per-wire single-qudit effect operators.
    pub effects: Vec<CMatrix>,
}

/// Checks that `rho` is a valid density matrix (Hermitian, PSD, unit trace).
pub fn validate_state(rho: &CMatrix) -> Result<()> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::InvalidState {
            context: format!(
                "expected 2x2 density matrix, got {}x{}",
                rho.rows(),
                rho.cols()
            ),
        });
    }
    if !rho.is_hermitian(TOL) {
        return Err(Error::InvalidState {
            context: "density matrix is not Hermitian".to_string(),
        });
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() >= TOL || tr.im.abs() >= TOL {
        return Err(Error::InvalidState {
            context: format!("trace {} != 1", tr.re),
        });
    }
    // 2x2 eigenvalues from trace and determinant.
    let det = (rho[(0, 0)] * rho[(1, 1)] - rho[(0, 1)] * rho[(1, 0)]).re;
    let disc = (tr.re * tr.re - 4.0 * det).max(0.0).sqrt();
    let lo = (tr.re - disc) / 2.0;
    if lo < -TOL {
        return Err(Error::InvalidState {
            context: format!("negative eigenvalue {lo}"),
        });
    }
    Ok(())
}

/// Checks that `e` is a valid effect (Hermitian, `0 <= E <= I`).
pub fn validate_effect(e: &CMatrix) -> Result<()> {
    if e.rows() != 2 || e.cols() != 2 {
        return Err(Error::InvalidEffect {
            context: format!("expected 2x2 effect, got {}x{}", e.rows(), e.cols()),
        });
    }
    if !e.is_hermitian(TOL) {
        return Err(Error::InvalidEffect {
            context: "effect is not Hermitian".to_string(),
        });
    }
    let tr = e.trace().re;
    let det = (e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(1, 0)]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let lo = (tr - disc) / 2.0;
    let hi = (tr + disc) / 2.0;
    if lo < -TOL || hi > 1.0 + TOL {
        return Err(Error::InvalidEffect {
            context: format!("eigenvalues [{lo}, {hi}] outside [0, 1]"),
        });
    }
    Ok(())
}

impl Circuit {
    /// Validates all component invariants.
    pub fn new(
        d: usize,
        num_wires: usize,
        inputs: Vec<CMatrix>,
        gates: Vec<Gate>,
        effects: Vec<CMatrix>,
    ) -> Result<Self> {
        if d != 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        if inputs.len() != num_wires || effects.len() != num_wires {
            return Err(Error::InvalidCircuit {
                context: format!(
                    "{} wires need {} inputs and effects, got {} and {}",
                    num_wires,
                    num_wires,
                    inputs.len(),
                    effects.len()
                ),
            });
        }
        for rho in &inputs {
            validate_state(rho)?;
        }
        for e in &effects {
            validate_effect(e)?;
        }
        for g in &gates {
            if let Some(max) = g.support.max_wire() {
                if max >= num_wires {
                    return Err(Error::InvalidCircuit {
                        context: format!(
                            "gate '{}' touches wire {} >= {}",
                            g.label, max, num_wires
                        ),
                    });
                }
            }
        }
        Ok(Self {
            d,
            num_wires,
            inputs,
            gates,
            effects,
        })
    }

    /// Structural equality ignoring gate labels, with elementwise tolerance.
    pub fn approx_structural_eq(&self, other: &Circuit, tol: f64) -> bool {
        self.d == other.d
            && self.num_wires == other.num_wires
            && self.inputs.len() == other.inputs.len()
            && self.gates.len() == other.gates.len()
            && self
                .inputs
                .iter()
                .zip(&other.inputs)
                .all(|(a, b)| a.approx_eq(b, tol))
            && self
                .effects
                .iter()
                .zip(&other.effects)
                .all(|(a, b)| a.approx_eq(b, tol))
            && self
                .gates
                .iter()
                .zip(&other.gates)
                .all(|(a, b)| a.support == b.support && a.matrix.approx_eq(&b.matrix, tol))
    }
}

/// Named constructors for the standard gate and state library.
pub mod library {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn x() -> CMatrix {
        CMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    pub fn y() -> CMatrix {
        CMatrix::new(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap()
    }

    pub fn z() -> CMatrix {
        CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap()
    }

    pub fn h() -> CMatrix {
        let s = 1.0 / 2.0f64.sqrt();
        CMatrix::new(2, 2, vec![c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]).unwrap()
    }

    /// `diag(1, e^{i phi})`.
    pub fn phase(phi: f64) -> CMatrix {
        CMatrix::new(
            2,
            2,
            vec![
                c(1., 0.),
                c(0., 0.),
                c(0., 0.),
                Complex64::from_polar(1.0, phi),
            ],
        )
        .unwrap()
    }

    pub fn s() -> CMatrix {
        phase(core::f64::consts::FRAC_PI_2)
    }

    pub fn sdg() -> CMatrix {
        phase(-core::f64::consts::FRAC_PI_2)
    }

    pub fn t() -> CMatrix {
        phase(core::f64::consts::FRAC_PI_4)
    }

    pub fn tdg() -> CMatrix {
        phase(-core::f64::consts::FRAC_PI_4)
    }

    /// Controlled-X; control is the first support wire.
    pub fn cx() -> CMatrix {
        let mut m = CMatrix::identity(4);
        m[(2, 2)] = c(0., 0.);
        m[(3, 3)] = c(0., 0.);
        m[(2, 3)] = c(1., 0.);
        m[(3, 2)] = c(1., 0.);
        m
    }

    pub fn cz() -> CMatrix {
        let mut m = CMatrix::identity(4);
        m[(3, 3)] = c(-1., 0.);
        m
    }

    pub fn swap() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1., 0.);
        m[(1, 2)] = c(1., 0.);
        m[(2, 1)] = c(1., 0.);
        m[(3, 3)] = c(1., 0.);
        m
    }

    /// Toffoli; controls are the first two support wires.
    pub fn ccx() -> CMatrix {
        let mut m = CMatrix::identity(8);
        m[(6, 6)] = c(0., 0.);
        m[(7, 7)] = c(0., 0.);
        m[(6, 7)] = c(1., 0.);
        m[(7, 6)] = c(1., 0.);
        m
    }

    fn pure_state(a0: Complex64, a1: Complex64) -> CMatrix {
        CMatrix::new(
            2,
            2,
            vec![
                a0 * a0.conj(),
                a0 * a1.conj(),
                a1 * a0.conj(),
                a1 * a1.conj(),
            ],
        )
        .unwrap()
    }

    pub fn state_zero() -> CMatrix {
        pure_state(c(1., 0.), c(0., 0.))
    }

    pub fn state_one() -> CMatrix {
        pure_state(c(0., 0.), c(1., 0.))
    }

    pub fn state_plus() -> CMatrix {
        let s = 1.0 / 2.0f64.sqrt();
        pure_state(c(s, 0.), c(s, 0.))
    }

    pub fn state_minus() -> CMatrix {
        let s = 1.0 / 2.0f64.sqrt();
        pure_state(c(s, 0.), c(-s, 0.))
    }

    /// `T |+>` up to normalisation, the canonical magic state.
    pub fn state_magic_t() -> CMatrix {
        let s = 1.0 / 2.0f64.sqrt();
        pure_state(
            c(s, 0.),
            Complex64::from_polar(s, core::f64::consts::FRAC_PI_4),
        )
    }

    pub fn effect_proj0() -> CMatrix {
        state_zero()
    }

    pub fn effect_proj1() -> CMatrix {
        state_one()
    }

    pub fn effect_identity() -> CMatrix {
        CMatrix::identity(2)
    }

    /// Resolve a gate name to its matrix. `phase_arg` is required for PHASE.
    pub fn gate_by_name(name: &str, phase_arg: Option<f64>) -> Option<CMatrix> {
        let up = name.to_uppercase();
        Some(match up.as_str() {
            "X" => x(),
            "Y" => y(),
            "Z" => z(),
            "H" => h(),
            "S" => s(),
            "SDG" | "S\u{2020}" => sdg(),
            "T" => t(),
            "TDG" | "T\u{2020}" => tdg(),
            "PHASE" => phase(phase_arg?),
            "CX" | "CNOT" => cx(),
            "CZ" => cz(),
            "SWAP" => swap(),
            "CCX" | "TOFFOLI" => ccx(),
            _ => return None,
        })
    }

    pub fn state_by_name(name: &str) -> Option<CMatrix> {
        Some(match name.to_lowercase().as_str() {
            "zero" => state_zero(),
            "one" => state_one(),
            "plus" => state_plus(),
            "minus" => state_minus(),
            "magic_t" => state_magic_t(),
            _ => return None,
        })
    }

    pub fn effect_by_name(name: &str) -> Option<CMatrix> {
        Some(match name.to_lowercase().as_str() {
            "proj0" => effect_proj0(),
            "proj1" => effect_proj1(),
            "identity" => effect_identity(),
            _ => return None,
        })
    }
}

fn all_zero_io(num_wires: usize) -> (Vec<CMatrix>, Vec<CMatrix>) {
    (
        (0..num_wires).map(|_| library::state_zero()).collect(),
        (0..num_wires).map(|_| library::effect_proj0()).collect(),
    )
}

fn random_distinct_pair<R: Rng + ?Sized>(num_wires: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.gen_range(0..num_wires);
    let mut b = rng.gen_range(0..num_wires - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Random Clifford+T circuit: `num_cliffords` gates drawn uniformly from
/// {H, S on a random wire; CX, CZ on random distinct wire pairs}, interleaved
/// with `num_t` T gates by a uniform shuffle. Inputs all |0>, effects proj0.
pub fn gen_clifford_t<R: Rng + ?Sized>(
    num_wires: usize,
    num_cliffords: usize,
    num_t: usize,
    rng: &mut R,
) -> Result<Circuit> {
    if num_wires < 2 {
        return Err(Error::InvalidCircuit {
            context: "Clifford+T generator needs at least 2 wires".to_string(),
        });
    }
    let mut gates = Vec::with_capacity(num_cliffords + num_t);
    for _ in 0..num_cliffords {
        let gate = match rng.gen_range(0..4u8) {
            0 => {
                let w = rng.gen_range(0..num_wires);
                Gate::new(library::h(), WireSupport::new(vec![w])?, "H")?
            }
            1 => {
                let w = rng.gen_range(0..num_wires);
                Gate::new(library::s(), WireSupport::new(vec![w])?, "S")?
            }
            2 => {
                let (a, b) = random_distinct_pair(num_wires, rng);
                Gate::new(library::cx(), WireSupport::new(vec![a, b])?, "CX")?
            }
            _ => {
                let (a, b) = random_distinct_pair(num_wires, rng);
                Gate::new(library::cz(), WireSupport::new(vec![a, b])?, "CZ")?
            }
        };
        gates.push(gate);
    }
    for _ in 0..num_t {
        let w = rng.gen_range(0..num_wires);
        gates.push(Gate::new(library::t(), WireSupport::new(vec![w])?, "T")?);
    }
    gates.shuffle(rng);
    let (inputs, effects) = all_zero_io(num_wires);
    Circuit::new(2, num_wires, inputs, gates, effects)
}

/// Random circuit of `num_gates` two-qubit Haar-random unitaries on uniformly
/// random distinct wire pairs. Inputs all |0>, effects proj0.
pub fn gen_haar_circuit<R: Rng + ?Sized>(
    num_wires: usize,
    num_gates: usize,
    rng: &mut R,
) -> Result<Circuit> {
    if num_wires < 2 {
        return Err(Error::InvalidCircuit {
            context: "Haar generator needs at least 2 wires".to_string(),
        });
    }
    let mut gates = Vec::with_capacity(num_gates);
    for _ in 0..num_gates {
        let (a, b) = random_distinct_pair(num_wires, rng);
        let u = numerics::haar_unitary(4, rng);
        gates.push(Gate::new(u, WireSupport::new(vec![a, b])?, "HAAR")?);
    }
    let (inputs, effects) = all_zero_io(num_wires);
    Circuit::new(2, num_wires, inputs, gates, effects)
}

/// Maximum wire count for materialising the full circuit unitary.
pub const UNITARY_WIRE_GUARD: usize = 10;

/// Ordered product of embedded gates, `U_L ... U_1`.
pub fn circuit_unitary(c: &Circuit) -> Result<CMatrix> {
    if c.num_wires > UNITARY_WIRE_GUARD {
        return Err(Error::SizeGuard {
            context: format!(
                "circuit_unitary limited to {} wires, got {}",
                UNITARY_WIRE_GUARD, c.num_wires
            ),
        });
    }
    let dim = pow_usize(c.d, c.num_wires);
    let mut acc = CMatrix::identity(dim);
    for g in &c.gates {
        let emb = embed_gate(&g.matrix, &g.support, c.num_wires, c.d)?;
        acc = emb.mul(&acc)?;
    }
    Ok(acc)
}
