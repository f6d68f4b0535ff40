//! Dense complex matrix kernel.
//!
//! Everything downstream (frames, transition tensors, the oracle) is built on
//! the small dense matrices defined here. Operators stay below `64 x 64` in
//! practice, so the straightforward `O(n^3)` routines are more than adequate.
//!
//! Wire-order convention, used consistently by every module: **wire 0 is the
//! most significant tensor leg**. For a basis index `i` of an `N`-wire system
//! with qudit dimension `d`, the digit of wire `w` is
//! `(i / d^(N-1-w)) % d`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::Result;

/// Default absolute tolerance for matrix identities (unitarity, equality).
pub const TOL: f64 = 1e-10;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl core::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.cols + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[r * self.cols + c]
    }
}

impl CMatrix {
    /// Build a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols != entries.len() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "{}x{} matrix cannot hold {} entries",
                    rows,
                    cols,
                    entries.len()
                ),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Build from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "cannot multiply {}x{} by {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let lhs_row = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                let rhs_row = &other.entries[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in lhs_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    /// Elementwise complex conjugate (no transpose).
    pub fn conj_elementwise(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "cannot add {}x{} and {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `U M U^dagger`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<CMatrix> {
        u.mul(self)?.mul(&u.dagger())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Elementwise maximum modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0f64, f64::max)
    }

    /// `max_ij |self_ij - other_ij|`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max)
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) < tol
    }

    /// Equality up to a global phase, from the phase of the largest entry.
    pub fn approx_eq_up_to_phase(&self, other: &CMatrix, tol: f64) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let pivot = (0..self.entries.len()).fold(0, |best, i| {
            if self.entries[i].norm() > self.entries[best].norm() {
                i
            } else {
                best
            }
        });
        if self.entries[pivot].norm() < tol || other.entries[pivot].norm() < tol {
            return self.max_abs_diff(other) < tol;
        }
        let phase = other.entries[pivot] / self.entries[pivot];
        let phase = phase / Complex64::new(phase.norm(), 0.0);
        self.scale(phase).max_abs_diff(other) < tol
    }

    /// `max_ij |(U^dagger U - I)_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.dagger().mul(self).expect("square dims");
        gram.max_abs_diff(&CMatrix::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        self.max_abs_diff(&self.dagger()) < tol
    }
}

/// Tensor (Kronecker) product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let av = a[(i, k)];
            if av.re == 0.0 && av.im == 0.0 {
                continue;
            }
            for j in 0..b.rows() {
                for l in 0..b.cols() {
                    out[(i * b.rows() + j, k * b.cols() + l)] = av * b[(j, l)];
                }
            }
        }
    }
    out
}

/// Tensor product of a list of matrices, left factor most significant.
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    assert!(!factors.is_empty(), "kron_all needs at least one factor");
    let mut acc = factors[0].clone();
    for m in &factors[1..] {
        acc = kron(&acc, m);
    }
    acc
}

/// `Tr[A B]` without forming the product: `sum_ij A_ij B_ji`.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "trace_inner needs equal square matrices, got {}x{} and {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ),
        });
    }
    let n = a.rows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// Ordered list of distinct qudit indices a gate acts on.
///
/// The order defines the tensor-leg order of the gate matrix: the first
/// listed wire is the most significant leg.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireSupport {
    wires: Vec<usize>,
}

impl WireSupport {
    pub fn new(wires: Vec<usize>) -> Result<Self> {
        for (i, &w) in wires.iter().enumerate() {
            if wires[..i].contains(&w) {
                return Err(Error::InvalidCircuit {
                    context: format!("duplicate wire {} in support", w),
                });
            }
        }
        Ok(Self { wires })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.wires.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.wires.is_empty()
    }

    #[inline]
    pub fn wires(&self) -> &[usize] {
        &self.wires
    }

    pub fn contains(&self, wire: usize) -> bool {
        self.wires.contains(&wire)
    }

    pub fn intersects(&self, other: &WireSupport) -> bool {
        self.wires.iter().any(|w| other.contains(*w))
    }

    /// Sorted union of two supports.
    pub fn union_sorted(&self, other: &WireSupport) -> WireSupport {
        let mut wires = self.wires.clone();
        for &w in &other.wires {
            if !wires.contains(&w) {
                wires.push(w);
            }
        }
        wires.sort_unstable();
        WireSupport { wires }
    }

    pub fn max_wire(&self) -> Option<usize> {
        self.wires.iter().copied().max()
    }
}

impl From<&[usize]> for WireSupport {
    fn from(wires: &[usize]) -> Self {
        WireSupport::new(wires.to_vec()).expect("distinct wires")
    }
}

fn checked_pow(d: usize, k: usize, what: &str) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..k {
        acc = acc.checked_mul(d).ok_or_else(|| Error::SizeGuard {
            context: String::from(what),
        })?;
    }
    Ok(acc)
}

/// Integer power `d^k` for small exponents.
pub fn pow_usize(d: usize, k: usize) -> usize {
    checked_pow(d, k, "dimension overflow").expect("dimension fits in usize")
}

/// Embed a `k`-qudit gate into an `N`-qudit space.
///
/// Returns the `d^N x d^N` operator acting as `g` on `support` (in its listed
/// order) and as the identity elsewhere. Entries are placed by digit
/// arithmetic on basis indices; the permutation-conjugation construction
/// `P (g (x) I) P^dagger` is used as an independent oracle in the tests.
pub fn embed_gate(
    g: &CMatrix,
    support: &WireSupport,
    total_wires: usize,
    d: usize,
) -> Result<CMatrix> {
    let k = support.len();
    let gate_dim = checked_pow(d, k, "gate dimension overflow")?;
    if g.rows() != gate_dim || g.cols() != gate_dim {
        return Err(Error::DimensionMismatch {
            context: format!(
                "gate on {} wires must be {}x{}, got {}x{}",
                k,
                gate_dim,
                gate_dim,
                g.rows(),
                g.cols()
            ),
        });
    }
    if let Some(max) = support.max_wire() {
        if max >= total_wires {
            return Err(Error::InvalidCircuit {
                context: format!("support wire {} outside 0..{}", max, total_wires),
            });
        }
    }
    let dim = checked_pow(d, total_wires, "embedded dimension overflow")?;

    // Place value of each wire in the full index (wire 0 most significant).
    let place: Vec<usize> = (0..total_wires)
        .map(|w| pow_usize(d, total_wires - 1 - w))
        .collect();
    let rest_wires: Vec<usize> = (0..total_wires).filter(|w| !support.contains(*w)).collect();

    // Offset of each support assignment within the full index.
    let sup_offsets: Vec<usize> = (0..gate_dim)
        .map(|idx| {
            let mut off = 0;
            for (pos, &w) in support.wires().iter().enumerate() {
                let digit = (idx / pow_usize(d, k - 1 - pos)) % d;
                off += digit * place[w];
            }
            off
        })
        .collect();

    let rest_count = dim / gate_dim;
    let mut out = CMatrix::zeros(dim, dim);
    for rest in 0..rest_count {
        let mut rest_off = 0;
        let mut r = rest;
        for &w in rest_wires.iter().rev() {
            rest_off += (r % d) * place[w];
            r /= d;
        }
        for gi in 0..gate_dim {
            let row = rest_off + sup_offsets[gi];
            for gj in 0..gate_dim {
                let v = g[(gi, gj)];
                if v.re != 0.0 || v.im != 0.0 {
                    out[(row, rest_off + sup_offsets[gj])] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Draw a Haar-random `dim x dim` unitary.
///
/// Ginibre matrix (i.i.d. complex Gaussian entries) orthonormalised column by
/// column with a re-orthogonalisation pass. Gram-Schmidt yields the QR factor
/// with positive real diagonal, which is exactly the phase convention that
/// makes the result Haar distributed.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    assert!(dim >= 1, "haar_unitary needs dim >= 1");
    let mut m = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    // Column j: subtract projections on columns 0..j, twice, then normalise.
    for j in 0..dim {
        for _pass in 0..2 {
            for p in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for r in 0..dim {
                    proj += m[(r, p)].conj() * m[(r, j)];
                }
                for r in 0..dim {
                    let sub = proj * m[(r, p)];
                    m[(r, j)] -= sub;
                }
            }
        }
        let norm: f64 = (0..dim).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        debug_assert!(norm > 1e-12, "Ginibre column collapsed");
        for r in 0..dim {
            m[(r, j)] /= norm;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::library;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cmatrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let entries = (0..rows * cols)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        CMatrix::new(rows, cols, entries).unwrap()
    }

    #[test]
    fn kron_identity_case() {
        let id2 = CMatrix::identity(2);
        assert!(kron(&id2, &id2).approx_eq(&CMatrix::identity(4), 1e-15));
    }

    #[test]
    fn kron_z_x_block_structure() {
        let zx = kron(&library::z(), &library::x());
        // [[X, 0], [0, -X]]
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 1)] = Complex64::new(1.0, 0.0);
        expect[(1, 0)] = Complex64::new(1.0, 0.0);
        expect[(2, 3)] = Complex64::new(-1.0, 0.0);
        expect[(3, 2)] = Complex64::new(-1.0, 0.0);
        assert!(zx.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn kron_entry_formula_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_cmatrix(2, 2, &mut rng);
        let b = random_cmatrix(2, 2, &mut rng);
        let k = kron(&a, &b);
        // entry (i*q + j, k*s + l) = A(i,k) * B(j,l), with (q,s) = dims of B
        for i in 0..2 {
            for kk in 0..2 {
                for j in 0..2 {
                    for l in 0..2 {
                        let lhs = k[(i * 2 + j, kk * 2 + l)];
                        let rhs = a[(i, kk)] * b[(j, l)];
                        assert!((lhs - rhs).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_inner_pauli_normalisation() {
        let x = library::x();
        let z = library::z();
        assert!((trace_inner(&x, &x).unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(trace_inner(&x, &z).unwrap().norm() < 1e-15);
    }

    #[test]
    fn trace_inner_matches_full_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_cmatrix(4, 4, &mut rng);
        let b = random_cmatrix(4, 4, &mut rng);
        let direct = trace_inner(&a, &b).unwrap();
        let via_product = a.mul(&b).unwrap().trace();
        assert!((direct - via_product).norm() < 1e-12);
    }

    #[test]
    fn trace_inner_rejects_mismatch() {
        let a = CMatrix::identity(2);
        let b = CMatrix::identity(4);
        assert!(trace_inner(&a, &b).is_err());
    }

    #[test]
    fn embed_full_support_is_identity_operation() {
        let cx = library::cx();
        let emb = embed_gate(&cx, &WireSupport::from(&[0usize, 1][..]), 2, 2).unwrap();
        assert!(emb.approx_eq(&cx, 1e-15));
    }

    #[test]
    fn embed_single_wire() {
        let x = library::x();
        let emb = embed_gate(&x, &WireSupport::from(&[1usize][..]), 2, 2).unwrap();
        assert!(emb.approx_eq(&kron(&CMatrix::identity(2), &x), 1e-15));
    }

    /// Oracle: permutation-conjugation of kron(g, I).
    fn embed_via_permutation(g: &CMatrix, support: &[usize], n: usize) -> CMatrix {
        let k = support.len();
        let rest: Vec<usize> = (0..n).filter(|w| !support.contains(w)).collect();
        // Wire order of kron(g, I): support wires then rest wires.
        let mut order = support.to_vec();
        order.extend_from_slice(&rest);
        let dim = 1usize << n;
        let mut perm = CMatrix::zeros(dim, dim);
        for src in 0..dim {
            // src is an index in the (support, rest) ordering; send it to the
            // natural wire ordering.
            let mut dst = 0usize;
            for (pos, &w) in order.iter().enumerate() {
                let bit = (src >> (n - 1 - pos)) & 1;
                dst |= bit << (n - 1 - w);
            }
            perm[(dst, src)] = Complex64::new(1.0, 0.0);
        }
        let big = kron(g, &CMatrix::identity(1 << (n - k)));
        perm.mul(&big).unwrap().mul(&perm.dagger()).unwrap()
    }

    #[test]
    fn embed_reversed_cnot_matches_permutation_oracle() {
        let cx = library::cx();
        let emb = embed_gate(&cx, &WireSupport::from(&[1usize, 0][..]), 2, 2).unwrap();
        let oracle = embed_via_permutation(&cx, &[1, 0], 2);
        assert!(emb.approx_eq(&oracle, 1e-14));
        // which is SWAP * CNOT * SWAP
        let swap = library::swap();
        let expect = swap.mul(&cx).unwrap().mul(&swap).unwrap();
        assert!(emb.approx_eq(&expect, 1e-14));
    }

    #[test]
    fn embed_random_supports_match_permutation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = rng.gen_range(2..5usize);
            let k = rng.gen_range(1..=2usize.min(n));
            let mut wires: Vec<usize> = (0..n).collect();
            for i in (1..wires.len()).rev() {
                let j = rng.gen_range(0..=i);
                wires.swap(i, j);
            }
            wires.truncate(k);
            let g = haar_unitary(1 << k, &mut rng);
            let sup = WireSupport::new(wires.clone()).unwrap();
            let emb = embed_gate(&g, &sup, n, 2).unwrap();
            let oracle = embed_via_permutation(&g, &wires, n);
            assert!(emb.approx_eq(&oracle, 1e-12));
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(4, &mut rng);
        assert!(u.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn haar_unitary_is_deterministic() {
        let u1 = haar_unitary(4, &mut ChaCha8Rng::seed_from_u64(99));
        let u2 = haar_unitary(4, &mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(u1, u2);
    }

    #[test]
    fn haar_column_uniformity() {
        // |U_00|^2 has mean 1/dim under the Haar measure.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 10_000;
        let mean: f64 = (0..draws)
            .map(|_| haar_unitary(4, &mut rng)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!(
            (mean - 0.25).abs() < 0.01,
            "mean |U00|^2 = {mean}, expected 0.25 +- 0.01"
        );
    }

    #[test]
    fn wire_support_rejects_duplicates() {
        assert!(WireSupport::new(vec![0, 1, 0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn kron_is_associative(seed in 0u64..1024) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_cmatrix(2, 2, &mut rng);
            let b = random_cmatrix(2, 2, &mut rng);
            let c = random_cmatrix(2, 2, &mut rng);
            let left = kron(&kron(&a, &b), &c);
            let right = kron(&a, &kron(&b, &c));
            prop_assert!(left.max_abs_diff(&right) < 1e-12);
        }

        #[test]
        fn embed_respects_composition(seed in 0u64..1024) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g1 = haar_unitary(2, &mut rng);
            let g2 = haar_unitary(2, &mut rng);
            let sup = WireSupport::from(&[1usize][..]);
            let lhs = embed_gate(&g2.mul(&g1).unwrap(), &sup, 3, 2).unwrap();
            let rhs = embed_gate(&g2, &sup, 3, 2).unwrap()
                .mul(&embed_gate(&g1, &sup, 3, 2).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn embed_preserves_unitarity(seed in 0u64..1024) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = haar_unitary(4, &mut rng);
            let emb = embed_gate(&g, &WireSupport::from(&[2usize, 0][..]), 3, 2).unwrap();
            prop_assert!(emb.unitarity_deviation() < 1e-10);
        }
    }
}
