//! Parametrised frame families: (F, G) operator pairs per qudit.
//!
//! A frame `{F(lambda)}` and its dual `{G(lambda)}` over the d^2 phase-space
//! points of one qudit reconstruct any operator `O` as
//! `O = sum_lambda Tr[F(lambda) O] G(lambda)`. Duality is the load-bearing
//! property of the whole method (the trajectory-sum identity depends on it),
//! so every constructed pair is verified against the displacement basis and
//! construction fails if the reconstruction error reaches 1e-9.
//!
//! Phase points `(p, q)` of one qubit are indexed `2p + q`, so the four
//! displacement operators appear in the order `I, X, Z, -Y`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::circuit::library;
use crate::error::Error;
use crate::numerics::CMatrix;
use crate::Result;

/// Lower bound for Wigner `g` values.
pub const G_MIN: f64 = 1e-3;
/// Upper bound for Wigner `g` values.
pub const G_MAX: f64 = 1e3;
/// Hard duality gate applied at construction.
pub const DUALITY_TOL: f64 = 1e-9;

/// Single-qudit phase-space point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhasePoint {
    pub p: usize,
    pub q: usize,
}

impl PhasePoint {
    pub fn new(p: usize, q: usize, d: usize) -> Self {
        Self { p: p % d, q: q % d }
    }

    /// Index in the `d^2`-element phase space: `d*p + q`.
    pub fn index(&self, d: usize) -> usize {
        self.p * d + self.q
    }
}

/// All `d^2` points of one qudit in index order.
pub fn phase_points(d: usize) -> Vec<PhasePoint> {
    let mut pts = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in 0..d {
            pts.push(PhasePoint { p, q });
        }
    }
    pts
}

/// Discrete displacement operator `D(p, q)`.
///
/// For a qubit this is `i^{pq} Z^p X^q`, giving `{I, X, Z, -Y}` over the four
/// points. Other qudit dimensions are out of scope.
pub fn displacement(p: usize, q: usize, d: usize) -> Result<CMatrix> {
    if d != 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let (p, q) = (p % 2, q % 2);
    let mut m = match (p, q) {
        (0, 0) => CMatrix::identity(2),
        (0, 1) => library::x(),
        (1, 0) => library::z(),
        _ => library::z().mul(&library::x())?,
    };
    if p * q == 1 {
        m = m.scale(Complex64::new(0.0, 1.0)); // i Z X = -Y
    }
    Ok(m)
}

/// Which parametrised family a frame belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    Wigner,
    RotatedPauli,
}

impl FrameKind {
    /// Number of free parameters per qubit frame.
    pub fn param_len(&self) -> usize {
        match self {
            // g over the 4 points with g(0,0) pinned to 1.
            FrameKind::Wigner => 4,
            FrameKind::RotatedPauli => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FrameKind::Wigner => "wigner",
            FrameKind::RotatedPauli => "rotated_pauli",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "wigner" => Some(FrameKind::Wigner),
            "rotated_pauli" => Some(FrameKind::RotatedPauli),
            _ => None,
        }
    }

    /// Reference frame of the family: `g = 1` or `theta = 0`.
    pub fn reference(&self) -> FramePair {
        match self {
            FrameKind::Wigner => make_wigner_frame(&[1.0; 4]).expect("reference g=1 is valid"),
            FrameKind::RotatedPauli => {
                make_pauli_frame([0.0, 0.0, 0.0]).expect("reference theta=0 is valid")
            }
        }
    }
}

/// Matched frame / dual-frame operator lists for one qudit.
///
/// `params` holds the family parameters as stored in assignment files:
/// the four `g` values for Wigner frames (with `g[0] = 1`) or the three
/// rotation angles for rotated Pauli frames.
#[derive(Clone, Debug, PartialEq)]
pub struct FramePair {
    kind: FrameKind,
    params: Vec<f64>,
    f_ops: Vec<CMatrix>,
    g_ops: Vec<CMatrix>,
    /// Cached expansions in the displacement basis, `Tr[F(l) D(m)] / d` and
    /// `Tr[G(l) D(m)] / d`, row-major over `(l, m)`. These let transition
    /// tensors be assembled from a gate's displacement-basis kernel without
    /// touching the operators again.
    f_disp: Vec<f64>,
    g_disp: Vec<f64>,
}

impl FramePair {
    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn num_points(&self) -> usize {
        self.f_ops.len()
    }

    pub fn f_op(&self, idx: usize) -> &CMatrix {
        &self.f_ops[idx]
    }

    pub fn g_op(&self, idx: usize) -> &CMatrix {
        &self.g_ops[idx]
    }

    pub fn f_ops(&self) -> &[CMatrix] {
        &self.f_ops
    }

    pub fn g_ops(&self) -> &[CMatrix] {
        &self.g_ops
    }

    /// `Tr[F(l) D(m)] / d` as a row-major `d^2 x d^2` table.
    pub fn f_disp_coeffs(&self) -> &[f64] {
        &self.f_disp
    }

    /// `Tr[G(l) D(m)] / d` as a row-major `d^2 x d^2` table.
    pub fn g_disp_coeffs(&self) -> &[f64] {
        &self.g_disp
    }

    fn assemble(
        kind: FrameKind,
        params: Vec<f64>,
        f_ops: Vec<CMatrix>,
        g_ops: Vec<CMatrix>,
    ) -> Result<Self> {
        let d = 2usize;
        let disp: Vec<CMatrix> = phase_points(d)
            .iter()
            .map(|pt| displacement(pt.p, pt.q, d))
            .collect::<Result<_>>()?;
        let coeff_table = |ops: &[CMatrix]| -> Result<Vec<f64>> {
            let mut table = Vec::with_capacity(ops.len() * disp.len());
            for op in ops {
                for dm in &disp {
                    let tr = crate::numerics::trace_inner(op, dm)?;
                    debug_assert!(tr.im.abs() < 1e-12);
                    table.push(tr.re / d as f64);
                }
            }
            Ok(table)
        };
        let f_disp = coeff_table(&f_ops)?;
        let g_disp = coeff_table(&g_ops)?;
        let pair = Self {
            kind,
            params,
            f_ops,
            g_ops,
            f_disp,
            g_disp,
        };
        let err = check_duality(&pair);
        // negated form also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(err < DUALITY_TOL) {
            return Err(Error::DualityViolation { error: err });
        }
        Ok(pair)
    }
}

/// Parametrised Wigner frame from a positive weight function `g` over the
/// four phase points (`g[0] = g(0,0)` must equal 1).
///
/// Reference operators: `G0 = (1/d) sum_l g(l) D(-l)` and
/// `F0 = (1/d^2) sum_l D(l) / g(l)`; the pair is displaced to every point by
/// `F(l) = D(l) F0 D(l)^dagger` (likewise for `G`). With `g = 1` this is the
/// conventional discrete Wigner function.
pub fn make_wigner_frame(g: &[f64]) -> Result<FramePair> {
    let d = 2usize;
    let n_points = d * d;
    if g.len() != n_points {
        return Err(Error::FrameParamOutOfBounds {
            context: format!("wigner frame needs {} g-values, got {}", n_points, g.len()),
        });
    }
    if (g[0] - 1.0).abs() > 1e-12 {
        return Err(Error::FrameParamOutOfBounds {
            context: format!("g(0,0) must be 1, got {}", g[0]),
        });
    }
    for &v in g {
        if !(G_MIN..=G_MAX).contains(&v) {
            return Err(Error::FrameParamOutOfBounds {
                context: format!("g value {} outside [{:e}, {:e}]", v, G_MIN, G_MAX),
            });
        }
    }

    let points = phase_points(d);
    let mut f0 = CMatrix::zeros(d, d);
    let mut g0 = CMatrix::zeros(d, d);
    for pt in &points {
        let idx = pt.index(d);
        let disp = displacement(pt.p, pt.q, d)?;
        let disp_neg = displacement((d - pt.p) % d, (d - pt.q) % d, d)?;
        f0 = f0.add(&disp.scale(Complex64::new(1.0 / (g[idx] * (n_points as f64)), 0.0)))?;
        g0 = g0.add(&disp_neg.scale(Complex64::new(g[idx] / d as f64, 0.0)))?;
    }

    let mut f_ops = Vec::with_capacity(n_points);
    let mut g_ops = Vec::with_capacity(n_points);
    for pt in &points {
        let disp = displacement(pt.p, pt.q, d)?;
        f_ops.push(f0.conjugate_by(&disp)?);
        g_ops.push(g0.conjugate_by(&disp)?);
    }
    FramePair::assemble(FrameKind::Wigner, g.to_vec(), f_ops, g_ops)
}

fn rotation_operator(theta: [f64; 3]) -> CMatrix {
    let [tx, ty, tz] = theta;
    let rx = CMatrix::new(
        2,
        2,
        vec![
            Complex64::new((tx / 2.0).cos(), 0.0),
            Complex64::new(0.0, -(tx / 2.0).sin()),
            Complex64::new(0.0, -(tx / 2.0).sin()),
            Complex64::new((tx / 2.0).cos(), 0.0),
        ],
    )
    .unwrap();
    let ry = CMatrix::new(
        2,
        2,
        vec![
            Complex64::new((ty / 2.0).cos(), 0.0),
            Complex64::new(-(ty / 2.0).sin(), 0.0),
            Complex64::new((ty / 2.0).sin(), 0.0),
            Complex64::new((ty / 2.0).cos(), 0.0),
        ],
    )
    .unwrap();
    let rz = CMatrix::new(
        2,
        2,
        vec![
            Complex64::from_polar(1.0, -tz / 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, tz / 2.0),
        ],
    )
    .unwrap();
    rz.mul(&ry).unwrap().mul(&rx).unwrap()
}

/// Rotated Pauli frame for a qubit.
///
/// The displacement set `{I, X, Z, -Y}` is conjugated by the Bloch rotation
/// `R(theta) = R_Z(theta_Z) R_Y(theta_Y) R_X(theta_X)`, giving
/// `D_theta(l) = R D(l) R^dagger` with `D_theta(0,0) = I`. The frame is
/// `F(l) = D_theta(l) / 2`, `G(l) = D_theta(l)`; at `theta = 0` this is the
/// conventional Bloch decomposition.
///
/// Note `sum_l F(l) != I` for this family: only duality is required by the
/// sampler, and duality holds for every `theta` because conjugation preserves
/// the orthonormal Pauli triad.
pub fn make_pauli_frame(theta: [f64; 3]) -> Result<FramePair> {
    for t in theta {
        if !t.is_finite() {
            return Err(Error::FrameParamOutOfBounds {
                context: format!("non-finite rotation angle {t}"),
            });
        }
    }
    let d = 2usize;
    let rot = rotation_operator(theta);
    let mut f_ops = Vec::with_capacity(d * d);
    let mut g_ops = Vec::with_capacity(d * d);
    for pt in phase_points(d) {
        let disp = displacement(pt.p, pt.q, d)?;
        let rotated = disp.conjugate_by(&rot)?;
        f_ops.push(rotated.scale(Complex64::new(0.5, 0.0)));
        g_ops.push(rotated);
    }
    FramePair::assemble(FrameKind::RotatedPauli, theta.to_vec(), f_ops, g_ops)
}

/// Construct a frame of the given kind from its parameter vector.
pub fn make_frame(kind: FrameKind, params: &[f64]) -> Result<FramePair> {
    match kind {
        FrameKind::Wigner => make_wigner_frame(params),
        FrameKind::RotatedPauli => {
            if params.len() != 3 {
                return Err(Error::FrameParamOutOfBounds {
                    context: format!("rotated Pauli frame needs 3 angles, got {}", params.len()),
                });
            }
            make_pauli_frame([params[0], params[1], params[2]])
        }
    }
}

/// Maximum reconstruction error of `B = sum_l Tr[F(l) B] G(l)` over the
/// displacement basis.
pub fn check_duality(fp: &FramePair) -> f64 {
    let d = 2usize;
    let mut worst = 0.0f64;
    for pt in phase_points(d) {
        let basis = displacement(pt.p, pt.q, d).expect("d=2");
        let mut recon = CMatrix::zeros(d, d);
        for idx in 0..fp.num_points() {
            let w = crate::numerics::trace_inner(fp.f_op(idx), &basis).expect("dims");
            recon = recon.add(&fp.g_op(idx).scale(w)).expect("dims");
        }
        worst = worst.max(recon.max_abs_diff(&basis));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::trace_inner;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_g(rng: &mut ChaCha8Rng) -> [f64; 4] {
        let mut g = [1.0; 4];
        for v in g.iter_mut().skip(1) {
            // log-uniform over a comfortable interior of the allowed box
            *v = (rng.gen_range(-2.0..2.0f64)).exp();
        }
        g
    }

    #[test]
    fn displacement_values() {
        assert!(displacement(0, 0, 2)
            .unwrap()
            .approx_eq(&CMatrix::identity(2), 1e-15));
        assert!(displacement(0, 1, 2)
            .unwrap()
            .approx_eq(&library::x(), 1e-15));
        assert!(displacement(1, 0, 2)
            .unwrap()
            .approx_eq(&library::z(), 1e-15));
        // i Z X = -Y = [[0, i], [-i, 0]]
        let neg_y = library::y().scale(Complex64::new(-1.0, 0.0));
        assert!(displacement(1, 1, 2).unwrap().approx_eq(&neg_y, 1e-15));
        assert!(displacement(0, 0, 3).is_err());
    }

    #[test]
    fn displacement_orthogonality() {
        // Tr[D(mu) D(lambda)] = 2 delta over all 16 pairs
        for a in phase_points(2) {
            for b in phase_points(2) {
                let da = displacement(a.p, a.q, 2).unwrap();
                let db = displacement(b.p, b.q, 2).unwrap();
                let tr = trace_inner(&da, &db).unwrap();
                let expect = if a == b { 2.0 } else { 0.0 };
                assert!((tr - Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn conventional_wigner_reference_operators() {
        let fp = make_wigner_frame(&[1.0; 4]).unwrap();
        // F0 = (I + X + Z - Y) / 4, G0 = 2 F0
        let neg_y = library::y().scale(Complex64::new(-1.0, 0.0));
        let sum = CMatrix::identity(2)
            .add(&library::x())
            .unwrap()
            .add(&library::z())
            .unwrap()
            .add(&neg_y)
            .unwrap();
        assert!(fp
            .f_op(0)
            .approx_eq(&sum.scale(Complex64::new(0.25, 0.0)), 1e-14));
        assert!(fp
            .g_op(0)
            .approx_eq(&sum.scale(Complex64::new(0.5, 0.0)), 1e-14));
        assert!(check_duality(&fp) < 1e-12);
    }

    #[test]
    fn wigner_f_ops_resolve_identity() {
        // g(0,0) = 1 pins sum_l F(l) = I, so sum_l Tr[F(l) rho] = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let fp = make_wigner_frame(&random_g(&mut rng)).unwrap();
            let mut total = CMatrix::zeros(2, 2);
            for idx in 0..4 {
                total = total.add(fp.f_op(idx)).unwrap();
            }
            assert!(total.approx_eq(&CMatrix::identity(2), 1e-12));
        }
    }

    #[test]
    fn wigner_g_recovered_from_reference_operator() {
        // g(lambda) = Tr[G0 D(lambda)]
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let g = random_g(&mut rng);
        let fp = make_wigner_frame(&g).unwrap();
        for (idx, pt) in phase_points(2).into_iter().enumerate() {
            let disp = displacement(pt.p, pt.q, 2).unwrap();
            let tr = trace_inner(fp.g_op(0), &disp).unwrap();
            assert!((tr.re - g[idx]).abs() < 1e-12, "g({idx}) mismatch");
            assert!(tr.im.abs() < 1e-12);
        }
    }

    #[test]
    fn wigner_duality_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let fp = make_wigner_frame(&random_g(&mut rng)).unwrap();
            assert!(check_duality(&fp) < 1e-9);
        }
    }

    #[test]
    fn wigner_rejects_out_of_bounds() {
        assert!(make_wigner_frame(&[1.0, 0.5e-3, 1.0, 1.0]).is_err());
        assert!(make_wigner_frame(&[1.0, 2e3, 1.0, 1.0]).is_err());
        assert!(make_wigner_frame(&[0.9, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn pauli_reference_is_displacement_set() {
        let fp = make_pauli_frame([0.0, 0.0, 0.0]).unwrap();
        for pt in phase_points(2) {
            let disp = displacement(pt.p, pt.q, 2).unwrap();
            assert!(fp.g_op(pt.index(2)).approx_eq(&disp, 1e-14));
            assert!(fp
                .f_op(pt.index(2))
                .approx_eq(&disp.scale(Complex64::new(0.5, 0.0)), 1e-14));
        }
    }

    #[test]
    fn pauli_duality_random_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let theta = [
                rng.gen_range(-6.0..6.0),
                rng.gen_range(-6.0..6.0),
                rng.gen_range(-6.0..6.0),
            ];
            let fp = make_pauli_frame(theta).unwrap();
            assert!(check_duality(&fp) < 1e-12);
        }
    }

    #[test]
    fn corrupted_frame_scale_is_detected() {
        // Doubling F breaks reconstruction by a factor ~2, so the error is ~1
        // on the unit-magnitude displacement basis.
        let fp = make_wigner_frame(&[1.0; 4]).unwrap();
        let corrupted = FramePair {
            kind: fp.kind,
            params: fp.params.clone(),
            f_ops: fp
                .f_ops
                .iter()
                .map(|m| m.scale(Complex64::new(2.0, 0.0)))
                .collect(),
            g_ops: fp.g_ops.clone(),
            f_disp: fp.f_disp.clone(),
            g_disp: fp.g_disp.clone(),
        };
        let err = check_duality(&corrupted);
        assert!((err - 1.0).abs() < 1e-9, "expected error ~1, got {err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn rotated_displacements_form_orthonormal_triad(
            tx in -7.0..7.0f64, ty in -7.0..7.0f64, tz in -7.0..7.0f64,
        ) {
            let fp = make_pauli_frame([tx, ty, tz]).unwrap();
            for idx in 1..4 {
                let m = fp.g_op(idx);
                prop_assert!(m.is_hermitian(1e-12));
                prop_assert!(m.trace().norm() < 1e-12);
                let sq = m.mul(m).unwrap();
                prop_assert!(sq.approx_eq(&CMatrix::identity(2), 1e-12));
                for other in idx + 1..4 {
                    let tr = trace_inner(m, fp.g_op(other)).unwrap();
                    prop_assert!(tr.norm() < 1e-12);
                }
            }
            prop_assert!(check_duality(&fp) < 1e-9);
        }
    }
}
