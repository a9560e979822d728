//! Complex Clifford modules for diagonal metrics of any signature.
//!
//! The convention is `X·X = −g(X, X)`, so `γ_iγ_j + γ_jγ_i = −2g_ij`.
//! Euclidean generators come from Pauli tensor products; a direction with
//! `g_ii = −1` uses `i` times the Euclidean generator. Every generator built
//! this way is monomial (exactly one nonzero entry per row), so it is stored
//! as a permutation with phases and applied in linear time.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Scalar, C64};
use crate::linalg::Mat;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Diagonal metric with entries `±1`, in frame order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Metric {
    signs: Vec<i8>,
}

impl Metric {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidSignature("dimension must be at least 1".into()));
        }
        if let Some(s) = signs.iter().find(|s| s.abs() != 1) {
            return Err(Error::InvalidSignature(format!("metric entry {s} is not ±1")));
        }
        Ok(Metric { signs })
    }

    pub fn euclidean(n: usize) -> Self {
        Metric { signs: vec![1; n] }
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        self.signs[i] as f64
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// `(n₊, n₋)`.
    pub fn counts(&self) -> (usize, usize) {
        let plus = self.signs.iter().filter(|&&s| s > 0).count();
        (plus, self.signs.len() - plus)
    }

    pub fn is_definite(&self) -> bool {
        let (p, m) = self.counts();
        p == 0 || m == 0
    }

    /// `g ⊕ (ε)`: the metric with one extra direction appended.
    pub fn extended(&self, eps: i8) -> Metric {
        let mut signs = self.signs.clone();
        signs.push(eps);
        Metric { signs }
    }

    pub fn inner<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let mut acc = S::zero();
        for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
            acc += (a * b).scale_re(self.sign(i));
        }
        acc
    }
}

/// Signature `(n₊, n₋)` with the positive directions first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
}

impl Signature {
    /// Panics when `n₊ + n₋ = 0`; see [`Signature::try_new`].
    pub fn new(n_plus: usize, n_minus: usize) -> Self {
        Self::try_new(n_plus, n_minus).expect("signature dimension must be at least 1")
    }

    pub fn try_new(n_plus: usize, n_minus: usize) -> Result<Self> {
        if n_plus + n_minus == 0 {
            return Err(Error::InvalidSignature("dimension must be at least 1".into()));
        }
        Ok(Signature { n_plus, n_minus })
    }

    pub fn n(&self) -> usize {
        self.n_plus + self.n_minus
    }

    pub fn metric(&self) -> Metric {
        let mut signs = vec![1; self.n_plus];
        signs.extend(std::iter::repeat_n(-1, self.n_minus));
        Metric { signs }
    }

    /// Cone signature `(n₊ + (1+ε)/2, n₋ + (1−ε)/2)`.
    pub fn cone(&self, eps: i8) -> Signature {
        if eps > 0 {
            Signature::new(self.n_plus + 1, self.n_minus)
        } else {
            Signature::new(self.n_plus, self.n_minus + 1)
        }
    }
}

/// Matrix with one nonzero entry per row: `(Mψ)_r = phase_r · ψ_{perm_r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    perm: Vec<usize>,
    phase: Vec<C64>,
}

impl Monomial {
    pub fn identity(d: usize) -> Self {
        Monomial {
            perm: (0..d).collect(),
            phase: vec![ONE; d],
        }
    }

    /// Tensor product of Pauli factors (0 = I, 1..=3 = σ₁..σ₃), first factor most significant.
    fn pauli_string(factors: &[u8]) -> Self {
        let m = factors.len();
        let d = 1usize << m;
        let mut perm = vec![0; d];
        let mut phase = vec![ONE; d];
        for r in 0..d {
            let mut col = r;
            let mut ph = ONE;
            for (j, &f) in factors.iter().enumerate() {
                let bit = 1 << (m - 1 - j);
                let up = r & bit == 0;
                match f {
                    0 => {}
                    1 => col ^= bit,
                    2 => {
                        col ^= bit;
                        ph *= if up { -I } else { I };
                    }
                    3 => {
                        if !up {
                            ph = -ph;
                        }
                    }
                    _ => unreachable!("Pauli index"),
                }
            }
            perm[r] = col;
            phase[r] = ph;
        }
        Monomial { perm, phase }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn entry(&self, r: usize) -> (usize, C64) {
        (self.perm[r], self.phase[r])
    }

    pub fn apply<S: Scalar>(&self, src: &[S]) -> Vec<S> {
        assert_eq!(src.len(), self.dim(), "spinor length");
        self.perm
            .iter()
            .zip(&self.phase)
            .map(|(&c, &ph)| src[c].scale(ph))
            .collect()
    }

    /// Applies the matrix to every consecutive block of `dim()` entries.
    pub fn apply_blocks<S: Scalar>(&self, src: &[S]) -> Vec<S> {
        let d = self.dim();
        assert_eq!(src.len() % d, 0, "block length");
        let mut out = Vec::with_capacity(src.len());
        for block in src.chunks_exact(d) {
            for (&c, &ph) in self.perm.iter().zip(&self.phase) {
                out.push(block[c].scale(ph));
            }
        }
        out
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &Monomial) -> Monomial {
        assert_eq!(self.dim(), rhs.dim());
        let perm = self.perm.iter().map(|&c| rhs.perm[c]).collect();
        let phase = self
            .perm
            .iter()
            .zip(&self.phase)
            .map(|(&c, &ph)| ph * rhs.phase[c])
            .collect();
        Monomial { perm, phase }
    }

    pub fn inverse(&self) -> Monomial {
        let d = self.dim();
        let mut perm = vec![0; d];
        let mut phase = vec![ONE; d];
        for r in 0..d {
            perm[self.perm[r]] = r;
            phase[self.perm[r]] = ONE / self.phase[r];
        }
        Monomial { perm, phase }
    }

    pub fn scale(&self, c: C64) -> Monomial {
        Monomial {
            perm: self.perm.clone(),
            phase: self.phase.iter().map(|&p| p * c).collect(),
        }
    }

    /// `diag(self, c·self)` on twice the dimension.
    fn block_diag(&self, c: C64) -> Monomial {
        let d = self.dim();
        let mut perm = self.perm.clone();
        perm.extend(self.perm.iter().map(|&p| p + d));
        let mut phase = self.phase.clone();
        phase.extend(self.phase.iter().map(|&p| p * c));
        Monomial { perm, phase }
    }

    /// Returns `λ` when the matrix equals `λ·I`.
    pub fn as_scalar(&self, tol: f64) -> Option<C64> {
        let l = self.phase[0];
        let ok = self.perm.iter().enumerate().all(|(r, &c)| r == c)
            && self.phase.iter().all(|&p| (p - l).norm() <= tol);
        ok.then_some(l)
    }

    pub fn dense(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for r in 0..d {
            m[(r, self.perm[r])] = self.phase[r];
        }
        m
    }

    pub fn to_mat<S: Scalar>(&self) -> Mat<S> {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for r in 0..d {
            m[(r, self.perm[r])] = S::constant(self.phase[r]);
        }
        m
    }
}

/// Euclidean generators, each squaring to `−1`.
fn euclidean_gammas(n: usize) -> Vec<Monomial> {
    let m = n / 2;
    let mut out = Vec::with_capacity(n);
    for k in 0..m {
        for f in [1u8, 2] {
            let mut factors = vec![3u8; k];
            factors.push(f);
            factors.extend(std::iter::repeat_n(0, m - k - 1));
            out.push(Monomial::pauli_string(&factors).scale(I));
        }
    }
    if n % 2 == 1 {
        out.push(Monomial::pauli_string(&vec![3u8; m]).scale(I));
    }
    out
}

/// A spinor with its coefficients in the standard basis of `Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spinor<S = C64> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Spinor<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        Spinor { coeffs }
    }

    pub fn zero(d: usize) -> Self {
        Spinor {
            coeffs: vec![S::zero(); d],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Irreducible complex module of the Clifford algebra of a diagonal metric.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    metric: Metric,
    dim: usize,
    gammas: Vec<Monomial>,
}

/// `build_clifford` for a signature.
pub fn build_clifford(sig: Signature) -> CliffordRep {
    CliffordRep::new(sig.metric())
}

impl CliffordRep {
    pub fn new(metric: Metric) -> Self {
        let gammas: Vec<Monomial> = euclidean_gammas(metric.dim())
            .into_iter()
            .enumerate()
            .map(|(i, g)| if metric.sign(i) < 0.0 { g.scale(I) } else { g })
            .collect();
        CliffordRep {
            dim: gammas[0].dim(),
            metric,
            gammas,
        }
    }

    /// Wraps explicit generators after checking the defining relations.
    pub fn from_gammas(metric: Metric, gammas: Vec<Monomial>) -> Result<Self> {
        if gammas.len() != metric.dim() {
            return Err(Error::DimensionMismatch {
                expected: metric.dim(),
                got: gammas.len(),
            });
        }
        let rep = CliffordRep {
            dim: gammas[0].dim(),
            metric,
            gammas,
        };
        let res = rep.anticommutator_residual();
        if res > 1e-12 {
            return Err(Error::Validation(format!(
                "generators violate the Clifford relations (residual {res:e})"
            )));
        }
        Ok(rep)
    }

    /// A deliberately broken copy: the last generator's square has the wrong sign.
    pub fn with_sign_defect(&self) -> Self {
        let mut out = self.clone();
        let last = out.gammas.len() - 1;
        out.gammas[last] = out.gammas[last].scale(I);
        out
    }

    pub fn n(&self) -> usize {
        self.metric.dim()
    }

    pub fn spinor_dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn gamma(&self, i: usize) -> &Monomial {
        &self.gammas[i]
    }

    pub fn gammas(&self) -> &[Monomial] {
        &self.gammas
    }

    pub fn gamma_matrix(&self, i: usize) -> DMatrix<C64> {
        self.gammas[i].dense()
    }

    /// `max_{i,j} ‖γ_iγ_j + γ_jγ_i + 2g_ij‖`.
    pub fn anticommutator_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for j in i..self.n() {
                let mut m = self.gamma_matrix(i) * self.gamma_matrix(j)
                    + self.gamma_matrix(j) * self.gamma_matrix(i);
                if i == j {
                    m += DMatrix::identity(d, d) * C64::new(2.0 * self.metric.sign(i), 0.0);
                }
                worst = worst.max(m.iter().map(|x| x.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// `γ_{i_1}⋯γ_{i_k}` for the increasing indices in `mask`.
    pub fn product(&self, mask: u32) -> Monomial {
        let mut out = Monomial::identity(self.dim);
        for i in 0..self.n() {
            if mask & (1 << i) != 0 {
                out = out.compose(&self.gammas[i]);
            }
        }
        out
    }

    /// `γ_1⋯γ_n`.
    pub fn volume(&self) -> Monomial {
        self.product((1u32 << self.n()) - 1)
    }

    /// `X·ψ = Σ X^i γ_i ψ`.
    pub fn clifford_mul<S: Scalar>(&self, x: &[S], psi: &Spinor<S>) -> Spinor<S> {
        Spinor::new(self.vector_action(x, &psi.coeffs))
    }

    /// `Σ X^i γ_i` applied blockwise to spinor-valued data.
    pub fn vector_action<S: Scalar>(&self, x: &[S], data: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.n(), "vector length");
        let mut out = vec![S::zero(); data.len()];
        for (i, &c) in x.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.gammas[i].apply_blocks(data)) {
                *o += c * v;
            }
        }
        out
    }

    /// Chirality projectors `½(1 ± ν·vol)` with `(ν·vol)² = 1`; even `n` only.
    pub fn half_spinor_projectors(&self) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
        if self.n() % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "half-spinors need even dimension, got {}",
                self.n()
            )));
        }
        let vol = self.volume();
        let sq = vol.compose(&vol).as_scalar(1e-12).expect("volume squares to a scalar");
        let chi = vol.scale(ONE / sq.sqrt()).dense();
        let id = DMatrix::<C64>::identity(self.dim, self.dim);
        let half = C64::new(0.5, 0.0);
        Ok(((&id + &chi) * half, (&id - &chi) * half))
    }

    /// Spinor-space matrix `s` with `s γ_i s⁻¹ = Σ_j R_ji γ_j`.
    ///
    /// Uses `K = Σ_I γ'_I γ_I⁻¹` (even `I` only when `n` is odd), which is
    /// proportional to `s`; the normalization picks the branch with
    /// `tr s > 0`, so the lift is smooth wherever that trace stays positive.
    pub fn spin_lift<S: Scalar>(&self, r: &Mat<S>) -> Result<Mat<S>> {
        let n = self.n();
        let d = self.dim;
        if r.rows() != n || r.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.rows(),
            });
        }
        self.check_special_orthogonal(r)?;

        let rotated: Vec<Mat<S>> = (0..n)
            .map(|i| {
                let mut m = Mat::zeros(d, d);
                for j in 0..n {
                    let c = r[(j, i)];
                    if c.is_exact_zero() {
                        continue;
                    }
                    m = m.add(&self.gammas[j].to_mat::<S>().scale(c));
                }
                m
            })
            .collect();

        let masks = 1usize << n;
        let mut prods: Vec<Mat<S>> = Vec::with_capacity(masks);
        prods.push(Mat::identity(d));
        let mut k = Mat::identity(d);
        let mut terms = 1usize;
        for mask in 1..masks {
            let top = usize::BITS - 1 - mask.leading_zeros();
            let prev = mask ^ (1 << top);
            let p = prods[prev].mul(&rotated[top as usize]);
            if n.is_multiple_of(2) || mask.count_ones() % 2 == 0 {
                let inv = self.product(mask as u32).inverse();
                k = k.add(&p.mul(&inv.to_mat()));
                terms += 1;
            }
            prods.push(p);
        }

        let tr = k.trace();
        if tr.value().re <= 1e-9 * terms as f64 {
            return Err(Error::BranchAmbiguity(format!(
                "rotation is at or beyond angle π in some plane (tr K = {:e})",
                tr.value().re
            )));
        }
        let norm = (tr.scale_re(terms as f64 / d as f64)).sqrt();
        Ok(k.scale(norm.recip()))
    }

    fn check_special_orthogonal<S: Scalar>(&self, r: &Mat<S>) -> Result<()> {
        let n = self.n();
        let rv = r.values();
        let g = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.metric.sign(i), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let res = rv.transpose() * &g * &rv - &g;
        let err = res.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if err > 1e-10 {
            return Err(Error::Validation(format!(
                "matrix is not orthogonal for the metric (residual {err:e})"
            )));
        }
        let det = rv.determinant();
        if (det - ONE).norm() > 1e-8 {
            return Err(Error::Validation(format!(
                "determinant {det} is not +1"
            )));
        }
        Ok(())
    }
}

/// Choice of sign in `φ±`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}

/// `Δ ⊂ Δ̄` for the cone metric `g ⊕ (ε)`.
///
/// For even `n` the cone module is `Δ` itself with `γ̄_{n+1}` a multiple of
/// the volume element. For odd `n` it is `Δ ⊕ Δ` with `γ̄_i = diag(γ_i, −γ_i)`
/// and `γ̄_{n+1}` swapping the halves; `inject` is the inclusion of the first
/// half.
#[derive(Clone, Debug)]
pub struct SpinEmbedding {
    base: CliffordRep,
    cone: CliffordRep,
    eps: i8,
}

pub fn build_embedding(sig: Signature, eps: i8) -> Result<SpinEmbedding> {
    SpinEmbedding::new(&build_clifford(sig), eps)
}

impl SpinEmbedding {
    pub fn new(base: &CliffordRep, eps: i8) -> Result<Self> {
        if eps.abs() != 1 {
            return Err(Error::InvalidSignature(format!("ε must be ±1, got {eps}")));
        }
        let n = base.n();
        let eps_c = C64::new(eps as f64, 0.0);
        let mut gammas: Vec<Monomial>;
        if n.is_multiple_of(2) {
            gammas = base.gammas.clone();
            let vol = base.volume();
            let sq = vol.compose(&vol).as_scalar(1e-12).expect("volume squares to a scalar");
            let kappa = (-eps_c / sq).sqrt();
            gammas.push(vol.scale(kappa));
        } else {
            gammas = base.gammas.iter().map(|g| g.block_diag(-ONE)).collect();
            let d = base.dim;
            let swap = Monomial {
                perm: (0..2 * d).map(|r| r ^ d).collect(),
                phase: vec![ONE; 2 * d],
            };
            let c = if eps > 0 { I } else { ONE };
            gammas.push(swap.scale(c));
        }
        let cone = CliffordRep::from_gammas(base.metric.extended(eps), gammas)?;
        Ok(SpinEmbedding {
            base: base.clone(),
            cone,
            eps,
        })
    }

    pub fn base(&self) -> &CliffordRep {
        &self.base
    }

    pub fn cone(&self) -> &CliffordRep {
        &self.cone
    }

    pub fn eps(&self) -> i8 {
        self.eps
    }

    /// `√ε`: `1` for `ε = 1`, `i` for `ε = −1`.
    pub fn sqrt_eps(&self) -> C64 {
        if self.eps > 0 {
            ONE
        } else {
            I
        }
    }

    pub fn inject<S: Scalar>(&self, psi: &[S]) -> Vec<S> {
        let mut out = psi.to_vec();
        out.resize(self.cone.dim, S::zero());
        out
    }

    pub fn inject_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.cone.dim, self.base.dim, |r, c| {
            if r == c {
                ONE
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Left inverse of [`Self::inject`]: the first `dim Δ` coordinates.
    pub fn restrict<S: Scalar>(&self, psi: &[S]) -> Vec<S> {
        psi[..self.base.dim].to_vec()
    }

    /// `max_i ‖inject·γ_i − γ̄_i·inject‖`.
    pub fn equivariance_residual(&self) -> f64 {
        let j = self.inject_matrix();
        (0..self.base.n())
            .map(|i| {
                let r = &j * self.base.gamma_matrix(i) - self.cone.gamma_matrix(i) * &j;
                r.iter().map(|x| x.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `(1 ∓ √ε γ̄_{n+1})` applied to a cone spinor (blockwise).
    pub fn radial_factor<S: Scalar>(&self, sign: Sign, data: &[S]) -> Vec<S> {
        let last = self.cone.gamma(self.base.n());
        let c = -self.sqrt_eps() * sign.value();
        data.iter()
            .zip(last.apply_blocks(data))
            .map(|(&a, b)| a + b.scale(c))
            .collect()
    }

    /// `φ±(ψ) = (1 ∓ √ε e_{n+1})·ψ`.
    pub fn phi<S: Scalar>(&self, sign: Sign, psi: &[S]) -> Vec<S> {
        self.radial_factor(sign, &self.inject(psi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_signatures(max_n: usize) -> Vec<Signature> {
        (1..=max_n)
            .flat_map(|n| (0..=n).map(move |m| Signature::new(n - m, m)))
            .collect()
    }

    #[test]
    fn anticommutation_for_every_signature() {
        for sig in all_signatures(8) {
            let rep = build_clifford(sig);
            assert_eq!(rep.spinor_dim(), 1 << (sig.n() / 2));
            assert!(rep.anticommutator_residual() < 1e-12, "{sig:?}");
        }
    }

    #[test]
    fn low_dimensional_examples() {
        let r = build_clifford(Signature::new(1, 0));
        assert_eq!(r.gamma_matrix(0)[(0, 0)].norm(), 1.0);
        assert_eq!(r.gamma_matrix(0)[(0, 0)].re, 0.0);

        let r = build_clifford(Signature::new(1, 1));
        let g1 = r.gamma_matrix(0);
        let g2 = r.gamma_matrix(1);
        let id = DMatrix::<C64>::identity(2, 2);
        assert_eq!(&g1 * &g1, -&id);
        assert_eq!(&g2 * &g2, id);
        assert_eq!(&g1 * &g2, -(&g2 * &g1));
    }

    #[test]
    fn defect_breaks_relations() {
        let r = build_clifford(Signature::new(3, 0)).with_sign_defect();
        assert!(r.anticommutator_residual() > 1.0);
    }

    #[test]
    fn clifford_mul_squares() {
        let r = build_clifford(Signature::new(2, 0));
        let psi = Spinor::new(vec![C64::new(0.3, 1.0), C64::new(-2.0, 0.5)]);
        let one = [ONE, C64::new(0.0, 0.0)];
        let twice = r.clifford_mul(&one, &r.clifford_mul(&one, &psi));
        assert_eq!(twice.coeffs, psi.coeffs.iter().map(|&c| -c).collect::<Vec<_>>());
        let both = [ONE, ONE];
        let twice = r.clifford_mul(&both, &r.clifford_mul(&both, &psi));
        for (a, b) in twice.coeffs.iter().zip(&psi.coeffs) {
            assert!((a + b * 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn half_spinors() {
        let (p, m) = build_clifford(Signature::new(2, 0)).half_spinor_projectors().unwrap();
        assert_eq!(crate::linalg::rank(&p, 1e-9), 1);
        assert_eq!(&p + &m, DMatrix::identity(2, 2));

        let rep = build_clifford(Signature::new(4, 0));
        let (p, _) = rep.half_spinor_projectors().unwrap();
        for i in 0..4 {
            let gi = rep.gamma_matrix(i);
            assert!(crate::linalg::max_abs(&(&p * &gi + &gi * &p - &gi)) < 1e-12);
            for j in 0..4 {
                let gij = &gi * rep.gamma_matrix(j);
                assert!(crate::linalg::max_abs(&(&p * &gij - &gij * &p)) < 1e-12);
            }
        }
        assert!(matches!(
            build_clifford(Signature::new(3, 0)).half_spinor_projectors(),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn embedding_dimensions_and_equivariance() {
        for sig in all_signatures(6) {
            for eps in [1, -1] {
                let e = build_embedding(sig, eps).unwrap();
                let n = sig.n();
                let expect = if n % 2 == 0 { 1 << (n / 2) } else { 1 << (n / 2 + 1) };
                assert_eq!(e.cone().spinor_dim(), expect);
                assert!(e.equivariance_residual() < 1e-15);
                assert_eq!(e.cone().metric().counts(), {
                    let c = sig.cone(eps);
                    (c.n_plus, c.n_minus)
                });
                let last = e.cone().gamma(n);
                let sq = last.compose(last).as_scalar(1e-12).unwrap();
                assert!((sq + eps as f64).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phi_composition_is_two() {
        for sig in all_signatures(5) {
            for eps in [1i8, -1] {
                let e = build_embedding(sig, eps).unwrap();
                let d = e.base().spinor_dim();
                let psi: Vec<C64> = (0..d).map(|k| C64::new(k as f64 + 0.5, 1.0 - k as f64)).collect();
                for s in Sign::both() {
                    let once = e.phi(s, &psi);
                    let twice = e.radial_factor(s.flip(), &once);
                    let want = e.inject(&psi);
                    for (a, b) in twice.iter().zip(&want) {
                        assert!((a - b * 2.0).norm() < 1e-12);
                    }
                }
            }
        }
    }

    fn rotation(n: usize, i: usize, j: usize, theta: f64) -> Mat<C64> {
        let mut r = Mat::identity(n);
        let (s, c) = theta.sin_cos();
        r[(i, i)] = C64::new(c, 0.0);
        r[(j, j)] = C64::new(c, 0.0);
        r[(j, i)] = C64::new(s, 0.0);
        r[(i, j)] = C64::new(-s, 0.0);
        r
    }

    #[test]
    fn spin_lift_of_identity_and_plane_rotation() {
        let rep = build_clifford(Signature::new(3, 0));
        let s = rep.spin_lift(&Mat::<C64>::identity(3)).unwrap();
        assert!(s.sub(&Mat::identity(2)).max_abs() < 1e-14);

        let theta = 0.7;
        let s = rep.spin_lift(&rotation(3, 0, 1, theta)).unwrap().values();
        let s_inv = s.clone().try_inverse().unwrap();
        let lhs = &s * rep.gamma_matrix(0) * &s_inv;
        let rhs = rep.gamma_matrix(0) * C64::new(theta.cos(), 0.0) + rep.gamma_matrix(1) * C64::new(theta.sin(), 0.0);
        assert!(crate::linalg::max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn spin_lift_rejects_reflections_and_half_turns() {
        let rep = build_clifford(Signature::new(2, 0));
        let mut r = Mat::<C64>::identity(2);
        r[(1, 1)] = C64::new(-1.0, 0.0);
        assert!(matches!(rep.spin_lift(&r), Err(Error::Validation(_))));
        let half = rotation(2, 0, 1, std::f64::consts::PI);
        assert!(matches!(rep.spin_lift(&half), Err(Error::BranchAmbiguity(_))));
    }
}
