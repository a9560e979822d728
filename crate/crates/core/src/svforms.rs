//! Spinor-valued forms `Σᵖ = Λᵖ ⊗ Δ` and their invariant algebra.
//!
//! Coefficients are stored subset-major: entry `rank(I)·dim Δ + s` is the
//! `s`-th spinor component of the `e^I` coefficient. The Clifford 1-form
//! `c = Σ e^i ⊗ γ_i` gives
//!
//! * `c∧Φ = Σ_k e^k ∧ γ_k Φ`
//! * `c⌟Φ = Σ_k g_kk e_k ⌟ γ_k Φ`
//!
//! and with these the commutator `[c∧, c⌟]` acts on `Σᵖ` as `(n − 2p)`.
//! Hence [`sl2_ops`] returns `H = [c∧, c⌟] = [Y, X]` for `X = c∧`,
//! `Y = −c⌟`, so that `(Y, X, H)` is a standard `sl(2)` triple:
//! `[H, Y] = 2Y`, `[H, X] = −2X`.
//!
//! Projectors and decompositions are computed numerically (kernels via SVD)
//! and cached per metric and degree. Orthogonality claims refer to the
//! standard Hermitian product on coefficient vectors, which is a
//! computational device and not a Spin-invariant pairing in indefinite
//! signature.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::clifford::{CliffordRep, Metric};
use crate::exterior::{basis, binomial, interior_basis, interior_vector, wedge_basis, wedge_covector, Form, FormBasis};
use crate::jet::{Scalar, C64};
use crate::linalg::{self, RANK_TOL};

/// An element of `Σᵖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorForm<S = C64> {
    n: usize,
    degree: usize,
    spin: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> SpinorForm<S> {
    pub fn zero(rep: &CliffordRep, degree: usize) -> Self {
        Self::zero_with(rep.n(), degree, rep.spinor_dim())
    }

    pub fn zero_with(n: usize, degree: usize, spin: usize) -> Self {
        assert!(degree <= n, "degree {degree} exceeds dimension {n}");
        SpinorForm {
            n,
            degree,
            spin,
            coeffs: vec![S::zero(); binomial(n, degree) * spin],
        }
    }

    pub fn from_coeffs(rep: &CliffordRep, degree: usize, coeffs: Vec<S>) -> Self {
        Self::from_parts(rep.n(), degree, rep.spinor_dim(), coeffs)
    }

    pub fn from_parts(n: usize, degree: usize, spin: usize, coeffs: Vec<S>) -> Self {
        assert!(degree <= n, "degree {degree} exceeds dimension {n}");
        assert_eq!(coeffs.len(), binomial(n, degree) * spin, "coefficient count");
        SpinorForm {
            n,
            degree,
            spin,
            coeffs,
        }
    }

    /// `α ⊗ ψ`.
    pub fn tensor(alpha: &Form<S>, psi: &[S]) -> Self {
        let spin = psi.len();
        let mut coeffs = Vec::with_capacity(alpha.coeffs().len() * spin);
        for &a in alpha.coeffs() {
            coeffs.extend(psi.iter().map(|&s| a * s));
        }
        Self::from_parts(alpha.dim(), alpha.degree(), spin, coeffs)
    }

    /// A spinor viewed as a 0-form.
    pub fn from_spinor(n: usize, psi: &[S]) -> Self {
        Self::from_parts(n, 0, psi.len(), psi.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn spinor_dim(&self) -> usize {
        self.spin
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [S] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The spinor coefficient of `e^I`.
    pub fn spinor_at(&self, mask: u32) -> &[S] {
        let r = basis(self.n).rank_of(mask);
        &self.coeffs[r * self.spin..(r + 1) * self.spin]
    }

    fn same_shape(&self, coeffs: Vec<S>) -> Self {
        SpinorForm {
            n: self.n,
            degree: self.degree,
            spin: self.spin,
            coeffs,
        }
    }

    fn check_shape(&self, other: &Self) {
        assert_eq!(
            (self.n, self.degree, self.spin),
            (other.n, other.degree, other.spin),
            "spinor-form shape mismatch"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_shape(other);
        self.same_shape(self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_shape(other);
        self.same_shape(self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a - b).collect())
    }

    pub fn scale(&self, c: S) -> Self {
        self.same_shape(self.coeffs.iter().map(|&a| c * a).collect())
    }

    pub fn scale_c(&self, c: C64) -> Self {
        self.same_shape(self.coeffs.iter().map(|&a| a.scale(c)).collect())
    }

    /// Euclidean norm of the value part of the coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.value().norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn values(&self) -> SpinorForm<C64> {
        SpinorForm {
            n: self.n,
            degree: self.degree,
            spin: self.spin,
            coeffs: self.coeffs.iter().map(Scalar::value).collect(),
        }
    }

    /// Applies a linear map to every spinor coefficient; the fiber may change size.
    pub fn map_spinors(&self, spin: usize, f: impl Fn(&[S]) -> Vec<S>) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() / self.spin.max(1) * spin);
        for block in self.coeffs.chunks_exact(self.spin) {
            let out = f(block);
            assert_eq!(out.len(), spin, "mapped spinor length");
            coeffs.extend(out);
        }
        SpinorForm {
            n: self.n,
            degree: self.degree,
            spin,
            coeffs,
        }
    }

    /// `γ_k` on the spinor part.
    pub fn gamma(&self, rep: &CliffordRep, k: usize) -> Self {
        self.same_shape(rep.gamma(k).apply_blocks(&self.coeffs))
    }

    /// `X·Φ`: Clifford multiplication on spinor values only.
    pub fn clifford_act(&self, rep: &CliffordRep, x: &[S]) -> Self {
        self.same_shape(rep.vector_action(x, &self.coeffs))
    }

    /// `e^k ∧ Φ`; the zero top-degree form when `p = n`.
    pub fn wedge_e(&self, k: usize) -> Self {
        if self.degree == self.n {
            return Self::zero_with(self.n, self.n, self.spin);
        }
        SpinorForm {
            n: self.n,
            degree: self.degree + 1,
            spin: self.spin,
            coeffs: wedge_basis(self.n, self.degree, self.spin, &self.coeffs, k),
        }
    }

    /// `e_k ⌟ Φ`; the zero 0-form when `p = 0`.
    pub fn interior_e(&self, k: usize) -> Self {
        if self.degree == 0 {
            return Self::zero_with(self.n, 0, self.spin);
        }
        SpinorForm {
            n: self.n,
            degree: self.degree - 1,
            spin: self.spin,
            coeffs: interior_basis(self.n, self.degree, self.spin, &self.coeffs, k),
        }
    }

    /// `ξ ∧ Φ` for a covector in frame components.
    pub fn wedge_covector(&self, xi: &[S]) -> Self {
        if self.degree == self.n {
            return Self::zero_with(self.n, self.n, self.spin);
        }
        SpinorForm {
            n: self.n,
            degree: self.degree + 1,
            spin: self.spin,
            coeffs: wedge_covector(self.n, self.degree, self.spin, &self.coeffs, xi),
        }
    }

    /// `X ⌟ Φ` for a vector in frame components.
    pub fn interior(&self, x: &[S]) -> Self {
        if self.degree == 0 {
            return Self::zero_with(self.n, 0, self.spin);
        }
        SpinorForm {
            n: self.n,
            degree: self.degree - 1,
            spin: self.spin,
            coeffs: interior_vector(self.n, self.degree, self.spin, &self.coeffs, x),
        }
    }

    /// `X♭ ∧ Φ`.
    pub fn flat_wedge(&self, metric: &Metric, x: &[S]) -> Self {
        let xi: Vec<S> = x.iter().enumerate().map(|(i, &v)| v.scale_re(metric.sign(i))).collect();
        self.wedge_covector(&xi)
    }

    /// `α ∧ Φ` with the form on the left.
    pub fn wedge_form(&self, alpha: &Form<S>) -> Self {
        assert_eq!(alpha.dim(), self.n, "ambient dimension mismatch");
        let q = alpha.degree() + self.degree;
        if q > self.n {
            return Self::zero_with(self.n, self.n, self.spin);
        }
        let b = basis(self.n);
        let mut out = Self::zero_with(self.n, q, self.spin);
        for (ra, &ma) in b.subsets(alpha.degree()).iter().enumerate() {
            let ca = alpha.coeffs()[ra];
            if ca.is_exact_zero() {
                continue;
            }
            for (rb, &mb) in b.subsets(self.degree).iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                let inversions: u32 = FormBasis::indices(mb)
                    .iter()
                    .map(|&j| (ma >> (j + 1)).count_ones())
                    .sum();
                let c = if inversions.is_multiple_of(2) { ca } else { -ca };
                let t = b.rank_of(ma | mb);
                for s in 0..self.spin {
                    out.coeffs[t * self.spin + s] += c * self.coeffs[rb * self.spin + s];
                }
            }
        }
        out
    }

    /// `c∧Φ = Σ e^k ∧ γ_kΦ`.
    pub fn cwedge(&self, rep: &CliffordRep) -> Self {
        if self.degree == self.n {
            return Self::zero_with(self.n, self.n, self.spin);
        }
        let mut out = Self::zero_with(self.n, self.degree + 1, self.spin);
        for k in 0..self.n {
            let g = rep.gamma(k).apply_blocks(&self.coeffs);
            let w = wedge_basis(self.n, self.degree, self.spin, &g, k);
            for (o, v) in out.coeffs.iter_mut().zip(w) {
                *o += v;
            }
        }
        out
    }

    /// `c⌟Φ = Σ g_kk e_k ⌟ γ_kΦ`.
    pub fn cvee(&self, rep: &CliffordRep) -> Self {
        if self.degree == 0 {
            return Self::zero_with(self.n, 0, self.spin);
        }
        let mut out = Self::zero_with(self.n, self.degree - 1, self.spin);
        for k in 0..self.n {
            let g = rep.gamma(k).apply_blocks(&self.coeffs);
            let w = interior_basis(self.n, self.degree, self.spin, &g, k);
            let sign = rep.metric().sign(k);
            for (o, v) in out.coeffs.iter_mut().zip(w) {
                *o += v.scale_re(sign);
            }
        }
        out
    }

    /// `[c∧, c⌟]Φ`, which equals `(n − 2p)Φ`.
    pub fn weight(&self, rep: &CliffordRep) -> Self {
        let mut out = Self::zero_with(self.n, self.degree, self.spin);
        if self.degree > 0 {
            out = out.add(&self.cvee(rep).cwedge(rep));
        }
        if self.degree < self.n {
            out = out.sub(&self.cwedge(rep).cvee(rep));
        }
        out
    }
}

/// `(XΦ, YΦ, HΦ)` for `X = c∧`, `Y = −c⌟`, `H = [Y, X]`.
pub fn sl2_ops<S: Scalar>(rep: &CliffordRep, phi: &SpinorForm<S>) -> (SpinorForm<S>, SpinorForm<S>, SpinorForm<S>) {
    let x = phi.cwedge(rep);
    let y = phi.cvee(rep).scale_real(-1.0);
    (x, y, phi.weight(rep))
}

impl<S: Scalar> SpinorForm<S> {
    pub fn scale_real(&self, c: f64) -> Self {
        self.same_shape(self.coeffs.iter().map(|&a| a.scale_re(c)).collect())
    }
}

/// An element of `V* ⊗ Σᵖ`: one slice `W_i = W(X_i)` per frame direction.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariantJet<S = C64> {
    pub slices: Vec<SpinorForm<S>>,
}

impl<S: Scalar> CovariantJet<S> {
    pub fn new(slices: Vec<SpinorForm<S>>) -> Self {
        assert!(!slices.is_empty(), "a covariant jet needs at least one slice");
        let n = slices[0].n();
        assert_eq!(slices.len(), n, "slice count must equal the dimension");
        CovariantJet { slices }
    }

    /// `ξ ⊗ Φ`, i.e. `W_i = ξ_i Φ`.
    pub fn decomposable(xi: &[S], phi: &SpinorForm<S>) -> Self {
        CovariantJet::new(xi.iter().map(|&c| phi.scale(c)).collect())
    }

    pub fn n(&self) -> usize {
        self.slices.len()
    }

    pub fn degree(&self) -> usize {
        self.slices[0].degree()
    }

    pub fn flatten(&self) -> Vec<S> {
        self.slices.iter().flat_map(|s| s.coeffs().iter().copied()).collect()
    }

    pub fn unflatten(template: &SpinorForm<S>, data: &[S]) -> Self {
        let len = template.len();
        assert_eq!(data.len(), len * template.n(), "jet length");
        CovariantJet::new(
            data.chunks_exact(len)
                .map(|c| template.same_shape(c.to_vec()))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        CovariantJet::new(self.slices.iter().zip(&other.slices).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        CovariantJet::new(self.slices.iter().zip(&other.slices).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn norm(&self) -> f64 {
        self.slices.iter().map(|s| s.norm().powi(2)).sum::<f64>().sqrt()
    }
}

/// `(prj₁W, prj₂W, prj₃W) = (Σ g_ii e_i⌟W_i, Σ e^i∧W_i, Σ g_ii γ_iW_i)`.
pub fn jet_projections<S: Scalar>(
    rep: &CliffordRep,
    w: &CovariantJet<S>,
) -> (SpinorForm<S>, SpinorForm<S>, SpinorForm<S>) {
    let n = w.n();
    let p = w.degree();
    let spin = rep.spinor_dim();
    let mut prj1 = SpinorForm::zero_with(n, p.saturating_sub(1), spin);
    let mut prj2 = SpinorForm::zero_with(n, (p + 1).min(n), spin);
    let mut prj3 = SpinorForm::zero_with(n, p, spin);
    for (i, wi) in w.slices.iter().enumerate() {
        let g = rep.metric().sign(i);
        if p > 0 {
            prj1 = prj1.add(&wi.interior_e(i).scale_real(g));
        }
        if p < n {
            prj2 = prj2.add(&wi.wedge_e(i));
        }
        prj3 = prj3.add(&wi.gamma(rep, i).scale_real(g));
    }
    (prj1, prj2, prj3)
}

/// `Σ e^i ∧ W_i`.
pub fn exterior_part<S: Scalar>(w: &CovariantJet<S>) -> SpinorForm<S> {
    let n = w.n();
    let p = w.degree();
    let spin = w.slices[0].spinor_dim();
    let mut out = SpinorForm::zero_with(n, (p + 1).min(n), spin);
    if p < n {
        for (i, wi) in w.slices.iter().enumerate() {
            out = out.add(&wi.wedge_e(i));
        }
    }
    out
}

/// `Σ g_ii e_i ⌟ W_i`.
pub fn interior_part<S: Scalar>(metric: &Metric, w: &CovariantJet<S>) -> SpinorForm<S> {
    let n = w.n();
    let p = w.degree();
    let spin = w.slices[0].spinor_dim();
    let mut out = SpinorForm::zero_with(n, p.saturating_sub(1), spin);
    if p > 0 {
        for (i, wi) in w.slices.iter().enumerate() {
            out = out.add(&wi.interior_e(i).scale_real(metric.sign(i)));
        }
    }
    out
}

/// Sum of terms of a fixed target degree; terms clamped to another degree
/// vanish identically and are skipped.
fn sum_at_degree(n: usize, degree: usize, spin: usize, terms: &[SpinorForm<C64>]) -> SpinorForm<C64> {
    let mut out = SpinorForm::zero_with(n, degree, spin);
    for t in terms {
        if t.degree() == degree {
            out = out.add(t);
        }
    }
    out
}

/// Residual norms of the four relations
///
/// * `X·(c∧Φ) + c∧(X·Φ) = −2X♭∧Φ`
/// * `X·(c⌟Φ) + c⌟(X·Φ) = −2X⌟Φ`
/// * `X⌟(c∧Φ) + c∧(X⌟Φ) = X·Φ`
/// * `X♭∧(c⌟Φ) + c⌟(X♭∧Φ) = X·Φ`
pub fn clf_residuals(rep: &CliffordRep, x: &[C64], phi: &SpinorForm<C64>) -> [f64; 4] {
    let n = phi.n();
    let p = phi.degree();
    let spin = phi.spinor_dim();
    let m = rep.metric();
    let xphi = phi.clifford_act(rep, x);
    let up = (p + 1).min(n);
    let down = p.saturating_sub(1);
    let at = |d: usize, terms: &[SpinorForm<C64>]| sum_at_degree(n, d, spin, terms);

    let r1 = if p < n {
        at(up, &[phi.cwedge(rep).clifford_act(rep, x), xphi.cwedge(rep)])
            .add(&phi.flat_wedge(m, x).scale_real(2.0))
            .norm()
    } else {
        0.0
    };
    let r2 = if p > 0 {
        at(down, &[phi.cvee(rep).clifford_act(rep, x), xphi.cvee(rep)])
            .add(&phi.interior(x).scale_real(2.0))
            .norm()
    } else {
        0.0
    };
    let mut t3 = Vec::new();
    if p < n {
        t3.push(phi.cwedge(rep).interior(x));
    }
    if p > 0 {
        t3.push(phi.interior(x).cwedge(rep));
    }
    let r3 = at(p, &t3).sub(&xphi).norm();
    let mut t4 = Vec::new();
    if p > 0 {
        t4.push(phi.cvee(rep).flat_wedge(m, x));
    }
    if p < n {
        t4.push(phi.flat_wedge(m, x).cvee(rep));
    }
    let r4 = at(p, &t4).sub(&xphi).norm();
    [r1, r2, r3, r4]
}

/// An orthogonal projector on flattened coefficient vectors.
#[derive(Clone, Debug)]
pub struct Projector {
    matrix: DMatrix<C64>,
    rank: usize,
}

impl Projector {
    /// Orthogonal projector onto `ker a`.
    pub fn onto_kernel(a: &DMatrix<C64>) -> Self {
        let v = linalg::row_space(a, RANK_TOL);
        let matrix = DMatrix::identity(a.ncols(), a.ncols()) - &v * v.adjoint();
        Projector {
            matrix,
            rank: a.ncols() - v.ncols(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.dim(), "projector input length");
        (0..self.dim())
            .map(|r| {
                let mut acc = S::zero();
                for (c, &x) in v.iter().enumerate() {
                    let m = self.matrix[(r, c)];
                    if m.norm() > 0.0 {
                        acc += x.scale(m);
                    }
                }
                acc
            })
            .collect()
    }

    /// `‖P² − P‖_max`.
    pub fn idempotence_residual(&self) -> f64 {
        linalg::max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }

    /// `‖P† − P‖_max`.
    pub fn adjoint_residual(&self) -> f64 {
        linalg::max_abs(&(self.matrix.adjoint() - &self.matrix))
    }
}

/// Matrix of a linear map given by its action on coefficient vectors.
pub fn matrix_of(in_dim: usize, out_dim: usize, f: impl Fn(&[C64]) -> Vec<C64>) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(out_dim, in_dim);
    let mut e = vec![C64::new(0.0, 0.0); in_dim];
    for c in 0..in_dim {
        e[c] = C64::new(1.0, 0.0);
        let col = f(&e);
        assert_eq!(col.len(), out_dim, "image length");
        for (r, v) in col.into_iter().enumerate() {
            m[(r, c)] = v;
        }
        e[c] = C64::new(0.0, 0.0);
    }
    m
}

pub fn dim_sigma(n: usize, p: isize, spin: usize) -> usize {
    if p < 0 || p as usize > n {
        0
    } else {
        binomial(n, p as usize) * spin
    }
}

/// `n·dim Σᵖ − dim Σ^{p−1} − dim Σ^{p+1} − dim Σᵖ + dim Δ`, the rank of the
/// twistor module for `1 ≤ p ≤ n−1`.
pub fn twistor_rank_formula(n: usize, p: usize, spin: usize) -> isize {
    let p = p as isize;
    (n * dim_sigma(n, p, spin)) as isize
        - dim_sigma(n, p - 1, spin) as isize
        - dim_sigma(n, p + 1, spin) as isize
        - dim_sigma(n, p, spin) as isize
        + spin as isize
}

fn cwedge_matrix(rep: &CliffordRep, p: usize) -> DMatrix<C64> {
    let d = rep.spinor_dim();
    let n = rep.n();
    matrix_of(dim_sigma(n, p as isize, d), dim_sigma(n, p as isize + 1, d), |v| {
        SpinorForm::from_coeffs(rep, p, v.to_vec()).cwedge(rep).into_coeffs()
    })
}

fn cvee_matrix(rep: &CliffordRep, p: usize) -> DMatrix<C64> {
    let d = rep.spinor_dim();
    let n = rep.n();
    matrix_of(dim_sigma(n, p as isize, d), dim_sigma(n, p as isize - 1, d), |v| {
        SpinorForm::from_coeffs(rep, p, v.to_vec()).cvee(rep).into_coeffs()
    })
}

/// Stacked matrix of `(prj₁, prj₂, prj₃)` on `V* ⊗ Σᵖ`, or only `prj₃` for
/// `p ∈ {0, n}`.
pub fn jet_projection_matrix(rep: &CliffordRep, p: usize) -> DMatrix<C64> {
    let n = rep.n();
    let d = rep.spinor_dim();
    let slice = dim_sigma(n, p as isize, d);
    let template = SpinorForm::<C64>::zero(rep, p);
    let edge = p == 0 || p == n;
    let out_dim = if edge {
        slice
    } else {
        dim_sigma(n, p as isize - 1, d) + dim_sigma(n, p as isize + 1, d) + slice
    };
    matrix_of(n * slice, out_dim, |v| {
        let w = CovariantJet::unflatten(&template, v);
        let (a, b, c) = jet_projections(rep, &w);
        if edge {
            c.into_coeffs()
        } else {
            let mut out = a.into_coeffs();
            out.extend(b.into_coeffs());
            out.extend(c.into_coeffs());
            out
        }
    })
}

type Key = (Metric, usize);

struct Cache<V> {
    map: Mutex<HashMap<Key, Arc<OnceLock<Arc<V>>>>>,
}

impl<V> Default for Cache<V> {
    fn default() -> Self {
        Cache {
            map: Mutex::new(HashMap::new()),
        }
    }
}

impl<V> Cache<V> {
    /// Builds each entry once; concurrent callers for the same key wait on it.
    fn get(&self, key: Key, build: impl FnOnce() -> V) -> Arc<V> {
        let cell = {
            let mut map = self.map.lock().unwrap_or_else(|e| e.into_inner());
            map.entry(key).or_default().clone()
        };
        cell.get_or_init(|| Arc::new(build())).clone()
    }
}

static PRIMITIVE: LazyLock<Cache<Projector>> = LazyLock::new(Cache::default);
static TWISTOR: LazyLock<Cache<Projector>> = LazyLock::new(Cache::default);
static SFDEC: LazyLock<Cache<Decomposer>> = LazyLock::new(Cache::default);

/// Orthogonal projector onto `PΣᵖ = ker(c⌟)`.
pub fn primitive_projector(rep: &CliffordRep, p: usize) -> Arc<Projector> {
    PRIMITIVE.get((rep.metric().clone(), p), || {
        if p == 0 {
            let d = rep.spinor_dim();
            Projector {
                matrix: DMatrix::identity(d, d),
                rank: d,
            }
        } else {
            Projector::onto_kernel(&cvee_matrix(rep, p))
        }
    })
}

/// Orthogonal projector onto the twistor module inside `V* ⊗ Σᵖ`.
pub fn twistor_projector(rep: &CliffordRep, p: usize) -> Arc<Projector> {
    TWISTOR.get((rep.metric().clone(), p), || {
        Projector::onto_kernel(&jet_projection_matrix(rep, p))
    })
}

/// `TΦ`-style projection of a covariant jet onto the twistor module.
pub fn twistor_part<S: Scalar>(rep: &CliffordRep, w: &CovariantJet<S>) -> CovariantJet<S> {
    let proj = twistor_projector(rep, w.degree());
    CovariantJet::unflatten(&w.slices[0], &proj.apply(&w.flatten()))
}

/// Bases of `(c∧)^{p−q} PΣ^q` for `q = 0..=min(p, n−p)` and the inverse of
/// their concatenation.
#[derive(Debug)]
pub struct Decomposer {
    blocks: Vec<DMatrix<C64>>,
    solve: DMatrix<C64>,
}

impl Decomposer {
    fn build(rep: &CliffordRep, p: usize) -> Self {
        let n = rep.n();
        let l = p.min(n - p);
        let mut blocks = Vec::with_capacity(l + 1);
        for q in 0..=l {
            let mut b = if q == 0 {
                DMatrix::identity(rep.spinor_dim(), rep.spinor_dim())
            } else {
                linalg::kernel(&cvee_matrix(rep, q), RANK_TOL)
            };
            for k in q..p {
                b = cwedge_matrix(rep, k) * b;
            }
            blocks.push(b);
        }
        let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
        let rows = dim_sigma(n, p as isize, rep.spinor_dim());
        let mut all = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in &blocks {
            all.view_mut((0, at), (rows, b.ncols())).copy_from(b);
            at += b.ncols();
        }
        let solve = linalg::svd(&all)
            .pseudo_inverse(1e-10)
            .expect("pseudo-inverse with a non-negative threshold");
        Decomposer { blocks, solve }
    }

    /// `dim (c∧)^{p−q} PΣ^q` per `q`.
    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.ncols()).collect()
    }
}

pub fn decomposer(rep: &CliffordRep, p: usize) -> Arc<Decomposer> {
    SFDEC.get((rep.metric().clone(), p), || Decomposer::build(rep, p))
}

/// Components of `Φ` in `(c∧)^{p−q} PΣ^q`, `q = 0..=min(p, n−p)`.
pub fn sfdec_decompose(rep: &CliffordRep, phi: &SpinorForm<C64>) -> Vec<SpinorForm<C64>> {
    let dec = decomposer(rep, phi.degree());
    let v = nalgebra::DVector::from_column_slice(phi.coeffs());
    let c = &dec.solve * v;
    let mut at = 0;
    dec.blocks
        .iter()
        .map(|b| {
            let k = b.ncols();
            let part = b * c.rows(at, k);
            at += k;
            SpinorForm::from_coeffs(rep, phi.degree(), part.iter().copied().collect())
        })
        .collect()
}

/// `dim PΣ^q` by numerical rank.
pub fn primitive_dim(rep: &CliffordRep, q: usize) -> usize {
    primitive_projector(rep, q).rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_clifford, Signature};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rnd(rng: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
        (0..k)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn rnd_form(rng: &mut ChaCha8Rng, rep: &CliffordRep, p: usize) -> SpinorForm {
        let k = dim_sigma(rep.n(), p as isize, rep.spinor_dim());
        SpinorForm::from_coeffs(rep, p, rnd(rng, k))
    }

    #[test]
    fn weight_is_n_minus_2p() {
        for sig in [Signature::new(4, 0), Signature::new(2, 1), Signature::new(3, 2)] {
            let rep = build_clifford(sig);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for p in 0..=rep.n() {
                let phi = rnd_form(&mut rng, &rep, p);
                let h = phi.weight(&rep);
                let want = phi.scale_c(C64::new(rep.n() as f64 - 2.0 * p as f64, 0.0));
                assert!(h.sub(&want).norm() < 1e-12, "{sig:?} p={p}");
            }
        }
    }

    #[test]
    fn sl2_brackets() {
        let rep = build_clifford(Signature::new(3, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = rnd_form(&mut rng, &rep, 2);
        let (x, y, h) = sl2_ops(&rep, &phi);
        // [H, X]Φ = −2XΦ and [H, Y]Φ = 2YΦ
        let hx = x.weight(&rep).sub(&x.scale_c(C64::new(rep.n() as f64 - 4.0, 0.0)));
        assert!(hx.add(&x.scale_c(C64::new(2.0, 0.0))).norm() < 1e-12);
        let hy = y.weight(&rep).sub(&y.scale_c(C64::new(rep.n() as f64 - 4.0, 0.0)));
        assert!(hy.sub(&y.scale_c(C64::new(2.0, 0.0))).norm() < 1e-12);
        assert_eq!(h.degree(), 2);
    }

    #[test]
    fn primitive_projector_examples() {
        let rep = build_clifford(Signature::new(3, 0));
        let p0 = primitive_projector(&rep, 0);
        assert_eq!(p0.rank(), 2);
        let p1 = primitive_projector(&rep, 1);
        assert!(p1.idempotence_residual() < 1e-10);
        assert!(p1.adjoint_residual() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = rnd_form(&mut rng, &rep, 1);
        let proj = SpinorForm::from_coeffs(&rep, 1, p1.apply(phi.coeffs()));
        assert!(proj.cvee(&rep).norm() < 1e-10);
    }

    #[test]
    fn decomposition_reconstructs() {
        let rep = build_clifford(Signature::new(4, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in 0..=4 {
            let phi = rnd_form(&mut rng, &rep, p);
            let parts = sfdec_decompose(&rep, &phi);
            assert_eq!(parts.len(), p.min(4 - p) + 1);
            let mut sum = SpinorForm::zero(&rep, p);
            for part in &parts {
                sum = sum.add(part);
            }
            assert!(sum.sub(&phi).norm() < 1e-10);
        }
        // c∧ψ for ψ ∈ Δ sits entirely at q = 0
        let psi = SpinorForm::from_coeffs(&rep, 0, rnd(&mut rng, 4));
        let parts = sfdec_decompose(&rep, &psi.cwedge(&rep));
        assert!(parts[1].norm() < 1e-10);
    }

    #[test]
    fn twistor_ranks() {
        let rep = build_clifford(Signature::new(3, 0));
        assert_eq!(twistor_projector(&rep, 1).rank(), 6);
        assert_eq!(twistor_rank_formula(3, 1, 2), 6);
        assert_eq!(twistor_projector(&rep, 0).rank(), 4);
    }

    #[test]
    fn decomposable_jet_projections() {
        let rep = build_clifford(Signature::new(2, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = rnd_form(&mut rng, &rep, 1);
        let x = rnd(&mut rng, 3);
        let xi: Vec<C64> = x.iter().enumerate().map(|(i, &v)| v * rep.metric().sign(i)).collect();
        let (a, b, c) = jet_projections(&rep, &CovariantJet::decomposable(&xi, &phi));
        assert!(a.sub(&phi.interior(&x)).norm() < 1e-12);
        assert!(b.sub(&phi.wedge_covector(&xi)).norm() < 1e-12);
        assert!(c.sub(&phi.clifford_act(&rep, &x)).norm() < 1e-12);
    }
}
