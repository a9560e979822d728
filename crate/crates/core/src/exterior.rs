//! Alternating forms on a pseudo-Euclidean model space.
//!
//! Coefficients of a degree-`p` form are stored against the basis `e^I`,
//! `I` running over the strictly increasing `p`-subsets of `{0..n}` in
//! lexicographic order. Subsets are bitmasks; a per-dimension table maps
//! masks to positions. The kernels below also act on "form-valued" data with
//! a fiber stride, which is how spinor-valued forms reuse them.

use std::sync::OnceLock;

use crate::clifford::Metric;
use crate::jet::{Scalar, C64};

/// Largest ambient dimension with a precomputed subset table.
pub const MAX_DIM: usize = 12;

/// Lexicographic subset tables for one ambient dimension.
#[derive(Debug)]
pub struct FormBasis {
    n: usize,
    by_degree: Vec<Vec<u32>>,
    rank: Vec<u32>,
}

impl FormBasis {
    fn build(n: usize) -> Self {
        let mut by_degree = vec![Vec::new(); n + 1];
        for (p, masks) in by_degree.iter_mut().enumerate() {
            let mut idx: Vec<usize> = (0..p).collect();
            loop {
                masks.push(idx.iter().fold(0u32, |m, &i| m | (1 << i)));
                // next combination in lexicographic order
                let mut t = p;
                let mut advanced = false;
                while t > 0 {
                    t -= 1;
                    if idx[t] < n - p + t {
                        idx[t] += 1;
                        for u in t + 1..p {
                            idx[u] = idx[u - 1] + 1;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
        let mut rank = vec![0u32; 1 << n];
        for list in &by_degree {
            for (r, &m) in list.iter().enumerate() {
                rank[m as usize] = r as u32;
            }
        }
        FormBasis { n, by_degree, rank }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of basis `p`-forms, zero outside `0..=n`.
    pub fn count(&self, p: usize) -> usize {
        self.by_degree.get(p).map_or(0, Vec::len)
    }

    pub fn subsets(&self, p: usize) -> &[u32] {
        &self.by_degree[p]
    }

    #[inline]
    pub fn rank_of(&self, mask: u32) -> usize {
        self.rank[mask as usize] as usize
    }

    /// Indices of a subset in increasing order.
    pub fn indices(mask: u32) -> Vec<usize> {
        (0..32).filter(|i| mask & (1 << i) != 0).collect()
    }
}

/// Shared subset table for dimension `n`.
pub fn basis(n: usize) -> &'static FormBasis {
    static TABLES: OnceLock<Vec<FormBasis>> = OnceLock::new();
    assert!(n <= MAX_DIM, "form basis tables stop at dimension {MAX_DIM}");
    &TABLES.get_or_init(|| (0..=MAX_DIM).map(FormBasis::build).collect())[n]
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `(-1)^(number of elements of mask below k)`.
#[inline]
pub(crate) fn sign_below(mask: u32, k: usize) -> f64 {
    if (mask & ((1u32 << k) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `e^k ∧` on form-valued data of degree `p` with the given fiber stride.
pub fn wedge_basis<S: Scalar>(n: usize, p: usize, fiber: usize, src: &[S], k: usize) -> Vec<S> {
    let b = basis(n);
    let mut out = vec![S::zero(); b.count(p + 1) * fiber];
    if p >= n {
        return out;
    }
    for (r, &m) in b.subsets(p).iter().enumerate() {
        if m & (1 << k) != 0 {
            continue;
        }
        let target = b.rank_of(m | (1 << k));
        let sign = sign_below(m, k);
        for s in 0..fiber {
            let v = src[r * fiber + s];
            if sign > 0.0 {
                out[target * fiber + s] += v;
            } else {
                out[target * fiber + s] -= v;
            }
        }
    }
    out
}

/// `e_k ⌟` on form-valued data of degree `p` with the given fiber stride.
pub fn interior_basis<S: Scalar>(n: usize, p: usize, fiber: usize, src: &[S], k: usize) -> Vec<S> {
    let b = basis(n);
    if p == 0 {
        return Vec::new();
    }
    let mut out = vec![S::zero(); b.count(p - 1) * fiber];
    for (r, &m) in b.subsets(p).iter().enumerate() {
        if m & (1 << k) == 0 {
            continue;
        }
        let target = b.rank_of(m & !(1 << k));
        let sign = sign_below(m, k);
        for s in 0..fiber {
            let v = src[r * fiber + s];
            if sign > 0.0 {
                out[target * fiber + s] += v;
            } else {
                out[target * fiber + s] -= v;
            }
        }
    }
    out
}

/// `ξ ∧` for a covector `ξ = Σ ξ_k e^k`.
pub fn wedge_covector<S: Scalar>(n: usize, p: usize, fiber: usize, src: &[S], xi: &[S]) -> Vec<S> {
    let b = basis(n);
    let mut out = vec![S::zero(); b.count(p + 1) * fiber];
    for (k, &c) in xi.iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        for (o, v) in out.iter_mut().zip(wedge_basis(n, p, fiber, src, k)) {
            *o += c * v;
        }
    }
    out
}

/// `X ⌟` for a vector `X = Σ X^k e_k`.
pub fn interior_vector<S: Scalar>(n: usize, p: usize, fiber: usize, src: &[S], x: &[S]) -> Vec<S> {
    let b = basis(n);
    let mut out = vec![S::zero(); if p == 0 { 0 } else { b.count(p - 1) * fiber }];
    for (k, &c) in x.iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        for (o, v) in out.iter_mut().zip(interior_basis(n, p, fiber, src, k)) {
            *o += c * v;
        }
    }
    out
}

/// An alternating form of fixed degree with scalar coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<S = C64> {
    n: usize,
    degree: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> Form<S> {
    pub fn zero(n: usize, degree: usize) -> Self {
        assert!(degree <= n, "form degree {degree} exceeds dimension {n}");
        Form {
            n,
            degree,
            coeffs: vec![S::zero(); binomial(n, degree)],
        }
    }

    pub fn from_coeffs(n: usize, degree: usize, coeffs: Vec<S>) -> Self {
        assert!(degree <= n);
        assert_eq!(coeffs.len(), binomial(n, degree), "coefficient count");
        Form { n, degree, coeffs }
    }

    /// The basis 1-form `e^k`.
    pub fn basis_covector(n: usize, k: usize) -> Self {
        let mut f = Self::zero(n, 1);
        f.coeffs[k] = S::one();
        f
    }

    /// `e^{i_1} ∧ … ∧ e^{i_p}` for strictly increasing indices.
    pub fn basis_form(n: usize, indices: &[usize]) -> Self {
        let mask = indices.iter().fold(0u32, |m, &i| m | (1 << i));
        assert_eq!(mask.count_ones() as usize, indices.len(), "repeated index");
        let mut f = Self::zero(n, indices.len());
        f.coeffs[basis(n).rank_of(mask)] = S::one();
        f
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Coefficient of `e^I` for the subset given as a bitmask.
    pub fn coeff(&self, mask: u32) -> S {
        self.coeffs[basis(self.n).rank_of(mask)]
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        Form {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same(other);
        Form {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: S) -> Self {
        Form {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&a| c * a).collect(),
        }
    }

    fn check_same(&self, other: &Self) {
        assert_eq!((self.n, self.degree), (other.n, other.degree), "form shape mismatch");
    }

    /// Exterior product. Degrees beyond `n` give the zero top form.
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "ambient dimension mismatch");
        let n = self.n;
        let q = self.degree + other.degree;
        if q > n {
            return Self::zero(n, n);
        }
        let b = basis(n);
        let mut out = vec![S::zero(); b.count(q)];
        for (ra, &ma) in b.subsets(self.degree).iter().enumerate() {
            let ca = self.coeffs[ra];
            for (rb, &mb) in b.subsets(other.degree).iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                // sign of merging I then J into sorted order: count pairs (i in I, j in J, i > j)
                let inversions: u32 = FormBasis::indices(mb)
                    .iter()
                    .map(|&j| (ma >> (j + 1)).count_ones())
                    .sum();
                let prod = ca * other.coeffs[rb];
                let t = b.rank_of(ma | mb);
                if inversions.is_multiple_of(2) {
                    out[t] += prod;
                } else {
                    out[t] -= prod;
                }
            }
        }
        Form { n, degree: q, coeffs: out }
    }

    /// Interior product with a vector given by frame components.
    pub fn interior(&self, x: &[S]) -> Self {
        assert_eq!(x.len(), self.n, "vector length");
        if self.degree == 0 {
            return Self::zero(self.n, 0);
        }
        Form {
            n: self.n,
            degree: self.degree - 1,
            coeffs: interior_vector(self.n, self.degree, 1, &self.coeffs, x),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.value().norm_sqr()).sum()
    }
}

/// `X♭`: lowers the index with the metric.
pub fn flat<S: Scalar>(metric: &Metric, x: &[S]) -> Form<S> {
    assert_eq!(x.len(), metric.dim());
    let coeffs = x
        .iter()
        .enumerate()
        .map(|(i, &v)| v.scale_re(metric.sign(i)))
        .collect();
    Form::from_coeffs(metric.dim(), 1, coeffs)
}

/// `ξ♯`: raises the index with the metric.
pub fn sharp<S: Scalar>(metric: &Metric, xi: &Form<S>) -> Vec<S> {
    assert_eq!(xi.degree(), 1, "sharp takes a 1-form");
    xi.coeffs()
        .iter()
        .enumerate()
        .map(|(i, &v)| v.scale_re(metric.sign(i)))
        .collect()
}
