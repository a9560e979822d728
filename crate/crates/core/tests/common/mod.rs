//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinform::clifford::{CliffordRep, Signature};
use spinform::exterior::basis;
use spinform::jet::C64;
use spinform::svforms::SpinorForm;
use spinform::geometry::{Field, FieldFn};
use spinform::jet::Jet;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_vec(g: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
    (0..k).map(|_| c(g.random_range(-1.0..1.0), g.random_range(-1.0..1.0))).collect()
}

pub fn random_real(g: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| g.random_range(-1.0..1.0)).collect()
}

pub fn as_complex(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| c(v, 0.0)).collect()
}

pub fn random_form(g: &mut ChaCha8Rng, rep: &CliffordRep, p: usize) -> SpinorForm {
    let len = basis(rep.n()).count(p) * rep.spinor_dim();
    SpinorForm::from_coeffs(rep, p, random_vec(g, len))
}

pub fn all_signatures(max_n: usize) -> Vec<Signature> {
    (1..=max_n)
        .flat_map(|n| (0..=n).map(move |m| Signature::new(n - m, m)))
        .collect()
}

pub fn dist(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Index of a sorted subset among the degree-`p` basis.
fn slot(n: usize, set: &[usize]) -> usize {
    let mask = set.iter().fold(0u32, |m, &i| m | (1 << i));
    basis(n).rank_of(mask)
}

fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    basis(n).subsets(p).iter().map(|&m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect()
}

/// `e^k ∧` by counting transpositions.
pub fn wedge_e(n: usize, p: usize, spin: usize, v: &[C64], k: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); basis(n).count(p + 1) * spin];
    for (r, set) in subsets(n, p).iter().enumerate() {
        if set.contains(&k) {
            continue;
        }
        let before = set.iter().filter(|&&i| i < k).count();
        let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
        let mut t = set.clone();
        t.push(k);
        t.sort();
        let tr = slot(n, &t);
        for s in 0..spin {
            out[tr * spin + s] += v[r * spin + s] * sign;
        }
    }
    out
}

/// `e_k ⌟` by counting transpositions.
pub fn interior_e(n: usize, p: usize, spin: usize, v: &[C64], k: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); basis(n).count(p - 1) * spin];
    for (r, set) in subsets(n, p).iter().enumerate() {
        let Some(pos) = set.iter().position(|&i| i == k) else {
            continue;
        };
        let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
        let mut t = set.clone();
        t.remove(pos);
        let tr = slot(n, &t);
        for s in 0..spin {
            out[tr * spin + s] += v[r * spin + s] * sign;
        }
    }
    out
}

/// Dense `γ_k` acting on every spinor value.
pub fn gamma(rep: &CliffordRep, k: usize, v: &[C64]) -> Vec<C64> {
    let g = rep.gamma_matrix(k);
    let d = rep.spinor_dim();
    let mut out = Vec::with_capacity(v.len());
    for chunk in v.chunks(d) {
        let w = &g * DVector::from_column_slice(chunk);
        out.extend(w.iter().copied());
    }
    out
}

pub fn cwedge(rep: &CliffordRep, p: usize, v: &[C64]) -> Vec<C64> {
    let n = rep.n();
    let d = rep.spinor_dim();
    let mut out = vec![c(0.0, 0.0); basis(n).count(p + 1) * d];
    for k in 0..n {
        for (o, x) in out.iter_mut().zip(wedge_e(n, p, d, &gamma(rep, k, v), k)) {
            *o += x;
        }
    }
    out
}

pub fn cvee(rep: &CliffordRep, p: usize, v: &[C64]) -> Vec<C64> {
    let n = rep.n();
    let d = rep.spinor_dim();
    let mut out = vec![c(0.0, 0.0); basis(n).count(p - 1) * d];
    for k in 0..n {
        let s = rep.metric().sign(k);
        for (o, x) in out.iter_mut().zip(interior_e(n, p, d, &gamma(rep, k, v), k)) {
            *o += x * s;
        }
    }
    out
}

/// Dense matrix of a linear map given on coefficient vectors.
pub fn matrix(in_dim: usize, f: impl Fn(&[C64]) -> Vec<C64>) -> DMatrix<C64> {
    let mut cols = Vec::new();
    for k in 0..in_dim {
        let mut e = vec![c(0.0, 0.0); in_dim];
        e[k] = c(1.0, 0.0);
        cols.push(DVector::from_vec(f(&e)));
    }
    DMatrix::from_columns(&cols)
}

/// Numerical rank from singular values, relative tolerance `1e-9`.
pub fn rank(m: &DMatrix<C64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = m.clone().singular_values();
    let top = s.iter().copied().fold(0.0, f64::max);
    s.iter().filter(|&&v| v > 1e-9 * top.max(1.0)).count()
}

/// A spinor-valued form whose coefficients are fixed random quadratics.
pub fn quadratic_field(n: usize, p: usize, spin: usize, seed: u64) -> Field {
    let len = spinform::exterior::binomial(n, p) * spin;
    let mut g = rng(seed);
    let c0 = random_vec(&mut g, len);
    let c1: Vec<Vec<C64>> = (0..len).map(|_| random_vec(&mut g, n)).collect();
    let c2: Vec<Vec<C64>> = (0..len).map(|_| random_vec(&mut g, n)).collect();
    let eval: FieldFn = Arc::new(move |x: &[Jet]| {
        let coeffs = (0..len)
            .map(|k| {
                let mut acc = Jet::from_value(c0[k]);
                for a in 0..n {
                    acc += x[a] * Jet::from_value(c1[k][a]);
                    acc += x[a] * x[a] * Jet::from_value(c2[k][a]);
                }
                acc
            })
            .collect();
        SpinorForm::from_parts(n, p, spin, coeffs)
    });
    if spin == 1 {
        Field::form("quadratic", p, eval)
    } else if p == 0 {
        Field::spinor("quadratic", spin, eval)
    } else {
        Field::spinor_form("quadratic", p, spin, eval)
    }
}
