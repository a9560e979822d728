//! Pointwise residuals of the Killing-type equations.
//!
//! Every function takes the field value and its covariant jet
//! `W_i = ∇_{X_i}Φ` at one point, so the same code serves model fields and
//! synthetic jets. Residuals are Euclidean norms over all frame directions.

use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordRep, Metric};
use crate::jet::C64;
use crate::svforms::{exterior_part, interior_part, twistor_part, CovariantJet, SpinorForm};

/// Killing number `a`, special constant `b` and degree `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KillingData {
    pub a: C64,
    pub b: f64,
    pub p: usize,
}

impl KillingData {
    /// `a = ±½√ε`, `b = −ε(p+1)`: the constants matching a parallel cone lift.
    pub fn special(sign: f64, eps: f64, p: usize) -> Self {
        let sqrt_eps = if eps > 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        KillingData {
            a: sqrt_eps * (0.5 * sign),
            b: -eps * (p as f64 + 1.0),
            p,
        }
    }
}

fn frobenius<'a>(parts: impl IntoIterator<Item = &'a SpinorForm<C64>>) -> f64 {
    parts.into_iter().map(|s| s.norm().powi(2)).sum::<f64>().sqrt()
}

fn unit(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[i] = C64::new(1.0, 0.0);
    v
}

fn real_vec(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

fn along(w: &CovariantJet<C64>, x: &[C64]) -> SpinorForm<C64> {
    let mut out = w.slices[0].scale(x[0]);
    for (wi, &xi) in w.slices.iter().zip(x).skip(1) {
        out = out.add(&wi.scale(xi));
    }
    out
}

/// Directions `e_i` and `e_i + e_j` used for polarization residuals.
pub fn polar_directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        dirs.push(v);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v[j] = 1.0;
            dirs.push(v);
        }
    }
    dirs
}

/// `∇_{X_i}Ψ − a X_i·Ψ`.
pub fn ks_residual(rep: &CliffordRep, psi: &SpinorForm<C64>, a: C64, w: &CovariantJet<C64>) -> f64 {
    let parts: Vec<_> = w
        .slices
        .iter()
        .enumerate()
        .map(|(i, wi)| wi.sub(&psi.gamma(rep, i).scale(a)))
        .collect();
    frobenius(&parts)
}

/// Right-hand side of the Killing equation for spinor-valued forms along `X`.
pub fn ksf_rhs(
    rep: &CliffordRep,
    phi: &SpinorForm<C64>,
    a: C64,
    dphi: &SpinorForm<C64>,
    x: &[C64],
) -> SpinorForm<C64> {
    let inv = 1.0 / (phi.degree() as f64 + 1.0);
    let mut out = phi.clifford_act(rep, x);
    if phi.degree() < phi.n() {
        out = out.sub(&phi.cwedge(rep).interior(x).scale_real(inv));
        out = out.scale(a).add(&dphi.interior(x).scale_real(inv));
    } else {
        out = out.scale(a);
    }
    out
}

/// `∇_{X_i}Φ − a(X_i·Φ − 1/(p+1) X_i⌟(c∧Φ)) − 1/(p+1) X_i⌟dΦ`.
pub fn ksf_residual(rep: &CliffordRep, phi: &SpinorForm<C64>, a: C64, w: &CovariantJet<C64>) -> f64 {
    let n = w.n();
    let dphi = exterior_part(w);
    let parts: Vec<_> = (0..n)
        .map(|i| w.slices[i].sub(&ksf_rhs(rep, phi, a, &dphi, &unit(n, i))))
        .collect();
    frobenius(&parts)
}

/// Largest `|X⌟∇_XΦ − a X⌟(X·Φ)|` over `dirs`.
pub fn ksf_polar_residual(
    rep: &CliffordRep,
    phi: &SpinorForm<C64>,
    a: C64,
    w: &CovariantJet<C64>,
    dirs: &[Vec<f64>],
) -> f64 {
    dirs.iter()
        .map(|d| {
            let x = real_vec(d);
            along(w, &x)
                .interior(&x)
                .sub(&phi.clifford_act(rep, &x).interior(&x).scale(a))
                .norm()
        })
        .fold(0.0, f64::max)
}

/// `∇_{X_i}α − 1/(p+1) X_i⌟dα`.
pub fn kf_residual(w: &CovariantJet<C64>) -> f64 {
    let n = w.n();
    let inv = 1.0 / (w.degree() as f64 + 1.0);
    let da = exterior_part(w);
    let parts: Vec<_> = (0..n)
        .map(|i| w.slices[i].sub(&da.interior_e(i).scale_real(inv)))
        .collect();
    frobenius(&parts)
}

/// Largest `|X⌟∇_Xα|` over `dirs`.
pub fn kf_polar_residual(w: &CovariantJet<C64>, dirs: &[Vec<f64>]) -> f64 {
    dirs.iter()
        .map(|d| {
            let x = real_vec(d);
            along(w, &x).interior(&x).norm()
        })
        .fold(0.0, f64::max)
}

/// `∇_{X_i}(dα) − b X_i♭∧α` given the slices `∇_{X_i}(dα)`.
pub fn skf_residual(metric: &Metric, alpha: &SpinorForm<C64>, b: f64, nabla_d: &[SpinorForm<C64>]) -> f64 {
    let n = metric.dim();
    let parts: Vec<_> = nabla_d
        .iter()
        .enumerate()
        .map(|(i, ndi)| ndi.sub(&alpha.flat_wedge(metric, &unit(n, i)).scale_real(b)))
        .collect();
    frobenius(&parts)
}

/// Right-hand side of the special Killing equation for `∇_X(dΦ)`.
pub fn sksf_rhs(
    rep: &CliffordRep,
    phi: &SpinorForm<C64>,
    dphi: &SpinorForm<C64>,
    k: &KillingData,
    x: &[C64],
) -> SpinorForm<C64> {
    let metric = rep.metric();
    let p = phi.degree() as f64;
    let inv = 1.0 / (p + 1.0);
    let xflat_phi = phi.flat_wedge(metric, x);
    let first = xflat_phi.scale_real(k.b);
    let second = dphi
        .clifford_act(rep, x)
        .add(&dphi.interior(x).cwedge(rep).scale_real(inv))
        .scale(k.a);
    let third = xflat_phi
        .scale_real(2.0)
        .add(&phi.clifford_act(rep, x).cwedge(rep).scale_real((2.0 * p + 1.0) * inv))
        .add(&phi.interior(x).cwedge(rep).cwedge(rep).scale_real(inv))
        .scale(k.a * k.a);
    first.add(&second).add(&third)
}

/// `∇_{X_i}(dΦ)` minus the special Killing right-hand side.
pub fn sksf_residual(
    rep: &CliffordRep,
    phi: &SpinorForm<C64>,
    dphi: &SpinorForm<C64>,
    k: &KillingData,
    nabla_d: &[SpinorForm<C64>],
) -> f64 {
    let n = rep.n();
    let parts: Vec<_> = nabla_d
        .iter()
        .enumerate()
        .map(|(i, ndi)| ndi.sub(&sksf_rhs(rep, phi, dphi, k, &unit(n, i))))
        .collect();
    frobenius(&parts)
}

/// Residuals of `TΦ = 0`, `δΦ = a c⌟Φ` and
/// `DΦ = 1/(p+1)(−ap(n+2)Φ − c∧δΦ + c⌟dΦ)`.
pub fn operator_system_residuals(
    rep: &CliffordRep,
    phi: &SpinorForm<C64>,
    a: C64,
    w: &CovariantJet<C64>,
) -> [f64; 3] {
    let n = rep.n() as f64;
    let p = phi.degree() as f64;
    let metric = rep.metric();
    let twistor = twistor_part(rep, w).norm();
    let delta = interior_part(metric, w);
    let r_delta = delta.sub(&phi.cvee(rep).scale(a)).norm();
    let mut dirac = SpinorForm::zero_with(w.n(), w.degree(), rep.spinor_dim());
    for (i, wi) in w.slices.iter().enumerate() {
        dirac = dirac.add(&wi.gamma(rep, i).scale_real(metric.sign(i)));
    }
    let d = exterior_part(w);
    let mut rhs = phi.scale(a * (-p * (n + 2.0)));
    if phi.degree() > 0 {
        rhs = rhs.sub(&delta.cwedge(rep));
    }
    if phi.degree() < w.n() {
        rhs = rhs.add(&d.cvee(rep));
    }
    let rhs = rhs.scale_real(1.0 / (p + 1.0));
    [twistor, r_delta, dirac.sub(&rhs).norm()]
}

/// Outcome of the primitive Killing identity `c⌟dΦ = −a(n+2)Φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PrimitiveCheck {
    Evaluated { residual: f64 },
    NotPrimitive { cvee_norm: f64 },
}

pub fn primitive_killing_check(
    rep: &CliffordRep,
    phi: &SpinorForm<C64>,
    a: C64,
    dphi: &SpinorForm<C64>,
    tol: f64,
) -> PrimitiveCheck {
    let cvee_norm = phi.cvee(rep).norm();
    if cvee_norm >= tol {
        return PrimitiveCheck::NotPrimitive { cvee_norm };
    }
    let n = rep.n() as f64;
    let residual = dphi.cvee(rep).add(&phi.scale(a * (n + 2.0))).norm();
    PrimitiveCheck::Evaluated { residual }
}

/// A covariant jet satisfying the Killing equation for `(Φ, a)` with a free
/// exterior part `σ` of degree `p+1`: `W_i = a(γ_iΦ − 1/(p+1) e_i⌟(c∧Φ)) + 1/(p+1) e_i⌟σ`.
pub fn ksf_jet(rep: &CliffordRep, phi: &SpinorForm<C64>, a: C64, sigma: &SpinorForm<C64>) -> CovariantJet<C64> {
    let n = rep.n();
    CovariantJet::new((0..n).map(|i| ksf_rhs(rep, phi, a, sigma, &unit(n, i))).collect())
}

/// Equation tags understood by [`residual_at`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    Kf,
    KfPolar,
    Ks,
    Ksf,
    KsfPolar,
    Skf,
    Sksf,
    OperatorSystem,
    Primksf,
}

impl Equation {
    pub const ALL: [Equation; 9] = [
        Equation::Kf,
        Equation::KfPolar,
        Equation::Ks,
        Equation::Ksf,
        Equation::KsfPolar,
        Equation::Skf,
        Equation::Sksf,
        Equation::OperatorSystem,
        Equation::Primksf,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Equation::Kf => "kf",
            Equation::KfPolar => "kf-polar",
            Equation::Ks => "ks",
            Equation::Ksf => "ksf",
            Equation::KsfPolar => "ksf-polar",
            Equation::Skf => "skf",
            Equation::Sksf => "sksf",
            Equation::OperatorSystem => "operator-system",
            Equation::Primksf => "primksf",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Equation> {
        Self::ALL.into_iter().find(|e| e.tag() == tag)
    }

    /// Whether the residual involves second derivatives.
    pub fn is_second_order(self) -> bool {
        matches!(self, Equation::Skf | Equation::Sksf)
    }

    /// Default tolerance: `1e-9` for first-order, `1e-8` for second-order.
    pub fn default_tol(self) -> f64 {
        if self.is_second_order() || self == Equation::OperatorSystem || self == Equation::Primksf {
            1e-8
        } else {
            1e-9
        }
    }
}

/// Threshold on `‖c⌟Φ‖` below which a field counts as primitive.
pub const PRIMITIVE_TOL: f64 = 1e-9;

/// Residual of `eq` for `field` at `x`; `None` when a precondition fails.
pub fn residual_at(
    chart: &super::FramedChart,
    field: &super::Field,
    eq: Equation,
    data: &KillingData,
    x: &[f64],
) -> crate::error::Result<Option<f64>> {
    let fj = super::FieldJet::at(chart, field, x)?;
    let rep = chart.rep();
    let phi = fj.value_c();
    let w = fj.nabla_c();
    let n = chart.dim();
    let nabla_d = || -> Vec<SpinorForm<C64>> {
        let d = fj.d();
        (0..n).map(|i| fj.covd_of(&d, i)).collect()
    };
    let r = match eq {
        Equation::Kf => kf_residual(&w),
        Equation::KfPolar => kf_polar_residual(&w, &polar_directions(n)),
        Equation::Ks => ks_residual(rep, &phi, data.a, &w),
        Equation::Ksf => ksf_residual(rep, &phi, data.a, &w),
        Equation::KsfPolar => ksf_polar_residual(rep, &phi, data.a, &w, &polar_directions(n)),
        Equation::Skf => skf_residual(chart.metric(), &phi, data.b, &nabla_d()),
        Equation::Sksf => sksf_residual(rep, &phi, &exterior_part(&w), data, &nabla_d()),
        Equation::OperatorSystem => operator_system_residuals(rep, &phi, data.a, &w)
            .into_iter()
            .fold(0.0, f64::max),
        Equation::Primksf => match primitive_killing_check(rep, &phi, data.a, &exterior_part(&w), PRIMITIVE_TOL) {
            PrimitiveCheck::Evaluated { residual } => residual,
            PrimitiveCheck::NotPrimitive { .. } => return Ok(None),
        },
    };
    Ok(Some(r))
}
