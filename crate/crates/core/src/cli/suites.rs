use serde::Serialize;

use super::scene::{resolve_field, ResolvedField, Scene};
use crate::clifford::{build_clifford, build_embedding, CliffordRep, Sign, Signature};
use crate::error::{Error, Result};
use crate::geometry::{residual_at, sweep, Equation, Expect, Field, FieldKind, ResidualReport};
use crate::jet::{Jet, Scalar, C64};
use crate::models::Model;
use crate::sampling::{random_c64, random_real_vector, random_spinor_form, rng, sample_chart};
use crate::svforms::{
    clf_residuals, decomposer, dim_sigma, sfdec_decompose, sl2_ops, twistor_projector, twistor_rank_formula,
    SpinorForm,
};

/// Tolerance of exact algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance of cone-side checks on lifted fields.
pub const CONE_TOL: f64 = 1e-8;
/// A negative control passes when its residual exceeds this.
pub const CONTROL_THRESHOLD: f64 = 1e-3;
/// Largest `n` accepted by the identity suite.
pub const IDENTITIES_MAX_N: usize = 8;
/// Largest `n` for which ranks in the identity suite are computed.
pub const RANK_MAX_N: usize = 6;
/// Largest `n` accepted by `dimensions`.
pub const DIMENSIONS_MAX_N: usize = 10;
/// Largest `dim(V* ⊗ Σᵖ)` for which `dimensions` computes ranks numerically.
pub const DIMENSIONS_MAX_JET: usize = 1000;

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
}

fn sig_name(sig: Signature) -> String {
    format!("({},{})", sig.n_plus, sig.n_minus)
}

fn signatures(n: usize) -> impl Iterator<Item = Signature> {
    (0..=n).map(move |m| Signature::new(n - m, m))
}

fn real_c(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

/// Residuals of the two brackets `[H, X] = −2X`, `[H, Y] = 2Y` and of
/// `[X, Y] = −H` on `Φ`.
pub fn sl2_bracket_residual(rep: &CliffordRep, phi: &SpinorForm<C64>) -> f64 {
    let n = rep.n();
    let p = phi.degree();
    let (x, y, h) = sl2_ops(rep, phi);
    let mut worst: f64 = 0.0;
    if p < n {
        let hx = sl2_ops(rep, &x).2;
        let xh = sl2_ops(rep, &h).0;
        worst = worst.max(hx.sub(&xh).add(&x.scale_real(2.0)).norm());
    }
    if p > 0 {
        let hy = sl2_ops(rep, &y).2;
        let yh = sl2_ops(rep, &h).1;
        worst = worst.max(hy.sub(&yh).sub(&y.scale_real(2.0)).norm());
    }
    if p > 0 && p < n {
        let xy = sl2_ops(rep, &y).0;
        let yx = sl2_ops(rep, &x).1;
        worst = worst.max(xy.sub(&yx).add(&h).norm());
    }
    worst
}

/// `max ‖HΦ − (n − 2p)Φ‖` over the basis of `Σᵖ`.
pub fn weight_residual(rep: &CliffordRep, p: usize) -> f64 {
    let d = rep.spinor_dim();
    let len = dim_sigma(rep.n(), p as isize, d);
    let w = rep.n() as f64 - 2.0 * p as f64;
    max_of((0..len).map(|k| {
        let mut c = vec![C64::new(0.0, 0.0); len];
        c[k] = C64::new(1.0, 0.0);
        let e = SpinorForm::from_coeffs(rep, p, c);
        sl2_ops(rep, &e).2.sub(&e.scale_real(w)).norm()
    }))
}

/// The three `φ±` identities for one `(sig, ε, sign)`: left inverse,
/// vector action and bivector action. Returns the largest residual.
pub fn spin_embedding_residual(sig: Signature, eps: i8, sign: Sign, samples: usize, seed: u64) -> Result<f64> {
    let emb = build_embedding(sig, eps)?;
    let base = emb.base();
    let cone = emb.cone();
    let n = sig.n();
    let d = base.spinor_dim();
    let mut g = rng(seed);
    let mut worst = emb.equivariance_residual();
    let c = emb.sqrt_eps() * sign.value();
    for _ in 0..samples {
        let psi: Vec<C64> = (0..d).map(|_| random_c64(&mut g)).collect();
        let lifted = emb.phi(sign, &psi);
        let back = emb.restrict(&emb.radial_factor(sign.flip(), &lifted));
        worst = worst.max(
            back.iter()
                .zip(&psi)
                .map(|(b, p)| (b - p * 2.0).norm_sqr())
                .sum::<f64>()
                .sqrt(),
        );
        for i in 0..n {
            let lhs = emb.phi(sign, &base.gamma(i).apply(&psi));
            let rhs = cone.gamma(i).apply(&cone.gamma(n).apply(&lifted));
            worst = worst.max(diff(&lhs, &rhs.iter().map(|v| v * c).collect::<Vec<_>>()));
            for j in 0..n {
                let lhs = emb.phi(sign, &base.gamma(i).apply(&base.gamma(j).apply(&psi)));
                let rhs = cone.gamma(i).apply(&cone.gamma(j).apply(&lifted));
                worst = worst.max(diff(&lhs, &rhs));
            }
        }
    }
    Ok(worst)
}

fn diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Numerical rank of the twistor module (or of `ker prj₃` for `p ∈ {0, n}`).
pub fn twistor_rank(rep: &CliffordRep, p: usize) -> usize {
    twistor_projector(rep, p).rank()
}

/// `n·dim Δ − dim Δ`: the complement of `Δ` in `V* ⊗ Σᵖ` for `p ∈ {0, n}`.
pub fn edge_kernel_formula(n: usize, spin: usize) -> usize {
    n * spin - spin
}

/// Expected rank of the twistor module, or of `ker prj₃` at the edges.
pub fn expected_twistor_rank(n: usize, p: usize, spin: usize) -> isize {
    if p == 0 || p == n {
        edge_kernel_formula(n, spin) as isize
    } else {
        twistor_rank_formula(n, p, spin)
    }
}

pub fn run_identities(n_max: usize, inject_sign_error: bool, opts: RunOptions) -> Result<Vec<ResidualReport>> {
    if n_max > IDENTITIES_MAX_N {
        return Err(Error::Validation(format!(
            "n_max must be at most {IDENTITIES_MAX_N}, got {n_max}"
        )));
    }
    let tol = opts.tol.unwrap_or(ALGEBRAIC_TOL);
    let mut out = Vec::new();
    for n in 1..=n_max {
        for sig in signatures(n) {
            let name = sig_name(sig);
            let mut rep = build_clifford(sig);
            if inject_sign_error {
                rep = rep.with_sign_defect();
            }
            out.push(ResidualReport::scalar("anticommutator", &name, Expect::Zero, tol, rep.anticommutator_residual()));
            let mut g = rng(opts.seed ^ ((n as u64) << 32) ^ sig.n_minus as u64);
            let d = rep.spinor_dim();
            for p in 0..=n {
                let subject = format!("{name} p={p}");
                let mut clf = [0.0f64; 4];
                let mut brackets: f64 = 0.0;
                for _ in 0..opts.samples {
                    let x = real_c(&random_real_vector(&mut g, n));
                    let phi = random_spinor_form(&mut g, n, p, d);
                    for (acc, r) in clf.iter_mut().zip(clf_residuals(&rep, &x, &phi)) {
                        *acc = acc.max(r);
                    }
                    brackets = brackets.max(sl2_bracket_residual(&rep, &phi));
                }
                for (k, r) in clf.iter().enumerate() {
                    out.push(ResidualReport::scalar(format!("clifford-form-{}", k + 1), &subject, Expect::Zero, tol, *r));
                }
                let weight = if n <= RANK_MAX_N {
                    weight_residual(&rep, p)
                } else {
                    let mut w: f64 = 0.0;
                    for _ in 0..opts.samples {
                        let phi = random_spinor_form(&mut g, n, p, d);
                        let h = sl2_ops(&rep, &phi).2;
                        w = w.max(h.sub(&phi.scale_real(n as f64 - 2.0 * p as f64)).norm());
                    }
                    w
                };
                out.push(ResidualReport::scalar("sl2-weight", &subject, Expect::Zero, tol, weight));
                out.push(ResidualReport::scalar("sl2-brackets", &subject, Expect::Zero, tol, brackets));
            }
            for eps in [1i8, -1] {
                for sign in Sign::both() {
                    let r = spin_embedding_residual(sig, eps, sign, opts.samples.min(8), opts.seed)?;
                    let subject = format!("{name} eps={eps} sign={}", sign_str(sign));
                    out.push(ResidualReport::scalar("phi-embedding", subject, Expect::Zero, tol, r));
                }
            }
        }
        if n <= RANK_MAX_N {
            let rep = build_clifford(Signature::new(n, 0));
            let d = rep.spinor_dim();
            let mut g = rng(opts.seed.wrapping_add(n as u64));
            for p in 0..=n {
                let subject = format!("n={n} p={p}");
                let rank = twistor_rank(&rep, p) as isize;
                let expected = expected_twistor_rank(n, p, d);
                let tag = if p == 0 || p == n { "twistor-rank-edge" } else { "twistor-rank" };
                out.push(ResidualReport::scalar(tag, &subject, Expect::Zero, 0.5, (rank - expected).abs() as f64));
                let mut recon: f64 = 0.0;
                for _ in 0..opts.samples.min(8) {
                    let phi = random_spinor_form(&mut g, n, p, d);
                    let parts = sfdec_decompose(&rep, &phi);
                    let mut sum = SpinorForm::zero_with(n, p, d);
                    for part in &parts {
                        sum = sum.add(part);
                    }
                    recon = recon.max(sum.sub(&phi).norm());
                }
                out.push(ResidualReport::scalar("primitive-decomposition", &subject, Expect::Zero, 1e-10, recon));
            }
        }
    }
    Ok(out)
}

fn sign_str(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

fn required_kind(eq: Equation) -> &'static [FieldKind] {
    match eq {
        Equation::Kf | Equation::KfPolar | Equation::Skf => &[FieldKind::Form],
        Equation::Ks => &[FieldKind::Spinor],
        Equation::Ksf | Equation::KsfPolar | Equation::Sksf | Equation::OperatorSystem | Equation::Primksf => {
            &[FieldKind::SpinorForm, FieldKind::Spinor]
        }
    }
}

pub fn check_field(scene: &Scene, opts: RunOptions) -> Result<Vec<ResidualReport>> {
    let model = Model::new(scene.model.clone())?;
    let resolved = scene
        .fields
        .iter()
        .map(|f| resolve_field(&model, f, scene.sign))
        .collect::<Result<Vec<_>>>()?;
    let mut plan = Vec::new();
    for rf in &resolved {
        let eqs = if rf.checks.is_empty() {
            rf.default_checks.clone()
        } else {
            rf.checks
                .iter()
                .map(|t| {
                    Equation::from_tag(t).ok_or_else(|| {
                        let known: Vec<&str> = Equation::ALL.iter().map(|e| e.tag()).collect();
                        Error::Validation(format!("unknown check `{t}`; known: {}", known.join(", ")))
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        for eq in eqs {
            if !required_kind(eq).contains(&rf.field.kind()) {
                return Err(Error::Validation(format!(
                    "check `{}` does not apply to field `{}`",
                    eq.tag(),
                    rf.label
                )));
            }
            plan.push((rf, eq));
        }
    }
    let chart = model.chart();
    let points = sample_chart(chart, opts.samples, opts.seed);
    let mut out = Vec::new();
    for (rf, eq) in plan {
        let samples = sweep(&points, |x| residual_at(chart, &rf.field, eq, &rf.data, x))?;
        let tol = opts.tol.unwrap_or_else(|| control_tol(rf.expect, eq.default_tol()));
        out.push(ResidualReport::new(eq.tag(), &rf.label, rf.expect, tol, samples));
    }
    Ok(out)
}

fn control_tol(expect: Expect, zero_tol: f64) -> f64 {
    match expect {
        Expect::Zero => zero_tol,
        Expect::Nonzero => CONTROL_THRESHOLD,
    }
}

/// Checks run by `cone-check`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeCheck {
    /// `β` built from a form is parallel.
    BetaParallel,
    /// `β` of a perturbed form is not parallel.
    BetaPerturbed,
    /// `Ψ̄±` is parallel.
    SpinorParallel,
    /// `Ψ̄∓` with the opposite sign is not parallel.
    SpinorFlipped,
    /// `Ξ±` is parallel.
    XiParallel,
    /// `Ξ∓` with the opposite sign is not parallel.
    XiFlipped,
    /// `Ξ±` of a perturbed field is not parallel.
    XiPerturbed,
    /// Cone covariant derivative of the lift against the base formula.
    ConeCovd,
    /// `c̄⌟` of the lift against the base formula.
    ConeCvee,
    /// Lifts are parallel along `∂r`.
    RadialParallel,
    /// `c̄⌟Ξ` vanishes exactly when `c⌟Φ` does.
    Primitivity,
    /// `build_xi(extract(Ξ)) = Ξ` for ambient fields.
    Roundtrip,
}

impl ConeCheck {
    pub const ALL: [ConeCheck; 12] = [
        ConeCheck::BetaParallel,
        ConeCheck::BetaPerturbed,
        ConeCheck::SpinorParallel,
        ConeCheck::SpinorFlipped,
        ConeCheck::XiParallel,
        ConeCheck::XiFlipped,
        ConeCheck::XiPerturbed,
        ConeCheck::ConeCovd,
        ConeCheck::ConeCvee,
        ConeCheck::RadialParallel,
        ConeCheck::Primitivity,
        ConeCheck::Roundtrip,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ConeCheck::BetaParallel => "beta-parallel",
            ConeCheck::BetaPerturbed => "beta-perturbed",
            ConeCheck::SpinorParallel => "spinor-parallel",
            ConeCheck::SpinorFlipped => "spinor-flipped",
            ConeCheck::XiParallel => "xi-parallel",
            ConeCheck::XiFlipped => "xi-flipped",
            ConeCheck::XiPerturbed => "xi-perturbed",
            ConeCheck::ConeCovd => "cone-covd",
            ConeCheck::ConeCvee => "cone-cvee",
            ConeCheck::RadialParallel => "radial-parallel",
            ConeCheck::Primitivity => "primitivity",
            ConeCheck::Roundtrip => "roundtrip",
        }
    }

    pub fn from_tag(tag: &str) -> Option<ConeCheck> {
        Self::ALL.into_iter().find(|c| c.tag() == tag)
    }

    fn applies_to(self, kind: FieldKind, curved: bool) -> bool {
        use ConeCheck::*;
        match self {
            BetaParallel | BetaPerturbed => curved && kind == FieldKind::Form,
            SpinorParallel | SpinorFlipped => curved && kind == FieldKind::Spinor,
            XiParallel | XiFlipped | XiPerturbed | Primitivity => curved && kind == FieldKind::SpinorForm,
            ConeCvee => kind == FieldKind::SpinorForm,
            ConeCovd | RadialParallel => true,
            Roundtrip => curved && kind != FieldKind::Form,
        }
    }

    fn defaults(kind: FieldKind, curved: bool) -> Vec<ConeCheck> {
        Self::ALL
            .into_iter()
            .filter(|c| *c != ConeCheck::Roundtrip && c.applies_to(kind, curved))
            .collect()
    }
}

/// `(1 + x₁/2)·F`: spoils the Killing property of any nonzero field.
pub fn perturbed(field: &Field) -> Field {
    let f = field.evaluator();
    let eval: crate::geometry::FieldFn = std::sync::Arc::new(move |x: &[Jet]| {
        let v = f(x);
        let factor = Jet::one() + x[0].scale_re(0.5);
        let coeffs = v.coeffs().iter().map(|&c| c * factor).collect();
        SpinorForm::from_parts(v.n(), v.degree(), v.spinor_dim(), coeffs)
    });
    Field::new(
        format!("perturbed({})", field.label()),
        field.kind(),
        field.degree(),
        field.spinor_dim(),
        eval,
    )
}

/// Chart-level cone checks: explicit vs. recovered connection, frame
/// commutators and `∇̄dr`.
pub fn cone_chart_checks(model: &Model, points: &[Vec<f64>], tol: f64) -> Result<Vec<ResidualReport>> {
    let cone = model.cone();
    Ok(vec![
        ResidualReport::new("cone-connection", "cone", Expect::Zero, tol, sweep(points, |z| cone.connection_crosscheck(z).map(Some))?),
        ResidualReport::new("cone-commutators", "cone", Expect::Zero, tol, sweep(points, |z| cone.commutator_check(z).map(Some))?),
        ResidualReport::new("cone-dr", "cone", Expect::Zero, tol, sweep(points, |z| cone.dr_check(z).map(Some))?),
    ])
}

fn cone_field_check(
    model: &Model,
    rf: &ResolvedField,
    check: ConeCheck,
    sign: Sign,
    points: &[Vec<f64>],
    tol: Option<f64>,
) -> Result<ResidualReport> {
    let cone = model.cone();
    let n = model.dim();
    let field = &rf.field;
    let zero_tol = tol.unwrap_or(CONE_TOL);
    let neg_tol = tol.unwrap_or(CONTROL_THRESHOLD);
    let parallel = |f: &Field| sweep(points, |z| cone.parallel_residual(f, z).map(Some));
    let (expect, samples) = match check {
        ConeCheck::BetaParallel => (rf.expect, parallel(&cone.build_beta(field)?)?),
        ConeCheck::BetaPerturbed => (Expect::Nonzero, parallel(&cone.build_beta(&perturbed(field))?)?),
        ConeCheck::SpinorParallel => (rf.expect, parallel(&cone.lift(field, sign))?),
        ConeCheck::SpinorFlipped => (Expect::Nonzero, parallel(&cone.lift(field, sign.flip()))?),
        ConeCheck::XiParallel => (rf.expect, parallel(&cone.build_xi(field, sign)?)?),
        ConeCheck::XiFlipped => (Expect::Nonzero, parallel(&cone.build_xi(field, sign.flip())?)?),
        ConeCheck::XiPerturbed => (Expect::Nonzero, parallel(&cone.build_xi(&perturbed(field), sign)?)?),
        ConeCheck::ConeCovd => (Expect::Zero, sweep(points, |z| cone.covd_check(field, sign, z).map(Some))?),
        ConeCheck::ConeCvee => (Expect::Zero, sweep(points, |z| cone.cvee_check(field, sign, z).map(Some))?),
        ConeCheck::RadialParallel => {
            let lifted = cone.lift(field, sign);
            (Expect::Zero, sweep(points, |z| cone.radial_residual(&lifted, z).map(Some))?)
        }
        ConeCheck::Primitivity => {
            let xi = cone.build_xi(field, sign)?;
            let base_cvee = sweep(points, |z| {
                let local = model.chart().local(&z[..n])?;
                Ok(Some(field.eval(local.coords()).values().cvee(model.chart().rep()).norm()))
            })?;
            let primitive = base_cvee.iter().all(|(_, r)| r.is_some_and(|r| r < crate::geometry::killing::PRIMITIVE_TOL));
            let samples = sweep(points, |z| cone.primitivity_residual(&xi, z).map(Some))?;
            let expect = if primitive { Expect::Zero } else { Expect::Nonzero };
            (expect, samples)
        }
        ConeCheck::Roundtrip => {
            let Some(xi0) = &rf.ambient else {
                return Err(Error::Validation(format!(
                    "`roundtrip` needs an ambient field, `{}` is not one",
                    rf.label
                )));
            };
            let xi = model.constant_ambient_field(xi0)?;
            let rebuilt = if field.kind() == FieldKind::Spinor {
                cone.lift(field, sign)
            } else {
                cone.build_xi(field, sign)?
            };
            let samples = sweep(points, |z| {
                let local = cone.local(z)?;
                let a = xi.eval(local.coords()).values();
                let b = rebuilt.eval(local.coords()).values();
                Ok(Some(a.sub(&b).norm()))
            })?;
            (Expect::Zero, samples)
        }
    };
    let tol = match expect {
        Expect::Zero => zero_tol,
        Expect::Nonzero => neg_tol,
    };
    Ok(ResidualReport::new(check.tag(), &rf.label, expect, tol, samples))
}

pub fn cone_check(scene: &Scene, opts: RunOptions) -> Result<Vec<ResidualReport>> {
    let Some(scene_sign) = scene.sign else {
        return Err(Error::Validation("cone-check needs a sign".into()));
    };
    let model = Model::new(scene.model.clone())?;
    let curved = !matches!(scene.model, crate::models::ModelSpec::Flat { .. });
    let resolved = scene
        .fields
        .iter()
        .map(|f| resolve_field(&model, f, Some(scene_sign)))
        .collect::<Result<Vec<_>>>()?;
    let points = sample_chart(model.cone().chart(), opts.samples, opts.seed);
    let mut out = cone_chart_checks(&model, &points, opts.tol.unwrap_or(CONE_TOL))?;
    for rf in &resolved {
        let sign = rf.sign.unwrap_or(scene_sign);
        let kind = rf.field.kind();
        let checks = if rf.checks.is_empty() {
            let mut c = ConeCheck::defaults(kind, curved);
            if rf.ambient.is_some() {
                c.push(ConeCheck::Roundtrip);
            }
            c
        } else {
            rf.checks
                .iter()
                .map(|t| {
                    let c = ConeCheck::from_tag(t).ok_or_else(|| {
                        let known: Vec<&str> = ConeCheck::ALL.iter().map(|c| c.tag()).collect();
                        Error::Validation(format!("unknown cone check `{t}`; known: {}", known.join(", ")))
                    })?;
                    if !c.applies_to(kind, curved) {
                        return Err(Error::Validation(format!(
                            "cone check `{t}` does not apply to field `{}`",
                            rf.label
                        )));
                    }
                    Ok(c)
                })
                .collect::<Result<Vec<_>>>()?
        };
        for c in checks {
            out.push(cone_field_check(&model, rf, c, sign, &points, opts.tol)?);
        }
    }
    Ok(out)
}

/// One row of the `dimensions` table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionRow {
    pub n: usize,
    pub p: usize,
    pub spinor_dim: usize,
    pub dim_sigma: usize,
    /// `dim (c∧)^{p−q} PΣ^q = dim PΣ^q` for `q = 0..=min(p, n−p)`.
    pub primitive_dims: Vec<usize>,
    pub primitive_dims_computed: bool,
    /// `dim(V* ⊗ Σᵖ)`.
    pub jet_dim: usize,
    /// Rank of the twistor module, or of `ker prj₃` for `p ∈ {0, n}`.
    pub twistor_rank: Option<usize>,
    pub twistor_rank_formula: isize,
    /// The same count with `2·dim Δ` in place of `dim Δ`.
    pub twistor_rank_doubled_formula: Option<isize>,
    pub reconciliation: String,
}

fn primitive_dim_formula(n: usize, q: usize, spin: usize) -> usize {
    dim_sigma(n, q as isize, spin) - dim_sigma(n, q as isize - 1, spin)
}

pub fn dimension_row(n: usize, p: usize) -> Result<DimensionRow> {
    if n == 0 || n > DIMENSIONS_MAX_N {
        return Err(Error::Validation(format!(
            "n must be between 1 and {DIMENSIONS_MAX_N}, got {n}"
        )));
    }
    if p > n {
        return Err(Error::Validation(format!("p = {p} exceeds n = {n}")));
    }
    let spin = 1usize << (n / 2);
    let dim = dim_sigma(n, p as isize, spin);
    let jet_dim = n * dim;
    // The decomposition passes through every `Σ^k`, `k ≤ p`.
    let computed = (0..=p).all(|k| n * dim_sigma(n, k as isize, spin) <= DIMENSIONS_MAX_JET);
    let l = p.min(n - p);
    let (primitive_dims, rank) = if computed {
        let rep = build_clifford(Signature::new(n, 0));
        (decomposer(&rep, p).block_dims(), Some(twistor_rank(&rep, p)))
    } else {
        ((0..=l).map(|q| primitive_dim_formula(n, q, spin)).collect(), None)
    };
    let formula = expected_twistor_rank(n, p, spin);
    let edge = p == 0 || p == n;
    let doubled = (!edge).then(|| formula + spin as isize);
    let shown_rank = rank.map(|r| r as isize).unwrap_or(formula);
    let reconciliation = if edge {
        format!("{n}·{spin} = {jet_dim} = {spin} (Δ) + {shown_rank} (ker prj₃)")
    } else {
        let lo = dim_sigma(n, p as isize - 1, spin);
        let hi = dim_sigma(n, p as isize + 1, spin);
        format!(
            "{n}·{dim} = {jet_dim} = {lo} (Σ^{}) + {hi} (Σ^{}) + {dim} (Σ^{p}) − {spin} (Δ, counted twice) + {shown_rank} (Σ^{{{p},1}})",
            p - 1,
            p + 1
        )
    };
    Ok(DimensionRow {
        n,
        p,
        spinor_dim: spin,
        dim_sigma: dim,
        primitive_dims,
        primitive_dims_computed: computed,
        jet_dim,
        twistor_rank: rank,
        twistor_rank_formula: formula,
        twistor_rank_doubled_formula: doubled,
        reconciliation,
    })
}

/// Consistency checks of a computed row.
pub fn dimension_checks(row: &DimensionRow) -> Vec<ResidualReport> {
    let subject = format!("n={} p={}", row.n, row.p);
    let mut out = vec![ResidualReport::scalar(
        "decomposition-dims",
        &subject,
        Expect::Zero,
        0.5,
        (row.primitive_dims.iter().sum::<usize>() as f64 - row.dim_sigma as f64).abs(),
    )];
    if row.primitive_dims_computed {
        let formula: Vec<usize> = (0..row.primitive_dims.len())
            .map(|q| primitive_dim_formula(row.n, q, row.spinor_dim))
            .collect();
        let r = row
            .primitive_dims
            .iter()
            .zip(&formula)
            .map(|(a, b)| (*a as f64 - *b as f64).abs())
            .fold(0.0, f64::max);
        out.push(ResidualReport::scalar("primitive-dims", &subject, Expect::Zero, 0.5, r));
    }
    if let Some(rank) = row.twistor_rank {
        let tag = if row.p == 0 || row.p == row.n { "twistor-rank-edge" } else { "twistor-rank" };
        out.push(ResidualReport::scalar(
            tag,
            &subject,
            Expect::Zero,
            0.5,
            (rank as f64 - row.twistor_rank_formula as f64).abs(),
        ));
    }
    out
}
