mod common;

use std::sync::Arc;

use common::*;
use spinform::clifford::{build_clifford, CliffordRep, Signature};
use spinform::geometry::killing::{
    kf_polar_residual, kf_residual, ks_residual, ksf_jet, ksf_polar_residual, ksf_residual, operator_system_residuals,
    polar_directions, primitive_killing_check,
};
use spinform::geometry::{
    residual_at, DomainFn, Equation, Field, FieldFn, FieldJet, FrameFn, FramedChart, KillingData, PrimitiveCheck,
    SampleRegion,
};
use spinform::jet::{Jet, Scalar, C64};
use spinform::linalg::Mat;
use spinform::models::{Model, ModelSpec};
use spinform::sampling::sample_chart;
use spinform::svforms::{CovariantJet, SpinorForm};

fn flat_model(n: usize) -> Model {
    Model::new(ModelSpec::Flat {
        signature: Signature::new(n, 0),
    })
    .unwrap()
}

#[test]
fn flat_connection_vanishes_and_covd_is_the_gradient() {
    let model = flat_model(3);
    let chart = model.chart();
    let field = quadratic_field(3, 1, 2, 1);
    let h = 1e-5;
    for x in sample_chart(chart, 5, 2) {
        let local = chart.local(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(local.omega().get(i, j, k).value(), c(0.0, 0.0));
                }
            }
        }
        let fj = FieldJet::at(chart, &field, &x).unwrap();
        let w = fj.nabla_c();
        for i in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fp = field.eval(&xp.iter().map(|&v| Jet::real(v)).collect::<Vec<_>>()).values();
            let fm = field.eval(&xm.iter().map(|&v| Jet::real(v)).collect::<Vec<_>>()).values();
            let fd: Vec<C64> = fp.coeffs().iter().zip(fm.coeffs()).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            assert!(dist(w.slices[i].coeffs(), &fd) < 1e-8);
        }
    }
}

/// `Γ^c_ab` of the coordinate metric `g_ab = f(x)^{-2} δ_ab` by central differences.
fn christoffel(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let n = x.len();
    let h = 1e-5;
    let g = |y: &[f64]| f(y).powi(-2);
    let mut dg = vec![0.0; n];
    for a in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[a] += h;
        xm[a] -= h;
        dg[a] = (g(&xp) - g(&xm)) / (2.0 * h);
    }
    let g0 = g(x);
    let mut out = vec![0.0; n * n * n];
    for cc in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut v = 0.0;
                if b == cc {
                    v += dg[a];
                }
                if a == cc {
                    v += dg[b];
                }
                if a == b {
                    v -= dg[cc];
                }
                out[(cc * n + a) * n + b] = 0.5 * v / g0;
            }
        }
    }
    out
}

#[test]
fn sphere_connection_matches_christoffel_oracle() {
    for (spec, curv) in [(ModelSpec::Sphere { dim: 2 }, 1.0), (ModelSpec::Hyperbolic { dim: 3 }, -1.0)] {
        let model = Model::new(spec).unwrap();
        let chart = model.chart();
        let n = chart.dim();
        let f = move |y: &[f64]| 1.0 + curv * y.iter().map(|v| v * v).sum::<f64>() / 4.0;
        for x in sample_chart(chart, 8, 3) {
            let local = chart.local(&x).unwrap();
            assert!(local.torsion_residual() < 1e-13);
            assert!(local.omega().antisymmetry_residual() < 1e-13);
            let gam = christoffel(&x, f);
            let fx = f(&x);
            for i in 0..n {
                for j in 0..n {
                    let mut e = vec![Jet::zero(); n];
                    e[j] = Jet::one();
                    let ours = local.covd_vector(&e, i);
                    // coordinate components of ∇_{X_i}X_j with X_i = f ∂_i
                    let mut oracle = vec![0.0; n];
                    let h = 1e-5;
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    oracle[j] += fx * (f(&xp) - f(&xm)) / (2.0 * h);
                    for cc in 0..n {
                        oracle[cc] += gam[(cc * n + i) * n + j] * fx * fx;
                    }
                    for cc in 0..n {
                        let ours_coord = ours[cc].value().re * fx;
                        assert!((ours_coord - oracle[cc]).abs() < 1e-7, "{ours_coord} vs {}", oracle[cc]);
                    }
                }
            }
        }
    }
}

fn polar_chart() -> FramedChart {
    let rep = build_clifford(Signature::new(2, 0));
    let frame: FrameFn = Arc::new(|x: &[Jet]| {
        let r = x[0];
        Mat::from_fn(2, 2, |i, a| match (i, a) {
            (0, 0) => Jet::one(),
            (1, 1) => r.recip(),
            _ => Jet::zero(),
        })
    });
    let domain: DomainFn = Arc::new(|x: &[f64]| x[0] > 0.1);
    let region = SampleRegion {
        ball_dims: 0,
        radius: 0.0,
        intervals: vec![(0.5, 2.0), (-3.0, 3.0)],
    };
    FramedChart::new("polar", rep, frame, domain, region)
}

#[test]
fn polar_frame_of_the_plane_is_flat() {
    let chart = polar_chart();
    // dx = cos θ e¹ − sin θ e²
    let dx: FieldFn = Arc::new(|x: &[Jet]| {
        let t = x[1].value().re;
        let (s, co) = (t.sin(), t.cos());
        let theta = x[1];
        let cos = jet_cos(theta, co, s);
        let sin = jet_sin(theta, co, s);
        SpinorForm::from_parts(2, 1, 1, vec![cos, -sin])
    });
    let field = Field::form("dx", 1, dx);
    let mut worst_parallel: f64 = 0.0;
    let mut worst_other = f64::INFINITY;
    for x in sample_chart(&chart, 10, 4) {
        let local = chart.local(&x).unwrap();
        assert!(local.torsion_residual() < 1e-13);
        let fj = FieldJet::at(&chart, &field, &x).unwrap();
        assert!(fj.nabla_c().norm() < 1e-13);
        // ∂x as a vector: same components
        let v = field.eval(local.coords());
        let v: Vec<Jet> = v.coeffs().to_vec();
        for i in 0..2 {
            assert!(local.covd_vector(&v, i).iter().all(|c| c.value().norm() < 1e-13));
        }
        // a constant spinor is (cos θ/2 ± sin θ/2 γ₁γ₂)ψ₀ in the rotating frame
        let rep = chart.rep().clone();
        for s in [1.0, -1.0] {
            let rep2 = rep.clone();
            let eval: FieldFn = Arc::new(move |x: &[Jet]| {
                let half = x[1].scale_re(0.5);
                let (hs, hc) = (half.value().re.sin(), half.value().re.cos());
                let cos = jet_cos(half, hc, hs);
                let sin = jet_sin(half, hc, hs);
                let psi0 = vec![Jet::one(), Jet::from_value(c(0.3, 0.7))];
                let g12 = rep2.gamma(0).apply(&rep2.gamma(1).apply(&psi0));
                let coeffs = psi0.iter().zip(&g12).map(|(&a, &b)| a * cos + b * sin.scale_re(s)).collect();
                SpinorForm::from_parts(2, 0, 2, coeffs)
            });
            let psi = Field::spinor("psi", 2, eval);
            let r = FieldJet::at(&chart, &psi, &x).unwrap().nabla_c().norm();
            if s > 0.0 {
                worst_parallel = worst_parallel.max(r);
            } else {
                worst_other = worst_other.min(r);
            }
        }
    }
    // exactly one orientation of the half-angle rotation is parallel
    assert!(worst_parallel.min(worst_other) < 1e-12);
    assert!(worst_parallel.max(worst_other) > 0.1);
}

/// `cos` of a jet, given `cos` and `sin` of its value.
fn jet_cos(t: Jet, co: f64, s: f64) -> Jet {
    let dt = t - Jet::real(t.value().re);
    // cos(t0 + dt) = cos t0 − sin t0 dt − cos t0 dt²/2
    Jet::real(co) - dt.scale_re(s) - (dt * dt).scale_re(co / 2.0)
}

fn jet_sin(t: Jet, co: f64, s: f64) -> Jet {
    let dt = t - Jet::real(t.value().re);
    Jet::real(s) + dt.scale_re(co) - (dt * dt).scale_re(s / 2.0)
}

#[test]
fn clifford_form_is_parallel() {
    // ∇_X(c∧Φ) = c∧∇_XΦ and ∇_X(c⌟Φ) = c⌟∇_XΦ
    let model = Model::new(ModelSpec::Sphere { dim: 3 }).unwrap();
    let chart = model.chart();
    let rep = chart.rep().clone();
    let field = quadratic_field(3, 1, rep.spinor_dim(), 5);
    let f = field.evaluator();
    let r1 = rep.clone();
    let cw = Field::spinor_form("c∧Φ", 2, 2, Arc::new(move |x: &[Jet]| f(x).cwedge(&r1)));
    let f = field.evaluator();
    let r2 = rep.clone();
    let cv = Field::spinor("c⌟Φ", 2, Arc::new(move |x: &[Jet]| f(x).cvee(&r2)));
    for x in sample_chart(chart, 6, 6) {
        let base = FieldJet::at(chart, &field, &x).unwrap().nabla_c();
        let w = FieldJet::at(chart, &cw, &x).unwrap().nabla_c();
        let v = FieldJet::at(chart, &cv, &x).unwrap().nabla_c();
        for i in 0..3 {
            assert!(w.slices[i].sub(&base.slices[i].cwedge(&rep)).norm() < 1e-12);
            assert!(v.slices[i].sub(&base.slices[i].cvee(&rep)).norm() < 1e-12);
        }
    }
}

#[test]
fn covariant_derivative_obeys_leibniz() {
    let model = Model::new(ModelSpec::Sphere { dim: 2 }).unwrap();
    let chart = model.chart();
    let alpha = quadratic_field(2, 1, 1, 7);
    let psi = quadratic_field(2, 0, 2, 8);
    let prod = Field::product(&alpha, &psi);
    for x in sample_chart(chart, 6, 9) {
        let a = FieldJet::at(chart, &alpha, &x).unwrap();
        let p = FieldJet::at(chart, &psi, &x).unwrap();
        let w = FieldJet::at(chart, &prod, &x).unwrap().nabla_c();
        let tensor = |form: &SpinorForm<C64>, spinor: &SpinorForm<C64>| {
            let coeffs = form
                .coeffs()
                .iter()
                .flat_map(|&cf| spinor.coeffs().iter().map(move |&s| cf * s))
                .collect();
            SpinorForm::from_parts(2, 1, 2, coeffs)
        };
        let (av, pv, aw, pw) = (a.value_c(), p.value_c(), a.nabla_c(), p.nabla_c());
        for i in 0..2 {
            let expected = tensor(&aw.slices[i], &pv).add(&tensor(&av, &pw.slices[i]));
            assert!(w.slices[i].sub(&expected).norm() < 1e-12);
        }
    }
}

#[test]
fn second_derivatives_match_finite_differences() {
    // on flat space ∇_{X_i}(dΦ) is the gradient of the exterior derivative
    let model = flat_model(3);
    let chart = model.chart();
    let field = quadratic_field(3, 1, 1, 10);
    let h = 1e-4;
    let d_at = |y: &[f64]| -> SpinorForm<C64> { FieldJet::at(chart, &field, y).unwrap().d().values() };
    for x in sample_chart(chart, 4, 11) {
        let fj = FieldJet::at(chart, &field, &x).unwrap();
        let d = fj.d();
        for i in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd: Vec<C64> = d_at(&xp).coeffs().iter().zip(d_at(&xm).coeffs()).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            assert!(dist(fj.covd_of(&d, i).coeffs(), &fd) < 1e-7);
        }
    }
}

#[test]
fn jets_are_exact_for_quadratics() {
    let x = [0.3, -0.7];
    let v = Jet::seed(&x);
    let q = v[0] * v[0] * v[1] + v[1].scale_re(2.0);
    assert!((q.value().re - (0.09 * -0.7 - 1.4)).abs() < 1e-15);
    assert!((q.grad(0).re - 2.0 * 0.3 * -0.7).abs() < 1e-15);
    assert!((q.grad(1).re - (0.09 + 2.0)).abs() < 1e-15);
    assert!((q.hess(0, 1).re - 0.6).abs() < 1e-15);
    assert!((q.hess(0, 0).re - 2.0 * -0.7).abs() < 1e-15);
}

fn sphere_catalog_field(model: &Model, label: &str) -> (Field, KillingData) {
    let entry = model
        .killing_catalog()
        .unwrap()
        .into_iter()
        .find(|e| e.label == label)
        .unwrap_or_else(|| panic!("missing {label}"));
    (entry.field, entry.data)
}

#[test]
fn killing_equations_reject_wrong_constants() {
    let model = Model::new(ModelSpec::Sphere { dim: 3 }).unwrap();
    let chart = model.chart();
    let pts = sample_chart(chart, 10, 12);
    let (psi, data) = sphere_catalog_field(&model, "killing-spinor+0");
    let (alpha, adata) = sphere_catalog_field(&model, "rotation-01");
    let wrong_a = KillingData { a: -data.a, ..data };
    let wrong_b = KillingData { b: adata.b + 1.0, ..adata };
    for x in &pts {
        assert!(residual_at(chart, &psi, Equation::Ks, &data, x).unwrap().unwrap() < 1e-9);
        assert!(residual_at(chart, &psi, Equation::Ks, &wrong_a, x).unwrap().unwrap() > 1e-3);
        assert!(residual_at(chart, &alpha, Equation::Kf, &adata, x).unwrap().unwrap() < 1e-9);
        assert!(residual_at(chart, &alpha, Equation::Skf, &adata, x).unwrap().unwrap() < 1e-8);
        assert!(residual_at(chart, &alpha, Equation::Skf, &wrong_b, x).unwrap().unwrap() > 1e-3);
    }
    // a non-Killing form fails kf and its polarized form at most points
    let junk = quadratic_field(3, 1, 1, 13);
    let fails = pts
        .iter()
        .filter(|x| residual_at(chart, &junk, Equation::Kf, &adata, x).unwrap().unwrap() > 1e-3)
        .count();
    assert!(fails >= 9);
}

fn synthetic(rep: &CliffordRep, p: usize, seed: u64) -> (SpinorForm<C64>, SpinorForm<C64>) {
    let mut g = rng(seed);
    (random_form(&mut g, rep, p), random_form(&mut g, rep, (p + 1).min(rep.n())))
}

#[test]
fn operator_system_is_equivalent_to_killing_equation() {
    let mut agree = 0;
    for seed in 0..100u64 {
        let n = 2 + (seed % 4) as usize;
        let rep = build_clifford(Signature::new(n, 0));
        let p = 1 + (seed as usize / 4) % n;
        let (phi, sigma) = synthetic(&rep, p, seed);
        let a = c(0.5 * (1.0 + seed as f64 / 50.0), if seed % 2 == 0 { 0.0 } else { 0.3 });
        let good = ksf_jet(&rep, &phi, a, &sigma);
        let mut g = rng(seed ^ 0xABCD);
        let noise = CovariantJet::new((0..n).map(|_| random_form(&mut g, &rep, p).scale_real(0.1)).collect());
        let bad = good.add(&noise);
        for (w, expect) in [(&good, true), (&bad, false)] {
            let ksf = ksf_residual(&rep, &phi, a, w) < 1e-10;
            let ops = operator_system_residuals(&rep, &phi, a, w).iter().all(|&r| r < 1e-9);
            assert_eq!(ksf, expect, "seed {seed}");
            assert_eq!(ops, ksf, "seed {seed}");
            agree += 1;
        }
    }
    assert_eq!(agree, 200);
}

#[test]
fn polarized_killing_equations_agree() {
    for seed in 0..30u64 {
        let n = 2 + (seed % 3) as usize;
        let rep = build_clifford(Signature::new(n, 0));
        let p = 1 + (seed as usize) % (n - 1);
        let (phi, sigma) = synthetic(&rep, p, seed);
        let a = c(0.5, 0.0);
        let good = ksf_jet(&rep, &phi, a, &sigma);
        let dirs = polar_directions(n);
        assert!(ksf_polar_residual(&rep, &phi, a, &good, &dirs) < 1e-12);
        let mut g = rng(seed + 99);
        let bad = good.add(&CovariantJet::new((0..n).map(|_| random_form(&mut g, &rep, p)).collect()));
        assert!(ksf_polar_residual(&rep, &phi, a, &bad, &dirs) > 1e-3);
    }
    let w_sym = CovariantJet::new(vec![
        SpinorForm::from_parts(2, 1, 1, vec![c(1.0, 0.0), c(0.0, 0.0)]),
        SpinorForm::from_parts(2, 1, 1, vec![c(0.0, 0.0), c(0.0, 0.0)]),
    ]);
    assert!(kf_residual(&w_sym) > 0.5);
    assert!(kf_polar_residual(&w_sym, &polar_directions(2)) > 0.5);
    let w_anti = CovariantJet::new(vec![
        SpinorForm::from_parts(2, 1, 1, vec![c(0.0, 0.0), c(1.0, 0.0)]),
        SpinorForm::from_parts(2, 1, 1, vec![c(-1.0, 0.0), c(0.0, 0.0)]),
    ]);
    assert!(kf_residual(&w_anti) < 1e-15);
    assert!(kf_polar_residual(&w_anti, &polar_directions(2)) < 1e-15);
}

#[test]
fn killing_spinor_residual_on_synthetic_jets() {
    let rep = build_clifford(Signature::new(3, 0));
    let mut g = rng(21);
    let psi = random_form(&mut g, &rep, 0);
    let a = c(0.5, 0.0);
    let w = CovariantJet::new((0..3).map(|i| psi.gamma(&rep, i).scale(a)).collect());
    assert!(ks_residual(&rep, &psi, a, &w) < 1e-14);
    assert!(ks_residual(&rep, &psi, -a, &w) > 0.1);
}

#[test]
fn primitive_identity_needs_a_primitive_field() {
    let model = Model::new(ModelSpec::Sphere { dim: 3 }).unwrap();
    let chart = model.chart();
    let (phi, data) = sphere_catalog_field(&model, "primitive-killing+-p1");
    let (np, ndata) = sphere_catalog_field(&model, "special-killing+-p1-0");
    for x in sample_chart(chart, 10, 14) {
        assert!(residual_at(chart, &phi, Equation::Primksf, &data, &x).unwrap().unwrap() < 1e-8);
        // wrong a: identity fails
        let wrong = KillingData { a: -data.a, ..data };
        assert!(residual_at(chart, &phi, Equation::Primksf, &wrong, &x).unwrap().unwrap() > 1e-3);
        // non-primitive: the precondition reports instead of evaluating
        assert!(residual_at(chart, &np, Equation::Primksf, &ndata, &x).unwrap().is_none());
    }
    let rep = chart.rep();
    let mut g = rng(15);
    let phi = random_form(&mut g, rep, 1);
    let dphi = random_form(&mut g, rep, 2);
    assert!(matches!(
        primitive_killing_check(rep, &phi, c(0.5, 0.0), &dphi, 1e-9),
        PrimitiveCheck::NotPrimitive { .. }
    ));
}

#[test]
fn outside_domain_is_an_error() {
    let model = Model::new(ModelSpec::Hyperbolic { dim: 2 }).unwrap();
    assert!(model.chart().local(&[1.95, 0.0]).is_err());
    assert!(model.chart().local(&[0.5, 0.0]).is_ok());
}
