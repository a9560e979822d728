//! The ε-metric cone `M̄ = M × ℝ₊` with `ḡ = r²g + ε dr²`.
//!
//! Cone coordinates are `(x, r)` and the cone frame is `(X̄_1, …, X̄_n, ∂r)`
//! with `X̄_i = X_i / r`. In this frame the lifts
//!
//! * `ᾱ = r^p pr*α`
//! * `Φ̄± = r^p (1 ∓ √ε ∂r)·pr*Φ`
//! * `X̄ = (1/r) pr*X`
//!
//! have the same form components as the base field, so lifting is a
//! re-indexing of forms plus `φ±` on spinor values. Radial parallelism is
//! then a computed property, not a construction artifact.
//!
//! Cone fields are ordinary [`Field`]s on the cone chart, whose spinor
//! module is `Δ̄`. Parallel fields are radially constant in the cone frame,
//! so extraction reads them on the slice `r = 1`.
//!
//! For `ε = −1` only the coordinate domain `r > 0` is used.
//!
//! An alternative normalization in the literature rescales the lifted
//! fields by powers of `r` (the "tilde" convention). Its formulas differ
//! from the ones here by the weights `r^p` and `1/r`, and it is not
//! implemented.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::clifford::{CliffordRep, Sign, SpinEmbedding};
use crate::error::{Error, Result};
use crate::exterior::basis;
use crate::geometry::{
    ConnectionFn, Connection, DomainFn, Field, FieldFn, FieldJet, FieldKind, FrameFn, FramedChart, LocalFrame,
    SampleRegion, VectorField, VectorFn,
};
use crate::jet::{Jet, Scalar, C64};
use crate::linalg::{self, Mat, RANK_TOL};
use crate::svforms::SpinorForm;

/// Radial sampling interval of cone charts.
pub const RADIAL_RANGE: (f64, f64) = (0.5, 2.0);

/// A cone chart over a framed base chart.
#[derive(Clone, Debug)]
pub struct ConeChart {
    base: FramedChart,
    chart: FramedChart,
    emb: Arc<SpinEmbedding>,
}

/// Builds the cone with the explicit connection
/// `ω̄_i^{jk} = ω_i^{jk}/r`, `ω̄_i^{j,n+1} = −(ε/r)δ_ij`, `ω̄_{n+1} = 0`.
pub fn build_cone(base: &FramedChart, eps: i8) -> Result<ConeChart> {
    let emb = Arc::new(SpinEmbedding::new(base.rep(), eps)?);
    let n = base.dim();
    let e = eps as f64;

    let base_frame = base.clone();
    let frame: FrameFn = Arc::new(move |z: &[Jet]| {
        let f = base_frame.frame_at(&z[..n]);
        let inv_r = z[n].recip();
        Mat::from_fn(n + 1, n + 1, |i, a| {
            if i < n && a < n {
                f[(i, a)] * inv_r
            } else if i == n && a == n {
                Jet::one()
            } else {
                Jet::zero()
            }
        })
    });

    let base_conn = base.clone();
    let connection: ConnectionFn = Arc::new(move |z: &[Jet]| {
        let w = base_conn.connection_at(&z[..n])?;
        let inv_r = z[n].recip();
        let mut out = Connection::zeros(n + 1);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.set(i, j, k, w.get(i, j, k) * inv_r);
                }
            }
            out.set(i, i, n, inv_r.scale_re(-e));
            out.set(i, n, i, inv_r.scale_re(e));
        }
        Ok(out)
    });

    let base_dom = base.clone();
    let domain: DomainFn = Arc::new(move |z: &[f64]| z[n] > 0.0 && base_dom.contains(&z[..n]));
    let mut region: SampleRegion = base.region().clone();
    region.intervals.push(RADIAL_RANGE);

    let chart = FramedChart::new(format!("cone({}, {eps})", base.name()), emb.cone().clone(), frame, domain, region)
        .with_connection(connection);
    Ok(ConeChart {
        base: base.clone(),
        chart,
        emb,
    })
}

/// Re-indexes form coefficients from dimension `n` to `n + 1`.
fn embed_coeffs<S: Scalar>(n: usize, p: usize, spin: usize, coeffs: &[S]) -> Vec<S> {
    let small = basis(n);
    let big = basis(n + 1);
    let mut out = vec![S::zero(); big.count(p) * spin];
    for (r, &mask) in small.subsets(p).iter().enumerate() {
        let t = big.rank_of(mask);
        out[t * spin..(t + 1) * spin].copy_from_slice(&coeffs[r * spin..(r + 1) * spin]);
    }
    out
}

/// Keeps the coefficients of subsets avoiding index `n`.
fn restrict_coeffs<S: Scalar>(n: usize, p: usize, spin: usize, coeffs: &[S]) -> Vec<S> {
    let small = basis(n);
    let big = basis(n + 1);
    let mut out = Vec::with_capacity(small.count(p) * spin);
    for &mask in small.subsets(p) {
        let t = big.rank_of(mask);
        out.extend_from_slice(&coeffs[t * spin..(t + 1) * spin]);
    }
    out
}

impl ConeChart {
    pub fn base(&self) -> &FramedChart {
        &self.base
    }

    /// The cone as a framed chart over `(x, r)`.
    pub fn chart(&self) -> &FramedChart {
        &self.chart
    }

    pub fn embedding(&self) -> &SpinEmbedding {
        &self.emb
    }

    pub fn eps(&self) -> i8 {
        self.emb.eps()
    }

    pub fn rep(&self) -> &CliffordRep {
        self.emb.cone()
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    fn sqrt_eps(&self) -> C64 {
        self.emb.sqrt_eps()
    }

    /// Component lift of a base value: forms are re-indexed, spinor values
    /// go through `φ±` when `spin` is set.
    pub fn lift_value<S: Scalar>(&self, v: &SpinorForm<S>, spin: bool, sign: Sign) -> SpinorForm<S> {
        let n = self.base_dim();
        let p = v.degree();
        if !spin {
            return SpinorForm::from_parts(n + 1, p, 1, embed_coeffs(n, p, 1, v.coeffs()));
        }
        let d = self.rep().spinor_dim();
        let lifted = v.map_spinors(d, |s| self.emb.phi(sign, s));
        SpinorForm::from_parts(n + 1, p, d, embed_coeffs(n, p, d, lifted.coeffs()))
    }

    /// `ᾱ`, `Ψ̄±` or `Φ̄±` as a cone field.
    pub fn lift(&self, field: &Field, sign: Sign) -> Field {
        let n = self.base_dim();
        let this = self.clone();
        let f = field.clone();
        let spin = field.uses_spin();
        let eval: FieldFn = Arc::new(move |z: &[Jet]| this.lift_value(&f.eval(&z[..n]), spin, sign));
        let label = if spin {
            format!("lift{}({})", sign_str(sign), field.label())
        } else {
            format!("lift({})", field.label())
        };
        Field::new(label, field.kind(), field.degree(), self.rep().spinor_dim(), eval)
    }

    /// `X̄` as a cone vector field.
    pub fn lift_vector(&self, v: &VectorField) -> VectorField {
        let n = self.base_dim();
        let v = v.clone();
        let eval: VectorFn = Arc::new(move |z: &[Jet]| {
            let mut out = v.eval(&z[..n]);
            out.push(Jet::zero());
            out
        });
        VectorField::new("lift", eval)
    }

    /// The 1-form `dr`.
    pub fn dr(&self) -> Field {
        let n = self.base_dim();
        let eval: FieldFn = Arc::new(move |_: &[Jet]| {
            let mut c = vec![Jet::zero(); n + 1];
            c[n] = Jet::one();
            SpinorForm::from_parts(n + 1, 1, 1, c)
        });
        Field::form("dr", 1, eval)
    }

    fn base_jet(&self, field: &Field, z: &[Jet]) -> Result<FieldJet> {
        let n = self.base_dim();
        let local = self.base.local_jets(z[..n].to_vec())?;
        FieldJet::from_local(&self.base, field, local)
    }

    /// `β = dr∧ᾱ + 1/(p+1)(dα)‾` for a base form `α`.
    pub fn build_beta(&self, alpha: &Field) -> Result<Field> {
        if alpha.kind() != FieldKind::Form {
            return Err(Error::Validation("β is built from a plain form".into()));
        }
        let p = alpha.degree();
        let n = self.base_dim();
        let this = self.clone();
        let a = alpha.clone();
        let eval: FieldFn = Arc::new(move |z: &[Jet]| {
            let Ok(fj) = this.base_jet(&a, z) else {
                return SpinorForm::zero_with(n + 1, (p + 1).min(n + 1), 1);
            };
            let lifted = this.lift_value(&fj.value, false, Sign::Plus);
            let d = this.lift_value(&fj.d(), false, Sign::Plus);
            lifted.wedge_e(n).add(&d.scale_real(1.0 / (p as f64 + 1.0)))
        });
        Ok(Field::form(format!("beta({})", alpha.label()), p + 1, eval))
    }

    /// `Ξ± = dr∧Φ̄± ∓ 1/(2(p+1))√ε (c∧Φ)‾± + 1/(p+1)(dΦ)‾±`.
    pub fn build_xi(&self, phi: &Field, sign: Sign) -> Result<Field> {
        if !phi.uses_spin() {
            return Err(Error::Validation("Ξ is built from a spinor-valued form".into()));
        }
        if phi.spinor_dim() != self.base.rep().spinor_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.base.rep().spinor_dim(),
                got: phi.spinor_dim(),
            });
        }
        let p = phi.degree();
        let n = self.base_dim();
        let d_bar = self.rep().spinor_dim();
        let this = self.clone();
        let f = phi.clone();
        let inv = 1.0 / (p as f64 + 1.0);
        let cw = -self.sqrt_eps() * (sign.value() * 0.5 * inv);
        let eval: FieldFn = Arc::new(move |z: &[Jet]| {
            let Ok(fj) = this.base_jet(&f, z) else {
                return SpinorForm::zero_with(n + 1, (p + 1).min(n + 1), d_bar);
            };
            let base_rep = this.base.rep();
            let lifted = this.lift_value(&fj.value, true, sign);
            let cwedge = this.lift_value(&fj.value.cwedge(base_rep), true, sign);
            let d = this.lift_value(&fj.d(), true, sign);
            lifted
                .wedge_e(n)
                .add(&cwedge.scale_c(cw))
                .add(&d.scale_real(inv))
        });
        Ok(Field::spinor_form(
            format!("xi{}({})", sign_str(sign), phi.label()),
            p + 1,
            d_bar,
            eval,
        ))
    }

    /// Orthogonal projector onto the image of `φ±` in `Δ̄`.
    pub fn image_projector(&self, sign: Sign) -> DMatrix<C64> {
        let d = self.base.rep().spinor_dim();
        let phi = crate::svforms::matrix_of(d, self.rep().spinor_dim(), |v| self.emb.phi(sign, v));
        let basis = linalg::row_space(&phi.adjoint(), RANK_TOL);
        &basis * basis.adjoint()
    }

    /// `½ φ∓` then restriction: the left inverse of `φ±` on its image.
    pub fn unlift_spinor<S: Scalar>(&self, sign: Sign, data: &[S]) -> Vec<S> {
        let undone = self.emb.radial_factor(sign.flip(), data);
        self.emb
            .restrict(&undone)
            .into_iter()
            .map(|v| v.scale_re(0.5))
            .collect()
    }

    /// Largest `‖∇̄Ξ‖` over a few points of the slice `r = 1`.
    pub fn parallel_probe(&self, xi: &Field) -> Result<f64> {
        let pts = crate::sampling::sample_chart(&self.base, 3, 0x5EED);
        let mut worst: f64 = 0.0;
        for x in pts {
            let mut z = x;
            z.push(1.0);
            worst = worst.max(self.parallel_residual(xi, &z)?);
        }
        Ok(worst)
    }

    fn check_parallel(&self, xi: &Field) -> Result<()> {
        let probe = self.parallel_probe(xi)?;
        if probe > 1e-8 {
            return Err(Error::Validation(format!(
                "cone field `{}` is not parallel (‖∇̄Ξ‖ = {probe:e})",
                xi.label()
            )));
        }
        Ok(())
    }

    /// Base spinor-valued `p`-form `Φ = ½ φ∓(∂r⌟Ξ)` read at `r = 1`.
    pub fn extract_base(&self, xi: &Field, sign: Sign) -> Result<Field> {
        if xi.degree() == 0 || !xi.uses_spin() {
            return Err(Error::Validation(
                "extraction needs a spinor-valued form of degree at least 1".into(),
            ));
        }
        self.check_parallel(xi)?;
        let n = self.base_dim();
        let p = xi.degree() - 1;
        let d = self.base.rep().spinor_dim();
        let d_bar = self.rep().spinor_dim();
        let this = self.clone();
        let f = xi.clone();
        let eval: FieldFn = Arc::new(move |x: &[Jet]| {
            let mut z = x.to_vec();
            z.push(Jet::one());
            let inner = f.eval(&z).interior_e(n);
            let base_coeffs = restrict_coeffs(n, p, d_bar, inner.coeffs());
            let v = SpinorForm::from_parts(n, p, d_bar, base_coeffs);
            v.map_spinors(d, |s| this.unlift_spinor(sign, s))
        });
        Ok(Field::spinor_form(format!("extract{}({})", sign_str(sign), xi.label()), p, d, eval))
    }

    /// Base spinor `Ψ = ½ φ∓(Ξ)` read at `r = 1`.
    pub fn extract_spinor(&self, xi: &Field, sign: Sign) -> Result<Field> {
        if xi.degree() != 0 || !xi.uses_spin() {
            return Err(Error::Validation("spinor extraction needs a cone spinor".into()));
        }
        self.check_parallel(xi)?;
        let n = self.base_dim();
        let d = self.base.rep().spinor_dim();
        let this = self.clone();
        let f = xi.clone();
        let eval: FieldFn = Arc::new(move |x: &[Jet]| {
            let mut z = x.to_vec();
            z.push(Jet::one());
            let v = f.eval(&z);
            SpinorForm::from_parts(n, 0, d, this.unlift_spinor(sign, v.coeffs()))
        });
        Ok(Field::spinor(format!("extract{}({})", sign_str(sign), xi.label()), d, eval))
    }

    pub fn local(&self, z: &[f64]) -> Result<LocalFrame> {
        self.chart.local(z)
    }

    /// `‖∇̄F‖` over all cone directions at `z`.
    pub fn parallel_residual(&self, field: &Field, z: &[f64]) -> Result<f64> {
        let fj = FieldJet::at(&self.chart, field, z)?;
        Ok(fj.nabla_c().norm())
    }

    /// `‖∇̄_{∂r}F‖` at `z`.
    pub fn radial_residual(&self, field: &Field, z: &[f64]) -> Result<f64> {
        let fj = FieldJet::at(&self.chart, field, z)?;
        Ok(fj.nabla.slices[self.base_dim()].values().norm())
    }

    /// Cone-side `∇̄Φ̄±` against the base-side formula
    /// `(1/r)((∇_XΦ ∓ ½√ε X·Φ)‾± − dr∧(X⌟Φ)‾±)`, plus `∇̄_{∂r}Φ̄± = 0`.
    ///
    /// Plain forms use the same formula without the Clifford term.
    pub fn covd_check(&self, field: &Field, sign: Sign, z: &[f64]) -> Result<f64> {
        let n = self.base_dim();
        let spin = field.uses_spin();
        let lifted = self.lift(field, sign);
        let lhs = FieldJet::at(&self.chart, &lifted, z)?.nabla_c();
        let base = FieldJet::at(&self.base, field, &z[..n])?;
        let phi = base.value_c();
        let w = base.nabla_c();
        let r = z[n];
        let mut total = lhs.slices[n].norm().powi(2);
        for i in 0..n {
            let mut inner = w.slices[i].clone();
            if spin {
                let c = self.sqrt_eps() * (-sign.value() * 0.5);
                inner = inner.add(&phi.gamma(self.base.rep(), i).scale(c));
            }
            let mut rhs = self.lift_value(&inner, spin, sign);
            if phi.degree() > 0 {
                rhs = rhs.sub(&self.lift_value(&phi.interior_e(i), spin, sign).wedge_e(n));
            }
            let rhs = rhs.scale_real(1.0 / r);
            total += lhs.slices[i].sub(&rhs).norm().powi(2);
        }
        Ok(total.sqrt())
    }

    /// `∇̄_{X̄}Ȳ = (1/r)((∇_XY)‾ − εg(X,Y)∂r)` and `∇̄_{∂r}Ȳ = 0`.
    pub fn covd_check_vector(&self, v: &VectorField, z: &[f64]) -> Result<f64> {
        let n = self.base_dim();
        let cone_local = self.chart.local(z)?;
        let lifted = self.lift_vector(v);
        let yb = lifted.eval(cone_local.coords());
        let base_local = self.base.local(&z[..n])?;
        let y = v.eval(base_local.coords());
        let r = z[n];
        let e = self.eps() as f64;
        let metric = self.base.metric();
        let mut total = 0.0;
        for i in 0..=n {
            let lhs: Vec<C64> = cone_local.covd_vector(&yb, i).iter().map(|j| j.value()).collect();
            let mut rhs = vec![C64::new(0.0, 0.0); n + 1];
            if i < n {
                for (k, val) in base_local.covd_vector(&y, i).iter().enumerate() {
                    rhs[k] = val.value() / r;
                }
                rhs[n] = -y[i].value() * (e * metric.sign(i) / r);
            }
            total += lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        }
        Ok(total.sqrt())
    }

    /// `∇̄_{X̄_i}(dr) = (ε/r) X̄_i♭` and `∇̄_{∂r}(dr) = 0`.
    pub fn dr_check(&self, z: &[f64]) -> Result<f64> {
        let n = self.base_dim();
        let fj = FieldJet::at(&self.chart, &self.dr(), z)?;
        let w = fj.nabla_c();
        let e = self.eps() as f64;
        let metric = self.rep().metric().clone();
        let mut total = w.slices[n].norm().powi(2);
        for i in 0..n {
            let mut x = vec![C64::new(0.0, 0.0); n + 1];
            x[i] = C64::new(e / z[n], 0.0);
            let expected = SpinorForm::from_parts(n + 1, 0, 1, vec![C64::new(1.0, 0.0)]).flat_wedge(&metric, &x);
            total += w.slices[i].sub(&expected).norm().powi(2);
        }
        Ok(total.sqrt())
    }

    /// `c̄⌟Φ̄± − (±√ε) ∂r·(c⌟Φ)‾±` at `z`.
    pub fn cvee_check(&self, phi: &Field, sign: Sign, z: &[f64]) -> Result<f64> {
        let n = self.base_dim();
        let base_local = self.base.local(&z[..n])?;
        let v = phi.eval(base_local.coords()).values();
        let lhs = self.lift_value(&v, true, sign).cvee(self.rep());
        let rhs = self
            .lift_value(&v.cvee(self.base.rep()), true, sign)
            .gamma(self.rep(), n)
            .scale(self.sqrt_eps() * sign.value());
        Ok(lhs.sub(&rhs).norm())
    }

    /// `‖c̄⌟Ξ‖` at `z`.
    pub fn primitivity_residual(&self, xi: &Field, z: &[f64]) -> Result<f64> {
        let local = self.chart.local(z)?;
        Ok(xi.eval(local.coords()).values().cvee(self.rep()).norm())
    }

    /// Largest deviation of `[X̄_i, X̄_j] = (1/r)[X_i, X_j]‾` and
    /// `[X̄_i, ∂r] = (1/r)X̄_i` at `z`.
    pub fn commutator_check(&self, z: &[f64]) -> Result<f64> {
        let n = self.base_dim();
        let cone = self.chart.local(z)?.structure_constants();
        let base = self.base.local(&z[..n])?.structure_constants();
        let r = z[n];
        let m = n + 1;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let expected = if i < n && j < n {
                        if k < n {
                            base[(i * n + j) * n + k] / r
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    } else if i < n && j == n {
                        C64::new(if k == i { 1.0 / r } else { 0.0 }, 0.0)
                    } else if i == n && j < n {
                        C64::new(if k == j { -1.0 / r } else { 0.0 }, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    worst = worst.max((cone[(i * m + j) * m + k] - expected).norm());
                }
            }
        }
        Ok(worst)
    }

    /// Largest difference between the explicit cone connection and the one
    /// recovered from the cone frame.
    pub fn connection_crosscheck(&self, z: &[f64]) -> Result<f64> {
        let explicit = self.chart.local(z)?;
        let recovered = self.koszul_chart().local(z)?;
        Ok(explicit.omega().max_abs_difference(recovered.omega()))
    }

    fn koszul_chart(&self) -> FramedChart {
        FramedChart::new(
            self.chart.name(),
            self.rep().clone(),
            self.chart.frame_fn(),
            self.chart.domain_fn(),
            self.chart.region().clone(),
        )
    }
}

fn sign_str(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}
