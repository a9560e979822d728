//! Model geometries and certified test fields.
//!
//! Curved test fields are never transcribed from closed forms. They are
//! manufactured from constant fields on the flat ambient space of the cone
//! (`ℝ^{n+1}` over `Sⁿ`, Minkowski space over `Hⁿ`), moved into the cone
//! frame with the frame rotation `R(x)` and its spin lift, and extracted.
//!
//! Charts:
//!
//! * sphere: stereographic, `X_i = (1 + |x|²/4)∂_i`, unit embedding
//!   `y = (x, 1 − |x|²/4)/(1 + |x|²/4)`
//! * hyperbolic: Poincaré ball, `X_i = (1 − |x|²/4)∂_i`,
//!   `y = (x, 1 + |x|²/4)/(1 − |x|²/4)` on the upper hyperboloid
//!
//! The columns of `R(x)` are the ambient components of the cone frame:
//! `dy(X_1), …, dy(X_n), y`. `R` does not depend on `r`, and `R(0) = I`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordRep, Metric, Sign, Signature};
use crate::cone::{build_cone, ConeChart};
use crate::error::{Error, Result};
use crate::exterior::basis;
use crate::geometry::{
    ConnectionFn, Connection, DomainFn, Equation, Field, FieldFn, FrameFn, FramedChart, KillingData, SampleRegion,
};
use crate::jet::{Jet, Scalar, C64};
use crate::linalg::{self, Mat, RANK_TOL};
use crate::svforms::{primitive_projector, SpinorForm};

/// Sampling radius of the sphere chart.
pub const SPHERE_SAMPLE_RADIUS: f64 = 1.5;
/// Sampling radius of the hyperbolic chart.
pub const HYPERBOLIC_SAMPLE_RADIUS: f64 = 1.2;
/// Sampling radius of flat charts.
pub const FLAT_SAMPLE_RADIUS: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ModelSpec {
    Flat { signature: Signature },
    Sphere { dim: usize },
    Hyperbolic { dim: usize },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Flat { signature } => signature.n(),
            ModelSpec::Sphere { dim } | ModelSpec::Hyperbolic { dim } => *dim,
        }
    }

    /// `ε` of the cone over the model that is flat.
    pub fn eps(&self) -> i8 {
        match self {
            ModelSpec::Hyperbolic { .. } => -1,
            _ => 1,
        }
    }

    pub fn metric(&self) -> Metric {
        match self {
            ModelSpec::Flat { signature } => signature.metric(),
            _ => Metric::euclidean(self.dim()),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        let max = crate::jet::MAX_VARS - 1;
        if n == 0 || n > max {
            return Err(Error::Validation(format!(
                "model dimension must be between 1 and {max}, got {n}"
            )));
        }
        Ok(())
    }
}

fn sq_norm<S: Scalar>(x: &[S]) -> S {
    let mut s = S::zero();
    for &v in x {
        s += v * v;
    }
    s
}

/// `1 ± |x|²/4` for sphere (`+`) and hyperbolic (`−`) charts.
fn conformal_factor<S: Scalar>(curv: f64, x: &[S]) -> S {
    S::one() + sq_norm(x).scale_re(curv / 4.0)
}

/// Builds the framed chart of a model.
pub fn make_chart(spec: &ModelSpec) -> Result<FramedChart> {
    spec.validate()?;
    let n = spec.dim();
    let rep = CliffordRep::new(spec.metric());
    match spec {
        ModelSpec::Flat { .. } => {
            let frame: FrameFn = Arc::new(move |_: &[Jet]| Mat::identity(n));
            let conn: ConnectionFn = Arc::new(move |_: &[Jet]| Ok(Connection::zeros(n)));
            let domain: DomainFn = Arc::new(|_: &[f64]| true);
            Ok(FramedChart::new("flat", rep, frame, domain, SampleRegion::ball(n, FLAT_SAMPLE_RADIUS))
                .with_connection(conn))
        }
        ModelSpec::Sphere { .. } | ModelSpec::Hyperbolic { .. } => {
            let (curv, name, limit, radius) = match spec {
                ModelSpec::Sphere { .. } => (1.0, "sphere", 10.0, SPHERE_SAMPLE_RADIUS),
                _ => (-1.0, "hyperbolic", 1.9, HYPERBOLIC_SAMPLE_RADIUS),
            };
            let frame: FrameFn = Arc::new(move |x: &[Jet]| {
                let f = conformal_factor(curv, x);
                Mat::from_fn(n, n, |i, a| if i == a { f } else { Jet::zero() })
            });
            let domain: DomainFn = Arc::new(move |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() < limit * limit);
            Ok(FramedChart::new(name, rep, frame, domain, SampleRegion::ball(n, radius)))
        }
    }
}

/// A model chart together with its cone.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    chart: FramedChart,
    cone: ConeChart,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let chart = make_chart(&spec)?;
        let cone = build_cone(&chart, spec.eps())?;
        Ok(Model { spec, chart, cone })
    }

    pub fn sphere(n: usize) -> Result<Self> {
        Self::new(ModelSpec::Sphere { dim: n })
    }

    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::new(ModelSpec::Hyperbolic { dim: n })
    }

    pub fn flat(signature: Signature) -> Result<Self> {
        Self::new(ModelSpec::Flat { signature })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn chart(&self) -> &FramedChart {
        &self.chart
    }

    pub fn cone(&self) -> &ConeChart {
        &self.cone
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn eps(&self) -> i8 {
        self.spec.eps()
    }

    fn curvature(&self) -> Result<f64> {
        match self.spec {
            ModelSpec::Sphere { .. } => Ok(1.0),
            ModelSpec::Hyperbolic { .. } => Ok(-1.0),
            ModelSpec::Flat { .. } => Err(Error::Unsupported(
                "the cone over a flat model is not flat; no ambient frame".into(),
            )),
        }
    }

    /// Ambient metric `diag(g, ε)` of the flat space containing the cone.
    pub fn ambient_metric(&self) -> Metric {
        self.spec.metric().extended(self.eps())
    }

    /// Unit embedding `y(x)` into the ambient space.
    pub fn embedding_point<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let k = self.curvature()?;
        let denom = conformal_factor(k, x).recip();
        let mut y: Vec<S> = x.iter().map(|&v| v * denom).collect();
        y.push((S::one() - sq_norm(x).scale_re(k / 4.0)) * denom);
        Ok(y)
    }

    /// `R(x)`: column `i` holds the ambient components of the `i`-th cone
    /// frame vector.
    pub fn cone_frame_rotation<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>> {
        let k = self.curvature()?;
        let n = self.dim();
        let f = conformal_factor(k, x);
        let inv_f = f.recip();
        let half_inv = inv_f.scale_re(0.5 * k);
        let y = self.embedding_point(x)?;
        Ok(Mat::from_fn(n + 1, n + 1, |a, i| {
            if i == n {
                y[a]
            } else if a < n {
                let d = if a == i { S::one() } else { S::zero() };
                d - x[a] * x[i] * half_inv
            } else {
                -(x[i] * inv_f).scale_re(k)
            }
        }))
    }

    /// `R(x)` and its spin lift `s` with `s γ_i s⁻¹ = Σ_j R_ji γ_j`.
    pub fn cone_frame_spin<S: Scalar>(&self, x: &[S]) -> Result<(Mat<S>, Mat<S>)> {
        let r = self.cone_frame_rotation(x)?;
        let s = self.cone.rep().spin_lift(&r)?;
        Ok((r, s))
    }

    /// A constant ambient spinor-valued `q`-form, expressed in the cone frame.
    pub fn constant_ambient_field(&self, xi0: &SpinorForm<C64>) -> Result<Field> {
        self.curvature()?;
        let m = self.dim() + 1;
        let d = self.cone.rep().spinor_dim();
        if xi0.n() != m || xi0.spinor_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: xi0.n(),
            });
        }
        let q = xi0.degree();
        let model = self.clone();
        let data = xi0.clone();
        let eval: FieldFn = Arc::new(move |z: &[Jet]| {
            let x = &z[..m - 1];
            match model.cone_frame_spin(x) {
                Ok((r, s)) => transform_constant(&data, &r, &s),
                Err(_) => SpinorForm::from_parts(m, q, d, vec![Jet::real(f64::NAN); data.len()]),
            }
        });
        Ok(Field::new("ambient", kind_for(q), q, d, eval))
    }

    /// Projects ambient spinor values onto the image of `φ±`.
    pub fn project_to_image(&self, sign: Sign, xi0: &SpinorForm<C64>) -> SpinorForm<C64> {
        let p = self.cone.image_projector(sign);
        xi0.map_spinors(xi0.spinor_dim(), |s| {
            let v = nalgebra::DVector::from_column_slice(s);
            (&p * v).iter().copied().collect()
        })
    }

    /// Orthonormal basis of the image of `φ±` in ambient spinors.
    pub fn image_basis(&self, sign: Sign) -> DMatrix<C64> {
        linalg::row_space(&self.cone.image_projector(sign), RANK_TOL)
    }

    /// Number of independent Killing spinors obtained for `sign`.
    pub fn extraction_rank(&self, sign: Sign) -> usize {
        self.image_basis(sign).ncols()
    }

    /// Killing spinor with `a = ±½√ε` from the ambient constant spinor `psi0`.
    pub fn killing_spinor(&self, psi0: &[C64], sign: Sign) -> Result<Field> {
        let m = self.dim() + 1;
        let xi0 = self.project_to_image(sign, &SpinorForm::from_parts(m, 0, psi0.len(), psi0.to_vec()));
        let xi = self.constant_ambient_field(&xi0)?;
        self.cone.extract_spinor(&xi, sign)
    }

    /// Special Killing spinor-valued `p`-form from a constant ambient `(p+1)`-form.
    pub fn special_killing_form(&self, xi0: &SpinorForm<C64>, sign: Sign) -> Result<Field> {
        let xi = self.constant_ambient_field(&self.project_to_image(sign, xi0))?;
        self.cone.extract_base(&xi, sign)
    }

    /// The Killing 1-form dual to the ambient infinitesimal isometry
    /// `y ↦ G⁻¹B y` for antisymmetric `B`: `α_i = Σ_j R_ji (B y)_j`.
    pub fn rotational_killing_form(&self, b: &DMatrix<f64>) -> Result<Field> {
        self.curvature()?;
        let m = self.dim() + 1;
        if b.nrows() != m || b.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: b.nrows(),
            });
        }
        if (b + b.transpose()).amax() > 1e-12 {
            return Err(Error::Validation("generator must be antisymmetric".into()));
        }
        let model = self.clone();
        let gen = b.clone();
        let eval: FieldFn = Arc::new(move |x: &[Jet]| {
            let n = m - 1;
            let (Ok(r), Ok(y)) = (model.cone_frame_rotation(x), model.embedding_point(x)) else {
                return SpinorForm::from_parts(n, 1, 1, vec![Jet::real(f64::NAN); n]);
            };
            let by: Vec<Jet> = (0..m)
                .map(|j| {
                    let mut acc = Jet::zero();
                    for (k, &yk) in y.iter().enumerate() {
                        acc += yk.scale_re(gen[(j, k)]);
                    }
                    acc
                })
                .collect();
            let coeffs = (0..n)
                .map(|i| {
                    let mut acc = Jet::zero();
                    for (j, &bj) in by.iter().enumerate() {
                        acc += r[(j, i)] * bj;
                    }
                    acc
                })
                .collect();
            SpinorForm::from_parts(n, 1, 1, coeffs)
        });
        Ok(Field::form("rotation", 1, eval))
    }

    /// `E_{jk} − E_{kj}`.
    pub fn rotation_generator(&self, j: usize, k: usize) -> DMatrix<f64> {
        let m = self.dim() + 1;
        let mut b = DMatrix::zeros(m, m);
        b[(j, k)] = 1.0;
        b[(k, j)] = -1.0;
        b
    }

    /// Certified fields of the model with their Killing constants.
    pub fn killing_catalog(&self) -> Result<Vec<CatalogEntry>> {
        match self.spec {
            ModelSpec::Flat { .. } => self.flat_catalog(),
            _ => self.curved_catalog(),
        }
    }

    fn flat_catalog(&self) -> Result<Vec<CatalogEntry>> {
        let n = self.dim();
        let d = self.chart.rep().spinor_dim();
        let mut psi = vec![C64::new(0.0, 0.0); d];
        psi[0] = C64::new(1.0, 0.0);
        let spinor = constant_field(n, 0, d, psi.clone());
        let mut e1 = vec![C64::new(0.0, 0.0); n];
        e1[0] = C64::new(1.0, 0.0);
        let form = constant_form(n, 1, e1);
        let zero = KillingData {
            a: C64::new(0.0, 0.0),
            b: 0.0,
            p: 0,
        };
        let mut out = vec![
            CatalogEntry::new("constant-spinor", spinor.clone(), zero, &[Equation::Ks]),
            CatalogEntry::new(
                "constant-form",
                form.clone(),
                KillingData { p: 1, ..zero },
                &[Equation::Kf, Equation::KfPolar, Equation::Skf],
            ),
        ];
        if n >= 2 {
            out.push(CatalogEntry::new(
                "constant-product",
                Field::product(&form, &spinor),
                KillingData { p: 1, ..zero },
                &[Equation::Ksf, Equation::KsfPolar, Equation::OperatorSystem],
            ));
        }
        Ok(out)
    }

    fn curved_catalog(&self) -> Result<Vec<CatalogEntry>> {
        let n = self.dim();
        let m = n + 1;
        let eps = self.eps() as f64;
        let d_bar = self.cone.rep().spinor_dim();
        let mut out = Vec::new();

        let mut rotations = Vec::new();
        for j in 0..m {
            for k in j + 1..m {
                let alpha = self
                    .rotational_killing_form(&self.rotation_generator(j, k))?
                    .with_label(format!("rotation-{j}{k}"));
                rotations.push(alpha.clone());
                out.push(CatalogEntry::new(
                    alpha.label().to_string(),
                    alpha,
                    KillingData::special(1.0, eps, 1),
                    &[Equation::Kf, Equation::KfPolar, Equation::Skf],
                ));
            }
        }

        for sign in Sign::both() {
            let s = sign_str(sign);
            let image = self.image_basis(sign);
            let mut first_spinor = None;
            for col in 0..image.ncols() {
                let psi0: Vec<C64> = image.column(col).iter().copied().collect();
                let psi = self.killing_spinor(&psi0, sign)?.with_label(format!("killing-spinor{s}{col}"));
                if first_spinor.is_none() {
                    first_spinor = Some(psi.clone());
                }
                out.push(CatalogEntry::new(
                    psi.label().to_string(),
                    psi,
                    KillingData::special(sign.value(), eps, 0),
                    &[Equation::Ks],
                ));
            }

            for p in 1..n {
                let first = basis(m).subsets(p + 1)[0];
                let rank = basis(m).rank_of(first);
                for col in 0..image.ncols().min(2) {
                    let mut coeffs = vec![C64::new(0.0, 0.0); basis(m).count(p + 1) * d_bar];
                    for (t, v) in image.column(col).iter().enumerate() {
                        coeffs[rank * d_bar + t] = *v;
                    }
                    let xi0 = SpinorForm::from_parts(m, p + 1, d_bar, coeffs);
                    let phi = self
                        .special_killing_form(&xi0, sign)?
                        .with_label(format!("special-killing{s}-p{p}-{col}"));
                    out.push(CatalogEntry::new(
                        phi.label().to_string(),
                        phi,
                        KillingData::special(sign.value(), eps, p),
                        &[Equation::Ksf, Equation::KsfPolar, Equation::Sksf, Equation::OperatorSystem],
                    ));
                }
            }

            if n >= 2 {
                if let Some(xi0) = self.primitive_ambient_form(sign, 2)? {
                    let phi = self
                        .special_killing_form(&xi0, sign)?
                        .with_label(format!("primitive-killing{s}-p1"));
                    out.push(CatalogEntry::new(
                        phi.label().to_string(),
                        phi,
                        KillingData::special(sign.value(), eps, 1),
                        &[Equation::Ksf, Equation::Sksf, Equation::Primksf],
                    ));
                }
            }

            if let (Some(alpha), Some(psi)) = (rotations.first(), first_spinor) {
                if n >= 2 {
                    let prod = Field::product(alpha, &psi).with_label(format!("product{s}"));
                    out.push(CatalogEntry::new(
                        prod.label().to_string(),
                        prod,
                        KillingData::special(sign.value(), eps, 1),
                        &[Equation::Ksf, Equation::KsfPolar, Equation::OperatorSystem],
                    ));
                }
            }
        }
        Ok(out)
    }

    /// A primitive constant ambient spinor-valued `q`-form in the image of
    /// `φ±`, from projecting `e^{12} ⊗ u` for image basis vectors `u`.
    pub fn primitive_ambient_form(&self, sign: Sign, q: usize) -> Result<Option<SpinorForm<C64>>> {
        let m = self.dim() + 1;
        let rep = self.cone.rep();
        let d_bar = rep.spinor_dim();
        let proj = primitive_projector(rep, q);
        let image = self.image_basis(sign);
        let rank = basis(m).rank_of(basis(m).subsets(q)[0]);
        for col in 0..image.ncols() {
            let mut coeffs = vec![C64::new(0.0, 0.0); basis(m).count(q) * d_bar];
            for (t, v) in image.column(col).iter().enumerate() {
                coeffs[rank * d_bar + t] = *v;
            }
            let prim = SpinorForm::from_parts(m, q, d_bar, proj.apply(&coeffs));
            let prim = self.project_to_image(sign, &prim);
            if prim.norm() > 1e-6 {
                return Ok(Some(prim));
            }
        }
        Ok(None)
    }
}

fn sign_str(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

fn kind_for(q: usize) -> crate::geometry::FieldKind {
    if q == 0 {
        crate::geometry::FieldKind::Spinor
    } else {
        crate::geometry::FieldKind::SpinorForm
    }
}

/// Determinant of a small jet matrix by cofactor expansion.
fn det<S: Scalar>(m: &[Vec<S>]) -> S {
    match m.len() {
        0 => S::one(),
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        k => {
            let mut acc = S::zero();
            for c in 0..k {
                let minor: Vec<Vec<S>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                    .collect();
                let term = m[0][c] * det(&minor);
                if c % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

/// `Ξ_I = s⁻¹ Σ_J det(R[J, I]) Ξ₀_J`.
fn transform_constant(xi0: &SpinorForm<C64>, r: &Mat<Jet>, s: &Mat<Jet>) -> SpinorForm<Jet> {
    let m = xi0.n();
    let q = xi0.degree();
    let d = xi0.spinor_dim();
    let Some(s_inv) = s.inverse() else {
        return SpinorForm::from_parts(m, q, d, vec![Jet::real(f64::NAN); xi0.len()]);
    };
    let subsets = basis(m).subsets(q);
    let idx: Vec<Vec<usize>> = subsets.iter().map(|&mask| crate::exterior::FormBasis::indices(mask)).collect();
    let mut coeffs = vec![Jet::zero(); xi0.len()];
    for (ti, target) in idx.iter().enumerate() {
        let mut acc = vec![Jet::zero(); d];
        for (si, source) in idx.iter().enumerate() {
            let c0 = &xi0.coeffs()[si * d..(si + 1) * d];
            if c0.iter().all(|v| v.norm() == 0.0) {
                continue;
            }
            let minor: Vec<Vec<Jet>> = source
                .iter()
                .map(|&a| target.iter().map(|&i| r[(a, i)]).collect())
                .collect();
            let w = det(&minor);
            for (o, &v) in acc.iter_mut().zip(c0) {
                *o += w.scale(v);
            }
        }
        let rotated = s_inv.mul_vec(&acc);
        coeffs[ti * d..(ti + 1) * d].copy_from_slice(&rotated);
    }
    SpinorForm::from_parts(m, q, d, coeffs)
}

/// A field with constant frame components.
pub fn constant_field(n: usize, degree: usize, spin: usize, coeffs: Vec<C64>) -> Field {
    let c: Vec<Jet> = coeffs.into_iter().map(Jet::from_value).collect();
    let eval: FieldFn = Arc::new(move |_: &[Jet]| SpinorForm::from_parts(n, degree, spin, c.clone()));
    Field::new("constant", kind_for(degree), degree, spin, eval)
}

/// A plain form with constant frame components.
pub fn constant_form(n: usize, degree: usize, coeffs: Vec<C64>) -> Field {
    let c: Vec<Jet> = coeffs.into_iter().map(Jet::from_value).collect();
    let eval: FieldFn = Arc::new(move |_: &[Jet]| SpinorForm::from_parts(n, degree, 1, c.clone()));
    Field::form("constant-form", degree, eval)
}

/// A catalog field with the equations it is certified against.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub label: String,
    pub field: Field,
    pub data: KillingData,
    pub checks: Vec<Equation>,
}

impl CatalogEntry {
    pub fn new(label: impl Into<String>, field: Field, data: KillingData, checks: &[Equation]) -> Self {
        CatalogEntry {
            label: label.into(),
            field,
            data,
            checks: checks.to_vec(),
        }
    }
}
