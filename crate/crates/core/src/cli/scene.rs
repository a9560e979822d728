//! Scene files: which model, which fields, which checks.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clifford::Sign;
use crate::error::{Error, Result};
use crate::exterior::binomial;
use crate::geometry::{Equation, Expect, Field, FieldKind, KillingData};
use crate::jet::C64;
use crate::models::{constant_field, constant_form, Model, ModelSpec};
use crate::svforms::SpinorForm;

pub const SCENE_SCHEMA: &str = "spinform.scene/v1";

/// A coefficient given as a real number or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Real(f64),
    Complex([f64; 2]),
}

impl Coeff {
    pub fn value(self) -> C64 {
        match self {
            Coeff::Real(x) => C64::new(x, 0.0),
            Coeff::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// A named entry of the model's catalog.
    Catalog(String),
    /// Constant frame components, ordered by form basis index then spinor index.
    Constant {
        kind: FieldKind,
        #[serde(default)]
        degree: usize,
        coeffs: Vec<Coeff>,
    },
    /// A constant ambient spinor-valued `(p+1)`-form, extracted to the base.
    Ambient { degree: usize, coeffs: Vec<Coeff> },
    /// The rotational Killing 1-form of the ambient rotation in the `(j, k)` plane.
    Rotation([usize; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    #[serde(flatten)]
    pub source: Source,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub a: Option<Coeff>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub sign: Option<Sign>,
    #[serde(default)]
    pub expect: Option<Expect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub schema: String,
    pub model: ModelSpec,
    #[serde(default)]
    pub eps: Option<i8>,
    #[serde(default)]
    pub sign: Option<Sign>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
}

impl Scene {
    pub fn parse(text: &str) -> Result<Scene> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: {
                let full = e.to_string();
                full.rsplit_once(" at line ").map_or(full.clone(), |(m, _)| m.to_string())
            },
        })?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Scene> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.schema != SCENE_SCHEMA {
            return Err(Error::Validation(format!(
                "unsupported scene schema `{}`, expected `{SCENE_SCHEMA}`",
                self.schema
            )));
        }
        if let Some(eps) = self.eps {
            if eps != self.model.eps() {
                return Err(Error::Validation(format!(
                    "ε = {eps} does not match the model, whose flat cone has ε = {}",
                    self.model.eps()
                )));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
            }
        }
        if self.samples == Some(0) {
            return Err(Error::Validation("sample count must be positive".into()));
        }
        Ok(())
    }
}

/// A scene field resolved against its model.
#[derive(Clone, Debug)]
pub struct ResolvedField {
    pub label: String,
    pub field: Field,
    pub data: KillingData,
    pub default_checks: Vec<Equation>,
    pub sign: Option<Sign>,
    pub expect: Expect,
    /// The ambient constant behind an extracted field, when known.
    pub ambient: Option<SpinorForm<C64>>,
    pub checks: Vec<String>,
}

fn coeff_values(coeffs: &[Coeff], expected: usize) -> Result<Vec<C64>> {
    if coeffs.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: coeffs.len(),
        });
    }
    Ok(coeffs.iter().map(|c| c.value()).collect())
}

fn zero_data(p: usize) -> KillingData {
    KillingData {
        a: C64::new(0.0, 0.0),
        b: 0.0,
        p,
    }
}

fn default_equations(kind: FieldKind) -> Vec<Equation> {
    match kind {
        FieldKind::Form => vec![Equation::Kf, Equation::KfPolar, Equation::Skf],
        FieldKind::Spinor => vec![Equation::Ks],
        FieldKind::SpinorForm => vec![Equation::Ksf, Equation::KsfPolar, Equation::Sksf, Equation::OperatorSystem],
    }
}

pub fn resolve_field(model: &Model, spec: &FieldSpec, scene_sign: Option<Sign>) -> Result<ResolvedField> {
    let n = model.dim();
    let eps = model.eps() as f64;
    let d = model.chart().rep().spinor_dim();
    let sign = spec.sign.or(scene_sign);
    let (field, mut data, defaults, ambient) = match &spec.source {
        Source::Catalog(name) => {
            let catalog = model.killing_catalog()?;
            let Some(entry) = catalog.iter().find(|e| &e.label == name) else {
                let names: Vec<&str> = catalog.iter().map(|e| e.label.as_str()).collect();
                return Err(Error::Validation(format!(
                    "unknown catalog entry `{name}`; available: {}",
                    names.join(", ")
                )));
            };
            (entry.field.clone(), entry.data, entry.checks.clone(), None)
        }
        Source::Constant { kind, degree, coeffs } => {
            let degree = if *kind == FieldKind::Spinor { 0 } else { *degree };
            if degree > n {
                return Err(Error::Validation(format!("degree {degree} exceeds dimension {n}")));
            }
            let field = match kind {
                FieldKind::Form => constant_form(n, degree, coeff_values(coeffs, binomial(n, degree))?),
                _ => {
                    let f = constant_field(n, degree, d, coeff_values(coeffs, binomial(n, degree) * d)?);
                    Field::new("constant", *kind, degree, d, f.evaluator())
                }
            };
            (field, zero_data(degree), default_equations(*kind), None)
        }
        Source::Ambient { degree, coeffs } => {
            let Some(sign) = sign else {
                return Err(Error::Validation("ambient fields need a sign".into()));
            };
            let m = n + 1;
            if *degree > m {
                return Err(Error::Validation(format!("ambient degree {degree} exceeds {m}")));
            }
            let d_bar = model.cone().rep().spinor_dim();
            let values = coeff_values(coeffs, binomial(m, *degree) * d_bar)?;
            let xi0 = model.project_to_image(sign, &SpinorForm::from_parts(m, *degree, d_bar, values));
            if *degree == 0 {
                let psi = model.killing_spinor(xi0.coeffs(), sign)?;
                let data = KillingData::special(sign.value(), eps, 0);
                (psi, data, vec![Equation::Ks], Some(xi0))
            } else {
                let phi = model.special_killing_form(&xi0, sign)?;
                let data = KillingData::special(sign.value(), eps, degree - 1);
                (phi, data, default_equations(FieldKind::SpinorForm), Some(xi0))
            }
        }
        Source::Rotation([j, k]) => {
            let m = n + 1;
            if j >= &m || k >= &m || j == k {
                return Err(Error::Validation(format!("invalid rotation plane ({j}, {k}) for dimension {m}")));
            }
            let mut b = DMatrix::zeros(m, m);
            b[(*j, *k)] = 1.0;
            b[(*k, *j)] = -1.0;
            let alpha = model.rotational_killing_form(&b)?;
            (
                alpha,
                KillingData::special(1.0, eps, 1),
                default_equations(FieldKind::Form),
                None,
            )
        }
    };
    if let Some(a) = spec.a {
        data.a = a.value();
    }
    if let Some(b) = spec.b {
        data.b = b;
    }
    let label = spec.label.clone().unwrap_or_else(|| match &spec.source {
        Source::Catalog(name) => name.clone(),
        Source::Constant { .. } => format!("constant-{}", kind_tag(field.kind())),
        Source::Ambient { degree, .. } => format!("ambient-q{degree}"),
        Source::Rotation([j, k]) => format!("rotation-{j}{k}"),
    });
    Ok(ResolvedField {
        field: field.with_label(label.clone()),
        label,
        data,
        default_checks: defaults,
        sign,
        expect: spec.expect.unwrap_or(Expect::Zero),
        ambient,
        checks: spec.checks.clone(),
    })
}

fn kind_tag(kind: FieldKind) -> &'static str {
    match kind {
        FieldKind::Form => "form",
        FieldKind::Spinor => "spinor",
        FieldKind::SpinorForm => "spinor-form",
    }
}
