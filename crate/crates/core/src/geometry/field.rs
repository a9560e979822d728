use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::chart::{FramedChart, LocalFrame};
use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::jet::{Jet, C64};
use crate::svforms::{exterior_part, interior_part, twistor_part, CovariantJet, SpinorForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Form,
    Spinor,
    SpinorForm,
}

pub type FieldFn = Arc<dyn Fn(&[Jet]) -> SpinorForm<Jet> + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// A form, spinor or spinor-valued form in frame components.
///
/// Plain forms are stored as spinor-valued forms with a one-dimensional
/// value space and are differentiated without the spin connection.
#[derive(Clone)]
pub struct Field {
    label: String,
    kind: FieldKind,
    degree: usize,
    spin: usize,
    eval: FieldFn,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("degree", &self.degree)
            .field("spin", &self.spin)
            .finish()
    }
}

impl Field {
    pub fn new(label: impl Into<String>, kind: FieldKind, degree: usize, spin: usize, eval: FieldFn) -> Self {
        let spin = if kind == FieldKind::Form { 1 } else { spin };
        let degree = if kind == FieldKind::Spinor { 0 } else { degree };
        Field {
            label: label.into(),
            kind,
            degree,
            spin,
            eval,
        }
    }

    pub fn form(label: impl Into<String>, degree: usize, eval: FieldFn) -> Self {
        Self::new(label, FieldKind::Form, degree, 1, eval)
    }

    pub fn spinor(label: impl Into<String>, spin: usize, eval: FieldFn) -> Self {
        Self::new(label, FieldKind::Spinor, 0, spin, eval)
    }

    pub fn spinor_form(label: impl Into<String>, degree: usize, spin: usize, eval: FieldFn) -> Self {
        Self::new(label, FieldKind::SpinorForm, degree, spin, eval)
    }

    /// `α ⊗ Ψ` for a form field and a spinor field.
    pub fn product(alpha: &Field, psi: &Field) -> Field {
        assert_eq!(alpha.kind, FieldKind::Form, "left factor must be a form");
        assert_eq!(psi.kind, FieldKind::Spinor, "right factor must be a spinor");
        let (a, s) = (alpha.eval.clone(), psi.eval.clone());
        let eval: FieldFn = Arc::new(move |x: &[Jet]| {
            let form = a(x);
            let spinor = s(x);
            let psi = spinor.coeffs();
            let spin = psi.len();
            let coeffs = form
                .coeffs()
                .iter()
                .flat_map(|&c| psi.iter().map(move |&v| c * v))
                .collect();
            SpinorForm::from_parts(form.n(), form.degree(), spin, coeffs)
        });
        Field::spinor_form(format!("{}*{}", alpha.label, psi.label), alpha.degree, psi.spin, eval)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn spinor_dim(&self) -> usize {
        self.spin
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn eval(&self, x: &[Jet]) -> SpinorForm<Jet> {
        (self.eval)(x)
    }

    pub fn evaluator(&self) -> FieldFn {
        self.eval.clone()
    }

    pub fn uses_spin(&self) -> bool {
        self.kind != FieldKind::Form
    }
}

/// A vector field in frame components.
#[derive(Clone)]
pub struct VectorField {
    label: String,
    eval: VectorFn,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField").field("label", &self.label).finish()
    }
}

impl VectorField {
    pub fn new(label: impl Into<String>, eval: VectorFn) -> Self {
        VectorField {
            label: label.into(),
            eval,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[Jet]) -> Vec<Jet> {
        (self.eval)(x)
    }
}

/// A field with its covariant derivative at one point.
#[derive(Clone, Debug)]
pub struct FieldJet {
    pub local: LocalFrame,
    pub value: SpinorForm<Jet>,
    pub nabla: CovariantJet<Jet>,
    spin_rep: Option<CliffordRep>,
}

impl FieldJet {
    /// Evaluates `field` and `∇field` at `x`.
    pub fn at(chart: &FramedChart, field: &Field, x: &[f64]) -> Result<Self> {
        let local = chart.local(x)?;
        Self::from_local(chart, field, local)
    }

    pub fn from_local(chart: &FramedChart, field: &Field, local: LocalFrame) -> Result<Self> {
        let value = field.eval(local.coords());
        let expected = if field.uses_spin() { chart.rep().spinor_dim() } else { 1 };
        if value.spinor_dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: value.spinor_dim(),
            });
        }
        if value.n() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: value.n(),
            });
        }
        let spin_rep = field.uses_spin().then(|| chart.rep().clone());
        let nabla = local.nabla(&value, spin_rep.as_ref());
        Ok(FieldJet {
            local,
            value,
            nabla,
            spin_rep,
        })
    }

    pub fn degree(&self) -> usize {
        self.value.degree()
    }

    /// `dΦ` as a jet, valid to first order.
    pub fn d(&self) -> SpinorForm<Jet> {
        exterior_part(&self.nabla)
    }

    /// `∇_{X_i}` of another field value at the same point, such as `dΦ`.
    pub fn covd_of(&self, phi: &SpinorForm<Jet>, i: usize) -> SpinorForm<C64> {
        self.local.covd(phi, i, self.spin_rep.as_ref()).values()
    }

    pub fn value_c(&self) -> SpinorForm<C64> {
        self.value.values()
    }

    pub fn nabla_c(&self) -> CovariantJet<C64> {
        CovariantJet::new(self.nabla.slices.iter().map(|s| s.values()).collect())
    }
}

/// `(δΦ, dΦ, DΦ, TΦ)` from a covariant jet.
#[derive(Clone, Debug)]
pub struct InvariantOperators {
    pub codifferential: SpinorForm<C64>,
    pub exterior: SpinorForm<C64>,
    pub dirac: SpinorForm<C64>,
    pub twistor: CovariantJet<C64>,
}

pub fn invariant_operators(rep: &CliffordRep, nabla: &CovariantJet<C64>) -> InvariantOperators {
    let mut dirac = SpinorForm::zero_with(nabla.n(), nabla.degree(), rep.spinor_dim());
    for (i, wi) in nabla.slices.iter().enumerate() {
        dirac = dirac.add(&wi.gamma(rep, i).scale_real(rep.metric().sign(i)));
    }
    InvariantOperators {
        codifferential: interior_part(rep.metric(), nabla),
        exterior: exterior_part(nabla),
        dirac,
        twistor: twistor_part(rep, nabla),
    }
}
