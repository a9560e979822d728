use std::fmt;
use std::sync::Arc;

use crate::clifford::{CliffordRep, Metric};
use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar, C64};
use crate::linalg::Mat;
use crate::svforms::{CovariantJet, SpinorForm};

/// Frame components `F[(i, a)] = X_i^a(x)` as jets.
pub type FrameFn = Arc<dyn Fn(&[Jet]) -> Mat<Jet> + Send + Sync>;
/// Connection coefficients as jets; must be valid to first order.
pub type ConnectionFn = Arc<dyn Fn(&[Jet]) -> Result<Connection> + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// `ω_i^{jk}` at one point.
#[derive(Clone, Debug)]
pub struct Connection {
    n: usize,
    w: Vec<Jet>,
}

impl Connection {
    pub fn zeros(n: usize) -> Self {
        Connection {
            n,
            w: vec![Jet::zero(); n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Jet {
        self.w[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Jet) {
        self.w[(i * self.n + j) * self.n + k] = v;
    }

    /// `max |ω_i^{jk} + ω_i^{kj}|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.get(i, j, k) + self.get(i, k, j)).value().norm());
                }
            }
        }
        worst
    }

    pub fn max_abs_difference(&self, other: &Connection) -> f64 {
        self.w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| (a.value() - b.value()).norm())
            .fold(0.0, f64::max)
    }
}

/// Sampling region: a ball in the first `ball_dims` coordinates followed by
/// one interval per remaining coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRegion {
    pub ball_dims: usize,
    pub radius: f64,
    pub intervals: Vec<(f64, f64)>,
}

impl SampleRegion {
    pub fn ball(dims: usize, radius: f64) -> Self {
        SampleRegion {
            ball_dims: dims,
            radius,
            intervals: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.ball_dims + self.intervals.len()
    }
}

/// A coordinate chart with an orthonormal frame.
#[derive(Clone)]
pub struct FramedChart {
    name: String,
    rep: CliffordRep,
    frame: FrameFn,
    connection: Option<ConnectionFn>,
    domain: DomainFn,
    region: SampleRegion,
}

impl fmt::Debug for FramedChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FramedChart")
            .field("name", &self.name)
            .field("metric", self.rep.metric())
            .field("explicit_connection", &self.connection.is_some())
            .field("region", &self.region)
            .finish()
    }
}

impl FramedChart {
    /// A chart whose connection is recovered from the frame on demand.
    pub fn new(
        name: impl Into<String>,
        rep: CliffordRep,
        frame: FrameFn,
        domain: DomainFn,
        region: SampleRegion,
    ) -> Self {
        FramedChart {
            name: name.into(),
            rep,
            frame,
            connection: None,
            domain,
            region,
        }
    }

    pub fn with_connection(mut self, connection: ConnectionFn) -> Self {
        self.connection = Some(connection);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.rep.n()
    }

    pub fn metric(&self) -> &Metric {
        self.rep.metric()
    }

    pub fn rep(&self) -> &CliffordRep {
        &self.rep
    }

    pub fn region(&self) -> &SampleRegion {
        &self.region
    }

    pub fn has_explicit_connection(&self) -> bool {
        self.connection.is_some()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && (self.domain)(x)
    }

    pub fn frame_fn(&self) -> FrameFn {
        self.frame.clone()
    }

    pub fn domain_fn(&self) -> DomainFn {
        self.domain.clone()
    }

    pub fn frame_at(&self, x: &[Jet]) -> Mat<Jet> {
        (self.frame)(x)
    }

    /// Connection at `x`, explicit if one was supplied.
    pub fn connection_at(&self, x: &[Jet]) -> Result<Connection> {
        match &self.connection {
            Some(c) => c(x),
            None => {
                let frame = self.frame_at(x);
                let coframe = inverse_frame(&frame, x)?;
                Ok(koszul(self.metric(), &frame, &coframe))
            }
        }
    }

    /// Everything needed to differentiate fields at `x`.
    pub fn local(&self, x: &[f64]) -> Result<LocalFrame> {
        if !self.contains(x) {
            return Err(Error::Domain(x.to_vec()));
        }
        self.local_jets(Jet::seed(x))
    }

    /// As [`Self::local`] for coordinates that are already jets.
    pub fn local_jets(&self, x: Vec<Jet>) -> Result<LocalFrame> {
        let frame = self.frame_at(&x);
        let coframe = inverse_frame(&frame, &x)?;
        let omega = match &self.connection {
            Some(c) => c(&x)?,
            None => koszul(self.metric(), &frame, &coframe),
        };
        Ok(LocalFrame {
            metric: self.metric().clone(),
            x,
            frame,
            coframe,
            omega,
        })
    }
}

fn inverse_frame(frame: &Mat<Jet>, x: &[Jet]) -> Result<Mat<Jet>> {
    frame
        .inverse()
        .ok_or_else(|| Error::SingularFrame(x.iter().map(|j| j.value().re).collect()))
}

/// `c_ij^k` with `[X_i, X_j] = Σ_k c_ij^k X_k`.
fn structure_constants(frame: &Mat<Jet>, coframe: &Mat<Jet>) -> Vec<Jet> {
    let n = frame.rows();
    let mut dframe = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for b in 0..n {
            for a in 0..n {
                // ∂_a X_i^b
                dframe.push(frame[(i, b)].partial(a));
            }
        }
    }
    let d = |i: usize, b: usize, a: usize| dframe[(i * n + b) * n + a];
    let mut c = vec![Jet::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let bracket: Vec<Jet> = (0..n)
                .map(|b| {
                    let mut v = Jet::zero();
                    for a in 0..n {
                        v += frame[(i, a)] * d(j, b, a) - frame[(j, a)] * d(i, b, a);
                    }
                    v
                })
                .collect();
            for k in 0..n {
                let mut v = Jet::zero();
                for (b, &br) in bracket.iter().enumerate() {
                    v += br * coframe[(b, k)];
                }
                c[(i * n + j) * n + k] = v;
            }
        }
    }
    c
}

/// Levi-Civita connection of an orthonormal frame via the Koszul formula.
fn koszul(metric: &Metric, frame: &Mat<Jet>, coframe: &Mat<Jet>) -> Connection {
    let n = frame.rows();
    let c = structure_constants(frame, coframe);
    // lowered structure constants g([X_i, X_j], X_k)
    let low = |i: usize, j: usize, k: usize| c[(i * n + j) * n + k].scale_re(metric.sign(k));
    let mut omega = Connection::zeros(n);
    for i in 0..n {
        for m in 0..n {
            for k in 0..n {
                let gamma = (low(i, m, k) - low(m, k, i) + low(k, i, m)).scale_re(0.5);
                omega.set(i, m, k, gamma.scale_re(metric.sign(m) * metric.sign(k)));
            }
        }
    }
    omega
}

/// Recovers the Levi-Civita connection from the frame and attaches it explicitly.
pub fn connection_from_frame(chart: &FramedChart) -> FramedChart {
    let frame = chart.frame.clone();
    let metric = chart.metric().clone();
    let conn: ConnectionFn = Arc::new(move |x: &[Jet]| {
        let f = frame(x);
        let cof = inverse_frame(&f, x)?;
        Ok(koszul(&metric, &f, &cof))
    });
    chart.clone().with_connection(conn)
}

/// Frame, coframe and connection at one point, all as jets.
#[derive(Clone, Debug)]
pub struct LocalFrame {
    metric: Metric,
    x: Vec<Jet>,
    frame: Mat<Jet>,
    coframe: Mat<Jet>,
    omega: Connection,
}

impl LocalFrame {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn coords(&self) -> &[Jet] {
        &self.x
    }

    pub fn point(&self) -> Vec<f64> {
        self.x.iter().map(|j| j.value().re).collect()
    }

    pub fn frame(&self) -> &Mat<Jet> {
        &self.frame
    }

    pub fn omega(&self) -> &Connection {
        &self.omega
    }

    /// `c_ij^k` values, indexed `(i·n + j)·n + k`.
    pub fn structure_constants(&self) -> Vec<C64> {
        structure_constants(&self.frame, &self.coframe)
            .iter()
            .map(|c| c.value())
            .collect()
    }

    /// `X_i(v)` for every component; valid to first order.
    pub fn along(&self, v: &[Jet], i: usize) -> Vec<Jet> {
        let n = self.dim();
        v.iter()
            .map(|c| {
                let mut acc = Jet::zero();
                for a in 0..n {
                    acc += self.frame[(i, a)] * c.partial(a);
                }
                acc
            })
            .collect()
    }

    /// `∇_{X_i}` of a form (`spin = None`) or spinor-valued form.
    pub fn covd(&self, phi: &SpinorForm<Jet>, i: usize, spin: Option<&CliffordRep>) -> SpinorForm<Jet> {
        let n = self.dim();
        let p = phi.degree();
        let mut out = SpinorForm::from_parts(n, p, phi.spinor_dim(), self.along(phi.coeffs(), i));
        if p > 0 {
            // ∇e^k = −Σ_m g_mm ω_i^{mk} e^m acting as a derivation
            for k in 0..n {
                let inner = phi.interior_e(k);
                for m in 0..n {
                    let w = self.omega.get(i, m, k);
                    if w.is_exact_zero() {
                        continue;
                    }
                    out = out.add(&inner.wedge_e(m).scale(w.scale_re(-self.metric.sign(m))));
                }
            }
        }
        if let Some(rep) = spin {
            for k in 0..n {
                let gk = phi.gamma(rep, k);
                for j in 0..n {
                    let w = self.omega.get(i, j, k);
                    if j == k || w.is_exact_zero() {
                        continue;
                    }
                    // ¼ ω_i^{jk} γ_j γ_k Φ
                    out = out.add(&gk.gamma(rep, j).scale(w.scale_re(0.25)));
                }
            }
        }
        out
    }

    /// `{∇_{X_i}Φ}_i`.
    pub fn nabla(&self, phi: &SpinorForm<Jet>, spin: Option<&CliffordRep>) -> CovariantJet<Jet> {
        CovariantJet::new((0..self.dim()).map(|i| self.covd(phi, i, spin)).collect())
    }

    /// `∇_{X_i}V` in frame components.
    pub fn covd_vector(&self, v: &[Jet], i: usize) -> Vec<Jet> {
        let n = self.dim();
        let mut out = self.along(v, i);
        for (k, o) in out.iter_mut().enumerate() {
            for (m, &vm) in v.iter().enumerate() {
                *o += vm * self.omega.get(i, m, k).scale_re(self.metric.sign(m));
            }
        }
        debug_assert_eq!(out.len(), n);
        out
    }

    /// `max_{ijk} |∇_{X_i}X_j − ∇_{X_j}X_i − [X_i, X_j]|` in frame components.
    pub fn torsion_residual(&self) -> f64 {
        let n = self.dim();
        let c = structure_constants(&self.frame, &self.coframe);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = self.omega.get(i, j, k).scale_re(self.metric.sign(j))
                        - self.omega.get(j, i, k).scale_re(self.metric.sign(i))
                        - c[(i * n + j) * n + k];
                    worst = worst.max(t.value().norm());
                }
            }
        }
        worst
    }
}
