//! Second-order forward-mode automatic differentiation.
//!
//! A [`Jet`] carries a complex value together with its gradient and Hessian
//! with respect to up to [`MAX_VARS`] real chart coordinates. Arithmetic
//! propagates both orders exactly through the chain rule, so covariant
//! derivatives and their derivatives are free of truncation error.
//!
//! Quantities obtained with [`Jet::partial`] are only valid to first order:
//! their Hessian slot is cleared. Callers that need a second derivative of a
//! quantity must therefore compute it from seeds, not from partials.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Complex scalar used for coefficient tensors.
pub type C64 = Complex64;

/// Upper bound on the number of independent coordinates a jet tracks.
pub const MAX_VARS: usize = 8;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Scalars the tensor kernels are generic over: plain complex numbers or jets.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn constant(c: C64) -> Self;
    fn scale(self, c: C64) -> Self;
    fn value(&self) -> C64;
    fn recip(self) -> Self;
    /// Principal square root.
    fn sqrt(self) -> Self;

    fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    fn scale_re(self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// True when the scalar is identically zero, derivatives included.
    fn is_exact_zero(&self) -> bool;
}

impl Scalar for C64 {
    #[inline]
    fn zero() -> Self {
        ZERO
    }
    #[inline]
    fn constant(c: C64) -> Self {
        c
    }
    #[inline]
    fn scale(self, c: C64) -> Self {
        self * c
    }
    #[inline]
    fn value(&self) -> C64 {
        *self
    }
    #[inline]
    fn recip(self) -> Self {
        C64::new(1.0, 0.0) / self
    }
    #[inline]
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    #[inline]
    fn is_exact_zero(&self) -> bool {
        *self == ZERO
    }
}

/// Truncated Taylor polynomial of order two in `vars` real variables.
#[derive(Clone, Copy)]
pub struct Jet {
    vars: u8,
    v: C64,
    g: [C64; MAX_VARS],
    h: [[C64; MAX_VARS]; MAX_VARS],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.vars();
        f.debug_struct("Jet")
            .field("value", &self.v)
            .field("grad", &&self.g[..n])
            .finish()
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::zero()
    }
}

impl Jet {
    /// A jet with value `c` and vanishing derivatives.
    pub fn from_value(c: C64) -> Self {
        Jet {
            vars: 0,
            v: c,
            g: [ZERO; MAX_VARS],
            h: [[ZERO; MAX_VARS]; MAX_VARS],
        }
    }

    pub fn real(x: f64) -> Self {
        Self::from_value(C64::new(x, 0.0))
    }

    /// The coordinate function `x_index` evaluated at `x`, in `vars` variables.
    pub fn variable(x: f64, index: usize, vars: usize) -> Self {
        assert!(vars <= MAX_VARS, "jet supports at most {MAX_VARS} variables");
        assert!(index < vars);
        let mut j = Jet::real(x);
        j.vars = vars as u8;
        j.g[index] = C64::new(1.0, 0.0);
        j
    }

    /// Seeds every coordinate of `point` as an independent variable.
    pub fn seed(point: &[f64]) -> Vec<Jet> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet::variable(x, i, n))
            .collect()
    }

    #[inline]
    pub fn vars(&self) -> usize {
        self.vars as usize
    }

    #[inline]
    pub fn grad(&self, a: usize) -> C64 {
        self.g[a]
    }

    #[inline]
    pub fn hess(&self, a: usize, b: usize) -> C64 {
        self.h[a][b]
    }

    /// `∂_a` of this jet, valid to first order.
    pub fn partial(&self, a: usize) -> Jet {
        let n = self.vars();
        let mut out = Jet::from_value(self.g[a]);
        out.vars = self.vars;
        out.g[..n].copy_from_slice(&self.h[a][..n]);
        out
    }

    /// Drops the second-order part.
    pub fn first_order(&self) -> Jet {
        let mut out = *self;
        out.h = [[ZERO; MAX_VARS]; MAX_VARS];
        out
    }

    fn chain(&self, f0: C64, f1: C64, f2: C64) -> Jet {
        let n = self.vars();
        let mut out = Jet::from_value(f0);
        out.vars = self.vars;
        for a in 0..n {
            out.g[a] = f1 * self.g[a];
        }
        for a in 0..n {
            for b in 0..n {
                out.h[a][b] = f1 * self.h[a][b] + f2 * self.g[a] * self.g[b];
            }
        }
        out
    }

    /// Principal square root.
    pub fn sqrt(self) -> Jet {
        let s = self.v.sqrt();
        let f1 = 0.5 / s;
        let f2 = -0.25 / (s * self.v);
        self.chain(s, f1, f2)
    }

    pub fn powi(self, k: i32) -> Jet {
        let kf = k as f64;
        let f0 = self.v.powi(k);
        let f1 = self.v.powi(k - 1) * kf;
        let f2 = self.v.powi(k - 2) * (kf * (kf - 1.0));
        self.chain(f0, f1, f2)
    }

    pub fn conj(self) -> Jet {
        let n = self.vars();
        let mut out = self;
        out.v = self.v.conj();
        for a in 0..n {
            out.g[a] = self.g[a].conj();
            for b in 0..n {
                out.h[a][b] = self.h[a][b].conj();
            }
        }
        out
    }
}

#[inline]
fn merged_vars(a: &Jet, b: &Jet) -> u8 {
    a.vars.max(b.vars)
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, rhs: Jet) -> Jet {
        self += rhs;
        self
    }
}

impl AddAssign for Jet {
    #[inline]
    fn add_assign(&mut self, rhs: Jet) {
        self.vars = merged_vars(self, &rhs);
        let n = rhs.vars();
        self.v += rhs.v;
        for a in 0..n {
            self.g[a] += rhs.g[a];
            for b in 0..n {
                self.h[a][b] += rhs.h[a][b];
            }
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, rhs: Jet) -> Jet {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet {
    #[inline]
    fn sub_assign(&mut self, rhs: Jet) {
        self.vars = merged_vars(self, &rhs);
        let n = rhs.vars();
        self.v -= rhs.v;
        for a in 0..n {
            self.g[a] -= rhs.g[a];
            for b in 0..n {
                self.h[a][b] -= rhs.h[a][b];
            }
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: Jet) -> Jet {
        let vars = merged_vars(&self, &rhs);
        let n = vars as usize;
        let mut out = Jet::from_value(self.v * rhs.v);
        out.vars = vars;
        for a in 0..n {
            out.g[a] = self.v * rhs.g[a] + rhs.v * self.g[a];
        }
        for a in 0..n {
            for b in 0..n {
                out.h[a][b] = self.v * rhs.h[a][b]
                    + rhs.v * self.h[a][b]
                    + self.g[a] * rhs.g[b]
                    + rhs.g[a] * self.g[b];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: f64) -> Jet {
        self.scale_re(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, rhs: f64) -> Jet {
        self.v += rhs;
        self
    }
}

impl Scalar for Jet {
    #[inline]
    fn zero() -> Self {
        Jet::from_value(ZERO)
    }
    #[inline]
    fn constant(c: C64) -> Self {
        Jet::from_value(c)
    }
    #[inline]
    fn scale(mut self, c: C64) -> Self {
        let n = self.vars();
        self.v *= c;
        for a in 0..n {
            self.g[a] *= c;
            for b in 0..n {
                self.h[a][b] *= c;
            }
        }
        self
    }
    #[inline]
    fn value(&self) -> C64 {
        self.v
    }
    fn recip(self) -> Self {
        let r = C64::new(1.0, 0.0) / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    fn sqrt(self) -> Self {
        Jet::sqrt(self)
    }
    fn is_exact_zero(&self) -> bool {
        let n = self.vars();
        self.v == ZERO
            && self.g[..n].iter().all(|&c| c == ZERO)
            && self.h[..n].iter().all(|row| row[..n].iter().all(|&c| c == ZERO))
    }
}
