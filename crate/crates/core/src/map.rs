//! Even unimodal maps `f = h ∘ Q_t` on `[-1, 1]`.
//!
//! `Q_t(x) = -|x|^t` carries the critical point; `h` is an increasing
//! diffeomorphism of `[-1, 0]` with `h(-1) = -1` and `h(0) = f(0) = c₁`.
//! Every map therefore satisfies `f(±1) = -1` and has its maximum at 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Maximal polynomial degree accepted for the factor `h`.
pub const MAX_FACTOR_DEGREE: usize = 8;

/// Number of samples used to check `h' > 0` on `[-1, 0]`.
const MONOTONICITY_SAMPLES: usize = 1025;

/// Value and first two derivatives of a real function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn identity(x: f64) -> Self {
        Jet { value: x, d1: 1.0, d2: 0.0 }
    }

    /// Jet of `outer ∘ inner` given the jet of `outer` at `inner.value`.
    pub fn then(self, outer: Jet) -> Jet {
        Jet {
            value: outer.value,
            d1: outer.d1 * self.d1,
            d2: outer.d2 * self.d1 * self.d1 + outer.d1 * self.d2,
        }
    }

    /// Nonlinearity `d2 / d1`.
    pub fn nonlinearity(&self) -> f64 {
        self.d2 / self.d1
    }
}

/// The diffeomorphic factor `h` on `[-1, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// `h(y) = -1 + Σ_{j≥1} b_j (y + 1)^j`; `shifted[j - 1] = b_j`.
    ///
    /// Storing the expansion about `y = -1` makes `h(-1) = -1` exact.
    Polynomial { shifted: Vec<f64> },
    /// `h(y) = -1 + (1 + c)(e^{a(y+1)} - 1)/(e^a - 1)`, constant nonlinearity `a`.
    Exponential { critical_value: f64, rate: f64 },
}

impl Factor {
    /// `h(y) = c + (1 + c) y`.
    pub fn affine(critical_value: f64) -> Self {
        Factor::Polynomial { shifted: vec![1.0 + critical_value] }
    }

    /// Builds a polynomial factor from coefficients in powers of `y`
    /// (`coeffs[i]` multiplies `y^i`). The constant of the expansion about
    /// `-1` must already equal `-1` to within `1e-9`; it is then pinned.
    pub fn from_power_coeffs(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_FACTOR_DEGREE + 1 {
            return Err(Error::ParameterOutOfRange(format!(
                "factor needs between 1 and {} coefficients, got {}",
                MAX_FACTOR_DEGREE + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::ParameterOutOfRange("non-finite factor coefficient".into()));
        }
        // Taylor shift: b_j = Σ_{i≥j} a_i C(i, j) (-1)^{i-j}.
        let n = coeffs.len();
        let mut shifted = vec![0.0; n];
        for (j, b) in shifted.iter_mut().enumerate() {
            let mut binom = 1.0;
            for i in j..n {
                if i > j {
                    binom = binom * i as f64 / (i - j) as f64;
                }
                let sign = if (i - j) % 2 == 0 { 1.0 } else { -1.0 };
                *b += coeffs[i] * binom * sign;
            }
        }
        if (shifted[0] + 1.0).abs() > 1e-9 {
            return Err(Error::ParameterOutOfRange(format!(
                "factor must satisfy h(-1) = -1, got {}",
                shifted[0]
            )));
        }
        shifted.remove(0);
        if shifted.is_empty() {
            shifted.push(0.0);
        }
        Ok(Factor::Polynomial { shifted })
    }

    /// Coefficients in powers of `y`, inverse of [`Factor::from_power_coeffs`].
    pub fn power_coeffs(&self) -> Option<Vec<f64>> {
        let Factor::Polynomial { shifted } = self else {
            return None;
        };
        let mut full = Vec::with_capacity(shifted.len() + 1);
        full.push(-1.0);
        full.extend_from_slice(shifted);
        // a_i = Σ_{j≥i} b_j C(j, i).
        let n = full.len();
        let mut out = vec![0.0; n];
        for (i, a) in out.iter_mut().enumerate() {
            let mut binom = 1.0;
            for j in i..n {
                if j > i {
                    binom = binom * j as f64 / (j - i) as f64;
                }
                *a += full[j] * binom;
            }
        }
        Some(out)
    }

    /// `(h, h', h'')` at `y`.
    pub fn jet(&self, y: f64) -> Jet {
        match self {
            Factor::Polynomial { shifted } => {
                let s = y + 1.0;
                // Horner on Σ b_j s^j with derivatives carried along.
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for &b in shifted.iter().rev() {
                    d2 = d2 * s + 2.0 * d1;
                    d1 = d1 * s + v;
                    v = v * s + b;
                }
                // The loop built p(s) = Σ b_j s^{j-1}; h = -1 + s p(s).
                Jet {
                    value: -1.0 + s * v,
                    d1: v + s * d1,
                    d2: 2.0 * d1 + s * d2,
                }
            }
            Factor::Exponential { critical_value, rate } => {
                let a = *rate;
                let scale = (1.0 + critical_value) / a.exp_m1();
                let e = (a * (y + 1.0)).exp();
                Jet {
                    value: -1.0 + scale * (a * (y + 1.0)).exp_m1(),
                    d1: scale * a * e,
                    d2: scale * a * a * e,
                }
            }
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Factor::Polynomial { shifted } if shifted.iter().skip(1).all(|&b| b == 0.0))
    }
}

/// Evaluation interface shared by base maps and rescaled iterates.
///
/// Methods are unchecked: callers guarantee `|x| <= 1 + ε_dom`.
pub trait Unimodal {
    /// Critical exponent `t`.
    fn exponent(&self) -> f64;

    fn value(&self, x: f64) -> f64;

    fn jet(&self, x: f64) -> Jet;

    fn critical_value(&self) -> f64 {
        self.value(0.0)
    }

    /// `N(h)(y) = h''(y)/h'(y)` for the factor `h` with `f = h ∘ Q_t`.
    ///
    /// The default recovers `h(y) = f((-y)^{1/t})` and differentiates
    /// through the chain rule; base maps override it with exact data.
    fn factor_nonlinearity(&self, y: f64, tol: &Tolerances) -> Result<f64> {
        if !(-1.0..=0.0).contains(&y) || y == 0.0 {
            return Err(Error::Domain { x: y });
        }
        let t = self.exponent();
        let u = -y;
        let x = u.powf(1.0 / t);
        let jet = self.jet(x);
        let dx = -(1.0 / t) * u.powf(1.0 / t - 1.0);
        let ddx = (1.0 / t) * (1.0 / t - 1.0) * u.powf(1.0 / t - 2.0);
        let dh = jet.d1 * dx;
        if dh.abs() < tol.derivative {
            return Err(Error::DegenerateDerivative { x: y, derivative: dh });
        }
        Ok(jet.d2 / jet.d1 * dx + ddx / dx)
    }
}

/// `|x|^t`, exact at 0; integral exponents use repeated multiplication.
pub fn abs_pow(x: f64, t: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return 0.0;
    }
    if t.fract() == 0.0 && t <= 64.0 {
        a.powi(t as i32)
    } else {
        (t * a.ln()).exp()
    }
}

/// An even unimodal map `f = h ∘ Q_t` in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalMap {
    exponent: f64,
    factor: Factor,
    label: Option<String>,
}

impl UnimodalMap {
    /// Validates `t > 1`, `h(-1) = -1`, `0 < h(0) <= 1` and `h' > 0`.
    pub fn new(exponent: f64, factor: Factor) -> Result<Self> {
        if !(exponent > 1.0 && exponent.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!(
                "critical exponent must exceed 1, got {exponent}"
            )));
        }
        if let Factor::Exponential { critical_value, rate } = factor {
            if !(rate.is_finite() && rate != 0.0) {
                return Err(Error::ParameterOutOfRange(format!("exponential rate {rate}")));
            }
            if !(critical_value > 0.0 && critical_value <= 1.0) {
                return Err(Error::ParameterOutOfRange(format!(
                    "critical value must lie in (0, 1], got {critical_value}"
                )));
            }
        }
        let c = factor.jet(0.0).value;
        if !(c > 0.0 && c <= 1.0 + 1e-15) {
            return Err(Error::ParameterOutOfRange(format!(
                "critical value h(0) must lie in (0, 1], got {c}"
            )));
        }
        for i in 0..MONOTONICITY_SAMPLES {
            let y = -1.0 + i as f64 / (MONOTONICITY_SAMPLES - 1) as f64;
            let d = factor.jet(y).d1;
            if !(d > 0.0) {
                return Err(Error::ParameterOutOfRange(format!(
                    "factor is not increasing: h'({y}) = {d}"
                )));
            }
        }
        Ok(UnimodalMap { exponent, factor, label: None })
    }

    /// The canonical family `f_c(x) = c - (1 + c)|x|^t` (affine factor).
    pub fn affine(exponent: f64, critical_value: f64) -> Result<Self> {
        if !(critical_value > 0.0 && critical_value <= 1.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "critical value must lie in (0, 1], got {critical_value}"
            )));
        }
        UnimodalMap::new(exponent, Factor::affine(critical_value))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn factor(&self) -> &Factor {
        &self.factor
    }

    fn check_domain(&self, x: f64, tol: &Tolerances) -> Result<()> {
        if x.abs() > 1.0 + tol.domain || x.is_nan() {
            return Err(Error::Domain { x });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, tol: &Tolerances) -> Result<f64> {
        self.check_domain(x, tol)?;
        Ok(self.value(x))
    }

    pub fn deriv(&self, x: f64, tol: &Tolerances) -> Result<f64> {
        self.check_domain(x, tol)?;
        Ok(self.jet(x).d1)
    }

    /// Second derivative; at `x = 0` the one-sided limit is returned
    /// (`-∞` when `t < 2`).
    pub fn deriv2(&self, x: f64, tol: &Tolerances) -> Result<f64> {
        self.check_domain(x, tol)?;
        Ok(self.jet(x).d2)
    }

    /// `[x, f(x), …, f^n(x)]`.
    pub fn orbit(&self, x: f64, n: usize, tol: &Tolerances) -> Result<Vec<f64>> {
        self.check_domain(x, tol)?;
        let mut out = Vec::with_capacity(n + 1);
        out.push(x);
        let mut z = x;
        for iterate in 1..=n {
            z = self.value(z);
            if !(z.abs() <= 1.0 + tol.domain) {
                return Err(Error::Escape { iterate, value: z });
            }
            out.push(z);
        }
        Ok(out)
    }

    /// `f^n(x)` without domain checks.
    pub fn iterate(&self, x: f64, n: u64) -> f64 {
        let mut z = x;
        for _ in 0..n {
            z = self.value(z);
        }
        z
    }

    /// Jet of `f^n` at `x`.
    pub fn iterate_jet(&self, x: f64, n: u64) -> Jet {
        let mut acc = Jet::identity(x);
        for _ in 0..n {
            acc = acc.then(self.jet(acc.value));
        }
        acc
    }

    /// Nonlinearity `N(f)(x) = f''(x)/f'(x)`, singular at the critical point.
    pub fn nonlinearity(&self, x: f64) -> f64 {
        let q = -abs_pow(x, self.exponent);
        let qd = -self.exponent * x.signum() * abs_pow(x, self.exponent - 1.0);
        let h = self.factor.jet(q);
        h.nonlinearity() * qd + (self.exponent - 1.0) / x
    }

    /// `N(h)(y)` from the exact factor data.
    pub fn factor_nonlinearity_exact(&self, y: f64, tol: &Tolerances) -> Result<f64> {
        if !(-1.0 - tol.domain..=tol.domain).contains(&y) {
            return Err(Error::Domain { x: y });
        }
        let jet = self.factor.jet(y);
        if jet.d1.abs() < tol.derivative {
            return Err(Error::DegenerateDerivative { x: y, derivative: jet.d1 });
        }
        Ok(jet.d2 / jet.d1)
    }

    /// JSON descriptor for this map.
    pub fn descriptor(&self) -> MapDescriptor {
        if self.factor.is_affine() {
            MapDescriptor::Affine { t: self.exponent, c: self.critical_value(), label: self.label.clone() }
        } else {
            let h_coeffs = self.factor.power_coeffs().unwrap_or_default();
            MapDescriptor::Polynomial { t: self.exponent, h_coeffs, label: self.label.clone() }
        }
    }
}

impl Unimodal for UnimodalMap {
    fn exponent(&self) -> f64 {
        self.exponent
    }

    fn value(&self, x: f64) -> f64 {
        self.factor.jet(-abs_pow(x, self.exponent)).value
    }

    fn jet(&self, x: f64) -> Jet {
        let t = self.exponent;
        let a = x.abs();
        let (q, qd, qdd) = if a == 0.0 {
            let qdd = if t == 2.0 {
                -2.0
            } else if t > 2.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            };
            (0.0, 0.0, qdd)
        } else {
            (
                -abs_pow(a, t),
                -t * x.signum() * abs_pow(a, t - 1.0),
                -t * (t - 1.0) * abs_pow(a, t - 2.0),
            )
        };
        let h = self.factor.jet(q);
        let d2 = if qdd.is_infinite() { qdd } else { h.d2 * qd * qd + h.d1 * qdd };
        Jet { value: h.value, d1: h.d1 * qd, d2 }
    }

    fn factor_nonlinearity(&self, y: f64, tol: &Tolerances) -> Result<f64> {
        self.factor_nonlinearity_exact(y, tol)
    }
}

/// Parameters of the class `𝒦(t, N, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassKParams {
    pub exponent: f64,
    pub max_return_time: usize,
    pub nonlinearity_bound: f64,
}

impl ClassKParams {
    pub fn new(exponent: f64, max_return_time: usize, nonlinearity_bound: f64) -> Result<Self> {
        if !(exponent > 1.0) || max_return_time < 2 || !(nonlinearity_bound > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "class K needs t > 1, N >= 2, K > 0 (got {exponent}, {max_return_time}, {nonlinearity_bound})"
            )));
        }
        Ok(ClassKParams { exponent, max_return_time, nonlinearity_bound })
    }
}

/// JSON map descriptor: `{"t", "h_coeffs", "label"}` or the affine
/// shorthand `{"t", "c"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapDescriptor {
    Affine {
        t: f64,
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Polynomial {
        t: f64,
        h_coeffs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl MapDescriptor {
    pub fn build(&self) -> Result<UnimodalMap> {
        let (map, label) = match self {
            MapDescriptor::Affine { t, c, label } => (UnimodalMap::affine(*t, *c)?, label),
            MapDescriptor::Polynomial { t, h_coeffs, label } => {
                (UnimodalMap::new(*t, Factor::from_power_coeffs(h_coeffs)?)?, label)
            }
        };
        Ok(match label {
            Some(l) => map.with_label(l.clone()),
            None => map,
        })
    }
}
