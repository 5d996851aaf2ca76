//! The monotone weight function Ψ that parameterises every operator.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Number of probe points used to audit a Ψ at construction.
pub const PROBE_POINTS: usize = 256;

#[derive(Debug, Clone)]
pub enum PsiKind {
    Identity,
    /// Ψ(t) = t^ρ
    Power(f64),
    /// Ψ(t) = ln t
    Logarithm,
    /// Ψ given by an expression in `t`, optionally with an explicit derivative.
    Expression {
        formula: Expr,
        derivative: Option<Expr>,
    },
}

/// A validated, strictly increasing C¹ function on a closed interval [a, T].
#[derive(Debug, Clone)]
pub struct PsiFunction {
    kind: PsiKind,
    a: f64,
    end: f64,
    psi_a: f64,
    psi_end: f64,
}

impl PsiFunction {
    /// Builds Ψ on `[a, end]` and audits it on [`PROBE_POINTS`] probe points:
    /// values must increase strictly, Ψ' must be positive, and the inverse
    /// must round-trip to 1e-10.
    pub fn new(kind: PsiKind, a: f64, end: f64) -> Result<Self> {
        if !a.is_finite() || !end.is_finite() || !(a < end) {
            return Err(Error::Domain(format!(
                "psi domain needs a < T, got [{a}, {end}]"
            )));
        }
        if let PsiKind::Power(rho) = kind {
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(Error::Domain(format!("power psi needs rho > 0, got {rho}")));
            }
        }
        let mut psi = PsiFunction {
            kind,
            a,
            end,
            psi_a: 0.0,
            psi_end: 0.0,
        };
        psi.psi_a = psi.raw_eval(a)?;
        psi.psi_end = psi.raw_eval(end)?;
        psi.audit()?;
        Ok(psi)
    }

    pub fn identity(a: f64, end: f64) -> Result<Self> {
        Self::new(PsiKind::Identity, a, end)
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    /// Lower terminal a.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Upper end T.
    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn psi_a(&self) -> f64 {
        self.psi_a
    }

    pub fn psi_end(&self) -> f64 {
        self.psi_end
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, PsiKind::Identity)
    }

    fn probe(&self, i: usize) -> f64 {
        let n = PROBE_POINTS;
        if i == n - 1 {
            self.end
        } else {
            self.a + (self.end - self.a) * i as f64 / (n - 1) as f64
        }
    }

    fn audit(&self) -> Result<()> {
        let mut values = Vec::with_capacity(PROBE_POINTS);
        for i in 0..PROBE_POINTS {
            let t = self.probe(i);
            let v = self.raw_eval(t)?;
            if !v.is_finite() {
                return Err(Error::NonMonotone(format!("psi({t}) = {v} is not finite")));
            }
            if values.last().is_some_and(|&p| !(v > p)) {
                return Err(Error::NonMonotone(format!(
                    "psi is not strictly increasing near t = {t}"
                )));
            }
            values.push(v);
        }
        for (i, &v) in values.iter().enumerate() {
            let t = self.probe(i);
            let d = self.deriv(t)?;
            if !d.is_finite() {
                return Err(Error::NonMonotone(format!("psi'({t}) = {d} is not finite")));
            }
            let back = self.inverse(v)?;
            if (back - t).abs() > 1e-10 * t.abs().max(1.0) {
                return Err(Error::NonMonotone(format!(
                    "psi inverse does not round-trip at t = {t} (got {back})"
                )));
            }
        }
        Ok(())
    }

    fn domain_slack(&self) -> f64 {
        1e-13 * self.a.abs().max(self.end.abs()).max(1.0)
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let eps = self.domain_slack();
        if !(t >= self.a - eps && t <= self.end + eps) {
            return Err(Error::Domain(format!(
                "t = {t} outside [{}, {}]",
                self.a, self.end
            )));
        }
        Ok(())
    }

    fn raw_eval(&self, t: f64) -> Result<f64> {
        Ok(match &self.kind {
            PsiKind::Identity => t,
            PsiKind::Power(rho) => t.powf(*rho),
            PsiKind::Logarithm => t.ln(),
            PsiKind::Expression { formula, .. } => formula.eval(&[t])?,
        })
    }

    /// Ψ(t).
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        if t == self.a {
            return Ok(self.psi_a);
        }
        if t == self.end {
            return Ok(self.psi_end);
        }
        self.raw_eval(t)
    }

    /// Ψ'(t); expression kinds without an explicit derivative use a central
    /// difference with step 1e-6·max(1, |t|).
    pub fn deriv(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let d = match &self.kind {
            PsiKind::Identity => 1.0,
            PsiKind::Power(rho) => rho * t.powf(rho - 1.0),
            PsiKind::Logarithm => 1.0 / t,
            PsiKind::Expression {
                derivative: Some(d),
                ..
            } => d.eval(&[t])?,
            PsiKind::Expression { formula, .. } => {
                let h = 1e-6 * t.abs().max(1.0);
                match (formula.eval(&[t + h]), formula.eval(&[t - h])) {
                    (Ok(hi), Ok(lo)) => (hi - lo) / (2.0 * h),
                    // one-sided when the formula is undefined past an endpoint
                    (Ok(hi), Err(_)) => (hi - formula.eval(&[t])?) / h,
                    (Err(_), Ok(lo)) => (formula.eval(&[t])? - lo) / h,
                    (Err(e), Err(_)) => return Err(e),
                }
            }
        };
        if !(d > 0.0) {
            return Err(Error::NonMonotone(format!(
                "psi'({t}) = {d} is not positive"
            )));
        }
        Ok(d)
    }

    /// Ψ⁻¹(s) for s in [Ψ(a), Ψ(T)].
    pub fn inverse(&self, s: f64) -> Result<f64> {
        let eps = 1e-13 * self.psi_a.abs().max(self.psi_end.abs()).max(1.0);
        if !(s >= self.psi_a - eps && s <= self.psi_end + eps) {
            return Err(Error::Domain(format!(
                "s = {s} outside [{}, {}]",
                self.psi_a, self.psi_end
            )));
        }
        if s <= self.psi_a {
            return Ok(self.a);
        }
        if s >= self.psi_end {
            return Ok(self.end);
        }
        let t = match &self.kind {
            PsiKind::Identity => s,
            PsiKind::Power(rho) => s.powf(1.0 / rho),
            PsiKind::Logarithm => s.exp(),
            PsiKind::Expression { .. } => self.solve_inverse(s)?,
        };
        Ok(t.clamp(self.a, self.end))
    }

    fn solve_inverse(&self, s: f64) -> Result<f64> {
        let (mut lo, mut hi) = (self.a, self.end);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.raw_eval(mid)? < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        let mut resid = self.raw_eval(t)? - s;
        for _ in 0..4 {
            let d = self.deriv(t)?;
            let cand = (t - resid / d).clamp(self.a, self.end);
            let r = self.raw_eval(cand)? - s;
            if r.abs() < resid.abs() {
                t = cand;
                resid = r;
            } else {
                break;
            }
        }
        Ok(t)
    }
}

impl fmt::Display for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PsiKind::Identity => write!(f, "identity"),
            PsiKind::Power(rho) => write!(f, "power(rho={rho})"),
            PsiKind::Logarithm => write!(f, "log"),
            PsiKind::Expression { formula, .. } => write!(f, "expr({formula})"),
        }?;
        write!(f, " on [{}, {}]", self.a, self.end)
    }
}
