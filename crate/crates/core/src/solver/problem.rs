use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fracops::OrderPair;
use crate::psi::PsiFunction;

/// Impulse instants t_1 < … < t_m inside (a, T) and the jumps
/// Δ I^{1−ϱ;Ψ}u(t_k) = ζ_k of the weighted primitive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImpulseSchedule {
    times: Vec<f64>,
    jumps: Vec<f64>,
}

impl ImpulseSchedule {
    pub fn new(times: Vec<f64>, jumps: Vec<f64>) -> Result<Self> {
        if times.len() != jumps.len() {
            return Err(Error::Problem(format!(
                "{} impulse times but {} jumps",
                times.len(),
                jumps.len()
            )));
        }
        if let Some(k) = jumps.iter().position(|z| !z.is_finite()) {
            return Err(Error::Problem(format!("jump {} is not finite", k + 1)));
        }
        if let Some(k) = (1..times.len()).find(|&k| !(times[k] > times[k - 1])) {
            return Err(Error::Problem(format!(
                "impulse times must be strictly increasing (t_{} = {} after {})",
                k + 1,
                times[k],
                times[k - 1]
            )));
        }
        Ok(ImpulseSchedule { times, jumps })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Nonlocal initial functional g(u) = G(w(τ_1), …, w(τ_p)) on the weighted
/// traces w = (Ψ − Ψ(a))^{1−ϱ}u.
#[derive(Debug, Clone)]
pub struct NonlocalSpec {
    taus: Vec<f64>,
    combiner: Expr,
    lipschitz_lg: f64,
}

impl NonlocalSpec {
    /// `combiner` must be declared over exactly p variables, bound
    /// positionally to w(τ_1), …, w(τ_p).
    pub fn new(taus: Vec<f64>, combiner: Expr, lipschitz_lg: f64) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::Problem(
                "nonlocal functional needs at least one point".into(),
            ));
        }
        if combiner.variables().len() != taus.len() {
            return Err(Error::Problem(format!(
                "combiner declares {} variables for {} evaluation points",
                combiner.variables().len(),
                taus.len()
            )));
        }
        if !(lipschitz_lg > 0.0 && lipschitz_lg.is_finite()) {
            return Err(Error::Problem(format!(
                "Lg must be positive, got {lipschitz_lg}"
            )));
        }
        Ok(NonlocalSpec {
            taus,
            combiner,
            lipschitz_lg,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn combiner(&self) -> &Expr {
        &self.combiner
    }

    pub fn lipschitz_lg(&self) -> f64 {
        self.lipschitz_lg
    }

    /// G applied to the given traces.
    pub fn combine(&self, traces: &[f64]) -> Result<f64> {
        self.combiner.eval(traces)
    }
}

/// ^H D^{μ,ν;Ψ}u = f(t,u) on [a,T] minus the impulse instants, with
/// I^{1−ϱ;Ψ}u(a) = δ (or δ − g(u) in the nonlocal case).
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    order: OrderPair,
    psi: PsiFunction,
    delta: f64,
    f: Expr,
    impulses: ImpulseSchedule,
    nonlocal: Option<NonlocalSpec>,
    lipschitz: Option<f64>,
}

impl ProblemSpec {
    /// The interval is the domain of `psi`; `f` must be declared over
    /// `["t", "u"]` in that order.
    pub fn new(order: OrderPair, psi: PsiFunction, delta: f64, f: Expr) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::Problem(format!("delta must be finite, got {delta}")));
        }
        if f.variables() != ["t", "u"] {
            return Err(Error::Problem(format!(
                "f must be declared over (t, u), got ({})",
                f.variables().join(", ")
            )));
        }
        Ok(ProblemSpec {
            order,
            psi,
            delta,
            f,
            impulses: ImpulseSchedule::none(),
            nonlocal: None,
            lipschitz: None,
        })
    }

    pub fn with_impulses(mut self, impulses: ImpulseSchedule) -> Result<Self> {
        let (a, end) = (self.a(), self.end());
        if let Some(&t) = impulses.times().iter().find(|&&t| !(t > a && t < end)) {
            return Err(Error::Problem(format!(
                "impulse time {t} is not inside ({a}, {end})"
            )));
        }
        self.impulses = impulses;
        Ok(self)
    }

    pub fn with_nonlocal(mut self, nonlocal: NonlocalSpec) -> Result<Self> {
        let (a, end) = (self.a(), self.end());
        if let Some(&t) = nonlocal.taus().iter().find(|&&t| !(t > a && t <= end)) {
            return Err(Error::Problem(format!(
                "nonlocal point {t} is not in ({a}, {end}]"
            )));
        }
        self.nonlocal = Some(nonlocal);
        Ok(self)
    }

    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Problem(format!(
                "Lipschitz constant must be positive, got {l}"
            )));
        }
        self.lipschitz = Some(l);
        Ok(self)
    }

    pub fn without_nonlocal(mut self) -> Self {
        self.nonlocal = None;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn order(&self) -> &OrderPair {
        &self.order
    }

    pub fn rho(&self) -> f64 {
        self.order.rho()
    }

    pub fn psi(&self) -> &PsiFunction {
        &self.psi
    }

    pub fn a(&self) -> f64 {
        self.psi.a()
    }

    pub fn end(&self) -> f64 {
        self.psi.end()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn impulses(&self) -> &ImpulseSchedule {
        &self.impulses
    }

    pub fn nonlocal(&self) -> Option<&NonlocalSpec> {
        self.nonlocal.as_ref()
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn segment_count(&self) -> usize {
        self.impulses.len() + 1
    }

    pub fn eval_f(&self, t: f64, u: f64) -> Result<f64> {
        self.f.eval(&[t, u])
    }

    /// True when f reads u, i.e. the problem is not a plain quadrature.
    pub fn f_depends_on_u(&self) -> bool {
        self.f.references("u")
    }
}

/// δ + Σ_{i≤k} ζ_i, the coefficient of Ω on segment k.
pub fn homogeneous_coefficient(spec: &ProblemSpec, k: usize) -> Result<f64> {
    coefficient(spec, k, 0.0)
}

/// (δ − g) + Σ_{i≤k} ζ_i; with g = 0 this is bitwise the impulsive value.
pub(crate) fn coefficient(spec: &ProblemSpec, k: usize, g: f64) -> Result<f64> {
    if k > spec.impulses.len() {
        return Err(Error::Problem(format!(
            "segment {k} out of range (0..={})",
            spec.impulses.len()
        )));
    }
    Ok(spec.impulses.jumps()[..k]
        .iter()
        .fold(spec.delta - g, |c, z| c + z))
}
