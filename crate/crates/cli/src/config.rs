//! Problem files: TOML with one problem per file.
//!
//! ```toml
//! [domain]
//! a = 0.0
//! T = 1.0
//!
//! [order]
//! mu = "1/3"          # numbers may also be constant expressions
//! nu = 1
//!
//! [psi]
//! kind = "identity"   # identity | power (rho = …) | log | expr (formula = …, derivative = …)
//!
//! [initial]
//! delta = 0
//!
//! [[impulses]]
//! t = 0.5
//! zeta = 0
//!
//! [rhs]
//! f = "9/(5*gamma(2/3))*t^(5/3) - t^4/16 + u^2/16"
//! exact = "t^2"       # optional, expression in t
//!
//! [lipschitz]         # optional; estimated on u_range (default [-r, r]) when L is absent
//! L = "1/8"
//! u_range = [-1, 1]
//!
//! [nonlocal]          # optional; g(u) = combiner(w(taus[0]), …) over x1, x2, …
//! taus = [1.0]
//! combiner = "x1/2"
//! Lg = 0.1
//!
//! [solver]
//! nodes_per_segment = 2048
//! tol = 1e-12
//! max_iter = 200
//! ```

use std::path::{Path, PathBuf};

use psifrac::solver::{ImpulseSchedule, NonlocalSpec, ProblemSpec, SolverOptions};
use psifrac::{Expr, OrderPair, PsiFunction, PsiKind};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Number {
    Value(f64),
    Expression(String),
}

impl Number {
    fn resolve(&self, field: &str) -> Result<f64, CliError> {
        let v = match self {
            Number::Value(v) => *v,
            Number::Expression(src) => Expr::parse(src, &[])
                .and_then(|e| e.eval(&[]))
                .map_err(|e| CliError::config(field, e))?,
        };
        if !v.is_finite() {
            return Err(CliError::config(field, format!("{v} is not finite")));
        }
        Ok(v)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    domain: RawDomain,
    order: RawOrder,
    psi: RawPsi,
    initial: RawInitial,
    #[serde(default)]
    impulses: Vec<RawImpulse>,
    rhs: RawRhs,
    lipschitz: Option<RawLipschitz>,
    nonlocal: Option<RawNonlocal>,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    a: Number,
    #[serde(rename = "T")]
    end: Number,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrder {
    mu: Number,
    nu: Number,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPsi {
    kind: String,
    rho: Option<Number>,
    formula: Option<String>,
    derivative: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    delta: Number,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImpulse {
    t: Number,
    zeta: Number,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRhs {
    f: String,
    exact: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLipschitz {
    #[serde(rename = "L")]
    l: Option<Number>,
    u_range: Option<[Number; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlocal {
    taus: Vec<Number>,
    combiner: String,
    #[serde(rename = "Lg")]
    lg: Number,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    nodes_per_segment: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
}

/// A validated problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub path: PathBuf,
    pub spec: ProblemSpec,
    pub exact: Option<Expr>,
    pub options: SolverOptions,
    pub u_range: Option<(f64, f64)>,
    /// hex SHA-256 of the file bytes
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::config("<file>", "problem file is not UTF-8"))?;
        let mut pf = Self::parse(&text)?;
        pf.path = path.to_path_buf();
        pf.sha256 = sha256_hex(&bytes);
        Ok(pf)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawFile = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|sp| key_near(text, sp.start))
                .unwrap_or_else(|| "<file>".to_string());
            CliError::config(field, e.message())
        })?;

        let a = raw.domain.a.resolve("domain.a")?;
        let end = raw.domain.end.resolve("domain.T")?;
        if !(a < end) {
            return Err(CliError::config(
                "domain.T",
                format!("T = {end} must exceed a = {a}"),
            ));
        }
        let mu = raw.order.mu.resolve("order.mu")?;
        let nu = raw.order.nu.resolve("order.nu")?;
        let order = OrderPair::new(mu, nu).map_err(|e| CliError::config("order", e))?;
        let psi = psi_from(&raw.psi, a, end)?;
        let delta = raw.initial.delta.resolve("initial.delta")?;
        let f = Expr::parse(&raw.rhs.f, &["t", "u"]).map_err(|e| CliError::config("rhs.f", e))?;
        let exact = raw
            .rhs
            .exact
            .as_deref()
            .map(|src| Expr::parse(src, &["t"]).map_err(|e| CliError::config("rhs.exact", e)))
            .transpose()?;

        let mut spec =
            ProblemSpec::new(order, psi, delta, f).map_err(|e| CliError::config("rhs.f", e))?;

        let mut times = Vec::with_capacity(raw.impulses.len());
        let mut jumps = Vec::with_capacity(raw.impulses.len());
        for (k, imp) in raw.impulses.iter().enumerate() {
            times.push(imp.t.resolve(&format!("impulses[{k}].t"))?);
            jumps.push(imp.zeta.resolve(&format!("impulses[{k}].zeta"))?);
        }
        let schedule =
            ImpulseSchedule::new(times, jumps).map_err(|e| CliError::config("impulses", e))?;
        spec = spec
            .with_impulses(schedule)
            .map_err(|e| CliError::config("impulses", e))?;

        let mut u_range = None;
        if let Some(lip) = &raw.lipschitz {
            if let Some(l) = &lip.l {
                let l = l.resolve("lipschitz.L")?;
                spec = spec
                    .with_lipschitz(l)
                    .map_err(|e| CliError::config("lipschitz.L", e))?;
            }
            if let Some([lo, hi]) = &lip.u_range {
                let lo = lo.resolve("lipschitz.u_range[0]")?;
                let hi = hi.resolve("lipschitz.u_range[1]")?;
                if !(lo < hi) {
                    return Err(CliError::config(
                        "lipschitz.u_range",
                        "lower bound must be below upper",
                    ));
                }
                u_range = Some((lo, hi));
            }
        }

        if let Some(nl) = &raw.nonlocal {
            let taus = nl
                .taus
                .iter()
                .enumerate()
                .map(|(i, t)| t.resolve(&format!("nonlocal.taus[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let names: Vec<String> = (1..=taus.len()).map(|i| format!("x{i}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let combiner = Expr::parse(&nl.combiner, &refs)
                .map_err(|e| CliError::config("nonlocal.combiner", e))?;
            let lg = nl.lg.resolve("nonlocal.Lg")?;
            let nonlocal = NonlocalSpec::new(taus, combiner, lg)
                .map_err(|e| CliError::config("nonlocal", e))?;
            spec = spec
                .with_nonlocal(nonlocal)
                .map_err(|e| CliError::config("nonlocal.taus", e))?;
        }

        let defaults = SolverOptions::default();
        let options = SolverOptions {
            nodes_per_segment: raw
                .solver
                .nodes_per_segment
                .unwrap_or(defaults.nodes_per_segment),
            tol: raw.solver.tol.unwrap_or(defaults.tol),
            max_iter: raw.solver.max_iter.unwrap_or(defaults.max_iter),
            exec: defaults.exec,
        };
        if options.nodes_per_segment < 16 {
            return Err(CliError::config(
                "solver.nodes_per_segment",
                "must be at least 16",
            ));
        }
        if !(options.tol > 0.0) {
            return Err(CliError::config("solver.tol", "must be positive"));
        }
        if options.max_iter == 0 {
            return Err(CliError::config("solver.max_iter", "must be at least 1"));
        }

        Ok(ProblemFile {
            path: PathBuf::new(),
            spec,
            exact,
            options,
            u_range,
            sha256: sha256_hex(text.as_bytes()),
        })
    }
}

fn psi_from(raw: &RawPsi, a: f64, end: f64) -> Result<PsiFunction, CliError> {
    let kind = match raw.kind.as_str() {
        "identity" => PsiKind::Identity,
        "power" => {
            let rho = raw
                .rho
                .as_ref()
                .ok_or_else(|| CliError::config("psi.rho", "power kind needs rho"))?
                .resolve("psi.rho")?;
            PsiKind::Power(rho)
        }
        "log" | "logarithm" => PsiKind::Logarithm,
        "expr" => {
            let src = raw
                .formula
                .as_deref()
                .ok_or_else(|| CliError::config("psi.formula", "expr kind needs a formula"))?;
            let formula =
                Expr::parse(src, &["t"]).map_err(|e| CliError::config("psi.formula", e))?;
            let derivative = raw
                .derivative
                .as_deref()
                .map(|d| Expr::parse(d, &["t"]).map_err(|e| CliError::config("psi.derivative", e)))
                .transpose()?;
            PsiKind::Expression {
                formula,
                derivative,
            }
        }
        other => {
            return Err(CliError::config(
                "psi.kind",
                format!("unknown kind `{other}` (identity, power, log, expr)"),
            ))
        }
    };
    PsiFunction::new(kind, a, end).map_err(|e| CliError::config("psi", e))
}

/// Best-effort dotted key for a byte offset, for parse errors.
fn key_near(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line_end = text[before.len()..]
        .find('\n')
        .map_or(text.len(), |i| before.len() + i);
    let table = text[..line_end]
        .lines()
        .rev()
        .find_map(|l| {
            let l = l.trim();
            l.strip_prefix("[[")
                .and_then(|r| r.strip_suffix("]]"))
                .or_else(|| l.strip_prefix('[').and_then(|r| r.strip_suffix(']')))
                .map(str::to_string)
        })
        .unwrap_or_default();
    let line = before.rsplit('\n').next().unwrap_or("");
    let line_full = text[before.len() - line.len()..]
        .lines()
        .next()
        .unwrap_or("");
    match line_full.split_once('=') {
        Some((key, _)) if !table.is_empty() => format!("{table}.{}", key.trim()),
        Some((key, _)) => key.trim().to_string(),
        None if !table.is_empty() => table,
        None => "<file>".to_string(),
    }
}
