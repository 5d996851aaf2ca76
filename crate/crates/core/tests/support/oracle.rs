//! Independent discrete fixed-point oracle for the Picard solver.
//!
//! The oracle builds the product-integration weights by tanh-sinh
//! quadrature of kernel × hat function (× start weight), then solves the
//! nonlinear lower-triangular system node by node with bisection inside
//! Gauss–Seidel sweeps (nodes 1 and 2 are coupled through the extrapolated
//! start value).

use psifrac::solver::ProblemSpec;
use psifrac::{Expr, OrderPair, PsiFunction, PsiKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

/// ∫_lo^hi g(σ − lo, hi − σ) dσ by tanh-sinh; endpoint distances are formed
/// without cancellation so power singularities at either end are resolved.
pub fn tanh_sinh(lo: f64, hi: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let hw = 0.5 * (hi - lo);
    let step = 1.0 / 128.0;
    let mut sum = 0.0;
    let kmax = (4.5 / step) as i64;
    for k in -kmax..=kmax {
        let x = k as f64 * step;
        let u = std::f64::consts::FRAC_PI_2 * x.sinh();
        let cu = u.cosh();
        let weight = std::f64::consts::FRAC_PI_2 * x.cosh() / (cu * cu);
        let dl = hw * u.exp() / cu;
        let dr = hw * (-u).exp() / cu;
        if dl <= 0.0 || dr <= 0.0 {
            continue;
        }
        sum += weight * g(dl, dr);
    }
    sum * hw * step
}

pub struct Oracle {
    pub w: Vec<f64>,
}

pub fn oracle_solve(spec: &ProblemSpec, n: usize) -> Oracle {
    let psi = spec.psi();
    let mu = spec.order().mu();
    let rho = spec.rho();
    let s0 = psi.psi_a();
    let hs = (psi.psi_end() - s0) / n as f64;
    let s: Vec<f64> = (0..=n).map(|j| s0 + j as f64 * hs).collect();
    let t: Vec<f64> = (0..=n)
        .map(|j| {
            if j == n {
                psi.end()
            } else if j == 0 {
                psi.a()
            } else {
                psi.inverse(s[j]).unwrap()
            }
        })
        .collect();
    let weighted = rho < 1.0 && spec.f_depends_on_u();
    let data_exp = if weighted { rho - 1.0 } else { 0.0 };

    // W[j][i] = 1/Γ(μ) ∫ (s_j − σ)^{μ−1} (σ − s0)^{data_exp} φ_i(σ) dσ
    let mut weights = vec![vec![0.0; n + 1]; n + 1];
    for j in 1..=n {
        for m in 0..j {
            let (lo, hi) = (s[m], s[m + 1]);
            let kernel = |dl: f64, dr: f64| {
                ((s[j] - hi) + dr).powf(mu - 1.0) * ((lo - s0) + dl).powf(data_exp)
            };
            let left = tanh_sinh(lo, hi, |dl, dr| kernel(dl, dr) * dr / hs);
            let right = tanh_sinh(lo, hi, |dl, dr| kernel(dl, dr) * dl / hs);
            weights[j][m] += left / gamma(mu);
            weights[j][m + 1] += right / gamma(mu);
        }
    }

    let c = spec.delta() / gamma(rho);
    let scale: Vec<f64> = s.iter().map(|&x| (x - s0).powf(1.0 - rho)).collect();
    let u_of = |j: usize, w: f64| {
        if rho == 1.0 {
            w
        } else {
            (s[j] - s0).powf(rho - 1.0) * w
        }
    };
    let datum = |j: usize, w: &[f64]| -> f64 {
        if weighted {
            let d = |i: usize| spec.eval_f(t[i], u_of(i, w[i])).unwrap() * scale[i];
            if j == 0 {
                2.0 * d(1) - d(2)
            } else {
                d(j)
            }
        } else if j == 0 && rho < 1.0 {
            spec.eval_f(t[0], 0.0).unwrap()
        } else {
            spec.eval_f(t[j], u_of(j, w[j])).unwrap()
        }
    };
    let residual = |j: usize, w: &[f64]| -> f64 {
        let integral: f64 = (0..=j).map(|i| weights[j][i] * datum(i, w)).sum();
        w[j] - c - scale[j] * integral
    };

    let mut w = vec![c; n + 1];
    for _sweep in 0..200 {
        let mut change = 0.0f64;
        for j in 1..=n {
            let old = w[j];
            // residual is increasing in w[j] for a contractive problem
            let mut probe = w.clone();
            let mut eval = |x: f64| {
                probe[j] = x;
                residual(j, &probe)
            };
            let mut step = 1e-3 * old.abs().max(1.0);
            let (mut lo, mut hi) = (old - step, old + step);
            while eval(lo) > 0.0 {
                step *= 2.0;
                lo = old - step;
            }
            while eval(hi) < 0.0 {
                step *= 2.0;
                hi = old + step;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if eval(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            w[j] = 0.5 * (lo + hi);
            change = change.max((w[j] - old).abs());
        }
        if change < 1e-15 {
            break;
        }
    }
    Oracle { w }
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> ProblemSpec {
    let mu = rng.gen_range(0.2..0.8);
    let nu = if rng.gen_bool(0.25) {
        1.0
    } else {
        rng.gen_range(0.0..0.9)
    };
    let order = OrderPair::new(mu, nu).unwrap();
    let psi = match rng.gen_range(0..3) {
        0 => PsiFunction::identity(0.0, 1.0).unwrap(),
        1 => PsiFunction::new(PsiKind::Power(rng.gen_range(1.2..2.0)), 1.0, 2.0).unwrap(),
        _ => PsiFunction::new(PsiKind::Logarithm, 1.0, 3.0).unwrap(),
    };
    let span = psi.psi_end() - psi.psi_a();
    let rho = order.rho();
    let l_bound = gamma(mu + rho) / (2.0 * gamma(rho) * span.powf(mu));
    let amp = rng.gen_range(0.3..0.9) * l_bound;
    let b = rng.gen_range(-1.0..1.0);
    let f = match rng.gen_range(0..3) {
        0 => format!("{amp}*sin(u) + {b}*cos(2*t)"),
        1 => format!("{amp}*u/(1+u^2) + {b}*t"),
        _ => format!("{amp}*u + {b}"),
    };
    ProblemSpec::new(
        order,
        psi,
        rng.gen_range(-1.0..1.0),
        Expr::parse(&f, &["t", "u"]).unwrap(),
    )
    .unwrap()
    .with_lipschitz(amp)
    .unwrap()
}
