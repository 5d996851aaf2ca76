use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::picard::trace_at;
use crate::solver::problem::ProblemSpec;

/// Nodes uniform in Ψ-space on every segment (t_k, t_{k+1}], plus the node a.
///
/// Global index 0 is a; segment k owns indices k·N+1 ..= (k+1)·N, so the
/// impulse instant t_k is the last node of segment k−1.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    per_segment: usize,
    t: Vec<f64>,
    s: Vec<f64>,
}

impl Grid {
    pub fn new(spec: &ProblemSpec, per_segment: usize) -> Result<Self> {
        if per_segment < 2 {
            return Err(Error::Grid(format!(
                "need at least 2 nodes per segment, got {per_segment}"
            )));
        }
        let psi = spec.psi();
        let mut bounds_t = vec![spec.a()];
        bounds_t.extend_from_slice(spec.impulses().times());
        bounds_t.push(spec.end());
        let bounds_s: Vec<f64> = bounds_t
            .iter()
            .map(|&t| psi.eval(t))
            .collect::<Result<_>>()?;
        let mut t = Vec::with_capacity((bounds_t.len() - 1) * per_segment + 1);
        let mut s = Vec::with_capacity(t.capacity());
        t.push(bounds_t[0]);
        s.push(bounds_s[0]);
        for k in 0..bounds_t.len() - 1 {
            let (lo, hi) = (bounds_s[k], bounds_s[k + 1]);
            let h = (hi - lo) / per_segment as f64;
            for j in 1..per_segment {
                let sj = lo + j as f64 * h;
                s.push(sj);
                t.push(psi.inverse(sj)?);
            }
            // segment ends are the exact impulse instants
            s.push(hi);
            t.push(bounds_t[k + 1]);
        }
        if s.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Grid(
                "segments too short to resolve in psi-space".into(),
            ));
        }
        Ok(Grid { per_segment, t, s })
    }

    pub fn per_segment(&self) -> usize {
        self.per_segment
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn segment_count(&self) -> usize {
        (self.len() - 1) / self.per_segment
    }

    /// Segment owning global node `j` (node 0 is reported as segment 0).
    pub fn segment_of(&self, j: usize) -> usize {
        if j == 0 {
            0
        } else {
            (j - 1) / self.per_segment
        }
    }

    /// Global index of the impulse instant t_k, k = 1..=m.
    pub fn impulse_index(&self, k: usize) -> usize {
        k * self.per_segment
    }

    /// Global index range of segment k (node a included in segment 0).
    pub fn segment_range(&self, k: usize) -> std::ops::Range<usize> {
        let start = if k == 0 { 0 } else { k * self.per_segment + 1 };
        start..(k + 1) * self.per_segment + 1
    }
}

/// Converged (or intermediate) iterate on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub(crate) grid: Grid,
    pub(crate) rho: f64,
    pub(crate) w: Vec<f64>,
    pub(crate) coefficients: Vec<f64>,
    pub(crate) iterations: usize,
    pub(crate) update_norms: Vec<f64>,
    pub(crate) ratios: Vec<f64>,
}

/// One segment's slice of a [`GridSolution`].
#[derive(Debug, Clone, Serialize)]
pub struct SegmentView<'a> {
    pub index: usize,
    pub t: &'a [f64],
    pub psi_t: &'a [f64],
    pub w: &'a [f64],
    pub u: Vec<f64>,
}

impl GridSolution {
    /// Wraps weighted values `w` on `grid`, e.g. to check a solution read
    /// back from disk. Iteration bookkeeping is left empty.
    pub fn from_weighted(
        grid: Grid,
        rho: f64,
        w: Vec<f64>,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if w.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} weighted values for {} nodes",
                w.len(),
                grid.len()
            )));
        }
        if coefficients.len() != grid.segment_count() {
            return Err(Error::Grid(format!(
                "{} coefficients for {} segments",
                coefficients.len(),
                grid.segment_count()
            )));
        }
        Ok(GridSolution {
            grid,
            rho,
            w,
            coefficients,
            iterations: 0,
            update_norms: Vec::new(),
            ratios: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// w = (Ψ(t) − Ψ(a))^{1−ϱ}u, finite at every node.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn u(&self) -> Vec<f64> {
        (0..self.w.len()).map(|j| self.u_at(j)).collect()
    }

    /// u at node j; at a this is the limit, ±∞ when ϱ < 1 and w(a) ≠ 0.
    pub fn u_at(&self, j: usize) -> f64 {
        u_from_w(self.rho, self.grid.s[j] - self.grid.s[0], self.w[j])
    }

    /// Coefficient of Ω on each segment in the last Picard step.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn update_norms(&self) -> &[f64] {
        &self.update_norms
    }

    pub fn final_update_norm(&self) -> f64 {
        self.update_norms.last().copied().unwrap_or(0.0)
    }

    /// ||w_{n+1} − w_n|| / ||w_n − w_{n−1}|| per iteration.
    pub fn contraction_ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn segments(&self) -> Vec<SegmentView<'_>> {
        (0..self.grid.segment_count())
            .map(|k| {
                let r = self.grid.segment_range(k);
                SegmentView {
                    index: k,
                    t: &self.grid.t[r.clone()],
                    psi_t: &self.grid.s[r.clone()],
                    w: &self.w[r.clone()],
                    u: r.map(|j| self.u_at(j)).collect(),
                }
            })
            .collect()
    }

    /// Weighted trace w(τ), linear in Ψ-space within the segment holding τ;
    /// an impulse instant gives the left value.
    pub fn trace(&self, psi_tau: f64) -> Result<f64> {
        trace_at(&self.grid, self.rho, &self.w, &self.coefficients, psi_tau)
    }
}

pub(crate) fn u_from_w(rho: f64, ds: f64, w: f64) -> f64 {
    if rho == 1.0 {
        w
    } else if ds > 0.0 {
        ds.powf(rho - 1.0) * w
    } else if w == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(w)
    }
}

pub(crate) fn w_from_u(rho: f64, ds: f64, u: f64) -> f64 {
    if rho == 1.0 {
        u
    } else {
        ds.powf(1.0 - rho) * u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::fracops::special::gamma;
    use crate::fracops::OrderPair;
    use crate::psi::{PsiFunction, PsiKind};
    use crate::solver::problem::ImpulseSchedule;

    fn spec(psi: PsiFunction, times: Vec<f64>) -> ProblemSpec {
        let n = times.len();
        ProblemSpec::new(
            OrderPair::new(0.5, 0.5).unwrap(),
            psi,
            1.0,
            Expr::parse("0", &["t", "u"]).unwrap(),
        )
        .unwrap()
        .with_impulses(ImpulseSchedule::new(times, vec![0.1; n]).unwrap())
        .unwrap()
    }

    #[test]
    fn layout_and_impulse_nodes() {
        let psi = PsiFunction::new(PsiKind::Logarithm, 1.0, 3.0).unwrap();
        let g = Grid::new(&spec(psi.clone(), vec![1.5, 2.0]), 8).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g.segment_count(), 3);
        assert_eq!(g.t()[8], 1.5);
        assert_eq!(g.t()[16], 2.0);
        assert_eq!(g.t()[24], 3.0);
        assert_eq!(g.segment_of(8), 0);
        assert_eq!(g.segment_of(9), 1);
        assert_eq!(g.segment_range(0), 0..9);
        assert_eq!(g.segment_range(2), 17..25);
        for j in 0..g.len() {
            assert!((psi.eval(g.t()[j]).unwrap() - g.s()[j]).abs() < 1e-12);
        }
        // uniform in psi within a segment
        let h = g.s()[10] - g.s()[9];
        assert!((g.s()[12] - g.s()[11] - h).abs() < 1e-14);
    }

    #[test]
    fn trace_uses_right_limit_after_impulse() {
        let g = Grid::new(
            &spec(PsiFunction::identity(0.0, 1.0).unwrap(), vec![0.5]),
            4,
        )
        .unwrap();
        let rho = 0.75;
        let c = vec![1.0, 1.1];
        let w: Vec<f64> = (0..g.len())
            .map(|j| c[g.segment_of(j)] / gamma(rho))
            .collect();
        let sol = GridSolution::from_weighted(g, rho, w, c).unwrap();
        assert_eq!(sol.trace(0.5).unwrap(), 1.0 / gamma(rho));
        assert!((sol.trace(0.55).unwrap() - 1.1 / gamma(rho)).abs() < 1e-15);
        assert!((sol.trace(0.1).unwrap() - 1.0 / gamma(rho)).abs() < 1e-15);
        assert!(sol.trace(1.5).is_err());
    }

    #[test]
    fn u_limits_at_a() {
        assert_eq!(u_from_w(0.5, 0.0, 2.0), f64::INFINITY);
        assert_eq!(u_from_w(0.5, 0.0, 0.0), 0.0);
        assert_eq!(u_from_w(1.0, 0.0, 2.0), 2.0);
        assert!((u_from_w(0.5, 0.25, 1.0) - 2.0).abs() < 1e-15);
        assert!((w_from_u(0.5, 0.25, 2.0) - 1.0).abs() < 1e-15);
    }
}
