//! Exact linear programming over the rationals.
//!
//! Two-phase tableau simplex with Bland's rule: every pivot is an exact
//! rational operation, so termination is guaranteed combinatorially and no
//! epsilon tuning exists anywhere. Variables are free; the solver splits
//! them into nonnegative parts internally.

// Elimination loops index several rows of the same matrix at once;
// the iterator rewrites clippy suggests do not borrow-check.
#![allow(clippy::needless_range_loop)]

use num_traits::{One, Signed, Zero};

use crate::linalg::{dot, Vector};
use crate::rational::Rational;

/// Outcome of maximizing `objective . x` over `{x : normal_i . x <= bound_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vector },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// rows x (cols + 1); last column is the RHS.
    rows: Vec<Vector>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pv = self.rows[row][col].clone();
        for c in 0..=self.cols {
            self.rows[row][c] = &self.rows[row][c] / &pv;
        }
        for r in 0..self.rows.len() {
            if r != row && !self.rows[r][col].is_zero() {
                let f = self.rows[r][col].clone();
                for c in 0..=self.cols {
                    let t = &self.rows[row][c] * &f;
                    self.rows[r][c] -= t;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost` (a cost per column) with Bland's anti-cycling rule.
    /// Returns false when the objective is unbounded above.
    fn optimize(&mut self, cost: &[Rational], allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            // Reduced costs: c_j - c_B . (column j of the current tableau).
            let cb: Vec<Rational> = self.basis.iter().map(|&b| cost[b].clone()).collect();
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j].clone();
                for (i, cbi) in cb.iter().enumerate() {
                    if !cbi.is_zero() {
                        red -= cbi * &self.rows[i][j];
                    }
                }
                if red.is_positive() {
                    entering = Some(j);
                    break; // Bland: smallest improving index
                }
            }
            let Some(j) = entering else {
                return true;
            };
            // Ratio test; ties broken by smallest basis index (Bland).
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][j].is_positive() {
                    let ratio = self.rhs(i) / &self.rows[i][j];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((i, _)) = leave else {
                return false;
            };
            self.pivot(i, j);
        }
    }
}

/// Maximizes `objective . x` subject to `normal . x <= bound` for each
/// constraint, with `x` free in R^n.
pub fn lp_maximize_free(constraints: &[(Vector, Rational)], objective: &[Rational]) -> LpOutcome {
    let n = objective.len();
    let m = constraints.len();

    // Columns: x+ (n) | x- (n) | slack (m) | artificial (m, lazily used).
    let cols = 2 * n + 2 * m;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut any_artificial = false;

    for (i, (normal, bound)) in constraints.iter().enumerate() {
        debug_assert_eq!(normal.len(), n);
        let flip = bound.is_negative();
        let sgn = if flip {
            -Rational::one()
        } else {
            Rational::one()
        };
        let mut row = vec![Rational::zero(); cols + 1];
        for k in 0..n {
            row[k] = &normal[k] * &sgn;
            row[n + k] = -(&normal[k] * &sgn);
        }
        row[2 * n + i] = sgn.clone();
        row[cols] = bound * &sgn;
        if flip {
            row[2 * n + m + i] = Rational::one();
            basis.push(2 * n + m + i);
            any_artificial = true;
        } else {
            basis.push(2 * n + i);
        }
        rows.push(row);
    }

    let mut tab = Tableau { rows, basis, cols };

    if any_artificial {
        // Phase 1: maximize minus the sum of artificials.
        let mut cost1 = vec![Rational::zero(); cols];
        for j in 2 * n + m..cols {
            cost1[j] = -Rational::one();
        }
        let ok = tab.optimize(&cost1, &|_| true);
        debug_assert!(ok, "phase 1 objective is bounded by construction");
        let attained: Rational = tab
            .basis
            .iter()
            .enumerate()
            .map(|(i, &b)| &cost1[b] * tab.rhs(i))
            .fold(Rational::zero(), |a, v| a + v);
        if attained.is_negative() {
            return LpOutcome::Infeasible;
        }
        // Pivot any artificial still basic (at zero) out of the basis.
        for i in 0..tab.rows.len() {
            if tab.basis[i] >= 2 * n + m {
                if let Some(j) = (0..2 * n + m).find(|&j| !tab.rows[i][j].is_zero()) {
                    tab.pivot(i, j);
                }
                // A row with no eligible pivot is redundant; its artificial
                // stays basic at zero and is harmlessly frozen below.
            }
        }
    }

    // Phase 2: the real objective, artificial columns barred.
    let mut cost2 = vec![Rational::zero(); cols];
    for k in 0..n {
        cost2[k] = objective[k].clone();
        cost2[n + k] = -objective[k].clone();
    }
    let limit = 2 * n + m;
    if !tab.optimize(&cost2, &move |j| j < limit) {
        return LpOutcome::Unbounded;
    }

    let mut point = vec![Rational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            point[b] += tab.rhs(i);
        } else if b < 2 * n {
            point[b - n] -= tab.rhs(i);
        }
    }
    let value = dot(objective, &point);
    LpOutcome::Optimal { value, point }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn c(normal: &[i64], bound: i64) -> (Vector, Rational) {
        (normal.iter().map(|&x| rat(x)).collect(), rat(bound))
    }

    #[test]
    fn square_corner() {
        // Unit square [0,1]^2, maximize x + y.
        let cons = vec![c(&[1, 0], 1), c(&[-1, 0], 0), c(&[0, 1], 1), c(&[0, -1], 0)];
        match lp_maximize_free(&cons, &[rat(1), rat(1)]) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, rat(2));
                assert_eq!(point, vec![rat(1), rat(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hexagon_edge_optimum() {
        // {|x|<=1, |y|<=1, |x+y|<=1}, maximize x + y: optimum 1 on an edge.
        let cons = vec![
            c(&[1, 0], 1),
            c(&[-1, 0], 1),
            c(&[0, 1], 1),
            c(&[0, -1], 1),
            c(&[1, 1], 1),
            c(&[-1, -1], 1),
        ];
        match lp_maximize_free(&cons, &[rat(1), rat(1)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(1)),
            other => panic!("unexpected {other:?}"),
        }
        match lp_maximize_free(&cons, &[rat(1), rat(0)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        let cons = vec![c(&[1], 0), c(&[-1], -1)]; // x <= 0 and x >= 1
        assert_eq!(lp_maximize_free(&cons, &[rat(0)]), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let cons = vec![c(&[-1, 0], 0)]; // x >= 0
        assert_eq!(
            lp_maximize_free(&cons, &[rat(1), rat(0)]),
            LpOutcome::Unbounded
        );
        // Free variable with no constraints at all.
        assert_eq!(lp_maximize_free(&[], &[rat(1)]), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // x >= 2 (written -x <= -2), x <= 5: maximize -x gives -2 at x = 2.
        let cons = vec![c(&[-1], -2), c(&[1], 5)];
        match lp_maximize_free(&cons, &[rat(-1)]) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, rat(-2));
                assert_eq!(point, vec![rat(2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fractional_optimum_is_exact() {
        // maximize x subject to 3x <= 1.
        let cons = vec![c(&[3], 1)];
        match lp_maximize_free(&cons, &[rat(1)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn beale_example_terminates_under_bland() {
        // The classic cycling instance for naive pivoting: maximize
        // 3/4 x1 - 150 x2 + 1/50 x3 - 6 x4 over the standard constraints;
        // Bland's rule must terminate at value 1/20.
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let cons = vec![
            (vec![q(1, 4), q(-60, 1), q(-1, 25), q(9, 1)], rat(0)),
            (vec![q(1, 2), q(-90, 1), q(-1, 50), q(3, 1)], rat(0)),
            (vec![rat(0), rat(0), rat(1), rat(0)], rat(1)),
            (vec![rat(-1), rat(0), rat(0), rat(0)], rat(0)),
            (vec![rat(0), rat(-1), rat(0), rat(0)], rat(0)),
            (vec![rat(0), rat(0), rat(-1), rat(0)], rat(0)),
            (vec![rat(0), rat(0), rat(0), rat(-1)], rat(0)),
        ];
        let objective = vec![q(3, 4), q(-150, 1), q(1, 50), q(-6, 1)];
        match lp_maximize_free(&cons, &objective) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(1, 20)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strict_slack_program() {
        // maximize d s.t. x = 1 (two inequalities), |x| <= 1 - d, |1 + x'| ...
        // The strict-admissibility program for the hexagon, slot 1:
        // maximize d: x1 = 1, x2 + d <= 1, -x2 + d <= 1, x1+x2+d <= 1, -(x1+x2)+d <= 1.
        let cons = vec![
            c(&[1, 0, 0], 1),
            c(&[-1, 0, 0], -1),
            c(&[0, 1, 1], 1),
            c(&[0, -1, 1], 1),
            c(&[1, 1, 1], 1),
            c(&[-1, -1, 1], 1),
        ];
        match lp_maximize_free(&cons, &[rat(0), rat(0), rat(1)]) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, ratio(1, 2));
                assert_eq!(point[0], rat(1));
                assert_eq!(point[1], ratio(-1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
