//! Dense two-phase tableau simplex over exact rationals.
//!
//! Bland's rule makes every pivot choice deterministic and rules out cycling
//! on the heavily degenerate LPs produced by chain constraints.

use super::{SolveResult, Status};
use crate::rational::{int, Rational};
use crate::schedule::{Minutes, Schedule};
use crate::system::ChainSystem;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `minimize objective . v` subject to the constraints and `v >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, solution: Vec<Rational> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry holds minus the objective value.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        let support: Vec<usize> = (0..=self.width).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &support {
            self.rows[r][j] *= inv;
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row.is_empty() || row[c].is_zero() {
                continue;
            }
            let factor = row[c];
            for &j in &support {
                row[j] -= factor * pivot_row[j];
            }
        }
        if !self.cost[c].is_zero() {
            let factor = self.cost[c];
            for &j in &support {
                self.cost[j] -= factor * pivot_row[j];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the current cost row. Columns at or past
    /// `allowed` never enter.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leave {
                    None => true,
                    Some((best_r, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*best_r]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn load_cost(&mut self, costs: &[Rational]) {
        let mut cost = vec![Rational::zero(); self.width + 1];
        cost[..costs.len()].copy_from_slice(costs);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = costs.get(b).copied().unwrap_or_else(Rational::zero);
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[r].iter().enumerate() {
                if !a.is_zero() {
                    cost[j] -= cb * a;
                }
            }
        }
        self.cost = cost;
    }
}

pub fn minimize(lp: &LinearProgram) -> LpOutcome {
    let n = lp.vars;
    let m = lp.constraints.len();
    // Normalise to non-negative right-hand sides.
    let rows: Vec<Constraint> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs.is_negative() {
                Constraint {
                    terms: c.terms.iter().map(|(j, a)| (*j, -*a)).collect(),
                    sense: match c.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    },
                    rhs: -c.rhs,
                }
            } else {
                c.clone()
            }
        })
        .collect();
    let slacks = rows.iter().filter(|c| c.sense != Sense::Eq).count();
    let artificials = rows.iter().filter(|c| c.sense != Sense::Le).count();
    let first_artificial = n + slacks;
    let width = first_artificial + artificials;

    let mut tableau = Tableau {
        rows: Vec::with_capacity(m),
        cost: Vec::new(),
        basis: Vec::with_capacity(m),
        width,
    };
    let (mut next_slack, mut next_art) = (n, first_artificial);
    for c in &rows {
        let mut row = vec![Rational::zero(); width + 1];
        for (j, a) in &c.terms {
            row[*j] += a;
        }
        row[width] = c.rhs;
        match c.sense {
            Sense::Le => {
                row[next_slack] = Rational::one();
                tableau.basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                tableau.basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = Rational::one();
                tableau.basis.push(next_art);
                next_art += 1;
            }
        }
        tableau.rows.push(row);
    }

    if artificials > 0 {
        let mut phase_one = vec![Rational::zero(); width];
        for c in phase_one.iter_mut().skip(first_artificial) {
            *c = Rational::one();
        }
        tableau.load_cost(&phase_one);
        tableau.optimize(width);
        if !tableau.cost[width].is_zero() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tableau.rows.len() {
            if tableau.basis[r] >= first_artificial {
                match (0..first_artificial).find(|&j| !tableau.rows[r][j].is_zero()) {
                    Some(j) => tableau.pivot(r, j),
                    None => {
                        tableau.rows.remove(r);
                        tableau.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut costs = lp.objective.clone();
    costs.resize(n, Rational::zero());
    tableau.load_cost(&costs);
    if !tableau.optimize(first_artificial) {
        return LpOutcome::Unbounded;
    }
    let mut solution = vec![Rational::zero(); n];
    for (r, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            solution[b] = *tableau.rhs(r);
        }
    }
    LpOutcome::Optimal {
        value: -tableau.cost[width],
        solution,
    }
}

/// The inner LP over shifted variables `u = x - lower >= 0`.
fn build_lp(system: &ChainSystem, schedule: &Schedule, flights: std::ops::Range<usize>, with_upper: bool) -> LinearProgram {
    let base = flights.start;
    let vars = flights.len();
    let objective = flights.clone().map(|i| schedule.flight(i).weight).collect();
    let mut constraints = Vec::new();
    if with_upper {
        for i in flights.clone() {
            constraints.push(Constraint {
                terms: vec![(i - base, Rational::one())],
                sense: Sense::Le,
                rhs: int(system.upper[i] - system.lower[i]),
            });
        }
    }
    for link in &system.links {
        if !flights.contains(&link.prev) || !flights.contains(&link.next) {
            continue;
        }
        constraints.push(Constraint {
            terms: vec![(link.next - base, Rational::one()), (link.prev - base, -Rational::one())],
            sense: Sense::Ge,
            rhs: int(link.gap + system.lower[link.prev] - system.lower[link.next]),
        });
    }
    LinearProgram {
        vars,
        objective,
        constraints,
    }
}

fn departures_from(system: &ChainSystem, solution: &[Rational]) -> Vec<Minutes> {
    solution
        .iter()
        .zip(&system.lower)
        .map(|(u, l)| {
            // The constraint matrix is totally unimodular, so vertices are integral.
            assert!(u.is_integer(), "non-integral simplex vertex {u}");
            l + *u.numer() as Minutes
        })
        .collect()
}

fn prefix_feasible(system: &ChainSystem, schedule: &Schedule, start: usize, end: usize) -> bool {
    !matches!(minimize(&build_lp(system, schedule, start..end, true)), LpOutcome::Infeasible)
}

/// Solves the same LP as [`super::solve_min_delay`] with [`minimize`]. On
/// infeasible input the witness per chain is the shortest infeasible chain
/// prefix, found by bisection, and the departures come from the LP with the
/// upper bounds dropped.
pub fn lp_reference_solve(system: &ChainSystem, schedule: &Schedule, penalty_total: Rational) -> SolveResult {
    let n = schedule.len();
    let constant = schedule
        .flights()
        .iter()
        .zip(&system.lower)
        .fold(Rational::zero(), |acc, (f, l)| acc + f.weight * int(l - f.departure));
    let solve = |with_upper| match minimize(&build_lp(system, schedule, 0..n, with_upper)) {
        LpOutcome::Optimal { value, solution } => Some((value, solution)),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("non-negative weights over u >= 0 are bounded below"),
    };
    if let Some((value, solution)) = solve(true) {
        let x = departures_from(system, &solution);
        return SolveResult::assemble(schedule, x, constant + value, penalty_total, Status::Feasible);
    }
    let (value, solution) = solve(false).expect("chain links without upper bounds are always feasible");
    let x = departures_from(system, &solution);
    let mut witnesses = Vec::new();
    for chain in schedule.chains() {
        if prefix_feasible(system, schedule, chain.start, chain.end) {
            continue;
        }
        // Smallest k with chain.start..=k infeasible.
        let (mut lo, mut hi) = (chain.start, chain.end - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if prefix_feasible(system, schedule, chain.start, mid + 1) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        witnesses.push(lo);
    }
    SolveResult::assemble(schedule, x, constant + value, penalty_total, Status::Infeasible { witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(terms: &[(usize, i64)], sense: Sense, rhs: i64) -> Constraint {
        Constraint {
            terms: terms.iter().map(|(j, a)| (*j, int(*a))).collect(),
            sense,
            rhs: int(rhs),
        }
    }

    #[test]
    fn textbook_maximisation() {
        // max 3a + 5b, a <= 4, 2b <= 12, 3a + 2b <= 18 -> 36 at (2, 6).
        let lp = LinearProgram {
            vars: 2,
            objective: vec![int(-3), int(-5)],
            constraints: vec![
                c(&[(0, 1)], Sense::Le, 4),
                c(&[(1, 2)], Sense::Le, 12),
                c(&[(0, 3), (1, 2)], Sense::Le, 18),
            ],
        };
        assert_eq!(
            minimize(&lp),
            LpOutcome::Optimal {
                value: int(-36),
                solution: vec![int(2), int(6)]
            }
        );
    }

    #[test]
    fn phase_one_with_equalities_and_fractions() {
        // min a + b, a + 2b >= 3, 3a + b = 4 -> (1, 1) value 2.
        let lp = LinearProgram {
            vars: 2,
            objective: vec![int(1), int(1)],
            constraints: vec![c(&[(0, 1), (1, 2)], Sense::Ge, 3), c(&[(0, 3), (1, 1)], Sense::Eq, 4)],
        };
        let LpOutcome::Optimal { value, .. } = minimize(&lp) else { panic!() };
        assert_eq!(value, int(2));
        // min a, 2a >= 1 -> 1/2.
        let lp = LinearProgram {
            vars: 1,
            objective: vec![int(1)],
            constraints: vec![c(&[(0, 2)], Sense::Ge, 1)],
        };
        assert_eq!(
            minimize(&lp),
            LpOutcome::Optimal {
                value: Rational::new(1, 2),
                solution: vec![Rational::new(1, 2)]
            }
        );
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram {
            vars: 1,
            objective: vec![int(1)],
            constraints: vec![c(&[(0, 1)], Sense::Le, 2), c(&[(0, 1)], Sense::Ge, 3)],
        };
        assert_eq!(minimize(&lp), LpOutcome::Infeasible);
        let lp = LinearProgram {
            vars: 1,
            objective: vec![int(-1)],
            constraints: vec![c(&[(0, 1)], Sense::Ge, 1)],
        };
        assert_eq!(minimize(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let lp = LinearProgram {
            vars: 2,
            objective: vec![int(1), int(2)],
            constraints: vec![c(&[(0, 1), (1, 1)], Sense::Eq, 2), c(&[(0, 2), (1, 2)], Sense::Eq, 4)],
        };
        let LpOutcome::Optimal { value, .. } = minimize(&lp) else { panic!() };
        assert_eq!(value, int(2));
    }
}
