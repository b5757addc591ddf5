//! Dense two-phase simplex method.
//!
//! Solves `min c.x` subject to linear rows and `x >= 0`. Intended for
//! problems with a few hundred rows and columns.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-11;
const MAX_ITERATIONS: usize = 200_000;
const COST_TOL: f64 = 1e-10;
/// Consecutive degenerate pivots before Bland's rule takes over.
const DEGENERATE_SWITCH: usize = 50;

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, rows: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    m: usize,
    nvars: usize,
    width: usize,
    first_art: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.width + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width)
    }

    fn build(lp: &LinearProgram) -> Tableau {
        let nvars = lp.objective.len();
        // Normalize to rhs >= 0; a Ge row with zero rhs becomes a Le row.
        let rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|r| {
                let flip = r.rhs < 0.0 || (r.rhs == 0.0 && r.relation == Relation::Ge);
                if flip {
                    let rel = match r.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (r.coeffs.iter().map(|a| -a).collect(), rel, -r.rhs)
                } else {
                    (r.coeffs.clone(), r.relation, r.rhs)
                }
            })
            .collect();
        let m = rows.len();
        let nslack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let nart = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_art = nvars + nslack;
        let width = first_art + nart;
        let stride = width + 1;
        let mut data = vec![0.0; (m + 1) * stride];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (nvars, first_art);
        for (r, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            data[r * stride..r * stride + nvars].copy_from_slice(coeffs);
            data[r * stride + width] = *rhs;
            match rel {
                Relation::Le => {
                    data[r * stride + s] = 1.0;
                    basis[r] = s;
                    s += 1;
                }
                Relation::Ge => {
                    data[r * stride + s] = -1.0;
                    s += 1;
                    data[r * stride + a] = 1.0;
                    basis[r] = a;
                    a += 1;
                }
                Relation::Eq => {
                    data[r * stride + a] = 1.0;
                    basis[r] = a;
                    a += 1;
                }
            }
        }
        Tableau {
            m,
            nvars,
            width,
            first_art,
            data,
            basis,
            iterations: 0,
        }
    }

    /// Load the reduced-cost row for cost vector `cost` (indexed by column).
    fn set_costs(&mut self, cost: &[f64]) {
        let stride = self.width + 1;
        let obj = self.m * stride;
        for c in 0..=self.width {
            self.data[obj + c] = if c < self.width { cost[c] } else { 0.0 };
        }
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..=self.width {
                    self.data[obj + c] -= cb * self.data[r * stride + c];
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let stride = self.width + 1;
        let p = self.data[pr * stride + pc];
        for c in 0..stride {
            self.data[pr * stride + c] /= p;
        }
        let pivot_row: Vec<f64> = self.data[pr * stride..(pr + 1) * stride].to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let f = self.data[r * stride + pc];
            if f != 0.0 {
                let row = &mut self.data[r * stride..(r + 1) * stride];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
        self.iterations += 1;
    }

    /// Simplex over columns `< limit`: Dantzig pricing, switching to Bland's
    /// rule while pivots stay degenerate.
    fn optimize(&mut self, limit: usize) -> Result<()> {
        let mut degenerate_run = 0;
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::LpIterationLimit);
            }
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let entering = if bland {
                (0..limit).find(|&c| self.at(self.m, c) < -COST_TOL)
            } else {
                (0..limit)
                    .filter(|&c| self.at(self.m, c) < -COST_TOL)
                    .min_by(|&a, &b| self.at(self.m, a).total_cmp(&self.at(self.m, b)))
            };
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-13
                                || (ratio <= bratio + 1e-13 && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = best else {
                return Err(Error::LpUnbounded);
            };
            degenerate_run = if ratio <= 1e-13 { degenerate_run + 1 } else { 0 };
            self.pivot(pr, pc);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        if self.first_art < self.width {
            let mut cost = vec![0.0; self.width];
            cost[self.first_art..].iter_mut().for_each(|c| *c = 1.0);
            self.set_costs(&cost);
            self.optimize(self.width)?;
            let infeas = -self.at(self.m, self.width);
            let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if infeas > 1e-9 * scale {
                return Err(Error::LpInfeasible);
            }
            // Drive remaining artificials out of the basis.
            for r in 0..self.m {
                if self.basis[r] >= self.first_art {
                    if let Some(c) = (0..self.first_art).find(|&c| self.at(r, c).abs() > 1e-9) {
                        self.pivot(r, c);
                    }
                }
            }
        }
        let mut cost = vec![0.0; self.width];
        cost[..self.nvars].copy_from_slice(&lp.objective);
        self.set_costs(&cost);
        // Artificial columns stay out of phase two.
        self.optimize(self.first_art)?;
        let mut x = vec![0.0; self.nvars];
        for r in 0..self.m {
            if self.basis[r] < self.nvars {
                x[self.basis[r]] = self.rhs(r);
            }
        }
        let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective,
            iterations: self.iterations,
        })
    }
}
