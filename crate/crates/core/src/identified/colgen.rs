//! Column generation over covariate policies.
//!
//! For each initial condition the feasible `psi` form a cone whose extreme
//! rays are laws generated by one support point and one deterministic
//! covariate policy (a map from past outcomes and covariates to the next
//! covariate). Under strict exogeneity the policies ignore past outcomes and
//! reduce to fixed covariate paths, of which there are only `2^{T-1}`. The
//! restricted master keeps only the matching and normalization rows; new
//! policies are priced by backward induction over the history tree.

use std::collections::HashSet;

use log::trace;

use crate::error::{Error, Result};
use crate::identified::layout::ExogeneityMode;
use crate::lp::{solve, LinearProgram, LpStatus, Sense, SolverOptions};

const PRICE_TOL: f64 = 1e-10;
// Farkas lower bound on the phase-one optimum that settles infeasibility
// before the pricing problem is exhausted.
const CERTIFY_MARGIN: f64 = 1e-6;
const MAX_ROUNDS: usize = 2_000;
// Gap between the master optimum and its Lagrangian bound at which a bound
// program stops; the bound, which is never tighter than the optimum, is
// reported.
const BOUND_GAP: f64 = 1e-8;
// Column count, in multiples of the row count, above which the master drops
// the columns its current solution does not use. A purge also requires the
// master objective to have improved since the previous one, which rules out
// cycling between purging and re-pricing the same columns.
const PURGE_FACTOR: usize = 4;

#[derive(Debug, Clone)]
struct Column {
    k: usize,
    // (history index within the block, probability), sorted by index.
    entries: Vec<(usize, f64)>,
}

/// One initial-condition block of the program at a fixed candidate coefficient.
pub(crate) struct Block<'a> {
    pub periods: usize,
    pub x1: u8,
    /// `f[k][x][y]` at the candidate coefficient.
    pub f: &'a [[[f64; 2]; 2]],
    /// Outcome-vector block `Q_{x1}`.
    pub target: &'a [f64],
    pub mode: ExogeneityMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BlockVerdict {
    pub feasible: bool,
    pub phase_one: f64,
}

/// Restricted master problem state for one block.
pub(crate) struct Master<'a> {
    block: Block<'a>,
    columns: Vec<Column>,
    seen: HashSet<(usize, Vec<usize>)>,
    opts: SolverOptions,
}

fn history_index(periods: usize, ys: &[u8], xs: &[u8]) -> usize {
    // xs holds x_1..x_T; x_1 is not part of the index.
    let mut idx = 0usize;
    for t in (1..=periods).rev() {
        idx = (idx << 1) | (1 - ys[t - 1]) as usize;
        if t >= 2 {
            idx = (idx << 1) | (1 - xs[t - 1]) as usize;
        }
    }
    idx
}

impl<'a> Master<'a> {
    pub fn new(block: Block<'a>, opts: &SolverOptions) -> Self {
        let opts = SolverOptions { duals: true, split_components: false, ..opts.clone() };
        let mut m = Master { block, columns: Vec::new(), seen: HashSet::new(), opts };
        // Fixed covariate paths for every support point: the complete column
        // set under strict exogeneity and a warm start otherwise.
        let periods = m.block.periods;
        for k in 0..m.block.f.len() {
            for code in 0..1usize << (periods - 1) {
                let mut xs = vec![m.block.x1];
                xs.extend((0..periods - 1).map(|i| ((code >> i) & 1) as u8));
                let col = m.path_column(k, &xs);
                m.push(col);
            }
        }
        m
    }

    fn push(&mut self, col: Column) -> bool {
        let key = (col.k, col.entries.iter().map(|e| e.0).collect());
        if self.seen.insert(key) {
            self.columns.push(col);
            true
        } else {
            false
        }
    }

    fn path_column(&self, k: usize, xs: &[u8]) -> Column {
        let periods = self.block.periods;
        let f = &self.block.f[k];
        let mut entries = Vec::with_capacity(1 << periods);
        for ycode in 0..1usize << periods {
            let ys: Vec<u8> = (0..periods).map(|i| ((ycode >> i) & 1) as u8).collect();
            let p: f64 = (0..periods).map(|t| f[xs[t] as usize][ys[t] as usize]).product();
            entries.push((history_index(periods, &ys, xs), p));
        }
        entries.sort_unstable_by_key(|e| e.0);
        Column { k, entries }
    }

    fn program(&self, costs: Option<(&[f64], Sense)>) -> Result<LinearProgram> {
        let rows = self.block.target.len();
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(h, p) in &col.entries {
                by_row[h].push((j, p));
            }
        }
        let mut lp = LinearProgram::new(self.columns.len());
        for (h, coeffs) in by_row.into_iter().enumerate() {
            lp.add_row(coeffs, self.block.target[h])?;
        }
        lp.add_row((0..self.columns.len()).map(|j| (j, 1.0)).collect(), 1.0)?;
        if let Some((c, sense)) = costs {
            lp.set_objective(sense, self.columns.iter().enumerate().map(|(j, col)| (j, c[col.k])).collect())?;
        }
        Ok(lp)
    }

    // Drops every column outside the support of `x`; the master optimum is
    // unchanged and dropped columns may be priced in again later.
    // `value` is the master objective in minimization form.
    fn purge(&mut self, x: &[f64], value: f64, last: &mut f64) {
        if self.columns.len() <= PURGE_FACTOR * self.block.target.len() || value >= *last - PRICE_TOL {
            return;
        }
        *last = value;
        let mut j = 0;
        self.columns.retain(|_| {
            j += 1;
            x[j - 1] > 0.0
        });
        self.seen = self.columns.iter().map(|c| (c.k, c.entries.iter().map(|e| e.0).collect())).collect();
    }

    /// Best policy column for support point `k` under row weights `w`:
    /// maximizes the weighted sum of its history probabilities.
    fn price(&self, k: usize, w: &[f64]) -> (f64, Column) {
        let periods = self.block.periods;
        let mut ys = Vec::with_capacity(periods);
        let mut xs = vec![self.block.x1];
        let (value, mut entries) = match self.block.mode {
            ExogeneityMode::Predetermined => self.chance(k, w, &mut ys, &mut xs),
            ExogeneityMode::StrictlyExogenous => {
                let mut best: Option<(f64, Vec<(usize, f64)>)> = None;
                for code in 0..1usize << (periods - 1) {
                    let mut path = vec![self.block.x1];
                    path.extend((0..periods - 1).map(|i| ((code >> i) & 1) as u8));
                    let col = self.path_column(k, &path);
                    let v: f64 = col.entries.iter().map(|&(h, p)| w[h] * p).sum();
                    if best.as_ref().is_none_or(|b| v > b.0) {
                        best = Some((v, col.entries));
                    }
                }
                best.expect("at least one covariate path")
            }
        };
        entries.sort_unstable_by_key(|e| e.0);
        (value, Column { k, entries })
    }

    // Outcome draw in the period of the last covariate in `xs`.
    fn chance(&self, k: usize, w: &[f64], ys: &mut Vec<u8>, xs: &mut Vec<u8>) -> (f64, Vec<(usize, f64)>) {
        let periods = self.block.periods;
        let x = *xs.last().expect("covariate path starts at x1") as usize;
        let mut value = 0.0;
        let mut entries = Vec::new();
        for y in [0u8, 1] {
            let p = self.block.f[k][x][y as usize];
            ys.push(y);
            if ys.len() == periods {
                let h = history_index(periods, ys, xs);
                value += p * w[h];
                entries.push((h, p));
            } else {
                let (v, sub) = self.decide(k, w, ys, xs);
                value += p * v;
                entries.extend(sub.into_iter().map(|(h, q)| (h, p * q)));
            }
            ys.pop();
        }
        (value, entries)
    }

    fn decide(&self, k: usize, w: &[f64], ys: &mut Vec<u8>, xs: &mut Vec<u8>) -> (f64, Vec<(usize, f64)>) {
        let mut best: Option<(f64, Vec<(usize, f64)>)> = None;
        for x in [0u8, 1] {
            xs.push(x);
            let candidate = self.chance(k, w, ys, xs);
            xs.pop();
            if best.as_ref().is_none_or(|b| candidate.0 > b.0) {
                best = Some(candidate);
            }
        }
        best.expect("two covariate values")
    }

    /// Adds the best column of each support point whose weighted value
    /// exceeds its threshold; returns the largest excess found.
    fn add_improving(&mut self, w: &[f64], threshold: impl Fn(usize) -> f64) -> (f64, usize) {
        let mut best = f64::NEG_INFINITY;
        let mut added = 0;
        for k in 0..self.block.f.len() {
            let (v, col) = self.price(k, w);
            let excess = v - threshold(k);
            best = best.max(excess);
            if excess > PRICE_TOL && self.push(col) {
                added += 1;
            }
        }
        (best, added)
    }

    pub fn feasibility(&mut self) -> Result<BlockVerdict> {
        let rows = self.block.target.len();
        let mut purged = f64::INFINITY;
        for round in 0..MAX_ROUNDS {
            let lp = self.program(None)?;
            let sol = solve(&lp, &self.opts)?;
            if sol.status != LpStatus::Infeasible {
                return Ok(BlockVerdict { feasible: true, phase_one: sol.phase_one });
            }
            if self.block.mode == ExogeneityMode::StrictlyExogenous {
                return Ok(BlockVerdict { feasible: false, phase_one: sol.phase_one });
            }
            let Some(y) = sol.duals else {
                return Err(Error::InvalidArgument("restricted master returned no dual certificate".into()));
            };
            self.purge(&sol.x, sol.phase_one, &mut purged);
            // A column improves phase one when y'a > 0, i.e. when its
            // matching-row value exceeds -y_norm.
            let y_norm = y[rows];
            let (excess, added) = self.add_improving(&y[..rows], |_| -y_norm);
            let bound: f64 = (0..rows).map(|h| y[h] * self.block.target[h]).sum::<f64>() + y_norm - excess.max(0.0);
            trace!("block x1={} round {round}: phase one {:e}, bound {bound:e}, {added} new columns", self.block.x1, sol.phase_one);
            if added == 0 || bound > CERTIFY_MARGIN {
                return Ok(BlockVerdict { feasible: false, phase_one: sol.phase_one });
            }
        }
        Err(Error::IterationLimit { limit: MAX_ROUNDS, phase_one: f64::NAN })
    }

    /// Optimum of `sum_k costs[k] * Pr(alpha = alpha_k | x1)` over the
    /// feasible block; call after a feasible verdict.
    pub fn optimize(&mut self, costs: &[f64], sense: Sense) -> Result<f64> {
        let rows = self.block.target.len();
        let sign = if sense == Sense::Minimize { 1.0 } else { -1.0 };
        let mut purged = f64::INFINITY;
        for _ in 0..MAX_ROUNDS {
            let lp = self.program(Some((costs, sense)))?;
            let sol = solve(&lp, &self.opts)?;
            let value = match sol.status {
                LpStatus::Optimal => sol.objective.expect("optimal solutions carry a value"),
                LpStatus::Infeasible => return Err(Error::EmptySet),
                other => return Err(Error::InvalidArgument(format!("restricted master ended {other:?}"))),
            };
            let Some(y) = sol.duals else {
                return Err(Error::InvalidArgument("restricted master returned no duals".into()));
            };
            self.purge(&sol.x, sign * value, &mut purged);
            // Reduced cost c - y'a improves when sign * (y'a - c) > 0.
            let w: Vec<f64> = y[..rows].iter().map(|v| sign * v).collect();
            let y_norm = y[rows];
            let (excess, added) = self.add_improving(&w, |k| sign * (costs[k] - y_norm));
            // The columns carry unit mass in total, so no column set can
            // improve on the master by more than the largest excess.
            let bound = value - sign * excess.max(0.0);
            if added == 0 || excess <= BOUND_GAP {
                return Ok(bound);
            }
        }
        Err(Error::IterationLimit { limit: MAX_ROUNDS, phase_one: 0.0 })
    }

    #[cfg(test)]
    fn n_columns(&self) -> usize {
        self.columns.len()
    }
}
