//! Dense two-phase tableau simplex.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::program::{LinearProgram, Sense};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const DROP_TOL: f64 = 1e-14;
const RATIO_SLACK: f64 = 1e-11;
// Phase-one value treated as exactly feasible.
const PHASE_ONE_DONE: f64 = 1e-13;
// Phase-one optima up to this multiple of the tolerance are recomputed
// from a fresh factorization of the basis before a verdict.
const REFRESH_ZONE: f64 = 1e3;
// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    /// Feasible program without an objective.
    Feasible,
    Infeasible,
    Optimal,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Most negative reduced cost, falling back to Bland's rule while the
    /// objective stalls on degenerate pivots.
    Dantzig,
    /// Bland's smallest-index rule throughout.
    Bland,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Phase-one optimum above which the program is declared infeasible.
    pub tol: f64,
    pub max_iterations: usize,
    pub pivot_rule: PivotRule,
    /// Recover row duals from the final basis.
    pub duals: bool,
    /// Solve independent row/variable blocks separately.
    pub split_components: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-9, max_iterations: 50_000, pivot_rule: PivotRule::Dantzig, duals: false, split_components: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point. For an infeasible program, the structural part of the
    /// phase-one optimum.
    pub x: Vec<f64>,
    pub objective: Option<f64>,
    /// Phase-one optimum (sum of artificials over scaled rows).
    pub phase_one: f64,
    pub iterations: usize,
    /// Row duals `y`. At an optimum `c_j - y'A_j` is nonnegative (minimize)
    /// or nonpositive (maximize); for an infeasible program `y` is a Farkas
    /// certificate with `A'y <= 0` and `b'y > 0`.
    pub duals: Option<Vec<f64>>,
    /// Largest equality violation of `x` in the original rows.
    pub max_residual: f64,
}

impl LpSolution {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, LpStatus::Feasible | LpStatus::Optimal | LpStatus::Unbounded)
    }
}

pub fn solve(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("solver tolerance must be positive".into()));
    }
    let components = if opts.split_components { components(lp) } else { vec![] };
    if components.len() <= 1 {
        let mut sol = Tableau::new(lp).run(lp, opts)?;
        sol.max_residual = lp.max_residual(&sol.x);
        return Ok(sol);
    }

    let mut x = vec![0.0; lp.n_vars()];
    let mut duals = opts.duals.then(|| vec![0.0; lp.n_rows()]);
    let mut phase_one = 0.0;
    let mut iterations = 0;
    let mut status = if lp.objective().is_some() { LpStatus::Optimal } else { LpStatus::Feasible };
    for (rows, vars) in &components {
        let sub = restrict(lp, rows, vars);
        let sol = Tableau::new(&sub).run(&sub, opts)?;
        iterations += sol.iterations;
        phase_one += sol.phase_one;
        for (local, &j) in vars.iter().enumerate() {
            x[j] = sol.x[local];
        }
        match (&mut duals, &sol.duals) {
            (Some(all), Some(part)) => {
                for (local, &i) in rows.iter().enumerate() {
                    all[i] = part[local];
                }
            }
            (Some(_), None) => duals = None,
            _ => {}
        }
        match sol.status {
            LpStatus::Infeasible => {
                status = LpStatus::Infeasible;
                // Certificate from this block alone.
                if let (Some(all), Some(part)) = (&mut duals, &sol.duals) {
                    all.iter_mut().for_each(|v| *v = 0.0);
                    for (local, &i) in rows.iter().enumerate() {
                        all[i] = part[local];
                    }
                }
                break;
            }
            LpStatus::Unbounded if status != LpStatus::Infeasible => status = LpStatus::Unbounded,
            _ => {}
        }
    }
    // Variables outside every row.
    if let Some(obj) = lp.objective() {
        let mut covered = vec![false; lp.n_vars()];
        components.iter().flat_map(|(_, v)| v).for_each(|&j| covered[j] = true);
        let sign = if obj.sense == Sense::Minimize { 1.0 } else { -1.0 };
        if status == LpStatus::Optimal && obj.coeffs.iter().any(|&(j, c)| !covered[j] && sign * c < -COST_TOL) {
            status = LpStatus::Unbounded;
        }
    }
    let objective = (status == LpStatus::Optimal).then(|| lp.objective_value(&x));
    Ok(LpSolution { status, max_residual: lp.max_residual(&x), x, objective, phase_one, iterations, duals })
}

// Connected blocks of the row/variable incidence graph. Variables that
// appear in no row are left out.
fn components(lp: &LinearProgram) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = lp.n_vars();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for row in lp.rows() {
        if let Some(&(first, _)) = row.coeffs.first() {
            let a = find(&mut parent, first);
            for &(j, _) in &row.coeffs[1..] {
                let b = find(&mut parent, j);
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut empty_rows = Vec::new();
    for (i, row) in lp.rows().iter().enumerate() {
        let Some(&(first, _)) = row.coeffs.first() else {
            empty_rows.push(i);
            continue;
        };
        let root = find(&mut parent, first);
        if label[root] == usize::MAX {
            label[root] = out.len();
            out.push((Vec::new(), Vec::new()));
        }
        out[label[root]].0.push(i);
    }
    for j in 0..n {
        let root = find(&mut parent, j);
        if label[root] != usize::MAX {
            out[label[root]].1.push(j);
        }
    }
    // Rows without coefficients are checked inside the first block.
    if !empty_rows.is_empty() {
        if out.is_empty() {
            out.push((Vec::new(), Vec::new()));
        }
        out[0].0.extend(empty_rows);
        out[0].0.sort_unstable();
    }
    out
}

fn restrict(lp: &LinearProgram, rows: &[usize], vars: &[usize]) -> LinearProgram {
    let mut local = vec![usize::MAX; lp.n_vars()];
    for (l, &j) in vars.iter().enumerate() {
        local[j] = l;
    }
    let mut sub = LinearProgram::new(vars.len());
    for &i in rows {
        let r = &lp.rows()[i];
        sub.add_row(r.coeffs.iter().map(|&(j, a)| (local[j], a)).collect(), r.rhs).expect("restriction of a valid row");
    }
    if let Some(obj) = lp.objective() {
        let coeffs = obj.coeffs.iter().filter(|(j, _)| local[*j] != usize::MAX).map(|&(j, c)| (local[j], c)).collect();
        sub.set_objective(obj.sense, coeffs).expect("restriction of a valid objective");
    }
    sub
}

struct Tableau {
    m: usize,
    n: usize,
    // Row-major m x n body; artificial columns are implicit.
    a: Vec<f64>,
    b: Vec<f64>,
    // Basic variable per row; `n + i` is the artificial of row i.
    basis: Vec<usize>,
    active: Vec<bool>,
    // Multiplier applied to each original row (scaling and sign).
    row_scale: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
    // Scaled original columns and right-hand side.
    columns: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

enum Phase {
    One,
    Two,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.n_rows();
        let n = lp.n_vars();
        let mut a = vec![0.0; m * n];
        let mut b = vec![0.0; m];
        let mut row_scale = vec![1.0; m];
        for (i, row) in lp.rows().iter().enumerate() {
            let max = row.coeffs.iter().fold(0.0f64, |acc, &(_, v)| acc.max(v.abs()));
            let mut s = if max > 0.0 { 1.0 / max } else { 1.0 };
            if row.rhs < 0.0 {
                s = -s;
            }
            row_scale[i] = s;
            for &(j, v) in &row.coeffs {
                a[i * n + j] = v * s;
            }
            b[i] = row.rhs * s;
        }
        let mut columns = vec![Vec::new(); n];
        for (i, row) in lp.rows().iter().enumerate() {
            for &(j, _) in &row.coeffs {
                columns[j].push((i, a[i * n + j]));
            }
        }
        let rhs = b.clone();
        Tableau {
            m,
            n,
            a,
            b,
            basis: (n..n + m).collect(),
            active: vec![true; m],
            row_scale,
            d: vec![0.0; n],
            iterations: 0,
            columns,
            rhs,
        }
    }

    fn phase_one_value(&self) -> f64 {
        (0..self.m).filter(|&i| self.active[i] && self.basis[i] >= self.n).map(|i| self.b[i].max(0.0)).sum()
    }

    fn run(mut self, lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
        let (m, n) = (self.m, self.n);
        for j in 0..n {
            self.d[j] = -(0..m).map(|i| self.a[i * n + j]).sum::<f64>();
        }
        self.iterate(Phase::One, opts)?;
        let mut phase_one = self.phase_one_value();
        if phase_one > opts.tol && phase_one <= REFRESH_ZONE * opts.tol && self.refresh_basic_values() {
            let structural_ok = (0..m).all(|i| !self.active[i] || self.basis[i] >= n || self.b[i] >= -opts.tol);
            let refreshed = self.phase_one_value();
            debug!("phase-one optimum {phase_one:e} refreshed to {refreshed:e}");
            if structural_ok {
                phase_one = refreshed;
                self.b.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        if phase_one > opts.tol {
            if phase_one <= 10.0 * opts.tol {
                debug!("marginal phase-one optimum {phase_one:e} reported infeasible");
            }
            let duals = if opts.duals {
                let costs: Vec<f64> = self.basis.iter().map(|&j| if j >= n { 1.0 } else { 0.0 }).collect();
                self.duals(&costs)
            } else {
                None
            };
            let mut x = vec![0.0; n];
            for i in 0..m {
                if self.active[i] && self.basis[i] < n {
                    x[self.basis[i]] = self.b[i].max(0.0);
                }
            }
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x,
                objective: None,
                phase_one,
                iterations: self.iterations,
                duals,
                max_residual: f64::INFINITY,
            });
        }
        self.drive_out_artificials();

        let mut status = LpStatus::Feasible;
        let mut cost = vec![0.0; n];
        if let Some(obj) = lp.objective() {
            let sign = if obj.sense == Sense::Minimize { 1.0 } else { -1.0 };
            for &(j, c) in &obj.coeffs {
                cost[j] = sign * c;
            }
            self.d.copy_from_slice(&cost);
            for i in 0..m {
                if self.active[i] && self.basis[i] < n {
                    let cb = cost[self.basis[i]];
                    if cb != 0.0 {
                        let row = &self.a[i * n..(i + 1) * n];
                        for (dj, &aij) in self.d.iter_mut().zip(row) {
                            *dj -= cb * aij;
                        }
                    }
                }
            }
            status = if self.iterate(Phase::Two, opts)? { LpStatus::Optimal } else { LpStatus::Unbounded };
        }

        let mut x = vec![0.0; n];
        for i in 0..m {
            if self.active[i] && self.basis[i] < n {
                x[self.basis[i]] = self.b[i].max(0.0);
            }
        }
        let duals = if opts.duals && status != LpStatus::Unbounded {
            let mut costs: Vec<f64> = self.basis.iter().map(|&j| if j < n { cost[j] } else { 0.0 }).collect();
            if let Some(Sense::Maximize) = lp.objective().map(|o| o.sense) {
                costs.iter_mut().for_each(|c| *c = -*c);
            }
            self.duals(&costs)
        } else {
            None
        };
        let objective = (status == LpStatus::Optimal).then(|| lp.objective_value(&x));
        let max_residual = lp.max_residual(&x);
        if max_residual > 1e3 * opts.tol.max(1e-9) {
            warn!("simplex solution violates rows by {max_residual:e}");
        }
        Ok(LpSolution { status, x, objective, phase_one, iterations: self.iterations, duals, max_residual })
    }

    // Pivots until optimal (true) or an unbounded ray is found (false).
    fn iterate(&mut self, phase: Phase, opts: &SolverOptions) -> Result<bool> {
        let mut stalled = 0usize;
        loop {
            if matches!(phase, Phase::One) && self.phase_one_value() <= PHASE_ONE_DONE {
                return Ok(true);
            }
            let bland = opts.pivot_rule == PivotRule::Bland || stalled >= STALL_LIMIT;
            let Some(j) = self.entering(bland) else {
                return Ok(true);
            };
            let Some(r) = self.leaving(j, bland) else {
                return match phase {
                    Phase::Two => Ok(false),
                    // Phase one is bounded below by zero.
                    Phase::One => Err(Error::InvalidArgument("phase one reported an unbounded ray".into())),
                };
            };
            if self.iterations >= opts.max_iterations {
                return Err(Error::IterationLimit { limit: opts.max_iterations, phase_one: self.phase_one_value() });
            }
            let step = self.b[r] / self.a[r * self.n + j];
            if step <= 1e-12 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            self.pivot(r, j);
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        if bland {
            return self.d.iter().position(|&v| v < -COST_TOL);
        }
        let mut best = None;
        let mut best_val = -COST_TOL;
        for (j, &v) in self.d.iter().enumerate() {
            if v < best_val {
                best_val = v;
                best = Some(j);
            }
        }
        best
    }

    // Two-pass ratio test: bound the step with a small feasibility
    // allowance, then take the largest pivot within that bound.
    fn leaving(&self, j: usize, bland: bool) -> Option<usize> {
        let n = self.n;
        let mut limit = f64::INFINITY;
        for i in 0..self.m {
            let aij = self.a[i * n + j];
            if self.active[i] && aij > PIVOT_TOL {
                limit = limit.min((self.b[i].max(0.0) + RATIO_SLACK) / aij);
            }
        }
        if limit == f64::INFINITY {
            return None;
        }
        let mut best: Option<usize> = None;
        for i in 0..self.m {
            let aij = self.a[i * n + j];
            if !self.active[i] || aij <= PIVOT_TOL || self.b[i].max(0.0) / aij > limit {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(k) => {
                    let better = if bland {
                        self.basis[i] < self.basis[k]
                    } else {
                        // Prefer removing artificials, then larger pivots.
                        let (art_i, art_k) = (self.basis[i] >= n, self.basis[k] >= n);
                        (art_i && !art_k) || (art_i == art_k && aij > self.a[k * n + j])
                    };
                    Some(if better { i } else { k })
                }
            };
        }
        best
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let n = self.n;
        self.iterations += 1;
        let inv = 1.0 / self.a[r * n + j];
        let mut nz: Vec<(usize, f64)> = Vec::new();
        for k in 0..n {
            let v = &mut self.a[r * n + k];
            if *v != 0.0 {
                *v *= inv;
                if v.abs() < DROP_TOL {
                    *v = 0.0;
                } else {
                    nz.push((k, *v));
                }
            }
        }
        self.a[r * n + j] = 1.0;
        self.b[r] *= inv;
        let br = self.b[r];
        for i in 0..self.m {
            if i == r || !self.active[i] {
                continue;
            }
            let f = self.a[i * n + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * n..(i + 1) * n];
            for &(k, v) in &nz {
                let x = row[k] - f * v;
                row[k] = if x.abs() < DROP_TOL { 0.0 } else { x };
            }
            row[j] = 0.0;
            self.b[i] -= f * br;
            if self.b[i] < 0.0 && self.b[i] > -RATIO_SLACK {
                self.b[i] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for &(k, v) in &nz {
                self.d[k] -= f * v;
            }
            self.d[j] = 0.0;
        }
        self.basis[r] = j;
    }

    // Replaces zero-level basic artificials by structural columns; rows
    // where none qualifies are redundant and deactivated.
    fn drive_out_artificials(&mut self) {
        let n = self.n;
        for r in 0..self.m {
            if !self.active[r] || self.basis[r] < n {
                continue;
            }
            let row = &self.a[r * n..(r + 1) * n];
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for (k, &v) in row.iter().enumerate() {
                if v.abs() > best_abs {
                    best_abs = v.abs();
                    best = Some(k);
                }
            }
            match best {
                Some(k) => {
                    self.b[r] = 0.0;
                    self.pivot(r, k);
                }
                None => self.active[r] = false,
            }
        }
    }

    // Basis matrix over active rows, in the scaled original coordinates.
    fn basis_matrix(&self) -> Option<(Vec<usize>, DMatrix<f64>)> {
        let rows: Vec<usize> = (0..self.m).filter(|&i| self.active[i]).collect();
        let k = rows.len();
        let mut bmat = DMatrix::<f64>::zeros(k, k);
        let mut pos = vec![usize::MAX; self.m];
        for (p, &i) in rows.iter().enumerate() {
            pos[i] = p;
        }
        for (col, &i) in rows.iter().enumerate() {
            let var = self.basis[i];
            if var >= self.n {
                let p = pos[var - self.n];
                if p == usize::MAX {
                    return None;
                }
                bmat[(p, col)] = 1.0;
            } else {
                for &(row, v) in &self.columns[var] {
                    if pos[row] != usize::MAX {
                        bmat[(pos[row], col)] = v;
                    }
                }
            }
        }
        Some((rows, bmat))
    }

    // Solves B'y = c_B over active rows and maps back to original rows.
    fn duals(&self, basic_costs: &[f64]) -> Option<Vec<f64>> {
        let (rows, bmat) = self.basis_matrix()?;
        let c = DVector::from_iterator(rows.len(), rows.iter().map(|&i| basic_costs[i]));
        let y = bmat.transpose().lu().solve(&c)?;
        let mut out = vec![0.0; self.m];
        for (p, &i) in rows.iter().enumerate() {
            out[i] = y[p] * self.row_scale[i];
        }
        Some(out)
    }

    // Recomputes basic values from the original data, removing drift
    // accumulated over many tableau updates.
    fn refresh_basic_values(&mut self) -> bool {
        let Some((rows, bmat)) = self.basis_matrix() else {
            return false;
        };
        let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.rhs[i]));
        let Some(x) = bmat.lu().solve(&rhs) else {
            return false;
        };
        for (p, &i) in rows.iter().enumerate() {
            self.b[i] = x[p];
        }
        true
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn lp(n: usize, rows: &[(&[(usize, f64)], f64)]) -> LinearProgram {
        let mut lp = LinearProgram::new(n);
        for (c, b) in rows {
            lp.add_row(c.to_vec(), *b).unwrap();
        }
        lp
    }

    #[test]
    fn single_variable_cases() {
        let mut p = lp(1, &[(&[(0, 1.0)], 1.0)]);
        p.set_objective(Sense::Minimize, vec![(0, 1.0)]).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.objective.unwrap() - 1.0).abs() < 1e-12);

        let p = lp(1, &[(&[(0, 1.0)], -1.0)]);
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(s.phase_one > 0.5);
    }

    #[test]
    fn unbounded_direction() {
        let mut p = lp(2, &[(&[(0, 1.0), (1, -1.0)], 0.0)]);
        p.set_objective(Sense::Maximize, vec![(0, 1.0)]).unwrap();
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, LpStatus::Unbounded);
        // A free-standing variable with an improving cost.
        let mut p = lp(3, &[(&[(0, 1.0), (1, 1.0)], 1.0)]);
        p.set_objective(Sense::Minimize, vec![(2, -1.0)]).unwrap();
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut p = lp(
            3,
            &[
                (&[(0, 1.0), (1, 1.0)], 0.5),
                (&[(2, 1.0)], 0.5),
                (&[(0, 1.0), (1, 1.0), (2, 1.0)], 1.0),
                (&[(0, 2.0), (1, 2.0), (2, 2.0)], 2.0),
            ],
        );
        p.set_objective(Sense::Maximize, vec![(0, 1.0), (2, 1.0)]).unwrap();
        for split in [false, true] {
            let opts = SolverOptions { split_components: split, duals: true, ..Default::default() };
            let s = solve(&p, &opts).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.objective.unwrap() - 1.0).abs() < 1e-12);
            assert!(s.max_residual < 1e-12);
        }
    }

    #[test]
    fn farkas_certificate_for_infeasible_program() {
        // x0 + x1 = 1 and x0 + x1 = 2.
        let p = lp(2, &[(&[(0, 1.0), (1, 1.0)], 1.0), (&[(0, 1.0), (1, 1.0)], 2.0)]);
        let s = solve(&p, &SolverOptions { duals: true, ..Default::default() }).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        let y = s.duals.unwrap();
        let by = y[0] + 2.0 * y[1];
        assert!(by > 0.0);
        for j in 0..2 {
            let aty: f64 = p.rows().iter().zip(&y).map(|(r, yi)| yi * r.coeffs.iter().find(|c| c.0 == j).map_or(0.0, |c| c.1)).sum();
            assert!(aty <= 1e-12);
        }
    }

    #[test]
    fn optimal_duals_price_out() {
        let mut p = lp(4, &[(&[(0, 1.0), (1, 2.0), (2, 1.0)], 4.0), (&[(1, 1.0), (3, 3.0)], 2.0)]);
        p.set_objective(Sense::Minimize, vec![(0, 3.0), (1, 1.0), (2, 4.0), (3, 1.0)]).unwrap();
        let s = solve(&p, &SolverOptions { duals: true, ..Default::default() }).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        let y = s.duals.unwrap();
        let cost = [3.0, 1.0, 4.0, 1.0];
        for j in 0..4 {
            let aty: f64 = p.rows().iter().zip(&y).map(|(r, yi)| yi * r.coeffs.iter().find(|c| c.0 == j).map_or(0.0, |c| c.1)).sum();
            assert!(cost[j] - aty >= -1e-10);
        }
        let by = 4.0 * y[0] + 2.0 * y[1];
        assert!((by - s.objective.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn bland_and_dantzig_agree() {
        let mut p = lp(
            5,
            &[(&[(0, 1.0), (1, 1.0), (2, 1.0)], 1.0), (&[(0, 1.0), (3, -1.0), (4, 2.0)], 0.3)],
        );
        p.set_objective(Sense::Maximize, vec![(0, 1.0), (1, 2.0), (4, -1.0)]).unwrap();
        let a = solve(&p, &SolverOptions::default()).unwrap();
        let b = solve(&p, &SolverOptions { pivot_rule: PivotRule::Bland, ..Default::default() }).unwrap();
        assert!((a.objective.unwrap() - b.objective.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut p = lp(3, &[(&[(0, 1.0), (1, 1.0)], 1.0), (&[(1, 1.0), (2, 1.0)], 1.0)]);
        p.set_objective(Sense::Maximize, vec![(0, 1.0)]).unwrap();
        let opts = SolverOptions { max_iterations: 0, split_components: false, ..Default::default() };
        assert!(matches!(solve(&p, &opts), Err(Error::IterationLimit { limit: 0, .. })));
    }

    #[test]
    fn empty_row_with_nonzero_rhs_is_infeasible() {
        let mut p = LinearProgram::new(2);
        p.add_row(vec![(0, 1.0)], 1.0).unwrap();
        p.add_row(vec![], 0.5).unwrap();
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, LpStatus::Infeasible);
        let mut p = LinearProgram::new(1);
        p.add_row(vec![], 0.0).unwrap();
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, LpStatus::Feasible);
    }
}
