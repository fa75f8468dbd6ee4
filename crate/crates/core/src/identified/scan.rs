//! Grid scans over candidate coefficients and bound programs for the
//! average partial effect.

use std::io::Write;

use log::{debug, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::identified::builder::{ape_effects, build_program, choice_table, with_ape_objective};
use crate::identified::colgen::{Block, Master};
use crate::identified::layout::ExogeneityMode;
use crate::links::Link;
use crate::lp::{solve, LpStatus, Sense, SolverOptions};
use crate::model::{HeterogeneityGrid, OutcomeVector};

/// How each candidate's program is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Build the full joint-law program and run the simplex on it.
    Direct,
    /// Keep only matching and normalization rows and generate policy
    /// columns on demand.
    ColumnGeneration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetOptions {
    pub backend: Backend,
    pub solver: SolverOptions,
}

impl Default for SetOptions {
    fn default() -> Self {
        SetOptions { backend: Backend::ColumnGeneration, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub step: f64,
    pub bisect_tol: f64,
}

impl ScanSpec {
    /// Symmetric window of half-width 1.5 around `center`, step 0.02,
    /// bisection to 1e-3.
    pub fn around(center: f64) -> Self {
        ScanSpec { theta_min: center - 1.5, theta_max: center + 1.5, step: 0.02, bisect_tol: 1e-3 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.theta_min, self.theta_max, self.step, self.bisect_tol].iter().all(|v| v.is_finite());
        if !finite || self.theta_min >= self.theta_max || self.step <= 0.0 || self.bisect_tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scan needs theta_min < theta_max and positive step and tolerance, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.theta_max - self.theta_min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.theta_min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSource {
    Grid,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRecord {
    pub theta_tilde: f64,
    pub feasible: bool,
    pub phase_one: f64,
    pub source: PointSource,
    /// Bounds on the average partial effect at this candidate, once computed.
    pub delta: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetResult {
    pub mode: ExogeneityMode,
    pub scan: ScanSpec,
    /// Every evaluated candidate, sorted by coefficient.
    pub points: Vec<PointRecord>,
    pub lo: f64,
    pub hi: f64,
    /// Some infeasible grid point lies between two feasible ones.
    pub nonconvex: bool,
    /// The lowest grid point is feasible, so the set may extend below the scan.
    pub truncated_below: bool,
    pub truncated_above: bool,
}

impl SetResult {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64, tol: f64) -> bool {
        theta >= self.lo - tol && theta <= self.hi + tol
    }

    pub fn feasible_points(&self) -> impl Iterator<Item = &PointRecord> {
        self.points.iter().filter(|p| p.feasible)
    }

    /// Per-candidate trace with header `theta_tilde,feasible,delta_lo,delta_hi,phase1_obj`.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta_tilde,feasible,delta_lo,delta_hi,phase1_obj")?;
        for p in &self.points {
            let (dl, dh) = match p.delta {
                Some((l, h)) => (format!("{l}"), format!("{h}")),
                None => (String::new(), String::new()),
            };
            writeln!(out, "{},{},{dl},{dh},{:e}", p.theta_tilde, p.feasible as u8, p.phase_one)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCheck {
    pub feasible: bool,
    pub phase_one: f64,
}

/// Whether `theta_tilde` belongs to the identified set.
pub fn check_point(
    theta_tilde: f64,
    q: &OutcomeVector,
    link: Link,
    grid: &HeterogeneityGrid,
    mode: ExogeneityMode,
    opts: &SetOptions,
) -> Result<PointCheck> {
    match opts.backend {
        Backend::Direct => {
            let program = build_program(theta_tilde, q, link, grid, mode)?;
            let sol = solve(&program.lp, &opts.solver)?;
            Ok(PointCheck { feasible: sol.status != LpStatus::Infeasible, phase_one: sol.phase_one })
        }
        Backend::ColumnGeneration => {
            let f = choice_table(theta_tilde, link, grid)?;
            let mut phase_one = 0.0;
            for x1 in [1u8, 0] {
                let block = Block { periods: q.periods(), x1, f: &f, target: q.block(x1), mode };
                let verdict = Master::new(block, &opts.solver).feasibility()?;
                phase_one += verdict.phase_one;
                if !verdict.feasible {
                    return Ok(PointCheck { feasible: false, phase_one });
                }
            }
            Ok(PointCheck { feasible: true, phase_one })
        }
    }
}

/// Lower and upper bounds on the average partial effect over all laws
/// compatible with `q` at `theta_tilde`; `None` when the candidate is
/// infeasible.
pub fn ape_bounds_at(
    theta_tilde: f64,
    q: &OutcomeVector,
    link: Link,
    grid: &HeterogeneityGrid,
    mode: ExogeneityMode,
    opts: &SetOptions,
) -> Result<Option<(f64, f64)>> {
    match opts.backend {
        Backend::Direct => {
            let mut bounds = [0.0; 2];
            for (slot, sense) in [Sense::Minimize, Sense::Maximize].into_iter().enumerate() {
                let program = build_program(theta_tilde, q, link, grid, mode)?;
                let program = with_ape_objective(program, theta_tilde, link, grid, q.marginals(), sense)?;
                let sol = solve(&program.lp, &opts.solver)?;
                match sol.status {
                    LpStatus::Optimal => bounds[slot] = sol.objective.expect("optimal value"),
                    LpStatus::Infeasible => return Ok(None),
                    other => return Err(Error::InvalidArgument(format!("bound program ended {other:?}"))),
                }
            }
            Ok(Some((bounds[0], bounds[1])))
        }
        Backend::ColumnGeneration => {
            let f = choice_table(theta_tilde, link, grid)?;
            let effects = ape_effects(theta_tilde, link, grid)?;
            let (mut lo, mut hi) = (0.0, 0.0);
            for x1 in [1u8, 0] {
                let block = Block { periods: q.periods(), x1, f: &f, target: q.block(x1), mode };
                let mut master = Master::new(block, &opts.solver);
                if !master.feasibility()?.feasible {
                    return Ok(None);
                }
                let costs: Vec<f64> = effects.iter().map(|e| e * q.marginal(x1)).collect();
                lo += master.optimize(&costs, Sense::Minimize)?;
                hi += master.optimize(&costs, Sense::Maximize)?;
            }
            Ok(Some((lo, hi)))
        }
    }
}

/// Identified set for the coefficient by grid scan and endpoint bisection.
pub fn compute_theta_set(
    q: &OutcomeVector,
    link: Link,
    grid: &HeterogeneityGrid,
    mode: ExogeneityMode,
    scan: &ScanSpec,
    opts: &SetOptions,
) -> Result<SetResult> {
    scan.validate()?;
    let thetas = scan.grid();
    let checks: Vec<PointCheck> =
        thetas.par_iter().map(|&t| check_point(t, q, link, grid, mode, opts)).collect::<Result<_>>()?;
    let mut points: Vec<PointRecord> = thetas
        .iter()
        .zip(&checks)
        .map(|(&theta_tilde, c)| PointRecord {
            theta_tilde,
            feasible: c.feasible,
            phase_one: c.phase_one,
            source: PointSource::Grid,
            delta: None,
        })
        .collect();
    let feasible: Vec<usize> = (0..points.len()).filter(|&i| points[i].feasible).collect();
    let (Some(&first), Some(&last)) = (feasible.first(), feasible.last()) else {
        return Err(Error::EmptySet);
    };
    let nonconvex = feasible.len() != last - first + 1;
    if nonconvex {
        debug!("feasible candidates are not contiguous on the {mode} scan");
    }

    let pairs: Vec<(f64, f64)> = points
        .windows(2)
        .filter(|w| w[0].feasible != w[1].feasible)
        .map(|w| if w[0].feasible { (w[0].theta_tilde, w[1].theta_tilde) } else { (w[1].theta_tilde, w[0].theta_tilde) })
        .collect();
    let refined: Vec<Vec<PointRecord>> = pairs
        .par_iter()
        .map(|&(inside, outside)| bisect(inside, outside, scan.bisect_tol, q, link, grid, mode, opts))
        .collect::<Result<_>>()?;
    points.extend(refined.into_iter().flatten());
    points.sort_by(|a, b| a.theta_tilde.total_cmp(&b.theta_tilde));

    let lo = points.iter().filter(|p| p.feasible).map(|p| p.theta_tilde).fold(f64::INFINITY, f64::min);
    let hi = points.iter().filter(|p| p.feasible).map(|p| p.theta_tilde).fold(f64::NEG_INFINITY, f64::max);
    Ok(SetResult {
        mode,
        scan: *scan,
        points,
        lo,
        hi,
        nonconvex,
        truncated_below: first == 0,
        truncated_above: last == thetas.len() - 1,
    })
}

#[allow(clippy::too_many_arguments)]
fn bisect(
    mut inside: f64,
    mut outside: f64,
    tol: f64,
    q: &OutcomeVector,
    link: Link,
    grid: &HeterogeneityGrid,
    mode: ExogeneityMode,
    opts: &SetOptions,
) -> Result<Vec<PointRecord>> {
    let mut out = Vec::new();
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        let c = check_point(mid, q, link, grid, mode, opts)?;
        out.push(PointRecord {
            theta_tilde: mid,
            feasible: c.feasible,
            phase_one: c.phase_one,
            source: PointSource::Bisection,
            delta: None,
        });
        if c.feasible {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApeBounds {
    pub lo: f64,
    pub hi: f64,
}

impl ApeBounds {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, delta: f64, tol: f64) -> bool {
        delta >= self.lo - tol && delta <= self.hi + tol
    }
}

/// Bounds on the average partial effect over every feasible candidate of
/// `set`; fills in the per-candidate bounds of the trace.
pub fn compute_ape_bounds(
    q: &OutcomeVector,
    link: Link,
    grid: &HeterogeneityGrid,
    mode: ExogeneityMode,
    set: &mut SetResult,
    opts: &SetOptions,
) -> Result<ApeBounds> {
    let candidates: Vec<usize> = (0..set.points.len()).filter(|&i| set.points[i].feasible).collect();
    if candidates.is_empty() {
        return Err(Error::EmptySet);
    }
    let bounds: Vec<Option<(f64, f64)>> = candidates
        .par_iter()
        .map(|&i| ape_bounds_at(set.points[i].theta_tilde, q, link, grid, mode, opts))
        .collect::<Result<_>>()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&i, b) in candidates.iter().zip(bounds) {
        match b {
            Some((l, h)) => {
                set.points[i].delta = Some((l, h));
                lo = lo.min(l);
                hi = hi.max(h);
            }
            None => warn!("candidate {} was feasible in the scan but not in the bound program", set.points[i].theta_tilde),
        }
    }
    if lo > hi {
        return Err(Error::EmptySet);
    }
    Ok(ApeBounds { lo, hi })
}
