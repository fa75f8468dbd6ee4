//! Constraint systems for a candidate coefficient.

use crate::error::{Error, Result};
use crate::identified::layout::{ExogeneityMode, PsiLayout};
use crate::links::Link;
use crate::lp::{LinearProgram, Sense};
use crate::model::{HeterogeneityGrid, OutcomeVector};

/// Row counts by constraint family, in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RowAudit {
    /// One row per outcome-vector entry.
    pub matching: usize,
    /// One per initial condition.
    pub normalization: usize,
    /// Outcome at `s - 1` follows the model given the past, `s = 2..=T`.
    pub sequential: usize,
    /// Outcome histories independent of covariates given `alpha`.
    pub strict: usize,
}

impl RowAudit {
    pub fn total(&self) -> usize {
        self.matching + self.normalization + self.sequential + self.strict
    }

    /// Counts implied by the constraint definitions alone.
    pub fn expected(periods: usize, support: usize, mode: ExogeneityMode) -> Self {
        let sequential: usize = (2..=periods).map(|s| 2 * support * (1 << (s - 2)) * (1 << (s - 1))).sum();
        let strict = match mode {
            ExogeneityMode::Predetermined => 0,
            ExogeneityMode::StrictlyExogenous => 2 * support * (1 << (periods - 1)) * ((1 << (periods - 1)) - 1),
        };
        RowAudit { matching: 1 << (2 * periods), normalization: 2, sequential, strict }
    }
}

#[derive(Debug, Clone)]
pub struct PsiProgram {
    pub lp: LinearProgram,
    pub layout: PsiLayout,
    pub audit: RowAudit,
}

// f[k][x][y] = Pr(Y = y | X = x, alpha_k) at the candidate coefficient.
pub(crate) fn choice_table(theta_tilde: f64, link: Link, grid: &HeterogeneityGrid) -> Result<Vec<[[f64; 2]; 2]>> {
    grid.check_domain(link, theta_tilde)?;
    grid.points()
        .iter()
        .map(|&a| {
            let mut f = [[0.0; 2]; 2];
            for x in 0..2 {
                for y in 0..2u8 {
                    f[x][y as usize] = link.outcome_probability(theta_tilde * x as f64 + a, y)?;
                }
            }
            Ok(f)
        })
        .collect()
}

/// Feasibility program whose solutions are the joint laws `psi` compatible
/// with `q` at coefficient `theta_tilde`.
pub fn build_feasibility_lp(
    theta_tilde: f64,
    q: &OutcomeVector,
    link: Link,
    grid: &HeterogeneityGrid,
    mode: ExogeneityMode,
) -> Result<LinearProgram> {
    Ok(build_program(theta_tilde, q, link, grid, mode)?.lp)
}

pub fn build_program(
    theta_tilde: f64,
    q: &OutcomeVector,
    link: Link,
    grid: &HeterogeneityGrid,
    mode: ExogeneityMode,
) -> Result<PsiProgram> {
    if !theta_tilde.is_finite() {
        return Err(Error::InvalidArgument("candidate coefficient must be finite".into()));
    }
    let periods = q.periods();
    let support = grid.len();
    let layout = PsiLayout::new(periods, support)?;
    let f = choice_table(theta_tilde, link, grid)?;
    let mut lp = LinearProgram::new(layout.n_vars());
    let mut audit = RowAudit::default();
    let subs: Vec<(Vec<u8>, Vec<u8>)> = (0..layout.sub_len()).map(|s| layout.decode_sub(s)).collect();

    for x1 in [1u8, 0] {
        let block = q.block(x1);
        for (idx, &rhs) in block.iter().enumerate() {
            let y_last = 1 - (idx >> (2 * periods - 2)) as u8;
            let sub = idx & (layout.sub_len() - 1);
            let x_last = subs[sub].1[periods - 2] as usize;
            let coeffs = (0..support).map(|k| (layout.index(x1, sub, k), f[k][x_last][y_last as usize])).collect();
            lp.add_row(coeffs, rhs)?;
            audit.matching += 1;
        }
    }

    for x1 in [1u8, 0] {
        let coeffs = (0..layout.sub_len())
            .flat_map(|sub| (0..support).map(move |k| (layout.index(x1, sub, k), 1.0)))
            .collect();
        lp.add_row(coeffs, 1.0)?;
        audit.normalization += 1;
    }

    for x1 in [1u8, 0] {
        for s in 2..=periods {
            // Prefix: x_2..x_{s-1} and y_1..y_{s-1}.
            let nx = s - 2;
            let ny = s - 1;
            for k in 0..support {
                for code in 0..1usize << (nx + ny) {
                    let px: Vec<u8> = (0..nx).map(|i| ((code >> i) & 1) as u8).collect();
                    let py: Vec<u8> = (0..ny).map(|i| ((code >> (nx + i)) & 1) as u8).collect();
                    let x_prev = if s == 2 { x1 } else { px[s - 3] } as usize;
                    let y_prev = py[ny - 1];
                    let fy = f[k][x_prev][y_prev as usize];
                    let mut coeffs = Vec::new();
                    for (sub, (ys, xs)) in subs.iter().enumerate() {
                        if xs[..nx] != px[..] || ys[..ny - 1] != py[..ny - 1] {
                            continue;
                        }
                        let own = if ys[ny - 1] == y_prev { 1.0 } else { 0.0 };
                        coeffs.push((layout.index(x1, sub, k), own - fy));
                    }
                    lp.add_row(coeffs, 0.0)?;
                    audit.sequential += 1;
                }
            }
        }
    }

    if mode == ExogeneityMode::StrictlyExogenous {
        let n_paths = 1usize << (periods - 1);
        for x1 in [1u8, 0] {
            for xcode in 0..n_paths {
                let xs: Vec<u8> = (0..periods - 1).map(|i| ((xcode >> i) & 1) as u8).collect();
                for k in 0..support {
                    let weight = |ys: &[u8]| -> f64 {
                        (0..periods - 1)
                            .map(|t| {
                                let x = if t == 0 { x1 } else { xs[t - 1] };
                                f[k][x as usize][ys[t] as usize]
                            })
                            .product()
                    };
                    let y_ref = vec![0u8; periods - 1];
                    let w_ref = weight(&y_ref);
                    let v_ref = layout.index(x1, layout.encode_sub(&y_ref, &xs), k);
                    for ycode in 1..n_paths {
                        let ys: Vec<u8> = (0..periods - 1).map(|i| ((ycode >> i) & 1) as u8).collect();
                        let v = layout.index(x1, layout.encode_sub(&ys, &xs), k);
                        lp.add_row(vec![(v, w_ref), (v_ref, -weight(&ys))], 0.0)?;
                        audit.strict += 1;
                    }
                }
            }
        }
    }

    Ok(PsiProgram { lp, layout, audit })
}

/// Coefficients of the average partial effect as a linear function of `psi`.
pub fn ape_objective(
    theta_tilde: f64,
    link: Link,
    grid: &HeterogeneityGrid,
    marginals: [f64; 2],
    layout: &PsiLayout,
) -> Result<Vec<(usize, f64)>> {
    let effects = ape_effects(theta_tilde, link, grid)?;
    let mut coeffs = Vec::with_capacity(layout.n_vars());
    for x1 in [1u8, 0] {
        for sub in 0..layout.sub_len() {
            for (k, &e) in effects.iter().enumerate() {
                coeffs.push((layout.index(x1, sub, k), e * marginals[x1 as usize]));
            }
        }
    }
    Ok(coeffs)
}

/// `F(theta_tilde + alpha_k) - F(alpha_k)` for every grid point.
pub(crate) fn ape_effects(theta_tilde: f64, link: Link, grid: &HeterogeneityGrid) -> Result<Vec<f64>> {
    grid.points().iter().map(|&a| Ok(link.evaluate(theta_tilde + a)? - link.evaluate(a)?)).collect()
}

/// Adds the average-partial-effect objective to a feasibility program.
pub fn with_ape_objective(
    mut program: PsiProgram,
    theta_tilde: f64,
    link: Link,
    grid: &HeterogeneityGrid,
    marginals: [f64; 2],
    sense: Sense,
) -> Result<PsiProgram> {
    let coeffs = ape_objective(theta_tilde, link, grid, marginals, &program.layout)?;
    program.lp.set_objective(sense, coeffs)?;
    Ok(program)
}

/// The `psi` implied by a data generating process, for checking that the
/// truth satisfies every row.
pub fn true_psi(
    theta: f64,
    link: Link,
    grid: &HeterogeneityGrid,
    pi: &crate::model::HeterogeneityDist,
    feedback: &crate::model::FeedbackProcess,
) -> Result<Vec<f64>> {
    let periods = feedback.periods();
    let layout = PsiLayout::new(periods, grid.len())?;
    let f = choice_table(theta, link, grid)?;
    let mut psi = vec![0.0; layout.n_vars()];
    for x1 in [1u8, 0] {
        for sub in 0..layout.sub_len() {
            let (ys, xs) = layout.decode_sub(sub);
            let mut path = vec![x1];
            path.extend_from_slice(&xs);
            for k in 0..grid.len() {
                let mut p = pi.weights(x1)[k];
                for t in 1..periods {
                    p *= f[k][path[t - 1] as usize][ys[t - 1] as usize];
                    let g = feedback.get(t + 1, &ys[..t], &path[..t], k);
                    p *= if path[t] == 1 { g } else { 1.0 - g };
                }
                psi[layout.index(x1, sub, k)] = p;
            }
        }
    }
    Ok(psi)
}
