//! Numerical checks of the identification conditions: linear independence of
//! the choice probabilities, the sign moment, feedback-robust moment
//! functions and the Jacobian range test.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::links::Link;
use crate::model::history::{check_periods, History, HistoryIndex};
use crate::model::outcome::{compute_q, OutcomeVector};
use crate::model::params::{FeedbackProcess, HeterogeneityDist, HeterogeneityGrid};

/// Default relative tolerance of the independence test.
pub const INDEPENDENCE_TOL: f64 = 1e-8;
/// Default central-difference step of the Jacobian test.
pub const FD_STEP: f64 = 1e-5;
/// Relative singular-value cutoff of the least-squares projection.
pub const PROJECTION_RANK_TOL: f64 = 1e-10;

/// Coefficients of a vanishing combination `A F(theta + alpha) + B F(alpha) + C = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceCertificate {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl DependenceCertificate {
    /// Largest `|A F(theta + alpha_k) + B F(alpha_k) + C|` over the grid.
    pub fn max_violation(&self, link: Link, theta: f64, grid: &HeterogeneityGrid) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &alpha in grid.points() {
            let v = self.a * link.evaluate(theta + alpha)? + self.b * link.evaluate(alpha)? + self.c;
            worst = worst.max(v.abs());
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub independent: bool,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    /// Unit-length null vector, present when the columns are dependent.
    pub certificate: Option<DependenceCertificate>,
}

/// Tests whether `1`, `F(alpha)` and `F(theta + alpha)` are linearly
/// independent as functions on the grid.
pub fn check_linear_independence(
    link: Link,
    theta: f64,
    grid: &HeterogeneityGrid,
    tol: f64,
) -> Result<IndependenceReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("independence tolerance {tol} must be nonnegative")));
    }
    grid.check_domain(link, theta)?;
    // Zero rows keep the decomposition square when K < 3.
    let rows = grid.len().max(3);
    let mut m = DMatrix::<f64>::zeros(rows, 3);
    for (k, &alpha) in grid.points().iter().enumerate() {
        m[(k, 0)] = 1.0;
        m[(k, 1)] = link.evaluate(alpha)?;
        m[(k, 2)] = link.evaluate(theta + alpha)?;
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let (mut i_min, mut i_max) = (0, 0);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s < svd.singular_values[i_min] {
            i_min = i;
        }
        if s > svd.singular_values[i_max] {
            i_max = i;
        }
    }
    let smallest = svd.singular_values[i_min];
    let largest = svd.singular_values[i_max];
    let independent = largest > 0.0 && smallest > tol * largest;
    let certificate = (!independent).then(|| {
        let row = v_t.row(i_min);
        // Columns are ordered (1, F(alpha), F(theta + alpha)).
        let mut cert = [row[2], row[1], row[0]];
        let norm = cert.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lead = cert.iter().copied().find(|v| v.abs() > 1e-12 * norm).unwrap_or(1.0);
        let scale = lead.signum() / norm;
        cert.iter_mut().for_each(|v| *v *= scale);
        DependenceCertificate { a: cert[0], b: cert[1], c: cert[2] }
    });
    Ok(IndependenceReport { independent, smallest_singular_value: smallest, largest_singular_value: largest, certificate })
}

/// `(E[Y2 - Y1 | X1 = 0], E[Y1 - Y2 | X1 = 1])`.
pub fn sign_moment(q: &OutcomeVector) -> (f64, f64) {
    let index = q.index();
    let mut m = [0.0; 2];
    for x1 in [0u8, 1] {
        let block = q.block(x1);
        let total: f64 = block.iter().sum();
        let mut acc = 0.0;
        for (i, &p) in block.iter().enumerate() {
            let h = index.decode(i);
            acc += p * (h.y(2) as f64 - h.y(1) as f64);
        }
        m[x1 as usize] = if total > 0.0 { acc / total } else { 0.0 };
    }
    (m[0], -m[1])
}

/// A candidate moment function `phi_{x1}(y^T, x^{2:T})` for each initial
/// covariate value.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFunction {
    periods: usize,
    // Indexed by x1, entries in history-index order.
    values: [Vec<f64>; 2],
}

impl MomentFunction {
    pub fn new(periods: usize, given_x1_0: Vec<f64>, given_x1_1: Vec<f64>) -> Result<Self> {
        let index = HistoryIndex::new(periods)?;
        for v in [&given_x1_0, &given_x1_1] {
            if v.len() != index.len() {
                return Err(Error::DimensionMismatch(format!(
                    "moment function block has {} entries, expected {}",
                    v.len(),
                    index.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("moment function entries must be finite".into()));
            }
        }
        Ok(MomentFunction { periods, values: [given_x1_0, given_x1_1] })
    }

    pub fn from_fn(periods: usize, mut f: impl FnMut(u8, &History) -> f64) -> Result<Self> {
        let index = HistoryIndex::new(periods)?;
        let block = |x1: u8, f: &mut dyn FnMut(u8, &History) -> f64| index.iter().map(|h| f(x1, &h)).collect();
        let b0 = block(0, &mut f);
        let b1 = block(1, &mut f);
        Self::new(periods, b0, b1)
    }

    pub fn zero(periods: usize) -> Result<Self> {
        Self::from_fn(periods, |_, _| 0.0)
    }

    /// `(1 - y2) e^{theta x2} - (1 - y1) e^{theta x1}` for two periods.
    pub fn exponential(theta: f64) -> Result<Self> {
        Self::from_fn(2, |x1, h| {
            (1.0 - h.y(2) as f64) * (theta * h.x(2) as f64).exp() - (1.0 - h.y(1) as f64) * (theta * x1 as f64).exp()
        })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn block(&self, x1: u8) -> &[f64] {
        &self.values[x1 as usize]
    }

    pub fn get(&self, x1: u8, history: &History) -> f64 {
        let index = HistoryIndex::new(self.periods).expect("validated at construction");
        self.values[x1 as usize][index.encode(history)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        let scale = |v: &Vec<f64>| v.iter().map(|x| x * c).collect();
        MomentFunction { periods: self.periods, values: [scale(&self.values[0]), scale(&self.values[1])] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResiduals {
    /// Largest spread of the partial conditional expectations across
    /// continuation covariate paths.
    pub max_residual_eq1: f64,
    /// Largest absolute full conditional expectation.
    pub max_residual_eq2: f64,
}

/// Evaluates how far `phi` is from being robust to every feedback process
/// and every heterogeneity distribution at `theta`. Both initial covariate
/// values are checked; a zero block passes trivially.
pub fn verify_feedback_robust_moment(
    phi: &MomentFunction,
    theta: f64,
    link: Link,
    grid: &HeterogeneityGrid,
    periods: usize,
) -> Result<MomentResiduals> {
    check_periods(periods)?;
    if phi.periods() != periods {
        return Err(Error::DimensionMismatch(format!(
            "moment function covers T = {}, requested T = {periods}",
            phi.periods()
        )));
    }
    grid.check_domain(link, theta)?;
    let index = HistoryIndex::new(periods)?;
    let mut eq1: f64 = 0.0;
    let mut eq2: f64 = 0.0;
    let mut ys = vec![0u8; periods];
    let mut xs = vec![0u8; periods];
    for &alpha in grid.points() {
        let f = [link.evaluate(alpha)?, link.evaluate(theta + alpha)?];
        for x1 in [0u8, 1] {
            xs[0] = x1;
            let block = phi.block(x1);
            // E[phi | past] over the last `tail` periods for a fixed covariate path.
            let partial = |ys: &mut [u8], xs: &[u8], tail: usize| -> Result<f64> {
                let head = periods - tail;
                let mut sum = 0.0;
                for ybits in 0..1usize << tail {
                    let mut w = 1.0;
                    for t in 0..tail {
                        let y = ((ybits >> t) & 1) as u8;
                        ys[head + t] = y;
                        let p = f[xs[head + t] as usize];
                        w *= if y == 1 { p } else { 1.0 - p };
                    }
                    sum += block[index.encode(&History::new(ys, &xs[1..])?)] * w;
                }
                Ok(sum)
            };
            for tail in 1..periods {
                let head = periods - tail;
                // Past outcomes y_1..y_head and covariates x_2..x_head.
                for past in 0..1usize << (2 * head - 1) {
                    for t in 0..head {
                        ys[t] = ((past >> t) & 1) as u8;
                    }
                    for t in 1..head {
                        xs[t] = ((past >> (head + t - 1)) & 1) as u8;
                    }
                    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                    for cont in 0..1usize << tail {
                        for t in 0..tail {
                            xs[head + t] = ((cont >> t) & 1) as u8;
                        }
                        let v = partial(&mut ys, &xs, tail)?;
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                    eq1 = eq1.max(hi - lo);
                }
            }
            for path in 0..1usize << (periods - 1) {
                for t in 1..periods {
                    xs[t] = ((path >> (t - 1)) & 1) as u8;
                }
                eq2 = eq2.max(partial(&mut ys, &xs, periods)?.abs());
            }
        }
    }
    Ok(MomentResiduals { max_residual_eq1: eq1, max_residual_eq2: eq2 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianReport {
    /// Norm of the part of `dQ_{x1}/dtheta` outside the span of the nuisance
    /// derivatives, indexed by x1.
    pub residual: [f64; 2],
    /// Numerical rank of the nuisance derivative matrix, indexed by x1.
    pub rank: [usize; 2],
    /// Number of nuisance directions, indexed by x1.
    pub n_nuisance: [usize; 2],
    /// Set when the rank falls below `min(n_nuisance, rows - 1)`; every
    /// derivative of a probability block sums to zero, so `rows - 1` is the
    /// largest attainable rank.
    pub singular_projection: [bool; 2],
}

/// Projects the finite-difference derivative of each block `Q_{x1}` with
/// respect to `theta` on the derivatives with respect to `pi_{x1}` (in the
/// chart that drops the last weight) and the feedback probabilities that
/// start from `x1`.
pub fn jacobian_range_test(
    theta: f64,
    link: Link,
    grid: &HeterogeneityGrid,
    pi: &HeterogeneityDist,
    feedback: &FeedbackProcess,
    fd_step: f64,
) -> Result<JacobianReport> {
    if !(fd_step > 0.0) || !fd_step.is_finite() {
        return Err(Error::InvalidArgument(format!("finite-difference step {fd_step} must be positive")));
    }
    if !pi.is_interior() || !feedback.is_interior() {
        return Err(Error::InvalidArgument(
            "the Jacobian test needs heterogeneity weights and feedback probabilities strictly inside (0, 1)".into(),
        ));
    }
    let k_len = grid.len();
    let q_at = |theta: f64, pi: &HeterogeneityDist, feedback: &FeedbackProcess| {
        compute_q(theta, link, grid, pi, feedback, [0.5, 0.5])
    };
    q_at(theta, pi, feedback)?;
    let diff = |plus: &OutcomeVector, minus: &OutcomeVector, x1: u8| -> DVector<f64> {
        DVector::from_iterator(
            plus.block(x1).len(),
            plus.block(x1).iter().zip(minus.block(x1)).map(|(a, b)| (a - b) / (2.0 * fd_step)),
        )
    };

    let d_theta_plus = q_at(theta + fd_step, pi, feedback)?;
    let d_theta_minus = q_at(theta - fd_step, pi, feedback)?;

    let mut report = JacobianReport { residual: [0.0; 2], rank: [0; 2], n_nuisance: [0; 2], singular_projection: [false; 2] };
    for x1 in [0u8, 1] {
        let target = diff(&d_theta_plus, &d_theta_minus, x1);
        let mut columns: Vec<DVector<f64>> = Vec::new();

        for k in 0..k_len.saturating_sub(1) {
            let shifted = |h: f64| -> Result<HeterogeneityDist> {
                let mut w = [pi.weights(0).to_vec(), pi.weights(1).to_vec()];
                w[x1 as usize][k] += h;
                w[x1 as usize][k_len - 1] -= h;
                let [w0, w1] = w;
                HeterogeneityDist::new(w0, w1)
            };
            let plus = q_at(theta, &shifted(fd_step)?, feedback)?;
            let minus = q_at(theta, &shifted(-fd_step)?, feedback)?;
            columns.push(diff(&plus, &minus, x1));
        }

        for j in feedback.indices_for_initial(x1) {
            let shifted = |h: f64| {
                let mut g = feedback.clone();
                g.values_mut()[j] += h;
                g
            };
            let plus = q_at(theta, pi, &shifted(fd_step))?;
            let minus = q_at(theta, pi, &shifted(-fd_step))?;
            columns.push(diff(&plus, &minus, x1));
        }

        let rows = target.len();
        let n = columns.len();
        let (residual, rank) = if n == 0 {
            (target.norm(), 0)
        } else {
            project_out(DMatrix::from_columns(&columns), &target)
        };
        let i = x1 as usize;
        report.residual[i] = residual;
        report.rank[i] = rank;
        report.n_nuisance[i] = n;
        report.singular_projection[i] = rank < n.min(rows - 1);
    }
    Ok(report)
}

// Norm of `target - D D^+ target` and the numerical rank of `D`.
fn project_out(design: DMatrix<f64>, target: &DVector<f64>) -> (f64, usize) {
    let svd = design.svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let largest = svd.singular_values.max();
    let mut residual = target.clone();
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if largest > 0.0 && s > PROJECTION_RANK_TOL * largest {
            let col = u.column(i);
            residual -= col * col.dot(target);
            rank += 1;
        }
    }
    (residual.norm(), rank)
}
