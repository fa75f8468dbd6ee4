//! Point estimators for two-period panels: the exponential-model moment
//! estimator and the conditional logit reweighted by the inverse feedback
//! probabilities.

use crate::error::{Error, Result};
use crate::model::outcome::OutcomeVector;
use crate::model::sample::PanelDataset;

/// Default tolerance of both estimators.
pub const ESTIMATOR_TOL: f64 = 1e-8;

const MAX_BISECTIONS: usize = 200;
const MAX_NEWTON_STEPS: usize = 50;
const BRACKET_LIMIT: f64 = 1e3;

/// Input of the moment estimator: a sample or the exact population.
#[derive(Debug, Clone, Copy)]
pub enum MomentData<'a> {
    Sample(&'a PanelDataset),
    Population(&'a OutcomeVector),
}

impl<'a> From<&'a PanelDataset> for MomentData<'a> {
    fn from(d: &'a PanelDataset) -> Self {
        MomentData::Sample(d)
    }
}

impl<'a> From<&'a OutcomeVector> for MomentData<'a> {
    fn from(q: &'a OutcomeVector) -> Self {
        MomentData::Population(q)
    }
}

fn require_two_periods(periods: usize) -> Result<()> {
    if periods != 2 {
        return Err(Error::DimensionMismatch(format!("the estimators use T = 2 panels, got T = {periods}")));
    }
    Ok(())
}

fn exponential_score(theta: f64, x1: u8, y1: u8, x2: u8, y2: u8) -> f64 {
    (1.0 - y2 as f64) * (theta * x2 as f64).exp() - (1.0 - y1 as f64) * (theta * x1 as f64).exp()
}

/// Conditional mean of `(1 - Y2) e^{theta X2} - (1 - Y1) e^{theta X1}` given
/// `X1 = x1`.
pub fn exponential_moment<'a>(theta: f64, data: impl Into<MomentData<'a>>, x1: u8) -> Result<f64> {
    match data.into() {
        MomentData::Sample(d) => {
            require_two_periods(d.periods())?;
            let (mut sum, mut n) = (0.0, 0usize);
            for r in d.rows().filter(|r| r[0] == x1) {
                sum += exponential_score(theta, r[0], r[1], r[2], r[3]);
                n += 1;
            }
            if n == 0 {
                return Err(Error::NoObservations { x1 });
            }
            Ok(sum / n as f64)
        }
        MomentData::Population(q) => {
            require_two_periods(q.periods())?;
            let index = q.index();
            let block = q.block(x1);
            let total: f64 = block.iter().sum();
            if !(total > 0.0) {
                return Err(Error::NoObservations { x1 });
            }
            let sum: f64 = block
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let h = index.decode(i);
                    p * exponential_score(theta, x1, h.y(1), h.x(2), h.y(2))
                })
                .sum();
            Ok(sum / total)
        }
    }
}

/// Root of the exponential moment in `[lo, hi]` by bisection, returned once
/// the bracket is narrower than `tol`.
pub fn exponential_estimate<'a>(data: impl Into<MomentData<'a>>, x1: u8, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let data = data.into();
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bracket [{lo}, {hi}] is not a finite interval")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let mut f_lo = exponential_moment(lo, data, x1)?;
    let f_hi = exponential_moment(hi, data, x1)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = exponential_moment(mid, data, x1)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Feedback probabilities `G[y1][x1] = Pr(X2 = 1 | Y1 = y1, X1 = x1)`.
pub type FeedbackCells = [[f64; 2]; 2];

/// Empirical frequency of `X2 = 1` in each `(y1, x1)` cell.
pub fn feedback_cells(data: &PanelDataset) -> Result<FeedbackCells> {
    require_two_periods(data.periods())?;
    let mut ones = [[0usize; 2]; 2];
    let mut counts = [[0usize; 2]; 2];
    for r in data.rows() {
        let (x1, y1, x2) = (r[0] as usize, r[1] as usize, r[2] as usize);
        counts[y1][x1] += 1;
        ones[y1][x1] += x2;
    }
    let mut g = [[0.0; 2]; 2];
    for y1 in 0..2 {
        for x1 in 0..2 {
            if counts[y1][x1] == 0 {
                return Err(Error::EmptyCell { y1: y1 as u8, x1: x1 as u8 });
            }
            g[y1][x1] = ones[y1][x1] as f64 / counts[y1][x1] as f64;
        }
    }
    Ok(g)
}

/// Two-period conditional logit log-likelihood, aggregated over switchers.
///
/// A switcher contributes `w ln L(theta)` when its outcome moved towards the
/// higher covariate, `w ln L(-theta)` when it moved away, and `w ln 1/2`
/// when the covariate did not change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalLogitObjective {
    pub toward: f64,
    pub away: f64,
    pub unchanged: f64,
    pub n_switchers: usize,
}

fn ln_logistic(u: f64) -> f64 {
    if u > 0.0 {
        -(-u).exp().ln_1p()
    } else {
        u - u.exp().ln_1p()
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl ConditionalLogitObjective {
    /// Aggregates the switchers of `data` with per-row weights.
    pub fn new(data: &PanelDataset, mut weight: impl FnMut(&[u8]) -> Result<f64>) -> Result<Self> {
        require_two_periods(data.periods())?;
        let mut obj = ConditionalLogitObjective { toward: 0.0, away: 0.0, unchanged: 0.0, n_switchers: 0 };
        for r in data.rows() {
            let (x1, y1, x2, y2) = (r[0], r[1], r[2], r[3]);
            if y1 + y2 != 1 {
                continue;
            }
            obj.n_switchers += 1;
            let w = weight(r)?;
            if x1 == x2 {
                obj.unchanged += w;
            } else if (y2 == 1) == (x2 > x1) {
                obj.toward += w;
            } else {
                obj.away += w;
            }
        }
        Ok(obj)
    }

    pub fn scaled(&self, c: f64) -> Self {
        ConditionalLogitObjective {
            toward: c * self.toward,
            away: c * self.away,
            unchanged: c * self.unchanged,
            n_switchers: self.n_switchers,
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.toward * ln_logistic(theta) + self.away * ln_logistic(-theta) + self.unchanged * 0.5f64.ln()
    }

    pub fn gradient(&self, theta: f64) -> f64 {
        self.toward * logistic(-theta) - self.away * logistic(theta)
    }

    pub fn curvature(&self, theta: f64) -> f64 {
        -(self.toward + self.away) * logistic(theta) * logistic(-theta)
    }

    /// Golden-section search on an expanding bracket, polished by Newton
    /// steps until `|gradient| < tol`.
    pub fn maximize(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
        }
        if self.toward + self.away == 0.0 {
            return Err(Error::NoSwitchers);
        }
        if self.toward == 0.0 || self.away == 0.0 {
            return Err(Error::InvalidArgument(
                "every switcher with a covariate change moved the same way; the objective has no finite maximizer".into(),
            ));
        }
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.gradient(lo) <= 0.0 {
            lo *= 2.0;
            if lo < -BRACKET_LIMIT {
                return Err(Error::InvalidArgument("conditional logit maximizer is below -1e3".into()));
            }
        }
        while self.gradient(hi) >= 0.0 {
            hi *= 2.0;
            if hi > BRACKET_LIMIT {
                return Err(Error::InvalidArgument("conditional logit maximizer is above 1e3".into()));
            }
        }

        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut a = hi - ratio * (hi - lo);
        let mut b = lo + ratio * (hi - lo);
        let (mut fa, mut fb) = (self.value(a), self.value(b));
        while hi - lo > 1e-3 {
            if fa > fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - ratio * (hi - lo);
                fa = self.value(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + ratio * (hi - lo);
                fb = self.value(b);
            }
        }

        let mut theta = 0.5 * (lo + hi);
        for _ in 0..MAX_NEWTON_STEPS {
            let g = self.gradient(theta);
            if g.abs() < tol {
                break;
            }
            theta -= g / self.curvature(theta);
        }
        Ok(theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogitFit {
    pub theta: f64,
    /// Feedback probabilities behind the weights, absent for the unweighted fit.
    pub feedback: Option<FeedbackCells>,
    pub n_switchers: usize,
}

/// Conditional logit with inverse feedback-probability weights estimated
/// from the sample.
pub fn weighted_conditional_logit(data: &PanelDataset, tol: f64) -> Result<LogitFit> {
    let g = feedback_cells(data)?;
    weighted_conditional_logit_with(data, g, tol)
}

/// Conditional logit with weights built from given feedback probabilities.
pub fn weighted_conditional_logit_with(data: &PanelDataset, g: FeedbackCells, tol: f64) -> Result<LogitFit> {
    if g.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidArgument(format!("feedback probabilities {g:?} must lie in [0, 1]")));
    }
    let objective = ConditionalLogitObjective::new(data, |r| {
        let (x1, y1, x2) = (r[0], r[1], r[2]);
        let p = g[y1 as usize][x1 as usize];
        let mass = if x2 == 1 { p } else { 1.0 - p };
        if mass == 0.0 {
            return Err(Error::DegenerateWeight { y1, x1, g: p });
        }
        Ok(1.0 / mass)
    })?;
    let theta = objective.maximize(tol)?;
    Ok(LogitFit { theta, feedback: Some(g), n_switchers: objective.n_switchers })
}

/// Unweighted conditional logit.
pub fn conditional_logit(data: &PanelDataset, tol: f64) -> Result<LogitFit> {
    let objective = ConditionalLogitObjective::new(data, |_| Ok(1.0))?;
    let theta = objective.maximize(tol)?;
    Ok(LogitFit { theta, feedback: None, n_switchers: objective.n_switchers })
}
