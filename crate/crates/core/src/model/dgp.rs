use crate::error::{Error, Result};
use crate::links::{std_normal_pdf, std_normal_quantile, Link};
use crate::model::history::check_periods;
use crate::model::outcome::{compute_q, OutcomeVector};
use crate::model::params::{FeedbackProcess, HeterogeneityDist, HeterogeneityGrid};

/// A fully specified data generating process.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub theta: f64,
    pub link: Link,
    pub grid: HeterogeneityGrid,
    pub pi: HeterogeneityDist,
    pub feedback: FeedbackProcess,
    /// `Pr(X_1 = x1)`, indexed by x1.
    pub q: [f64; 2],
}

impl ModelConfig {
    /// Assembles and validates a model.
    pub fn new(
        theta: f64,
        link: Link,
        grid: HeterogeneityGrid,
        pi: HeterogeneityDist,
        feedback: FeedbackProcess,
        q: [f64; 2],
    ) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("theta must be finite".into()));
        }
        check_periods(feedback.periods())?;
        if pi.len() != grid.len() || feedback.support() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} points, heterogeneity distribution {}, feedback process {}",
                grid.len(),
                pi.len(),
                feedback.support()
            )));
        }
        if q.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (q[0] + q[1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("initial-covariate marginal {q:?} is not a distribution")));
        }
        grid.check_domain(link, theta)?;
        Ok(ModelConfig { theta, link, grid, pi, feedback, q })
    }

    pub fn periods(&self) -> usize {
        self.feedback.periods()
    }

    pub fn outcome_vector(&self) -> Result<OutcomeVector> {
        compute_q(self.theta, self.link, &self.grid, &self.pi, &self.feedback, self.q)
    }

    /// True average partial effect `E[F(theta + alpha) - F(alpha)]`.
    pub fn average_partial_effect(&self) -> Result<f64> {
        let mut delta = 0.0;
        for (k, &a) in self.grid.points().iter().enumerate() {
            let effect = self.link.evaluate(self.theta + a)? - self.link.evaluate(a)?;
            let mass: f64 = (0..2u8).map(|x1| self.q[x1 as usize] * self.pi.weights(x1)[k]).sum();
            delta += effect * mass;
        }
        Ok(delta)
    }
}

/// `K` equidistant standard normal percentiles with weights proportional to
/// the normal density at each point.
pub fn normal_percentile_grid(k: usize) -> Result<(HeterogeneityGrid, Vec<f64>)> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let points: Vec<f64> = (1..=k).map(|i| std_normal_quantile(i as f64 / (k + 1) as f64)).collect();
    let density: Vec<f64> = points.iter().map(|&a| std_normal_pdf(a)).collect();
    let total: f64 = density.iter().sum();
    let weights = density.into_iter().map(|d| d / total).collect();
    Ok((HeterogeneityGrid::new(points)?, weights))
}

/// Benchmark design: Bernoulli(1/2) covariates independent over time and of
/// everything else, normal-like heterogeneity on `K` points.
pub fn dgp_default(periods: usize, theta: f64, link: Link, k: usize) -> Result<ModelConfig> {
    check_periods(periods)?;
    let (grid, weights) = normal_percentile_grid(k)?;
    let pi = HeterogeneityDist::independent(weights)?;
    let feedback = FeedbackProcess::constant(periods, k, 0.5)?;
    ModelConfig::new(theta, link, grid, pi, feedback, [0.5, 0.5])
}
