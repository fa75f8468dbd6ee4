//! Exact population probabilities of observable histories.

use crate::error::{Error, Result};
use crate::links::Link;
use crate::model::history::{check_periods, History, HistoryIndex};
use crate::model::params::{FeedbackProcess, HeterogeneityDist, HeterogeneityGrid};

/// The stacked vector `Q = (Q_1', Q_0')'` together with `Pr(X_1 = x1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeVector {
    periods: usize,
    // Indexed by x1.
    q: [f64; 2],
    blocks: [Vec<f64>; 2],
}

impl OutcomeVector {
    /// `blocks[x1]` holds `Q_{x1}` in history-index order; `q[x1]` is `Pr(X_1 = x1)`.
    pub fn new(periods: usize, q: [f64; 2], blocks: [Vec<f64>; 2]) -> Result<Self> {
        let index = HistoryIndex::new(periods)?;
        for b in &blocks {
            if b.len() != index.len() {
                return Err(Error::DimensionMismatch(format!(
                    "outcome block has {} entries, expected {}",
                    b.len(),
                    index.len()
                )));
            }
            if b.iter().any(|&p| !(p >= -1e-15) || !p.is_finite()) {
                return Err(Error::InvalidArgument("outcome probabilities must be nonnegative".into()));
            }
        }
        check_marginal(q)?;
        Ok(OutcomeVector { periods, q, blocks })
    }

    /// Rebuilds from the stacked layout (block `x1 = 1` first).
    pub fn from_stacked(periods: usize, q: [f64; 2], stacked: &[f64]) -> Result<Self> {
        let half = stacked.len() / 2;
        if stacked.len() != 1 << (2 * periods) {
            return Err(Error::DimensionMismatch(format!(
                "stacked outcome vector has {} entries, expected {}",
                stacked.len(),
                1usize << (2 * periods)
            )));
        }
        Self::new(periods, q, [stacked[half..].to_vec(), stacked[..half].to_vec()])
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn index(&self) -> HistoryIndex {
        HistoryIndex::new(self.periods).expect("validated at construction")
    }

    /// `Pr(X_1 = x1)`.
    pub fn marginal(&self, x1: u8) -> f64 {
        self.q[x1 as usize]
    }

    pub fn marginals(&self) -> [f64; 2] {
        self.q
    }

    pub fn block(&self, x1: u8) -> &[f64] {
        &self.blocks[x1 as usize]
    }

    pub fn get(&self, x1: u8, history: &History) -> f64 {
        self.blocks[x1 as usize][self.index().encode(history)]
    }

    /// `Q_1` stacked over `Q_0`.
    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.blocks[1].clone();
        v.extend_from_slice(&self.blocks[0]);
        v
    }

    pub fn block_sums(&self) -> [f64; 2] {
        [self.blocks[0].iter().sum(), self.blocks[1].iter().sum()]
    }
}

fn check_marginal(q: [f64; 2]) -> Result<()> {
    if q.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (q[0] + q[1] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("initial-covariate marginal {q:?} is not a distribution")));
    }
    Ok(())
}

/// Probability of one history given `X_1 = x1` and `alpha = alpha_k`,
/// i.e. the likelihood integrand without the heterogeneity weight.
pub fn history_probability(
    theta: f64,
    link: Link,
    grid: &HeterogeneityGrid,
    k: usize,
    x1: u8,
    history: &History,
    feedback: &FeedbackProcess,
) -> Result<f64> {
    let alpha = grid.points()[k];
    let t_max = history.periods();
    let x = history.covariate_path(x1);
    let y = history.outcomes();
    let mut p = 1.0;
    for t in 1..=t_max {
        p *= link.outcome_probability(theta * x[t - 1] as f64 + alpha, y[t - 1])?;
        if t >= 2 {
            let g = feedback.get(t, &y[..t - 1], &x[..t - 1], k);
            p *= if x[t - 1] == 1 { g } else { 1.0 - g };
        }
    }
    Ok(p)
}

/// Exact `Q(theta, pi, G)`.
pub fn compute_q(
    theta: f64,
    link: Link,
    grid: &HeterogeneityGrid,
    pi: &HeterogeneityDist,
    feedback: &FeedbackProcess,
    q: [f64; 2],
) -> Result<OutcomeVector> {
    let periods = feedback.periods();
    check_periods(periods)?;
    let k_len = grid.len();
    if pi.len() != k_len || feedback.support() != k_len {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} points, heterogeneity distribution {}, feedback process {}",
            k_len,
            pi.len(),
            feedback.support()
        )));
    }
    check_marginal(q)?;
    grid.check_domain(link, theta)?;

    let index = HistoryIndex::new(periods)?;
    let mut blocks = [vec![0.0; index.len()], vec![0.0; index.len()]];
    for x1 in [0u8, 1] {
        let block = &mut blocks[x1 as usize];
        for (k, &w) in pi.weights(x1).iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let alpha = grid.points()[k];
            // f[x][y] = Pr(Y = y | X = x, alpha)
            let mut f = [[0.0; 2]; 2];
            for xv in 0..2 {
                for yv in 0..2u8 {
                    f[xv][yv as usize] = link.outcome_probability(theta * xv as f64 + alpha, yv)?;
                }
            }
            for (i, slot) in block.iter_mut().enumerate() {
                let h = index.decode(i);
                let x = h.covariate_path(x1);
                let y = h.outcomes();
                let mut p = w;
                for t in 1..=periods {
                    p *= f[x[t - 1] as usize][y[t - 1] as usize];
                    if t >= 2 {
                        let g = feedback.get(t, &y[..t - 1], &x[..t - 1], k);
                        p *= if x[t - 1] == 1 { g } else { 1.0 - g };
                    }
                }
                *slot += p;
            }
        }
    }
    OutcomeVector::new(periods, q, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn logistic(u: f64) -> f64 {
        1.0 / (1.0 + (-u).exp())
    }

    #[test]
    fn uniform_feedback_history_probability() {
        let grid = HeterogeneityGrid::new(vec![0.0]).unwrap();
        let fb = FeedbackProcess::constant(2, 1, 0.5).unwrap();
        for h in HistoryIndex::new(2).unwrap().iter() {
            for x1 in [0, 1] {
                let p = history_probability(0.0, Link::Logit, &grid, 0, x1, &h, &fb).unwrap();
                assert!((p - 0.125).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hand_computed_history_probability() {
        let grid = HeterogeneityGrid::new(vec![0.0]).unwrap();
        let fb = FeedbackProcess::constant(2, 1, 0.7).unwrap();
        let h = History::new(&[1, 1], &[1]).unwrap();
        let p = history_probability(1.0, Link::Logit, &grid, 0, 0, &h, &fb).unwrap();
        let expected = logistic(0.0) * 0.7 * logistic(1.0);
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.255871).abs() < 1e-6);
    }

    #[test]
    fn histories_sum_to_one_for_each_alpha() {
        let grid = HeterogeneityGrid::new(vec![-1.0, 0.3, 2.0]).unwrap();
        let fb = FeedbackProcess::from_fn(3, 3, |t, ys, xs, k| {
            0.2 + 0.1 * ys.iter().sum::<u8>() as f64 + 0.05 * xs[0] as f64 + 0.03 * (k + t) as f64
        })
        .unwrap();
        for k in 0..3 {
            for x1 in [0, 1] {
                let total: f64 = HistoryIndex::new(3)
                    .unwrap()
                    .iter()
                    .map(|h| history_probability(0.8, Link::Probit, &grid, k, x1, &h, &fb).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_point_uniform_q() {
        let grid = HeterogeneityGrid::new(vec![0.0]).unwrap();
        let pi = HeterogeneityDist::independent(vec![1.0]).unwrap();
        let fb = FeedbackProcess::constant(2, 1, 0.5).unwrap();
        let q = compute_q(0.0, Link::Logit, &grid, &pi, &fb, [0.5, 0.5]).unwrap();
        assert!(q.stacked().iter().all(|&v| (v - 0.125).abs() < 1e-15));
        assert_eq!(q.stacked().len(), 16);
    }

    #[test]
    fn dimension_and_domain_errors() {
        let grid = HeterogeneityGrid::new(vec![0.0, 1.0]).unwrap();
        let pi = HeterogeneityDist::independent(vec![1.0]).unwrap();
        let fb = FeedbackProcess::constant(2, 2, 0.5).unwrap();
        assert!(matches!(
            compute_q(0.0, Link::Logit, &grid, &pi, &fb, [0.5, 0.5]),
            Err(Error::DimensionMismatch(_))
        ));
        let pi = HeterogeneityDist::independent(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            compute_q(-0.5, Link::Exponential, &grid, &pi, &fb, [0.5, 0.5]),
            Err(Error::Domain { .. })
        ));
    }

    // Walks every (alpha, y_1, x_2, y_2, ...) path directly, keyed by the
    // explicit tuple, with no use of the history index.
    fn path_oracle(
        theta: f64,
        link: Link,
        alphas: &[f64],
        pi: &[f64],
        g: &dyn Fn(usize, &[u8], &[u8], usize) -> f64,
        x1: u8,
        periods: usize,
    ) -> HashMap<(Vec<u8>, Vec<u8>), f64> {
        fn walk(
            t: usize,
            periods: usize,
            theta: f64,
            link: Link,
            alpha: f64,
            k: usize,
            g: &dyn Fn(usize, &[u8], &[u8], usize) -> f64,
            ys: &mut Vec<u8>,
            xs: &mut Vec<u8>,
            p: f64,
            out: &mut HashMap<(Vec<u8>, Vec<u8>), f64>,
        ) {
            let xt = xs[t - 1] as f64;
            let f = link.evaluate(theta * xt + alpha).unwrap();
            for y in [0u8, 1] {
                let py = if y == 1 { f } else { 1.0 - f };
                ys.push(y);
                if t == periods {
                    *out.entry((ys.clone(), xs[1..].to_vec())).or_insert(0.0) += p * py;
                } else {
                    let gt = g(t + 1, ys, xs, k);
                    for x in [0u8, 1] {
                        let px = if x == 1 { gt } else { 1.0 - gt };
                        xs.push(x);
                        walk(t + 1, periods, theta, link, alpha, k, g, ys, xs, p * py * px, out);
                        xs.pop();
                    }
                }
                ys.pop();
            }
        }
        let mut out = HashMap::new();
        for (k, (&a, &w)) in alphas.iter().zip(pi).enumerate() {
            walk(1, periods, theta, link, a, k, g, &mut vec![], &mut vec![x1], w, &mut out);
        }
        out
    }

    #[test]
    fn matches_path_enumeration_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let periods = rng.random_range(2..=3);
            let k_len = rng.random_range(1..=5);
            let link = [Link::Logit, Link::Probit][rng.random_range(0..2)];
            let theta = rng.random_range(-1.5..1.5);
            let mut alphas: Vec<f64> = (0..k_len).map(|i| -2.0 + i as f64 + rng.random_range(0.0..0.9)).collect();
            alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let draw_pi = |rng: &mut rand_chacha::ChaCha8Rng| {
                let w: Vec<f64> = (0..k_len).map(|_| rng.random_range(0.05..1.0)).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|v| v / s).collect::<Vec<_>>()
            };
            let pi0 = draw_pi(&mut rng);
            let pi1 = draw_pi(&mut rng);
            let fb = FeedbackProcess::from_fn(periods, k_len, |_, _, _, _| rng.random_range(0.05..0.95)).unwrap();
            let grid = HeterogeneityGrid::new(alphas.clone()).unwrap();
            let pi = HeterogeneityDist::new(pi0.clone(), pi1.clone()).unwrap();
            let q = compute_q(theta, link, &grid, &pi, &fb, [0.4, 0.6]).unwrap();
            for (x1, w) in [(0u8, &pi0), (1u8, &pi1)] {
                let g = |t: usize, ys: &[u8], xs: &[u8], k: usize| fb.get(t, ys, xs, k);
                let oracle = path_oracle(theta, link, &alphas, w, &g, x1, periods);
                assert_eq!(oracle.len(), q.block(x1).len());
                for ((ys, xs), p) in oracle {
                    let h = History::new(&ys, &xs).unwrap();
                    assert!((q.get(x1, &h) - p).abs() < 1e-12);
                }
                assert!((q.block_sums()[x1 as usize] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn static_marginals_under_exogenous_feedback() {
        // Summing over x^{2:T} at fixed y^T under exogenous G recovers the
        // mixture of static choice probabilities weighted by the covariate law.
        let periods = 3;
        let alphas = vec![-0.7, 0.2, 1.1];
        let grid = HeterogeneityGrid::new(alphas.clone()).unwrap();
        let pi = HeterogeneityDist::new(vec![0.2, 0.5, 0.3], vec![0.6, 0.3, 0.1]).unwrap();
        let fb = FeedbackProcess::from_fn(periods, 3, |t, _, xs, k| 0.3 + 0.1 * xs[t - 2] as f64 + 0.1 * k as f64)
            .unwrap();
        let theta = 0.9;
        let q = compute_q(theta, Link::Logit, &grid, &pi, &fb, [0.5, 0.5]).unwrap();
        let index = q.index();
        for x1 in [0u8, 1] {
            let mut by_y: HashMap<Vec<u8>, f64> = HashMap::new();
            for (i, &v) in q.block(x1).iter().enumerate() {
                *by_y.entry(index.decode(i).outcomes().to_vec()).or_insert(0.0) += v;
            }
            for (ys, total) in by_y {
                let mut expected = 0.0;
                for (k, &a) in alphas.iter().enumerate() {
                    for x2 in 0..2u8 {
                        for x3 in 0..2u8 {
                            let g2 = fb.get(2, &[0], &[x1], k);
                            let g3 = fb.get(3, &[0, 0], &[x1, x2], k);
                            let px = (if x2 == 1 { g2 } else { 1.0 - g2 }) * (if x3 == 1 { g3 } else { 1.0 - g3 });
                            let xs = [x1, x2, x3];
                            let py: f64 = (0..3)
                                .map(|t| {
                                    let f = logistic(theta * xs[t] as f64 + a);
                                    if ys[t] == 1 { f } else { 1.0 - f }
                                })
                                .product();
                            expected += pi.weights(x1)[k] * px * py;
                        }
                    }
                }
                assert!((total - expected).abs() < 1e-14);
            }
        }
    }
}
