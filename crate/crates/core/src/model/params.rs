use crate::error::{Error, Result};
use crate::links::Link;
use crate::model::history::check_periods;

/// Known support points `alpha_1 < ... < alpha_K` of the individual effect.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityGrid {
    points: Vec<f64>,
}

impl HeterogeneityGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("heterogeneity grid needs at least one point".into()));
        }
        if points.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("heterogeneity grid points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("heterogeneity grid must be strictly increasing".into()));
        }
        Ok(HeterogeneityGrid { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks `theta * x + alpha` against the link's domain for `x` in {0, 1}.
    pub fn check_domain(&self, link: Link, theta: f64) -> Result<()> {
        for &a in &self.points {
            for u in [a, theta + a] {
                if !link.in_domain(u) {
                    return Err(Error::Domain { family: link.name(), u });
                }
            }
        }
        Ok(())
    }
}

/// Distribution of the effect given the initial covariate, `pi_{x1}(alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityDist {
    // Indexed by the value of x1.
    weights: [Vec<f64>; 2],
}

impl HeterogeneityDist {
    pub fn new(given_x1_0: Vec<f64>, given_x1_1: Vec<f64>) -> Result<Self> {
        if given_x1_0.len() != given_x1_1.len() {
            return Err(Error::DimensionMismatch("both heterogeneity distributions need K weights".into()));
        }
        for w in [&given_x1_0, &given_x1_1] {
            if w.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidArgument("heterogeneity weights must be nonnegative".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("heterogeneity weights sum to {total}, not 1")));
            }
        }
        Ok(HeterogeneityDist { weights: [given_x1_0, given_x1_1] })
    }

    /// Same distribution for both initial conditions.
    pub fn independent(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights.clone(), weights)
    }

    pub fn weights(&self, x1: u8) -> &[f64] {
        &self.weights[x1 as usize]
    }

    pub fn len(&self) -> usize {
        self.weights[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights[0].is_empty()
    }

    pub fn is_interior(&self) -> bool {
        self.weights.iter().flatten().all(|&p| p > 0.0)
    }
}

/// Feedback probabilities `G^t_{y^{t-1}, x^{t-1}}(alpha) = Pr(X_t = 1 | ...)`.
///
/// Entries are stored per period `t = 2..=T`, then per history code, then
/// per grid point. The history code packs `(y_s, x_s)` for `s < t` as bit
/// pairs, `y_1` in the lowest bit.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackProcess {
    periods: usize,
    support: usize,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

pub(crate) fn history_code(ys: &[u8], xs: &[u8]) -> usize {
    ys.iter()
        .zip(xs)
        .enumerate()
        .map(|(s, (&y, &x))| ((y as usize) | ((x as usize) << 1)) << (2 * s))
        .sum()
}

impl FeedbackProcess {
    pub fn from_fn(
        periods: usize,
        support: usize,
        mut f: impl FnMut(usize, &[u8], &[u8], usize) -> f64,
    ) -> Result<Self> {
        check_periods(periods)?;
        if support == 0 {
            return Err(Error::InvalidArgument("feedback process needs K >= 1".into()));
        }
        let mut offsets = vec![0; periods + 1];
        let mut values = Vec::new();
        for t in 2..=periods {
            offsets[t] = values.len();
            let n_hist = 1usize << (2 * (t - 1));
            let mut ys = vec![0u8; t - 1];
            let mut xs = vec![0u8; t - 1];
            for code in 0..n_hist {
                for s in 0..t - 1 {
                    ys[s] = ((code >> (2 * s)) & 1) as u8;
                    xs[s] = ((code >> (2 * s + 1)) & 1) as u8;
                }
                for k in 0..support {
                    values.push(f(t, &ys, &xs, k));
                }
            }
        }
        let fb = FeedbackProcess { periods, support, offsets, values };
        fb.validate()?;
        Ok(fb)
    }

    pub fn constant(periods: usize, support: usize, g: f64) -> Result<Self> {
        Self::from_fn(periods, support, |_, _, _, _| g)
    }

    fn validate(&self) -> Result<()> {
        if self.values.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(Error::InvalidArgument("feedback probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn support(&self) -> usize {
        self.support
    }

    pub fn flat_index(&self, t: usize, ys: &[u8], xs: &[u8], k: usize) -> usize {
        debug_assert!((2..=self.periods).contains(&t) && ys.len() == t - 1 && xs.len() == t - 1);
        self.offsets[t] + history_code(ys, xs) * self.support + k
    }

    /// `G^t_{y^{t-1}, x^{t-1}}(alpha_k)`; `xs` includes `x_1`.
    pub fn get(&self, t: usize, ys: &[u8], xs: &[u8], k: usize) -> f64 {
        self.values[self.flat_index(t, ys, xs, k)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All entries strictly inside (0, 1).
    pub fn is_interior(&self) -> bool {
        self.values.iter().all(|&g| g > 0.0 && g < 1.0)
    }

    /// Flat indices of the entries whose history starts at `X_1 = x1`.
    pub fn indices_for_initial(&self, x1: u8) -> Vec<usize> {
        let mut out = Vec::new();
        for t in 2..=self.periods {
            let n_hist = 1usize << (2 * (t - 1));
            for code in 0..n_hist {
                if ((code >> 1) & 1) as u8 == x1 {
                    let base = self.offsets[t] + code * self.support;
                    out.extend(base..base + self.support);
                }
            }
        }
        out
    }

    /// True when no entry varies with lagged outcomes.
    pub fn is_strictly_exogenous(&self) -> bool {
        for t in 2..=self.periods {
            let n_hist = 1usize << (2 * (t - 1));
            let y_mask: usize = (0..t - 1).map(|s| 1usize << (2 * s)).sum();
            for code in 0..n_hist {
                let base = code & !y_mask;
                for k in 0..self.support {
                    let a = self.values[self.offsets[t] + code * self.support + k];
                    let b = self.values[self.offsets[t] + base * self.support + k];
                    if a != b {
                        return false;
                    }
                }
            }
        }
        true
    }
}
