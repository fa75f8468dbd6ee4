//! Enumeration and indexing of observable histories `(y^T, x^{2:T})`.
//!
//! Histories are ordered latest period first, with ones before zeros: the
//! bit sequence `[y_T, x_T, y_{T-1}, x_{T-1}, ..., x_2, y_1]` is read as a
//! binary number after flipping every bit. For `T = 2` this gives the row
//! order `(y2, x2, y1) = (1,1,1), (1,1,0), (1,0,1), ..., (0,0,0)`.

use crate::error::{Error, Result};

/// Largest supported panel length.
pub const MAX_T: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct History {
    periods: usize,
    y: [u8; MAX_T],
    // x[t - 1] holds x_t; x[0] is unused because x_1 conditions the block.
    x: [u8; MAX_T],
}

impl History {
    /// Builds a history from `y_1..y_T` and `x_2..x_T`.
    pub fn new(ys: &[u8], x_tail: &[u8]) -> Result<Self> {
        let periods = ys.len();
        check_periods(periods)?;
        if x_tail.len() + 1 != periods {
            return Err(Error::DimensionMismatch(format!(
                "{} outcomes need {} covariates after the first period, got {}",
                periods,
                periods - 1,
                x_tail.len()
            )));
        }
        if ys.iter().chain(x_tail).any(|&b| b > 1) {
            return Err(Error::InvalidArgument("history entries must be 0 or 1".into()));
        }
        let mut y = [0; MAX_T];
        let mut x = [0; MAX_T];
        y[..periods].copy_from_slice(ys);
        x[1..periods].copy_from_slice(x_tail);
        Ok(History { periods, y, x })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    /// Outcome in period `t` (1-based).
    pub fn y(&self, t: usize) -> u8 {
        debug_assert!((1..=self.periods).contains(&t));
        self.y[t - 1]
    }

    /// Covariate in period `t >= 2` (1-based).
    pub fn x(&self, t: usize) -> u8 {
        debug_assert!((2..=self.periods).contains(&t));
        self.x[t - 1]
    }

    pub fn outcomes(&self) -> &[u8] {
        &self.y[..self.periods]
    }

    /// `x_2..x_T`.
    pub fn covariates(&self) -> &[u8] {
        &self.x[1..self.periods]
    }

    /// Full covariate path `x_1..x_T` given the initial covariate.
    pub fn covariate_path(&self, x1: u8) -> [u8; MAX_T] {
        let mut x = self.x;
        x[0] = x1;
        x
    }
}

pub(crate) fn check_periods(t: usize) -> Result<()> {
    if t < 2 {
        Err(Error::InvalidArgument(format!("panel length T = {t}; at least two periods are required")))
    } else if t > MAX_T {
        Err(Error::CapExceeded { t, max: MAX_T })
    } else {
        Ok(())
    }
}

/// Bijection between histories and `0..2^{2T-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryIndex {
    periods: usize,
}

impl HistoryIndex {
    pub fn new(periods: usize) -> Result<Self> {
        check_periods(periods)?;
        Ok(HistoryIndex { periods })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn len(&self) -> usize {
        1 << (2 * self.periods - 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn encode(&self, h: &History) -> usize {
        debug_assert_eq!(h.periods, self.periods);
        let t_max = self.periods;
        let mut idx = 0usize;
        for t in (1..=t_max).rev() {
            idx = (idx << 1) | (1 - h.y[t - 1]) as usize;
            if t >= 2 {
                idx = (idx << 1) | (1 - h.x[t - 1]) as usize;
            }
        }
        idx
    }

    pub fn decode(&self, idx: usize) -> History {
        debug_assert!(idx < self.len());
        let t_max = self.periods;
        let mut y = [0u8; MAX_T];
        let mut x = [0u8; MAX_T];
        let mut shift = 2 * t_max - 1;
        for t in (1..=t_max).rev() {
            shift -= 1;
            y[t - 1] = 1 - ((idx >> shift) & 1) as u8;
            if t >= 2 {
                shift -= 1;
                x[t - 1] = 1 - ((idx >> shift) & 1) as u8;
            }
        }
        History { periods: t_max, y, x }
    }

    pub fn iter(&self) -> impl Iterator<Item = History> + '_ {
        (0..self.len()).map(move |i| self.decode(i))
    }
}

/// All `2^{2T-1}` histories in index order.
pub fn enumerate_histories(periods: usize) -> Result<Vec<History>> {
    let index = HistoryIndex::new(periods)?;
    Ok(index.iter().collect())
}
