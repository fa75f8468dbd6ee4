use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::history::check_periods;

/// Which exogeneity restriction the identified set imposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExogeneityMode {
    Predetermined,
    #[serde(alias = "strict")]
    StrictlyExogenous,
}

impl ExogeneityMode {
    pub fn name(self) -> &'static str {
        match self {
            ExogeneityMode::Predetermined => "predetermined",
            ExogeneityMode::StrictlyExogenous => "strict",
        }
    }
}

impl std::fmt::Display for ExogeneityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

/// Flat indexing of the joint-law variables
/// `psi_{x1}(x^{2:T}, y^{T-1}, alpha_k)`.
///
/// The sub-history `(x_T, y_{T-1}, x_{T-1}, ..., x_2, y_1)` is encoded like
/// a history index with `y_T` dropped, so the outcome-vector index of the
/// matching row is `(1 - y_T) * sub_len + sub`. Block `x1 = 1` comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PsiLayout {
    periods: usize,
    support: usize,
}

impl PsiLayout {
    pub fn new(periods: usize, support: usize) -> Result<Self> {
        check_periods(periods)?;
        Ok(PsiLayout { periods, support })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn support(&self) -> usize {
        self.support
    }

    /// Number of sub-histories, `2^{2T-2}`.
    pub fn sub_len(&self) -> usize {
        1 << (2 * self.periods - 2)
    }

    pub fn block_len(&self) -> usize {
        self.sub_len() * self.support
    }

    pub fn n_vars(&self) -> usize {
        2 * self.block_len()
    }

    pub fn index(&self, x1: u8, sub: usize, k: usize) -> usize {
        debug_assert!(sub < self.sub_len() && k < self.support && x1 <= 1);
        (1 - x1 as usize) * self.block_len() + sub * self.support + k
    }

    /// Inverse of [`PsiLayout::index`].
    pub fn decode(&self, index: usize) -> (u8, usize, usize) {
        let x1 = if index < self.block_len() { 1 } else { 0 };
        let rest = index % self.block_len();
        (x1, rest / self.support, rest % self.support)
    }

    /// Encodes `y_1..y_{T-1}` and `x_2..x_T`.
    pub fn encode_sub(&self, ys: &[u8], xs: &[u8]) -> usize {
        let t_max = self.periods;
        debug_assert!(ys.len() == t_max - 1 && xs.len() == t_max - 1);
        let mut idx = 0usize;
        for t in (2..=t_max).rev() {
            idx = (idx << 1) | (1 - xs[t - 2]) as usize;
            idx = (idx << 1) | (1 - ys[t - 2]) as usize;
        }
        idx
    }

    /// `(y_1..y_{T-1}, x_2..x_T)` of a sub-history.
    pub fn decode_sub(&self, sub: usize) -> (Vec<u8>, Vec<u8>) {
        let t_max = self.periods;
        let mut ys = vec![0u8; t_max - 1];
        let mut xs = vec![0u8; t_max - 1];
        let mut shift = 2 * t_max - 2;
        for t in (2..=t_max).rev() {
            shift -= 1;
            xs[t - 2] = 1 - ((sub >> shift) & 1) as u8;
            shift -= 1;
            ys[t - 2] = 1 - ((sub >> shift) & 1) as u8;
        }
        (ys, xs)
    }

    /// Outcome-vector index (within a block) of the sub-history completed by `y_T`.
    pub fn history_index(&self, sub: usize, y_last: u8) -> usize {
        (1 - y_last as usize) * self.sub_len() + sub
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::history::{History, HistoryIndex};

    #[test]
    fn variable_counts() {
        assert_eq!(PsiLayout::new(2, 3).unwrap().n_vars(), 24);
        assert_eq!(PsiLayout::new(4, 31).unwrap().n_vars(), 128 * 31);
    }

    #[test]
    fn index_round_trip_and_block_order() {
        for t in 2..=4 {
            let layout = PsiLayout::new(t, 3).unwrap();
            for i in 0..layout.n_vars() {
                let (x1, sub, k) = layout.decode(i);
                assert_eq!(layout.index(x1, sub, k), i);
                if i < layout.block_len() {
                    assert_eq!(x1, 1);
                }
            }
            for sub in 0..layout.sub_len() {
                let (ys, xs) = layout.decode_sub(sub);
                assert_eq!(layout.encode_sub(&ys, &xs), sub);
            }
        }
    }

    #[test]
    fn consistent_with_history_index() {
        for t in 2..=5 {
            let layout = PsiLayout::new(t, 1).unwrap();
            let index = HistoryIndex::new(t).unwrap();
            for sub in 0..layout.sub_len() {
                let (mut ys, xs) = layout.decode_sub(sub);
                for y_last in [0u8, 1] {
                    ys.push(y_last);
                    let h = History::new(&ys, &xs).unwrap();
                    assert_eq!(index.encode(&h), layout.history_index(sub, y_last));
                    ys.pop();
                }
            }
        }
    }
}
