use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
}

/// One equality row `sum_j a_j x_j = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Equality-constrained program over nonnegative variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    n_vars: usize,
    rows: Vec<Constraint>,
    objective: Option<Objective>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram { n_vars, rows: Vec::new(), objective: None }
    }

    /// Appends a row and returns its index. Repeated variables are summed
    /// and exact zeros dropped.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> Result<usize> {
        if !rhs.is_finite() {
            return Err(Error::MalformedLp(format!("row {} has non-finite right-hand side", self.rows.len())));
        }
        let coeffs = self.normalize(coeffs, "row")?;
        self.rows.push(Constraint { coeffs, rhs });
        Ok(self.rows.len() - 1)
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<(usize, f64)>) -> Result<()> {
        let coeffs = self.normalize(coeffs, "objective")?;
        self.objective = Some(Objective { sense, coeffs });
        Ok(())
    }

    pub fn clear_objective(&mut self) {
        self.objective = None;
    }

    fn normalize(&self, mut coeffs: Vec<(usize, f64)>, what: &str) -> Result<Vec<(usize, f64)>> {
        for &(j, a) in &coeffs {
            if j >= self.n_vars {
                return Err(Error::MalformedLp(format!(
                    "{what} references variable {j} but the program has {} variables",
                    self.n_vars
                )));
            }
            if !a.is_finite() {
                return Err(Error::MalformedLp(format!("{what} has non-finite coefficient on variable {j}")));
            }
        }
        coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (j, a) in coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        Ok(merged)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    /// `c'x`, or zero without an objective.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.as_ref().map_or(0.0, |o| o.coeffs.iter().map(|&(j, c)| c * x[j]).sum())
    }

    /// Largest equality violation `|a_i'x - b_i|` over all rows.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.coeffs.iter().map(|&(j, a)| a * x[j]).sum::<f64>() - r.rhs).abs())
            .fold(0.0, f64::max)
    }
}
