//! The known link function `F` of the binary choice model.
//!
//! Three families are supported: logit, probit and the exponential model
//! `F(u) = 1 - exp(-u)`, which is only defined on `u >= 0`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logit,
    Probit,
    Exponential,
}

impl Link {
    pub fn name(self) -> &'static str {
        match self {
            Link::Logit => "logit",
            Link::Probit => "probit",
            Link::Exponential => "exponential",
        }
    }

    /// Whether `u` lies in the support of the family.
    pub fn in_domain(self, u: f64) -> bool {
        match self {
            Link::Exponential => u >= 0.0,
            _ => !u.is_nan(),
        }
    }

    fn check(self, u: f64) -> Result<()> {
        if self.in_domain(u) {
            Ok(())
        } else {
            Err(Error::Domain { family: self.name(), u })
        }
    }

    /// `F(u)`.
    pub fn evaluate(self, u: f64) -> Result<f64> {
        self.check(u)?;
        Ok(match self {
            Link::Logit => logistic(u),
            Link::Probit => std_normal_cdf(u),
            Link::Exponential => -(-u).exp_m1(),
        })
    }

    /// `F'(u)`.
    pub fn derivative(self, u: f64) -> Result<f64> {
        self.check(u)?;
        Ok(match self {
            Link::Logit => {
                let p = logistic(u);
                p * (1.0 - p)
            }
            Link::Probit => std_normal_pdf(u),
            Link::Exponential => (-u).exp(),
        })
    }

    /// `F(u)^y [1 - F(u)]^(1-y)` for a binary outcome `y`.
    pub fn outcome_probability(self, u: f64, y: u8) -> Result<f64> {
        self.check(u)?;
        Ok(if y == 1 { self.evaluate(u)? } else { self.complement(u) })
    }

    // 1 - F(u) without cancellation in the upper tail.
    fn complement(self, u: f64) -> f64 {
        match self {
            Link::Logit => logistic(-u),
            Link::Probit => std_normal_cdf(-u),
            Link::Exponential => (-u).exp(),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logit" => Ok(Link::Logit),
            "probit" => Ok(Link::Probit),
            "exponential" | "exp" => Ok(Link::Exponential),
            other => Err(Error::InvalidArgument(format!("unknown link family `{other}`"))),
        }
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

/// Standard normal CDF through the complementary error function.
pub fn std_normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Inverse of the standard normal CDF on `(0, 1)`.
pub fn std_normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let mut u = Normal::standard().inverse_cdf(p);
    // Newton polish against the CDF above.
    for _ in 0..2 {
        if !u.is_finite() {
            break;
        }
        u -= (std_normal_cdf(u) - p) / std_normal_pdf(u);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Composite Gauss-Legendre (5 nodes) on [a, b] with n panels.
    fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        const X: [f64; 5] = [
            0.0,
            0.538_469_310_105_683_1,
            -0.538_469_310_105_683_1,
            0.906_179_845_938_664,
            -0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = (b - a) / n as f64;
        (0..n)
            .map(|i| {
                let lo = a + i as f64 * h;
                let mid = lo + 0.5 * h;
                X.iter().zip(W.iter()).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    fn density(u: f64) -> f64 {
        (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    // Phi(u) by quadrature of the density from -40 (tail mass below ~1e-300).
    fn phi_quadrature(u: f64) -> f64 {
        gauss_legendre(density, -40.0, u, 4000)
    }

    #[test]
    fn quadrature_oracle_values() {
        assert!((phi_quadrature(1.0) - 0.841345).abs() < 1e-6);
        assert!((density(0.0) - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn documented_values() {
        assert_eq!(Link::Logit.evaluate(0.0).unwrap(), 0.5);
        assert_eq!(Link::Exponential.evaluate(0.0).unwrap(), 0.0);
        assert!((Link::Probit.evaluate(1.0).unwrap() - 0.841345).abs() < 1e-6);
        assert_eq!(Link::Logit.derivative(0.0).unwrap(), 0.25);
        assert_eq!(Link::Exponential.derivative(0.0).unwrap(), 1.0);
        assert!((Link::Probit.derivative(0.0).unwrap() - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn probit_matches_quadrature() {
        for i in 0..=40 {
            let u = -8.0 + 0.4 * i as f64;
            let err = (Link::Probit.evaluate(u).unwrap() - phi_quadrature(u)).abs();
            assert!(err < 1e-12, "u = {u}: |Phi - oracle| = {err:e}");
        }
    }

    #[test]
    fn exponential_rejects_negative_index() {
        assert!(matches!(Link::Exponential.evaluate(-1e-9), Err(Error::Domain { .. })));
        assert!(matches!(Link::Exponential.derivative(-0.5), Err(Error::Domain { .. })));
        assert!(Link::Logit.evaluate(-1e6).is_ok());
    }

    #[test]
    fn logit_is_stable_at_extremes() {
        assert_eq!(Link::Logit.evaluate(800.0).unwrap(), 1.0);
        assert!(Link::Logit.evaluate(-800.0).unwrap() >= 0.0);
        assert!(Link::Logit.evaluate(-30.0).unwrap() > 0.0);
        assert!(Link::Logit.evaluate(30.0).unwrap() < 1.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for k in 1..50 {
            let p = k as f64 / 50.0;
            assert_relative_eq!(std_normal_cdf(std_normal_quantile(p)), p, epsilon = 1e-13);
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for link in [Link::Logit, Link::Probit, Link::Exponential] {
            for _ in 0..100 {
                let u = match link {
                    Link::Exponential => rng.random_range(1e-3..4.0),
                    _ => rng.random_range(-4.0..4.0),
                };
                let fd = (link.evaluate(u + h).unwrap() - link.evaluate(u - h).unwrap()) / (2.0 * h);
                let d = link.derivative(u).unwrap();
                assert!(d > 0.0);
                assert!(((fd - d) / d).abs() < 1e-6, "{link} at {u}: {fd} vs {d}");
            }
        }
    }

    proptest! {
        #[test]
        fn strictly_increasing(a in -8.0f64..8.0, b in -8.0f64..8.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for link in [Link::Logit, Link::Probit] {
                prop_assert!(link.evaluate(lo).unwrap() < link.evaluate(hi).unwrap());
            }
            let (lo, hi) = (lo.abs().min(hi.abs()), lo.abs().max(hi.abs()));
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(Link::Exponential.evaluate(lo).unwrap() < Link::Exponential.evaluate(hi).unwrap());
        }

        #[test]
        fn symmetric_links(u in -30.0f64..30.0) {
            for link in [Link::Logit, Link::Probit] {
                let s = link.evaluate(u).unwrap() + link.evaluate(-u).unwrap();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }
}
