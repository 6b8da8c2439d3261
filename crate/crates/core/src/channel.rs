//! Channel parameters and the parameter-level composition rules.
//!
//! A deletion/substitution channel deletes each input bit with probability
//! `d`, flips it with probability `f`, and delivers it intact otherwise. The
//! pure deletion channel is the `f = 0` case. Such a channel factors into a
//! deletion channel followed by a binary symmetric channel with crossover
//! `s = f / (1 - d)` acting on the survivors.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Absolute tolerance on probability sums and the `f <= 1 - d` constraint.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    d: f64,
    f: f64,
}

impl ChannelParams {
    /// Validated constructor: `0 <= d <= 1` and `0 <= f <= 1 - d`.
    pub fn new(d: f64, f: f64) -> Result<Self> {
        check_probability("d", d)?;
        check_probability("f", f)?;
        if f > 1.0 - d + PROB_TOL {
            return Err(Error::FlipExceedsSurvival { d, f });
        }
        Ok(Self { d, f: f.min(1.0 - d) })
    }

    /// Pure deletion channel.
    pub fn deletion(d: f64) -> Result<Self> {
        Self::new(d, 0.0)
    }

    /// Builds the channel from its serialized form: deletion `d` followed by a
    /// BSC with crossover `s`, so `f = (1 - d) s`.
    pub fn from_serial(d: f64, s: f64) -> Result<Self> {
        check_probability("d", d)?;
        check_probability("s", s)?;
        Self::new(d, (1.0 - d) * s)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    /// Probability that a bit arrives unchanged.
    pub fn keep(&self) -> f64 {
        (1.0 - self.d - self.f).max(0.0)
    }

    /// Crossover of the serialized BSC; zero when every bit is deleted.
    pub fn s(&self) -> f64 {
        if self.d >= 1.0 {
            0.0
        } else {
            (self.f / (1.0 - self.d)).min(1.0)
        }
    }

    /// `(d, s)` pair of the deletion-then-BSC factorization.
    pub fn serial(&self) -> (f64, f64) {
        (self.d, self.s())
    }

    pub fn is_pure_deletion(&self) -> bool {
        self.f == 0.0
    }
}

/// Parallel concatenation: each input bit is routed independently to
/// component `p` with probability `lambda_p`; survivors are merged in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatenationSpec {
    components: Vec<(f64, ChannelParams)>,
}

impl ConcatenationSpec {
    pub fn new(components: Vec<(f64, ChannelParams)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyConcatenation);
        }
        for (weight, _) in &components {
            check_probability("lambda", *weight)?;
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::WeightSum(total));
        }
        Ok(Self { components })
    }

    /// Two deletion channels chosen with probabilities `lambda` and `1 - lambda`.
    pub fn two_deletion(lambda: f64, d1: f64, d2: f64) -> Result<Self> {
        check_probability("lambda", lambda)?;
        Self::new(vec![
            (lambda, ChannelParams::deletion(d1)?),
            (1.0 - lambda, ChannelParams::deletion(d2)?),
        ])
    }

    pub fn components(&self) -> &[(f64, ChannelParams)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The single channel the mixture is equivalent to: weighted means of the
    /// component deletion and flip probabilities.
    pub fn mixture_equivalent(&self) -> ChannelParams {
        let d: f64 = self.components.iter().map(|(w, p)| w * p.d).sum();
        let f: f64 = self.components.iter().map(|(w, p)| w * p.f).sum();
        let d = d.clamp(0.0, 1.0);
        ChannelParams {
            d,
            f: f.clamp(0.0, 1.0 - d),
        }
    }
}
