//! Exact finite-blocklength transition laws.
//!
//! A [`FiniteLaw`] stores, for every input string of length `n`, the full
//! distribution over output strings of length `0..=n`. Rows are dense and
//! keyed by [`BitString::index`], so two laws over the same `n` can be
//! compared entry by entry.

use crate::bits::{embedding_count, strings_up_to, BitString};
use crate::channel::{ChannelParams, PROB_TOL};
use crate::error::{check_probability, Error, Result};
use crate::genie::RoutingLaw;
use crate::info::xlog2x;

/// Largest blocklength for which exact laws are built.
pub const MAX_EXACT_N: usize = 10;

pub(crate) fn check_blocklength(n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::BlocklengthTooLarge { n, max })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw {
    n: usize,
    outputs: usize,
    probs: Vec<f64>,
}

impl FiniteLaw {
    pub(crate) fn zeros(n: usize) -> Self {
        let outputs = strings_up_to(n);
        Self {
            n,
            outputs,
            probs: vec![0.0; (1 << n) * outputs],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_inputs(&self) -> usize {
        1 << self.n
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs
    }

    /// `P(y | x)`; zero for outputs longer than the input.
    pub fn prob(&self, x: &BitString, y: &BitString) -> f64 {
        assert_eq!(x.len(), self.n, "input length must equal the blocklength");
        if y.len() > self.n {
            return 0.0;
        }
        self.probs[x.bits() as usize * self.outputs + y.index()]
    }

    /// Row of the input with pattern `x`, indexed by output [`BitString::index`].
    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.outputs..(x + 1) * self.outputs]
    }

    pub(crate) fn row_mut(&mut self, x: usize) -> &mut [f64] {
        &mut self.probs[x * self.outputs..(x + 1) * self.outputs]
    }

    /// Nonzero entries of a row as `(y, P(y|x))`, in canonical order.
    pub fn support(&self, x: &BitString) -> impl Iterator<Item = (BitString, f64)> + '_ {
        self.row(x.bits() as usize)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (BitString::from_index(i), p))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.num_inputs()).map(|x| self.row(x).iter().sum()).collect()
    }

    /// Largest `|P(y|x) - Q(y|x)|` over all entries.
    pub fn max_abs_diff(&self, other: &FiniteLaw) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::BlocklengthMismatch(self.n, other.n));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Output distribution induced by an input distribution.
    pub fn output_distribution(&self, input: &InputDistribution) -> Vec<f64> {
        let mut q = vec![0.0; self.outputs];
        for (x, &px) in input.probs().iter().enumerate() {
            if px > 0.0 {
                for (qy, &w) in q.iter_mut().zip(self.row(x)) {
                    *qy += px * w;
                }
            }
        }
        q
    }
}

/// Distribution over all `2^n` inputs of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if n >= 31 {
            return Err(Error::BlocklengthTooLarge { n, max: 30 });
        }
        if probs.len() != 1 << n {
            return Err(Error::InvalidDistribution(format!(
                "expected {} probabilities, got {}",
                1usize << n,
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("negative or NaN entry {bad}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!("mass {total} != 1")));
        }
        Ok(Self { n, probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("weights have no mass".into()));
        }
        Self::new(n, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        let size = 1usize << n;
        Self {
            n,
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point_mass(x: &BitString) -> Self {
        let mut probs = vec![0.0; 1 << x.len()];
        probs[x.bits() as usize] = 1.0;
        Self { n: x.len(), probs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &BitString) -> f64 {
        self.probs[x.bits() as usize]
    }
}

/// i.i.d. deletion channel law: `P(y|x) = #embeddings(y in x) d^(n-|y|) (1-d)^|y|`.
pub fn deletion_law(n: usize, d: f64) -> Result<FiniteLaw> {
    check_blocklength(n, MAX_EXACT_N)?;
    check_probability("d", d)?;
    let weight: Vec<f64> = (0..=n)
        .map(|m| d.powi((n - m) as i32) * (1.0 - d).powi(m as i32))
        .collect();
    let mut law = FiniteLaw::zeros(n);
    for x in BitString::all_of_len(n) {
        let row = law.row_mut(x.bits() as usize);
        for y in BitString::all_up_to(n) {
            let count = embedding_count(&x, &y);
            if count > 0 {
                row[y.index()] = count as f64 * weight[y.len()];
            }
        }
    }
    Ok(law)
}

/// Deletion/substitution law, by enumerating survivor sets and flip patterns.
pub fn delsub_law(n: usize, params: ChannelParams) -> Result<FiniteLaw> {
    check_blocklength(n, MAX_EXACT_N)?;
    let (d, f, keep) = (params.d(), params.f(), params.keep());
    let mut law = FiniteLaw::zeros(n);
    for x in BitString::all_of_len(n) {
        let row = law.row_mut(x.bits() as usize);
        for survivors in 0..1u32 << n {
            let m = survivors.count_ones() as usize;
            let base = d.powi((n - m) as i32);
            if base == 0.0 {
                continue;
            }
            let kept = x.extract(survivors);
            for flips in 0..1u32 << m {
                let w = flips.count_ones() as i32;
                let p = base * keep.powi(m as i32 - w) * f.powi(w);
                if p > 0.0 {
                    row[BitString::raw(m, kept.bits() ^ flips).index()] += p;
                }
            }
        }
    }
    Ok(law)
}

/// `I(X;Y) = H(Y) - H(Y|X)` in bits.
pub fn mutual_information(input: &InputDistribution, law: &FiniteLaw) -> Result<f64> {
    if input.n() != law.n() {
        return Err(Error::BlocklengthMismatch(input.n(), law.n()));
    }
    let q = law.output_distribution(input);
    let h_y = -q.iter().map(|&p| xlog2x(p)).sum::<f64>();
    let h_y_given_x: f64 = input
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &px)| px > 0.0)
        .map(|(x, &px)| -px * law.row(x).iter().map(|&w| xlog2x(w)).sum::<f64>())
        .sum();
    Ok((h_y - h_y_given_x).max(0.0))
}

/// Builds the law of two deletion channels in parallel concatenation by
/// marginalizing the genie-aided routing law, and returns the largest
/// deviation from the single deletion channel with `d = lambda d1 + (1-lambda) d2`.
pub fn verify_lemma1(n: usize, d1: f64, d2: f64, lambda: f64) -> Result<f64> {
    let routing = RoutingLaw::new(n, lambda, d1, d2)?;
    let mixture = routing.channel_law()?;
    let single = deletion_law(n, lambda * d1 + (1.0 - lambda) * d2)?;
    mixture.max_abs_diff(&single)
}
