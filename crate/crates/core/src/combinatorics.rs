//! Closed forms for the output lengths `M1`, `M2` of the two-channel
//! mixture, and the entropy terms that bound the interleaving information.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{check_probability, Result};
use crate::info::xlog2x;

/// Above this `n` binomial coefficients are evaluated in log space.
const DIRECT_BINOMIAL_MAX: u64 = 60;

/// `C(n, k)` as a float; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= DIRECT_BINOMIAL_MAX {
        // exact in u128 for n <= 60
        let mut c: u128 = 1;
        for j in 0..k {
            c = c * (n - j) as u128 / (j + 1) as u128;
        }
        c as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

/// `log2 C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "log_binomial needs k <= n (got n={n}, k={k})");
    if k == 0 || k == n {
        return 0.0;
    }
    if n <= DIRECT_BINOMIAL_MAX {
        binomial(n, k).log2()
    } else {
        ln_binomial(n, k) / std::f64::consts::LN_2
    }
}

/// Binomial pmf, evaluated in log space.
pub fn binomial_pmf(n: u64, k: u64, q: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if q == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n <= DIRECT_BINOMIAL_MAX {
        return binomial(n, k) * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
    }
    (ln_binomial(n, k) + k as f64 * q.ln() + (n - k) as f64 * (1.0 - q).ln()).exp()
}

/// Entropy of `Binomial(n, q)` in bits.
pub fn binomial_entropy(n: u64, q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -(0..=n).map(|k| xlog2x(binomial_pmf(n, k, q))).sum::<f64>()
}

/// Parameters of the two-channel mixture seen through its output lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureCounts {
    pub n: usize,
    pub lambda: f64,
    pub d1: f64,
    pub d2: f64,
}

impl MixtureCounts {
    pub fn new(n: usize, lambda: f64, d1: f64, d2: f64) -> Result<Self> {
        check_probability("lambda", lambda)?;
        check_probability("d1", d1)?;
        check_probability("d2", d2)?;
        Ok(Self { n, lambda, d1, d2 })
    }

    /// Deletion probability of the equivalent single channel.
    pub fn d(&self) -> f64 {
        self.lambda * self.d1 + (1.0 - self.lambda) * self.d2
    }

    /// `P(M1 = m1, M2 = m2)`, a trinomial over (channel-1 survivor,
    /// channel-2 survivor, deleted).
    pub fn pmf_m1_m2(&self, m1: usize, m2: usize) -> f64 {
        let n = self.n;
        if m1 + m2 > n {
            return 0.0;
        }
        let a = self.lambda * (1.0 - self.d1);
        let b = (1.0 - self.lambda) * (1.0 - self.d2);
        binomial((n - m2) as u64, m1 as u64)
            * binomial(n as u64, m2 as u64)
            * a.powi(m1 as i32)
            * b.powi(m2 as i32)
            * self.d().powi((n - m1 - m2) as i32)
    }

    /// Channel-2 survivors are `Binomial(n, (1-lambda)(1-d2))`.
    pub fn pmf_m2(&self, m2: usize) -> f64 {
        binomial_pmf(self.n as u64, m2 as u64, self.m2_success())
    }

    pub fn mean_m2(&self) -> f64 {
        self.n as f64 * self.m2_success()
    }

    fn m2_success(&self) -> f64 {
        (1.0 - self.lambda) * (1.0 - self.d2)
    }

    /// Probability that a bit does not survive channel 2, i.e. is routed to
    /// channel 1 or deleted by channel 2.
    fn not_m2(&self) -> f64 {
        self.lambda + (1.0 - self.lambda) * self.d2
    }

    /// `P(M1 = m1 | M2 = m2)`: given `m2`, the remaining `n - m2` bits survive
    /// channel 1 independently with probability `lambda (1-d1) / (lambda + (1-lambda) d2)`.
    pub fn pmf_m1_given_m2(&self, m1: usize, m2: usize) -> f64 {
        if m2 > self.n || m1 + m2 > self.n {
            return 0.0;
        }
        let rest = self.n - m2;
        let denom = self.not_m2();
        if denom == 0.0 {
            return if m1 == 0 { 1.0 } else { 0.0 };
        }
        binomial_pmf(rest as u64, m1 as u64, self.lambda * (1.0 - self.d1) / denom)
    }

    /// `E{M1 | M2 = m2} = (n - m2) lambda (1-d1) / (lambda + (1-lambda) d2)`.
    pub fn cond_expect_m1_given_m2(&self, m2: usize) -> f64 {
        let denom = self.not_m2();
        if denom == 0.0 || m2 >= self.n {
            return 0.0;
        }
        (self.n - m2) as f64 * self.lambda * (1.0 - self.d1) / denom
    }
}

/// Largest deviations of the closed forms from a symbol-by-symbol
/// enumeration of the `(M1, M2)` law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthLawDeviations {
    /// `|sum P(M1, M2) - 1|`.
    pub normalization: f64,
    /// `max |sum_m1 P(m1, m2) - Binomial(n, (1-lambda)(1-d2))(m2)|`.
    pub marginal_m2: f64,
    /// `max |E{M1 | M2 = m} - sum_m1 m1 P(m1 | m)|` over `m` with `P(M2 = m) > 0`.
    pub conditional_mean: f64,
    /// `max |P(M1, M2) - enumerated|`.
    pub joint: f64,
}

impl LengthLawDeviations {
    pub fn max(&self) -> f64 {
        self.normalization
            .max(self.marginal_m2)
            .max(self.conditional_mean)
            .max(self.joint)
    }
}

/// `table[m1][m2]` built by adding one symbol at a time.
fn enumerate_counts(counts: &MixtureCounts) -> Vec<Vec<f64>> {
    let n = counts.n;
    let a = counts.lambda * (1.0 - counts.d1);
    let b = (1.0 - counts.lambda) * (1.0 - counts.d2);
    let c = counts.d();
    let mut table = vec![vec![0.0; n + 1]; n + 1];
    table[0][0] = 1.0;
    for k in 0..n {
        let mut next = vec![vec![0.0; n + 1]; n + 1];
        for m1 in 0..=k {
            for m2 in 0..=k - m1 {
                let p = table[m1][m2];
                next[m1][m2] += p * c;
                next[m1 + 1][m2] += p * a;
                next[m1][m2 + 1] += p * b;
            }
        }
        table = next;
    }
    table
}

pub fn length_law_deviations(counts: &MixtureCounts) -> LengthLawDeviations {
    let n = counts.n;
    let table = enumerate_counts(counts);
    let mut dev = LengthLawDeviations {
        normalization: 0.0,
        marginal_m2: 0.0,
        conditional_mean: 0.0,
        joint: 0.0,
    };
    let mut total = 0.0;
    for m2 in 0..=n {
        let mut marginal = 0.0;
        let mut first_moment = 0.0;
        let mut enumerated = 0.0;
        for m1 in 0..=n - m2 {
            let p = counts.pmf_m1_m2(m1, m2);
            total += p;
            marginal += p;
            first_moment += m1 as f64 * table[m1][m2];
            enumerated += table[m1][m2];
            dev.joint = dev.joint.max((p - table[m1][m2]).abs());
        }
        dev.marginal_m2 = dev.marginal_m2.max((marginal - counts.pmf_m2(m2)).abs());
        if enumerated > 0.0 {
            let mean = first_moment / enumerated;
            dev.conditional_mean = dev
                .conditional_mean
                .max((mean - counts.cond_expect_m1_given_m2(m2)).abs());
        }
    }
    dev.normalization = (total - 1.0).abs();
    dev
}

/// Per-symbol bound on the interleaving information:
/// `(1-d) log(1-d) - lambda(1-d1) log(lambda(1-d1)) - (1-lambda)(1-d2) log((1-lambda)(1-d2))`.
pub fn i3_bound_per_symbol(lambda: f64, d1: f64, d2: f64) -> f64 {
    let d = lambda * d1 + (1.0 - lambda) * d2;
    let a = lambda * (1.0 - d1);
    let b = (1.0 - lambda) * (1.0 - d2);
    // algebraically (1-d) H_b(a / (1-d)) >= 0; clamp rounding noise
    (xlog2x(1.0 - d) - xlog2x(a) - xlog2x(b)).max(0.0)
}

/// `(m1 + m2) log(m1 + m2) - m1 log m1 - m2 log m2`, the entropy-style bound
/// on `log C(m1 + m2, m2)` extended to real arguments.
fn split_surrogate(m1: f64, m2: f64) -> f64 {
    xlog2x(m1 + m2) - xlog2x(m1) - xlog2x(m2)
}

/// The three successively looser bounds on the interleaving information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct I3Chain {
    /// `E log2 C(M1 + M2, M2)` under the exact joint pmf.
    pub exact: f64,
    /// Surrogate at `E{M1|M2}`, averaged over the exact pmf of `M2`.
    pub jensen1: f64,
    /// Surrogate at both means: `n` times [`i3_bound_per_symbol`].
    pub jensen2: f64,
}

impl I3Chain {
    pub fn is_ordered(&self, slack: f64) -> bool {
        self.exact <= self.jensen1 + slack && self.jensen1 <= self.jensen2 + slack
    }
}

pub fn i3_chain(n: usize, lambda: f64, d1: f64, d2: f64) -> Result<I3Chain> {
    let counts = MixtureCounts::new(n, lambda, d1, d2)?;
    let mut exact = 0.0;
    for m2 in 0..=n {
        for m1 in 0..=n - m2 {
            let p = counts.pmf_m1_m2(m1, m2);
            if p > 0.0 {
                exact += p * log_binomial((m1 + m2) as u64, m2 as u64);
            }
        }
    }
    let jensen1 = (0..=n)
        .map(|m2| {
            let p = counts.pmf_m2(m2);
            if p == 0.0 {
                0.0
            } else {
                p * split_surrogate(counts.cond_expect_m1_given_m2(m2), m2 as f64)
            }
        })
        .sum();
    Ok(I3Chain {
        exact,
        jensen1,
        jensen2: n as f64 * i3_bound_per_symbol(lambda, d1, d2),
    })
}
