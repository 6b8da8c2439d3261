//! Seeded simulation of single and parallel-concatenated channels.
//!
//! All randomness comes from ChaCha8 streams: a run with seed `s` uses
//! stream `k` of the generator keyed by `s` for its `k`-th independent block
//! of work, so results do not depend on how blocks are scheduled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::channel::{ChannelParams, ConcatenationSpec};
use crate::combinatorics::MixtureCounts;
use crate::error::{Error, Result};
use crate::exact::{check_blocklength, deletion_law, InputDistribution, MAX_EXACT_N};

/// Identifier recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3), stream = work-block index";

/// Trials simulated per RNG stream in the batch statistics.
const TRIALS_PER_STREAM: usize = 10_000;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random input law on `n`-bit strings, drawn uniformly from the simplex.
pub fn random_input<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<InputDistribution> {
    check_blocklength(n, MAX_EXACT_N)?;
    let weights = (0..1usize << n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    InputDistribution::from_weights(n, weights)
}

/// Outcome of one symbol through one channel.
#[inline]
fn transmit<R: Rng + ?Sized>(bit: u8, params: &ChannelParams, rng: &mut R) -> Option<u8> {
    let u: f64 = rng.gen();
    if u < params.d() {
        None
    } else if u < params.d() + params.f() {
        Some(bit ^ 1)
    } else {
        Some(bit)
    }
}

/// Passes `x` through a deletion/substitution channel.
pub fn sample_channel<R: Rng + ?Sized>(x: &[u8], params: &ChannelParams, rng: &mut R) -> Vec<u8> {
    x.iter().filter_map(|&b| transmit(b, params, rng)).collect()
}

/// One use of the two-channel mixture with all side information recorded.
/// Channel labels are 1 and 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MixtureTrace {
    pub x: Vec<u8>,
    pub fx: Vec<u8>,
    pub x1: Vec<u8>,
    pub x2: Vec<u8>,
    pub y1: Vec<u8>,
    pub y2: Vec<u8>,
    pub fy: Vec<u8>,
    pub y: Vec<u8>,
}

impl MixtureTrace {
    pub fn m1(&self) -> usize {
        self.y1.len()
    }

    pub fn m2(&self) -> usize {
        self.y2.len()
    }

    /// Rebuilds `y` from the two output streams and the interleaving.
    pub fn merged(&self) -> Option<Vec<u8>> {
        merge(&self.y1, &self.y2, &self.fy)
    }
}

pub fn merge(y1: &[u8], y2: &[u8], fy: &[u8]) -> Option<Vec<u8>> {
    if fy.len() != y1.len() + y2.len() {
        return None;
    }
    let (mut a, mut b) = (y1.iter(), y2.iter());
    fy.iter()
        .map(|&c| match c {
            1 => a.next().copied(),
            2 => b.next().copied(),
            _ => None,
        })
        .collect()
}

pub fn sample_mixture<R: Rng + ?Sized>(
    x: &[u8],
    spec: &ConcatenationSpec,
    rng: &mut R,
) -> Result<MixtureTrace> {
    let [(lambda, first), (_, second)] = spec.components() else {
        return Err(Error::ComponentCount {
            expected: 2,
            got: spec.len(),
        });
    };
    let mut trace = MixtureTrace {
        x: x.to_vec(),
        fx: Vec::with_capacity(x.len()),
        x1: Vec::new(),
        x2: Vec::new(),
        y1: Vec::new(),
        y2: Vec::new(),
        fy: Vec::new(),
        y: Vec::new(),
    };
    for &bit in x {
        let to_first = rng.gen::<f64>() < *lambda;
        let (label, params, xs, ys) = if to_first {
            (1, first, &mut trace.x1, &mut trace.y1)
        } else {
            (2, second, &mut trace.x2, &mut trace.y2)
        };
        trace.fx.push(label);
        xs.push(bit);
        if let Some(out) = transmit(bit, params, rng) {
            ys.push(out);
            trace.fy.push(label);
            trace.y.push(out);
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    /// Largest total-variation distance over all inputs.
    pub max_tv: f64,
    /// Acceptance threshold `3 sqrt(K / trials)` of the worst input.
    pub threshold: f64,
    pub pass: bool,
}

/// Goodness of fit of the simulated two-deletion-channel mixture against the
/// exact single deletion channel, for every input of length `n`.
pub fn gof_mixture_vs_single(
    n: usize,
    d1: f64,
    d2: f64,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> Result<GofReport> {
    check_blocklength(n, MAX_EXACT_N)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let spec = ConcatenationSpec::two_deletion(lambda, d1, d2)?;
    let law = deletion_law(n, spec.mixture_equivalent().d())?;
    let mut report = GofReport {
        max_tv: 0.0,
        threshold: f64::INFINITY,
        pass: true,
    };
    let mut counts = vec![0u64; law.num_outputs()];
    for x in BitString::all_of_len(n) {
        let mut rng = rng_for(seed, x.bits() as u64);
        let symbols = x.symbols();
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..trials {
            let trace = sample_mixture(&symbols, &spec, &mut rng)?;
            let y = BitString::from_symbols(&trace.y)?;
            counts[y.index()] += 1;
        }
        let row = law.row(x.bits() as usize);
        let tv = 0.5
            * row
                .iter()
                .zip(&counts)
                .map(|(&p, &c)| (p - c as f64 / trials as f64).abs())
                .sum::<f64>();
        let support = row.iter().filter(|&&p| p > 0.0).count();
        let threshold = 3.0 * (support as f64 / trials as f64).sqrt();
        if tv > report.max_tv {
            report.max_tv = tv;
            report.threshold = threshold;
        }
        report.pass &= tv <= threshold;
    }
    if report.threshold.is_infinite() {
        report.threshold = 0.0;
    }
    Ok(report)
}

/// Per-trial output lengths of the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub m1: usize,
    pub m2: usize,
    pub y_len: usize,
}

/// Simulates `trials` uses of the mixture on uniformly random inputs.
pub fn simulate_trials(
    n: usize,
    lambda: f64,
    d1: f64,
    d2: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    let spec = ConcatenationSpec::two_deletion(lambda, d1, d2)?;
    let mut records = Vec::with_capacity(trials);
    let mut x = vec![0u8; n];
    for (stream, start) in (0..trials).step_by(TRIALS_PER_STREAM).enumerate() {
        let mut rng = rng_for(seed, stream as u64);
        for trial in start..(start + TRIALS_PER_STREAM).min(trials) {
            x.iter_mut().for_each(|b| *b = rng.gen_range(0..=1));
            let trace = sample_mixture(&x, &spec, &mut rng)?;
            debug_assert_eq!(trace.merged().as_ref(), Some(&trace.y));
            records.push(TrialRecord {
                trial,
                m1: trace.m1(),
                m2: trace.m2(),
                y_len: trace.y.len(),
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub count: u64,
}

impl Estimate {
    fn from_samples(samples: impl Iterator<Item = f64>) -> Self {
        let (mut count, mut sum, mut sum_sq) = (0u64, 0.0, 0.0);
        for v in samples {
            count += 1;
            sum += v;
            sum_sq += v * v;
        }
        if count == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                count,
            };
        }
        let mean = sum / count as f64;
        let var = if count > 1 {
            ((sum_sq - count as f64 * mean * mean) / (count - 1) as f64).max(0.0)
        } else {
            f64::NAN
        };
        Self {
            mean,
            stderr: (var / count as f64).sqrt(),
            count,
        }
    }

    /// Whether `value` lies within `k` standard errors. A zero standard
    /// error (constant samples) demands equality up to rounding.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr + 1e-12
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MStats {
    pub trials: usize,
    pub m2: Estimate,
    pub y_len: Estimate,
    /// `E{M1 | M2 = m}` estimates, indexed by `m`.
    pub m1_given_m2: Vec<Estimate>,
    /// `joint_hist[m1][m2]` trial counts.
    pub joint_hist: Vec<Vec<u64>>,
}

impl MStats {
    pub fn from_records(n: usize, records: &[TrialRecord]) -> Self {
        let mut joint_hist = vec![vec![0u64; n + 1]; n + 1];
        for r in records {
            joint_hist[r.m1][r.m2] += 1;
        }
        let m1_given_m2 = (0..=n)
            .map(|m| Estimate::from_samples(records.iter().filter(|r| r.m2 == m).map(|r| r.m1 as f64)))
            .collect();
        Self {
            trials: records.len(),
            m2: Estimate::from_samples(records.iter().map(|r| r.m2 as f64)),
            y_len: Estimate::from_samples(records.iter().map(|r| r.y_len as f64)),
            m1_given_m2,
            joint_hist,
        }
    }

    /// Checks the closed forms for `E{M2}`, `E{|Y|}` and every `E{M1|M2=m}`
    /// backed by at least `min_count` trials against `k`-sigma bands.
    pub fn check_against(&self, counts: &MixtureCounts, k: f64, min_count: u64) -> Vec<BandCheck> {
        let mut checks = vec![
            BandCheck::new("E{M2}", None, &self.m2, counts.mean_m2(), k),
            BandCheck::new("E{|Y|}", None, &self.y_len, counts.n as f64 * (1.0 - counts.d()), k),
        ];
        for (m, est) in self.m1_given_m2.iter().enumerate() {
            if est.count >= min_count {
                checks.push(BandCheck::new("E{M1|M2}", Some(m), est, counts.cond_expect_m1_given_m2(m), k));
            }
        }
        checks
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandCheck {
    pub quantity: &'static str,
    pub m2: Option<usize>,
    pub empirical: f64,
    pub stderr: f64,
    pub expected: f64,
    pub pass: bool,
}

impl BandCheck {
    fn new(quantity: &'static str, m2: Option<usize>, est: &Estimate, expected: f64, k: f64) -> Self {
        Self {
            quantity,
            m2,
            empirical: est.mean,
            stderr: est.stderr,
            expected,
            pass: est.covers(expected, k),
        }
    }
}

/// Empirical statistics of `(M1, M2)`; needs at least 1000 trials.
pub fn empirical_m_stats(
    n: usize,
    lambda: f64,
    d1: f64,
    d2: f64,
    trials: usize,
    seed: u64,
) -> Result<MStats> {
    if trials < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 trials, got {trials}")));
    }
    let records = simulate_trials(n, lambda, d1, d2, trials, seed)?;
    Ok(MStats::from_records(n, &records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_inputs_are_normalized() {
        let mut rng = rng_for(7, 0);
        let a = random_input(4, &mut rng).unwrap();
        let b = random_input(4, &mut rng).unwrap();
        assert_ne!(a, b);
        assert!((a.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.probs().iter().all(|&p| p > 0.0));
        assert!(random_input(11, &mut rng).is_err());
    }

    #[test]
    fn trivial_channels() {
        let mut rng = rng_for(1, 0);
        let x: Vec<u8> = (0..200).map(|i| (i % 3 == 0) as u8).collect();
        let clean = ChannelParams::new(0.0, 0.0).unwrap();
        assert_eq!(sample_channel(&x, &clean, &mut rng), x);
        let dead = ChannelParams::new(1.0, 0.0).unwrap();
        assert!(sample_channel(&x, &dead, &mut rng).is_empty());
        let inverter = ChannelParams::new(0.0, 1.0).unwrap();
        let flipped: Vec<u8> = x.iter().map(|b| b ^ 1).collect();
        assert_eq!(sample_channel(&x, &inverter, &mut rng), flipped);
    }

    #[test]
    fn output_length_concentrates() {
        let n = 100_000usize;
        let x = vec![1u8; n];
        let y = sample_channel(&x, &ChannelParams::deletion(0.3).unwrap(), &mut rng_for(42, 0));
        let sigma = (n as f64 * 0.3 * 0.7).sqrt();
        assert!((y.len() as f64 - 70_000.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn mixture_traces() {
        let x: Vec<u8> = (0..50).map(|i| (i % 2) as u8).collect();
        let single = ConcatenationSpec::two_deletion(1.0, 0.4, 0.1).unwrap();
        let lossless = ConcatenationSpec::two_deletion(0.5, 0.0, 0.0).unwrap();
        let mut rng = rng_for(7, 0);
        for _ in 0..20 {
            let t = sample_mixture(&x, &single, &mut rng).unwrap();
            assert!(t.fx.iter().all(|&c| c == 1));
            assert!(t.y2.is_empty() && t.x2.is_empty());

            let t = sample_mixture(&x, &lossless, &mut rng).unwrap();
            assert_eq!(t.y, x);
            assert_eq!(t.merged(), Some(t.y.clone()));
            assert_eq!(t.fx, t.fy);
        }
    }

    #[test]
    fn mixture_needs_two_components() {
        let ch = ChannelParams::deletion(0.2).unwrap();
        let three = ConcatenationSpec::new(vec![(0.2, ch), (0.3, ch), (0.5, ch)]).unwrap();
        assert!(matches!(
            sample_mixture(&[0, 1], &three, &mut rng_for(0, 0)),
            Err(Error::ComponentCount { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn merge_reconstructs() {
        let spec = ConcatenationSpec::new(vec![
            (0.4, ChannelParams::new(0.3, 0.1).unwrap()),
            (0.6, ChannelParams::new(0.5, 0.05).unwrap()),
        ])
        .unwrap();
        let mut rng = rng_for(3, 9);
        for _ in 0..500 {
            let x: Vec<u8> = (0..30).map(|_| rng.gen_range(0..=1)).collect();
            let t = sample_mixture(&x, &spec, &mut rng).unwrap();
            assert_eq!(t.merged(), Some(t.y.clone()));
            assert_eq!(t.fx.len(), t.x.len());
            assert_eq!(t.fy.iter().filter(|&&c| c == 1).count(), t.y1.len());
            assert_eq!(t.fy.iter().filter(|&&c| c == 2).count(), t.y2.len());
        }
        assert_eq!(merge(&[1], &[0], &[2, 1]), Some(vec![0, 1]));
        assert_eq!(merge(&[1], &[], &[2]), None);
    }

    #[test]
    fn determinism() {
        let a = simulate_trials(12, 0.3, 0.2, 0.5, 25_000, 99).unwrap();
        let b = simulate_trials(12, 0.3, 0.2, 0.5, 25_000, 99).unwrap();
        assert_eq!(a, b);
        let c = simulate_trials(12, 0.3, 0.2, 0.5, 25_000, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn m_stats_examples() {
        let stats = empirical_m_stats(20, 0.3, 0.2, 0.5, 100_000, 42).unwrap();
        let counts = MixtureCounts::new(20, 0.3, 0.2, 0.5).unwrap();
        assert!(stats.m2.covers(7.0, 3.0), "{:?}", stats.m2);
        let total: u64 = stats.joint_hist.iter().flatten().sum();
        assert_eq!(total, 100_000);
        assert!(stats.y_len.covers(20.0 * (1.0 - counts.d()), 3.0));

        let stats = empirical_m_stats(4, 0.5, 0.2, 0.5, 100_000, 42).unwrap();
        assert!(stats.m1_given_m2[1].covers(1.6, 3.0), "{:?}", stats.m1_given_m2[1]);

        assert!(empirical_m_stats(4, 0.5, 0.2, 0.5, 999, 42).is_err());
    }

    #[test]
    fn gof_examples() {
        let report = gof_mixture_vs_single(6, 0.2, 0.8, 0.5, 100_000, 42).unwrap();
        assert!(report.pass, "{report:?}");

        // the threshold scales with 1/sqrt(trials)
        let few = gof_mixture_vs_single(6, 0.2, 0.8, 0.5, 100, 42).unwrap();
        assert!(few.threshold > report.threshold * 10.0);

        let same = gof_mixture_vs_single(5, 0.4, 0.4, 0.5, 20_000, 5).unwrap();
        assert!(same.pass);
    }
}
