//! Finite-blocklength mutual-information maximization and the capacity
//! lower bounds it certifies.

use serde::Serialize;

use crate::bounds::{certified_bound_at, BoundCurve};
use crate::combinatorics::binomial_entropy;
use crate::error::{check_probability, Error, Result};
use crate::info::xlog2x;
use crate::exact::{check_blocklength, deletion_law, FiniteLaw, InputDistribution, MAX_EXACT_N};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Input probabilities below this are set to zero.
const PROB_FLOOR: f64 = 1e-300;

/// Allowed per-step decrease of the objective before it counts as a
/// monotonicity failure.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Validity note for bounds derived from finite-blocklength information.
pub const LOWER_BOUND_CONDITION: &str =
    "conditional on the finite-length inequality I(X;Y|N=n) <= n C(d) + H(D|N=n) for the deletion channel";

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub max_info: f64,
    #[serde(skip)]
    pub argmax: InputDistribution,
    pub iterations: usize,
    /// `max_x D(W(.|x) || q) - I`, an upper bound on the remaining gap.
    pub gap_estimate: f64,
    pub converged: bool,
    /// Objective value after every iteration, starting from the uniform input.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl OptimizationResult {
    /// Largest drop between consecutive objective values (zero if none).
    pub fn worst_decrease(&self) -> f64 {
        self.objective_trace
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

struct SparseRow {
    /// `(output index, W(y|x))` for the nonzero entries.
    entries: Vec<(usize, f64)>,
    /// `sum_y W log2 W`.
    neg_entropy: f64,
}

/// Blahut-Arimoto iteration on an exact law, starting from the uniform input.
///
/// Inputs floored to zero stay at zero and drop out of the gap maximum, so
/// after a floor the certificate covers the remaining support.
pub fn finite_n_max_info(law: &FiniteLaw, tol: f64, max_iter: usize) -> Result<OptimizationResult> {
    check_blocklength(law.n(), MAX_EXACT_N)?;
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be nonnegative")));
    }
    let inputs = law.num_inputs();
    let rows: Vec<SparseRow> = (0..inputs)
        .map(|x| {
            let entries: Vec<(usize, f64)> = law
                .row(x)
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(y, &w)| (y, w))
                .collect();
            let neg_entropy = entries.iter().map(|&(_, w)| xlog2x(w)).sum();
            SparseRow { entries, neg_entropy }
        })
        .collect();

    let mut p = vec![1.0 / inputs as f64; inputs];
    let mut log_q = vec![0.0; law.num_outputs()];
    let mut score = vec![f64::NEG_INFINITY; inputs];
    let mut trace = Vec::new();
    let mut iterations = 0;

    loop {
        // q = p W, kept as log2 q
        log_q.iter_mut().for_each(|v| *v = 0.0);
        for (row, &px) in rows.iter().zip(&p) {
            if px > 0.0 {
                for &(y, w) in &row.entries {
                    log_q[y] += px * w;
                }
            }
        }
        log_q.iter_mut().for_each(|v| *v = v.max(f64::MIN_POSITIVE).log2());
        // score[x] = D(W(.|x) || q) on the live support
        for ((s, row), &px) in score.iter_mut().zip(&rows).zip(&p) {
            *s = if px > 0.0 {
                row.neg_entropy - row.entries.iter().map(|&(y, w)| w * log_q[y]).sum::<f64>()
            } else {
                f64::NEG_INFINITY
            };
        }
        let info: f64 = p
            .iter()
            .zip(&score)
            .filter(|(&px, _)| px > 0.0)
            .map(|(px, s)| px * s)
            .sum::<f64>()
            .max(0.0);
        let upper = score.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gap = (upper - info).max(0.0);
        trace.push(info);

        if gap <= tol || iterations >= max_iter {
            return Ok(OptimizationResult {
                max_info: info,
                argmax: InputDistribution::new(law.n(), normalized(p))?,
                iterations,
                gap_estimate: gap,
                converged: gap <= tol,
                objective_trace: trace,
            });
        }

        // p(x) <- p(x) 2^score(x) / Z, shifted by the max score for stability
        let mut total = 0.0;
        for (px, s) in p.iter_mut().zip(&score) {
            if *px > 0.0 {
                *px *= (s - upper).exp2();
                total += *px;
            }
        }
        for px in p.iter_mut() {
            *px /= total;
            if *px < PROB_FLOOR {
                *px = 0.0;
            }
        }
        iterations += 1;
    }
}

fn normalized(mut p: Vec<f64>) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteNLowerBound {
    pub n: usize,
    pub d: f64,
    /// Lower bound on `C(d)` in bits per symbol; may be negative (vacuous).
    pub value: f64,
    pub max_info: f64,
    pub length_entropy: f64,
    pub gap_estimate: f64,
    pub converged: bool,
}

/// `(max_P I(X;Y) - H(Binomial(n, d))) / n`, a lower bound on `C(d)`.
pub fn lower_bound_from_finite_n(n: usize, d: f64, tol: f64, max_iter: usize) -> Result<FiniteNLowerBound> {
    check_probability("d", d)?;
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be positive".into()));
    }
    let opt = finite_n_max_info(&deletion_law(n, d)?, tol, max_iter)?;
    let length_entropy = binomial_entropy(n as u64, d);
    Ok(FiniteNLowerBound {
        n,
        d,
        value: (opt.max_info - length_entropy) / n as f64,
        max_info: opt.max_info,
        length_entropy,
        gap_estimate: opt.gap_estimate,
        converged: opt.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub d: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SanityReport {
    pub pass: bool,
    pub checked: usize,
    /// Lower bounds at `d` the upper curve cannot reach (below its first anchor).
    pub unchecked: Vec<f64>,
    pub violations: Vec<Crossing>,
}

/// Fails iff some lower bound exceeds the upper curve at the same `d` by more
/// than `1e-9`. The upper value at `d` is the best bound the curve's anchors
/// certify there, never an interpolation.
pub fn sanity_check(upper: &BoundCurve, lowers: &[(f64, f64)]) -> SanityReport {
    let mut report = SanityReport {
        pass: true,
        checked: 0,
        unchecked: Vec::new(),
        violations: Vec::new(),
    };
    for &(d, lower) in lowers {
        match certified_bound_at(upper, d) {
            Some(point) => {
                report.checked += 1;
                if lower > point.value + 1e-9 {
                    report.pass = false;
                    report.violations.push(Crossing {
                        d,
                        lower,
                        upper: point.value,
                    });
                }
            }
            None => report.unchecked.push(d),
        }
    }
    report
}
