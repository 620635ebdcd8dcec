//! Seeded single-outcome sampling with Born probabilities.
//!
//! Draws come from splitmix64. A 64-bit output `k` stands for the rational
//! `k / 2^64` and selects the first outcome `j` with `k / 2^64 < q_1 + ... + q_j`;
//! the comparison is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::OutcomeDistribution;
use crate::rational::{self, Rational};

/// Upper-tail 5% critical values of the chi-square distribution, 1..=9 degrees of freedom.
pub const CHI_SQUARE_95: [f64; 9] = [
    3.841, 5.991, 7.815, 9.488, 11.070, 12.592, 14.067, 15.507, 16.919,
];

/// 95% critical value for `df` degrees of freedom, when tabulated.
pub fn chi_square_critical_95(df: usize) -> Option<f64> {
    df.checked_sub(1).and_then(|i| CHI_SQUARE_95.get(i).copied())
}

/// splitmix64 (Steele, Lea, Flood).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `0..bound`, by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

/// `N` outcome indices in `1..=n` drawn from one seeded stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleRun {
    pub seed: u64,
    pub outcomes: Vec<usize>,
}

impl SampleRun {
    pub fn runs(&self) -> usize {
        self.outcomes.len()
    }
}

/// `ceil(c * 2^64)` for each cumulative weight `c`. A draw `k` lands in outcome
/// `j` iff `k < threshold[j]` and not below any earlier threshold.
fn thresholds(dist: &OutcomeDistribution) -> Vec<u128> {
    let scale = BigInt::from(1u128 << 64);
    let mut cumulative = Rational::zero();
    dist.weights()
        .iter()
        .map(|q| {
            cumulative += q;
            let scaled = cumulative.numer() * &scale;
            let (quot, rem) = scaled.div_rem(cumulative.denom());
            let ceil = if rem.is_zero() { quot } else { quot + 1 };
            ceil.to_u128().expect("cumulative weight is at most 1")
        })
        .collect()
}

pub fn sample_runs(dist: &OutcomeDistribution, runs: usize, seed: u64) -> Result<SampleRun> {
    if runs == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let cuts = thresholds(dist);
    let mut rng = SplitMix64::new(seed);
    let outcomes = (0..runs)
        .map(|_| {
            let k = u128::from(rng.next_u64());
            // The last threshold is 2^64, so some outcome always matches.
            cuts.iter().position(|&t| k < t).expect("threshold covers the draw") + 1
        })
        .collect();
    Ok(SampleRun { seed, outcomes })
}

/// Per-outcome tallies.
pub fn outcome_counts(run: &SampleRun, n: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; n];
    for &o in &run.outcomes {
        if o == 0 || o > n {
            return Err(Error::IndexOutOfRange { index: o, n });
        }
        counts[o - 1] += 1;
    }
    Ok(counts)
}

/// `count_j / N` as exact rationals.
pub fn empirical_frequencies(run: &SampleRun, n: usize) -> Result<Vec<Rational>> {
    let counts = outcome_counts(run, n)?;
    let total = run.runs() as i64;
    if total == 0 {
        return Err(Error::InvalidArgument("empty run".into()));
    }
    Ok(counts
        .into_iter()
        .map(|c| rational::ratio(c as i64, total))
        .collect())
}

/// Pearson statistic `sum_j (count_j - N q_j)^2 / (N q_j)`. Requires every
/// expected count to be at least 5.
pub fn chi_square_from_counts(counts: &[u64], dist: &OutcomeDistribution) -> Result<f64> {
    if counts.len() != dist.n() {
        return Err(Error::DimensionMismatch {
            expected: dist.n(),
            found: counts.len(),
        });
    }
    let total: u64 = counts.iter().sum();
    let runs = rational::from_int(total);
    let five = rational::from_int(5);
    let mut stat = 0.0;
    for (j, (&c, q)) in counts.iter().zip(dist.weights()).enumerate() {
        let expected = q * &runs;
        if expected < five {
            return Err(Error::ExpectedCountTooSmall {
                outcome: j + 1,
                expected: rational::format_rational(&expected),
            });
        }
        // Exact numerator, one rounding at the end of each term.
        let diff = rational::from_int(c) - &expected;
        stat += rational::to_f64(&(&diff * &diff / &expected));
    }
    Ok(stat)
}

pub fn chi_square_statistic(run: &SampleRun, dist: &OutcomeDistribution) -> Result<f64> {
    chi_square_from_counts(&outcome_counts(run, dist.n())?, dist)
}
