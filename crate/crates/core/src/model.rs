//! Outcome distributions and the multinomial branch ensemble of `N` repeated
//! `n`-outcome measurements.
//!
//! The `n^N` outcome sequences are grouped into count classes `[m_1..m_n]`.
//! Every quantity computed downstream depends on a sequence only through its
//! class, so the ensemble stores `C(N+n-1, n-1)` classes instead of `n^N`
//! sequences.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Default limit on the number of classes an enumeration may produce.
pub const DEFAULT_CLASS_CAP: u64 = 5_000_000;

/// Born weights `q_j = |a(j)|^2` of an `n`-outcome measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeDistribution {
    weights: Vec<Rational>,
}

impl OutcomeDistribution {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((index, value)) = weights.iter().enumerate().find(|(_, w)| w.is_negative()) {
            return Err(Error::NegativeWeight {
                index,
                value: rational::format_rational(value),
            });
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(Error::NotNormalized {
                sum: rational::format_rational(&sum),
            });
        }
        Ok(Self { weights })
    }

    /// Parses each entry with [`rational::parse_rational`].
    pub fn parse<S: AsRef<str>>(entries: &[S]) -> Result<Self> {
        let weights = entries
            .iter()
            .map(|s| rational::parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, outcome: usize) -> &Rational {
        &self.weights[outcome]
    }

    /// Born targets `N * q_j`.
    pub fn targets(&self, runs: u32) -> Vec<Rational> {
        let runs = rational::from_int(runs);
        self.weights.iter().map(|q| q * &runs).collect()
    }

    /// Reorders outcomes so that outcome `j` of the result is outcome `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n())?;
        Ok(Self {
            weights: perm.iter().map(|&p| self.weights[p].clone()).collect(),
        })
    }

    /// Common denominator `d` and integer numerators `a_j` with `q_j = a_j / d`.
    pub(crate) fn scaled(&self) -> (BigInt, Vec<BigInt>) {
        let d = rational::common_denominator(&self.weights);
        let nums = self
            .weights
            .iter()
            .map(|q| q.numer() * (&d / q.denom()))
            .collect();
        (d, nums)
    }
}

/// Checks the Born-weight invariants and builds the distribution.
pub fn validate_distribution(q: &[Rational]) -> Result<OutcomeDistribution> {
    OutcomeDistribution::new(q.to_vec())
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

/// Outcome-count vector `[m_1..m_n]` of `N = sum m_j` runs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BranchClass {
    counts: Vec<u32>,
}

impl BranchClass {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty);
        }
        let runs: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if runs == 0 || runs > u64::from(u32::MAX) {
            return Err(Error::InvalidArgument(format!(
                "class {counts:?} must cover between 1 and {} runs",
                u32::MAX
            )));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// Total number of runs `N`.
    pub fn runs(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Empirical frequency `m_j / N`.
    pub fn frequency(&self, outcome: usize) -> Rational {
        rational::ratio(i64::from(self.counts[outcome]), i64::from(self.runs()))
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n())?;
        Ok(Self {
            counts: perm.iter().map(|&p| self.counts[p]).collect(),
        })
    }

    fn check_dimension(&self, dist: &OutcomeDistribution) -> Result<()> {
        if self.n() != dist.n() {
            return Err(Error::DimensionMismatch {
                expected: dist.n(),
                found: self.n(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for BranchClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// Number of count classes for `(n, N)`: `C(N+n-1, n-1)`.
pub fn class_count(n: usize, runs: u32) -> BigUint {
    binomial(u64::from(runs) + n as u64 - 1, n as u64 - 1)
}

fn check_enumeration(n: usize, runs: u32, cap: u64) -> Result<()> {
    if n == 0 || runs == 0 {
        return Err(Error::InvalidArgument(format!(
            "enumeration needs n >= 1 and N >= 1 (got n={n}, N={runs})"
        )));
    }
    let count = class_count(n, runs);
    if count > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            what: "class enumeration",
            count,
            cap,
        });
    }
    Ok(())
}

/// Compositions of `N` into `n` nonnegative parts, lexicographically ascending.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<u32>>,
}

impl Compositions {
    pub fn new(n: usize, runs: u32) -> Self {
        let current = (n > 0).then(|| {
            let mut c = vec![0; n];
            c[n - 1] = runs;
            c
        });
        Self { current }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let n = out.len();
        let mut next = out.clone();
        // Rightmost position (excluding the last) with mass to its right.
        let mut suffix = next[n - 1];
        let mut i = n - 1;
        while i > 0 {
            i -= 1;
            if suffix > 0 {
                next[i] += 1;
                for c in &mut next[i + 1..] {
                    *c = 0;
                }
                next[n - 1] = suffix - 1;
                self.current = Some(next);
                break;
            }
            suffix += next[i];
        }
        Some(out)
    }
}

/// All count classes of `(n, N)` in canonical (lexicographic ascending) order.
pub fn enumerate_classes(n: usize, runs: u32, cap: u64) -> Result<Vec<BranchClass>> {
    check_enumeration(n, runs, cap)?;
    Ok(Compositions::new(n, runs)
        .map(|counts| BranchClass { counts })
        .collect())
}

const PASCAL_TABLE_MAX_RUNS: u32 = 600;

/// Rows `0..=N` of Pascal's triangle.
fn pascal_rows(runs: u32) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for r in 1..=runs as usize {
        let prev = &rows[r - 1];
        let mut row = Vec::with_capacity(r + 1);
        row.push(BigUint::one());
        for k in 1..r {
            row.push(&prev[k - 1] + &prev[k]);
        }
        row.push(BigUint::one());
        rows.push(row);
    }
    rows
}

/// Multinomial coefficient `N! / (m_1! ... m_n!)`: the number of sequences in the class.
pub fn class_multiplicity(class: &BranchClass) -> BigUint {
    let mut acc = BigUint::one();
    let mut prefix = 0u64;
    for &m in &class.counts {
        prefix += u64::from(m);
        acc *= binomial(prefix, u64::from(m));
    }
    acc
}

/// Summed squared norm of every sequence in the class:
/// `multiplicity * prod_j q_j^{m_j}`.
pub fn class_weight(class: &BranchClass, dist: &OutcomeDistribution) -> Result<Rational> {
    class.check_dimension(dist)?;
    let mut w = rational::from_biguint(&class_multiplicity(class));
    for (q, &m) in dist.weights.iter().zip(&class.counts) {
        if m > 0 {
            w *= num_traits::pow::Pow::pow(q, m);
        }
    }
    Ok(w)
}

/// Floating-point `ln(class_weight)`. Approximate; intended for class sizes
/// where the exact rational is too large to be useful. `-inf` for zero weight.
pub fn ln_class_weight(class: &BranchClass, dist: &OutcomeDistribution) -> Result<f64> {
    class.check_dimension(dist)?;
    let runs = class.runs();
    let mut acc = ln_factorial(runs);
    for (q, &m) in dist.weights.iter().zip(&class.counts) {
        acc -= ln_factorial(m);
        if m > 0 {
            let qf = rational::to_f64(q);
            if qf == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            acc += f64::from(m) * qf.ln();
        }
    }
    Ok(acc)
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| f64::from(i).ln()).sum()
}

/// The full class ensemble of `N` runs under one distribution, with exact
/// multiplicities and weights in canonical class order.
///
/// Weights are held as integer numerators over the shared denominator `d^N`,
/// where `d` is the least common denominator of the Born weights.
#[derive(Debug, Clone)]
pub struct BranchEnsemble {
    dist: OutcomeDistribution,
    runs: u32,
    classes: Vec<BranchClass>,
    multiplicities: Vec<BigUint>,
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl BranchEnsemble {
    pub fn new(dist: &OutcomeDistribution, runs: u32, cap: u64) -> Result<Self> {
        let classes = enumerate_classes(dist.n(), runs, cap)?;
        let (d, nums) = dist.scaled();
        // a_j^m for every m <= N, and Pascal rows when they stay small.
        let powers: Vec<Vec<BigInt>> = nums
            .iter()
            .map(|a| {
                let mut row = Vec::with_capacity(runs as usize + 1);
                let mut acc = BigInt::one();
                for _ in 0..=runs {
                    row.push(acc.clone());
                    acc *= a;
                }
                row
            })
            .collect();
        let pascal = (runs <= PASCAL_TABLE_MAX_RUNS).then(|| pascal_rows(runs));
        let (multiplicities, numerators): (Vec<_>, Vec<_>) = classes
            .par_iter()
            .map(|class| {
                let mult = match &pascal {
                    Some(rows) => {
                        let mut acc = BigUint::one();
                        let mut prefix = 0usize;
                        for &m in &class.counts {
                            prefix += m as usize;
                            if m > 0 && (m as usize) < prefix {
                                acc *= &rows[prefix][m as usize];
                            }
                        }
                        acc
                    }
                    None => class_multiplicity(class),
                };
                let mut num = BigInt::from(mult.clone());
                for (row, &m) in powers.iter().zip(&class.counts) {
                    if m > 0 {
                        num *= &row[m as usize];
                    }
                }
                (mult, num)
            })
            .unzip();
        Ok(Self {
            dist: dist.clone(),
            runs,
            classes,
            multiplicities,
            numerators,
            denominator: num_traits::pow::Pow::pow(&d, runs),
        })
    }

    pub fn dist(&self) -> &OutcomeDistribution {
        &self.dist
    }

    pub fn runs(&self) -> u32 {
        self.runs
    }

    pub fn classes(&self) -> &[BranchClass] {
        &self.classes
    }

    pub fn multiplicities(&self) -> &[BigUint] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Exact weight of class `index`.
    pub fn weight(&self, index: usize) -> Rational {
        Rational::new(self.numerators[index].clone(), self.denominator.clone())
    }

    pub fn weights(&self) -> Vec<Rational> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Weight numerators over [`Self::denominator`].
    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    /// Exact sum of weights over the classes selected by `keep`.
    pub fn weight_where<F>(&self, keep: F) -> Rational
    where
        F: Fn(&BranchClass) -> bool + Sync,
    {
        let num: BigInt = self
            .classes
            .par_iter()
            .zip(self.numerators.par_iter())
            .filter(|(c, _)| keep(c))
            .map(|(_, w)| w.clone())
            .reduce(BigInt::zero, |a, b| a + b);
        Rational::new(num, self.denominator.clone())
    }

    /// Index of the maximum-weight class; the first in canonical order on ties.
    pub fn mode_index(&self) -> usize {
        let mut best = 0;
        for (i, w) in self.numerators.iter().enumerate().skip(1) {
            if w > &self.numerators[best] {
                best = i;
            }
        }
        best
    }

    pub fn total_multiplicity(&self) -> BigUint {
        self.multiplicities.iter().sum()
    }
}
