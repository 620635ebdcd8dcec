//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use branchlab_core::rational::{ratio, Rational};
use branchlab_core::OutcomeDistribution;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

pub fn dist(q: &[(i64, i64)]) -> OutcomeDistribution {
    OutcomeDistribution::new(q.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
}

/// Every length-`runs` sequence over `0..n`, in odometer order.
pub fn sequences(n: usize, runs: usize) -> Vec<Vec<usize>> {
    let total = n.pow(runs as u32);
    (0..total)
        .map(|mut code| {
            let mut seq = vec![0; runs];
            for slot in seq.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            seq
        })
        .collect()
}

pub fn counts_of(seq: &[usize], n: usize) -> Vec<u32> {
    let mut c = vec![0u32; n];
    for &i in seq {
        c[i] += 1;
    }
    c
}

/// Per-class summed weight by explicit sequence enumeration:
/// each sequence contributes `prod_t q_{i_t}`.
pub fn brute_class_weights(q: &[Rational], runs: usize) -> BTreeMap<Vec<u32>, Rational> {
    let mut out = BTreeMap::new();
    for seq in sequences(q.len(), runs) {
        let w = seq.iter().fold(Rational::one(), |acc, &i| acc * &q[i]);
        *out.entry(counts_of(&seq, q.len())).or_insert_with(Rational::zero) += w;
    }
    out
}

/// Pascal-triangle row `N` as big integers.
pub fn pascal_row(runs: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for _ in 0..runs {
        let mut next = vec![BigUint::one(); row.len() + 1];
        for i in 1..row.len() {
            next[i] = &row[i - 1] + &row[i];
        }
        row = next;
    }
    row
}

/// Exact two-outcome weight outside `|m/N - p| <= eps`, summing
/// `C(N, m) a^m b^(N-m) / d^N` term by term with `p = a/d`.
pub fn binomial_tail_outside(p: (u64, u64), runs: usize, eps: (u64, u64)) -> Rational {
    let (a, d) = p;
    let b = d - a;
    let row = pascal_row(runs);
    let mut num = BigUint::zero();
    for (m, c) in row.iter().enumerate() {
        // |m/N - a/d| > e1/e2  <=>  |m d - a N| e2 > e1 N d
        let lhs = (m as i128 * d as i128 - a as i128 * runs as i128).unsigned_abs() * eps.1 as u128;
        let rhs = eps.0 as u128 * runs as u128 * d as u128;
        if lhs > rhs {
            num += c * BigUint::from(a).pow(m as u32) * BigUint::from(b).pow((runs - m) as u32);
        }
    }
    Rational::new(BigInt::from(num), BigInt::from(BigUint::from(d).pow(runs as u32)))
}

/// Small deterministic generator for test inputs (xorshift64*).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x2545_F491_4F6C_DD1D) | 1)
    }

    pub fn next(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    /// Random distribution over `n` outcomes with denominator `den`; entries may be zero.
    pub fn distribution(&mut self, n: usize, den: u64) -> OutcomeDistribution {
        let mut cuts: Vec<u64> = (0..n - 1).map(|_| self.below(den + 1)).collect();
        cuts.sort_unstable();
        let mut prev = 0;
        let mut q = Vec::with_capacity(n);
        for c in cuts.into_iter().chain(std::iter::once(den)) {
            q.push(ratio((c - prev) as i64, den as i64));
            prev = c;
        }
        OutcomeDistribution::new(q).unwrap()
    }
}
