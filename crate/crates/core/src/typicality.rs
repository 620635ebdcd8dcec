//! Concentration of branch weight around `m_j / N = q_j`.
//!
//! The frequency window is coordinate-wise and inclusive:
//! a class is inside when `|m_j/N - q_j| <= epsilon` for every outcome `j`.

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::model::{BranchClass, BranchEnsemble, OutcomeDistribution};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypicalityReport {
    pub runs: u32,
    pub epsilon: Rational,
    pub weight_inside: Rational,
    pub weight_outside: Rational,
    /// Maximum-weight class, first in canonical order on ties.
    pub mode_class: BranchClass,
}

/// Outcome of [`min_sample_size`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSize {
    Reached(u32),
    NotReached,
}

fn check_epsilon(epsilon: &Rational) -> Result<()> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive (got {})",
            rational::format_rational(epsilon)
        )));
    }
    Ok(())
}

/// True when every coordinate frequency lies within `epsilon` of its Born weight.
pub fn in_window(class: &BranchClass, dist: &OutcomeDistribution, epsilon: &Rational) -> bool {
    let runs = rational::from_int(class.runs());
    let slack = epsilon * &runs;
    class
        .counts()
        .iter()
        .zip(dist.weights())
        .all(|(&m, q)| (rational::from_int(m) - q * &runs).abs() <= slack)
}

fn report(ens: &BranchEnsemble, epsilon: &Rational) -> TypicalityReport {
    let dist = ens.dist();
    let weight_inside = ens.weight_where(|c| in_window(c, dist, epsilon));
    let weight_outside = Rational::one() - &weight_inside;
    TypicalityReport {
        runs: ens.runs(),
        epsilon: epsilon.clone(),
        weight_inside,
        weight_outside,
        mode_class: ens.classes()[ens.mode_index()].clone(),
    }
}

/// Exact weight inside and outside the frequency window after `N` runs.
pub fn weight_in_window(
    dist: &OutcomeDistribution,
    runs: u32,
    epsilon: &Rational,
    cap: u64,
) -> Result<TypicalityReport> {
    check_epsilon(epsilon)?;
    let ens = BranchEnsemble::new(dist, runs, cap)?;
    Ok(report(&ens, epsilon))
}

/// The maximum-weight class; ties go to the first class in canonical order.
pub fn sharp_max(dist: &OutcomeDistribution, runs: u32, cap: u64) -> Result<BranchClass> {
    let ens = BranchEnsemble::new(dist, runs, cap)?;
    Ok(ens.classes()[ens.mode_index()].clone())
}

/// Smallest `N <= n_max` whose out-of-window weight is at most `delta`.
///
/// Scans `N = 1, 2, ...` linearly: the out-of-window weight is not monotone
/// in `N` at lattice granularity, so bisection would be unsound.
pub fn min_sample_size(
    dist: &OutcomeDistribution,
    epsilon: &Rational,
    delta: &Rational,
    n_max: u32,
    cap: u64,
) -> Result<SampleSize> {
    check_epsilon(epsilon)?;
    if !delta.is_positive() || delta >= &Rational::one() {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1) (got {})",
            rational::format_rational(delta)
        )));
    }
    for runs in 1..=n_max {
        let ens = BranchEnsemble::new(dist, runs, cap)?;
        let inside = ens.weight_where(|c| in_window(c, dist, epsilon));
        if Rational::one() - inside <= *delta {
            return Ok(SampleSize::Reached(runs));
        }
    }
    Ok(SampleSize::NotReached)
}

/// `(N, weight_outside)` for each requested `N`; `N` values must be strictly ascending.
pub fn concentration_curve(
    dist: &OutcomeDistribution,
    epsilon: &Rational,
    runs: &[u32],
    cap: u64,
) -> Result<Vec<(u32, Rational)>> {
    check_epsilon(epsilon)?;
    if runs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "N values must be strictly ascending".into(),
        ));
    }
    runs.iter()
        .map(|&n| {
            let r = weight_in_window(dist, n, epsilon, cap)?;
            Ok((n, r.weight_outside))
        })
        .collect()
}

/// Full reports for several `N`, sharing the validation of [`concentration_curve`].
pub fn typicality_series(
    dist: &OutcomeDistribution,
    epsilon: &Rational,
    runs: &[u32],
    cap: u64,
) -> Result<Vec<TypicalityReport>> {
    check_epsilon(epsilon)?;
    if runs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "N values must be strictly ascending".into(),
        ));
    }
    runs.iter()
        .map(|&n| weight_in_window(dist, n, epsilon, cap))
        .collect()
}

impl TypicalityReport {
    pub fn is_consistent(&self) -> bool {
        &self.weight_inside + &self.weight_outside == Rational::one()
            && !self.weight_inside.is_negative()
            && !self.weight_outside.is_negative()
    }
}
