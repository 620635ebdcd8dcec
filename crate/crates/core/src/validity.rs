//! Validity-weighted perceived frequencies and the Born-frequency feasibility
//! problem.
//!
//! A validity marker `v` is any function of the outcome sequence that does not
//! look at the Born weights. The average perceived count of outcome `j` over the
//! valid branches (every branch counted once) depends on `v` only through the
//! per-class totals `k_class = sum_{seq in class} v(seq)`, so assignments are
//! stored at class level. [`ValidityAssignment`] holds no distribution; the
//! frequency it produces is therefore the same for every distribution.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{
    class_count, class_multiplicity, enumerate_classes, BranchClass, OutcomeDistribution,
    DEFAULT_CLASS_CAP,
};
use crate::rational::{self, Rational};

/// Class-level validity counts for `N` runs of an `n`-outcome measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValidityAssignment {
    n: usize,
    runs: u32,
    valid: BTreeMap<BranchClass, BigUint>,
}

impl ValidityAssignment {
    /// Builds an assignment; zero entries are dropped and at least one class
    /// must be marked valid.
    pub fn new<I>(n: usize, runs: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BranchClass, BigUint)>,
    {
        let mut valid = BTreeMap::new();
        for (class, k) in entries {
            if class.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: class.n(),
                });
            }
            if class.runs() != runs {
                return Err(Error::InvalidAssignment(format!(
                    "class {class} covers {} runs, expected {runs}",
                    class.runs()
                )));
            }
            let mult = class_multiplicity(&class);
            if k > mult {
                return Err(Error::InvalidAssignment(format!(
                    "class {class} has {mult} sequences but {k} marked valid"
                )));
            }
            if k.is_zero() {
                continue;
            }
            if valid.insert(class.clone(), k).is_some() {
                return Err(Error::InvalidAssignment(format!("class {class} given twice")));
            }
        }
        if valid.is_empty() {
            return Err(Error::EmptyAssignment);
        }
        Ok(Self { n, runs, valid })
    }

    /// Every sequence valid (`v = 1` everywhere).
    pub fn all_ones(n: usize, runs: u32, cap: u64) -> Result<Self> {
        let classes = enumerate_classes(n, runs, cap)?;
        Self::new(
            n,
            runs,
            classes.into_iter().map(|c| {
                let m = class_multiplicity(&c);
                (c, m)
            }),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn runs(&self) -> u32 {
        self.runs
    }

    /// Valid count of `class`; zero when absent.
    pub fn get(&self, class: &BranchClass) -> BigUint {
        self.valid.get(class).cloned().unwrap_or_default()
    }

    /// Nonzero entries in canonical class order.
    pub fn iter(&self) -> impl Iterator<Item = (&BranchClass, &BigUint)> {
        self.valid.iter()
    }

    pub fn total_valid(&self) -> BigUint {
        self.valid.values().sum()
    }
}

/// Average perceived count per outcome. Entries sum to `N`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrequencyVector {
    runs: u32,
    values: Vec<Rational>,
}

impl FrequencyVector {
    pub fn new(runs: u32, values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let sum: Rational = values.iter().sum();
        if sum != rational::from_int(runs) {
            return Err(Error::InvalidArgument(format!(
                "frequency vector sums to {}, expected {runs}",
                rational::format_rational(&sum)
            )));
        }
        Ok(Self { runs, values })
    }

    pub fn runs(&self) -> u32 {
        self.runs
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn to_json(&self) -> Value {
        json!({
            "runs": self.runs,
            "values": self.values.iter().map(rational::format_rational).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let runs = json_u32(value, "runs")?;
        let values = json_rationals(value, "values")?;
        Self::new(runs, values)
    }
}

/// Perceived frequencies when every branch is valid: `N/n` for each outcome,
/// whatever the Born weights are.
pub fn equal_validity_frequency(n: usize, runs: u32) -> Result<FrequencyVector> {
    if n == 0 || runs == 0 {
        return Err(Error::InvalidArgument("n and N must be positive".into()));
    }
    let share = rational::ratio(i64::from(runs), n as i64);
    FrequencyVector::new(runs, vec![share; n])
}

/// `(sum_class m_j k_class) / (sum_class k_class)` per outcome, with every
/// branch weighted by one.
pub fn weighted_average_counts(assignment: &ValidityAssignment) -> Result<FrequencyVector> {
    let total = assignment.total_valid();
    if total.is_zero() {
        return Err(Error::EmptyAssignment);
    }
    let mut sums = vec![BigUint::zero(); assignment.n];
    for (class, k) in assignment.iter() {
        for (s, &m) in sums.iter_mut().zip(class.counts()) {
            *s += k * m;
        }
    }
    let total = BigInt::from(total);
    let values = sums
        .into_iter()
        .map(|s| Rational::new(BigInt::from(s), total.clone()))
        .collect();
    FrequencyVector::new(assignment.runs, values)
}

/// Bounds on the feasibility search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverLimits {
    pub class_cap: u64,
    /// Maximum DFS nodes before giving up with [`Error::SearchBudgetExceeded`].
    pub node_budget: u64,
    /// Search spaces at most this large are enumerated exhaustively instead.
    pub exhaustive_threshold: u64,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self {
            class_cap: DEFAULT_CLASS_CAP,
            node_budget: 100_000,
            exhaustive_threshold: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(ValidityAssignment),
    Infeasible,
}

/// Integer system `A k = 0`, `0 <= k_c <= ub_c`, `k != 0`, one column per class.
struct System {
    /// `coeffs[c][j] = d*m_j - N*a_j` where `q_j = a_j/d`.
    coeffs: Vec<Vec<i128>>,
    upper: Vec<i128>,
}

impl System {
    fn build(classes: &[BranchClass], dist: &OutcomeDistribution, runs: u32) -> Result<Self> {
        let (d, nums) = dist.scaled();
        let too_large = || Error::InvalidArgument("feasibility coefficients overflow i128".into());
        let d = d.to_i128().ok_or_else(too_large)?;
        let targets = nums
            .iter()
            .map(|a| a.to_i128().and_then(|a| a.checked_mul(i128::from(runs))))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(too_large)?;
        // The last row is minus the sum of the others; drop it.
        let rows = dist.n().saturating_sub(1);
        let mut coeffs = Vec::with_capacity(classes.len());
        let mut upper = Vec::with_capacity(classes.len());
        for class in classes {
            let col = (0..rows)
                .map(|j| {
                    d.checked_mul(i128::from(class.counts()[j]))
                        .and_then(|x| x.checked_sub(targets[j]))
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(too_large)?;
            coeffs.push(col);
            let mult = class_multiplicity(class).to_i128().ok_or_else(too_large)?;
            upper.push(mult);
        }
        // Every partial sum must stay representable.
        for j in 0..rows {
            let mut acc: i128 = 0;
            for (col, &ub) in coeffs.iter().zip(&upper) {
                let term = col[j].checked_abs().and_then(|a| a.checked_mul(ub));
                acc = term.and_then(|t| acc.checked_add(t)).ok_or_else(too_large)?;
            }
        }
        Ok(Self { coeffs, upper })
    }

    fn rows(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    fn satisfies(&self, k: &[i128]) -> bool {
        (0..self.rows()).all(|j| {
            self.coeffs
                .iter()
                .zip(k)
                .map(|(col, &kc)| col[j] * kc)
                .sum::<i128>()
                == 0
        })
    }

    /// Necessary condition from the real relaxation, row by row: a nonzero
    /// nonnegative solution needs, in every row, a zero coefficient or
    /// coefficients of both signs.
    fn relaxation_feasible(&self) -> bool {
        (0..self.rows()).all(|j| {
            let mut neg = false;
            let mut pos = false;
            for col in &self.coeffs {
                match col[j].signum() {
                    0 => return true,
                    1 => pos = true,
                    _ => neg = true,
                }
            }
            neg && pos
        })
    }

    fn search_space(&self) -> Option<u64> {
        self.upper.iter().try_fold(1u64, |acc, &ub| {
            u64::try_from(ub).ok()?.checked_add(1).and_then(|b| acc.checked_mul(b))
        })
    }

    /// Lexicographically smallest nonzero solution by plain odometer enumeration.
    fn solve_exhaustive(&self) -> Option<Vec<i128>> {
        let len = self.upper.len();
        let mut k = vec![0i128; len];
        loop {
            // Increment, last class fastest.
            let mut i = len;
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                if k[i] < self.upper[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = 0;
            }
            if self.satisfies(&k) {
                return Some(k);
            }
        }
    }

    /// Pruning directions `u`: the coordinate axes plus the facet normals of
    /// the zonotope spanned by the class columns, i.e. normals of every
    /// hyperplane through `rows - 1` columns (generalized cross products).
    /// Normalized by gcd, sign-canonical, deduplicated, in generation order,
    /// and capped at `limit`. With every facet normal present, the bounds
    /// they induce are exactly the real relaxation.
    fn directions(&self, limit: usize) -> Vec<Vec<i128>> {
        let rows = self.rows();
        let mut seen = HashSet::new();
        let mut dirs = Vec::new();
        let mut push = |mut u: Vec<i128>| -> bool {
            let g = u.iter().fold(0i128, |g, &x| g.gcd(&x));
            if g == 0 || dirs.len() >= limit {
                return dirs.len() < limit;
            }
            for x in &mut u {
                *x /= g;
            }
            // Each direction carries both a lower and an upper bound.
            if u.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                for x in &mut u {
                    *x = -*x;
                }
            }
            if seen.insert(u.clone()) {
                dirs.push(u);
            }
            dirs.len() < limit
        };
        for j in 0..rows {
            let mut e = vec![0; rows];
            e[j] = 1;
            push(e);
        }
        let cols = self.coeffs.len();
        if rows >= 2 && rows - 1 <= cols {
            let mut idx: Vec<usize> = (0..rows - 1).collect();
            loop {
                let vectors: Vec<&[i128]> = idx.iter().map(|&c| self.coeffs[c].as_slice()).collect();
                let room = normal(&vectors, rows).is_none_or(&mut push);
                if !room || !next_combination(&mut idx, cols) {
                    break;
                }
            }
        }
        dirs
    }

    /// Lexicographically smallest nonzero solution by depth-first search.
    ///
    /// The leading zeros are fixed first: scanning `p` from the last class
    /// down, the first `p` admitting a solution with `k_p >= 1` and support in
    /// `p..` is the length of the zero prefix. Within that search values are
    /// tried in ascending order, each class restricted to the values that keep
    /// the residual inside the real relaxation of the remaining classes.
    /// Failed `(class, residual)` states are memoized.
    fn solve_dfs(&self, budget: u64) -> Result<Option<Vec<i128>>> {
        let len = self.upper.len();
        let rows = self.rows();
        // Projections of every column on every direction; directions that
        // overflow are dropped, which only weakens pruning.
        let mut dirs = Vec::new();
        let mut proj: Vec<Vec<i128>> = Vec::new();
        let limit = (DIRECTION_ENTRIES / (len + 1)).clamp(rows, MAX_DIRECTIONS);
        for u in self.directions(limit) {
            let col: Option<Vec<i128>> = self
                .coeffs
                .iter()
                .zip(&self.upper)
                .map(|(a, &ub)| {
                    let dot = a.iter().zip(&u).try_fold(0i128, |acc, (&x, &y)| {
                        acc.checked_add(x.checked_mul(y)?)
                    })?;
                    dot.checked_mul(ub)?;
                    Some(dot)
                })
                .collect();
            if let Some(col) = col {
                let total = col.iter().zip(&self.upper).try_fold(0i128, |acc, (&d, &ub)| {
                    acc.checked_add((d * ub).checked_abs()?)
                });
                if total.is_some() {
                    dirs.push(u);
                    proj.push(col);
                }
            }
        }
        // bounds[i][t] = (lo, hi) of u_t . sum_{c >= i} a_c k_c over the box.
        let mut bounds = vec![vec![(0i128, 0i128); dirs.len()]; len + 1];
        for i in (0..len).rev() {
            for t in 0..dirs.len() {
                let v = proj[t][i] * self.upper[i];
                let (lo, hi) = bounds[i + 1][t];
                bounds[i][t] = (lo + v.min(0), hi + v.max(0));
            }
        }
        let mut search = Dfs {
            sys: self,
            dirs: &dirs,
            proj: &proj,
            bounds: &bounds,
            k: vec![0; len],
            nodes: 0,
            budget,
            failed: HashSet::new(),
        };
        for first in (0..len).rev() {
            let mut need = vec![0i128; rows];
            if search.descend(first, &mut need, 1)? {
                return Ok(Some(search.k));
            }
        }
        Ok(None)
    }
}

/// Bound on memoized failures, to keep memory flat on large searches.
const MEMO_LIMIT: usize = 1 << 21;
/// Bound on pruning directions.
const MAX_DIRECTIONS: usize = 8192;
/// Bound on stored `(class, direction)` bound pairs.
const DIRECTION_ENTRIES: usize = 1_000_000;

/// Advances `idx` to the next `idx.len()`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Integer normal of the hyperplane through `vectors` (`dim - 1` of them in
/// `dim` dimensions): the cofactor vector, `None` if they are dependent or the
/// arithmetic overflows.
fn normal(vectors: &[&[i128]], dim: usize) -> Option<Vec<i128>> {
    let mut u = Vec::with_capacity(dim);
    for skip in 0..dim {
        let minor: Vec<Vec<i128>> = vectors
            .iter()
            .map(|v| (0..dim).filter(|&c| c != skip).map(|c| v[c]).collect())
            .collect();
        let det = determinant(minor)?;
        u.push(if skip % 2 == 0 { det } else { det.checked_neg()? });
    }
    u.iter().any(|&x| x != 0).then_some(u)
}

/// Exact determinant by fraction-free (Bareiss) elimination.
fn determinant(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Some(0);
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let x = m[i][j].checked_mul(m[k][k])?;
                let y = m[i][k].checked_mul(m[k][j])?;
                m[i][j] = x.checked_sub(y)? / prev;
            }
        }
        prev = m[k][k];
    }
    m[n - 1][n - 1].checked_mul(sign)
}

struct Dfs<'a> {
    sys: &'a System,
    dirs: &'a [Vec<i128>],
    proj: &'a [Vec<i128>],
    bounds: &'a [Vec<(i128, i128)>],
    k: Vec<i128>,
    nodes: u64,
    budget: u64,
    failed: HashSet<(usize, Vec<i128>)>,
}

impl Dfs<'_> {
    /// Assigns classes `i..` so that they contribute exactly `need[j]` to
    /// each row, with `k_i >= min_first`. On success the values are left in
    /// `self.k`; on failure `self.k[i..]` is zeroed.
    fn descend(&mut self, i: usize, need: &mut [i128], min_first: i128) -> Result<bool> {
        if i == self.k.len() {
            return Ok(need.iter().all(|&x| x == 0));
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::SearchBudgetExceeded(self.budget));
        }
        let memo = min_first == 0;
        if memo && self.failed.contains(&(i, need.to_vec())) {
            return Ok(false);
        }
        let (mut lo, mut hi) = (min_first, self.sys.upper[i]);
        for (t, u) in self.dirs.iter().enumerate() {
            let want: i128 = u.iter().zip(need.iter()).map(|(&x, &y)| x * y).sum();
            let a = self.proj[t][i];
            let (rlo, rhi) = self.bounds[i + 1][t];
            // rlo <= want - a*k <= rhi
            if a == 0 {
                if want < rlo || want > rhi {
                    lo = hi + 1;
                    break;
                }
            } else if a > 0 {
                lo = lo.max(div_ceil(want - rhi, a));
                hi = hi.min(div_floor(want - rlo, a));
            } else {
                lo = lo.max(div_ceil(want - rlo, a));
                hi = hi.min(div_floor(want - rhi, a));
            }
            if lo > hi {
                break;
            }
        }
        let mut v = lo;
        while v <= hi {
            self.k[i] = v;
            for (j, w) in need.iter_mut().enumerate() {
                *w -= self.sys.coeffs[i][j] * v;
            }
            let found = self.descend(i + 1, need, 0);
            for (j, w) in need.iter_mut().enumerate() {
                *w += self.sys.coeffs[i][j] * v;
            }
            if found? {
                return Ok(true);
            }
            v += 1;
        }
        self.k[i] = 0;
        if memo && self.failed.len() < MEMO_LIMIT {
            self.failed.insert((i, need.to_vec()));
        }
        Ok(false)
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

/// Searches for a class-level assignment whose perceived frequencies equal the
/// Born targets `N * q_j` exactly.
///
/// Returns the lexicographically smallest solution in canonical class order, or
/// [`Feasibility::Infeasible`] when the search space holds none. Any solution is
/// re-checked with [`weighted_average_counts`] before it is returned.
pub fn born_feasibility(
    dist: &OutcomeDistribution,
    runs: u32,
    limits: &SolverLimits,
) -> Result<Feasibility> {
    let classes = enumerate_classes(dist.n(), runs, limits.class_cap)?;
    let sys = System::build(&classes, dist, runs)?;
    if !sys.relaxation_feasible() {
        return Ok(Feasibility::Infeasible);
    }
    let solution = match sys.search_space() {
        Some(space) if space <= limits.exhaustive_threshold => sys.solve_exhaustive(),
        _ => sys.solve_dfs(limits.node_budget)?,
    };
    let Some(k) = solution else {
        return Ok(Feasibility::Infeasible);
    };
    let assignment = ValidityAssignment::new(
        dist.n(),
        runs,
        classes
            .into_iter()
            .zip(k)
            .map(|(c, v)| (c, BigUint::try_from(v).expect("solver values are nonnegative"))),
    )?;
    let achieved = weighted_average_counts(&assignment)?;
    if achieved.values() != dist.targets(runs).as_slice() {
        return Err(Error::InvalidAssignment(
            "solver returned an assignment that misses the Born targets".into(),
        ));
    }
    Ok(Feasibility::Feasible(assignment))
}

/// Every perceived-frequency vector reachable with `k_class <= min(k_cap, multiplicity)`.
///
/// Takes no distribution: the result is a function of `(n, N, k_cap)` only.
pub fn achievable_set(
    n: usize,
    runs: u32,
    k_cap: u64,
    search_cap: u64,
) -> Result<BTreeSet<FrequencyVector>> {
    if k_cap == 0 {
        return Err(Error::InvalidArgument("k_cap must be positive".into()));
    }
    let count = class_count(n.max(1), runs.max(1));
    let classes = enumerate_classes(n, runs, search_cap).map_err(|e| match e {
        Error::CapExceeded { cap, .. } => Error::CapExceeded {
            what: "class enumeration",
            count,
            cap,
        },
        other => other,
    })?;
    let upper: Vec<u64> = classes
        .iter()
        .map(|c| {
            let mult = class_multiplicity(c);
            mult.to_u64().map_or(k_cap, |m| m.min(k_cap))
        })
        .collect();
    let space = upper
        .iter()
        .try_fold(BigUint::from(1u8), |acc, &u| Some(acc * (u + 1)))
        .unwrap_or_default();
    if space > BigUint::from(search_cap) {
        return Err(Error::CapExceeded {
            what: "achievable-set search",
            count: space,
            cap: search_cap,
        });
    }
    let mut out = BTreeSet::new();
    let mut k = vec![0u64; classes.len()];
    loop {
        let mut i = k.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if k[i] < upper[i] {
                k[i] += 1;
                break;
            }
            k[i] = 0;
        }
        let total: u64 = k.iter().sum();
        let values = (0..n)
            .map(|j| {
                let s: u64 = classes
                    .iter()
                    .zip(&k)
                    .map(|(c, &kc)| u64::from(c.counts()[j]) * kc)
                    .sum();
                Rational::new(BigInt::from(s), BigInt::from(total))
            })
            .collect();
        out.insert(FrequencyVector::new(runs, values)?);
    }
}

/// Why a certificate's two targets are incompatible: at `outcome` (0-based)
/// the targets differ, yet one assignment yields one value there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReason {
    pub outcome: usize,
    pub value_a: Rational,
    pub value_b: Rational,
}

/// Machine-checkable record that a single coefficient-independent validity
/// assignment cannot meet the Born targets of two distinct distributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfeasibilityCertificate {
    pub outcomes: usize,
    pub runs: u32,
    pub target_a: Vec<Rational>,
    pub target_b: Vec<Rational>,
    /// Frequencies of the canonical Born-feasible assignment for A, when one
    /// was found within the search limits. It equals `target_a` and so misses
    /// `target_b`.
    pub assignment_frequency: Option<FrequencyVector>,
    pub reason: CertificateReason,
}

/// Builds the certificate for a pair of distributions with distinct targets.
pub fn joint_infeasibility(
    dist_a: &OutcomeDistribution,
    dist_b: &OutcomeDistribution,
    runs: u32,
    limits: &SolverLimits,
) -> Result<InfeasibilityCertificate> {
    if dist_a.n() != dist_b.n() {
        return Err(Error::DimensionMismatch {
            expected: dist_a.n(),
            found: dist_b.n(),
        });
    }
    if runs == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let target_a = dist_a.targets(runs);
    let target_b = dist_b.targets(runs);
    let outcome = first_difference(&target_a, &target_b).ok_or(Error::SameDistribution)?;
    let assignment_frequency = match born_feasibility(dist_a, runs, limits) {
        Ok(Feasibility::Feasible(a)) => Some(weighted_average_counts(&a)?),
        Ok(Feasibility::Infeasible)
        | Err(Error::CapExceeded { .. })
        | Err(Error::SearchBudgetExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(InfeasibilityCertificate {
        outcomes: dist_a.n(),
        runs,
        reason: CertificateReason {
            outcome,
            value_a: target_a[outcome].clone(),
            value_b: target_b[outcome].clone(),
        },
        target_a,
        target_b,
        assignment_frequency,
    })
}

fn first_difference(a: &[Rational], b: &[Rational]) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x != y)
}

/// Checks a certificate independently of how it was produced.
///
/// `Ok(true)`: the targets are distinct and every derived field agrees.
/// `Ok(false)`: well-formed but the claimed contradiction does not hold.
/// `Err(MalformedCertificate)`: structural inconsistency.
pub fn verify_certificate(cert: &InfeasibilityCertificate) -> Result<bool> {
    let malformed = |msg: String| Err(Error::MalformedCertificate(msg));
    if cert.outcomes == 0 || cert.runs == 0 {
        return malformed("outcomes and runs must be positive".into());
    }
    let runs = rational::from_int(cert.runs);
    for (name, target) in [("target_a", &cert.target_a), ("target_b", &cert.target_b)] {
        if target.len() != cert.outcomes {
            return malformed(format!(
                "{name} has {} entries for {} outcomes",
                target.len(),
                cert.outcomes
            ));
        }
        if target.iter().any(Signed::is_negative) {
            return malformed(format!("{name} has a negative entry"));
        }
        if target.iter().sum::<Rational>() != runs {
            return malformed(format!("{name} does not sum to N = {}", cert.runs));
        }
    }
    if cert.reason.outcome >= cert.outcomes {
        return malformed(format!("reason names outcome {} of {}", cert.reason.outcome, cert.outcomes));
    }
    if let Some(freq) = &cert.assignment_frequency {
        if freq.values().len() != cert.outcomes || freq.runs() != cert.runs {
            return malformed("assignment frequency has the wrong shape".into());
        }
        if freq.values().iter().sum::<Rational>() != runs {
            return malformed("assignment frequency does not sum to N".into());
        }
        if freq.values() != cert.target_a.as_slice() {
            return Ok(false);
        }
    }
    let Some(first) = first_difference(&cert.target_a, &cert.target_b) else {
        return Ok(false);
    };
    let reason = &cert.reason;
    Ok(reason.outcome == first
        && reason.value_a == cert.target_a[first]
        && reason.value_b == cert.target_b[first])
}

impl InfeasibilityCertificate {
    /// Canonical JSON: sorted keys, rationals as `"p/q"`, outcome indices 1-based.
    pub fn to_json(&self) -> Value {
        let fmt = |v: &[Rational]| v.iter().map(rational::format_rational).collect::<Vec<_>>();
        json!({
            "assignment_frequency": self.assignment_frequency.as_ref().map(FrequencyVector::to_json),
            "outcomes": self.outcomes,
            "reason": {
                "outcome": self.reason.outcome + 1,
                "value_a": rational::format_rational(&self.reason.value_a),
                "value_b": rational::format_rational(&self.reason.value_b),
            },
            "runs": self.runs,
            "target_a": fmt(&self.target_a),
            "target_b": fmt(&self.target_b),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let reason = value
            .get("reason")
            .ok_or_else(|| Error::MalformedCertificate("missing reason".into()))?;
        let outcome = json_u32(reason, "outcome")? as usize;
        if outcome == 0 {
            return Err(Error::MalformedCertificate("outcome indices are 1-based".into()));
        }
        let assignment_frequency = match value.get("assignment_frequency") {
            None | Some(Value::Null) => None,
            Some(v) => Some(FrequencyVector::from_json(v).map_err(malformed)?),
        };
        Ok(Self {
            outcomes: json_u32(value, "outcomes")? as usize,
            runs: json_u32(value, "runs")?,
            target_a: json_rationals(value, "target_a")?,
            target_b: json_rationals(value, "target_b")?,
            assignment_frequency,
            reason: CertificateReason {
                outcome: outcome - 1,
                value_a: json_rational(reason, "value_a")?,
                value_b: json_rational(reason, "value_b")?,
            },
        })
    }
}

fn malformed(e: Error) -> Error {
    match e {
        Error::MalformedCertificate(_) => e,
        other => Error::MalformedCertificate(other.to_string()),
    }
}

fn json_u32(value: &Value, key: &str) -> Result<u32> {
    value
        .get(key)
        .and_then(Value::as_u64)
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| Error::MalformedCertificate(format!("missing or invalid {key:?}")))
}

fn json_rational(value: &Value, key: &str) -> Result<Rational> {
    let s = value
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::MalformedCertificate(format!("missing or invalid {key:?}")))?;
    rational::parse_rational(s).map_err(malformed)
}

fn json_rationals(value: &Value, key: &str) -> Result<Vec<Rational>> {
    value
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedCertificate(format!("missing or invalid {key:?}")))?
        .iter()
        .map(|v| {
            v.as_str()
                .ok_or_else(|| Error::MalformedCertificate(format!("non-string entry in {key:?}")))
                .and_then(|s| rational::parse_rational(s).map_err(malformed))
        })
        .collect()
}
