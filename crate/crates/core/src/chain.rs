//! Labeled product states and linear basis rewrites for the
//! system / detector / observer measurement chain.
//!
//! The time step `0 -> t` is a [`BranchingRule`]: an injective map on basis
//! kets, extended linearly. Amplitudes are exact [`Surd`]s so that a state
//! with Born weights `q_i` carries amplitudes `sqrt(q_i)` without rounding.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::OutcomeDistribution;
use crate::rational::Rational;
use crate::surd::Surd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    System,
    Detector,
    Observer,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::Detector => "detector",
            Role::Observer => "observer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    role: Role,
    tag: String,
}

impl Label {
    pub fn new(role: Role, tag: impl Into<String>) -> Result<Self> {
        let tag = tag.into();
        if tag.is_empty() {
            return Err(Error::InvalidState("label tag is empty".into()));
        }
        Ok(Self { role, tag })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

/// Ordered tuple of labels, one per factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductKet(Vec<Label>);

impl ProductKet {
    pub fn new(labels: Vec<Label>) -> Self {
        Self(labels)
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn roles(&self) -> Vec<Role> {
        self.0.iter().map(|l| l.role).collect()
    }

    pub fn label(&self, role: Role) -> Option<&Label> {
        self.0.iter().find(|l| l.role == role)
    }
}

impl fmt::Display for ProductKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "|{}>", l.tag)?;
        }
        Ok(())
    }
}

/// Sparse linear combination of product kets. Zero terms are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorState {
    roles: Vec<Role>,
    terms: BTreeMap<ProductKet, Surd>,
}

impl TensorState {
    pub fn new(roles: Vec<Role>) -> Self {
        Self {
            roles,
            terms: BTreeMap::new(),
        }
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    fn check_ket(&self, ket: &ProductKet) -> Result<()> {
        if ket.roles() != self.roles {
            return Err(Error::InvalidState(format!(
                "ket {ket} does not match factor order {:?}",
                self.roles
            )));
        }
        Ok(())
    }

    /// Adds `coeff * ket`, merging with an existing term.
    pub fn add_term(&mut self, ket: ProductKet, coeff: Surd) -> Result<()> {
        self.check_ket(&ket)?;
        let sum = match self.terms.remove(&ket) {
            Some(old) => old.add(&coeff),
            None => coeff,
        };
        if !sum.is_zero() {
            self.terms.insert(ket, sum);
        }
        Ok(())
    }

    pub fn with_term(mut self, ket: ProductKet, coeff: Surd) -> Result<Self> {
        self.add_term(ket, coeff)?;
        Ok(self)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ProductKet, &Surd)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, ket: &ProductKet) -> Surd {
        self.terms.get(ket).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, w: &Rational) -> Self {
        if w.is_zero() {
            return Self::new(self.roles.clone());
        }
        Self {
            roles: self.roles.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.scale(w))).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.roles != other.roles {
            return Err(Error::InvalidState("factor orders differ".into()));
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone())?;
        }
        Ok(out)
    }

    /// Sum of squared coefficients.
    pub fn squared_norm(&self) -> Result<Surd> {
        self.terms
            .values()
            .try_fold(Surd::zero(), |acc, c| Ok(acc.add(&c.square()?)))
    }
}

/// Deterministic injective rewrite of basis kets; applied linearly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingRule {
    roles: Vec<Role>,
    map: BTreeMap<ProductKet, ProductKet>,
}

impl BranchingRule {
    /// Rejects arity/role mismatches, repeated inputs and any two inputs with
    /// the same image.
    pub fn new<I>(roles: Vec<Role>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ProductKet, ProductKet)>,
    {
        let mut map = BTreeMap::new();
        let mut images = std::collections::BTreeSet::new();
        for (from, to) in pairs {
            for ket in [&from, &to] {
                if ket.roles() != roles {
                    return Err(Error::InvalidState(format!(
                        "ket {ket} does not match factor order {roles:?}"
                    )));
                }
            }
            if !images.insert(to.clone()) {
                return Err(Error::NotInjective(to.to_string()));
            }
            if map.insert(from.clone(), to).is_some() {
                return Err(Error::InvalidState(format!("{from} given twice")));
            }
        }
        Ok(Self { roles, map })
    }

    pub fn identity<I>(roles: Vec<Role>, kets: I) -> Result<Self>
    where
        I: IntoIterator<Item = ProductKet>,
    {
        Self::new(roles, kets.into_iter().map(|k| (k.clone(), k)))
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn image(&self, ket: &ProductKet) -> Option<&ProductKet> {
        self.map.get(ket)
    }

    pub fn domain(&self) -> impl Iterator<Item = &ProductKet> {
        self.map.keys()
    }
}

/// Rewrites every term independently; coefficients are carried unchanged.
pub fn apply_rule(rule: &BranchingRule, state: &TensorState) -> Result<TensorState> {
    if rule.roles != state.roles {
        return Err(Error::InvalidState("rule and state factor orders differ".into()));
    }
    let mut out = TensorState::new(state.roles.clone());
    for (ket, coeff) in state.terms() {
        let image = rule
            .image(ket)
            .ok_or_else(|| Error::UndefinedOnBasis(ket.to_string()))?;
        out.add_term(image.clone(), coeff.clone())?;
    }
    Ok(out)
}

/// True iff `rule(w1 s1 + w2 s2) == w1 rule(s1) + w2 rule(s2)` exactly.
pub fn linearity_check(
    rule: &BranchingRule,
    states: (&TensorState, &TensorState),
    weights: (&Rational, &Rational),
) -> Result<bool> {
    let (s1, s2) = states;
    let (w1, w2) = weights;
    let lhs = apply_rule(rule, &s1.scaled(w1).plus(&s2.scaled(w2))?)?;
    // Unscaled, so undefined kets are reported even at zero weight.
    let r1 = apply_rule(rule, s1)?;
    let r2 = apply_rule(rule, s2)?;
    let rhs = r1.scaled(w1).plus(&r2.scaled(w2))?;
    Ok(lhs == rhs)
}

/// Structured observer tag. Rendered forms:
/// `Obs perceives no reading`, `ver. i of the obs. perceives reading i` and
/// `ver. i of the obs. perceives and is aware of reading i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObserverTag {
    NoReading,
    Perceives { version: usize },
    Aware { version: usize },
}

impl ObserverTag {
    pub fn render(self) -> String {
        match self {
            ObserverTag::NoReading => "Obs perceives no reading".to_string(),
            ObserverTag::Perceives { version } => {
                format!("ver. {version} of the obs. perceives reading {version}")
            }
            ObserverTag::Aware { version } => {
                format!("ver. {version} of the obs. perceives and is aware of reading {version}")
            }
        }
    }

    pub fn parse(tag: &str) -> Option<Self> {
        if tag == "Obs perceives no reading" {
            return Some(ObserverTag::NoReading);
        }
        let rest = tag.strip_prefix("ver. ")?;
        let (version, rest) = rest.split_once(" of the obs. perceives ")?;
        let version: usize = version.parse().ok()?;
        let parsed = if let Some(r) = rest.strip_prefix("and is aware of reading ") {
            (r.parse::<usize>().ok()? == version).then_some(ObserverTag::Aware { version })
        } else {
            let r = rest.strip_prefix("reading ")?;
            (r.parse::<usize>().ok()? == version).then_some(ObserverTag::Perceives { version })
        }?;
        (parsed.render() == tag).then_some(parsed)
    }

    pub fn is_aware(self) -> bool {
        matches!(self, ObserverTag::Aware { .. })
    }
}

pub const CHAIN_ROLES: [Role; 3] = [Role::System, Role::Detector, Role::Observer];

/// `|i> |D:i> |observer>` with 1-based outcome `i`.
pub fn chain_ket(outcome: usize, observer: ObserverTag) -> ProductKet {
    ProductKet::new(vec![
        Label {
            role: Role::System,
            tag: format!("i={outcome}"),
        },
        Label {
            role: Role::Detector,
            tag: format!("D:{outcome}"),
        },
        Label {
            role: Role::Observer,
            tag: observer.render(),
        },
    ])
}

fn chain_state<F>(dist: &OutcomeDistribution, observer: F) -> Result<TensorState>
where
    F: Fn(usize) -> ObserverTag,
{
    let mut state = TensorState::new(CHAIN_ROLES.to_vec());
    for (j, q) in dist.weights().iter().enumerate() {
        state.add_term(chain_ket(j + 1, observer(j + 1)), Surd::sqrt(q)?)?;
    }
    Ok(state)
}

fn chain_rule<F>(n: usize, observer: F) -> Result<BranchingRule>
where
    F: Fn(usize) -> ObserverTag,
{
    BranchingRule::new(
        CHAIN_ROLES.to_vec(),
        (1..=n).map(|i| (chain_ket(i, ObserverTag::NoReading), chain_ket(i, observer(i)))),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementChain {
    /// After detection, before the observer looks.
    pub before: TensorState,
    /// The observer looking at the detector.
    pub rule: BranchingRule,
    /// One observer version per outcome with nonzero weight.
    pub after: TensorState,
}

pub fn build_measurement_chain(dist: &OutcomeDistribution) -> Result<MeasurementChain> {
    let before = chain_state(dist, |_| ObserverTag::NoReading)?;
    let rule = chain_rule(dist.n(), |version| ObserverTag::Perceives { version })?;
    let after = chain_state(dist, |version| ObserverTag::Perceives { version })?;
    Ok(MeasurementChain {
        before,
        rule,
        after,
    })
}

/// Result of substituting the per-reading awareness rule into the
/// superposed pre-observation state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualValidityReport {
    /// Pre-observation state the rule acts on.
    pub initial: TensorState,
    /// The rule applied term by term.
    pub derived: TensorState,
    /// Built directly with every version tagged aware.
    pub expected: TensorState,
    pub states_equal: bool,
    pub versions: usize,
    pub aware_versions: usize,
    pub squared_norm: Surd,
    pub transcript: Vec<String>,
}

impl EqualValidityReport {
    pub fn all_aware(&self) -> bool {
        self.states_equal && self.versions == self.aware_versions
    }
}

pub fn equal_validity_demonstration(dist: &OutcomeDistribution) -> Result<EqualValidityReport> {
    let initial = chain_state(dist, |_| ObserverTag::NoReading)?;
    let rule = chain_rule(dist.n(), |version| ObserverTag::Aware { version })?;
    let derived = apply_rule(&rule, &initial)?;
    let expected = chain_state(dist, |version| ObserverTag::Aware { version })?;

    let tags: Vec<ObserverTag> = derived
        .terms()
        .filter_map(|(k, _)| k.label(Role::Observer).and_then(|l| ObserverTag::parse(l.tag())))
        .collect();
    let versions = derived.len();
    let aware_versions = tags.iter().filter(|t| t.is_aware()).count();
    let squared_norm = derived.squared_norm()?;

    let mut transcript = Vec::new();
    transcript.push("state before observation:".to_string());
    push_state(&mut transcript, &initial);
    transcript.push("rule for each reading i set by hand:".to_string());
    for from in rule.domain() {
        let to = rule.image(from).expect("domain key");
        transcript.push(format!("  {from} -> {to}"));
    }
    transcript.push("rule applied to each term of the superposition:".to_string());
    push_state(&mut transcript, &derived);
    let states_equal = derived == expected;
    transcript.push(format!(
        "matches the directly built all-aware state: {}",
        if states_equal { "yes" } else { "no" }
    ));
    transcript.push(format!(
        "observer versions: {versions}, aware: {aware_versions}, squared norm: {squared_norm}"
    ));

    Ok(EqualValidityReport {
        initial,
        derived,
        expected,
        states_equal,
        versions,
        aware_versions,
        squared_norm,
        transcript,
    })
}

fn push_state(lines: &mut Vec<String>, state: &TensorState) {
    for (ket, c) in state.terms() {
        lines.push(format!("  ({c}) {ket}"));
    }
}
