//! Bipartite toy models behind one sequential-measurement interface.
//!
//! Each side holds three boxes `A`, `B`, `C`. A query opens one box or a
//! pair on one side; a model answers with every possible outcome, its exact
//! probability and the successor state. The same call drives seeded
//! sampling ([`Session`]) and exhaustive enumeration ([`enumerate_histories`]).

mod firefly;
mod lsw;
mod plan;
mod seer;

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rational::{to_f64, Rational};

pub use firefly::{FireflyFlavor, FireflyModel, HALF_MIDPOINTS};
pub use lsw::LswModel;
pub use plan::{
    bundled_plan, parse_plan, Arm, OutcomePattern, Plan, PlanError, Step, BUNDLED_PLANS,
};
pub use seer::SeerModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Alice,
    Bob,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Alice, Side::Bob];

    pub fn index(self) -> usize {
        match self {
            Side::Alice => 0,
            Side::Bob => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Alice => Side::Bob,
            Side::Bob => Side::Alice,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Alice => "alice",
            Side::Bob => "bob",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoxLabel {
    A,
    B,
    C,
}

impl BoxLabel {
    pub const ALL: [BoxLabel; 3] = [BoxLabel::A, BoxLabel::B, BoxLabel::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> BoxLabel {
        Self::ALL[i]
    }

    /// Perimeter coordinate of the corner on a triangle of side 1.
    pub(crate) fn corner(self) -> Rational {
        Rational::from_integer(self.index() as i128)
    }
}

impl fmt::Display for BoxLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoxLabel::A => "A",
            BoxLabel::B => "B",
            BoxLabel::C => "C",
        })
    }
}

/// An unordered compatible pair, written in cyclic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pair {
    AB,
    BC,
    CA,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::AB, Pair::BC, Pair::CA];

    pub fn boxes(self) -> [BoxLabel; 2] {
        match self {
            Pair::AB => [BoxLabel::A, BoxLabel::B],
            Pair::BC => [BoxLabel::B, BoxLabel::C],
            Pair::CA => [BoxLabel::C, BoxLabel::A],
        }
    }

    pub fn contains(self, b: BoxLabel) -> bool {
        self.boxes().contains(&b)
    }

    pub fn of(x: BoxLabel, y: BoxLabel) -> Option<Pair> {
        Pair::ALL
            .into_iter()
            .find(|p| x != y && p.contains(x) && p.contains(y))
    }

    /// The box of the pair that is not `b`.
    pub fn partner(self, b: BoxLabel) -> BoxLabel {
        let [x, y] = self.boxes();
        if x == b {
            y
        } else {
            x
        }
    }

    /// The other pair that contains `corner`.
    pub fn across(self, corner: BoxLabel) -> Pair {
        Pair::ALL
            .into_iter()
            .find(|&p| p != self && p.contains(corner))
            .expect("every corner lies on two sides")
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y] = self.boxes();
        write!(f, "{x}{y}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Single(BoxLabel),
    Pair(Pair),
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::Single(BoxLabel::A),
        Target::Single(BoxLabel::B),
        Target::Single(BoxLabel::C),
        Target::Pair(Pair::AB),
        Target::Pair(Pair::BC),
        Target::Pair(Pair::CA),
    ];

    /// Boxes in reading order.
    pub fn boxes(self) -> Vec<BoxLabel> {
        match self {
            Target::Single(b) => vec![b],
            Target::Pair(p) => p.boxes().to_vec(),
        }
    }

    pub fn contains(self, b: BoxLabel) -> bool {
        match self {
            Target::Single(x) => x == b,
            Target::Pair(p) => p.contains(b),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Single(b) => b.fmt(f),
            Target::Pair(p) => p.fmt(f),
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let box_of = |c: char| match c.to_ascii_uppercase() {
            'A' => Some(BoxLabel::A),
            'B' => Some(BoxLabel::B),
            'C' => Some(BoxLabel::C),
            _ => None,
        };
        let chars: Vec<char> = s.trim().chars().collect();
        let bad = || format!("unknown target {s:?} (expected A, B, C, AB, BC or CA)");
        match chars.as_slice() {
            [c] => box_of(*c).map(Target::Single).ok_or_else(bad),
            [x, y] => {
                let (x, y) = (box_of(*x).ok_or_else(bad)?, box_of(*y).ok_or_else(bad)?);
                let pair = Pair::of(x, y).ok_or_else(bad)?;
                if pair.boxes() == [x, y] {
                    Ok(Target::Pair(pair))
                } else {
                    Err(format!("pair {s:?} must be written as {pair}"))
                }
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Query {
    pub side: Side,
    pub target: Target,
}

impl Query {
    pub fn new(side: Side, target: Target) -> Self {
        Query { side, target }
    }

    pub fn single(side: Side, b: BoxLabel) -> Self {
        Query::new(side, Target::Single(b))
    }

    pub fn pair(side: Side, p: Pair) -> Self {
        Query::new(side, Target::Pair(p))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.side, self.target)
    }
}

/// Contents revealed by one query: `Some(true)` is full (or glowing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Outcome {
    pub boxes: [Option<bool>; 3],
}

impl Outcome {
    pub fn from_values(target: Target, values: &[bool]) -> Outcome {
        let mut o = Outcome::default();
        for (b, &v) in target.boxes().into_iter().zip(values) {
            o.boxes[b.index()] = Some(v);
        }
        o
    }

    pub fn get(&self, b: BoxLabel) -> Option<bool> {
        self.boxes[b.index()]
    }

    /// Values in the target's reading order; `None` if a box is missing.
    pub fn values(&self, target: Target) -> Option<Vec<bool>> {
        target.boxes().into_iter().map(|b| self.get(b)).collect()
    }

    /// `full/empty` style text in the target's reading order.
    pub fn render(&self, target: Target, vocab: Vocabulary) -> String {
        target
            .boxes()
            .into_iter()
            .map(|b| match self.get(b) {
                Some(true) => vocab.on,
                Some(false) => vocab.off,
                None => "?",
            })
            .collect::<Vec<_>>()
            .join("/")
    }
}

/// Words for the two box states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocabulary {
    pub on: &'static str,
    pub off: &'static str,
}

pub const GEMS: Vocabulary = Vocabulary {
    on: "full",
    off: "empty",
};
pub const LIGHT: Vocabulary = Vocabulary {
    on: "glow",
    off: "dark",
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("query {0} is not admissible in this model")]
    Inadmissible(Query),
    #[error("no box contents are consistent with {0} after the earlier findings")]
    InconsistentHistory(Query),
    #[error("unknown model {0:?} (expected seer, firefly or lsw)")]
    UnknownModel(String),
    #[error("unknown firefly flavor {0:?} (expected mirror, alice_cuts_bob_local or alice_cuts_bob_mirror)")]
    UnknownFlavor(String),
    #[error("invalid seer marginals: {0}")]
    InvalidMarginals(String),
}

/// One possible answer to a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<M> {
    pub probability: Rational,
    pub outcome: Outcome,
    pub next: M,
}

pub trait Model: Clone + fmt::Debug + Eq + std::hash::Hash {
    fn name(&self) -> String;

    fn vocabulary(&self) -> Vocabulary {
        GEMS
    }

    /// Whether the query can ever be made in this model; a particular state
    /// may still refuse it.
    fn admits(&self, q: Query) -> bool;

    /// Every outcome of `q` with positive probability, probabilities summing
    /// to 1.
    fn measure(&self, q: Query) -> Result<Vec<Branch<Self>>, ModelError>;
}

/// The three models behind one type, for callers that pick at run time.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AnyModel {
    Seer(SeerModel),
    Firefly(FireflyModel),
    Lsw(LswModel),
}

impl AnyModel {
    /// `seer`, `lsw`, `firefly` (mirror flavor) or `firefly:<flavor>`.
    pub fn from_name(name: &str, flavor: Option<&str>) -> Result<AnyModel, ModelError> {
        let (base, inline) = match name.split_once(':') {
            Some((b, f)) => (b, Some(f)),
            None => (name, None),
        };
        let flavor = flavor.or(inline);
        match (base, flavor) {
            ("seer", None) => Ok(AnyModel::Seer(SeerModel::fair())),
            ("lsw", None) => Ok(AnyModel::Lsw(LswModel::new())),
            ("firefly", f) => {
                let flavor = f.map_or(Ok(FireflyFlavor::Mirror), str::parse)?;
                Ok(AnyModel::Firefly(FireflyModel::new(flavor)))
            }
            ("seer" | "lsw", Some(f)) => Err(ModelError::UnknownFlavor(f.to_string())),
            _ => Err(ModelError::UnknownModel(name.to_string())),
        }
    }

    pub fn canonical() -> [AnyModel; 3] {
        [
            AnyModel::Seer(SeerModel::fair()),
            AnyModel::Firefly(FireflyModel::new(FireflyFlavor::Mirror)),
            AnyModel::Lsw(LswModel::new()),
        ]
    }
}

impl Model for AnyModel {
    fn name(&self) -> String {
        match self {
            AnyModel::Seer(m) => m.name(),
            AnyModel::Firefly(m) => m.name(),
            AnyModel::Lsw(m) => m.name(),
        }
    }

    fn vocabulary(&self) -> Vocabulary {
        match self {
            AnyModel::Seer(m) => m.vocabulary(),
            AnyModel::Firefly(m) => m.vocabulary(),
            AnyModel::Lsw(m) => m.vocabulary(),
        }
    }

    fn admits(&self, q: Query) -> bool {
        match self {
            AnyModel::Seer(m) => m.admits(q),
            AnyModel::Firefly(m) => m.admits(q),
            AnyModel::Lsw(m) => m.admits(q),
        }
    }

    fn measure(&self, q: Query) -> Result<Vec<Branch<Self>>, ModelError> {
        fn wrap<M: Model>(
            branches: Vec<Branch<M>>,
            f: fn(M) -> AnyModel,
        ) -> Vec<Branch<AnyModel>> {
            branches
                .into_iter()
                .map(|b| Branch {
                    probability: b.probability,
                    outcome: b.outcome,
                    next: f(b.next),
                })
                .collect()
        }
        Ok(match self {
            AnyModel::Seer(m) => wrap(m.measure(q)?, AnyModel::Seer),
            AnyModel::Firefly(m) => wrap(m.measure(q)?, AnyModel::Firefly),
            AnyModel::Lsw(m) => wrap(m.measure(q)?, AnyModel::Lsw),
        })
    }
}

/// Ordered `(query, outcome)` record of one run.
pub type History = Vec<(Query, Outcome)>;

/// `alice C=full; bob AB=full/empty` style text.
pub fn render_history(h: &History, vocab: Vocabulary) -> String {
    h.iter()
        .map(|(q, o)| format!("{q}={}", o.render(q.target, vocab)))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub history: History,
    /// Zero for forbidden entries.
    pub probability: Rational,
    /// Set when the run hit an inconsistent query; `blocked` holds the mass
    /// that reached it.
    pub forbidden: bool,
    pub blocked: Rational,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Enumeration {
    pub entries: Vec<HistoryEntry>,
}

impl Enumeration {
    pub fn total_probability(&self) -> Rational {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn blocked_mass(&self) -> Rational {
        self.entries.iter().map(|e| e.blocked).sum()
    }

    pub fn has_forbidden(&self) -> bool {
        self.entries.iter().any(|e| e.forbidden)
    }

    /// Allowed histories with identical records merged, sorted by history.
    pub fn distribution(&self) -> Vec<(History, Rational)> {
        let mut map: std::collections::BTreeMap<History, Rational> = Default::default();
        for e in self.entries.iter().filter(|e| !e.forbidden) {
            *map.entry(e.history.clone()).or_insert_with(Rational::zero) += e.probability;
        }
        map.into_iter().collect()
    }

    /// Probability, over allowed histories, that `pred` holds.
    pub fn probability_of(&self, pred: impl Fn(&History) -> bool) -> Rational {
        self.entries
            .iter()
            .filter(|e| !e.forbidden && pred(&e.history))
            .map(|e| e.probability)
            .sum()
    }
}

/// Every run of `plan` on `model`, one entry per branch of hidden variables
/// and outcomes. Inconsistent branches come back flagged, not as errors;
/// inadmissible queries abort the whole enumeration.
pub fn enumerate_histories<M: Model>(model: &M, plan: &Plan) -> Result<Enumeration, ModelError> {
    enumerate_states(model, plan, |_, _, _| {})
}

/// Like [`enumerate_histories`], also handing each leaf's final state to
/// `leaf`.
pub fn enumerate_states<M: Model>(
    model: &M,
    plan: &Plan,
    mut leaf: impl FnMut(&M, &History, Rational),
) -> Result<Enumeration, ModelError> {
    let mut out = Enumeration::default();
    walk(model, &plan.steps, &mut Vec::new(), Rational::one(), &mut out, &mut |m, h, p, out| {
        leaf(m, h, p);
        out.entries.push(HistoryEntry {
            history: h.clone(),
            probability: p,
            forbidden: false,
            blocked: Rational::zero(),
        });
        Ok(())
    })?;
    Ok(out)
}

type Leaf<'a, M> =
    dyn FnMut(&M, &History, Rational, &mut Enumeration) -> Result<(), ModelError> + 'a;

fn walk<M: Model>(
    model: &M,
    steps: &[Step],
    history: &mut History,
    mass: Rational,
    out: &mut Enumeration,
    leaf: &mut Leaf<'_, M>,
) -> Result<(), ModelError> {
    let Some((step, rest)) = steps.split_first() else {
        return leaf(model, history, mass, out);
    };
    let branches = match model.measure(step.query) {
        Ok(b) => b,
        Err(ModelError::InconsistentHistory(q)) => {
            let mut h = history.clone();
            h.push((q, Outcome::default()));
            out.entries.push(HistoryEntry {
                history: h,
                probability: Rational::zero(),
                forbidden: true,
                blocked: mass,
            });
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    for br in branches {
        history.push((step.query, br.outcome));
        let p = mass * br.probability;
        match step.arm_for(&br.outcome) {
            Some(arm) => {
                let mut joined = arm.then.steps.clone();
                joined.extend_from_slice(rest);
                walk(&br.next, &joined, history, p, out, leaf)?;
            }
            None => walk(&br.next, rest, history, p, out, leaf)?,
        }
        history.pop();
    }
    Ok(())
}

/// A live run of a model driven by a seeded generator.
///
/// Randomness comes from ChaCha8 seeded with `seed_from_u64`; a branch is
/// chosen by walking the cumulative distribution of its probabilities as
/// `f64` against one uniform draw in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct Session<M> {
    model: M,
    rng: ChaCha8Rng,
    history: History,
}

impl<M: Model> Session<M> {
    pub fn new(model: M, seed: u64) -> Self {
        Session::with_rng(model, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(model: M, rng: ChaCha8Rng) -> Self {
        Session {
            model,
            rng,
            history: Vec::new(),
        }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn into_rng(self) -> ChaCha8Rng {
        self.rng
    }

    pub fn measure(&mut self, q: Query) -> Result<Outcome, ModelError> {
        let branches = self.model.measure(q)?;
        let idx = sample_index(&mut self.rng, branches.iter().map(|b| &b.probability));
        let chosen = branches.into_iter().nth(idx).expect("index in range");
        self.model = chosen.next;
        self.history.push((q, chosen.outcome));
        Ok(chosen.outcome)
    }

    /// Runs the plan from the current state, following arms as outcomes
    /// arrive.
    pub fn run_plan(&mut self, plan: &Plan) -> Result<(), ModelError> {
        let mut queue: Vec<&Step> = plan.steps.iter().rev().collect();
        while let Some(step) = queue.pop() {
            let outcome = self.measure(step.query)?;
            if let Some(arm) = step.arm_for(&outcome) {
                queue.extend(arm.then.steps.iter().rev());
            }
        }
        Ok(())
    }
}

pub(crate) fn sample_index<'a>(
    rng: &mut impl Rng,
    probs: impl Iterator<Item = &'a Rational>,
) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        last = i;
        acc += to_f64(p);
        if u < acc {
            return i;
        }
    }
    last
}

/// Counts of each history over `trials` independent seeded runs. Runs that
/// hit an inconsistent query are counted under `forbidden`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleCounts {
    pub trials: u64,
    pub forbidden: u64,
    pub counts: std::collections::BTreeMap<History, u64>,
}

impl SampleCounts {
    pub fn frequency(&self, h: &History) -> f64 {
        self.counts.get(h).copied().unwrap_or(0) as f64 / self.trials as f64
    }
}

/// One generator for all trials, so the stream depends only on `seed`.
///
/// Draws match a fresh [`Session`] per trial sharing that generator; branch
/// lists are computed once per state and query.
pub fn sample_histories<M: Model>(
    model: &M,
    plan: &Plan,
    trials: u64,
    seed: u64,
) -> Result<SampleCounts, ModelError> {
    type Cached<M> = Result<Rc<[Branch<M>]>, ModelError>;
    let mut cache: HashMap<(M, Query), Cached<M>> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = SampleCounts {
        trials,
        ..Default::default()
    };
    let mut history: History = Vec::new();
    let mut queue: Vec<&Step> = Vec::new();
    'trials: for _ in 0..trials {
        let mut state = model.clone();
        history.clear();
        queue.clear();
        queue.extend(plan.steps.iter().rev());
        while let Some(step) = queue.pop() {
            let branches = cache
                .entry((state.clone(), step.query))
                .or_insert_with(|| state.measure(step.query).map(Rc::from))
                .clone();
            let branches = match branches {
                Ok(b) => b,
                Err(ModelError::InconsistentHistory(_)) => {
                    counts.forbidden += 1;
                    continue 'trials;
                }
                Err(e) => return Err(e),
            };
            let chosen = &branches[sample_index(&mut rng, branches.iter().map(|b| &b.probability))];
            state = chosen.next.clone();
            history.push((step.query, chosen.outcome));
            if let Some(arm) = step.arm_for(&chosen.outcome) {
                queue.extend(arm.then.steps.iter().rev());
            }
        }
        match counts.counts.get_mut(&history) {
            Some(n) => *n += 1,
            None => {
                counts.counts.insert(history.clone(), 1);
            }
        }
    }
    Ok(counts)
}

/// Probability that `b` reads full on a fresh single-step query.
pub fn box_probability<M: Model>(model: &M, q: Query, b: BoxLabel) -> Result<Rational, ModelError> {
    Ok(model
        .measure(q)?
        .iter()
        .filter(|br| br.outcome.get(b) == Some(true))
        .map(|br| br.probability)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_matches_sessions() {
        let plan = bundled_plan("fable").unwrap();
        let m = SeerModel::fair();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut by_hand = SampleCounts {
            trials: 300,
            ..Default::default()
        };
        for _ in 0..300 {
            let mut s = Session::with_rng(m.clone(), rng);
            s.run_plan(&plan).unwrap();
            *by_hand.counts.entry(s.history().clone()).or_default() += 1;
            rng = s.into_rng();
        }
        assert_eq!(sample_histories(&m, &plan, 300, 5).unwrap(), by_hand);
    }

    #[test]
    fn target_parsing() {
        assert_eq!("A".parse::<Target>(), Ok(Target::Single(BoxLabel::A)));
        assert_eq!("ca".parse::<Target>(), Ok(Target::Pair(Pair::CA)));
        assert!("AC".parse::<Target>().is_err());
        assert!("AA".parse::<Target>().is_err());
        assert!("D".parse::<Target>().is_err());
    }

    #[test]
    fn pair_geometry() {
        assert_eq!(Pair::AB.across(BoxLabel::A), Pair::CA);
        assert_eq!(Pair::AB.across(BoxLabel::B), Pair::BC);
        assert_eq!(Pair::CA.partner(BoxLabel::A), BoxLabel::C);
        assert_eq!(Pair::of(BoxLabel::A, BoxLabel::C), Some(Pair::CA));
    }

    #[test]
    fn outcome_rendering() {
        let o = Outcome::from_values(Target::Pair(Pair::CA), &[true, false]);
        assert_eq!(o.get(BoxLabel::C), Some(true));
        assert_eq!(o.render(Target::Pair(Pair::CA), GEMS), "full/empty");
        assert_eq!(o.render(Target::Pair(Pair::CA), LIGHT), "glow/dark");
    }

    #[test]
    fn model_names() {
        assert!(AnyModel::from_name("seer", None).is_ok());
        assert!(AnyModel::from_name("firefly:alice_cuts_bob_local", None).is_ok());
        assert!(matches!(
            AnyModel::from_name("firefly", Some("sideways")),
            Err(ModelError::UnknownFlavor(_))
        ));
        assert!(matches!(
            AnyModel::from_name("oracle", None),
            Err(ModelError::UnknownModel(_))
        ));
    }
}
