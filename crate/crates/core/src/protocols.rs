//! Alice-side strategies against the toy models: signalling search, the
//! assumption battery, the suitors' trials and PR-box readings.
//!
//! All comparisons are exact; every verdict that fails carries a plan that
//! [`enumerate_histories`] reproduces.

use std::collections::BTreeSet;
use std::fmt;
use std::io;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::behavior::{BehaviorError, BehaviorTable};
use crate::models::{
    enumerate_histories, AnyModel, BoxLabel, History, Model, ModelError, OutcomePattern, Pair,
    Plan, Query, SeerModel, Session, Side, Step, Target,
};
use crate::rational::{format_rational, Rational};

/// Alice's first query and, for each outcome of it, an optional second.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AliceStrategy {
    pub first: Target,
    /// `(outcome values in reading order, second target)`; outcomes not
    /// listed end Alice's turn.
    pub second: Vec<(Vec<bool>, Option<Target>)>,
}

impl AliceStrategy {
    pub fn idle() -> Option<AliceStrategy> {
        None
    }

    pub fn single(first: Target) -> Self {
        AliceStrategy {
            first,
            second: Vec::new(),
        }
    }

    pub fn to_plan(&self) -> Plan {
        let mut step = Step::new(Query::new(Side::Alice, self.first));
        for (values, target) in &self.second {
            if let Some(t) = target {
                step = step.with_arm(
                    OutcomePattern::Exactly(values.clone()),
                    Plan::sequence([Query::new(Side::Alice, *t)]),
                );
            }
        }
        Plan::new(vec![step])
    }
}

impl fmt::Display for AliceStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_plan().fmt(f)
    }
}

/// Every depth-≤2 strategy whose first query is admissible, with a second
/// query chosen per outcome the first one can actually produce.
pub fn all_strategies<M: Model>(model: &M) -> Vec<AliceStrategy> {
    let targets: Vec<Target> = Target::ALL
        .into_iter()
        .filter(|&t| model.admits(Query::new(Side::Alice, t)))
        .collect();
    let mut out = Vec::new();
    for &first in &targets {
        let Ok(branches) = model.measure(Query::new(Side::Alice, first)) else {
            continue;
        };
        let outcomes: Vec<Vec<bool>> = branches
            .iter()
            .filter_map(|b| b.outcome.values(first))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let choices: Vec<Option<Target>> =
            std::iter::once(None).chain(targets.iter().copied().map(Some)).collect();
        let mut picks = vec![0usize; outcomes.len()];
        loop {
            out.push(AliceStrategy {
                first,
                second: outcomes
                    .iter()
                    .zip(&picks)
                    .map(|(o, &k)| (o.clone(), choices[k]))
                    .collect(),
            });
            let mut i = 0;
            while i < picks.len() {
                picks[i] += 1;
                if picks[i] < choices.len() {
                    break;
                }
                picks[i] = 0;
                i += 1;
            }
            if i == picks.len() {
                break;
            }
        }
    }
    out
}

/// Probability that each box of Bob's query reads full, after Alice's
/// strategy (or none).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobMarginal {
    pub query: Target,
    pub full: Vec<(BoxLabel, Rational)>,
    /// Mass lost to inconsistent histories.
    pub blocked: Rational,
}

impl BobMarginal {
    pub fn of(&self, b: BoxLabel) -> Option<Rational> {
        self.full.iter().find(|(x, _)| *x == b).map(|(_, p)| *p)
    }
}

fn with_bob(strategy: Option<&AliceStrategy>, bob: Target) -> Plan {
    let mut plan = strategy.map_or_else(Plan::default, AliceStrategy::to_plan);
    plan.steps.push(Step::new(Query::new(Side::Bob, bob)));
    plan
}

fn last_bob_value(h: &History, b: BoxLabel) -> Option<bool> {
    h.iter()
        .rev()
        .find(|(q, _)| q.side == Side::Bob)
        .and_then(|(_, o)| o.get(b))
}

pub fn bob_marginal<M: Model>(
    model: &M,
    strategy: Option<&AliceStrategy>,
    bob: Target,
) -> Result<BobMarginal, ModelError> {
    let plan = with_bob(strategy, bob);
    let e = enumerate_histories(model, &plan)?;
    let full = bob
        .boxes()
        .into_iter()
        .map(|b| (b, e.probability_of(|h| last_bob_value(h, b) == Some(true))))
        .collect();
    Ok(BobMarginal {
        query: bob,
        full,
        blocked: e.blocked_mass(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignallingWitness {
    pub strategy: AliceStrategy,
    pub bob_query: Target,
    pub bob_box: BoxLabel,
    pub baseline: Rational,
    pub with_strategy: Rational,
}

impl SignallingWitness {
    pub fn gap(&self) -> Rational {
        (self.with_strategy - self.baseline).abs()
    }

    pub fn plan(&self) -> Plan {
        with_bob(Some(&self.strategy), self.bob_query)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignallingReport {
    pub signals: bool,
    /// Largest change found, first in search order on ties.
    pub witness: Option<SignallingWitness>,
}

impl SignallingReport {
    pub fn gap(&self) -> Rational {
        self.witness.as_ref().map_or_else(Rational::zero, SignallingWitness::gap)
    }
}

/// Exhaustive search over [`all_strategies`] and every admissible Bob query.
/// Strategies some branch of which is refused by the model are skipped.
pub fn detect_signalling<M: Model>(model: &M) -> SignallingReport {
    let bob_targets: Vec<Target> = Target::ALL
        .into_iter()
        .filter(|&t| model.admits(Query::new(Side::Bob, t)))
        .collect();
    let baselines: Vec<BobMarginal> = bob_targets
        .iter()
        .filter_map(|&t| bob_marginal(model, None, t).ok())
        .collect();
    let mut best: Option<SignallingWitness> = None;
    for strategy in all_strategies(model) {
        for base in &baselines {
            let Ok(m) = bob_marginal(model, Some(&strategy), base.query) else {
                continue;
            };
            for (&(b, p0), &(_, p1)) in base.full.iter().zip(&m.full) {
                let w = SignallingWitness {
                    strategy: strategy.clone(),
                    bob_query: base.query,
                    bob_box: b,
                    baseline: p0,
                    with_strategy: p1,
                };
                if p0 != p1 && best.as_ref().is_none_or(|cur| w.gap() > cur.gap()) {
                    best = Some(w);
                }
            }
        }
    }
    SignallingReport {
        signals: best.is_some(),
        witness: best,
    }
}

/// A reproducible counterexample: the plan to enumerate and what it shows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub plan: Plan,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn pass() -> Self {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    fn fail(plan: Plan, detail: String) -> Self {
        Verdict {
            holds: false,
            witness: Some(Witness { plan, detail }),
        }
    }
}

/// Ways to carry out a measurement context on one side: the simultaneous
/// query and the two orders of single queries, as far as admitted.
fn realizations<M: Model>(model: &M, side: Side, context: Target) -> Vec<Vec<Query>> {
    let mut out = Vec::new();
    if model.admits(Query::new(side, context)) {
        out.push(vec![Query::new(side, context)]);
    }
    if let Target::Pair(p) = context {
        let [x, y] = p.boxes();
        if model.admits(Query::single(side, x)) && model.admits(Query::single(side, y)) {
            out.push(vec![Query::single(side, x), Query::single(side, y)]);
            out.push(vec![Query::single(side, y), Query::single(side, x)]);
        }
    }
    out
}

/// Order-preserving merges of two query sequences.
fn interleavings(a: &[Query], b: &[Query]) -> Vec<Vec<Query>> {
    match (a.split_first(), b.split_first()) {
        (None, _) => vec![b.to_vec()],
        (_, None) => vec![a.to_vec()],
        (Some((x, ra)), Some((y, rb))) => {
            let mut out: Vec<Vec<Query>> = interleavings(ra, b)
                .into_iter()
                .map(|mut v| {
                    v.insert(0, *x);
                    v
                })
                .collect();
            out.extend(interleavings(a, rb).into_iter().map(|mut v| {
                v.insert(0, *y);
                v
            }));
            out
        }
    }
}

fn side_value(h: &History, side: Side, b: BoxLabel) -> Option<bool> {
    h.iter()
        .filter(|(q, _)| q.side == side)
        .find_map(|(_, o)| o.get(b))
}

/// Copies agree: whenever both sides measure a proposition, in any pair of
/// contexts, carried out in any way and interleaved in any order, they find
/// the same value (among histories that can occur), and each proposition
/// is uncertain in every context that measures it.
pub fn test_assumption_a<M: Model>(model: &M) -> Verdict {
    for x in BoxLabel::ALL {
        let contexts: Vec<Target> = Target::ALL
            .into_iter()
            .filter(|t| t.contains(x))
            .collect();
        for side in Side::BOTH {
            for &c in &contexts {
                let q = Query::new(side, c);
                if !model.admits(q) {
                    continue;
                }
                let Ok(p) = crate::models::box_probability(model, q, x) else {
                    continue;
                };
                if p.is_zero() || p.is_one() {
                    return Verdict::fail(
                        Plan::sequence([q]),
                        format!("p({x} full) = {} in context {c}", format_rational(&p)),
                    );
                }
            }
        }
        for &ca in &contexts {
            for &cb in &contexts {
                for ra in realizations(model, Side::Alice, ca) {
                    for rb in realizations(model, Side::Bob, cb) {
                        for seq in interleavings(&ra, &rb) {
                            let plan = Plan::sequence(seq);
                            let Ok(e) = enumerate_histories(model, &plan) else {
                                continue;
                            };
                            let differ = e.probability_of(|h| {
                                side_value(h, Side::Alice, x) != side_value(h, Side::Bob, x)
                            });
                            if differ.is_positive() {
                                return Verdict::fail(
                                    plan,
                                    format!(
                                        "the two sides disagree on {x} with probability {differ}"
                                    ),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    Verdict::pass()
}

fn pair_law<M: Model>(model: &M, seq: &[Query], p: Pair) -> Result<Vec<(Vec<bool>, Rational)>, ModelError> {
    let e = enumerate_histories(model, &Plan::sequence(seq.iter().copied()))?;
    let mut law: std::collections::BTreeMap<Vec<bool>, Rational> = Default::default();
    for entry in e.entries.iter().filter(|e| !e.forbidden) {
        let side = seq[0].side;
        let v: Vec<bool> = p
            .boxes()
            .iter()
            .map(|&b| side_value(&entry.history, side, b).expect("box measured"))
            .collect();
        *law.entry(v).or_insert_with(Rational::zero) += entry.probability;
    }
    Ok(law.into_iter().collect())
}

fn render_law(law: &[(Vec<bool>, Rational)]) -> String {
    law.iter()
        .map(|(v, p)| {
            let w: Vec<&str> = v.iter().map(|&b| if b { "full" } else { "empty" }).collect();
            format!("{}={}", w.join("/"), format_rational(p))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Joint measurability: every proposition can be measured on its own on
/// some side, and wherever a compatible pair can be measured singly, doing
/// so in either order gives the same joint law as measuring it at once.
pub fn test_assumption_b<M: Model>(model: &M) -> Verdict {
    for x in BoxLabel::ALL {
        if !Side::BOTH.iter().any(|&s| model.admits(Query::single(s, x))) {
            return Verdict::fail(
                Plan::sequence([Query::single(Side::Alice, x)]),
                format!("no single-box query measures {x}"),
            );
        }
    }
    for side in Side::BOTH {
        for p in Pair::ALL {
            let ways = realizations(model, side, Target::Pair(p));
            let mut reference: Option<(Vec<Query>, Vec<(Vec<bool>, Rational)>)> = None;
            for seq in ways {
                let Ok(law) = pair_law(model, &seq, p) else {
                    continue;
                };
                match &reference {
                    None => reference = Some((seq, law)),
                    Some((ref_seq, ref_law)) if *ref_law != law => {
                        return Verdict::fail(
                            Plan::sequence(seq),
                            format!(
                                "{} against {} for `{}`",
                                render_law(&law),
                                render_law(ref_law),
                                Plan::sequence(ref_seq.iter().copied())
                            ),
                        );
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Verdict::pass()
}

/// No-signalling: nothing Alice does changes Bob's statistics.
pub fn test_assumption_c<M: Model>(model: &M) -> Verdict {
    let report = detect_signalling(model);
    match report.witness {
        None => Verdict::pass(),
        Some(w) => Verdict::fail(
            w.plan(),
            format!(
                "p(bob {} full in {}) moves from {} to {}",
                w.bob_box,
                w.bob_query,
                w.baseline,
                w.with_strategy
            ),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionReport {
    pub model: String,
    pub a: Verdict,
    pub b: Verdict,
    pub c: Verdict,
}

impl AssumptionReport {
    pub fn verdicts(&self) -> [(&'static str, &Verdict); 3] {
        [("a", &self.a), ("b", &self.b), ("c", &self.c)]
    }
}

pub fn assumption_report<M: Model>(model: &M) -> AssumptionReport {
    AssumptionReport {
        model: model.name(),
        a: test_assumption_a(model),
        b: test_assumption_b(model),
        c: test_assumption_c(model),
    }
}

pub fn assumption_matrix(models: &[AnyModel]) -> Vec<AssumptionReport> {
    models.iter().map(assumption_report).collect()
}

/// Aligned table, one row per model, with witnesses listed underneath.
pub fn render_matrix_text(reports: &[AssumptionReport], color: bool) -> String {
    let mark = |v: &Verdict| match (v.holds, color) {
        (true, false) => "yes".to_string(),
        (false, false) => "no".to_string(),
        (true, true) => "\x1b[32myes\x1b[0m".to_string(),
        (false, true) => "\x1b[31mno\x1b[0m".to_string(),
    };
    let width = reports
        .iter()
        .map(|r| r.model.len())
        .chain(std::iter::once("model".len()))
        .max()
        .unwrap_or(5);
    let mut out = format!("{:<width$}  (a)  (b)  (c)\n", "model");
    for r in reports {
        out.push_str(&format!("{:<width$}", r.model));
        for (_, v) in r.verdicts() {
            // Colour codes would throw off padding, so pad the plain word.
            let pad = if v.holds { 0 } else { 1 };
            out.push_str(&format!("  {}{}", mark(v), " ".repeat(pad)));
        }
        let trimmed = out.trim_end().len();
        out.truncate(trimmed);
        out.push('\n');
    }
    for r in reports {
        for (name, v) in r.verdicts() {
            if let Some(w) = &v.witness {
                out.push_str(&format!("{} ({name}): {}\n    plan: {}\n", r.model, w.detail, w.plan));
            }
        }
    }
    out
}

pub const MATRIX_CSV_HEADER: [&str; 4] = ["model", "assumption", "verdict", "witness_plan"];

pub fn write_matrix_csv<W: io::Write>(reports: &[AssumptionReport], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MATRIX_CSV_HEADER)?;
    for r in reports {
        for (name, v) in r.verdicts() {
            let plan = v.witness.as_ref().map(|w| w.plan.to_string()).unwrap_or_default();
            w.write_record([r.model.as_str(), name, if v.holds { "true" } else { "false" }, &plan])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FableTrial {
    pub trial: u64,
    pub daniel_success: bool,
    pub sandu_first: bool,
    pub sandu_second: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FableStats {
    pub trials: u64,
    pub daniel_successes: u64,
    pub sandu_first_successes: u64,
    pub sandu_second_successes: u64,
    pub per_trial: Vec<FableTrial>,
}

impl FableStats {
    fn rate(n: u64, d: u64) -> Rational {
        Rational::new(n as i128, d as i128)
    }

    pub fn daniel_rate(&self) -> Rational {
        Self::rate(self.daniel_successes, self.trials)
    }

    pub fn sandu_first_rate(&self) -> Rational {
        Self::rate(self.sandu_first_successes, self.trials)
    }

    pub fn sandu_second_rate(&self) -> Rational {
        Self::rate(self.sandu_second_successes, self.trials)
    }
}

/// The last fifty trials of the fable, repeated `trials` times.
///
/// Daniel (Bob) names a pair and which of its boxes holds the gem, both at
/// random. Sandu (Alice) guesses at random about the remaining box, opens
/// it, then opens the box of Daniel's pair that his finding forces to match
/// the prophecy, predicting it correctly. Daniel opens his pair last. One
/// ChaCha8 stream seeded with `seed` drives both the choices and the boxes.
pub fn simulate_fable(trials: u64, seed: u64) -> Result<FableStats, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = FableStats {
        trials,
        daniel_successes: 0,
        sandu_first_successes: 0,
        sandu_second_successes: 0,
        per_trial: Vec::with_capacity(trials as usize),
    };
    for trial in 1..=trials {
        let pair = Pair::ALL[rng.random_range(0..3)];
        let [x, y] = pair.boxes();
        let (predicted_full, predicted_empty) = if rng.random() { (x, y) } else { (y, x) };
        let third = BoxLabel::ALL
            .into_iter()
            .find(|b| !pair.contains(*b))
            .expect("three boxes");
        let sandu_guess: bool = rng.random();

        let mut session = Session::with_rng(SeerModel::fair(), rng);
        let found = session.measure(Query::single(Side::Alice, third))?.get(third) == Some(true);
        let (second, second_guess) = if found {
            (predicted_empty, false)
        } else {
            (predicted_full, true)
        };
        let second_found = session.measure(Query::single(Side::Alice, second))?.get(second);
        let daniel = session.measure(Query::pair(Side::Bob, pair))?;
        rng = session.into_rng();

        let t = FableTrial {
            trial,
            daniel_success: daniel.get(predicted_full) == Some(true)
                && daniel.get(predicted_empty) == Some(false),
            sandu_first: found == sandu_guess,
            sandu_second: second_found == Some(second_guess),
        };
        stats.daniel_successes += u64::from(t.daniel_success);
        stats.sandu_first_successes += u64::from(t.sandu_first);
        stats.sandu_second_successes += u64::from(t.sandu_second);
        stats.per_trial.push(t);
    }
    Ok(stats)
}

pub const FABLE_CSV_HEADER: [&str; 4] = ["trial", "daniel_success", "sandu_first", "sandu_second"];

pub fn write_fable_csv<W: io::Write>(stats: &FableStats, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FABLE_CSV_HEADER)?;
    for t in &stats.per_trial {
        w.write_record([
            t.trial.to_string(),
            u8::from(t.daniel_success).to_string(),
            u8::from(t.sandu_first).to_string(),
            u8::from(t.sandu_second).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A box setting: the query made and the box whose content is the ±1 result
/// (full is +1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reading {
    pub target: Target,
    pub read: BoxLabel,
}

impl Reading {
    pub fn new(target: Target, read: BoxLabel) -> Self {
        assert!(target.contains(read), "read box must be opened");
        Reading { target, read }
    }

    /// The same query read through its other box.
    pub fn flipped(self) -> Self {
        match self.target {
            Target::Pair(p) => Reading::new(self.target, p.partner(self.read)),
            Target::Single(_) => self,
        }
    }
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-in-{}", self.read, self.target)
    }
}

/// Settings `a, a'` for Alice and `b, b'` for Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interpretation {
    pub alice: [Reading; 2],
    pub bob: [Reading; 2],
}

impl Interpretation {
    /// `a` = A in AB, `a'` = C in CA; `b` = A in AB, `b'` = B in BC.
    pub fn standard() -> Self {
        Interpretation {
            alice: [
                Reading::new(Target::Pair(Pair::AB), BoxLabel::A),
                Reading::new(Target::Pair(Pair::CA), BoxLabel::C),
            ],
            bob: [
                Reading::new(Target::Pair(Pair::AB), BoxLabel::A),
                Reading::new(Target::Pair(Pair::BC), BoxLabel::B),
            ],
        }
    }

    /// One box opened per side: Alice `A` or `B`, Bob `A` or `C`.
    pub fn single_box() -> Self {
        let single = |b| Reading::new(Target::Single(b), b);
        Interpretation {
            alice: [single(BoxLabel::A), single(BoxLabel::B)],
            bob: [single(BoxLabel::A), single(BoxLabel::C)],
        }
    }

    /// The 16 ways of reading each of the four queries through either box,
    /// with the bit for `a` most significant.
    pub fn all_from(base: Interpretation) -> Vec<Interpretation> {
        (0..16u8)
            .map(|bits| {
                let flip = |r: Reading, k: u8| if bits >> (3 - k) & 1 == 1 { r.flipped() } else { r };
                Interpretation {
                    alice: [flip(base.alice[0], 0), flip(base.alice[1], 1)],
                    bob: [flip(base.bob[0], 2), flip(base.bob[1], 3)],
                }
            })
            .collect()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a={} a'={} b={} b'={}",
            self.alice[0], self.alice[1], self.bob[0], self.bob[1]
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RealizeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
    #[error("setting pair ({0}, {1}) ran into an inconsistent history")]
    Forbidden(String, String),
}

/// Two-party ±1 box from one query per side, Alice first, computed by exact
/// enumeration.
pub fn realize_pr_box<M: Model>(model: &M, interp: &Interpretation) -> Result<BehaviorTable, RealizeError> {
    let mut probs = [[[[Rational::zero(); 2]; 2]; 2]; 2];
    for (x, ra) in interp.alice.iter().enumerate() {
        for (y, rb) in interp.bob.iter().enumerate() {
            let plan = Plan::sequence([
                Query::new(Side::Alice, ra.target),
                Query::new(Side::Bob, rb.target),
            ]);
            let e = enumerate_histories(model, &plan)?;
            if e.has_forbidden() {
                return Err(RealizeError::Forbidden(ra.to_string(), rb.to_string()));
            }
            for entry in &e.entries {
                let a = entry.history[0].1.get(ra.read).expect("read box opened");
                let b = entry.history[1].1.get(rb.read).expect("read box opened");
                probs[x][y][usize::from(!a)][usize::from(!b)] += entry.probability;
            }
        }
    }
    let idx = |v: i8| usize::from(v < 0);
    Ok(BehaviorTable::two_party_pm(["a", "a'"], ["b", "b'"], |x, y, a, b| {
        probs[x][y][idx(a)][idx(b)]
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{chsh, is_pr_box, no_signalling_check};
    use crate::models::{bundled_plan, FireflyFlavor, FireflyModel, LswModel};
    use crate::rational::ratio;

    #[test]
    fn interleaving_counts() {
        let a = [Query::single(Side::Alice, BoxLabel::A), Query::single(Side::Alice, BoxLabel::B)];
        let b = [Query::single(Side::Bob, BoxLabel::A), Query::single(Side::Bob, BoxLabel::B)];
        assert_eq!(interleavings(&a, &b).len(), 6);
        assert_eq!(interleavings(&a[..1], &b).len(), 3);
        assert_eq!(interleavings(&[], &b), vec![b.to_vec()]);
    }

    #[test]
    fn strategy_space_size() {
        // Six first queries, two possible outcomes each, seven choices per
        // outcome (stop or one of six targets).
        assert_eq!(all_strategies(&SeerModel::fair()).len(), 6 * 49);
        // Pairs only: three first queries, three choices after each outcome.
        assert_eq!(all_strategies(&FireflyModel::new(FireflyFlavor::Mirror)).len(), 3 * 16);
    }

    #[test]
    fn idle_alice_leaves_bob_even() {
        let m = bob_marginal(&SeerModel::fair(), None, Target::Pair(Pair::AB)).unwrap();
        assert_eq!(m.of(BoxLabel::A), Some(ratio(1, 2)));
    }

    #[test]
    fn fable_strategy_fixes_bob() {
        let fable = bundled_plan("fable").unwrap();
        let strategy = AliceStrategy {
            first: Target::Single(BoxLabel::C),
            second: vec![
                (vec![true], Some(Target::Single(BoxLabel::B))),
                (vec![false], Some(Target::Single(BoxLabel::A))),
            ],
        };
        assert_eq!(with_bob(Some(&strategy), Target::Pair(Pair::AB)), fable);
        let m = bob_marginal(&SeerModel::fair(), Some(&strategy), Target::Pair(Pair::AB)).unwrap();
        assert_eq!(m.of(BoxLabel::A), Some(Rational::one()));

        let mirrored = AliceStrategy {
            first: Target::Single(BoxLabel::C),
            second: vec![
                (vec![true], Some(Target::Single(BoxLabel::A))),
                (vec![false], Some(Target::Single(BoxLabel::B))),
            ],
        };
        let m = bob_marginal(&SeerModel::fair(), Some(&mirrored), Target::Pair(Pair::AB)).unwrap();
        assert_eq!(m.of(BoxLabel::A), Some(Rational::zero()));
    }

    #[test]
    fn lsw_strategies_leave_bob_alone() {
        let m = LswModel::new();
        for s in all_strategies(&m).iter().step_by(17) {
            for t in Target::ALL {
                let with = bob_marginal(&m, Some(s), t).unwrap();
                assert_eq!(with, bob_marginal(&m, None, t).unwrap());
            }
        }
    }

    #[test]
    fn seer_signals_by_half() {
        let r = detect_signalling(&SeerModel::fair());
        assert!(r.signals);
        assert_eq!(r.gap(), ratio(1, 2));
    }

    #[test]
    fn pr_box_from_seer() {
        let t = realize_pr_box(&SeerModel::fair(), &Interpretation::standard()).unwrap();
        assert!(is_pr_box(&t));
        assert_eq!(chsh(&t).unwrap().value, ratio(4, 1));
        assert!(no_signalling_check(&t).holds);
    }

    #[test]
    fn single_box_lsw_box() {
        let t = realize_pr_box(&LswModel::new(), &Interpretation::single_box()).unwrap();
        assert!(is_pr_box(&t));
        assert_eq!(t.correlator(0, 0).unwrap(), Rational::one());
        assert_eq!(t.correlator(1, 1).unwrap(), -Rational::one());
    }

    #[test]
    fn fable_small_run() {
        let s = simulate_fable(200, 3).unwrap();
        assert_eq!(s.daniel_successes, 200);
        assert_eq!(s.sandu_second_successes, 200);
        let mut out = Vec::new();
        write_fable_csv(&s, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("trial,daniel_success,sandu_first,sandu_second\n1,1,"));
        assert_eq!(text.lines().count(), 201);
    }
}
