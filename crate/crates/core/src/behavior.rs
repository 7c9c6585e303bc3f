//! Probability tables ("boxes"), exclusivity and joint-feasibility checks,
//! no-signalling, CHSH and PR boxes.
//!
//! Outcome labels of two-outcome boxes are `+1` / `-1`; full and glowing map
//! to `+1`.

use std::fmt;
use std::io;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::lp::{solve_feasibility, LpOutcome};
use crate::rational::{format_rational, is_probability, ratio, to_decimal, Rational};
use crate::scenario::{Mask, MarginalVector, OrthoGraph};

pub const PLUS: &str = "+1";
pub const MINUS: &str = "-1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BehaviorError {
    #[error("a behavior table has 1 or 2 parties, got {0}")]
    PartyCount(usize),
    #[error("party {party} has no {what}")]
    EmptyLabels { party: usize, what: &'static str },
    #[error("expected {expected} rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RowWidth { row: usize, expected: usize, got: usize },
    #[error("row {row} entry {value} is outside [0,1]")]
    OutOfRange { row: usize, value: String },
    #[error("row {row} sums to {sum}, not 1")]
    NotNormalized { row: usize, sum: String },
    #[error("expected a two-party box with two settings and outcomes +1/-1 per party")]
    NotChshShape,
    #[error("{0} marginals for a graph with {1} vertices")]
    MarginalMismatch(usize, usize),
    #[error("certificate value does not fit the rational type")]
    Overflow,
}

/// Outcome probabilities for every setting combination of a one- or
/// two-party box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorTable {
    settings: Vec<Vec<String>>,
    outcomes: Vec<Vec<String>>,
    /// `rows[setting combo][outcome combo]`, both row-major with party 0
    /// most significant.
    rows: Vec<Vec<Rational>>,
}

impl BehaviorTable {
    pub fn new(
        settings: Vec<Vec<String>>,
        outcomes: Vec<Vec<String>>,
        rows: Vec<Vec<Rational>>,
    ) -> Result<Self, BehaviorError> {
        let parties = settings.len();
        if !(1..=2).contains(&parties) || outcomes.len() != parties {
            return Err(BehaviorError::PartyCount(parties.max(outcomes.len())));
        }
        for p in 0..parties {
            if settings[p].is_empty() {
                return Err(BehaviorError::EmptyLabels { party: p, what: "settings" });
            }
            if outcomes[p].is_empty() {
                return Err(BehaviorError::EmptyLabels { party: p, what: "outcomes" });
            }
        }
        let expected_rows: usize = settings.iter().map(Vec::len).product();
        let width: usize = outcomes.iter().map(Vec::len).product();
        if rows.len() != expected_rows {
            return Err(BehaviorError::RowCount {
                expected: expected_rows,
                got: rows.len(),
            });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(BehaviorError::RowWidth {
                    row: r,
                    expected: width,
                    got: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|v| !is_probability(v)) {
                return Err(BehaviorError::OutOfRange {
                    row: r,
                    value: format_rational(bad),
                });
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(BehaviorError::NotNormalized {
                    row: r,
                    sum: format_rational(&sum),
                });
            }
        }
        Ok(BehaviorTable {
            settings,
            outcomes,
            rows,
        })
    }

    /// Two-party, two-setting, `±1` box built from `prob(x, y, a, b)` where
    /// `a`, `b` are the outcome values.
    pub fn two_party_pm(
        alice_settings: [&str; 2],
        bob_settings: [&str; 2],
        prob: impl Fn(usize, usize, i8, i8) -> Rational,
    ) -> Result<Self, BehaviorError> {
        let values = [1i8, -1];
        let rows = (0..2)
            .flat_map(|x| (0..2).map(move |y| (x, y)))
            .map(|(x, y)| {
                values
                    .iter()
                    .flat_map(|&a| values.iter().map(move |&b| (a, b)))
                    .map(|(a, b)| prob(x, y, a, b))
                    .collect()
            })
            .collect();
        BehaviorTable::new(
            vec![
                alice_settings.iter().map(|s| s.to_string()).collect(),
                bob_settings.iter().map(|s| s.to_string()).collect(),
            ],
            vec![vec![PLUS.into(), MINUS.into()], vec![PLUS.into(), MINUS.into()]],
            rows,
        )
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self, party: usize) -> &[String] {
        &self.settings[party]
    }

    pub fn outcomes(&self, party: usize) -> &[String] {
        &self.outcomes[party]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    fn row_index(&self, settings: &[usize]) -> usize {
        settings
            .iter()
            .zip(&self.settings)
            .fold(0, |acc, (&s, labels)| acc * labels.len() + s)
    }

    fn outcome_index(&self, outcomes: &[usize]) -> usize {
        outcomes
            .iter()
            .zip(&self.outcomes)
            .fold(0, |acc, (&o, labels)| acc * labels.len() + o)
    }

    pub fn prob(&self, settings: &[usize], outcomes: &[usize]) -> Rational {
        self.rows[self.row_index(settings)][self.outcome_index(outcomes)]
    }

    /// Distribution of `party`'s outcomes under the full setting combination.
    pub fn marginal(&self, party: usize, settings: &[usize]) -> Vec<Rational> {
        let row = &self.rows[self.row_index(settings)];
        let mut out = vec![Rational::zero(); self.outcomes[party].len()];
        if self.parties() == 1 {
            out.clone_from(row);
            return out;
        }
        let bob_width = self.outcomes[1].len();
        for (k, p) in row.iter().enumerate() {
            let mine = if party == 0 { k / bob_width } else { k % bob_width };
            out[mine] += p;
        }
        out
    }

    fn chsh_shape(&self) -> Result<[[i8; 2]; 2], BehaviorError> {
        if self.parties() != 2 || self.settings.iter().any(|s| s.len() != 2) {
            return Err(BehaviorError::NotChshShape);
        }
        let mut values = [[0i8; 2]; 2];
        for p in 0..2 {
            if self.outcomes[p].len() != 2 {
                return Err(BehaviorError::NotChshShape);
            }
            for (k, label) in self.outcomes[p].iter().enumerate() {
                values[p][k] = outcome_value(label).ok_or(BehaviorError::NotChshShape)?;
            }
            if values[p][0] == values[p][1] {
                return Err(BehaviorError::NotChshShape);
            }
        }
        Ok(values)
    }

    /// Correlator `E(x, y) = sum a·b·P(a, b | x, y)`.
    pub fn correlator(&self, x: usize, y: usize) -> Result<Rational, BehaviorError> {
        let values = self.chsh_shape()?;
        let mut e = Rational::zero();
        for oa in 0..2 {
            for ob in 0..2 {
                let sign = Rational::from_integer((values[0][oa] * values[1][ob]) as i128);
                e += sign * self.prob(&[x, y], &[oa, ob]);
            }
        }
        Ok(e)
    }

    /// All four correlators as `(alice setting, bob setting, E)`.
    pub fn correlators(&self) -> Result<Vec<(String, String, Rational)>, BehaviorError> {
        let mut out = Vec::with_capacity(4);
        for x in 0..2 {
            for y in 0..2 {
                out.push((
                    self.settings[0][x].clone(),
                    self.settings[1][y].clone(),
                    self.correlator(x, y)?,
                ));
            }
        }
        Ok(out)
    }

    /// CSV with columns `setting_a,setting_b,E`.
    pub fn write_correlators_csv<W: io::Write>(
        &self,
        writer: W,
        exact: bool,
    ) -> Result<(), CsvEmitError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["setting_a", "setting_b", "E"])?;
        for (a, b, e) in self.correlators()? {
            let e = if exact { format_rational(&e) } else { to_decimal(&e) };
            w.write_record([a, b, e])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CsvEmitError {
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl fmt::Display for BehaviorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let combos: Vec<Vec<usize>> = match self.parties() {
            1 => (0..self.settings[0].len()).map(|s| vec![s]).collect(),
            _ => (0..self.settings[0].len())
                .flat_map(|x| (0..self.settings[1].len()).map(move |y| vec![x, y]))
                .collect(),
        };
        let outs: Vec<String> = match self.parties() {
            1 => self.outcomes[0].clone(),
            _ => self.outcomes[0]
                .iter()
                .flat_map(|a| self.outcomes[1].iter().map(move |b| format!("{a},{b}")))
                .collect(),
        };
        write!(f, "{:>10}", "")?;
        for o in &outs {
            write!(f, " {o:>7}")?;
        }
        writeln!(f)?;
        for combo in combos {
            let name: Vec<&str> = combo
                .iter()
                .enumerate()
                .map(|(p, &s)| self.settings[p][s].as_str())
                .collect();
            write!(f, "{:>10}", name.join(" "))?;
            for p in &self.rows[self.row_index(&combo)] {
                write!(f, " {:>7}", p.to_string())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `+1` / `-1` (with aliases) to a sign.
pub fn outcome_value(label: &str) -> Option<i8> {
    match label {
        "+1" | "1" | "+" | "full" | "glow" => Some(1),
        "-1" | "-" | "empty" | "dark" => Some(-1),
        _ => None,
    }
}

/// Result of the exclusivity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusivityReport {
    pub holds: bool,
    /// First maximal clique (by label order) whose marginals sum above 1.
    pub violation: Option<(Vec<String>, Rational)>,
}

/// Exclusivity: marginals on every clique of `graph` sum to at most 1.
pub fn check_exclusivity(
    marginals: &MarginalVector,
    graph: &OrthoGraph,
) -> Result<ExclusivityReport, BehaviorError> {
    if marginals.len() != graph.vertex_count() {
        return Err(BehaviorError::MarginalMismatch(
            marginals.len(),
            graph.vertex_count(),
        ));
    }
    for clique in graph.maximal_cliques() {
        let sum = clique_sum(marginals, clique);
        if sum > Rational::one() {
            return Ok(ExclusivityReport {
                holds: false,
                violation: Some((graph.labels_of(clique), sum)),
            });
        }
    }
    Ok(ExclusivityReport {
        holds: true,
        violation: None,
    })
}

fn clique_sum(marginals: &MarginalVector, mask: Mask) -> Rational {
    (0..marginals.len())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| marginals.get(i))
        .sum()
}

/// Outcome of the joint-distribution feasibility problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityCertificate {
    /// A distribution over admissible 0/1 assignments (independent sets of
    /// the graph, given as masks of the propositions set to 1) reproducing
    /// the marginals.
    Feasible { witness: Vec<(Mask, Rational)> },
    /// Separating inequality: every admissible assignment `s` satisfies
    /// `sum_{i in s} weights[i] + offset <= 0`, while the target marginals
    /// give `sum_i weights[i]·p_i + offset = excess > 0`.
    Infeasible {
        weights: Vec<Rational>,
        offset: Rational,
        excess: Rational,
    },
}

impl FeasibilityCertificate {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityCertificate::Feasible { .. })
    }

    /// Independent re-check of the certificate against the problem data.
    pub fn verify(&self, graph: &OrthoGraph, marginals: &MarginalVector) -> bool {
        let n = graph.vertex_count();
        match self {
            FeasibilityCertificate::Feasible { witness } => {
                let total: Rational = witness.iter().map(|(_, w)| *w).sum();
                let supported = witness
                    .iter()
                    .all(|&(s, w)| !w.is_negative() && graph.is_independent(s));
                let reproduces = (0..n).all(|i| {
                    let p: Rational = witness
                        .iter()
                        .filter(|(s, _)| s & (1 << i) != 0)
                        .map(|(_, w)| *w)
                        .sum();
                    p == marginals.get(i)
                });
                supported && total.is_one() && reproduces
            }
            FeasibilityCertificate::Infeasible {
                weights,
                offset,
                excess,
            } => {
                let separates = graph.independent_sets().into_iter().all(|s| {
                    let v: Rational = (0..n)
                        .filter(|i| s & (1 << i) != 0)
                        .map(|i| weights[i])
                        .sum();
                    v + offset <= Rational::zero()
                });
                let target: Rational = (0..n).map(|i| weights[i] * marginals.get(i)).sum();
                separates && excess.is_positive() && target + offset == *excess
            }
        }
    }

    pub fn describe(&self, graph: &OrthoGraph) -> String {
        match self {
            FeasibilityCertificate::Feasible { witness } => {
                let parts: Vec<String> = witness
                    .iter()
                    .map(|&(s, w)| {
                        let ones = graph.labels_of(s);
                        let name = if ones.is_empty() {
                            "none".to_string()
                        } else {
                            ones.join("+")
                        };
                        format!("{w} on {{{name}}}")
                    })
                    .collect();
                format!("feasible: {}", parts.join(", "))
            }
            FeasibilityCertificate::Infeasible {
                weights,
                offset,
                excess,
            } => {
                let terms: Vec<String> = weights
                    .iter()
                    .zip(graph.labels())
                    .filter(|(w, _)| !w.is_zero())
                    .map(|(w, l)| format!("{w}·p({l})"))
                    .collect();
                format!(
                    "infeasible: every joint distribution has {} <= {}, target exceeds it by {}",
                    terms.join(" + "),
                    -offset,
                    excess
                )
            }
        }
    }
}

fn to_big(q: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

fn from_big(q: &BigRational) -> Result<Rational, BehaviorError> {
    let n = q.numer().to_i128().ok_or(BehaviorError::Overflow)?;
    let d = q.denom().to_i128().ok_or(BehaviorError::Overflow)?;
    Ok(Rational::new(n, d))
}

/// Decides whether some distribution over admissible 0/1 assignments (no two
/// adjacent propositions both 1) reproduces `marginals`, by exact rational
/// linear feasibility with the assignments as columns.
pub fn joint_feasibility(
    graph: &OrthoGraph,
    marginals: &MarginalVector,
) -> Result<FeasibilityCertificate, BehaviorError> {
    let n = graph.vertex_count();
    if marginals.len() != n {
        return Err(BehaviorError::MarginalMismatch(marginals.len(), n));
    }
    let columns = graph.independent_sets();
    let one = BigRational::one();
    let zero = BigRational::zero();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            columns
                .iter()
                .map(|&s| if s & (1 << i) != 0 { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    a.push(vec![one.clone(); columns.len()]);
    let mut b: Vec<BigRational> = marginals.values().iter().map(to_big).collect();
    b.push(one);

    match solve_feasibility(&a, &b) {
        LpOutcome::Feasible(x) => {
            let mut witness = Vec::new();
            for (&s, w) in columns.iter().zip(&x) {
                if !w.is_zero() {
                    witness.push((s, from_big(w)?));
                }
            }
            Ok(FeasibilityCertificate::Feasible { witness })
        }
        LpOutcome::Infeasible(y) => {
            let excess: BigRational = y.iter().zip(&b).map(|(yi, bi)| yi * bi).sum();
            let weights = y[..n].iter().map(from_big).collect::<Result<_, _>>()?;
            Ok(FeasibilityCertificate::Infeasible {
                weights,
                offset: from_big(&y[n])?,
                excess: from_big(&excess)?,
            })
        }
    }
}

/// Where a two-party table fails no-signalling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignallingWitness {
    pub party: usize,
    pub setting: String,
    pub other_settings: (String, String),
    pub marginals: (Vec<Rational>, Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoSignallingReport {
    pub holds: bool,
    pub witness: Option<SignallingWitness>,
}

/// Each party's marginal for each of its settings must not depend on the
/// other party's setting. One-party tables pass trivially.
pub fn no_signalling_check(table: &BehaviorTable) -> NoSignallingReport {
    if table.parties() == 2 {
        for party in 0..2 {
            let other = 1 - party;
            for s in 0..table.settings[party].len() {
                let combo = |t: usize| if party == 0 { [s, t] } else { [t, s] };
                let first = table.marginal(party, &combo(0));
                for t in 1..table.settings[other].len() {
                    let m = table.marginal(party, &combo(t));
                    if m != first {
                        return NoSignallingReport {
                            holds: false,
                            witness: Some(SignallingWitness {
                                party,
                                setting: table.settings[party][s].clone(),
                                other_settings: (
                                    table.settings[other][0].clone(),
                                    table.settings[other][t].clone(),
                                ),
                                marginals: (first, m),
                            }),
                        };
                    }
                }
            }
        }
    }
    NoSignallingReport {
        holds: true,
        witness: None,
    }
}

/// CHSH value maximised over sign placements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChshValue {
    pub value: Rational,
    /// Setting pair carrying the odd sign.
    pub odd_pair: (String, String),
    /// Overall sign that makes the expression non-negative.
    pub sign: i8,
}

/// `S = max ±(E(xy) + E(xy') + E(x'y) + E(x'y') - 2·E(odd pair))` over the
/// four choices of odd pair and the two overall signs.
pub fn chsh(table: &BehaviorTable) -> Result<ChshValue, BehaviorError> {
    let mut e = [[Rational::zero(); 2]; 2];
    for (x, row) in e.iter_mut().enumerate() {
        for (y, v) in row.iter_mut().enumerate() {
            *v = table.correlator(x, y)?;
        }
    }
    let total: Rational = e.iter().flatten().sum();
    let mut best: Option<ChshValue> = None;
    // Placement order: odd pair (x, y) row-major, then sign +, -.
    for x in 0..2 {
        for y in 0..2 {
            let s = total - e[x][y] * Rational::from_integer(2);
            for sign in [1i8, -1] {
                let value = s * Rational::from_integer(sign as i128);
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(ChshValue {
                        value,
                        odd_pair: (table.settings[0][x].clone(), table.settings[1][y].clone()),
                        sign,
                    });
                }
            }
        }
    }
    Ok(best.expect("eight placements"))
}

/// The eight PR boxes on settings `a, a'` / `b, b'`: uniform marginals, every
/// setting pair perfectly correlated or anticorrelated, with an odd number of
/// anticorrelated pairs. Ordered by sign pattern of `(ab, ab', a'b, a'b')`
/// read as a binary number with anticorrelation as 1.
pub fn enumerate_pr_boxes() -> Vec<BehaviorTable> {
    (0u8..16)
        .filter(|pattern| pattern.count_ones() % 2 == 1)
        .map(|pattern| pr_box_from_pattern(pattern_to_signs(pattern)))
        .collect()
}

fn pattern_to_signs(pattern: u8) -> [[i8; 2]; 2] {
    let mut signs = [[1i8; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            if pattern & (1 << (3 - (2 * x + y))) != 0 {
                signs[x][y] = -1;
            }
        }
    }
    signs
}

/// The box with `a·b = signs[x][y]` with certainty and uniform marginals.
pub fn pr_box_from_pattern(signs: [[i8; 2]; 2]) -> BehaviorTable {
    BehaviorTable::two_party_pm(["a", "a'"], ["b", "b'"], |x, y, a, b| {
        if a * b == signs[x][y] {
            ratio(1, 2)
        } else {
            Rational::zero()
        }
    })
    .expect("valid PR box")
}

/// Correlation pattern of a perfectly (anti)correlated box with uniform
/// marginals, or `None` if some setting pair is not of that form.
pub fn correlation_pattern(table: &BehaviorTable) -> Option<[[i8; 2]; 2]> {
    let values = table.chsh_shape().ok()?;
    let half = ratio(1, 2);
    let mut signs = [[0i8; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            let mut sign = None;
            for oa in 0..2 {
                for ob in 0..2 {
                    let p = table.prob(&[x, y], &[oa, ob]);
                    let product = values[0][oa] * values[1][ob];
                    if p == half {
                        if sign.is_some_and(|s| s != product) {
                            return None;
                        }
                        sign = Some(product);
                    } else if !p.is_zero() {
                        return None;
                    }
                }
            }
            signs[x][y] = sign?;
        }
    }
    Some(signs)
}

/// True iff the table is one of the eight PR boxes (up to the names of its
/// settings and the order of its outcome labels).
pub fn is_pr_box(table: &BehaviorTable) -> bool {
    correlation_pattern(table)
        .is_some_and(|s| s[0][0] * s[0][1] * s[1][0] * s[1][1] == -1)
}
