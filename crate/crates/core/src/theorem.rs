//! The signalling protocol that turns a non-Specker triple into a signal.
//!
//! Three pairwise orthogonal propositions `A1, A2, A3` with marginals
//! `p1, p2, p3` are shared in a perfectly correlated state. Alice measures
//! `A3`, then `A1` or `A2` depending on the result; Bob's probability for
//! `A1 = 1` can then be pushed below `p1` whatever conditional probabilities
//! no-signalling leaves open. Everything here is exact rational arithmetic.

use std::io;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, is_probability, to_decimal, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoremError {
    #[error("p{index} = {value} must lie strictly between 0 and 1")]
    TrivialMarginal { index: usize, value: String },
    #[error("p{i} + p{j} = {sum} exceeds 1")]
    PairSum { i: usize, j: usize, sum: String },
    #[error("marginals ({0}, {1}) are not a valid orthogonal pair")]
    InvalidPair(String, String),
    #[error("conditioning on p_j = 1 leaves p(. | A_j = 0) undefined")]
    UndefinedConditional,
    #[error("indices must be a permutation of 1, 2, 3")]
    BadIndices,
    #[error("conditional {0} is outside [0,1]")]
    NotAProbability(String),
    #[error("no-signalling residual is {0}, expected 0")]
    ConstraintViolated(String),
}

/// Marginals `p1, p2, p3` of a pairwise orthogonal triple with non-trivial
/// probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleMarginals {
    p: [Rational; 3],
}

impl TripleMarginals {
    pub fn new(p1: Rational, p2: Rational, p3: Rational) -> Result<Self, TheoremError> {
        let p = [p1, p2, p3];
        for (i, v) in p.iter().enumerate() {
            if !v.is_positive() || *v >= Rational::one() {
                return Err(TheoremError::TrivialMarginal {
                    index: i + 1,
                    value: format_rational(v),
                });
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let sum = p[i] + p[j];
            if sum > Rational::one() {
                return Err(TheoremError::PairSum {
                    i: i + 1,
                    j: j + 1,
                    sum: format_rational(&sum),
                });
            }
        }
        Ok(TripleMarginals { p })
    }

    /// Marginal of `A_index`, 1-based.
    pub fn p(&self, index: usize) -> Rational {
        self.p[index - 1]
    }

    pub fn as_array(&self) -> [Rational; 3] {
        self.p
    }
}

/// Outcome conditionals for a joint measurement of two orthogonal
/// propositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conditionals {
    /// `p(A_i = 1 | A_j = 1)`
    pub one_given_one: Rational,
    /// `p(A_i = 0 | A_j = 1)`
    pub zero_given_one: Rational,
    /// `p(A_i = 1 | A_j = 0)`
    pub one_given_zero: Rational,
    /// `p(A_i = 0 | A_j = 0)`
    pub zero_given_zero: Rational,
}

pub fn conditional_probs(p_i: Rational, p_j: Rational) -> Result<Conditionals, TheoremError> {
    if !is_probability(&p_i) || !is_probability(&p_j) || p_i + p_j > Rational::one() {
        return Err(TheoremError::InvalidPair(
            format_rational(&p_i),
            format_rational(&p_j),
        ));
    }
    if p_j.is_one() {
        return Err(TheoremError::UndefinedConditional);
    }
    let rest = Rational::one() - p_j;
    Ok(Conditionals {
        one_given_one: Rational::zero(),
        zero_given_one: Rational::one(),
        one_given_zero: p_i / rest,
        zero_given_zero: (Rational::one() - p_i - p_j) / rest,
    })
}

/// Bob's conditional `p(A_target = 1 | A_given = 0)`, split by the outcome of
/// Alice's measurement of `A_alice`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitConditional {
    /// Value when Alice finds `A_alice = 1`.
    pub if_alice_one: Rational,
    /// Value when Alice finds `A_alice = 0`.
    pub if_alice_zero: Rational,
    pub target: usize,
    pub given: usize,
    pub alice: usize,
}

impl SplitConditional {
    pub fn new(
        if_alice_one: Rational,
        if_alice_zero: Rational,
        (target, given, alice): (usize, usize, usize),
    ) -> Result<Self, TheoremError> {
        let mut idx = [target, given, alice];
        idx.sort_unstable();
        if idx != [1, 2, 3] {
            return Err(TheoremError::BadIndices);
        }
        for v in [if_alice_one, if_alice_zero] {
            if !is_probability(&v) {
                return Err(TheoremError::NotAProbability(format_rational(&v)));
            }
        }
        Ok(SplitConditional {
            if_alice_one,
            if_alice_zero,
            target,
            given,
            alice,
        })
    }
}

/// `p_k·α + (1 − p_k)·β − p_i/(1 − p_j)`: zero exactly when the split
/// averages back to the unconditioned value, as no-signalling demands.
pub fn nosig_constraint_residual(split: &SplitConditional, t: &TripleMarginals) -> Rational {
    let pk = t.p(split.alice);
    pk * split.if_alice_one + (Rational::one() - pk) * split.if_alice_zero
        - t.p(split.target) / (Rational::one() - t.p(split.given))
}

/// Bob's `(p(A1 = 1), p(A2 = 1))` in each of Alice's four branches:
/// I `A3 = 1` then `A1`; II `A3 = 1` then `A2`; III `A3 = 0` then `A1`;
/// IV `A3 = 0` then `A2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseMarginals {
    pub cases: [(Rational, Rational); 4],
}

impl CaseMarginals {
    pub fn case(&self, roman: usize) -> (Rational, Rational) {
        self.cases[roman - 1]
    }
}

pub fn case_marginals(
    t: &TripleMarginals,
    split21: &SplitConditional,
    split12: &SplitConditional,
) -> Result<CaseMarginals, TheoremError> {
    if (split21.target, split21.given, split21.alice) != (2, 1, 3)
        || (split12.target, split12.given, split12.alice) != (1, 2, 3)
    {
        return Err(TheoremError::BadIndices);
    }
    for s in [split21, split12] {
        let r = nosig_constraint_residual(s, t);
        if !r.is_zero() {
            return Err(TheoremError::ConstraintViolated(format_rational(&r)));
        }
    }
    let [p1, p2, p3] = t.p;
    let rest3 = Rational::one() - p3;
    let zero = Rational::zero();
    Ok(CaseMarginals {
        cases: [
            (zero, split21.if_alice_one),
            (split12.if_alice_one, zero),
            (
                p1 / rest3,
                split21.if_alice_zero * (Rational::one() - p1 - p3) / rest3,
            ),
            (
                split12.if_alice_zero * (Rational::one() - p2 - p3) / rest3,
                p2 / rest3,
            ),
        ],
    })
}

/// The split for `(1, 2, 3)` that is least favourable to Alice: the largest
/// `β` allowed, with `α` from the no-signalling constraint.
///
/// The unconstrained optimum `p1/((1 − p2)(1 − p3))` can exceed 1; it is then
/// clamped to 1 and `α` solved for.
pub fn worst_case_params(t: &TripleMarginals) -> SplitConditional {
    let [p1, p2, p3] = t.p;
    let one = Rational::one();
    let raw = p1 / ((one - p2) * (one - p3));
    let (alpha, beta) = if raw <= one {
        (Rational::zero(), raw)
    } else {
        ((p1 / (one - p2) - (one - p3)) / p3, one)
    };
    SplitConditional::new(alpha, beta, (1, 2, 3)).expect("worst case is a valid split")
}

/// Bob's `p(A1 = 1)` when Alice plays branch I on `A3 = 1` and branch IV on
/// `A3 = 0`, against the worst-case split.
pub fn bob_p1_under_protocol(t: &TripleMarginals) -> Rational {
    let [_, p2, p3] = t.p;
    let worst = worst_case_params(t);
    let case_iv = worst.if_alice_zero * (Rational::one() - p2 - p3) / (Rational::one() - p3);
    p3 * Rational::zero() + (Rational::one() - p3) * case_iv
}

/// How far Alice lowers Bob's `p(A1 = 1)` below `p1`; positive for every
/// valid triple.
pub fn signalling_gap(t: &TripleMarginals) -> Rational {
    t.p(1) - bob_p1_under_protocol(t)
}

/// Unclamped closed form `p1 − p1(1 − p2 − p3)/((1 − p2)(1 − p3))`.
pub fn closed_form_gap(t: &TripleMarginals) -> Rational {
    let [p1, p2, p3] = t.p;
    let one = Rational::one();
    p1 - p1 * (one - p2 - p3) / ((one - p2) * (one - p3))
}

/// Grid of candidate marginal values for [`sweep_gap`]; every triple from the
/// cartesian product is tried and invalid ones are skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridSpec {
    /// `k/n` for `k = 1..n-1`.
    Uniform(u32),
    /// Every fraction in `(0, 1)` with denominator at most `n`.
    Farey(u32),
    Values(Vec<Rational>),
}

impl GridSpec {
    pub fn values(&self) -> Vec<Rational> {
        match self {
            GridSpec::Uniform(n) => (1..*n)
                .map(|k| Rational::new(k as i128, *n as i128))
                .collect(),
            GridSpec::Farey(n) => {
                let mut v: Vec<Rational> = (2..=*n as i128)
                    .flat_map(|d| (1..d).map(move |k| Rational::new(k, d)))
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            GridSpec::Values(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapRow {
    pub marginals: TripleMarginals,
    pub beta_worst: Rational,
    pub alpha_worst: Rational,
    pub bob_p1: Rational,
    pub gap: Rational,
}

pub fn gap_row(t: TripleMarginals) -> GapRow {
    let worst = worst_case_params(&t);
    let bob_p1 = bob_p1_under_protocol(&t);
    GapRow {
        marginals: t,
        beta_worst: worst.if_alice_zero,
        alpha_worst: worst.if_alice_one,
        bob_p1,
        gap: t.p(1) - bob_p1,
    }
}

/// One row per valid grid triple, in lexicographic order of `(p1, p2, p3)`.
pub fn sweep_gap(grid: &GridSpec) -> Vec<GapRow> {
    let values = grid.values();
    let mut rows = Vec::new();
    for &p1 in &values {
        for &p2 in &values {
            for &p3 in &values {
                if let Ok(t) = TripleMarginals::new(p1, p2, p3) {
                    rows.push(gap_row(t));
                }
            }
        }
    }
    rows
}

pub const GAP_CSV_HEADER: [&str; 7] =
    ["p1", "p2", "p3", "beta_worst", "alpha_worst", "bob_p1", "gap"];

/// Writes the sweep as CSV; decimals by default, `num/den` when `exact`.
pub fn write_gap_csv<W: io::Write>(rows: &[GapRow], writer: W, exact: bool) -> csv::Result<()> {
    let render = |q: &Rational| if exact { format_rational(q) } else { to_decimal(q) };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(GAP_CSV_HEADER)?;
    for r in rows {
        let [p1, p2, p3] = r.marginals.p;
        w.write_record([
            render(&p1),
            render(&p2),
            render(&p3),
            render(&r.beta_worst),
            render(&r.alpha_worst),
            render(&r.bob_p1),
            render(&r.gap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio, zero};

    fn triple(a: (i128, i128), b: (i128, i128), c: (i128, i128)) -> TripleMarginals {
        TripleMarginals::new(ratio(a.0, a.1), ratio(b.0, b.1), ratio(c.0, c.1)).unwrap()
    }

    #[test]
    fn conditionals() {
        let c = conditional_probs(zero(), ratio(1, 2)).unwrap();
        assert_eq!(
            (c.one_given_one, c.zero_given_one, c.one_given_zero, c.zero_given_zero),
            (zero(), one(), zero(), one())
        );
        let c = conditional_probs(ratio(1, 5), ratio(3, 10)).unwrap();
        assert_eq!(c.one_given_zero, ratio(2, 7));
        assert_eq!(c.zero_given_zero, ratio(5, 7));
        let c = conditional_probs(ratio(1, 2), ratio(1, 2)).unwrap();
        assert_eq!((c.one_given_zero, c.zero_given_zero), (one(), zero()));
        assert_eq!(
            conditional_probs(zero(), one()),
            Err(TheoremError::UndefinedConditional)
        );
        assert!(matches!(
            conditional_probs(ratio(2, 3), ratio(1, 2)),
            Err(TheoremError::InvalidPair(..))
        ));
    }

    #[test]
    fn residuals() {
        let t = triple((1, 3), (1, 3), (1, 3));
        let s = SplitConditional::new(zero(), ratio(3, 4), (1, 2, 3)).unwrap();
        assert_eq!(nosig_constraint_residual(&s, &t), zero());
        let s = SplitConditional::new(zero(), zero(), (1, 2, 3)).unwrap();
        assert_eq!(nosig_constraint_residual(&s, &t), ratio(-1, 2));
        let t = triple((1, 5), (2, 7), (1, 9));
        let v = ratio(1, 5) / (one() - ratio(2, 7));
        let s = SplitConditional::new(v, v, (1, 2, 3)).unwrap();
        assert_eq!(nosig_constraint_residual(&s, &t), zero());
    }

    #[test]
    fn case_table() {
        let t = triple((1, 3), (1, 3), (1, 3));
        let s12 = SplitConditional::new(zero(), ratio(3, 4), (1, 2, 3)).unwrap();
        let s21 = SplitConditional::new(zero(), ratio(3, 4), (2, 1, 3)).unwrap();
        let c = case_marginals(&t, &s21, &s12).unwrap();
        assert_eq!(c.case(4).0, ratio(3, 8));
        assert_eq!(c.case(1).0, zero());
        assert_eq!(c.case(3), (ratio(1, 2), ratio(3, 8)));

        let t = triple((1, 2), (1, 2), (1, 2));
        let s12 = SplitConditional::new(one(), one(), (1, 2, 3)).unwrap();
        let s21 = SplitConditional::new(one(), one(), (2, 1, 3)).unwrap();
        let c = case_marginals(&t, &s21, &s12).unwrap();
        assert_eq!(c.case(4).0, zero());
    }

    #[test]
    fn case_table_rejects_signalling_split() {
        let t = triple((1, 3), (1, 3), (1, 3));
        let bad = SplitConditional::new(zero(), zero(), (1, 2, 3)).unwrap();
        let ok = SplitConditional::new(zero(), ratio(3, 4), (2, 1, 3)).unwrap();
        assert!(matches!(
            case_marginals(&t, &ok, &bad),
            Err(TheoremError::ConstraintViolated(_))
        ));
        assert_eq!(
            case_marginals(&t, &bad, &ok),
            Err(TheoremError::BadIndices)
        );
    }

    #[test]
    fn worst_case() {
        let w = worst_case_params(&triple((1, 3), (1, 3), (1, 3)));
        assert_eq!((w.if_alice_one, w.if_alice_zero), (zero(), ratio(3, 4)));
        let w = worst_case_params(&triple((1, 2), (1, 2), (1, 2)));
        assert_eq!((w.if_alice_one, w.if_alice_zero), (one(), one()));
        let w = worst_case_params(&triple((1, 1_000_000), (1, 3), (1, 3)));
        assert_eq!(w.if_alice_one, zero());
        assert!(w.if_alice_zero < ratio(1, 100_000));
    }

    #[test]
    fn gaps() {
        assert_eq!(signalling_gap(&triple((1, 3), (1, 3), (1, 3))), ratio(1, 12));
        assert_eq!(signalling_gap(&triple((1, 2), (1, 2), (1, 2))), ratio(1, 2));
        let t = triple((1, 3), (1, 3), (1, 3));
        assert_eq!(closed_form_gap(&t), signalling_gap(&t));
    }

    #[test]
    fn zero_marginal_is_rejected() {
        assert!(matches!(
            TripleMarginals::new(zero(), ratio(1, 2), ratio(1, 2)),
            Err(TheoremError::TrivialMarginal { index: 1, .. })
        ));
        assert!(matches!(
            TripleMarginals::new(ratio(2, 3), ratio(1, 2), ratio(1, 4)),
            Err(TheoremError::PairSum { i: 1, j: 2, .. })
        ));
    }

    #[test]
    fn sweep() {
        let rows = sweep_gap(&GridSpec::Values(vec![ratio(1, 4), ratio(1, 3), ratio(1, 2)]));
        let hit = rows
            .iter()
            .find(|r| r.marginals.as_array() == [ratio(1, 3); 3])
            .unwrap();
        assert_eq!(hit.gap, ratio(1, 12));
        assert!(sweep_gap(&GridSpec::Values(vec![ratio(2, 3), ratio(3, 4)])).is_empty());
        assert!(sweep_gap(&GridSpec::Uniform(20)).iter().all(|r| r.gap.is_positive()));
    }

    #[test]
    fn gap_csv_header() {
        let rows = sweep_gap(&GridSpec::Values(vec![ratio(1, 3)]));
        let mut out = Vec::new();
        write_gap_csv(&rows, &mut out, false).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("p1,p2,p3,beta_worst,alpha_worst,bob_p1,gap"));
        assert_eq!(
            lines.next(),
            Some("0.333333333333,0.333333333333,0.333333333333,0.75,0,0.25,0.0833333333333")
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn farey_grid_counts() {
        // Fractions in (0,1) with denominator <= 5: 1/5 1/4 1/3 2/5 1/2 3/5 2/3 3/4 4/5.
        assert_eq!(GridSpec::Farey(5).values().len(), 9);
        assert_eq!(GridSpec::Uniform(4).values(), vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)]);
    }
}
