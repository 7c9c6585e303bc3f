//! The seer's boxes: contents fixed the night before, in light of which boxes
//! will be opened.
//!
//! Resolution is lazy. A box's content is drawn only when first opened,
//! from the side's pair distribution conditioned on what that side already
//! found, and restricted to agree with the same box on the other table.
//! Since the father already knows every query of the session, this is the
//! same as filling all boxes up front.

use num_traits::{One, Zero};

use super::{Branch, Model, ModelError, Outcome, Query};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeerModel {
    marginals: [Rational; 3],
    contents: [[Option<bool>; 3]; 2],
}

impl SeerModel {
    /// `p = (1/2, 1/2, 1/2)`: one gem in every opened pair.
    pub fn fair() -> Self {
        let half = Rational::new(1, 2);
        SeerModel::with_marginals([half; 3]).expect("1/2 is valid")
    }

    /// Gem probabilities per box; each strictly inside (0,1) and pairwise
    /// summing to at most 1.
    pub fn with_marginals(marginals: [Rational; 3]) -> Result<Self, ModelError> {
        for p in &marginals {
            if *p <= Rational::zero() || *p >= Rational::one() {
                return Err(ModelError::InvalidMarginals(format!(
                    "{} is not strictly between 0 and 1",
                    format_rational(p)
                )));
            }
        }
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            if marginals[i] + marginals[j] > Rational::one() {
                return Err(ModelError::InvalidMarginals(format!(
                    "{} + {} exceeds 1",
                    format_rational(&marginals[i]),
                    format_rational(&marginals[j])
                )));
            }
        }
        Ok(SeerModel {
            marginals,
            contents: [[None; 3]; 2],
        })
    }

    pub fn marginals(&self) -> [Rational; 3] {
        self.marginals
    }

    /// What `side` has found so far, per box.
    pub fn contents(&self, side: super::Side) -> [Option<bool>; 3] {
        self.contents[side.index()]
    }

    /// Prior weight of `values` for the boxes `new` on a side that has
    /// already found `opened`.
    fn prior(&self, opened: &[(usize, bool)], new: &[usize], values: &[bool]) -> Rational {
        let p = &self.marginals;
        let one = Rational::one();
        let bern = |i: usize, v: bool| if v { p[i] } else { one - p[i] };
        match (opened, new, values) {
            (_, [], []) => one,
            ([], [i], [v]) => bern(*i, *v),
            ([], [i, j], [vi, vj]) => match (vi, vj) {
                (true, true) => Rational::zero(),
                (true, false) => p[*i],
                (false, true) => p[*j],
                (false, false) => one - p[*i] - p[*j],
            },
            ([(_, true)], [_], [v]) => {
                if *v {
                    Rational::zero()
                } else {
                    one
                }
            }
            ([(i, false)], [j], [v]) => {
                let q = p[*j] / (one - p[*i]);
                if *v {
                    q
                } else {
                    one - q
                }
            }
            _ => unreachable!("at most two boxes per side"),
        }
    }
}

impl Model for SeerModel {
    fn name(&self) -> String {
        "seer".to_string()
    }

    fn admits(&self, _q: Query) -> bool {
        true
    }

    fn measure(&self, q: Query) -> Result<Vec<Branch<Self>>, ModelError> {
        let s = q.side.index();
        let mine = &self.contents[s];
        let theirs = &self.contents[q.side.other().index()];
        let opened: Vec<(usize, bool)> = (0..3).filter_map(|i| mine[i].map(|v| (i, v))).collect();
        let new: Vec<usize> = q
            .target
            .boxes()
            .into_iter()
            .map(|b| b.index())
            .filter(|&i| mine[i].is_none())
            .collect();
        if opened.len() + new.len() > 2 {
            return Err(ModelError::Inadmissible(q));
        }

        let mut weighted = Vec::new();
        let mut total = Rational::zero();
        for bits in 0..(1u8 << new.len()) {
            let values: Vec<bool> = (0..new.len()).map(|k| bits >> k & 1 == 1).collect();
            let agrees = new
                .iter()
                .zip(&values)
                .all(|(&i, &v)| theirs[i].is_none_or(|t| t == v));
            if !agrees {
                continue;
            }
            let w = self.prior(&opened, &new, &values);
            if w.is_zero() {
                continue;
            }
            total += w;
            weighted.push((w, values));
        }
        if total.is_zero() {
            return Err(ModelError::InconsistentHistory(q));
        }

        Ok(weighted
            .into_iter()
            .map(|(w, values)| {
                let mut next = self.clone();
                for (&i, &v) in new.iter().zip(&values) {
                    next.contents[s][i] = Some(v);
                }
                let mut outcome = Outcome::default();
                for b in q.target.boxes() {
                    outcome.boxes[b.index()] = next.contents[s][b.index()];
                }
                Branch {
                    probability: w / total,
                    outcome,
                    next,
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{BoxLabel, Pair, Side};
    use super::*;
    use crate::rational::ratio;

    fn pick(m: &SeerModel, q: Query, b: BoxLabel, v: bool) -> SeerModel {
        m.measure(q)
            .unwrap()
            .into_iter()
            .find(|br| br.outcome.get(b) == Some(v))
            .expect("branch exists")
            .next
    }

    #[test]
    fn pair_holds_one_gem() {
        let m = SeerModel::fair();
        let branches = m.measure(Query::pair(Side::Alice, Pair::AB)).unwrap();
        assert_eq!(branches.len(), 2);
        for br in &branches {
            assert_eq!(br.probability, ratio(1, 2));
            assert_ne!(br.outcome.get(BoxLabel::A), br.outcome.get(BoxLabel::B));
        }
    }

    #[test]
    fn same_pair_on_both_sides_agrees() {
        let m = SeerModel::fair();
        for br in m.measure(Query::pair(Side::Alice, Pair::AB)).unwrap() {
            let bob = br.next.measure(Query::pair(Side::Bob, Pair::AB)).unwrap();
            assert_eq!(bob.len(), 1);
            assert_eq!(bob[0].outcome, br.outcome);
        }
    }

    #[test]
    fn shared_box_forces_the_other() {
        // Alice AB with A full; Bob BC must find B empty and so C full.
        let m = pick(&SeerModel::fair(), Query::pair(Side::Alice, Pair::AB), BoxLabel::A, true);
        let bob = m.measure(Query::pair(Side::Bob, Pair::BC)).unwrap();
        assert_eq!(bob.len(), 1);
        assert_eq!(bob[0].outcome.get(BoxLabel::B), Some(false));
        assert_eq!(bob[0].outcome.get(BoxLabel::C), Some(true));
    }

    #[test]
    fn third_box_on_one_side_is_refused() {
        let m = pick(&SeerModel::fair(), Query::pair(Side::Alice, Pair::AB), BoxLabel::A, true);
        assert!(matches!(
            m.measure(Query::single(Side::Alice, BoxLabel::C)),
            Err(ModelError::Inadmissible(_))
        ));
        // Reopening is fine and repeats the finding.
        let again = m.measure(Query::single(Side::Alice, BoxLabel::A)).unwrap();
        assert_eq!(again.len(), 1);
        assert_eq!(again[0].outcome.get(BoxLabel::A), Some(true));
    }

    #[test]
    fn both_opening_c_after_contradictory_finds() {
        let m = pick(&SeerModel::fair(), Query::single(Side::Alice, BoxLabel::A), BoxLabel::A, true);
        let m = pick(&m, Query::single(Side::Bob, BoxLabel::B), BoxLabel::B, false);
        let m = pick(&m, Query::single(Side::Alice, BoxLabel::C), BoxLabel::C, false);
        assert!(matches!(
            m.measure(Query::single(Side::Bob, BoxLabel::C)),
            Err(ModelError::InconsistentHistory(_))
        ));
    }

    #[test]
    fn general_marginals() {
        let m = SeerModel::with_marginals([ratio(1, 5), ratio(3, 10), ratio(1, 2)]).unwrap();
        let branches = m.measure(Query::pair(Side::Bob, Pair::AB)).unwrap();
        let p = |a: bool, b: bool| {
            branches
                .iter()
                .find(|br| br.outcome.get(BoxLabel::A) == Some(a) && br.outcome.get(BoxLabel::B) == Some(b))
                .map_or(Rational::zero(), |br| br.probability)
        };
        assert_eq!(p(true, false), ratio(1, 5));
        assert_eq!(p(false, true), ratio(3, 10));
        assert_eq!(p(false, false), ratio(1, 2));
        assert_eq!(p(true, true), Rational::zero());

        // Opening singly in sequence gives the same joint law.
        let first = m.measure(Query::single(Side::Bob, BoxLabel::A)).unwrap();
        let mut joint = Rational::zero();
        for br in first.iter().filter(|br| br.outcome.get(BoxLabel::A) == Some(false)) {
            for br2 in br.next.measure(Query::single(Side::Bob, BoxLabel::B)).unwrap() {
                if br2.outcome.get(BoxLabel::B) == Some(true) {
                    joint += br.probability * br2.probability;
                }
            }
        }
        assert_eq!(joint, ratio(3, 10));
    }

    #[test]
    fn rejects_bad_marginals() {
        assert!(SeerModel::with_marginals([ratio(2, 3), ratio(1, 2), ratio(1, 4)]).is_err());
        assert!(SeerModel::with_marginals([Rational::zero(), ratio(1, 2), ratio(1, 4)]).is_err());
    }
}
