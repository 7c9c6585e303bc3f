//! Collapse model for two sets of Specker boxes.
//!
//! The joint state starts uncollapsed. The first box opened anywhere is full
//! or empty with probability 1/2, and both tables collapse to the content
//! vector in which that box holds its finding and the other two the
//! opposite. From then on each table reads its own vector: opening a box
//! reports its entry and collapses only that table again, around the box
//! just opened. A pair is opened as two single boxes in reading order.

use super::{BoxLabel, Branch, Model, ModelError, Outcome, Query};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LswModel {
    vectors: Option<[[bool; 3]; 2]>,
}

fn collapsed_around(b: BoxLabel, finding: bool) -> [bool; 3] {
    let mut v = [!finding; 3];
    v[b.index()] = finding;
    v
}

impl LswModel {
    pub fn new() -> Self {
        LswModel::default()
    }

    /// Content vectors per side, once collapsed.
    pub fn vectors(&self) -> Option<[[bool; 3]; 2]> {
        self.vectors
    }

    fn open(&self, side: usize, b: BoxLabel) -> Vec<(Rational, bool, LswModel)> {
        match self.vectors {
            None => [true, false]
                .into_iter()
                .map(|r| {
                    let v = collapsed_around(b, r);
                    (Rational::new(1, 2), r, LswModel { vectors: Some([v, v]) })
                })
                .collect(),
            Some(mut vs) => {
                let r = vs[side][b.index()];
                vs[side] = collapsed_around(b, r);
                vec![(Rational::from_integer(1), r, LswModel { vectors: Some(vs) })]
            }
        }
    }
}

impl Model for LswModel {
    fn name(&self) -> String {
        "lsw".to_string()
    }

    fn admits(&self, _q: Query) -> bool {
        true
    }

    fn measure(&self, q: Query) -> Result<Vec<Branch<Self>>, ModelError> {
        let s = q.side.index();
        let mut frontier = vec![(Rational::from_integer(1), Outcome::default(), self.clone())];
        for b in q.target.boxes() {
            frontier = frontier
                .into_iter()
                .flat_map(|(p, outcome, state)| {
                    state.open(s, b).into_iter().map(move |(p2, r, next)| {
                        let mut o = outcome;
                        o.boxes[b.index()] = Some(r);
                        (p * p2, o, next)
                    })
                })
                .collect();
        }
        Ok(frontier
            .into_iter()
            .map(|(probability, outcome, next)| Branch {
                probability,
                outcome,
                next,
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::Side;
    use super::*;

    fn pick(m: &LswModel, q: Query, b: BoxLabel, v: bool) -> LswModel {
        m.measure(q)
            .unwrap()
            .into_iter()
            .find(|br| br.outcome.get(b) == Some(v))
            .expect("branch exists")
            .next
    }

    fn read(m: &LswModel, q: Query, b: BoxLabel) -> (bool, LswModel) {
        let br = m.measure(q).unwrap();
        assert_eq!(br.len(), 1, "expected a certain outcome");
        (br[0].outcome.get(b).unwrap(), br[0].next.clone())
    }

    #[test]
    fn worked_sequence() {
        let m = pick(&LswModel::new(), Query::single(Side::Alice, BoxLabel::A), BoxLabel::A, false);
        assert_eq!(m.vectors(), Some([[false, true, true]; 2]));
        let (b, m) = read(&m, Query::single(Side::Bob, BoxLabel::B), BoxLabel::B);
        assert!(b);
        assert_eq!(m.vectors().unwrap()[1], [false, true, false]);
        let (alice_c, m) = read(&m, Query::single(Side::Alice, BoxLabel::C), BoxLabel::C);
        let (bob_c, _) = read(&m, Query::single(Side::Bob, BoxLabel::C), BoxLabel::C);
        assert!(alice_c);
        assert!(!bob_c);
    }

    #[test]
    fn same_box_agrees_different_boxes_disagree() {
        for br in LswModel::new().measure(Query::single(Side::Alice, BoxLabel::A)).unwrap() {
            let a = br.outcome.get(BoxLabel::A).unwrap();
            let (same, _) = read(&br.next, Query::single(Side::Bob, BoxLabel::A), BoxLabel::A);
            let (other, _) = read(&br.next, Query::single(Side::Bob, BoxLabel::B), BoxLabel::B);
            assert_eq!(same, a);
            assert_eq!(other, !a);
        }
    }

    #[test]
    fn pair_has_one_gem() {
        let branches = LswModel::new()
            .measure(Query::pair(Side::Bob, super::super::Pair::CA))
            .unwrap();
        assert_eq!(branches.len(), 2);
        for br in branches {
            assert_eq!(br.probability, Rational::new(1, 2));
            assert_ne!(br.outcome.get(BoxLabel::C), br.outcome.get(BoxLabel::A));
        }
    }
}
