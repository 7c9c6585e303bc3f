//! Entangled firefly boxes.
//!
//! A triangular box with corners `A`, `B`, `C` holds a firefly. Looking in
//! from a side makes the firefly fly to that side and light up the corner of
//! it nearest to where it sat. Positions are coarse-grained to the six
//! half-sides of the perimeter; with corners at 0, 1, 2 on a perimeter of
//! length 3, half `h` has midpoint `(2h + 1)/4`, so no position is ever
//! equidistant from two corners.

use std::fmt;
use std::str::FromStr;

use num_traits::Signed;

use super::{BoxLabel, Branch, Model, ModelError, Outcome, Pair, Query, Side, Target, Vocabulary, LIGHT};
use crate::rational::Rational;

/// Midpoints of the six half-sides: `AB:A, AB:B, BC:B, BC:C, CA:C, CA:A`.
pub const HALF_MIDPOINTS: [(i128, i128); 6] = [(1, 4), (3, 4), (5, 4), (7, 4), (9, 4), (11, 4)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FireflyFlavor {
    /// The partner firefly cuts the corner once, at the first look into
    /// either box; afterwards each firefly answers only to its own side.
    Mirror,
    /// Alice's firefly always cuts the corner after glowing, which lets her
    /// look at a single corner through a fixed side. Bob's is synced once
    /// and then moves only under Bob's looks.
    AliceCutsBobLocal,
    /// As above, but Bob's firefly follows Alice's every time she looks.
    AliceCutsBobMirror,
}

impl FireflyFlavor {
    pub const ALL: [FireflyFlavor; 3] = [
        FireflyFlavor::Mirror,
        FireflyFlavor::AliceCutsBobLocal,
        FireflyFlavor::AliceCutsBobMirror,
    ];

    fn alice_cuts(self) -> bool {
        !matches!(self, FireflyFlavor::Mirror)
    }
}

impl fmt::Display for FireflyFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FireflyFlavor::Mirror => "mirror",
            FireflyFlavor::AliceCutsBobLocal => "alice_cuts_bob_local",
            FireflyFlavor::AliceCutsBobMirror => "alice_cuts_bob_mirror",
        })
    }
}

impl FromStr for FireflyFlavor {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FireflyFlavor::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| ModelError::UnknownFlavor(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FireflyModel {
    flavor: FireflyFlavor,
    /// `None` until the first look; the two fireflies then share a uniformly
    /// random half.
    halves: Option<[usize; 2]>,
    synced: bool,
}

impl FireflyModel {
    pub fn new(flavor: FireflyFlavor) -> Self {
        FireflyModel {
            flavor,
            halves: None,
            synced: false,
        }
    }

    /// Both fireflies start on `half`, as if the hidden draw were known.
    pub fn starting_at(flavor: FireflyFlavor, half: usize) -> Self {
        assert!(half < 6, "half index out of range");
        FireflyModel {
            flavor,
            halves: Some([half, half]),
            synced: false,
        }
    }

    pub fn flavor(&self) -> FireflyFlavor {
        self.flavor
    }

    /// Current half of each firefly, once placed.
    pub fn halves(&self) -> Option<[usize; 2]> {
        self.halves
    }

    /// The context Alice's single-box look goes through when her firefly
    /// cuts corners.
    pub fn designated_pair(b: BoxLabel) -> Pair {
        match b {
            BoxLabel::A => Pair::AB,
            BoxLabel::B => Pair::BC,
            BoxLabel::C => Pair::CA,
        }
    }

    fn look(&self, halves: [usize; 2], side: Side, pair: Pair) -> (BoxLabel, FireflyModel) {
        let s = side.index();
        let glow = nearest_corner(halves[s], pair);
        let cut = half_of(pair.across(glow), glow);
        let mut next = halves;
        next[s] = if side == Side::Alice && self.flavor.alice_cuts() {
            cut
        } else {
            half_of(pair, glow)
        };
        let follow = match self.flavor {
            FireflyFlavor::Mirror | FireflyFlavor::AliceCutsBobLocal => !self.synced,
            FireflyFlavor::AliceCutsBobMirror => !self.synced || side == Side::Alice,
        };
        if follow {
            next[1 - s] = cut;
        }
        (
            glow,
            FireflyModel {
                flavor: self.flavor,
                halves: Some(next),
                synced: true,
            },
        )
    }
}

/// Half index of the `corner` end of `pair`.
pub(crate) fn half_of(pair: Pair, corner: BoxLabel) -> usize {
    let side = Pair::ALL.iter().position(|&p| p == pair).expect("known pair");
    2 * side + usize::from(pair.boxes()[1] == corner)
}

fn perimeter_distance(x: Rational, y: Rational) -> Rational {
    let d = (x - y).abs();
    let around = Rational::from_integer(3) - d;
    d.min(around)
}

pub(crate) fn nearest_corner(half: usize, pair: Pair) -> BoxLabel {
    let (n, d) = HALF_MIDPOINTS[half];
    let at = Rational::new(n, d);
    let [x, y] = pair.boxes();
    if perimeter_distance(at, x.corner()) < perimeter_distance(at, y.corner()) {
        x
    } else {
        y
    }
}

impl Model for FireflyModel {
    fn name(&self) -> String {
        match self.flavor {
            FireflyFlavor::Mirror => "firefly".to_string(),
            f => format!("firefly:{f}"),
        }
    }

    fn vocabulary(&self) -> Vocabulary {
        LIGHT
    }

    fn admits(&self, q: Query) -> bool {
        match q.target {
            Target::Pair(_) => true,
            Target::Single(_) => self.flavor.alice_cuts() && q.side == Side::Alice,
        }
    }

    fn measure(&self, q: Query) -> Result<Vec<Branch<Self>>, ModelError> {
        if !self.admits(q) {
            return Err(ModelError::Inadmissible(q));
        }
        let pair = match q.target {
            Target::Pair(p) => p,
            Target::Single(b) => FireflyModel::designated_pair(b),
        };
        let starts: Vec<(Rational, [usize; 2])> = match self.halves {
            Some(h) => vec![(Rational::from_integer(1), h)],
            None => (0..6).map(|h| (Rational::new(1, 6), [h, h])).collect(),
        };
        Ok(starts
            .into_iter()
            .map(|(p, halves)| {
                let (glow, next) = self.look(halves, q.side, pair);
                let mut outcome = Outcome::default();
                for b in q.target.boxes() {
                    outcome.boxes[b.index()] = Some(b == glow);
                }
                Branch {
                    probability: p,
                    outcome,
                    next,
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn half_indexing() {
        assert_eq!(half_of(Pair::AB, BoxLabel::A), 0);
        assert_eq!(half_of(Pair::AB, BoxLabel::B), 1);
        assert_eq!(half_of(Pair::BC, BoxLabel::C), 3);
        assert_eq!(half_of(Pair::CA, BoxLabel::C), 4);
        assert_eq!(half_of(Pair::CA, BoxLabel::A), 5);
    }

    #[test]
    fn from_c_half_of_ca_a_glows_on_ab() {
        assert_eq!(nearest_corner(4, Pair::AB), BoxLabel::A);
        assert_eq!(nearest_corner(5, Pair::AB), BoxLabel::A);
        assert_eq!(nearest_corner(4, Pair::BC), BoxLabel::C);
    }

    #[test]
    fn uniform_start_gives_even_odds() {
        let m = FireflyModel::new(FireflyFlavor::Mirror);
        let branches = m.measure(Query::pair(Side::Alice, Pair::AB)).unwrap();
        assert_eq!(branches.len(), 6);
        let a: Rational = branches
            .iter()
            .filter(|b| b.outcome.get(BoxLabel::A) == Some(true))
            .map(|b| b.probability)
            .sum();
        assert_eq!(a, ratio(1, 2));
    }

    #[test]
    fn partner_cuts_the_corner() {
        // Alice looks from CA and sees C; Bob's firefly now sits on BC's C
        // half, so Bob looking from BC sees C too.
        let m = FireflyModel::starting_at(FireflyFlavor::Mirror, 3);
        let br = m.measure(Query::pair(Side::Alice, Pair::CA)).unwrap();
        assert_eq!(br[0].outcome.get(BoxLabel::C), Some(true));
        assert_eq!(br[0].next.halves(), Some([4, 3]));
        let bob = br[0].next.measure(Query::pair(Side::Bob, Pair::BC)).unwrap();
        assert_eq!(bob[0].outcome.get(BoxLabel::C), Some(true));
    }

    #[test]
    fn singles_only_where_alice_cuts() {
        let q = Query::single(Side::Alice, BoxLabel::C);
        assert!(matches!(
            FireflyModel::new(FireflyFlavor::Mirror).measure(q),
            Err(ModelError::Inadmissible(_))
        ));
        let br = FireflyModel::new(FireflyFlavor::AliceCutsBobLocal).measure(q).unwrap();
        assert!(br.iter().all(|b| b.outcome.get(BoxLabel::A).is_none()));
    }

    #[test]
    fn flavor_names_round_trip() {
        for f in FireflyFlavor::ALL {
            assert_eq!(f.to_string().parse::<FireflyFlavor>().unwrap(), f);
        }
        assert!("both".parse::<FireflyFlavor>().is_err());
    }
}
