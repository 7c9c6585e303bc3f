//! Proposition sets with a joint-orthogonality structure.
//!
//! An [`OrthoScenario`] stores the family of jointly orthogonal subsets as an
//! antichain of maximal sets; every subset of a stored set is jointly
//! orthogonal, so downward closure holds by construction. Subsets are bit
//! masks over the proposition indices.

use std::collections::HashSet;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::rational::{format_rational, is_probability, Rational};

/// Upper bound on the number of propositions; the Specker checks enumerate
/// every subset.
pub const MAX_PROPOSITIONS: usize = 20;

pub type Mask = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("scenario has no propositions")]
    EmptyPropositions,
    #[error("duplicate proposition label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown proposition label {0:?}")]
    UnknownLabel(String),
    #[error("too many propositions ({0}); at most {MAX_PROPOSITIONS} are supported")]
    TooManyPropositions(usize),
    #[error("joint set {{{set}}} is listed but its subset {{{missing}}} is not")]
    NotDownwardClosed { set: String, missing: String },
    #[error("{{{0}}} is not a minimal non-Specker set of this scenario")]
    NotMinimalNonSpecker(String),
    #[error("expected {expected} marginals, got {got}")]
    MarginalCount { expected: usize, got: usize },
    #[error("marginal of {label:?} is {value}, outside [0,1]")]
    MarginalOutOfRange { label: String, value: String },
    #[error("orthogonal propositions {a:?} and {b:?} have marginal sum {sum} > 1")]
    PairSumExceedsOne { a: String, b: String, sum: String },
}

fn bits(mask: Mask) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask & (1 << i) != 0)
}

fn is_subset(small: Mask, big: Mask) -> bool {
    small & !big == 0
}

/// Reduces a family of masks to its inclusion-maximal members, sorted.
fn antichain(mut sets: Vec<Mask>) -> Vec<Mask> {
    sets.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    let mut kept: Vec<Mask> = Vec::new();
    for s in sets {
        if !kept.iter().any(|&k| is_subset(s, k)) {
            kept.push(s);
        }
    }
    kept.sort_unstable();
    kept
}

/// Finite set of propositions together with the family of jointly orthogonal
/// subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthoScenario {
    labels: Vec<String>,
    maximal: Vec<Mask>,
}

impl OrthoScenario {
    /// Builds a scenario from a generating family of jointly orthogonal sets
    /// (normally the maximal ones). Singletons are always joint.
    pub fn new<S: AsRef<str>>(
        labels: impl IntoIterator<Item = S>,
        joint_sets: impl IntoIterator<Item = Vec<S>>,
    ) -> Result<Self, ScenarioError> {
        let labels = Self::check_labels(labels)?;
        let mut sets = Vec::new();
        for set in joint_sets {
            sets.push(Self::mask_from(&labels, &set)?);
        }
        Ok(Self::from_masks(labels, sets))
    }

    /// Builds a scenario from an explicitly listed family, which must already
    /// be downward closed (the empty set and the singletons are implicit).
    pub fn from_closed_family<S: AsRef<str>>(
        labels: impl IntoIterator<Item = S>,
        family: impl IntoIterator<Item = Vec<S>>,
    ) -> Result<Self, ScenarioError> {
        let labels = Self::check_labels(labels)?;
        let mut listed: HashSet<Mask> = HashSet::new();
        for set in family {
            listed.insert(Self::mask_from(&labels, &set)?);
        }
        for &set in &listed {
            for i in bits(set) {
                let sub = set & !(1 << i);
                if sub.count_ones() >= 2 && !listed.contains(&sub) {
                    return Err(ScenarioError::NotDownwardClosed {
                        set: join_labels(&labels, set),
                        missing: join_labels(&labels, sub),
                    });
                }
            }
        }
        Ok(Self::from_masks(labels, listed.into_iter().collect()))
    }

    fn from_masks(labels: Vec<String>, mut sets: Vec<Mask>) -> Self {
        sets.extend((0..labels.len()).map(|i| 1 << i));
        OrthoScenario {
            labels,
            maximal: antichain(sets),
        }
    }

    fn check_labels<S: AsRef<str>>(
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Vec<String>, ScenarioError> {
        let labels: Vec<String> = labels.into_iter().map(|s| s.as_ref().to_string()).collect();
        if labels.is_empty() {
            return Err(ScenarioError::EmptyPropositions);
        }
        if labels.len() > MAX_PROPOSITIONS {
            return Err(ScenarioError::TooManyPropositions(labels.len()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(ScenarioError::DuplicateLabel(l.clone()));
            }
        }
        Ok(labels)
    }

    fn mask_from<S: AsRef<str>>(labels: &[String], set: &[S]) -> Result<Mask, ScenarioError> {
        let mut mask = 0;
        for name in set {
            let name = name.as_ref();
            let idx = labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| ScenarioError::UnknownLabel(name.to_string()))?;
            mask |= 1 << idx;
        }
        Ok(mask)
    }

    /// The Specker triple: three pairwise orthogonal propositions that are not
    /// jointly orthogonal.
    pub fn specker_triple() -> Self {
        Self::new(
            ["A", "B", "C"],
            [vec!["A", "B"], vec!["B", "C"], vec!["C", "A"]],
        )
        .expect("static scenario")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn mask_of<S: AsRef<str>>(&self, set: &[S]) -> Result<Mask, ScenarioError> {
        Self::mask_from(&self.labels, set)
    }

    /// Labels of a mask, in declaration order.
    pub fn labels_of(&self, mask: Mask) -> Vec<String> {
        bits(mask).map(|i| self.labels[i].clone()).collect()
    }

    /// The stored antichain of maximal jointly orthogonal sets.
    pub fn maximal_sets(&self) -> Vec<Vec<String>> {
        self.maximal.iter().map(|&m| self.labels_of(m)).collect()
    }

    pub fn is_joint(&self, mask: Mask) -> bool {
        self.maximal.iter().any(|&m| is_subset(mask, m))
    }

    pub fn orthogonality_graph(&self) -> OrthoGraph {
        let n = self.len();
        let mut adjacency = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && self.is_joint((1 << i) | (1 << j)) {
                    adjacency[i] |= 1 << j;
                }
            }
        }
        OrthoGraph {
            labels: self.labels.clone(),
            adjacency,
        }
    }

    /// Specker's principle: every clique of the orthogonality graph is
    /// jointly orthogonal.
    pub fn is_specker(&self) -> bool {
        let g = self.orthogonality_graph();
        let specker = g.cliques().all(|c| self.is_joint(c));
        specker
    }

    /// All minimal non-Specker sets: pairwise orthogonal, not joint, every
    /// proper subset joint. Ordered by cardinality, then lexicographically on
    /// their sorted labels.
    pub fn all_minimal_non_specker(&self) -> Vec<Vec<String>> {
        let g = self.orthogonality_graph();
        let mut found: Vec<Mask> = g
            .cliques()
            .filter(|&c| !self.is_joint(c))
            .filter(|&c| bits(c).all(|i| self.is_joint(c & !(1 << i))))
            .collect();
        found.sort_by(|&a, &b| {
            a.count_ones()
                .cmp(&b.count_ones())
                .then_with(|| self.sorted_labels(a).cmp(&self.sorted_labels(b)))
        });
        found.into_iter().map(|m| self.labels_of(m)).collect()
    }

    fn sorted_labels(&self, mask: Mask) -> Vec<&str> {
        let mut v: Vec<&str> = bits(mask).map(|i| self.labels[i].as_str()).collect();
        v.sort_unstable();
        v
    }

    /// The first minimal non-Specker set under the deterministic tie-break,
    /// or `None` when the scenario satisfies Specker's principle.
    pub fn find_minimal_non_specker(&self) -> Option<Vec<String>> {
        self.all_minimal_non_specker().into_iter().next()
    }

    fn check_minimal<S: AsRef<str>>(&self, set: &[S]) -> Result<Mask, ScenarioError> {
        let mask = self.mask_of(set)?;
        let g = self.orthogonality_graph();
        let minimal = mask.count_ones() >= 3
            && g.is_clique(mask)
            && !self.is_joint(mask)
            && bits(mask).all(|i| self.is_joint(mask & !(1 << i)));
        if minimal {
            Ok(mask)
        } else {
            Err(ScenarioError::NotMinimalNonSpecker(join_labels(
                &self.labels,
                mask,
            )))
        }
    }

    /// Restricts to the minimal non-Specker set `set` and merges all but its
    /// first two members (in declaration order) into one disjunction.
    ///
    /// A subset containing the merged proposition is joint iff the expanded
    /// subset of the original scenario is joint.
    pub fn coarse_grain_to_three<S: AsRef<str>>(
        &self,
        set: &[S],
    ) -> Result<OrthoScenario, ScenarioError> {
        let mask = self.check_minimal(set)?;
        let idx: Vec<usize> = bits(mask).collect();
        let groups = [1 << idx[0], 1 << idx[1], idx[2..].iter().fold(0, |m, &i| m | 1 << i)];
        let merged_label = idx[2..]
            .iter()
            .map(|&i| self.labels[i].as_str())
            .collect::<Vec<_>>()
            .join("|");
        let labels = vec![
            self.labels[idx[0]].clone(),
            self.labels[idx[1]].clone(),
            merged_label,
        ];
        let joint: Vec<Mask> = (1u64..8)
            .filter(|&sub| {
                let expanded = (0..3)
                    .filter(|k| sub & (1 << k) != 0)
                    .fold(0, |m, k| m | groups[k]);
                self.is_joint(expanded)
            })
            .collect();
        Ok(Self::from_masks(labels, joint))
    }

    /// Marginals of the coarse-grained scenario: the merged proposition gets
    /// the sum of the merged entries.
    pub fn coarse_grain_marginals<S: AsRef<str>>(
        &self,
        set: &[S],
        marginals: &MarginalVector,
    ) -> Result<MarginalVector, ScenarioError> {
        let mask = self.check_minimal(set)?;
        self.check_marginal_count(marginals)?;
        let idx: Vec<usize> = bits(mask).collect();
        let merged = idx[2..]
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + marginals.values[i]);
        MarginalVector::new(vec![
            marginals.values[idx[0]],
            marginals.values[idx[1]],
            merged,
        ])
    }

    fn check_marginal_count(&self, marginals: &MarginalVector) -> Result<(), ScenarioError> {
        if marginals.len() != self.len() {
            return Err(ScenarioError::MarginalCount {
                expected: self.len(),
                got: marginals.len(),
            });
        }
        Ok(())
    }

    /// Checks that `p_i + p_j <= 1` on every orthogonal pair.
    pub fn check_marginals(&self, marginals: &MarginalVector) -> Result<(), ScenarioError> {
        self.check_marginal_count(marginals)?;
        let n = self.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.is_joint((1 << i) | (1 << j)) {
                    let sum = marginals.values[i] + marginals.values[j];
                    if sum > Rational::from_integer(1) {
                        return Err(ScenarioError::PairSumExceedsOne {
                            a: self.labels[i].clone(),
                            b: self.labels[j].clone(),
                            sum: format_rational(&sum),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn join_labels(labels: &[String], mask: Mask) -> String {
    bits(mask)
        .map(|i| labels[i].as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Per-proposition probabilities `p_i = p(A_i = 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalVector {
    values: Vec<Rational>,
}

impl MarginalVector {
    pub fn new(values: Vec<Rational>) -> Result<Self, ScenarioError> {
        for (i, v) in values.iter().enumerate() {
            if !is_probability(v) {
                return Err(ScenarioError::MarginalOutOfRange {
                    label: format!("#{i}"),
                    value: format_rational(v),
                });
            }
        }
        Ok(MarginalVector { values })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> Rational {
        self.values[index]
    }
}

/// Simple undirected graph on labelled vertices (the 1-skeleton of a
/// scenario).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthoGraph {
    labels: Vec<String>,
    adjacency: Vec<Mask>,
}

impl OrthoGraph {
    /// Graph from explicit edges given as index pairs.
    pub fn new<S: AsRef<str>>(
        labels: impl IntoIterator<Item = S>,
        edges: &[(usize, usize)],
    ) -> Self {
        let labels: Vec<String> = labels.into_iter().map(|s| s.as_ref().to_string()).collect();
        assert!(labels.len() <= MAX_PROPOSITIONS, "too many vertices");
        let mut adjacency = vec![0; labels.len()];
        for &(a, b) in edges {
            assert!(a != b && a < labels.len() && b < labels.len(), "bad edge");
            adjacency[a] |= 1 << b;
            adjacency[b] |= 1 << a;
        }
        OrthoGraph { labels, adjacency }
    }

    pub fn triangle() -> Self {
        OrthoGraph::new(["A", "B", "C"], &[(0, 1), (1, 2), (0, 2)])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a] & (1 << b) != 0
    }

    pub fn neighbours(&self, v: usize) -> Mask {
        self.adjacency[v]
    }

    /// Edges as index pairs `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertex_count();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.has_edge(i, j))
            .collect()
    }

    pub fn is_clique(&self, mask: Mask) -> bool {
        bits(mask).all(|i| is_subset(mask & !(1 << i), self.adjacency[i]))
    }

    /// Independent set: no two members adjacent.
    pub fn is_independent(&self, mask: Mask) -> bool {
        bits(mask).all(|i| self.adjacency[i] & mask == 0)
    }

    /// Every non-empty clique, in increasing mask order.
    pub fn cliques(&self) -> impl Iterator<Item = Mask> + '_ {
        let full: Mask = (1 << self.vertex_count()) - 1;
        (1..=full).filter(move |&m| self.is_clique(m))
    }

    /// Inclusion-maximal cliques, ordered lexicographically by their label
    /// sequence in declaration order.
    pub fn maximal_cliques(&self) -> Vec<Mask> {
        let cliques: Vec<Mask> = self.cliques().collect();
        let mut maximal: Vec<Mask> = cliques
            .iter()
            .copied()
            .filter(|&c| !cliques.iter().any(|&d| d != c && is_subset(c, d)))
            .collect();
        maximal.sort_by_key(|&m| self.labels_of(m));
        maximal
    }

    pub fn labels_of(&self, mask: Mask) -> Vec<String> {
        bits(mask).map(|i| self.labels[i].clone()).collect()
    }

    /// All independent sets (the admissible 0/1 assignments), including the
    /// empty set, in increasing mask order.
    pub fn independent_sets(&self) -> Vec<Mask> {
        let full: Mask = (1 << self.vertex_count()) - 1;
        (0..=full).filter(|&m| self.is_independent(m)).collect()
    }
}

impl fmt::Display for OrthoGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges()
            .into_iter()
            .map(|(a, b)| format!("{}-{}", self.labels[a], self.labels[b]))
            .collect();
        write!(f, "{} vertices; edges: {}", self.vertex_count(), edges.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn complete(n: usize) -> OrthoScenario {
        let labels: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
        OrthoScenario::new(labels.clone(), vec![labels]).unwrap()
    }

    /// n pairwise-orthogonal propositions whose proper subsets are all joint
    /// but the whole set is not.
    fn boundary(n: usize) -> OrthoScenario {
        let labels: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
        let sets: Vec<Vec<String>> = (0..n)
            .map(|skip| {
                labels
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, l)| l.clone())
                    .collect()
            })
            .collect();
        OrthoScenario::new(labels, sets).unwrap()
    }

    #[test]
    fn specker_triple_graph_is_a_triangle() {
        let g = OrthoScenario::specker_triple().orthogonality_graph();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn single_proposition_graph_has_no_edges() {
        let s = OrthoScenario::new(["X"], Vec::<Vec<&str>>::new()).unwrap();
        let g = s.orthogonality_graph();
        assert_eq!(g.vertex_count(), 1);
        assert!(g.edges().is_empty());
        assert!(s.is_specker());
    }

    #[test]
    fn full_complex_gives_complete_graph() {
        let g = complete(4).orthogonality_graph();
        assert_eq!(g.edges().len(), 6);
    }

    #[test]
    fn specker_checks() {
        assert!(!OrthoScenario::specker_triple().is_specker());
        assert!(complete(4).is_specker());
        // 4-cycle: cliques are vertices and edges only.
        let c4 = OrthoScenario::new(
            ["A", "B", "C", "D"],
            [vec!["A", "B"], vec!["B", "C"], vec!["C", "D"], vec!["D", "A"]],
        )
        .unwrap();
        assert!(c4.is_specker());
        assert_eq!(c4.find_minimal_non_specker(), None);
    }

    #[test]
    fn minimal_sets() {
        assert_eq!(
            OrthoScenario::specker_triple().find_minimal_non_specker(),
            Some(vec!["A".to_string(), "B".into(), "C".into()])
        );
        assert_eq!(complete(5).find_minimal_non_specker(), None);
        let five = boundary(5);
        assert_eq!(
            five.find_minimal_non_specker(),
            Some((1..=5).map(|i| format!("A{i}")).collect())
        );
    }

    #[test]
    fn tie_break_prefers_small_then_lexicographic() {
        // Two disjoint Specker triples, declared in reverse alphabetical order.
        let s = OrthoScenario::new(
            ["Z", "Y", "X", "C", "B", "A"],
            [
                vec!["Z", "Y"],
                vec!["Y", "X"],
                vec!["X", "Z"],
                vec!["C", "B"],
                vec!["B", "A"],
                vec!["A", "C"],
            ],
        )
        .unwrap();
        let all = s.all_minimal_non_specker();
        assert_eq!(all.len(), 2);
        assert_eq!(
            s.find_minimal_non_specker().unwrap(),
            vec!["C".to_string(), "B".into(), "A".into()]
        );
    }

    #[test]
    fn downward_closure_is_validated() {
        let err = OrthoScenario::from_closed_family(
            ["A", "B", "C"],
            [vec!["A", "B", "C"], vec!["A", "B"], vec!["B", "C"]],
        )
        .unwrap_err();
        assert!(matches!(err, ScenarioError::NotDownwardClosed { .. }));
        let ok = OrthoScenario::from_closed_family(
            ["A", "B", "C"],
            [vec!["A", "B", "C"], vec!["A", "B"], vec!["B", "C"], vec!["A", "C"]],
        )
        .unwrap();
        assert!(ok.is_specker());
    }

    #[test]
    fn label_errors() {
        assert_eq!(
            OrthoScenario::new(Vec::<&str>::new(), Vec::<Vec<&str>>::new()),
            Err(ScenarioError::EmptyPropositions)
        );
        assert!(matches!(
            OrthoScenario::new(["A", "A"], Vec::<Vec<&str>>::new()),
            Err(ScenarioError::DuplicateLabel(_))
        ));
        assert!(matches!(
            OrthoScenario::new(["A"], [vec!["A", "Q"]]),
            Err(ScenarioError::UnknownLabel(_))
        ));
    }

    #[test]
    fn coarse_grain_identity_for_three() {
        let s = OrthoScenario::specker_triple();
        let out = s.coarse_grain_to_three(&["A", "B", "C"]).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn coarse_grain_five_to_three() {
        let s = boundary(5);
        let m = s.find_minimal_non_specker().unwrap();
        let out = s.coarse_grain_to_three(&m).unwrap();
        assert_eq!(out.labels(), &["A1", "A2", "A3|A4|A5"]);
        assert_eq!(
            out.find_minimal_non_specker().unwrap(),
            out.labels().to_vec()
        );
    }

    #[test]
    fn coarse_grain_rejects_non_minimal() {
        let s = complete(4);
        assert!(matches!(
            s.coarse_grain_to_three(&["A1", "A2", "A3"]),
            Err(ScenarioError::NotMinimalNonSpecker(_))
        ));
        // A joint pair is never non-Specker.
        assert!(OrthoScenario::specker_triple()
            .coarse_grain_to_three(&["A", "B"])
            .is_err());
    }

    #[test]
    fn coarse_grain_marginals_sum_merged_entries() {
        let s = boundary(5);
        let m = MarginalVector::new(vec![
            ratio(1, 4),
            ratio(1, 4),
            ratio(1, 4),
            ratio(1, 8),
            ratio(1, 8),
        ])
        .unwrap();
        let names: Vec<String> = (1..=5).map(|i| format!("A{i}")).collect();
        let out = s.coarse_grain_marginals(&names, &m).unwrap();
        assert_eq!(out.values(), &[ratio(1, 4), ratio(1, 4), ratio(1, 2)]);
    }

    #[test]
    fn marginal_validation() {
        let s = OrthoScenario::specker_triple();
        assert!(MarginalVector::new(vec![ratio(3, 2)]).is_err());
        let m = MarginalVector::new(vec![ratio(2, 3), ratio(1, 2), ratio(0, 1)]).unwrap();
        assert!(matches!(
            s.check_marginals(&m),
            Err(ScenarioError::PairSumExceedsOne { .. })
        ));
        let m = MarginalVector::new(vec![ratio(1, 2); 3]).unwrap();
        assert!(s.check_marginals(&m).is_ok());
    }
}
