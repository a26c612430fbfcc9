//! Finite relations, their transition graphs, Mahavier-product walks and
//! eventually periodic orbits of the shift map.
//!
//! Conventions used everywhere: a relation `G` is a set of ordered pairs of
//! point ids; its transition graph has an edge `u -> v` iff `(v, u) ∈ G`, so
//! graph walks `(x1, ..., x_{m+1})` are exactly the elements of the m-th
//! Mahavier product of `G⁻¹`. Projections are 1-based to match the usual
//! `π_k` notation.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::graph::{self, IntMatrix};
use crate::point_set::{PointId, PointSet};

/// Default cap on materialized walk enumerations.
pub const DEFAULT_WALK_BUDGET: u64 = 1_000_000;

/// A finite relation `G ⊆ X × X` over a shared point set.
#[derive(Debug, Clone)]
pub struct FiniteRelation {
    space: Arc<PointSet>,
    pairs: BTreeSet<(PointId, PointId)>,
    successors: Vec<Vec<PointId>>, // successors[u] = sorted {v : (v, u) ∈ G}
}

impl FiniteRelation {
    pub fn new(space: Arc<PointSet>, pairs: BTreeSet<(PointId, PointId)>) -> Result<FiniteRelation> {
        let n = space.len() as u32;
        for &(a, b) in &pairs {
            if a.0 >= n || b.0 >= n {
                return Err(Error::schema(
                    "pairs",
                    format!("pair ({}, {}) references a point outside the space", a.0, b.0),
                ));
            }
        }
        let mut successors = vec![Vec::new(); space.len()];
        for &(v, u) in &pairs {
            successors[u.index()].push(v);
        }
        for s in &mut successors {
            s.sort_unstable();
        }
        Ok(FiniteRelation {
            space,
            pairs,
            successors,
        })
    }

    pub fn space(&self) -> &Arc<PointSet> {
        &self.space
    }

    pub fn pairs(&self) -> &BTreeSet<(PointId, PointId)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: (PointId, PointId)) -> bool {
        self.pairs.contains(&pair)
    }

    /// The inverse relation `G⁻¹ = {(y, x) : (x, y) ∈ G}`.
    pub fn inverse(&self) -> FiniteRelation {
        let pairs = self.pairs.iter().map(|&(a, b)| (b, a)).collect();
        FiniteRelation::new(self.space.clone(), pairs).expect("inverse of valid relation is valid")
    }

    /// First-coordinate projection `p₁(G)`.
    pub fn first_projection(&self) -> BTreeSet<PointId> {
        self.pairs.iter().map(|&(a, _)| a).collect()
    }

    /// Second-coordinate projection `p₂(G)`.
    pub fn second_projection(&self) -> BTreeSet<PointId> {
        self.pairs.iter().map(|&(_, b)| b).collect()
    }

    /// `p₁(G) ⊆ p₂(G)`, the hypothesis under which the shift map on the
    /// infinite Mahavier product is surjective enough to carry entropy.
    pub fn domain_condition_holds(&self) -> bool {
        self.first_projection()
            .is_subset(&self.second_projection())
    }

    /// Sorted successors of `u` in the transition graph: `{v : (v, u) ∈ G}`.
    pub fn successors(&self, u: PointId) -> &[PointId] {
        &self.successors[u.index()]
    }

    /// Transition graph as plain index adjacency.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        self.successors
            .iter()
            .map(|outs| outs.iter().map(|v| v.index()).collect())
            .collect()
    }

    /// 0/1 transition matrix A with `A[u][v] = 1` iff `(v, u) ∈ G`.
    pub(crate) fn transition_matrix(&self) -> IntMatrix {
        IntMatrix::from_adjacency(&self.adjacency())
    }

    /// Vertices lying on some cycle of the transition graph.
    pub fn recurrent_vertices(&self) -> BTreeSet<PointId> {
        let adj = self.adjacency();
        let mut out = BTreeSet::new();
        for comp in graph::strongly_connected_components(&adj) {
            if graph::has_internal_edge(&adj, &comp) {
                out.extend(comp.into_iter().map(|v| PointId(v as u32)));
            }
        }
        out
    }

    /// `|⋆_{i=1}^m G⁻¹|` via the transfer matrix, exact in big integers.
    pub fn walk_count(&self, m: usize) -> Result<BigUint> {
        if m == 0 {
            return Err(Error::precondition("walk_count requires m >= 1"));
        }
        let matrix = self.transition_matrix();
        let mut v = vec![BigUint::one(); self.space.len()];
        for _ in 0..m {
            v = matrix.mul_vec(&v);
        }
        Ok(v.into_iter().sum())
    }

    /// Materialize every walk of `m` edges, in lexicographic coordinate
    /// order, provided the count fits the budget.
    pub fn mahavier_walks(&self, m: usize, budget: u64) -> Result<Vec<Walk>> {
        if m == 0 {
            return Err(Error::precondition("mahavier_walks requires m >= 1"));
        }
        let count = self.walk_count(m)?;
        match count.to_u64() {
            Some(c) if c <= budget => {}
            _ => {
                return Err(Error::Budget {
                    count: count.to_string(),
                    budget,
                })
            }
        }
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(m + 1);
        for start in self.space.ids() {
            prefix.push(start);
            self.extend_walks(m, &mut prefix, &mut out);
            prefix.pop();
        }
        Ok(out)
    }

    fn extend_walks(&self, remaining: usize, prefix: &mut Vec<PointId>, out: &mut Vec<Walk>) {
        if remaining == 0 {
            out.push(Walk {
                coords: prefix.clone(),
            });
            return;
        }
        let last = *prefix.last().unwrap();
        for &next in self.successors(last) {
            prefix.push(next);
            self.extend_walks(remaining - 1, prefix, out);
            prefix.pop();
        }
    }

    /// Walks of exactly `edges` edges starting at `start`; when `ending_in`
    /// is given, only walks whose last coordinate lies in that set.
    pub(crate) fn walks_from(
        &self,
        start: PointId,
        edges: usize,
        ending_in: Option<&BTreeSet<PointId>>,
        budget: u64,
    ) -> Result<Vec<Walk>> {
        let mut out = Vec::new();
        let mut prefix = vec![start];
        self.walks_from_rec(edges, ending_in, budget, &mut prefix, &mut out)?;
        Ok(out)
    }

    fn walks_from_rec(
        &self,
        remaining: usize,
        ending_in: Option<&BTreeSet<PointId>>,
        budget: u64,
        prefix: &mut Vec<PointId>,
        out: &mut Vec<Walk>,
    ) -> Result<()> {
        if remaining == 0 {
            let last = *prefix.last().unwrap();
            if ending_in.map_or(true, |set| set.contains(&last)) {
                if out.len() as u64 >= budget {
                    return Err(Error::Budget {
                        count: format!("more than {budget}"),
                        budget,
                    });
                }
                out.push(Walk {
                    coords: prefix.clone(),
                });
            }
            return Ok(());
        }
        let last = *prefix.last().unwrap();
        for &next in self.successors(last) {
            prefix.push(next);
            self.walks_from_rec(remaining - 1, ending_in, budget, prefix, out)?;
            prefix.pop();
        }
        Ok(())
    }

    /// Validate a candidate coordinate tuple as a walk of this relation.
    pub fn walk(&self, coords: Vec<PointId>) -> Result<Walk> {
        if coords.is_empty() {
            return Err(Error::precondition("a walk needs at least one coordinate"));
        }
        for w in coords.windows(2) {
            if !self.contains((w[1], w[0])) {
                return Err(Error::precondition(format!(
                    "({}, {}) is not a pair of the relation",
                    self.space.label(w[1]),
                    self.space.label(w[0]),
                )));
            }
        }
        Ok(Walk { coords })
    }

    /// Validate an eventually periodic orbit of the infinite Mahavier
    /// product: every consecutive pair, including the junction into the
    /// period and the period wrap, must step along the relation.
    pub fn orbit(&self, preperiod: Vec<PointId>, period: Vec<PointId>) -> Result<SymbolicOrbit> {
        if period.is_empty() {
            return Err(Error::precondition("orbit period must be non-empty"));
        }
        let mut seq = preperiod.clone();
        seq.extend(period.iter().copied());
        seq.push(period[0]); // wrap check
        for w in seq.windows(2) {
            if !self.contains((w[1], w[0])) {
                return Err(Error::precondition(format!(
                    "({}, {}) is not a pair of the relation",
                    self.space.label(w[1]),
                    self.space.label(w[0]),
                )));
            }
        }
        Ok(SymbolicOrbit::new_unchecked(
            self.space.clone(),
            preperiod,
            period,
        ))
    }
}

/// `x ⋆ y`: splice two walks that share an endpoint.
pub fn star_concat(relation: &FiniteRelation, x: &Walk, y: &Walk) -> Result<Walk> {
    let last = *x.coords.last().unwrap();
    let first = y.coords[0];
    if last != first {
        return Err(Error::EndpointMismatch {
            left: relation.space().label(last).to_string(),
            right: relation.space().label(first).to_string(),
        });
    }
    let mut coords = x.coords.clone();
    coords.extend_from_slice(&y.coords[1..]);
    Ok(Walk { coords })
}

/// An element of a finite Mahavier product: `len()` edges, `len() + 1`
/// coordinates. Zero-length walks (a single point) are allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Walk {
    coords: Vec<PointId>,
}

impl Walk {
    pub fn coords(&self) -> &[PointId] {
        &self.coords
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.coords.len() - 1
    }

    /// True for zero-edge walks (a single point).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first(&self) -> PointId {
        self.coords[0]
    }

    pub fn last(&self) -> PointId {
        *self.coords.last().unwrap()
    }

    /// `π_k`, 1-based.
    pub fn project(&self, k: usize) -> Result<PointId> {
        if k == 0 || k > self.coords.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.coords.len(),
            });
        }
        Ok(self.coords[k - 1])
    }

    /// `π_{[k,ℓ]}`, 1-based and inclusive.
    pub fn project_range(&self, k: usize, l: usize) -> Result<Vec<PointId>> {
        if k == 0 || k > l || l > self.coords.len() {
            return Err(Error::IndexOutOfRange {
                index: l,
                len: self.coords.len(),
            });
        }
        Ok(self.coords[k - 1..l].to_vec())
    }

    pub fn labels<'a>(&self, space: &'a PointSet) -> Vec<&'a str> {
        self.coords.iter().map(|&id| space.label(id)).collect()
    }
}

/// An eventually periodic element of the infinite Mahavier product,
/// represented as a preperiod followed by a repeating period.
#[derive(Debug, Clone)]
pub struct SymbolicOrbit {
    space: Arc<PointSet>,
    preperiod: Vec<PointId>,
    period: Vec<PointId>,
}

impl SymbolicOrbit {
    fn new_unchecked(space: Arc<PointSet>, preperiod: Vec<PointId>, period: Vec<PointId>) -> Self {
        let mut orbit = SymbolicOrbit {
            space,
            preperiod,
            period,
        };
        orbit.canonicalize();
        orbit
    }

    pub fn space(&self) -> &Arc<PointSet> {
        &self.space
    }

    pub fn preperiod(&self) -> &[PointId] {
        &self.preperiod
    }

    pub fn period(&self) -> &[PointId] {
        &self.period
    }

    /// `π_k`, 1-based, resolving through the period.
    pub fn at(&self, k: usize) -> PointId {
        assert!(k >= 1, "orbit projection is 1-based");
        if k <= self.preperiod.len() {
            self.preperiod[k - 1]
        } else {
            let off = (k - self.preperiod.len() - 1) % self.period.len();
            self.period[off]
        }
    }

    /// `π_{[k,ℓ]}`, 1-based, inclusive.
    pub fn project_range(&self, k: usize, l: usize) -> Result<Vec<PointId>> {
        if k == 0 || k > l {
            return Err(Error::IndexOutOfRange { index: k, len: 0 });
        }
        Ok((k..=l).map(|i| self.at(i)).collect())
    }

    /// The shift map: drop the first coordinate.
    pub fn shift(&self) -> SymbolicOrbit {
        if self.preperiod.is_empty() {
            let mut period = self.period.clone();
            period.rotate_left(1);
            SymbolicOrbit::new_unchecked(self.space.clone(), Vec::new(), period)
        } else {
            SymbolicOrbit::new_unchecked(
                self.space.clone(),
                self.preperiod[1..].to_vec(),
                self.period.clone(),
            )
        }
    }

    /// How many leading coordinates are not yet in the periodic regime.
    pub fn preperiod_len(&self) -> usize {
        self.preperiod.len()
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    /// Canonical form: primitive period and the shortest preperiod. Two
    /// representations of the same sequence canonicalize identically, so
    /// equality can be structural. Purely periodic orbits keep their phase:
    /// (0,1,0,1,...) and (1,0,1,0,...) are different orbits.
    fn canonicalize(&mut self) {
        // Reduce the period to its primitive root.
        let len = self.period.len();
        for d in 1..=len {
            if len % d != 0 {
                continue;
            }
            let primitive = (0..len).all(|i| self.period[i] == self.period[i % d]);
            if primitive {
                self.period.truncate(d);
                break;
            }
        }
        // Absorb preperiod letters that already follow the periodic pattern.
        while let (Some(&p), Some(&c)) = (self.preperiod.last(), self.period.last()) {
            if p == c {
                self.preperiod.pop();
                self.period.rotate_right(1);
            } else {
                break;
            }
        }
    }
}

impl PartialEq for SymbolicOrbit {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_space(&other.space)
            && self.preperiod == other.preperiod
            && self.period == other.period
    }
}

impl Eq for SymbolicOrbit {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use crate::point_set::Metric;

    fn space(labels: &[&str]) -> Arc<PointSet> {
        Arc::new(
            PointSet::new(
                labels
                    .iter()
                    .map(|l| (l.to_string(), vec![parse_rational(l).unwrap()]))
                    .collect(),
                Metric::AbsDiff1d,
            )
            .unwrap(),
        )
    }

    fn relation(labels: &[&str], pairs: &[(&str, &str)]) -> FiniteRelation {
        let sp = space(labels);
        let set = pairs
            .iter()
            .map(|&(a, b)| (sp.lookup(a).unwrap(), sp.lookup(b).unwrap()))
            .collect();
        FiniteRelation::new(sp, set).unwrap()
    }

    /// The golden-mean relation from the worked examples:
    /// G = {(0,0), (0,1), (1,0)} on {0, 1}.
    fn golden() -> FiniteRelation {
        relation(&["0", "1"], &[("0", "0"), ("0", "1"), ("1", "0")])
    }

    #[test]
    fn inverse_swaps_pairs_and_is_an_involution() {
        let g = relation(&["0", "1"], &[("0", "1")]);
        let inv = g.inverse();
        let sp = g.space();
        assert!(inv.contains((sp.lookup("1").unwrap(), sp.lookup("0").unwrap())));
        assert_eq!(inv.inverse().pairs(), g.pairs());
        // The golden-mean relation is its own inverse as a set.
        let g = golden();
        assert_eq!(g.inverse().pairs(), g.pairs());
        // Empty relation.
        let e = relation(&["0", "1"], &[]);
        assert!(e.inverse().is_empty());
    }

    #[test]
    fn domain_condition_examples() {
        assert!(golden().domain_condition_holds());
        assert!(!relation(&["0", "1"], &[("0", "1")]).domain_condition_holds());
        assert!(relation(&["0", "1"], &[]).domain_condition_holds());
    }

    #[test]
    fn walk_counts_follow_the_fibonacci_recurrence() {
        let g = golden();
        let counts: Vec<u64> = (1..=4)
            .map(|m| g.walk_count(m).unwrap().to_u64().unwrap())
            .collect();
        assert_eq!(counts, vec![3, 5, 8, 13]);
    }

    #[test]
    fn walk_count_matches_enumeration_exhaustively() {
        // Brute-force oracle: recursive enumeration straight from the pair
        // set, kept separate from the walks_from machinery.
        fn brute(g: &FiniteRelation, m: usize) -> u64 {
            fn rec(g: &FiniteRelation, last: PointId, remaining: usize) -> u64 {
                if remaining == 0 {
                    return 1;
                }
                g.space()
                    .ids()
                    .filter(|&v| g.contains((v, last)))
                    .map(|v| rec(g, v, remaining - 1))
                    .sum()
            }
            g.space().ids().map(|s| rec(g, s, m)).sum()
        }
        // All 16 relations on two points, every m ≤ 8.
        let sp = space(&["0", "1"]);
        let all_pairs: Vec<(PointId, PointId)> = sp
            .ids()
            .flat_map(|a| sp.ids().map(move |b| (a, b)))
            .collect();
        for mask in 0..16u32 {
            let pairs: BTreeSet<_> = all_pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &p)| p)
                .collect();
            let g = FiniteRelation::new(sp.clone(), pairs).unwrap();
            for m in 1..=8 {
                assert_eq!(
                    g.walk_count(m).unwrap(),
                    BigUint::from(brute(&g, m)),
                    "mask {mask} m {m}"
                );
            }
        }
    }

    #[test]
    fn mahavier_walks_enumerates_exactly() {
        let g = golden();
        let walks = g.mahavier_walks(2, DEFAULT_WALK_BUDGET).unwrap();
        let as_labels: Vec<String> = walks
            .iter()
            .map(|w| w.labels(g.space()).join(""))
            .collect();
        assert_eq!(as_labels, vec!["000", "001", "010", "100", "101"]);
        // m = 1 is the inverse relation itself.
        assert_eq!(g.mahavier_walks(1, DEFAULT_WALK_BUDGET).unwrap().len(), 3);
    }

    #[test]
    fn identity_relation_has_constant_walks() {
        let g = relation(
            &["0", "1/2", "1"],
            &[("0", "0"), ("1/2", "1/2"), ("1", "1")],
        );
        let walks = g.mahavier_walks(4, DEFAULT_WALK_BUDGET).unwrap();
        assert_eq!(walks.len(), 3);
        for w in walks {
            assert!(w.coords().windows(2).all(|p| p[0] == p[1]));
        }
    }

    #[test]
    fn budget_overflow_advises_walk_count() {
        let g = relation(
            &["0", "1"],
            &[("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")],
        );
        let err = g.mahavier_walks(30, 100).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn star_concat_examples() {
        let g = golden();
        let sp = g.space().clone();
        let id = |l: &str| sp.lookup(l).unwrap();
        let x = g.walk(vec![id("1"), id("0")]).unwrap();
        let y = g.walk(vec![id("0"), id("1")]).unwrap();
        let xy = star_concat(&g, &x, &y).unwrap();
        assert_eq!(xy.labels(&sp), vec!["1", "0", "1"]);
        assert_eq!(xy.len(), 2);
        // Length-0 right identity.
        let unit = g.walk(vec![id("0")]).unwrap();
        assert_eq!(star_concat(&g, &x, &unit).unwrap(), x);
        // Mismatched endpoints.
        assert!(matches!(
            star_concat(&g, &x, &x),
            Err(Error::EndpointMismatch { .. })
        ));
    }

    #[test]
    fn star_concat_length_adds() {
        let g = golden();
        for m in 1..=3 {
            for x in g.mahavier_walks(m, DEFAULT_WALK_BUDGET).unwrap() {
                for y in g.mahavier_walks(2, DEFAULT_WALK_BUDGET).unwrap() {
                    if x.last() == y.first() {
                        let xy = star_concat(&g, &x, &y).unwrap();
                        assert_eq!(xy.len(), x.len() + y.len());
                        assert!(g.walk(xy.coords().to_vec()).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn projections_are_one_based() {
        let g = golden();
        let sp = g.space().clone();
        let id = |l: &str| sp.lookup(l).unwrap();
        let w = g
            .walk(vec![id("1"), id("0"), id("1"), id("0"), id("1")])
            .unwrap();
        assert_eq!(sp.label(w.project(3).unwrap()), "1");
        let r = w.project_range(1, 2).unwrap();
        assert_eq!(r, vec![id("1"), id("0")]);
        assert!(w.project(0).is_err());
        assert!(w.project(6).is_err());
    }

    #[test]
    fn orbit_projection_resolves_through_the_period() {
        let g = golden();
        let sp = g.space().clone();
        let id = |l: &str| sp.lookup(l).unwrap();
        let orbit = g.orbit(vec![id("1")], vec![id("0"), id("1")]).unwrap();
        // Unrolls to (1, 0, 1, 0, 1, 0, 1, ...).
        let labels: Vec<&str> = (1..=7).map(|k| sp.label(orbit.at(k))).collect();
        assert_eq!(labels, vec!["1", "0", "1", "0", "1", "0", "1"]);
    }

    #[test]
    fn shift_examples() {
        let g = golden();
        let sp = g.space().clone();
        let id = |l: &str| sp.lookup(l).unwrap();
        let orbit = g.orbit(vec![id("1")], vec![id("0"), id("1")]).unwrap();
        let shifted = orbit.shift();
        assert_eq!(shifted, g.orbit(vec![], vec![id("0"), id("1")]).unwrap());
        // Constant orbit is a fixed point of the shift.
        let constant = g.orbit(vec![], vec![id("0")]).unwrap();
        assert_eq!(constant.shift(), constant);
        // Shifting twice by a 2-periodic orbit returns an equal orbit.
        let two = g.orbit(vec![], vec![id("0"), id("1")]).unwrap();
        assert_eq!(two.shift().shift(), two);
        assert_ne!(two.shift(), two);
    }

    #[test]
    fn orbit_canonicalization_merges_redundant_preperiods() {
        let g = golden();
        let sp = g.space().clone();
        let id = |l: &str| sp.lookup(l).unwrap();
        // (0, 1, 0, 1, ...) written with a redundant preperiod.
        let a = g.orbit(vec![id("0"), id("1")], vec![id("0"), id("1")]).unwrap();
        let b = g.orbit(vec![], vec![id("0"), id("1")]).unwrap();
        assert_eq!(a, b);
        // Non-primitive periods reduce.
        let c = g
            .orbit(vec![], vec![id("0"), id("1"), id("0"), id("1")])
            .unwrap();
        assert_eq!(c.period_len(), 2);
    }

    #[test]
    fn orbit_validation_checks_every_junction() {
        let g = relation(&["0", "1"], &[("0", "1"), ("1", "0")]); // single 2-cycle
        let sp = g.space().clone();
        let id = |l: &str| sp.lookup(l).unwrap();
        assert!(g.orbit(vec![], vec![id("0"), id("1")]).is_ok());
        // Constant orbit is invalid: no self-loop.
        assert!(g.orbit(vec![], vec![id("0")]).is_err());
        // Bad junction from preperiod into period.
        assert!(g.orbit(vec![id("0")], vec![id("0"), id("1")]).is_err());
    }
}
