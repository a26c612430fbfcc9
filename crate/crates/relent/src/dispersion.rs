//! Dispersions: binary trees of return-walk blocks.
//!
//! Given a (k,ε)-return on a set, every point of the set carries a pair of
//! walks that start together, end back in the set and separate by more than
//! ε at a shared index. Fixing one such pair per anchor and chaining them
//! along binary words embeds every word of length m as a walk prefix, and
//! any two prefixes of equal word length stay ε-separated at some shared
//! coordinate index at most m·k. Counting those 2^m mutually separated
//! prefixes is what forces the entropy bound log(2)/k.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::point_set::{Dist, PointId};
use crate::relation::{star_concat, FiniteRelation, SymbolicOrbit, Walk};
use crate::returns::{find_return, ReturnSearch};

/// A finite word over {0, 1}; tree keys and prefix selectors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BinaryWord(Vec<bool>);

impl BinaryWord {
    pub fn new(bits: Vec<bool>) -> BinaryWord {
        BinaryWord(bits)
    }

    pub fn empty() -> BinaryWord {
        BinaryWord(Vec::new())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: bool) -> BinaryWord {
        let mut bits = self.0.clone();
        bits.push(bit);
        BinaryWord(bits)
    }

    pub fn prefix(&self, len: usize) -> BinaryWord {
        BinaryWord(self.0[..len].to_vec())
    }

    /// All words of exactly `len` bits, in lexicographic order (0 < 1).
    pub fn all_of_length(len: usize) -> Vec<BinaryWord> {
        let mut out = vec![BinaryWord::empty()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| [w.child(false), w.child(true)])
                .collect();
        }
        out
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<BinaryWord> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::parse(s, "binary words use only 0 and 1")),
            }
        }
        Ok(BinaryWord(bits))
    }
}

/// An eventually periodic infinite word over {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryStream {
    pub preperiod: Vec<bool>,
    pub period: Vec<bool>,
}

impl BinaryStream {
    pub fn new(preperiod: Vec<bool>, period: Vec<bool>) -> Result<BinaryStream> {
        if period.is_empty() {
            return Err(Error::precondition("stream period must be non-empty"));
        }
        Ok(BinaryStream { preperiod, period })
    }

    /// Bit at 1-based position `n`.
    fn bit(&self, n: usize) -> bool {
        if n <= self.preperiod.len() {
            self.preperiod[n - 1]
        } else {
            self.period[(n - self.preperiod.len() - 1) % self.period.len()]
        }
    }

    /// Phase key for cycle detection: positions beyond the preperiod are
    /// identified modulo the period.
    fn phase(&self, n: usize) -> usize {
        if n < self.preperiod.len() {
            n
        } else {
            self.preperiod.len() + (n - self.preperiod.len()) % self.period.len()
        }
    }
}

/// How the construction picks its fixed walk pair at each anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Chooser {
    /// Smallest (j, j', x, y) in lexicographic order; the default.
    #[default]
    #[serde(rename = "lexicographic")]
    Lexicographic,
    /// Largest (j, j', x, y); exists to exercise chooser-independence.
    #[serde(rename = "reverse-lexicographic")]
    ReverseLexicographic,
}

/// The walk pair fixed for one anchor point.
#[derive(Debug, Clone)]
struct ChosenPair {
    j: usize,
    j_prime: usize,
    x: Walk,
    y: Walk,
}

/// One tree node: the block selected for this word.
#[derive(Debug, Clone)]
pub struct DispersionNode {
    /// The walk block; starts at `anchor`, ends at the child anchor.
    pub block: Walk,
    /// Block coordinate count (`j` of the defining pair).
    pub j: usize,
    /// Separation index against the sibling block.
    pub j_prime: usize,
    /// First coordinate of the block; a point of the return set.
    pub anchor: PointId,
}

/// A materialized dispersion tree of the requested depth.
#[derive(Debug, Clone)]
pub struct Dispersion {
    relation: FiniteRelation,
    set: BTreeSet<PointId>,
    k: usize,
    epsilon: Dist,
    depth: usize,
    chooser: Chooser,
    root_anchor: PointId,
    tree: BTreeMap<BinaryWord, DispersionNode>,
    pairs: BTreeMap<PointId, ChosenPair>,
}

/// Result of the 2^m counting verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DispersionCheck {
    /// Number of pairwise ε-separated assembled prefixes; 2^m on success.
    pub distinct: u64,
    pub separated: bool,
}

/// Enumeration guard for the per-anchor candidate pair search.
const PAIR_ENUMERATION_BUDGET: u64 = 1_000_000;

/// Build a dispersion for `(relation, set, k, epsilon)` to the given depth.
///
/// Fails when the relation has no (k,ε)-return on the set, naming the first
/// point without a witness. The chooser fixes which valid pair is selected
/// at each anchor, making the tree reproducible; anchors repeat, so pairs
/// are memoized and equal anchors get equal subtrees.
pub fn build_dispersion(
    relation: &FiniteRelation,
    set: &BTreeSet<PointId>,
    k: usize,
    epsilon: &Dist,
    depth: usize,
    chooser: Chooser,
) -> Result<Dispersion> {
    if depth == 0 {
        return Err(Error::precondition("dispersion depth must be at least 1"));
    }
    match find_return(relation, set, k, epsilon)? {
        ReturnSearch::Found(_) => {}
        ReturnSearch::None { failed_at } => {
            return Err(Error::NoReturn(
                relation.space().label(failed_at).to_string(),
            ));
        }
    }
    let root_anchor = match chooser {
        Chooser::Lexicographic => *set.iter().next().unwrap(),
        Chooser::ReverseLexicographic => *set.iter().next_back().unwrap(),
    };
    let mut dispersion = Dispersion {
        relation: relation.clone(),
        set: set.clone(),
        k,
        epsilon: epsilon.clone(),
        depth,
        chooser,
        root_anchor,
        tree: BTreeMap::new(),
        pairs: BTreeMap::new(),
    };
    let mut frontier: Vec<(BinaryWord, PointId)> = vec![(BinaryWord::empty(), root_anchor)];
    for _level in 1..=depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (word, anchor) in frontier {
            let pair = dispersion.pair_at(anchor)?.clone();
            for (bit, block) in [(false, &pair.x), (true, &pair.y)] {
                let child = word.child(bit);
                let child_anchor = block.last();
                dispersion.tree.insert(
                    child.clone(),
                    DispersionNode {
                        block: block.clone(),
                        j: pair.j,
                        j_prime: pair.j_prime,
                        anchor,
                    },
                );
                next.push((child, child_anchor));
            }
        }
        frontier = next;
    }
    Ok(dispersion)
}

impl Dispersion {
    pub fn relation(&self) -> &FiniteRelation {
        &self.relation
    }

    pub fn set(&self) -> &BTreeSet<PointId> {
        &self.set
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> &Dist {
        &self.epsilon
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn chooser(&self) -> Chooser {
        self.chooser
    }

    pub fn root_anchor(&self) -> PointId {
        self.root_anchor
    }

    pub fn node(&self, word: &BinaryWord) -> Option<&DispersionNode> {
        self.tree.get(word)
    }

    pub fn tree(&self) -> &BTreeMap<BinaryWord, DispersionNode> {
        &self.tree
    }

    /// Select (and memoize) the chooser-fixed pair for an anchor.
    fn pair_at(&mut self, anchor: PointId) -> Result<&ChosenPair> {
        if !self.pairs.contains_key(&anchor) {
            let pair = self.choose_pair(anchor)?;
            self.pairs.insert(anchor, pair);
        }
        Ok(&self.pairs[&anchor])
    }

    /// Enumerate all candidate (j, j', x, y) at an anchor and apply the
    /// chooser. Candidates are ordered by (j, j', x, y); the recorded j' is
    /// always the least separating index of its pair.
    fn choose_pair(&self, anchor: PointId) -> Result<ChosenPair> {
        let space = self.relation.space();
        let js: Vec<usize> = match self.chooser {
            Chooser::Lexicographic => (2..=self.k).collect(),
            Chooser::ReverseLexicographic => (2..=self.k).rev().collect(),
        };
        for j in js {
            let walks =
                self.relation
                    .walks_from(anchor, j - 1, Some(&self.set), PAIR_ENUMERATION_BUDGET)?;
            let mut best: Option<ChosenPair> = None;
            for x in &walks {
                for y in &walks {
                    let j_prime = (2..=j).find(|&i| {
                        let (xi, yi) = (
                            x.project(i).expect("index in range"),
                            y.project(i).expect("index in range"),
                        );
                        space.distance(xi, yi) > &self.epsilon
                    });
                    let Some(j_prime) = j_prime else { continue };
                    let candidate = ChosenPair {
                        j,
                        j_prime,
                        x: x.clone(),
                        y: y.clone(),
                    };
                    let replace = match &best {
                        None => true,
                        Some(b) => {
                            let new_key = (candidate.j_prime, candidate.x.coords(), candidate.y.coords());
                            let old_key = (b.j_prime, b.x.coords(), b.y.coords());
                            match self.chooser {
                                Chooser::Lexicographic => new_key < old_key,
                                Chooser::ReverseLexicographic => new_key > old_key,
                            }
                        }
                    };
                    if replace {
                        best = Some(candidate);
                    }
                }
            }
            if let Some(pair) = best {
                return Ok(pair);
            }
        }
        Err(Error::NoReturn(
            self.relation.space().label(anchor).to_string(),
        ))
    }

    /// The ⋆-concatenation of the blocks along the word's path.
    pub fn assemble_prefix(&self, word: &BinaryWord) -> Result<Walk> {
        if word.is_empty() || word.len() > self.depth {
            return Err(Error::precondition(format!(
                "word length must be between 1 and the depth {}",
                self.depth
            )));
        }
        let mut walk: Option<Walk> = None;
        for level in 1..=word.len() {
            let node = self
                .tree
                .get(&word.prefix(level))
                .expect("materialized word");
            walk = Some(match walk {
                None => node.block.clone(),
                Some(w) => star_concat(&self.relation, &w, &node.block)?,
            });
        }
        Ok(walk.unwrap())
    }

    /// Verify the counting step: the 2^m assembled prefixes of word length
    /// `m` are pairwise separated by more than ε at a shared coordinate
    /// index at most m·k. Any violation is an error naming the word pair.
    pub fn verify_dispersion(&self, m: usize) -> Result<DispersionCheck> {
        if m == 0 || m > self.depth {
            return Err(Error::precondition(format!(
                "verification level must be between 1 and the depth {}",
                self.depth
            )));
        }
        let words = BinaryWord::all_of_length(m);
        let prefixes: Vec<Walk> = words
            .iter()
            .map(|w| self.assemble_prefix(w))
            .collect::<Result<_>>()?;
        let space = self.relation.space();
        for (ai, a) in words.iter().enumerate() {
            for (bi, b) in words.iter().enumerate().skip(ai + 1) {
                // First differing level; blocks before it coincide.
                let level = a
                    .bits()
                    .iter()
                    .zip(b.bits())
                    .position(|(x, y)| x != y)
                    .expect("distinct words differ");
                let mut offset = 0usize;
                for l in 1..=level {
                    offset += self.tree[&a.prefix(l)].j - 1;
                }
                let node = &self.tree[&a.prefix(level + 1)];
                let index = offset + node.j_prime; // 1-based shared index
                if index > m * self.k {
                    return Err(Error::Inconsistency(format!(
                        "separation index {index} exceeds m*k for words {a} and {b}"
                    )));
                }
                let pa = prefixes[ai].project(index)?;
                let pb = prefixes[bi].project(index)?;
                if space.distance(pa, pb) <= &self.epsilon {
                    return Err(Error::Inconsistency(format!(
                        "prefixes of {a} and {b} are not separated at index {index}"
                    )));
                }
            }
        }
        Ok(DispersionCheck {
            distinct: 1u64 << m,
            separated: true,
        })
    }

    /// The countable return set realized by the tree: all block anchors.
    /// The full return property restricts to this set.
    pub fn countable_return_subset(&self) -> BTreeSet<PointId> {
        self.tree.values().map(|n| n.anchor).collect()
    }

    /// Assemble the infinite concatenation along an eventually periodic
    /// word. Blocks depend only on (anchor, next bit), so the resulting
    /// point of the infinite Mahavier product is eventually periodic and
    /// can be materialized exactly.
    pub fn orbit_for_stream(&self, stream: &BinaryStream) -> Result<SymbolicOrbit> {
        let mut pairs = self.pairs.clone();
        let mut coords: Vec<PointId> = vec![self.root_anchor];
        let mut anchor = self.root_anchor;
        let mut seen: BTreeMap<(PointId, usize), usize> = BTreeMap::new();
        let mut n = 0usize;
        loop {
            let phase = stream.phase(n);
            if let Some(&start) = seen.get(&(anchor, phase)) {
                let preperiod = coords[..start].to_vec();
                let period = coords[start..coords.len() - 1].to_vec();
                return self.relation.orbit(preperiod, period);
            }
            seen.insert((anchor, phase), coords.len() - 1);
            n += 1;
            let bit = stream.bit(n);
            if !pairs.contains_key(&anchor) {
                // Anchors outside the materialized tree can appear along
                // streams; choose their pair on demand.
                let probe = Dispersion {
                    pairs: BTreeMap::new(),
                    tree: BTreeMap::new(),
                    ..self.clone()
                };
                let pair = probe.choose_pair(anchor)?;
                pairs.insert(anchor, pair);
            }
            let pair = &pairs[&anchor];
            let block = if bit { &pair.y } else { &pair.x };
            coords.extend_from_slice(&block.coords()[1..]);
            anchor = block.last();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use crate::point_set::{Metric, PointSet};
    use num_rational::BigRational;
    use std::sync::Arc;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn relation(labels: &[&str], pairs: &[(&str, &str)]) -> FiniteRelation {
        let sp = Arc::new(
            PointSet::new(
                labels.iter().map(|l| (l.to_string(), vec![q(l)])).collect(),
                Metric::AbsDiff1d,
            )
            .unwrap(),
        );
        let set: BTreeSet<_> = pairs
            .iter()
            .map(|&(a, b)| (sp.lookup(a).unwrap(), sp.lookup(b).unwrap()))
            .collect();
        FiniteRelation::new(sp, set).unwrap()
    }

    fn golden() -> FiniteRelation {
        relation(&["0", "1"], &[("0", "0"), ("0", "1"), ("1", "0")])
    }

    fn ids(g: &FiniteRelation, labels: &[&str]) -> BTreeSet<PointId> {
        labels.iter().map(|l| g.space().lookup(l).unwrap()).collect()
    }

    fn word(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    fn labels(g: &FiniteRelation, w: &Walk) -> String {
        w.labels(g.space()).join(",")
    }

    #[test]
    fn golden_depth_three_tree_on_one() {
        let g = golden();
        let set = ids(&g, &["1"]);
        let eps = Dist::Rational(q("1/2"));
        let d = build_dispersion(&g, &set, 5, &eps, 3, Chooser::Lexicographic).unwrap();
        assert_eq!(d.tree().len(), 14); // 2 + 4 + 8 blocks
        let level1: BTreeSet<String> = [word("0"), word("1")]
            .iter()
            .map(|w| labels(&g, &d.node(w).unwrap().block))
            .collect();
        let expected: BTreeSet<String> =
            ["1,0,0,0,1".to_string(), "1,0,1,0,1".to_string()].into_iter().collect();
        assert_eq!(level1, expected);
        for node in d.tree().values() {
            assert_eq!(node.j, 5);
            assert_eq!(node.j_prime, 3);
            assert!(set.contains(&node.block.last()));
        }
    }

    #[test]
    fn sibling_blocks_share_anchor_and_separate() {
        let g = golden();
        let set = ids(&g, &["0"]);
        let eps = Dist::Rational(q("1/2"));
        let d = build_dispersion(&g, &set, 3, &eps, 4, Chooser::Lexicographic).unwrap();
        let space = g.space();
        for level in 0..4usize {
            for w in BinaryWord::all_of_length(level) {
                let a = d.node(&w.child(false)).unwrap();
                let b = d.node(&w.child(true)).unwrap();
                assert_eq!(a.block.first(), b.block.first());
                assert_eq!(a.j_prime, b.j_prime);
                let sep = space.distance(
                    a.block.project(a.j_prime).unwrap(),
                    b.block.project(b.j_prime).unwrap(),
                );
                assert!(sep > &eps);
            }
        }
        // Depth-1 blocks on the zero anchor.
        assert_eq!(labels(&g, &d.node(&word("0")).unwrap().block), "0,0,0");
        assert_eq!(labels(&g, &d.node(&word("1")).unwrap().block), "0,1,0");
        assert_eq!(d.node(&word("0")).unwrap().j_prime, 2);
    }

    #[test]
    fn no_return_means_no_dispersion() {
        let g = relation(
            &["0", "1/2", "1"],
            &[("0", "0"), ("1/2", "1/2"), ("1", "1")],
        );
        let set = ids(&g, &["0"]);
        let err = build_dispersion(
            &g,
            &set,
            4,
            &Dist::Rational(q("1/4")),
            2,
            Chooser::Lexicographic,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoReturn(_)));
        // Depth zero is rejected before anything else.
        let g = golden();
        let err = build_dispersion(
            &g,
            &ids(&g, &["1"]),
            5,
            &Dist::Rational(q("1/2")),
            0,
            Chooser::Lexicographic,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn assembled_prefixes_concatenate_blocks() {
        let g = golden();
        let set = ids(&g, &["1"]);
        let eps = Dist::Rational(q("1/2"));
        let d = build_dispersion(&g, &set, 5, &eps, 3, Chooser::Lexicographic).unwrap();
        assert_eq!(labels(&g, &d.assemble_prefix(&word("0")).unwrap()), "1,0,0,0,1");
        assert_eq!(labels(&g, &d.assemble_prefix(&word("1")).unwrap()), "1,0,1,0,1");
        let two = d.assemble_prefix(&word("00")).unwrap();
        assert_eq!(two.len(), 8);
        assert_eq!(two.first(), d.root_anchor());
        assert!(set.contains(&two.last()));
        // Words beyond the depth are rejected.
        assert!(d.assemble_prefix(&word("0000")).is_err());
        // Prefixes for different first bits differ at coordinate 3 by 1.
        let a = d.assemble_prefix(&word("0")).unwrap();
        let b = d.assemble_prefix(&word("1")).unwrap();
        let dist = g
            .space()
            .distance(a.project(3).unwrap(), b.project(3).unwrap());
        assert_eq!(dist, &Dist::Rational(q("1")));
    }

    #[test]
    fn verification_counts_powers_of_two() {
        let g = golden();
        let set = ids(&g, &["0"]);
        let eps = Dist::Rational(q("1/2"));
        let d = build_dispersion(&g, &set, 3, &eps, 6, Chooser::Lexicographic).unwrap();
        for m in 1..=6 {
            let check = d.verify_dispersion(m).unwrap();
            assert_eq!(check.distinct, 1 << m);
            assert!(check.separated);
        }
        assert!(d.verify_dispersion(0).is_err());
        assert!(d.verify_dispersion(7).is_err());
    }

    #[test]
    fn anchors_form_a_countable_return_subset() {
        let g = golden();
        let set = ids(&g, &["1"]);
        let eps = Dist::Rational(q("1/2"));
        let d = build_dispersion(&g, &set, 5, &eps, 3, Chooser::Lexicographic).unwrap();
        let subset = d.countable_return_subset();
        assert_eq!(subset, ids(&g, &["1"]));
        assert!(find_return(&g, &subset, 5, &eps).unwrap().is_found());
        // Subsets stay inside the original set for both choosers.
        let both = ids(&g, &["0", "1"]);
        for chooser in [Chooser::Lexicographic, Chooser::ReverseLexicographic] {
            let d = build_dispersion(&g, &both, 3, &eps, 3, chooser).unwrap();
            let subset = d.countable_return_subset();
            assert!(subset.is_subset(&both));
            assert!(find_return(&g, &subset, 3, &eps).unwrap().is_found());
        }
    }

    #[test]
    fn streams_assemble_to_eventually_periodic_orbits() {
        let g = golden();
        let set = ids(&g, &["0"]);
        let eps = Dist::Rational(q("1/2"));
        let d = build_dispersion(&g, &set, 3, &eps, 2, Chooser::Lexicographic).unwrap();
        // Constant-zero stream: blocks (0,0,0) forever.
        let orbit = d
            .orbit_for_stream(&BinaryStream::new(vec![], vec![false]).unwrap())
            .unwrap();
        let zero = g.space().lookup("0").unwrap();
        assert_eq!(orbit, g.orbit(vec![], vec![zero]).unwrap());
        // Alternating stream gives the concatenation of both blocks.
        let orbit = d
            .orbit_for_stream(&BinaryStream::new(vec![], vec![false, true]).unwrap())
            .unwrap();
        for i in 1..10 {
            // Sequence 0,0,0,1,0,0,0,1,... from (0,0,0) * (0,1,0) * ...
            let expected = if i % 4 == 0 { "1" } else { "0" };
            assert_eq!(g.space().label(orbit.at(i)), expected);
        }
    }
}
