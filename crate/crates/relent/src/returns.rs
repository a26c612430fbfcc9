//! Detection of (k,ε)-returns and the other certificate-producing
//! sufficient conditions for positive entropy: cycle pairs, the box
//! condition on walk sets, well-aligned subsets, and the explicit two-line
//! family on the unit interval.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph;
use crate::point_set::{Dist, PointId, PointSet};
use crate::relation::{FiniteRelation, Walk};

/// Witness that a point `a` admits the required separated walk pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnCertificate {
    pub a: PointId,
    pub k: usize,
    pub epsilon: Dist,
    /// Both walks have `j` coordinates, `1 < j_prime <= j <= k`.
    pub j: usize,
    pub j_prime: usize,
    pub x: Walk,
    pub y: Walk,
}

impl ReturnCertificate {
    /// Re-check every certificate invariant against the relation and set.
    pub fn validate(&self, relation: &FiniteRelation, set: &BTreeSet<PointId>) -> Result<()> {
        if !(1 < self.j_prime && self.j_prime <= self.j && self.j <= self.k) {
            return Err(Error::precondition(format!(
                "certificate indices out of order: j'={} j={} k={}",
                self.j_prime, self.j, self.k
            )));
        }
        if self.x.coords().len() != self.j || self.y.coords().len() != self.j {
            return Err(Error::precondition(
                "certificate walks must have exactly j coordinates",
            ));
        }
        relation.walk(self.x.coords().to_vec())?;
        relation.walk(self.y.coords().to_vec())?;
        if self.x.first() != self.a || self.y.first() != self.a {
            return Err(Error::precondition("walks must start at the witness point"));
        }
        if !set.contains(&self.x.last()) || !set.contains(&self.y.last()) {
            return Err(Error::precondition("walk endpoints must lie in the set"));
        }
        let space = relation.space();
        let sep = space.distance(
            self.x.project(self.j_prime)?,
            self.y.project(self.j_prime)?,
        );
        if sep <= &self.epsilon {
            return Err(Error::precondition(format!(
                "separation {sep} at index {} does not exceed epsilon {}",
                self.j_prime, self.epsilon
            )));
        }
        Ok(())
    }
}

/// Outcome of a per-set return search.
#[derive(Debug, Clone)]
pub enum ReturnSearch {
    Found(Vec<ReturnCertificate>),
    /// No witness pair exists for this point of the set.
    None { failed_at: PointId },
}

impl ReturnSearch {
    pub fn certificates(&self) -> Option<&[ReturnCertificate]> {
        match self {
            ReturnSearch::Found(certs) => Some(certs),
            ReturnSearch::None { .. } => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, ReturnSearch::Found(_))
    }
}

/// Decide whether the relation has a (k,ε)-return on `set`, emitting one
/// certificate per point.
///
/// The search works with per-index completion sets (which points can still
/// extend to a walk that ends in the set, passes the separation test at the
/// recorded index, and pairs with a feasible partner walk), so the cost is
/// polynomial in `|X|` and `k` rather than in the number of walks. Within a
/// point the emitted certificate is minimal under the order (j, j', x, y)
/// with walks compared lexicographically by point id.
pub fn find_return(
    relation: &FiniteRelation,
    set: &BTreeSet<PointId>,
    k: usize,
    epsilon: &Dist,
) -> Result<ReturnSearch> {
    if set.is_empty() {
        return Err(Error::precondition("the return set must be non-empty"));
    }
    if k < 2 {
        return Err(Error::precondition("a return needs k >= 2"));
    }
    if epsilon.is_zero() {
        return Err(Error::precondition("epsilon must be positive"));
    }
    let mut certs = Vec::with_capacity(set.len());
    for &a in set {
        match certificate_for_point(relation, set, k, epsilon, a) {
            Some(cert) => certs.push(cert),
            None => return Ok(ReturnSearch::None { failed_at: a }),
        }
    }
    Ok(ReturnSearch::Found(certs))
}

/// Points reachable from `start` in exactly `t` steps, `t = 0..=steps`.
fn reach_sets(relation: &FiniteRelation, start: PointId, steps: usize) -> Vec<BTreeSet<PointId>> {
    let mut out = vec![BTreeSet::from([start])];
    for t in 0..steps {
        let mut next = BTreeSet::new();
        for &u in &out[t] {
            next.extend(relation.successors(u).iter().copied());
        }
        out.push(next);
    }
    out
}

/// Points that reach `targets` in exactly `s` steps, `s = 0..=steps`.
fn coreach_sets(
    relation: &FiniteRelation,
    targets: &BTreeSet<PointId>,
    steps: usize,
) -> Vec<BTreeSet<PointId>> {
    let mut out = vec![targets.clone()];
    for s in 0..steps {
        let mut prev = BTreeSet::new();
        for u in relation.space().ids() {
            if relation.successors(u).iter().any(|v| out[s].contains(v)) {
                prev.insert(u);
            }
        }
        out.push(prev);
    }
    out
}

fn certificate_for_point(
    relation: &FiniteRelation,
    set: &BTreeSet<PointId>,
    k: usize,
    epsilon: &Dist,
    a: PointId,
) -> Option<ReturnCertificate> {
    let space = relation.space();
    let reach = reach_sets(relation, a, k - 1);
    let to_set = coreach_sets(relation, set, k - 1);
    for j in 2..=k {
        for j_prime in 2..=j {
            // Partner candidates at the separation index: reachable from a
            // in j'-1 steps and able to finish in the set j-j' steps later.
            let partners: BTreeSet<PointId> = reach[j_prime - 1]
                .intersection(&to_set[j - j_prime])
                .copied()
                .collect();
            if partners.is_empty() {
                continue;
            }
            // Admissible values for the separating coordinate of the first
            // walk: far enough from some feasible partner coordinate.
            let good: BTreeSet<PointId> = space
                .ids()
                .filter(|&w| partners.iter().any(|&v| space.distance(w, v) > epsilon))
                .collect();
            if good.is_empty() {
                continue;
            }
            let x = match greedy_walk(relation, set, a, j, j_prime, &good) {
                Some(x) => x,
                None => continue,
            };
            let x_sep = x.project(j_prime).expect("index within walk");
            let sep_from_x: BTreeSet<PointId> = space
                .ids()
                .filter(|&v| space.distance(x_sep, v) > epsilon)
                .collect();
            let y = greedy_walk(relation, set, a, j, j_prime, &sep_from_x)
                .expect("partner walk exists when the first walk was feasible");
            return Some(ReturnCertificate {
                a,
                k,
                epsilon: epsilon.clone(),
                j,
                j_prime,
                x,
                y,
            });
        }
    }
    None
}

/// Lexicographically smallest walk of `j` coordinates from `a` ending in
/// `set` whose `j_prime`-th coordinate lies in `constraint`.
fn greedy_walk(
    relation: &FiniteRelation,
    set: &BTreeSet<PointId>,
    a: PointId,
    j: usize,
    j_prime: usize,
    constraint: &BTreeSet<PointId>,
) -> Option<Walk> {
    // feas[i] (1-based coordinate index) = admissible coordinate values
    // that still complete to a full walk.
    let mut feas: Vec<BTreeSet<PointId>> = vec![BTreeSet::new(); j + 1];
    feas[j] = if j == j_prime {
        set.intersection(constraint).copied().collect()
    } else {
        set.clone()
    };
    for i in (1..j).rev() {
        let mut s: BTreeSet<PointId> = relation
            .space()
            .ids()
            .filter(|&u| {
                relation
                    .successors(u)
                    .iter()
                    .any(|v| feas[i + 1].contains(v))
            })
            .collect();
        if i == j_prime {
            s = s.intersection(constraint).copied().collect();
        }
        feas[i] = s;
    }
    if !feas[1].contains(&a) {
        return None;
    }
    let mut coords = vec![a];
    for i in 1..j {
        let cur = *coords.last().unwrap();
        let next = relation
            .successors(cur)
            .iter()
            .copied()
            .find(|v| feas[i + 1].contains(v))?;
        coords.push(next);
    }
    Some(relation.walk(coords).expect("constructed walk is valid"))
}

/// Result of the existential search over sets, depths and thresholds.
#[derive(Debug, Clone)]
pub struct AnyReturn {
    pub set: BTreeSet<PointId>,
    pub k: usize,
    pub epsilon: Dist,
    pub certificates: Vec<ReturnCertificate>,
}

/// Sorted positive candidate thresholds: pairwise distances and halves.
/// Separation predicates are strict, so only these finitely many values can
/// change any detector's answer.
pub fn quantized_epsilons(space: &PointSet) -> Vec<Dist> {
    let mut out = Vec::new();
    for d in space.positive_distances() {
        out.push(d.halve());
        out.push(d);
    }
    out.sort();
    out.dedup();
    out
}

/// Cap on exhaustive subset search in [`find_any_return`].
const SUBSET_SEARCH_MAX_POINTS: usize = 12;

/// Smallest `k` for which some set and some positive threshold admit a
/// return. Candidate sets are tried recurrent-first (return endpoints must
/// re-enter the set, so cycle vertices are the natural candidates), then
/// all remaining subsets; thresholds are half pairwise distances, largest
/// first. A cycle-pair witness always yields `k <= 2|X| + 1`, so searching
/// up to that depth is complete for finite relations.
pub fn find_any_return(relation: &FiniteRelation) -> Result<Option<AnyReturn>> {
    let space = relation.space();
    let n = space.len();
    let recurrent = relation.recurrent_vertices();
    let candidates: Vec<BTreeSet<PointId>> = if n <= SUBSET_SEARCH_MAX_POINTS {
        let rec: Vec<PointId> = recurrent.iter().copied().collect();
        let mut sets = subsets_by_size(&rec);
        let all: Vec<PointId> = space.ids().collect();
        for extra in subsets_by_size(&all) {
            if !sets.contains(&extra) {
                sets.push(extra);
            }
        }
        sets
    } else {
        // Heuristic for large spaces: recurrent singletons, recurrent
        // components, and the whole recurrent set.
        let adj = relation.adjacency();
        let mut sets: Vec<BTreeSet<PointId>> =
            recurrent.iter().map(|&v| BTreeSet::from([v])).collect();
        for comp in graph::strongly_connected_components(&adj) {
            if graph::has_internal_edge(&adj, &comp) {
                sets.push(comp.into_iter().map(|v| PointId(v as u32)).collect());
            }
        }
        if !recurrent.is_empty() {
            sets.push(recurrent.clone());
        }
        sets
    };
    if candidates.is_empty() {
        return Ok(None);
    }
    let mut epsilons: Vec<Dist> = space
        .positive_distances()
        .iter()
        .map(Dist::halve)
        .collect();
    epsilons.sort();
    epsilons.dedup();
    epsilons.reverse(); // largest first
    let k_cap = 2 * n + 1;
    for k in 2..=k_cap {
        for set in &candidates {
            for eps in &epsilons {
                if let ReturnSearch::Found(certs) = find_return(relation, set, k, eps)? {
                    return Ok(Some(AnyReturn {
                        set: set.clone(),
                        k,
                        epsilon: eps.clone(),
                        certificates: certs,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Non-empty subsets ordered by size then lexicographically.
fn subsets_by_size(items: &[PointId]) -> Vec<BTreeSet<PointId>> {
    let mut out: Vec<BTreeSet<PointId>> = Vec::new();
    for mask in 1u32..(1u32 << items.len()) {
        let set: BTreeSet<PointId> = items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &p)| p)
            .collect();
        out.push(set);
    }
    out.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.iter().collect::<Vec<_>>().cmp(&b.iter().collect()))
    });
    out
}

/// The entropy lower bound `log(2)/k` guaranteed by a family of return
/// certificates sharing `k`; every certificate is re-validated first.
pub fn return_entropy_bound(
    relation: &FiniteRelation,
    set: &BTreeSet<PointId>,
    certificates: &[ReturnCertificate],
) -> Result<f64> {
    if certificates.is_empty() {
        return Err(Error::precondition("no certificates supplied"));
    }
    let k = certificates[0].k;
    for cert in certificates {
        if cert.k != k {
            return Err(Error::precondition("certificates disagree on k"));
        }
        cert.validate(relation, set)?;
    }
    Ok(std::f64::consts::LN_2 / k as f64)
}

/// Two distinct closed walks through a common vertex, disagreeing at `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclePairCertificate {
    pub x: Walk,
    pub y: Walk,
    pub j: usize,
}

impl CyclePairCertificate {
    pub fn validate(&self, relation: &FiniteRelation) -> Result<()> {
        relation.walk(self.x.coords().to_vec())?;
        relation.walk(self.y.coords().to_vec())?;
        let kx = self.x.coords().len();
        let ky = self.y.coords().len();
        if kx < 2 || ky < 2 {
            return Err(Error::precondition(
                "closed walks need at least 2 coordinates",
            ));
        }
        let anchor = self.x.first();
        if self.x.last() != anchor || self.y.first() != anchor || self.y.last() != anchor {
            return Err(Error::precondition(
                "walks must be closed at a common vertex",
            ));
        }
        if !(1 < self.j && self.j <= kx.min(ky)) {
            return Err(Error::precondition("disagreement index out of range"));
        }
        if self.x.project(self.j)? == self.y.project(self.j)? {
            return Err(Error::precondition(
                "walks agree at the disagreement index",
            ));
        }
        Ok(())
    }
}

/// Find two distinct closed walks at a common vertex, or decide none exist.
///
/// A witness exists exactly when some strongly connected component is
/// neither a lone vertex nor a single simple cycle. The constructed walks
/// take the two smallest sideways edges at the smallest branching vertex
/// and return by shortest internal paths, so both stay below `2|X|`
/// coordinates and disagree at index 2.
pub fn detect_cycle_pair(relation: &FiniteRelation) -> Option<CyclePairCertificate> {
    let adj = relation.adjacency();
    for comp in graph::strongly_connected_components(&adj) {
        if !graph::has_internal_edge(&adj, &comp) || graph::is_simple_cycle(&adj, &comp) {
            continue;
        }
        let (v, outs) = comp
            .iter()
            .filter_map(|&v| {
                let mut internal: Vec<usize> = adj[v]
                    .iter()
                    .copied()
                    .filter(|w| comp.contains(w))
                    .collect();
                internal.sort_unstable();
                (internal.len() >= 2).then_some((v, internal))
            })
            .next()
            .expect("complex component has a branching vertex");
        let (u1, u2) = (outs[0], outs[1]);
        let dist = internal_distances_to(&adj, &comp, v);
        let x = closed_walk(relation, &adj, &comp, &dist, v, u1);
        let y = closed_walk(relation, &adj, &comp, &dist, v, u2);
        return Some(CyclePairCertificate { x, y, j: 2 });
    }
    None
}

/// BFS distances to `target` along internal edges of the component.
fn internal_distances_to(
    adj: &[Vec<usize>],
    comp: &[usize],
    target: usize,
) -> BTreeMap<usize, usize> {
    let mut dist = BTreeMap::from([(target, 0usize)]);
    let mut frontier = vec![target];
    let mut level = 0usize;
    while !frontier.is_empty() {
        level += 1;
        let mut next = Vec::new();
        for &w in comp {
            if dist.contains_key(&w) {
                continue;
            }
            if adj[w]
                .iter()
                .any(|x| comp.contains(x) && frontier.contains(x))
            {
                dist.insert(w, level);
                next.push(w);
            }
        }
        frontier = next;
    }
    dist
}

/// Closed walk `v -> first -> ... -> v` following lexicographically
/// smallest shortest paths inside the component.
fn closed_walk(
    relation: &FiniteRelation,
    adj: &[Vec<usize>],
    comp: &[usize],
    dist_to_v: &BTreeMap<usize, usize>,
    v: usize,
    first: usize,
) -> Walk {
    let mut coords = vec![PointId(v as u32), PointId(first as u32)];
    let mut cur = first;
    while cur != v {
        let d = dist_to_v[&cur];
        let next = adj[cur]
            .iter()
            .copied()
            .filter(|w| comp.contains(w) && dist_to_v.get(w) == Some(&(d - 1)))
            .min()
            .expect("shortest path steps down");
        coords.push(PointId(next as u32));
        cur = next;
    }
    relation.walk(coords).expect("closed walk follows edges")
}

/// Why a box-condition check failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BoxFailure {
    /// Some cross pair of walks agrees everywhere: the families are not
    /// separated in the product sup-metric.
    #[serde(rename = "not-separated")]
    NotSeparated,
    /// The k-th projections are not contained in the shared first
    /// projections; carries one offending point label.
    #[serde(rename = "projection-inclusion")]
    ProjectionInclusion { violating: String },
}

/// Outcome of [`check_box_condition`].
#[derive(Debug, Clone)]
pub enum BoxCheck {
    Satisfied {
        epsilon: Dist,
        set: BTreeSet<PointId>,
    },
    Fails(BoxFailure),
}

/// Test two walk families for the box condition: positive separation in the
/// product sup-metric (min over cross pairs of the max coordinate distance)
/// and the projection inclusion `π_k(J) ∪ π_k(K) ⊆ π_1(J) ∩ π_1(K)`.
pub fn check_box_condition(
    relation: &FiniteRelation,
    j_walks: &[Walk],
    k_walks: &[Walk],
    k: usize,
) -> Result<BoxCheck> {
    if k < 2 {
        return Err(Error::precondition("box condition needs k >= 2"));
    }
    if j_walks.is_empty() || k_walks.is_empty() {
        return Err(Error::precondition("both walk families must be non-empty"));
    }
    for w in j_walks.iter().chain(k_walks) {
        if w.coords().len() != k {
            return Err(Error::precondition(format!(
                "every walk must have {k} coordinates, found {}",
                w.coords().len()
            )));
        }
        relation.walk(w.coords().to_vec())?;
    }
    let space = relation.space();
    let mut rho: Option<Dist> = None;
    for u in j_walks {
        for v in k_walks {
            let pair_dist = u
                .coords()
                .iter()
                .zip(v.coords())
                .map(|(&a, &b)| space.distance(a, b).clone())
                .max()
                .expect("walks are non-empty");
            if rho.as_ref().map_or(true, |r| &pair_dist < r) {
                rho = Some(pair_dist);
            }
        }
    }
    let rho = rho.unwrap();
    if rho.is_zero() {
        return Ok(BoxCheck::Fails(BoxFailure::NotSeparated));
    }
    let firsts_j: BTreeSet<PointId> = j_walks.iter().map(|w| w.first()).collect();
    let firsts_k: BTreeSet<PointId> = k_walks.iter().map(|w| w.first()).collect();
    let shared: BTreeSet<PointId> = firsts_j.intersection(&firsts_k).copied().collect();
    for w in j_walks.iter().chain(k_walks) {
        let end = w.last();
        if !shared.contains(&end) {
            return Ok(BoxCheck::Fails(BoxFailure::ProjectionInclusion {
                violating: space.label(end).to_string(),
            }));
        }
    }
    Ok(BoxCheck::Satisfied {
        epsilon: rho,
        set: shared,
    })
}

/// Which relation carried a successful search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    #[serde(rename = "direct")]
    Direct,
    #[serde(rename = "inverse")]
    Inverse,
}

/// Certificate that two subsets of the relation are well-aligned: shared
/// fibers carry an ε-separated pair of first coordinates, every first
/// coordinate falls back among the covered second coordinates, and every
/// covered point walks back into the shared fiber set within `bound_n`
/// steps.
#[derive(Debug, Clone)]
pub struct WellAlignedCertificate {
    pub orientation: Orientation,
    pub left: BTreeSet<(PointId, PointId)>,
    pub right: BTreeSet<(PointId, PointId)>,
    pub epsilon: Dist,
    pub bound_n: usize,
    /// Shortest walk from each covered point back into the shared fibers.
    pub reach: BTreeMap<PointId, Walk>,
}

/// Exhaustive search cutoff: assignments grow as 3^|G|, so past this many
/// pairs the fiber heuristic runs instead.
const WELL_ALIGNED_EXHAUSTIVE_MAX_PAIRS: usize = 10;

/// Search for a well-aligned pair of subsets in the relation or its
/// inverse. Small relations are searched exhaustively over all
/// pair-to-{left, right, out} assignments, keeping the certificate with
/// minimal walk bound `N` (ties broken toward larger ε, then the direct
/// orientation); larger relations use a fiber-splitting heuristic.
pub fn detect_well_aligned(relation: &FiniteRelation) -> Option<WellAlignedCertificate> {
    let direct = well_aligned_in(relation, Orientation::Direct);
    let inverse = well_aligned_in(&relation.inverse(), Orientation::Inverse);
    match (direct, inverse) {
        (Some(d), Some(i)) => Some(if better_certificate(&d, &i) { d } else { i }),
        (Some(d), None) => Some(d),
        (None, Some(i)) => Some(i),
        (None, None) => None,
    }
}

fn better_certificate(a: &WellAlignedCertificate, b: &WellAlignedCertificate) -> bool {
    (a.bound_n, std::cmp::Reverse(a.epsilon.clone()))
        <= (b.bound_n, std::cmp::Reverse(b.epsilon.clone()))
}

fn well_aligned_in(
    relation: &FiniteRelation,
    orientation: Orientation,
) -> Option<WellAlignedCertificate> {
    let pairs: Vec<(PointId, PointId)> = relation.pairs().iter().copied().collect();
    if pairs.is_empty() {
        return None;
    }
    if pairs.len() <= WELL_ALIGNED_EXHAUSTIVE_MAX_PAIRS {
        exhaustive_well_aligned(relation, orientation, &pairs)
    } else {
        heuristic_well_aligned(relation, orientation)
    }
}

fn exhaustive_well_aligned(
    relation: &FiniteRelation,
    orientation: Orientation,
    pairs: &[(PointId, PointId)],
) -> Option<WellAlignedCertificate> {
    let mut best: Option<WellAlignedCertificate> = None;
    let mut assignment = vec![0u8; pairs.len()]; // 0 = out, 1 = left, 2 = right
    loop {
        let mut left = BTreeSet::new();
        let mut right = BTreeSet::new();
        for (idx, &code) in assignment.iter().enumerate() {
            match code {
                1 => {
                    left.insert(pairs[idx]);
                }
                2 => {
                    right.insert(pairs[idx]);
                }
                _ => {}
            }
        }
        if !left.is_empty() && !right.is_empty() {
            if let Some(cert) = validate_alignment(relation, orientation, &left, &right) {
                if best.as_ref().map_or(true, |b| better_certificate(&cert, b)) {
                    best = Some(cert);
                }
            }
        }
        // Advance the base-3 counter.
        let mut i = 0;
        loop {
            if i == assignment.len() {
                return best;
            }
            assignment[i] += 1;
            if assignment[i] < 3 {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

/// Fiber heuristic: pull the widest-separated first coordinate out of every
/// multi-point fiber to the left, keep everything else right.
fn heuristic_well_aligned(
    relation: &FiniteRelation,
    orientation: Orientation,
) -> Option<WellAlignedCertificate> {
    let mut fibers: BTreeMap<PointId, Vec<PointId>> = BTreeMap::new();
    for &(s, t) in relation.pairs() {
        fibers.entry(t).or_default().push(s);
    }
    let space = relation.space();
    let mut left = BTreeSet::new();
    for (&t, firsts) in &fibers {
        if firsts.len() < 2 {
            continue;
        }
        let mut widest: Option<(Dist, PointId)> = None;
        for &s1 in firsts {
            for &s2 in firsts {
                let d = space.distance(s1, s2).clone();
                if widest.as_ref().map_or(true, |(w, _)| &d > w) {
                    widest = Some((d, s1));
                }
            }
        }
        left.insert((widest.unwrap().1, t));
    }
    if left.is_empty() {
        return None;
    }
    let right: BTreeSet<(PointId, PointId)> = relation
        .pairs()
        .iter()
        .copied()
        .filter(|p| !left.contains(p))
        .collect();
    if right.is_empty() {
        return None;
    }
    validate_alignment(relation, orientation, &left, &right)
}

/// Check all four alignment conditions for one (left, right) choice.
fn validate_alignment(
    relation: &FiniteRelation,
    orientation: Orientation,
    left: &BTreeSet<(PointId, PointId)>,
    right: &BTreeSet<(PointId, PointId)>,
) -> Option<WellAlignedCertificate> {
    let space = relation.space();
    let p1 = |set: &BTreeSet<(PointId, PointId)>| -> BTreeSet<PointId> {
        set.iter().map(|&(s, _)| s).collect()
    };
    let p2 = |set: &BTreeSet<(PointId, PointId)>| -> BTreeSet<PointId> {
        set.iter().map(|&(_, t)| t).collect()
    };
    // (1) Shared fibers exist.
    let shared: BTreeSet<PointId> = p2(left).intersection(&p2(right)).copied().collect();
    if shared.is_empty() {
        return None;
    }
    // (2) Every shared fiber carries a separated pair; ε is the least of
    // the best per-fiber separations.
    let mut epsilon: Option<Dist> = None;
    for &t in &shared {
        let lefts: Vec<PointId> = left
            .iter()
            .filter(|&&(_, b)| b == t)
            .map(|&(s, _)| s)
            .collect();
        let rights: Vec<PointId> = right
            .iter()
            .filter(|&&(_, b)| b == t)
            .map(|&(s, _)| s)
            .collect();
        let best = lefts
            .iter()
            .flat_map(|&l| rights.iter().map(move |&r| space.distance(l, r).clone()))
            .max()?;
        if best.is_zero() {
            return None;
        }
        if epsilon.as_ref().map_or(true, |e| &best < e) {
            epsilon = Some(best);
        }
    }
    let epsilon = epsilon?;
    // (3) First projections fall back into the covered seconds.
    let covered: BTreeSet<PointId> = p2(left).union(&p2(right)).copied().collect();
    let firsts: BTreeSet<PointId> = p1(left).union(&p1(right)).copied().collect();
    if !firsts.is_subset(&covered) {
        return None;
    }
    // (4) Every covered point walks back into the shared fibers in at
    // least one and a uniformly bounded number of steps.
    let mut reach = BTreeMap::new();
    let mut bound_n = 0usize;
    for &t in &covered {
        let walk = shortest_walk_into(relation, t, &shared)?;
        bound_n = bound_n.max(walk.len());
        reach.insert(t, walk);
    }
    Some(WellAlignedCertificate {
        orientation,
        left: left.clone(),
        right: right.clone(),
        epsilon,
        bound_n,
        reach,
    })
}

/// Lexicographically smallest shortest walk of at least one step from
/// `start` into `targets`.
fn shortest_walk_into(
    relation: &FiniteRelation,
    start: PointId,
    targets: &BTreeSet<PointId>,
) -> Option<Walk> {
    let n = relation.space().len();
    let mut frontier = BTreeSet::from([start]);
    for step in 1..=n + 1 {
        let mut next = BTreeSet::new();
        for &u in &frontier {
            next.extend(relation.successors(u).iter().copied());
        }
        if next.iter().any(|v| targets.contains(v)) {
            let co = coreach_sets(relation, targets, step);
            let mut coords = vec![start];
            for s in (0..step).rev() {
                let cur = *coords.last().unwrap();
                let next_pt = relation
                    .successors(cur)
                    .iter()
                    .copied()
                    .find(|v| co[s].contains(v))?;
                coords.push(next_pt);
            }
            return Some(relation.walk(coords).expect("BFS walk follows edges"));
        }
        if next.is_empty() {
            return None;
        }
        frontier = next;
    }
    None
}

/// Explicit return family for the relation `{(x, y) : y = a x or y = x/b}`
/// on the unit interval.
#[derive(Debug, Clone)]
pub struct TwoLineReturn {
    /// Effective slope parameters after orienting so `a <= b`.
    pub a: BigRational,
    pub b: BigRational,
    /// Direct when the input already had `a <= b`; otherwise the
    /// certificate applies to the inverse relation.
    pub orientation: Orientation,
    /// Least integer with `b^m <= a`.
    pub m: usize,
    pub k: usize,
    /// `((1/a) - b) a b / 2`.
    pub epsilon: BigRational,
    /// The return interval `[a b, a]`.
    pub interval: (BigRational, BigRational),
}

/// One emitted walk pair for a sampled point of the return interval.
#[derive(Debug, Clone)]
pub struct TwoLineWalkPair {
    /// Walk taking the multiply-by-b branch first.
    pub lower: Vec<BigRational>,
    /// Walk taking the divide-by-a branch first.
    pub upper: Vec<BigRational>,
    /// Coordinate index (1-based) where the pair separates; always 2.
    pub separation_index: usize,
    pub separation: BigRational,
}

/// Build the two-line return template: `m` minimal with `b^m <= a`,
/// `k = m + 1`, `ε = ((1/a) - b) a b / 2`, returns on `[a b, a]`.
pub fn two_line_return(a: &BigRational, b: &BigRational) -> Result<TwoLineReturn> {
    let one = BigRational::one();
    for v in [a, b] {
        if !(v > &BigRational::zero() && v < &one) {
            return Err(Error::precondition(
                "two-line parameters must lie in (0, 1)",
            ));
        }
    }
    let (a_eff, b_eff, orientation) = if a <= b {
        (a.clone(), b.clone(), Orientation::Direct)
    } else {
        (b.clone(), a.clone(), Orientation::Inverse)
    };
    let mut m = 1usize;
    let mut power = b_eff.clone();
    while power > a_eff {
        power *= &b_eff;
        m += 1;
    }
    let epsilon = (one / &a_eff - &b_eff) * &a_eff * &b_eff / BigRational::from_integer(2.into());
    let interval = (&a_eff * &b_eff, a_eff.clone());
    Ok(TwoLineReturn {
        a: a_eff,
        b: b_eff,
        orientation,
        m,
        k: m + 1,
        epsilon,
        interval,
    })
}

impl TwoLineReturn {
    /// Emit and exactly verify the walk pair for a point of the interval.
    pub fn walk_pair(&self, x: &BigRational) -> Result<TwoLineWalkPair> {
        if x < &self.interval.0 || x > &self.interval.1 {
            return Err(Error::precondition(format!(
                "sample point must lie in the return interval [{}, {}]",
                self.interval.0, self.interval.1
            )));
        }
        let merge = &self.b / &self.a * x; // (b/a) x, shared third coordinate
        let mut lower = vec![x.clone(), &self.b * x, merge.clone()];
        let mut upper = vec![x.clone(), x / &self.a, merge.clone()];
        if merge > self.a {
            // Multiply by b until the walk re-enters the interval.
            let mut tail_val = merge;
            loop {
                tail_val = &tail_val * &self.b;
                lower.push(tail_val.clone());
                upper.push(tail_val.clone());
                if tail_val <= self.a {
                    break;
                }
            }
        }
        let separation = &upper[1] - &lower[1];
        let pair = TwoLineWalkPair {
            lower,
            upper,
            separation_index: 2,
            separation,
        };
        self.verify_pair(&pair)?;
        Ok(pair)
    }

    /// Exact verification: every step multiplies by b or divides by a, the
    /// endpoints lie in the return interval, and the separation strictly
    /// exceeds ε.
    fn verify_pair(&self, pair: &TwoLineWalkPair) -> Result<()> {
        let in_interval = |v: &BigRational| v >= &self.interval.0 && v <= &self.interval.1;
        for walk in [&pair.lower, &pair.upper] {
            for w in walk.windows(2) {
                let by_b = w[1] == &w[0] * &self.b;
                let by_inv_a = w[1] == &w[0] / &self.a;
                if !(by_b || by_inv_a) {
                    return Err(Error::Inconsistency(format!(
                        "step {} -> {} is neither multiplication by b nor division by a",
                        w[0], w[1]
                    )));
                }
            }
            if !in_interval(&walk[0]) || !in_interval(walk.last().unwrap()) {
                return Err(Error::Inconsistency(
                    "walk endpoints left the return interval".into(),
                ));
            }
        }
        if pair.separation <= self.epsilon {
            return Err(Error::Inconsistency(format!(
                "separation {} does not exceed epsilon {}",
                pair.separation, self.epsilon
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use crate::point_set::Metric;
    use std::sync::Arc;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn relation(labels: &[&str], pairs: &[(&str, &str)]) -> FiniteRelation {
        let sp = Arc::new(
            PointSet::new(
                labels
                    .iter()
                    .map(|l| (l.to_string(), vec![q(l)]))
                    .collect(),
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

    fn doubling() -> FiniteRelation {
        relation(
            &["0", "1/2", "1"],
            &[("0", "1/2"), ("0", "1"), ("1/2", "0"), ("1", "0")],
        )
    }

    fn identity3() -> FiniteRelation {
        relation(
            &["0", "1/2", "1"],
            &[("0", "0"), ("1/2", "1/2"), ("1", "1")],
        )
    }

    fn ids(g: &FiniteRelation, labels: &[&str]) -> BTreeSet<PointId> {
        labels
            .iter()
            .map(|l| g.space().lookup(l).unwrap())
            .collect()
    }

    fn walk_labels(g: &FiniteRelation, w: &Walk) -> String {
        w.labels(g.space()).join(",")
    }

    #[test]
    fn golden_five_step_return_on_one() {
        let g = golden();
        let set = ids(&g, &["1"]);
        let eps = Dist::Rational(q("1/2"));
        let found = find_return(&g, &set, 5, &eps).unwrap();
        let certs = found.certificates().expect("return exists");
        assert_eq!(certs.len(), 1);
        let c = &certs[0];
        assert_eq!((c.j, c.j_prime), (5, 3));
        let pair: BTreeSet<String> =
            [walk_labels(&g, &c.x), walk_labels(&g, &c.y)].into_iter().collect();
        let expected: BTreeSet<String> =
            ["1,0,1,0,1".to_string(), "1,0,0,0,1".to_string()].into_iter().collect();
        assert_eq!(pair, expected);
        c.validate(&g, &set).unwrap();
    }

    #[test]
    fn doubling_five_step_return_on_one() {
        let g = doubling();
        let set = ids(&g, &["1"]);
        let eps = Dist::Rational(q("1/4"));
        let found = find_return(&g, &set, 5, &eps).unwrap();
        let certs = found.certificates().expect("return exists");
        let c = &certs[0];
        assert_eq!((c.j, c.j_prime), (5, 3));
        assert_eq!(walk_labels(&g, &c.x), "1,0,1/2,0,1");
        assert_eq!(walk_labels(&g, &c.y), "1,0,1,0,1");
        c.validate(&g, &set).unwrap();
    }

    #[test]
    fn identity_has_no_return_for_any_quantized_epsilon() {
        let g = identity3();
        let all: BTreeSet<PointId> = g.space().ids().collect();
        for eps in quantized_epsilons(g.space()) {
            for k in 2..=12 {
                for set in [&all, &ids(&g, &["0"]), &ids(&g, &["0", "1"])] {
                    assert!(
                        !find_return(&g, set, k, &eps).unwrap().is_found(),
                        "unexpected return at k={k} eps={eps}"
                    );
                }
            }
        }
        assert!(find_any_return(&g).unwrap().is_none());
    }

    #[test]
    fn any_return_finds_smallest_k_on_golden() {
        let g = golden();
        let found = find_any_return(&g).unwrap().expect("return exists");
        assert_eq!(found.k, 3);
        assert_eq!(found.set, ids(&g, &["0"]));
        assert_eq!(found.epsilon, Dist::Rational(q("1/2")));
        let c = &found.certificates[0];
        assert_eq!(walk_labels(&g, &c.x), "0,0,0");
        assert_eq!(walk_labels(&g, &c.y), "0,1,0");
        assert_eq!((c.j, c.j_prime), (3, 2));
    }

    #[test]
    fn single_cycle_has_no_return() {
        let g = relation(&["0", "1"], &[("0", "1"), ("1", "0")]);
        assert!(find_any_return(&g).unwrap().is_none());
    }

    #[test]
    fn returns_are_monotone_in_k() {
        let g = golden();
        let set = ids(&g, &["0"]);
        let eps = Dist::Rational(q("1/2"));
        assert!(find_return(&g, &set, 3, &eps).unwrap().is_found());
        for k in 4..=10 {
            assert!(find_return(&g, &set, k, &eps).unwrap().is_found());
        }
    }

    #[test]
    fn bound_is_log_two_over_k() {
        let g = golden();
        let set = ids(&g, &["1"]);
        let eps = Dist::Rational(q("1/2"));
        let certs = find_return(&g, &set, 5, &eps)
            .unwrap()
            .certificates()
            .unwrap()
            .to_vec();
        let bound = return_entropy_bound(&g, &set, &certs).unwrap();
        assert!((bound - 0.13862943611198905).abs() < 1e-12);
        // A forged certificate fails re-validation.
        let mut bad = certs[0].clone();
        bad.j_prime = 2;
        assert!(return_entropy_bound(&g, &set, &[bad]).is_err());
    }

    #[test]
    fn cycle_pair_witnesses() {
        let g = golden();
        let cert = detect_cycle_pair(&g).expect("two cycles at vertex 0");
        assert_eq!(walk_labels(&g, &cert.x), "0,0");
        assert_eq!(walk_labels(&g, &cert.y), "0,1,0");
        assert_eq!(cert.j, 2);
        cert.validate(&g).unwrap();

        let d = doubling();
        let cert = detect_cycle_pair(&d).expect("two 2-cycles at vertex 0");
        assert_eq!(walk_labels(&d, &cert.x), "0,1/2,0");
        assert_eq!(walk_labels(&d, &cert.y), "0,1,0");
        assert_eq!(cert.j, 2);
        cert.validate(&d).unwrap();

        assert!(detect_cycle_pair(&relation(&["0", "1"], &[("0", "1"), ("1", "0")])).is_none());
        assert!(detect_cycle_pair(&identity3()).is_none());
    }

    #[test]
    fn box_condition_on_golden_walks() {
        let g = golden();
        let sp = g.space().clone();
        let id = |l: &str| sp.lookup(l).unwrap();
        let j = vec![g.walk(vec![id("0"), id("0"), id("0")]).unwrap()];
        let k = vec![g.walk(vec![id("0"), id("1"), id("0")]).unwrap()];
        match check_box_condition(&g, &j, &k, 3).unwrap() {
            BoxCheck::Satisfied { epsilon, set } => {
                assert_eq!(epsilon, Dist::Rational(q("1")));
                assert_eq!(set, ids(&g, &["0"]));
            }
            BoxCheck::Fails(f) => panic!("unexpected failure {f:?}"),
        }
        // J = K has separation zero.
        match check_box_condition(&g, &j, &j, 3).unwrap() {
            BoxCheck::Fails(BoxFailure::NotSeparated) => {}
            other => panic!("expected not-separated, got {other:?}"),
        }
        // Endpoint outside the shared firsts violates the inclusion.
        let j2 = vec![g.walk(vec![id("0"), id("0"), id("1")]).unwrap()];
        match check_box_condition(&g, &j2, &k, 3).unwrap() {
            BoxCheck::Fails(BoxFailure::ProjectionInclusion { violating }) => {
                assert_eq!(violating, "1");
            }
            other => panic!("expected inclusion failure, got {other:?}"),
        }
        // Length mismatch is an error, not a failure value.
        let short = vec![g.walk(vec![id("0"), id("0")]).unwrap()];
        assert!(check_box_condition(&g, &short, &k, 3).is_err());
    }

    #[test]
    fn well_aligned_example_certificate() {
        let g = relation(
            &["0", "3/4", "1"],
            &[("0", "1"), ("0", "3/4"), ("3/4", "0"), ("1", "0")],
        );
        let cert = detect_well_aligned(&g).expect("well-aligned sets exist");
        assert_eq!(cert.epsilon, Dist::Rational(q("1/4")));
        assert_eq!(cert.bound_n, 2);
        // The split separates 3/4 from 1 over the fiber above 0.
        let sp = g.space();
        let labels = |set: &BTreeSet<(PointId, PointId)>| -> BTreeSet<(String, String)> {
            set.iter()
                .map(|&(s, t)| (sp.label(s).to_string(), sp.label(t).to_string()))
                .collect()
        };
        let all: BTreeSet<(String, String)> =
            labels(&cert.left).union(&labels(&cert.right)).cloned().collect();
        assert_eq!(all.len(), 4);
        for (t, walk) in &cert.reach {
            assert_eq!(walk.first(), *t);
            assert!(walk.len() >= 1 && walk.len() <= cert.bound_n);
        }
    }

    #[test]
    fn well_aligned_none_on_identity() {
        assert!(detect_well_aligned(&identity3()).is_none());
    }

    #[test]
    fn well_aligned_on_golden_uses_the_zero_fiber() {
        let g = golden();
        let cert = detect_well_aligned(&g).expect("certificate exists");
        assert_eq!(cert.epsilon, Dist::Rational(q("1")));
        assert_eq!(cert.bound_n, 1);
        // Certificate implies a return with k = N + 2 at threshold eps/2.
        let covered: BTreeSet<PointId> = cert
            .left
            .union(&cert.right)
            .map(|&(_, t)| t)
            .collect();
        let base = match cert.orientation {
            Orientation::Direct => g.clone(),
            Orientation::Inverse => g.inverse(),
        };
        let res = find_return(&base, &covered, cert.bound_n + 2, &cert.epsilon.halve()).unwrap();
        assert!(res.is_found());
    }

    #[test]
    fn two_line_template_examples() {
        let t = two_line_return(&q("1/2"), &q("7/10")).unwrap();
        assert_eq!(t.orientation, Orientation::Direct);
        assert_eq!((t.m, t.k), (2, 3));
        assert_eq!(t.epsilon, q("91/400"));
        assert_eq!(t.interval, (q("7/20"), q("1/2")));

        // Sample x = 2/5 lands in the long branch with one extra step.
        let pair = t.walk_pair(&q("2/5")).unwrap();
        assert_eq!(
            pair.lower,
            vec![q("2/5"), q("7/25"), q("14/25"), q("49/125")]
        );
        assert_eq!(
            pair.upper,
            vec![q("2/5"), q("4/5"), q("14/25"), q("49/125")]
        );
        assert_eq!(pair.separation, q("13/25"));
        assert!(pair.separation > t.epsilon);

        // Equal slopes: m = 1, k = 2, eps = 3/16, short branch only.
        let t = two_line_return(&q("1/2"), &q("1/2")).unwrap();
        assert_eq!((t.m, t.k), (1, 2));
        assert_eq!(t.epsilon, q("3/16"));
        let pair = t.walk_pair(&q("3/8")).unwrap();
        assert_eq!(pair.lower, vec![q("3/8"), q("3/16"), q("3/8")]);
        assert_eq!(pair.upper, vec![q("3/8"), q("3/4"), q("3/8")]);
        assert_eq!(pair.separation, q("9/16"));

        // a > b transposes to the inverse relation.
        let t = two_line_return(&q("7/10"), &q("1/2")).unwrap();
        assert_eq!(t.orientation, Orientation::Inverse);
        assert_eq!((t.m, t.k), (2, 3));
        assert_eq!(t.interval, (q("7/20"), q("1/2")));

        assert!(two_line_return(&q("0"), &q("1/2")).is_err());
        assert!(two_line_return(&q("1/2"), &q("1")).is_err());
        let t = two_line_return(&q("1/2"), &q("7/10")).unwrap();
        assert!(t.walk_pair(&q("9/10")).is_err());
    }

    #[test]
    fn quantized_epsilon_set_is_distances_and_halves() {
        let g = doubling();
        let eps = quantized_epsilons(g.space());
        let expected: Vec<Dist> = ["1/4", "1/2", "1"]
            .iter()
            .map(|s| Dist::Rational(q(s)))
            .collect();
        assert_eq!(eps, expected);
    }
}
