//! Orbit-pair chaos predicates for the shift map and the machine check of
//! the four equivalent characterizations of positive entropy for finite
//! relations: positive entropy, existence of a (k,ε)-return, a cycle pair,
//! and uncountability of the infinite Mahavier product.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::entropy::{entropy_exact, EntropyReport};
use crate::error::{Error, Result};
use crate::exact::gcd_usize;
use crate::point_set::PointId;
use crate::relation::{FiniteRelation, SymbolicOrbit};
use crate::returns::{detect_cycle_pair, find_any_return, AnyReturn, CyclePairCertificate};

/// Classification of an orbit pair under the chosen product metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// Distance series has liminf 0 and limsup positive.
    #[serde(rename = "li-yorke")]
    LiYorke,
    /// Cesàro-averaged distance series has liminf 0 and limsup positive.
    #[serde(rename = "dc2")]
    Dc2,
    /// Distances tend to 0.
    #[serde(rename = "asymptotic")]
    Asymptotic,
    /// Distances stay bounded away from 0.
    #[serde(rename = "separated")]
    Separated,
    /// Reserved for identical orbits; the verdict operations reject those.
    #[serde(rename = "equal")]
    Equal,
}

/// Exact liminf/limsup data for an orbit pair.
#[derive(Debug, Clone)]
pub struct OrbitPairVerdict {
    pub liminf: BigRational,
    pub limsup: BigRational,
    /// Always true: eventually periodic orbits make the series exactly
    /// computable.
    pub exact: bool,
    pub classification: Classification,
}

/// Distance between shifted orbits in the weighted product metric
/// `d(σⁿx, σⁿy) = Σ_{i>=1} 2^{-i} min(ρ(x_{n+i}, y_{n+i}), 1)`, evaluated
/// exactly: the coordinate distances are eventually periodic, so the tail
/// collapses to a finite geometric sum.
pub fn orbit_metric(x: &SymbolicOrbit, y: &SymbolicOrbit, n: usize) -> Result<BigRational> {
    if !x.space().same_space(y.space()) {
        return Err(Error::SpaceMismatch);
    }
    let space = x.space();
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let coord = |i: usize| -> Result<BigRational> {
        let d = space.rational_distance(x.at(n + i), y.at(n + i))?;
        Ok(if d > one { one.clone() } else { d })
    };
    // Beyond both preperiods the joint coordinate sequence is periodic.
    let pre_abs = x.preperiod_len().max(y.preperiod_len());
    let pre = pre_abs.saturating_sub(n);
    let period = x.period_len() * y.period_len() / gcd_usize(x.period_len(), y.period_len());
    let mut sum = BigRational::zero();
    let mut weight = one.clone() / &two; // 2^{-i} for i = 1
    for i in 1..=pre {
        sum += &weight * coord(i)?;
        weight /= &two;
    }
    // Tail: one period of weights starting at i = pre + 1, repeated with
    // ratio 2^{-period}.
    let mut period_sum = BigRational::zero();
    for s in 1..=period {
        period_sum += &weight * coord(pre + s)?;
        weight /= &two;
    }
    let ratio = crate::exact::pow(&(one.clone() / &two), period as u32);
    sum += period_sum / (one - ratio);
    Ok(sum)
}

/// The joint regime of two orbits: distances `d(σⁿx, σⁿy)` repeat with this
/// period once `n` is at least the preperiod.
fn joint_regime(x: &SymbolicOrbit, y: &SymbolicOrbit) -> (usize, usize) {
    let pre = x.preperiod_len().max(y.preperiod_len());
    let period = x.period_len() * y.period_len() / gcd_usize(x.period_len(), y.period_len());
    (pre, period)
}

/// Li-Yorke verdict: liminf and limsup of the distance series, exact.
///
/// For eventually periodic orbits liminf 0 forces eventual tail equality,
/// so a distinct pair is never classified li-yorke; the branch exists for
/// completeness of the classification.
pub fn li_yorke_verdict(x: &SymbolicOrbit, y: &SymbolicOrbit) -> Result<OrbitPairVerdict> {
    if x == y {
        return Err(Error::precondition("orbit pair must be distinct"));
    }
    let (pre, period) = joint_regime(x, y);
    let mut liminf: Option<BigRational> = None;
    let mut limsup: Option<BigRational> = None;
    for n in pre..pre + period {
        let d = orbit_metric(x, y, n)?;
        if liminf.as_ref().map_or(true, |v| &d < v) {
            liminf = Some(d.clone());
        }
        if limsup.as_ref().map_or(true, |v| &d > v) {
            limsup = Some(d);
        }
    }
    let liminf = liminf.unwrap();
    let limsup = limsup.unwrap();
    let classification = classify(&liminf, &limsup, Classification::LiYorke);
    Ok(OrbitPairVerdict {
        liminf,
        limsup,
        exact: true,
        classification,
    })
}

/// DC2 verdict: liminf and limsup of the Cesàro averages
/// `(1/n) Σ_{i=1..n} d(σⁱx, σⁱy)`. Averages of an eventually periodic
/// series converge, so liminf = limsup = the period mean and a distinct
/// eventually periodic pair is never DC2.
pub fn dc2_verdict(x: &SymbolicOrbit, y: &SymbolicOrbit) -> Result<OrbitPairVerdict> {
    if x == y {
        return Err(Error::precondition("orbit pair must be distinct"));
    }
    let (pre, period) = joint_regime(x, y);
    let mut total = BigRational::zero();
    for n in pre..pre + period {
        total += orbit_metric(x, y, n)?;
    }
    let mean = total / BigRational::from_integer((period as i64).into());
    let classification = classify(&mean, &mean, Classification::Dc2);
    Ok(OrbitPairVerdict {
        liminf: mean.clone(),
        limsup: mean,
        exact: true,
        classification,
    })
}

fn classify(
    liminf: &BigRational,
    limsup: &BigRational,
    chaotic: Classification,
) -> Classification {
    if limsup.is_zero() {
        Classification::Asymptotic
    } else if liminf.is_zero() {
        chaotic
    } else {
        Classification::Separated
    }
}

/// Witness for uncountability: a vertex with two distinct successors that
/// both lead back to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchWitness {
    pub vertex: PointId,
    pub successors: (PointId, PointId),
}

/// Outcome of the uncountability decision.
#[derive(Debug, Clone)]
pub struct UncountabilityReport {
    pub uncountable: bool,
    pub branch: Option<BranchWitness>,
    /// On the countable side: the finite set B of orbits whose first
    /// coordinate recurs infinitely often. Every element of the infinite
    /// Mahavier product is a shift preimage of one of these, so the whole
    /// space is a countable union of finite sets.
    pub basis: Option<Vec<SymbolicOrbit>>,
}

/// Decide whether the infinite Mahavier product is uncountable.
///
/// Decided structurally, by a different route than the cycle-pair search:
/// reachability closures. The space is uncountable exactly when some vertex
/// has two distinct successors that can both walk back to it (binary
/// choices can then be made infinitely often); otherwise every recurrent
/// point determines a unique returning orbit and the basis B enumerates the
/// space up to shift preimages.
pub fn uncountability_test(relation: &FiniteRelation) -> Result<UncountabilityReport> {
    if !relation.domain_condition_holds() {
        return Err(Error::precondition(
            "uncountability test requires p1(G) ⊆ p2(G)",
        ));
    }
    let space = relation.space();
    let reaches = reachability_closures(relation);
    // Branch test: v with two successors returning to v.
    for v in space.ids() {
        let returning: Vec<PointId> = relation
            .successors(v)
            .iter()
            .copied()
            .filter(|&u| reaches[u.index()].contains(&v))
            .collect();
        if returning.len() >= 2 {
            return Ok(UncountabilityReport {
                uncountable: true,
                branch: Some(BranchWitness {
                    vertex: v,
                    successors: (returning[0], returning[1]),
                }),
                basis: None,
            });
        }
    }
    // Countable side: each recurrent vertex has exactly one returning
    // successor, so following it around the cycle is forced.
    let mut basis = Vec::new();
    for a in space.ids() {
        let returning: Vec<PointId> = relation
            .successors(a)
            .iter()
            .copied()
            .filter(|&u| reaches[u.index()].contains(&a))
            .collect();
        if returning.is_empty() {
            continue; // not recurrent
        }
        debug_assert_eq!(returning.len(), 1);
        let mut cycle = vec![a];
        let mut cur = returning[0];
        while cur != a {
            cycle.push(cur);
            let next = relation
                .successors(cur)
                .iter()
                .copied()
                .filter(|&u| reaches[u.index()].contains(&a))
                .collect::<Vec<_>>();
            debug_assert_eq!(next.len(), 1);
            cur = next[0];
        }
        basis.push(relation.orbit(Vec::new(), cycle)?);
    }
    Ok(UncountabilityReport {
        uncountable: false,
        branch: None,
        basis: Some(basis),
    })
}

/// Forward reachability closure of every vertex (at least one step).
fn reachability_closures(relation: &FiniteRelation) -> Vec<BTreeSet<PointId>> {
    let n = relation.space().len();
    let mut closures: Vec<BTreeSet<PointId>> = Vec::with_capacity(n);
    for start in relation.space().ids() {
        let mut seen: BTreeSet<PointId> =
            relation.successors(start).iter().copied().collect();
        let mut frontier: Vec<PointId> = seen.iter().copied().collect();
        while let Some(u) = frontier.pop() {
            for &v in relation.successors(u) {
                if seen.insert(v) {
                    frontier.push(v);
                }
            }
        }
        closures.push(seen);
    }
    closures
}

/// The four independently computed conditions and their certificates.
#[derive(Debug)]
pub struct EquivalenceReport {
    pub entropy_positive: bool,
    pub return_exists: bool,
    pub cycle_pair: bool,
    pub uncountable: bool,
    pub entropy: EntropyReport,
    pub any_return: Option<AnyReturn>,
    pub cycle: Option<CyclePairCertificate>,
    pub uncountability: UncountabilityReport,
    /// Derived system-level flag: for finite relations, Li-Yorke chaos of
    /// the shift map is equivalent to positive entropy.
    pub li_yorke_chaotic: bool,
}

impl EquivalenceReport {
    pub fn all_agree(&self) -> bool {
        self.entropy_positive == self.return_exists
            && self.return_exists == self.cycle_pair
            && self.cycle_pair == self.uncountable
    }
}

/// Evaluate the four conditions with four independent algorithms and fail
/// loudly if they ever disagree: (1) the Perron enclosure with structural
/// zero test, (2) the return search, (3) the cycle-pair search, (4) the
/// reachability-based uncountability decision.
pub fn equivalence_report(relation: &FiniteRelation) -> Result<EquivalenceReport> {
    if !relation.domain_condition_holds() {
        return Err(Error::precondition(
            "equivalence check requires p1(G) ⊆ p2(G)",
        ));
    }
    let entropy = entropy_exact(relation);
    let entropy_positive = entropy.value > 0.0;
    if entropy_positive && entropy.lower <= 0.0 {
        return Err(Error::Inconsistency(
            "positive entropy without a positive certified lower bound".into(),
        ));
    }
    let any_return = find_any_return(relation)?;
    let return_exists = any_return.is_some();
    let cycle = detect_cycle_pair(relation);
    if let Some(cert) = &cycle {
        cert.validate(relation)?;
    }
    let cycle_pair = cycle.is_some();
    let uncountability = uncountability_test(relation)?;
    let uncountable = uncountability.uncountable;
    let report = EquivalenceReport {
        entropy_positive,
        return_exists,
        cycle_pair,
        uncountable,
        entropy,
        any_return,
        cycle,
        uncountability,
        li_yorke_chaotic: entropy_positive,
    };
    if !report.all_agree() {
        return Err(Error::Inconsistency(format!(
            "conditions disagree: entropy_positive={} return_exists={} cycle_pair={} uncountable={}",
            report.entropy_positive, report.return_exists, report.cycle_pair, report.uncountable
        )));
    }
    Ok(report)
}

/// The fiber witnesses that positive entropy forces: two pairs sharing
/// their first coordinate with different seconds, and two sharing their
/// second with different firsts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionWitnesses {
    pub s: ((PointId, PointId), (PointId, PointId)),
    pub t: ((PointId, PointId), (PointId, PointId)),
}

/// Extract projection witnesses from cycle pairs, reading off the relation
/// pair at the first disagreement index. Returns nothing for zero-entropy
/// relations.
pub fn projection_pair_witnesses(relation: &FiniteRelation) -> Option<ProjectionWitnesses> {
    // Walk steps are inverse-relation pairs, so the direct cycle pair
    // yields the shared-second witnesses and the inverse cycle pair the
    // shared-first ones.
    let direct = detect_cycle_pair(relation)?;
    let inverse = detect_cycle_pair(&relation.inverse())?;
    let first_disagreement = |x: &crate::relation::Walk, y: &crate::relation::Walk| -> usize {
        let max = x.coords().len().min(y.coords().len());
        (2..=max)
            .find(|&i| x.project(i).unwrap() != y.project(i).unwrap())
            .expect("cycle pair walks disagree")
    };
    let j = first_disagreement(&direct.x, &direct.y);
    let t = (
        (
            direct.x.project(j).unwrap(),
            direct.x.project(j - 1).unwrap(),
        ),
        (
            direct.y.project(j).unwrap(),
            direct.y.project(j - 1).unwrap(),
        ),
    );
    let j = first_disagreement(&inverse.x, &inverse.y);
    let s = (
        (
            inverse.x.project(j - 1).unwrap(),
            inverse.x.project(j).unwrap(),
        ),
        (
            inverse.y.project(j - 1).unwrap(),
            inverse.y.project(j).unwrap(),
        ),
    );
    debug_assert!(relation.contains(s.0) && relation.contains(s.1));
    debug_assert!(relation.contains(t.0) && relation.contains(t.1));
    Some(ProjectionWitnesses { s, t })
}

/// Summary of an agreement sweep over many relations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepOutcome {
    /// Relations generated.
    pub total: usize,
    /// Relations satisfying the domain condition and hence checked.
    pub checked: usize,
    pub disagreements: usize,
}

/// Check the four-way agreement over every relation on an evenly spaced
/// point set: all `2^(p*p)` pair subsets, filtered by the domain condition.
pub fn exhaustive_sweep(points: usize) -> Result<SweepOutcome> {
    if points == 0 || points > 3 {
        return Err(Error::precondition(
            "exhaustive sweep supports 1 to 3 points",
        ));
    }
    let space = crate::fixtures::evenly_spaced_space(points);
    let ids: Vec<PointId> = space.ids().collect();
    let all_pairs: Vec<(PointId, PointId)> = ids
        .iter()
        .flat_map(|&a| ids.iter().map(move |&b| (a, b)))
        .collect();
    let mut outcome = SweepOutcome {
        total: 0,
        checked: 0,
        disagreements: 0,
    };
    for mask in 0u64..(1 << all_pairs.len()) {
        outcome.total += 1;
        let pairs: BTreeSet<(PointId, PointId)> = all_pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &p)| p)
            .collect();
        let relation = FiniteRelation::new(space.clone(), pairs)?;
        if !relation.domain_condition_holds() {
            continue;
        }
        outcome.checked += 1;
        match equivalence_report(&relation) {
            Ok(_) => {}
            Err(Error::Inconsistency(_)) => outcome.disagreements += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(outcome)
}

/// Agreement sweep over seeded random relations on up to `points` points.
pub fn random_sweep(points: usize, count: usize, seed: u64) -> Result<SweepOutcome> {
    if points == 0 || points > 8 {
        return Err(Error::precondition("random sweep supports 1 to 8 points"));
    }
    let mut rng = crate::fixtures::SplitMix64::new(seed);
    let mut outcome = SweepOutcome {
        total: 0,
        checked: 0,
        disagreements: 0,
    };
    for _ in 0..count {
        outcome.total += 1;
        let relation = crate::fixtures::random_relation(&mut rng, points);
        if !relation.domain_condition_holds() {
            continue;
        }
        outcome.checked += 1;
        match equivalence_report(&relation) {
            Ok(_) => {}
            Err(Error::Inconsistency(_)) => outcome.disagreements += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(outcome)
}

/// Map a label list to ids on a relation's space.
pub fn label_set(relation: &FiniteRelation, labels: &[&str]) -> Result<BTreeSet<PointId>> {
    let mut out = BTreeSet::new();
    for l in labels {
        let id = relation
            .space()
            .lookup(l)
            .ok_or_else(|| Error::schema("set", format!("unknown point id {l:?}")))?;
        out.insert(id);
    }
    Ok(out)
}

/// The countable-basis bookkeeping used by callers rendering reports.
pub fn basis_summary(report: &UncountabilityReport) -> Option<BTreeMap<String, usize>> {
    report.basis.as_ref().map(|basis| {
        let mut m = BTreeMap::new();
        m.insert("orbits".to_string(), basis.len());
        m
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;
    use crate::point_set::{Metric, PointSet};
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

    /// Full relation on {0, 1}: both orbits of any binary sequence exist.
    fn full_shift() -> FiniteRelation {
        relation(
            &["0", "1"],
            &[("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")],
        )
    }

    fn golden() -> FiniteRelation {
        relation(&["0", "1"], &[("0", "0"), ("0", "1"), ("1", "0")])
    }

    fn orbit(g: &FiniteRelation, pre: &[&str], per: &[&str]) -> SymbolicOrbit {
        let id = |l: &str| g.space().lookup(l).unwrap();
        g.orbit(
            pre.iter().map(|l| id(l)).collect(),
            per.iter().map(|l| id(l)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn orbit_metric_geometric_sums() {
        let g = full_shift();
        let zeros = orbit(&g, &[], &["0"]);
        let alt = orbit(&g, &[], &["1", "0"]);
        // d = sum over odd i of 2^{-i} = 2/3, shifted: 1/3.
        assert_eq!(orbit_metric(&zeros, &alt, 0).unwrap(), q("2/3"));
        assert_eq!(orbit_metric(&zeros, &alt, 1).unwrap(), q("1/3"));
        assert_eq!(orbit_metric(&zeros, &zeros, 5).unwrap(), q("0"));
    }

    #[test]
    fn orbit_metric_caps_coordinate_distances() {
        // Distances above 1 clamp to 1 in the product metric.
        let g = relation(&["0", "2"], &[("0", "2"), ("2", "0"), ("0", "0"), ("2", "2")]);
        let zeros = orbit(&g, &[], &["0"]);
        let twos = orbit(&g, &[], &["2"]);
        assert_eq!(orbit_metric(&zeros, &twos, 0).unwrap(), q("1"));
    }

    #[test]
    fn orbit_metric_rejects_different_spaces() {
        let g1 = full_shift();
        let g2 = golden();
        let a = orbit(&g1, &[], &["0"]);
        let b = orbit(&g2, &[], &["0"]);
        // Same labels and coords: structurally the same space, fine.
        assert!(orbit_metric(&a, &b, 0).is_ok());
        let g3 = relation(&["0", "1/2"], &[("0", "0"), ("1/2", "1/2")]);
        let c = orbit(&g3, &[], &["0"]);
        assert!(matches!(
            orbit_metric(&a, &c, 0),
            Err(Error::SpaceMismatch)
        ));
    }

    #[test]
    fn li_yorke_verdicts() {
        let g = full_shift();
        let zeros = orbit(&g, &[], &["0"]);
        let ones = orbit(&g, &[], &["1"]);
        let alt = orbit(&g, &[], &["0", "1"]);

        // Distinct fixed points stay at capped distance 1.
        let v = li_yorke_verdict(&zeros, &ones).unwrap();
        assert_eq!((v.liminf.clone(), v.limsup.clone()), (q("1"), q("1")));
        assert_eq!(v.classification, Classification::Separated);

        // Constant vs alternating oscillates between 1/3 and 2/3.
        let v = li_yorke_verdict(&zeros, &alt).unwrap();
        assert_eq!((v.liminf.clone(), v.limsup.clone()), (q("1/3"), q("2/3")));
        assert_eq!(v.classification, Classification::Separated);

        // Merging tails are asymptotic.
        let merging = orbit(&g, &["1"], &["0"]);
        let v = li_yorke_verdict(&merging, &zeros).unwrap();
        assert_eq!((v.liminf.clone(), v.limsup.clone()), (q("0"), q("0")));
        assert_eq!(v.classification, Classification::Asymptotic);

        // Identical orbits are rejected.
        assert!(li_yorke_verdict(&zeros, &zeros).is_err());
        let same = orbit(&g, &["0", "0"], &["0"]);
        assert!(li_yorke_verdict(&zeros, &same).is_err());
    }

    #[test]
    fn dc2_verdicts() {
        let g = full_shift();
        let zeros = orbit(&g, &[], &["0"]);
        let ones = orbit(&g, &[], &["1"]);
        let alt = orbit(&g, &[], &["0", "1"]);

        let v = dc2_verdict(&zeros, &alt).unwrap();
        assert_eq!((v.liminf.clone(), v.limsup.clone()), (q("1/2"), q("1/2")));
        assert_eq!(v.classification, Classification::Separated);

        let merging = orbit(&g, &["1"], &["0"]);
        let v = dc2_verdict(&merging, &zeros).unwrap();
        assert_eq!(v.limsup, q("0"));
        assert_eq!(v.classification, Classification::Asymptotic);

        let v = dc2_verdict(&zeros, &ones).unwrap();
        assert_eq!(v.liminf, q("1"));
        assert_eq!(v.classification, Classification::Separated);
    }

    #[test]
    fn uncountability_branches_on_golden() {
        let g = golden();
        let report = uncountability_test(&g).unwrap();
        assert!(report.uncountable);
        let branch = report.branch.unwrap();
        assert_eq!(g.space().label(branch.vertex), "0");
        assert!(report.basis.is_none());
    }

    #[test]
    fn uncountability_basis_on_cycles() {
        let cycle = relation(&["0", "1"], &[("0", "1"), ("1", "0")]);
        let report = uncountability_test(&cycle).unwrap();
        assert!(!report.uncountable);
        assert_eq!(report.basis.as_ref().unwrap().len(), 2);

        let identity = relation(
            &["0", "1/2", "1"],
            &[("0", "0"), ("1/2", "1/2"), ("1", "1")],
        );
        let report = uncountability_test(&identity).unwrap();
        assert!(!report.uncountable);
        assert_eq!(report.basis.as_ref().unwrap().len(), 3);

        // Hypotheses are enforced.
        let bad = relation(&["0", "1"], &[("0", "1")]);
        assert!(uncountability_test(&bad).is_err());
    }

    #[test]
    fn equivalence_reports() {
        let report = equivalence_report(&golden()).unwrap();
        assert!(report.all_agree());
        assert!(report.entropy_positive);
        assert_eq!(report.any_return.as_ref().unwrap().k, 3);
        assert_eq!(report.cycle.as_ref().unwrap().j, 2);
        assert!(report.li_yorke_chaotic);

        let report = equivalence_report(&relation(&["0", "1"], &[("0", "1"), ("1", "0")])).unwrap();
        assert!(report.all_agree());
        assert!(!report.entropy_positive);
        assert!(!report.li_yorke_chaotic);

        let empty = relation(&["0", "1"], &[]);
        let report = equivalence_report(&empty).unwrap();
        assert!(!report.entropy_positive && report.all_agree());
    }

    #[test]
    fn projection_witness_examples() {
        let g = golden();
        let sp = g.space();
        let lbl = |p: (PointId, PointId)| (sp.label(p.0).to_string(), sp.label(p.1).to_string());
        let w = projection_pair_witnesses(&g).unwrap();
        assert_eq!(lbl(w.s.0), ("0".into(), "0".into()));
        assert_eq!(lbl(w.s.1), ("0".into(), "1".into()));
        assert_eq!(lbl(w.t.0), ("0".into(), "0".into()));
        assert_eq!(lbl(w.t.1), ("1".into(), "0".into()));

        let d = relation(
            &["0", "1/2", "1"],
            &[("0", "1/2"), ("0", "1"), ("1/2", "0"), ("1", "0")],
        );
        let sp = d.space();
        let lbl = |p: (PointId, PointId)| (sp.label(p.0).to_string(), sp.label(p.1).to_string());
        let w = projection_pair_witnesses(&d).unwrap();
        assert_eq!(lbl(w.s.0), ("0".into(), "1/2".into()));
        assert_eq!(lbl(w.s.1), ("0".into(), "1".into()));
        assert_eq!(lbl(w.t.0), ("1/2".into(), "0".into()));
        assert_eq!(lbl(w.t.1), ("1".into(), "0".into()));

        assert!(projection_pair_witnesses(&relation(&["0", "1"], &[("0", "1"), ("1", "0")]))
            .is_none());
    }

    #[test]
    fn two_point_sweep_has_no_disagreements() {
        let outcome = exhaustive_sweep(2).unwrap();
        assert_eq!(outcome.total, 16);
        assert_eq!(outcome.disagreements, 0);
        assert!(outcome.checked >= 7);
    }
}
