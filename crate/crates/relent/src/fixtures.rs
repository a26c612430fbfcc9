//! Built-in fixtures: the worked examples every test and demo runs on,
//! each carrying its expected-results record, plus deterministic random
//! relation generators for property sweeps.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational};
use crate::grid::{grid_from_piecewise_linear, GridRelation, Segment};
use crate::point_set::{Metric, PointSet};
use crate::relation::FiniteRelation;

/// Identifiers for the built-in fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureId {
    /// Golden-mean relation {(0,0),(0,1),(1,0)} on {0,1}.
    Ex11,
    /// Period-doubling relation {(0,1/2),(0,1),(1/2,0),(1,0)} on {0,1/2,1}.
    Ex13,
    /// Identity relation on {0,1/2,1}; no returns, zero entropy.
    Ex12Identity3pt,
    /// Tent-map graph rasterized to a grid (default resolution 64).
    Ex1TentGrid,
    /// Two-line family with a = 1/2, b = 7/10.
    Ex2TwoLine,
    /// Well-aligned example {(0,1),(0,3/4),(3/4,0),(1,0)}.
    WellAlignedEx,
    /// Finite truncation of the halving relation: every positive point may
    /// step to its half or its quarter (default depth 8).
    FinalCountableTrunc,
    /// Full relation on {0,1}; entropy log 2.
    Full2pt,
    /// Single 2-cycle {(0,1),(1,0)}; zero entropy.
    Cycle2,
}

impl FixtureId {
    pub const ALL: [FixtureId; 9] = [
        FixtureId::Ex11,
        FixtureId::Ex13,
        FixtureId::Ex12Identity3pt,
        FixtureId::Ex1TentGrid,
        FixtureId::Ex2TwoLine,
        FixtureId::WellAlignedEx,
        FixtureId::FinalCountableTrunc,
        FixtureId::Full2pt,
        FixtureId::Cycle2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FixtureId::Ex11 => "ex11",
            FixtureId::Ex13 => "ex13",
            FixtureId::Ex12Identity3pt => "ex12-identity-3pt",
            FixtureId::Ex1TentGrid => "ex1-tent-grid",
            FixtureId::Ex2TwoLine => "ex2-two-line",
            FixtureId::WellAlignedEx => "well-aligned-ex",
            FixtureId::FinalCountableTrunc => "final-countable-trunc",
            FixtureId::Full2pt => "full-2pt",
            FixtureId::Cycle2 => "cycle-2",
        }
    }
}

impl FromStr for FixtureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<FixtureId> {
        FixtureId::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::schema(
                    "fixture",
                    format!(
                        "unknown fixture {s:?}; available: {}",
                        FixtureId::ALL.map(|f| f.name()).join(", ")
                    ),
                )
            })
    }
}

/// The object a fixture materializes.
#[derive(Debug, Clone)]
pub enum FixtureObject {
    Relation(FiniteRelation),
    Grid(GridRelation),
    TwoLine { a: BigRational, b: BigRational },
}

/// Expected entropy value for a fixture.
#[derive(Debug, Clone, Copy)]
pub enum ExpectedEntropy {
    /// Structurally zero, bit-exact.
    ExactlyZero,
    /// Within `tolerance` of `value`.
    Approx { value: f64, tolerance: f64 },
}

/// The pinned expectations driving the acceptance harness.
#[derive(Debug, Clone, Default)]
pub struct Expected {
    pub entropy: Option<ExpectedEntropy>,
    /// A known (set, k, ε) return: labels of the set, depth, threshold.
    pub known_return: Option<(Vec<String>, usize, String)>,
    /// The entropy lower bound log(2)/k implied by the known return.
    pub entropy_bound: Option<f64>,
    /// Fixture has no return for any k up to this bound over the quantized
    /// thresholds.
    pub return_free_up_to: Option<usize>,
    /// Expected well-aligned certificate (ε, N).
    pub well_aligned: Option<(String, usize)>,
    /// Two-line template values (m, k, ε).
    pub two_line: Option<(usize, usize, String)>,
    /// Grid limit estimate must land in this closed interval.
    pub grid_estimate_range: Option<(f64, f64)>,
}

/// A materialized fixture with its expectations.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: FixtureId,
    pub object: FixtureObject,
    pub expected: Expected,
}

/// Size knobs for the parametric fixtures.
#[derive(Debug, Clone, Copy)]
pub struct FixtureParams {
    /// Grid resolution for `ex1-tent-grid`.
    pub grid_n: usize,
    /// Truncation depth for `final-countable-trunc`.
    pub depth: usize,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            grid_n: 64,
            depth: 8,
        }
    }
}

pub fn fixture(id: FixtureId) -> Fixture {
    fixture_with(id, FixtureParams::default())
}

pub fn fixture_with(id: FixtureId, params: FixtureParams) -> Fixture {
    match id {
        FixtureId::Ex11 => Fixture {
            id,
            object: FixtureObject::Relation(relation_from_labels(
                &["0", "1"],
                &[("0", "0"), ("0", "1"), ("1", "0")],
            )),
            expected: Expected {
                // log((1 + sqrt 5) / 2)
                entropy: Some(ExpectedEntropy::Approx {
                    value: 0.4812118250596035,
                    tolerance: 1e-9,
                }),
                known_return: Some((vec!["1".into()], 5, "1/2".into())),
                entropy_bound: Some(std::f64::consts::LN_2 / 5.0),
                ..Expected::default()
            },
        },
        FixtureId::Ex13 => Fixture {
            id,
            object: FixtureObject::Relation(relation_from_labels(
                &["0", "1/2", "1"],
                &[("0", "1/2"), ("0", "1"), ("1/2", "0"), ("1", "0")],
            )),
            expected: Expected {
                entropy: Some(ExpectedEntropy::Approx {
                    value: 0.5 * std::f64::consts::LN_2,
                    tolerance: 1e-9,
                }),
                known_return: Some((vec!["1".into()], 5, "1/4".into())),
                entropy_bound: Some(std::f64::consts::LN_2 / 5.0),
                ..Expected::default()
            },
        },
        FixtureId::Ex12Identity3pt => Fixture {
            id,
            object: FixtureObject::Relation(relation_from_labels(
                &["0", "1/2", "1"],
                &[("0", "0"), ("1/2", "1/2"), ("1", "1")],
            )),
            expected: Expected {
                entropy: Some(ExpectedEntropy::ExactlyZero),
                return_free_up_to: Some(12),
                ..Expected::default()
            },
        },
        FixtureId::Ex1TentGrid => Fixture {
            id,
            object: FixtureObject::Grid(tent_grid(params.grid_n)),
            expected: Expected {
                grid_estimate_range: Some((
                    std::f64::consts::LN_2 - 1e-9,
                    std::f64::consts::LN_2 + 0.2,
                )),
                ..Expected::default()
            },
        },
        FixtureId::Ex2TwoLine => Fixture {
            id,
            object: FixtureObject::TwoLine {
                a: parse_rational("1/2").unwrap(),
                b: parse_rational("7/10").unwrap(),
            },
            expected: Expected {
                two_line: Some((2, 3, "91/400".into())),
                ..Expected::default()
            },
        },
        FixtureId::WellAlignedEx => Fixture {
            id,
            object: FixtureObject::Relation(relation_from_labels(
                &["0", "3/4", "1"],
                &[("0", "1"), ("0", "3/4"), ("3/4", "0"), ("1", "0")],
            )),
            expected: Expected {
                well_aligned: Some(("1/4".into(), 2)),
                entropy: Some(ExpectedEntropy::Approx {
                    // Perron root of x^2 = x + 1 on the 2-step graph is
                    // the golden ratio again: two 2-cycles sharing 0.
                    value: 0.4812118250596035,
                    tolerance: 1e-9,
                }),
                ..Expected::default()
            },
        },
        FixtureId::FinalCountableTrunc => Fixture {
            id,
            object: FixtureObject::Relation(countable_truncation(params.depth)),
            expected: Expected {
                entropy: Some(ExpectedEntropy::ExactlyZero),
                ..Expected::default()
            },
        },
        FixtureId::Full2pt => Fixture {
            id,
            object: FixtureObject::Relation(relation_from_labels(
                &["0", "1"],
                &[("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")],
            )),
            expected: Expected {
                entropy: Some(ExpectedEntropy::Approx {
                    value: std::f64::consts::LN_2,
                    tolerance: 1e-9,
                }),
                known_return: Some((vec!["0".into(), "1".into()], 2, "1/2".into())),
                entropy_bound: Some(std::f64::consts::LN_2 / 2.0),
                ..Expected::default()
            },
        },
        FixtureId::Cycle2 => Fixture {
            id,
            object: FixtureObject::Relation(relation_from_labels(
                &["0", "1"],
                &[("0", "1"), ("1", "0")],
            )),
            expected: Expected {
                entropy: Some(ExpectedEntropy::ExactlyZero),
                return_free_up_to: Some(12),
                ..Expected::default()
            },
        },
    }
}

fn relation_from_labels(labels: &[&str], pairs: &[(&str, &str)]) -> FiniteRelation {
    let space = Arc::new(
        PointSet::new(
            labels
                .iter()
                .map(|l| (l.to_string(), vec![parse_rational(l).unwrap()]))
                .collect(),
            Metric::AbsDiff1d,
        )
        .expect("fixture space is valid"),
    );
    let set: BTreeSet<_> = pairs
        .iter()
        .map(|&(a, b)| (space.lookup(a).unwrap(), space.lookup(b).unwrap()))
        .collect();
    FiniteRelation::new(space, set).expect("fixture relation is valid")
}

/// The tent-map graph (peak at (1/2, 1)) rasterized at resolution n.
pub fn tent_grid(n: usize) -> GridRelation {
    let q = |s: &str| parse_rational(s).unwrap();
    let segments = vec![
        Segment::new((q("0"), q("0")), (q("1/2"), q("1"))).unwrap(),
        Segment::new((q("1/2"), q("1")), (q("1"), q("0"))).unwrap(),
    ];
    grid_from_piecewise_linear(&segments, n).expect("tent rasterizes")
}

/// Truncation of the halving relation at depth `d`: points `2^-i` for
/// `i <= d` plus 0; every point may step to its half or quarter while they
/// remain in range, and 0 is fixed. Walk counts branch like Fibonacci
/// numbers, yet the transition graph is acyclic away from the fixed point,
/// so entropy is structurally zero at every finite depth.
pub fn countable_truncation(depth: usize) -> FiniteRelation {
    let mut points: Vec<(String, Vec<BigRational>)> =
        vec![("0".to_string(), vec![BigRational::from_integer(0.into())])];
    let half = parse_rational("1/2").unwrap();
    let mut value = BigRational::from_integer(1.into());
    let mut powers = Vec::new(); // 2^0, 2^-1, ..., 2^-depth
    for _ in 0..=depth {
        powers.push(value.clone());
        value *= &half;
    }
    for v in powers.iter().rev() {
        points.push((format_rational(v), vec![v.clone()]));
    }
    let space = Arc::new(PointSet::new(points, Metric::AbsDiff1d).expect("distinct powers"));
    let mut pairs = BTreeSet::new();
    let zero = space.lookup("0").unwrap();
    pairs.insert((zero, zero));
    for (i, v) in powers.iter().enumerate() {
        let from = space.lookup(&format_rational(v)).unwrap();
        for step in [1usize, 2] {
            if i + step < powers.len() {
                let to = space.lookup(&format_rational(&powers[i + step])).unwrap();
                // Pair (half-or-quarter, source): the walk direction steps
                // downward from each point.
                pairs.insert((to, from));
            }
        }
    }
    FiniteRelation::new(space, pairs).expect("truncation is valid")
}

/// Evenly spaced labeled points `i/(p-1)` on the unit interval.
pub fn evenly_spaced_space(points: usize) -> Arc<PointSet> {
    assert!(points >= 1);
    let mut labeled = Vec::with_capacity(points);
    if points == 1 {
        labeled.push(("0".to_string(), vec![BigRational::from_integer(0.into())]));
    } else {
        for i in 0..points {
            let v = BigRational::new((i as i64).into(), ((points - 1) as i64).into());
            labeled.push((format_rational(&v), vec![v]));
        }
    }
    Arc::new(PointSet::new(labeled, Metric::AbsDiff1d).expect("distinct rationals"))
}

/// Tiny deterministic RNG for seeded sweeps (splitmix64).
#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound.max(1)
    }
}

/// Random relation on the evenly spaced space: each pair kept with
/// probability 1/2.
pub fn random_relation(rng: &mut SplitMix64, points: usize) -> FiniteRelation {
    let space = evenly_spaced_space(points);
    let ids: Vec<_> = space.ids().collect();
    let mut pairs = BTreeSet::new();
    for &a in &ids {
        for &b in &ids {
            if rng.next_u64() & 1 == 1 {
                pairs.insert((a, b));
            }
        }
    }
    FiniteRelation::new(space, pairs).expect("pairs lie in the space")
}

/// Random nested pair `H ⊆ G`: G as above, H keeps each pair of G with
/// probability 1/2.
pub fn random_nested_relations(
    rng: &mut SplitMix64,
    points: usize,
) -> (FiniteRelation, FiniteRelation) {
    let g = random_relation(rng, points);
    let h_pairs: BTreeSet<_> = g
        .pairs()
        .iter()
        .copied()
        .filter(|_| rng.next_u64() & 1 == 1)
        .collect();
    let h = FiniteRelation::new(g.space().clone(), h_pairs).expect("subset of valid pairs");
    (h, g)
}
