//! Finite labeled metric point sets with exactly comparable distances.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_sqrt, format_rational, rational_to_f64};

/// Index of a point inside its [`PointSet`]. Ids are ordered by their
/// position in the defining document, which fixes every lexicographic
/// tie-break in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointId(pub u32);

impl PointId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The metric attached to a point set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "euclidean")]
    Euclidean,
    #[serde(rename = "max")]
    Max,
    #[serde(rename = "absolute-difference-on-1D")]
    AbsDiff1d,
}

/// An exactly comparable distance value.
///
/// `Rational(r)` is the distance itself; `Sqrt(v)` stands for `√v` and only
/// appears for Euclidean metrics where the squared distance is not a perfect
/// square. All order comparisons go through squares and stay exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dist {
    Rational(BigRational),
    Sqrt(BigRational),
}

impl Dist {
    /// Build from a squared distance, normalizing perfect squares.
    pub fn from_square(sq: BigRational) -> Dist {
        debug_assert!(!sq.is_negative());
        match exact_sqrt(&sq) {
            Some(r) => Dist::Rational(r),
            None => Dist::Sqrt(sq),
        }
    }

    pub fn zero() -> Dist {
        Dist::Rational(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Dist::Rational(r) => r.is_zero(),
            Dist::Sqrt(v) => v.is_zero(),
        }
    }

    /// The squared value, always rational.
    pub fn square(&self) -> BigRational {
        match self {
            Dist::Rational(r) => r * r,
            Dist::Sqrt(v) => v.clone(),
        }
    }

    /// Exact half of the distance.
    pub fn halve(&self) -> Dist {
        match self {
            Dist::Rational(r) => Dist::Rational(r / BigRational::from_integer(2.into())),
            Dist::Sqrt(v) => Dist::Sqrt(v / BigRational::from_integer(4.into())),
        }
    }

    /// The rational value when the distance is exactly rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Dist::Rational(r) => Some(r),
            Dist::Sqrt(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Dist::Rational(r) => rational_to_f64(r),
            Dist::Sqrt(v) => rational_to_f64(v).sqrt(),
        }
    }
}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Dist) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Dist) -> Ordering {
        // Distances are non-negative, so squares compare equivalently.
        self.square().cmp(&other.square())
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Rational(r) => write!(f, "{}", format_rational(r)),
            Dist::Sqrt(v) => write!(f, "sqrt({})", format_rational(v)),
        }
    }
}

impl Serialize for Dist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A finite labeled point set with precomputed pairwise distances.
#[derive(Debug)]
pub struct PointSet {
    labels: Vec<String>,
    coords: Vec<Vec<BigRational>>,
    metric: Metric,
    distances: Vec<Dist>, // row-major n x n table
}

impl PointSet {
    /// Validate and build a point set. Checks: unique labels, consistent
    /// dimension, dimension 1 for the 1-D metric, and that the metric is
    /// zero exactly on equal coordinates (no duplicate coordinate vectors).
    pub fn new(points: Vec<(String, Vec<BigRational>)>, metric: Metric) -> Result<PointSet> {
        if points.is_empty() {
            return Err(Error::schema("points", "point set must be non-empty"));
        }
        let dim = points[0].1.len();
        if dim == 0 {
            return Err(Error::schema("points[0].coords", "coordinates must be non-empty"));
        }
        if metric == Metric::AbsDiff1d && dim != 1 {
            return Err(Error::schema(
                "metric",
                "absolute-difference-on-1D requires 1-dimensional coordinates",
            ));
        }
        let mut labels = Vec::with_capacity(points.len());
        let mut coords = Vec::with_capacity(points.len());
        for (i, (label, c)) in points.into_iter().enumerate() {
            if c.len() != dim {
                return Err(Error::schema(
                    format!("points[{i}].coords"),
                    format!("expected {dim} coordinates, found {}", c.len()),
                ));
            }
            if labels.contains(&label) {
                return Err(Error::schema(
                    format!("points[{i}].id"),
                    format!("duplicate id {label:?}"),
                ));
            }
            labels.push(label);
            coords.push(c);
        }
        let n = labels.len();
        let mut distances = vec![Dist::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric_distance(metric, &coords[i], &coords[j]);
                if d.is_zero() {
                    return Err(Error::schema(
                        format!("points[{j}].coords"),
                        format!(
                            "points {:?} and {:?} have distance zero but distinct ids",
                            labels[i], labels[j]
                        ),
                    ));
                }
                distances[i * n + j] = d.clone();
                distances[j * n + i] = d;
            }
        }
        Ok(PointSet {
            labels,
            coords,
            metric,
            distances,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> {
        (0..self.labels.len() as u32).map(PointId)
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn label(&self, id: PointId) -> &str {
        &self.labels[id.index()]
    }

    pub fn coords(&self, id: PointId) -> &[BigRational] {
        &self.coords[id.index()]
    }

    pub fn lookup(&self, label: &str) -> Option<PointId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| PointId(i as u32))
    }

    /// Exact distance between two points (precomputed).
    pub fn distance(&self, a: PointId, b: PointId) -> &Dist {
        &self.distances[a.index() * self.len() + b.index()]
    }

    /// The distance as a rational, or an error for irrational Euclidean
    /// distances; the chaos-side series sums need this.
    pub fn rational_distance(&self, a: PointId, b: PointId) -> Result<BigRational> {
        match self.distance(a, b) {
            Dist::Rational(r) => Ok(r.clone()),
            Dist::Sqrt(_) => Err(Error::InexactDistance(format!(
                "distance between {:?} and {:?} is irrational",
                self.label(a),
                self.label(b)
            ))),
        }
    }

    /// Sorted, deduplicated positive pairwise distances.
    pub fn positive_distances(&self) -> Vec<Dist> {
        let n = self.len();
        let mut out: Vec<Dist> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.distances[i * n + j].clone());
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Structural equality of two point sets (labels, coords, metric).
    pub fn same_space(&self, other: &PointSet) -> bool {
        self.metric == other.metric && self.labels == other.labels && self.coords == other.coords
    }
}

fn metric_distance(metric: Metric, a: &[BigRational], b: &[BigRational]) -> Dist {
    match metric {
        Metric::AbsDiff1d => Dist::Rational((&a[0] - &b[0]).abs()),
        Metric::Max => {
            let mut best = BigRational::zero();
            for (x, y) in a.iter().zip(b) {
                let d = (x - y).abs();
                if d > best {
                    best = d;
                }
            }
            Dist::Rational(best)
        }
        Metric::Euclidean => {
            let mut sq = BigRational::zero();
            for (x, y) in a.iter().zip(b) {
                let d = x - y;
                sq += &d * &d;
            }
            Dist::from_square(sq)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_rational;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn unit_points(labels: &[&str]) -> Vec<(String, Vec<BigRational>)> {
        labels
            .iter()
            .map(|l| (l.to_string(), vec![q(l)]))
            .collect()
    }

    #[test]
    fn one_dimensional_distances_are_rational() {
        let ps = PointSet::new(unit_points(&["0", "1/2", "1"]), Metric::AbsDiff1d).unwrap();
        let d = ps.distance(PointId(0), PointId(2));
        assert_eq!(d, &Dist::Rational(q("1")));
        assert_eq!(ps.rational_distance(PointId(0), PointId(1)).unwrap(), q("1/2"));
        assert_eq!(
            ps.positive_distances(),
            vec![
                Dist::Rational(q("1/2")),
                Dist::Rational(q("1"))
            ]
        );
    }

    #[test]
    fn euclidean_distances_compare_via_squares() {
        let ps = PointSet::new(
            vec![
                ("o".into(), vec![q("0"), q("0")]),
                ("a".into(), vec![q("1"), q("1")]),
                ("b".into(), vec![q("3"), q("4")]),
            ],
            Metric::Euclidean,
        )
        .unwrap();
        // d(o,a) = sqrt(2), irrational; d(o,b) = 5 exactly.
        let da = ps.distance(PointId(0), PointId(1));
        let db = ps.distance(PointId(0), PointId(2));
        assert_eq!(da, &Dist::Sqrt(q("2")));
        assert_eq!(db, &Dist::Rational(q("5")));
        assert!(da < db);
        assert!(ps.rational_distance(PointId(0), PointId(1)).is_err());
        // Half of sqrt(2) is sqrt(1/2).
        assert_eq!(da.halve(), Dist::Sqrt(q("1/2")));
    }

    #[test]
    fn rejects_duplicate_ids_and_coincident_points() {
        let err = PointSet::new(unit_points(&["0", "0"]), Metric::AbsDiff1d).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
        let err = PointSet::new(
            vec![("a".into(), vec![q("1")]), ("b".into(), vec![q("1")])],
            Metric::AbsDiff1d,
        )
        .unwrap_err();
        assert!(err.to_string().contains("distance zero"));
    }

    #[test]
    fn rejects_dimension_mismatches() {
        let err = PointSet::new(
            vec![
                ("a".into(), vec![q("0"), q("0")]),
                ("b".into(), vec![q("1")]),
            ],
            Metric::Max,
        )
        .unwrap_err();
        assert!(err.to_string().contains("expected 2 coordinates"));
        let err = PointSet::new(
            vec![("a".into(), vec![q("0"), q("0")])],
            Metric::AbsDiff1d,
        )
        .unwrap_err();
        assert!(err.to_string().contains("1-dimensional"));
    }

    #[test]
    fn dist_ordering_mixes_rational_and_sqrt() {
        let values = [
            Dist::Rational(q("0")),
            Dist::Sqrt(q("2")),      // ~1.414
            Dist::Rational(q("3/2")), // 1.5
            Dist::Sqrt(q("5")),      // ~2.236
            Dist::Rational(q("3")),
        ];
        for w in values.windows(2) {
            assert!(w[0] < w[1], "{} !< {}", w[0], w[1]);
        }
    }
}
