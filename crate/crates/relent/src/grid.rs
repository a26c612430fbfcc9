//! Grid-discretized planar relations and their cover-entropy estimates.
//!
//! A `GridRelation` at resolution `n` is a union of closed boxes
//! `[i/n,(i+1)/n] x [j/n,(j+1)/n]` inside the unit square, the first index
//! running along the first coordinate of the relation. The estimate treats
//! the occupied cells as a relation on the alphabet of the `n` cover
//! intervals: letter `u` can follow letter `v` exactly when cell `(u, v)` is
//! occupied, so admissible letter words over-count the minimal subcover of
//! the m-th Mahavier product by (m+1)-fold products of fattened intervals,
//! and the Perron root of the letter graph gives the limit estimate.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::entropy::{spectral_analysis, EntropyMethod, EntropyReport, PerM};
use crate::error::{Error, Result};
use crate::exact::{ln_biguint, ln_rational};
use crate::graph::IntMatrix;

/// A planar relation given as a set of occupied grid cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridRelation {
    n: usize,
    cells: BTreeSet<(usize, usize)>,
}

impl GridRelation {
    pub fn new(n: usize, cells: BTreeSet<(usize, usize)>) -> Result<GridRelation> {
        if n < 2 {
            return Err(Error::precondition("grid resolution must be at least 2"));
        }
        if cells.is_empty() {
            return Err(Error::precondition("grid relation needs at least one cell"));
        }
        for &(i, j) in &cells {
            if i >= n || j >= n {
                return Err(Error::precondition(format!(
                    "cell ({i}, {j}) out of range for resolution {n}"
                )));
            }
        }
        Ok(GridRelation { n, cells })
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &BTreeSet<(usize, usize)> {
        &self.cells
    }

    /// Refine the cover: every cell splits into its four children at twice
    /// the resolution. The underlying planar set is unchanged, so by cover
    /// refinement the reported limit can only grow.
    pub fn subdivide(&self) -> GridRelation {
        let mut cells = BTreeSet::new();
        for &(i, j) in &self.cells {
            for di in 0..2 {
                for dj in 0..2 {
                    cells.insert((2 * i + di, 2 * j + dj));
                }
            }
        }
        GridRelation {
            n: self.n * 2,
            cells,
        }
    }

    /// Letter-graph adjacency: edge `v -> u` iff cell `(u, v)` is occupied.
    fn letter_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.cells {
            adj[v].push(u);
        }
        for outs in &mut adj {
            outs.sort_unstable();
        }
        adj
    }

    /// Plain-text mask: first line `n`, then one `i j` line per cell.
    pub fn to_mask_string(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(i, j) in &self.cells {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    pub fn from_mask_str(text: &str) -> Result<GridRelation> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::schema("line 1", "missing resolution line"))?
            .trim()
            .parse()
            .map_err(|_| Error::schema("line 1", "resolution must be an integer"))?;
        let mut cells = BTreeSet::new();
        for (idx, line) in lines.enumerate() {
            let mut parts = line.split_whitespace();
            let field = format!("line {}", idx + 2);
            let i: usize = parts
                .next()
                .ok_or_else(|| Error::schema(field.clone(), "missing cell row"))?
                .parse()
                .map_err(|_| Error::schema(field.clone(), "cell index must be an integer"))?;
            let j: usize = parts
                .next()
                .ok_or_else(|| Error::schema(field.clone(), "missing cell column"))?
                .parse()
                .map_err(|_| Error::schema(field.clone(), "cell index must be an integer"))?;
            if parts.next().is_some() {
                return Err(Error::schema(field, "expected exactly two indices"));
            }
            cells.insert((i, j));
        }
        GridRelation::new(n, cells)
    }
}

/// Word-count estimate of the cover entropy of a grid relation.
///
/// `per_m` holds the admissible letter-word counts (words of `m+1` letters);
/// `value`/`upper` come from the Perron root of the letter graph. The
/// estimate is an upper estimate of the cover entropy, so `lower` stays 0.
pub fn grid_entropy_estimate(grid: &GridRelation, m: usize) -> Result<EntropyReport> {
    if m == 0 {
        return Err(Error::precondition("grid_entropy_estimate requires m >= 1"));
    }
    let adj = grid.letter_adjacency();
    let matrix = IntMatrix::from_adjacency(&adj);
    let mut v = vec![BigUint::one(); matrix.n];
    let mut per_m = Vec::with_capacity(m);
    for step in 1..=m {
        v = matrix.mul_vec(&v);
        let count: BigUint = v.iter().sum();
        let rate = if count.is_zero() {
            0.0
        } else {
            ln_biguint(&count) / step as f64
        };
        per_m.push(PerM {
            m: step,
            count,
            rate,
        });
    }
    let analysis = spectral_analysis(&adj);
    let (value, upper) = match &analysis.enclosure {
        None => (0.0, 0.0),
        Some((lo, hi)) => {
            let lo = ln_rational(lo);
            let hi = ln_rational(hi);
            (0.5 * (lo + hi), hi)
        }
    };
    Ok(EntropyReport {
        method: EntropyMethod::GridCover,
        value,
        infinite: false,
        empty: false,
        lower: 0.0,
        upper,
        per_m,
    })
}

/// A line segment with exact rational endpoints inside the unit square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub from: (BigRational, BigRational),
    pub to: (BigRational, BigRational),
}

impl Segment {
    pub fn new(
        from: (BigRational, BigRational),
        to: (BigRational, BigRational),
    ) -> Result<Segment> {
        let unit = |v: &BigRational| !v.is_negative() && *v <= BigRational::one();
        for (x, y) in [&from, &to] {
            if !unit(x) || !unit(y) {
                return Err(Error::precondition(
                    "segment endpoints must lie in the unit square",
                ));
            }
        }
        if from == to {
            return Err(Error::precondition("degenerate segment of zero length"));
        }
        Ok(Segment { from, to })
    }
}

/// Parameter interval `t ∈ [lo, hi]` with per-end strictness flags.
#[derive(Debug, Clone)]
struct TInterval {
    lo: BigRational,
    lo_strict: bool,
    hi: BigRational,
    hi_strict: bool,
    empty: bool,
}

impl TInterval {
    fn unit() -> TInterval {
        TInterval {
            lo: BigRational::zero(),
            lo_strict: false,
            hi: BigRational::one(),
            hi_strict: false,
            empty: false,
        }
    }

    fn is_empty(&self) -> bool {
        self.empty
            || self.lo > self.hi
            || (self.lo == self.hi && (self.lo_strict || self.hi_strict))
    }

    fn clamp_lo(&mut self, lo: BigRational, strict: bool) {
        if lo > self.lo || (lo == self.lo && strict && !self.lo_strict) {
            self.lo = lo;
            self.lo_strict = strict;
        }
    }

    fn clamp_hi(&mut self, hi: BigRational, strict: bool) {
        if hi < self.hi || (hi == self.hi && strict && !self.hi_strict) {
            self.hi = hi;
            self.hi_strict = strict;
        }
    }

    /// Constrain `v0 + t * d` to the open interval `(a, b)`.
    fn constrain_open(
        &mut self,
        v0: &BigRational,
        d: &BigRational,
        a: &BigRational,
        b: &BigRational,
    ) {
        if self.empty {
            return;
        }
        if d.is_zero() {
            if !(v0 > a && v0 < b) {
                self.empty = true;
            }
            return;
        }
        let ta = (a - v0) / d;
        let tb = (b - v0) / d;
        if d.is_positive() {
            self.clamp_lo(ta, true);
            self.clamp_hi(tb, true);
        } else {
            self.clamp_lo(tb, true);
            self.clamp_hi(ta, true);
        }
    }
}

/// Whether the segment meets the open box `(i/n,(i+1)/n) x (j/n,(j+1)/n)`.
///
/// Open boxes deliberately ignore touch points on shared cell edges and
/// corners: a sloped graph passing through a lattice corner would otherwise
/// occupy all four incident cells and inflate the letter graph far beyond
/// the dynamics it is meant to estimate.
fn segment_meets_open_cell(seg: &Segment, n: usize, cell: (usize, usize)) -> bool {
    let nq = BigRational::from_integer((n as i64).into());
    let frac = |k: usize| BigRational::from_integer((k as i64).into()) / &nq;
    let (i, j) = cell;
    let (x0, y0) = (&seg.from.0, &seg.from.1);
    let dx = &seg.to.0 - x0;
    let dy = &seg.to.1 - y0;
    let mut t = TInterval::unit();
    t.constrain_open(x0, &dx, &frac(i), &frac(i + 1));
    t.constrain_open(y0, &dy, &frac(j), &frac(j + 1));
    !t.is_empty()
}

/// Rasterize a piecewise-linear graph: the occupied cells are those whose
/// open box meets some segment.
pub fn grid_from_piecewise_linear(segments: &[Segment], n: usize) -> Result<GridRelation> {
    if n < 2 {
        return Err(Error::precondition("grid resolution must be at least 2"));
    }
    if segments.is_empty() {
        return Err(Error::precondition("at least one segment is required"));
    }
    let nq = BigRational::from_integer((n as i64).into());
    let cell_range = |lo: &BigRational, hi: &BigRational| -> (usize, usize) {
        let lo_cell: i64 = (lo * &nq).floor().to_integer().try_into().unwrap_or(0);
        let hi_cell: i64 = (hi * &nq)
            .ceil()
            .to_integer()
            .try_into()
            .unwrap_or(n as i64);
        (
            lo_cell.clamp(0, n as i64 - 1) as usize,
            hi_cell.clamp(1, n as i64) as usize,
        )
    };
    let mut cells = BTreeSet::new();
    for seg in segments {
        let (xa, xb) = if seg.from.0 <= seg.to.0 {
            (&seg.from.0, &seg.to.0)
        } else {
            (&seg.to.0, &seg.from.0)
        };
        let (ya, yb) = if seg.from.1 <= seg.to.1 {
            (&seg.from.1, &seg.to.1)
        } else {
            (&seg.to.1, &seg.from.1)
        };
        let (i0, i1) = cell_range(xa, xb);
        let (j0, j1) = cell_range(ya, yb);
        for i in i0..i1 {
            for j in j0..j1 {
                if segment_meets_open_cell(seg, n, (i, j)) {
                    cells.insert((i, j));
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::precondition(
            "segments meet no open cell; grid-line-aligned segments select nothing",
        ));
    }
    GridRelation::new(n, cells)
}
