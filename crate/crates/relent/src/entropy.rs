//! Entropy of finite relations.
//!
//! The entropy of a finite relation equals the log of the Perron root of its
//! 0/1 transition matrix: a cover by balls smaller than half the minimum
//! pairwise distance makes the minimal-subcover count equal the walk count,
//! and refining further cannot increase it. Zero entropy is decided
//! structurally (every strongly connected component a single vertex or a
//! single simple cycle); positive values come with a certified rational
//! enclosure of the Perron root from Collatz–Wielandt bounds.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{ln_biguint, ln_rational};
use crate::graph::{self, IntMatrix};
use crate::relation::FiniteRelation;

/// How the report was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntropyMethod {
    #[serde(rename = "growth-exact")]
    GrowthExact,
    #[serde(rename = "growth-bounds")]
    GrowthBounds,
    #[serde(rename = "grid-cover")]
    GridCover,
}

/// One row of the per-m growth table.
#[derive(Debug, Clone, Serialize)]
pub struct PerM {
    pub m: usize,
    /// `N_m`, the walk count, exact.
    #[serde(serialize_with = "serialize_biguint")]
    pub count: BigUint,
    /// `log(N_m)/m` with `log(0)` clamped to 0 so rates stay finite.
    pub rate: f64,
}

fn serialize_biguint<S: serde::Serializer>(
    value: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_string())
}

/// Entropy result with a certified bracket.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub method: EntropyMethod,
    /// Best point estimate; midpoint of `[lower, upper]`.
    pub value: f64,
    /// Reserved by the report schema; finite relations never produce an
    /// infinite entropy (`N_m <= |G|^m`), so this stays false.
    pub infinite: bool,
    /// Set when the relation was empty and the value 0 is by convention.
    pub empty: bool,
    pub lower: f64,
    pub upper: f64,
    pub per_m: Vec<PerM>,
}

impl EntropyReport {
    fn zero(method: EntropyMethod, empty: bool, per_m: Vec<PerM>) -> EntropyReport {
        EntropyReport {
            method,
            value: 0.0,
            infinite: false,
            empty,
            lower: 0.0,
            upper: 0.0,
            per_m,
        }
    }

    /// Width of the certified bracket.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

const ENCLOSURE_LN_WIDTH: f64 = 1e-10;
const MAX_POWER_ITERATIONS: usize = 10_000;
/// Iteration vectors are rescaled to at most this many bits per entry.
const VECTOR_CAP_BITS: u64 = 512;

/// Structural spectral data for a 0/1 adjacency matrix.
#[derive(Debug, Clone)]
pub(crate) struct SpectralAnalysis {
    /// Certified enclosure of the Perron root when it exceeds 1; `None`
    /// when every strongly connected component is a lone vertex or a single
    /// simple cycle, which forces Perron root <= 1 and entropy 0.
    pub enclosure: Option<(BigRational, BigRational)>,
}

pub(crate) fn spectral_analysis(adj: &[Vec<usize>]) -> SpectralAnalysis {
    let comps = graph::strongly_connected_components(adj);
    let matrix = IntMatrix::from_adjacency(adj);
    let mut enclosure: Option<(BigRational, BigRational)> = None;
    for comp in &comps {
        if !graph::has_internal_edge(adj, comp) || graph::is_simple_cycle(adj, comp) {
            continue;
        }
        // Complex component: Perron root strictly above 1.
        let sub = matrix.submatrix(comp);
        let (lo, hi) = canonical_enclosure(&sub);
        enclosure = Some(match enclosure {
            None => (lo, hi),
            Some((blo, bhi)) => (blo.max(lo), bhi.max(hi)),
        });
    }
    SpectralAnalysis { enclosure }
}

/// Enclosure of the Perron root of an irreducible matrix, intersected with
/// the enclosure of its transpose so that a relation and its inverse report
/// bit-identical values.
fn canonical_enclosure(sub: &IntMatrix) -> (BigRational, BigRational) {
    let (lo_a, hi_a) = collatz_wielandt(sub);
    let (lo_b, hi_b) = collatz_wielandt(&sub.transpose());
    (lo_a.max(lo_b), hi_a.min(hi_b))
}

/// Collatz–Wielandt power iteration on `B + I` (primitive whenever `B` is
/// irreducible). For any positive vector v, `min_i (Mv)_i/v_i <= λ(M) <=
/// max_i (Mv)_i/v_i`, so every iteration tightens a valid bracket no matter
/// how the iterate is rounded.
fn collatz_wielandt(b: &IntMatrix) -> (BigRational, BigRational) {
    let m = b.add_identity();
    let n = m.n;
    let one = BigRational::one();
    let mut v: Vec<BigUint> = vec![BigUint::one(); n];
    let mut best_lo: Option<BigRational> = None;
    let mut best_hi: Option<BigRational> = None;
    for _ in 0..MAX_POWER_ITERATIONS {
        let w = m.mul_vec(&v);
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for i in 0..n {
            let ratio = BigRational::new(
                BigInt::from(w[i].clone()),
                BigInt::from(v[i].clone()),
            );
            if lo.as_ref().map_or(true, |l| &ratio < l) {
                lo = Some(ratio.clone());
            }
            if hi.as_ref().map_or(true, |h| &ratio > h) {
                hi = Some(ratio);
            }
        }
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        if best_lo.as_ref().map_or(true, |b| &lo > b) {
            best_lo = Some(lo);
        }
        if best_hi.as_ref().map_or(true, |b| &hi < b) {
            best_hi = Some(hi);
        }
        let blo = best_lo.as_ref().unwrap();
        let bhi = best_hi.as_ref().unwrap();
        if ln_rational(bhi) - ln_rational(blo) < ENCLOSURE_LN_WIDTH {
            break;
        }
        // Rescale to bounded bit size; clamping at 1 keeps positivity, which
        // is all the bounds require.
        let max_bits = w.iter().map(|x| x.bits()).max().unwrap_or(0);
        v = if max_bits > VECTOR_CAP_BITS {
            let shift = max_bits - VECTOR_CAP_BITS;
            w.iter()
                .map(|x| {
                    let s = x >> shift;
                    if s.is_zero() {
                        BigUint::one()
                    } else {
                        s
                    }
                })
                .collect()
        } else {
            w
        };
    }
    // Subtract the identity shift.
    (best_lo.unwrap() - &one, best_hi.unwrap() - &one)
}

fn per_m_table(matrix: &IntMatrix, m_max: usize) -> Vec<PerM> {
    let n = matrix.n;
    let mut v = vec![BigUint::one(); n];
    let mut out = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        v = matrix.mul_vec(&v);
        let count: BigUint = v.iter().sum();
        let rate = if count.is_zero() {
            0.0
        } else {
            ln_biguint(&count) / m as f64
        };
        out.push(PerM { m, count, rate });
    }
    out
}

fn report_from_analysis(
    method: EntropyMethod,
    analysis: &SpectralAnalysis,
    per_m: Vec<PerM>,
) -> EntropyReport {
    match &analysis.enclosure {
        None => EntropyReport::zero(method, false, per_m),
        Some((lo, hi)) => {
            let lower = ln_rational(lo);
            let upper = ln_rational(hi);
            EntropyReport {
                method,
                value: 0.5 * (lower + upper),
                infinite: false,
                empty: false,
                lower,
                upper,
                per_m,
            }
        }
    }
}

const EXACT_PER_M: usize = 8;

/// Exact entropy of a finite relation: log of the Perron root of the
/// transition matrix, zero decided structurally, positive values bracketed
/// by a certified enclosure of width below 1e-9 in log scale.
pub fn entropy_exact(relation: &FiniteRelation) -> EntropyReport {
    let matrix = relation.transition_matrix();
    if relation.is_empty() {
        return EntropyReport::zero(
            EntropyMethod::GrowthExact,
            true,
            per_m_table(&matrix, EXACT_PER_M),
        );
    }
    let analysis = spectral_analysis(&relation.adjacency());
    report_from_analysis(
        EntropyMethod::GrowthExact,
        &analysis,
        per_m_table(&matrix, EXACT_PER_M),
    )
}

/// Growth-rate view of the same quantity with finite-m bounds.
///
/// The per-m table reports total walk counts. The upper bound uses the
/// subadditive sequence `log ||A^m||_inf` (max row sum), which converges to
/// the limit much faster than the total-count sequence; the lower bound
/// pumps closed walks, `λ^m >= max_i (A^m)_{ii}`.
pub fn entropy_growth_bounds(relation: &FiniteRelation, m_max: usize) -> Result<EntropyReport> {
    if m_max < 2 {
        return Err(Error::precondition("entropy_growth_bounds requires m_max >= 2"));
    }
    let matrix = relation.transition_matrix();
    let per_m = per_m_table(&matrix, m_max);
    let mut upper = f64::INFINITY;
    let mut lower = 0.0f64;
    let mut power = matrix.clone();
    for m in 1..=m_max {
        let row = power.max_row_sum();
        let row_rate = if row.is_zero() {
            0.0
        } else {
            ln_biguint(&row) / m as f64
        };
        upper = upper.min(row_rate);
        let diag = power.max_diagonal();
        if !diag.is_zero() {
            lower = lower.max(ln_biguint(&diag) / m as f64);
        }
        if m < m_max {
            power = power.mul(&matrix);
        }
    }
    let exact = entropy_exact(relation);
    Ok(EntropyReport {
        method: EntropyMethod::GrowthBounds,
        value: exact.value,
        infinite: false,
        empty: relation.is_empty(),
        lower,
        upper,
        per_m,
    })
}

/// Certified rational enclosure of the Perron root of the transition
/// matrix; `None` when the root is structurally at most 1 (entropy 0).
/// Exposed so callers can run exact rational comparisons, such as checking
/// `entropy >= log(2)/k` as `lo^k >= 2`.
pub fn perron_root_enclosure(
    relation: &FiniteRelation,
) -> Option<(BigRational, BigRational)> {
    spectral_analysis(&relation.adjacency()).enclosure
}

/// Exact walk-count ratio at a fixed depth, used by callers wanting a quick
/// growth estimate without the enclosure machinery.
pub fn ratio_estimate(relation: &FiniteRelation, m: usize) -> Result<f64> {
    let a = relation.walk_count(m)?;
    let b = relation.walk_count(m + 1)?;
    if a.is_zero() || b.is_zero() {
        return Ok(0.0);
    }
    Ok(ln_biguint(&b) - ln_biguint(&a))
}
