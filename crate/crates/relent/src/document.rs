//! Document formats: the JSON relation schema, orbit documents, DOT
//! exports and CSV tables.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dispersion::Dispersion;
use crate::entropy::EntropyReport;
use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational};
use crate::point_set::{Metric, PointSet};
use crate::relation::{FiniteRelation, SymbolicOrbit};

/// One labeled point of a relation document; coordinates are
/// decimal-or-fraction strings parsed exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointDocument {
    pub id: String,
    pub coords: Vec<String>,
}

/// The on-disk relation format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationDocument {
    pub points: Vec<PointDocument>,
    pub metric: Metric,
    pub pairs: Vec<[String; 2]>,
}

/// Validate a document into a relation; errors name the offending field.
pub fn load_relation(document: &RelationDocument) -> Result<FiniteRelation> {
    let mut points = Vec::with_capacity(document.points.len());
    for (i, p) in document.points.iter().enumerate() {
        let mut coords = Vec::with_capacity(p.coords.len());
        for (j, c) in p.coords.iter().enumerate() {
            let v = parse_rational(c).map_err(|e| {
                Error::schema(format!("points[{i}].coords[{j}]"), e.to_string())
            })?;
            coords.push(v);
        }
        points.push((p.id.clone(), coords));
    }
    let space = Arc::new(PointSet::new(points, document.metric)?);
    let mut pairs = BTreeSet::new();
    for (i, [a, b]) in document.pairs.iter().enumerate() {
        let a = space
            .lookup(a)
            .ok_or_else(|| Error::schema(format!("pairs[{i}][0]"), format!("unknown id {a:?}")))?;
        let b = space
            .lookup(b)
            .ok_or_else(|| Error::schema(format!("pairs[{i}][1]"), format!("unknown id {b:?}")))?;
        pairs.insert((a, b));
    }
    FiniteRelation::new(space, pairs)
}

pub fn load_relation_str(json: &str) -> Result<FiniteRelation> {
    let document: RelationDocument = serde_json::from_str(json)?;
    load_relation(&document)
}

/// Render a relation back into its document form.
pub fn relation_to_document(relation: &FiniteRelation) -> RelationDocument {
    let space = relation.space();
    let points = space
        .ids()
        .map(|id| PointDocument {
            id: space.label(id).to_string(),
            coords: space.coords(id).iter().map(format_rational).collect(),
        })
        .collect();
    let pairs = relation
        .pairs()
        .iter()
        .map(|&(a, b)| [space.label(a).to_string(), space.label(b).to_string()])
        .collect();
    RelationDocument {
        points,
        metric: space.metric(),
        pairs,
    }
}

/// An eventually periodic orbit document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitDocument {
    pub preperiod: Vec<String>,
    pub period: Vec<String>,
}

pub fn load_orbit(relation: &FiniteRelation, document: &OrbitDocument) -> Result<SymbolicOrbit> {
    let resolve = |labels: &[String], field: &str| -> Result<Vec<_>> {
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                relation.space().lookup(l).ok_or_else(|| {
                    Error::schema(format!("{field}[{i}]"), format!("unknown id {l:?}"))
                })
            })
            .collect()
    };
    let preperiod = resolve(&document.preperiod, "preperiod")?;
    let period = resolve(&document.period, "period")?;
    relation.orbit(preperiod, period)
}

pub fn load_orbit_str(relation: &FiniteRelation, json: &str) -> Result<SymbolicOrbit> {
    let document: OrbitDocument = serde_json::from_str(json)?;
    load_orbit(relation, &document)
}

/// DOT rendering of the transition graph: edge `u -> v` iff `(v, u) ∈ G`.
pub fn relation_dot(relation: &FiniteRelation) -> String {
    let space = relation.space();
    let mut out = String::from("digraph transition {\n");
    for id in space.ids() {
        out.push_str(&format!("  \"{}\";\n", space.label(id)));
    }
    for u in space.ids() {
        for &v in relation.successors(u) {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\";\n",
                space.label(u),
                space.label(v)
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a dispersion's block tree: one node per binary word,
/// labeled with its block.
pub fn dispersion_dot(dispersion: &Dispersion) -> String {
    let space = dispersion.relation().space();
    let mut out = String::from("digraph dispersion {\n");
    out.push_str(&format!(
        "  \"\" [label=\"root @ {}\"];\n",
        space.label(dispersion.root_anchor())
    ));
    for (word, node) in dispersion.tree() {
        let block: Vec<&str> = node.block.labels(space);
        out.push_str(&format!(
            "  \"{word}\" [label=\"{word}: ({})\"];\n",
            block.join(",")
        ));
        let parent = if word.len() == 1 {
            String::new()
        } else {
            word.prefix(word.len() - 1).to_string()
        };
        out.push_str(&format!("  \"{parent}\" -> \"{word}\";\n"));
    }
    out.push_str("}\n");
    out
}

/// CSV table of the per-m growth rows: `m,N_m,rate`.
pub fn per_m_csv(report: &EntropyReport) -> String {
    let mut out = String::from("m,N_m,rate\n");
    for row in &report.per_m {
        out.push_str(&format!("{},{},{}\n", row.m, row.count, row.rate));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The canonical golden-mean document, byte for byte the schema shape.
    const GOLDEN: &str = r#"{"points":[{"id":"0","coords":["0"]},{"id":"1","coords":["1"]}],"metric":"absolute-difference-on-1D","pairs":[["0","0"],["0","1"],["1","0"]]}"#;

    #[test]
    fn loads_the_golden_document() {
        let g = load_relation_str(GOLDEN).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.space().len(), 2);
        assert!(g.domain_condition_holds());
    }

    #[test]
    fn empty_pair_list_is_a_valid_relation() {
        let json = r#"{"points":[{"id":"0","coords":["0"]}],"metric":"absolute-difference-on-1D","pairs":[]}"#;
        let g = load_relation_str(json).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn unknown_pair_id_names_the_field() {
        let json = r#"{"points":[{"id":"0","coords":["0"]},{"id":"1","coords":["1"]}],"metric":"absolute-difference-on-1D","pairs":[["0","2"]]}"#;
        let err = load_relation_str(json).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("pairs[0][1]"), "{msg}");
        assert!(msg.contains("\"2\""), "{msg}");
    }

    #[test]
    fn malformed_coords_name_the_field() {
        let json = r#"{"points":[{"id":"0","coords":["zero"]}],"metric":"absolute-difference-on-1D","pairs":[]}"#;
        let err = load_relation_str(json).unwrap_err();
        assert!(err.to_string().contains("points[0].coords[0]"));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let json = r#"{"points":[{"id":"0","coords":["0"]},{"id":"0","coords":["1"]}],"metric":"absolute-difference-on-1D","pairs":[]}"#;
        let err = load_relation_str(json).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn document_round_trips() {
        let g = load_relation_str(GOLDEN).unwrap();
        let doc = relation_to_document(&g);
        let again = load_relation(&doc).unwrap();
        assert_eq!(again.pairs(), g.pairs());
        assert!(again.space().same_space(g.space()));
    }

    #[test]
    fn dot_export_follows_the_transition_convention() {
        let g = load_relation_str(GOLDEN).unwrap();
        let dot = relation_dot(&g);
        // (1, 0) ∈ G becomes the edge 0 -> 1.
        assert!(dot.contains("\"0\" -> \"1\";"));
        assert!(dot.contains("\"1\" -> \"0\";"));
        assert!(dot.contains("\"0\" -> \"0\";"));
        assert!(!dot.contains("\"1\" -> \"1\";"));
    }

    #[test]
    fn orbit_documents_load_and_validate() {
        let g = load_relation_str(GOLDEN).unwrap();
        let orbit = load_orbit_str(&g, r#"{"preperiod":["1"],"period":["0","1"]}"#).unwrap();
        assert_eq!(g.space().label(orbit.at(1)), "1");
        assert_eq!(g.space().label(orbit.at(7)), "1");
        // Unknown label names the field.
        let err = load_orbit_str(&g, r#"{"preperiod":[],"period":["2"]}"#).unwrap_err();
        assert!(err.to_string().contains("period[0]"));
        // Invalid step: (1,1) is not a pair of the relation.
        assert!(load_orbit_str(&g, r#"{"preperiod":[],"period":["1"]}"#).is_err());
    }

    #[test]
    fn per_m_csv_shape() {
        let g = load_relation_str(GOLDEN).unwrap();
        let report = crate::entropy::entropy_growth_bounds(&g, 4).unwrap();
        let csv = per_m_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "m,N_m,rate");
        assert!(lines[1].starts_with("1,3,"));
        assert!(lines[4].starts_with("4,13,"));
    }
}
