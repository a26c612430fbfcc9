//! Command-line front end. Every subcommand is a thin shell around the
//! library; output is JSON by default, CSV for per-m tables, DOT for
//! graphs. Exit codes: 0 success, 2 validation error, 3 internal
//! inconsistency, 64 usage.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::chaos::{self, equivalence_report, EquivalenceReport};
use crate::dispersion::{build_dispersion, BinaryWord, Chooser, Dispersion};
use crate::document::{
    dispersion_dot, load_orbit_str, load_relation_str, per_m_csv, relation_dot,
};
use crate::entropy::{entropy_exact, entropy_growth_bounds, EntropyReport};
use crate::error::{Error, Result};
use crate::exact::parse_rational;
use crate::fixtures::{fixture_with, Fixture, FixtureId, FixtureObject, FixtureParams};
use crate::grid::{grid_entropy_estimate, GridRelation};
use crate::point_set::{Dist, PointId};
use crate::relation::{FiniteRelation, Walk};
use crate::returns::{
    find_any_return, find_return, return_entropy_bound, two_line_return, AnyReturn,
    ReturnCertificate, ReturnSearch,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EntropyMethodArg {
    Exact,
    Growth,
    Grid,
}

#[derive(Debug, Parser)]
#[command(
    name = "relent",
    about = "Entropy, returns and dispersions for finite relations",
    version
)]
struct Cli {
    /// Output format; json is canonical, csv covers per-m tables, dot
    /// covers graphs and trees.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Walk enumeration budget.
    #[arg(long, global = true, default_value_t = crate::relation::DEFAULT_WALK_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy of a relation document (or grid mask with --method grid).
    Entropy {
        file: String,
        #[arg(long, value_enum, default_value = "exact")]
        method: EntropyMethodArg,
        /// Growth-table depth (growth and grid methods).
        #[arg(long = "m-max")]
        m_max: Option<usize>,
    },
    /// Detect (k,ε)-returns on a relation document.
    Returns {
        file: String,
        #[command(flatten)]
        search: ReturnArgs,
    },
    /// The explicit two-line family template.
    TwoLine {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Sample point; emits the verified walk pair.
        #[arg(long)]
        x: Option<String>,
    },
    /// Build a dispersion tree and export it.
    Dispersion {
        file: String,
        #[arg(long, value_delimiter = ',')]
        set: Vec<String>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        depth: usize,
        /// Also assemble the prefix for this binary word.
        #[arg(long)]
        word: Option<String>,
    },
    /// Machine-check the four equivalent positivity conditions.
    Verify {
        file: Option<String>,
        /// Sweep all relations on an evenly spaced point set.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 3)]
        points: usize,
        /// Sweep this many seeded random relations instead.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Classify an orbit pair of the shift map.
    Pair {
        file: String,
        /// Orbit JSON: {"preperiod":[...],"period":[...]}.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Run a built-in fixture with its expected-results record.
    Example {
        fixture: String,
        #[arg(long)]
        entropy: bool,
        #[arg(long)]
        returns: bool,
        #[command(flatten)]
        search: ReturnArgs,
        /// Grid resolution for grid fixtures.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Truncation depth for the countable-truncation fixture.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// DOT export of a relation document's transition graph.
    ExportDot { file: String },
}

#[derive(Debug, Args, Default)]
struct ReturnArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<String>,
    /// Comma-separated point ids; defaults to the whole space.
    #[arg(long, value_delimiter = ',')]
    set: Vec<String>,
    /// Search for the smallest k over sets and thresholds.
    #[arg(long)]
    auto: bool,
}

/// Parse and execute, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = std::io::stdout();
    run_to_writer(argv, &mut stdout)
}

/// Testable entry point: writes reports to `out`, errors to stderr.
pub fn run_to_writer<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    eprintln!("{e}");
                    64
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(Error::Inconsistency(msg)) => {
            eprintln!("internal inconsistency: {msg}");
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Entropy { file, method, m_max } => {
            let report = match method {
                EntropyMethodArg::Exact => entropy_exact(&read_relation(&file)?),
                EntropyMethodArg::Growth => {
                    entropy_growth_bounds(&read_relation(&file)?, m_max.unwrap_or(12))?
                }
                EntropyMethodArg::Grid => {
                    let grid = read_grid(&file)?;
                    grid_entropy_estimate(&grid, m_max.unwrap_or(8))?
                }
            };
            emit_entropy(out, cli.format, &report)
        }
        Command::Returns { file, search } => {
            let relation = read_relation(&file)?;
            let value = run_return_search(&relation, &search)?;
            emit_json(out, cli.format, &value)
        }
        Command::TwoLine { a, b, x } => {
            let a = parse_rational(&a)?;
            let b = parse_rational(&b)?;
            let template = two_line_return(&a, &b)?;
            let mut value = json!({
                "a": crate::exact::format_rational(&template.a),
                "b": crate::exact::format_rational(&template.b),
                "orientation": template.orientation,
                "m": template.m,
                "k": template.k,
                "epsilon": crate::exact::format_rational(&template.epsilon),
                "interval": [
                    crate::exact::format_rational(&template.interval.0),
                    crate::exact::format_rational(&template.interval.1),
                ],
            });
            if let Some(x) = x {
                let x = parse_rational(&x)?;
                let pair = template.walk_pair(&x)?;
                let rationals =
                    |v: &[num_rational::BigRational]| -> Vec<String> {
                        v.iter().map(crate::exact::format_rational).collect()
                    };
                value["walk_pair"] = json!({
                    "lower": rationals(&pair.lower),
                    "upper": rationals(&pair.upper),
                    "separation_index": pair.separation_index,
                    "separation": crate::exact::format_rational(&pair.separation),
                });
            }
            emit_json(out, cli.format, &value)
        }
        Command::Dispersion {
            file,
            set,
            k,
            eps,
            depth,
            word,
        } => {
            let relation = read_relation(&file)?;
            let set = resolve_set(&relation, &set)?;
            let eps = Dist::Rational(parse_rational(&eps)?);
            let d = build_dispersion(&relation, &set, k, &eps, depth, Chooser::Lexicographic)?;
            if cli.format == Format::Dot {
                write!(out, "{}", dispersion_dot(&d)).map_err(Error::from)
            } else {
                let mut value = dispersion_to_json(&d);
                if let Some(word) = word {
                    let word = BinaryWord::from_str(&word)?;
                    let prefix = d.assemble_prefix(&word)?;
                    value["prefix"] = json!({
                        "word": word.to_string(),
                        "walk": walk_labels(d.relation(), &prefix),
                    });
                }
                emit_json(out, cli.format, &value)
            }
        }
        Command::Verify {
            file,
            exhaustive,
            points,
            random,
        } => {
            if exhaustive {
                let outcome = chaos::exhaustive_sweep(points)?;
                if cli.format == Format::Json {
                    writeln!(
                        out,
                        "{} relations, {} disagreements",
                        outcome.total, outcome.disagreements
                    )
                    .map_err(Error::from)?;
                    return Ok(());
                }
                return emit_json(out, cli.format, &serde_json::to_value(&outcome)?);
            }
            if let Some(count) = random {
                let outcome = chaos::random_sweep(points, count, cli.seed)?;
                writeln!(
                    out,
                    "{} relations, {} disagreements",
                    outcome.total, outcome.disagreements
                )
                .map_err(Error::from)?;
                return Ok(());
            }
            let file = file.ok_or_else(|| {
                Error::precondition("verify needs a relation file or --exhaustive/--random")
            })?;
            let relation = read_relation(&file)?;
            let report = equivalence_report(&relation)?;
            emit_json(out, cli.format, &equivalence_to_json(&relation, &report))
        }
        Command::Pair { file, x, y } => {
            let relation = read_relation(&file)?;
            let x = load_orbit_str(&relation, &x)?;
            let y = load_orbit_str(&relation, &y)?;
            let li = chaos::li_yorke_verdict(&x, &y)?;
            let dc = chaos::dc2_verdict(&x, &y)?;
            let verdict = |v: &chaos::OrbitPairVerdict| {
                json!({
                    "liminf": crate::exact::format_rational(&v.liminf),
                    "limsup": crate::exact::format_rational(&v.limsup),
                    "exact": v.exact,
                    "classification": v.classification,
                })
            };
            let value = json!({
                "li_yorke": verdict(&li),
                "dc2": verdict(&dc),
                "initial_distance": crate::exact::format_rational(&chaos::orbit_metric(&x, &y, 0)?),
            });
            emit_json(out, cli.format, &value)
        }
        Command::Example {
            fixture,
            entropy,
            returns,
            search,
            n,
            depth,
        } => {
            let id = FixtureId::from_str(&fixture)?;
            let fx = fixture_with(
                id,
                FixtureParams {
                    grid_n: n,
                    depth,
                },
            );
            run_example(out, cli.format, &fx, entropy, returns, &search)
        }
        Command::ExportDot { file } => {
            let relation = read_relation(&file)?;
            write!(out, "{}", relation_dot(&relation)).map_err(Error::from)
        }
    }
}

fn read_relation(path: &str) -> Result<FiniteRelation> {
    let text = std::fs::read_to_string(path)?;
    load_relation_str(&text)
}

fn read_grid(path: &str) -> Result<GridRelation> {
    let text = std::fs::read_to_string(path)?;
    GridRelation::from_mask_str(&text)
}

fn resolve_set(relation: &FiniteRelation, labels: &[String]) -> Result<BTreeSet<PointId>> {
    if labels.is_empty() {
        return Ok(relation.space().ids().collect());
    }
    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    chaos::label_set(relation, &refs)
}

fn run_return_search(relation: &FiniteRelation, search: &ReturnArgs) -> Result<Value> {
    if search.auto {
        return Ok(match find_any_return(relation)? {
            Some(found) => any_return_to_json(relation, &found),
            None => json!({ "found": false, "result": "none" }),
        });
    }
    let k = search
        .k
        .ok_or_else(|| Error::precondition("returns needs --k and --eps, or --auto"))?;
    let eps = search
        .eps
        .as_ref()
        .ok_or_else(|| Error::precondition("returns needs --k and --eps, or --auto"))?;
    let eps = Dist::Rational(parse_rational(eps)?);
    let set = resolve_set(relation, &search.set)?;
    match find_return(relation, &set, k, &eps)? {
        ReturnSearch::Found(certs) => {
            let bound = return_entropy_bound(relation, &set, &certs)?;
            Ok(json!({
                "found": true,
                "set": set_labels(relation, &set),
                "k": k,
                "epsilon": eps.to_string(),
                "entropy_bound": bound,
                "certificates": certs
                    .iter()
                    .map(|c| certificate_to_json(relation, c))
                    .collect::<Vec<_>>(),
            }))
        }
        ReturnSearch::None { failed_at } => Ok(json!({
            "found": false,
            "result": "none",
            "failed_at": relation.space().label(failed_at),
        })),
    }
}

fn run_example(
    out: &mut dyn Write,
    format: Format,
    fx: &Fixture,
    entropy: bool,
    returns: bool,
    search: &ReturnArgs,
) -> Result<()> {
    match &fx.object {
        FixtureObject::Relation(relation) => {
            if entropy {
                let report = entropy_exact(relation);
                let mut value = serde_json::to_value(&report)?;
                if let Some(bound) = fx.expected.entropy_bound {
                    value["return_bound"] = json!(bound);
                }
                return emit_json(out, format, &value);
            }
            if returns {
                let mut effective = ReturnArgs {
                    k: search.k,
                    eps: search.eps.clone(),
                    set: search.set.clone(),
                    auto: search.auto,
                };
                // Without explicit parameters, fall back to the fixture's
                // known return, if any.
                if !effective.auto && effective.k.is_none() {
                    match &fx.expected.known_return {
                        Some((set, k, eps)) => {
                            effective.k = Some(*k);
                            effective.eps = Some(eps.clone());
                            effective.set = set.clone();
                        }
                        None => effective.auto = true,
                    }
                }
                let value = run_return_search(relation, &effective)?;
                return emit_json(out, format, &value);
            }
            let value = json!({
                "fixture": fx.id.name(),
                "points": relation.space().len(),
                "pairs": relation.len(),
                "domain_condition": relation.domain_condition_holds(),
            });
            emit_json(out, format, &value)
        }
        FixtureObject::Grid(grid) => {
            let report = grid_entropy_estimate(grid, 8)?;
            let mut value = serde_json::to_value(&report)?;
            value["resolution"] = json!(grid.resolution());
            value["cells"] = json!(grid.cells().len());
            emit_json(out, format, &value)
        }
        FixtureObject::TwoLine { a, b } => {
            let template = two_line_return(a, b)?;
            let value = json!({
                "fixture": fx.id.name(),
                "m": template.m,
                "k": template.k,
                "epsilon": crate::exact::format_rational(&template.epsilon),
            });
            emit_json(out, format, &value)
        }
    }
}

fn emit_entropy(out: &mut dyn Write, format: Format, report: &EntropyReport) -> Result<()> {
    match format {
        Format::Csv => write!(out, "{}", per_m_csv(report)).map_err(Error::from),
        _ => emit_json(out, format, &serde_json::to_value(report)?),
    }
}

fn emit_json(out: &mut dyn Write, format: Format, value: &Value) -> Result<()> {
    match format {
        Format::Dot => Err(Error::precondition(
            "dot output applies only to graphs and dispersion trees",
        )),
        _ => {
            writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
            Ok(())
        }
    }
}

fn walk_labels(relation: &FiniteRelation, walk: &Walk) -> Vec<String> {
    walk.labels(relation.space())
        .into_iter()
        .map(|s| s.to_string())
        .collect()
}

fn set_labels(relation: &FiniteRelation, set: &BTreeSet<PointId>) -> Vec<String> {
    set.iter()
        .map(|&p| relation.space().label(p).to_string())
        .collect()
}

fn certificate_to_json(relation: &FiniteRelation, cert: &ReturnCertificate) -> Value {
    json!({
        "a": relation.space().label(cert.a),
        "k": cert.k,
        "epsilon": cert.epsilon.to_string(),
        "j": cert.j,
        "j_prime": cert.j_prime,
        "x": walk_labels(relation, &cert.x),
        "y": walk_labels(relation, &cert.y),
    })
}

fn any_return_to_json(relation: &FiniteRelation, found: &AnyReturn) -> Value {
    json!({
        "found": true,
        "set": set_labels(relation, &found.set),
        "k": found.k,
        "epsilon": found.epsilon.to_string(),
        "certificates": found
            .certificates
            .iter()
            .map(|c| certificate_to_json(relation, c))
            .collect::<Vec<_>>(),
    })
}

fn dispersion_to_json(d: &Dispersion) -> Value {
    let relation = d.relation();
    let tree: serde_json::Map<String, Value> = d
        .tree()
        .iter()
        .map(|(word, node)| {
            (
                word.to_string(),
                json!({
                    "block": walk_labels(relation, &node.block),
                    "j": node.j,
                    "j_prime": node.j_prime,
                    "anchor": relation.space().label(node.anchor),
                }),
            )
        })
        .collect();
    json!({
        "set": set_labels(relation, d.set()),
        "k": d.k(),
        "epsilon": d.epsilon().to_string(),
        "depth": d.depth(),
        "chooser": d.chooser(),
        "root_anchor": relation.space().label(d.root_anchor()),
        "tree": tree,
    })
}

fn equivalence_to_json(relation: &FiniteRelation, report: &EquivalenceReport) -> Value {
    let mut value = json!({
        "conditions": {
            "entropy_positive": report.entropy_positive,
            "return_exists": report.return_exists,
            "cycle_pair": report.cycle_pair,
            "uncountable": report.uncountable,
        },
        "agree": report.all_agree(),
        "li_yorke_chaotic": report.li_yorke_chaotic,
        "entropy": serde_json::to_value(&report.entropy).unwrap_or(Value::Null),
    });
    if let Some(found) = &report.any_return {
        value["return"] = any_return_to_json(relation, found);
    }
    if let Some(cycle) = &report.cycle {
        value["cycle_pair_certificate"] = json!({
            "x": walk_labels(relation, &cycle.x),
            "y": walk_labels(relation, &cycle.y),
            "j": cycle.j,
        });
    }
    if let Some(branch) = &report.uncountability.branch {
        value["branch"] = json!({
            "vertex": relation.space().label(branch.vertex),
            "successors": [
                relation.space().label(branch.successors.0),
                relation.space().label(branch.successors.1),
            ],
        });
    }
    if let Some(basis) = &report.uncountability.basis {
        value["countable_basis_orbits"] = json!(basis.len());
    }
    value
}
