//! Command-line adapter over `rank1lab-core`: parses arguments and configs,
//! calls the library and renders reports.

pub mod args;
pub mod render;

use std::ffi::OsString;
use std::path::Path;
use std::time::Instant;

use clap::Parser;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value as Json};
use thiserror::Error;

use rank1lab_core::config::{self, ConfigError};
use rank1lab_core::criteria::{
    check_condition1, check_condition2, check_condition2_simple, check_pwm, check_total_ergodicity,
    enumerate_product_classes, parity_obstruction, product_criterion, CriteriaError, Property,
    RankOneFamily, Value, Verdict, CLASS_GUARD,
};
use rank1lab_core::registry::{self, EntryOutcome};
use rank1lab_core::simulator::{
    product_orbit_witness, recurrence_witness, LevelSet, MarkedColumns, SimError,
};
use rank1lab_core::tower::{Construction, LevelRef, TowerError};

use args::{Cli, Command, ExamplesAction, Format, ProductsArgs, PropertyArg, Query};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Most shifts a single `measure` query evaluates.
pub const SHIFT_GUARD: usize = 100_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {error}")]
    Config { path: String, error: ConfigError },
    #[error("{path}: {error}")]
    Io { path: String, error: std::io::Error },
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// A finished command: the structured report, its text rendering and the exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Json,
    pub text: Vec<String>,
    pub code: i32,
}

fn status(code: i32) -> &'static str {
    match code {
        EXIT_OK => "ok",
        EXIT_FAILS => "fails",
        EXIT_INCONCLUSIVE => "inconclusive",
        _ => "error",
    }
}

fn report(
    operation: &str,
    construction: Option<&Construction>,
    parameters: Json,
    results: Json,
    code: i32,
) -> Json {
    json!({
        "tool": "rank1lab",
        "version": env!("CARGO_PKG_VERSION"),
        "operation": operation,
        "construction": construction.map(render::construction),
        "parameters": parameters,
        "results": results,
        "status": status(code),
        "exit_code": code,
    })
}

/// Reads a config file, falling back to a built-in example of that name.
pub fn load(source: &str) -> Result<Construction, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|error| CliError::Io {
            path: source.to_string(),
            error,
        })?;
        return config::parse(&text).map_err(|error| CliError::Config {
            path: source.to_string(),
            error,
        });
    }
    registry::lookup(source)
        .map(|e| (e.build)())
        .ok_or_else(|| {
            CliError::Usage(format!(
                "`{source}` is neither a config file nor a built-in example"
            ))
        })
}

/// Parses `generation:color:height`; the color may be bare (`1,0`),
/// parenthesized (`(1,0)`) or empty over the trivial group.
pub fn parse_level(c: &Construction, text: &str) -> Result<LevelRef, CliError> {
    let bad = |why: &str| CliError::Usage(format!("level `{text}`: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [generation, color, height] = parts[..] else {
        return Err(bad("expected generation:color:height"));
    };
    let generation: usize = generation
        .trim()
        .parse()
        .map_err(|_| bad("bad generation"))?;
    let height: u64 = height.trim().parse().map_err(|_| bad("bad height"))?;
    let coords: Vec<i64> = color
        .trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|_| bad("bad color coordinate")))
        .collect::<Result<_, _>>()?;
    let color = c.group().element(coords).map_err(|e| bad(&e.to_string()))?;
    Ok(LevelRef::new(generation, color, height))
}

fn level_set(c: &Construction, texts: &[String]) -> Result<LevelSet, CliError> {
    Ok(LevelSet::new(
        texts
            .iter()
            .map(|t| parse_level(c, t))
            .collect::<Result<_, _>>()?,
    ))
}

fn verdict_code(value: Value) -> i32 {
    match value {
        Value::Holds => EXIT_OK,
        Value::Fails => EXIT_FAILS,
        Value::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Fails beats inconclusive beats holds.
fn combine(codes: impl IntoIterator<Item = i32>) -> i32 {
    codes.into_iter().fold(EXIT_OK, |acc, c| match (acc, c) {
        (EXIT_FAILS, _) | (_, EXIT_FAILS) => EXIT_FAILS,
        (EXIT_INCONCLUSIVE, _) | (_, EXIT_INCONCLUSIVE) => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    })
}

fn property_key(p: PropertyArg) -> &'static str {
    match p {
        PropertyArg::Ergodic => "ergodic",
        PropertyArg::Pwm => "pwm",
        PropertyArg::TotallyErgodic => "totally-ergodic",
        PropertyArg::Condition2 => "condition2",
        PropertyArg::Condition2Simple => "condition2-simple",
    }
}

fn decide(c: &Construction, p: PropertyArg) -> Result<Verdict, CliError> {
    let result = match p {
        PropertyArg::Ergodic => check_condition1(c),
        PropertyArg::Pwm => check_pwm(c),
        PropertyArg::TotallyErgodic => check_total_ergodicity(c),
        PropertyArg::Condition2 => check_condition2(c),
        PropertyArg::Condition2Simple => check_condition2_simple(c),
    };
    match (p, result) {
        // an inapplicable form is reported, not treated as a usage error
        (PropertyArg::Condition2Simple, Err(CriteriaError::Precondition(why))) => {
            Ok(Verdict::inconclusive(Property::Condition2Simple, why))
        }
        (_, other) => Ok(other?),
    }
}

pub fn cmd_check(c: &Construction, properties: &[PropertyArg]) -> Result<Outcome, CliError> {
    let mut text = vec![format!(
        "{} over {} ({} schedule)",
        c.name().unwrap_or("unnamed"),
        c.group(),
        c.schedule().kind()
    )];
    let mut verdicts = Vec::new();
    let mut codes = Vec::new();
    for &p in properties {
        let v = decide(c, p)?;
        codes.push(verdict_code(v.value));
        text.extend(render::verdict_text(&v));
        verdicts.push(render::verdict(&v));
    }
    let code = combine(codes);
    let params =
        json!({ "properties": properties.iter().map(|&p| property_key(p)).collect::<Vec<_>>() });
    Ok(Outcome {
        report: report("check", Some(c), params, Json::Array(verdicts), code),
        text,
        code,
    })
}

fn shifts(n: &[i64], from: Option<i64>, to: Option<i64>, step: i64) -> Result<Vec<i64>, CliError> {
    let list = match (from, to) {
        (Some(a), Some(b)) => {
            if step <= 0 {
                return Err(CliError::Usage("--step must be positive".into()));
            }
            let count = if b < a {
                0
            } else {
                ((b - a) / step + 1) as usize
            };
            if count > SHIFT_GUARD {
                return Err(CliError::Usage(format!(
                    "--from/--to/--step give {count} shifts, guard is {SHIFT_GUARD}"
                )));
            }
            (0..count as i64).map(|i| a + i * step).collect()
        }
        _ => n.to_vec(),
    };
    if list.is_empty() {
        return Err(CliError::Usage(
            "no shifts given (use --n or --from/--to)".into(),
        ));
    }
    if list.len() > SHIFT_GUARD {
        return Err(CliError::Usage(format!(
            "{} shifts, guard is {SHIFT_GUARD}",
            list.len()
        )));
    }
    Ok(list)
}

pub fn cmd_simulate(c: &Construction, query: &Query) -> Result<Outcome, CliError> {
    match query {
        Query::Measure {
            a,
            b,
            n,
            from,
            to,
            step,
            resolution,
        } => {
            let (sa, sb) = (level_set(c, a)?, level_set(c, b)?);
            let list = shifts(n, *from, *to, *step)?;
            let marks = MarkedColumns::build(c, &[&sa, &sb], *resolution)?;
            let estimates: Vec<_> = list
                .iter()
                .map(|&k| (k, marks.intersection(k, 0, 1)))
                .collect();
            let max_resolved = estimates
                .iter()
                .map(|(_, e)| e.resolved.clone())
                .max()
                .unwrap_or_default();
            let max_unresolved = estimates
                .iter()
                .map(|(_, e)| e.unresolved.clone())
                .max()
                .unwrap_or_default();
            let all_zero = max_resolved.is_zero();
            let mut text = vec![format!(
                "mu(T^n A & B) at resolution {resolution}, {} shift(s)",
                list.len()
            )];
            if estimates.len() <= 20 {
                text.extend(estimates.iter().map(|(k, e)| {
                    format!(
                        "n = {k}: resolved {}, unresolved {}",
                        render::exact(&e.resolved),
                        render::exact(&e.unresolved)
                    )
                }));
            }
            text.push(format!(
                "largest resolved mass: {}",
                render::exact(&max_resolved)
            ));
            text.push(format!(
                "largest unresolved mass: {}",
                render::exact(&max_unresolved)
            ));
            let results = json!({
                "shifts": estimates.iter().map(|(k, e)| {
                    let mut row = render::estimate(e);
                    row["n"] = json!(k);
                    row
                }).collect::<Vec<_>>(),
                "max_resolved": render::rational(&max_resolved),
                "max_unresolved": render::rational(&max_unresolved),
                "all_resolved_zero": all_zero,
                "mass_a": render::rational(&marks.mass(0)),
                "mass_b": render::rational(&marks.mass(1)),
            });
            let params = json!({
                "query": "measure",
                "a": a, "b": b,
                "shifts": list.len(),
                "first_shift": list[0],
                "last_shift": list[list.len() - 1],
                "resolution": resolution,
            });
            Ok(Outcome {
                report: report("simulate", Some(c), params, results, EXIT_OK),
                text,
                code: EXIT_OK,
            })
        }
        Query::Witness {
            level,
            d,
            pair,
            powers,
            nmax,
            resolution,
        } => {
            let n_max = match nmax {
                Some(n) => *n,
                None => c.height(4.min(*resolution))?.to_u64().ok_or_else(|| {
                    CliError::Usage("default --nmax does not fit in 64 bits".into())
                })?,
            };
            let (found, results, params) = if !powers.is_empty() || !pair.is_empty() {
                if !level.is_empty() {
                    return Err(CliError::Usage(
                        "use either --level or --pair/--powers".into(),
                    ));
                }
                let pairs = pair
                    .iter()
                    .map(|p| {
                        let (i, j) = p
                            .split_once('>')
                            .ok_or_else(|| CliError::Usage(format!("pair `{p}`: expected I>J")))?;
                        Ok((parse_level(c, i)?, parse_level(c, j)?))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let hit = product_orbit_witness(c, &pairs, powers, n_max, *resolution)?;
                (
                    hit.is_some(),
                    json!({ "kind": "product_orbit", "n": hit }),
                    json!({ "query": "witness", "pairs": pair, "powers": powers, "nmax": n_max, "resolution": resolution }),
                )
            } else {
                if level.is_empty() {
                    return Err(CliError::Usage(
                        "witness needs --level or --pair/--powers".into(),
                    ));
                }
                let set = level_set(c, level)?;
                let hit = recurrence_witness(c, &set, *d, n_max, *resolution)?;
                (
                    hit.is_some(),
                    json!({
                        "kind": "multiple_recurrence",
                        "n": hit.as_ref().map(|(n, _)| *n),
                        "mass": hit.as_ref().map(|(_, e)| render::estimate(e)),
                    }),
                    json!({ "query": "witness", "level": level, "d": d, "nmax": n_max, "resolution": resolution }),
                )
            };
            let code = if found { EXIT_OK } else { EXIT_INCONCLUSIVE };
            let text = vec![match results["n"].as_u64() {
                Some(n) => format!("witness found at n = {n}"),
                None => format!("no witness with n <= {n_max} at resolution {resolution}"),
            }];
            Ok(Outcome {
                report: report("simulate", Some(c), params, results, code),
                text,
                code,
            })
        }
        Query::Parity {
            q,
            i,
            j,
            max_generation,
        } => {
            let (li, lj) = (parse_level(c, i)?, parse_level(c, j)?);
            let v = parity_obstruction(c, *q, &li, &lj, *max_generation)?;
            let code = verdict_code(v.value);
            let params = json!({ "query": "parity", "q": q, "i": li.to_string(), "j": lj.to_string(), "max_generation": max_generation });
            Ok(Outcome {
                report: report("simulate", Some(c), params, render::verdict(&v), code),
                text: render::verdict_text(&v),
                code,
            })
        }
    }
}

fn resolve_family(name: &str) -> Result<RankOneFamily, CliError> {
    if let Some(f) = registry::family(name) {
        return Ok(f);
    }
    Ok(RankOneFamily::from_construction(&load(name)?)?)
}

/// Class counts per height. Family heights past the guard are skipped;
/// explicitly requested ones (`strict`) are an error.
fn class_rows(
    heights: &[(Option<usize>, BigInt)],
    k: &[i64],
    strict: bool,
    text: &mut Vec<String>,
) -> Result<Json, CliError> {
    let mut rows = Vec::new();
    for (n, h) in heights {
        let size = num_traits::pow(h.clone(), k.len());
        let Some(h64) = h
            .to_u64()
            .filter(|_| strict || size <= BigInt::from(CLASS_GUARD))
        else {
            text.push(format!(
                "h = {h}: h^d = {size} exceeds the class guard {CLASS_GUARD}, skipped"
            ));
            rows.push(json!({ "generation": n, "height": h.to_string(), "skipped": "guard" }));
            continue;
        };
        let r = enumerate_product_classes(h64, k, false)?;
        let within = r.class_count <= r.bound;
        text.push(format!(
            "h = {h}: {} classes, bound {} ({})",
            r.class_count,
            r.bound,
            if within { "within" } else { "EXCEEDED" }
        ));
        rows.push(json!({
            "generation": n,
            "height": h.to_string(),
            "classes": r.class_count.to_string(),
            "bound": r.bound.to_string(),
            "within_bound": within,
        }));
    }
    Ok(Json::Array(rows))
}

pub fn cmd_products(args: &ProductsArgs) -> Result<Outcome, CliError> {
    if !args.heights.is_empty() {
        if args.k.is_empty() {
            return Err(CliError::Usage("--heights needs --k".into()));
        }
        let mut text = vec![format!(
            "classes of [0,h)^{} under k = {:?}",
            args.k.len(),
            args.k
        )];
        let hs: Vec<_> = args
            .heights
            .iter()
            .map(|&h| (None, BigInt::from(h)))
            .collect();
        let classes = class_rows(&hs, &args.k, true, &mut text)?;
        let params = json!({ "heights": args.heights, "k": args.k });
        return Ok(Outcome {
            report: report(
                "products",
                None,
                params,
                json!({ "classes": classes }),
                EXIT_OK,
            ),
            text,
            code: EXIT_OK,
        });
    }
    let name = args
        .family
        .as_deref()
        .ok_or_else(|| CliError::Usage("give a family name or --heights".into()))?;
    let family = resolve_family(name)?;
    let v = product_criterion(&family, args.d, args.nmax)?;
    let mut text = vec![format!(
        "{} with d = {}, n <= {}",
        family.name, args.d, args.nmax
    )];
    text.extend(render::verdict_text(&v));
    let slacks: Vec<_> = match &v.witness {
        Some(rank1lab_core::criteria::Witness::ValueTable(rows)) => {
            rows.iter().filter_map(|r| r.bound_slack.clone()).collect()
        }
        _ => Vec::new(),
    };
    let bound = (!slacks.is_empty()).then(|| {
        let holds = slacks
            .iter()
            .all(|s| *s >= num_rational::BigRational::zero());
        text.push(format!(
            "doubling bound h_n <= (n+1)/2 r_n for n <= {}: {}",
            args.nmax,
            if holds { "holds" } else { "violated" }
        ));
        json!({ "checked_through": args.nmax, "holds": holds })
    });
    let mut results = json!({ "criterion": render::verdict(&v), "doubling_bound": bound });
    if !args.k.is_empty() {
        let hs: Vec<_> = family
            .heights(args.nmax)?
            .into_iter()
            .enumerate()
            .map(|(n, h)| (Some(n), h))
            .collect();
        results["classes"] = class_rows(&hs, &args.k, false, &mut text)?;
    }
    let code = verdict_code(v.value);
    let params = json!({ "family": family.name, "d": args.d, "nmax": args.nmax, "k": args.k });
    Ok(Outcome {
        report: report("products", None, params, results, code),
        text,
        code,
    })
}

/// Report for registry outcomes; any mismatch gives exit code 1.
pub fn examples_report(outcomes: &[EntryOutcome]) -> Outcome {
    let mut text = Vec::new();
    let mut entries = Vec::new();
    for o in outcomes {
        text.push(format!(
            "{}: {}",
            o.name,
            if o.matched() { "matched" } else { "MISMATCH" }
        ));
        for r in &o.results {
            if r.matched {
                text.push(format!("  ok  {}: {}", r.description, r.actual));
            } else {
                text.push(format!(
                    "  mismatch  {}: expected {}, got {}",
                    r.description, r.expected, r.actual
                ));
            }
        }
        entries.push(json!({
            "name": o.name,
            "matched": o.matched(),
            "results": o.results.iter().map(|r| json!({
                "description": r.description,
                "expected": r.expected,
                "actual": r.actual,
                "matched": r.matched,
            })).collect::<Vec<_>>(),
        }));
    }
    let mismatches = outcomes.iter().filter(|o| !o.matched()).count();
    text.push(format!(
        "{} of {} examples matched",
        outcomes.len() - mismatches,
        outcomes.len()
    ));
    let code = if mismatches == 0 { EXIT_OK } else { EXIT_FAILS };
    Outcome {
        report: report(
            "examples",
            None,
            json!({ "action": "run" }),
            Json::Array(entries),
            code,
        ),
        text,
        code,
    }
}

pub fn cmd_examples(action: &ExamplesAction) -> Result<Outcome, CliError> {
    match action {
        ExamplesAction::List => {
            let entries = registry::entries();
            let text = entries
                .iter()
                .map(|e| format!("{:<24} {}", e.name, e.provenance))
                .collect();
            let list: Vec<_> = entries
                .iter()
                .map(|e| json!({ "name": e.name, "provenance": e.provenance }))
                .collect();
            Ok(Outcome {
                report: report(
                    "examples",
                    None,
                    json!({ "action": "list" }),
                    Json::Array(list),
                    EXIT_OK,
                ),
                text,
                code: EXIT_OK,
            })
        }
        ExamplesAction::RunAll => Ok(examples_report(&registry::run_all())),
        ExamplesAction::Run { name } => {
            let entry = registry::lookup(name)
                .ok_or_else(|| CliError::Usage(format!("no built-in example named `{name}`")))?;
            Ok(examples_report(&[registry::run_entry(&entry)]))
        }
    }
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Check { source, properties } => cmd_check(&load(source)?, properties),
        Command::Simulate { source, query } => cmd_simulate(&load(source)?, query),
        Command::Products(args) => cmd_products(args),
        Command::Examples { action } => cmd_examples(action),
    }
}

pub fn to_json(report: &Json) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Runs the program on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match cli.format {
        Format::Json => print!("{}", to_json(&outcome.report)),
        Format::Text => {
            for line in &outcome.text {
                println!("{line}");
            }
        }
    }
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, to_json(&outcome.report)) {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if cli.timing {
        eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    }
    outcome.code
}
