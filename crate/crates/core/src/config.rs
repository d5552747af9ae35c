//! Line-oriented text format for constructions.
//!
//! ```text
//! # comments start with '#'
//! name = two_point
//!
//! [group]
//! free_rank = 0
//! torsion = 2
//!
//! [gamma]
//! e = 2 | 0 1 | (0) (1)
//!
//! [schedule]
//! constant: e
//! ```
//!
//! A gamma line is `name = gamma | spacers | labels`. Spacers and labels are
//! whitespace separated and accept `value*count` repetition. Labels are
//! parenthesized integer tuples, `()` for the trivial group; the label field
//! may be omitted, meaning all labels are zero. The schedule is one of
//! `constant: name`, `periodic: name ...` or `prefix: name ...`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::abelian::{GroupElement, GroupSpec};
use crate::tower::{Construction, GammaElement, Schedule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {field}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

fn err(line: usize, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(PartialEq)]
enum Section {
    Top,
    Group,
    Gamma,
    Schedule,
}

fn expand<'a>(
    tokens: impl Iterator<Item = &'a str>,
    line: usize,
    field: &str,
) -> Result<Vec<&'a str>, ConfigError> {
    let mut out = Vec::new();
    for tok in tokens {
        match tok.rsplit_once('*') {
            Some((value, count)) => {
                let n: usize = count
                    .parse()
                    .map_err(|_| err(line, field, format!("bad repeat count in '{tok}'")))?;
                out.extend(std::iter::repeat_n(value, n));
            }
            None => out.push(tok),
        }
    }
    Ok(out)
}

fn parse_labels(text: &str, line: usize, field: &str) -> Result<Vec<Vec<BigInt>>, ConfigError> {
    // split into tokens "(..)" possibly followed by "*k"
    let mut tokens = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if !rest.starts_with('(') {
            return Err(err(line, field, format!("expected '(' at '{rest}'")));
        }
        let close = rest
            .find(')')
            .ok_or_else(|| err(line, field, "unclosed '('"))?;
        let mut end = close + 1;
        let after = &rest[end..];
        if let Some(stripped) = after.strip_prefix('*') {
            let digits = stripped.chars().take_while(char::is_ascii_digit).count();
            end += 1 + digits;
        }
        tokens.push(&rest[..end]);
        rest = rest[end..].trim_start();
    }
    let mut labels = Vec::new();
    for tok in expand(tokens.into_iter(), line, field)? {
        let inner = tok
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| err(line, field, format!("malformed tuple '{tok}'")))?;
        let coords = inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<BigInt>()
                    .map_err(|_| err(line, field, format!("'{s}' is not an integer")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        labels.push(coords);
    }
    Ok(labels)
}

fn parse_gamma(
    value: &str,
    group: &GroupSpec,
    line: usize,
    name: &str,
) -> Result<GammaElement, ConfigError> {
    let field = format!("gamma.{name}");
    let parts: Vec<&str> = value.split('|').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(err(line, &field, "expected 'gamma | spacers | labels'"));
    }
    let gamma: usize = parts[0].trim().parse().map_err(|_| {
        err(
            line,
            &field,
            format!("'{}' is not a cut count", parts[0].trim()),
        )
    })?;
    let spacers = expand(parts[1].split_whitespace(), line, &field)?
        .into_iter()
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| err(line, &field, format!("'{s}' is not a spacer count")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if spacers.len() != gamma {
        return Err(err(
            line,
            &field,
            format!("{} spacers for gamma = {gamma}", spacers.len()),
        ));
    }
    let labels: Vec<GroupElement> = match parts.get(2) {
        None => vec![group.zero(); gamma],
        Some(text) => parse_labels(text, line, &field)?
            .into_iter()
            .map(|coords| {
                group
                    .element(coords)
                    .map_err(|e| err(line, &field, e.to_string()))
            })
            .collect::<Result<_, _>>()?,
    };
    if labels.len() != gamma {
        return Err(err(
            line,
            &field,
            format!("{} labels for gamma = {gamma}", labels.len()),
        ));
    }
    GammaElement::new(spacers, labels).map_err(|e| err(line, &field, e.to_string()))
}

pub fn parse(text: &str) -> Result<Construction, ConfigError> {
    let mut section = Section::Top;
    let mut name = None;
    let mut free_rank = 0usize;
    let mut torsion: Vec<BigInt> = Vec::new();
    let mut group: Option<GroupSpec> = None;
    let mut recipes: Vec<(String, GammaElement)> = Vec::new();
    let mut schedule: Option<(usize, Schedule)> = None;
    let mut last_line = 0;
    let mut group_line = 0;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            section = match header.trim() {
                "group" => Section::Group,
                "gamma" => Section::Gamma,
                "schedule" => Section::Schedule,
                other => return Err(err(line, "section", format!("unknown section '{other}'"))),
            };
            continue;
        }
        match section {
            Section::Top => {
                let (key, value) = content
                    .split_once('=')
                    .ok_or_else(|| err(line, "name", "expected 'name = ...'"))?;
                if key.trim() != "name" {
                    return Err(err(line, key.trim(), "unknown top-level key"));
                }
                name = Some(value.trim().to_string());
            }
            Section::Group => {
                if group.is_some() {
                    return Err(err(line, "group", "group keys must precede [gamma]"));
                }
                let (key, value) = content
                    .split_once('=')
                    .ok_or_else(|| err(line, "group", "expected 'key = value'"))?;
                group_line = line;
                match key.trim() {
                    "free_rank" => {
                        free_rank = value.trim().parse().map_err(|_| {
                            err(line, "group.free_rank", "expected a non-negative integer")
                        })?
                    }
                    "torsion" => {
                        torsion = value
                            .split_whitespace()
                            .map(|s| {
                                s.parse::<BigInt>().map_err(|_| {
                                    err(line, "group.torsion", format!("'{s}' is not an integer"))
                                })
                            })
                            .collect::<Result<_, _>>()?
                    }
                    other => return Err(err(line, &format!("group.{other}"), "unknown group key")),
                }
            }
            Section::Gamma => {
                if group.is_none() {
                    group = Some(
                        GroupSpec::new(free_rank, torsion.clone())
                            .map_err(|e| err(group_line, "group", e.to_string()))?,
                    );
                }
                let (key, value) = content.split_once('=').ok_or_else(|| {
                    err(line, "gamma", "expected 'name = gamma | spacers | labels'")
                })?;
                let key = key.trim();
                if key.is_empty() || key.contains(char::is_whitespace) {
                    return Err(err(line, "gamma", format!("bad recipe name '{key}'")));
                }
                if recipes.iter().any(|(n, _)| n == key) {
                    return Err(err(line, &format!("gamma.{key}"), "duplicate recipe name"));
                }
                let g = group.as_ref().expect("set above");
                recipes.push((key.to_string(), parse_gamma(value, g, line, key)?));
            }
            Section::Schedule => {
                if schedule.is_some() {
                    return Err(err(line, "schedule", "only one schedule line is allowed"));
                }
                let (kind, names) = content
                    .split_once(':')
                    .ok_or_else(|| err(line, "schedule", "expected 'kind: names'"))?;
                let indices = names
                    .split_whitespace()
                    .map(|n| {
                        recipes
                            .iter()
                            .position(|(r, _)| r == n)
                            .ok_or_else(|| err(line, "schedule", format!("unknown recipe '{n}'")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if indices.is_empty() {
                    return Err(err(line, "schedule", "no recipes listed"));
                }
                let s = match kind.trim() {
                    "constant" if indices.len() == 1 => Schedule::Constant(indices[0]),
                    "constant" => {
                        return Err(err(line, "schedule", "constant takes exactly one recipe"))
                    }
                    "periodic" => Schedule::Periodic(indices),
                    "prefix" => Schedule::Prefix(indices),
                    other => return Err(err(line, "schedule", format!("unknown kind '{other}'"))),
                };
                schedule = Some((line, s));
            }
        }
    }
    let group = match group {
        Some(g) => g,
        None => GroupSpec::new(free_rank, torsion)
            .map_err(|e| err(group_line, "group", e.to_string()))?,
    };
    if recipes.is_empty() {
        return Err(err(last_line, "gamma", "no recipes defined"));
    }
    let (line, schedule) =
        schedule.ok_or_else(|| err(last_line, "schedule", "missing schedule"))?;
    Construction::new(name, group, recipes, schedule)
        .map_err(|e| err(line, "schedule", e.to_string()))
}

fn run_length<T: PartialEq>(items: &[T], render: impl Fn(&T) -> String) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let mut j = i + 1;
        while j < items.len() && items[j] == items[i] {
            j += 1;
        }
        let token = render(&items[i]);
        if j - i > 2 {
            parts.push(format!("{token}*{}", j - i));
        } else {
            parts.extend(std::iter::repeat_n(token, j - i));
        }
        i = j;
    }
    parts.join(" ")
}

pub fn serialize(c: &Construction) -> String {
    let mut out = String::new();
    if let Some(name) = c.name() {
        let _ = writeln!(out, "name = {name}\n");
    }
    let g = c.group();
    let _ = writeln!(out, "[group]\nfree_rank = {}", g.free_rank());
    if !g.torsion().is_empty() {
        let torsion: Vec<String> = g.torsion().iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "torsion = {}", torsion.join(" "));
    }
    out.push_str("\n[gamma]\n");
    for (name, recipe) in c.recipes() {
        let spacers = run_length(recipe.spacers(), u64::to_string);
        let labels = run_length(recipe.labels(), |l| {
            let coords: Vec<String> = l.coords().iter().map(ToString::to_string).collect();
            format!("({})", coords.join(","))
        });
        let _ = writeln!(out, "{name} = {} | {spacers} | {labels}", recipe.gamma());
    }
    out.push_str("\n[schedule]\n");
    let names = |idx: &[usize]| -> String {
        idx.iter()
            .map(|&i| c.recipes()[i].0.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = match c.schedule() {
        Schedule::Constant(e) => writeln!(out, "constant: {}", names(&[*e])),
        Schedule::Periodic(p) => writeln!(out, "periodic: {}", names(p)),
        Schedule::Prefix(p) => writeln!(out, "prefix: {}", names(p)),
    };
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    #[test]
    fn parses_two_point() {
        let text = "name = two_point\n[group]\ntorsion = 2\n[gamma]\ne = 2 | 0 1 | (0) (1)\n[schedule]\nconstant: e\n";
        let c = parse(text).unwrap();
        assert_eq!(c, registry::two_point());
    }

    #[test]
    fn labels_default_to_zero() {
        let c = parse("[gamma]\ne = 3 | 0*2 1\n[schedule]\nconstant: e\n").unwrap();
        assert_eq!(c.recipes()[0].1, registry::chacon(3).recipes()[0].1);
        assert_eq!(c.name(), None);
    }

    #[test]
    fn registry_round_trips() {
        for entry in registry::entries() {
            let c = (entry.build)();
            let text = serialize(&c);
            let back = parse(&text).unwrap_or_else(|e| panic!("{}: {e}", entry.name));
            assert_eq!(back, c, "{}", entry.name);
            assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let cases = [
            (
                "[gamma]\ne = 2 | 0 | ()()\n[schedule]\nconstant: e\n",
                2,
                "gamma.e",
            ),
            ("[group]\ntorsion = 1\n[gamma]\ne = 2 | 0 1\n", 2, "group"),
            (
                "[gamma]\ne = 2 | 0 1\n[schedule]\nconstant: f\n",
                4,
                "schedule",
            ),
            ("[group]\nfree_rank = x\n", 2, "group.free_rank"),
            (
                "[group]\ntorsion = 2\n[gamma]\ne = 2 | 0 1 | (0) (0,1)\n",
                4,
                "gamma.e",
            ),
            ("[weird]\n", 1, "section"),
            ("[gamma]\ne = 2 | 0 1\n", 2, "schedule"),
        ];
        for (text, line, field) in cases {
            let e = parse(text).unwrap_err();
            assert_eq!((e.line, e.field.as_str()), (line, field), "{text:?}: {e}");
        }
    }
}
