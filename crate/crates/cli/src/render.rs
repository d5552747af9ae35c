//! Turning exact values and verdicts into report fragments and text.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value as Json};

use rank1lab_core::criteria::{CriterionRow, ParityReport, Verdict, Witness};
use rank1lab_core::simulator::MeasureEstimate;
use rank1lab_core::tower::Construction;

const SIGNIFICANT: usize = 6;

fn pow10(e: i64) -> BigRational {
    let p = num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Six significant digits in the style of C's `%g`.
pub fn decimal(x: &BigRational) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let a = x.abs();
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    while pow10(e) > a {
        e -= 1;
    }
    while pow10(e + 1) <= a {
        e += 1;
    }
    let scaled = &a / pow10(e - (SIGNIFICANT as i64 - 1));
    let mut digits = (scaled + BigRational::new(1.into(), 2.into()))
        .floor()
        .to_integer();
    if digits >= num_traits::pow(BigInt::from(10), SIGNIFICANT) {
        digits /= 10;
        e += 1;
    }
    let s = digits.to_string();
    let trim = |frac: &str| frac.trim_end_matches('0').to_string();
    if (-4..SIGNIFICANT as i64).contains(&e) {
        let (int, frac) = if e >= 0 {
            let cut = e as usize + 1;
            (s[..cut].to_string(), trim(&s[cut..]))
        } else {
            (
                "0".to_string(),
                trim(&format!("{}{s}", "0".repeat((-e - 1) as usize))),
            )
        };
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        let frac = trim(&s[1..]);
        let mantissa = if frac.is_empty() {
            s[..1].to_string()
        } else {
            format!("{}.{frac}", &s[..1])
        };
        let esign = if e < 0 { '-' } else { '+' };
        format!("{sign}{mantissa}e{esign}{:02}", e.abs())
    }
}

/// The exact fraction with its decimal rendering alongside.
pub fn exact(x: &BigRational) -> String {
    format!("{x} (~{})", decimal(x))
}

pub fn rational(x: &BigRational) -> Json {
    json!({ "exact": x.to_string(), "decimal": decimal(x) })
}

pub fn estimate(est: &MeasureEstimate) -> Json {
    json!({ "resolved": rational(&est.resolved), "unresolved": rational(&est.unresolved) })
}

pub fn construction(c: &Construction) -> Json {
    json!({
        "name": c.name(),
        "group": c.group().to_string(),
        "schedule": c.schedule().kind().to_string(),
        "recipes": c.recipes().iter().map(|(name, _)| name.clone()).collect::<Vec<_>>(),
    })
}

pub fn rows(rows: &[CriterionRow]) -> Json {
    rows.iter()
        .map(|r| {
            json!({
                "n": r.n,
                "height": r.height.to_string(),
                "cut_product": r.cut_product.to_string(),
                "value": rational(&r.value),
                "bound_slack": r.bound_slack.as_ref().map(rational),
            })
        })
        .collect()
}

fn parity(p: &ParityReport) -> Json {
    json!({
        "kind": "parity",
        "modulus": p.modulus,
        "generations": [p.generations.0, p.generations.1],
        "i_to_i": p.i_to_i,
        "i_to_j": p.i_to_j,
    })
}

pub fn witness(w: &Witness) -> Json {
    match w {
        Witness::Span {
            generation,
            generators,
            certificate,
        } => json!({
            "kind": "span",
            "generation": generation,
            "generators": generators.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "coefficients": certificate.coefficients.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
        Witness::NonGenerating { generators } => json!({
            "kind": "non_generating",
            "generators": generators.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
        Witness::FailingResidue {
            generation,
            period_position,
            height_residue,
            modulus,
            exponent,
        } => json!({
            "kind": "failing_residue",
            "generation": generation,
            "period_position": period_position,
            "height_residue": height_residue.to_string(),
            "modulus": modulus.to_string(),
            "exponent": exponent.to_string(),
        }),
        Witness::ValueTable(table) => json!({ "kind": "value_table", "rows": rows(table) }),
        Witness::Parity(p) => parity(p),
    }
}

pub fn verdict(v: &Verdict) -> Json {
    json!({
        "property": v.property.key(),
        "value": v.value.key(),
        "witness": v.witness.as_ref().map(witness),
        "notes": v.notes,
    })
}

/// One or two lines describing a witness.
pub fn witness_text(w: &Witness) -> Vec<String> {
    match w {
        Witness::Span {
            generation,
            generators,
            certificate,
        } => {
            let terms: Vec<String> = certificate
                .coefficients
                .iter()
                .zip(generators)
                .filter(|(k, _)| !k.is_zero())
                .map(|(k, g)| format!("{k}*{g}"))
                .collect();
            vec![format!(
                "certificate at generation {generation}: (1, 0) = {}",
                if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join(" + ")
                }
            )]
        }
        Witness::NonGenerating { generators } => {
            let g: Vec<String> = generators.iter().map(ToString::to_string).collect();
            vec![format!(
                "labels {{{}}} do not generate the group",
                g.join(", ")
            )]
        }
        Witness::FailingResidue {
            generation,
            height_residue,
            modulus,
            exponent,
            ..
        } => {
            let first = if modulus.is_zero() {
                format!("(1, 0) is outside the span at generation {generation} (no D exists)")
            } else {
                format!(
                    "(1, 0) is outside the span at generation {generation} (D = {modulus}, h = {height_residue} mod D)"
                )
            };
            vec![
                first,
                format!("span meets the line in {exponent}Z: T^p is not ergodic for primes p dividing {exponent}"),
            ]
        }
        Witness::ValueTable(table) => table
            .iter()
            .map(|r| {
                let slack = r
                    .bound_slack
                    .as_ref()
                    .map(|s| format!(", bound slack {}", decimal(s)))
                    .unwrap_or_default();
                format!(
                    "n = {}: h = {}, v = {}{slack}",
                    r.n,
                    r.height,
                    exact(&r.value)
                )
            })
            .collect(),
        Witness::Parity(p) => vec![format!(
            "generations {}..={}: I-I residues {:?}, I-J residues {:?} mod {}",
            p.generations.0, p.generations.1, p.i_to_i, p.i_to_j, p.modulus
        )],
    }
}

pub fn verdict_text(v: &Verdict) -> Vec<String> {
    let mut out = vec![format!("{}: {}", v.property.key(), v.value)];
    if let Some(w) = &v.witness {
        out.extend(witness_text(w).into_iter().map(|l| format!("  {l}")));
    }
    out.extend(v.notes.iter().map(|n| format!("  note: {n}")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal(&q(0, 1)), "0");
        assert_eq!(decimal(&q(1, 3)), "0.333333");
        assert_eq!(decimal(&q(2, 3)), "0.666667");
        assert_eq!(decimal(&q(-5, 2)), "-2.5");
        assert_eq!(decimal(&q(137088, 1073741824)), "0.000127673");
        assert_eq!(decimal(&q(1, 1_000_000)), "1e-06");
        assert_eq!(decimal(&q(123456789, 1)), "1.23457e+08");
        assert_eq!(decimal(&q(9_999_996, 10)), "1e+06");
        assert_eq!(decimal(&q(100, 1)), "100");
        assert_eq!(decimal(&q(9_999_995, 10_000_000)), "1");
    }
}
