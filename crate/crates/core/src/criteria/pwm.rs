//! Ergodicity (condition 1) and power weak mixing (condition 2).
//!
//! Condition 2 quantifies over every generation `N`. With a periodic schedule
//! the c-vectors form a finite set `C`, and at period position `p` the lifted
//! system `L_p = {(s(p,i), g(p,i+1) - g(p,i), 1)} ∪ {(c, 0) : c ∈ C}` maps onto
//! `span(t_N ∪ C)` under `(a, b, k) -> (a + h_N k, b)` for every `N ≡ p`.
//! When `L_p` meets the first axis in `D_p ℤ` with `D_p > 0`, membership of
//! `(1, 0)` depends only on `h_N mod D_p`, and that residue sequence is
//! eventually periodic. When `D_p = 0` the condition fails outright.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{CriteriaError, Property, Value, Verdict, Witness};
use crate::abelian::{
    generates_group, span_contains, span_contains_mod, span_meet_line, ExtendedVector, GroupSpec,
};
use crate::tower::{c_vector_of, t_vector_with_height, Construction, GammaElement, Schedule};

/// Largest `D` for which the residue walk is attempted.
pub const RESIDUE_GUARD: u64 = 1_000_000;

const INELIGIBLE: &str =
    "schedule is an explicit prefix; decisions need a constant or periodic schedule";

fn period(c: &Construction) -> Result<Option<Vec<&GammaElement>>, CriteriaError> {
    match c.schedule().period() {
        Some(p) => Ok(Some(
            (0..p.len())
                .map(|n| c.recipe_at(n))
                .collect::<Result<_, _>>()?,
        )),
        None => Ok(None),
    }
}

pub fn check_condition1(c: &Construction) -> Result<Verdict, CriteriaError> {
    let Some(recipes) = period(c)? else {
        return Ok(Verdict::inconclusive(Property::Ergodic, INELIGIBLE));
    };
    let g = c.group();
    let mut diffs = Vec::new();
    let mut raw = Vec::new();
    for r in &recipes {
        for label in r.labels() {
            diffs.push(g.sub(label, r.label(0)));
            raw.push(label.clone());
        }
    }
    let holds = generates_group(g, &diffs)?;
    let raw_holds = generates_group(g, &raw)?;
    let mut verdict = if holds {
        Verdict::new(Property::Ergodic, Value::Holds)
    } else {
        Verdict::new(Property::Ergodic, Value::Fails)
            .with_witness(Witness::NonGenerating { generators: diffs })
    };
    if holds != raw_holds {
        verdict = verdict.note(format!(
            "labels g(N,i) themselves {} the group while the differences g(N,i) - g(N,0) {}",
            if raw_holds {
                "generate"
            } else {
                "do not generate"
            },
            if holds { "do" } else { "do not" },
        ));
    }
    Ok(verdict)
}

/// `{t_{N,i}} ∪ C` for the actual generation `N`.
pub fn condition2_generators(
    c: &Construction,
    n: usize,
) -> Result<Vec<ExtendedVector>, CriteriaError> {
    let recipes = period(c)?.ok_or_else(|| CriteriaError::Precondition(INELIGIBLE.to_string()))?;
    let p = n % recipes.len();
    let mut gens = t_vectors(c.group(), recipes[p], &c.height(n)?);
    gens.extend(c_vectors(c.group(), &recipes));
    Ok(gens)
}

fn t_vectors(g: &GroupSpec, recipe: &GammaElement, height: &BigInt) -> Vec<ExtendedVector> {
    (0..recipe.gamma() - 1)
        .map(|i| t_vector_with_height(g, recipe, i, height))
        .collect()
}

fn c_vectors(g: &GroupSpec, recipes: &[&GammaElement]) -> Vec<ExtendedVector> {
    let period = recipes.len();
    let mut out = Vec::new();
    for p in 0..period {
        let (lower, upper) = (recipes[p], recipes[(p + 1) % period]);
        for i in 0..upper.gamma() - 1 {
            let v = c_vector_of(g, lower, upper, i);
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// `t_{N,i}` with its height dependence pulled out into a third coordinate.
fn lifted(g: &GroupSpec, recipe: &GammaElement, fixed: &[ExtendedVector]) -> Vec<ExtendedVector> {
    let mut out: Vec<ExtendedVector> = (0..recipe.gamma() - 1)
        .map(|i| {
            ExtendedVector::new(
                vec![BigInt::from(recipe.spacer(i)), BigInt::one()],
                g.sub(recipe.label(i + 1), recipe.label(i)),
            )
        })
        .collect();
    out.extend(
        fixed
            .iter()
            .map(|v| ExtendedVector::new(vec![v.ints[0].clone(), BigInt::zero()], v.group.clone())),
    );
    out
}

/// Affine map `h -> a h + b (mod d)` taking `h_N` to `h_{N+P}` for `N ≡ p`.
fn period_map(recipes: &[&GammaElement], p: usize, d: &BigInt) -> (BigInt, BigInt) {
    let mut a = BigInt::one();
    let mut b = BigInt::zero();
    for k in 0..recipes.len() {
        let r = recipes[(p + k) % recipes.len()];
        let gamma = BigInt::from(r.gamma());
        let spacers = BigInt::from(r.spacer_total());
        a = (&a * &gamma).mod_floor(d);
        b = (&b * &gamma + spacers).mod_floor(d);
    }
    (a, b)
}

fn unit(g: &GroupSpec) -> ExtendedVector {
    ExtendedVector::single(1, g.zero())
}

/// Decides "(1, 0) ∈ span(t_N ∪ fixed) for every N" exactly.
fn decide(
    c: &Construction,
    recipes: &[&GammaElement],
    fixed: &[ExtendedVector],
    property: Property,
) -> Result<Verdict, CriteriaError> {
    let g = c.group();
    let target = unit(g);
    let period = recipes.len();
    let mut certificate = None;
    for (p, recipe) in recipes.iter().enumerate() {
        let at = |n: usize| -> Result<Vec<ExtendedVector>, CriteriaError> {
            let mut gens = t_vectors(g, recipe, &c.height(n)?);
            gens.extend_from_slice(fixed);
            Ok(gens)
        };
        let failure = |n: usize, modulus: BigInt| -> Result<Verdict, CriteriaError> {
            let gens = at(n)?;
            let exponent = span_meet_line(g, &gens, 1, 0)?;
            let residue = if modulus.is_zero() {
                c.height(n)?
            } else {
                c.height(n)?.mod_floor(&modulus)
            };
            Ok(
                Verdict::new(property, Value::Fails).with_witness(Witness::FailingResidue {
                    generation: n,
                    period_position: p,
                    height_residue: residue,
                    modulus,
                    exponent,
                }),
            )
        };

        let d = span_meet_line(g, &lifted(g, recipe, fixed), 2, 0)?;
        if d.is_zero() {
            return failure(p, d);
        }
        if d > BigInt::from(RESIDUE_GUARD) {
            return Ok(Verdict::inconclusive(
                property,
                format!("D = {d} exceeds the residue guard {RESIDUE_GUARD}"),
            ));
        }
        let (a, b) = period_map(recipes, p, &d);
        let mut x = c.height(p)?.mod_floor(&d);
        let mut seen = HashSet::new();
        let mut step = 0usize;
        while seen.insert(x.clone()) {
            let mut gens = t_vectors(g, recipe, &x);
            gens.extend_from_slice(fixed);
            if span_contains_mod(g, &gens, &target, std::slice::from_ref(&d))?.is_none() {
                return failure(p + step * period, d);
            }
            x = (&a * &x + &b).mod_floor(&d);
            step += 1;
        }
        if certificate.is_none() {
            let gens = at(p)?;
            let cert = span_contains(g, &gens, &target)?.ok_or_else(|| {
                CriteriaError::Precondition(format!(
                    "residue check passed but (1,0) is outside the exact span at generation {p}"
                ))
            })?;
            certificate = Some(Witness::Span {
                generation: p,
                generators: gens,
                certificate: cert,
            });
        }
    }
    let mut verdict = Verdict::new(property, Value::Holds);
    verdict.witness = certificate;
    Ok(verdict)
}

/// Condition 2 alone, through the finite reduction.
pub fn check_condition2(c: &Construction) -> Result<Verdict, CriteriaError> {
    let Some(recipes) = period(c)? else {
        return Ok(Verdict::inconclusive(Property::Condition2, INELIGIBLE));
    };
    let fixed = c_vectors(c.group(), &recipes);
    decide(c, &recipes, &fixed, Property::Condition2)
}

/// Power weak mixing: condition 1 and condition 2.
pub fn check_pwm(c: &Construction) -> Result<Verdict, CriteriaError> {
    let cond1 = check_condition1(c)?;
    let cond2 = check_condition2(c)?;
    let value = cond1.value.and(cond2.value);
    let mut verdict = Verdict::new(Property::PowerWeaklyMixing, value);
    verdict.witness = if cond1.fails() {
        cond1.witness.clone()
    } else {
        cond2.witness.clone()
    };
    verdict.notes.push(format!("condition 1: {}", cond1.value));
    verdict.notes.push(format!("condition 2: {}", cond2.value));
    verdict.notes.extend(cond1.notes);
    verdict.notes.extend(cond2.notes);
    verdict.notes.dedup();
    Ok(verdict)
}

/// Same verdict as power weak mixing, which is equivalent for these systems.
pub fn check_total_ergodicity(c: &Construction) -> Result<Verdict, CriteriaError> {
    let mut v = check_pwm(c)?;
    v.property = Property::TotallyErgodic;
    Ok(v)
}

/// Condition 2 in the form `(1,0) ∈ span{(s_i + h_N, g_{i+1} - g_i), (s_{n-1}, -g_{n-1})}`,
/// valid for a constant schedule whose recipe has `g_0 = 0`.
pub fn check_condition2_simple(c: &Construction) -> Result<Verdict, CriteriaError> {
    if !matches!(c.schedule(), Schedule::Constant(_)) {
        return Err(CriteriaError::Precondition(
            "the simple form needs a constant schedule".into(),
        ));
    }
    let recipe = c.recipe_at(0)?;
    if !recipe.label(0).is_zero() {
        return Err(CriteriaError::Precondition(
            "the simple form needs g_0 = 0".into(),
        ));
    }
    let g = c.group();
    let last = recipe.gamma() - 1;
    let closing = ExtendedVector::single(recipe.spacer(last), g.neg(recipe.label(last)));
    decide(c, &[recipe], &[closing], Property::Condition2Simple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    fn exponent(v: &Verdict) -> BigInt {
        match &v.witness {
            Some(Witness::FailingResidue { exponent, .. }) => exponent.clone(),
            other => panic!("no failing residue: {other:?}"),
        }
    }

    #[test]
    fn chacon_family() {
        for m in 2..=4 {
            let c = registry::chacon(m);
            assert!(check_condition1(&c).unwrap().holds());
            let pwm = check_pwm(&c).unwrap();
            assert!(pwm.holds(), "chacon {m}: {pwm:?}");
            let Some(Witness::Span {
                generators,
                certificate,
                ..
            }) = &pwm.witness
            else {
                panic!("missing certificate");
            };
            let g = c.group();
            assert!(certificate.verifies(g, generators, &unit(g), &[BigInt::zero()]));
            assert!(check_condition2_simple(&c).unwrap().holds());
        }
    }

    #[test]
    fn sec6_example_fails_with_even_exponent() {
        let c = registry::sec6_not_t2_ergodic();
        assert!(check_condition1(&c).unwrap().holds());
        let pwm = check_pwm(&c).unwrap();
        assert!(pwm.fails());
        assert_eq!(pwm.failing_modulus(), Some(&BigInt::zero()));
        assert_eq!(exponent(&pwm), BigInt::from(2));
        assert!(check_condition2_simple(&c).unwrap().fails());
        // the span at generation N is (1 + h_N) Z
        for (n, e) in [(0usize, 2i64), (1, 6), (2, 18), (3, 54)] {
            let gens = condition2_generators(&c, n).unwrap();
            assert_eq!(
                span_meet_line(c.group(), &gens, 1, 0).unwrap(),
                BigInt::from(e)
            );
        }
    }

    #[test]
    fn z_extension_holds() {
        let c = registry::z_extension();
        assert!(check_condition1(&c).unwrap().holds());
        assert!(check_pwm(&c).unwrap().holds());
        assert!(check_condition2_simple(&c).unwrap().holds());
    }

    #[test]
    fn two_point_fails_mod_two() {
        let c = registry::two_point();
        assert!(check_condition1(&c).unwrap().holds());
        let pwm = check_pwm(&c).unwrap();
        assert!(pwm.fails());
        assert_eq!(pwm.failing_modulus(), Some(&BigInt::from(2)));
        assert_eq!(exponent(&pwm), BigInt::from(2));
        assert!(check_condition2_simple(&c).unwrap().fails());
        assert!(check_total_ergodicity(&c).unwrap().fails());
    }

    #[test]
    fn zero_labels_in_nontrivial_group() {
        let g = GroupSpec::cyclic(2).unwrap();
        let recipe = GammaElement::new(vec![0, 1], vec![g.zero(), g.zero()]).unwrap();
        let c = Construction::constant("flat", g, recipe).unwrap();
        let v = check_condition1(&c).unwrap();
        assert!(v.fails());
        assert!(check_pwm(&c).unwrap().fails());
    }

    #[test]
    fn nonzero_first_label_is_reported() {
        let g = GroupSpec::cyclic(2).unwrap();
        let one = g.element([1i64]).unwrap();
        let recipe = GammaElement::new(vec![0, 1], vec![one.clone(), one]).unwrap();
        let c = Construction::constant("shifted", g, recipe).unwrap();
        let v = check_condition1(&c).unwrap();
        assert!(v.fails());
        assert_eq!(v.notes.len(), 1);
        assert!(matches!(
            check_condition2_simple(&c),
            Err(CriteriaError::Precondition(_))
        ));
    }

    #[test]
    fn prefix_schedules_are_inconclusive() {
        let c = registry::countable_chacon4();
        assert_eq!(check_condition1(&c).unwrap().value, Value::Inconclusive);
        assert_eq!(check_pwm(&c).unwrap().value, Value::Inconclusive);
        assert!(check_condition2_simple(&c).is_err());
    }

    #[test]
    fn periodic_schedule_mixing_two_recipes() {
        // alternating Chacon-2 and the (3; 1,1,0) recipe: heights 1, 3, 11, 23, ...
        let g = GroupSpec::trivial();
        let a = GammaElement::rank_one(vec![0, 1]).unwrap();
        let b = GammaElement::rank_one(vec![1, 1, 0]).unwrap();
        let c = Construction::new(
            Some("alt".into()),
            g,
            vec![("a".into(), a), ("b".into(), b)],
            Schedule::Periodic(vec![0, 1]),
        )
        .unwrap();
        let v = check_pwm(&c).unwrap();
        assert_ne!(v.value, Value::Inconclusive);
        for k in 1..4 {
            assert_eq!(
                check_pwm(&c.with_rotated_schedule(k)).unwrap().value,
                v.value
            );
        }
    }
}
