use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rank1lab_core::abelian::GroupSpec;
use rank1lab_core::criteria::{
    check_condition1, check_condition2, check_condition2_simple, check_pwm,
    enumerate_product_classes, product_criterion, Value, Witness,
};
use rank1lab_core::registry;
use rank1lab_core::simulator::{product_orbit_witness, LevelSet, MarkedColumns};
use rank1lab_core::tower::{Construction, GammaElement, LevelRef, Schedule};

fn random_constant(rng: &mut ChaCha8Rng) -> Construction {
    let group = match rng.gen_range(0..4) {
        0 => GroupSpec::trivial(),
        1 => GroupSpec::cyclic(2).unwrap(),
        2 => GroupSpec::cyclic(3).unwrap(),
        _ => GroupSpec::integers(1),
    };
    let gamma = rng.gen_range(2..=4);
    let spacers: Vec<u64> = (0..gamma).map(|_| rng.gen_range(0..=3)).collect();
    let labels = (0..gamma)
        .map(|i| {
            if i == 0 || group.is_trivial() {
                group.zero()
            } else {
                group.element([rng.gen_range(-1i64..=2)]).unwrap()
            }
        })
        .collect();
    let recipe = GammaElement::new(spacers, labels).unwrap();
    Construction::constant("random", group, recipe).unwrap()
}

#[test]
fn simple_form_agrees_with_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut seen = [0usize; 3];
    for _ in 0..100 {
        let c = random_constant(&mut rng);
        let reduced = check_condition2(&c).unwrap();
        let simple = check_condition2_simple(&c).unwrap();
        assert_eq!(reduced.value, simple.value, "{c:?}");
        let cond1 = check_condition1(&c).unwrap();
        assert_eq!(check_pwm(&c).unwrap().value, cond1.value.and(simple.value));
        seen[match simple.value {
            Value::Holds => 0,
            Value::Fails => 1,
            Value::Inconclusive => 2,
        }] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn registry_agrees_where_both_apply() {
    for entry in registry::entries() {
        let c = (entry.build)();
        if let Ok(simple) = check_condition2_simple(&c) {
            assert_eq!(
                simple.value,
                check_condition2(&c).unwrap().value,
                "{}",
                entry.name
            );
        }
    }
}

#[test]
fn holding_verdicts_carry_verified_certificates() {
    for entry in registry::entries() {
        let c = (entry.build)();
        let v = check_condition2(&c).unwrap();
        if let Some(Witness::Span {
            generators,
            certificate,
            ..
        }) = &v.witness
        {
            let target = rank1lab_core::abelian::ExtendedVector::single(1, c.group().zero());
            assert!(certificate.verifies(c.group(), generators, &target, &[BigInt::from(0)]));
        } else {
            assert!(!v.holds(), "{}", entry.name);
        }
    }
}

fn small_recipe() -> impl Strategy<Value = (Vec<u64>, Vec<i64>)> {
    (2usize..4).prop_flat_map(|gamma| {
        (
            proptest::collection::vec(0u64..3, gamma),
            proptest::collection::vec(0i64..2, gamma),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn rotation_keeps_the_verdict(
        recipes in proptest::collection::vec(small_recipe(), 2..4),
        order in proptest::collection::vec(0usize..3, 2..4),
    ) {
        let g = GroupSpec::cyclic(2).unwrap();
        let named: Vec<(String, GammaElement)> = recipes
            .iter()
            .enumerate()
            .map(|(k, (s, l))| {
                let labels = l.iter().map(|&x| g.element([x]).unwrap()).collect();
                (format!("r{k}"), GammaElement::new(s.clone(), labels).unwrap())
            })
            .collect();
        let order: Vec<usize> = order.iter().map(|&i| i % named.len()).collect();
        let c = Construction::new(None, g, named, Schedule::Periodic(order.clone())).unwrap();
        let base = check_pwm(&c).unwrap().value;
        for k in 1..order.len() {
            let rotated = c.with_rotated_schedule(k);
            prop_assert_eq!(check_pwm(&rotated).unwrap().value, base);
        }
    }
}

fn closed_form(h: u64, k: &[i64]) -> BigInt {
    let all = Pow::pow(BigInt::from(h), k.len());
    let free: BigInt = k
        .iter()
        .map(|&k| BigInt::from(h.saturating_sub(k as u64)))
        .product();
    all - free
}

#[test]
fn class_counts_match_closed_form_and_bound() {
    let mut instances = 0;
    for d in 1..=3usize {
        let combos = 4usize.pow(d as u32);
        for code in 0..combos {
            let k: Vec<i64> = (0..d)
                .map(|i| (code / 4usize.pow(i as u32) % 4) as i64 + 1)
                .collect();
            for h in 1..=40u64 {
                let report = enumerate_product_classes(h, &k, d == 2 && h <= 12).unwrap();
                assert_eq!(report.class_count, closed_form(h, &k), "h = {h}, k = {k:?}");
                assert!(report.class_count <= report.bound, "h = {h}, k = {k:?}");
                if let Some(reps) = &report.representatives {
                    assert_eq!(BigInt::from(reps.len()), report.class_count);
                }
                instances += 1;
            }
        }
    }
    assert_eq!(instances, 40 * (4 + 16 + 64));
}

#[test]
fn small_class_examples() {
    let r = enumerate_product_classes(3, &[1, 2], true).unwrap();
    assert_eq!(r.class_count, BigInt::from(7));
    assert_eq!(r.bound, BigInt::from(9));
    let r = enumerate_product_classes(5, &[2, 3], false).unwrap();
    assert_eq!(r.class_count, BigInt::from(19));
    assert_eq!(r.bound, BigInt::from(25));
    assert!(enumerate_product_classes(5, &[2, -1], false).is_err());
}

#[test]
fn criterion_values_decrease_for_small_d() {
    let family = registry::staircase_family();
    for d in 2..=4 {
        let v = product_criterion(&family, d, 6).unwrap();
        let Some(Witness::ValueTable(rows)) = &v.witness else {
            panic!("missing table");
        };
        for w in rows[1..].windows(2) {
            assert!(w[1].value < w[0].value, "d = {d}, n = {}", w[1].n);
        }
    }
    let v = product_criterion(&family, 2, 6).unwrap();
    let Some(Witness::ValueTable(rows)) = &v.witness else {
        unreachable!()
    };
    assert_eq!(
        rows[4].value,
        BigRational::new(BigInt::from(137088), BigInt::from(1073741824u64))
    );
    for row in rows {
        assert!(row
            .bound_slack
            .as_ref()
            .is_some_and(|s| *s >= BigRational::from_integer(0.into())));
    }
}

/// When the decision procedure says power weakly mixing, short product orbits
/// of two bottom levels meet; when it fails with exponent `E`, no `T^{Em}` links
/// the obstruction levels.
#[test]
fn decisions_and_simulation_agree_on_small_cases() {
    let c = registry::chacon(2);
    let zero = c.group().zero();
    let bottom = LevelRef::new(1, zero.clone(), 0);
    let middle = LevelRef::new(1, zero, 1);
    assert!(check_pwm(&c).unwrap().holds());
    for powers in [[1i64, 2], [2, 3], [-1, 3]] {
        let pairs = [
            (bottom.clone(), middle.clone()),
            (middle.clone(), bottom.clone()),
        ];
        let hit = product_orbit_witness(&c, &pairs, &powers, 500, 6).unwrap();
        assert!(hit.is_some(), "{powers:?}");
    }

    let c = registry::sec6_not_t2_ergodic();
    let v = check_pwm(&c).unwrap();
    let Some(Witness::FailingResidue { exponent, .. }) = &v.witness else {
        panic!("expected a failing residue, got {v:?}");
    };
    assert_eq!(*exponent, BigInt::from(2));
    let i = LevelSet::single(LevelRef::new(0, c.group().zero(), 0));
    let j = LevelSet::single(LevelRef::new(1, c.group().zero(), 1));
    let marks = MarkedColumns::build(&c, &[&i, &j], 7).unwrap();
    for m in -200..=200i64 {
        assert_eq!(
            marks.intersection(2 * m, 0, 1).resolved,
            BigRational::from_integer(0.into())
        );
    }
}
