use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rank1lab_core::abelian::{
    generates_group, span_contains, span_meet_line, ExtendedVector, GroupElement, GroupSpec,
};

const BOX: i64 = 12;

/// Plain vectors: integer slots followed by group coordinates.
fn flat(v: &ExtendedVector) -> Vec<i64> {
    v.ints
        .iter()
        .chain(v.group.coords())
        .map(|x| x.to_i64().unwrap())
        .collect()
}

/// Exhaustive search over coefficients in `[-BOX, BOX]^n`.
fn box_search(moduli: &[i64], gens: &[Vec<i64>], target: &[i64]) -> bool {
    let n = gens.len();
    let dim = target.len();
    let reduce = |i: usize, x: i64| {
        if moduli[i] == 0 {
            x
        } else {
            x.rem_euclid(moduli[i])
        }
    };
    let goal: Vec<i64> = (0..dim).map(|i| reduce(i, target[i])).collect();
    let mut coeff = vec![-BOX; n];
    loop {
        let hit = (0..dim).all(|i| {
            let s: i64 = (0..n).map(|j| coeff[j] * gens[j][i]).sum();
            reduce(i, s) == goal[i]
        });
        if hit {
            return true;
        }
        let mut k = 0;
        loop {
            if k == n {
                return false;
            }
            coeff[k] += 1;
            if coeff[k] <= BOX {
                break;
            }
            coeff[k] = -BOX;
            k += 1;
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, spec: &GroupSpec, slots: usize, r: i64) -> ExtendedVector {
    let ints = (0..slots)
        .map(|_| BigInt::from(rng.gen_range(-r..=r)))
        .collect();
    let coords: Vec<i64> = (0..spec.dimension())
        .map(|_| rng.gen_range(-r..=r))
        .collect();
    ExtendedVector::new(ints, spec.element(coords).unwrap())
}

fn moduli(spec: &GroupSpec, slots: usize) -> Vec<i64> {
    let mut m = vec![0; slots];
    m.extend(spec.moduli().iter().map(|x| x.to_i64().unwrap()));
    m
}

#[test]
fn span_membership_matches_box_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let groups = [
        (GroupSpec::integers(1), "Z^2"),
        (GroupSpec::cyclic(2).unwrap(), "Z+Z/2"),
        (GroupSpec::cyclic(6).unwrap(), "Z+Z/6"),
    ];
    for (spec, label) in &groups {
        let mut positives = 0;
        for _ in 0..200 {
            let n = rng.gen_range(0..=4);
            let gens: Vec<ExtendedVector> = (0..n)
                .map(|_| random_vector(&mut rng, spec, 1, 3))
                .collect();
            let target = random_vector(&mut rng, spec, 1, 3);
            let fast = span_contains(spec, &gens, &target).unwrap();
            let flat_gens: Vec<Vec<i64>> = gens.iter().map(flat).collect();
            let slow = box_search(&moduli(spec, 1), &flat_gens, &flat(&target));
            assert_eq!(fast.is_some(), slow, "{label}: {gens:?} -> {target:?}");
            if let Some(cert) = fast {
                positives += 1;
                assert!(cert.verifies(spec, &gens, &target, &[BigInt::zero()]));
            }
        }
        assert!(
            positives > 20,
            "{label}: too few positive instances to be informative"
        );
    }
}

#[test]
fn empty_combination() {
    let spec = GroupSpec::cyclic(3).unwrap();
    let zero = ExtendedVector::zero(&spec, 1);
    let cert = span_contains(&spec, &[], &zero).unwrap().unwrap();
    assert!(cert.coefficients.is_empty());
    let one = ExtendedVector::single(1, spec.zero());
    assert!(span_contains(&spec, &[], &one).unwrap().is_none());
}

#[test]
fn line_meet_is_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let spec = GroupSpec::cyclic(2).unwrap();
    for _ in 0..150 {
        let n = rng.gen_range(1..=3);
        let gens: Vec<ExtendedVector> = (0..n)
            .map(|_| random_vector(&mut rng, &spec, 2, 2))
            .collect();
        let d = span_meet_line(&spec, &gens, 2, 0).unwrap();
        let flat_gens: Vec<Vec<i64>> = gens.iter().map(flat).collect();
        let m = moduli(&spec, 2);
        let first = (1..=12).find(|&k| box_search(&m, &flat_gens, &[k, 0, 0]));
        match d.to_i64().unwrap() {
            0 => assert_eq!(first, None, "{gens:?}"),
            k if k <= 12 => assert_eq!(first, Some(k), "{gens:?}"),
            _ => {}
        }
        if !d.is_zero() {
            let line = ExtendedVector::line(&spec, 2, 0, d.clone() * 3);
            assert!(span_contains(&spec, &gens, &line).unwrap().is_some());
        }
    }
}

#[test]
fn generation_agrees_with_basis_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let specs = [
        GroupSpec::new(1, vec![BigInt::from(6)]).unwrap(),
        GroupSpec::new(0, vec![BigInt::from(2), BigInt::from(4)]).unwrap(),
        GroupSpec::integers(2),
    ];
    for spec in &specs {
        for _ in 0..100 {
            let n = rng.gen_range(0..=3);
            let gens: Vec<GroupElement> = (0..n)
                .map(|_| {
                    let coords: Vec<i64> = (0..spec.dimension())
                        .map(|_| rng.gen_range(-3..=3))
                        .collect();
                    spec.element(coords).unwrap()
                })
                .collect();
            let lifted: Vec<ExtendedVector> = gens
                .iter()
                .map(|g| ExtendedVector::new(vec![], g.clone()))
                .collect();
            let all_basis = spec.basis().into_iter().all(|b| {
                span_contains(spec, &lifted, &ExtendedVector::new(vec![], b))
                    .unwrap()
                    .is_some()
            });
            assert_eq!(
                generates_group(spec, &gens).unwrap(),
                all_basis,
                "{spec} {gens:?}"
            );
        }
    }
}

#[test]
fn worked_examples() {
    let z2 = GroupSpec::cyclic(2).unwrap();
    let e = |i: i64, g: i64| ExtendedVector::single(i, z2.element([g]).unwrap());
    assert!(span_contains(&z2, &[e(3, 1), e(1, 1)], &e(1, 0))
        .unwrap()
        .is_none());
    let cert = span_contains(&z2, &[e(2, 1), e(1, 1)], &e(1, 0))
        .unwrap()
        .unwrap();
    assert!(cert.verifies(&z2, &[e(2, 1), e(1, 1)], &e(1, 0), &[BigInt::zero()]));

    let trivial = GroupSpec::trivial();
    let t = |a: i64, b: i64| {
        ExtendedVector::new(vec![BigInt::from(a), BigInt::from(b)], trivial.zero())
    };
    assert_eq!(
        span_meet_line(&trivial, &[t(0, 1), t(1, 0)], 2, 0).unwrap(),
        BigInt::from(1)
    );
    assert_eq!(
        span_meet_line(&trivial, &[t(1, 1)], 2, 0).unwrap(),
        BigInt::zero()
    );
    let l = |a: i64, g: i64, c: i64| {
        ExtendedVector::new(
            vec![BigInt::from(a), BigInt::from(c)],
            z2.element([g]).unwrap(),
        )
    };
    assert_eq!(
        span_meet_line(&z2, &[l(0, 1, 1), l(1, 1, 0)], 2, 0).unwrap(),
        BigInt::from(2)
    );
}

proptest! {
    #[test]
    fn certificates_reproduce_targets(
        raw in proptest::collection::vec((-20i64..20, 0i64..6), 0..5),
        target in (-20i64..20, 0i64..6),
    ) {
        let spec = GroupSpec::cyclic(6).unwrap();
        let gens: Vec<ExtendedVector> = raw
            .iter()
            .map(|&(a, g)| ExtendedVector::single(a, spec.element([g]).unwrap()))
            .collect();
        let t = ExtendedVector::single(target.0, spec.element([target.1]).unwrap());
        if let Some(cert) = span_contains(&spec, &gens, &t).unwrap() {
            prop_assert_eq!(cert.combine(&spec, &gens).unwrap_or_else(|| ExtendedVector::zero(&spec, 1)), t);
        }
    }

    #[test]
    fn torsion_is_normalized(a in -100i64..100, b in -100i64..100) {
        let spec = GroupSpec::new(1, vec![BigInt::from(4)]).unwrap();
        let x = spec.element([a, b]).unwrap();
        let y = spec.element([a, b + 4]).unwrap();
        prop_assert_eq!(&x, &y);
        let c = x.coords()[1].to_i64().unwrap();
        prop_assert!((0..4).contains(&c));
    }
}
