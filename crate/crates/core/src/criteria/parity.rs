use std::collections::BTreeSet;

use super::{CriteriaError, Property, Value, Verdict, Witness};
use crate::simulator::{LevelSet, MarkedColumns};
use crate::tower::{Construction, LevelRef};

/// Residues of copy distances observed while probing `T^q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityReport {
    pub modulus: u64,
    /// Generations inspected, inclusive.
    pub generations: (usize, usize),
    /// Residues of `I`-to-`I` distances seen in any one column.
    pub i_to_i: BTreeSet<u64>,
    /// Residues of `I`-to-`J` distances (position of `J` minus position of `I`).
    pub i_to_j: BTreeSet<u64>,
}

/// Checks that every `I`-to-`I` copy distance is `0 mod q` and every
/// `I`-to-`J` distance falls in one nonzero class mod `q`, for all
/// generations from the probes' own up to `max_generation`. Such a pattern
/// means no power `T^{qm}` maps `I` into `J`.
pub fn parity_obstruction(
    c: &Construction,
    q: u64,
    i: &LevelRef,
    j: &LevelRef,
    max_generation: usize,
) -> Result<Verdict, CriteriaError> {
    if q < 2 {
        return Err(CriteriaError::Precondition(
            "modulus must be at least 2".into(),
        ));
    }
    let start = i.generation.max(j.generation);
    if start > max_generation {
        return Err(CriteriaError::Precondition(format!(
            "probe levels live in generation {start}, above {max_generation}"
        )));
    }
    let (si, sj) = (LevelSet::single(i.clone()), LevelSet::single(j.clone()));
    let mut report = ParityReport {
        modulus: q,
        generations: (start, max_generation),
        i_to_i: BTreeSet::new(),
        i_to_j: BTreeSet::new(),
    };
    for m in start..=max_generation {
        let marks = MarkedColumns::build(c, &[&si, &sj], m)?;
        for ((_, pi), (_, pj)) in marks.positions(0).iter().zip(marks.positions(1).iter()) {
            let ri: BTreeSet<u64> = pi.iter().map(|&p| p as u64 % q).collect();
            let rj: BTreeSet<u64> = pj.iter().map(|&p| p as u64 % q).collect();
            for a in &ri {
                for b in &ri {
                    report.i_to_i.insert((b + q - a) % q);
                }
                for b in &rj {
                    report.i_to_j.insert((b + q - a) % q);
                }
            }
        }
    }
    let clean = report.i_to_i.iter().all(|&r| r == 0)
        && report.i_to_j.len() == 1
        && !report.i_to_j.contains(&0);
    let verdict = if clean {
        Verdict::new(Property::NonErgodicPower, Value::Holds).note(format!(
            "T^{q} maps no copy of {i} onto a copy of {j} up to generation {max_generation}"
        ))
    } else {
        Verdict::inconclusive(
            Property::NonErgodicPower,
            format!("copy distances fall in several classes mod {q}"),
        )
    };
    Ok(verdict.with_witness(Witness::Parity(report)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    #[test]
    fn two_point_parity() {
        let c = registry::two_point();
        let zero = c.group().zero();
        let top = LevelRef::new(1, zero.clone(), 2);
        let middle = LevelRef::new(1, zero, 1);
        let v = parity_obstruction(&c, 2, &top, &middle, 10).unwrap();
        assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn chacon2_is_mixed() {
        let c = registry::chacon(2);
        let zero = c.group().zero();
        let bottom = LevelRef::new(1, zero.clone(), 0);
        let middle = LevelRef::new(1, zero, 1);
        let v = parity_obstruction(&c, 2, &bottom, &middle, 3).unwrap();
        assert_eq!(v.value, Value::Inconclusive);
    }

    #[test]
    fn rejects_small_modulus() {
        let c = registry::chacon(2);
        let l = LevelRef::new(0, c.group().zero(), 0);
        assert!(parity_obstruction(&c, 1, &l, &l, 2).is_err());
    }
}
