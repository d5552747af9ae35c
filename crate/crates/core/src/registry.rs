//! Named constructions with known verdicts.

use num_bigint::BigInt;

use crate::abelian::{GroupElement, GroupSpec};
use crate::criteria::{
    self, check_condition1, check_condition2_simple, check_pwm, parity_obstruction,
    product_criterion, CriteriaError, CutRule, RankOneFamily, SpacerRule, Value,
};
use crate::simulator::{recurrence_witness, LevelSet};
use crate::tower::{Construction, GammaElement, LevelRef, Schedule};

/// Chacón-`m`: `m` pieces, one spacer on the last.
pub fn chacon(m: usize) -> Construction {
    assert!(m >= 2, "Chacon-m needs m >= 2");
    let mut spacers = vec![0; m];
    spacers[m - 1] = 1;
    Construction::constant(
        format!("chacon{m}"),
        GroupSpec::trivial(),
        GammaElement::rank_one(spacers).expect("valid recipe"),
    )
    .expect("valid construction")
}

/// `(3; 1, 1, 0)` over the trivial group: ergodic but `T^2` is not.
pub fn sec6_not_t2_ergodic() -> Construction {
    Construction::constant(
        "sec6_not_t2",
        GroupSpec::trivial(),
        GammaElement::rank_one(vec![1, 1, 0]).expect("valid recipe"),
    )
    .expect("valid construction")
}

/// A `Z`-extension: `(5; 0,0,0,1,0; 0,1,0,0,0)`.
pub fn z_extension() -> Construction {
    let g = GroupSpec::integers(1);
    let labels = [0i64, 1, 0, 0, 0]
        .iter()
        .map(|&x| g.element([x]).expect("integer label"))
        .collect();
    Construction::constant(
        "z-extension",
        g,
        GammaElement::new(vec![0, 0, 0, 1, 0], labels).expect("valid recipe"),
    )
    .expect("valid construction")
}

/// Number of free generators kept when truncating the countably generated group.
pub const COUNTABLE_RANK: usize = 4;

/// Extension of Chacón-4 by `Z^4` (a truncation of a countably generated
/// group): generation `n` uses `(4; 0,0,0,1; 0,0,e_v,0)` with `v` the 2-adic
/// valuation of `n + 1`. The prefix covers every `n` with `v < 4`.
pub fn countable_chacon4() -> Construction {
    let g = GroupSpec::integers(COUNTABLE_RANK);
    let basis = g.basis();
    let recipes = basis
        .iter()
        .enumerate()
        .map(|(v, e)| {
            let labels = vec![g.zero(), g.zero(), e.clone(), g.zero()];
            (
                format!("e{v}"),
                GammaElement::new(vec![0, 0, 0, 1], labels).expect("valid recipe"),
            )
        })
        .collect();
    let length = (1usize << COUNTABLE_RANK) - 1;
    let prefix = (0..length)
        .map(|n| (n + 1).trailing_zeros() as usize)
        .collect();
    Construction::new(
        Some("countable-chacon4".into()),
        g,
        recipes,
        Schedule::Prefix(prefix),
    )
    .expect("valid construction")
}

/// Two-point extension of Chacón-2: `G = Z/2`, `(2; 0,1; 0,1)`.
pub fn two_point() -> Construction {
    let g = GroupSpec::cyclic(2).expect("valid modulus");
    let labels = vec![g.zero(), g.element([1i64]).expect("valid label")];
    Construction::constant(
        "two_point",
        g,
        GammaElement::new(vec![0, 1], labels).expect("valid recipe"),
    )
    .expect("valid construction")
}

/// Generations kept when a staircase is built explicitly (`r_4 = 65536`).
pub const STAIRCASE_GENERATIONS: usize = 5;

pub fn staircase_family() -> RankOneFamily {
    RankOneFamily::new(
        "staircase-2pow2pow",
        CutRule::DoubleExponential,
        SpacerRule::Staircase,
    )
}

pub fn staircase_variant_family() -> RankOneFamily {
    RankOneFamily::new(
        "staircase-even-variant",
        CutRule::DoubleExponential,
        SpacerRule::EvenStaircase,
    )
}

/// Staircase with `r_m = 2^(2^m)`, `s_{m,i} = i`, as an explicit prefix.
pub fn staircase() -> Construction {
    staircase_family()
        .construction(STAIRCASE_GENERATIONS)
        .expect("buildable prefix")
}

/// Staircase variant with `s_{m,i} = 2i` on even `i`, zero on odd `i`.
pub fn staircase_variant() -> Construction {
    staircase_variant_family()
        .construction(STAIRCASE_GENERATIONS)
        .expect("buildable prefix")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Ergodic,
    PowerWeaklyMixing,
    Condition2Simple,
}

/// A level given by generation, color coordinates and height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Probe {
    pub generation: usize,
    pub color: Vec<i64>,
    pub height: u64,
}

impl Probe {
    pub fn new(generation: usize, color: &[i64], height: u64) -> Self {
        Probe {
            generation,
            color: color.to_vec(),
            height,
        }
    }

    pub fn level(&self, g: &GroupSpec) -> Result<LevelRef, CriteriaError> {
        let color: GroupElement = g.element(self.color.iter().copied())?;
        Ok(LevelRef::new(self.generation, color, self.height))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Verdict {
        check: Check,
        expected: Value,
    },
    /// Condition 2 fails and the witness modulus is this `D`.
    FailingModulus(BigInt),
    Parity {
        q: u64,
        i: Probe,
        j: Probe,
        max_generation: usize,
        expected: Value,
    },
    Criterion {
        d: usize,
        n_max: usize,
        expected: Value,
    },
    /// A recurrence witness exists for every `d` up to `d_max`, searching
    /// `n <= h_{n_max_generation}` at resolution `resolution`.
    Recurrence {
        probe: Probe,
        d_max: usize,
        n_max_generation: usize,
        resolution: usize,
    },
}

#[derive(Clone, Debug)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub provenance: &'static str,
    pub build: fn() -> Construction,
    pub family: Option<fn() -> RankOneFamily>,
    pub expectations: Vec<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectationResult {
    pub description: String,
    pub expected: String,
    pub actual: String,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryOutcome {
    pub name: String,
    pub results: Vec<ExpectationResult>,
}

impl EntryOutcome {
    pub fn matched(&self) -> bool {
        self.results.iter().all(|r| r.matched)
    }
}

fn verdict(check: Check, expected: Value) -> Expectation {
    Expectation::Verdict { check, expected }
}

fn recurrence(probe: Probe) -> Expectation {
    Expectation::Recurrence {
        probe,
        d_max: 3,
        n_max_generation: 4,
        resolution: 6,
    }
}

pub fn entries() -> Vec<RegistryEntry> {
    use Check::*;
    use Value::*;
    let chacon_checks = || {
        vec![
            verdict(Ergodic, Holds),
            verdict(PowerWeaklyMixing, Holds),
            verdict(Condition2Simple, Holds),
        ]
    };
    let mut chacon2 = chacon_checks();
    chacon2.push(Expectation::Parity {
        q: 2,
        i: Probe::new(1, &[], 0),
        j: Probe::new(1, &[], 1),
        max_generation: 3,
        expected: Inconclusive,
    });
    chacon2.push(recurrence(Probe::new(1, &[], 0)));
    vec![
        RegistryEntry {
            name: "chacon2",
            provenance: "Chacon-2 over the trivial group; power weakly mixing",
            build: || chacon(2),
            family: None,
            expectations: chacon2,
        },
        RegistryEntry {
            name: "chacon3",
            provenance: "Chacon-3 over the trivial group; power weakly mixing",
            build: || chacon(3),
            family: None,
            expectations: chacon_checks(),
        },
        RegistryEntry {
            name: "chacon4",
            provenance: "Chacon-4 over the trivial group; power weakly mixing",
            build: || chacon(4),
            family: None,
            expectations: chacon_checks(),
        },
        RegistryEntry {
            name: "sec6_not_t2",
            provenance: "(3; 1,1,0) over the trivial group; ergodic, T^2 not ergodic",
            build: sec6_not_t2_ergodic,
            family: None,
            expectations: vec![
                verdict(Ergodic, Holds),
                verdict(PowerWeaklyMixing, Fails),
                verdict(Condition2Simple, Fails),
                Expectation::Parity {
                    q: 2,
                    i: Probe::new(0, &[], 0),
                    j: Probe::new(1, &[], 1),
                    max_generation: 7,
                    expected: Holds,
                },
                recurrence(Probe::new(1, &[], 0)),
            ],
        },
        RegistryEntry {
            name: "z-extension",
            provenance:
                "Z-extension (5; 0,0,0,1,0; 0,1,0,0,0); infinite measure, power weakly mixing",
            build: z_extension,
            family: None,
            expectations: vec![
                verdict(Ergodic, Holds),
                verdict(PowerWeaklyMixing, Holds),
                verdict(Condition2Simple, Holds),
            ],
        },
        RegistryEntry {
            name: "countable-chacon4",
            provenance: "Chacon-4 extended by Z^4 along the 2-adic valuation rule; simulation only",
            build: countable_chacon4,
            family: None,
            expectations: vec![
                verdict(PowerWeaklyMixing, Inconclusive),
                recurrence(Probe::new(1, &[0, 0, 0, 0], 0)),
            ],
        },
        RegistryEntry {
            name: "two_point",
            provenance: "two-point extension of Chacon-2 by Z/2; T^2 not ergodic",
            build: two_point,
            family: None,
            expectations: vec![
                verdict(Ergodic, Holds),
                verdict(PowerWeaklyMixing, Fails),
                Expectation::FailingModulus(BigInt::from(2)),
                verdict(Condition2Simple, Fails),
                Expectation::Parity {
                    q: 2,
                    i: Probe::new(1, &[0], 2),
                    j: Probe::new(1, &[0], 1),
                    max_generation: 10,
                    expected: Holds,
                },
            ],
        },
        RegistryEntry {
            name: "staircase-2pow2pow",
            provenance: "staircase with r_m = 2^(2^m), s_i = i; power conservative",
            build: staircase,
            family: Some(staircase_family),
            expectations: vec![
                Expectation::Criterion {
                    d: 1,
                    n_max: 6,
                    expected: Holds,
                },
                Expectation::Criterion {
                    d: 2,
                    n_max: 6,
                    expected: Holds,
                },
            ],
        },
        RegistryEntry {
            name: "staircase-even-variant",
            provenance: "r_m = 2^(2^m), s_i = 2i on even i; power conservative, T^2 not ergodic",
            build: staircase_variant,
            family: Some(staircase_variant_family),
            expectations: vec![
                Expectation::Criterion {
                    d: 2,
                    n_max: 6,
                    expected: Holds,
                },
                Expectation::Parity {
                    q: 2,
                    i: Probe::new(1, &[], 1),
                    j: Probe::new(1, &[], 0),
                    max_generation: 4,
                    expected: Holds,
                },
            ],
        },
    ]
}

pub fn lookup(name: &str) -> Option<RegistryEntry> {
    entries().into_iter().find(|e| e.name == name)
}

pub fn family(name: &str) -> Option<RankOneFamily> {
    entries()
        .into_iter()
        .find(|e| e.name == name)
        .and_then(|e| e.family.map(|f| f()))
}

fn describe_check(check: Check) -> &'static str {
    match check {
        Check::Ergodic => "ergodic",
        Check::PowerWeaklyMixing => "power weakly mixing",
        Check::Condition2Simple => "condition 2 (simple form)",
    }
}

fn result(description: String, expected: String, actual: String) -> ExpectationResult {
    let matched = expected == actual;
    ExpectationResult {
        description,
        expected,
        actual,
        matched,
    }
}

fn evaluate(
    c: &Construction,
    entry: &RegistryEntry,
    e: &Expectation,
) -> Result<ExpectationResult, CriteriaError> {
    Ok(match e {
        Expectation::Verdict { check, expected } => {
            let v = match check {
                Check::Ergodic => check_condition1(c)?,
                Check::PowerWeaklyMixing => check_pwm(c)?,
                Check::Condition2Simple => check_condition2_simple(c)?,
            };
            result(
                describe_check(*check).to_string(),
                expected.to_string(),
                v.value.to_string(),
            )
        }
        Expectation::FailingModulus(d) => {
            let v = criteria::check_condition2(c)?;
            let actual = match v.failing_modulus() {
                Some(m) if v.fails() => format!("fails with D = {m}"),
                _ => v.value.to_string(),
            };
            result(
                "condition 2 modulus".into(),
                format!("fails with D = {d}"),
                actual,
            )
        }
        Expectation::Parity {
            q,
            i,
            j,
            max_generation,
            expected,
        } => {
            let (li, lj) = (i.level(c.group())?, j.level(c.group())?);
            let v = parity_obstruction(c, *q, &li, &lj, *max_generation)?;
            result(
                format!("T^{q} obstruction {li} -> {lj} up to generation {max_generation}"),
                expected.to_string(),
                v.value.to_string(),
            )
        }
        Expectation::Criterion { d, n_max, expected } => {
            let family = entry
                .family
                .map(|f| f())
                .ok_or_else(|| CriteriaError::Precondition("entry has no rule family".into()))?;
            let v = product_criterion(&family, *d, *n_max)?;
            result(
                format!("product criterion d = {d}, n <= {n_max}"),
                expected.to_string(),
                v.value.to_string(),
            )
        }
        Expectation::Recurrence {
            probe,
            d_max,
            n_max_generation,
            resolution,
        } => {
            let level = probe.level(c.group())?;
            let set = LevelSet::single(level.clone());
            let n_max = c.height(*n_max_generation)?;
            let n_max = u64::try_from(n_max).unwrap_or(u64::MAX);
            let mut found = Vec::new();
            for d in 1..=*d_max {
                match recurrence_witness(c, &set, d, n_max, *resolution)? {
                    Some((n, _)) => found.push(format!("d={d}: n={n}")),
                    None => found.push(format!("d={d}: none")),
                }
            }
            let actual = if found.iter().any(|f| f.ends_with("none")) {
                found.join(", ")
            } else {
                "found".to_string()
            };
            ExpectationResult {
                description: format!(
                    "recurrence witnesses from {level}, d <= {d_max}, M = {resolution}"
                ),
                expected: "found".into(),
                matched: actual == "found",
                actual: if actual == "found" {
                    found.join(", ")
                } else {
                    actual
                },
            }
        }
    })
}

/// Evaluates every expectation of one entry; errors count as mismatches.
pub fn run_entry(entry: &RegistryEntry) -> EntryOutcome {
    let c = (entry.build)();
    let results = entry
        .expectations
        .iter()
        .map(|e| {
            evaluate(&c, entry, e).unwrap_or_else(|err| ExpectationResult {
                description: format!("{e:?}"),
                expected: "no error".into(),
                actual: err.to_string(),
                matched: false,
            })
        })
        .collect();
    EntryOutcome {
        name: entry.name.to_string(),
        results,
    }
}

pub fn run_all() -> Vec<EntryOutcome> {
    entries().iter().map(run_entry).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let names: Vec<_> = entries().iter().map(|e| e.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(names.len(), sorted.len());
        assert_eq!(names.len(), 9);
    }

    #[test]
    fn countable_prefix_follows_valuations() {
        let c = countable_chacon4();
        let g = c.group().clone();
        for n in 0..15 {
            let v = (n + 1usize).trailing_zeros() as usize;
            assert_eq!(c.label(n, 2).unwrap(), &g.basis()[v]);
        }
        assert!(c.height(16).is_err());
    }

    #[test]
    fn corrupted_expectation_is_reported() {
        let mut entry = lookup("chacon3").unwrap();
        entry.expectations[1] = verdict(Check::PowerWeaklyMixing, Value::Fails);
        let outcome = run_entry(&entry);
        assert!(!outcome.matched());
        let bad: Vec<_> = outcome.results.iter().filter(|r| !r.matched).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].expected, "fails");
        assert_eq!(bad[0].actual, "holds");
    }
}
