//! Decision procedures and their verdicts.

mod parity;
mod products;
mod pwm;

pub use parity::{parity_obstruction, ParityReport};
pub use products::{
    enumerate_product_classes, product_criterion, CriterionRow, CutRule, EquivClassReport,
    ProductSpec, RankOneFamily, SpacerRule, CLASS_GUARD,
};
pub use pwm::{
    check_condition1, check_condition2, check_condition2_simple, check_pwm, check_total_ergodicity,
    condition2_generators, RESIDUE_GUARD,
};

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::abelian::{AlgebraError, ExtendedVector, GroupElement, SpanCertificate};
use crate::simulator::SimError;
use crate::tower::TowerError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("enumeration of {size} tuples exceeds the guard {guard}")]
    Guard { size: BigInt, guard: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Ergodic,
    PowerWeaklyMixing,
    TotallyErgodic,
    PowerConservativeCriterion,
    /// Condition 2 alone (the span condition on t- and c-vectors).
    Condition2,
    /// Condition 2 in its single-recipe simple form.
    Condition2Simple,
    /// `T^q` is not ergodic, from a residue obstruction on copy distances.
    NonErgodicPower,
}

impl Property {
    pub fn key(self) -> &'static str {
        match self {
            Property::Ergodic => "ergodic",
            Property::PowerWeaklyMixing => "power_weakly_mixing",
            Property::TotallyErgodic => "totally_ergodic",
            Property::PowerConservativeCriterion => "power_conservative_criterion",
            Property::Condition2 => "condition2",
            Property::Condition2Simple => "condition2_simple",
            Property::NonErgodicPower => "non_ergodic_power",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Holds,
    Fails,
    Inconclusive,
}

impl Value {
    pub fn key(self) -> &'static str {
        match self {
            Value::Holds => "holds",
            Value::Fails => "fails",
            Value::Inconclusive => "inconclusive",
        }
    }

    /// Both values must hold for the conjunction to hold; any failure fails it.
    pub fn and(self, other: Value) -> Value {
        match (self, other) {
            (Value::Fails, _) | (_, Value::Fails) => Value::Fails,
            (Value::Holds, Value::Holds) => Value::Holds,
            _ => Value::Inconclusive,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `(1, 0)` written in the span of `generators` at one generation.
    Span {
        generation: usize,
        generators: Vec<ExtendedVector>,
        certificate: SpanCertificate,
    },
    /// Label differences that fail to generate the group.
    NonGenerating {
        generators: Vec<GroupElement>,
    },
    /// `(1, 0)` is not in the span at `generation`, which is decided modulo
    /// `modulus` (the lifted-system `D`; zero when no such `D` exists). `exponent` is the
    /// generator of the span's intersection with `Z x {0}` at that generation;
    /// `T^p` is not ergodic for every prime `p` dividing it.
    FailingResidue {
        generation: usize,
        period_position: usize,
        height_residue: BigInt,
        modulus: BigInt,
        exponent: BigInt,
    },
    ValueTable(Vec<CriterionRow>),
    Parity(ParityReport),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub property: Property,
    pub value: Value,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(property: Property, value: Value) -> Self {
        Verdict {
            property,
            value,
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn inconclusive(property: Property, reason: impl Into<String>) -> Self {
        Verdict::new(property, Value::Inconclusive).note(reason)
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn holds(&self) -> bool {
        self.value == Value::Holds
    }

    pub fn fails(&self) -> bool {
        self.value == Value::Fails
    }

    /// The lifted-system `D` reported by a failing condition-2 verdict.
    pub fn failing_modulus(&self) -> Option<&BigInt> {
        match &self.witness {
            Some(Witness::FailingResidue { modulus, .. }) => Some(modulus),
            _ => None,
        }
    }
}
