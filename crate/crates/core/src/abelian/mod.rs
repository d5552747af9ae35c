//! Finitely generated abelian groups `Z^r + Z/d_1 + ... + Z/d_k`, their
//! elements, and integer-span questions in `Z^m x G`.

mod smith;

pub use smith::{smith_normal_form, IntMatrix, ModularSystem, SmithForm};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("torsion modulus {0} is below 2")]
    BadModulus(BigInt),
    #[error("element has {found} coordinates, group expects {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("vector has {found} integer slots, expected {expected}")]
    SlotCount { expected: usize, found: usize },
    #[error("slot {slot} out of range for {slots} integer slots")]
    SlotOutOfRange { slot: usize, slots: usize },
}

/// `Z^free_rank + Z/torsion[0] + ...`; the coordinates of an element list the
/// free part first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    free_rank: usize,
    torsion: Vec<BigInt>,
}

impl GroupSpec {
    pub fn new(free_rank: usize, torsion: Vec<BigInt>) -> Result<Self, AlgebraError> {
        if let Some(bad) = torsion.iter().find(|d| **d < BigInt::from(2)) {
            return Err(AlgebraError::BadModulus(bad.clone()));
        }
        Ok(GroupSpec { free_rank, torsion })
    }

    pub fn trivial() -> Self {
        GroupSpec {
            free_rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn integers(rank: usize) -> Self {
        GroupSpec {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    pub fn cyclic(order: u64) -> Result<Self, AlgebraError> {
        Self::new(0, vec![BigInt::from(order)])
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn dimension(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.dimension() == 0
    }

    /// Group order, `None` for infinite groups.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion.iter().product())
    }

    /// Modulus of coordinate `i` (zero for free coordinates).
    pub fn modulus(&self, i: usize) -> BigInt {
        if i < self.free_rank {
            BigInt::zero()
        } else {
            self.torsion[i - self.free_rank].clone()
        }
    }

    pub fn moduli(&self) -> Vec<BigInt> {
        (0..self.dimension()).map(|i| self.modulus(i)).collect()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            coords: vec![BigInt::zero(); self.dimension()],
        }
    }

    /// Reduces torsion coordinates into `[0, d)`.
    pub fn element<I, T>(&self, coords: I) -> Result<GroupElement, AlgebraError>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let coords: Vec<BigInt> = coords.into_iter().map(Into::into).collect();
        if coords.len() != self.dimension() {
            return Err(AlgebraError::Dimension {
                expected: self.dimension(),
                found: coords.len(),
            });
        }
        Ok(self.normalize(GroupElement { coords }))
    }

    pub fn basis(&self) -> Vec<GroupElement> {
        (0..self.dimension())
            .map(|i| {
                let mut e = self.zero();
                e.coords[i] = BigInt::one();
                e
            })
            .collect()
    }

    fn normalize(&self, mut g: GroupElement) -> GroupElement {
        for (i, d) in self.torsion.iter().enumerate() {
            let c = &mut g.coords[self.free_rank + i];
            *c = c.mod_floor(d);
        }
        g
    }

    pub fn check(&self, g: &GroupElement) -> Result<(), AlgebraError> {
        if g.coords.len() != self.dimension() {
            return Err(AlgebraError::Dimension {
                expected: self.dimension(),
                found: g.coords.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.coords.len() == self.dimension()
            && self.torsion.iter().enumerate().all(|(i, d)| {
                let c = &g.coords[self.free_rank + i];
                !c.is_negative() && c < d
            })
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        debug_assert_eq!(a.coords.len(), self.dimension());
        debug_assert_eq!(b.coords.len(), self.dimension());
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
        self.normalize(GroupElement { coords })
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x - y).collect();
        self.normalize(GroupElement { coords })
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        let coords = a.coords.iter().map(|x| -x).collect();
        self.normalize(GroupElement { coords })
    }

    pub fn scale(&self, a: &GroupElement, k: &BigInt) -> GroupElement {
        let coords = a.coords.iter().map(|x| x * k).collect();
        self.normalize(GroupElement { coords })
    }

    pub fn sum<'a, I>(&self, items: I) -> GroupElement
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        items
            .into_iter()
            .fold(self.zero(), |acc, g| self.add(&acc, g))
    }

    /// All elements of a finite group, in lexicographic coordinate order.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        if !self.is_finite() {
            return None;
        }
        let mut out = vec![self.zero()];
        for (i, d) in self.torsion.iter().enumerate().rev() {
            let mut next = Vec::new();
            let mut k = BigInt::zero();
            while &k < d {
                for g in &out {
                    let mut g = g.clone();
                    g.coords[i] = k.clone();
                    next.push(g);
                }
                k += 1;
            }
            out = next;
        }
        out.sort();
        Some(out)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank == 1 {
            parts.push("Z".into());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Coordinates of a group element; torsion coordinates are kept reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<BigInt>,
}

impl GroupElement {
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Element of `Z^k x G` (`k` is one or two in practice).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtendedVector {
    pub ints: Vec<BigInt>,
    pub group: GroupElement,
}

impl ExtendedVector {
    pub fn new(ints: Vec<BigInt>, group: GroupElement) -> Self {
        ExtendedVector { ints, group }
    }

    pub fn single(int: impl Into<BigInt>, group: GroupElement) -> Self {
        ExtendedVector {
            ints: vec![int.into()],
            group,
        }
    }

    pub fn zero(spec: &GroupSpec, slots: usize) -> Self {
        ExtendedVector {
            ints: vec![BigInt::zero(); slots],
            group: spec.zero(),
        }
    }

    /// `D` in `slot`, zero elsewhere.
    pub fn line(spec: &GroupSpec, slots: usize, slot: usize, value: BigInt) -> Self {
        let mut v = Self::zero(spec, slots);
        v.ints[slot] = value;
        v
    }

    pub fn add(&self, spec: &GroupSpec, other: &ExtendedVector) -> ExtendedVector {
        ExtendedVector {
            ints: self
                .ints
                .iter()
                .zip(&other.ints)
                .map(|(a, b)| a + b)
                .collect(),
            group: spec.add(&self.group, &other.group),
        }
    }

    pub fn sub(&self, spec: &GroupSpec, other: &ExtendedVector) -> ExtendedVector {
        ExtendedVector {
            ints: self
                .ints
                .iter()
                .zip(&other.ints)
                .map(|(a, b)| a - b)
                .collect(),
            group: spec.sub(&self.group, &other.group),
        }
    }

    pub fn scale(&self, spec: &GroupSpec, k: &BigInt) -> ExtendedVector {
        ExtendedVector {
            ints: self.ints.iter().map(|a| a * k).collect(),
            group: spec.scale(&self.group, k),
        }
    }

    fn flatten(&self) -> Vec<BigInt> {
        self.ints
            .iter()
            .chain(self.group.coords.iter())
            .cloned()
            .collect()
    }
}

impl fmt::Display for ExtendedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.ints.iter().map(ToString::to_string).collect();
        if !self.group.coords.is_empty() {
            parts.push(self.group.to_string());
        }
        write!(f, "({})", parts.join(", "))
    }
}

/// Integer coefficients, one per generator, reproducing a span target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanCertificate {
    pub coefficients: Vec<BigInt>,
}

impl SpanCertificate {
    /// Recomputes the combination of `gens`.
    pub fn combine(&self, spec: &GroupSpec, gens: &[ExtendedVector]) -> Option<ExtendedVector> {
        let first = gens.first()?;
        let zero = ExtendedVector::zero(spec, first.ints.len());
        Some(
            gens.iter()
                .zip(&self.coefficients)
                .fold(zero, |acc, (g, k)| acc.add(spec, &g.scale(spec, k))),
        )
    }

    /// Same check with the integer slots read modulo `int_moduli` (zero = exact).
    pub fn verifies(
        &self,
        spec: &GroupSpec,
        gens: &[ExtendedVector],
        target: &ExtendedVector,
        int_moduli: &[BigInt],
    ) -> bool {
        if self.coefficients.len() != gens.len() {
            return false;
        }
        let combo = match self.combine(spec, gens) {
            Some(c) => c,
            None => return target.ints.iter().all(Zero::is_zero) && target.group.is_zero(),
        };
        let ints_ok = combo
            .ints
            .iter()
            .zip(&target.ints)
            .zip(int_moduli)
            .all(|((a, b), m)| {
                if m.is_zero() {
                    a == b
                } else {
                    (a - b).is_multiple_of(m)
                }
            });
        ints_ok && combo.group == target.group
    }
}

/// True iff `gens` generate all of the group.
pub fn generates_group(spec: &GroupSpec, gens: &[GroupElement]) -> Result<bool, AlgebraError> {
    for g in gens {
        spec.check(g)?;
    }
    if spec.is_trivial() {
        return Ok(true);
    }
    let columns: Vec<Vec<BigInt>> = gens.iter().map(|g| g.coords.clone()).collect();
    let sys = ModularSystem::new(spec.dimension(), &columns, &spec.moduli());
    Ok(sys.is_full())
}

fn check_shape(
    spec: &GroupSpec,
    slots: usize,
    vectors: &[&ExtendedVector],
) -> Result<(), AlgebraError> {
    for v in vectors {
        if v.ints.len() != slots {
            return Err(AlgebraError::SlotCount {
                expected: slots,
                found: v.ints.len(),
            });
        }
        spec.check(&v.group)?;
    }
    Ok(())
}

fn system(spec: &GroupSpec, gens: &[ExtendedVector], int_moduli: &[BigInt]) -> ModularSystem {
    let rows = int_moduli.len() + spec.dimension();
    let columns: Vec<Vec<BigInt>> = gens.iter().map(ExtendedVector::flatten).collect();
    let moduli: Vec<BigInt> = int_moduli
        .iter()
        .map(Signed::abs)
        .chain(spec.moduli())
        .collect();
    ModularSystem::new(rows, &columns, &moduli)
}

/// Certificate that `target` lies in the integer span of `gens`, if it does.
pub fn span_contains(
    spec: &GroupSpec,
    gens: &[ExtendedVector],
    target: &ExtendedVector,
) -> Result<Option<SpanCertificate>, AlgebraError> {
    let slots = target.ints.len();
    span_contains_mod(spec, gens, target, &vec![BigInt::zero(); slots])
}

/// As [`span_contains`], with integer slot `i` read modulo `int_moduli[i]`
/// (zero leaves the slot exact). This is membership in `Z/D x G`.
pub fn span_contains_mod(
    spec: &GroupSpec,
    gens: &[ExtendedVector],
    target: &ExtendedVector,
    int_moduli: &[BigInt],
) -> Result<Option<SpanCertificate>, AlgebraError> {
    let slots = target.ints.len();
    if int_moduli.len() != slots {
        return Err(AlgebraError::SlotCount {
            expected: slots,
            found: int_moduli.len(),
        });
    }
    let refs: Vec<&ExtendedVector> = gens.iter().chain(std::iter::once(target)).collect();
    check_shape(spec, slots, &refs)?;
    let sys = system(spec, gens, int_moduli);
    let Some(coefficients) = sys.solve(&target.flatten()) else {
        return Ok(None);
    };
    let cert = SpanCertificate { coefficients };
    debug_assert!(cert.verifies(spec, gens, target, int_moduli));
    Ok(Some(cert))
}

/// Least `D > 0` such that the vector with `D` in integer slot `slot` and
/// zero elsewhere lies in the span; zero if no such `D` exists.
pub fn span_meet_line(
    spec: &GroupSpec,
    gens: &[ExtendedVector],
    slots: usize,
    slot: usize,
) -> Result<BigInt, AlgebraError> {
    if slot >= slots {
        return Err(AlgebraError::SlotOutOfRange { slot, slots });
    }
    let refs: Vec<&ExtendedVector> = gens.iter().collect();
    check_shape(spec, slots, &refs)?;
    let sys = system(spec, gens, &vec![BigInt::zero(); slots]);
    Ok(sys.line_meet(slot))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(spec: &GroupSpec, ints: &[i64], group: &[i64]) -> ExtendedVector {
        ExtendedVector::new(
            ints.iter().map(|&x| BigInt::from(x)).collect(),
            spec.element(group.iter().copied()).unwrap(),
        )
    }

    #[test]
    fn element_normalization() {
        let g = GroupSpec::new(1, vec![BigInt::from(6)]).unwrap();
        let a = g.element([3i64, -1]).unwrap();
        assert_eq!(a.coords(), &[BigInt::from(3), BigInt::from(5)]);
        let b = g.element([-5i64, 4]).unwrap();
        let s = g.add(&a, &b);
        assert_eq!(s, g.element([-2i64, 3]).unwrap());
        assert!(g.contains(&s));
        assert_eq!(g.sub(&s, &b), a);
        assert!(GroupSpec::new(0, vec![BigInt::from(1)]).is_err());
        assert!(g.element([1i64]).is_err());
    }

    #[test]
    fn generation_examples() {
        let trivial = GroupSpec::trivial();
        assert!(generates_group(&trivial, &[]).unwrap());
        let z2 = GroupSpec::cyclic(2).unwrap();
        assert!(!generates_group(&z2, &[z2.zero()]).unwrap());
        assert!(generates_group(&z2, &[z2.element([1i64]).unwrap()]).unwrap());
        let z = GroupSpec::integers(1);
        assert!(generates_group(&z, &[z.element([1i64]).unwrap()]).unwrap());
        assert!(!generates_group(&z, &[z.element([2i64]).unwrap()]).unwrap());
        assert!(generates_group(
            &z,
            &[z.element([2i64]).unwrap(), z.element([3i64]).unwrap()]
        )
        .unwrap());
        // Z/2 + Z/3 is cyclic of order 6
        let z2z3 = GroupSpec::new(0, vec![BigInt::from(2), BigInt::from(3)]).unwrap();
        assert!(generates_group(&z2z3, &[z2z3.element([1i64, 1]).unwrap()]).unwrap());
        let z2z2 = GroupSpec::new(0, vec![BigInt::from(2), BigInt::from(2)]).unwrap();
        assert!(!generates_group(&z2z2, &[z2z2.element([1i64, 1]).unwrap()]).unwrap());
        assert!(generates_group(&z2, &[GroupSpec::integers(2).zero()]).is_err());
    }

    #[test]
    fn span_examples() {
        let z2 = GroupSpec::cyclic(2).unwrap();
        let target = ev(&z2, &[1], &[0]);
        let gens = [ev(&z2, &[3], &[1]), ev(&z2, &[1], &[1])];
        assert!(span_contains(&z2, &gens, &target).unwrap().is_none());

        let gens = [ev(&z2, &[2], &[1]), ev(&z2, &[1], &[1])];
        let cert = span_contains(&z2, &gens, &target).unwrap().unwrap();
        assert!(cert.verifies(&z2, &gens, &target, &[BigInt::zero()]));
        assert_eq!(cert.coefficients.len(), 2);
        // the coefficient of (2,1) is forced to 1 + 2k... with b = 1 - 2a odd
        let a = &cert.coefficients[0];
        let b = &cert.coefficients[1];
        assert_eq!(a * 2 + b, BigInt::one());

        let empty = span_contains(&z2, &[], &ExtendedVector::zero(&z2, 1))
            .unwrap()
            .unwrap();
        assert!(empty.coefficients.is_empty());
        assert!(span_contains(&z2, &[], &target).unwrap().is_none());
    }

    #[test]
    fn span_modular() {
        let z2 = GroupSpec::cyclic(2).unwrap();
        let t = ev(&z2, &[1], &[1]);
        let target = ev(&z2, &[1], &[0]);
        let m = [BigInt::from(2)];
        assert!(span_contains_mod(&z2, &[t.clone(), t], &target, &m)
            .unwrap()
            .is_none());
        let trivial = GroupSpec::trivial();
        let gens = [ev(&trivial, &[3], &[])];
        let target = ev(&trivial, &[1], &[]);
        assert!(span_contains(&trivial, &gens, &target).unwrap().is_none());
        let cert = span_contains_mod(&trivial, &gens, &target, &[BigInt::from(4)])
            .unwrap()
            .unwrap();
        assert!(cert.verifies(&trivial, &gens, &target, &[BigInt::from(4)]));
    }

    #[test]
    fn meet_line_examples() {
        let trivial = GroupSpec::trivial();
        let gens = [ev(&trivial, &[0, 1], &[]), ev(&trivial, &[1, 0], &[])];
        assert_eq!(
            span_meet_line(&trivial, &gens, 2, 0).unwrap(),
            BigInt::one()
        );

        // (a, g, c) with the group coordinate in the middle
        let z2 = GroupSpec::cyclic(2).unwrap();
        let gens = [ev(&z2, &[0, 1], &[1]), ev(&z2, &[1, 0], &[1])];
        assert_eq!(span_meet_line(&z2, &gens, 2, 0).unwrap(), BigInt::from(2));

        let gens = [ev(&trivial, &[1, 1], &[])];
        assert_eq!(
            span_meet_line(&trivial, &gens, 2, 0).unwrap(),
            BigInt::zero()
        );
        assert!(span_meet_line(&trivial, &gens, 2, 2).is_err());
        assert!(span_meet_line(&trivial, &gens, 1, 0).is_err());
    }

    #[test]
    fn finite_group_elements() {
        let g = GroupSpec::new(0, vec![BigInt::from(2), BigInt::from(3)]).unwrap();
        let all = g.elements().unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(BigInt::from(6), g.order().unwrap());
        assert!(GroupSpec::integers(1).elements().is_none());
        assert_eq!(
            GroupSpec::trivial().elements().unwrap(),
            vec![GroupSpec::trivial().zero()]
        );
    }
}
