//! Cutting-and-stacking data: cut recipes, schedules, column heights, and the
//! closed-form position/color formulas for copies of columns.
//!
//! Generation `N + 1` column of color `g` is the concatenation, for
//! `i = 0..gamma_N`, of the `i`-th vertical slice of column `g + g(N, i)`
//! followed by `s(N, i)` spacer levels. A copy of a generation-`N` column
//! inside `C_{N+n, g}` is addressed by digits `a_0 .. a_{n-1}`, digit `a_i`
//! choosing the slice taken at generation `N + i`.

use std::fmt;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::abelian::{AlgebraError, ExtendedVector, GroupElement, GroupSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("a cut recipe needs at least 2 pieces, got {0}")]
    TooFewPieces(usize),
    #[error("cut recipe has {spacers} spacer counts and {labels} labels")]
    RecipeShape { spacers: usize, labels: usize },
    #[error("label {index} of recipe `{recipe}` is not an element of {group}")]
    LabelNotInGroup {
        recipe: String,
        index: usize,
        group: String,
    },
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("schedule refers to unknown recipe index {0}")]
    UnknownRecipe(usize),
    #[error("generation {generation} is beyond the {defined} generations of an explicit-prefix schedule")]
    BeyondSchedule { generation: usize, defined: usize },
    #[error("digit {digit} at position {position} is out of range (bound {bound})")]
    DigitOutOfRange {
        position: usize,
        digit: usize,
        bound: usize,
    },
    #[error("digit lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// One cut recipe `(gamma, s_0..s_{gamma-1}, g_0..g_{gamma-1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaElement {
    spacers: Vec<u64>,
    labels: Vec<GroupElement>,
    // spacer_prefix[a] = s_0 + ... + s_{a-1}
    spacer_prefix: Vec<u128>,
}

impl GammaElement {
    pub fn new(spacers: Vec<u64>, labels: Vec<GroupElement>) -> Result<Self, TowerError> {
        if spacers.len() != labels.len() {
            return Err(TowerError::RecipeShape {
                spacers: spacers.len(),
                labels: labels.len(),
            });
        }
        if spacers.len() < 2 {
            return Err(TowerError::TooFewPieces(spacers.len()));
        }
        let mut spacer_prefix = Vec::with_capacity(spacers.len() + 1);
        let mut acc = 0u128;
        spacer_prefix.push(0);
        for &s in &spacers {
            acc += u128::from(s);
            spacer_prefix.push(acc);
        }
        Ok(GammaElement {
            spacers,
            labels,
            spacer_prefix,
        })
    }

    /// Rank-one recipe (trivial group) with the given spacer counts.
    pub fn rank_one(spacers: Vec<u64>) -> Result<Self, TowerError> {
        let labels = vec![GroupSpec::trivial().zero(); spacers.len()];
        Self::new(spacers, labels)
    }

    pub fn gamma(&self) -> usize {
        self.spacers.len()
    }

    pub fn spacers(&self) -> &[u64] {
        &self.spacers
    }

    pub fn labels(&self) -> &[GroupElement] {
        &self.labels
    }

    pub fn spacer(&self, i: usize) -> u64 {
        self.spacers[i]
    }

    pub fn label(&self, i: usize) -> &GroupElement {
        &self.labels[i]
    }

    /// `s_0 + ... + s_{a-1}`.
    pub fn spacers_before(&self, a: usize) -> u128 {
        self.spacer_prefix[a]
    }

    pub fn spacer_total(&self) -> u128 {
        self.spacer_prefix[self.gamma()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    Periodic,
    Prefix,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::Periodic => "periodic",
            ScheduleKind::Prefix => "prefix",
        })
    }
}

/// The generation-to-recipe map, as indices into a construction's recipe table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    Constant(usize),
    /// `F(n) = period[n mod len]`; every finite word recurs, so the
    /// recurrence requirement on `F` holds automatically.
    Periodic(Vec<usize>),
    /// Only `F(0..len)` is known. Usable for simulation, never for decisions.
    Prefix(Vec<usize>),
}

impl Schedule {
    pub fn kind(&self) -> ScheduleKind {
        match self {
            Schedule::Constant(_) => ScheduleKind::Constant,
            Schedule::Periodic(_) => ScheduleKind::Periodic,
            Schedule::Prefix(_) => ScheduleKind::Prefix,
        }
    }

    pub fn decision_eligible(&self) -> bool {
        !matches!(self, Schedule::Prefix(_))
    }

    /// Recipe indices of one period (constant and periodic schedules).
    pub fn period(&self) -> Option<Vec<usize>> {
        match self {
            Schedule::Constant(e) => Some(vec![*e]),
            Schedule::Periodic(p) => Some(p.clone()),
            Schedule::Prefix(_) => None,
        }
    }

    /// Recipe indices in listing order (period or prefix).
    pub fn entries(&self) -> Vec<usize> {
        match self {
            Schedule::Constant(e) => vec![*e],
            Schedule::Periodic(p) | Schedule::Prefix(p) => p.clone(),
        }
    }

    /// Number of generations with a known recipe, `None` when unbounded.
    pub fn defined_generations(&self) -> Option<usize> {
        match self {
            Schedule::Prefix(p) => Some(p.len()),
            _ => None,
        }
    }

    pub fn index_at(&self, n: usize) -> Result<usize, TowerError> {
        match self {
            Schedule::Constant(e) => Ok(*e),
            Schedule::Periodic(p) => Ok(p[n % p.len()]),
            Schedule::Prefix(p) => p.get(n).copied().ok_or(TowerError::BeyondSchedule {
                generation: n,
                defined: p.len(),
            }),
        }
    }

    /// The same schedule with its period rotated left by `by` steps.
    pub fn rotated(&self, by: usize) -> Schedule {
        match self {
            Schedule::Periodic(p) => {
                let mut q = p.clone();
                q.rotate_left(by % p.len());
                Schedule::Periodic(q)
            }
            other => other.clone(),
        }
    }
}

/// Full data `(G, recipes, F)` of a construction.
#[derive(Debug)]
pub struct Construction {
    name: Option<String>,
    group: GroupSpec,
    recipes: Vec<(String, GammaElement)>,
    schedule: Schedule,
    heights: RwLock<Vec<BigInt>>,
}

impl Clone for Construction {
    fn clone(&self) -> Self {
        Construction {
            name: self.name.clone(),
            group: self.group.clone(),
            recipes: self.recipes.clone(),
            schedule: self.schedule.clone(),
            heights: RwLock::new(self.heights.read().expect("height cache poisoned").clone()),
        }
    }
}

impl PartialEq for Construction {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.group == other.group
            && self.recipes == other.recipes
            && self.schedule == other.schedule
    }
}

impl Construction {
    pub fn new(
        name: Option<String>,
        group: GroupSpec,
        recipes: Vec<(String, GammaElement)>,
        schedule: Schedule,
    ) -> Result<Self, TowerError> {
        let entries = schedule.entries();
        if entries.is_empty() {
            return Err(TowerError::EmptySchedule);
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= recipes.len()) {
            return Err(TowerError::UnknownRecipe(bad));
        }
        for (recipe_name, recipe) in &recipes {
            if let Some(index) = recipe.labels().iter().position(|g| !group.contains(g)) {
                return Err(TowerError::LabelNotInGroup {
                    recipe: recipe_name.clone(),
                    index,
                    group: group.to_string(),
                });
            }
        }
        Ok(Construction {
            name,
            group,
            recipes,
            schedule,
            heights: RwLock::new(vec![BigInt::one()]),
        })
    }

    /// A single recipe repeated forever.
    pub fn constant(
        name: impl Into<String>,
        group: GroupSpec,
        recipe: GammaElement,
    ) -> Result<Self, TowerError> {
        Self::new(
            Some(name.into()),
            group,
            vec![("e".to_string(), recipe)],
            Schedule::Constant(0),
        )
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn recipes(&self) -> &[(String, GammaElement)] {
        &self.recipes
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Finitely generated group and constant/periodic schedule.
    pub fn decision_eligible(&self) -> bool {
        self.schedule.decision_eligible()
    }

    pub fn defined_generations(&self) -> Option<usize> {
        self.schedule.defined_generations()
    }

    /// The same recipes with the schedule period rotated.
    pub fn with_rotated_schedule(&self, by: usize) -> Construction {
        Construction {
            name: self.name.clone(),
            group: self.group.clone(),
            recipes: self.recipes.clone(),
            schedule: self.schedule.rotated(by),
            heights: RwLock::new(vec![BigInt::one()]),
        }
    }

    pub fn recipe_at(&self, n: usize) -> Result<&GammaElement, TowerError> {
        Ok(&self.recipes[self.schedule.index_at(n)?].1)
    }

    pub fn cuts(&self, n: usize) -> Result<usize, TowerError> {
        Ok(self.recipe_at(n)?.gamma())
    }

    pub fn spacer(&self, n: usize, i: usize) -> Result<u64, TowerError> {
        let r = self.recipe_at(n)?;
        check_index(i, r.gamma() - 1)?;
        Ok(r.spacer(i))
    }

    pub fn label(&self, n: usize, i: usize) -> Result<&GroupElement, TowerError> {
        let r = self.recipe_at(n)?;
        check_index(i, r.gamma() - 1)?;
        Ok(r.label(i))
    }

    /// `h_N`, with `h_0 = 1` and `h_{n+1} = gamma_n h_n + sum_j s(n, j)`.
    pub fn height(&self, n: usize) -> Result<BigInt, TowerError> {
        {
            let memo = self.heights.read().expect("height cache poisoned");
            if let Some(h) = memo.get(n) {
                return Ok(h.clone());
            }
        }
        let mut memo = self.heights.write().expect("height cache poisoned");
        while memo.len() <= n {
            let k = memo.len() - 1;
            let recipe = self.recipe_at(k)?;
            let next = &memo[k] * recipe.gamma() + BigInt::from(recipe.spacer_total());
            memo.push(next);
        }
        Ok(memo[n].clone())
    }

    /// `h_N` as a machine integer, for explicit simulation.
    pub fn height_usize(&self, n: usize) -> Result<Option<usize>, TowerError> {
        Ok(usize::try_from(self.height(n)?).ok())
    }

    /// `gamma_0 * ... * gamma_{N-1}`.
    pub fn cut_product(&self, n: usize) -> Result<BigInt, TowerError> {
        (0..n).try_fold(BigInt::one(), |acc, k| Ok(acc * self.cuts(k)?))
    }

    /// Measure of one generation-`N` level.
    pub fn level_mass(&self, n: usize) -> Result<BigRational, TowerError> {
        Ok(BigRational::new(BigInt::one(), self.cut_product(n)?))
    }

    fn check_digits(&self, base: usize, digits: &[usize]) -> Result<(), TowerError> {
        for (i, &a) in digits.iter().enumerate() {
            let bound = self.cuts(base + i)?;
            if a >= bound {
                return Err(TowerError::DigitOutOfRange {
                    position: i,
                    digit: a,
                    bound,
                });
            }
        }
        Ok(())
    }

    /// Color of the generation-`N` column that `addr` is a copy of:
    /// `g + sum_i g(N + i, a_i)`.
    pub fn copy_color(&self, addr: &CopyAddress) -> Result<GroupElement, TowerError> {
        self.group.check(&addr.color)?;
        self.check_digits(addr.base_generation, &addr.digits)?;
        let mut color = addr.color.clone();
        for (i, &a) in addr.digits.iter().enumerate() {
            color = self
                .group
                .add(&color, self.recipe_at(addr.base_generation + i)?.label(a));
        }
        Ok(color)
    }

    /// Height of the bottom of the copy `P_{N+n,g}[digits]` inside its
    /// generation-`N+n` column.
    pub fn copy_offset(&self, base: usize, digits: &[usize]) -> Result<BigInt, TowerError> {
        self.check_digits(base, digits)?;
        let mut offset = BigInt::zero();
        for (i, &a) in digits.iter().enumerate() {
            let recipe = self.recipe_at(base + i)?;
            offset += self.height(base + i)? * a + BigInt::from(recipe.spacers_before(a));
        }
        Ok(offset)
    }

    /// `k` with `T^k P[a] = P[b]`:
    /// `sum_i h_{N+i}(b_i - a_i) + sum_{j<b_i} s(N+i, j) - sum_{j<a_i} s(N+i, j)`.
    pub fn copy_distance(
        &self,
        base: usize,
        color: &GroupElement,
        a: &[usize],
        b: &[usize],
    ) -> Result<BigInt, TowerError> {
        self.group.check(color)?;
        if a.len() != b.len() {
            return Err(TowerError::LengthMismatch(a.len(), b.len()));
        }
        self.check_digits(base, a)?;
        self.check_digits(base, b)?;
        let mut k = BigInt::zero();
        for (i, (&ai, &bi)) in a.iter().zip(b).enumerate() {
            if ai == bi {
                continue;
            }
            let recipe = self.recipe_at(base + i)?;
            let h = self.height(base + i)?;
            k += h * (BigInt::from(bi) - BigInt::from(ai));
            k += BigInt::from(recipe.spacers_before(bi));
            k -= BigInt::from(recipe.spacers_before(ai));
        }
        Ok(k)
    }

    /// Distance across a carry, from digits `(gamma_N - 1, ..., gamma_{N+m} - 1, a)`
    /// to `(0, ..., 0, a + 1)`: `h_N + sum_{i<=m} s(N+i, gamma_{N+i} - 1) + s(N+m+1, a)`.
    pub fn consecutive_copy_distance(
        &self,
        base: usize,
        m: usize,
        a: usize,
    ) -> Result<BigInt, TowerError> {
        let outer = self.recipe_at(base + m + 1)?;
        if a + 2 > outer.gamma() {
            return Err(TowerError::Precondition(format!(
                "digit {a} must be at most gamma - 2 = {}",
                outer.gamma() - 2
            )));
        }
        let mut k = self.height(base)?;
        for i in 0..=m {
            let r = self.recipe_at(base + i)?;
            k += BigInt::from(r.spacer(r.gamma() - 1));
        }
        k += BigInt::from(outer.spacer(a));
        Ok(k)
    }

    /// Displacement and color change `(k, color(b) - color(a))` between two
    /// copies in the same column.
    pub fn copy_delta(
        &self,
        base: usize,
        color: &GroupElement,
        a: &[usize],
        b: &[usize],
    ) -> Result<(BigInt, GroupElement), TowerError> {
        let k = self.copy_distance(base, color, a, b)?;
        let ca = self.copy_color(&CopyAddress::new(base, color.clone(), a.to_vec()))?;
        let cb = self.copy_color(&CopyAddress::new(base, color.clone(), b.to_vec()))?;
        Ok((k, self.group.sub(&cb, &ca)))
    }

    /// `t_{N,i} = (s(N,i) + h_N, g(N,i+1) - g(N,i))`.
    pub fn t_vector(&self, n: usize, i: usize) -> Result<ExtendedVector, TowerError> {
        let recipe = self.recipe_at(n)?;
        check_index(i, recipe.gamma() - 2)?;
        Ok(t_vector_with_height(
            &self.group,
            recipe,
            i,
            &self.height(n)?,
        ))
    }

    /// `c_{M,i}`: the `(gamma_M - 1, i) -> (0, i + 1)` carry displacement minus `t_{M,0}`.
    pub fn c_vector(&self, m: usize, i: usize) -> Result<ExtendedVector, TowerError> {
        let lower = self.recipe_at(m)?;
        let upper = self.recipe_at(m + 1)?;
        check_index(i, upper.gamma() - 2)?;
        Ok(c_vector_of(&self.group, lower, upper, i))
    }
}

fn check_index(index: usize, max: usize) -> Result<(), TowerError> {
    if index > max {
        Err(TowerError::IndexOutOfRange { index, max })
    } else {
        Ok(())
    }
}

/// `t`-vector of `recipe` when the current column height is `height`.
pub fn t_vector_with_height(
    group: &GroupSpec,
    recipe: &GammaElement,
    i: usize,
    height: &BigInt,
) -> ExtendedVector {
    ExtendedVector::single(
        BigInt::from(recipe.spacer(i)) + height,
        group.sub(recipe.label(i + 1), recipe.label(i)),
    )
}

/// `c`-vector for consecutive recipes `lower = F(M)`, `upper = F(M+1)`.
pub fn c_vector_of(
    group: &GroupSpec,
    lower: &GammaElement,
    upper: &GammaElement,
    i: usize,
) -> ExtendedVector {
    let last = lower.gamma() - 1;
    let int = BigInt::from(upper.spacer(i)) + BigInt::from(lower.spacer(last))
        - BigInt::from(lower.spacer(0));
    let two = BigInt::from(2);
    let g = group.sub(upper.label(i + 1), upper.label(i));
    let g = group.add(&g, &group.scale(lower.label(0), &two));
    let g = group.sub(&g, lower.label(last));
    let g = group.sub(&g, lower.label(1));
    ExtendedVector::single(int, g)
}

/// `P_{N+n, color}[digits]`: a copy of a generation-`N` column inside `C_{N+n, color}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CopyAddress {
    pub base_generation: usize,
    pub color: GroupElement,
    pub digits: Vec<usize>,
}

impl CopyAddress {
    pub fn new(base_generation: usize, color: GroupElement, digits: Vec<usize>) -> Self {
        CopyAddress {
            base_generation,
            color,
            digits,
        }
    }

    /// Generation of the enclosing column.
    pub fn outer_generation(&self) -> usize {
        self.base_generation + self.digits.len()
    }
}

/// Level `height` of column `C_{generation, color}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelRef {
    pub generation: usize,
    pub color: GroupElement,
    pub height: u64,
}

impl LevelRef {
    pub fn new(generation: usize, color: GroupElement, height: u64) -> Self {
        LevelRef {
            generation,
            color,
            height,
        }
    }
}

impl fmt::Display for LevelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.generation, self.color, self.height)
    }
}

/// Enumerates every digit list for `n` generations starting at `base`,
/// first digit fastest.
pub fn all_digit_lists(
    c: &Construction,
    base: usize,
    n: usize,
) -> Result<Vec<Vec<usize>>, TowerError> {
    let bounds: Vec<usize> = (0..n).map(|i| c.cuts(base + i)).collect::<Result<_, _>>()?;
    let mut out = vec![Vec::with_capacity(n)];
    for &bound in &bounds {
        let mut next = Vec::with_capacity(out.len() * bound);
        for d in 0..bound {
            for prefix in &out {
                let mut p: Vec<usize> = prefix.clone();
                p.push(d);
                next.push(p);
            }
        }
        out = next;
    }
    Ok(out)
}
