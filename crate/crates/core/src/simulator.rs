//! Explicit stacking, generation by generation, as ground truth for the
//! closed-form formulas and the decision procedures.
//!
//! Columns are lists of level payloads. Cutting a column into `gamma` slices
//! maps every payload through a `cut` callback; spacer levels are created
//! through a `spacer` callback. Measures are exact: every generation-`M` level
//! has mass `1 / (gamma_0 ... gamma_{M-1})`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::abelian::{AlgebraError, GroupElement};
use crate::tower::{Construction, LevelRef, TowerError};

/// Maximum number of tracked `(generation, color)` columns in one build.
pub const COLOR_CELL_CAP: usize = 1_000_000;
/// Maximum number of explicit levels held by one build.
pub const LEVEL_CAP: usize = 40_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("color closure needs {cells} (generation, color) cells, cap is {cap}")]
    ColorCap { cells: usize, cap: usize },
    #[error("generation {generation} needs {levels} explicit levels, cap is {cap}")]
    LevelCap {
        generation: usize,
        levels: BigInt,
        cap: usize,
    },
    #[error("an infinite group needs an explicit color window")]
    WindowRequired,
    #[error("color {color} needed at generation {generation} is outside the window")]
    WindowTooSmall {
        generation: usize,
        color: GroupElement,
    },
    #[error("level {0} does not exist")]
    LevelOutOfRange(LevelRef),
    #[error("level {level} is above resolution generation {resolution}")]
    BelowLevelGeneration { level: LevelRef, resolution: usize },
    #[error("levels of one set overlap at {0}")]
    OverlappingLevels(LevelRef),
    #[error("at most 32 level sets per build, got {0}")]
    TooManySets(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Which gen-`M` columns to build.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColorWindow {
    /// Every color (finite groups only).
    All,
    /// These generation-`M` colors; lower generations get whatever they need.
    Top(Vec<GroupElement>),
    /// Every color used at every generation must lie in this set.
    Fixed(BTreeSet<GroupElement>),
}

/// Spacer `S^{(index)}_{N, color, subcolumn}`, first present in generation `generation = N + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpacerInfo {
    pub generation: usize,
    pub color: GroupElement,
    pub subcolumn: usize,
    pub index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    /// The generation-0 interval of this color.
    Base(GroupElement),
    Spacer(SpacerInfo),
}

/// Lineage of one explicit level: where it was born and which slice was kept
/// at every later cut.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelDescriptor {
    pub origin: Origin,
    pub path: Vec<u32>,
}

impl LevelDescriptor {
    pub fn is_spacer(&self) -> bool {
        matches!(self.origin, Origin::Spacer(_))
    }

    /// Generation in which the origin level first appears.
    pub fn birth(&self) -> usize {
        match &self.origin {
            Origin::Base(_) => 0,
            Origin::Spacer(s) => s.generation,
        }
    }

    /// True if `self` is a copy of (a sub-level of) `ancestor`.
    pub fn descends_from(&self, ancestor: &LevelDescriptor) -> bool {
        self.origin == ancestor.origin && self.path.starts_with(&ancestor.path)
    }
}

/// Explicit columns of one generation, keyed by color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnSet<T> {
    pub generation: usize,
    pub columns: BTreeMap<GroupElement, Vec<T>>,
}

impl<T> ColumnSet<T> {
    pub fn column(&self, color: &GroupElement) -> Option<&[T]> {
        self.columns.get(color).map(Vec::as_slice)
    }

    pub fn level_count(&self) -> usize {
        self.columns.values().map(Vec::len).sum()
    }
}

/// The generation-`M` columns with full lineage for every level.
pub type ExplicitColumnSet = ColumnSet<LevelDescriptor>;

/// Colors of generation-`M` columns that contain copies of `C_{N, color}`.
pub fn upward_colors(
    c: &Construction,
    generation: usize,
    color: &GroupElement,
    target: usize,
) -> Result<BTreeSet<GroupElement>, SimError> {
    let g = c.group();
    let mut current: BTreeSet<GroupElement> = [color.clone()].into();
    let mut cells = 1usize;
    for n in generation..target {
        let recipe = c.recipe_at(n)?;
        let mut next = BTreeSet::new();
        for u in &current {
            for label in recipe.labels() {
                next.insert(g.sub(u, label));
            }
        }
        cells += next.len();
        if cells > COLOR_CELL_CAP {
            return Err(SimError::ColorCap {
                cells,
                cap: COLOR_CELL_CAP,
            });
        }
        current = next;
    }
    Ok(current)
}

/// `plan[k]` = colors needed at generation `from + k`, for building `top` at `to`.
fn color_plan(
    c: &Construction,
    from: usize,
    to: usize,
    top: BTreeSet<GroupElement>,
    fixed: Option<&BTreeSet<GroupElement>>,
) -> Result<Vec<BTreeSet<GroupElement>>, SimError> {
    let g = c.group();
    let mut plan = vec![top];
    let mut cells = plan[0].len();
    for n in (from..to).rev() {
        let recipe = c.recipe_at(n)?;
        let above = plan.last().expect("plan is never empty");
        let mut below = BTreeSet::new();
        for u in above {
            for label in recipe.labels() {
                below.insert(g.add(u, label));
            }
        }
        cells += below.len();
        if cells > COLOR_CELL_CAP {
            return Err(SimError::ColorCap {
                cells,
                cap: COLOR_CELL_CAP,
            });
        }
        plan.push(below);
    }
    plan.reverse();
    if let Some(window) = fixed {
        for (k, colors) in plan.iter().enumerate() {
            if let Some(color) = colors.iter().find(|col| !window.contains(*col)) {
                return Err(SimError::WindowTooSmall {
                    generation: from + k,
                    color: color.clone(),
                });
            }
        }
    }
    Ok(plan)
}

fn window_top(c: &Construction, window: &ColorWindow) -> Result<BTreeSet<GroupElement>, SimError> {
    let colors: Vec<GroupElement> = match window {
        ColorWindow::All => return all_colors(c),
        ColorWindow::Top(v) => v.clone(),
        ColorWindow::Fixed(s) => s.iter().cloned().collect(),
    };
    if colors.is_empty() {
        return all_colors(c);
    }
    for col in &colors {
        c.group().check(col)?;
    }
    Ok(colors.into_iter().collect())
}

fn all_colors(c: &Construction) -> Result<BTreeSet<GroupElement>, SimError> {
    c.group()
        .elements()
        .map(|v| v.into_iter().collect())
        .ok_or(SimError::WindowRequired)
}

fn check_level_budget(
    c: &Construction,
    generation: usize,
    columns: usize,
) -> Result<usize, SimError> {
    let h = c.height(generation)?;
    let levels = &h * columns;
    match levels.to_usize() {
        Some(n) if n <= LEVEL_CAP => Ok(h.to_usize().expect("bounded by the level cap")),
        _ => Err(SimError::LevelCap {
            generation,
            levels,
            cap: LEVEL_CAP,
        }),
    }
}

/// Stacks payload columns from generation `from` to generation `to`.
///
/// `base` supplies the generation-`from` column of each color it is asked
/// for; `cut(payload, n, i)` is the payload of slice `i` at the cut from
/// generation `n`; `spacer` makes new spacer levels.
pub fn propagate<T, B, C, S>(
    c: &Construction,
    from: usize,
    to: usize,
    window: &ColorWindow,
    mut base: B,
    cut: C,
    spacer: S,
) -> Result<ColumnSet<T>, SimError>
where
    T: Clone,
    B: FnMut(&GroupElement) -> Vec<T>,
    C: Fn(&T, usize, usize) -> T,
    S: Fn(&SpacerInfo) -> T,
{
    let fixed = match window {
        ColorWindow::Fixed(set) => Some(set),
        _ => None,
    };
    let plan = color_plan(c, from, to, window_top(c, window)?, fixed)?;
    propagate_planned(c, from, &plan, &mut base, &cut, &spacer, |_, _| Ok(()))
}

fn propagate_planned<T, B, C, S, H>(
    c: &Construction,
    from: usize,
    plan: &[BTreeSet<GroupElement>],
    base: &mut B,
    cut: &C,
    spacer: &S,
    mut on_generation: H,
) -> Result<ColumnSet<T>, SimError>
where
    T: Clone,
    B: FnMut(&GroupElement) -> Vec<T>,
    C: Fn(&T, usize, usize) -> T,
    S: Fn(&SpacerInfo) -> T,
    H: FnMut(usize, &mut BTreeMap<GroupElement, Vec<T>>) -> Result<(), SimError>,
{
    let g = c.group();
    check_level_budget(c, from, plan[0].len())?;
    let mut current: BTreeMap<GroupElement, Vec<T>> =
        plan[0].iter().map(|col| (col.clone(), base(col))).collect();
    on_generation(from, &mut current)?;
    for (k, colors) in plan.iter().enumerate().skip(1) {
        let n = from + k - 1;
        let recipe = c.recipe_at(n)?;
        let height = check_level_budget(c, n + 1, colors.len())?;
        let mut next = BTreeMap::new();
        for color in colors {
            let mut column = Vec::with_capacity(height);
            for i in 0..recipe.gamma() {
                let source = g.add(color, recipe.label(i));
                let slice = current
                    .get(&source)
                    .expect("color plan covers every source column");
                column.extend(slice.iter().map(|t| cut(t, n, i)));
                for j in 0..recipe.spacer(i) {
                    column.push(spacer(&SpacerInfo {
                        generation: n + 1,
                        color: color.clone(),
                        subcolumn: i,
                        index: j,
                    }));
                }
            }
            debug_assert_eq!(column.len(), height);
            next.insert(color.clone(), column);
        }
        current = next;
        on_generation(n + 1, &mut current)?;
    }
    Ok(ColumnSet {
        generation: from + plan.len() - 1,
        columns: current,
    })
}

/// Builds the generation-`M` columns with full lineage, from the unit intervals up.
pub fn build_columns(
    c: &Construction,
    generation: usize,
    window: &ColorWindow,
) -> Result<ExplicitColumnSet, SimError> {
    propagate(
        c,
        0,
        generation,
        window,
        |color| {
            vec![LevelDescriptor {
                origin: Origin::Base(color.clone()),
                path: Vec::new(),
            }]
        },
        |d: &LevelDescriptor, _, i| {
            let mut d = d.clone();
            d.path.push(i as u32);
            d
        },
        |info| LevelDescriptor {
            origin: Origin::Spacer(info.clone()),
            path: Vec::new(),
        },
    )
}

/// A copy of a generation-`N` column found inside a generation-`M` column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservedCopy {
    /// Color of the generation-`N` column it copies.
    pub color: GroupElement,
    /// Height of its bottom level inside the generation-`M` column.
    pub offset: u64,
}

/// Locates every copy of every generation-`base` column inside the
/// generation-`outer` columns of `window`, keyed by (outer color, digits),
/// using level lineage only.
pub fn observed_copies(
    c: &Construction,
    base: usize,
    outer: usize,
    window: &ColorWindow,
) -> Result<BTreeMap<(GroupElement, Vec<usize>), ObservedCopy>, SimError> {
    if base > outer {
        return Err(SimError::Invalid(format!(
            "base generation {base} is above outer generation {outer}"
        )));
    }
    let fixed = match window {
        ColorWindow::Fixed(set) => Some(set),
        _ => None,
    };
    let plan = color_plan(c, base, outer, window_top(c, window)?, fixed)?;
    let top = build_columns(
        c,
        outer,
        &ColorWindow::Top(plan[plan.len() - 1].iter().cloned().collect()),
    )?;
    let lower = build_columns(
        c,
        base,
        &ColorWindow::Top(plan[0].iter().cloned().collect()),
    )?;
    let mut index = std::collections::HashMap::new();
    for (color, column) in &lower.columns {
        for (h, d) in column.iter().enumerate() {
            index.insert(d, (color, h as u64));
        }
    }
    let mut found: BTreeMap<(GroupElement, Vec<usize>), ObservedCopy> = BTreeMap::new();
    for (color, column) in &top.columns {
        for (p, d) in column.iter().enumerate() {
            let birth = d.birth();
            if birth > base {
                continue;
            }
            let keep = base - birth;
            let ancestor = LevelDescriptor {
                origin: d.origin.clone(),
                path: d.path[..keep].to_vec(),
            };
            let (copy_color, h) = index
                .get(&ancestor)
                .ok_or_else(|| SimError::Invalid("lineage lost between generations".into()))?;
            let digits: Vec<usize> = d.path[keep..].iter().map(|&x| x as usize).collect();
            let seen = ObservedCopy {
                color: (*copy_color).clone(),
                offset: p as u64 - h,
            };
            match found.get(&(color.clone(), digits.clone())) {
                Some(prev) if *prev != seen => {
                    return Err(SimError::Invalid(format!(
                        "inconsistent copy {digits:?} in column {color}"
                    )))
                }
                Some(_) => {}
                None => {
                    found.insert((color.clone(), digits), seen);
                }
            }
        }
    }
    Ok(found)
}

/// Default window: all colors for finite groups, the zero column otherwise.
pub fn default_window(c: &Construction) -> ColorWindow {
    if c.group().is_finite() {
        ColorWindow::All
    } else {
        ColorWindow::Top(vec![c.group().zero()])
    }
}

/// A finite union of levels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelSet {
    levels: Vec<LevelRef>,
}

impl LevelSet {
    pub fn new(levels: Vec<LevelRef>) -> Self {
        LevelSet { levels }
    }

    pub fn single(level: LevelRef) -> Self {
        LevelSet {
            levels: vec![level],
        }
    }

    pub fn empty() -> Self {
        LevelSet::default()
    }

    pub fn levels(&self) -> &[LevelRef] {
        &self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Exact measure (the levels are disjoint).
    pub fn mass(&self, c: &Construction) -> Result<BigRational, SimError> {
        let mut total = BigRational::zero();
        for l in &self.levels {
            total += c.level_mass(l.generation)?;
        }
        Ok(total)
    }
}

/// Truncated exact measure: the true value lies in `[resolved, resolved + unresolved]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureEstimate {
    pub resolved: BigRational,
    pub unresolved: BigRational,
}

impl MeasureEstimate {
    pub fn zero() -> Self {
        MeasureEstimate {
            resolved: BigRational::zero(),
            unresolved: BigRational::zero(),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.resolved > BigRational::zero()
    }
}

/// Generation-`M` columns with one bit per level set marking its copies.
#[derive(Clone, Debug)]
pub struct MarkedColumns {
    generation: usize,
    level_mass: BigRational,
    columns: Vec<(GroupElement, Vec<u32>)>,
    sets: usize,
}

impl MarkedColumns {
    pub fn build(
        c: &Construction,
        sets: &[&LevelSet],
        resolution: usize,
    ) -> Result<Self, SimError> {
        if sets.len() > 32 {
            return Err(SimError::TooManySets(sets.len()));
        }
        let mut by_generation: BTreeMap<usize, Vec<(usize, &LevelRef)>> = BTreeMap::new();
        for (bit, set) in sets.iter().enumerate() {
            for level in set.levels() {
                c.group().check(&level.color)?;
                if !c.group().contains(&level.color) {
                    return Err(SimError::LevelOutOfRange(level.clone()));
                }
                if level.generation > resolution {
                    return Err(SimError::BelowLevelGeneration {
                        level: level.clone(),
                        resolution,
                    });
                }
                let h = c.height(level.generation)?;
                if BigInt::from(level.height) >= h {
                    return Err(SimError::LevelOutOfRange(level.clone()));
                }
                by_generation
                    .entry(level.generation)
                    .or_default()
                    .push((bit, level));
            }
        }
        let level_mass = c.level_mass(resolution)?;
        let Some((&from, _)) = by_generation.iter().next() else {
            return Ok(MarkedColumns {
                generation: resolution,
                level_mass,
                columns: Vec::new(),
                sets: sets.len(),
            });
        };

        let mut top = BTreeSet::new();
        if c.group().is_finite() {
            top.extend(c.group().elements().expect("finite group"));
        } else {
            for levels in by_generation.values() {
                for (_, level) in levels {
                    top.extend(upward_colors(
                        c,
                        level.generation,
                        &level.color,
                        resolution,
                    )?);
                }
            }
        }
        let plan = color_plan(c, from, resolution, top, None)?;
        let start_height = c
            .height_usize(from)?
            .ok_or_else(|| SimError::Invalid("base height overflow".into()))?;
        let columns = propagate_planned(
            c,
            from,
            &plan,
            &mut |_| vec![0u32; start_height],
            &|m: &u32, _, _| *m,
            &|_| 0u32,
            |generation, current| {
                if let Some(levels) = by_generation.get(&generation) {
                    for (bit, level) in levels {
                        let column = current
                            .get_mut(&level.color)
                            .expect("plan contains the level's own column");
                        let slot = &mut column[level.height as usize];
                        if *slot & (1 << bit) != 0 {
                            return Err(SimError::OverlappingLevels((*level).clone()));
                        }
                        *slot |= 1 << bit;
                    }
                }
                Ok(())
            },
        )?;
        Ok(MarkedColumns {
            generation: resolution,
            level_mass,
            columns: columns.columns.into_iter().collect(),
            sets: sets.len(),
        })
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn level_mass(&self) -> &BigRational {
        &self.level_mass
    }

    fn mass_of(&self, count: usize) -> BigRational {
        &self.level_mass * BigInt::from(count)
    }

    /// Positions of the copies of set `set`, per column.
    pub fn positions(&self, set: usize) -> Vec<(GroupElement, Vec<usize>)> {
        assert!(set < self.sets);
        self.columns
            .iter()
            .map(|(color, marks)| {
                let pos = marks
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| *m & (1 << set) != 0)
                    .map(|(p, _)| p)
                    .collect();
                (color.clone(), pos)
            })
            .collect()
    }

    pub fn mass(&self, set: usize) -> BigRational {
        let count: usize = self
            .columns
            .iter()
            .map(|(_, m)| m.iter().filter(|x| *x & (1 << set) != 0).count())
            .sum();
        self.mass_of(count)
    }

    /// `mu(T^n A ∩ B)` truncated at this generation.
    pub fn intersection(&self, n: i64, a: usize, b: usize) -> MeasureEstimate {
        let (mut hit, mut lost_a, mut lost_b) = (0usize, 0usize, 0usize);
        for (_, marks) in &self.columns {
            let h = marks.len() as i64;
            for (p, m) in marks.iter().enumerate() {
                let p = p as i64;
                if m & (1 << a) != 0 {
                    let q = p + n;
                    if q < 0 || q >= h {
                        lost_a += 1;
                    } else if marks[q as usize] & (1 << b) != 0 {
                        hit += 1;
                    }
                }
                if m & (1 << b) != 0 {
                    let q = p - n;
                    if q < 0 || q >= h {
                        lost_b += 1;
                    }
                }
            }
        }
        MeasureEstimate {
            resolved: self.mass_of(hit),
            unresolved: self.mass_of(lost_a.min(lost_b)),
        }
    }

    /// `mu(A ∩ T^n A ∩ ... ∩ T^{dn} A)` truncated at this generation.
    pub fn multiple_return(&self, a: usize, n: u64, d: usize) -> MeasureEstimate {
        let (mut hit, mut lost) = (0usize, 0usize);
        let bit = 1u32 << a;
        for (_, marks) in &self.columns {
            let h = marks.len() as u64;
            for (p, m) in marks.iter().enumerate() {
                if m & bit == 0 {
                    continue;
                }
                let mut inside = true;
                let mut all = true;
                for k in 1..=d as u64 {
                    let q = p as u64 + k * n;
                    if q >= h {
                        inside = false;
                        break;
                    }
                    if marks[q as usize] & bit == 0 {
                        all = false;
                    }
                }
                if !inside {
                    lost += 1;
                } else if all {
                    hit += 1;
                }
            }
        }
        MeasureEstimate {
            resolved: self.mass_of(hit),
            unresolved: self.mass_of(lost),
        }
    }

    /// True when some `p` carries `a` and `p + shift` carries `b` in the same column.
    pub fn connects(&self, shift: i64, a: usize, b: usize) -> bool {
        self.columns.iter().any(|(_, marks)| {
            let h = marks.len() as i64;
            marks.iter().enumerate().any(|(p, m)| {
                let q = p as i64 + shift;
                m & (1 << a) != 0 && q >= 0 && q < h && marks[q as usize] & (1 << b) != 0
            })
        })
    }
}

/// `mu(T^n A ∩ B)` with exact resolved mass and an exact bound on what the
/// truncation at generation `resolution` cannot see.
pub fn measure_intersection(
    c: &Construction,
    n: i64,
    a: &LevelSet,
    b: &LevelSet,
    resolution: usize,
) -> Result<MeasureEstimate, SimError> {
    if a.is_empty() || b.is_empty() {
        return Ok(MeasureEstimate::zero());
    }
    let marks = MarkedColumns::build(c, &[a, b], resolution)?;
    Ok(marks.intersection(n, 0, 1))
}

/// Smallest `n` in `1..=n_max` with resolved `mu(A ∩ T^n A ∩ ... ∩ T^{dn} A) > 0`.
pub fn recurrence_witness(
    c: &Construction,
    a: &LevelSet,
    d: usize,
    n_max: u64,
    resolution: usize,
) -> Result<Option<(u64, MeasureEstimate)>, SimError> {
    if d == 0 {
        return Err(SimError::Invalid("d must be at least 1".into()));
    }
    if a.is_empty() {
        return Ok(None);
    }
    let marks = MarkedColumns::build(c, &[a], resolution)?;
    // a witness needs two copies at distance n, so n < h_M
    let limit = n_max.min(
        marks
            .columns
            .iter()
            .map(|(_, m)| m.len() as u64)
            .max()
            .unwrap_or(0),
    );
    for n in 1..=limit {
        let est = marks.multiple_return(0, n, d);
        if est.is_positive() {
            return Ok(Some((n, est)));
        }
    }
    Ok(None)
}

/// Smallest `n` in `1..=n_max` such that `mu(T^{k_i n} I_i ∩ J_i) > 0` is
/// resolved for every `i` simultaneously.
pub fn product_orbit_witness(
    c: &Construction,
    pairs: &[(LevelRef, LevelRef)],
    powers: &[i64],
    n_max: u64,
    resolution: usize,
) -> Result<Option<u64>, SimError> {
    if pairs.len() != powers.len() || pairs.is_empty() {
        return Err(SimError::Invalid(format!(
            "{} level pairs but {} powers",
            pairs.len(),
            powers.len()
        )));
    }
    if powers.contains(&0) {
        return Err(SimError::Invalid("powers must be nonzero".into()));
    }
    let sets: Vec<LevelSet> = pairs
        .iter()
        .flat_map(|(i, j)| [LevelSet::single(i.clone()), LevelSet::single(j.clone())])
        .collect();
    // each coordinate gets its own build: I_i and J_i may overlap across coordinates
    let builds: Vec<MarkedColumns> = sets
        .chunks(2)
        .map(|pair| MarkedColumns::build(c, &[&pair[0], &pair[1]], resolution))
        .collect::<Result<_, _>>()?;
    let tallest = builds
        .iter()
        .flat_map(|b| b.columns.iter().map(|(_, m)| m.len() as u64))
        .max()
        .unwrap_or(0);
    let kmin = powers
        .iter()
        .map(|k| k.unsigned_abs())
        .min()
        .expect("nonempty");
    let limit = n_max.min(tallest / kmin + 1);
    'search: for n in 1..=limit {
        for (marks, &k) in builds.iter().zip(powers) {
            if !marks.connects(k * n as i64, 0, 1) {
                continue 'search;
            }
        }
        return Ok(Some(n));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::GroupSpec;
    use crate::registry;
    use num_traits::One;

    fn level(c: &Construction, generation: usize, color: &[i64], height: u64) -> LevelRef {
        LevelRef::new(
            generation,
            c.group().element(color.iter().copied()).unwrap(),
            height,
        )
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn generation_zero_is_unit_levels() {
        let two = registry::two_point();
        let cols = build_columns(&two, 0, &ColorWindow::All).unwrap();
        assert_eq!(cols.columns.len(), 2);
        for (color, col) in &cols.columns {
            assert_eq!(col.len(), 1);
            assert_eq!(col[0].origin, Origin::Base(color.clone()));
        }
    }

    #[test]
    fn chacon2_base_copies() {
        let c = registry::chacon(2);
        let cols = build_columns(&c, 2, &ColorWindow::All).unwrap();
        let col = cols.column(&GroupSpec::trivial().zero()).unwrap();
        assert_eq!(col.len(), 7);
        let base: Vec<usize> = col
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_spacer())
            .map(|(p, _)| p)
            .collect();
        assert_eq!(base, vec![0, 1, 3, 4]);
    }

    #[test]
    fn two_point_columns_and_distances() {
        let two = registry::two_point();
        let g = two.group().clone();
        let cols = build_columns(&two, 2, &ColorWindow::All).unwrap();
        assert_eq!(cols.columns.len(), 2);
        assert!(cols.columns.values().all(|c| c.len() == 7));
        // I = top of C_{1,0}: the spacer born in generation 1 over column 0, slice 1
        let i_level = LevelDescriptor {
            origin: Origin::Spacer(SpacerInfo {
                generation: 1,
                color: g.zero(),
                subcolumn: 1,
                index: 0,
            }),
            path: vec![],
        };
        let find = |color: &GroupElement| -> Vec<usize> {
            cols.column(color)
                .unwrap()
                .iter()
                .enumerate()
                .filter(|(_, d)| d.descends_from(&i_level))
                .map(|(p, _)| p)
                .collect()
        };
        assert_eq!(find(&g.zero()), vec![2]);
        assert_eq!(find(&g.element([1i64]).unwrap()), vec![5]);
    }

    #[test]
    fn within_column_translation() {
        let c = registry::chacon(2);
        let a = LevelSet::single(level(&c, 1, &[], 0));
        let b = LevelSet::single(level(&c, 1, &[], 1));
        let est = measure_intersection(&c, 1, &a, &b, 1).unwrap();
        assert_eq!(est.resolved, ratio(1, 2));
        assert!(est.unresolved.is_zero());

        let same = measure_intersection(&c, 0, &a, &a, 4).unwrap();
        assert_eq!(same.resolved, a.mass(&c).unwrap());
        assert!(same.unresolved.is_zero());
    }

    #[test]
    fn empty_sets() {
        let c = registry::chacon(2);
        let a = LevelSet::single(level(&c, 1, &[], 0));
        let est = measure_intersection(&c, 3, &a, &LevelSet::empty(), 3).unwrap();
        assert_eq!(est, MeasureEstimate::zero());
        assert_eq!(
            recurrence_witness(&c, &LevelSet::empty(), 2, 100, 4).unwrap(),
            None
        );
    }

    #[test]
    fn rejects_bad_levels() {
        let c = registry::chacon(2);
        let a = LevelSet::single(level(&c, 1, &[], 3));
        assert!(matches!(
            measure_intersection(&c, 1, &a, &a, 2),
            Err(SimError::LevelOutOfRange(_))
        ));
        let a = LevelSet::single(level(&c, 3, &[], 0));
        assert!(matches!(
            measure_intersection(&c, 1, &a, &a, 2),
            Err(SimError::BelowLevelGeneration { .. })
        ));
        // a generation-2 level inside a generation-1 level of the same set
        let overlapping = LevelSet::new(vec![level(&c, 1, &[], 0), level(&c, 2, &[], 0)]);
        assert!(matches!(
            MarkedColumns::build(&c, &[&overlapping], 3),
            Err(SimError::OverlappingLevels(_))
        ));
    }

    #[test]
    fn infinite_group_windows() {
        let z = registry::z_extension();
        assert!(matches!(
            build_columns(&z, 2, &ColorWindow::All),
            Err(SimError::WindowRequired)
        ));
        let cols = build_columns(&z, 3, &default_window(&z)).unwrap();
        assert_eq!(cols.columns.len(), 1);
        assert_eq!(cols.level_count(), 156);
        let tiny: BTreeSet<GroupElement> = [z.group().zero()].into();
        assert!(matches!(
            build_columns(&z, 2, &ColorWindow::Fixed(tiny)),
            Err(SimError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn base_mass_is_conserved() {
        let two = registry::two_point();
        let g = two.group().clone();
        let base = LevelSet::single(level(&two, 0, &[0], 0));
        for m in 0..8 {
            let marks = MarkedColumns::build(&two, &[&base], m).unwrap();
            assert_eq!(marks.mass(0), BigRational::one());
            let total: usize = marks.columns.iter().map(|(_, c)| c.len()).sum();
            let expected = two.height(m).unwrap() * 2;
            assert_eq!(BigInt::from(total), expected);
        }
        let _ = g;
    }

    #[test]
    fn chacon2_multiple_recurrence() {
        let c = registry::chacon(2);
        let a = LevelSet::single(level(&c, 1, &[], 0));
        let (n, est) = recurrence_witness(&c, &a, 3, 31, 6).unwrap().unwrap();
        assert!(est.is_positive());
        assert!(n <= 31);
    }

    #[test]
    fn product_witness_arguments() {
        let c = registry::chacon(2);
        let i = level(&c, 1, &[], 0);
        assert!(product_orbit_witness(&c, &[(i.clone(), i.clone())], &[0], 10, 3).is_err());
        assert!(product_orbit_witness(&c, &[(i.clone(), i.clone())], &[1, 2], 10, 3).is_err());
        assert!(product_orbit_witness(&c, &[(i.clone(), i)], &[1], 10, 3)
            .unwrap()
            .is_some());
    }
}
