//! Smith normal form over arbitrary-precision integers, with the unimodular
//! transforms kept so that linear systems over Z (and over Z with per-row
//! congruences) can be solved with explicit certificates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a `rows x columns.len()` matrix whose j-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {j} has wrong length");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .filter(|&j| !v[j].is_zero())
                    .map(|j| &self[(i, j)] * &v[j])
                    .sum()
            })
            .collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let delta = &self[(src, j)] * factor;
            self[(dst, j)] += delta;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let delta = &self[(i, src)] * factor;
            self[(i, dst)] += delta;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self[(r, j)]);
            self[(r, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// `left * original * right == diagonal matrix with entries `invariants`
/// (then zeros)`, with `left`, `right` unimodular and each invariant factor
/// positive and dividing the next.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub left: IntMatrix,
    pub right: IntMatrix,
    pub invariants: Vec<BigInt>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }
}

fn min_abs_nonzero(m: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..m.rows {
        for j in t..m.cols {
            let v = &m[(i, j)];
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if m[(bi, bj)].abs() <= v.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let mut m = a.clone();
    let mut left = IntMatrix::identity(a.rows);
    let mut right = IntMatrix::identity(a.cols);
    let mut invariants = Vec::new();

    for t in 0..a.rows.min(a.cols) {
        loop {
            let Some((pi, pj)) = min_abs_nonzero(&m, t) else {
                return SmithForm {
                    left,
                    right,
                    invariants,
                };
            };
            m.swap_rows(t, pi);
            left.swap_rows(t, pi);
            m.swap_cols(t, pj);
            right.swap_cols(t, pj);

            let pivot = m[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m.rows {
                if m[(i, t)].is_zero() {
                    continue;
                }
                let q = -m[(i, t)].div_floor(&pivot);
                m.add_row_multiple(i, t, &q);
                left.add_row_multiple(i, t, &q);
                clean &= m[(i, t)].is_zero();
            }
            for j in t + 1..m.cols {
                if m[(t, j)].is_zero() {
                    continue;
                }
                let q = -m[(t, j)].div_floor(&pivot);
                m.add_col_multiple(j, t, &q);
                right.add_col_multiple(j, t, &q);
                clean &= m[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }

            // divisibility of the remaining block by the pivot
            let offender = (t + 1..m.rows)
                .find(|&i| (t + 1..m.cols).any(|j| !m[(i, j)].is_multiple_of(&pivot)));
            if let Some(i) = offender {
                m.add_row_multiple(t, i, &BigInt::one());
                left.add_row_multiple(t, i, &BigInt::one());
                continue;
            }
            break;
        }
        if m[(t, t)].is_negative() {
            m.negate_row(t);
            left.negate_row(t);
        }
        invariants.push(m[(t, t)].clone());
    }

    SmithForm {
        left,
        right,
        invariants,
    }
}

/// Integer lattice presented by generator columns inside `Z^r`, where row `i`
/// is read modulo `moduli[i]` (zero means no congruence).
#[derive(Clone, Debug)]
pub struct ModularSystem {
    rows: usize,
    generators: usize,
    smith: SmithForm,
}

impl ModularSystem {
    pub fn new(rows: usize, columns: &[Vec<BigInt>], moduli: &[BigInt]) -> Self {
        assert_eq!(moduli.len(), rows);
        let mut all: Vec<Vec<BigInt>> = columns.to_vec();
        for (i, d) in moduli.iter().enumerate() {
            if !d.is_zero() {
                let mut rel = vec![BigInt::zero(); rows];
                rel[i] = d.abs();
                all.push(rel);
            }
        }
        let matrix = IntMatrix::from_columns(rows, &all);
        ModularSystem {
            rows,
            generators: columns.len(),
            smith: smith_normal_form(&matrix),
        }
    }

    /// Coefficients `x` (one per generator) with `sum x_j col_j == target`
    /// modulo the row congruences, or `None` when the target is outside the span.
    pub fn solve(&self, target: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(target.len(), self.rows);
        let transformed = self.smith.left.mul_vec(target);
        let total_cols = self.smith.right.cols();
        let mut y = vec![BigInt::zero(); total_cols];
        for (i, value) in transformed.iter().enumerate() {
            if let Some(s) = self.smith.invariants.get(i) {
                let (q, r) = value.div_rem(s);
                if !r.is_zero() {
                    return None;
                }
                y[i] = q;
            } else if !value.is_zero() {
                return None;
            }
        }
        let x = self.smith.right.mul_vec(&y);
        Some(x[..self.generators].to_vec())
    }

    /// Smallest `D > 0` with `D * e_slot` in the span, or zero when the span
    /// meets that coordinate line only in the origin.
    pub fn line_meet(&self, slot: usize) -> BigInt {
        let mut unit = vec![BigInt::zero(); self.rows];
        unit[slot] = BigInt::one();
        let transformed = self.smith.left.mul_vec(&unit);
        let mut d = BigInt::one();
        for (i, value) in transformed.iter().enumerate() {
            match self.smith.invariants.get(i) {
                Some(s) => {
                    let need = s / s.gcd(value);
                    d = d.lcm(&need);
                }
                None if !value.is_zero() => return BigInt::zero(),
                None => {}
            }
        }
        d
    }

    /// True when the span (plus congruences) is all of `Z^rows`.
    pub fn is_full(&self) -> bool {
        self.smith.rank() == self.rows && self.smith.invariants.iter().all(|s| s.is_one())
    }

    pub fn invariants(&self) -> &[BigInt] {
        &self.smith.invariants
    }
}
