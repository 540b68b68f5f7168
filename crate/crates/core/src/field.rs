//! Prime-field arithmetic and exact linear algebra over `F_q`.

use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported modulus. Residues stay below 2^32 so a product of two
/// residues fits in a `u64` without overflow.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

/// Deterministic trial-division primality; moduli here are at most 2^32.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= n` (with `n < 2` treated as 2).
pub fn next_prime_at_least(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q > MAX_MODULUS {
            return Err(Error::ModulusTooLarge { q });
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimeField { q })
    }

    pub fn modulus(self) -> u64 {
        self.q
    }

    pub fn reduce(self, x: u64) -> u64 {
        x % self.q
    }

    /// Maps a signed integer into `[0, q)`.
    pub fn from_i64(self, x: i64) -> u64 {
        x.rem_euclid(self.q as i64) as u64
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        (a * b) % self.q
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(self, a: u64) -> Option<u64> {
        let a = a % self.q;
        (a != 0).then(|| self.pow(a, self.q - 2))
    }

    pub fn sample(self, rng: &mut impl Rng) -> u64 {
        rng.random_range(0..self.q)
    }
}

/// Dense row-major matrix of residues. The field is supplied per operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FieldMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from rows, reducing every entry mod q.
    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged row {i}");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, field.reduce(v));
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

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Vertical concatenation; column counts must agree.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        FieldMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Submatrix keeping the listed columns, in the listed order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn mul(&self, field: PrimeField, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = field.add(out.get(i, j), field.mul(a, rhs.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, field: PrimeField, x: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, x.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
            })
            .collect()
    }

    pub fn add(&self, field: PrimeField, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        FieldMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| field.add(a, b))
                .collect(),
        }
    }
}

/// Reduced row echelon form of `m`, applying the same row operations to `companion`
/// when given. Returns the pivot column of each nonzero row, in order.
fn rref(field: PrimeField, m: &mut FieldMatrix, mut companion: Option<&mut FieldMatrix>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
            continue;
        };
        swap_rows(m, row, p);
        if let Some(c) = companion.as_deref_mut() {
            swap_rows(c, row, p);
        }
        let inv = field.inv(m.get(row, col)).expect("pivot is nonzero");
        scale_row(field, m, row, inv);
        if let Some(c) = companion.as_deref_mut() {
            scale_row(field, c, row, inv);
        }
        for r in 0..m.rows {
            if r == row {
                continue;
            }
            let factor = m.get(r, col);
            if factor != 0 {
                axpy_row(field, m, r, row, factor);
                if let Some(c) = companion.as_deref_mut() {
                    axpy_row(field, c, r, row, factor);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

fn swap_rows(m: &mut FieldMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for c in 0..m.cols {
        m.data.swap(a * m.cols + c, b * m.cols + c);
    }
}

fn scale_row(field: PrimeField, m: &mut FieldMatrix, r: usize, s: u64) {
    for v in m.row_mut(r) {
        *v = field.mul(*v, s);
    }
}

/// `row[dst] -= factor * row[src]`
fn axpy_row(field: PrimeField, m: &mut FieldMatrix, dst: usize, src: usize, factor: u64) {
    for c in 0..m.cols {
        let v = field.sub(m.get(dst, c), field.mul(factor, m.get(src, c)));
        m.set(dst, c, v);
    }
}

/// Row rank by exact elimination.
pub fn rank(field: PrimeField, m: &FieldMatrix) -> usize {
    let mut work = m.clone();
    rref(field, &mut work, None).len()
}

/// Finds `D` with `D · m = target`, or `None` when some row of `target`
/// lies outside the row space of `m`.
pub fn solve_left(field: PrimeField, m: &FieldMatrix, target: &FieldMatrix) -> Option<FieldMatrix> {
    assert_eq!(m.cols, target.cols, "solve_left column mismatch");
    let mut reduced = m.clone();
    let mut transform = FieldMatrix::identity(m.rows);
    // After elimination: transform · m = reduced.
    let pivots = rref(field, &mut reduced, Some(&mut transform));
    let mut d = FieldMatrix::zeros(target.rows, m.rows);
    for t in 0..target.rows {
        let mut residual = target.row(t).to_vec();
        let mut coeffs = vec![0u64; pivots.len()];
        for (i, &pc) in pivots.iter().enumerate() {
            let c = residual[pc];
            if c == 0 {
                continue;
            }
            coeffs[i] = c;
            for (col, r) in residual.iter_mut().enumerate() {
                *r = field.sub(*r, field.mul(c, reduced.get(i, col)));
            }
        }
        if residual.iter().any(|&v| v != 0) {
            return None;
        }
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for j in 0..m.rows {
                let v = field.add(d.get(t, j), field.mul(c, transform.get(i, j)));
                d.set(t, j, v);
            }
        }
    }
    Some(d)
}

/// Matrix with i.i.d. uniform entries drawn from `rng`.
pub fn sample_matrix(field: PrimeField, rows: usize, cols: usize, rng: &mut impl Rng) -> FieldMatrix {
    let mut m = FieldMatrix::zeros(rows, cols);
    for v in m.data.iter_mut() {
        *v = field.sample(rng);
    }
    m
}
