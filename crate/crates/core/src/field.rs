//! Dense linear algebra over the prime field GF(p).
//!
//! Matrices are small (a few hundred columns at most), so everything is
//! dense, row-major and exact. Residues are stored as `u32` in `[0, p)`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// The prime field GF(p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if is_prime(p) {
            Ok(Self { p })
        } else {
            Err(Error::NotPrime(p))
        }
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem. Panics on zero.
    #[inline]
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in GF({})", self.p);
        self.pow(a, self.p as u64 - 2)
    }

    pub fn dot(self, a: &[u32], b: &[u32]) -> u32 {
        debug_assert_eq!(a.len(), b.len());
        let acc: u64 = a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum();
        (acc % self.p as u64) as u32
    }

    pub fn random_vec<R: Rng + ?Sized>(self, len: usize, rng: &mut R) -> Vec<u32> {
        (0..len).map(|_| rng.gen_range(0..self.p)).collect()
    }
}

/// Trial division.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A dense matrix over GF(p), row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix(p={}, {}x{})", self.field.p, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FpMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from signed entries, reducing each one mod p.
    pub fn from_rows<R: AsRef<[i64]>>(field: PrimeField, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            data.extend(r.iter().map(|&v| field.reduce(v)));
        }
        Ok(Self { field, rows: rows.len(), cols, data })
    }

    /// Builds a matrix from rows of residues already in `[0, p)`.
    pub fn from_residue_rows(field: PrimeField, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            data.extend(r.iter().map(|&v| v % field.p()));
        }
        Ok(Self { field, rows: rows.len(), cols, data })
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = field.random_vec(rows * cols, rng);
        Self { field, rows, cols, data }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.field.p();
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn push_row(&mut self, row: &[u32]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: row.len() });
        }
        let p = self.field.p();
        self.data.extend(row.iter().map(|&v| v % p));
        self.rows += 1;
        Ok(())
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.cols });
        }
        if self.field != other.field {
            return Err(Error::PrimeMismatch(self.field.p(), other.field.p()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FpMatrix { field: self.field, rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// The submatrix made of the given columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        out
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), v)).collect())
    }

    pub fn matmul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let f = self.field;
        let mut out = FpMatrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, c)));
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: u32) {
        let f = self.field;
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = f.mul(*v, s);
        }
    }

    /// row[dst] -= s * row[src]
    fn axpy_row(&mut self, dst: usize, src: usize, s: u32) {
        let f = self.field;
        let cols = self.cols;
        for c in 0..cols {
            let v = self.data[src * cols + c];
            if v != 0 {
                let d = &mut self.data[dst * cols + c];
                *d = f.sub(*d, f.mul(s, v));
            }
        }
    }

    /// Reduced row-echelon form and pivot columns. Zero rows are kept at the
    /// bottom so the shape is unchanged.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let f = m.field;
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(r) = (lead..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(lead, r);
            let inv = f.inv(m.get(lead, c));
            m.scale_row(lead, inv);
            for r in 0..m.rows {
                if r != lead {
                    let s = m.get(r, c);
                    if s != 0 {
                        m.axpy_row(r, lead, s);
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis (as rows) of the right kernel `{x : M x = 0}`.
    pub fn kernel(&self) -> FpMatrix {
        let (r, pivots) = self.rref();
        let f = self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = FpMatrix::zeros(f, free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            out.set(i, fc, 1);
            for (pr, &pc) in pivots.iter().enumerate() {
                out.set(i, pc, f.neg(r.get(pr, fc)));
            }
        }
        out
    }

    /// A solution of `M x = b`, or `None` when `b` is outside the column span.
    pub fn solve(&self, b: &[u32]) -> Result<Option<Vec<u32>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: b.len() });
        }
        let f = self.field;
        // Augment and reduce.
        let mut aug = FpMatrix::zeros(f, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, b[r]);
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0; self.cols];
        for (pr, &pc) in pivots.iter().enumerate() {
            x[pc] = red.get(pr, self.cols);
        }
        Ok(Some(x))
    }

    /// Coefficients `c` with `sum_i c_i * row_i = v`, if `v` is in the row span.
    pub fn express_in_rows(&self, v: &[u32]) -> Result<Option<Vec<u32>>> {
        self.transpose().solve(v)
    }

    /// Nonzero rows of the RREF: a canonical basis of the row space.
    pub fn row_space_basis(&self) -> FpMatrix {
        let (r, pivots) = self.rref();
        let mut out = FpMatrix::zeros(self.field, pivots.len(), self.cols);
        out.data.copy_from_slice(&r.data[..pivots.len() * self.cols]);
        out
    }
}

/// The split form `x·x' − y·y'` on `F_p^3 ⊕ F_p^3` (or any even length).
pub fn beta_form(field: PrimeField, v: &[u32], w: &[u32]) -> Result<u32> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), got: w.len() });
    }
    if !v.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: v.len() + 1, got: v.len() });
    }
    let h = v.len() / 2;
    Ok(field.sub(field.dot(&v[..h], &w[..h]), field.dot(&v[h..], &w[h..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    /// Plain Gaussian elimination counting pivots, written independently of `rref`.
    fn naive_rank(m: &FpMatrix) -> usize {
        let p = m.field().p() as i64;
        let mut a: Vec<Vec<i64>> = (0..m.rows()).map(|r| m.row(r).iter().map(|&v| v as i64).collect()).collect();
        let mut rank = 0;
        for c in 0..m.cols() {
            let Some(piv) = (rank..a.len()).find(|&r| a[r][c] % p != 0) else { continue };
            a.swap(rank, piv);
            let lead = a[rank][c];
            for r in rank + 1..a.len() {
                let factor = a[r][c];
                for k in 0..m.cols() {
                    a[r][k] = (a[r][k] * lead - a[rank][k] * factor).rem_euclid(p);
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn primes() {
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(7).is_ok());
        assert_eq!(PrimeField::new(9), Err(Error::NotPrime(9)));
        assert_eq!(PrimeField::new(1), Err(Error::NotPrime(1)));
        let f = gf(7);
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
    }

    #[test]
    fn rref_identity() {
        let m = FpMatrix::identity(gf(3), 2);
        let (r, piv) = m.rref();
        assert_eq!(r, m);
        assert_eq!(piv, vec![0, 1]);
    }

    #[test]
    fn rref_dependent_rows() {
        let m = FpMatrix::from_rows(gf(5), &[[1, 2], [2, 4]]).unwrap();
        let (r, piv) = m.rref();
        assert_eq!(r, FpMatrix::from_rows(gf(5), &[[1, 2], [0, 0]]).unwrap());
        assert_eq!(piv, vec![0]);
    }

    #[test]
    fn rank_matches_naive_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let mut m = FpMatrix::random(gf(3), 6, 12, &mut rng);
            // Force some dependence now and then.
            if rng.gen_bool(0.5) {
                let r0 = m.row(0).to_vec();
                let r1 = m.row(1).to_vec();
                for c in 0..12 {
                    m.set(5, c, (r0[c] + 2 * r1[c]) % 3);
                }
            }
            assert_eq!(m.rank(), naive_rank(&m));
        }
    }

    #[test]
    fn kernel_of_zero_map() {
        let m = FpMatrix::zeros(gf(2), 3, 3);
        let k = m.kernel();
        assert_eq!(k.rows(), 3);
        assert_eq!(k.rank(), 3);
    }

    #[test]
    fn rank_nullity_and_kernel_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &p in &[2, 3, 5] {
            for _ in 0..200 {
                let rows = rng.gen_range(1..7);
                let cols = rng.gen_range(1..9);
                let m = FpMatrix::random(gf(p), rows, cols, &mut rng);
                let k = m.kernel();
                assert_eq!(m.rank() + k.rows(), cols);
                assert_eq!(k.rank(), k.rows());
                for r in 0..k.rows() {
                    assert!(m.mul_vec(k.row(r)).unwrap().iter().all(|&v| v == 0));
                }
            }
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = gf(5);
        for _ in 0..100 {
            let m = FpMatrix::random(f, 5, 4, &mut rng);
            let x0 = f.random_vec(4, &mut rng);
            let b = m.mul_vec(&x0).unwrap();
            let x = m.solve(&b).unwrap().expect("consistent");
            assert_eq!(m.mul_vec(&x).unwrap(), b);
        }
        let m = FpMatrix::from_rows(f, &[[1, 0], [1, 0]]).unwrap();
        assert_eq!(m.solve(&[1, 2]).unwrap(), None);
    }

    #[test]
    fn rref_idempotent_and_row_span_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &p in &[2, 3, 7] {
            for _ in 0..50 {
                let m = FpMatrix::random(gf(p), 5, 7, &mut rng);
                let (r, _) = m.rref();
                assert_eq!(r.rref().0, r);
                // Mutual containment of row spans.
                for i in 0..m.rows() {
                    assert!(r.express_in_rows(m.row(i)).unwrap().is_some());
                    assert!(m.express_in_rows(r.row(i)).unwrap().is_some());
                }
            }
        }
    }

    #[test]
    fn rank_invariant_under_row_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = gf(3);
        for _ in 0..100 {
            let m = FpMatrix::random(f, 4, 6, &mut rng);
            let mut t = m.clone();
            t.swap_rows(0, 3);
            t.scale_row(1, 2);
            t.axpy_row(2, 0, 1);
            assert_eq!(t.rank(), m.rank());
        }
    }

    #[test]
    fn beta_basics() {
        let f = gf(5);
        assert_eq!(beta_form(f, &[1; 6], &[1; 6]).unwrap(), 0);
        let e = [1, 0, 0, 0, 0, 0];
        assert_eq!(beta_form(f, &e, &e).unwrap(), 1);
        assert!(beta_form(f, &[1; 6], &[1; 4]).is_err());
    }
}
