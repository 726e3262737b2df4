//! Stabilizer tableaux with phase tracking and trace bookkeeping.
//!
//! A tableau with `k` commuting, independent generators on `n` qudits
//! represents the (possibly unnormalized, possibly mixed) operator
//!
//! ```text
//! Ψ = p^t · ρ_G,   ρ_G = p^{-n} Σ_{g ∈ G} g,
//! ```
//!
//! where `t = log_trace` so that `tr Ψ = p^t`. Pure states have `k = n` and
//! `ρ_G` is the rank-one projector.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FpMatrix, PrimeField};
use crate::weyl::WeylOperator;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StabilizerTableau {
    p: u32,
    n: usize,
    gens: Vec<WeylOperator>,
    log_trace: i64,
}

/// Outcome of a projection that may annihilate the operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projected {
    State(StabilizerTableau),
    Zero,
}

impl Projected {
    pub fn is_zero(&self) -> bool {
        matches!(self, Projected::Zero)
    }

    pub fn state(self) -> Option<StabilizerTableau> {
        match self {
            Projected::State(t) => Some(t),
            Projected::Zero => None,
        }
    }
}

/// Default cap on `p^n` for [`enumerate_all`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 27;

impl StabilizerTableau {
    /// Validates all invariants: commuting, independent, valid phases, `k ≤ n`.
    pub fn new(p: u32, n: usize, gens: Vec<WeylOperator>, log_trace: i64) -> Result<Self> {
        PrimeField::new(p)?;
        let t = Self { p, n, gens, log_trace };
        t.validate()?;
        Ok(t)
    }

    pub(crate) fn from_parts_unchecked(p: u32, n: usize, gens: Vec<WeylOperator>, log_trace: i64) -> Self {
        let t = Self { p, n, gens, log_trace };
        debug_assert!(t.validate().is_ok(), "{:?}", t.validate());
        t
    }

    /// `|0…0⟩`, stabilized by `Z_j`.
    pub fn zero_state(p: u32, n: usize) -> Self {
        let gens = (0..n).map(|j| WeylOperator::single(p, n, j, 0, 1)).collect();
        Self::from_parts_unchecked(p, n, gens, 0)
    }

    /// The normalized maximally mixed state (no generators).
    pub fn maximally_mixed(p: u32, n: usize) -> Self {
        Self::from_parts_unchecked(p, n, Vec::new(), 0)
    }

    /// `Σ_i |ii⟩/√p` on qudits `(0, 1)`, stabilized by `X⊗X` and `Z⊗Z⁻¹`.
    pub fn bell_pair(p: u32) -> Self {
        let f = PrimeField::new(p).expect("prime");
        let xx = WeylOperator::new(p, vec![1, 1], vec![0, 0], 0).unwrap();
        let zz = WeylOperator::new(p, vec![0, 0], vec![1, f.neg(1)], 0).unwrap();
        Self::from_parts_unchecked(p, 2, vec![xx, zz], 0)
    }

    /// `Σ_i |i…i⟩/√p` on `m ≥ 2` qudits.
    pub fn ghz(p: u32, m: usize) -> Self {
        let f = PrimeField::new(p).expect("prime");
        let mut gens = vec![WeylOperator::new(p, vec![1; m], vec![0; m], 0).unwrap()];
        for j in 1..m {
            let mut z = vec![0; m];
            z[j - 1] = 1;
            z[j] = f.neg(1);
            gens.push(WeylOperator::new(p, vec![0; m], z, 0).unwrap());
        }
        Self::from_parts_unchecked(p, m, gens, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gens.len() > self.n {
            return Err(Error::InvalidTableau(format!("{} generators on {} qudits", self.gens.len(), self.n)));
        }
        for g in &self.gens {
            if g.p() != self.p || g.n() != self.n {
                return Err(Error::InvalidTableau("generator shape mismatch".into()));
            }
            if !g.has_valid_stabilizer_phase() {
                return Err(Error::InvalidPhase { phase: g.phase(), p: self.p });
            }
            if g.is_identity_vector() {
                return Err(Error::InvalidTableau("generator proportional to identity".into()));
            }
        }
        for (i, a) in self.gens.iter().enumerate() {
            for b in &self.gens[i + 1..] {
                if a.sp_unchecked(b) != 0 {
                    return Err(Error::InvalidTableau("generators do not commute".into()));
                }
            }
        }
        if self.check_matrix().rank() != self.gens.len() {
            return Err(Error::InvalidTableau("generators are not independent".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.gens.len()
    }

    #[inline]
    pub fn log_trace(&self) -> i64 {
        self.log_trace
    }

    pub fn with_log_trace(mut self, t: i64) -> Self {
        self.log_trace = t;
        self
    }

    pub fn is_pure(&self) -> bool {
        self.k() == self.n
    }

    pub fn generators(&self) -> &[WeylOperator] {
        &self.gens
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.p).expect("validated")
    }

    /// The `k × 2n` matrix of generator symplectic vectors.
    pub fn check_matrix(&self) -> FpMatrix {
        let rows: Vec<Vec<u32>> = self.gens.iter().map(|g| g.symplectic()).collect();
        FpMatrix::from_residue_rows(self.field(), 2 * self.n, &rows).expect("shape")
    }

    pub fn phases(&self) -> Vec<u32> {
        self.gens.iter().map(|g| g.phase()).collect()
    }

    /// Column indices `(x_q, z_q)` of the given qudits in the check matrix.
    pub fn columns_of(&self, qudits: &[usize]) -> Vec<usize> {
        qudits.iter().flat_map(|&q| [q, q + self.n]).collect()
    }

    /// The group element with symplectic vector `v`, if `v` lies in the span.
    pub fn element_with_vector(&self, v: &[u32]) -> Result<Option<WeylOperator>> {
        if v.len() != 2 * self.n {
            return Err(Error::DimensionMismatch { expected: 2 * self.n, got: v.len() });
        }
        if self.gens.is_empty() {
            return Ok(if v.iter().all(|&c| c == 0) { Some(WeylOperator::identity(self.p, self.n)) } else { None });
        }
        let Some(coeffs) = self.check_matrix().express_in_rows(v)? else {
            return Ok(None);
        };
        let mut acc = WeylOperator::identity(self.p, self.n);
        for (g, &c) in self.gens.iter().zip(&coeffs) {
            if c != 0 {
                acc = acc.mul_unchecked(&g.pow(c));
            }
        }
        Ok(Some(acc))
    }

    /// Does the signed group contain `g` (with its exact phase)?
    pub fn contains(&self, g: &WeylOperator) -> Result<bool> {
        Ok(self.element_with_vector(&g.symplectic())?.as_ref() == Some(g))
    }

    /// All `p^k` group elements. Intended for small `k`.
    pub fn group_elements(&self) -> Vec<WeylOperator> {
        let mut out = vec![WeylOperator::identity(self.p, self.n)];
        for g in &self.gens {
            let powers: Vec<WeylOperator> = (0..self.p).map(|e| g.pow(e)).collect();
            out = out.iter().flat_map(|a| powers.iter().map(move |b| a.mul_unchecked(b))).collect();
        }
        out
    }

    /// Canonical generators: RREF over the symplectic columns (X block then
    /// Z block, qudit index ascending) with pivots normalized to 1. The phase
    /// of each row is then fixed by the group.
    pub fn canonicalize(&self) -> Self {
        let cols: Vec<usize> = (0..2 * self.n).collect();
        let (rows, _) = reduce_rows(self.p, self.gens.clone(), &cols);
        Self { p: self.p, n: self.n, gens: rows, log_trace: self.log_trace }
    }

    /// Tensor product; qudits of `other` follow those of `self`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let left_pad = WeylOperator::identity(self.p, other.n);
        let right_pad = WeylOperator::identity(self.p, self.n);
        let mut gens: Vec<WeylOperator> = self.gens.iter().map(|g| g.tensor(&left_pad).unwrap()).collect();
        gens.extend(other.gens.iter().map(|g| right_pad.tensor(g).unwrap()));
        Ok(Self { p: self.p, n: self.n + other.n, gens, log_trace: self.log_trace + other.log_trace })
    }

    /// Relabels qudits: old qudit `i` moves to position `perm[i]`.
    pub fn permute_qudits(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: perm.len() });
        }
        let mut seen = vec![false; self.n];
        for &j in perm {
            if j >= self.n || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidSubset("not a permutation".into()));
            }
        }
        let mut inverse = vec![0; self.n];
        for (i, &j) in perm.iter().enumerate() {
            inverse[j] = i;
        }
        let gens = self.gens.iter().map(|g| g.restrict(&inverse)).collect();
        Ok(Self { p: self.p, n: self.n, gens, log_trace: self.log_trace })
    }

    fn check_qudits(&self, qudits: &[usize]) -> Result<()> {
        let mut seen = HashSet::new();
        for &q in qudits {
            if q >= self.n {
                return Err(Error::IndexOutOfRange { index: q, len: self.n });
            }
            if !seen.insert(q) {
                return Err(Error::InvalidSubset(format!("qudit {q} repeated")));
            }
        }
        Ok(())
    }

    /// Partial trace over `traced`. The kept qudits stay in ascending order.
    /// The trace of the represented operator is unchanged.
    pub fn trace_out(&self, traced: &[usize]) -> Result<Self> {
        self.check_qudits(traced)?;
        let traced_set: HashSet<usize> = traced.iter().copied().collect();
        let kept: Vec<usize> = (0..self.n).filter(|q| !traced_set.contains(q)).collect();
        let cols = self.columns_of(traced);
        let (rows, rank) = reduce_rows(self.p, self.gens.clone(), &cols);
        let gens = rows[rank..].iter().map(|g| g.restrict(&kept)).collect();
        Ok(Self::from_parts_unchecked(self.p, kept.len(), gens, self.log_trace))
    }

    /// Reduced state on `keep` (ascending qudit order).
    pub fn reduced(&self, keep: &[usize]) -> Result<Self> {
        self.check_qudits(keep)?;
        let keep_set: HashSet<usize> = keep.iter().copied().collect();
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep_set.contains(q)).collect();
        self.trace_out(&traced)
    }

    /// Dimension of the subgroup supported inside `region`.
    pub fn local_dimension(&self, region: &[usize]) -> Result<usize> {
        self.check_qudits(region)?;
        let set: HashSet<usize> = region.iter().copied().collect();
        let outside: Vec<usize> = (0..self.n).filter(|q| !set.contains(q)).collect();
        let rank_outside = self.check_matrix().select_cols(&self.columns_of(&outside)).rank();
        Ok(self.k() - rank_outside)
    }

    /// Applies `P_g = p⁻¹ Σ_j g^j` on both sides: `Ψ ↦ P_g Ψ P_g`.
    pub fn postselect(&self, g: &WeylOperator) -> Result<Projected> {
        if g.p() != self.p {
            return Err(Error::PrimeMismatch(self.p, g.p()));
        }
        if g.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: g.n() });
        }
        if !g.has_valid_stabilizer_phase() {
            return Err(Error::InvalidPhase { phase: g.phase(), p: self.p });
        }
        if g.is_identity_vector() {
            // P_g is the identity for g = 1 and zero for a nontrivial scalar.
            return Ok(if g.phase() == 0 { Projected::State(self.clone()) } else { Projected::Zero });
        }
        let f = self.field();
        let products: Vec<u32> = self.gens.iter().map(|h| h.sp_unchecked(g)).collect();
        if let Some(j) = products.iter().position(|&c| c != 0) {
            let cj_inv = f.inv(products[j]);
            let pivot = self.gens[j].clone();
            let mut gens = Vec::with_capacity(self.k());
            for (i, h) in self.gens.iter().enumerate() {
                if i == j {
                    gens.push(g.clone());
                } else if products[i] == 0 {
                    gens.push(h.clone());
                } else {
                    let m = f.neg(f.mul(products[i], cj_inv));
                    gens.push(h.mul_unchecked(&pivot.pow(m)));
                }
            }
            return Ok(Projected::State(Self::from_parts_unchecked(self.p, self.n, gens, self.log_trace - 1)));
        }
        match self.element_with_vector(&g.symplectic())? {
            Some(h) if &h == g => Ok(Projected::State(self.clone())),
            Some(_) => Ok(Projected::Zero),
            None => {
                let mut gens = self.gens.clone();
                gens.push(g.clone());
                Ok(Projected::State(Self::from_parts_unchecked(self.p, self.n, gens, self.log_trace - 1)))
            }
        }
    }

    /// Uniformly random pure stabilizer state on `n` qudits.
    ///
    /// Generators are drawn one at a time, uniformly from the symplectic
    /// complement of the current span minus the span itself; every ordered
    /// basis of every Lagrangian subspace is equally likely. Phases are then
    /// uniform over valid stabilizer phases.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, p: u32, rng: &mut R) -> Result<Self> {
        let f = PrimeField::new(p)?;
        if n == 0 {
            return Err(Error::InvalidTableau("n must be at least 1".into()));
        }
        let mut basis: Vec<Vec<u32>> = Vec::with_capacity(n);
        while basis.len() < n {
            let complement = symplectic_complement(f, n, &basis);
            loop {
                let coeffs = f.random_vec(complement.rows(), rng);
                let v = combine_rows(f, &complement, &coeffs);
                if !in_span(f, &basis, &v) {
                    basis.push(v);
                    break;
                }
            }
        }
        let gens = basis.iter().map(|v| WeylOperator::from_symplectic(p, v, random_stabilizer_phase(p, rng)).unwrap()).collect();
        Ok(Self::from_parts_unchecked(p, n, gens, 0))
    }
}

fn random_stabilizer_phase<R: Rng + ?Sized>(p: u32, rng: &mut R) -> u32 {
    if p == 2 {
        2 * rng.gen_range(0..2)
    } else {
        rng.gen_range(0..p)
    }
}

fn combine_rows(f: PrimeField, m: &FpMatrix, coeffs: &[u32]) -> Vec<u32> {
    let mut v = vec![0; m.cols()];
    for (r, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            for (acc, &e) in v.iter_mut().zip(m.row(r)) {
                *acc = f.add(*acc, f.mul(c, e));
            }
        }
    }
    v
}

fn in_span(f: PrimeField, basis: &[Vec<u32>], v: &[u32]) -> bool {
    if v.iter().all(|&c| c == 0) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let m = FpMatrix::from_residue_rows(f, v.len(), basis).unwrap();
    m.express_in_rows(v).unwrap().is_some()
}

/// Basis of `{v : ⟨b, v⟩ = 0 for all b in basis}` in `F_p^{2n}`.
pub(crate) fn symplectic_complement(f: PrimeField, n: usize, basis: &[Vec<u32>]) -> FpMatrix {
    if basis.is_empty() {
        return FpMatrix::identity(f, 2 * n);
    }
    // ⟨b, v⟩ = b_x·v_z − b_z·v_x, so the constraint row is [−b_z | b_x].
    let rows: Vec<Vec<u32>> = basis
        .iter()
        .map(|b| {
            let mut r: Vec<u32> = b[n..].iter().map(|&c| f.neg(c)).collect();
            r.extend_from_slice(&b[..n]);
            r
        })
        .collect();
    FpMatrix::from_residue_rows(f, 2 * n, &rows).unwrap().kernel()
}

/// Gauss-Jordan elimination of commuting Weyl rows over the listed columns.
/// Returns the rows (pivot rows first, in column order, each pivot equal to 1)
/// and the number of pivots. Remaining rows are zero on `cols`.
pub(crate) fn reduce_rows(p: u32, mut rows: Vec<WeylOperator>, cols: &[usize]) -> (Vec<WeylOperator>, usize) {
    let f = PrimeField::new(p).unwrap();
    let mut lead = 0;
    for &c in cols {
        if lead == rows.len() {
            break;
        }
        let Some(r) = (lead..rows.len()).find(|&r| rows[r].coord(c) != 0) else {
            continue;
        };
        rows.swap(lead, r);
        let a = rows[lead].coord(c);
        if a != 1 {
            rows[lead] = rows[lead].pow(f.inv(a));
        }
        let pivot = rows[lead].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != lead {
                let e = row.coord(c);
                if e != 0 {
                    *row = row.mul_unchecked(&pivot.pow(p - e));
                }
            }
        }
        lead += 1;
    }
    (rows, lead)
}

/// Number of pure stabilizer states: `p^n Π_{i=1}^n (p^i + 1)`.
pub fn stabilizer_state_count(n: u32, p: u32) -> u128 {
    let p = p as u128;
    (1..=n).fold(p.pow(n), |acc, i| acc * (p.pow(i) + 1))
}

/// Every pure stabilizer state on `n` qudits exactly once, in canonical form.
///
/// Lagrangian subspaces are grown dimension by dimension with canonical-RREF
/// deduplication at every level, then decorated with every phase assignment.
pub fn enumerate_all(n: usize, p: u32, cap: u64) -> Result<Vec<StabilizerTableau>> {
    let f = PrimeField::new(p)?;
    let size = (p as u128).pow(n as u32);
    if size > cap as u128 {
        return Err(Error::CapExceeded { what: "p^n", value: size, cap: cap as u128 });
    }
    let mut level: Vec<FpMatrix> = vec![FpMatrix::zeros(f, 0, 2 * n)];
    for _ in 0..n {
        let mut next: HashSet<FpMatrix> = HashSet::new();
        for sub in &level {
            let basis = sub.row_vecs();
            let comp = symplectic_complement(f, n, &basis);
            for_each_vector(f, &comp, |v| {
                if !in_span(f, &basis, v) {
                    let ext = sub.vstack(&FpMatrix::from_residue_rows(f, 2 * n, &[v.to_vec()]).unwrap()).unwrap();
                    next.insert(ext.row_space_basis());
                }
            });
        }
        let mut v: Vec<FpMatrix> = next.into_iter().collect();
        v.sort_by_key(|a| a.row_vecs());
        level = v;
    }
    let phase_choices: Vec<u32> = if p == 2 { vec![0, 2] } else { (0..p).collect() };
    let mut out = Vec::new();
    for sub in &level {
        let vecs = sub.row_vecs();
        let total = phase_choices.len().pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let gens = vecs
                .iter()
                .map(|v| {
                    let ph = phase_choices[rem % phase_choices.len()];
                    rem /= phase_choices.len();
                    WeylOperator::from_symplectic(p, v, ph).unwrap()
                })
                .collect();
            out.push(StabilizerTableau::from_parts_unchecked(p, n, gens, 0));
        }
    }
    Ok(out)
}

/// Calls `visit` on every vector in the row span of `m`.
fn for_each_vector(f: PrimeField, m: &FpMatrix, mut visit: impl FnMut(&[u32])) {
    let k = m.rows();
    let mut coeffs = vec![0u32; k];
    loop {
        let v = combine_rows(f, m, &coeffs);
        visit(&v);
        let mut i = 0;
        loop {
            if i == k {
                return;
            }
            coeffs[i] += 1;
            if coeffs[i] == f.p() {
                coeffs[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonicalize_is_idempotent_and_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &p in &[2, 3, 5] {
            for _ in 0..50 {
                let t = StabilizerTableau::sample_uniform(4, p, &mut rng).unwrap();
                let c = t.canonicalize();
                assert_eq!(c.canonicalize(), c);
                // Re-choose generators: multiply row 0 into others, raise a row to a power, shuffle.
                let mut gens = t.generators().to_vec();
                for i in 1..gens.len() {
                    gens[i] = gens[i].multiply(&gens[0]).unwrap();
                }
                gens[0] = gens[0].pow(p - 1);
                gens.reverse();
                let t2 = StabilizerTableau::new(p, 4, gens, 0).unwrap();
                assert_eq!(t2.canonicalize(), c);
            }
        }
    }

    #[test]
    fn sampled_tableaux_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for &p in &[2, 3, 5] {
            for n in 1..=6 {
                for _ in 0..100 {
                    let t = StabilizerTableau::sample_uniform(n, p, &mut rng).unwrap();
                    t.validate().unwrap();
                    assert!(t.is_pure());
                    assert_eq!(t.log_trace(), 0);
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_all(1, 2, 27).unwrap().len(), 6);
        assert_eq!(enumerate_all(1, 3, 27).unwrap().len(), 12);
        assert_eq!(enumerate_all(2, 2, 27).unwrap().len(), 60);
        assert_eq!(enumerate_all(2, 3, 27).unwrap().len(), 360);
        assert_eq!(stabilizer_state_count(2, 3), 360);
        assert!(matches!(enumerate_all(4, 3, 27), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let all = enumerate_all(2, 3, 27).unwrap();
        let set: HashSet<_> = all.iter().map(|t| t.canonicalize()).collect();
        assert_eq!(set.len(), all.len());
    }

    #[test]
    fn postselect_member_is_noop() {
        let t = StabilizerTableau::bell_pair(3);
        let g = t.generators()[0].clone();
        assert_eq!(t.postselect(&g).unwrap(), Projected::State(t.clone()));
        // Phase-incompatible element annihilates.
        let bad = g.clone().with_phase(1);
        assert!(t.postselect(&bad).unwrap().is_zero());
    }

    #[test]
    fn postselect_anticommuting_halves_trace() {
        let t = StabilizerTableau::zero_state(3, 2);
        let x0 = WeylOperator::single(3, 2, 0, 1, 0);
        let out = t.postselect(&x0).unwrap().state().unwrap();
        assert_eq!(out.k(), 2);
        assert_eq!(out.log_trace(), -1);
        assert!(out.contains(&x0).unwrap());
    }

    #[test]
    fn trace_out_nothing_and_bell_half() {
        let b = StabilizerTableau::bell_pair(5);
        assert_eq!(b.trace_out(&[]).unwrap(), b);
        let half = b.trace_out(&[1]).unwrap();
        assert_eq!(half.n(), 1);
        assert_eq!(half.k(), 0);
        assert_eq!(half.log_trace(), 0);
        assert!(matches!(b.trace_out(&[2]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn invalid_tableaux_rejected() {
        let x = WeylOperator::single(3, 1, 0, 1, 0);
        let z = WeylOperator::single(3, 1, 0, 0, 1);
        assert!(StabilizerTableau::new(3, 1, vec![x.clone(), z], 0).is_err());
        assert!(StabilizerTableau::new(3, 1, vec![x.clone(), x.pow(2)], 0).is_err());
        assert!(StabilizerTableau::new(3, 1, vec![WeylOperator::identity(3, 1).with_phase(1)], 0).is_err());
        let y = WeylOperator::new(2, vec![1], vec![1], 1).unwrap();
        assert!(matches!(StabilizerTableau::new(2, 1, vec![y], 0), Err(Error::InvalidPhase { .. })));
    }
}
