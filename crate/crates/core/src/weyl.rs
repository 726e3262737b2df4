//! Weyl (generalized Pauli) operators on `n` qudits of prime dimension `p`.
//!
//! Conventions, shared with the dense oracle in [`crate::dense`]:
//!
//! * `X|j⟩ = |j+1⟩`, `Z|j⟩ = ω^j |j⟩`, `ω = e^{2πi/p}`.
//! * odd `p`: `W(x,z) = ω^{2⁻¹ x·z} X^x Z^z` (equivalently `ω^{-2⁻¹ x·z} Z^z X^x`).
//!   An element carries a phase `s ∈ Z_p` and represents `ω^s W(x,z)`. Every
//!   such operator has order `p`, and `W(a)W(b) = ω^{-2⁻¹⟨a,b⟩} W(a+b)`.
//! * `p = 2`: `W(x,z) = i^{x·z} X^x Z^z` (Hermitian Paulis). Phases live in
//!   `Z_4` and the element represents `i^s W(x,z)`; only `s ∈ {0, 2}` square
//!   to the identity.
//!
//! The symplectic vector of an operator is laid out as `[x_0..x_{n-1}, z_0..z_{n-1}]`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::PrimeField;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylOperator {
    p: u32,
    x: Vec<u32>,
    z: Vec<u32>,
    phase: u32,
}

/// Modulus of the phase register: `p` for odd primes, 4 for qubits.
#[inline]
pub fn phase_modulus(p: u32) -> u32 {
    if p == 2 {
        4
    } else {
        p
    }
}

/// `x_a·z_b − z_a·x_b mod p` for symplectic vectors of equal even length.
pub fn symplectic_product(field: PrimeField, a: &[u32], b: &[u32]) -> Result<u32> {
    if a.len() != b.len() || !a.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let n = a.len() / 2;
    Ok(field.sub(field.dot(&a[..n], &b[n..]), field.dot(&a[n..], &b[..n])))
}

impl WeylOperator {
    pub fn new(p: u32, x: Vec<u32>, z: Vec<u32>, phase: u32) -> Result<Self> {
        PrimeField::new(p)?;
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: z.len() });
        }
        let x = x.into_iter().map(|v| v % p).collect();
        let z = z.into_iter().map(|v| v % p).collect();
        Ok(Self { p, x, z, phase: phase % phase_modulus(p) })
    }

    pub fn identity(p: u32, n: usize) -> Self {
        Self { p, x: vec![0; n], z: vec![0; n], phase: 0 }
    }

    /// From a symplectic vector `[x | z]`.
    pub fn from_symplectic(p: u32, v: &[u32], phase: u32) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: v.len() + 1, got: v.len() });
        }
        let n = v.len() / 2;
        Self::new(p, v[..n].to_vec(), v[n..].to_vec(), phase)
    }

    /// Single-qudit `X^a` or `Z^b` style constructor: `x`/`z` supported on one qudit.
    pub fn single(p: u32, n: usize, qudit: usize, x: u32, z: u32) -> Self {
        let mut op = Self::identity(p, n);
        op.x[qudit] = x % p;
        op.z[qudit] = z % p;
        op
    }

    pub fn random<R: Rng + ?Sized>(p: u32, n: usize, rng: &mut R) -> Self {
        let m = phase_modulus(p);
        Self {
            p,
            x: (0..n).map(|_| rng.gen_range(0..p)).collect(),
            z: (0..n).map(|_| rng.gen_range(0..p)).collect(),
            phase: rng.gen_range(0..m),
        }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x(&self) -> &[u32] {
        &self.x
    }

    #[inline]
    pub fn z(&self) -> &[u32] {
        &self.z
    }

    #[inline]
    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u32) -> Self {
        self.phase = phase % phase_modulus(self.p);
        self
    }

    pub fn symplectic(&self) -> Vec<u32> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.z);
        v
    }

    /// Entry `c` of the symplectic vector.
    #[inline]
    pub fn coord(&self, c: usize) -> u32 {
        let n = self.n();
        if c < n {
            self.x[c]
        } else {
            self.z[c - n]
        }
    }

    pub fn is_identity_vector(&self) -> bool {
        self.x.iter().all(|&v| v == 0) && self.z.iter().all(|&v| v == 0)
    }

    /// Whether the operator can belong to a stabilizer group (order divides p).
    pub fn has_valid_stabilizer_phase(&self) -> bool {
        self.p != 2 || self.phase.is_multiple_of(2)
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.p).expect("validated at construction")
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        Ok(())
    }

    pub fn symplectic_product(&self, other: &Self) -> Result<u32> {
        self.check_compatible(other)?;
        Ok(self.sp_unchecked(other))
    }

    #[inline]
    pub(crate) fn sp_unchecked(&self, other: &Self) -> u32 {
        let f = self.field();
        f.sub(f.dot(&self.x, &other.z), f.dot(&self.z, &other.x))
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        Ok(self.symplectic_product(other)? == 0)
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let p = self.p;
        if p == 2 {
            let mut e: u32 = self.phase + other.phase;
            let mut x = Vec::with_capacity(self.n());
            let mut z = Vec::with_capacity(self.n());
            for j in 0..self.n() {
                let (x1, z1, x2, z2) = (self.x[j], self.z[j], other.x[j], other.z[j]);
                let (x3, z3) = (x1 ^ x2, z1 ^ z2);
                // i^{x1z1} X Z i^{x2z2} X Z = i^{x1z1+x2z2+2 z1x2} X^{x3} Z^{z3}
                e += x1 * z1 + x2 * z2 + 2 * z1 * x2 + 4 - x3 * z3;
                x.push(x3);
                z.push(z3);
            }
            Self { p, x, z, phase: e % 4 }
        } else {
            let f = self.field();
            let h = f.inv(2);
            // ω^{-h⟨a,b⟩}
            let s = self.sp_unchecked(other);
            let phase = f.add(f.add(self.phase, other.phase), f.neg(f.mul(h, s)));
            let x = self.x.iter().zip(&other.x).map(|(&a, &b)| f.add(a, b)).collect();
            let z = self.z.iter().zip(&other.z).map(|(&a, &b)| f.add(a, b)).collect();
            Self { p, x, z, phase }
        }
    }

    pub fn inverse(&self) -> Self {
        if self.p == 2 {
            Self { p: 2, x: self.x.clone(), z: self.z.clone(), phase: (4 - self.phase) % 4 }
        } else {
            let f = self.field();
            Self {
                p: self.p,
                x: self.x.iter().map(|&v| f.neg(v)).collect(),
                z: self.z.iter().map(|&v| f.neg(v)).collect(),
                phase: f.neg(self.phase),
            }
        }
    }

    /// `self^e`. For odd p this is `ω^{es} W(e·v)` in closed form.
    pub fn pow(&self, e: u32) -> Self {
        if self.p == 2 {
            let mut acc = Self::identity(2, self.n());
            for _ in 0..e % 4 {
                acc = acc.mul_unchecked(self);
            }
            acc
        } else {
            let f = self.field();
            let e = e % self.p;
            Self {
                p: self.p,
                x: self.x.iter().map(|&v| f.mul(v, e)).collect(),
                z: self.z.iter().map(|&v| f.mul(v, e)).collect(),
                phase: f.mul(self.phase, e),
            }
        }
    }

    /// Tensor product `self ⊗ other` (qudits of `other` appended).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        Ok(Self { p: self.p, x, z, phase: (self.phase + other.phase) % phase_modulus(self.p) })
    }

    /// Restriction to a list of qudits. The tensor-product convention makes
    /// `W(x,z)` factorize per qudit, so the phase is kept unchanged.
    pub fn restrict(&self, qudits: &[usize]) -> Self {
        Self {
            p: self.p,
            x: qudits.iter().map(|&q| self.x[q]).collect(),
            z: qudits.iter().map(|&q| self.z[q]).collect(),
            phase: self.phase,
        }
    }

    /// Transpose in the computational basis applied to the listed qudits only.
    /// Odd p: `W(x,z)^T = W(−x,z)`. Qubits: `W(x,z)^T = (−1)^{x·z} W(x,z)`.
    pub fn partial_transpose(&self, qudits: &[usize]) -> Self {
        let mut out = self.clone();
        if self.p == 2 {
            let flips: u32 = qudits.iter().map(|&q| self.x[q] * self.z[q]).sum();
            out.phase = (out.phase + 2 * flips) % 4;
        } else {
            let f = self.field();
            for &q in qudits {
                out.x[q] = f.neg(out.x[q]);
            }
        }
        out
    }

    /// Is this operator a scalar multiple of the identity with a nontrivial phase?
    pub fn is_nontrivial_scalar(&self) -> bool {
        self.is_identity_vector() && self.phase != 0
    }
}
