//! Brute-force reference computations on explicit state vectors and matrices.
//!
//! Nothing here uses the symplectic machinery beyond reading a tableau's
//! generators: Weyl operators are applied as monomial matrices under the
//! same phase convention as [`crate::weyl`], and every derived quantity
//! (entropies, partial-transpose moments, network contractions) is computed
//! from amplitudes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tableau::StabilizerTableau;
use crate::weyl::WeylOperator;

pub type C64 = Complex64;

/// Cap on the state-vector dimension `p^n`.
pub const DEFAULT_VECTOR_CAP: usize = 1 << 16;
/// Cap on the side of an explicit density matrix.
pub const DEFAULT_MATRIX_CAP: usize = 729;

const TOL: f64 = 1e-9;

/// A normalized state vector on `n` qudits of dimension `p`, qudit 0 most significant.
#[derive(Clone, Debug)]
pub struct DenseState {
    pub p: u32,
    pub n: usize,
    pub amplitudes: Vec<C64>,
}

#[inline]
pub fn omega(p: u32, k: i64) -> C64 {
    let m = p as i64;
    let k = k.rem_euclid(m);
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64)
}

#[inline]
fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Digits of basis index `idx` (qudit 0 first).
pub fn digits(p: u32, n: usize, mut idx: usize) -> Vec<u32> {
    let mut d = vec![0; n];
    for j in (0..n).rev() {
        d[j] = (idx % p as usize) as u32;
        idx /= p as usize;
    }
    d
}

pub fn index_of(p: u32, d: &[u32]) -> usize {
    d.iter().fold(0usize, |acc, &v| acc * p as usize + v as usize)
}

fn check_dim(p: u32, n: usize, cap: usize) -> Result<usize> {
    let dim = (p as u128).pow(n as u32);
    if dim > cap as u128 {
        return Err(Error::CapExceeded { what: "dense dimension", value: dim, cap: cap as u128 });
    }
    Ok(dim as usize)
}

/// `out = g · v` for a Weyl operator acting on the full register.
///
/// odd p: `ω^s W(x,z)|j⟩ = ω^{s + 2⁻¹ x·z + z·j} |j + x⟩`;
/// p = 2: `i^s W(x,z)|j⟩ = i^{s + x·z} (−1)^{z·j} |j + x⟩`.
pub fn apply_weyl(g: &WeylOperator, v: &[C64]) -> Vec<C64> {
    let p = g.p();
    let n = g.n();
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    let x = g.x();
    let z = g.z();
    let xz: u64 = x.iter().zip(z).map(|(&a, &b)| a as u64 * b as u64).sum();
    let base = if p == 2 {
        i_pow(g.phase() + (xz % 4) as u32)
    } else {
        let h = (p as u64).div_ceil(2);
        omega(p, (g.phase() as u64 + h * xz) as i64)
    };
    for (idx, &amp) in v.iter().enumerate() {
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        let d = digits(p, n, idx);
        let zj: u64 = z.iter().zip(&d).map(|(&a, &b)| a as u64 * b as u64).sum();
        let shifted: Vec<u32> = d.iter().zip(x).map(|(&a, &b)| (a + b) % p).collect();
        let ph = base * omega(p, (zj % p as u64) as i64);
        out[index_of(p, &shifted)] += ph * amp;
    }
    out
}

/// Dense matrix of a Weyl operator (for small `n`).
pub fn weyl_matrix(g: &WeylOperator) -> DMatrix<C64> {
    let dim = (g.p() as usize).pow(g.n() as u32);
    let mut m = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[c] = C64::new(1.0, 0.0);
        let col = apply_weyl(g, &e);
        for r in 0..dim {
            m[(r, c)] = col[r];
        }
    }
    m
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Common +1 eigenvector of a pure tableau's generators.
pub fn tableau_to_dense(t: &StabilizerTableau, cap: usize) -> Result<DenseState> {
    if !t.is_pure() {
        return Err(Error::NotPure { k: t.k(), n: t.n() });
    }
    let dim = check_dim(t.p(), t.n(), cap)?;
    let project = |mut v: Vec<C64>| {
        for g in t.generators() {
            let mut acc = v.clone();
            let mut cur = v.clone();
            for _ in 1..t.p() {
                cur = apply_weyl(g, &cur);
                for (a, c) in acc.iter_mut().zip(&cur) {
                    *a += c;
                }
            }
            let s = 1.0 / t.p() as f64;
            v = acc.into_iter().map(|a| a * s).collect();
        }
        v
    };
    for start in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[start] = C64::new(1.0, 0.0);
        let v = project(e);
        let nv = norm(&v);
        if nv > 1e-6 {
            let amplitudes: Vec<C64> = v.into_iter().map(|a| a / nv).collect();
            for g in t.generators() {
                let gv = apply_weyl(g, &amplitudes);
                let err: f64 = gv.iter().zip(&amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                if err > TOL {
                    return Err(Error::Internal("projected vector is not stabilized".into()));
                }
            }
            return Ok(DenseState { p: t.p(), n: t.n(), amplitudes });
        }
    }
    Err(Error::Internal("tableau has no common +1 eigenvector".into()))
}

/// Dense representation of the operator a tableau stands for: `p^t ρ_G`.
pub fn tableau_operator(t: &StabilizerTableau, cap: usize) -> Result<DMatrix<C64>> {
    let dim = check_dim(t.p(), t.n(), cap)?;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for g in t.group_elements() {
        m += weyl_matrix(&g);
    }
    let scale = (t.p() as f64).powi(t.log_trace() as i32) / dim as f64;
    Ok(m * C64::new(scale, 0.0))
}

impl DenseState {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| self.amplitudes[r] * self.amplitudes[c].conj())
    }

    /// `|⟨self|other⟩|`, which is 1 iff the states agree up to global phase.
    pub fn overlap(&self, other: &DenseState) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum::<C64>().norm()
    }
}

/// Partial trace of a density matrix on `n` qudits, keeping `keep` (in ascending order).
pub fn partial_trace(rho: &DMatrix<C64>, p: u32, n: usize, keep: &[usize]) -> DMatrix<C64> {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = (p as usize).pow(keep.len() as u32);
    let dt = (p as usize).pow(traced.len() as u32);
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    let compose = |kd: &[u32], td: &[u32]| {
        let mut d = vec![0u32; n];
        for (&q, &v) in keep.iter().zip(kd) {
            d[q] = v;
        }
        for (&q, &v) in traced.iter().zip(td) {
            d[q] = v;
        }
        index_of(p, &d)
    };
    for a in 0..dk {
        let ad = digits(p, keep.len(), a);
        for b in 0..dk {
            let bd = digits(p, keep.len(), b);
            let mut s = C64::new(0.0, 0.0);
            for t in 0..dt {
                let td = digits(p, traced.len(), t);
                s += rho[(compose(&ad, &td), compose(&bd, &td))];
            }
            out[(a, b)] = s;
        }
    }
    out
}

/// Transpose on the listed qudits of an operator on `n` qudits.
pub fn partial_transpose(m: &DMatrix<C64>, p: u32, n: usize, qudits: &[usize]) -> DMatrix<C64> {
    let dim = m.nrows();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for r in 0..dim {
        let rd = digits(p, n, r);
        for c in 0..dim {
            let cd = digits(p, n, c);
            let (mut r2, mut c2) = (rd.clone(), cd.clone());
            for &q in qudits {
                r2[q] = cd[q];
                c2[q] = rd[q];
            }
            out[(index_of(p, &r2), index_of(p, &c2))] = m[(r, c)];
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Von Neumann entropy of `ρ` restricted to `subset`, in units of `log p`.
pub fn dense_entropy(rho: &DMatrix<C64>, p: u32, n: usize, subset: &[usize]) -> f64 {
    let red = partial_trace(rho, p, n, subset);
    let tr: f64 = red.trace().re;
    let lp = (p as f64).ln();
    -hermitian_eigenvalues(&red).into_iter().map(|l| l / tr).filter(|&l| l > 1e-12).map(|l| l * l.ln() / lp).sum::<f64>()
}

/// `tr((ρ_AB^{T_B})³)` for a normalized `ρ` on `n` qudits; `A`, `B` disjoint.
pub fn dense_pt3(rho: &DMatrix<C64>, p: u32, n: usize, a: &[usize], b: &[usize]) -> f64 {
    let mut ab: Vec<usize> = a.iter().chain(b).copied().collect();
    ab.sort_unstable();
    let red = partial_trace(rho, p, n, &ab);
    let tr = red.trace().re;
    let red = red / C64::new(tr, 0.0);
    let b_local: Vec<usize> = b.iter().map(|q| ab.iter().position(|x| x == q).unwrap()).collect();
    let pt = partial_transpose(&red, p, ab.len(), &b_local);
    let cube = &pt * &pt * &pt;
    cube.trace().re
}

/// Contracts `⊗_e |e⟩` against `⊗_x ⟨V_x|` explicitly.
///
/// `total_qudits` counts every edge endpoint; `vertex_tensors` pairs the
/// qudits owned by a bulk vertex (in order) with its dense state. Edge pairs
/// list endpoint qudits joined by a normalized `Σ_i |ii⟩/√p`. The result is
/// the unnormalized vector on the remaining qudits, in ascending order.
pub fn dense_contract(
    p: u32,
    total_qudits: usize,
    edge_pairs: &[(usize, usize)],
    vertex_tensors: &[(Vec<usize>, DenseState)],
    cap: usize,
) -> Result<Vec<C64>> {
    let dim = check_dim(p, total_qudits, cap)?;
    let s = 1.0 / (p as f64).sqrt();
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    for (idx, amp) in psi.iter_mut().enumerate() {
        let d = digits(p, total_qudits, idx);
        if edge_pairs.iter().all(|&(a, b)| d[a] == d[b]) {
            *amp = C64::new(s.powi(edge_pairs.len() as i32), 0.0);
        }
    }
    let mut live: Vec<usize> = (0..total_qudits).collect();
    for (qudits, state) in vertex_tensors {
        let pos: Vec<usize> = qudits.iter().map(|q| live.iter().position(|x| x == q).expect("qudit consumed twice")).collect();
        let rest: Vec<usize> = (0..live.len()).filter(|i| !pos.contains(i)).collect();
        let dr = (p as usize).pow(rest.len() as u32);
        let dv = state.dim();
        let mut next = vec![C64::new(0.0, 0.0); dr];
        for (ri, out) in next.iter_mut().enumerate() {
            let rd = digits(p, rest.len(), ri);
            let mut acc = C64::new(0.0, 0.0);
            for vi in 0..dv {
                let vd = digits(p, qudits.len(), vi);
                let mut full = vec![0u32; live.len()];
                for (&i, &v) in rest.iter().zip(&rd) {
                    full[i] = v;
                }
                for (&i, &v) in pos.iter().zip(&vd) {
                    full[i] = v;
                }
                acc += state.amplitudes[vi].conj() * psi[index_of(p, &full)];
            }
            *out = acc;
        }
        psi = next;
        live = rest.iter().map(|&i| live[i]).collect();
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn zero_tableau_is_basis_vector() {
        let v = tableau_to_dense(&StabilizerTableau::zero_state(3, 2), DEFAULT_VECTOR_CAP).unwrap();
        assert!(approx(v.amplitudes[0].norm(), 1.0));
        assert!(v.amplitudes[1..].iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn bell_tableau_is_bell_vector() {
        for &p in &[2u32, 3, 5] {
            let v = tableau_to_dense(&StabilizerTableau::bell_pair(p), DEFAULT_VECTOR_CAP).unwrap();
            let s = 1.0 / (p as f64).sqrt();
            for idx in 0..v.dim() {
                let d = digits(p, 2, idx);
                let expect = if d[0] == d[1] { s } else { 0.0 };
                assert!(approx(v.amplitudes[idx].norm(), expect));
            }
            // Equal phases on the diagonal.
            let a0 = v.amplitudes[0];
            for i in 0..p as usize {
                assert!((v.amplitudes[i * p as usize + i] - a0).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn maximally_mixed_qudit_has_unit_entropy() {
        let v = tableau_to_dense(&StabilizerTableau::bell_pair(3), DEFAULT_VECTOR_CAP).unwrap();
        assert!(approx(dense_entropy(&v.density(), 3, 2, &[0]), 1.0));
    }

    #[test]
    fn ghz_pt3() {
        for &p in &[2u32, 3] {
            let v = tableau_to_dense(&StabilizerTableau::ghz(p, 3), DEFAULT_VECTOR_CAP).unwrap();
            let m = dense_pt3(&v.density(), p, 3, &[0], &[1]);
            assert!(approx(m, (p as f64).powi(-2)), "{m}");
        }
    }

    #[test]
    fn weyl_matrices_are_unitary_with_order_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &p in &[2u32, 3] {
            for _ in 0..10 {
                let g = WeylOperator::random(p, 2, &mut rng);
                let m = weyl_matrix(&g);
                let id = DMatrix::<C64>::identity(m.nrows(), m.nrows());
                assert!((&m * m.adjoint() - &id).norm() < 1e-9);
                if p != 2 {
                    let mut acc = id.clone();
                    for _ in 0..p {
                        acc = &acc * &m;
                    }
                    assert!((acc - &id).norm() < 1e-9);
                }
            }
        }
    }
}
