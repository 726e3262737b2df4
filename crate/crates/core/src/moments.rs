//! Third and second moments of random stabilizer states.
//!
//! Three replicas of an `n`-qudit system are laid out replica-major: qudit
//! `j` of replica `k` sits at position `k·n + j`, so `U^{⊗3}` is the plain
//! Kronecker cube. Each `T` in the spin set acts as
//! `R(T) = r(T)^{⊗n}` with `r(T) = Σ_{(x,y) ∈ T} |x⟩⟨y|`.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{self, DEFAULT_MATRIX_CAP};
use crate::error::{Error, Result};
use crate::field::{beta_form, FpMatrix, PrimeField};
use crate::spin::{build_sigma3, SubspaceT};
use crate::tableau::{enumerate_all, StabilizerTableau, DEFAULT_ENUMERATION_CAP};

/// Cap on the number of stored nonzeros of one `R(T)`.
pub const MAX_SPARSE_ENTRIES: u128 = 1 << 20;

/// Absolute tolerance for dense comparisons.
pub const DENSE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub check: String,
    pub n: usize,
    pub p: u32,
    pub max_abs_deviation: f64,
    /// Largest `|z|` for statistical checks.
    pub max_z: Option<f64>,
    pub terms_checked: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl MomentReport {
    fn exact(check: &str, n: usize, p: u32, dev: f64, terms: usize, tolerance: f64) -> Self {
        Self { check: check.into(), n, p, max_abs_deviation: dev, max_z: None, terms_checked: terms, tolerance, pass: dev <= tolerance }
    }
}

fn replica_dim(p: u32, n: usize, copies: usize) -> Result<usize> {
    let dim = (p as u128).pow((copies * n) as u32);
    if dim > DEFAULT_MATRIX_CAP as u128 {
        return Err(Error::CapExceeded { what: "replica dimension", value: dim, cap: DEFAULT_MATRIX_CAP as u128 });
    }
    Ok(dim as usize)
}

/// Nonzero positions of `R(T)` on `n` qudits (all entries equal 1).
pub fn r_entries(t: &SubspaceT, n: usize) -> Result<Vec<(usize, usize)>> {
    let p = t.p();
    let count = (p as u128).pow(3 * n as u32);
    if count > MAX_SPARSE_ENTRIES {
        return Err(Error::CapExceeded { what: "nonzero entries of R(T)", value: count, cap: MAX_SPARSE_ENTRIES });
    }
    let elems = t.elements();
    let pu = p as usize;
    // Per-qudit contribution of element (x, y) to the global row/col index.
    let weight = |k: usize, j: usize| pu.pow((3 * n - 1 - (k * n + j)) as u32);
    let mut out = vec![(0usize, 0usize)];
    for j in 0..n {
        let mut next = Vec::with_capacity(out.len() * elems.len());
        for &(r, c) in &out {
            for e in &elems {
                let dr: usize = (0..3).map(|k| e[k] as usize * weight(k, j)).sum();
                let dc: usize = (0..3).map(|k| e[3 + k] as usize * weight(k, j)).sum();
                next.push((r + dr, c + dc));
            }
        }
        out = next;
    }
    Ok(out)
}

/// Dense `R(T)`.
pub fn r_matrix(t: &SubspaceT, n: usize) -> Result<DMatrix<C64>> {
    let dim = replica_dim(t.p(), n, 3)?;
    let mut m = DMatrix::zeros(dim, dim);
    for (r, c) in r_entries(t, n)? {
        m[(r, c)] += C64::new(1.0, 0.0);
    }
    Ok(m)
}

fn require_formula_hypothesis(p: u32, n: usize) -> Result<()> {
    if n == 0 || (p != 2 && n < 2) {
        return Err(Error::Unsupported(format!(
            "the spin-set operators span the commutant only for n ≥ 2 when p is odd (got p={p}, n={n})"
        )));
    }
    Ok(())
}

/// `Σ_T R(T) / (D(D+1)(D+p))` with `D = p^n`.
pub fn third_moment_formula(n: usize, p: u32) -> Result<DMatrix<C64>> {
    PrimeField::new(p)?;
    require_formula_hypothesis(p, n)?;
    let dim = replica_dim(p, n, 3)?;
    let d = (p as f64).powi(n as i32);
    let norm = 1.0 / (d * (d + 1.0) * (d + p as f64));
    let mut m = DMatrix::zeros(dim, dim);
    for t in build_sigma3(p)? {
        for (r, c) in r_entries(&t, n)? {
            m[(r, c)] += C64::new(norm, 0.0);
        }
    }
    Ok(m)
}

fn tensor_power(v: &[C64], copies: usize) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..copies {
        out = out.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
    }
    out
}

fn outer_add(acc: &mut DMatrix<C64>, w: &[C64], scale: f64) {
    for (j, wj) in w.iter().enumerate() {
        if wj.norm_sqr() == 0.0 {
            continue;
        }
        let cj = wj.conj() * scale;
        for (i, wi) in w.iter().enumerate() {
            if wi.norm_sqr() != 0.0 {
                acc[(i, j)] += wi * cj;
            }
        }
    }
}

/// Exact average of `|V⟩⟨V|^{⊗copies}` over every pure stabilizer state.
/// Partial sums are taken over fixed chunks and added in order, so the
/// result does not depend on the thread count.
pub fn exhaustive_moment(n: usize, p: u32, copies: usize) -> Result<DMatrix<C64>> {
    let dim = replica_dim(p, n, copies)?;
    let states = enumerate_all(n, p, DEFAULT_ENUMERATION_CAP)?;
    let vectors =
        states.iter().map(|t| dense::tableau_to_dense(t, DEFAULT_MATRIX_CAP).map(|d| d.amplitudes)).collect::<Result<Vec<_>>>()?;
    let scale = 1.0 / vectors.len() as f64;
    let partials: Vec<DMatrix<C64>> = vectors
        .par_chunks(16)
        .map(|chunk| {
            let mut acc = DMatrix::zeros(dim, dim);
            for v in chunk {
                outer_add(&mut acc, &tensor_power(v, copies), scale);
            }
            acc
        })
        .collect();
    Ok(partials.into_iter().fold(DMatrix::zeros(dim, dim), |a, b| a + b))
}

pub fn exhaustive_third_moment(n: usize, p: u32) -> Result<DMatrix<C64>> {
    exhaustive_moment(n, p, 3)
}

/// Monte Carlo estimate of selected entries of `⟨|V⟩⟨V|^{⊗copies}⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledMoment {
    pub entries: Vec<(usize, usize)>,
    pub mean: Vec<C64>,
    /// Standard error of each mean.
    pub stderr: Vec<f64>,
    pub trials: usize,
}

impl SampledMoment {
    /// `(max |mean − target|, max |z|)`. Entries with zero sample variance
    /// must match to [`DENSE_TOLERANCE`] or count as infinite `z`.
    pub fn compare(&self, target: &DMatrix<C64>) -> (f64, f64) {
        let mut max_dev: f64 = 0.0;
        let mut max_z: f64 = 0.0;
        for ((&(r, c), m), &se) in self.entries.iter().zip(&self.mean).zip(&self.stderr) {
            let dev = (m - target[(r, c)]).norm();
            max_dev = max_dev.max(dev);
            let z = if se > 1e-15 {
                dev / se
            } else if dev <= DENSE_TOLERANCE {
                0.0
            } else {
                f64::INFINITY
            };
            max_z = max_z.max(z);
        }
        (max_dev, max_z)
    }
}

/// Samples `trials` uniform stabilizer states and tracks the listed entries.
pub fn sampled_moment<R: Rng + ?Sized>(
    n: usize,
    p: u32,
    copies: usize,
    entries: &[(usize, usize)],
    trials: usize,
    rng: &mut R,
) -> Result<SampledMoment> {
    replica_dim(p, n, copies)?;
    if trials < 2 {
        return Err(Error::Unsupported("need at least two trials".into()));
    }
    let mut sum = vec![C64::new(0.0, 0.0); entries.len()];
    let mut sum_sq = vec![0.0f64; entries.len()];
    for _ in 0..trials {
        let t = StabilizerTableau::sample_uniform(n, p, rng)?;
        let v = dense::tableau_to_dense(&t, DEFAULT_MATRIX_CAP)?.amplitudes;
        let w = tensor_power(&v, copies);
        for (k, &(r, c)) in entries.iter().enumerate() {
            let x = w[r] * w[c].conj();
            sum[k] += x;
            sum_sq[k] += x.norm_sqr();
        }
    }
    let tf = trials as f64;
    let mean: Vec<C64> = sum.iter().map(|s| s / tf).collect();
    let stderr = mean
        .iter()
        .zip(&sum_sq)
        .map(|(m, &sq)| {
            let var = (sq / tf - m.norm_sqr()).max(0.0) * tf / (tf - 1.0);
            (var / tf).sqrt()
        })
        .collect();
    Ok(SampledMoment { entries: entries.to_vec(), mean, stderr, trials })
}

/// Entries worth tracking: every nonzero of `target` plus `extra` random others.
pub fn tracked_entries<R: Rng + ?Sized>(target: &DMatrix<C64>, extra: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let dim = target.nrows();
    let mut set: HashSet<(usize, usize)> = HashSet::new();
    for c in 0..dim {
        for r in 0..dim {
            if target[(r, c)].norm() > 0.0 {
                set.insert((r, c));
            }
        }
    }
    for _ in 0..extra {
        set.insert((rng.gen_range(0..dim), rng.gen_range(0..dim)));
    }
    let mut out: Vec<_> = set.into_iter().collect();
    out.sort_unstable();
    out
}

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Exhaustive third moment against the formula.
pub fn third_moment_check(n: usize, p: u32) -> Result<MomentReport> {
    let formula = third_moment_formula(n, p)?;
    let empirical = exhaustive_third_moment(n, p)?;
    let dev = max_abs_diff(&formula, &empirical);
    Ok(MomentReport::exact("third moment (exhaustive)", n, p, dev, formula.len(), 1e-10))
}

/// `(I + F) / (D(D+1))` on two replicas.
pub fn second_moment_formula(n: usize, p: u32) -> Result<DMatrix<C64>> {
    let dim2 = replica_dim(p, n, 2)?;
    let d = (p as usize).pow(n as u32);
    let norm = 1.0 / (d as f64 * (d as f64 + 1.0));
    let mut m = DMatrix::zeros(dim2, dim2);
    for a in 0..d {
        for b in 0..d {
            m[(a * d + b, a * d + b)] += C64::new(norm, 0.0);
            m[(a * d + b, b * d + a)] += C64::new(norm, 0.0);
        }
    }
    Ok(m)
}

pub enum Mode<'a, R: Rng + ?Sized> {
    Exhaustive,
    MonteCarlo { trials: usize, rng: &'a mut R },
}

/// Second-moment (2-design) identity, exhaustively or by sampling.
pub fn second_moment_check<R: Rng + ?Sized>(n: usize, p: u32, mode: Mode<'_, R>) -> Result<MomentReport> {
    let formula = second_moment_formula(n, p)?;
    match mode {
        Mode::Exhaustive => {
            let dev = max_abs_diff(&formula, &exhaustive_moment(n, p, 2)?);
            Ok(MomentReport::exact("second moment (exhaustive)", n, p, dev, formula.len(), 1e-10))
        }
        Mode::MonteCarlo { trials, rng } => {
            let entries = tracked_entries(&formula, 200, rng);
            let s = sampled_moment(n, p, 2, &entries, trials, rng)?;
            let (dev, z) = s.compare(&formula);
            Ok(MomentReport {
                check: "second moment (sampled)".into(),
                n,
                p,
                max_abs_deviation: dev,
                max_z: Some(z),
                terms_checked: entries.len(),
                tolerance: 5.0,
                pass: z <= 5.0,
            })
        }
    }
}

/// Third moment by sampling, compared entrywise with the formula in units
/// of standard errors.
pub fn sampled_third_moment_check<R: Rng + ?Sized>(n: usize, p: u32, trials: usize, rng: &mut R) -> Result<MomentReport> {
    let formula = third_moment_formula(n, p)?;
    let entries = tracked_entries(&formula, 500, rng);
    let s = sampled_moment(n, p, 3, &entries, trials, rng)?;
    let (dev, z) = s.compare(&formula);
    Ok(MomentReport {
        check: "third moment (sampled)".into(),
        n,
        p,
        max_abs_deviation: dev,
        max_z: Some(z),
        terms_checked: entries.len(),
        tolerance: 5.0,
        pass: z <= 5.0,
    })
}

fn omega(p: u32, k: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / p as f64)
}

/// Single-qudit Clifford generators: Fourier, phase, multiplication by `a`,
/// `X` and `Z`. Qubits use `H`, `S`, `X`, `Z`.
pub fn single_qudit_cliffords(p: u32) -> Vec<(String, DMatrix<C64>)> {
    let d = p as usize;
    let f = PrimeField::new(p).expect("prime");
    let s = 1.0 / (p as f64).sqrt();
    let fourier = DMatrix::from_fn(d, d, |j, k| omega(p, (j * k) as f64) * s);
    let phase = if p == 2 {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]))
    } else {
        let h = f.inv(2);
        DMatrix::from_fn(d, d, |j, k| if j == k { omega(p, f.mul(h, f.mul(j as u32, j as u32)) as f64) } else { C64::new(0.0, 0.0) })
    };
    let shift = DMatrix::from_fn(d, d, |j, k| if j == (k + 1) % d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let clock = DMatrix::from_fn(d, d, |j, k| if j == k { omega(p, j as f64) } else { C64::new(0.0, 0.0) });
    let mut gens = vec![("F".to_string(), fourier), ("P".to_string(), phase), ("X".to_string(), shift), ("Z".to_string(), clock)];
    if p > 2 {
        // Multiplication by a generator of F_p^×.
        let a = (2..p).find(|&a| (1..p - 1).all(|e| f.pow(a, e as u64) != 1)).unwrap_or(2);
        let mult = DMatrix::from_fn(d, d, |j, k| if j as u32 == f.mul(a, k as u32) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        gens.push((format!("M{a}"), mult));
    }
    gens
}

/// Places a single-qudit gate on qudit `q` of `n`.
pub fn embed_single(g: &DMatrix<C64>, q: usize, n: usize) -> DMatrix<C64> {
    let d = g.nrows();
    let mut out = DMatrix::<C64>::identity(1, 1);
    for j in 0..n {
        let factor = if j == q { g.clone() } else { DMatrix::identity(d, d) };
        out = out.kronecker(&factor);
    }
    out
}

/// `|a, b⟩ ↦ |a, a + b⟩` with control `c` and target `t` on `n` qudits.
pub fn sum_gate(p: u32, n: usize, c: usize, t: usize) -> DMatrix<C64> {
    let dim = (p as usize).pow(n as u32);
    let mut m = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let mut d = dense::digits(p, n, idx);
        d[t] = (d[t] + d[c]) % p;
        m[(dense::index_of(p, &d), idx)] = C64::new(1.0, 0.0);
    }
    m
}

/// A random word of `length` Clifford generators on `n` qudits.
pub fn random_clifford_word<R: Rng + ?Sized>(n: usize, p: u32, length: usize, rng: &mut R) -> DMatrix<C64> {
    let gens = single_qudit_cliffords(p);
    let dim = (p as usize).pow(n as u32);
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for _ in 0..length {
        let step = if n >= 2 && rng.gen_range(0..gens.len() + 1) == gens.len() {
            let c = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= c {
                t += 1;
            }
            sum_gate(p, n, c, t)
        } else {
            let (_, g) = &gens[rng.gen_range(0..gens.len())];
            embed_single(g, rng.gen_range(0..n), n)
        };
        u = step * u;
    }
    u
}

/// A diagonal non-Clifford gate: `diag(e^{2πi j³/p²})` for odd `p`, the
/// `T` gate for qubits.
pub fn non_clifford_gate(p: u32) -> DMatrix<C64> {
    let d = p as usize;
    let phases: Vec<C64> = (0..d)
        .map(|j| {
            if p == 2 {
                C64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * j as f64)
            } else {
                let j = j as f64;
                C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j * j * j / (p * p) as f64)
            }
        })
        .collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases))
}

/// `max_T ‖R(T) U^{⊗3} − U^{⊗3} R(T)‖_max`.
pub fn commutator_norm(u: &DMatrix<C64>, sigma: &[SubspaceT], n: usize) -> Result<f64> {
    let u3 = u.kronecker(u).kronecker(u);
    let dim = u3.nrows();
    let mut worst: f64 = 0.0;
    for t in sigma {
        let entries = r_entries(t, n)?;
        let mut ru = DMatrix::<C64>::zeros(dim, dim);
        let mut ur = DMatrix::<C64>::zeros(dim, dim);
        for &(r, c) in &entries {
            // (R U)[r, :] += U[c, :]; (U R)[:, c] += U[:, r].
            for k in 0..dim {
                ru[(r, k)] += u3[(c, k)];
                ur[(k, c)] += u3[(k, r)];
            }
        }
        worst = worst.max(max_abs_diff(&ru, &ur));
    }
    Ok(worst)
}

/// Random Clifford words (length 20) must commute with every `R(T)`.
pub fn commutant_check<R: Rng + ?Sized>(n: usize, p: u32, samples: usize, rng: &mut R) -> Result<MomentReport> {
    replica_dim(p, n, 3)?;
    let sigma = build_sigma3(p)?;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = random_clifford_word(n, p, 20, rng);
        worst = worst.max(commutator_norm(&u, &sigma, n)?);
    }
    Ok(MomentReport::exact("commutant", n, p, worst, samples * sigma.len(), DENSE_TOLERANCE))
}

/// The non-Clifford gate on qudit 0; `pass` means the commutant check
/// correctly fails for it.
pub fn negative_control(n: usize, p: u32) -> Result<MomentReport> {
    let sigma = build_sigma3(p)?;
    let u = embed_single(&non_clifford_gate(p), 0, n);
    let dev = commutator_norm(&u, &sigma, n)?;
    Ok(MomentReport {
        check: "commutant negative control".into(),
        n,
        p,
        max_abs_deviation: dev,
        max_z: None,
        terms_checked: sigma.len(),
        tolerance: DENSE_TOLERANCE,
        pass: dev > DENSE_TOLERANCE,
    })
}

/// `tr R(T_x) R(T_y)†` for all pairs, counted from the 0/1 entries.
pub fn gram_matrix(sigma: &[SubspaceT], n: usize) -> Result<Vec<Vec<u64>>> {
    let sets = sigma.iter().map(|t| r_entries(t, n).map(|e| e.into_iter().collect::<HashSet<_>>())).collect::<Result<Vec<_>>>()?;
    Ok(sets.iter().map(|a| sets.iter().map(|b| a.intersection(b).count() as u64).collect()).collect())
}

/// `tr R(T)`, the number of diagonal entries.
pub fn r_trace(t: &SubspaceT, n: usize) -> Result<u64> {
    Ok(r_entries(t, n)?.iter().filter(|(r, c)| r == c).count() as u64)
}

/// Exact determinant of an integer matrix by fraction-free elimination.
pub fn bareiss_determinant(m: &[Vec<u64>]) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &a[n - 1][n - 1]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub p: u32,
    /// Decimal string of the exact Gram determinant.
    pub gram_determinant: String,
    /// Gram entries equal `p^{3n} p^{-n d}`.
    pub gram_matches_distance: bool,
    /// Each `T` is the only element containing its two extra basis vectors.
    pub dual_vectors_separate: bool,
    pub distinct_elements: usize,
    pub pass: bool,
}

pub fn independence_check(n: usize, p: u32) -> Result<IndependenceReport> {
    if n < 2 {
        return Err(Error::Unsupported("linear independence needs n ≥ 2".into()));
    }
    let sigma = build_sigma3(p)?;
    let gram = gram_matrix(&sigma, n)?;
    let mut matches = true;
    for (i, a) in sigma.iter().enumerate() {
        for (j, b) in sigma.iter().enumerate() {
            let d = a.distance(b)?;
            matches &= gram[i][j] == (p as u64).pow((n * (3 - d as usize)) as u32);
        }
    }
    let det = bareiss_determinant(&gram);
    let members: Vec<HashSet<[u32; 6]>> = sigma.iter().map(|t| t.elements().into_iter().collect()).collect();
    let mut separate = true;
    for (i, t) in sigma.iter().enumerate() {
        let (v1, v2) = extend_ones(t)?;
        for (j, m) in members.iter().enumerate() {
            // ⟨v₁|T'⟩⟨v₂|T'⟩⟨0|T'⟩^{n-2}
            let pairing = m.contains(&v1) && m.contains(&v2) && m.contains(&[0; 6]);
            separate &= pairing == (i == j);
        }
    }
    let distinct = sigma.iter().map(|t| t.basis().clone()).collect::<HashSet<FpMatrix>>().len();
    let pass = !det.is_zero() && matches && separate && distinct == 2 * p as usize + 2;
    Ok(IndependenceReport {
        n,
        p,
        gram_determinant: det.abs().to_string(),
        gram_matches_distance: matches,
        dual_vectors_separate: separate,
        distinct_elements: distinct,
        pass,
    })
}

/// Two vectors completing `1₆` to a basis of `T`.
fn extend_ones(t: &SubspaceT) -> Result<([u32; 6], [u32; 6])> {
    let f = t.basis().field();
    let mut basis = FpMatrix::from_residue_rows(f, 6, &[vec![1; 6]])?;
    let mut extra = Vec::new();
    for row in t.basis().row_vecs() {
        let mut trial = basis.clone();
        trial.push_row(&row)?;
        if trial.rank() > basis.rank() {
            basis = trial;
            extra.push(row);
        }
    }
    let arr = |v: &Vec<u32>| -> [u32; 6] { v.clone().try_into().expect("length 6") };
    match extra.as_slice() {
        [a, b] => Ok((arr(a), arr(b))),
        _ => Err(Error::Internal("subspace does not contain the all-ones vector".into())),
    }
}

/// A linear map on `F_p³ ⊕ F_p³` given as a 6×6 matrix acting on row vectors.
pub type Map6 = [[u32; 6]; 6];

fn apply(m: &Map6, v: &[u32], f: PrimeField) -> Vec<u32> {
    (0..6).map(|j| (0..6).fold(0, |acc, i| f.add(acc, f.mul(v[i], m[i][j])))).collect()
}

/// Block permutations `(x, y) ↦ (π x, σ y)` and, for odd `p`, reflections
/// `v ↦ v − 2 β(u,v)/β(u,u) u` in non-isotropic `u ⊥ 1₆`.
pub fn stochastic_orthogonal_generators(p: u32) -> Result<Vec<Map6>> {
    let f = PrimeField::new(p)?;
    let mut gens = Vec::new();
    for (a, b) in [(0, 1), (1, 2)] {
        for block in 0..2 {
            let mut m = [[0u32; 6]; 6];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = 1;
            }
            let (i, j) = (3 * block + a, 3 * block + b);
            m[i][i] = 0;
            m[j][j] = 0;
            m[i][j] = 1;
            m[j][i] = 1;
            gens.push(m);
        }
    }
    if p != 2 {
        let one = [1u32; 6];
        let mut v = [0u32; 6];
        let total = (p as usize).pow(6);
        let mut added = 0;
        for idx in 1..total {
            let mut r = idx;
            for slot in v.iter_mut() {
                *slot = (r % p as usize) as u32;
                r /= p as usize;
            }
            let q = beta_form(f, &v, &v)?;
            if q == 0 || beta_form(f, &v, &one)? != 0 {
                continue;
            }
            let scale = f.mul(2, f.inv(q));
            let mut m = [[0u32; 6]; 6];
            for (i, row) in m.iter_mut().enumerate() {
                let mut e = [0u32; 6];
                e[i] = 1;
                let c = f.mul(scale, beta_form(f, &e, &v)?);
                for j in 0..6 {
                    row[j] = f.sub(e[j], f.mul(c, v[j]));
                }
            }
            gens.push(m);
            added += 1;
            if added == 12 {
                break;
            }
        }
    }
    Ok(gens)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub p: u32,
    pub generators: usize,
    pub preserves_form: bool,
    pub fixes_ones: bool,
    pub maps_into_sigma: bool,
    pub orbit_of_identity: usize,
    pub pass: bool,
}

/// Spot-checks that stochastic orthogonal maps preserve `β`, fix `1₆`,
/// permute the spin set, and reach every element from the identity.
pub fn orbit_check(p: u32) -> Result<OrbitReport> {
    let f = PrimeField::new(p)?;
    let gens = stochastic_orthogonal_generators(p)?;
    let sigma = build_sigma3(p)?;
    let index: HashMap<FpMatrix, usize> = sigma.iter().enumerate().map(|(i, t)| (t.basis().clone(), i)).collect();
    let unit = |i: usize| {
        let mut e = [0u32; 6];
        e[i] = 1;
        e
    };
    let mut preserves = true;
    let mut fixes = true;
    let mut into = true;
    let mut action: Vec<Vec<Option<usize>>> = Vec::new();
    for m in &gens {
        for i in 0..6 {
            for j in 0..6 {
                let (a, b) = (apply(m, &unit(i), f), apply(m, &unit(j), f));
                preserves &= beta_form(f, &a, &b)? == beta_form(f, &unit(i), &unit(j))?;
            }
        }
        fixes &= apply(m, &[1; 6], f) == vec![1; 6];
        let images: Vec<Option<usize>> = sigma
            .iter()
            .map(|t| {
                let rows: Vec<Vec<u32>> = t.basis().row_vecs().iter().map(|r| apply(m, r, f)).collect();
                let img = FpMatrix::from_residue_rows(f, 6, &rows).map(|x| x.row_space_basis()).ok();
                img.and_then(|b| index.get(&b).copied())
            })
            .collect();
        into &= images.iter().all(|x| x.is_some());
        action.push(images);
    }
    let start = sigma.iter().position(|t| t.label() == "*even" || t.label() == "(1 2 3)").unwrap_or(0);
    let mut seen = vec![false; sigma.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for images in &action {
            if let Some(j) = images[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    let orbit = seen.iter().filter(|&&s| s).count();
    Ok(OrbitReport {
        p,
        generators: gens.len(),
        preserves_form: preserves,
        fixes_ones: fixes,
        maps_into_sigma: into,
        orbit_of_identity: orbit,
        pass: preserves && fixes && into && orbit == sigma.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_subspace_gives_identity() {
        for (p, n) in [(2, 2), (3, 1), (3, 2)] {
            let sigma = build_sigma3(p).unwrap();
            let id = sigma.iter().find(|t| t.label() == "*even" || t.label() == "(1 2 3)").unwrap();
            let r = r_matrix(id, n).unwrap();
            assert_eq!(r, DMatrix::identity(r.nrows(), r.nrows()));
        }
    }

    #[test]
    fn formula_has_unit_trace() {
        for (n, p) in [(1, 2), (2, 2), (2, 3)] {
            let m = third_moment_formula(n, p).unwrap();
            assert!((m.trace().re - 1.0).abs() < 1e-12);
        }
        assert!(matches!(third_moment_formula(1, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn identity_commutes_trivially() {
        let sigma = build_sigma3(3).unwrap();
        let u = DMatrix::<C64>::identity(9, 9);
        assert_eq!(commutator_norm(&u, &sigma, 2).unwrap(), 0.0);
    }

    #[test]
    fn clifford_generators_are_unitary() {
        for p in [2, 3, 5] {
            for (name, g) in single_qudit_cliffords(p) {
                let d = g.nrows();
                let err = (&g * g.adjoint() - DMatrix::<C64>::identity(d, d)).iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(err < 1e-12, "{name} p={p}");
            }
        }
    }

    #[test]
    fn bareiss_small() {
        assert_eq!(bareiss_determinant(&[vec![2, 1], vec![1, 3]]), BigInt::from(5));
        assert_eq!(bareiss_determinant(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(bareiss_determinant(&[vec![1, 2], vec![2, 4]]), BigInt::zero());
        assert_eq!(bareiss_determinant(&[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 2]]), BigInt::from(6));
    }

    #[test]
    fn second_moment_single_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = second_moment_check(1, 2, Mode::<ChaCha8Rng>::Exhaustive).unwrap();
        assert!(r.pass, "{r:?}");
        let r = second_moment_check(1, 3, Mode::MonteCarlo { trials: 2000, rng: &mut rng }).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
