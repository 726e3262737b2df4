//! The GHZ spin model: spins in the set of three-dimensional Lagrangian
//! stochastic subspaces of `F_p³ ⊕ F_p³`, coupled along network edges by the
//! distance `d(T, T') = 3 − dim(T ∩ T')`.
//!
//! With boundary values `ζ` on `A`, `ζ⁻¹` on `B` and the identity on `C`,
//! the weighted configuration sum `Σ p^{-N·E}` gives the ensemble average of
//! `tr (Ψ_AB^{T_B})³`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{beta_form, FpMatrix, PrimeField};
use crate::geometry::{min_cut, residual_report};
use crate::network::NetworkGraph;

/// Largest number of spin configurations enumerated, `6^10`.
pub const MAX_CONFIGURATIONS: u128 = 60_466_176;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// A three-dimensional subspace of `F_p³ ⊕ F_p³`, stored by its RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubspaceT {
    basis: FpMatrix,
    parity: Parity,
    label: String,
}

impl SubspaceT {
    pub fn new(field: PrimeField, rows: &[[i64; 6]], parity: Parity, label: impl Into<String>) -> Result<Self> {
        let m = FpMatrix::from_rows(field, rows)?;
        let t = Self { basis: m.row_space_basis(), parity, label: label.into() };
        t.validate()?;
        Ok(t)
    }

    /// `{(x, y) : x_k = y_{src[k]}}`.
    pub fn permutation(field: PrimeField, src: [usize; 3]) -> Result<Self> {
        let mut rows = [[0i64; 6]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            row[3 + i] = 1;
            for k in 0..3 {
                if src[k] == i {
                    row[k] = 1;
                }
            }
        }
        let parity = if permutation_cycles(src) == 2 { Parity::Odd } else { Parity::Even };
        Self::new(field, &rows, parity, format!("({} {} {})", src[0] + 1, src[1] + 1, src[2] + 1))
    }

    pub fn p(&self) -> u32 {
        self.basis.field().p()
    }

    pub fn basis(&self) -> &FpMatrix {
        &self.basis
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Checks dimension 3, Lagrangian (`x·x' = y·y'` on a basis) and
    /// stochastic (`1₆` in the span).
    pub fn validate(&self) -> Result<()> {
        let f = self.basis.field();
        if self.basis.cols() != 6 || self.basis.rank() != 3 {
            return Err(Error::InvalidSubset(format!("{} is not three-dimensional", self.label)));
        }
        let rows = self.basis.row_vecs();
        for v in &rows {
            for w in &rows {
                if beta_form(f, v, w)? != 0 {
                    return Err(Error::InvalidSubset(format!("{} is not Lagrangian", self.label)));
                }
            }
        }
        if self.basis.express_in_rows(&[1; 6])?.is_none() {
            return Err(Error::InvalidSubset(format!("{} is not stochastic", self.label)));
        }
        Ok(())
    }

    /// All `p³` vectors of the subspace.
    pub fn elements(&self) -> Vec<[u32; 6]> {
        let f = self.basis.field();
        let p = f.p();
        let mut out = Vec::with_capacity((p * p * p) as usize);
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    let mut v = [0u32; 6];
                    for (k, slot) in v.iter_mut().enumerate() {
                        let s =
                            f.add(f.add(f.mul(a, self.basis.get(0, k)), f.mul(b, self.basis.get(1, k))), f.mul(c, self.basis.get(2, k)));
                        *slot = s;
                    }
                    out.push(v);
                }
            }
        }
        out
    }

    /// `3 − dim(T ∩ T')`, from the rank of the stacked bases.
    pub fn distance(&self, other: &Self) -> Result<u32> {
        if self.p() != other.p() {
            return Err(Error::PrimeMismatch(self.p(), other.p()));
        }
        Ok(self.basis.vstack(&other.basis)?.rank() as u32 - 3)
    }
}

impl fmt::Display for SubspaceT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn permutation_cycles(src: [usize; 3]) -> usize {
    let mut seen = [false; 3];
    let mut cycles = 0;
    for s in 0..3 {
        if !seen[s] {
            cycles += 1;
            let mut k = s;
            while !seen[k] {
                seen[k] = true;
                k = src[k];
            }
        }
    }
    cycles
}

/// `x_k = y_{ζ[k]}`: the three-cycle used on region `A`.
pub const ZETA: [usize; 3] = [2, 0, 1];
pub const ZETA_INV: [usize; 3] = [1, 2, 0];
pub const IDENTITY: [usize; 3] = [0, 1, 2];

/// The spin set for prime `p`. For odd `p` these are the `2p + 2` explicit
/// subspaces, for `p = 2` the six permutations.
pub fn build_sigma3(p: u32) -> Result<Vec<SubspaceT>> {
    let f = PrimeField::new(p)?;
    if p == 2 {
        let perms = [IDENTITY, ZETA, ZETA_INV, [1, 0, 2], [0, 2, 1], [2, 1, 0]];
        return perms.iter().map(|&s| SubspaceT::permutation(f, s)).collect();
    }
    let mut out = Vec::with_capacity(2 * p as usize + 2);
    let one = [1, 1, 1, 1, 1, 1];
    out.push(SubspaceT::new(f, &[one, [1, 0, 0, 1, 0, 0], [0, 1, 0, 0, 1, 0]], Parity::Even, "*even")?);
    for m in 0..p as i64 {
        out.push(SubspaceT::new(f, &[one, [-1, m, 1, 1, m, -1], [m, 1, -1, m, -1, 1]], Parity::Even, format!("{m}even"))?);
    }
    out.push(SubspaceT::new(f, &[one, [-1, 0, 1, 1, 0, -1], [0, 1, 0, 0, 1, 0]], Parity::Odd, "*odd")?);
    for m in 0..p as i64 {
        out.push(SubspaceT::new(f, &[one, [1, m, 0, 1, m, 0], [-m, 1, m - 1, m, -1, 1 - m]], Parity::Odd, format!("{m}odd"))?);
    }
    let distinct: HashSet<&FpMatrix> = out.iter().map(|t| &t.basis).collect();
    if distinct.len() != out.len() {
        return Err(Error::Internal("spin set elements are not distinct".into()));
    }
    Ok(out)
}

/// Spin set with its distance table and the three boundary values.
#[derive(Clone, Debug)]
pub struct SpinModel {
    p: u32,
    elements: Vec<SubspaceT>,
    distance: Vec<Vec<u32>>,
    identity: usize,
    zeta: usize,
    zeta_inv: usize,
}

impl SpinModel {
    pub fn new(p: u32) -> Result<Self> {
        let elements = build_sigma3(p)?;
        let f = PrimeField::new(p)?;
        let find = |src| -> Result<usize> {
            let t = SubspaceT::permutation(f, src)?;
            elements.iter().position(|e| e.basis == t.basis).ok_or_else(|| Error::Internal("permutation missing".into()))
        };
        let (identity, zeta, zeta_inv) = (find(IDENTITY)?, find(ZETA)?, find(ZETA_INV)?);
        let distance =
            elements.iter().map(|a| elements.iter().map(|b| a.distance(b)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        Ok(Self { p, elements, distance, identity, zeta, zeta_inv })
    }

    /// Replaces the distance table (used to check that verification notices
    /// a corrupted table).
    pub fn with_distance_table(mut self, table: Vec<Vec<u32>>) -> Result<Self> {
        let q = self.elements.len();
        if table.len() != q || table.iter().any(|r| r.len() != q) {
            return Err(Error::DimensionMismatch { expected: q, got: table.len() });
        }
        self.distance = table;
        Ok(self)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn elements(&self) -> &[SubspaceT] {
        &self.elements
    }

    pub fn distance_table(&self) -> &[Vec<u32>] {
        &self.distance
    }

    pub fn distance(&self, a: usize, b: usize) -> u32 {
        self.distance[a][b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn zeta(&self) -> usize {
        self.zeta
    }

    pub fn zeta_inv(&self) -> usize {
        self.zeta_inv
    }

    /// Distance predicted from parities alone: 0, 1 across parities, 2 within.
    pub fn parity_distance(&self, a: usize, b: usize) -> u32 {
        if a == b {
            0
        } else if self.elements[a].parity != self.elements[b].parity {
            1
        } else {
            2
        }
    }

    fn boundary_values(&self, g: &NetworkGraph, regions: [&[usize]; 3]) -> Result<Vec<Option<usize>>> {
        let mut value = vec![None; g.num_vertices()];
        for (region, spin) in regions.iter().zip([self.zeta, self.zeta_inv, self.identity]) {
            for &v in *region {
                if v >= g.num_vertices() {
                    return Err(Error::IndexOutOfRange { index: v, len: g.num_vertices() });
                }
                if !g.is_boundary(v) {
                    return Err(Error::InvalidSubset(format!("{:?} is not a boundary vertex", g.name(v))));
                }
                if value[v].is_some() {
                    return Err(Error::InvalidSubset(format!("{:?} is in two regions", g.name(v))));
                }
                value[v] = Some(spin);
            }
        }
        if let Some(b) = g.boundary().into_iter().find(|&b| value[b].is_none()) {
            return Err(Error::InvalidSubset(format!("boundary vertex {:?} is in no region", g.name(b))));
        }
        Ok(value)
    }

    /// Exact energy histogram over all bulk configurations.
    pub fn census(&self, g: &NetworkGraph, a: &[usize], b: &[usize], c: &[usize]) -> Result<Census> {
        if g.p() != self.p {
            return Err(Error::PrimeMismatch(self.p, g.p()));
        }
        let fixed = self.boundary_values(g, [a, b, c])?;
        let bulk = g.bulk();
        let q = self.elements.len();
        let total = (q as u128).checked_pow(bulk.len() as u32).unwrap_or(u128::MAX);
        if total > MAX_CONFIGURATIONS {
            return Err(Error::CapExceeded { what: "spin configurations", value: total, cap: MAX_CONFIGURATIONS });
        }
        #[derive(Clone, Copy)]
        enum End {
            Fixed(usize),
            Free(usize),
        }
        let mut slot = vec![usize::MAX; g.num_vertices()];
        for (i, &x) in bulk.iter().enumerate() {
            slot[x] = i;
        }
        let end = |v: usize| match fixed[v] {
            Some(s) => End::Fixed(s),
            None => End::Free(slot[v]),
        };
        let ends: Vec<(End, End)> = g.edges().iter().map(|&(u, v)| (end(u), end(v))).collect();
        let nb = bulk.len();
        let energy = |cfg: &[usize]| -> u32 {
            let val = |e: End| match e {
                End::Fixed(s) => s,
                End::Free(i) => cfg[i],
            };
            ends.iter().map(|&(u, v)| self.distance[val(u)][val(v)]).sum()
        };
        let run = |first: Option<usize>| -> Census {
            let mut census = Census::default();
            let mut cfg = vec![0usize; nb];
            let start = usize::from(first.is_some());
            if let Some(f) = first {
                cfg[0] = f;
            }
            loop {
                census.record(energy(&cfg), &cfg);
                let mut i = start;
                loop {
                    if i == nb {
                        return census;
                    }
                    cfg[i] += 1;
                    if cfg[i] < q {
                        break;
                    }
                    cfg[i] = 0;
                    i += 1;
                }
            }
        };
        let mut census =
            if nb == 0 { run(None) } else { (0..q).into_par_iter().map(|f| run(Some(f))).reduce(Census::default, Census::merge) };
        census.bulk = bulk;
        Ok(census)
    }

    /// Minimum energy, its degeneracy and all minimizing configurations.
    pub fn ground_state(&self, g: &NetworkGraph, a: &[usize], b: &[usize], c: &[usize]) -> Result<GroundState> {
        let census = self.census(g, a, b, c)?;
        let (&e0, &deg) = census.counts.iter().next().ok_or_else(|| Error::Internal("empty census".into()))?;
        Ok(GroundState { e0, degeneracy: deg, bulk: census.bulk.clone(), configs: census.ground_configs })
    }

    /// Exact ensemble average of `tr (Ψ_AB^{T_B})³` and the coarser bound
    /// with every vertex prefactor replaced by `D_x³`.
    pub fn moment_prediction(&self, g: &NetworkGraph, a: &[usize], b: &[usize], c: &[usize]) -> Result<MomentPrediction> {
        let census = self.census(g, a, b, c)?;
        let p = BigInt::from(self.p);
        let n = g.bond_exponent();
        let mut sum = BigRational::zero();
        for (&e, &count) in &census.counts {
            sum += BigRational::new(BigInt::from(count), p.pow(n * e));
        }
        let mut denom = BigInt::one();
        for &x in &g.bulk() {
            let local = n as usize * g.degree(x);
            if self.p != 2 && local < 2 {
                return Err(Error::Unsupported(format!(
                    "vertex {:?} has a single qudit; the third-moment formula needs at least two for odd p",
                    g.name(x)
                )));
            }
            let d = p.pow(local as u32);
            denom *= &d * (&d + 1u32) * (&d + &p);
        }
        let careful_denom = p.pow(3 * g.projected_qudits() as u32);
        Ok(MomentPrediction {
            exact: &sum / BigRational::from_integer(denom),
            careful_bound: &sum / BigRational::from_integer(careful_denom),
            partition_sum: sum,
            energies: census.counts,
        })
    }
}

/// Energy histogram and ground configurations of one boundary problem.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    /// Energy → number of configurations.
    pub counts: BTreeMap<u32, u64>,
    pub ground_energy: Option<u32>,
    /// Configurations (indexed like `bulk`) of the smallest energy.
    pub ground_configs: Vec<Vec<usize>>,
    pub bulk: Vec<usize>,
}

impl Census {
    fn record(&mut self, e: u32, cfg: &[usize]) {
        *self.counts.entry(e).or_insert(0) += 1;
        match self.ground_energy {
            Some(min) if e > min => {}
            Some(min) if e == min => self.ground_configs.push(cfg.to_vec()),
            _ => {
                self.ground_energy = Some(e);
                self.ground_configs = vec![cfg.to_vec()];
            }
        }
    }

    fn merge(mut self, other: Census) -> Census {
        for (e, c) in other.counts {
            *self.counts.entry(e).or_insert(0) += c;
        }
        match (self.ground_energy, other.ground_energy) {
            (_, None) => {}
            (Some(a), Some(b)) if a == b => self.ground_configs.extend(other.ground_configs),
            (Some(a), Some(b)) if a < b => {}
            _ => {
                self.ground_energy = other.ground_energy;
                self.ground_configs = other.ground_configs;
            }
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundState {
    pub e0: u32,
    pub degeneracy: u64,
    pub bulk: Vec<usize>,
    pub configs: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentPrediction {
    /// `⟨tr (Ψ_AB^{T_B})³⟩`.
    pub exact: BigRational,
    /// `p^{-3N_b} Σ p^{-N·E}`, an upper bound on `exact`.
    pub careful_bound: BigRational,
    /// `Σ_configs p^{-N·E}`.
    pub partition_sum: BigRational,
    pub energies: BTreeMap<u32, u64>,
}

impl MomentPrediction {
    pub fn exact_f64(&self) -> f64 {
        ratio_to_f64(&self.exact)
    }

    pub fn careful_bound_f64(&self) -> f64 {
        ratio_to_f64(&self.careful_bound)
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Terms of the bound `#_b log_p(p+1) + log_p(#_A #_B #_C) + 4δ` on the
/// average GHZ count, `δ = (2p+2)^{|V_b|} / p^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzBound {
    pub num_a: usize,
    pub num_b: usize,
    pub num_c: usize,
    pub residual: usize,
    pub residual_term: f64,
    pub cut_term: f64,
    pub delta: f64,
    pub total: f64,
}

pub fn ghz_bound(g: &NetworkGraph, a: &[usize], b: &[usize], c: &[usize]) -> Result<GhzBound> {
    let (ca, cb, cc) = (min_cut(g, a)?, min_cut(g, b)?, min_cut(g, c)?);
    let unavailable = || Error::CapExceeded { what: "bulk vertices", value: g.bulk().len() as u128, cap: 24 };
    let (na, nb, nc) =
        (ca.num_min_cuts.ok_or_else(unavailable)?, cb.num_min_cuts.ok_or_else(unavailable)?, cc.num_min_cuts.ok_or_else(unavailable)?);
    let residual =
        residual_report(g, &ca, &cb, &cc)?.max_components.ok_or_else(|| Error::Internal("no pairwise-disjoint minimal cuts".into()))?;
    let p = g.p() as f64;
    let log_p = |v: f64| v.ln() / p.ln();
    let residual_term = residual as f64 * log_p(p + 1.0);
    let cut_term = log_p((na * nb * nc) as f64);
    let delta = (2.0 * p + 2.0).powi(g.bulk().len() as i32) / p.powi(g.bond_exponent() as i32);
    Ok(GhzBound {
        num_a: na,
        num_b: nb,
        num_c: nc,
        residual,
        residual_term,
        cut_term,
        delta,
        total: residual_term + cut_term + 4.0 * delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_identifications() {
        for p in [2u32, 3, 5, 7] {
            let m = SpinModel::new(p).unwrap();
            assert_eq!(m.elements().len(), 2 * p as usize + 2);
            let odd = m.elements().iter().filter(|t| t.parity() == Parity::Odd).count();
            assert_eq!(odd, p as usize + 1);
            if p > 2 {
                assert_eq!(m.elements()[m.identity()].label(), "*even");
                assert_eq!(m.elements()[m.zeta()].label(), "1even");
                assert_eq!(m.elements()[m.zeta_inv()].label(), format!("{}even", p - 1));
            }
            assert_eq!(m.distance(m.identity(), m.zeta()), 2);
        }
    }

    #[test]
    fn distances_follow_parity() {
        for p in [2u32, 3, 5, 7] {
            let m = SpinModel::new(p).unwrap();
            let q = m.elements().len();
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(m.distance(a, b), m.parity_distance(a, b));
                }
            }
        }
    }

    #[test]
    fn star_ground_state() {
        for p in [2u32, 3, 5] {
            let m = SpinModel::new(p).unwrap();
            let g = NetworkGraph::star(p, 1, 3).unwrap();
            let gs = m.ground_state(&g, &[1], &[2], &[3]).unwrap();
            assert_eq!(gs.e0, 3);
            assert_eq!(gs.degeneracy, p as u64 + 1);
            for cfg in &gs.configs {
                assert_eq!(m.elements()[cfg[0]].parity(), Parity::Odd);
            }
        }
    }

    #[test]
    fn no_bulk_energy_is_boundary_distance() {
        // Triangle of boundary vertices a, b, c.
        let g = NetworkGraph::new(3, 2, 3, &[0, 1, 2], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let m = SpinModel::new(3).unwrap();
        let gs = m.ground_state(&g, &[0], &[1], &[2]).unwrap();
        assert_eq!((gs.e0, gs.degeneracy), (6, 1));
        let pred = m.moment_prediction(&g, &[0], &[1], &[2]).unwrap();
        assert_eq!(pred.exact, BigRational::new(1.into(), BigInt::from(3).pow(12)));
    }

    #[test]
    fn single_qudit_vertex_rejected_for_odd_p() {
        let g = NetworkGraph::new(3, 1, 2, &[0], &[(0, 1)]).unwrap();
        let m = SpinModel::new(3).unwrap();
        assert!(matches!(m.moment_prediction(&g, &[0], &[], &[]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn bound_terms() {
        let g = NetworkGraph::star(2, 20, 3).unwrap();
        let b = ghz_bound(&g, &[1], &[2], &[3]).unwrap();
        assert_eq!((b.num_a, b.num_b, b.num_c, b.residual), (1, 1, 1, 1));
        assert!((b.total - 3f64.log2()).abs() < 1e-4);
        assert_eq!(b.delta, 6.0 / 2f64.powi(20));
    }

    #[test]
    fn small_ratios_convert() {
        let r = BigRational::new(BigInt::from(3), BigInt::from(2).pow(1000));
        assert!((ratio_to_f64(&r) / (3.0 * 2f64.powi(-1000)) - 1.0).abs() < 1e-12);
    }
}
