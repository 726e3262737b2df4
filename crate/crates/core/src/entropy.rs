//! Entropies, mutual informations and the GHZ content of tripartite
//! stabilizer states. All quantities are exact integers in units of `log p`.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FpMatrix;
use crate::tableau::StabilizerTableau;

/// Bell-pair and GHZ-triple counts of a tripartite stabilizer state:
/// `c` pairs between A and B, `b` between A and C, `a` between B and C,
/// and `g` GHZ triples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GhzContent {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub g: i64,
}

impl GhzContent {
    /// `S(A)+S(B)+S(C)`.
    pub fn local_entropy_sum(&self) -> i64 {
        2 * (self.a + self.b + self.c) + 3 * self.g
    }

    /// Exponent of `tr((ρ_AB^{T_B})³) = p^{-m}`.
    pub fn pt_exponent(&self) -> i64 {
        2 * (self.a + self.b + self.c + self.g)
    }
}

fn validate_disjoint(n: usize, parts: &[&[usize]]) -> Result<()> {
    let mut seen = HashSet::new();
    for part in parts {
        for &q in *part {
            if q >= n {
                return Err(Error::IndexOutOfRange { index: q, len: n });
            }
            if !seen.insert(q) {
                return Err(Error::InvalidSubset(format!("qudit {q} appears in more than one region")));
            }
        }
    }
    Ok(())
}

fn union(parts: &[&[usize]]) -> Vec<usize> {
    let mut v: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    v.sort_unstable();
    v
}

/// `S(A) = |A| − dim G_A` where `G_A` is the subgroup supported in `A`.
/// For pure states this equals `|A| − n + rank(G restricted to Ā)`.
pub fn entropy(t: &StabilizerTableau, region: &[usize]) -> Result<i64> {
    validate_disjoint(t.n(), &[region])?;
    Ok(region.len() as i64 - t.local_dimension(region)? as i64)
}

pub fn mutual_information(t: &StabilizerTableau, a: &[usize], b: &[usize]) -> Result<i64> {
    validate_disjoint(t.n(), &[a, b])?;
    Ok(entropy(t, a)? + entropy(t, b)? - entropy(t, &union(&[a, b]))?)
}

/// `I₃ = I(A:B) + I(A:C) − I(A:BC)`.
pub fn tripartite_information(t: &StabilizerTableau, a: &[usize], b: &[usize], c: &[usize]) -> Result<i64> {
    validate_disjoint(t.n(), &[a, b, c])?;
    Ok(mutual_information(t, a, b)? + mutual_information(t, a, c)? - mutual_information(t, a, &union(&[b, c]))?)
}

fn require_pure(t: &StabilizerTableau) -> Result<()> {
    if t.is_pure() {
        Ok(())
    } else {
        Err(Error::NotPure { k: t.k(), n: t.n() })
    }
}

/// Exponent `m` with `tr((ρ_AB^{T_B})³) = p^{-m}` for a pure state on
/// `A ∪ B ∪ C` (C is whatever is left).
///
/// With `ρ_AB = p^{-|AB|} Σ_{g∈G_AB} g`, the transpose on B maps
/// `W(v) ↦ W(Λv)` up to a sign that is quadratic in `v`. Expanding the cube,
/// only triples with vanishing vector sum survive, and each contributes the
/// character `ω^{-⟨v₁,v₂⟩_B}` of the symplectic form restricted to B. Summing
/// over `v₂` leaves `|G_AB| · |rad|`, where `rad` is the radical of that form
/// on `G_AB`. Hence `m = 2|AB| − k − r`.
pub fn pt_moment3(t: &StabilizerTableau, a: &[usize], b: &[usize]) -> Result<i64> {
    require_pure(t)?;
    validate_disjoint(t.n(), &[a, b])?;
    let ab = union(&[a, b]);
    let rho = t.reduced(&ab)?;
    let b_local: Vec<usize> = b.iter().map(|q| ab.binary_search(q).unwrap()).collect();
    let k = rho.k();
    let f = rho.field();
    let gens = rho.generators();
    let mut form = FpMatrix::zeros(f, k, k);
    for i in 0..k {
        for j in 0..k {
            let gi = gens[i].restrict(&b_local);
            let gj = gens[j].restrict(&b_local);
            form.set(i, j, gi.symplectic_product(&gj)?);
        }
    }
    let radical = k - form.rank();
    Ok(2 * ab.len() as i64 - k as i64 - radical as i64)
}

/// The same moment by brute force over pairs of group elements, multiplying
/// partially transposed Weyl operators explicitly. Returns the real value of
/// `tr((ρ_AB^{T_B})³)`. Intended as a cross-check for small `k`.
pub fn pt_moment3_enumerated(t: &StabilizerTableau, a: &[usize], b: &[usize], max_k: usize) -> Result<f64> {
    require_pure(t)?;
    validate_disjoint(t.n(), &[a, b])?;
    let ab = union(&[a, b]);
    let rho = t.reduced(&ab)?;
    if rho.k() > max_k {
        return Err(Error::CapExceeded { what: "local group rank", value: rho.k() as u128, cap: max_k as u128 });
    }
    let b_local: Vec<usize> = b.iter().map(|q| ab.binary_search(q).unwrap()).collect();
    let elems = rho.group_elements();
    let transposed: Vec<_> = elems.iter().map(|g| g.partial_transpose(&b_local)).collect();
    let p = t.p();
    let mut total = Complex64::new(0.0, 0.0);
    for (g1, t1) in elems.iter().zip(&transposed) {
        for (g2, t2) in elems.iter().zip(&transposed) {
            let g3 = g1.multiply(g2)?.inverse();
            let t3 = g3.partial_transpose(&b_local);
            let prod = t1.multiply(t2)?.multiply(&t3)?;
            if !prod.is_identity_vector() {
                return Err(Error::Internal("triple product is not scalar".into()));
            }
            total += if p == 2 {
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * prod.phase() as f64)
            } else {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * prod.phase() as f64 / p as f64)
            };
        }
    }
    let d = (p as f64).powi(ab.len() as i32);
    Ok(total.re / (d * d))
}

fn half_exact(num: i64, what: &str) -> Result<i64> {
    if num < 0 || num % 2 != 0 {
        return Err(Error::Internal(format!("{what}: numerator {num} is not a nonnegative even integer")));
    }
    Ok(num / 2)
}

/// `(a, b, c, g)` for a pure state and a tripartition of its qudits.
pub fn ghz_content(t: &StabilizerTableau, a: &[usize], b: &[usize], c: &[usize]) -> Result<GhzContent> {
    require_pure(t)?;
    validate_disjoint(t.n(), &[a, b, c])?;
    if a.len() + b.len() + c.len() != t.n() {
        return Err(Error::InvalidSubset("regions do not cover every qudit".into()));
    }
    let m = pt_moment3(t, a, b)?;
    let (sa, sb, sc) = (entropy(t, a)?, entropy(t, b)?, entropy(t, c)?);
    let g = sa + sb + sc - m;
    if g < 0 {
        return Err(Error::Internal(format!("negative GHZ count {g}")));
    }
    let iab = sa + sb - sc;
    let iac = sa + sc - sb;
    let ibc = sb + sc - sa;
    let content = GhzContent { c: half_exact(iab - g, "c")?, b: half_exact(iac - g, "b")?, a: half_exact(ibc - g, "a")?, g };
    if content.pt_exponent() != m || content.local_entropy_sum() != sa + sb + sc {
        return Err(Error::Internal("GHZ content inconsistent with entropies".into()));
    }
    Ok(content)
}

/// Entropic accounting for a four-party partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourpartiteReport {
    /// Bell pairs extractable between each pair of parties (symmetric, zero diagonal).
    pub t: [[i64; 4]; 4],
    /// GHZ triples of the tripartition `(A_i, A_j, rest)`, same layout as `t`.
    pub g: [[i64; 4]; 4],
    pub i3: i64,
    pub entropies: [i64; 4],
    pub residual_entropies: [i64; 4],
}

impl FourpartiteReport {
    pub fn g_max(&self) -> i64 {
        self.g.iter().flatten().copied().max().unwrap_or(0)
    }
}

pub fn fourpartite_report(t: &StabilizerTableau, parts: [&[usize]; 4]) -> Result<FourpartiteReport> {
    require_pure(t)?;
    validate_disjoint(t.n(), &parts)?;
    if parts.iter().map(|p| p.len()).sum::<usize>() != t.n() {
        return Err(Error::InvalidSubset("parts do not cover every qudit".into()));
    }
    let mut tm = [[0i64; 4]; 4];
    let mut gm = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            let rest: Vec<usize> = (0..4).filter(|&l| l != i && l != j).flat_map(|l| parts[l].iter().copied()).collect();
            let content = ghz_content(t, parts[i], parts[j], &rest)?;
            tm[i][j] = content.c;
            tm[j][i] = content.c;
            gm[i][j] = content.g;
            gm[j][i] = content.g;
        }
    }
    let i3 = tripartite_information(t, parts[0], parts[1], parts[2])?;
    let mut entropies = [0i64; 4];
    let mut residual = [0i64; 4];
    for i in 0..4 {
        entropies[i] = entropy(t, parts[i])?;
        residual[i] = entropies[i] - (0..4).filter(|&j| j != i).map(|j| tm[i][j]).sum::<i64>();
    }
    Ok(FourpartiteReport { t: tm, g: gm, i3, entropies, residual_entropies: residual })
}

/// `I₃` for every ordered choice of three of the four parties.
pub fn i3_all_choices(t: &StabilizerTableau, parts: [&[usize]; 4]) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                if a != b && b != c && a != c {
                    out.push(tripartite_information(t, parts[a], parts[b], parts[c])?);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_has_no_entropy() {
        let t = StabilizerTableau::zero_state(3, 4);
        for r in [vec![0], vec![1, 2], vec![0, 1, 2, 3]] {
            assert_eq!(entropy(&t, &r).unwrap(), 0);
        }
    }

    #[test]
    fn bell_pair_quantities() {
        for &p in &[2, 3, 5] {
            let t = StabilizerTableau::bell_pair(p);
            assert_eq!(entropy(&t, &[0]).unwrap(), 1);
            assert_eq!(entropy(&t, &[1]).unwrap(), 1);
            assert_eq!(mutual_information(&t, &[0], &[1]).unwrap(), 2);
            assert_eq!(pt_moment3(&t, &[0], &[1]).unwrap(), 2);
            assert_eq!(ghz_content(&t, &[0], &[1], &[]).unwrap(), GhzContent { a: 0, b: 0, c: 1, g: 0 });
        }
    }

    #[test]
    fn ghz_quantities() {
        for &p in &[2, 3, 5] {
            let t = StabilizerTableau::ghz(p, 3);
            assert_eq!(mutual_information(&t, &[0], &[1]).unwrap(), 1);
            assert_eq!(tripartite_information(&t, &[0], &[1], &[2]).unwrap(), 0);
            assert_eq!(pt_moment3(&t, &[0], &[1]).unwrap(), 2);
            assert_eq!(ghz_content(&t, &[0], &[1], &[2]).unwrap(), GhzContent { a: 0, b: 0, c: 0, g: 1 });
        }
    }

    #[test]
    fn triangle_of_bell_pairs() {
        // Qudits: A = {0, 2}, B = {1, 4}, C = {3, 5}; pairs (0,1), (2,3), (4,5).
        let b = StabilizerTableau::bell_pair(3);
        let t = b.tensor(&b).unwrap().tensor(&b).unwrap();
        let content = ghz_content(&t, &[0, 2], &[1, 4], &[3, 5]).unwrap();
        assert_eq!(content, GhzContent { a: 1, b: 1, c: 1, g: 0 });
    }

    #[test]
    fn overlapping_regions_rejected() {
        let t = StabilizerTableau::ghz(3, 3);
        assert!(mutual_information(&t, &[0, 1], &[1]).is_err());
        assert!(ghz_content(&t, &[0], &[1], &[]).is_err());
        let mixed = t.trace_out(&[2]).unwrap();
        assert!(matches!(pt_moment3(&mixed, &[0], &[1]), Err(Error::NotPure { .. })));
    }

    #[test]
    fn disconnected_pairs_four_party() {
        // Bell pairs between parties (1,2) and (3,4).
        let b = StabilizerTableau::bell_pair(3);
        let t = b.tensor(&b).unwrap().tensor(&b).unwrap().tensor(&b).unwrap();
        let parts: [&[usize]; 4] = [&[0, 2], &[1, 3], &[4, 6], &[5, 7]];
        let r = fourpartite_report(&t, parts).unwrap();
        assert_eq!(r.t[0][1], 2);
        assert_eq!(r.t[2][3], 2);
        assert_eq!(r.i3, 0);
        assert_eq!(r.residual_entropies, [0; 4]);
    }

    #[test]
    fn enumerated_moment_agrees_on_ghz() {
        for &p in &[2, 3] {
            let t = StabilizerTableau::ghz(p, 3);
            let v = pt_moment3_enumerated(&t, &[0], &[1], 8).unwrap();
            assert!((v - (p as f64).powi(-2)).abs() < 1e-12);
        }
    }
}
