//! Stabilizer fast paths checked against explicit vectors and matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stabnet::dense::{self, DEFAULT_VECTOR_CAP};
use stabnet::entropy::{self, pt_moment3_enumerated};
use stabnet::{enumerate_all, Projected, StabilizerTableau, WeylOperator};

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn random_subsets<R: Rng>(n: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let (mut a, mut b, mut c) = (vec![], vec![], vec![]);
    for q in 0..n {
        match rng.gen_range(0..3) {
            0 => a.push(q),
            1 => b.push(q),
            _ => c.push(q),
        }
    }
    (a, b, c)
}

#[test]
fn commutation_matches_dense_commutator() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let a = WeylOperator::random(3, 2, &mut rng);
        let b = WeylOperator::random(3, 2, &mut rng);
        let (ma, mb) = (dense::weyl_matrix(&a), dense::weyl_matrix(&b));
        let comm = &ma * &mb - &mb * &ma;
        assert_eq!(a.commutes_with(&b).unwrap(), max_abs(&comm) < 1e-9);
    }
}

#[test]
fn products_match_dense_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for &p in &[2u32, 3, 5] {
        for _ in 0..100 {
            let a = WeylOperator::random(p, 2, &mut rng);
            let b = WeylOperator::random(p, 2, &mut rng);
            let prod = a.multiply(&b).unwrap();
            let diff = dense::weyl_matrix(&a) * dense::weyl_matrix(&b) - dense::weyl_matrix(&prod);
            assert!(max_abs(&diff) < 1e-9, "p={p} {a:?} {b:?}");
        }
    }
    // (XZ)(XZ) for a qubit, from 2×2 matrices.
    let x = DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.].map(|v| C64::new(v, 0.)));
    let z = DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.].map(|v| C64::new(v, 0.)));
    let xz_dense = &x * &z;
    let xz = WeylOperator::new(2, vec![1], vec![1], 3).unwrap();
    assert!(max_abs(&(dense::weyl_matrix(&xz) - &xz_dense)) < 1e-12);
    let sq = xz.multiply(&xz).unwrap();
    assert!(max_abs(&(dense::weyl_matrix(&sq) - &xz_dense * &xz_dense)) < 1e-12);
}

#[test]
fn partial_transpose_of_weyl_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for &p in &[2u32, 3] {
        for _ in 0..50 {
            let g = WeylOperator::random(p, 3, &mut rng);
            let lhs = dense::partial_transpose(&dense::weyl_matrix(&g), p, 3, &[1, 2]);
            let rhs = dense::weyl_matrix(&g.partial_transpose(&[1, 2]));
            assert!(max_abs(&(lhs - rhs)) < 1e-9);
        }
    }
}

#[test]
fn dense_states_are_stabilized_by_their_groups() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..100 {
        let p = if rng.gen_bool(0.5) { 2 } else { 3 };
        let n = rng.gen_range(1..=4);
        let t = StabilizerTableau::sample_uniform(n, p, &mut rng).unwrap();
        let v = dense::tableau_to_dense(&t, DEFAULT_VECTOR_CAP).unwrap();
        for g in t.group_elements() {
            let gv = dense::apply_weyl(&g, &v.amplitudes);
            let err = gv.iter().zip(&v.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-9);
        }
        // Operator form agrees with |v⟩⟨v|.
        let op = dense::tableau_operator(&t, 729).unwrap();
        assert!(max_abs(&(op - v.density())) < 1e-9);
    }
}

#[test]
fn six_single_qubit_states() {
    let all = enumerate_all(1, 2, 27).unwrap();
    assert_eq!(all.len(), 6);
    // Independent count: distinct dense projectors among joint eigenvectors of X, Y, Z.
    let mut projectors: Vec<DMatrix<C64>> = Vec::new();
    for (x, z) in [(1, 0), (0, 1), (1, 1)] {
        for phase in [0, 2] {
            let t = StabilizerTableau::new(2, 1, vec![WeylOperator::new(2, vec![x], vec![z], phase).unwrap()], 0).unwrap();
            let rho = dense::tableau_to_dense(&t, 16).unwrap().density();
            if !projectors.iter().any(|q| max_abs(&(q - &rho)) < 1e-9) {
                projectors.push(rho);
            }
        }
    }
    assert_eq!(projectors.len(), 6);
    let canon: std::collections::HashSet<_> = all.iter().map(|t| t.canonicalize()).collect();
    assert_eq!(canon.len(), 6);
}

fn distinct_projector_count(states: &[StabilizerTableau]) -> usize {
    let mut projectors: Vec<DMatrix<C64>> = Vec::new();
    for t in states {
        let rho = dense::tableau_to_dense(t, DEFAULT_VECTOR_CAP).unwrap().density();
        if !projectors.iter().any(|q| max_abs(&(q - &rho)) < 1e-9) {
            projectors.push(rho);
        }
    }
    projectors.len()
}

#[test]
fn enumeration_counts_match_dense_projectors() {
    for (n, p) in [(1usize, 3u32), (2, 3), (2, 2)] {
        let all = enumerate_all(n, p, 27).unwrap();
        assert_eq!(distinct_projector_count(&all), all.len());
    }
    // Qutrit count from an independent route: joint eigenvectors of each
    // maximal commuting Weyl subgroup ⟨W(x,z)⟩, one per projective direction.
    let mut eigen = Vec::new();
    for (x, z) in [(1u32, 0u32), (0, 1), (1, 1), (1, 2)] {
        for phase in 0..3 {
            eigen.push(StabilizerTableau::new(3, 1, vec![WeylOperator::new(3, vec![x], vec![z], phase).unwrap()], 0).unwrap());
        }
    }
    assert_eq!(distinct_projector_count(&eigen), enumerate_all(1, 3, 27).unwrap().len());
}

#[test]
fn postselection_sequences_match_dense_projectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..200 {
        let p = if rng.gen_bool(0.5) { 2 } else { 3 };
        let n = rng.gen_range(1..=4);
        let t0 = StabilizerTableau::sample_uniform(n, p, &mut rng).unwrap();
        let mut cur = Projected::State(t0.clone());
        let mut op = dense::tableau_operator(&t0, 729).unwrap();
        for _ in 0..rng.gen_range(1..=4) {
            let mut g = WeylOperator::random(p, n, &mut rng);
            if p == 2 {
                g = g.clone().with_phase(g.phase() & 2);
            }
            if rng.gen_bool(0.3) {
                if let Projected::State(t) = &cur {
                    // Sometimes pick a group element, possibly with a wrong phase.
                    let elems = t.group_elements();
                    let e = elems[rng.gen_range(0..elems.len())].clone();
                    g = if rng.gen_bool(0.5) { e } else { e.with_phase(if p == 2 { 2 } else { 1 }) };
                }
            }
            // Dense projector P_g = p^{-1} Σ_j g^j.
            let gm = dense::weyl_matrix(&g);
            let dim = gm.nrows();
            let mut proj = DMatrix::<C64>::zeros(dim, dim);
            let mut pw = DMatrix::<C64>::identity(dim, dim);
            for _ in 0..p {
                proj += &pw;
                pw = &pw * &gm;
            }
            proj /= C64::new(p as f64, 0.0);
            op = &proj * &op * &proj;
            cur = match cur {
                Projected::State(t) => t.postselect(&g).unwrap(),
                Projected::Zero => Projected::Zero,
            };
            match &cur {
                Projected::Zero => assert!(max_abs(&op) < 1e-9),
                Projected::State(t) => {
                    t.validate().unwrap();
                    let tr = op.trace().re;
                    assert!((tr - (p as f64).powi(t.log_trace() as i32)).abs() < 1e-9);
                    let rep = dense::tableau_operator(t, 729).unwrap();
                    assert!(max_abs(&(rep - &op)) < 1e-9);
                }
            }
        }
    }
}

#[test]
fn partial_traces_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..100 {
        let n = rng.gen_range(2..=4);
        let t = StabilizerTableau::sample_uniform(n, 3, &mut rng).unwrap();
        let keep: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let red = t.reduced(&keep).unwrap();
        let rho = dense::tableau_to_dense(&t, DEFAULT_VECTOR_CAP).unwrap().density();
        let dense_red = dense::partial_trace(&rho, 3, n, &keep);
        let rep = dense::tableau_operator(&red, 729).unwrap();
        assert!(max_abs(&(rep - dense_red)) < 1e-9);
    }
}

#[test]
fn entropies_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..200 {
        let p = if rng.gen_bool(0.5) { 2 } else { 3 };
        let n = rng.gen_range(1..=5);
        let t = StabilizerTableau::sample_uniform(n, p, &mut rng).unwrap();
        let rho = dense::tableau_to_dense(&t, DEFAULT_VECTOR_CAP).unwrap().density();
        let region: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let s = dense::dense_entropy(&rho, p, n, &region);
        assert!((s - s.round()).abs() < 1e-9, "flat spectrum");
        assert_eq!(s.round() as i64, entropy::entropy(&t, &region).unwrap());
        let comp: Vec<usize> = (0..n).filter(|q| !region.contains(q)).collect();
        assert_eq!(entropy::entropy(&t, &region).unwrap(), entropy::entropy(&t, &comp).unwrap());
    }
}

#[test]
fn pt_moment_and_ghz_content_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..200 {
        let p = if rng.gen_bool(0.5) { 2 } else { 3 };
        let n = rng.gen_range(2..=5);
        let t = StabilizerTableau::sample_uniform(n, p, &mut rng).unwrap();
        let (a, b, c) = random_subsets(n, &mut rng);
        let rho = dense::tableau_to_dense(&t, DEFAULT_VECTOR_CAP).unwrap().density();
        let m = entropy::pt_moment3(&t, &a, &b).unwrap();
        let dense_val = dense::dense_pt3(&rho, p, n, &a, &b);
        assert!((dense_val - (p as f64).powi(-(m as i32))).abs() < 1e-9);
        let enumerated = pt_moment3_enumerated(&t, &a, &b, 10).unwrap();
        assert!((enumerated - dense_val).abs() < 1e-9);
        let content = entropy::ghz_content(&t, &a, &b, &c).unwrap();
        let sum: f64 = [&a, &b, &c].iter().map(|r| dense::dense_entropy(&rho, p, n, r)).sum();
        let g_dense = sum + dense_val.ln() / (p as f64).ln();
        assert!((g_dense - content.g as f64).abs() < 1e-9);
        assert_eq!(content.g.rem_euclid(2), (content.local_entropy_sum()).rem_euclid(2));
    }
}

#[test]
fn uniform_sampling_chi_square() {
    // Critical values of χ² at 99%: df = 5 → 15.086, df = 11 → 24.725.
    for (p, trials, critical) in [(2u32, 60_000usize, 15.086), (3, 60_000, 24.725)] {
        let all: Vec<StabilizerTableau> = enumerate_all(1, p, 27).unwrap();
        let index: std::collections::HashMap<_, _> = all.iter().enumerate().map(|(i, t)| (t.canonicalize(), i)).collect();
        let mut counts = vec![0usize; all.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(108 + p as u64);
        for _ in 0..trials {
            let t = StabilizerTableau::sample_uniform(1, p, &mut rng).unwrap();
            counts[index[&t.canonicalize()]] += 1;
        }
        let expected = trials as f64 / all.len() as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < critical, "p={p} chi2={chi2} counts={counts:?}");
    }
}
