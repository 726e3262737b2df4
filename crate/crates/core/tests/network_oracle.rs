//! Network construction checked against explicit tensor contraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stabnet::dense::{self, DEFAULT_VECTOR_CAP};
use stabnet::entropy::entropy;
use stabnet::{build_network_with_tensors, build_random_network, NetworkGraph, StabilizerTableau};

fn contract_dense(g: &NetworkGraph, tensors: &[StabilizerTableau]) -> Vec<num_complex::Complex64> {
    let n = g.bond_exponent() as usize;
    let mut pairs = Vec::new();
    for e in 0..g.edges().len() {
        for j in 0..n {
            pairs.push((g.endpoint_qudits(e, 0).start + j, g.endpoint_qudits(e, 1).start + j));
        }
    }
    let vt: Vec<_> =
        g.bulk().iter().zip(tensors).map(|(&x, t)| (g.vertex_qudits(x), dense::tableau_to_dense(t, DEFAULT_VECTOR_CAP).unwrap())).collect();
    dense::dense_contract(g.p(), g.total_qudits(), &pairs, &vt, 1 << 12).unwrap()
}

fn check_against_dense(g: &NetworkGraph, seeds: u64) {
    let p = g.p();
    let n = g.bond_exponent() as usize;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors: Vec<_> = g.bulk().iter().map(|&x| StabilizerTableau::sample_uniform(n * g.degree(x), p, &mut rng).unwrap()).collect();
        let state = build_network_with_tensors(g, &tensors).unwrap();
        let psi = contract_dense(g, &tensors);
        let norm2: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        match &state.tableau {
            None => assert!(norm2 < 1e-12, "seed {seed}: zero tableau but dense norm {norm2}"),
            Some(t) => {
                let tr = (p as f64).powi(t.log_trace() as i32);
                assert!((norm2 - tr).abs() < 1e-9, "seed {seed}: trace {tr} vs {norm2}");
                let v = dense::tableau_to_dense(t, DEFAULT_VECTOR_CAP).unwrap();
                let overlap: f64 = v.amplitudes.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum::<num_complex::Complex64>().norm();
                assert!((overlap * overlap - norm2).abs() < 1e-9, "seed {seed}: states differ");
            }
        }
    }
}

#[test]
fn path_network_matches_dense_contraction() {
    let g = NetworkGraph::path(2, 1, 2).unwrap();
    check_against_dense(&g, 50);
}

#[test]
fn small_networks_match_dense_contraction() {
    check_against_dense(&NetworkGraph::star(2, 1, 3).unwrap(), 30);
    check_against_dense(&NetworkGraph::star(3, 1, 3).unwrap(), 30);
    check_against_dense(&NetworkGraph::ring(2, 1, 3).unwrap(), 30);
    // Parallel edges between two bulk vertices.
    let g = NetworkGraph::new(2, 1, 4, &[0, 3], &[(0, 1), (1, 2), (1, 2), (2, 3)]).unwrap();
    check_against_dense(&g, 30);
}

#[test]
fn trace_is_quantized_and_entropies_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for g in [NetworkGraph::grid2x2(3, 2).unwrap(), NetworkGraph::ring(2, 3, 3).unwrap()] {
        let nb = g.projected_qudits() as i64;
        for _ in 0..100 {
            let s = build_random_network(&g, &mut rng).unwrap();
            let Some(t) = &s.tableau else { continue };
            assert!(t.is_pure());
            let k = t.log_trace() + nb;
            assert!((0..=nb).contains(&k));
            // Each single leg carries at most N qudits of entropy.
            let leg: Vec<usize> = g.boundary().into_iter().filter(|_| rng.gen_bool(0.5)).collect();
            let q = g.boundary_subsystem(&leg).unwrap();
            assert!(entropy(t, &q).unwrap() <= (g.bond_exponent() as usize * leg.len()) as i64);
        }
    }
}
