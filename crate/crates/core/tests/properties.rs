//! Randomized invariants across modules.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stabnet::entropy::{entropy, ghz_content, pt_moment3};
use stabnet::experiments::{ghz_trials, run_trials};
use stabnet::geometry::{cut_size, max_flow, min_cut};
use stabnet::moments::third_moment_formula;
use stabnet::{FpMatrix, NetworkGraph, PrimeField, StabilizerTableau, WeylOperator};

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

fn random_matrix(p: u32, rows: usize, cols: usize, seed: u64) -> FpMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FpMatrix::random(PrimeField::new(p).unwrap(), rows, cols, &mut rng)
}

fn tripartition<R: Rng>(n: usize, rng: &mut R) -> [Vec<usize>; 3] {
    let mut parts: [Vec<usize>; 3] = Default::default();
    for q in 0..n {
        parts[rng.gen_range(0..3)].push(q);
    }
    parts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rref_is_idempotent_and_preserves_row_space(p in prime(), rows in 1usize..7, cols in 1usize..7, seed: u64) {
        let m = random_matrix(p, rows, cols, seed);
        let (r, _) = m.rref();
        prop_assert_eq!(&r.rref().0, &r);
        for row in m.row_vecs() {
            prop_assert!(r.express_in_rows(&row).unwrap().is_some());
        }
        for row in r.row_vecs() {
            prop_assert!(m.express_in_rows(&row).unwrap().is_some());
        }
    }

    #[test]
    fn rank_survives_row_operations(p in prime(), rows in 1usize..7, cols in 1usize..7, seed: u64) {
        let m = random_matrix(p, rows, cols, seed);
        let f = m.field();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut rv = m.row_vecs();
        for i in (1..rv.len()).rev() {
            rv.swap(i, rng.gen_range(0..=i));
        }
        if rv.len() > 1 {
            let c = rng.gen_range(0..p);
            let src = rv[1].clone();
            for (x, y) in rv[0].iter_mut().zip(src) {
                *x = f.add(*x, f.mul(c, y));
            }
        }
        let s = rng.gen_range(1..p);
        for x in rv.last_mut().unwrap() {
            *x = f.mul(*x, s);
        }
        prop_assert_eq!(FpMatrix::from_residue_rows(f, cols, &rv).unwrap().rank(), m.rank());
    }

    #[test]
    fn group_closed_and_canonical_form_basis_free(p in prime(), n in 1usize..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = StabilizerTableau::sample_uniform(n, p, &mut rng).unwrap();
        let gens = t.generators();
        for a in gens {
            for b in gens {
                prop_assert!(t.contains(&a.multiply(b).unwrap()).unwrap());
            }
        }
        // Re-choose generators: g0 ← g0·g1^c.
        let mut re = gens.to_vec();
        if re.len() > 1 {
            re[0] = re[0].multiply(&re[1].pow(rng.gen_range(1..p))).unwrap();
        }
        re.reverse();
        let t2 = StabilizerTableau::new(p, n, re, t.log_trace()).unwrap();
        prop_assert_eq!(t2.canonicalize(), t.canonicalize());
    }

    #[test]
    fn postselection_keeps_trace_a_power_of_p(p in prime(), n in 2usize..6, steps in 1usize..6, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = StabilizerTableau::zero_state(p, n);
        for _ in 0..steps {
            let g = WeylOperator::random(p, n, &mut rng);
            // Qubit projectors need a ±1 phase.
            let g = if p == 2 { let ph = g.phase() & 2; g.with_phase(ph) } else { g };
            match t.postselect(&g).unwrap() {
                stabnet::Projected::Zero => return Ok(()),
                stabnet::Projected::State(next) => {
                    next.validate().unwrap();
                    prop_assert!(next.log_trace() <= t.log_trace());
                    t = next;
                }
            }
        }
    }

    #[test]
    fn ghz_accounting_identities(p in prop::sample::select(vec![2u32, 3, 5]), n in 2usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = StabilizerTableau::sample_uniform(n, p, &mut rng).unwrap();
        let [a, b, c] = tripartition(n, &mut rng);
        let k = ghz_content(&t, &a, &b, &c).unwrap();
        prop_assert_eq!(pt_moment3(&t, &a, &b).unwrap(), 2 * (k.a + k.b + k.c + k.g));
        prop_assert_eq!(k.g.rem_euclid(2), k.local_entropy_sum().rem_euclid(2));
        prop_assert!(k.a >= 0 && k.b >= 0 && k.c >= 0 && k.g >= 0);
        let comp: Vec<usize> = (0..n).filter(|q| !a.contains(q)).collect();
        prop_assert_eq!(entropy(&t, &a).unwrap(), entropy(&t, &comp).unwrap());
    }

    #[test]
    fn cut_is_complement_symmetric(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nv = rng.gen_range(3..9);
        let mut edges: Vec<(usize, usize)> = (1..nv).map(|i| (i, rng.gen_range(0..i))).collect();
        for _ in 0..nv {
            let (u, v) = (rng.gen_range(0..nv), rng.gen_range(0..nv));
            if u != v {
                edges.push((u, v));
            }
        }
        let g = NetworkGraph::new(2, 1, nv, &[0, nv - 1], &edges).unwrap();
        let w: Vec<usize> = (0..nv).filter(|_| rng.gen_bool(0.5)).collect();
        let rest: Vec<usize> = (0..nv).filter(|v| !w.contains(v)).collect();
        prop_assert_eq!(cut_size(&g, &w), cut_size(&g, &rest));
        let region = vec![0];
        prop_assert_eq!(max_flow(&g, &region).unwrap(), min_cut(&g, &region).unwrap().min_cut_edges);
    }

    #[test]
    fn network_entropies_never_exceed_minimal_cuts(p in prop::sample::select(vec![2u32, 3]), n in 1u32..3, seed: u64) {
        let g = NetworkGraph::grid2x2(p, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = stabnet::build_random_network(&g, &mut rng).unwrap();
        if let Some(t) = &s.tableau {
            let k = t.log_trace() + g.projected_qudits() as i64;
            prop_assert!((0..=g.projected_qudits() as i64).contains(&k));
            let region: Vec<usize> = g.boundary().into_iter().filter(|_| rng.gen_bool(0.5)).collect();
            let q = g.boundary_subsystem(&region).unwrap();
            prop_assert!(entropy(t, &q).unwrap() <= min_cut(&g, &region).unwrap().s_rt as i64);
        }
    }

    #[test]
    fn trials_do_not_depend_on_worker_count(seed: u64, workers in 2usize..6) {
        let g = NetworkGraph::star(3, 1, 3).unwrap();
        let r: [&[usize]; 3] = [&[1], &[2], &[3]];
        prop_assert_eq!(ghz_trials(&g, r, 16, seed, Some(1)).unwrap(), ghz_trials(&g, r, 16, seed, Some(workers)).unwrap());
        let draws = |w| run_trials(seed, 32, Some(w), |_, rng| Ok(rng.gen::<u64>())).unwrap();
        prop_assert_eq!(draws(1), draws(workers));
    }
}

#[test]
fn third_moment_formula_has_unit_trace() {
    for (n, p) in [(1usize, 2u32), (2, 2), (2, 3)] {
        let m = third_moment_formula(n, p).unwrap();
        assert!((m.trace().re - 1.0).abs() < 1e-12 && m.trace().im.abs() < 1e-12);
    }
}
