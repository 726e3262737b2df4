//! Invariant suite behind `stabnet verify`.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use stabnet::entropy::{entropy, ghz_content, pt_moment3};
use stabnet::experiments::run_trials;
use stabnet::geometry::{cut_size, max_flow, min_cut};
use stabnet::{build_random_network, moments, FpMatrix, NetworkGraph, PrimeField, Projected, SpinModel, StabilizerTableau, WeylOperator};

use crate::output::Report;
use crate::{Common, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Perturb one off-diagonal entry of the spin distance table.
    DistanceTable,
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn field_rref(rng: &mut ChaCha8Rng, p: u32) -> Check {
    let f = PrimeField::new(p).map_err(e)?;
    for _ in 0..50 {
        let m = FpMatrix::random(f, rng.gen_range(1..7), rng.gen_range(1..7), rng);
        let (r, _) = m.rref();
        ensure(r.rref().0 == r, || "rref is not idempotent".into())?;
        ensure(r.rank() == m.rank(), || "rank changed under elimination".into())?;
        for row in m.row_vecs() {
            ensure(r.express_in_rows(&row).map_err(e)?.is_some(), || "row space changed".into())?;
        }
    }
    Ok("50 random matrices".into())
}

fn tableau_quantization(rng: &mut ChaCha8Rng, p: u32) -> Check {
    for _ in 0..100 {
        let n = rng.gen_range(2..6);
        let mut t = StabilizerTableau::zero_state(p, n);
        for _ in 0..n {
            let g = WeylOperator::random(p, n, rng);
            let g = if p == 2 { g.clone().with_phase(g.phase() & 2) } else { g };
            match t.postselect(&g).map_err(e)? {
                Projected::Zero => break,
                Projected::State(next) => {
                    next.validate().map_err(e)?;
                    ensure(next.log_trace() <= t.log_trace(), || "trace grew under projection".into())?;
                    t = next;
                }
            }
        }
    }
    Ok("100 projection sequences".into())
}

fn ghz_accounting(rng: &mut ChaCha8Rng, p: u32) -> Check {
    for _ in 0..100 {
        let n = rng.gen_range(2..7);
        let t = StabilizerTableau::sample_uniform(n, p, rng).map_err(e)?;
        let mut parts: [Vec<usize>; 3] = Default::default();
        for q in 0..n {
            parts[rng.gen_range(0..3)].push(q);
        }
        let [a, b, c] = &parts;
        let k = ghz_content(&t, a, b, c).map_err(e)?;
        ensure(pt_moment3(&t, a, b).map_err(e)? == 2 * (k.a + k.b + k.c + k.g), || format!("m ≠ 2(a+b+c+g) for {k:?}"))?;
        ensure(k.g.rem_euclid(2) == k.local_entropy_sum().rem_euclid(2), || "GHZ parity".into())?;
        let comp: Vec<usize> = (0..n).filter(|q| !a.contains(q)).collect();
        ensure(entropy(&t, a).map_err(e)? == entropy(&t, &comp).map_err(e)?, || "S(A) ≠ S(Aᶜ)".into())?;
    }
    Ok("100 tripartite states".into())
}

fn spin_metric(model: &SpinModel) -> Check {
    let q = model.elements().len();
    ensure(q == 2 * model.p() as usize + 2, || format!("{q} spin values"))?;
    for a in 0..q {
        for b in 0..q {
            let d = model.distance(a, b);
            ensure(d == model.distance(b, a), || format!("d({a},{b}) ≠ d({b},{a})"))?;
            ensure((d == 0) == (a == b), || format!("d({a},{b}) = {d}"))?;
            for c in 0..q {
                ensure(model.distance(a, c) <= d + model.distance(b, c), || format!("triangle inequality at ({a},{b},{c})"))?;
            }
        }
    }
    Ok(format!("{q} spin values"))
}

fn spin_distances_match_subspaces(model: &SpinModel) -> Check {
    let elems = model.elements();
    for (i, a) in elems.iter().enumerate() {
        a.validate().map_err(e)?;
        for (j, b) in elems.iter().enumerate() {
            let d = a.distance(b).map_err(e)?;
            ensure(model.distance(i, j) == d, || format!("table d({i},{j}) = {} but subspaces give {d}", model.distance(i, j)))?;
        }
    }
    Ok("table agrees with subspace intersections".into())
}

fn geometry_duality(g: &NetworkGraph) -> Check {
    let nv = g.num_vertices();
    for region in stabnet::experiments::all_boundary_regions(g).iter().map(|(_, r)| r) {
        let r = min_cut(g, region).map_err(e)?;
        ensure(max_flow(g, region).map_err(e)? == r.min_cut_edges, || format!("flow ≠ cut for {region:?}"))?;
        for v in r.min_cut_list.unwrap_or_default() {
            let rest: Vec<usize> = (0..nv).filter(|x| !v.contains(x)).collect();
            ensure(cut_size(g, &v) == cut_size(g, &rest), || "cut not complement-symmetric".into())?;
        }
    }
    Ok("flow equals minimal cut on every boundary region".into())
}

fn network_bounds(g: &NetworkGraph, rng: &mut ChaCha8Rng) -> Check {
    let nb = g.projected_qudits() as i64;
    let regions = stabnet::experiments::all_boundary_regions(g);
    for _ in 0..20 {
        let s = build_random_network(g, rng).map_err(e)?;
        let Some(t) = &s.tableau else { continue };
        let k = t.log_trace() + nb;
        ensure((0..=nb).contains(&k), || format!("trace exponent {} outside [−N_b, 0]", t.log_trace()))?;
        for (name, r) in &regions {
            let s_a = entropy(t, &g.boundary_subsystem(r).map_err(e)?).map_err(e)?;
            let s_rt = min_cut(g, r).map_err(e)?.s_rt as i64;
            ensure(s_a <= s_rt, || format!("S({name}) = {s_a} > S_RT = {s_rt}"))?;
        }
    }
    Ok("20 networks".into())
}

fn third_moment() -> Check {
    let r = moments::third_moment_check(1, 2).map_err(e)?;
    ensure(r.pass, || format!("deviation {:.3e}", r.max_abs_deviation))?;
    Ok(format!("deviation {:.2e}", r.max_abs_deviation))
}

fn commutant(rng: &mut ChaCha8Rng) -> Check {
    let r = moments::commutant_check(1, 3, 5, rng).map_err(e)?;
    ensure(r.pass, || format!("commutator {:.3e}", r.max_abs_deviation))?;
    let control = moments::negative_control(1, 3).map_err(e)?;
    ensure(control.pass, || "non-Clifford gate passed the commutant check".into())?;
    Ok(format!("commutator {:.2e}", r.max_abs_deviation))
}

fn determinism(g: &NetworkGraph, seed: u64) -> Check {
    let build = |w| run_trials(seed, 16, Some(w), |_, rng| build_random_network(g, rng)).map_err(e);
    let (one, many) = (build(1)?, build(4)?);
    ensure(one == many, || "trial results depend on worker count".into())?;
    let draws = |w| run_trials(seed, 8, Some(w), |_, rng| Ok(rng.gen::<u64>())).map_err(e);
    ensure(draws(1)? == draws(3)?, || "seed streams depend on worker count".into())?;
    Ok("1 and 4 workers agree".into())
}

/// Runs every check; returns the report and the first failing check name.
pub fn run(c: &Common, fault: Option<Fault>) -> Result<(Report, Option<String>)> {
    let g = c.graph(Shape::Star)?;
    let p = g.p();
    let mut model = SpinModel::new(p)?;
    if fault == Some(Fault::DistanceTable) {
        let mut table = model.distance_table().to_vec();
        table[0][1] += 1;
        model = model.with_distance_table(table)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let checks: Vec<(&str, Check)> = vec![
        ("field.rref", field_rref(&mut rng, p)),
        ("tableau.trace_quantization", tableau_quantization(&mut rng, p)),
        ("entropy.ghz_accounting", ghz_accounting(&mut rng, p)),
        ("spin.metric", spin_metric(&model)),
        ("spin.distance_table", spin_distances_match_subspaces(&model)),
        ("geometry.flow_cut_duality", geometry_duality(&g)),
        ("network.trace_and_entropy_bounds", network_bounds(&g, &mut rng)),
        ("moments.third_moment", third_moment()),
        ("moments.commutant", commutant(&mut rng)),
        ("experiments.determinism", determinism(&g, c.seed)),
    ];
    let first_failure = checks.iter().find(|(_, r)| r.is_err()).map(|(n, _)| n.to_string());
    let rows = checks
        .iter()
        .map(|(name, r)| match r {
            Ok(d) => json!({"check": name, "pass": true, "detail": d}),
            Err(d) => json!({"check": name, "pass": false, "detail": d}),
        })
        .collect::<Vec<_>>();
    let failed = rows.iter().filter(|r| r["pass"] == false).count();
    let summary = json!({"checks": rows.len(), "failed": failed, "first_failure": first_failure});
    let config = json!({"command": "verify", "graph": g.to_spec(), "seed": c.seed, "fault": fault.map(|_| "distance-table")});
    Ok((Report::new(config, rows, summary), first_failure))
}
