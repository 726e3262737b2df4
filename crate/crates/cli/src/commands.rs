//! Experiment subcommands.

use anyhow::{anyhow, bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use stabnet::experiments::{
    all_boundary_regions, fourpartite_trials, ghz_trials, moment_comparison, rt_experiment, summarize_fourpartite, summarize_ghz, GhzTrial,
};
use stabnet::moments::{self, Mode};
use stabnet::spin::ratio_to_f64;
use stabnet::tableau::stabilizer_state_count;
use stabnet::{NetworkGraph, SpinModel};

use crate::output::{to_rows, Report};
use crate::{Common, Shape};

/// Largest boundary for which `rt` enumerates every region.
const MAX_ENUMERATED_BOUNDARY: usize = 10;
/// Largest ensemble averaged exhaustively by `moments`.
const MAX_EXHAUSTIVE_STATES: u128 = 200_000;

fn config(command: &str, c: &Common, g: &NetworkGraph) -> Value {
    json!({"command": command, "graph": g.to_spec(), "seed": c.seed, "trials": c.trials})
}

/// Named regions that must partition the boundary.
pub fn partition<'a, const K: usize>(g: &'a NetworkGraph, names: [&str; K]) -> Result<[&'a [usize]; K]> {
    let mut out: [&[usize]; K] = [&[]; K];
    for (slot, name) in out.iter_mut().zip(names) {
        *slot = g.region(name).map_err(|_| anyhow!("graph has no region {name:?}; expected regions {names:?}"))?;
    }
    let mut covered: Vec<usize> = out.iter().flat_map(|r| r.iter().copied()).collect();
    covered.sort_unstable();
    if covered != g.boundary() {
        bail!("regions {names:?} must partition the boundary vertices");
    }
    Ok(out)
}

pub fn rt(c: &Common) -> Result<Report> {
    let g = c.graph(Shape::Star)?;
    let regions: Vec<(String, Vec<usize>)> = if g.boundary().len() <= MAX_ENUMERATED_BOUNDARY {
        all_boundary_regions(&g)
    } else {
        g.regions().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    };
    let rep = rt_experiment(&g, &regions, c.trials, c.seed, c.workers)?;
    let summary = json!({
        "trials": rep.trials,
        "nonzero": rep.nonzero,
        "full_trace": rep.full_trace,
        "epsilon": rep.epsilon,
        "upper_bound_violations": rep.rows.iter().filter(|r| r.upper_violated).count(),
    });
    Ok(Report::new(config("rt", c, &g), to_rows(&rep.rows)?, summary))
}

fn ghz_row(r: &GhzTrial) -> Value {
    let k = r.content;
    json!({
        "trial": r.trial,
        "nonzero": r.nonzero,
        "full_trace": r.full_trace,
        "log_trace": r.log_trace,
        "a": k.map(|k| k.a),
        "b": k.map(|k| k.b),
        "c": k.map(|k| k.c),
        "g": k.map(|k| k.g),
        "log_pt3": r.log_pt3,
    })
}

pub fn ghz(c: &Common) -> Result<Report> {
    let g = c.graph(Shape::Star)?;
    let regions = partition(&g, ["A", "B", "C"])?;
    let rows = ghz_trials(&g, regions, c.trials, c.seed, c.workers)?;
    let summary = serde_json::to_value(summarize_ghz(&g, regions, &rows)?)?;
    Ok(Report::new(config("ghz", c, &g), rows.iter().map(ghz_row).collect(), summary))
}

pub fn fourpartite(c: &Common) -> Result<Report> {
    let g = c.graph(Shape::Cross)?;
    let regions = partition(&g, ["A", "B", "C", "D"])?;
    let rows = fourpartite_trials(&g, regions, c.trials, c.seed, c.workers)?;
    let summary = serde_json::to_value(summarize_fourpartite(&rows, 2.0))?;
    Ok(Report::new(config("fourpartite", c, &g), to_rows(&rows)?, summary))
}

pub fn spinmodel(c: &Common) -> Result<Report> {
    let g = c.graph(Shape::Star)?;
    let [a, b, cc] = partition(&g, ["A", "B", "C"])?;
    let model = SpinModel::new(g.p())?;
    let pred = model.moment_prediction(&g, a, b, cc)?;
    let ground = model.ground_state(&g, a, b, cc)?;
    let bound = stabnet::spin::ghz_bound(&g, a, b, cc)?;
    let rows = pred.energies.iter().map(|(e, n)| json!({"energy": e, "configurations": n})).collect();
    let sampled = if c.trials > 0 { Some(moment_comparison(&g, [a, b, cc], c.trials, c.seed, c.workers)?) } else { None };
    let summary = json!({
        "e0": ground.e0,
        "degeneracy": ground.degeneracy,
        "prediction": format!("{}/{}", pred.exact.numer(), pred.exact.denom()),
        "prediction_f64": ratio_to_f64(&pred.exact),
        "careful_bound": format!("{}/{}", pred.careful_bound.numer(), pred.careful_bound.denom()),
        "careful_bound_f64": ratio_to_f64(&pred.careful_bound),
        "ghz_bound": bound,
        "sampled": sampled,
    });
    Ok(Report::new(config("spinmodel", c, &g), rows, summary))
}

pub fn moments(c: &Common, n: usize, words: usize) -> Result<Report> {
    let p = c.p.unwrap_or(2);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let exhaustive = stabilizer_state_count(n as u32, p) <= MAX_EXHAUSTIVE_STATES;
    let mut rows = Vec::new();
    if p != 2 && n == 1 {
        rows.push(json!({"check": "third moment", "n": n, "p": p, "skipped": "single odd-dimensional qudit is outside the formula"}));
    } else if exhaustive {
        rows.push(serde_json::to_value(moments::third_moment_check(n, p)?)?);
    } else {
        rows.push(serde_json::to_value(moments::sampled_third_moment_check(n, p, c.trials, &mut rng)?)?);
    }
    let second = if exhaustive {
        moments::second_moment_check(n, p, Mode::<ChaCha8Rng>::Exhaustive)?
    } else {
        moments::second_moment_check(n, p, Mode::MonteCarlo { trials: c.trials, rng: &mut rng })?
    };
    rows.push(serde_json::to_value(second)?);
    rows.push(serde_json::to_value(moments::commutant_check(n, p, words, &mut rng)?)?);
    if p != 2 {
        rows.push(serde_json::to_value(moments::negative_control(n, p)?)?);
    }
    let independence = if n >= 2 { Some(moments::independence_check(n, p)?) } else { None };
    let orbit = moments::orbit_check(p)?;
    let pass = rows.iter().all(|r| r.get("pass").and_then(Value::as_bool).unwrap_or(true))
        && independence.as_ref().is_none_or(|r| r.pass)
        && orbit.pass;
    let summary = json!({"independence": independence, "orbits": orbit, "pass": pass});
    let config = json!({"command": "moments", "p": p, "qudits": n, "seed": c.seed, "trials": c.trials, "words": words});
    Ok(Report::new(config, rows, summary))
}
