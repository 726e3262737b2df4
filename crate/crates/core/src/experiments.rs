//! Seeded, trial-parallel experiments on random stabilizer networks.
//!
//! Trial `i` draws from its own `ChaCha8Rng` seeded with
//! [`trial_seed`]`(master, i)`, and results are collected in trial order, so
//! output does not depend on the number of workers.

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{entropy, fourpartite_report, ghz_content, i3_all_choices, pt_moment3, GhzContent};
use crate::error::{Error, Result};
use crate::geometry::min_cut;
use crate::network::{build_random_network, NetworkGraph, NetworkState};
use crate::spin::{ghz_bound, ratio_to_f64, GhzBound, SpinModel};

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under master seed `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Runs `f(i, rng_i)` for `i < trials` and returns results in trial order.
/// `workers = None` uses the global pool.
pub fn run_trials<T, F>(master: u64, trials: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    let job = || {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master, i as u64));
                f(i, &mut rng)
            })
            .collect::<Result<Vec<T>>>()
    };
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build().map_err(|e| Error::Internal(e.to_string()))?.install(job),
        None => job(),
    }
}

/// `2^{|V|} / p^N`.
pub fn epsilon(g: &NetworkGraph) -> f64 {
    2f64.powi(g.num_vertices() as i32) / (g.p() as f64).powi(g.bond_exponent() as i32)
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn qudits_of(g: &NetworkGraph, vertices: &[usize]) -> Result<Vec<usize>> {
    g.boundary_subsystem(vertices)
}

// ---------------------------------------------------------------------------
// Trace quantization

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport {
    pub trials: usize,
    pub nonzero: usize,
    pub full_trace: usize,
    /// Samples whose trace is not `p^{k − N_b}` with `0 ≤ k ≤ N_b`.
    pub violations: usize,
    /// Counts of `k` for nonzero samples.
    pub trace_rank_histogram: Vec<usize>,
    pub epsilon: f64,
    /// `1 − ε`, floored at 0.
    pub lower_bound: f64,
    /// `(observed − bound) / σ` for the full-trace fraction; large negative values fail.
    pub z: f64,
}

pub fn trace_quantization(g: &NetworkGraph, trials: usize, seed: u64, workers: Option<usize>) -> Result<QuantizationReport> {
    let nb = g.projected_qudits();
    let states = run_trials(seed, trials, workers, |_, rng| build_random_network(g, rng).map(|s| s.trace_rank()))?;
    let mut hist = vec![0usize; nb + 1];
    let mut violations = 0;
    let mut nonzero = 0;
    for k in states.iter().flatten() {
        nonzero += 1;
        if (0..=nb as i64).contains(k) {
            hist[*k as usize] += 1;
        } else {
            violations += 1;
        }
    }
    let full = hist[0];
    let eps = epsilon(g);
    let bound = (1.0 - eps).max(0.0);
    let frac = full as f64 / trials as f64;
    let sigma = (bound * (1.0 - bound) / trials as f64).sqrt().max(1.0 / trials as f64);
    Ok(QuantizationReport {
        trials,
        nonzero,
        full_trace: full,
        violations,
        trace_rank_histogram: hist,
        epsilon: eps,
        lower_bound: bound,
        z: (frac - bound) / sigma,
    })
}

// ---------------------------------------------------------------------------
// Entropies against minimal cuts

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RtRow {
    pub region: String,
    pub s_rt: usize,
    pub num_min_cuts: Option<usize>,
    /// `⟨S(A)⟩` over nonzero samples.
    pub mean_s_nonzero: f64,
    pub stderr_nonzero: f64,
    /// `⟨S(A)⟩` over samples with `tr Ψ = p^{-N_b}`.
    pub mean_s_full_trace: f64,
    pub min_s: i64,
    pub max_s: i64,
    /// `S_RT − ⟨S⟩_{≠0}`.
    pub gap: f64,
    /// `S_RT − log_p #_A − 4ε`.
    pub lower_bound: f64,
    /// Some sample exceeded `S_RT`.
    pub upper_violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RtReport {
    pub trials: usize,
    pub nonzero: usize,
    pub full_trace: usize,
    pub epsilon: f64,
    pub rows: Vec<RtRow>,
}

pub fn rt_experiment(
    g: &NetworkGraph,
    regions: &[(String, Vec<usize>)],
    trials: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<RtReport> {
    let qudits = regions.iter().map(|(_, r)| qudits_of(g, r)).collect::<Result<Vec<_>>>()?;
    let samples = run_trials(seed, trials, workers, |_, rng| {
        let s = build_random_network(g, rng)?;
        let full = s.has_full_trace();
        Ok(match s.tableau {
            None => None,
            Some(t) => Some((full, qudits.iter().map(|q| entropy(&t, q)).collect::<Result<Vec<i64>>>()?)),
        })
    })?;
    let eps = epsilon(g);
    let p = g.p() as f64;
    let nonzero: Vec<&(bool, Vec<i64>)> = samples.iter().flatten().collect();
    let mut rows = Vec::new();
    for (i, (name, region)) in regions.iter().enumerate() {
        let cut = min_cut(g, region)?;
        let all: Vec<f64> = nonzero.iter().map(|(_, s)| s[i] as f64).collect();
        let full: Vec<f64> = nonzero.iter().filter(|(f, _)| *f).map(|(_, s)| s[i] as f64).collect();
        let (mean, se) = mean_stderr(&all);
        let (mean_full, _) = mean_stderr(&full);
        let num = cut.num_min_cuts.unwrap_or(1).max(1) as f64;
        let max_s = nonzero.iter().map(|(_, s)| s[i]).max().unwrap_or(0);
        rows.push(RtRow {
            region: name.clone(),
            s_rt: cut.s_rt,
            num_min_cuts: cut.num_min_cuts,
            mean_s_nonzero: mean,
            stderr_nonzero: se,
            mean_s_full_trace: mean_full,
            min_s: nonzero.iter().map(|(_, s)| s[i]).min().unwrap_or(0),
            max_s,
            gap: cut.s_rt as f64 - mean,
            lower_bound: cut.s_rt as f64 - num.ln() / p.ln() - 4.0 * eps,
            upper_violated: max_s > cut.s_rt as i64,
        });
    }
    Ok(RtReport { trials, nonzero: nonzero.len(), full_trace: nonzero.iter().filter(|(f, _)| *f).count(), epsilon: eps, rows })
}

/// Every subset of the boundary, named by its vertex names joined with `+`
/// (`∅` for the empty set).
pub fn all_boundary_regions(g: &NetworkGraph) -> Vec<(String, Vec<usize>)> {
    let b = g.boundary();
    (0u64..1 << b.len())
        .map(|mask| {
            let r: Vec<usize> = b.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
            let name = if r.is_empty() { "∅".to_string() } else { r.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join("+") };
            (name, r)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// GHZ content

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzTrial {
    pub trial: usize,
    pub nonzero: bool,
    pub full_trace: bool,
    /// `t` with `tr Ψ = p^t`.
    pub log_trace: Option<i64>,
    pub content: Option<GhzContent>,
    /// `log_p tr (Ψ_AB^{T_B})³` for the unnormalized state.
    pub log_pt3: Option<i64>,
}

fn tripartite(g: &NetworkGraph, regions: [&[usize]; 3]) -> Result<[Vec<usize>; 3]> {
    Ok([qudits_of(g, regions[0])?, qudits_of(g, regions[1])?, qudits_of(g, regions[2])?])
}

fn ghz_of_state(s: &NetworkState, q: &[Vec<usize>; 3], trial: usize) -> Result<GhzTrial> {
    let full = s.has_full_trace();
    match &s.tableau {
        None => Ok(GhzTrial { trial, nonzero: false, full_trace: false, log_trace: None, content: None, log_pt3: None }),
        Some(t) => {
            let m = pt_moment3(t, &q[0], &q[1])?;
            Ok(GhzTrial {
                trial,
                nonzero: true,
                full_trace: full,
                log_trace: Some(t.log_trace()),
                content: Some(ghz_content(t, &q[0], &q[1], &q[2])?),
                log_pt3: Some(3 * t.log_trace() - m),
            })
        }
    }
}

pub fn ghz_trials(g: &NetworkGraph, regions: [&[usize]; 3], trials: usize, seed: u64, workers: Option<usize>) -> Result<Vec<GhzTrial>> {
    let q = tripartite(g, regions)?;
    run_trials(seed, trials, workers, |i, rng| ghz_of_state(&build_random_network(g, rng)?, &q, i))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzSummary {
    pub trials: usize,
    pub nonzero: usize,
    pub full_trace: usize,
    /// `⟨g⟩_{≠0}`.
    pub mean_g: f64,
    pub stderr_g: f64,
    /// `⟨g⟩` over full-trace samples.
    pub mean_g_full_trace: f64,
    pub max_g: i64,
    pub bound: GhzBound,
}

pub fn summarize_ghz(g: &NetworkGraph, regions: [&[usize]; 3], rows: &[GhzTrial]) -> Result<GhzSummary> {
    let gs: Vec<f64> = rows.iter().filter_map(|r| r.content.map(|c| c.g as f64)).collect();
    let full: Vec<f64> = rows.iter().filter(|r| r.full_trace).filter_map(|r| r.content.map(|c| c.g as f64)).collect();
    let (mean, se) = mean_stderr(&gs);
    Ok(GhzSummary {
        trials: rows.len(),
        nonzero: gs.len(),
        full_trace: full.len(),
        mean_g: mean,
        stderr_g: se,
        mean_g_full_trace: mean_stderr(&full).0,
        max_g: rows.iter().filter_map(|r| r.content.map(|c| c.g)).max().unwrap_or(0),
        bound: ghz_bound(g, regions[0], regions[1], regions[2])?,
    })
}

// ---------------------------------------------------------------------------
// Moment prediction against sampling

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentComparison {
    pub trials: usize,
    pub e0: u32,
    pub degeneracy: u64,
    pub prediction: f64,
    /// Exact rational, as `numerator/denominator`.
    pub prediction_exact: String,
    pub careful_bound: f64,
    pub sample_mean: f64,
    pub stderr: f64,
    pub z: f64,
}

/// Sampled `⟨tr (Ψ_AB^{T_B})³⟩` (zero samples included) against the
/// spin-model prediction.
pub fn moment_comparison(
    g: &NetworkGraph,
    regions: [&[usize]; 3],
    trials: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<MomentComparison> {
    let model = SpinModel::new(g.p())?;
    let pred = model.moment_prediction(g, regions[0], regions[1], regions[2])?;
    let gs = model.ground_state(g, regions[0], regions[1], regions[2])?;
    let rows = ghz_trials(g, regions, trials, seed, workers)?;
    let p = g.p() as f64;
    let values: Vec<f64> = rows.iter().map(|r| r.log_pt3.map_or(0.0, |e| p.powi(e as i32))).collect();
    let (mean, se) = mean_stderr(&values);
    let prediction = ratio_to_f64(&pred.exact);
    Ok(MomentComparison {
        trials,
        e0: gs.e0,
        degeneracy: gs.degeneracy,
        prediction,
        prediction_exact: rational_string(&pred.exact),
        careful_bound: ratio_to_f64(&pred.careful_bound),
        sample_mean: mean,
        stderr: se,
        z: (mean - prediction) / se,
    })
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

// ---------------------------------------------------------------------------
// Four-party accounting

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourpartiteTrial {
    pub trial: usize,
    pub nonzero: bool,
    pub t: Option<[[i64; 4]; 4]>,
    pub i3: Option<i64>,
    pub residual_entropies: Option<[i64; 4]>,
    pub g_max: Option<i64>,
    /// `max_i |residual_i + I₃/2|`.
    pub max_residual_deviation: Option<f64>,
    /// Every choice of three parties, `I₃`.
    pub i3_choices: Option<Vec<i64>>,
}

pub fn fourpartite_trials(
    g: &NetworkGraph,
    regions: [&[usize]; 4],
    trials: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<FourpartiteTrial>> {
    let q = [qudits_of(g, regions[0])?, qudits_of(g, regions[1])?, qudits_of(g, regions[2])?, qudits_of(g, regions[3])?];
    run_trials(seed, trials, workers, |i, rng| {
        let s = build_random_network(g, rng)?;
        let Some(t) = s.tableau else {
            return Ok(FourpartiteTrial {
                trial: i,
                nonzero: false,
                t: None,
                i3: None,
                residual_entropies: None,
                g_max: None,
                max_residual_deviation: None,
                i3_choices: None,
            });
        };
        let parts = [q[0].as_slice(), q[1].as_slice(), q[2].as_slice(), q[3].as_slice()];
        let rep = fourpartite_report(&t, parts)?;
        let target = -(rep.i3 as f64) / 2.0;
        let dev = rep.residual_entropies.iter().map(|&r| (r as f64 - target).abs()).fold(0.0, f64::max);
        Ok(FourpartiteTrial {
            trial: i,
            nonzero: true,
            t: Some(rep.t),
            i3: Some(rep.i3),
            residual_entropies: Some(rep.residual_entropies),
            g_max: Some(rep.g_max()),
            max_residual_deviation: Some(dev),
            i3_choices: Some(i3_all_choices(&t, parts)?),
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourpartiteSummary {
    pub trials: usize,
    pub nonzero: usize,
    pub max_residual_deviation: f64,
    /// Residual window used for `within_window`, in `log p` units.
    pub window: f64,
    pub within_window: usize,
    /// Samples with `I₃ > 3·g_max`.
    pub monogamy_violations: usize,
}

pub fn summarize_fourpartite(rows: &[FourpartiteTrial], window: f64) -> FourpartiteSummary {
    let nz: Vec<&FourpartiteTrial> = rows.iter().filter(|r| r.nonzero).collect();
    FourpartiteSummary {
        trials: rows.len(),
        nonzero: nz.len(),
        max_residual_deviation: nz.iter().filter_map(|r| r.max_residual_deviation).fold(0.0, f64::max),
        window,
        within_window: nz.iter().filter(|r| r.max_residual_deviation.is_some_and(|d| d <= window)).count(),
        monogamy_violations: nz.iter().filter(|r| matches!((r.i3, r.g_max), (Some(i3), Some(gm)) if i3 > 3 * gm)).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..1000).map(|i| trial_seed(7, i)).collect();
        let set: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), 1000);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
        assert_ne!(trial_seed(7, 3), trial_seed(8, 3));
    }

    #[test]
    fn results_independent_of_workers() {
        let g = NetworkGraph::star(3, 1, 3).unwrap();
        let r1 = ghz_trials(&g, [&[1], &[2], &[3]], 40, 5, Some(1)).unwrap();
        let r4 = ghz_trials(&g, [&[1], &[2], &[3]], 40, 5, Some(4)).unwrap();
        assert_eq!(r1, r4);
    }

    #[test]
    fn bell_lattice_saturates() {
        let g = NetworkGraph::new(3, 2, 2, &[0, 1], &[(0, 1)]).unwrap();
        let rep = rt_experiment(&g, &all_boundary_regions(&g), 5, 1, None).unwrap();
        for row in &rep.rows {
            assert_eq!(row.gap, 0.0);
        }
        assert_eq!(rep.rows[0].mean_s_nonzero, 0.0);
    }
}
