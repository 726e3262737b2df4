//! Minimal cuts of boundary regions.
//!
//! A cut for a boundary region `A` is a vertex set `V_A` with
//! `V_A ∩ V_∂ = A`; its size is the number of edges leaving it. Sizes are
//! found by max-flow, and the full list of minimal cuts by enumerating bulk
//! subsets.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkGraph;

/// Largest bulk for which minimal cuts are enumerated.
pub const MAX_ENUMERATED_BULK: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutReport {
    pub region: Vec<usize>,
    /// `|γ_A|`, the minimal number of cut edges.
    pub min_cut_edges: usize,
    /// `N·|γ_A|`.
    pub s_rt: usize,
    /// `#_A`; `None` when the bulk is too large to enumerate.
    pub num_min_cuts: Option<usize>,
    /// Every minimal `V_A` as a sorted vertex list (boundary part included).
    pub min_cut_list: Option<Vec<Vec<usize>>>,
}

/// Number of edges with exactly one endpoint in `set`.
pub fn cut_size(g: &NetworkGraph, set: &[usize]) -> usize {
    let mut inside = vec![false; g.num_vertices()];
    for &v in set {
        inside[v] = true;
    }
    g.edges().iter().filter(|&&(u, v)| inside[u] != inside[v]).count()
}

fn check_region(g: &NetworkGraph, region: &[usize]) -> Result<()> {
    let mut seen = HashSet::new();
    for &v in region {
        if v >= g.num_vertices() {
            return Err(Error::IndexOutOfRange { index: v, len: g.num_vertices() });
        }
        if !g.is_boundary(v) {
            return Err(Error::InvalidSubset(format!("{:?} is not a boundary vertex", g.name(v))));
        }
        if !seen.insert(v) {
            return Err(Error::InvalidSubset(format!("{:?} repeated", g.name(v))));
        }
    }
    Ok(())
}

/// Max-flow from `region` to the rest of the boundary, treating each edge
/// as a unit capacity in both directions.
pub fn max_flow(g: &NetworkGraph, region: &[usize]) -> Result<usize> {
    check_region(g, region)?;
    let nv = g.num_vertices();
    let (s, t) = (nv, nv + 1);
    let size = nv + 2;
    let mut cap = vec![vec![0i64; size]; size];
    for &(u, v) in g.edges() {
        cap[u][v] += 1;
        cap[v][u] += 1;
    }
    let in_region: HashSet<usize> = region.iter().copied().collect();
    let inf = g.edges().len() as i64 + 1;
    for b in g.boundary() {
        if in_region.contains(&b) {
            cap[s][b] = inf;
        } else {
            cap[b][t] = inf;
        }
    }
    let mut flow = 0usize;
    loop {
        let mut parent = vec![usize::MAX; size];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for v in 0..size {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return Ok(flow);
        }
        let mut bottleneck = i64::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        flow += bottleneck as usize;
    }
}

/// Calls `f(mask, size)` for every subset of the bulk, where bit `i` of
/// `mask` selects `g.bulk()[i]` and the cut contains `region` as well.
fn for_each_bulk_subset(g: &NetworkGraph, region: &[usize], mut f: impl FnMut(u32, usize)) -> Result<()> {
    let bulk = g.bulk();
    if bulk.len() > MAX_ENUMERATED_BULK {
        return Err(Error::CapExceeded { what: "bulk vertices", value: bulk.len() as u128, cap: MAX_ENUMERATED_BULK as u128 });
    }
    // Each edge endpoint is either a fixed boundary membership or a bulk bit.
    #[derive(Clone, Copy)]
    enum End {
        Fixed(bool),
        Bit(u32),
    }
    let mut bit_of = vec![None; g.num_vertices()];
    for (i, &x) in bulk.iter().enumerate() {
        bit_of[x] = Some(i as u32);
    }
    let in_region: HashSet<usize> = region.iter().copied().collect();
    let end = |v: usize| match bit_of[v] {
        Some(b) => End::Bit(b),
        None => End::Fixed(in_region.contains(&v)),
    };
    let ends: Vec<(End, End)> = g.edges().iter().map(|&(u, v)| (end(u), end(v))).collect();
    for mask in 0u32..(1u32 << bulk.len()) {
        let side = |e: End| match e {
            End::Fixed(b) => b,
            End::Bit(i) => mask >> i & 1 == 1,
        };
        let size = ends.iter().filter(|&&(a, b)| side(a) != side(b)).count();
        f(mask, size);
    }
    Ok(())
}

fn mask_to_set(g: &NetworkGraph, region: &[usize], mask: u32) -> Vec<usize> {
    let mut set: Vec<usize> = region.to_vec();
    set.extend(g.bulk().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x));
    set.sort_unstable();
    set
}

pub fn min_cut(g: &NetworkGraph, region: &[usize]) -> Result<CutReport> {
    let flow = max_flow(g, region)?;
    let mut region_sorted = region.to_vec();
    region_sorted.sort_unstable();
    let mut masks = Vec::new();
    let enumerated = for_each_bulk_subset(g, &region_sorted, |mask, size| {
        if size == flow {
            masks.push(mask);
        } else if size < flow {
            masks.push(u32::MAX);
        }
    });
    let (num, list) = match enumerated {
        Ok(()) => {
            if masks.contains(&u32::MAX) || masks.is_empty() {
                return Err(Error::Internal("max-flow value disagrees with the minimal cut".into()));
            }
            let list: Vec<Vec<usize>> = masks.iter().map(|&m| mask_to_set(g, &region_sorted, m)).collect();
            (Some(list.len()), Some(list))
        }
        Err(Error::CapExceeded { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(CutReport {
        region: region_sorted,
        min_cut_edges: flow,
        s_rt: flow * g.bond_exponent() as usize,
        num_min_cuts: num,
        min_cut_list: list,
    })
}

/// Connected components of the bulk left after removing the three cuts.
pub fn residual_components(g: &NetworkGraph, cuts: [&[usize]; 3]) -> Result<usize> {
    let mut taken = vec![false; g.num_vertices()];
    for cut in cuts {
        for &v in cut {
            if v >= g.num_vertices() {
                return Err(Error::IndexOutOfRange { index: v, len: g.num_vertices() });
            }
            if taken[v] {
                return Err(Error::InvalidSubset(format!("cuts overlap at {:?}", g.name(v))));
            }
            taken[v] = true;
        }
    }
    let adj = g.adjacency();
    let mut seen = taken;
    for b in g.boundary() {
        seen[b] = true;
    }
    let mut count = 0;
    for start in g.bulk() {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    Ok(count)
}

/// Residual component counts over all pairwise-disjoint minimal-cut triples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `(i, j, k, components)` indexing into the three min-cut lists.
    pub per_triple: Vec<(usize, usize, usize, usize)>,
    /// `#_b`; `None` if no disjoint triple exists.
    pub max_components: Option<usize>,
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| !b.contains(v))
}

pub fn residual_report(g: &NetworkGraph, a: &CutReport, b: &CutReport, c: &CutReport) -> Result<ResidualReport> {
    let unavailable = || Error::CapExceeded { what: "bulk vertices", value: g.bulk().len() as u128, cap: MAX_ENUMERATED_BULK as u128 };
    let la = a.min_cut_list.as_ref().ok_or_else(unavailable)?;
    let lb = b.min_cut_list.as_ref().ok_or_else(unavailable)?;
    let lc = c.min_cut_list.as_ref().ok_or_else(unavailable)?;
    let mut per_triple = Vec::new();
    for (i, va) in la.iter().enumerate() {
        for (j, vb) in lb.iter().enumerate() {
            if !disjoint(va, vb) {
                continue;
            }
            for (k, vc) in lc.iter().enumerate() {
                if disjoint(va, vc) && disjoint(vb, vc) {
                    per_triple.push((i, j, k, residual_components(g, [va, vb, vc])?));
                }
            }
        }
    }
    let max_components = per_triple.iter().map(|t| t.3).max();
    Ok(ResidualReport { per_triple, max_components })
}

/// For disjoint regions `A`, `B`: whenever minimal cuts `V_A`, `V_B` meet
/// in `V_0`, either `V_A \ V_0` is minimal for `A` or `V_B \ V_0` is
/// minimal for `B`.
pub fn disjointness_check(g: &NetworkGraph, a: &[usize], b: &[usize]) -> Result<bool> {
    if !disjoint(a, b) {
        return Err(Error::InvalidSubset("regions overlap".into()));
    }
    let ca = min_cut(g, a)?;
    let cb = min_cut(g, b)?;
    let (Some(la), Some(lb)) = (&ca.min_cut_list, &cb.min_cut_list) else {
        return Err(Error::CapExceeded { what: "bulk vertices", value: g.bulk().len() as u128, cap: MAX_ENUMERATED_BULK as u128 });
    };
    for va in la {
        for vb in lb {
            let v0: Vec<usize> = va.iter().copied().filter(|v| vb.contains(v)).collect();
            if v0.is_empty() {
                continue;
            }
            let ra: Vec<usize> = va.iter().copied().filter(|v| !v0.contains(v)).collect();
            let rb: Vec<usize> = vb.iter().copied().filter(|v| !v0.contains(v)).collect();
            if cut_size(g, &ra) != ca.min_cut_edges && cut_size(g, &rb) != cb.min_cut_edges {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
