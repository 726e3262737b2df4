//! Random stabilizer tensor networks.
//!
//! Every edge carries `N` maximally entangled qudit pairs. Bulk vertices
//! carry random pure stabilizer tensors on all their edge endpoints, which
//! are projected onto the Bell lattice; boundary endpoints are left open and
//! form the output system.
//!
//! Endpoint qudits are numbered globally: edge `e`, side `s` (0 for the first
//! listed vertex), copy `j` has index `(2e + s)·N + j`. Output qudits appear in
//! ascending global order.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::tableau::{Projected, StabilizerTableau};
use crate::weyl::WeylOperator;

/// Graph description, in the same shape as the JSON input format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub p: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub vertices: Vec<String>,
    pub boundary: Vec<String>,
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub regions: BTreeMap<String, Vec<String>>,
}

/// A validated multigraph with a boundary/bulk split, prime `p` and bond
/// exponent `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkGraph {
    p: u32,
    n: u32,
    names: Vec<String>,
    is_boundary: Vec<bool>,
    edges: Vec<(usize, usize)>,
    regions: BTreeMap<String, Vec<usize>>,
}

impl NetworkGraph {
    /// Builds a graph from indices. Vertex `i` is called `v{i}`.
    pub fn new(p: u32, n: u32, num_vertices: usize, boundary: &[usize], edges: &[(usize, usize)]) -> Result<Self> {
        let mut is_boundary = vec![false; num_vertices];
        for &b in boundary {
            if b >= num_vertices {
                return Err(Error::IndexOutOfRange { index: b, len: num_vertices });
            }
            is_boundary[b] = true;
        }
        let g = Self {
            p,
            n,
            names: (0..num_vertices).map(|i| format!("v{i}")).collect(),
            is_boundary,
            edges: edges.to_vec(),
            regions: BTreeMap::new(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in spec.vertices.iter().enumerate() {
            if index.insert(v.as_str(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex {v:?}")));
            }
        }
        let lookup =
            |v: &str| -> Result<usize> { index.get(v).copied().ok_or_else(|| Error::InvalidGraph(format!("unknown vertex {v:?}"))) };
        let mut is_boundary = vec![false; spec.vertices.len()];
        for b in &spec.boundary {
            is_boundary[lookup(b)?] = true;
        }
        let edges = spec.edges.iter().map(|[u, v]| Ok((lookup(u)?, lookup(v)?))).collect::<Result<Vec<_>>>()?;
        let mut regions = BTreeMap::new();
        for (name, vs) in &spec.regions {
            let mut idx = vs.iter().map(|v| lookup(v)).collect::<Result<Vec<_>>>()?;
            idx.sort_unstable();
            regions.insert(name.clone(), idx);
        }
        let g = Self { p: spec.p, n: spec.n, names: spec.vertices.clone(), is_boundary, edges, regions };
        g.validate()?;
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GraphSpec = serde_json::from_str(text).map_err(|e| Error::InvalidGraph(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            p: self.p,
            n: self.n,
            vertices: self.names.clone(),
            boundary: self.boundary().iter().map(|&b| self.names[b].clone()).collect(),
            edges: self.edges.iter().map(|&(u, v)| [self.names[u].clone(), self.names[v].clone()]).collect(),
            regions: self.regions.iter().map(|(k, vs)| (k.clone(), vs.iter().map(|&v| self.names[v].clone()).collect())).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        PrimeField::new(self.p)?;
        if self.n == 0 {
            return Err(Error::InvalidGraph("bond exponent N must be at least 1".into()));
        }
        let nv = self.names.len();
        if !self.is_boundary.iter().any(|&b| b) {
            return Err(Error::InvalidGraph("boundary is empty".into()));
        }
        let mut seen = HashSet::new();
        for name in &self.names {
            if !seen.insert(name) {
                return Err(Error::InvalidGraph(format!("duplicate vertex {name:?}")));
            }
        }
        for &(u, v) in &self.edges {
            if u >= nv || v >= nv {
                return Err(Error::IndexOutOfRange { index: u.max(v), len: nv });
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {:?}", self.names[u])));
            }
        }
        if !self.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        for (name, vs) in &self.regions {
            if let Some(&v) = vs.iter().find(|&&v| !self.is_boundary[v]) {
                return Err(Error::InvalidGraph(format!("region {name:?} contains bulk vertex {:?}", self.names[v])));
            }
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let nv = self.names.len();
        if nv == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Adds a named region of boundary vertices.
    pub fn with_region(mut self, name: &str, vertices: &[usize]) -> Result<Self> {
        let mut vs = vertices.to_vec();
        vs.sort_unstable();
        self.regions.insert(name.to_string(), vs);
        self.validate()?;
        Ok(self)
    }

    /// Same graph with a different prime and bond exponent.
    pub fn with_params(mut self, p: u32, n: u32) -> Result<Self> {
        self.p = p;
        self.n = n;
        self.validate()?;
        Ok(self)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Bond exponent `N`: each edge has bond dimension `p^N`.
    pub fn bond_exponent(&self) -> u32 {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::InvalidGraph(format!("unknown vertex {name:?}")))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn boundary(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|&v| self.is_boundary[v]).collect()
    }

    pub fn bulk(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|&v| !self.is_boundary[v]).collect()
    }

    pub fn regions(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.regions
    }

    pub fn region(&self, name: &str) -> Result<&[usize]> {
        self.regions.get(name).map(|v| v.as_slice()).ok_or_else(|| Error::InvalidGraph(format!("unknown region {name:?}")))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    /// Neighbors as `(vertex, edge index)`, one entry per parallel edge.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.names.len()];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        adj
    }

    /// `N_b = N · Σ_{x bulk} deg(x)`: the number of projected qudits.
    pub fn projected_qudits(&self) -> usize {
        self.n as usize * self.bulk().iter().map(|&x| self.degree(x)).sum::<usize>()
    }

    /// Total number of endpoint qudits, `2 N |E|`.
    pub fn total_qudits(&self) -> usize {
        2 * self.n as usize * self.edges.len()
    }

    /// Global qudit indices of edge `e`, side `s`.
    pub fn endpoint_qudits(&self, e: usize, side: usize) -> std::ops::Range<usize> {
        let n = self.n as usize;
        let start = (2 * e + side) * n;
        start..start + n
    }

    /// Global qudits owned by vertex `v`, ordered by edge index then side.
    pub fn vertex_qudits(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                out.extend(self.endpoint_qudits(e, 0));
            }
            if b == v {
                out.extend(self.endpoint_qudits(e, 1));
            }
        }
        out
    }

    /// Global indices of the output qudits, ascending.
    pub fn output_qudits(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if self.is_boundary[a] {
                out.extend(self.endpoint_qudits(e, 0));
            }
            if self.is_boundary[b] {
                out.extend(self.endpoint_qudits(e, 1));
            }
        }
        out
    }

    /// Output-qudit positions carried by the listed boundary vertices.
    pub fn boundary_subsystem(&self, region: &[usize]) -> Result<Vec<usize>> {
        for &v in region {
            if v >= self.names.len() {
                return Err(Error::IndexOutOfRange { index: v, len: self.names.len() });
            }
            if !self.is_boundary[v] {
                return Err(Error::InvalidGraph(format!("{:?} is not a boundary vertex", self.names[v])));
            }
        }
        let mine: HashSet<usize> = region.iter().flat_map(|&v| self.vertex_qudits(v)).collect();
        Ok(self.output_qudits().iter().enumerate().filter(|(_, q)| mine.contains(q)).map(|(i, _)| i).collect())
    }

    /// [`Self::boundary_subsystem`] for a named region.
    pub fn region_qudits(&self, name: &str) -> Result<Vec<usize>> {
        let region = self.region(name)?.to_vec();
        self.boundary_subsystem(&region)
    }

    /// One bulk vertex joined to `legs` boundary vertices by single edges.
    /// Boundary vertex `i + 1` forms region `A`, `B`, `C`, `D`, ... in turn.
    pub fn star(p: u32, n: u32, legs: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (1..=legs).map(|b| (0, b)).collect();
        let boundary: Vec<usize> = (1..=legs).collect();
        let mut g = Self::new(p, n, legs + 1, &boundary, &edges)?;
        for i in 0..legs {
            g = g.with_region(&region_label(i), &[i + 1])?;
        }
        Ok(g)
    }

    /// `bulk` bulk vertices on a cycle (a single edge for two, none for
    /// one), each with one boundary leg. Leg `i` forms region `i`.
    pub fn ring(p: u32, n: u32, bulk: usize) -> Result<Self> {
        let mut edges = Vec::new();
        match bulk {
            0 | 1 => {}
            2 => edges.push((0, 1)),
            _ => edges.extend((0..bulk).map(|i| (i, (i + 1) % bulk))),
        }
        edges.extend((0..bulk).map(|i| (i, bulk + i)));
        let boundary: Vec<usize> = (bulk..2 * bulk).collect();
        let mut g = Self::new(p, n, 2 * bulk, &boundary, &edges)?;
        for i in 0..bulk {
            g = g.with_region(&region_label(i), &[bulk + i])?;
        }
        Ok(g)
    }

    /// 2×2 grid of bulk vertices (a 4-cycle), each with one boundary leg.
    /// Regions: `A`, `B` single legs, `C` the remaining two legs.
    pub fn grid2x2(p: u32, n: u32) -> Result<Self> {
        let g = Self::ring(p, n, 4)?;
        let mut regions = BTreeMap::new();
        regions.insert("A".to_string(), vec![4]);
        regions.insert("B".to_string(), vec![5]);
        regions.insert("C".to_string(), vec![6, 7]);
        Ok(Self { regions, ..g })
    }

    /// Bulk path `x_0 – … – x_{k-1}` with boundary vertices at both ends.
    /// Regions: `A` the left end, `B` the right end.
    pub fn path(p: u32, n: u32, bulk: usize) -> Result<Self> {
        let nv = bulk + 2;
        let edges: Vec<(usize, usize)> = (0..nv - 1).map(|i| (i, i + 1)).collect();
        Self::new(p, n, nv, &[0, nv - 1], &edges)?.with_region("A", &[0])?.with_region("B", &[nv - 1])
    }

    /// Names the vertices `a`, `b`, ... instead of `v0`, `v1`, ... (for display).
    pub fn relabel(mut self, names: &[&str]) -> Result<Self> {
        if names.len() != self.names.len() {
            return Err(Error::DimensionMismatch { expected: self.names.len(), got: names.len() });
        }
        self.names = names.iter().map(|s| s.to_string()).collect();
        self.validate()?;
        Ok(self)
    }
}

fn region_label(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("R{i}")
    }
}

/// Output of one network construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkState {
    /// `None` when some projection annihilated the state.
    pub tableau: Option<StabilizerTableau>,
    /// `N_b`, the number of projected qudits.
    pub projected_qudits: usize,
    /// Global indices of the output qudits; position `i` is tableau qudit `i`.
    pub output_qudits: Vec<usize>,
}

impl NetworkState {
    pub fn is_zero(&self) -> bool {
        self.tableau.is_none()
    }

    /// `t` with `tr Ψ = p^t`.
    pub fn log_trace(&self) -> Option<i64> {
        self.tableau.as_ref().map(|t| t.log_trace())
    }

    /// `k` with `tr Ψ = p^{k − N_b}`.
    pub fn trace_rank(&self) -> Option<i64> {
        self.log_trace().map(|t| t + self.projected_qudits as i64)
    }

    /// Whether the trace takes its expected value `p^{-N_b}`.
    pub fn has_full_trace(&self) -> bool {
        self.trace_rank() == Some(0)
    }
}

/// The Bell lattice `⊗_e |e⟩` on all `2 N |E|` endpoint qudits.
pub fn bell_lattice(g: &NetworkGraph) -> StabilizerTableau {
    let p = g.p();
    let total = g.total_qudits();
    let f = PrimeField::new(p).expect("validated prime");
    let mut gens = Vec::with_capacity(total);
    for e in 0..g.edges().len() {
        for (a, b) in g.endpoint_qudits(e, 0).zip(g.endpoint_qudits(e, 1)) {
            let mut x = vec![0; total];
            x[a] = 1;
            x[b] = 1;
            gens.push(WeylOperator::new(p, x, vec![0; total], 0).unwrap());
            let mut z = vec![0; total];
            z[a] = 1;
            z[b] = f.neg(1);
            gens.push(WeylOperator::new(p, vec![0; total], z, 0).unwrap());
        }
    }
    StabilizerTableau::new(p, total, gens, 0).expect("Bell pairs form a valid tableau")
}

/// Samples a uniformly random pure stabilizer tensor for every bulk vertex
/// (in [`NetworkGraph::bulk`] order) and contracts the network.
pub fn build_random_network<R: Rng + ?Sized>(g: &NetworkGraph, rng: &mut R) -> Result<NetworkState> {
    let n = g.bond_exponent() as usize;
    let tensors = g.bulk().iter().map(|&x| StabilizerTableau::sample_uniform(n * g.degree(x), g.p(), rng)).collect::<Result<Vec<_>>>()?;
    build_network_with_tensors(g, &tensors)
}

/// Contracts the network with given pure vertex tensors, one per bulk vertex
/// in [`NetworkGraph::bulk`] order; tensor qudits follow
/// [`NetworkGraph::vertex_qudits`].
pub fn build_network_with_tensors(g: &NetworkGraph, tensors: &[StabilizerTableau]) -> Result<NetworkState> {
    let bulk = g.bulk();
    if tensors.len() != bulk.len() {
        return Err(Error::DimensionMismatch { expected: bulk.len(), got: tensors.len() });
    }
    let projected_qudits = g.projected_qudits();
    let output_qudits = g.output_qudits();
    let total = g.total_qudits();
    let mut state = bell_lattice(g);
    // live[i] = global index of current qudit i.
    let mut live: Vec<usize> = (0..total).collect();
    for (&x, v) in bulk.iter().zip(tensors) {
        let owned = g.vertex_qudits(x);
        if v.p() != g.p() {
            return Err(Error::PrimeMismatch(g.p(), v.p()));
        }
        if v.n() != owned.len() || !v.is_pure() {
            return Err(Error::DimensionMismatch { expected: owned.len(), got: v.k() });
        }
        let local: Vec<usize> = owned.iter().map(|q| live.binary_search(q).expect("qudit still live")).collect();
        let width = live.len();
        for gen in v.generators() {
            let embedded = embed(gen, &local, width);
            match state.postselect(&embedded)? {
                Projected::State(s) => state = s,
                Projected::Zero => return Ok(NetworkState { tableau: None, projected_qudits, output_qudits }),
            }
        }
        state = state.trace_out(&local)?;
        let owned_set: HashSet<usize> = owned.into_iter().collect();
        live.retain(|q| !owned_set.contains(q));
    }
    debug_assert_eq!(live, output_qudits);
    Ok(NetworkState { tableau: Some(state), projected_qudits, output_qudits })
}

fn embed(g: &WeylOperator, positions: &[usize], width: usize) -> WeylOperator {
    let mut x = vec![0; width];
    let mut z = vec![0; width];
    for (j, &q) in positions.iter().enumerate() {
        x[q] = g.x()[j];
        z[q] = g.z()[j];
    }
    WeylOperator::new(g.p(), x, z, g.phase()).unwrap()
}

/// Fractions of samples with `Ψ ≠ 0` and with `tr Ψ = p^{-N_b}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonzeroEstimate {
    pub trials: usize,
    pub nonzero: usize,
    pub full_trace: usize,
}

impl NonzeroEstimate {
    pub fn nonzero_fraction(&self) -> f64 {
        self.nonzero as f64 / self.trials as f64
    }

    pub fn full_trace_fraction(&self) -> f64 {
        self.full_trace as f64 / self.trials as f64
    }
}

pub fn nonzero_probability_estimate<R: Rng + ?Sized>(g: &NetworkGraph, trials: usize, rng: &mut R) -> Result<NonzeroEstimate> {
    if trials == 0 {
        return Err(Error::InvalidGraph("trials must be at least 1".into()));
    }
    let mut est = NonzeroEstimate { trials, nonzero: 0, full_trace: 0 };
    for _ in 0..trials {
        let s = build_random_network(g, rng)?;
        if !s.is_zero() {
            est.nonzero += 1;
        }
        if s.has_full_trace() {
            est.full_trace += 1;
        }
    }
    Ok(est)
}
