use std::collections::VecDeque;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use petgraph::algo::is_isomorphic;
use petgraph::graph::UnGraph;
use serde::Serialize;

use super::{mode_operator, CollectiveModeSet};
use crate::error::{Error, Result};
use crate::hilbert::{all_parent_state, Basis, SparseOperator, StateVector};

/// Largest site count for which node states are built explicitly to check
/// edges and rates against the operator algebra.
const NUMERIC_CHECK_MAX_SITES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorNode {
    pub id: usize,
    /// Occupation of every collective mode; the first `M` entries are the
    /// emitting modes.
    pub occupations: Vec<u8>,
    pub sector: usize,
    /// Total emission rate `sum_m N Gamma_m (1 - n_m)` over emitting modes.
    pub rate: f64,
}

/// Emission into mode `mode` takes `src` to `dst`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectorEdge {
    pub src: usize,
    pub dst: usize,
    pub mode: usize,
}

/// The `2^N` collective occupation states and their mode-resolved emission
/// couplings. Occupations of the non-emitting modes are conserved, so each
/// of their `2^(N-M)` values labels one sector.
#[derive(Clone, Debug)]
pub struct SectorGraph {
    n_sites: usize,
    n_emitting: usize,
    nodes: Vec<SectorNode>,
    edges: Vec<SectorEdge>,
    sectors: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct JsonNode<'a> {
    id: usize,
    occupations: &'a [u8],
    rate: f64,
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    nodes: Vec<JsonNode<'a>>,
    edges: &'a [SectorEdge],
}

fn occupation_bits(mask: usize, n: usize) -> Vec<u8> {
    (0..n).map(|k| ((mask >> k) & 1) as u8).collect()
}

/// Builds the sector graph of `modes` on the atomic register of `basis`.
///
/// Needs fermionic emission. The mode rows are completed to a unitary; node
/// `|n_0 .. n_{N-1}>` is the state with the listed collective excitations
/// created (in ascending mode order) on the all-parent vacuum.
pub fn multimode_sector_graph(basis: &Basis, modes: &CollectiveModeSet) -> Result<SectorGraph> {
    if !basis.stats().emits_fermion() {
        return Err(Error::InvalidStatistics(
            "sector graphs need a fermionic emitted particle".into(),
        ));
    }
    let n = basis.n_sites();
    if modes.n_sites() != n {
        return Err(Error::DimensionMismatch {
            left: modes.n_sites(),
            right: n,
        });
    }
    let m = modes.n_modes();
    let emitting_mask = (1usize << m) - 1;

    // Sector key: occupations of modes M..N, ordered ascending; inside a
    // sector nodes are ordered by their emitting occupations.
    let n_sectors = 1usize << (n - m);
    let mut order: Vec<usize> = (0..1usize << n).collect();
    order.sort_by_key(|&mask| (mask >> m, mask & emitting_mask));
    let mut id_of = vec![0usize; 1 << n];
    for (id, &mask) in order.iter().enumerate() {
        id_of[mask] = id;
    }

    let nf = n as f64;
    let nodes: Vec<SectorNode> = order
        .iter()
        .enumerate()
        .map(|(id, &mask)| SectorNode {
            id,
            occupations: occupation_bits(mask, n),
            sector: mask >> m,
            rate: (0..m)
                .filter(|&k| mask & (1 << k) == 0)
                .map(|k| nf * modes.rates()[k])
                .sum(),
        })
        .collect();

    let mut edges = Vec::new();
    for &mask in &order {
        for k in 0..m {
            if mask & (1 << k) == 0 {
                edges.push(SectorEdge {
                    src: id_of[mask],
                    dst: id_of[mask | (1 << k)],
                    mode: k,
                });
            }
        }
    }

    let mut sectors = vec![Vec::new(); n_sectors];
    for node in &nodes {
        sectors[node.sector].push(node.id);
    }

    let graph = SectorGraph {
        n_sites: n,
        n_emitting: m,
        nodes,
        edges,
        sectors,
    };
    if n <= NUMERIC_CHECK_MAX_SITES {
        graph.verify_against_operators(basis, modes)?;
    }
    Ok(graph)
}

impl SectorGraph {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_emitting(&self) -> usize {
        self.n_emitting
    }

    pub fn nodes(&self) -> &[SectorNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[SectorEdge] {
        &self.edges
    }

    pub fn sectors(&self) -> &[Vec<usize>] {
        &self.sectors
    }

    /// Rebuilds every node as an explicit state and checks that each
    /// emitting mode operator maps it onto exactly the node the edge list
    /// names (or annihilates it), with the recorded rate.
    pub fn verify_against_operators(&self, basis: &Basis, modes: &CollectiveModeSet) -> Result<()> {
        let atoms = basis.atoms_only();
        let n = self.n_sites;
        let u = modes.completed_unitary();
        let ops: Vec<SparseOperator> = (0..n)
            .map(|k| {
                let row: Vec<C64> = u.row(k).iter().copied().collect();
                mode_operator(&atoms, &row)
            })
            .collect::<Result<_>>()?;
        let vacuum = all_parent_state(&atoms);
        let mask_of = |node: &SectorNode| -> usize {
            node.occupations
                .iter()
                .enumerate()
                .map(|(k, &o)| (o as usize) << k)
                .sum()
        };
        let mut states: Vec<Option<StateVector>> = vec![None; self.nodes.len()];
        for node in &self.nodes {
            let mask = mask_of(node);
            let mut psi = vacuum.clone();
            for k in (0..n).rev() {
                if mask & (1 << k) != 0 {
                    psi = ops[k].apply(&psi)?;
                }
            }
            if (psi.norm_sqr() - 1.0).abs() > 1e-9 {
                return Err(Error::Consistency(format!(
                    "collective state {mask:#b} has norm^2 {}",
                    psi.norm_sqr()
                )));
            }
            states[node.id] = Some(psi);
        }
        let states: Vec<StateVector> = states.into_iter().map(|s| s.expect("filled")).collect();

        let nf = n as f64;
        for node in &self.nodes {
            let psi = &states[node.id];
            let mut rate = 0.0;
            for (k, op) in ops.iter().enumerate().take(self.n_emitting) {
                let image = op.apply(psi)?;
                let weight = image.norm_sqr();
                rate += nf * modes.rates()[k] * weight;
                let edge = self.edges.iter().find(|e| e.src == node.id && e.mode == k);
                match edge {
                    None if weight > 1e-9 => {
                        return Err(Error::Consistency(format!(
                            "node {} emits into occupied mode {k}",
                            node.id
                        )))
                    }
                    None => {}
                    Some(e) => {
                        let overlap = states[e.dst].inner(&image).norm_sqr();
                        if (overlap - 1.0).abs() > 1e-9 || (weight - overlap).abs() > 1e-9 {
                            return Err(Error::Consistency(format!(
                                "mode {k} does not map node {} onto node {}",
                                node.id, e.dst
                            )));
                        }
                    }
                }
            }
            if (rate - node.rate).abs() > 1e-9 * nf * modes.total_rate().max(1.0) {
                return Err(Error::Consistency(format!(
                    "node {} rate {} differs from <L^dag L> = {rate}",
                    node.id, node.rate
                )));
            }
        }
        Ok(())
    }

    fn sector_graph(&self, s: usize) -> UnGraph<(), usize> {
        let members = &self.sectors[s];
        let mut g = UnGraph::with_capacity(members.len(), members.len() * self.n_emitting);
        let mut local = std::collections::BTreeMap::new();
        for &id in members {
            local.insert(id, g.add_node(()));
        }
        for e in &self.edges {
            if let (Some(&a), Some(&b)) = (local.get(&e.src), local.get(&e.dst)) {
                g.add_edge(a, b, e.mode);
            }
        }
        g
    }

    /// Exact check that sector `s` is an `M`-dimensional hypercube: every
    /// node has one edge per emitting mode and the sector is isomorphic to
    /// `Q_M`.
    pub fn sector_is_hypercube(&self, s: usize) -> bool {
        let m = self.n_emitting;
        let members = &self.sectors[s];
        if members.len() != 1 << m {
            return false;
        }
        for &id in members {
            let mut labels: Vec<usize> = self
                .edges
                .iter()
                .filter(|e| e.src == id || e.dst == id)
                .map(|e| e.mode)
                .collect();
            labels.sort_unstable();
            if labels != (0..m).collect::<Vec<_>>() {
                return false;
            }
        }
        is_isomorphic(&self.sector_graph(s), &hypercube(m))
    }

    pub fn is_hypercube(&self) -> bool {
        (0..self.sectors.len()).all(|s| self.sector_is_hypercube(s))
    }

    /// Longest shortest path inside sector `s`.
    pub fn sector_diameter(&self, s: usize) -> usize {
        let g = self.sector_graph(s);
        let mut best = 0;
        for start in g.node_indices() {
            let mut dist = vec![usize::MAX; g.node_count()];
            dist[start.index()] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for w in g.neighbors(v) {
                    if dist[w.index()] == usize::MAX {
                        dist[w.index()] = dist[v.index()] + 1;
                        queue.push_back(w);
                    }
                }
            }
            best = best.max(dist.into_iter().max().unwrap_or(0));
        }
        best
    }

    /// DOT rendering: undirected edges carry `mode=<m>`, nodes `rate=<float>`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph sectors {\n");
        for (s, members) in self.sectors.iter().enumerate() {
            writeln!(out, "  subgraph cluster_{s} {{").unwrap();
            for &id in members {
                let node = &self.nodes[id];
                let occ: String = node.occupations.iter().map(|o| o.to_string()).collect();
                writeln!(out, "    n{id} [label=\"{occ}\", rate={}];", node.rate).unwrap();
            }
            out.push_str("  }\n");
        }
        for e in &self.edges {
            writeln!(out, "  n{} -- n{} [mode={}];", e.src, e.dst, e.mode).unwrap();
        }
        out.push_str("}\n");
        out
    }

    /// `{nodes: [{id, occupations, rate}], edges: [{src, dst, mode}]}`
    pub fn to_json(&self) -> String {
        let doc = JsonGraph {
            nodes: self
                .nodes
                .iter()
                .map(|n| JsonNode {
                    id: n.id,
                    occupations: &n.occupations,
                    rate: n.rate,
                })
                .collect(),
            edges: &self.edges,
        };
        serde_json::to_string_pretty(&doc).expect("graph serializes")
    }
}

fn hypercube(m: usize) -> UnGraph<(), usize> {
    let mut g = UnGraph::with_capacity(1 << m, m << m.saturating_sub(1));
    let nodes: Vec<_> = (0..1usize << m).map(|_| g.add_node(())).collect();
    for v in 0..1usize << m {
        for k in 0..m {
            let w = v | (1 << k);
            if w != v {
                g.add_edge(nodes[v], nodes[w], k);
            }
        }
    }
    g
}

/// Sorted node rates of every sector.
pub fn sector_rate_spectrum(graph: &SectorGraph) -> Vec<Vec<f64>> {
    graph
        .sectors
        .iter()
        .map(|members| {
            let mut r: Vec<f64> = members.iter().map(|&id| graph.nodes[id].rate).collect();
            r.sort_by(f64::total_cmp);
            r
        })
        .collect()
}

/// `{ sum_{m in S} N Gamma_m : S subset of modes }`, sorted.
pub fn expected_rate_multiset(n_sites: usize, modes: &CollectiveModeSet) -> Vec<f64> {
    let m = modes.n_modes();
    let mut r: Vec<f64> = (0..1usize << m)
        .map(|subset| {
            (0..m)
                .filter(|k| subset & (1 << k) != 0)
                .map(|k| n_sites as f64 * modes.rates()[k])
                .sum()
        })
        .collect();
    r.sort_by(f64::total_cmp);
    r
}
