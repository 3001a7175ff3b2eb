//! Per-instance structure learning: candidate edge generation and
//! filtering, mutual-information scoring, and the redundancy-eliminated
//! maximum weighted spanning forest.
//!
//! All features here are dataset column indices; callers translate to
//! identifiers at the boundary. Every function is a pure function of its
//! inputs, so one structure search per test instance can run concurrently
//! with others.

use std::collections::HashMap;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hierarchy::RelationTable;

/// An undirected edge between two dataset columns, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
}

impl Edge {
    /// Canonicalizes the endpoint order. Panics on a self-edge, which no
    /// caller can produce.
    pub fn new(x: u32, y: u32) -> Self {
        assert_ne!(x, y, "self-edges are not representable");
        if x < y {
            Edge { a: x, b: y }
        } else {
            Edge { a: y, b: x }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeStatus {
    Available,
    Removed,
}

/// Which edges become candidates for a given test instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateMode {
    /// Every pair.
    All,
    /// At least one endpoint positive in the instance.
    Mix,
    /// Both endpoints positive in the instance.
    Plus,
}

/// Mutual-information estimator for edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MiMode {
    /// Class-conditional mutual information I(Xa; Xb | C).
    #[default]
    Conditional,
    /// Plain I(Xa; Xb), ignoring the class.
    Unconditional,
}

impl std::str::FromStr for MiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conditional" => Ok(MiMode::Conditional),
            "unconditional" => Ok(MiMode::Unconditional),
            other => Err(Error::DegenerateInput {
                message: format!("unknown mutual-information mode '{other}'"),
            }),
        }
    }
}

impl std::fmt::Display for MiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MiMode::Conditional => "conditional",
            MiMode::Unconditional => "unconditional",
        })
    }
}

/// Candidate edges with their weights and selection status.
#[derive(Debug, Clone)]
pub struct EdgeSet {
    edges: Vec<Edge>,
    weights: Vec<f64>,
    status: Vec<EdgeStatus>,
    scored: bool,
}

impl EdgeSet {
    /// An edge set with pre-assigned weights, ready for the spanning-forest
    /// scan.
    pub fn from_weighted(edges: Vec<Edge>, weights: Vec<f64>) -> Self {
        assert_eq!(edges.len(), weights.len());
        let status = vec![EdgeStatus::Available; edges.len()];
        EdgeSet {
            edges,
            weights,
            status,
            scored: true,
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn status(&self) -> &[EdgeStatus] {
        &self.status
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// All C(n, 2) column pairs in canonical (lexicographic) order.
pub fn generate_edges(n_features: usize) -> Vec<Edge> {
    let n = n_features as u32;
    let mut edges = Vec::with_capacity(n_features * n_features.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            edges.push(Edge { a, b });
        }
    }
    edges
}

/// Filters `edges` down to the candidate set for one test instance.
///
/// `Mix` keeps edges with at least one positive endpoint, `Plus` edges
/// whose endpoints are both positive, `All` everything. In every mode,
/// edges joining hierarchically related columns are dropped: they could
/// never survive the spanning-forest scan. Weights start unassigned.
pub fn filter_candidates(
    edges: &[Edge],
    values: &[u8],
    mode: CandidateMode,
    relations: &RelationTable,
) -> Result<EdgeSet> {
    let mut kept = Vec::new();
    for &e in edges {
        if e.b as usize >= values.len() {
            return Err(Error::MissingValue {
                feature: format!("column {}", e.b),
            });
        }
        let keep = match mode {
            CandidateMode::All => true,
            CandidateMode::Mix => values[e.a as usize] == 1 || values[e.b as usize] == 1,
            CandidateMode::Plus => values[e.a as usize] == 1 && values[e.b as usize] == 1,
        };
        if keep && !relations.related(e.a, e.b) {
            kept.push(e);
        }
    }
    let n = kept.len();
    Ok(EdgeSet {
        edges: kept,
        weights: vec![0.0; n],
        status: vec![EdgeStatus::Available; n],
        scored: false,
    })
}

/// Assigns each candidate edge its mutual-information weight, estimated
/// from add-1-smoothed joint counts over the training set. Weights are in
/// bits and non-negative.
pub fn score_edges(cands: &mut EdgeSet, train: &Dataset, mode: MiMode) -> Result<()> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let class_of: Vec<usize> = train
        .instances()
        .iter()
        .map(|inst| train.label_index(inst.label()))
        .collect::<Result<_>>()?;
    for (i, &e) in cands.edges.iter().enumerate() {
        let mut counts = [[[0usize; 2]; 2]; 2]; // [class][va][vb]
        for (inst, &c) in train.instances().iter().zip(&class_of) {
            counts[c][inst.value(e.a as usize) as usize][inst.value(e.b as usize) as usize] += 1;
        }
        let w = match mode {
            MiMode::Conditional => conditional_mi(&counts),
            MiMode::Unconditional => unconditional_mi(&counts),
        };
        cands.weights[i] = w.max(0.0);
    }
    cands.scored = true;
    Ok(())
}

/// I(A; B | C) of the add-1-smoothed joint distribution, in bits.
fn conditional_mi(counts: &[[[usize; 2]; 2]; 2]) -> f64 {
    let mut p = [[[0f64; 2]; 2]; 2];
    let mut total = 0f64;
    for c in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                p[c][a][b] = (counts[c][a][b] + 1) as f64;
                total += p[c][a][b];
            }
        }
    }
    let mut mi = 0.0;
    for c in 0..2 {
        let pc: f64 = p[c].iter().flatten().sum::<f64>() / total;
        for a in 0..2 {
            let pac: f64 = (p[c][a][0] + p[c][a][1]) / total;
            for b in 0..2 {
                let pbc: f64 = (p[c][0][b] + p[c][1][b]) / total;
                let pabc = p[c][a][b] / total;
                mi += pabc * (pabc * pc / (pac * pbc)).log2();
            }
        }
    }
    mi
}

/// I(A; B) of the add-1-smoothed pairwise distribution, in bits.
fn unconditional_mi(counts: &[[[usize; 2]; 2]; 2]) -> f64 {
    let mut p = [[0f64; 2]; 2];
    let mut total = 0f64;
    for a in 0..2 {
        for b in 0..2 {
            p[a][b] = (counts[0][a][b] + counts[1][a][b] + 1) as f64;
            total += p[a][b];
        }
    }
    let mut mi = 0.0;
    for a in 0..2 {
        let pa = (p[a][0] + p[a][1]) / total;
        for b in 0..2 {
            let pb = (p[0][b] + p[1][b]) / total;
            let pab = p[a][b] / total;
            mi += pab * (pab / (pa * pb)).log2();
        }
    }
    mi
}

/// The learned redundancy-free feature forest, rooted and directed.
///
/// Features are exactly the endpoints of selected edges; no two of them
/// are hierarchically related; following `parent_of` from any feature
/// reaches a root.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedForest {
    selected: Vec<Edge>,
    features: Vec<u32>,
    parent_of: HashMap<u32, Option<u32>>,
    roots: Vec<u32>,
}

impl LearnedForest {
    pub fn empty() -> Self {
        LearnedForest {
            selected: Vec::new(),
            features: Vec::new(),
            parent_of: HashMap::new(),
            roots: Vec::new(),
        }
    }

    /// Builds the rooted forest over the endpoints of `selected`. Within
    /// each component the lowest column becomes the root and edges are
    /// directed away from it breadth-first, visiting neighbors in column
    /// order.
    pub fn from_edges(selected: Vec<Edge>) -> Self {
        let mut features: Vec<u32> = selected
            .iter()
            .flat_map(|e| [e.a, e.b])
            .collect();
        features.sort_unstable();
        features.dedup();

        let mut adjacency: HashMap<u32, Vec<u32>> = HashMap::new();
        for e in &selected {
            adjacency.entry(e.a).or_default().push(e.b);
            adjacency.entry(e.b).or_default().push(e.a);
        }
        for neighbors in adjacency.values_mut() {
            neighbors.sort_unstable();
        }

        let mut parent_of: HashMap<u32, Option<u32>> = HashMap::new();
        let mut roots = Vec::new();
        // Scanning features in ascending order guarantees the first
        // unvisited member of a component is its minimum.
        for &f in &features {
            if parent_of.contains_key(&f) {
                continue;
            }
            roots.push(f);
            parent_of.insert(f, None);
            let mut queue = std::collections::VecDeque::from([f]);
            while let Some(x) = queue.pop_front() {
                if let Some(neighbors) = adjacency.get(&x) {
                    for &y in neighbors {
                        if !parent_of.contains_key(&y) {
                            parent_of.insert(y, Some(x));
                            queue.push_back(y);
                        }
                    }
                }
            }
        }
        LearnedForest {
            selected,
            features,
            parent_of,
            roots,
        }
    }

    pub fn selected_edges(&self) -> &[Edge] {
        &self.selected
    }

    /// The surviving columns, ascending.
    pub fn features(&self) -> &[u32] {
        &self.features
    }

    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    /// `None` for roots; absent columns are not part of the forest.
    pub fn parent_of(&self, x: u32) -> Option<Option<u32>> {
        self.parent_of.get(&x).copied()
    }

    pub fn component_count(&self) -> usize {
        self.roots.len()
    }

    pub fn total_weight(&self, weights_by_edge: &HashMap<Edge, f64>) -> f64 {
        self.selected
            .iter()
            .map(|e| weights_by_edge.get(e).copied().unwrap_or(0.0))
            .sum()
    }
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            // Path halving.
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        true
    }
}

/// The greedy redundancy-eliminated maximum weighted spanning forest.
///
/// Candidates are scanned in descending weight order (ties broken by
/// canonical edge order). An edge is accepted iff neither endpoint is
/// blocked and it closes no cycle; accepting it blocks every column
/// hierarchically related to either endpoint for the rest of the scan.
/// Statuses in `cands` record the outcome: accepted edges stay
/// `Available`, everything else becomes `Removed`.
pub fn hre_mst(cands: &mut EdgeSet, relations: &RelationTable) -> Result<LearnedForest> {
    if !cands.scored && !cands.is_empty() {
        return Err(Error::WeightsUnassigned);
    }
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&i, &j| {
        cands.weights[j]
            .total_cmp(&cands.weights[i])
            .then_with(|| cands.edges[i].cmp(&cands.edges[j]))
    });

    let m = relations.len();
    let mut blocked = vec![false; m];
    let mut uf = UnionFind::new(m);
    let mut selected = Vec::new();
    for idx in order {
        let e = cands.edges[idx];
        // Related endpoints are normally dropped at candidate time; skip
        // them here too so the forest invariant holds unconditionally.
        if relations.related(e.a, e.b)
            || blocked[e.a as usize]
            || blocked[e.b as usize]
            || !uf.union(e.a, e.b)
        {
            cands.status[idx] = EdgeStatus::Removed;
            continue;
        }
        selected.push(e);
        for &x in relations.kin(e.a) {
            blocked[x as usize] = true;
        }
        for &x in relations.kin(e.b) {
            blocked[x as usize] = true;
        }
    }
    Ok(LearnedForest::from_edges(selected))
}
