//! Feature hierarchy: DAG loading, validation, and transitive closures.
//!
//! Features are organized by generalization-specialization ("is-a")
//! relations, child pointing to parent, as in the Gene Ontology. The
//! closure tables precompute every feature's strict ancestor and
//! descendant sets, which back all redundancy checks downstream.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A directed acyclic graph over feature identifiers.
///
/// Edges point child -> parent. Identifiers are opaque strings (GO term
/// ids in the motivating datasets); they must be unique, non-empty, and
/// free of whitespace. Feature order is first-appearance order, which
/// also fixes the serialization order.
#[derive(Debug, Clone)]
pub struct FeatureDag {
    features: Vec<String>,
    index: HashMap<String, usize>,
    /// (child, parent) pairs in insertion order, deduplicated.
    parent_edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl FeatureDag {
    /// Builds a DAG from explicit feature and (child, parent) edge lists.
    ///
    /// Features mentioned only in `edges` are appended in first-appearance
    /// order. Duplicate edges are idempotent. Fails on invalid identifiers
    /// or cycles.
    pub fn new<S: AsRef<str>>(features: &[S], edges: &[(S, S)]) -> Result<Self> {
        let mut dag = FeatureDag {
            features: Vec::new(),
            index: HashMap::new(),
            parent_edges: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
        };
        for f in features {
            dag.intern(f.as_ref(), 0)?;
        }
        let mut seen = HashSet::new();
        for (child, parent) in edges {
            let c = dag.intern(child.as_ref(), 0)?;
            let p = dag.intern(parent.as_ref(), 0)?;
            if seen.insert((c, p)) {
                dag.parent_edges.push((c, p));
                dag.parents[c].push(p);
                dag.children[p].push(c);
            }
        }
        dag.check_acyclic()?;
        Ok(dag)
    }

    /// Parses the TSV hierarchy format: one `child<TAB>parent` pair per
    /// line, `#` comments and blank lines ignored.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut dag = FeatureDag {
            features: Vec::new(),
            index: HashMap::new(),
            parent_edges: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
        };
        let mut seen = HashSet::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::HierarchyParse {
                    line: lineno,
                    message: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            }
            let c = dag.intern(fields[0], lineno)?;
            let p = dag.intern(fields[1], lineno)?;
            if seen.insert((c, p)) {
                dag.parent_edges.push((c, p));
                dag.parents[c].push(p);
                dag.children[p].push(c);
            }
        }
        dag.check_acyclic()?;
        Ok(dag)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    /// Writes the DAG back out in the TSV format `from_reader` accepts.
    pub fn to_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for &(c, p) in &self.parent_edges {
            writeln!(w, "{}\t{}", self.features[c], self.features[p])?;
        }
        Ok(())
    }

    fn intern(&mut self, name: &str, line: usize) -> Result<usize> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::HierarchyParse {
                line,
                message: format!("invalid feature identifier '{name}'"),
            });
        }
        if let Some(&i) = self.index.get(name) {
            return Ok(i);
        }
        let i = self.features.len();
        self.features.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        Ok(i)
    }

    /// Kahn topological sort over child -> parent edges; any leftover node
    /// sits on a cycle.
    fn check_acyclic(&self) -> Result<()> {
        let n = self.features.len();
        let mut out_deg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&i| out_deg[i] == 0).collect();
        let mut visited = 0;
        while let Some(i) = queue.pop() {
            visited += 1;
            for &c in &self.children[i] {
                out_deg[c] -= 1;
                if out_deg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if visited != n {
            let member = (0..n)
                .find(|&i| out_deg[i] > 0)
                .expect("cycle implies a node with unresolved edges");
            return Err(Error::HierarchyCycle {
                feature: self.features[member].clone(),
            });
        }
        Ok(())
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn parent_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parent_edges
            .iter()
            .map(|&(c, p)| (self.features[c].as_str(), self.features[p].as_str()))
    }

    /// Computes the strict transitive ancestor/descendant closures.
    pub fn build_closure(&self) -> ClosureTable {
        let n = self.features.len();
        let mut ancestors: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        // Process parents before children so each node can take the union
        // of its parents' already-final ancestor sets.
        let order = self.topo_parents_first();
        for &i in &order {
            let mut acc = HashSet::new();
            for &p in &self.parents[i] {
                acc.insert(p);
                acc.extend(ancestors[p].iter().copied());
            }
            ancestors[i] = acc;
        }
        let mut descendants: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for i in 0..n {
            for &a in &ancestors[i] {
                descendants[a].insert(i);
            }
        }
        ClosureTable {
            names: self.features.clone(),
            index: self.index.clone(),
            ancestors,
            descendants,
        }
    }

    fn topo_parents_first(&self) -> Vec<usize> {
        let n = self.features.len();
        let mut out_deg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&i| out_deg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(i);
            for &c in &self.children[i] {
                out_deg[c] -= 1;
                if out_deg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        debug_assert_eq!(order.len(), n, "DAG validated acyclic at construction");
        order
    }
}

/// Precomputed strict ancestor/descendant sets for every feature of a DAG.
///
/// Strict means `x` is never in its own ancestor set, so
/// [`ClosureTable::is_hier_related`] is false on identical arguments.
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct ClosureTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
    ancestors: Vec<HashSet<usize>>,
    descendants: Vec<HashSet<usize>>,
}

impl ClosureTable {
    /// A closure with the given features and no relations at all. This is
    /// what a DAG without edges produces; the hierarchy-blind baseline
    /// classifier runs against it.
    pub fn flat<I, S>(features: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = features.into_iter().map(Into::into).collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let n = names.len();
        ClosureTable {
            names,
            index,
            ancestors: vec![HashSet::new(); n],
            descendants: vec![HashSet::new(); n],
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    fn lookup(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or(Error::UnknownFeature {
            feature: name.to_string(),
        })
    }

    /// Sorted ancestor identifiers of `x` (strict: excludes `x`).
    pub fn ancestors_of(&self, x: &str) -> Result<Vec<&str>> {
        let i = self.lookup(x)?;
        let mut v: Vec<&str> = self.ancestors[i].iter().map(|&j| self.names[j].as_str()).collect();
        v.sort_unstable();
        Ok(v)
    }

    /// Sorted descendant identifiers of `x` (strict: excludes `x`).
    pub fn descendants_of(&self, x: &str) -> Result<Vec<&str>> {
        let i = self.lookup(x)?;
        let mut v: Vec<&str> = self.descendants[i].iter().map(|&j| self.names[j].as_str()).collect();
        v.sort_unstable();
        Ok(v)
    }

    /// True iff one argument is an ancestor of the other. False when
    /// `x == y` because the closure is strict.
    pub fn is_hier_related(&self, x: &str, y: &str) -> Result<bool> {
        let i = self.lookup(x)?;
        let j = self.lookup(y)?;
        Ok(self.ancestors[i].contains(&j) || self.ancestors[j].contains(&i))
    }

    /// Projects the closure onto an ordered feature subset, typically a
    /// dataset's columns, producing O(1) relation lookups by column index.
    pub fn relation_table(&self, features: &[String]) -> Result<RelationTable> {
        let m = features.len();
        let cols: Vec<usize> = features
            .iter()
            .map(|f| self.lookup(f))
            .collect::<Result<_>>()?;
        let pos_of: HashMap<usize, u32> = cols
            .iter()
            .enumerate()
            .map(|(c, &i)| (i, c as u32))
            .collect();
        let mut related = vec![false; m * m];
        let mut kin: Vec<Vec<u32>> = vec![Vec::new(); m];
        for (c, &i) in cols.iter().enumerate() {
            for &a in &self.ancestors[i] {
                if let Some(&other) = pos_of.get(&a) {
                    related[c * m + other as usize] = true;
                    related[other as usize * m + c] = true;
                }
            }
        }
        for c in 0..m {
            for other in 0..m {
                if related[c * m + other] {
                    kin[c].push(other as u32);
                }
            }
        }
        Ok(RelationTable { m, related, kin })
    }
}

/// Hierarchy relations restricted to one dataset's columns.
///
/// `related(a, b)` answers whether columns `a` and `b` are hierarchically
/// related; `kin(x)` lists every column related to `x`. Ancestors or
/// descendants outside the projected column set are irrelevant here: they
/// can never appear in a candidate edge.
#[derive(Debug, Clone)]
pub struct RelationTable {
    m: usize,
    related: Vec<bool>,
    kin: Vec<Vec<u32>>,
}

impl RelationTable {
    /// A relation table with no relations over `m` columns.
    pub fn flat(m: usize) -> Self {
        RelationTable {
            m,
            related: vec![false; m * m],
            kin: vec![Vec::new(); m],
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn related(&self, a: u32, b: u32) -> bool {
        self.related[a as usize * self.m + b as usize]
    }

    #[inline]
    pub fn kin(&self, x: u32) -> &[u32] {
        &self.kin[x as usize]
    }
}
