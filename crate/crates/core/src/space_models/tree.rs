//! Finite metric trees with infinite branches attached at vertices.
//!
//! The core is a finite weighted tree rooted at the basepoint. Every geodesic
//! ray leaves the core through one of the *branches*: a half-line attached at a
//! core vertex and subdivided periodically into edges whose lengths repeat a
//! fixed cycle. A ray's edge word is therefore the core path from the
//! basepoint to the attachment vertex followed by the branch's periodic edges.
//!
//! Points are stored as canonical `(edge, offset)` pairs or vertices; an
//! offset of zero is always folded into the edge's tail vertex and an offset
//! equal to the edge length into its head vertex, so equality is decidable.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex of the tree: a core vertex or the `index`-th node along a branch
/// (`index >= 1`; node 0 is the attachment vertex itself).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeVertex {
    Core { id: usize },
    Branch { branch: usize, index: u64 },
}

/// Edge of the tree. Core edges run from `a` to `b` as given in the tree
/// description; branch edge `index` runs from branch node `index` to
/// `index + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeEdge {
    Core { id: usize },
    Branch { branch: usize, index: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum TreePoint {
    Vertex { vertex: TreeVertex },
    Edge { edge: TreeEdge, offset: f64 },
}

impl TreePoint {
    pub fn core_vertex(id: usize) -> Self {
        TreePoint::Vertex { vertex: TreeVertex::Core { id } }
    }
}

/// Tree description file: `vertices`, `edges`, `basepoint` and optional
/// `branches`. Vertex ids may be strings or integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDescription {
    pub vertices: Vec<VertexLabel>,
    pub edges: Vec<EdgeDescription>,
    pub basepoint: VertexLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<BranchDescription>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDescription {
    pub a: VertexLabel,
    pub b: VertexLabel,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchDescription {
    pub at: VertexLabel,
    #[serde(default = "default_branch_lengths")]
    pub lengths: Vec<f64>,
}

fn default_branch_lengths() -> Vec<f64> {
    vec![1.0]
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexLabel {
    Int(i64),
    Str(String),
}

impl std::fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VertexLabel::Int(i) => write!(f, "{i}"),
            VertexLabel::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug)]
struct CoreEdge {
    a: usize,
    b: usize,
    length: f64,
}

#[derive(Clone, Debug)]
struct Branch {
    at: usize,
    lengths: Vec<f64>,
    /// `cumulative[j]` is the offset of node `j` within one period.
    cumulative: Vec<f64>,
    period: f64,
}

impl Branch {
    fn new(at: usize, lengths: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(lengths.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for l in &lengths {
            acc += l;
            cumulative.push(acc);
        }
        Branch { at, lengths, cumulative, period: acc }
    }

    fn node_offset(&self, index: u64) -> f64 {
        let m = self.lengths.len() as u64;
        (index / m) as f64 * self.period + self.cumulative[(index % m) as usize]
    }

    fn edge_length(&self, index: u64) -> f64 {
        self.lengths[(index % self.lengths.len() as u64) as usize]
    }

    /// Locates the point at distance `along > 0` from the attachment vertex.
    fn locate(&self, along: f64) -> (u64, f64) {
        let m = self.lengths.len();
        let periods = (along / self.period).floor().max(0.0);
        let mut rem = along - periods * self.period;
        let mut base = periods as u64 * m as u64;
        if rem >= self.period {
            rem -= self.period;
            base += m as u64;
        }
        // cumulative is sorted; find j with cumulative[j] <= rem < cumulative[j+1]
        let j = match self.cumulative[..m].binary_search_by(|c| c.partial_cmp(&rem).unwrap()) {
            Ok(j) => j,
            Err(j) => j - 1,
        };
        (base + j as u64, rem - self.cumulative[j])
    }
}

/// Position of a point relative to the rooted tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Address {
    /// On the core path from the root to `child`, at distance `depth` from
    /// the root, with `depth` in `(depth(parent(child)), depth(child)]`.
    Core { child: usize, depth: f64 },
    /// On branch `branch`, `along > 0` past its attachment vertex.
    Branch { branch: usize, along: f64 },
}

#[derive(Clone, Debug)]
pub struct MetricTree {
    labels: Vec<VertexLabel>,
    edges: Vec<CoreEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    branches: Vec<Branch>,
    basepoint: usize,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<f64>,
    level: Vec<u32>,
    lift: Vec<Vec<usize>>,
}

impl MetricTree {
    pub fn from_description(desc: &TreeDescription) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in desc.vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidTree(format!("duplicate vertex id {v}")));
            }
        }
        let lookup =
            |v: &VertexLabel| index.get(v).copied().ok_or_else(|| Error::InvalidTree(format!("unknown vertex id {v}")));
        let edges =
            desc.edges.iter().map(|e| Ok((lookup(&e.a)?, lookup(&e.b)?, e.length))).collect::<Result<Vec<_>>>()?;
        let basepoint = lookup(&desc.basepoint)?;
        let branches = match &desc.branches {
            Some(bs) => Some(bs.iter().map(|b| Ok((lookup(&b.at)?, b.lengths.clone()))).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Self::new(desc.vertices.clone(), edges, basepoint, branches)
    }

    /// Builds a tree from labelled vertices and `(a, b, length)` edges. When
    /// `branches` is `None`, every vertex of degree at most one receives a
    /// unit-period branch.
    pub fn new(
        labels: Vec<VertexLabel>,
        edges: Vec<(usize, usize, f64)>,
        basepoint: usize,
        branches: Option<Vec<(usize, Vec<f64>)>>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        if basepoint >= n {
            return Err(Error::InvalidTree("basepoint out of range".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} vertices need exactly {} edges, got {}",
                n,
                n - 1,
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut core_edges = Vec::with_capacity(edges.len());
        for (id, &(a, b, length)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::InvalidTree(format!("edge {id} references a missing vertex")));
            }
            if a == b {
                return Err(Error::InvalidTree(format!("edge {id} is a self-loop")));
            }
            if !(length.is_finite() && length > 0.0) {
                return Err(Error::InvalidTree(format!("edge {id} has non-positive length {length}")));
            }
            adjacency[a].push((b, id));
            adjacency[b].push((a, id));
            core_edges.push(CoreEdge { a, b, length });
        }

        let mut parent = vec![None; n];
        let mut depth = vec![f64::NAN; n];
        let mut level = vec![0u32; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([basepoint]);
        seen[basepoint] = true;
        depth[basepoint] = 0.0;
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &adjacency[u] {
                if seen[v] {
                    if parent[u].map(|(p, pe)| p != v || pe != e).unwrap_or(true) {
                        return Err(Error::InvalidTree("graph contains a cycle".into()));
                    }
                    continue;
                }
                seen[v] = true;
                parent[v] = Some((u, e));
                depth[v] = depth[u] + core_edges[e].length;
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTree("graph is not connected".into()));
        }

        let branch_specs =
            branches.unwrap_or_else(|| (0..n).filter(|&v| adjacency[v].len() <= 1).map(|v| (v, vec![1.0])).collect());
        if branch_specs.is_empty() {
            return Err(Error::InvalidTree("tree has no infinite branches".into()));
        }
        let mut branches = Vec::with_capacity(branch_specs.len());
        for (at, lengths) in branch_specs {
            if at >= n {
                return Err(Error::InvalidTree("branch attached to a missing vertex".into()));
            }
            if lengths.is_empty() || lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(Error::InvalidTree("branch edge lengths must be positive".into()));
            }
            branches.push(Branch::new(at, lengths));
        }

        let height = usize::BITS - n.leading_zeros();
        let mut lift = vec![(0..n).map(|v| parent[v].map_or(v, |(p, _)| p)).collect::<Vec<_>>()];
        for k in 1..height.max(1) as usize {
            let prev = &lift[k - 1];
            let next = (0..n).map(|v| prev[prev[v]]).collect();
            lift.push(next);
        }

        Ok(MetricTree { labels, edges: core_edges, adjacency, branches, basepoint, parent, depth, level, lift })
    }

    pub fn description(&self) -> TreeDescription {
        TreeDescription {
            vertices: self.labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDescription { a: self.labels[e.a].clone(), b: self.labels[e.b].clone(), length: e.length })
                .collect(),
            basepoint: self.labels[self.basepoint].clone(),
            branches: Some(
                self.branches
                    .iter()
                    .map(|b| BranchDescription { at: self.labels[b.at].clone(), lengths: b.lengths.clone() })
                    .collect(),
            ),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn basepoint(&self) -> TreePoint {
        TreePoint::core_vertex(self.basepoint)
    }

    pub fn basepoint_id(&self) -> usize {
        self.basepoint
    }

    pub fn label(&self, v: usize) -> &VertexLabel {
        &self.labels[v]
    }

    pub fn vertex_depth(&self, v: usize) -> f64 {
        self.depth[v]
    }

    pub fn branch_attachment(&self, branch: usize) -> Option<usize> {
        self.branches.get(branch).map(|b| b.at)
    }

    pub fn core_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|e| (e.a, e.b, e.length))
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&(u, _)| u)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v].map(|(p, _)| p)
    }

    /// Branches attached at `v`.
    pub fn branches_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.branches.iter().enumerate().filter(move |(_, b)| b.at == v).map(|(i, _)| i)
    }

    /// Core edge ids along the path from the basepoint down to `v`.
    pub fn root_path_edges(&self, v: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut u = v;
        while let Some((p, e)) = self.parent[u] {
            path.push(e);
            u = p;
        }
        path.reverse();
        path
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        if self.level[u] < self.level[v] {
            std::mem::swap(&mut u, &mut v);
        }
        let diff = self.level[u] - self.level[v];
        for (k, table) in self.lift.iter().enumerate() {
            if diff >> k & 1 == 1 {
                u = table[u];
            }
        }
        if u == v {
            return u;
        }
        for table in self.lift.iter().rev() {
            if table[u] != table[v] {
                u = table[u];
                v = table[v];
            }
        }
        self.lift[0][u]
    }

    pub fn is_ancestor(&self, ancestor: usize, v: usize) -> bool {
        self.lca(ancestor, v) == ancestor
    }

    fn snap_tol(x: f64) -> f64 {
        1e-12 * x.abs().max(1.0)
    }

    pub(crate) fn validate(&self, p: &TreePoint) -> Result<()> {
        match *p {
            TreePoint::Vertex { vertex: TreeVertex::Core { id } } => {
                if id >= self.labels.len() {
                    return Err(Error::InvalidPoint(format!("core vertex {id} does not exist")));
                }
            }
            TreePoint::Vertex { vertex: TreeVertex::Branch { branch, index } } => {
                if branch >= self.branches.len() || index == 0 {
                    return Err(Error::InvalidPoint(format!("branch node ({branch}, {index}) does not exist")));
                }
            }
            TreePoint::Edge { edge, offset } => {
                let len = self.edge_length(edge)?;
                if !(offset.is_finite() && (0.0..=len).contains(&offset)) {
                    return Err(Error::InvalidPoint(format!("offset {offset} outside edge of length {len}")));
                }
            }
        }
        Ok(())
    }

    pub fn edge_length(&self, edge: TreeEdge) -> Result<f64> {
        match edge {
            TreeEdge::Core { id } => self
                .edges
                .get(id)
                .map(|e| e.length)
                .ok_or_else(|| Error::InvalidPoint(format!("core edge {id} does not exist"))),
            TreeEdge::Branch { branch, index } => self
                .branches
                .get(branch)
                .map(|b| b.edge_length(index))
                .ok_or_else(|| Error::InvalidPoint(format!("branch {branch} does not exist"))),
        }
    }

    /// Builds the canonical point at `offset` along `edge`.
    pub fn point_on_edge(&self, edge: TreeEdge, offset: f64) -> Result<TreePoint> {
        let p = TreePoint::Edge { edge, offset };
        self.validate(&p)?;
        Ok(self.point_at_address(self.address(&p)))
    }

    pub(crate) fn address(&self, p: &TreePoint) -> Address {
        match *p {
            TreePoint::Vertex { vertex: TreeVertex::Core { id } } => Address::Core { child: id, depth: self.depth[id] },
            TreePoint::Vertex { vertex: TreeVertex::Branch { branch, index } } => {
                Address::Branch { branch, along: self.branches[branch].node_offset(index) }
            }
            TreePoint::Edge { edge: TreeEdge::Core { id }, offset } => {
                let e = &self.edges[id];
                if self.parent[e.b].map(|(p, _)| p) == Some(e.a) {
                    Address::Core { child: e.b, depth: self.depth[e.a] + offset }
                } else {
                    Address::Core { child: e.a, depth: self.depth[e.b] + (e.length - offset) }
                }
            }
            TreePoint::Edge { edge: TreeEdge::Branch { branch, index }, offset } => {
                Address::Branch { branch, along: self.branches[branch].node_offset(index) + offset }
            }
        }
    }

    pub(crate) fn point_at_address(&self, addr: Address) -> TreePoint {
        match addr {
            Address::Core { child, depth } => {
                let Some((p, e)) = self.parent[child] else {
                    return TreePoint::core_vertex(child);
                };
                if depth >= self.depth[child] - Self::snap_tol(self.depth[child]) {
                    return TreePoint::core_vertex(child);
                }
                if depth <= self.depth[p] + Self::snap_tol(self.depth[p]) {
                    return TreePoint::core_vertex(p);
                }
                let edge = &self.edges[e];
                let offset = if edge.a == p { depth - self.depth[p] } else { self.depth[child] - depth };
                TreePoint::Edge { edge: TreeEdge::Core { id: e }, offset }
            }
            Address::Branch { branch, along } => {
                let b = &self.branches[branch];
                if along <= Self::snap_tol(self.depth[b.at]) {
                    return TreePoint::core_vertex(b.at);
                }
                let (index, offset) = b.locate(along);
                let len = b.edge_length(index);
                let tol = Self::snap_tol(along);
                if offset <= tol {
                    if index == 0 {
                        TreePoint::core_vertex(b.at)
                    } else {
                        TreePoint::Vertex { vertex: TreeVertex::Branch { branch, index } }
                    }
                } else if offset >= len - tol {
                    TreePoint::Vertex { vertex: TreeVertex::Branch { branch, index: index + 1 } }
                } else {
                    TreePoint::Edge { edge: TreeEdge::Branch { branch, index }, offset }
                }
            }
        }
    }

    pub(crate) fn address_depth(&self, a: Address) -> f64 {
        match a {
            Address::Core { depth, .. } => depth,
            Address::Branch { branch, along } => self.depth[self.branches[branch].at] + along,
        }
    }

    /// Depth of the deepest common ancestor of two addresses.
    fn meet_depth(&self, a: Address, b: Address) -> f64 {
        if let (Address::Branch { branch: ba, .. }, Address::Branch { branch: bb, .. }) = (a, b) {
            if ba == bb {
                return self.address_depth(a).min(self.address_depth(b));
            }
        }
        let (ca, capa) = self.core_part(a);
        let (cb, capb) = self.core_part(b);
        self.depth[self.lca(ca, cb)].min(capa).min(capb)
    }

    fn core_part(&self, a: Address) -> (usize, f64) {
        match a {
            Address::Core { child, depth } => (child, depth),
            Address::Branch { branch, .. } => {
                let at = self.branches[branch].at;
                (at, self.depth[at])
            }
        }
    }

    fn core_ancestor(&self, v: usize, h: f64) -> Address {
        if h <= 0.0 {
            return Address::Core { child: self.basepoint, depth: 0.0 };
        }
        let mut u = v;
        for table in self.lift.iter().rev() {
            let w = table[u];
            if self.depth[w] >= h && w != u {
                u = w;
            }
        }
        // u is the highest ancestor of v whose depth is at least h
        while let Some((p, _)) = self.parent[u] {
            if self.depth[p] >= h {
                u = p;
            } else {
                break;
            }
        }
        Address::Core { child: u, depth: h }
    }

    /// Ancestor of `a` at depth `h <= depth(a)`.
    fn ancestor(&self, a: Address, h: f64) -> Address {
        match a {
            Address::Branch { branch, along } => {
                let at = self.branches[branch].at;
                let base = self.depth[at];
                if h > base {
                    Address::Branch { branch, along: (h - base).min(along) }
                } else {
                    self.core_ancestor(at, h)
                }
            }
            Address::Core { child, depth } => self.core_ancestor(child, h.min(depth)),
        }
    }

    pub(crate) fn distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        let (a, b) = (self.address(p), self.address(q));
        let m = self.meet_depth(a, b);
        (self.address_depth(a) - m) + (self.address_depth(b) - m)
    }

    pub(crate) fn geodesic_eval(&self, p: &TreePoint, q: &TreePoint, t: f64) -> TreePoint {
        let (a, b) = (self.address(p), self.address(q));
        let m = self.meet_depth(a, b);
        let (da, db) = (self.address_depth(a), self.address_depth(b));
        let up = da - m;
        let total = up + (db - m);
        if t <= 0.0 {
            return *p;
        }
        if t >= total {
            return *q;
        }
        let addr = if t <= up { self.ancestor(a, da - t) } else { self.ancestor(b, m + (t - up)) };
        self.point_at_address(addr)
    }

    /// Point at arclength `t` along the ray leaving through `branch`.
    pub(crate) fn ray_point(&self, branch: usize, t: f64) -> TreePoint {
        let b = &self.branches[branch];
        let base = self.depth[b.at];
        let addr = if t > base { Address::Branch { branch, along: t - base } } else { self.core_ancestor(b.at, t) };
        self.point_at_address(addr)
    }

    /// Length of the common initial segment of the rays through two
    /// distinct branches; `None` when the branches coincide.
    pub fn shared_prefix(&self, b1: usize, b2: usize) -> Option<f64> {
        if b1 == b2 {
            return None;
        }
        Some(self.depth[self.lca(self.branches[b1].at, self.branches[b2].at)])
    }

    /// Branch carrying the point, or the lowest-numbered branch in the
    /// subtree below a core point.
    pub(crate) fn branch_through(&self, p: &TreePoint) -> usize {
        match self.address(p) {
            Address::Branch { branch, .. } => branch,
            Address::Core { child, .. } => self
                .branches
                .iter()
                .position(|b| self.is_ancestor(child, b.at))
                .expect("every core subtree reaches a branch"),
        }
    }

    /// Depth of a point (its distance to the basepoint).
    pub fn depth_of(&self, p: &TreePoint) -> f64 {
        self.address_depth(self.address(p))
    }

    /// Point at distance `offset` past the start of side direction `side`
    /// hanging off core vertex `v`, walking greedily away from the root.
    pub(crate) fn walk_into(&self, v: usize, side: SideDirection, offset: f64) -> TreePoint {
        match side {
            SideDirection::Branch(branch) => self.point_at_address(Address::Branch { branch, along: offset }),
            SideDirection::Child(mut child) => {
                let mut remaining = offset;
                let mut from = v;
                loop {
                    let step = self.depth[child] - self.depth[from];
                    if remaining <= step {
                        return self.point_at_address(Address::Core { child, depth: self.depth[from] + remaining });
                    }
                    remaining -= step;
                    from = child;
                    if let Some(b) = self.branches_at(child).next() {
                        return self.point_at_address(Address::Branch { branch: b, along: remaining });
                    }
                    match self.children(child).next() {
                        Some(c) => child = c,
                        None => return TreePoint::core_vertex(child),
                    }
                }
            }
        }
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().filter(move |&&(u, _)| self.parent[u].map(|(p, _)| p) == Some(v)).map(|&(u, _)| u)
    }

    /// Rebuilds the tree with vertex `v` renamed to position `perm[v]`,
    /// core edges listed in reverse order and branches in reverse order.
    /// Returns the relabelled tree and the branch index map.
    pub fn relabeled(&self, perm: &[usize]) -> Result<(MetricTree, Vec<usize>)> {
        let n = self.labels.len();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if perm.len() != n || check.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(Error::param("perm", "not a permutation of the vertex set"));
        }
        let mut labels = vec![VertexLabel::Int(0); n];
        for v in 0..n {
            labels[perm[v]] = self.labels[v].clone();
        }
        let edges = self.edges.iter().rev().map(|e| (perm[e.a], perm[e.b], e.length)).collect();
        let nb = self.branches.len();
        let branches = self.branches.iter().rev().map(|b| (perm[b.at], b.lengths.clone())).collect();
        let tree = MetricTree::new(labels, edges, perm[self.basepoint], Some(branches))?;
        Ok((tree, (0..nb).map(|i| nb - 1 - i).collect()))
    }

    /// Image of `p` under the isometry produced by [`MetricTree::relabeled`].
    pub fn relabel_point(&self, perm: &[usize], p: &TreePoint) -> TreePoint {
        let ne = self.edges.len();
        let nb = self.branches.len();
        match *p {
            TreePoint::Vertex { vertex: TreeVertex::Core { id } } => TreePoint::core_vertex(perm[id]),
            TreePoint::Vertex { vertex: TreeVertex::Branch { branch, index } } => {
                TreePoint::Vertex { vertex: TreeVertex::Branch { branch: nb - 1 - branch, index } }
            }
            TreePoint::Edge { edge: TreeEdge::Core { id }, offset } => {
                TreePoint::Edge { edge: TreeEdge::Core { id: ne - 1 - id }, offset }
            }
            TreePoint::Edge { edge: TreeEdge::Branch { branch, index }, offset } => {
                TreePoint::Edge { edge: TreeEdge::Branch { branch: nb - 1 - branch, index }, offset }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SideDirection {
    Branch(usize),
    Child(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> MetricTree {
        // a - b - c with unit edges, basepoint a, one branch at c
        MetricTree::new(
            vec![VertexLabel::Str("a".into()), VertexLabel::Str("b".into()), VertexLabel::Str("c".into())],
            vec![(0, 1, 1.0), (1, 2, 1.0)],
            0,
            Some(vec![(2, vec![1.0])]),
        )
        .unwrap()
    }

    #[test]
    fn geodesic_through_middle_vertex() {
        let t = path3();
        let a = TreePoint::core_vertex(0);
        let c = TreePoint::core_vertex(2);
        assert_eq!(t.geodesic_eval(&a, &c, 1.0), TreePoint::core_vertex(1));
        assert_eq!(t.distance(&a, &c), 2.0);
    }

    #[test]
    fn offsets_are_canonical() {
        let t = path3();
        let p = t.point_on_edge(TreeEdge::Core { id: 0 }, 0.0).unwrap();
        assert_eq!(p, TreePoint::core_vertex(0));
        let q = t.point_on_edge(TreeEdge::Core { id: 0 }, 1.0).unwrap();
        assert_eq!(q, TreePoint::core_vertex(1));
        assert!(t.point_on_edge(TreeEdge::Core { id: 0 }, 1.5).is_err());
    }

    #[test]
    fn rejects_cycles_and_disconnected_graphs() {
        let labels = || (0..3).map(VertexLabel::Int).collect::<Vec<_>>();
        let cyc = MetricTree::new(labels(), vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], 0, None);
        assert!(matches!(cyc, Err(Error::InvalidTree(_))));
        let labels4 = (0..4).map(VertexLabel::Int).collect::<Vec<_>>();
        let dis = MetricTree::new(labels4, vec![(0, 1, 1.0), (1, 0, 2.0), (2, 3, 1.0)], 0, None);
        assert!(matches!(dis, Err(Error::InvalidTree(_))));
        let neg = MetricTree::new(labels(), vec![(0, 1, 1.0), (1, 2, -1.0)], 0, None);
        assert!(matches!(neg, Err(Error::InvalidTree(_))));
    }

    #[test]
    fn periodic_branch_word() {
        // branch (e1 e2)^inf at the basepoint with unit edges
        let t = MetricTree::new(vec![VertexLabel::Int(0)], vec![], 0, Some(vec![(0, vec![1.0, 1.0])])).unwrap();
        let p = t.ray_point(0, 1.5);
        assert_eq!(p, TreePoint::Edge { edge: TreeEdge::Branch { branch: 0, index: 1 }, offset: 0.5 });
        let far = t.ray_point(0, 1001.0);
        assert_eq!(far, TreePoint::Vertex { vertex: TreeVertex::Branch { branch: 0, index: 1001 } });
    }

    #[test]
    fn default_branches_on_leaves() {
        let t = path3();
        assert_eq!(t.branch_count(), 1);
        let t2 =
            MetricTree::new((0..3).map(VertexLabel::Int).collect(), vec![(0, 1, 1.0), (1, 2, 1.0)], 1, None).unwrap();
        assert_eq!(t2.branch_count(), 2);
        assert_eq!(t2.shared_prefix(0, 1), Some(0.0));
    }

    #[test]
    fn retraction_depth_walk() {
        // branch word from the basepoint, point at depth 5; ancestor at depth 2
        let t = MetricTree::new(vec![VertexLabel::Int(0)], vec![], 0, Some(vec![(0, vec![1.0])])).unwrap();
        let x = t.ray_point(0, 5.0);
        let base = t.basepoint();
        let y = t.geodesic_eval(&base, &x, 2.0);
        assert_eq!(y, TreePoint::Vertex { vertex: TreeVertex::Branch { branch: 0, index: 2 } });
    }

    #[test]
    fn description_roundtrip_through_json() {
        let json =
            r#"{"vertices":["r",1,2],"edges":[{"a":"r","b":1,"length":0.5},{"a":1,"b":2,"length":2}],"basepoint":"r"}"#;
        let desc: TreeDescription = serde_json::from_str(json).unwrap();
        let t = MetricTree::from_description(&desc).unwrap();
        assert_eq!(t.vertex_depth(2), 2.5);
        let again = MetricTree::from_description(&t.description()).unwrap();
        assert_eq!(again.branch_count(), t.branch_count());
    }
}
