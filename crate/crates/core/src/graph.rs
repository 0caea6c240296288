//! Weighted graphs, lattice-core topologies and their closed-form optimal
//! edge weights under a total weight budget.
//!
//! Vertex numbering: paths run `0 - 1 - … - n−1`; cycles go around the ring
//! with the closing edge `(0, n−1)`; stars put the center at `0`. The two
//! four-vertex specials are laid out as
//!
//! ```text
//! Lollipop (triangle + pendant)      Paw (4-cycle + chord 0–2)
//!       1                              0 ─── 1
//!      / \                             │ ╲   │
//!  3─ 0 ─ 2   (edge 1–2 opposite 0)    3 ─── 2
//! ```

use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::spectral::Matrix;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge ({i}, {j}) is not a valid pair for n = {n} (need i < j < n)")]
    BadEdge { i: usize, j: usize, n: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({i}, {j}) has invalid weight {w}")]
    BadWeight { i: usize, j: usize, w: f64 },
    #[error("weight budget must be positive and finite, got {0}")]
    BadBudget(f64),
    #[error("topology {kind} is not defined for n = {n}")]
    UnsupportedSize { kind: &'static str, n: usize },
    #[error("no closed form for topology {0}")]
    NoClosedForm(&'static str),
    #[error("graph file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Undirected weighted graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Edges may be given in either orientation; they are stored as `i < j`.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            let (i, j) = (a.min(b), a.max(b));
            if i == j || j >= n {
                return Err(GraphError::BadEdge { i: a, j: b, n });
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(GraphError::BadWeight { i, j, w });
            }
            if !seen.insert((i, j)) {
                return Err(GraphError::DuplicateEdge(i, j));
            }
            out.push((i, j, w));
        }
        Ok(Self { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let (i, j) = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|e| e.0 == i && e.1 == j)
            .map(|e| e.2)
    }

    /// Connectivity over edges with strictly positive weight.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(u, w) in &adj[v] {
                if w > 0.0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Neighbour lists `(vertex, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, w) in &self.edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }

    /// Same edges with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            edges: self.edges.iter().map(|&(i, j, w)| (i, j, w * factor)).collect(),
        }
    }

    /// Reads the plain-text format: a header line `n m`, then `m` lines
    /// `i j w` with 0-based indices. Blank lines and `#` comments are skipped.
    pub fn read_from(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader
            .lines()
            .map(|l| l.map_err(GraphError::from))
            .filter(|l| match l {
                Ok(s) => {
                    let t = s.trim();
                    !t.is_empty() && !t.starts_with('#')
                }
                Err(_) => true,
            });
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Parse("missing header line".into()))??;
        let mut it = header.split_whitespace();
        let parse_usize = |s: Option<&str>, what: &str| -> Result<usize> {
            s.ok_or_else(|| GraphError::Parse(format!("missing {what}")))?
                .parse()
                .map_err(|e| GraphError::Parse(format!("bad {what}: {e}")))
        };
        let n = parse_usize(it.next(), "vertex count")?;
        let m = parse_usize(it.next(), "edge count")?;
        let mut edges = Vec::with_capacity(m);
        for k in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| GraphError::Parse(format!("expected {m} edges, found {k}")))??;
            let mut f = line.split_whitespace();
            let i = parse_usize(f.next(), "edge endpoint")?;
            let j = parse_usize(f.next(), "edge endpoint")?;
            let w: f64 = f
                .next()
                .ok_or_else(|| GraphError::Parse("missing weight".into()))?
                .parse()
                .map_err(|e| GraphError::Parse(format!("bad weight: {e}")))?;
            edges.push((i, j, w));
        }
        Self::new(n, edges)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.edges.len())?;
        for &(i, j, wt) in &self.edges {
            writeln!(w, "{i} {j} {wt}")?;
        }
        Ok(())
    }
}

/// Weighted Laplacian `L = D − W`.
pub fn build_laplacian(g: &WeightedGraph) -> Matrix {
    let mut l = Matrix::zeros(g.n());
    for &(i, j, w) in g.edges() {
        l[(i, i)] += w;
        l[(j, j)] += w;
        l[(i, j)] -= w;
        l[(j, i)] -= w;
    }
    l
}

/// Shape of a lattice core.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologyKind {
    Path,
    Cycle,
    Complete,
    Star,
    /// Triangle with a pendant vertex (4 vertices, 4 edges).
    Lollipop,
    /// 4-cycle with one chord (4 vertices, 5 edges).
    Paw,
    Custom(Vec<(usize, usize)>),
}

impl TopologyKind {
    pub fn name(&self) -> &'static str {
        match self {
            TopologyKind::Path => "path",
            TopologyKind::Cycle => "cycle",
            TopologyKind::Complete => "complete",
            TopologyKind::Star => "star",
            TopologyKind::Lollipop => "lollipop",
            TopologyKind::Paw => "paw",
            TopologyKind::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreTopology {
    pub kind: TopologyKind,
    pub n: usize,
}

impl CoreTopology {
    pub fn new(kind: TopologyKind, n: usize) -> Result<Self> {
        let ok = match &kind {
            TopologyKind::Path | TopologyKind::Complete | TopologyKind::Star => n >= 2,
            TopologyKind::Cycle => n >= 3,
            TopologyKind::Lollipop | TopologyKind::Paw => n == 4,
            TopologyKind::Custom(_) => n >= 2,
        };
        if ok {
            Ok(Self { kind, n })
        } else {
            Err(GraphError::UnsupportedSize {
                kind: kind.name(),
                n,
            })
        }
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(TopologyKind::Path, n)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(TopologyKind::Cycle, n)
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(TopologyKind::Complete, n)
    }

    pub fn star(n: usize) -> Result<Self> {
        Self::new(TopologyKind::Star, n)
    }

    pub fn lollipop() -> Self {
        Self {
            kind: TopologyKind::Lollipop,
            n: 4,
        }
    }

    pub fn paw() -> Self {
        Self {
            kind: TopologyKind::Paw,
            n: 4,
        }
    }

    /// The six connected four-vertex topologies in catalog order.
    pub fn n4_catalog() -> Vec<Self> {
        vec![
            Self::path(4).unwrap(),
            Self::star(4).unwrap(),
            Self::lollipop(),
            Self::cycle(4).unwrap(),
            Self::paw(),
            Self::complete(4).unwrap(),
        ]
    }

    /// Unweighted edge list.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        match &self.kind {
            TopologyKind::Path => (0..n - 1).map(|i| (i, i + 1)).collect(),
            TopologyKind::Cycle => {
                let mut e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
                e.push((0, n - 1));
                e
            }
            TopologyKind::Complete => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
            TopologyKind::Star => (1..n).map(|j| (0, j)).collect(),
            TopologyKind::Lollipop => vec![(0, 1), (0, 2), (1, 2), (0, 3)],
            TopologyKind::Paw => vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)],
            TopologyKind::Custom(e) => e.clone(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edge_pairs().len()
    }
}

impl fmt::Display for CoreTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind.name(), self.n)
    }
}

/// Upper limit `D_L` on the sum of core edge weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightBudget(f64);

impl WeightBudget {
    pub fn new(d: f64) -> Result<Self> {
        if d.is_finite() && d > 0.0 {
            Ok(Self(d))
        } else {
            Err(GraphError::BadBudget(d))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// How `D_L` is derived from a topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetRule {
    /// `D_L = |V|`
    Vertices,
    /// `D_L = |E|`
    Edges,
    Explicit(f64),
}

impl BudgetRule {
    pub fn budget_for(self, t: &CoreTopology) -> Result<WeightBudget> {
        match self {
            BudgetRule::Vertices => WeightBudget::new(t.n as f64),
            BudgetRule::Edges => WeightBudget::new(t.edge_count() as f64),
            BudgetRule::Explicit(d) => WeightBudget::new(d),
        }
    }
}

/// Optimal path weight on edge `(i, i+1)`:
/// `3D(N² − s²) / (2N(N² − 1))` with `s = |2i + 2 − N|` twice the offset of
/// the edge midpoint from the path center.
fn path_weight(n: usize, i: usize, d: f64) -> f64 {
    let nf = n as f64;
    let s = (2.0 * i as f64 + 2.0 - nf).abs();
    3.0 * d * (nf * nf - s * s) / (2.0 * nf * (nf * nf - 1.0))
}

/// Core graph carrying the closed-form optimal weights for budget `d`.
pub fn optimal_core_weights(t: &CoreTopology, d: WeightBudget) -> Result<WeightedGraph> {
    let n = t.n;
    let dl = d.value();
    let pairs = t.edge_pairs();
    let weights: Vec<f64> = match &t.kind {
        TopologyKind::Path => (0..n - 1).map(|i| path_weight(n, i, dl)).collect(),
        TopologyKind::Cycle => vec![dl / n as f64; n],
        TopologyKind::Complete => vec![2.0 * dl / (n * (n - 1)) as f64; pairs.len()],
        TopologyKind::Star => vec![dl / (n - 1) as f64; n - 1],
        TopologyKind::Lollipop => {
            let w_minus = dl * (2.0 - 3f64.sqrt()) / 6.0;
            let w0 = dl / 3.0;
            let w1 = dl / 2.0;
            vec![w0, w0, w_minus, w1]
        }
        TopologyKind::Paw => {
            let w1 = dl / 4.0;
            vec![w1, w1, w1, w1, 0.0]
        }
        TopologyKind::Custom(_) => {
            return Err(GraphError::UnsupportedSize {
                kind: t.kind.name(),
                n,
            })
        }
    };
    WeightedGraph::new(
        n,
        pairs
            .into_iter()
            .zip(weights)
            .map(|((i, j), w)| (i, j, w))
            .collect(),
    )
}

/// Closed-form optimal `λ₂` for paths, cycles and complete graphs.
pub fn lambda2_closed_form(t: &CoreTopology, d: WeightBudget) -> Result<f64> {
    let nf = t.n as f64;
    let dl = d.value();
    match t.kind {
        TopologyKind::Complete => Ok(2.0 * dl / (nf - 1.0)),
        TopologyKind::Path => Ok(12.0 * dl / (nf * (nf * nf - 1.0))),
        TopologyKind::Cycle => {
            Ok(2.0 * dl * (1.0 - (2.0 * std::f64::consts::PI / nf).cos()) / nf)
        }
        _ => Err(GraphError::NoClosedForm(t.kind.name())),
    }
}
