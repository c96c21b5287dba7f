//! Influence networks: row-stochastic weight matrices, their structural
//! diagnostics, and the normalized leading (left) eigenvector that fixes
//! each agent's share of the eventual consensus.

use std::path::Path;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, NetworkViolation, Result};

/// Tolerance for row sums and centrality normalization.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Row-stochastic influence matrix. `weight(i, j)` is the influence of agent
/// `j` on agent `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceMatrix {
    n: usize,
    weights: Vec<f64>,
}

impl InfluenceMatrix {
    /// Builds a matrix from row-major weights, enforcing non-negativity and
    /// unit row sums.
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMatrix(format!(
                "need at least 2 agents, got {n}"
            )));
        }
        if weights.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: weights.len(),
            });
        }
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({}, {}) = {w} is not a finite non-negative weight",
                    k / n,
                    k % n
                )));
            }
        }
        let m = InfluenceMatrix { n, weights };
        let err = m.max_row_sum_error();
        if err > STOCHASTIC_TOL {
            return Err(Error::InvalidMatrix(format!(
                "rows must sum to 1 (max deviation {err:e})"
            )));
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut weights = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} columns, expected {n}",
                    row.len()
                )));
            }
            weights.extend_from_slice(row);
        }
        Self::new(n, weights)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        Self::new(n, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.n)
    }

    fn max_row_sum_error(&self) -> f64 {
        self.rows()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Reads an `n x n` headerless CSV, one row of weights per line.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        Self::read_rows(rdr)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        Self::read_rows(rdr)
    }

    fn read_rows<R: std::io::Read>(mut rdr: csv::Reader<R>) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        Error::Malformed(format!("row {}: cannot parse weight {f:?}", i + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for row in self.rows() {
            wtr.write_record(row.iter().map(|w| format!("{w:?}")))?;
        }
        wtr.flush()?;
        Ok(())
    }

    fn graph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.n, self.n * self.n);
        let nodes: Vec<NodeIndex> = (0..self.n).map(|_| g.add_node(())).collect();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.weight(i, j) > 0.0 {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        g
    }
}

/// Normalized influence shares: non-negative, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CentralityVector(Vec<f64>);

impl CentralityVector {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::InvalidParameter(
                "centrality needs at least 2 agents".into(),
            ));
        }
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter(
                "centrality entries must be finite and non-negative".into(),
            ));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidParameter(format!(
                "centrality must sum to 1, sums to {total}"
            )));
        }
        Ok(CentralityVector(v))
    }

    pub fn uniform(n: usize) -> Self {
        CentralityVector(vec![1.0 / n as f64; n])
    }

    /// The full-centralization limit: all influence on `leader`.
    ///
    /// No strongly connected network attains this exactly; it is the limit of
    /// the dictator generator as dominance goes to one.
    pub fn concentrated(n: usize, leader: usize) -> Self {
        let mut v = vec![0.0; n];
        v[leader] = 1.0;
        CentralityVector(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkDiagnostics {
    pub row_stochastic: bool,
    pub strongly_connected: bool,
    pub aperiodic: bool,
    pub max_row_sum_error: f64,
}

impl NetworkDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.row_stochastic && self.strongly_connected && self.aperiodic
    }

    /// First failing diagnostic, if any.
    pub fn violation(&self) -> Option<NetworkViolation> {
        if !self.row_stochastic {
            Some(NetworkViolation::NotRowStochastic)
        } else if !self.strongly_connected {
            Some(NetworkViolation::NotStronglyConnected)
        } else if !self.aperiodic {
            Some(NetworkViolation::Periodic)
        } else {
            None
        }
    }

    pub fn require_valid(&self) -> Result<()> {
        match self.violation() {
            None => Ok(()),
            Some(v) => Err(Error::Network(v)),
        }
    }
}

/// Structural report on the directed graph of nonzero weights.
///
/// A graph that is not strongly connected is reported aperiodic only if every
/// one of its strongly connected components containing a cycle is.
pub fn validate(matrix: &InfluenceMatrix) -> NetworkDiagnostics {
    let max_row_sum_error = matrix.max_row_sum_error();
    let g = matrix.graph();
    let sccs = tarjan_scc(&g);
    let strongly_connected = sccs.len() == 1;

    let mut comp_of = vec![0usize; matrix.n];
    for (c, comp) in sccs.iter().enumerate() {
        for node in comp {
            comp_of[node.index()] = c;
        }
    }
    let aperiodic = sccs.iter().enumerate().all(|(c, comp)| {
        match component_period(matrix, comp, &comp_of, c) {
            None => true,
            Some(p) => p == 1,
        }
    });

    NetworkDiagnostics {
        row_stochastic: max_row_sum_error <= STOCHASTIC_TOL,
        strongly_connected,
        aperiodic,
        max_row_sum_error,
    }
}

/// Period of one strongly connected component: gcd over internal edges
/// `u -> w` of `level(u) + 1 - level(w)`, with BFS levels from any root.
/// `None` for a single node without a self-loop (no cycles at all).
fn component_period(
    matrix: &InfluenceMatrix,
    comp: &[NodeIndex],
    comp_of: &[usize],
    c: usize,
) -> Option<usize> {
    let n = matrix.n;
    let root = comp[0].index();
    if comp.len() == 1 && matrix.weight(root, root) == 0.0 {
        return None;
    }
    if comp
        .iter()
        .any(|u| matrix.weight(u.index(), u.index()) > 0.0)
    {
        return Some(1);
    }
    let mut level = vec![usize::MAX; n];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for w in 0..n {
            if comp_of[w] == c && matrix.weight(u, w) > 0.0 && level[w] == usize::MAX {
                level[w] = level[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut period = 0usize;
    for u in comp.iter().map(|u| u.index()) {
        for w in 0..n {
            if comp_of[w] == c && matrix.weight(u, w) > 0.0 {
                let diff = (level[u] as i64 + 1 - level[w] as i64).unsigned_abs() as usize;
                period = gcd(period, diff);
            }
        }
    }
    Some(period)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        PowerIterationOptions {
            tol: 1e-12,
            max_iter: 1_000_000,
        }
    }
}

/// Stationary distribution `v = v W`, normalized to sum to one.
///
/// Power iteration on the transpose from the uniform vector, stopping once
/// successive iterates agree to `tol` in max norm.
pub fn leading_influence_vector(
    matrix: &InfluenceMatrix,
    opts: PowerIterationOptions,
) -> Result<CentralityVector> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    validate(matrix).require_valid()?;

    let n = matrix.n;
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut delta = f64::INFINITY;
    for _ in 0..opts.max_iter {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, row) in matrix.rows().enumerate() {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for (acc, w) in next.iter_mut().zip(row) {
                *acc += vi * w;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        delta = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if delta < opts.tol {
            return Ok(CentralityVector(v));
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        delta,
    })
}

/// Coefficient of variation of influence, `s_v / E(v)`, which for a
/// normalized vector is `sqrt(n * sum (v_i - 1/n)^2)` and lies in
/// `[0, sqrt(n - 1)]`.
pub fn influence_centralization(v: &CentralityVector) -> f64 {
    let n = v.len() as f64;
    let ss: f64 = v.0.iter().map(|x| (x - 1.0 / n).powi(2)).sum();
    (n * ss).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    Uniform,
    Dictator,
    Star,
    RandomRowStochastic,
}

impl std::str::FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NetworkKind::Uniform),
            "dictator" => Ok(NetworkKind::Dictator),
            "star" => Ok(NetworkKind::Star),
            "random" | "random_row_stochastic" => Ok(NetworkKind::RandomRowStochastic),
            other => Err(Error::InvalidParameter(format!(
                "unknown network kind {other:?}"
            ))),
        }
    }
}

/// Generator settings; each kind reads only the fields it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Dictator: the leader's self-weight and every follower's weight on the
    /// leader. This is also the leader's stationary share. In `(0, 1]`.
    pub dominance: f64,
    /// Star: each spoke's weight on the hub, in `(0, 1)`.
    pub hub_weight: f64,
    /// Random: weight reserved on the diagonal of every row, in `[0, 1)`.
    pub min_self_weight: f64,
    /// Random: symmetric Dirichlet concentration of the remaining mass.
    pub concentration: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            dominance: 0.9,
            hub_weight: 0.5,
            min_self_weight: 0.05,
            concentration: 1.0,
        }
    }
}

/// Builds a network of the given kind. Deterministic in `seed`; only the
/// random kind consumes randomness.
///
/// The dictator network with `dominance == 1` is the reducible
/// full-centralization limit (every row puts all weight on agent 0) and does
/// not pass [`validate`]; use [`CentralityVector::concentrated`] for its
/// centrality.
pub fn generate(
    kind: NetworkKind,
    n: usize,
    seed: u64,
    params: &GeneratorParams,
) -> Result<InfluenceMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 2, got {n}"
        )));
    }
    let nf = n as f64;
    let mut w = vec![0.0; n * n];
    match kind {
        NetworkKind::Uniform => w.iter_mut().for_each(|x| *x = 1.0 / nf),
        NetworkKind::Dictator => {
            let d = params.dominance;
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "dominance must be in (0, 1], got {d}"
                )));
            }
            w[0] = d;
            for j in 1..n {
                w[j] = (1.0 - d) / (nf - 1.0);
            }
            for i in 1..n {
                w[i * n] = d;
                w[i * n + i] = 1.0 - d;
            }
        }
        NetworkKind::Star => {
            let h = params.hub_weight;
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "hub_weight must be in (0, 1), got {h}"
                )));
            }
            for j in 0..n {
                w[j] = 1.0 / nf;
            }
            for i in 1..n {
                w[i * n] = h;
                w[i * n + i] = 1.0 - h;
            }
        }
        NetworkKind::RandomRowStochastic => {
            let s = params.min_self_weight;
            if !(0.0..1.0).contains(&s) {
                return Err(Error::InvalidParameter(format!(
                    "min_self_weight must be in [0, 1), got {s}"
                )));
            }
            let gamma = Gamma::new(params.concentration, 1.0).map_err(|e| {
                Error::InvalidParameter(format!("concentration {}: {e}", params.concentration))
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..n {
                let row = &mut w[i * n..(i + 1) * n];
                row.iter_mut().for_each(|x| *x = gamma.sample(&mut rng));
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x *= (1.0 - s) / total);
                row[i] += s;
                // absorb rounding so the row sums to 1 as closely as possible
                let drift: f64 = row.iter().sum::<f64>() - 1.0;
                row[i] -= drift;
            }
        }
    }
    InfluenceMatrix::new(n, w)
}
