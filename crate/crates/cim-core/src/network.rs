//! Pairwise dependence matrices, the monotonicity census, and Markov-network
//! reconstruction by repeated max-relevance min-redundancy selection.

use crate::error::{CimError, Result};
use crate::inference::{calibrate_null, p_value, NullModel, Statistic};
use crate::scan::{compute_cim, region_count, ScanConfig};
use crate::stats::{classify_dimension, DimensionKind, SamplePairs};
use rayon::prelude::*;
use std::collections::HashMap;

/// A named column-major table with per-column continuity classification.
#[derive(Debug, Clone)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    kinds: Vec<DimensionKind>,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        kinds: Vec<DimensionKind>,
    ) -> Result<Self> {
        if names.len() != columns.len() || names.len() != kinds.len() {
            return Err(CimError::InvalidInput(
                "names, columns, and kinds must align".into(),
            ));
        }
        if columns.is_empty() {
            return Err(CimError::InvalidInput("dataset has no columns".into()));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(CimError::InvalidInput("dataset needs at least 2 rows".into()));
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(CimError::InvalidInput("columns differ in length".into()));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CimError::InvalidInput("dataset values must be finite".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if names.iter().any(|name| !seen.insert(name.clone())) {
            return Err(CimError::InvalidInput("column names must be unique".into()));
        }
        Ok(Dataset {
            names,
            columns,
            kinds,
        })
    }

    /// Builds a dataset classifying each column with the ctzt heuristic.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let kinds = columns.iter().map(|c| classify_dimension(c)).collect();
        Dataset::new(names, columns, kinds)
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn kinds(&self) -> &[DimensionKind] {
        &self.kinds
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Symmetric pairwise dependence summary: index values, p-values, and
/// heuristic region counts. Diagonal is value 1, p 0, one region.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DependencyMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub p_values: Vec<Vec<f64>>,
    pub region_counts: Vec<Vec<usize>>,
}

impl DependencyMatrix {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

/// Cache of index null models keyed by sample size and margin kinds, so the
/// O(d^2) pairs of a matrix share calibrations.
pub struct NullRegistry {
    cfg: ScanConfig,
    replicates: u64,
    seed: u64,
    models: HashMap<(u64, DimensionKind, DimensionKind), NullModel>,
}

impl NullRegistry {
    pub fn new(cfg: ScanConfig, replicates: u64, seed: u64) -> Self {
        NullRegistry {
            cfg,
            replicates,
            seed,
            models: HashMap::new(),
        }
    }

    pub fn config(&self) -> &ScanConfig {
        &self.cfg
    }

    /// Calibrates on first use; kind pairs are order-normalized since the
    /// statistic is symmetric.
    pub fn model_for(
        &mut self,
        n: u64,
        kinds: (DimensionKind, DimensionKind),
    ) -> Result<&NullModel> {
        let key = normalize_kinds(n, kinds);
        if !self.models.contains_key(&key) {
            let model = calibrate_null(
                Statistic::Cim,
                n,
                self.replicates,
                (key.1, key.2),
                self.seed,
                &self.cfg,
            )?;
            self.models.insert(key, model);
        }
        Ok(&self.models[&key])
    }
}

fn normalize_kinds(
    n: u64,
    kinds: (DimensionKind, DimensionKind),
) -> (u64, DimensionKind, DimensionKind) {
    match kinds {
        (DimensionKind::Discrete, DimensionKind::Continuous) => {
            (n, DimensionKind::Continuous, DimensionKind::Discrete)
        }
        (a, b) => (n, a, b),
    }
}

fn zero_variance(column: &[f64]) -> bool {
    column.windows(2).all(|w| w[0] == w[1])
}

/// Computes the full pairwise dependence matrix: index value, p-value from
/// the matching calibrated null, and the heuristic region count per
/// unordered pair. Zero-variance columns flag their pairs degenerate
/// (value 0, p 1).
pub fn pairwise_matrix(
    data: &Dataset,
    cfg: &ScanConfig,
    registry: &mut NullRegistry,
) -> Result<DependencyMatrix> {
    let d = data.n_cols();
    if d < 2 {
        return Err(CimError::InvalidInput(
            "pairwise matrix needs at least 2 columns".into(),
        ));
    }
    cfg.validate()?;
    let n = data.n_rows() as u64;

    // calibrate every kind combination up front; the parallel pair loop
    // then only reads
    let degenerate: Vec<bool> = data.columns().iter().map(|c| zero_variance(c)).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            pairs.push((i, j));
        }
    }
    for &(i, j) in &pairs {
        if !degenerate[i] && !degenerate[j] {
            registry.model_for(n, (data.kinds()[i], data.kinds()[j]))?;
        }
    }
    let registry = &*registry;

    let cells: Result<Vec<(f64, f64, usize)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            if degenerate[i] || degenerate[j] {
                return Ok((0.0, 1.0, 0));
            }
            let s = SamplePairs::new(data.columns()[i].clone(), data.columns()[j].clone())?;
            let result = compute_cim(&s, cfg)?;
            let key = normalize_kinds(n, (data.kinds()[i], data.kinds()[j]));
            let model = &registry.models[&key];
            let p = p_value(model, result.value, Some(cfg))?;
            Ok((result.value, p, region_count(&result, 0.05)))
        })
        .collect();
    let cells = cells?;

    let mut values = vec![vec![0.0; d]; d];
    let mut p_values = vec![vec![0.0; d]; d];
    let mut region_counts = vec![vec![0usize; d]; d];
    for i in 0..d {
        values[i][i] = 1.0;
        p_values[i][i] = 0.0;
        region_counts[i][i] = 1;
    }
    for (&(i, j), &(v, p, r)) in pairs.iter().zip(&cells) {
        values[i][j] = v;
        values[j][i] = v;
        p_values[i][j] = p;
        p_values[j][i] = p;
        region_counts[i][j] = r;
        region_counts[j][i] = r;
    }

    Ok(DependencyMatrix {
        labels: data.names().to_vec(),
        values,
        p_values,
        region_counts,
    })
}

/// Census over significant, strong pairs: how many are monotone (one
/// region).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CensusSummary {
    pub n_significant: usize,
    pub n_monotone: usize,
    pub fraction_monotone: f64,
}

/// Counts pairs with `p < alpha` and value above `strength_min`; a pair is
/// monotone when its heuristic region count is 1.
pub fn monotonicity_census(
    matrix: &DependencyMatrix,
    strength_min: f64,
    alpha: f64,
) -> CensusSummary {
    let d = matrix.dim();
    let mut n_significant = 0;
    let mut n_monotone = 0;
    for i in 0..d {
        for j in i + 1..d {
            if matrix.p_values[i][j] < alpha && matrix.values[i][j] > strength_min {
                n_significant += 1;
                if matrix.region_counts[i][j] == 1 {
                    n_monotone += 1;
                }
            }
        }
    }
    CensusSummary {
        n_significant,
        n_monotone,
        fraction_monotone: if n_significant == 0 {
            0.0
        } else {
            n_monotone as f64 / n_significant as f64
        },
    }
}

/// Max-relevance min-redundancy scores for every candidate: relevance to the
/// target minus mean dependence with the already selected variables.
pub fn mrmr_scores(
    matrix: &DependencyMatrix,
    target: usize,
    selected: &[usize],
) -> Vec<(usize, f64)> {
    assert!(!selected.contains(&target), "target cannot be selected");
    let d = matrix.dim();
    (0..d)
        .filter(|i| *i != target && !selected.contains(i))
        .map(|i| {
            let relevance = matrix.values[i][target];
            let redundancy = if selected.is_empty() {
                0.0
            } else {
                selected.iter().map(|&s| matrix.values[i][s]).sum::<f64>()
                    / selected.len() as f64
            };
            (i, relevance - redundancy)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NetworkEdge {
    pub i: usize,
    pub j: usize,
    pub score: f64,
}

/// Reconstructed network: symmetric edge scores plus the positive-score
/// edges ranked by confidence.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Network {
    pub labels: Vec<String>,
    pub edge_scores: Vec<Vec<f64>>,
    pub edges: Vec<NetworkEdge>,
}

/// Builds a maximum-relevancy network: greedy forward selection per target
/// records each candidate's score at its selection step, and the edge score
/// is the larger of the two directions.
pub fn mrnet(matrix: &DependencyMatrix) -> Result<Network> {
    let d = matrix.dim();
    if d < 3 {
        return Err(CimError::InvalidInput(
            "network reconstruction needs at least 3 variables".into(),
        ));
    }

    // directional[t][i] = score of candidate i when ranked for target t
    let mut directional = vec![vec![f64::NEG_INFINITY; d]; d];
    for target in 0..d {
        let mut selected: Vec<usize> = Vec::new();
        while selected.len() + 1 < d {
            let scores = mrmr_scores(matrix, target, &selected);
            let (best, score) = scores
                .iter()
                .copied()
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)))
                .expect("candidates remain");
            directional[target][best] = score;
            selected.push(best);
        }
    }

    let mut edge_scores = vec![vec![0.0; d]; d];
    let mut edges = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let score = directional[i][j].max(directional[j][i]);
            edge_scores[i][j] = score;
            edge_scores[j][i] = score;
            if score > 0.0 {
                edges.push(NetworkEdge { i, j, score });
            }
        }
    }
    edges.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });

    Ok(Network {
        labels: matrix.labels.clone(),
        edge_scores,
        edges,
    })
}

/// Area under the precision-recall curve of the `k` most confident edge
/// predictions against a reference edge set, step-interpolated over the
/// ranking.
pub fn aupr_top_k(net: &Network, true_edges: &[(usize, usize)], k: usize) -> f64 {
    let truth: std::collections::HashSet<(usize, usize)> = true_edges
        .iter()
        .map(|&(i, j)| (i.min(j), i.max(j)))
        .collect();
    if truth.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut area = 0.0;
    for (rank, edge) in net.edges.iter().take(k).enumerate() {
        if truth.contains(&(edge.i.min(edge.j), edge.i.max(edge.j))) {
            hits += 1;
            let precision = hits as f64 / (rank + 1) as f64;
            area += precision / truth.len() as f64;
        }
    }
    area
}
