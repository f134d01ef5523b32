//! Multi-view datasets: in-memory type, on-disk format, synthetic generator.
//!
//! A dataset directory holds a `manifest.json`:
//!
//! ```json
//! {"views": ["view_0.csv", "view_1.csv"], "graphs": ["graph_0.mtx", "graph_1.mtx"],
//!  "labels": "labels.csv", "clusters": 3}
//! ```
//!
//! `graphs`, `labels` and `clusters` are optional. Views are CSV files with a
//! header row `f0,f1,...` and one sample per row. Graphs are Matrix Market
//! `coordinate real symmetric` files with 1-based indices. Labels are one
//! 0-based integer per line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseGraph;

/// `n` samples seen through `v` feature views, optionally with one graph
/// per view and ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    pub views: Vec<Array2<f64>>,
    pub graphs: Option<Vec<SparseGraph>>,
    pub labels: Option<Vec<usize>>,
    /// Cluster count from the manifest or the label set.
    pub clusters: Option<usize>,
}

impl MultiViewDataset {
    /// Builds and validates a dataset. When `clusters` is `None` and labels
    /// are present, the count is taken from the labels.
    pub fn new(
        views: Vec<Array2<f64>>,
        graphs: Option<Vec<SparseGraph>>,
        labels: Option<Vec<usize>>,
        clusters: Option<usize>,
    ) -> Result<Self> {
        let clusters = clusters.or_else(|| {
            labels
                .as_ref()
                .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
        });
        let data = MultiViewDataset {
            views,
            graphs,
            labels,
            clusters,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn n(&self) -> usize {
        self.views.first().map_or(0, |v| v.nrows())
    }

    pub fn v(&self) -> usize {
        self.views.len()
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.views.first() else {
            return Err(Error::InvalidDataset("at least one view required".into()));
        };
        let n = first.nrows();
        for (idx, view) in self.views.iter().enumerate() {
            if view.nrows() != n {
                return Err(Error::RowMismatch {
                    view: idx,
                    got: view.nrows(),
                    expected: n,
                });
            }
            if view.ncols() == 0 {
                return Err(Error::InvalidDataset(format!("view {idx} has no features")));
            }
            if view.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("view {idx}")));
            }
        }
        if let Some(graphs) = &self.graphs {
            if graphs.len() != self.views.len() {
                return Err(Error::InvalidDataset(format!(
                    "{} graphs for {} views",
                    graphs.len(),
                    self.views.len()
                )));
            }
            if let Some((idx, g)) = graphs.iter().enumerate().find(|(_, g)| g.n() != n) {
                return Err(Error::InvalidDataset(format!(
                    "graph {idx} has {} nodes, expected {n}",
                    g.n()
                )));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "{} labels for {n} samples",
                    labels.len()
                )));
            }
            let g = self.clusters.unwrap_or(0);
            let mut seen = vec![false; g];
            for &l in labels {
                if l >= g {
                    return Err(Error::LabelOutOfRange { label: l, clusters: g });
                }
                seen[l] = true;
            }
            if let Some(empty) = seen.iter().position(|s| !s) {
                return Err(Error::InvalidDataset(format!("class {empty} has no samples")));
            }
        }
        if self.clusters == Some(0) {
            return Err(Error::InvalidDataset("cluster count must be positive".into()));
        }
        Ok(())
    }
}

/// Parameters of the Gaussian-blob / planted-partition generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub v: usize,
    pub g: usize,
    /// Features per view.
    pub d: usize,
    /// Distance between cluster centers in units of the within-cluster
    /// standard deviation.
    pub separation: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 || self.v == 0 || self.g == 0 || self.d == 0 {
            return bad("n, v, g and d must be positive".into());
        }
        if self.g > self.n {
            return bad(format!("g = {} exceeds n = {}", self.g, self.n));
        }
        if !(self.separation > 0.0) {
            return bad(format!("separation must be > 0, got {}", self.separation));
        }
        if !(self.p_out >= 0.0 && self.p_in > self.p_out && self.p_in <= 1.0) {
            return bad(format!(
                "need 1 >= p_in > p_out >= 0, got p_in = {}, p_out = {}",
                self.p_in, self.p_out
            ));
        }
        Ok(())
    }
}

/// Cluster sizes as even as possible, larger clusters first.
fn cluster_sizes(n: usize, g: usize) -> Vec<usize> {
    (0..g).map(|c| n / g + usize::from(c < n % g)).collect()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Centers with pairwise distance `separation`: scaled random orthonormal
/// directions when `d >= g`, otherwise evenly spaced on a random line.
fn blob_centers(rng: &mut ChaCha8Rng, g: usize, d: usize, separation: f64) -> Vec<Vec<f64>> {
    let offset: Vec<f64> = (0..d).map(|_| rng.random_range(-separation..separation)).collect();
    let shifted = |dir: &[f64], scale: f64| -> Vec<f64> {
        dir.iter().zip(&offset).map(|(a, o)| a * scale + o).collect()
    };
    if d >= g {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(g);
        while basis.len() < g {
            let mut u = gaussian_vec(rng, d);
            for b in &basis {
                let dot: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
                u.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                u.iter_mut().for_each(|x| *x /= norm);
                basis.push(u);
            }
        }
        let scale = separation / std::f64::consts::SQRT_2;
        basis.iter().map(|b| shifted(b, scale)).collect()
    } else {
        let mut dir = gaussian_vec(rng, d);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        dir.iter_mut().for_each(|x| *x /= norm);
        (0..g).map(|c| shifted(&dir, c as f64 * separation)).collect()
    }
}

/// Gaussian blobs per view plus planted-partition graphs, all sharing one
/// ground truth. Labels are contiguous blocks. Deterministic in `spec.seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MultiViewDataset> {
    spec.validate()?;
    let SyntheticSpec { n, v, g, d, .. } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let labels: Vec<usize> = cluster_sizes(n, g)
        .into_iter()
        .enumerate()
        .flat_map(|(c, size)| std::iter::repeat_n(c, size))
        .collect();

    let mut views = Vec::with_capacity(v);
    for _ in 0..v {
        let centers = blob_centers(&mut rng, g, d, spec.separation);
        let mut x = Array2::zeros((n, d));
        for (i, &c) in labels.iter().enumerate() {
            for j in 0..d {
                x[[i, j]] = centers[c][j] + rng.sample::<f64, _>(StandardNormal);
            }
        }
        views.push(x);
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); g];
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    let mut graphs = Vec::with_capacity(v);
    for _ in 0..v {
        let mut edges = Vec::new();
        let mut degree = vec![0usize; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if labels[i] == labels[j] { spec.p_in } else { spec.p_out };
                if rng.random::<f64>() < p {
                    edges.push((i, j, 1.0));
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
        for i in 0..n {
            if degree[i] > 0 {
                continue;
            }
            let peers: Vec<usize> = members[labels[i]].iter().copied().filter(|&j| j != i).collect();
            if peers.is_empty() {
                continue;
            }
            let j = peers[rng.random_range(0..peers.len())];
            edges.push((i.min(j), i.max(j), 1.0));
            degree[i] += 1;
            degree[j] += 1;
        }
        graphs.push(SparseGraph::from_edges(n, &edges)?);
    }

    MultiViewDataset::new(views, Some(graphs), Some(labels), Some(g))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    views: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    graphs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clusters: Option<usize>,
}

/// Options for [`load_dataset_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Accept asymmetric `general` graphs by replacing `A` with `(A + Aᵀ)/2`.
    pub symmetrize: bool,
}

pub fn load_dataset(dir: &Path) -> Result<MultiViewDataset> {
    load_dataset_with(dir, LoadOptions::default())
}

pub fn load_dataset_with(dir: &Path, opts: LoadOptions) -> Result<MultiViewDataset> {
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(manifest_path));
    }
    let manifest: Manifest = serde_json::from_reader(BufReader::new(fs::File::open(&manifest_path)?))?;

    let mut views = Vec::with_capacity(manifest.views.len());
    for name in &manifest.views {
        let path = dir.join(name);
        if !path.is_file() {
            return Err(Error::MissingViewFile(path));
        }
        views.push(read_view_csv(&path)?);
    }
    let n = views.first().map_or(0, |v| v.nrows());
    for (idx, v) in views.iter().enumerate() {
        if v.nrows() != n {
            return Err(Error::RowMismatch {
                view: idx,
                got: v.nrows(),
                expected: n,
            });
        }
    }

    let graphs = match &manifest.graphs {
        Some(names) => {
            let mut graphs = Vec::with_capacity(names.len());
            for name in names {
                let path = dir.join(name);
                if !path.is_file() {
                    return Err(Error::MissingGraphFile(path));
                }
                graphs.push(read_matrix_market(&path, opts.symmetrize)?);
            }
            Some(graphs)
        }
        None => None,
    };

    let labels = match &manifest.labels {
        Some(name) => {
            let path = dir.join(name);
            if !path.is_file() {
                return Err(Error::MissingLabelFile(path));
            }
            Some(read_labels(&path)?)
        }
        None => None,
    };

    MultiViewDataset::new(views, graphs, labels, manifest.clusters)
}

/// Writes `data` in the directory format read by [`load_dataset`].
pub fn save_dataset(data: &MultiViewDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest {
        views: Vec::new(),
        graphs: None,
        labels: None,
        clusters: data.clusters,
    };
    for (i, view) in data.views.iter().enumerate() {
        let name = format!("view_{i}.csv");
        write_view_csv(view, &dir.join(&name))?;
        manifest.views.push(name);
    }
    if let Some(graphs) = &data.graphs {
        let mut names = Vec::new();
        for (i, g) in graphs.iter().enumerate() {
            let name = format!("graph_{i}.mtx");
            write_matrix_market(g, &dir.join(&name))?;
            names.push(name);
        }
        manifest.graphs = Some(names);
    }
    if let Some(labels) = &data.labels {
        write_labels(labels, &dir.join("labels.csv"))?;
        manifest.labels = Some("labels.csv".into());
    }
    let file = fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &manifest)?;
    Ok(())
}

pub fn read_view_csv(path: &Path) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let d = reader.headers()?.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        if record.len() != d {
            return Err(Error::parse(
                path.display().to_string(),
                format!("row {rows} has {} fields, header has {d}", record.len()),
            ));
        }
        for field in record.iter() {
            let x: f64 = field
                .trim()
                .parse()
                .map_err(|e| Error::parse(path.display().to_string(), e))?;
            if !x.is_finite() {
                return Err(Error::NonFinite(path.display().to_string()));
            }
            values.push(x);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, d), values).map_err(|e| Error::parse(path.display().to_string(), e))
}

pub fn write_view_csv(x: &Array2<f64>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let header: Vec<String> = (0..x.ncols()).map(|j| format!("f{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in x.rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a Matrix Market coordinate file as an undirected graph.
///
/// `symmetric` files list one triangle and are mirrored. `general` files
/// must already be symmetric unless `symmetrize` is set.
pub fn read_matrix_market(path: &Path, symmetrize: bool) -> Result<SparseGraph> {
    let what = path.display().to_string();
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();

    let header = lines
        .next()
        .ok_or_else(|| Error::parse(&what, "empty file"))??;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(Error::parse(&what, format!("unsupported header: {header}")));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(Error::parse(&what, format!("unsupported field {other}"))),
    };
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(Error::parse(&what, format!("unsupported symmetry {other}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(&what, e));
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(Error::parse(&what, format!("bad size line: {line}")));
                }
                let (rows, cols, nnz) = (parse_usize(fields[0])?, parse_usize(fields[1])?, parse_usize(fields[2])?);
                if rows != cols {
                    return Err(Error::InvalidGraph(format!("{what}: adjacency is {rows}x{cols}")));
                }
                entries.reserve(nnz * 2);
                size = Some((rows, cols, nnz));
            }
            Some((n, _, _)) => {
                let expected = if pattern { 2 } else { 3 };
                if fields.len() != expected {
                    return Err(Error::parse(&what, format!("bad entry line: {line}")));
                }
                let (i, j) = (parse_usize(fields[0])?, parse_usize(fields[1])?);
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::InvalidGraph(format!("{what}: index ({i}, {j}) out of range")));
                }
                let w = if pattern {
                    1.0
                } else {
                    fields[2].parse::<f64>().map_err(|e| Error::parse(&what, e))?
                };
                entries.push((i - 1, j - 1, w));
            }
        }
    }
    let (n, _, nnz) = size.ok_or_else(|| Error::parse(&what, "missing size line"))?;
    if entries.len() != nnz {
        return Err(Error::parse(&what, format!("expected {nnz} entries, found {}", entries.len())));
    }

    if symmetric {
        let mut mirrored = Vec::with_capacity(entries.len() * 2);
        for &(i, j, w) in &entries {
            mirrored.push((i, j, w));
            if i != j {
                mirrored.push((j, i, w));
            }
        }
        SparseGraph::from_entries(n, mirrored)
    } else {
        match SparseGraph::from_entries(n, entries.clone()) {
            Err(Error::AsymmetricGraph { .. }) if symmetrize => SparseGraph::symmetrized(n, &entries),
            other => other,
        }
    }
}

/// Writes the lower triangle as `coordinate real symmetric`.
pub fn write_matrix_market(graph: &SparseGraph, path: &Path) -> Result<()> {
    let lower: Vec<(usize, usize, f64)> = graph.entries().filter(|&(i, j, _)| i >= j).collect();
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", graph.n(), graph.n(), lower.len())?;
    for (i, j, w) in lower {
        writeln!(out, "{} {} {}", i + 1, j + 1, w)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<usize>().map_err(|e| Error::parse(path.display().to_string(), e)))
        .collect()
}

pub fn write_labels(labels: &[usize], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for l in labels {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    Ok(())
}
