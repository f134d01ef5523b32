//! End-to-end clustering pipeline, parameter sweeps and scaling benchmark.
//!
//! Feature data (no graphs): build a probabilistic neighbor graph per view,
//! filter, take K-means centroids as anchors. Graph data: filter with the
//! given graphs, importance-sample one shared anchor index set. Both
//! branches then solve the anchor similarities, embed and run K-means.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anchors::{anchors_by_importance, anchors_by_kmeans, SamplerConfig};
use crate::dataset::{generate_synthetic, load_dataset_with, write_labels, LoadOptions, MultiViewDataset, SyntheticSpec};
use crate::embedding::{cluster_embedding, normalize_rows, spectral_embed, SpectralEmbedding};
use crate::error::{Error, Result};
use crate::filter::{filter_all_views, FilterConfig};
use crate::graph::{build_probabilistic_neighbor_graph, normalize, NormalizedOperator};
use crate::kmeans::KMeansParams;
use crate::metrics::MetricsReport;
use crate::subspace::{concat_views, solve_all, ConcatenatedSimilarity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Auto,
    Feature,
    Graph,
}

/// Optional value lists for [`sweep`]. Empty lists keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub k: Vec<usize>,
    pub mu: Vec<f64>,
    pub alpha: Vec<f64>,
    pub anchors: Vec<usize>,
    pub gamma: Vec<f64>,
    pub knn: Vec<usize>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
            && self.mu.is_empty()
            && self.alpha.is_empty()
            && self.anchors.is_empty()
            && self.gamma.is_empty()
            && self.knn.is_empty()
    }
}

/// Pipeline parameters. Unset numeric parameters take mode-dependent
/// defaults (see [`PipelineConfig::resolve`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub data: Option<PathBuf>,
    pub synth: Option<SyntheticSpec>,
    pub mode: Mode,
    pub k: Option<usize>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub anchors: Option<usize>,
    pub gamma: Option<f64>,
    pub clusters: Option<usize>,
    pub knn: Option<usize>,
    pub seed: u64,
    pub restarts: usize,
    /// K-means restarts when computing feature-mode anchors.
    pub anchor_restarts: usize,
    pub standardize: bool,
    pub normalize_z: bool,
    pub normalize_q: bool,
    pub symmetrize: bool,
    pub out: Option<PathBuf>,
    pub export_embedding: bool,
    pub dump_z: bool,
    pub grid: SweepGrid,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data: None,
            synth: None,
            mode: Mode::Auto,
            k: None,
            mu: None,
            alpha: None,
            anchors: None,
            gamma: None,
            clusters: None,
            knn: None,
            seed: 0,
            restarts: 10,
            anchor_restarts: 1,
            standardize: false,
            normalize_z: false,
            normalize_q: false,
            symmetrize: false,
            out: None,
            export_embedding: false,
            dump_z: false,
            grid: SweepGrid::default(),
        }
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub mode: Mode,
    pub k: usize,
    pub mu: f64,
    pub alpha: f64,
    pub anchors: usize,
    pub gamma: f64,
    pub clusters: usize,
    pub knn: usize,
    pub seed: u64,
    pub restarts: usize,
    pub anchor_restarts: usize,
    pub standardize: bool,
    pub normalize_z: bool,
    pub normalize_q: bool,
}

impl PipelineConfig {
    /// Resolves `Auto` mode against the dataset and fills defaults:
    /// feature mode k = 1, mu = 0.1, alpha = 1; graph mode k = 2, mu = 0.5,
    /// alpha = 20; both m = 100, gamma = 2, knn = 5.
    pub fn resolve(&self, data: &MultiViewDataset) -> Result<ResolvedParams> {
        let mode = match self.mode {
            Mode::Auto if data.graphs.is_some() => Mode::Graph,
            Mode::Auto => Mode::Feature,
            Mode::Graph if data.graphs.is_none() => {
                return Err(Error::InvalidParameter("graph mode requires graphs in the dataset".into()))
            }
            m => m,
        };
        let graph = mode == Mode::Graph;
        let clusters = self
            .clusters
            .or(data.clusters)
            .ok_or_else(|| Error::InvalidParameter("cluster count unknown: pass --clusters or provide labels".into()))?;
        if self.restarts == 0 || self.anchor_restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        Ok(ResolvedParams {
            mode,
            k: self.k.unwrap_or(if graph { 2 } else { 1 }),
            mu: self.mu.unwrap_or(if graph { 0.5 } else { 0.1 }),
            alpha: self.alpha.unwrap_or(if graph { 20.0 } else { 1.0 }),
            anchors: self.anchors.unwrap_or(100),
            gamma: self.gamma.unwrap_or(2.0),
            clusters,
            knn: self.knn.unwrap_or(5),
            seed: self.seed,
            restarts: self.restarts,
            anchor_restarts: self.anchor_restarts,
            standardize: self.standardize,
            normalize_z: self.normalize_z,
            normalize_q: self.normalize_q,
        })
    }

    /// Dataset named by `data` or generated from `synth`.
    pub fn load(&self) -> Result<MultiViewDataset> {
        match (&self.data, &self.synth) {
            (Some(dir), _) => load_dataset_with(dir, LoadOptions { symmetrize: self.symmetrize }),
            (None, Some(spec)) => generate_synthetic(spec),
            (None, None) => Err(Error::InvalidParameter("no dataset: pass --data or --synth".into())),
        }
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    /// Neighbor-graph construction and normalization.
    pub graph: f64,
    pub filtering: f64,
    pub anchors: f64,
    pub subspace: f64,
    pub embedding: f64,
    pub kmeans: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ResolvedParams,
    pub timings: StageTimings,
    pub metrics: Option<MetricsReport>,
    pub labels: Vec<usize>,
    pub seed: u64,
}

/// Run report plus intermediate products kept for export.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: RunReport,
    pub embedding: SpectralEmbedding,
    pub similarity: ConcatenatedSimilarity,
}

fn standardize_columns(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows() as f64;
    let mut out = x.clone();
    for mut col in out.columns_mut() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        col.mapv_inplace(|v| if sd > 0.0 { (v - mean) / sd } else { v - mean });
    }
    out
}

fn timed<T>(slot: &mut f64, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    *slot = start.elapsed().as_secs_f64();
    out
}

/// Runs the pipeline on an in-memory dataset.
pub fn run_on_dataset(data: &MultiViewDataset, params: &ResolvedParams) -> Result<PipelineOutput> {
    data.validate()?;
    let start = Instant::now();
    let mut t = StageTimings::default();

    let views: Vec<Array2<f64>> = if params.standardize {
        data.views.iter().map(standardize_columns).collect()
    } else {
        data.views.clone()
    };
    let prepared = MultiViewDataset {
        views,
        graphs: None,
        labels: None,
        clusters: data.clusters,
    };

    let ops: Vec<NormalizedOperator> = timed(&mut t.graph, || match params.mode {
        Mode::Graph => {
            let graphs = data.graphs.as_ref().expect("graph mode resolved with graphs");
            Ok(graphs.iter().map(normalize).collect())
        }
        _ => prepared
            .views
            .iter()
            .map(|x| build_probabilistic_neighbor_graph(x.view(), params.knn).map(|g| normalize(&g)))
            .collect(),
    })
    .map_err(|e| e.at_stage("graph construction"))?;

    let filter_cfg = FilterConfig::new(params.mu, params.k).map_err(|e| e.at_stage("filtering"))?;
    let filtered = timed(&mut t.filtering, || filter_all_views(&prepared, &ops, filter_cfg))
        .map_err(|e| e.at_stage("filtering"))?;

    let anchors = timed(&mut t.anchors, || match params.mode {
        Mode::Graph => anchors_by_importance(
            &filtered,
            data.graphs.as_deref().unwrap_or_default(),
            SamplerConfig {
                m: params.anchors,
                gamma: params.gamma,
                seed: params.seed,
            },
        ),
        _ => anchors_by_kmeans(
            &filtered,
            params.anchors,
            params.seed,
            &KMeansParams {
                restarts: params.anchor_restarts,
                max_iter: 100,
                ..KMeansParams::default()
            },
        ),
    })
    .map_err(|e| e.at_stage("anchor selection"))?;

    let similarity = timed(&mut t.subspace, || {
        let sims = solve_all(&filtered, &anchors, params.alpha)?;
        let mut zbar = concat_views(&sims.z)?;
        if params.normalize_z {
            zbar.normalize_columns();
        }
        Ok(zbar)
    })
    .map_err(|e| e.at_stage("subspace"))?;

    let embedding = timed(&mut t.embedding, || spectral_embed(&similarity, params.clusters))
        .map_err(|e| e.at_stage("embedding"))?;

    let partition = timed(&mut t.kmeans, || {
        let km = KMeansParams {
            restarts: params.restarts,
            ..KMeansParams::default()
        };
        if params.normalize_q {
            let q = SpectralEmbedding {
                q: normalize_rows(&embedding.q),
                sigma: embedding.sigma.clone(),
            };
            cluster_embedding(&q, params.clusters, params.seed, &km)
        } else {
            cluster_embedding(&embedding, params.clusters, params.seed, &km)
        }
    })
    .map_err(|e| e.at_stage("k-means"))?;

    let metrics = match &data.labels {
        Some(truth) => Some(MetricsReport::compute(truth, &partition.labels)?),
        None => None,
    };
    t.total = start.elapsed().as_secs_f64();
    info!("pipeline finished in {:.3}s", t.total);

    Ok(PipelineOutput {
        report: RunReport {
            config: params.clone(),
            timings: t,
            metrics,
            labels: partition.labels,
            seed: params.seed,
        },
        embedding,
        similarity,
    })
}

fn write_matrix_csv(x: &Array2<f64>, prefix: &str, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let header: Vec<String> = (0..x.ncols()).map(|j| format!("{prefix}{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in x.axis_iter(Axis(0)) {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `labels.csv`, `metrics.json` (when labels exist), `report.json`
/// and the optional `embedding.csv` / `zbar.csv`.
pub fn write_outputs(output: &PipelineOutput, cfg: &PipelineConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_labels(&output.report.labels, &dir.join("labels.csv"))?;
    if let Some(metrics) = &output.report.metrics {
        fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(metrics)? + "\n")?;
    }
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&output.report)? + "\n")?;
    if cfg.export_embedding {
        write_matrix_csv(&output.embedding.q, "q", &dir.join("embedding.csv"))?;
    }
    if cfg.dump_z {
        write_matrix_csv(&output.similarity.zbar, "z", &dir.join("zbar.csv"))?;
    }
    Ok(())
}

/// Loads the configured dataset, runs, and writes outputs when `out` is set.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    let data = cfg.load()?;
    let params = cfg.resolve(&data)?;
    let output = run_on_dataset(&data, &params)?;
    if let Some(dir) = &cfg.out {
        write_outputs(&output, cfg, dir)?;
    }
    Ok(output.report)
}

/// One cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub run: usize,
    pub k: usize,
    pub mu: f64,
    pub alpha: f64,
    pub anchors: usize,
    pub gamma: f64,
    pub knn: usize,
    pub seed: u64,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub purity: Option<f64>,
    pub f1: Option<f64>,
    pub ari: Option<f64>,
    pub seconds: Option<f64>,
    pub error: Option<String>,
}

fn axis<T: Copy>(grid: &[T], base: T) -> Vec<T> {
    if grid.is_empty() {
        vec![base]
    } else {
        grid.to_vec()
    }
}

/// Runs every cell of the Cartesian product of the grid on one dataset.
///
/// Cell `r` (in grid order, `knn` varying fastest) uses seed
/// `base seed + r`. Failed cells keep their row with the error message.
pub fn sweep_dataset(data: &MultiViewDataset, cfg: &PipelineConfig) -> Result<Vec<SweepRow>> {
    if cfg.grid.is_empty() {
        return Err(Error::EmptySweep);
    }
    let base = cfg.resolve(data)?;
    let g = &cfg.grid;
    let mut cells = Vec::new();
    for &k in &axis(&g.k, base.k) {
        for &mu in &axis(&g.mu, base.mu) {
            for &alpha in &axis(&g.alpha, base.alpha) {
                for &anchors in &axis(&g.anchors, base.anchors) {
                    for &gamma in &axis(&g.gamma, base.gamma) {
                        for &knn in &axis(&g.knn, base.knn) {
                            let seed = base.seed.wrapping_add(cells.len() as u64);
                            cells.push(ResolvedParams {
                                k,
                                mu,
                                alpha,
                                anchors,
                                gamma,
                                knn,
                                seed,
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
    }
    let rows = cells
        .par_iter()
        .enumerate()
        .map(|(run, p)| {
            let mut row = SweepRow {
                run,
                k: p.k,
                mu: p.mu,
                alpha: p.alpha,
                anchors: p.anchors,
                gamma: p.gamma,
                knn: p.knn,
                seed: p.seed,
                acc: None,
                nmi: None,
                purity: None,
                f1: None,
                ari: None,
                seconds: None,
                error: None,
            };
            match run_on_dataset(data, p) {
                Ok(out) => {
                    row.seconds = Some(out.report.timings.total);
                    if let Some(m) = out.report.metrics {
                        row.acc = Some(m.acc);
                        row.nmi = Some(m.nmi);
                        row.purity = Some(m.purity);
                        row.f1 = Some(m.f1);
                        row.ari = Some(m.ari);
                    }
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    Ok(rows)
}

pub fn sweep(cfg: &PipelineConfig) -> Result<Vec<SweepRow>> {
    if cfg.grid.is_empty() {
        return Err(Error::EmptySweep);
    }
    let data = cfg.load()?;
    sweep_dataset(&data, cfg)
}

pub fn write_csv_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    /// Stored adjacency entries summed over views.
    pub nnz: usize,
    /// Best pipeline wall-clock over the repeats.
    pub seconds: f64,
}

/// Times the pipeline on synthetic data of increasing size.
///
/// Edge probabilities of `base` are taken at `base.n` and rescaled by
/// `base.n / n` so expected degree stays fixed, keeping graphs sparse as
/// `n` grows. Dataset generation is not timed.
pub fn bench_scaling(sizes: &[usize], base: &SyntheticSpec, cfg: &PipelineConfig, repeats: usize) -> Result<Vec<BenchRow>> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("sizes must be non-empty and ascending".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let scale = base.n as f64 / n as f64;
        let spec = SyntheticSpec {
            n,
            p_in: (base.p_in * scale).min(1.0),
            p_out: base.p_out * scale,
            ..base.clone()
        };
        let data = generate_synthetic(&spec)?;
        let params = cfg.resolve(&data)?;
        let mut best = f64::INFINITY;
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            run_on_dataset(&data, &params)?;
            best = best.min(start.elapsed().as_secs_f64());
        }
        let nnz = data.graphs.as_ref().map_or(0, |gs| gs.iter().map(|g| g.nnz()).sum());
        rows.push(BenchRow { n, nnz, seconds: best });
    }
    Ok(rows)
}
