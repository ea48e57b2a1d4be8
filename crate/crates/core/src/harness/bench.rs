use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use super::eps::{estimate_eps_a, DirectSum, EpsEstimate, FullOperator};
use crate::butterfly::{factorize, substream, ButterflyFactors, Mode};
use crate::error::{Error, Result};
use crate::kernels::{ComposedOperator, FioKernel, HankelKernel};
use crate::linalg::{complex_gaussian, OversamplingParams};
use crate::oracle::{DirectOperator, EntryOracle, LinearOperator, MatrixOracle};
use crate::partition::{make_partition, DyadicPartition};

const STAGE_EPS: u64 = 4;

/// Rank of the inner FIO factorization used by the composition kernel.
pub const COMPOSITION_INNER_RANK: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Fio,
    Hankel,
    /// `K F K` with `K` the factored FIO kernel and `F` the DFT.
    Composition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub kernel: KernelKind,
    pub n_list: Vec<usize>,
    pub rank_list: Vec<usize>,
    pub mode: Mode,
    pub seed: u64,
    pub sample_count: usize,
    pub format: OutputFormat,
    pub params: OversamplingParams,
    /// Target leaf size handed to [`make_partition`].
    pub leaf: usize,
}

impl BenchConfig {
    pub fn new(kernel: KernelKind, n_list: Vec<usize>, rank_list: Vec<usize>) -> Self {
        BenchConfig {
            kernel,
            n_list,
            rank_list,
            mode: Mode::Sampling,
            seed: 0,
            sample_count: 256,
            format: OutputFormat::Json,
            params: OversamplingParams::default(),
            leaf: 1,
        }
    }
}

/// One `(N, r)` measurement. Metric fields are `None` when the row failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub r: usize,
    pub eps_a: Option<f64>,
    pub t_factor_s: Option<f64>,
    pub t_dense_s: Option<f64>,
    pub t_apply_s: Option<f64>,
    pub speedup: Option<f64>,
    pub nnz_total: Option<usize>,
    pub seed: u64,
    /// `eps_a` is an absolute error because the reference vanished on `S`.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub eps_absolute: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(n: usize, r: usize, seed: u64, notes: Vec<String>, e: &Error) -> Self {
        BenchRow {
            n,
            r,
            eps_a: None,
            t_factor_s: None,
            t_dense_s: None,
            t_apply_s: None,
            speedup: None,
            nnz_total: None,
            seed,
            eps_absolute: false,
            notes,
            error: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// A kernel instantiated at one size, with its ground truth.
pub enum Instance {
    Fio(FioKernel),
    Hankel(HankelKernel),
    Composition(ComposedOperator),
}

impl Instance {
    pub fn new(
        kind: KernelKind,
        p: &DyadicPartition,
        params: &OversamplingParams,
        seed: u64,
    ) -> Result<Self> {
        let n = p.n();
        Ok(match kind {
            KernelKind::Fio => Instance::Fio(FioKernel::new(n)),
            KernelKind::Hankel => Instance::Hankel(HankelKernel::new(n)),
            KernelKind::Composition => {
                let side = n / p.middle_nodes();
                let inner = factorize(
                    MatrixOracle::Entry(&FioKernel::new(n)),
                    p,
                    COMPOSITION_INNER_RANK.min(side),
                    params,
                    seed,
                    Mode::Sampling,
                )?;
                Instance::Composition(ComposedOperator::new(inner)?)
            }
        })
    }

    pub fn entries(&self) -> Option<&dyn EntryOracle> {
        match self {
            Instance::Fio(k) => Some(k),
            Instance::Hankel(k) => Some(k),
            Instance::Composition(_) => None,
        }
    }

    /// Entry-based kernels honour `mode`; the composition only exists as an
    /// operator and is always built in matvec mode.
    pub fn factorize(
        &self,
        p: &DyadicPartition,
        r: usize,
        params: &OversamplingParams,
        seed: u64,
        mode: Mode,
    ) -> Result<ButterflyFactors> {
        match (self, mode) {
            (Instance::Composition(c), _) => {
                factorize(MatrixOracle::Operator(c), p, r, params, seed, Mode::Matvec)
            }
            (_, Mode::Matvec) => {
                let op = DirectOperator {
                    entries: self.entries().expect("entry kernel"),
                };
                factorize(MatrixOracle::Operator(&op), p, r, params, seed, mode)
            }
            _ => factorize(
                MatrixOracle::Entry(self.entries().expect("entry kernel")),
                p,
                r,
                params,
                seed,
                mode,
            ),
        }
    }

    pub fn estimate(
        &self,
        f: &ButterflyFactors,
        samples: usize,
        seed: u64,
        r: usize,
    ) -> Result<EpsEstimate> {
        let mut rng = substream(seed, STAGE_EPS, f.n(), r);
        match self {
            Instance::Composition(c) => {
                estimate_eps_a(f, &FullOperator { op: c }, samples, &mut rng)
            }
            _ => {
                let entries = self.entries().expect("entry kernel");
                estimate_eps_a(f, &DirectSum { entries }, samples, &mut rng)
            }
        }
    }
}

fn median_apply_seconds(f: &ButterflyFactors, seed: u64) -> Result<f64> {
    let g = complex_gaussian(&mut substream(seed, STAGE_EPS, f.n(), 0), f.n(), 1);
    let mut t = Vec::with_capacity(3);
    for _ in 0..3 {
        let start = Instant::now();
        std::hint::black_box(f.apply(g.as_slice())?);
        t.push(start.elapsed().as_secs_f64());
    }
    t.sort_by(f64::total_cmp);
    Ok(t[1])
}

fn bench_row(cfg: &BenchConfig, n: usize, r: usize, notes: &mut Vec<String>) -> Result<BenchRow> {
    let p = make_partition(n, cfg.leaf)?;
    let instance = Instance::new(cfg.kernel, &p, &cfg.params, cfg.seed)?;
    let start = Instant::now();
    let f = instance.factorize(&p, r, &cfg.params, cfg.seed, cfg.mode)?;
    let t_factor = start.elapsed().as_secs_f64();
    let est = instance.estimate(&f, cfg.sample_count, cfg.seed, r)?;
    let t_apply = median_apply_seconds(&f, cfg.seed)?;
    let t_dense = match &instance {
        Instance::Composition(c) => {
            let g = complex_gaussian(&mut substream(cfg.seed, STAGE_EPS, n, 0), n, 1);
            let start = Instant::now();
            std::hint::black_box(c.apply(&g)?);
            start.elapsed().as_secs_f64()
        }
        _ => est.reference_seconds,
    };
    if est.absolute {
        notes.push("reference vanished on the sample set; eps_a is absolute".into());
    }
    Ok(BenchRow {
        n,
        r,
        eps_a: Some(est.value),
        t_factor_s: Some(t_factor),
        t_dense_s: Some(t_dense),
        t_apply_s: Some(t_apply),
        speedup: Some(t_dense / t_apply),
        nnz_total: Some(f.nnz_report().total),
        seed: cfg.seed,
        eps_absolute: est.absolute,
        notes: std::mem::take(notes),
        error: None,
    })
}

/// Factors, times and measures every `(N, r)` pair. Failures are recorded
/// in their row and do not stop the run.
pub fn run_bench(cfg: &BenchConfig) -> BenchReport {
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        for &r in &cfg.rank_list {
            let mut notes = Vec::new();
            if cfg.sample_count > n {
                notes.push(format!("sample count {} clamped to {n}", cfg.sample_count));
            }
            if cfg.kernel == KernelKind::Composition && cfg.mode != Mode::Matvec {
                notes.push(
                    "composition is only available as an operator; built in matvec mode".into(),
                );
            }
            rows.push(
                bench_row(cfg, n, r, &mut notes)
                    .unwrap_or_else(|e| BenchRow::failed(n, r, cfg.seed, notes, &e)),
            );
        }
    }
    BenchReport { rows }
}

const CSV_HEADER: [&str; 9] = [
    "n",
    "r",
    "eps_a",
    "t_factor_s",
    "t_dense_s",
    "t_apply_s",
    "speedup",
    "nnz_total",
    "seed",
];

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for row in &self.rows {
            w.write_record([
                row.n.to_string(),
                row.r.to_string(),
                opt(row.eps_a),
                opt(row.t_factor_s),
                opt(row.t_dense_s),
                opt(row.t_apply_s),
                opt(row.speedup),
                row.nnz_total.map(|v| v.to_string()).unwrap_or_default(),
                row.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => Ok(self.to_json()),
            OutputFormat::Csv => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf)?;
                Ok(String::from_utf8(buf).expect("csv is utf-8"))
            }
        }
    }
}
