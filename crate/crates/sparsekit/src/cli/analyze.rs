use std::path::{Path, PathBuf};

use clap::Args;
use sparsekit_core::matrix::compute_stats;
use sparsekit_core::MatrixStats;
use walkdir::WalkDir;

use super::{csv_writer, fmt_f64, CliError};
use crate::io::{read_matrix, Format};

pub const ANALYZE_HEADER: [&str; 9] = [
    "name",
    "rows",
    "cols",
    "nnz",
    "sparsity",
    "avg_row_length",
    "row_cov",
    "min_row_length",
    "max_row_length",
];

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Matrix files or directories searched recursively for .smtx/.mtx.
    #[arg(required = true, value_name = "PATH")]
    pub paths: Vec<PathBuf>,
    /// Second corpus; adds its aggregate and a primary/versus ratio row.
    #[arg(long, num_args = 1.., value_name = "PATH")]
    pub versus: Vec<PathBuf>,
    /// Also write per-metric histograms to this CSV.
    #[arg(long, value_name = "PATH")]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinScale {
    Linear,
    /// Geometric edges over the positive values, plus a `[0, 0]` bin for
    /// exact zeros.
    Log,
}

/// Bins spanning all of `values`. Every value is counted once; the last
/// bin is closed.
pub fn histogram(values: &[f64], bins: usize, scale: BinScale) -> Vec<HistogramBin> {
    let edges = bin_edges(values, bins, scale);
    count_into(values, &edges, scale)
}

fn bin_edges(values: &[f64], bins: usize, scale: BinScale) -> Vec<f64> {
    let bins = bins.max(1);
    let usable = values.iter().copied().filter(|v| match scale {
        BinScale::Linear => v.is_finite(),
        BinScale::Log => v.is_finite() && *v > 0.0,
    });
    let (lo, hi) = usable.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return Vec::new();
    }
    let (lo, hi) = match (scale, lo == hi) {
        (BinScale::Linear, true) => (lo - 0.5, hi + 0.5),
        (BinScale::Log, true) => (lo / 2.0, hi * 2.0),
        _ => (lo, hi),
    };
    let mut edges: Vec<f64> = match scale {
        BinScale::Linear => (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect(),
        BinScale::Log => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..=bins)
                .map(|i| (a + (b - a) * i as f64 / bins as f64).exp())
                .collect()
        }
    };
    // pin the ends so rounding cannot drop the extremes
    edges[0] = lo;
    edges[bins] = hi;
    edges
}

fn count_into(values: &[f64], edges: &[f64], scale: BinScale) -> Vec<HistogramBin> {
    let mut out = Vec::new();
    if scale == BinScale::Log {
        let zeros = values.iter().filter(|&&v| v == 0.0).count();
        out.push(HistogramBin {
            lo: 0.0,
            hi: 0.0,
            count: zeros,
        });
    }
    if edges.len() < 2 {
        return out;
    }
    let first = out.len();
    out.extend(edges.windows(2).map(|w| HistogramBin {
        lo: w[0],
        hi: w[1],
        count: 0,
    }));
    let last = edges.len() - 2;
    for &v in values {
        if !(edges[0]..=edges[last + 1]).contains(&v) {
            continue;
        }
        let bin = edges[1..=last].partition_point(|&e| e <= v);
        out[first + bin].count += 1;
    }
    out
}

/// `.smtx`/`.mtx` files under `path`, sorted; a plain file is returned as is.
fn collect_files(path: &Path) -> Vec<Result<PathBuf, walkdir::Error>> {
    if !path.is_dir() {
        return vec![Ok(path.to_owned())];
    }
    WalkDir::new(path)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|entry| match entry {
            Ok(e) if e.file_type().is_file() && Format::from_path(e.path()).is_some() => Some(Ok(e.into_path())),
            Ok(_) => None,
            Err(err) => Some(Err(err)),
        })
        .collect()
}

/// Loads every matrix it can, reporting the rest on stderr.
fn load_corpus(paths: &[PathBuf]) -> Vec<(String, MatrixStats)> {
    let mut out = Vec::new();
    for path in paths {
        for file in collect_files(path) {
            match file.map_err(|e| e.to_string()).and_then(|f| {
                read_matrix(&f)
                    .map(|m| (f.display().to_string(), compute_stats(&m)))
                    .map_err(|e| e.to_string())
            }) {
                Ok(entry) => out.push(entry),
                Err(msg) => eprintln!("sparsekit: skipping {msg}"),
            }
        }
    }
    out
}

/// Column means over a corpus. CoV is averaged over matrices that define it.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Aggregate {
    rows: f64,
    cols: f64,
    nnz: f64,
    sparsity: f64,
    avg_row_length: f64,
    row_cov: Option<f64>,
    min_row_length: f64,
    max_row_length: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn aggregate(corpus: &[(String, MatrixStats)]) -> Option<Aggregate> {
    let field = |f: fn(&MatrixStats) -> f64| mean(corpus.iter().map(|(_, s)| f(s)));
    Some(Aggregate {
        rows: field(|s| s.rows as f64)?,
        cols: field(|s| s.cols as f64)?,
        nnz: field(|s| s.nnz as f64)?,
        sparsity: field(|s| s.sparsity)?,
        avg_row_length: field(|s| s.avg_row_length)?,
        row_cov: mean(corpus.iter().filter_map(|(_, s)| s.row_cov)),
        min_row_length: field(|s| s.min_row_length as f64)?,
        max_row_length: field(|s| s.max_row_length as f64)?,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn stats_record(name: &str, s: &MatrixStats) -> [String; 9] {
    [
        name.to_string(),
        s.rows.to_string(),
        s.cols.to_string(),
        s.nnz.to_string(),
        fmt_f64(s.sparsity),
        fmt_f64(s.avg_row_length),
        opt(s.row_cov),
        s.min_row_length.to_string(),
        s.max_row_length.to_string(),
    ]
}

fn aggregate_record(name: &str, a: &Aggregate) -> [String; 9] {
    [
        name.to_string(),
        fmt_f64(a.rows),
        fmt_f64(a.cols),
        fmt_f64(a.nnz),
        fmt_f64(a.sparsity),
        fmt_f64(a.avg_row_length),
        opt(a.row_cov),
        fmt_f64(a.min_row_length),
        fmt_f64(a.max_row_length),
    ]
}

/// Primary over versus for sparsity, average row length and CoV.
fn ratio_record(primary: &Aggregate, versus: &Aggregate) -> [String; 9] {
    let ratio = |a: f64, b: f64| if b != 0.0 { fmt_f64(a / b) } else { String::new() };
    let cov = match (primary.row_cov, versus.row_cov) {
        (Some(a), Some(b)) => ratio(a, b),
        _ => String::new(),
    };
    [
        "ratio".into(),
        String::new(),
        String::new(),
        String::new(),
        ratio(primary.sparsity, versus.sparsity),
        ratio(primary.avg_row_length, versus.avg_row_length),
        cov,
        String::new(),
        String::new(),
    ]
}

type Metric = (&'static str, BinScale, fn(&MatrixStats) -> Option<f64>);

const METRICS: [Metric; 3] = [
    ("avg_row_length", BinScale::Log, |s| Some(s.avg_row_length)),
    ("row_cov", BinScale::Log, |s| s.row_cov),
    ("sparsity", BinScale::Linear, |s| Some(s.sparsity)),
];

fn write_histograms(
    path: &Path,
    bins: usize,
    primary: &[(String, MatrixStats)],
    versus: Option<&[(String, MatrixStats)]>,
) -> Result<(), CliError> {
    let mut w = csv_writer(Some(path))?;
    let mut header = vec!["metric", "bin_lo", "bin_hi", "count"];
    if versus.is_some() {
        header.push("count_versus");
    }
    w.write_record(&header)?;
    for (metric, scale, get) in METRICS {
        let values = |c: &[(String, MatrixStats)]| -> Vec<f64> { c.iter().filter_map(|(_, s)| get(s)).collect() };
        let p = values(primary);
        let v = versus.map(values).unwrap_or_default();
        // shared edges so both corpora are directly comparable
        let all: Vec<f64> = p.iter().chain(&v).copied().collect();
        let edges = bin_edges(&all, bins, scale);
        let p_bins = count_into(&p, &edges, scale);
        let v_bins = count_into(&v, &edges, scale);
        for (i, b) in p_bins.iter().enumerate() {
            let mut rec = vec![metric.to_string(), fmt_f64(b.lo), fmt_f64(b.hi), b.count.to_string()];
            if versus.is_some() {
                rec.push(v_bins[i].count.to_string());
            }
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub(crate) fn run_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let primary = load_corpus(&args.paths);
    if primary.is_empty() {
        return Err(CliError::NoInput("no readable matrices among the given paths".into()));
    }
    let versus = if args.versus.is_empty() {
        None
    } else {
        let v = load_corpus(&args.versus);
        if v.is_empty() {
            return Err(CliError::NoInput("no readable matrices in the --versus corpus".into()));
        }
        Some(v)
    };

    let mut w = csv_writer(args.output.as_deref())?;
    w.write_record(ANALYZE_HEADER)?;
    for (name, s) in &primary {
        w.write_record(stats_record(name, s))?;
    }
    let agg = aggregate(&primary).expect("non-empty corpus");
    w.write_record(aggregate_record("aggregate", &agg))?;
    if let Some(v) = &versus {
        let vagg = aggregate(v).expect("non-empty corpus");
        w.write_record(aggregate_record("aggregate:versus", &vagg))?;
        w.write_record(ratio_record(&agg, &vagg))?;
    }
    w.flush().map_err(csv::Error::from)?;

    if let Some(path) = &args.histogram {
        write_histograms(path, args.bins, &primary, versus.as_deref())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparsekit_core::CsrMatrix;

    #[test]
    fn linear_bins_count_everything() {
        let bins = histogram(&[0.5, 0.6, 0.9, 0.9, 0.75], 4, BinScale::Linear);
        assert_eq!(bins.len(), 4);
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 5);
        assert_eq!(bins[0].lo, 0.5);
        assert_eq!(bins[3].hi, 0.9);
        assert_eq!(bins[3].count, 2);
    }

    #[test]
    fn log_bins_have_zero_bin_and_geometric_edges() {
        let bins = histogram(&[0.0, 1.0, 5.0, 20.0, 100.0, 100.0], 2, BinScale::Log);
        assert_eq!(bins.len(), 3);
        assert_eq!((bins[0].lo, bins[0].hi, bins[0].count), (0.0, 0.0, 1));
        assert!((bins[1].hi - 10.0).abs() < 1e-9);
        assert_eq!(bins[1].count, 2);
        assert_eq!(bins[2].count, 3);
    }

    #[test]
    fn maximum_survives_edge_rounding() {
        let bins = histogram(&[266.1614005163839, 9794.643114831217], 7, BinScale::Linear);
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 2);
    }

    #[test]
    fn constant_and_empty_inputs() {
        let bins = histogram(&[3.0, 3.0], 3, BinScale::Linear);
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 2);
        assert!(histogram(&[], 3, BinScale::Linear).is_empty());
        let zeros = histogram(&[0.0, 0.0], 3, BinScale::Log);
        assert_eq!(
            zeros,
            vec![HistogramBin {
                lo: 0.0,
                hi: 0.0,
                count: 2
            }]
        );
    }

    proptest::proptest! {
        #[test]
        fn every_value_lands_in_exactly_one_bin(
            values in proptest::collection::vec(0.0f64..1e4, 0..200),
            bins in 1usize..20,
            log in proptest::bool::ANY,
        ) {
            let scale = if log { BinScale::Log } else { BinScale::Linear };
            let h = histogram(&values, bins, scale);
            proptest::prop_assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), values.len());
            for w in h.windows(2) {
                proptest::prop_assert!(w[0].hi <= w[1].lo + 1e-9 * w[1].lo.abs());
            }
        }
    }

    #[test]
    fn aggregate_and_ratio() {
        let diag = compute_stats(&CsrMatrix::<f32>::identity(4).unwrap());
        assert_eq!(diag.sparsity, 0.75);
        assert_eq!(diag.row_cov, Some(0.0));
        let dense = compute_stats(&CsrMatrix::<f32>::from_parts(1, 2, vec![0, 2], vec![0, 1], vec![1.0, 1.0]).unwrap());
        let a = aggregate(&[("a".into(), diag), ("b".into(), dense)]).unwrap();
        assert_eq!(a.sparsity, 0.375);
        assert_eq!(a.avg_row_length, 1.5);
        let b = aggregate(&[("c".into(), diag)]).unwrap();
        let r = ratio_record(&a, &b);
        assert_eq!(r[4], "0.500000");
        assert_eq!(r[5], "1.500000");
        assert_eq!(r[6], "");
    }
}
