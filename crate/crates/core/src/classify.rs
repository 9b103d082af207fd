//! Industry classifications: fundamental code files, k-means statistical
//! classifications, and the binary stock×industry loadings matrix.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use log::warn;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::stats;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("classification file {0} has no rows")]
    Empty(PathBuf),
    #[error("{} ticker(s) missing from classification: {}", .0.len(), .0.join(", "))]
    Missing(Vec<String>),
    #[error("level {level} out of range ({levels} levels)")]
    Level { level: usize, levels: usize },
    #[error("invalid clustering input: {0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassificationKind {
    Fundamental,
    Statistical,
}

/// Per-level ticker→cluster maps, most granular level first.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub kind: ClassificationKind,
    tickers: Vec<String>,
    levels: Vec<Vec<u32>>,
    index: HashMap<String, usize>,
}

impl Classification {
    /// `levels[l][j]` is the cluster of `tickers[j]` at level `l`.
    pub fn new(
        kind: ClassificationKind,
        tickers: Vec<String>,
        levels: Vec<Vec<u32>>,
    ) -> Result<Self, ClassifyError> {
        if levels.is_empty() || levels.iter().any(|l| l.len() != tickers.len()) {
            return Err(ClassifyError::Input(
                "every level must map every ticker".into(),
            ));
        }
        let index = tickers
            .iter()
            .enumerate()
            .map(|(j, t)| (t.clone(), j))
            .collect::<HashMap<_, _>>();
        if index.len() != tickers.len() {
            return Err(ClassifyError::Input("duplicate ticker".into()));
        }
        Ok(Classification {
            kind,
            tickers,
            levels,
            index,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, level: usize) -> &[u32] {
        &self.levels[level]
    }

    pub fn cluster_of(&self, level: usize, ticker: &str) -> Option<u32> {
        self.index.get(ticker).map(|&j| self.levels[level][j])
    }

    /// Number of distinct clusters at `level`.
    pub fn n_clusters(&self, level: usize) -> usize {
        let mut labels = self.levels[level].clone();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    /// Tickers of `members` that this classification does not map.
    pub fn missing(&self, members: &[String]) -> Vec<String> {
        members
            .iter()
            .filter(|m| !self.index.contains_key(m.as_str()))
            .cloned()
            .collect()
    }

    pub fn check_covers(&self, members: &[String]) -> Result<(), ClassifyError> {
        let missing = self.missing(members);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(ClassifyError::Missing(missing))
        }
    }

    /// True when every level-(k+1) cluster is a union of level-k clusters.
    pub fn is_nested(&self) -> bool {
        self.levels.windows(2).all(|w| {
            let mut parent: HashMap<u32, u32> = HashMap::new();
            w[0].iter()
                .zip(&w[1])
                .all(|(c, p)| *parent.entry(*c).or_insert(*p) == *p)
        })
    }

    /// Writes `ticker,code` for single-level fundamental classifications and
    /// `ticker,level1,level2,...` otherwise.
    pub fn write_csv(&self, path: &Path) -> Result<(), ClassifyError> {
        let io = |source| ClassifyError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
        let mut header = vec!["ticker".to_string()];
        if self.kind == ClassificationKind::Fundamental && self.levels.len() == 1 {
            header.push("code".into());
        } else {
            header.extend((1..=self.levels.len()).map(|l| format!("level{l}")));
        }
        w.write_record(&header).map_err(|e| io(e.into()))?;
        for (j, t) in self.tickers.iter().enumerate() {
            let mut row = vec![t.clone()];
            row.extend(self.levels.iter().map(|l| l[j].to_string()));
            w.write_record(&row).map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)
    }
}

/// Reads a classification CSV. A `ticker,code` header yields a single-level
/// fundamental classification; `ticker,level1,...` a statistical one.
pub fn read_classification_csv(path: &Path) -> Result<Classification, ClassifyError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ClassifyError::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
    let parse_err = |line: u64, msg: String| ClassifyError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let cols: Vec<&str> = headers.iter().collect();
    let kind = match cols.as_slice() {
        ["ticker", "code"] => ClassificationKind::Fundamental,
        ["ticker", rest @ ..]
            if !rest.is_empty()
                && rest
                    .iter()
                    .enumerate()
                    .all(|(l, c)| *c == format!("level{}", l + 1)) =>
        {
            ClassificationKind::Statistical
        }
        _ => {
            return Err(parse_err(
                1,
                "expected header `ticker,code` or `ticker,level1,...`".into(),
            ))
        }
    };
    let n_levels = cols.len() - 1;
    let mut tickers = Vec::new();
    let mut levels = vec![Vec::new(); n_levels];
    for record in reader.records() {
        let record =
            record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != cols.len() {
            return Err(parse_err(line, "wrong number of fields".into()));
        }
        tickers.push(record[0].to_string());
        for l in 0..n_levels {
            let code: u32 = record[l + 1].parse().map_err(|_| {
                parse_err(line, format!("`{}` is not an integer code", &record[l + 1]))
            })?;
            levels[l].push(code);
        }
    }
    if tickers.is_empty() {
        return Err(ClassifyError::Empty(path.to_path_buf()));
    }
    Classification::new(kind, tickers, levels).map_err(|e| match e {
        ClassifyError::Input(msg) => parse_err(0, msg),
        other => other,
    })
}

/// Loads a `ticker,code` file as a single-level fundamental classification.
pub fn load_fundamental_classification(path: &Path) -> Result<Classification, ClassifyError> {
    let c = read_classification_csv(path)?;
    if c.kind != ClassificationKind::Fundamental {
        return Err(ClassifyError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "expected header `ticker,code`".into(),
        });
    }
    Ok(c)
}

/// Restart count and iteration cap for [`kmeans`].
#[derive(Debug, Clone, Copy)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    /// Row-major `k × dim`.
    pub centroids: Vec<f64>,
    pub k: usize,
    pub inertia: f64,
    pub iterations: usize,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
        let d = dist2(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// One Lloyd run from greedy farthest-point seeding starting at `first`.
fn lloyd(points: &[f64], dim: usize, k: usize, first: usize, max_iter: usize) -> KMeansResult {
    let n = points.len() / dim;
    let point = |i: usize| &points[i * dim..(i + 1) * dim];

    let mut centroids = Vec::with_capacity(k * dim);
    centroids.extend_from_slice(point(first));
    let mut min_d: Vec<f64> = (0..n).map(|i| dist2(point(i), point(first))).collect();
    for _ in 1..k {
        let mut far = 0;
        for i in 1..n {
            if min_d[i] > min_d[far] {
                far = i;
            }
        }
        centroids.extend_from_slice(point(far));
        for (i, d) in min_d.iter_mut().enumerate() {
            *d = d.min(dist2(point(i), point(far)));
        }
    }

    let mut assignments: Vec<usize> = (0..n)
        .map(|i| nearest(point(i), &centroids, dim).0)
        .collect();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut counts = vec![0usize; k];
        let mut sums = vec![0.0; k * dim];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(point(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..dim {
                    centroids[c * dim + j] = sums[c * dim + j] / counts[c] as f64;
                }
            }
        }
        // An emptied cluster takes over the point worst served by its centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let mut worst: Option<(usize, f64)> = None;
                for (i, &a) in assignments.iter().enumerate() {
                    if counts[a] < 2 {
                        continue;
                    }
                    let d = dist2(point(i), &centroids[a * dim..(a + 1) * dim]);
                    if worst.is_none_or(|(_, wd)| d > wd) {
                        worst = Some((i, d));
                    }
                }
                if let Some((i, _)) = worst {
                    counts[assignments[i]] -= 1;
                    counts[c] = 1;
                    assignments[i] = c;
                    centroids[c * dim..(c + 1) * dim].copy_from_slice(point(i));
                }
            }
        }
        let next: Vec<usize> = (0..n)
            .map(|i| nearest(point(i), &centroids, dim).0)
            .collect();
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
    }
    // Final centroids consistent with the final assignment.
    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0; k * dim];
    for (i, &c) in assignments.iter().enumerate() {
        counts[c] += 1;
        for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(point(i)) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for j in 0..dim {
                centroids[c * dim + j] = sums[c * dim + j] / counts[c] as f64;
            }
        }
    }
    let inertia = (0..n)
        .map(|i| {
            dist2(
                point(i),
                &centroids[assignments[i] * dim..(assignments[i] + 1) * dim],
            )
        })
        .sum();
    KMeansResult {
        assignments,
        centroids,
        k,
        inertia,
        iterations,
    }
}

/// k-means over row-major `points` (`n × dim`).
///
/// Each restart seeds by greedy farthest-point selection from a first point
/// drawn from `seed`; the lowest-inertia restart wins (earliest on ties).
/// `k` is clamped to the number of points.
pub fn kmeans(
    points: &[f64],
    dim: usize,
    k: usize,
    seed: u64,
    config: KMeansConfig,
) -> KMeansResult {
    assert!(
        dim > 0 && points.len().is_multiple_of(dim),
        "points must be n × dim"
    );
    let n = points.len() / dim;
    assert!(n > 0, "k-means needs at least one point");
    let k = if k > n {
        warn!("k-means: k = {k} exceeds {n} points; clamping");
        n
    } else {
        k.max(1)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let firsts: Vec<usize> = (0..config.restarts.max(1))
        .map(|_| rng.random_range(0..n))
        .collect();
    let runs: Vec<KMeansResult> = firsts
        .par_iter()
        .map(|&first| lloyd(points, dim, k, first, config.max_iter))
        .collect();
    runs.into_iter()
        .reduce(|best, r| if r.inertia < best.inertia { r } else { best })
        .expect("at least one restart")
}

/// Relabels cluster ids by first appearance so equal partitions print equally.
fn canonical_labels(assign: &[usize]) -> (Vec<u32>, Vec<usize>) {
    let mut map: BTreeMap<usize, u32> = BTreeMap::new();
    let mut order = Vec::new();
    let labels = assign
        .iter()
        .map(|&c| {
            *map.entry(c).or_insert_with(|| {
                order.push(c);
                (order.len() - 1) as u32
            })
        })
        .collect();
    (labels, order)
}

/// Divides each series by its sample standard deviation (zero-variance
/// series become all zeros).
pub fn volatility_normalize(series: &[f64]) -> Vec<f64> {
    let sd = stats::sample_std(series);
    if sd.is_finite() && sd > 0.0 {
        series.iter().map(|x| x / sd).collect()
    } else {
        vec![0.0; series.len()]
    }
}

/// Builds a nested multi-level statistical classification.
///
/// Level 1 clusters the volatility-normalized return vectors; each further
/// level clusters the previous level's centroids and lifts the result back to
/// tickers, so nesting holds by construction.
pub fn build_statistical_classification(
    tickers: &[String],
    returns: &[Vec<f64>],
    levels: &[usize],
    seed: u64,
) -> Result<Classification, ClassifyError> {
    if tickers.is_empty() || tickers.len() != returns.len() {
        return Err(ClassifyError::Input(
            "need one return series per ticker".into(),
        ));
    }
    if levels.is_empty() {
        return Err(ClassifyError::Input("at least one level required".into()));
    }
    let dim = returns[0].len();
    if dim == 0
        || returns
            .iter()
            .any(|r| r.len() != dim || r.iter().any(|x| !x.is_finite()))
    {
        return Err(ClassifyError::Input(
            "return series must share one non-empty length and be finite".into(),
        ));
    }
    let points: Vec<f64> = returns
        .iter()
        .flat_map(|r| volatility_normalize(r))
        .collect();
    let config = KMeansConfig::default();

    let mut out_levels = Vec::with_capacity(levels.len());
    let mut current_points = points;
    let mut ticker_cluster: Vec<usize> = (0..tickers.len()).collect();
    for (l, &k) in levels.iter().enumerate() {
        let res = kmeans(&current_points, dim, k, seed.wrapping_add(l as u64), config);
        // Lift point-level assignment to tickers.
        let lifted: Vec<usize> = ticker_cluster.iter().map(|&p| res.assignments[p]).collect();
        let (labels, order) = canonical_labels(&lifted);
        // Only centroids that carry tickers move on to the next level.
        let mut next_points = Vec::with_capacity(order.len() * dim);
        for &c in &order {
            next_points.extend_from_slice(&res.centroids[c * dim..(c + 1) * dim]);
        }
        ticker_cluster = labels.iter().map(|&x| x as usize).collect();
        out_levels.push(labels);
        current_points = next_points;
    }
    Classification::new(
        ClassificationKind::Statistical,
        tickers.to_vec(),
        out_levels,
    )
}

/// Binary membership matrix: rows are stocks, columns clusters of one level.
/// Stored as the column index of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct DummyMatrix {
    rows: Vec<String>,
    labels: Vec<u32>,
    column_of: Vec<usize>,
}

impl DummyMatrix {
    /// From per-row cluster labels; columns are the distinct labels ascending.
    pub fn from_labels(rows: Vec<String>, row_labels: &[u32]) -> Self {
        assert_eq!(rows.len(), row_labels.len());
        let mut labels = row_labels.to_vec();
        labels.sort_unstable();
        labels.dedup();
        let column_of = row_labels
            .iter()
            .map(|l| labels.binary_search(l).expect("label present"))
            .collect();
        DummyMatrix {
            rows,
            labels,
            column_of,
        }
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.labels.len()
    }

    /// Column holding row `i`'s single 1.
    pub fn column(&self, i: usize) -> usize {
        self.column_of[i]
    }

    pub fn columns(&self) -> &[usize] {
        &self.column_of
    }

    pub fn column_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.labels.len()];
        for &c in &self.column_of {
            sizes[c] += 1;
        }
        sizes
    }

    /// Row indices of each column.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.labels.len()];
        for (i, &c) in self.column_of.iter().enumerate() {
            g[c].push(i);
        }
        g
    }

    /// Keeps the given rows (in order) and drops columns left empty.
    pub fn restrict(&self, keep: &[usize]) -> DummyMatrix {
        let rows = keep.iter().map(|&i| self.rows[i].clone()).collect();
        let labels: Vec<u32> = keep
            .iter()
            .map(|&i| self.labels[self.column_of[i]])
            .collect();
        DummyMatrix::from_labels(rows, &labels)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.labels.len());
        for (i, &c) in self.column_of.iter().enumerate() {
            m[(i, c)] = 1.0;
        }
        m
    }
}

/// Dummy matrix of `classification` at `level` with rows ordered as `members`.
pub fn dummy_matrix(
    classification: &Classification,
    level: usize,
    members: &[String],
) -> Result<DummyMatrix, ClassifyError> {
    if level >= classification.n_levels() {
        return Err(ClassifyError::Level {
            level,
            levels: classification.n_levels(),
        });
    }
    classification.check_covers(members)?;
    let labels: Vec<u32> = members
        .iter()
        .map(|m| classification.cluster_of(level, m).expect("covered"))
        .collect();
    Ok(DummyMatrix::from_labels(members.to_vec(), &labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};
    use std::io::Write;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("T{i:03}")).collect()
    }

    #[test]
    fn fundamental_file_groups_by_code() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sic.csv");
        std::fs::File::create(&p)
            .unwrap()
            .write_all(b"ticker,code\nA,3571\nB,3571\nC,2834\n")
            .unwrap();
        let c = load_fundamental_classification(&p).unwrap();
        assert_eq!(c.n_levels(), 1);
        assert_eq!(c.n_clusters(0), 2);
        assert_eq!(c.cluster_of(0, "A"), Some(3571));
        assert_eq!(c.cluster_of(0, "C"), Some(2834));
        let err = c
            .check_covers(&["A".into(), "Z".into(), "Y".into()])
            .unwrap_err();
        assert!(err.to_string().contains("Z, Y"));
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sic.csv");
        std::fs::write(&p, "ticker,code\n").unwrap();
        assert!(matches!(
            load_fundamental_classification(&p),
            Err(ClassifyError::Empty(_))
        ));
    }

    #[test]
    fn k_equals_n_gives_singletons_and_k_one_gives_one_cluster() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let returns: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..21).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let c = build_statistical_classification(&names(10), &returns, &[10], 1).unwrap();
        assert_eq!(c.n_clusters(0), 10);
        let c = build_statistical_classification(&names(10), &returns, &[1], 1).unwrap();
        assert_eq!(c.n_clusters(0), 1);
        // k > n clamps
        let c = build_statistical_classification(&names(10), &returns, &[25, 4], 1).unwrap();
        assert_eq!(c.n_clusters(0), 10);
        assert_eq!(c.n_clusters(1), 4);
    }

    #[test]
    fn two_orthogonal_factor_groups_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = 60;
        let f1: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
        let f2: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut returns = Vec::new();
        let mut planted = Vec::new();
        for i in 0..100 {
            let f = if i % 2 == 0 { &f1 } else { &f2 };
            let scale = 0.01 * (1.0 + (i % 7) as f64);
            returns.push(
                (0..t)
                    .map(|s| {
                        scale
                            * (f[s]
                                + 0.5 * {
                                    let z: f64 = StandardNormal.sample(&mut rng);
                                    z
                                })
                    })
                    .collect(),
            );
            planted.push(i % 2);
        }
        let c = build_statistical_classification(&names(100), &returns, &[2], 7).unwrap();
        let lv = c.level(0);
        let agree = (0..100)
            .filter(|&i| (lv[i] as usize == planted[i]) == (lv[0] as usize == planted[0]))
            .count();
        assert_eq!(agree, 100);
    }

    #[test]
    fn levels_are_nested_and_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let returns: Vec<Vec<f64>> = (0..150)
            .map(|_| (0..21).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let a =
            build_statistical_classification(&names(150), &returns, &[100, 30, 10], 42).unwrap();
        let b =
            build_statistical_classification(&names(150), &returns, &[100, 30, 10], 42).unwrap();
        assert!(a.is_nested());
        assert_eq!(a, b);
        assert_eq!(a.n_clusters(0), 100);
        assert_eq!(a.n_clusters(1), 30);
        assert_eq!(a.n_clusters(2), 10);
    }

    #[test]
    fn dummy_matrix_small_cases() {
        let c = Classification::new(
            ClassificationKind::Fundamental,
            vec!["A".into(), "B".into(), "C".into()],
            vec![vec![7, 7, 9]],
        )
        .unwrap();
        let m = dummy_matrix(&c, 0, &["A".into(), "B".into(), "C".into()]).unwrap();
        let dense = m.to_dense();
        assert_eq!(dense.nrows(), 3);
        assert_eq!(
            dense.row(0).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 0.0]
        );
        assert_eq!(
            dense.row(1).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 0.0]
        );
        assert_eq!(
            dense.row(2).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 1.0]
        );

        let one = Classification::new(
            ClassificationKind::Fundamental,
            vec!["A".into(), "B".into()],
            vec![vec![1, 1]],
        )
        .unwrap();
        let m = dummy_matrix(&one, 0, &["B".into(), "A".into()]).unwrap();
        assert_eq!(m.n_cols(), 1);
        assert_eq!(m.column_sizes(), vec![2]);

        assert!(matches!(
            dummy_matrix(&one, 0, &["Q".into()]),
            Err(ClassifyError::Missing(_))
        ));
        // restricting drops empty columns
        let r = dummy_matrix(&c, 0, &["A".into(), "B".into(), "C".into()])
            .unwrap()
            .restrict(&[0, 1]);
        assert_eq!(r.n_cols(), 1);
    }

    #[test]
    fn statistical_csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let returns: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..21).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let c = build_statistical_classification(&names(40), &returns, &[12, 5, 2], 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stat.csv");
        c.write_csv(&p).unwrap();
        assert_eq!(read_classification_csv(&p).unwrap(), c);
    }
}
