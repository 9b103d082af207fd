//! Factor risk model: one principal-component factor per industry plus a
//! market factor, with specific variances matched to sample variances.
//!
//! The covariance is kept in factor form, `Γ = Ξ + Ω Φ Ωᵀ`, and never
//! materialized except in tests and audits.

use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::classify::DummyMatrix;
use crate::signals::VARIANCE_FLOOR;
use crate::stats;

#[derive(Debug, Error)]
pub enum RiskModelError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("need at least 2 return observations per member, got {0}")]
    InsufficientData(usize),
    #[error("non-finite return for member {0}")]
    NonFinite(usize),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskModelConfig {
    /// Lower bound on specific variance as a fraction of sample variance.
    pub floor_fraction: f64,
}

impl Default for RiskModelConfig {
    fn default() -> Self {
        RiskModelConfig {
            floor_fraction: 0.05,
        }
    }
}

/// How the specific-variance floor was honored when building a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FloorAdjustment {
    /// No member hit the floor.
    None,
    /// `Φ` was blended toward its diagonal by this weight.
    DiagonalShrink(f64),
    /// Shrinking toward the diagonal could not restore the floor; this many
    /// members had their loading rows scaled down instead.
    RowScale(usize),
}

#[derive(Debug, Clone)]
pub struct RiskModel {
    loadings: DMatrix<f64>,
    factor_cov: DMatrix<f64>,
    specific_var: Vec<f64>,
    sample_var: Vec<f64>,
    /// `U = Ω L` with `Φ = L Lᵀ`, so the factor part is `U Uᵀ`.
    factor_root: DMatrix<f64>,
    pub floor_adjustment: FloorAdjustment,
}

/// Unit first principal component of the correlation matrix of `series`
/// (rows), sign fixed so the components sum to a non-negative number.
/// Falls back to equal weights when the correlation matrix is undefined or
/// its leading eigenvalue is degenerate.
fn first_principal_component(series: &[&[f64]]) -> (Vec<f64>, bool) {
    let m = series.len();
    let equal = || vec![1.0 / (m as f64).sqrt(); m];
    if m == 1 {
        return (vec![1.0], true);
    }
    let t = series[0].len();
    let mut z = DMatrix::zeros(m, t);
    for (i, s) in series.iter().enumerate() {
        let mu = stats::mean(s);
        let ss: f64 = s.iter().map(|x| (x - mu) * (x - mu)).sum();
        if !(ss > 0.0 && ss.is_finite()) {
            return (equal(), false);
        }
        let norm = ss.sqrt();
        for (j, x) in s.iter().enumerate() {
            z[(i, j)] = (x - mu) / norm;
        }
    }
    let corr = &z * z.transpose();
    let eig = SymmetricEigen::new(corr);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let (l1, l2) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if !(l1 > 0.0) || l1 - l2 <= 1e-10 * l1 {
        return (equal(), false);
    }
    let mut v: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    (v, true)
}

/// Moore-Penrose inverse of a symmetric PSD matrix.
fn psd_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tol = max * 1e-12 * m.nrows() as f64;
    let inv: DVector<f64> = eig.eigenvalues.map(|l| if l > tol { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// Symmetric square-root factor `L` (K × r) with `Φ ≈ L Lᵀ`, dropping
/// non-positive eigen-directions.
fn psd_root(phi: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(phi.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&j| eig.eigenvalues[j] > max * 1e-14)
        .collect();
    let mut l = DMatrix::zeros(phi.nrows(), keep.len());
    for (c, &j) in keep.iter().enumerate() {
        let s = eig.eigenvalues[j].sqrt();
        for r in 0..phi.nrows() {
            l[(r, c)] = eig.eigenvectors[(r, j)] * s;
        }
    }
    l
}

fn row_quadratic(loadings: &DMatrix<f64>, phi: &DMatrix<f64>, i: usize) -> f64 {
    let row = loadings.row(i);
    let nz: Vec<usize> = (0..row.len()).filter(|&a| row[a] != 0.0).collect();
    let mut q = 0.0;
    for &a in &nz {
        for &b in &nz {
            q += row[a] * row[b] * phi[(a, b)];
        }
    }
    q
}

/// Builds the model from member return series (rows, oldest first) and the
/// industry dummy matrix whose rows are the same members.
pub fn build_risk_model(
    returns: &[Vec<f64>],
    industries: &DummyMatrix,
    config: RiskModelConfig,
) -> Result<RiskModel, RiskModelError> {
    let n = returns.len();
    if industries.n_rows() != n {
        return Err(RiskModelError::Dimension {
            expected: industries.n_rows(),
            actual: n,
        });
    }
    if n == 0 {
        return Err(RiskModelError::Invalid("no members".into()));
    }
    let t = returns[0].len();
    if t < 2 {
        return Err(RiskModelError::InsufficientData(t));
    }
    for (i, r) in returns.iter().enumerate() {
        if r.len() != t {
            return Err(RiskModelError::Dimension {
                expected: t,
                actual: r.len(),
            });
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(RiskModelError::NonFinite(i));
        }
    }
    let sample_var: Vec<f64> = returns
        .iter()
        .map(|r| stats::sample_variance(r).max(VARIANCE_FLOOR))
        .collect();
    let sigma: Vec<f64> = sample_var.iter().map(|v| v.sqrt()).collect();

    let n_ind = industries.n_cols();
    let k = n_ind + 1;
    let market = n_ind;
    let mut loadings = DMatrix::zeros(n, k);
    for (a, group) in industries.groups().iter().enumerate() {
        let series: Vec<&[f64]> = group.iter().map(|&i| returns[i].as_slice()).collect();
        let (v, ok) = first_principal_component(&series);
        if !ok {
            warn!(
                "risk model: industry {} has a singular correlation matrix; using equal-weight loadings",
                industries.labels()[a]
            );
        }
        for (&i, vi) in group.iter().zip(&v) {
            loadings[(i, a)] = sigma[i] * vi;
        }
    }
    for i in 0..n {
        loadings[(i, market)] = sigma[i];
    }

    // Daily factor returns by weighted cross-sectional regression, weights 1/σ².
    let mut gram = DMatrix::zeros(k, k);
    let mut rhs = DMatrix::zeros(k, t);
    for i in 0..n {
        let w = 1.0 / sample_var[i];
        let a = industries.column(i);
        let (la, lm) = (loadings[(i, a)], loadings[(i, market)]);
        gram[(a, a)] += la * la * w;
        gram[(a, market)] += la * lm * w;
        gram[(market, a)] += la * lm * w;
        gram[(market, market)] += lm * lm * w;
        for (s, r) in returns[i].iter().enumerate() {
            rhs[(a, s)] += la * w * r;
            rhs[(market, s)] += lm * w * r;
        }
    }
    let factor_returns = psd_pinv(&gram) * rhs;
    let means = factor_returns.column_mean();
    let centered = DMatrix::from_fn(k, t, |f, s| factor_returns[(f, s)] - means[f]);
    let mut phi = (&centered * centered.transpose()) / (t - 1) as f64;
    phi = (&phi + phi.transpose()) * 0.5;

    let floor = config.floor_fraction;
    let target: Vec<f64> = sample_var.iter().map(|v| (1.0 - floor) * v).collect();
    let diag_full: Vec<f64> = (0..n).map(|i| row_quadratic(&loadings, &phi, i)).collect();
    let mut floor_adjustment = FloorAdjustment::None;
    if (0..n).any(|i| diag_full[i] > target[i]) {
        let phi_diag = DMatrix::from_diagonal(&phi.diagonal());
        let diag_only: Vec<f64> = (0..n)
            .map(|i| row_quadratic(&loadings, &phi_diag, i))
            .collect();
        // Each member's factor variance is linear in the blend weight α.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for i in 0..n {
            let (a, b, tg) = (diag_full[i], diag_only[i], target[i]);
            if b < a {
                lo = lo.max((a - tg) / (a - b));
            } else if b > a {
                hi = hi.min((tg - a) / (b - a));
            } else if a > tg {
                lo = f64::INFINITY;
            }
        }
        if lo <= hi && lo <= 1.0 {
            phi = &phi * (1.0 - lo) + &phi_diag * lo;
            floor_adjustment = FloorAdjustment::DiagonalShrink(lo);
        } else {
            let mut scaled = 0;
            for i in 0..n {
                if diag_full[i] > target[i] {
                    let c = (target[i] / diag_full[i]).sqrt();
                    loadings.row_mut(i).scale_mut(c);
                    scaled += 1;
                }
            }
            warn!("risk model: specific-variance floor restored by scaling {scaled} loading rows");
            floor_adjustment = FloorAdjustment::RowScale(scaled);
        }
    }
    let specific_var: Vec<f64> = (0..n)
        .map(|i| (sample_var[i] - row_quadratic(&loadings, &phi, i)).max(floor * sample_var[i]))
        .collect();
    let factor_root = &loadings * psd_root(&phi);
    Ok(RiskModel {
        loadings,
        factor_cov: phi,
        specific_var,
        sample_var,
        factor_root,
        floor_adjustment,
    })
}

impl RiskModel {
    /// Assembles a model from explicit parts.
    pub fn from_parts(
        loadings: DMatrix<f64>,
        factor_cov: DMatrix<f64>,
        specific_var: Vec<f64>,
        sample_var: Vec<f64>,
    ) -> Result<Self, RiskModelError> {
        let n = loadings.nrows();
        if factor_cov.nrows() != loadings.ncols() || factor_cov.ncols() != loadings.ncols() {
            return Err(RiskModelError::Dimension {
                expected: loadings.ncols(),
                actual: factor_cov.nrows(),
            });
        }
        if specific_var.len() != n || sample_var.len() != n {
            return Err(RiskModelError::Dimension {
                expected: n,
                actual: specific_var.len().min(sample_var.len()),
            });
        }
        if specific_var.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(RiskModelError::Invalid(
                "specific variances must be positive".into(),
            ));
        }
        let factor_root = &loadings * psd_root(&factor_cov);
        Ok(RiskModel {
            loadings,
            factor_cov,
            specific_var,
            sample_var,
            factor_root,
            floor_adjustment: FloorAdjustment::None,
        })
    }

    pub fn n_members(&self) -> usize {
        self.loadings.nrows()
    }

    pub fn n_factors(&self) -> usize {
        self.loadings.ncols()
    }

    pub fn loadings(&self) -> &DMatrix<f64> {
        &self.loadings
    }

    pub fn factor_cov(&self) -> &DMatrix<f64> {
        &self.factor_cov
    }

    pub fn specific_var(&self) -> &[f64] {
        &self.specific_var
    }

    pub fn sample_var(&self) -> &[f64] {
        &self.sample_var
    }

    /// `U` with `Ω Φ Ωᵀ = U Uᵀ`.
    pub fn factor_root(&self) -> &DMatrix<f64> {
        &self.factor_root
    }

    /// Diagonal of `Γ`.
    pub fn implied_variance(&self) -> Vec<f64> {
        (0..self.n_members())
            .map(|i| self.specific_var[i] + row_quadratic(&self.loadings, &self.factor_cov, i))
            .collect()
    }

    /// `Γ x = Ξ x + Ω (Φ (Ωᵀ x))`.
    pub fn covariance_apply(&self, x: &[f64]) -> Result<Vec<f64>, RiskModelError> {
        if x.len() != self.n_members() {
            return Err(RiskModelError::Dimension {
                expected: self.n_members(),
                actual: x.len(),
            });
        }
        let xv = DVector::from_column_slice(x);
        let factor = &self.loadings * (&self.factor_cov * (self.loadings.transpose() * &xv));
        Ok(x.iter()
            .zip(&self.specific_var)
            .zip(factor.iter())
            .map(|((xi, s), f)| s * xi + f)
            .collect())
    }

    /// Dense `Γ`; only sensible for small membership.
    pub fn dense_covariance(&self) -> DMatrix<f64> {
        let mut g = &self.loadings * &self.factor_cov * self.loadings.transpose();
        for i in 0..self.n_members() {
            g[(i, i)] += self.specific_var[i];
        }
        g
    }

    /// The model for a subset of members (rows kept in the given order).
    pub fn restrict(&self, keep: &[usize]) -> RiskModel {
        RiskModel {
            loadings: self.loadings.select_rows(keep),
            factor_cov: self.factor_cov.clone(),
            specific_var: keep.iter().map(|&i| self.specific_var[i]).collect(),
            sample_var: keep.iter().map(|&i| self.sample_var[i]).collect(),
            factor_root: self.factor_root.select_rows(keep),
            floor_adjustment: self.floor_adjustment,
        }
    }

    /// Writes `loadings.csv`, `factor_cov.csv` and `specific_var.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path, members: &[String]) -> Result<(), RiskModelError> {
        use std::io::Write;
        if members.len() != self.n_members() {
            return Err(RiskModelError::Dimension {
                expected: self.n_members(),
                actual: members.len(),
            });
        }
        std::fs::create_dir_all(dir)?;
        let k = self.n_factors();
        let header: Vec<String> = (0..k)
            .map(|f| {
                if f + 1 == k {
                    "market".into()
                } else {
                    format!("f{f}")
                }
            })
            .collect();
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("loadings.csv"))?);
        writeln!(w, "ticker,{}", header.join(","))?;
        for (i, m) in members.iter().enumerate() {
            let row: Vec<String> = self.loadings.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(w, "{m},{}", row.join(","))?;
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("factor_cov.csv"))?);
        writeln!(w, "factor,{}", header.join(","))?;
        for (f, name) in header.iter().enumerate() {
            let row: Vec<String> = self
                .factor_cov
                .row(f)
                .iter()
                .map(|x| x.to_string())
                .collect();
            writeln!(w, "{name},{}", row.join(","))?;
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("specific_var.csv"))?);
        writeln!(w, "ticker,specific_var,sample_var")?;
        for (i, m) in members.iter().enumerate() {
            writeln!(w, "{m},{},{}", self.specific_var[i], self.sample_var[i])?;
        }
        Ok(())
    }
}
