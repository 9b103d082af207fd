//! Portfolio construction: bounded industry-neutral weighted regression (REG)
//! and bounded dollar-neutral mean-variance optimization (OPT).

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::classify::DummyMatrix;
use crate::riskmodel::RiskModel;
use crate::signals::Direction;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("reduced covariance system is not positive definite")]
    NotPositiveDefinite,
}

/// Signed dollar positions per member (long positive, short negative).
#[derive(Debug, Clone, PartialEq)]
pub struct Holdings {
    pub dollars: Vec<f64>,
    /// Gross notional the construction was normalized to.
    pub gross_target: f64,
    /// Absolute position bound per member.
    pub bounds: Vec<f64>,
    pub info: SolveInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveInfo {
    pub iterations: usize,
    pub converged: bool,
    /// Largest KKT violation relative to the largest expected return (OPT only).
    pub kkt_residual: f64,
    /// Risk aversion that puts the unbounded neutral optimum at the gross target (OPT only).
    pub risk_aversion: Option<f64>,
}

impl SolveInfo {
    fn trivial() -> Self {
        SolveInfo {
            iterations: 0,
            converged: true,
            kkt_residual: 0.0,
            risk_aversion: None,
        }
    }
}

impl Holdings {
    pub fn zeros(n: usize, gross_target: f64, bounds: Vec<f64>) -> Self {
        Holdings {
            dollars: vec![0.0; n],
            gross_target,
            bounds,
            info: SolveInfo::trivial(),
        }
    }

    pub fn gross(&self) -> f64 {
        self.dollars.iter().map(|d| d.abs()).sum()
    }

    pub fn net(&self) -> f64 {
        self.dollars.iter().sum()
    }

    pub fn is_flat(&self) -> bool {
        self.dollars.iter().all(|d| *d == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OptimizerConfig {
    /// Cap on active-set iterations; `None` uses `10·n + 100`.
    pub max_iterations: Option<usize>,
}

fn check_len(expected: usize, actual: usize) -> Result<(), ConstructError> {
    if expected == actual {
        Ok(())
    } else {
        Err(ConstructError::Dimension { expected, actual })
    }
}

/// Residuals of the weighted cross-sectional regression of `values` on the
/// dummy matrix: each value minus its cluster's weighted mean.
pub fn weighted_regression_residuals(
    values: &[f64],
    industries: &DummyMatrix,
    weights: &[f64],
) -> Result<Vec<f64>, ConstructError> {
    check_len(industries.n_rows(), values.len())?;
    check_len(industries.n_rows(), weights.len())?;
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(ConstructError::Invalid("weights must be positive".into()));
    }
    let k = industries.n_cols();
    let mut num = vec![0.0; k];
    let mut den = vec![0.0; k];
    for (i, (&v, &w)) in values.iter().zip(weights).enumerate() {
        let c = industries.column(i);
        num[c] += w * v;
        den[c] += w;
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = industries.column(i);
            v - num[c] / den[c]
        })
        .collect())
}

/// Minimizes `Σ c_i (x_i − y_i)²` subject to `Σ x_i = 0` and `|x_i| ≤ b_i`.
///
/// The optimum is `x_i(μ) = clamp(y_i + μ / c_i, ±b_i)` for the `μ` at which
/// the clamped sum vanishes. That sum is piecewise linear and non-decreasing
/// in `μ`, so the root is found exactly by scanning its breakpoints.
fn bounded_zero_sum(target: &[f64], curvature: &[f64], bounds: &[f64]) -> Vec<f64> {
    let x_at = |mu: f64| -> Vec<f64> {
        target
            .iter()
            .zip(curvature)
            .zip(bounds)
            .map(|((y, c), b)| (y + mu / c).clamp(-b, *b))
            .collect()
    };
    let sum_at = |mu: f64| -> f64 { x_at(mu).iter().sum() };
    let mut breaks: Vec<f64> = Vec::with_capacity(2 * target.len());
    for ((y, c), b) in target.iter().zip(curvature).zip(bounds) {
        breaks.push(c * (-b - y));
        breaks.push(c * (b - y));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // First breakpoint where the sum is non-negative.
    let (mut lo, mut hi) = (0usize, breaks.len() - 1);
    if sum_at(breaks[hi]) < 0.0 {
        return x_at(breaks[hi]);
    }
    if sum_at(breaks[0]) >= 0.0 {
        return x_at(breaks[0]);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if sum_at(breaks[mid]) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (m0, m1) = (breaks[lo], breaks[hi]);
    let (s0, s1) = (sum_at(m0), sum_at(m1));
    let mu = if s1 == s0 {
        m1
    } else {
        m0 + (m1 - m0) * (-s0) / (s1 - s0)
    };
    x_at(mu)
}

/// Bounded industry-neutral regression portfolio.
///
/// The unbounded target is `D*_i = s·η·ε_i/σ²_i` with `s` the direction sign
/// and `η` normalizing gross to `gross`. With bounds, each cluster solves
/// `min Σ σ²_i (D_i − D*_i)²` subject to zero net dollars in the cluster and
/// `|D_i| ≤ B_i`. Gross is not rescaled after bounding.
pub fn regression_portfolio(
    signal: &[f64],
    industries: &DummyMatrix,
    variances: &[f64],
    bounds: &[f64],
    direction: Direction,
    gross: f64,
) -> Result<Holdings, ConstructError> {
    let n = industries.n_rows();
    check_len(n, signal.len())?;
    check_len(n, bounds.len())?;
    if bounds.iter().any(|b| !(*b >= 0.0)) {
        return Err(ConstructError::Invalid(
            "bounds must be non-negative".into(),
        ));
    }
    let weights: Vec<f64> = variances.iter().map(|v| 1.0 / v).collect();
    let eps = weighted_regression_residuals(signal, industries, &weights)?;
    let raw: Vec<f64> = eps.iter().zip(variances).map(|(e, v)| e / v).collect();
    let norm: f64 = raw.iter().map(|x| x.abs()).sum();
    if norm == 0.0 || !norm.is_finite() {
        return Ok(Holdings::zeros(n, gross, bounds.to_vec()));
    }
    let eta = direction.sign() * gross / norm;
    let target: Vec<f64> = raw.iter().map(|x| eta * x).collect();
    if target.iter().zip(bounds).all(|(d, b)| d.abs() <= *b) {
        return Ok(Holdings {
            dollars: target,
            gross_target: gross,
            bounds: bounds.to_vec(),
            info: SolveInfo::trivial(),
        });
    }
    let mut dollars = target.clone();
    for group in industries.groups() {
        let y: Vec<f64> = group.iter().map(|&i| target[i]).collect();
        if y.iter().zip(&group).all(|(d, &i)| d.abs() <= bounds[i]) {
            continue;
        }
        let c: Vec<f64> = group.iter().map(|&i| variances[i]).collect();
        let b: Vec<f64> = group.iter().map(|&i| bounds[i]).collect();
        for (&i, x) in group.iter().zip(bounded_zero_sum(&y, &c, &b)) {
            dollars[i] = x;
        }
    }
    Ok(Holdings {
        dollars,
        gross_target: gross,
        bounds: bounds.to_vec(),
        info: SolveInfo {
            iterations: 1,
            ..SolveInfo::trivial()
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Free,
    Upper,
    Lower,
}

/// `Γ = diag(ξ²) + U Uᵀ` restricted to a working free set, inverted through
/// the Woodbury identity with an incrementally maintained capacitance matrix.
struct FactorSystem<'a> {
    xi: &'a [f64],
    u: &'a DMatrix<f64>,
    capacitance: DMatrix<f64>,
    updates: usize,
}

impl<'a> FactorSystem<'a> {
    fn new(model: &'a RiskModel) -> Self {
        let r = model.factor_root().ncols();
        FactorSystem {
            xi: model.specific_var(),
            u: model.factor_root(),
            capacitance: DMatrix::identity(r, r),
            updates: 0,
        }
    }

    fn rebuild(&mut self, status: &[Status]) {
        let r = self.u.ncols();
        let mut c = DMatrix::identity(r, r);
        for (i, s) in status.iter().enumerate() {
            if *s == Status::Free {
                self.rank_one(&mut c, i, 1.0);
            }
        }
        self.capacitance = c;
        self.updates = 0;
    }

    fn rank_one(&self, c: &mut DMatrix<f64>, i: usize, sign: f64) {
        let r = self.u.ncols();
        let w = sign / self.xi[i];
        for a in 0..r {
            let ua = self.u[(i, a)] * w;
            for b in 0..r {
                c[(a, b)] += ua * self.u[(i, b)];
            }
        }
    }

    fn set_free(&mut self, i: usize, free: bool, status: &[Status]) {
        self.updates += 1;
        if self.updates >= 64 {
            self.rebuild(status);
        } else {
            let mut c = std::mem::replace(&mut self.capacitance, DMatrix::zeros(0, 0));
            self.rank_one(&mut c, i, if free { 1.0 } else { -1.0 });
            self.capacitance = c;
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let ut = self.u.tr_mul(&DVector::from_column_slice(x));
        let ux = self.u * ut;
        x.iter()
            .zip(self.xi)
            .zip(ux.iter())
            .map(|((x, s), f)| s * x + f)
            .collect()
    }

    /// Solves `Γ_FF z = y` for each right-hand side, with `y` given on the
    /// free indices `free`.
    fn solve_free(
        &self,
        free: &[usize],
        rhs: &[Vec<f64>],
    ) -> Result<Vec<Vec<f64>>, ConstructError> {
        let chol =
            Cholesky::new(self.capacitance.clone()).ok_or(ConstructError::NotPositiveDefinite)?;
        let r = self.u.ncols();
        rhs.iter()
            .map(|y| {
                let z: Vec<f64> = free.iter().zip(y).map(|(&i, yi)| yi / self.xi[i]).collect();
                let mut w = DVector::zeros(r);
                for (&i, zi) in free.iter().zip(&z) {
                    for a in 0..r {
                        w[a] += self.u[(i, a)] * zi;
                    }
                }
                let s = chol.solve(&w);
                Ok(free
                    .iter()
                    .zip(&z)
                    .map(|(&i, zi)| {
                        let mut us = 0.0;
                        for a in 0..r {
                            us += self.u[(i, a)] * s[a];
                        }
                        zi - us / self.xi[i]
                    })
                    .collect())
            })
            .collect()
    }
}

/// Bounded dollar-neutral mean-variance optimum.
///
/// Maximizes `EᵀD − (λ/2) DᵀΓD` subject to `Σ D_i = 0` and `|D_i| ≤ B_i`.
/// `λ` is set so the unbounded neutral optimum has gross exactly `gross`;
/// bounds are then enforced by a primal active-set method that keeps every
/// iterate feasible, so a capped run still returns a feasible portfolio.
pub fn optimize_portfolio(
    expected: &[f64],
    model: &RiskModel,
    bounds: &[f64],
    gross: f64,
    config: OptimizerConfig,
) -> Result<Holdings, ConstructError> {
    let n = model.n_members();
    check_len(n, expected.len())?;
    check_len(n, bounds.len())?;
    if expected.iter().any(|e| !e.is_finite()) {
        return Err(ConstructError::Invalid(
            "expected returns must be finite".into(),
        ));
    }
    if bounds.iter().any(|b| !(*b >= 0.0)) {
        return Err(ConstructError::Invalid(
            "bounds must be non-negative".into(),
        ));
    }
    let e_scale = expected.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    if e_scale == 0.0 || n < 2 {
        return Ok(Holdings::zeros(n, gross, bounds.to_vec()));
    }

    let mut sys = FactorSystem::new(model);
    let all: Vec<usize> = (0..n).collect();
    let mut status = vec![Status::Free; n];
    sys.rebuild(&status);
    let sol = sys.solve_free(&all, &[expected.to_vec(), vec![1.0; n]])?;
    let (a, b) = (&sol[0], &sol[1]);
    let nu = a.iter().sum::<f64>() / b.iter().sum::<f64>();
    let x0: Vec<f64> = a.iter().zip(b).map(|(a, b)| a - nu * b).collect();
    let gross0: f64 = x0.iter().map(|x| x.abs()).sum();
    if !(gross0 > 0.0) || !gross0.is_finite() {
        return Ok(Holdings::zeros(n, gross, bounds.to_vec()));
    }
    let lambda = gross0 / gross;
    let unbounded: Vec<f64> = x0.iter().map(|x| x / lambda).collect();
    if unbounded.iter().zip(bounds).all(|(d, b)| d.abs() <= *b) {
        let kkt = kkt_residual(&sys, expected, lambda, &unbounded, &status, e_scale);
        return Ok(Holdings {
            dollars: unbounded,
            gross_target: gross,
            bounds: bounds.to_vec(),
            info: SolveInfo {
                iterations: 1,
                converged: true,
                kkt_residual: kkt,
                risk_aversion: Some(lambda),
            },
        });
    }

    let max_iter = config.max_iterations.unwrap_or(10 * n + 100);
    let e_over_l: Vec<f64> = expected.iter().map(|e| e / lambda).collect();
    let mut d = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    let g_tol = 1e-11;
    while iterations < max_iter {
        iterations += 1;
        let free: Vec<usize> = (0..n).filter(|&i| status[i] == Status::Free).collect();
        let fixed: Vec<f64> = (0..n)
            .map(|i| if status[i] == Status::Free { 0.0 } else { d[i] })
            .collect();
        let fixed_sum: f64 = fixed.iter().sum();
        let h = sys.apply(&fixed);
        // Scaled multiplier ν/λ of the neutrality constraint at the EQP optimum.
        let (target, nu_scaled) = if free.is_empty() {
            (
                Vec::new(),
                free_set_empty_multiplier(&sys, &e_over_l, &d, &status),
            )
        } else {
            let y: Vec<f64> = free.iter().map(|&i| e_over_l[i] - h[i]).collect();
            let ones = vec![1.0; free.len()];
            let sol = sys.solve_free(&free, &[y, ones])?;
            let nu = (sol[0].iter().sum::<f64>() + fixed_sum) / sol[1].iter().sum::<f64>();
            (
                sol[0]
                    .iter()
                    .zip(&sol[1])
                    .map(|(a, b)| a - nu * b)
                    .collect::<Vec<f64>>(),
                nu,
            )
        };
        // Longest feasible step toward the EQP optimum.
        let mut alpha = 1.0;
        let mut block: Option<(usize, Status)> = None;
        for (&i, &x) in free.iter().zip(&target) {
            let p = x - d[i];
            if x > bounds[i] && p > 0.0 {
                let s = (bounds[i] - d[i]) / p;
                if s < alpha {
                    alpha = s;
                    block = Some((i, Status::Upper));
                }
            } else if x < -bounds[i] && p < 0.0 {
                let s = (-bounds[i] - d[i]) / p;
                if s < alpha {
                    alpha = s;
                    block = Some((i, Status::Lower));
                }
            }
        }
        let alpha = alpha.max(0.0);
        for (&i, &x) in free.iter().zip(&target) {
            d[i] += alpha * (x - d[i]);
        }
        if let Some((i, s)) = block {
            status[i] = s;
            d[i] = if s == Status::Upper {
                bounds[i]
            } else {
                -bounds[i]
            };
            sys.set_free(i, false, &status);
            continue;
        }
        // At the working-set optimum: check bound multipliers.
        let gd = sys.apply(&d);
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..n {
            let g = (gd[i] - e_over_l[i] + nu_scaled) * lambda / e_scale;
            let violation = match status[i] {
                Status::Upper => g,
                Status::Lower => -g,
                Status::Free => continue,
            };
            if violation > g_tol && worst.is_none_or(|(_, w)| violation > w) {
                worst = Some((i, violation));
            }
        }
        match worst {
            Some((i, _)) => {
                status[i] = Status::Free;
                sys.set_free(i, true, &status);
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    // Pin any accumulated drift in the neutrality balance onto a free member.
    let drift: f64 = d.iter().sum();
    if drift != 0.0 {
        if let Some(i) = (0..n)
            .filter(|&i| status[i] == Status::Free && (d[i] - drift).abs() <= bounds[i])
            .max_by(|&a, &b| (bounds[a] - d[a].abs()).total_cmp(&(bounds[b] - d[b].abs())))
        {
            d[i] -= drift;
        }
    }
    let kkt = kkt_residual(&sys, expected, lambda, &d, &status, e_scale);
    Ok(Holdings {
        dollars: d,
        gross_target: gross,
        bounds: bounds.to_vec(),
        info: SolveInfo {
            iterations,
            converged,
            kkt_residual: kkt,
            risk_aversion: Some(lambda),
        },
    })
}

/// Neutrality multiplier (scaled by 1/λ) when every member sits at a bound:
/// the midpoint of the interval in which all bound multipliers have the
/// right sign (or of the least-violated choice when that interval is empty).
fn free_set_empty_multiplier(
    sys: &FactorSystem<'_>,
    e_over_l: &[f64],
    d: &[f64],
    status: &[Status],
) -> f64 {
    let gd = sys.apply(d);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..d.len() {
        let g = gd[i] - e_over_l[i];
        match status[i] {
            Status::Upper => hi = hi.min(-g),
            Status::Lower => lo = lo.max(-g),
            Status::Free => {}
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

fn kkt_residual(
    sys: &FactorSystem<'_>,
    expected: &[f64],
    lambda: f64,
    d: &[f64],
    status: &[Status],
    e_scale: f64,
) -> f64 {
    // Gradient of λ/2 DᵀΓD − EᵀD; the neutrality multiplier is the least-squares
    // fit over free members.
    let gd = sys.apply(d);
    let grad: Vec<f64> = (0..d.len()).map(|i| lambda * gd[i] - expected[i]).collect();
    let free: Vec<usize> = (0..d.len())
        .filter(|&i| status[i] == Status::Free)
        .collect();
    let nu = if free.is_empty() {
        0.0
    } else {
        -free.iter().map(|&i| grad[i]).sum::<f64>() / free.len() as f64
    };
    let mut worst = 0.0f64;
    for i in 0..d.len() {
        let g = grad[i] + nu;
        let v = match status[i] {
            Status::Free => g.abs(),
            Status::Upper => g.max(0.0),
            Status::Lower => (-g).max(0.0),
        };
        worst = worst.max(v);
    }
    worst / e_scale
}
