//! Random construction instances and brute-force reference solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use statarb::classify::DummyMatrix;
use statarb::riskmodel::{build_risk_model, RiskModel, RiskModelConfig};
use statarb::stats;

pub const GROSS: f64 = 2e7;

pub struct Instance {
    pub dummy: DummyMatrix,
    pub returns: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
    pub signal: Vec<f64>,
    pub bounds: Vec<f64>,
    pub model: RiskModel,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `n` members in up to `max_clusters` industries with factor-structured
/// returns over `days` days, and bounds around `bound_scale · I / n`.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_clusters: usize,
    days: usize,
    bound_scale: f64,
) -> Instance {
    let k = rng.random_range(1..=max_clusters.min(n));
    let labels: Vec<u32> = (0..n).map(|_| rng.random_range(1..=k as u32)).collect();
    let names: Vec<String> = (0..n).map(|i| format!("S{i}")).collect();
    let dummy = DummyMatrix::from_labels(names, &labels);
    let market: Vec<f64> = (0..days).map(|_| 0.01 * normal(rng)).collect();
    let industry: Vec<Vec<f64>> = (0..=k)
        .map(|_| (0..days).map(|_| 0.01 * normal(rng)).collect())
        .collect();
    let returns: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let vol = 0.01 + 0.03 * rng.random::<f64>();
            let b: f64 = rng.random_range(0.5..1.5);
            (0..days)
                .map(|t| b * market[t] + industry[labels[i] as usize][t] + vol * normal(rng))
                .collect()
        })
        .collect();
    let variances: Vec<f64> = returns
        .iter()
        .map(|r| stats::sample_variance(r).max(1e-8))
        .collect();
    let signal: Vec<f64> = (0..n).map(|_| 0.02 * normal(rng)).collect();
    let bounds: Vec<f64> = (0..n)
        .map(|_| bound_scale * GROSS / n as f64 * rng.random_range(0.2..2.0))
        .collect();
    let model = build_risk_model(&returns, &dummy, RiskModelConfig::default()).expect("risk model");
    Instance {
        dummy,
        returns,
        variances,
        signal,
        bounds,
        model,
    }
}

/// Euclidean projection onto `{Σx = 0, |x_i| ≤ b_i}` by bisection on the shift.
fn project_zero_sum_box(y: &[f64], b: &[f64]) -> Vec<f64> {
    let at = |mu: f64| -> f64 { y.iter().zip(b).map(|(y, b)| (y - mu).clamp(-b, *b)).sum() };
    let span =
        y.iter().fold(0.0f64, |a, v| a.max(v.abs())) + b.iter().fold(0.0f64, |a, v| a.max(*v));
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * span {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    y.iter()
        .zip(b)
        .map(|(y, b)| (y - mu).clamp(-b, *b))
        .collect()
}

/// Minimizes `½ xᵀHx + gᵀx` over the product, across `groups`, of
/// `{Σ_group x = 0, |x_i| ≤ b_i}` by accelerated projected gradient with
/// adaptive restart.
pub fn projected_gradient(
    h: &DMatrix<f64>,
    g: &[f64],
    b: &[f64],
    groups: &[Vec<usize>],
    max_iter: usize,
) -> Vec<f64> {
    let n = g.len();
    let lmax = SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, v| a.max(*v));
    let step = 1.0 / lmax;
    let project = |v: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(n);
        for grp in groups {
            let y: Vec<f64> = grp.iter().map(|&i| v[i]).collect();
            let bb: Vec<f64> = grp.iter().map(|&i| b[i]).collect();
            for (&i, x) in grp.iter().zip(project_zero_sum_box(&y, &bb)) {
                out[i] = x;
            }
        }
        out
    };
    let gv = DVector::from_column_slice(g);
    let f = |x: &DVector<f64>| 0.5 * x.dot(&(h * x)) + gv.dot(x);
    let mut x = DVector::zeros(n);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = f(&x);
    let mut best = fx;
    let mut since_best = 0;
    for _ in 0..max_iter {
        let grad = h * &y + &gv;
        let xn = project(&(&y - grad * step));
        let fxn = f(&xn);
        if fxn > fx && t > 1.0 {
            // restart momentum from the last accepted point
            y = x.clone();
            t = 1.0;
            continue;
        }
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &xn + (&xn - &x) * ((t - 1.0) / tn);
        x = xn;
        fx = fxn;
        t = tn;
        if fx < best - 1e-15 * best.abs() {
            best = fx;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= 1000 {
                break;
            }
        }
    }
    x.iter().copied().collect()
}

/// Weighted least-squares residuals from the normal equations.
pub fn dense_residuals(signal: &[f64], dummy: &DummyMatrix, weights: &[f64]) -> Vec<f64> {
    let l = dummy.to_dense();
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(weights));
    let r = DVector::from_column_slice(signal);
    let beta = (l.transpose() * &w * &l)
        .lu()
        .solve(&(l.transpose() * &w * &r))
        .expect("nonsingular");
    (r - l * beta).iter().copied().collect()
}

/// Unbounded dollar-neutral mean-variance optimum normalized to gross `I`,
/// from the dense KKT system.
pub fn dense_unbounded_optimum(
    gamma: &DMatrix<f64>,
    expected: &[f64],
    gross: f64,
) -> (Vec<f64>, f64) {
    let n = expected.len();
    let mut kkt = DMatrix::zeros(n + 1, n + 1);
    kkt.view_mut((0, 0), (n, n)).copy_from(gamma);
    for i in 0..n {
        kkt[(i, n)] = 1.0;
        kkt[(n, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        rhs[i] = expected[i];
    }
    let sol = kkt.lu().solve(&rhs).expect("nonsingular KKT");
    let x: Vec<f64> = (0..n).map(|i| sol[i]).collect();
    let lambda = x.iter().map(|v| v.abs()).sum::<f64>() / gross;
    (x.iter().map(|v| v / lambda).collect(), lambda)
}
