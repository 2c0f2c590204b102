use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ExplainError, PerturbedSample};

/// Default width of the exponential locality kernel.
pub const DEFAULT_KERNEL_WIDTH: f64 = 0.25;

/// Exponential kernel over the cosine distance between `presence` and the
/// unperturbed document (all ones): `D = 1 - sqrt(kept / m)`,
/// `weight = exp(-D² / width²)`.
pub fn locality_weight(presence: &[bool], kernel_width: f64) -> f64 {
    let m = presence.len() as f64;
    let kept = presence.iter().filter(|&&p| p).count() as f64;
    let distance = 1.0 - (kept / m).sqrt();
    (-(distance * distance) / (kernel_width * kernel_width)).exp()
}

/// Closed-form weighted ridge solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Weighted R² on the training rows.
    pub r2: f64,
}

/// Minimizes `Σ wᵢ (yᵢ - b - c·xᵢ)² + λ‖c‖²` with an unpenalized intercept `b`
/// by solving the normal equations
/// `[Σw  Σw xᵀ; Σw x  Xᵀ W X + λI] [b; c] = [Σw y; Xᵀ W y]`.
pub fn fit_weighted_ridge(
    rows: &[Vec<f64>],
    labels: &[f64],
    weights: &[f64],
    regularization: f64,
) -> Result<RidgeFit, ExplainError> {
    let n = rows.len();
    if n < 2 {
        return Err(ExplainError::TooFewSamples(n));
    }
    assert_eq!(labels.len(), n, "one label per row");
    assert_eq!(weights.len(), n, "one weight per row");
    let p = rows[0].len();
    let dim = p + 1;

    let weight_total: f64 = weights.iter().sum();
    let mean = labels.iter().zip(weights).map(|(y, w)| w * y).sum::<f64>() / weight_total;
    let total_ss: f64 = labels
        .iter()
        .zip(weights)
        .map(|(y, w)| w * (y - mean) * (y - mean))
        .sum();
    if total_ss <= 0.0 || total_ss.is_nan() {
        return Err(ExplainError::Degenerate { label: labels[0] });
    }

    // Upper triangle of AᵀWA with A = [1 | X]; rows are mostly 0/1, so only
    // nonzero columns are visited.
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    let mut nonzero: Vec<(usize, f64)> = Vec::with_capacity(dim);
    for ((row, &y), &w) in rows.iter().zip(labels).zip(weights) {
        assert_eq!(row.len(), p, "rows must share one width");
        nonzero.clear();
        nonzero.push((0, 1.0));
        nonzero.extend(row.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(j, &x)| (j + 1, x)));
        for (a, &(i, xi)) in nonzero.iter().enumerate() {
            let wxi = w * xi;
            rhs[i] += wxi * y;
            for &(j, xj) in &nonzero[a..] {
                gram[(i, j)] += wxi * xj;
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    for j in 1..dim {
        gram[(j, j)] += regularization;
    }

    let solution = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or(ExplainError::SingularSystem)?,
    };

    let intercept = solution[0];
    let coefficients: Vec<f64> = solution.iter().skip(1).copied().collect();
    let residual_ss: f64 = rows
        .iter()
        .zip(labels)
        .zip(weights)
        .map(|((row, y), w)| {
            let predicted = intercept + row.iter().zip(&coefficients).map(|(x, c)| x * c).sum::<f64>();
            w * (y - predicted) * (y - predicted)
        })
        .sum();

    Ok(RidgeFit {
        intercept,
        coefficients,
        r2: 1.0 - residual_ss / total_ss,
    })
}

/// The local surrogate: one signed coefficient per vocabulary term.
/// Positive coefficients push toward the relevant class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationModel {
    pub coefficients: BTreeMap<String, f64>,
    pub intercept: f64,
    pub local_fit_r2: f64,
    pub n_samples_used: usize,
}

/// Fits the surrogate on labelled, weighted samples whose presence vectors
/// are indexed by `features`.
pub fn fit_local_model(
    features: &[&str],
    samples: &[PerturbedSample],
    regularization: f64,
) -> Result<ExplanationModel, ExplainError> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    let mut weights = Vec::with_capacity(samples.len());
    for sample in samples {
        let (Some(label), Some(weight)) = (sample.label, sample.weight) else {
            return Err(ExplainError::UnlabelledSample);
        };
        assert_eq!(sample.presence.len(), features.len(), "presence indexed by features");
        rows.push(sample.presence.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect());
        labels.push(label);
        weights.push(weight);
    }
    if let Some(&first) = labels.first() {
        if labels.len() >= 2 && labels.iter().all(|l| l.to_bits() == first.to_bits()) {
            return Err(ExplainError::Degenerate { label: first });
        }
    }
    let fit = fit_weighted_ridge(&rows, &labels, &weights, regularization)?;
    Ok(ExplanationModel {
        coefficients: features
            .iter()
            .map(|f| f.to_string())
            .zip(fit.coefficients)
            .collect(),
        intercept: fit.intercept,
        local_fit_r2: fit.r2,
        n_samples_used: samples.len(),
    })
}
