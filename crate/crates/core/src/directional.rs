//! Directional regime structure: per-eigendirection regime parameters, the
//! α-spread across directions, and the trace-free deviation tensor
//! Δ = M − (tr M／tr F)·F that measures how far a mass tensor departs from
//! proportionality with the Fisher matrix.

use serde::Serialize;

use crate::expfam::FisherMatrix;
use crate::spectral::{eig_sym, frobenius, Matrix, Spectrum};
use crate::{Error, Result};

/// Classification of one Fisher eigendirection relative to the mean regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DirectionClass {
    OverMassive,
    UnderMassive,
    Balanced,
}

impl std::fmt::Display for DirectionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = match self {
            DirectionClass::OverMassive => "over-massive",
            DirectionClass::UnderMassive => "under-massive",
            DirectionClass::Balanced => "balanced",
        };
        write!(f, "{label}")
    }
}

/// Per-direction summary produced alongside the deviation tensor.
///
/// Directions are ordered by ascending Fisher eigenvalue. With β = 0 every
/// directional α degenerates to 1 and the spread to 0; the deviation
/// quantities remain meaningful.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    /// Shift β used for the directional regime parameters.
    pub beta: f64,
    /// α along each Fisher eigendirection: λ_k/(λ_k + β).
    pub alpha_dir: Vec<f64>,
    /// Regime parameter of the trace ratio: ratio/(ratio + β).
    pub alpha_mean: f64,
    /// α_max − α_min across directions.
    pub alpha_spread: f64,
    /// tr M / tr F, the proportionality constant removed by the deviation.
    pub trace_ratio: f64,
    /// Quadratic forms v_kᵀ Δ v_k; the eigenvalues of Δ when M commutes
    /// with F (in particular for M = F²). Always sums to zero.
    pub deviation_eigs: Vec<f64>,
    /// ‖Δ‖_F / ‖M‖_F; zero exactly when M ∝ F.
    pub deviation_fraction: f64,
    /// Sign of each deviation eigenvalue, with a relative dead band.
    pub classification: Vec<DirectionClass>,
}

/// Regime parameter along one Fisher eigendirection: λ/(λ + β).
pub fn directional_alpha(lambda: f64, beta: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("eigenvalue {lambda} must be positive")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("shift beta = {beta} must be positive")));
    }
    Ok(lambda / (lambda + beta))
}

/// Spread α_max − α_min across eigendirections, via the closed form
/// β(λ_max − λ_min)/[(λ_max+β)(λ_min+β)], cross-checked against the direct
/// difference of directional α values.
pub fn alpha_spread(spectrum: &Spectrum, beta: f64) -> Result<f64> {
    let (lo, hi) = (spectrum.lambda_min(), spectrum.lambda_max());
    let closed = beta * (hi - lo) / ((hi + beta) * (lo + beta));
    let direct = directional_alpha(hi, beta)? - directional_alpha(lo, beta)?;
    if (closed - direct).abs() > 1e-12 {
        return Err(Error::Numeric(format!(
            "alpha spread cross-check failed: {closed} vs {direct}"
        )));
    }
    Ok(closed)
}

/// The mass tensor used throughout the catalog experiments: M = F².
pub fn default_mass(fisher: &FisherMatrix) -> Matrix {
    fisher
        .matrix()
        .matmul(fisher.matrix())
        .expect("square matrix times itself")
}

/// Signs of the deviation eigenvalues with a relative dead band of
/// 1e-10·max|δ_k|.
pub fn classify_directions(deviation_eigs: &[f64]) -> Vec<DirectionClass> {
    let scale = deviation_eigs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let tol = 1e-10 * scale;
    deviation_eigs
        .iter()
        .map(|&d| {
            if d > tol {
                DirectionClass::OverMassive
            } else if d < -tol {
                DirectionClass::UnderMassive
            } else {
                DirectionClass::Balanced
            }
        })
        .collect()
}

/// Deviation tensor Δ = M − (tr M/tr F)·F together with its per-direction
/// report. β > 0 yields meaningful directional α values; β = 0 is accepted
/// for observers whose predicted regime shift is zero.
pub fn deviation_tensor(
    fisher: &FisherMatrix,
    mass: &Matrix,
    beta: f64,
) -> Result<(Matrix, DeviationReport)> {
    if mass.dim() != fisher.dim() {
        return Err(Error::Dimension(format!(
            "mass tensor dimension {} does not match Fisher dimension {}",
            mass.dim(),
            fisher.dim()
        )));
    }
    if !mass.is_symmetric(1e-10) {
        return Err(Error::Domain(format!(
            "mass tensor asymmetry {:.3e} exceeds tolerance",
            mass.asymmetry()
        )));
    }
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::Domain(format!("shift beta = {beta} must be nonnegative")));
    }
    let f = fisher.matrix();
    let trace_f: f64 = (0..f.dim()).map(|i| f.get(i, i)).sum();
    if trace_f <= 0.0 {
        return Err(Error::Domain(format!(
            "Fisher trace {trace_f} must be positive"
        )));
    }
    let trace_m: f64 = (0..mass.dim()).map(|i| mass.get(i, i)).sum();
    let trace_ratio = trace_m / trace_f;

    let delta = mass.add_scaled(f, -trace_ratio).expect("dimensions checked");

    let spectrum = eig_sym(f)?;
    let d = f.dim();
    let mut deviation_eigs = Vec::with_capacity(d);
    for k in 0..d {
        let v = spectrum.eigenvector(k);
        let dv = delta.matvec(&v).expect("dimensions checked");
        deviation_eigs.push(v.iter().zip(&dv).map(|(a, b)| a * b).sum());
    }

    let (alpha_dir, alpha_mean, spread) = if beta > 0.0 {
        let alphas = spectrum
            .eigenvalues()
            .iter()
            .map(|&l| directional_alpha(l, beta))
            .collect::<Result<Vec<_>>>()?;
        (
            alphas,
            trace_ratio / (trace_ratio + beta),
            alpha_spread(&spectrum, beta)?,
        )
    } else {
        (vec![1.0; d], 1.0, 0.0)
    };

    let mass_norm = frobenius(mass);
    let deviation_fraction = if mass_norm > 0.0 {
        frobenius(&delta) / mass_norm
    } else {
        0.0
    };

    let report = DeviationReport {
        beta,
        classification: classify_directions(&deviation_eigs),
        alpha_dir,
        alpha_mean,
        alpha_spread: spread,
        trace_ratio,
        deviation_eigs,
        deviation_fraction,
    };
    Ok((delta, report))
}
