use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sweep::CellSummary;
use crate::error::Error;

/// Growth laws a cell's mean interaction count is fitted against, each of
/// the form `a * predictor(n, eps)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "n-ln-n")]
    NLnN,
    #[serde(rename = "n2")]
    NSquared,
    #[serde(rename = "n3")]
    NCubed,
    #[serde(rename = "n-ln-n-over-eps")]
    NLnNOverEps,
    #[serde(rename = "n2-over-eps2")]
    NSquaredOverEps2,
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::NLnN,
        Model::NSquared,
        Model::NCubed,
        Model::NLnNOverEps,
        Model::NSquaredOverEps2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::NLnN => "n-ln-n",
            Model::NSquared => "n2",
            Model::NCubed => "n3",
            Model::NLnNOverEps => "n-ln-n-over-eps",
            Model::NSquaredOverEps2 => "n2-over-eps2",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Model::NLnN => "a*n*ln(n)",
            Model::NSquared => "a*n^2",
            Model::NCubed => "a*n^3",
            Model::NLnNOverEps => "a*n*ln(n)/eps",
            Model::NSquaredOverEps2 => "a*n^2/eps^2",
        }
    }

    /// Predictor value; models with `eps` treat a missing epsilon as 1.
    pub fn predictor(self, n: usize, epsilon: Option<f64>) -> f64 {
        let n = n as f64;
        let e = epsilon.unwrap_or(1.0);
        match self {
            Model::NLnN => n * n.ln(),
            Model::NSquared => n * n,
            Model::NCubed => n * n * n,
            Model::NLnNOverEps => n * n.ln() / e,
            Model::NSquaredOverEps2 => n * n / (e * e),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// One `(parameters, measured mean)` observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub epsilon: Option<f64>,
    pub mean: f64,
}

impl FitPoint {
    pub fn from_cells(cells: &[CellSummary]) -> Vec<FitPoint> {
        cells
            .iter()
            .filter_map(|c| {
                c.interactions.map(|s| FitPoint {
                    n: c.n,
                    epsilon: c.epsilon,
                    mean: s.mean,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub n: usize,
    pub epsilon: Option<f64>,
    pub predictor: f64,
    pub measured: f64,
    pub fitted: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    pub formula: String,
    pub coefficient: f64,
    pub r_squared: f64,
    pub residuals: Vec<Residual>,
    /// Least-squares slope of `ln(mean)` against `ln(n)`; a diagnostic only.
    pub loglog_slope: Option<f64>,
}

impl FitResult {
    /// Largest over smallest `measured / predictor` across the cells.
    pub fn ratio_spread(&self) -> f64 {
        let ratios = self.residuals.iter().map(|r| r.measured / r.predictor);
        let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi / lo
    }
}

/// Least squares through the origin of `mean` on the model's predictor.
/// Needs at least three distinct predictor values.
pub fn fit_points(points: &[FitPoint], model: Model) -> Result<FitResult, Error> {
    let xs: Vec<f64> = points.iter().map(|p| model.predictor(p.n, p.epsilon)).collect();
    let mut distinct = xs.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::TooFewCells(distinct.len()));
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| x * p.mean).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let a = sxy / sxx;
    let mean_y = points.iter().map(|p| p.mean).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|p| (p.mean - mean_y).powi(2)).sum();
    let residuals: Vec<Residual> = xs
        .iter()
        .zip(points)
        .map(|(&x, p)| Residual {
            n: p.n,
            epsilon: p.epsilon,
            predictor: x,
            measured: p.mean,
            fitted: a * x,
            residual: p.mean - a * x,
        })
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r.residual.powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(FitResult {
        model,
        formula: model.formula().to_string(),
        coefficient: a,
        r_squared,
        residuals,
        loglog_slope: loglog_slope(points),
    })
}

pub fn fit(cells: &[CellSummary], model: Model) -> Result<FitResult, Error> {
    fit_points(&FitPoint::from_cells(cells), model)
}

/// Ordinary least-squares slope of `ln(mean)` on `ln(n)`.
pub fn loglog_slope(points: &[FitPoint]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.mean > 0.0 && p.n > 0)
        .map(|p| ((p.n as f64).ln(), p.mean.ln()))
        .collect();
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
