use serde::{Deserialize, Serialize};

use super::sweep::CellSummary;
use crate::error::Error;
use crate::verify::{check_bounds, BoundInput, BoundReport, InteractionBatch};

/// Bound and property checks for one sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub protocol: String,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub k: Option<usize>,
    pub bounds: Option<BoundReport>,
    pub problems: Vec<String>,
}

impl CellCheck {
    pub fn is_consistent(&self) -> bool {
        self.problems.is_empty() && self.bounds.as_ref().map_or(true, BoundReport::is_consistent)
    }
}

/// Checks every cell against the lower bounds that apply to it and against
/// the protocol's own guarantees (safety, validity, silence).
pub fn check_cells(cells: &[CellSummary]) -> Result<Vec<CellCheck>, Error> {
    cells.iter().map(check_cell).collect()
}

pub fn check_cell(cell: &CellSummary) -> Result<CellCheck, Error> {
    let config = cell.config()?;
    let traits = config.traits()?;
    let range = config.declared_range()?;
    let mut problems = Vec::new();
    if traits.safe && cell.safety_violations > 0 {
        problems.push(format!("{} runs changed a defined label", cell.safety_violations));
    }
    if traits.certain_validity && cell.validity_failures > 0 {
        problems.push(format!("{} runs ended with an invalid labeling", cell.validity_failures));
    }
    if cell.certification_failures > 0 {
        problems.push(format!("{} runs stopped in a non-terminal configuration", cell.certification_failures));
    }
    if let (Some(range), Some(max)) = (range, cell.max_label) {
        if max > range {
            problems.push(format!("label {max} outside the declared range [1, {range}]"));
        }
    }
    let bounds = match (range, cell.census_min) {
        (Some(range), Some(census)) => {
            let batch = cell.interactions.map(|s| InteractionBatch {
                trials: s.count,
                mean: s.mean,
                stderr: s.stderr,
            });
            Some(check_bounds(&BoundInput {
                n: cell.n,
                range,
                traits,
                census,
                batch,
            }))
        }
        _ => None,
    };
    Ok(CellCheck {
        protocol: cell.protocol.clone(),
        n: cell.n,
        epsilon: cell.epsilon,
        k: cell.k,
        bounds,
        problems,
    })
}
