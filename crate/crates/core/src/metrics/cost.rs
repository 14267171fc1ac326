use serde::{Deserialize, Serialize};

use super::MetricError;

/// Theoretical FP64 efficiency of an NVIDIA A100, in FLOPS per watt.
pub const A100_FP64_FLOPS_PER_WATT: f64 = 38.8e9;

/// Inputs of the theoretical energy consumption (TEC) estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub flops_per_prediction: f64,
    /// Floating point operations per second per watt.
    pub flops_per_watt: f64,
    pub n_predictions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TecEstimate {
    pub joules_per_prediction: f64,
    pub total_joules: f64,
}

/// TEC = FLOPs / (FLOPS/W), in joules per prediction, and the total over
/// `n_predictions`.
pub fn tec(cost: &CostModel) -> Result<TecEstimate, MetricError> {
    for (name, v) in [
        ("flops per prediction", cost.flops_per_prediction),
        ("flops per watt", cost.flops_per_watt),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(MetricError::Invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let per = cost.flops_per_prediction / cost.flops_per_watt;
    Ok(TecEstimate {
        joules_per_prediction: per,
        total_joules: per * cost.n_predictions as f64,
    })
}
