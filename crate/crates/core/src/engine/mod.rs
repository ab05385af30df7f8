//! Strong quasiconvexity estimation: defects, σ̂ and μ̂ sweeps, certification,
//! and the one-dimensional restriction checks.

mod function;
mod lemma;
mod region;
mod sweep;

pub use function::{FunctionSpec, Objective};
pub use lemma::{
    boundedness_probe, lambda_interpolation_check, restriction_midpoint_modulus, BoundednessRow,
    InterpolationOutcome, RayObjective, INTERPOLATION_TOL,
};
pub use region::RegionSpec;
pub use sweep::{
    certify, defect, defect_from_values, midpoint_conversion_check, mu_hat, ratio_from_values,
    sigma_hat, Certification, DefectRow, MidpointConversion, MidpointEstimate, PairSample,
    SqcEstimate, Sweep, Witness, CSV_HEADER, EXCLUSION_BAND, NOISE_ULPS, RATIO_CLAMP,
    RATIO_RESOLUTION,
};
