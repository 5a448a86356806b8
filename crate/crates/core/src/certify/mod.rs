//! Quantities the recovery guarantee depends on: D-RIP constants of a
//! sensing operator over a dictionary, the concentration of `|A v|^2`, the
//! closed-form constants of the error bound, and a check of the bound itself.

mod constants;
mod drip;

pub use constants::{
    theorem_constants, theorem_constants_7s, theorem_constants_with, verify_error_bound, ConstantsReport,
    ErrorBoundCheck, K2Form,
};
pub use drip::{
    concentration_check, drip_exact_small, drip_exact_small_capped, drip_monte_carlo, DripEstimate, DripMethod,
    DEFAULT_ENUMERATION_CAP,
};
