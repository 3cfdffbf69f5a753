//! Large-`n` predictions: the functions `𝓕`, `𝓖`, the coefficients of the
//! log-MGF expansion, per-order cumulant coefficients and the partition
//! function expansion.

mod cumulants;
mod functions;
mod theorem;
mod zn;

pub use cumulants::{
    bulk_cumulant_coeffs, bulk_cumulant_coeffs_with, edge_closed_form, edge_cumulant_coeffs, edge_cumulant_coeffs_with,
    outside_cumulant_coeffs, CumulantSeries,
};
pub use functions::{f_func, f_of_u, g_func, g_of_u, UDerivatives, MAX_DERIVATIVE};
pub use theorem::{
    coefficients_at, disk_coefficients, predict_log_mgf, theorem_coefficients, theorem_coefficients_with, Coefficients,
    DiskContribution, ExpansionCoefficients, EDGE_S_FLAG,
};
pub use zn::{
    barnes_constant, inverse_n_coefficient, rational_approximation, zn_expansion, zn_expansion_with_cap, zn_residual, ZnExpansion,
    DEFAULT_RATIONAL_CAP,
};
