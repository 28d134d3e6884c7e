//! Quadrature, log-domain arithmetic and special functions.
//!
//! Library-wide conventions: `dA = dx dy / π` and `Δ = ∂∂̄ = ¼(∂²_x + ∂²_y)`.

mod logvalue;
mod quadrature;
mod special;

pub use logvalue::{log_add_exp, log_sum_exp, Compensated, CompensatedComplex, LogValue};
pub use quadrature::{gauss_legendre, LineRule, PlanarQuadrature, Scheme};
pub use special::{
    ln_factorial, log_regularized_lower_gamma, lower_incomplete_gamma, trunc_exp_complex, trunc_exp_log,
};

pub(crate) use special::trunc_exp_log_real;

