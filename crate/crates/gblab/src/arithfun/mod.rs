//! Arithmetic kernels: Dedekind sums, Ramanujan τ, critical L-values and
//! modular symbols of Δ, Estermann values and quadratic-form sums.

mod cache;
pub mod cusp;
pub mod dedekind;
pub mod estermann;
pub mod hurwitz;
pub mod modsym;
pub mod quadform;
pub mod tau;

pub use cusp::{critical_lambda, CuspFormData};
pub use dedekind::{dedekind_cf_approx, dedekind_exact, dedekind_sum_direct, DedekindObservable};
pub use estermann::{
    estermann_central, estermann_d, estermann_main, zeta_half_squared, EstermannRow, EstermannTable,
};
pub use hurwitz::{hurwitz_zeta, riemann_zeta};
pub use modsym::{
    modsym, modsym_reciprocity, modsym_with, period_function, DeltaPeriodFunction, ModsymMethod,
};
pub use quadform::{forms_positive_at, quadform_f, quadform_f_f64, QuadForm};
pub use tau::{divisor_counts, ramanujan_tau};

/// Exact rational with arbitrary-precision numerator and denominator.
pub type ExactRational = num_rational::BigRational;
