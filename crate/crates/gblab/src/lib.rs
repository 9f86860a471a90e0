//! Birkhoff sums of cost functions along Gauss-map orbits of rationals, the
//! twisted Gauss–Kuzmin–Wirsing transfer operator, oscillatory-integral
//! expansions, reference stable laws and the arithmetic kernels (Dedekind
//! sums, modular symbols, Estermann values, quadratic-form sums) that feed them.

pub mod arithfun;
pub mod birkhoff;
pub mod costs;
pub mod error;
pub mod numeric;
pub mod oscint;
pub mod rationals;
pub mod special;
pub mod stablelaws;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64;
