pub mod cfunction;
pub mod cli;
pub mod compact_duals;
pub mod error;
pub mod gap_params;
pub mod gamma;
pub mod ktype_search;
pub mod laplace_sim;
pub mod quadrature;
pub mod stieltjes;

pub use error::{Error, Result};
