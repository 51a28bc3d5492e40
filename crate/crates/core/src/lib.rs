//! Model selection for least-squares histogram regression: V-fold
//! cross-validation, V-fold penalties, Mallows' Cp and friends, plus a
//! simulation bench that measures each criterion against the exact oracle.
//!
//! ```
//! use vfold_core::experiments::{benchmark, Bench};
//! use vfold_core::selectors::parse_selector_list;
//!
//! let bench = Bench::preset("S1").unwrap();
//! let selectors = parse_selector_list("mal,2fcv,penloo+").unwrap();
//! let table = benchmark(&bench, &selectors, 4, 42, None).unwrap();
//! assert_eq!(table.rows.len(), 3);
//! assert!(table.rows.iter().all(|r| r.c_path_or >= 1.0));
//! ```

pub mod binom;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod histogram;
pub mod quadrature;
pub mod resampling;
pub mod selectors;

pub use error::{Error, Result};
