//! Cross-checks between the simulated law and the theory: Feynman–Kac
//! against the PDE solver, the evolution (Chapman–Kolmogorov) property,
//! Itô–Peskir residuals and generator martingale defects.
//!
//! Every pass/fail decision is `|defect| ≤ k·se + slack` with the slack
//! recorded in the report.

mod chapman;
mod feynman_kac;
mod generator;
mod peskir;

pub use chapman::{chapman_kolmogorov_test, CkConfig, CkReport, CkRow};
pub use feynman_kac::{
    compare_fk, compare_fk_with, feynman_kac_mc, ComparisonReport, ComparisonRow, FKEstimate, FkTolerance, McConfig,
};
pub use generator::{martingale_defect, DefectRow, GeneratorReport, GeneratorTestFn};
pub use peskir::{ito_peskir_residual, PeskirConfig, PeskirReport, PeskirTestFn};
