//! Independent reference solvers used to validate the main pipeline.

mod eigen;
mod monolithic;

pub use eigen::eigen_oracle;
pub use monolithic::{
    march_cylinder, solve_monolithic, solve_monolithic_with, OracleOptions, MAX_ORACLE_NODES,
};
