//! Dense-matrix oracles, Monte-Carlo checks and the parameter-sweep driver
//! built on `fdcomm-core`.

pub mod matrix_oracle;
pub mod monte_carlo;
pub mod sweep;
