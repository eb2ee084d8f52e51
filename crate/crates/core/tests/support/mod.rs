//! Fixtures and independent reference implementations shared by the
//! integration tests (and by the acceptance suite in the CLI crate).
#![allow(dead_code, clippy::needless_range_loop)]

pub mod dsp_oracle;
pub mod fixtures;
pub mod knn_oracle;
pub mod mock_sidecar;
pub mod network_oracle;
pub mod signals;
