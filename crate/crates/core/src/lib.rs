// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact propagators and transition probabilities of periodically driven
//! two-level systems.

pub mod bessel;
pub mod divdiff;
pub mod error;
pub mod gbf;
pub mod kernel;
pub mod mat2;
pub mod oracle;
pub mod presets;
pub mod propagator;
pub mod quadrature;
pub mod rwa;
pub mod waveform;

pub use error::{Error, Result};
pub use gbf::GbfTable;
pub use mat2::{Mat2, Unitary2};
pub use waveform::DriveSpec;
