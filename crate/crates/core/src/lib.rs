// SPDX-License-Identifier: MIT OR Apache-2.0

//! Saddlepoint and bootstrap tail approximations for the first serial
//! correlation coefficient of an AR(1) series.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod ar1;
pub mod bootstrap;
pub mod cgf;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod rng;
pub mod saddlepoint;

pub use error::{Error, Result};
