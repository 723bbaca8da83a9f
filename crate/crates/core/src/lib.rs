//! Center-vector encoding for nuclear instance segmentation.
//!
//! Ground-truth instance maps are encoded into three targets: an inside mask,
//! a center mask of per-nucleus center regions, and a two-channel center
//! vector giving each nucleus pixel's displacement from its instance
//! centroid. [`decoding`] inverts this: every inside pixel follows its vector
//! back to a center region. [`losses`] holds the training objective with
//! analytic gradients, [`metrics`] the AJI/IoU/Dice evaluation, and [`rw`] a
//! seeded random walker baseline that ignores the vectors. [`synth`] produces
//! reproducible synthetic scenes so the whole loop runs without a network.

pub mod cli;
pub mod config;
pub mod decoding;
pub mod encoding;
pub mod error;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod morph;
pub mod raster;
pub mod rw;
pub mod synth;

pub use error::{Error, Result};
pub use raster::{BinaryMask, Connectivity, Grid, LabelMap, RasterShape, ScalarField, VectorField};
