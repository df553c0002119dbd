pub mod axis;
pub mod cli;
pub mod clustering;
pub mod config;
pub mod curve;
pub mod edges;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod hull;
pub mod image;
pub mod io;
pub mod metrics;
pub mod overlay;
pub mod pairs;
pub mod reflection;
pub mod segment;
pub mod symmslic;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{Pixel, Vec2};
