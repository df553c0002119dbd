//! Run configuration: every tunable in one place, loadable from a plain
//! `key = value` file. Blank lines and `#` comments are ignored.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::symmslic::SymmSlicParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub symmslic: SymmSlicParams,
    /// Window side used when reporting the detection probability.
    pub u: usize,
    /// Axis matching tolerances, degrees and pixels.
    pub angle_tol: f64,
    pub dist_tol: f64,
    /// Boundary recall tolerance in pixels.
    pub boundary_radius: usize,
    /// Keep only the largest connected piece of segmentation masks.
    pub largest_component: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            symmslic: SymmSlicParams::default(),
            u: 5,
            angle_tol: 10.0,
            dist_tol: 20.0,
            boundary_radius: 2,
            largest_component: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Parse(format!("{key} = {value}: {e}")))
}

impl Config {
    /// One seed drives every random stage.
    pub fn set_seed(&mut self, seed: u64) {
        self.symmslic.seed = seed;
        self.symmslic.pairs.seed = seed;
        self.symmslic.clusters.seed = seed;
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.symmslic;
        match key {
            "seed" => {
                let seed = parse(key, value)?;
                self.set_seed(seed);
            }
            "k" => s.k = parse(key, value)?,
            "lambda" => s.lambda = parse(key, value)?,
            "max_iters" | "iters" => s.max_iters = parse(key, value)?,
            "conv_tol" => s.conv_tol = parse(key, value)?,
            "appearance_tol" => s.appearance_tol = parse(key, value)?,
            "p" => s.pairs.p = parse(key, value)?,
            "h" => s.pairs.h = parse(key, value)?,
            "epsilon" => s.pairs.epsilon = parse(key, value)?,
            "score_threshold" => s.pairs.score_threshold = parse(key, value)?,
            "edge_low" => s.pairs.edge_low = parse(key, value)?,
            "edge_high" => s.pairs.edge_high = parse(key, value)?,
            "min_separation" => s.pairs.min_separation = parse(key, value)?,
            "tau" => s.clusters.tau = parse(key, value)?,
            "anchor_tol" => s.clusters.anchor_tol = parse(key, value)?,
            "max_axes" => s.clusters.max_axes = parse(key, value)?,
            "min_cluster_size" => s.clusters.min_cluster_size = parse(key, value)?,
            "min_relative_size" => s.clusters.min_relative_size = parse(key, value)?,
            "max_graph_pairs" => s.clusters.max_graph_pairs = parse(key, value)?,
            "u" => self.u = parse(key, value)?,
            "angle_tol" => self.angle_tol = parse(key, value)?,
            "dist_tol" => self.dist_tol = parse(key, value)?,
            "boundary_radius" | "r" => self.boundary_radius = parse(key, value)?,
            "largest_component" => self.largest_component = parse(key, value)?,
            _ => return Err(Error::Parse(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        if !(0.0..1.0).contains(&self.symmslic.clusters.tau) {
            return Err(Error::InvalidParameter("tau must lie in [0, 1)".into()));
        }
        self.symmslic.validate()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Config::default();
        c.apply(&text)?;
        Ok(c)
    }
}
