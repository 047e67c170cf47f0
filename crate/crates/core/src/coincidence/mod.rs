//! Seeded Monte Carlo coincidence experiments.
//!
//! Every experiment is described by one unfolded [`OpticalLayout`]: the
//! signal arm is read backwards from the pumped crystal (a planar quantum
//! mirror element), the idler arm forwards from it up to the scanning
//! detector D2. Trials are split into shards, each drawing from its own
//! ChaCha stream, and shard histograms are merged in shard order, so a run
//! is a pure function of its configuration and seed.

mod arms;
mod direct;
mod ghost_diffraction;
mod ghost_image;
mod histogram;
mod source;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, OpticalLayout, ScanAxis};
use crate::kinematics::KinematicsError;

pub use arms::Arms;
pub use direct::{run_direct_qm, DirectQmResult};
pub use ghost_diffraction::{
    bin_averaged_model, fit_slit_width, max_deviation_sigmas, run_ghost_diffraction, AdvancedWave, APERTURE_POINTS,
};
pub use ghost_image::{peak_separation, run_ghost_image, sharpness, GhostImagingGeometry};
pub use histogram::CoincidenceHistogram;
pub use source::{SampledPair, SourceModel};
pub use stats::{chi_square_sf, flatness_test, homogeneity_test};

/// Default number of shards a run is split into.
pub const DEFAULT_SHARDS: usize = 8;

/// One in this many recorded coincidences is re-checked for exact
/// energy-momentum conservation.
pub const AUDIT_EVERY: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoincidenceError {
    #[error("invalid experiment configuration: {0}")]
    ConfigInvalid(String),
    #[error("too few counts for a chi-square test: {expected} expected per bin, need at least 5")]
    InsufficientCounts { expected: f64 },
    #[error("histograms have different scan axes")]
    ScanMismatch,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

fn default_efficiency() -> f64 {
    1.0
}

fn default_shards() -> usize {
    DEFAULT_SHARDS
}

/// Detector and sharding options shared by the coincidence experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McOptions {
    #[serde(default = "default_shards")]
    pub shards: usize,
    /// Quantum efficiency of D1 (Bernoulli thinning).
    #[serde(default = "default_efficiency")]
    pub efficiency_d1: f64,
    /// Quantum efficiency of D2.
    #[serde(default = "default_efficiency")]
    pub efficiency_d2: f64,
    /// Mean accidental coincidences per bin over the whole run.
    #[serde(default)]
    pub background: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { shards: DEFAULT_SHARDS, efficiency_d1: 1.0, efficiency_d2: 1.0, background: 0.0 }
    }
}

impl McOptions {
    pub fn validate(&self) -> Result<(), CoincidenceError> {
        if self.shards == 0 {
            return Err(CoincidenceError::ConfigInvalid("shards must be >= 1".into()));
        }
        for (name, eta) in [("efficiency_d1", self.efficiency_d1), ("efficiency_d2", self.efficiency_d2)] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(CoincidenceError::ConfigInvalid(format!("{name} = {eta} outside [0, 1]")));
            }
        }
        if !(self.background >= 0.0) || !self.background.is_finite() {
            return Err(CoincidenceError::ConfigInvalid(format!("background = {} must be >= 0", self.background)));
        }
        Ok(())
    }
}

/// Result of the conservation audit on sampled coincidences.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Audit {
    pub checked: u64,
    pub failed: u64,
    /// Largest relative momentum residual seen.
    pub max_residual: f64,
}

impl Audit {
    fn merge(&mut self, o: &Audit) {
        self.checked += o.checked;
        self.failed += o.failed;
        self.max_residual = self.max_residual.max(o.max_residual);
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

/// Merged histogram together with the conservation audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRun {
    pub histogram: CoincidenceHistogram,
    pub audit: Audit,
}

/// Per-shard counters.
pub(crate) struct Tally {
    pub coincidences: Vec<u64>,
    pub singles_d2: Vec<u64>,
    pub d1: u64,
    pub trials: u64,
    pub audit: Audit,
    recorded: u64,
}

impl Tally {
    fn new(bins: usize) -> Self {
        Self {
            coincidences: vec![0; bins],
            singles_d2: vec![0; bins],
            d1: 0,
            trials: 0,
            audit: Audit::default(),
            recorded: 0,
        }
    }

    /// Records the outcome of one trial. `d2_bin` is the bin where D2
    /// registered the idler, if it did.
    pub fn record(&mut self, d1: bool, d2_bin: Option<usize>, pair: &SampledPair) {
        self.trials += 1;
        if d1 {
            self.d1 += 1;
        }
        if let Some(b) = d2_bin {
            self.singles_d2[b] += 1;
            if d1 {
                self.coincidences[b] += 1;
                if self.recorded.is_multiple_of(AUDIT_EVERY) {
                    let r = pair.conservation_residual();
                    self.audit.checked += 1;
                    self.audit.max_residual = self.audit.max_residual.max(r);
                    if r > 1e-12 {
                        self.audit.failed += 1;
                    }
                }
                self.recorded += 1;
            }
        }
    }
}

/// Generator for shard `index` of a run seeded with `seed`.
pub fn shard_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Number of trials assigned to each of `shards` shards.
pub fn shard_sizes(trials: u64, shards: usize) -> Vec<u64> {
    let k = shards.max(1) as u64;
    (0..k).map(|i| trials / k + u64::from(i < trials % k)).collect()
}

/// Runs `trial` over all shards in parallel and merges in shard order.
pub(crate) fn run_sharded<F>(
    trials: u64,
    seed: u64,
    scan: ScanAxis,
    opts: &McOptions,
    trial: F,
) -> Result<CoincidenceRun, CoincidenceError>
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) -> Result<(), CoincidenceError> + Sync,
{
    opts.validate()?;
    let sizes = shard_sizes(trials, opts.shards);
    let tallies: Vec<Tally> = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut rng = shard_rng(seed, i as u64);
            let mut tally = Tally::new(scan.bins);
            for _ in 0..n {
                trial(&mut rng, &mut tally)?;
            }
            Ok(tally)
        })
        .collect::<Result<_, CoincidenceError>>()?;

    let mut histogram = CoincidenceHistogram::new(scan);
    let mut audit = Audit::default();
    for t in &tallies {
        histogram.merge(&CoincidenceHistogram::from_counts(
            scan,
            t.coincidences.clone(),
            vec![t.d1; scan.bins],
            t.singles_d2.clone(),
            t.trials,
        )?)?;
        audit.merge(&t.audit);
    }
    if opts.background > 0.0 {
        let mut rng = shard_rng(seed, sizes.len() as u64);
        add_background(&mut histogram, opts.background, &mut rng);
    }
    Ok(CoincidenceRun { histogram, audit })
}

/// Poisson accidentals per bin, limited so that no bin exceeds its singles
/// and the total stays within the trial count.
fn add_background(h: &mut CoincidenceHistogram, mean: f64, rng: &mut impl Rng) {
    let poisson = Poisson::new(mean).expect("positive finite mean");
    let mut total: u64 = h.coincidences.iter().sum();
    for b in 0..h.coincidences.len() {
        let draw = poisson.sample(rng) as u64;
        let cap = h.singles_d1[b].min(h.singles_d2[b]) - h.coincidences[b];
        let add = draw.min(cap).min(h.trials - total);
        h.coincidences[b] += add;
        total += add;
    }
}

/// Locates the detector and arms of an unfolded layout; shared entry check.
fn arms_for(layout: &OpticalLayout, src: &SourceModel) -> Result<Arms, CoincidenceError> {
    src.validate()?;
    Arms::from_unfolded(layout, src.pump_omega)
}
