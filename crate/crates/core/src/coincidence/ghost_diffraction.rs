use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{Discrete, DiscreteCDF, Normal, Poisson, ContinuousCDF};

use super::{arms_for, run_sharded, Arms, CoincidenceError, CoincidenceRun, McOptions, SourceModel};
use crate::diffraction::SlitGeometry;
use crate::geometry::{Element, OpticalLayout, ScanAxis};

/// Minimum number of point sources the mask is resolved into.
pub const APERTURE_POINTS: usize = 2000;

/// Advanced-wave amplitude at D2 for a point trigger D1 behind a mask.
///
/// The mask is replaced by equally spaced point emitters, the same number in
/// every open cell and at least `points` in total, each weighted by the
/// square root of its transmission. A point `ξ`
/// contributes `exp(−i ξ x2 / L)` with `L = z_a/k_s + z_b/k_i`, where `z_a`
/// is the crystal-to-mask distance and `z_b` the crystal-to-D2 distance.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvancedWave {
    /// `(left edge, amplitude)` of every open cell.
    cells: Vec<(f64, f64)>,
    pitch: f64,
    points_per_cell: usize,
    length: f64,
    k_signal: f64,
    peak: f64,
}

impl AdvancedWave {
    pub fn from_arms(arms: &Arms, src: &SourceModel, points: usize) -> Result<Self, CoincidenceError> {
        let bad = |m: &str| Err(CoincidenceError::ConfigInvalid(m.into()));
        let mut masks = arms.signal.elements().iter().filter_map(|e| match e {
            Element::Mask { position, mask } => Some((*position, mask)),
            _ => None,
        });
        let Some((z_a, mask)) = masks.next() else { return bad("ghost diffraction needs a mask in the signal arm") };
        if masks.next().is_some() {
            return bad("ghost diffraction supports a single mask");
        }
        if arms.signal.elements().len() != 1 || arms.idler.elements().len() != 1 {
            return bad("ghost diffraction arms must be free space apart from the mask and D2");
        }
        if mask.outside != 0.0 {
            return bad("the diffracting mask must be opaque outside its cells");
        }
        let left = mask.center - mask.cells.len() as f64 * mask.pitch / 2.0;
        let cells: Vec<(f64, f64)> = mask
            .cells
            .iter()
            .enumerate()
            .filter(|(_, t)| **t > 0.0)
            .map(|(j, t)| (left + j as f64 * mask.pitch, t.sqrt()))
            .collect();
        if cells.is_empty() {
            return bad("the diffracting mask has no open cells");
        }
        let n = points.div_ceil(cells.len()).max(1);
        let k_signal = src.units.wavenumber(src.omega_signal());
        let k_idler = src.units.wavenumber(src.omega_idler());
        let length = z_a / k_signal + arms.detector.0 / k_idler;
        let peak = cells.iter().map(|c| c.1).sum::<f64>() * n as f64;
        Ok(Self { cells, pitch: mask.pitch, points_per_cell: n, length, k_signal, peak })
    }

    /// Field amplitude at D2 position `x2`.
    pub fn amplitude(&self, x2: f64) -> Complex64 {
        let alpha = x2 / self.length;
        let n = self.points_per_cell;
        let step = self.pitch / n as f64;
        let theta = alpha * step;
        // Sum of a geometric series over the n points of one cell.
        let cell_sum = if theta.abs() < 1e-12 {
            Complex64::new(n as f64, 0.0)
        } else {
            let r = Complex64::from_polar(1.0, -theta);
            (Complex64::new(1.0, 0.0) - r.powu(n as u32)) / (Complex64::new(1.0, 0.0) - r)
        };
        let sum: Complex64 = self
            .cells
            .iter()
            .map(|&(l, amp)| Complex64::from_polar(amp, -alpha * (l + 0.5 * step)))
            .sum();
        sum * cell_sum
    }

    /// `|A(x2)|² / |A(0)|²`, the D1 firing probability for an idler at `x2`.
    pub fn probability(&self, x2: f64) -> f64 {
        (self.amplitude(x2).norm() / self.peak).powi(2).min(1.0)
    }

    /// Equivalent single-slit geometry when the open cells form one run.
    pub fn slit_geometry(&self) -> Option<SlitGeometry> {
        let contiguous = self.cells.windows(2).all(|w| (w[1].0 - w[0].0 - self.pitch).abs() < 1e-9 * self.pitch);
        if !contiguous {
            return None;
        }
        let a = self.cells.len() as f64 * self.pitch;
        let lambda = 2.0 * std::f64::consts::PI / self.k_signal;
        SlitGeometry::single(a, lambda, self.length * self.k_signal).ok()
    }
}

/// Ghost diffraction: D2 scans the idler arm; D1 is a point trigger behind
/// the slit in the signal arm, firing with the advanced-wave probability of
/// the idler's D2 position.
pub fn run_ghost_diffraction(
    layout: &OpticalLayout,
    src: &SourceModel,
    trials: u64,
    opts: &McOptions,
) -> Result<CoincidenceRun, CoincidenceError> {
    let arms = arms_for(layout, src)?;
    let wave = AdvancedWave::from_arms(&arms, src, APERTURE_POINTS)?;
    let scan = arms.scan();
    run_sharded(trials, src.seed, scan, opts, |rng, tally| {
        let pair = src.sample_pair(rng);
        let x2 = arms
            .idler_hit(&pair.idler, pair.origin[0], rng)?
            .expect("free-space idler arm never blocks");
        let fired = rng.random::<f64>() < opts.efficiency_d1 * wave.probability(x2);
        let bin = scan.bin(x2).filter(|_| rng.random::<f64>() < opts.efficiency_d2);
        tally.record(fired, bin, &pair);
        Ok(())
    })
}

/// Model averaged over each scan bin with `sub` midpoint samples.
pub fn bin_averaged_model(scan: &ScanAxis, model: impl Fn(f64) -> f64, sub: usize) -> Vec<f64> {
    let sub = sub.max(1);
    let w = scan.pitch();
    (0..scan.bins)
        .map(|b| {
            let lo = scan.min + b as f64 * w;
            (0..sub).map(|j| model(lo + (j as f64 + 0.5) * w / sub as f64)).sum::<f64>() / sub as f64
        })
        .collect()
}

/// Largest per-bin deviation of `counts` from `model` (scaled to the same
/// total), in Poisson standard deviations.
///
/// Each bin's deviation is the two-sided Poisson tail probability of its
/// count, expressed as the equivalent number of normal standard deviations,
/// which reduces to `|c − E| / √E` for large expectations.
pub fn max_deviation_sigmas(counts: &[u64], model: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum::<u64>() as f64;
    let norm: f64 = model.iter().sum();
    if total == 0.0 || norm <= 0.0 {
        return 0.0;
    }
    let unit = Normal::standard();
    counts
        .iter()
        .zip(model)
        .map(|(&c, &m)| {
            let e = total * m / norm;
            if e <= 0.0 {
                return if c == 0 { 0.0 } else { f64::INFINITY };
            }
            let p = Poisson::new(e).expect("positive mean");
            let lower = p.cdf(c);
            let upper = 1.0 - lower + p.pmf(c);
            let two_sided = (2.0 * lower.min(upper)).min(1.0);
            if two_sided >= 1.0 {
                0.0
            } else if two_sided <= 0.0 {
                f64::INFINITY
            } else {
                unit.inverse_cdf(1.0 - two_sided / 2.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Least-squares slit width for `counts ≈ A · sinc²(π a x / (λ z2))`, with
/// the amplitude `A` solved in closed form for each trial `a`.
pub fn fit_slit_width(scan: &ScanAxis, counts: &[u64], lambda: f64, z2: f64, a_guess: f64) -> f64 {
    let xs = scan.centers();
    let sse = |a: f64| {
        let g = SlitGeometry { a, d_sep: 0.0, lambda, z2 };
        let m: Vec<f64> = xs.iter().map(|&x| crate::diffraction::single_slit_ratio(&g, x)).collect();
        let cm: f64 = counts.iter().zip(&m).map(|(&c, m)| c as f64 * m).sum();
        let mm: f64 = m.iter().map(|m| m * m).sum();
        let amp = if mm > 0.0 { cm / mm } else { 0.0 };
        counts.iter().zip(&m).map(|(&c, m)| (c as f64 - amp * m).powi(2)).sum::<f64>()
    };
    let (lo, hi, n) = (0.25f64.ln(), 4.0f64.ln(), 400);
    let grid: Vec<f64> = (0..=n).map(|i| a_guess * (lo + (hi - lo) * i as f64 / n as f64).exp()).collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| sse(grid[i]).total_cmp(&sse(grid[j])))
        .expect("non-empty grid");
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    for _ in 0..100 {
        if sse(c) < sse(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    0.5 * (a + b)
}
