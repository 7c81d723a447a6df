//! Simulation model catalogue and generators.
//!
//! Three generator families cover the catalogue:
//! - locally stationary wavelet synthesis from a fixed or chirp spectrum
//!   (P1-P5, M1, M2),
//! - AR(2) recursions with time-varying first coefficient (P6, P7, M3, M4),
//! - cosine curves with additive Gaussian noise (P8-P12, M5).
//!
//! The P models are two-group power settings; the M models are size
//! settings where both groups share one generator. Every generator is
//! deterministic given its `RandomSource`.

use crate::error::{Error, Result};
use crate::grid::{CoefficientGrid, GridKind};
use crate::random::RandomSource;
use crate::spectral::{raw_periodogram, smooth_time};
use crate::wavelet::{correct_periodogram, haar_filter, inner_product_matrix};

/// Series length used by every catalogue model.
pub const SERIES_LEN: usize = 256;
/// Number of wavelet levels for `SERIES_LEN`.
pub const SERIES_LEVELS: usize = 8;
/// Samples per 24 hours at the 22.5-minute sampling interval.
pub const SAMPLES_PER_DAY: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelName {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
    P11,
    P12,
    M1,
    M2,
    M3,
    M4,
    M5,
}

impl std::str::FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use ModelName::*;
        Ok(match s.to_ascii_uppercase().as_str() {
            "P1" => P1,
            "P2" => P2,
            "P3" => P3,
            "P4" => P4,
            "P5" => P5,
            "P6" => P6,
            "P7" => P7,
            "P8" => P8,
            "P9" => P9,
            "P10" => P10,
            "P11" => P11,
            "P12" => P12,
            "M1" => M1,
            "M2" => M2,
            "M3" => M3,
            "M4" => M4,
            "M5" => M5,
            other => return Err(Error::UnknownModel(other.to_string())),
        })
    }
}

impl std::fmt::Display for ModelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One group of one catalogue model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelId {
    pub name: ModelName,
    /// 1 or 2; size models accept either and ignore the distinction.
    pub group: u8,
}

impl ModelId {
    pub fn new(name: ModelName, group: u8) -> Result<Self> {
        if group != 1 && group != 2 {
            return Err(Error::Input(format!("group must be 1 or 2, got {group}")));
        }
        Ok(Self { name, group })
    }
}

/// Time-varying AR(2) parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TvarParams {
    pub phi1: Phi1,
    /// Constant second coefficient.
    pub phi2: f64,
    pub length: usize,
    /// Samples discarded before the recorded stretch, run with the t=1
    /// parameters.
    pub burn_in: usize,
}

/// First AR coefficient as a function of the 1-based time index.
#[derive(Debug, Clone, PartialEq)]
pub enum Phi1 {
    /// 0.8 for t = 1..53 and t = 129..256, `mid` for t = 54..128.
    Abrupt { mid: f64 },
    /// `-0.8 [1 - depth cos(pi t / T)]`.
    SlowCosine { depth: f64 },
}

impl TvarParams {
    /// `phi1` evaluated at 1-based time `t`.
    pub fn phi1_at(&self, t: usize) -> f64 {
        match self.phi1 {
            Phi1::Abrupt { mid } => {
                if (54..=128).contains(&t) {
                    mid
                } else {
                    0.8
                }
            }
            Phi1::SlowCosine { depth } => {
                -0.8 * (1.0 - depth * (std::f64::consts::PI * t as f64 / self.length as f64).cos())
            }
        }
    }
}

/// Cosine-plus-noise series parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineParams {
    pub amplitude: f64,
    pub period_hours: f64,
    pub length: usize,
}

impl CosineParams {
    /// Period in samples at the 22.5-minute interval.
    pub fn period_samples(&self) -> f64 {
        self.period_hours * SAMPLES_PER_DAY / 24.0
    }

    /// The deterministic curve at 0-based time `t`.
    pub fn value(&self, t: usize) -> f64 {
        self.amplitude * (2.0 * std::f64::consts::PI * t as f64 / self.period_samples()).cos()
    }
}

/// The generator backing one `(model, group)` pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Lsw(CoefficientGrid),
    Tvar(TvarParams),
    Cosine(CosineParams),
}

fn tvar_abrupt(mid: f64) -> Generator {
    Generator::Tvar(TvarParams {
        phi1: Phi1::Abrupt { mid },
        phi2: -0.81,
        length: SERIES_LEN,
        burn_in: 100,
    })
}

fn tvar_slow(depth: f64) -> Generator {
    Generator::Tvar(TvarParams {
        phi1: Phi1::SlowCosine { depth },
        phi2: -0.81,
        length: SERIES_LEN,
        burn_in: 100,
    })
}

fn cosine(period_hours: f64) -> Generator {
    Generator::Cosine(CosineParams {
        amplitude: 2.0,
        period_hours,
        length: SERIES_LEN,
    })
}

/// Resolve a `(model, group)` pair to its generator.
pub fn generator_for(model: ModelId) -> Result<Generator> {
    use ModelName::*;
    let g = model.group;
    Ok(match (model.name, g) {
        (P1 | P2 | P3 | M1, 1) | (M1, 2) => Generator::Lsw(base_fixed_spectrum(55)),
        (P1, 2) => Generator::Lsw(base_fixed_spectrum(155)),
        (P2, 2) => Generator::Lsw(base_fixed_spectrum(49)),
        (P3, 2) => Generator::Lsw(plus_constant_spectrum()),
        (P4 | P5 | M2, 1) | (M2, 2) => Generator::Lsw(chirp_spectrum(25)?),
        (P4, 2) => Generator::Lsw(chirp_spectrum(26)?),
        (P5, 2) => Generator::Lsw(chirp_spectrum(27)?),
        (P6 | M3, 1) | (M3, 2) => tvar_abrupt(-0.9),
        (P6, 2) => tvar_abrupt(-0.3),
        (P7 | M4, 1) | (M4, 2) => tvar_slow(0.7),
        (P7, 2) => tvar_slow(0.1),
        (P8 | P9 | P10 | P11 | P12 | M5, 1) | (M5, 2) => cosine(24.0),
        (P8, 2) => cosine(21.0),
        (P9, 2) => cosine(22.0),
        (P10, 2) => cosine(23.0),
        (P11, 2) => cosine(23.5),
        (P12, 2) => cosine(23.75),
        _ => {
            return Err(Error::UnknownModel(format!(
                "{} group {g}",
                model.name
            )))
        }
    })
}

/// Generating spectrum for the LSW-backed models (P1-P5, M1, M2).
pub fn spectrum_for(model: ModelId) -> Result<CoefficientGrid> {
    match generator_for(model)? {
        Generator::Lsw(s) => Ok(s),
        _ => Err(Error::UnknownModel(format!(
            "{} is not defined by a spectrum",
            model.name
        ))),
    }
}

/// Simulate one replicate series of the given model/group.
pub fn simulate(model: ModelId, rs: &mut RandomSource) -> Result<Vec<f64>> {
    match generator_for(model)? {
        Generator::Lsw(s) => lsw_synthesize(&s, rs),
        Generator::Tvar(p) => Ok(tvar2_simulate(&p, rs)),
        Generator::Cosine(p) => Ok(cosine_simulate(&p, rs)),
    }
}

/// Internal wavelet level for the catalogue's figure-style level number
/// (figure level 7 is the finest of 8).
fn internal_level(figure_level: usize) -> usize {
    SERIES_LEVELS - figure_level
}

/// The shared fixed spectrum: `4 cos^2(2 pi z)` at figure level 3 plus a
/// unit bump on cells `1..=bump_end` of figure level 7.
fn base_fixed_spectrum(bump_end: usize) -> CoefficientGrid {
    let mut rows = vec![vec![0.0; SERIES_LEN]; SERIES_LEVELS];
    let osc = internal_level(3) - 1;
    for (k, cell) in rows[osc].iter_mut().enumerate() {
        let z = (k + 1) as f64 / SERIES_LEN as f64;
        *cell = 4.0 * (2.0 * std::f64::consts::PI * z).cos().powi(2);
    }
    let fine = internal_level(7) - 1;
    for k in 1..=bump_end {
        rows[fine][k] = 1.0;
    }
    CoefficientGrid::from_rows(rows, GridKind::SpectrumModel).unwrap()
}

/// Group-2 spectrum of the plus-constant setting: 2 on cells 1..=55 and 1
/// on cells 57..=255 of the finest level.
fn plus_constant_spectrum() -> CoefficientGrid {
    let mut grid = base_fixed_spectrum(55);
    let fine = internal_level(7);
    for k in 1..=55 {
        grid.set(fine, k, 2.0);
    }
    for k in 57..SERIES_LEN {
        grid.set(fine, k, 1.0);
    }
    grid
}

/// Instantaneous period (in samples) of the chirp at 0-based time `t`:
/// flat at 64 samples for the first 16, linear up to the target at t = 128,
/// then constant.
fn chirp_period(target_samples: f64, t: usize) -> f64 {
    if t < 16 {
        return 64.0;
    }
    let frac = (t.min(128) - 16) as f64 / 112.0;
    64.0 + (target_samples - 64.0) * frac
}

/// Spectrum of a deterministic chirp whose period drifts from 24 hours to
/// `target_end_period_hours` over the first two days: the time-smoothed
/// (window 17), de-biased, nonnegativity-clipped wavelet periodogram of the
/// chirp, rescaled to unit maximum.
pub fn chirp_spectrum(target_end_period_hours: u32) -> Result<CoefficientGrid> {
    if ![25, 26, 27].contains(&target_end_period_hours) {
        return Err(Error::Input(format!(
            "unsupported chirp target {target_end_period_hours} h"
        )));
    }
    let target_samples = target_end_period_hours as f64 * SAMPLES_PER_DAY / 24.0;
    let mut phase = 0.0;
    let mut series = Vec::with_capacity(SERIES_LEN);
    for t in 0..SERIES_LEN {
        series.push((2.0 * std::f64::consts::PI * phase).cos());
        phase += 1.0 / chirp_period(target_samples, t);
    }
    let raw = raw_periodogram(&series)?;
    let smoothed = smooth_time(&raw, 17)?.with_kind(GridKind::RawPeriodogram);
    let a = inner_product_matrix(SERIES_LEVELS)?;
    let corrected = correct_periodogram(&smoothed, &a)?;
    let clipped = corrected.map(GridKind::NdwtDetail, |v| v.max(0.0));
    let peak = clipped
        .rows()
        .iter()
        .flatten()
        .cloned()
        .fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return Err(Error::Domain("chirp spectrum is identically zero".into()));
    }
    Ok(clipped.map(GridKind::SpectrumModel, |v| v / peak))
}

/// Draw one locally stationary wavelet series from a generating spectrum:
/// `X_t = sum_{j,k} sqrt(S_j(k/T)) psi_j[(k - t) mod T] xi_{j,k}` with
/// i.i.d. standard normal `xi`, sample mean removed.
pub fn lsw_synthesize(spectrum: &CoefficientGrid, rs: &mut RandomSource) -> Result<Vec<f64>> {
    if spectrum.rows().iter().flatten().any(|&v| v < 0.0) {
        return Err(Error::Domain("spectrum has negative cells".into()));
    }
    let t_len = spectrum.length();
    let mut x = vec![0.0; t_len];
    for j in 1..=spectrum.levels() {
        let filter = haar_filter(j)?;
        let row = spectrum.level(j);
        for (k, &s) in row.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let amp = s.sqrt() * rs.gaussian();
            for (m, &h) in filter.taps.iter().enumerate() {
                x[(k + t_len - (m % t_len)) % t_len] += amp * h;
            }
        }
    }
    remove_mean(&mut x);
    Ok(x)
}

/// AR(2) recursion driven by the supplied innovations, with burn-in using
/// the t=1 parameters and zero initial conditions.
fn tvar2_drive(params: &TvarParams, noise: &[f64]) -> Vec<f64> {
    let mut prev1 = 0.0;
    let mut prev2 = 0.0;
    let mut out = Vec::with_capacity(params.length);
    for (i, &eps) in noise.iter().enumerate() {
        let t = (i + 1).saturating_sub(params.burn_in).max(1);
        let x = params.phi1_at(t) * prev1 + params.phi2 * prev2 + eps;
        if i >= params.burn_in {
            out.push(x);
        }
        prev2 = prev1;
        prev1 = x;
    }
    out
}

/// Simulate one time-varying AR(2) series with N(0,1) innovations.
pub fn tvar2_simulate(params: &TvarParams, rs: &mut RandomSource) -> Vec<f64> {
    let noise = rs.gaussian_stream(params.burn_in + params.length);
    let mut x = tvar2_drive(params, &noise);
    remove_mean(&mut x);
    x
}

/// Simulate one cosine-plus-noise series.
pub fn cosine_simulate(params: &CosineParams, rs: &mut RandomSource) -> Vec<f64> {
    let mut x: Vec<f64> = (0..params.length)
        .map(|t| params.value(t) + rs.gaussian())
        .collect();
    remove_mean(&mut x);
    x
}

fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= mean;
    }
}
