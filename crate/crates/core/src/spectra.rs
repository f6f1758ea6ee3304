//! Raman phase fingerprinting, single-line PLE fits and fluorescence
//! lifetimes.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};

/// Speed of light in nm·THz.
pub const C_NM_THZ: f64 = 299_792.458;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum XUnit {
    Wavenumber,
    Terahertz,
    Nanometre,
    Second,
}

impl XUnit {
    /// Suffix used in table headers.
    pub fn suffix(self) -> &'static str {
        match self {
            XUnit::Wavenumber => "cm-1",
            XUnit::Terahertz => "THz",
            XUnit::Nanometre => "nm",
            XUnit::Second => "s",
        }
    }
}

impl FromStr for XUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cm-1" | "cm^-1" | "1/cm" | "wavenumber" => Ok(XUnit::Wavenumber),
            "thz" => Ok(XUnit::Terahertz),
            "nm" => Ok(XUnit::Nanometre),
            "s" => Ok(XUnit::Second),
            other => Err(Error::InvalidInput(format!("unknown abscissa unit '{other}'"))),
        }
    }
}

impl fmt::Display for XUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub unit: XUnit,
    pub sample: String,
}

impl Spectrum {
    /// `x` must be strictly monotone (either direction).
    pub fn new(x: Vec<f64>, y: Vec<f64>, unit: XUnit) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!("{} abscissae but {} values", x.len(), y.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in spectrum".into()));
        }
        let up = x.windows(2).all(|w| w[1] > w[0]);
        let down = x.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidInput("abscissa must be strictly monotone".into()));
        }
        Ok(Spectrum { x, y, unit, sample: String::new() })
    }

    pub fn with_sample(mut self, sample: impl Into<String>) -> Self {
        self.sample = sample.into();
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Same data on a frequency axis. Wavelengths become ν = c/λ.
    pub fn to_terahertz(&self) -> Result<Spectrum> {
        let x = match self.unit {
            XUnit::Terahertz => self.x.clone(),
            XUnit::Nanometre => {
                if self.x.iter().any(|v| *v <= 0.0) {
                    return Err(Error::InvalidInput("non-positive wavelength".into()));
                }
                self.x.iter().map(|l| C_NM_THZ / l).collect()
            }
            other => {
                return Err(Error::InvalidInput(format!("cannot convert {other} to THz")));
            }
        };
        Ok(Spectrum { x, y: self.y.clone(), unit: XUnit::Terahertz, sample: self.sample.clone() })
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedPeak {
    pub center: f64,
    /// Height above the median baseline.
    pub height: f64,
    pub prominence: f64,
}

/// Local maxima whose topographic prominence reaches `min_prominence`
/// times the tallest baseline-subtracted value. Sorted by position.
pub fn detect_peaks(s: &Spectrum, min_prominence: f64) -> Vec<DetectedPeak> {
    let n = s.len();
    if n < 10 {
        return Vec::new();
    }
    let base = median(&s.y);
    let d: Vec<f64> = s.y.iter().map(|y| y - base).collect();
    let top = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Vec::new();
    }
    let threshold = min_prominence * top;

    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if d[i] > d[i - 1] {
            // walk across a plateau
            let mut j = i;
            while j + 1 < n && d[j + 1] == d[i] {
                j += 1;
            }
            if j + 1 < n && d[j + 1] < d[i] {
                let peak = (i + j) / 2;
                let prom = prominence(&d, i, j);
                if prom >= threshold && prom > 0.0 {
                    out.push(DetectedPeak {
                        center: refine(&s.x, &d, peak),
                        height: d[peak],
                        prominence: prom,
                    });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    out
}

fn prominence(d: &[f64], first: usize, last: usize) -> f64 {
    let h = d[first];
    let mut left_min = h;
    for k in (0..first).rev() {
        if d[k] > h {
            break;
        }
        left_min = left_min.min(d[k]);
    }
    let mut right_min = h;
    for v in &d[last + 1..] {
        if *v > h {
            break;
        }
        right_min = right_min.min(*v);
    }
    h - left_min.max(right_min)
}

/// Parabolic interpolation through the maximum and its neighbours.
fn refine(x: &[f64], d: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= x.len() {
        return x[i];
    }
    let (a, b, c) = (d[i - 1], d[i], d[i + 1]);
    let denom = a - 2.0 * b + c;
    let off = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let off = off.clamp(-0.5, 0.5);
    if off >= 0.0 {
        x[i] + off * (x[i + 1] - x[i])
    } else {
        x[i] + off * (x[i] - x[i - 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Anatase,
    Rutile,
    Mixed,
    Unknown,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Anatase => "anatase",
            Phase::Rutile => "rutile",
            Phase::Mixed => "mixed",
            Phase::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononMode {
    pub label: String,
    /// cm⁻¹.
    pub center: f64,
    /// Half-width of the match window, cm⁻¹.
    pub tolerance: f64,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseModes {
    pub phase: Phase,
    pub modes: Vec<PhononMode>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononModeTable {
    pub phases: Vec<PhaseModes>,
}

pub const DEFAULT_MODE_TOLERANCE: f64 = 8.0;

fn mode(label: &str, center: f64, weight: f64) -> PhononMode {
    PhononMode { label: label.into(), center, tolerance: DEFAULT_MODE_TOLERANCE, weight }
}

impl Default for PhononModeTable {
    fn default() -> Self {
        PhononModeTable {
            phases: vec![
                PhaseModes {
                    phase: Phase::Anatase,
                    modes: vec![
                        mode("Eg", 144.0, 2.0),
                        mode("B1g", 399.0, 1.0),
                        mode("A1g", 515.0, 1.0),
                        mode("Eg", 639.0, 1.0),
                    ],
                },
                PhaseModes {
                    phase: Phase::Rutile,
                    modes: vec![mode("Eg", 449.0, 1.0), mode("A1g", 614.0, 1.0)],
                },
            ],
        }
    }
}

impl PhononModeTable {
    pub fn validate(&self) -> Result<()> {
        for p in &self.phases {
            if !matches!(p.phase, Phase::Anatase | Phase::Rutile) {
                return Err(Error::Config(format!("table phase must be anatase or rutile, got {}", p.phase)));
            }
            if p.modes.is_empty() {
                return Err(Error::Config(format!("no modes for {}", p.phase)));
            }
            for m in &p.modes {
                if !(m.center > 0.0) || !(m.tolerance > 0.0) || !(m.weight > 0.0) {
                    return Err(Error::Config(format!(
                        "mode {} at {} needs positive centre, tolerance and weight",
                        m.label, m.center
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let t: PhononModeTable = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }
}

/// Spectral band that is labelled but never scored.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    pub label: String,
    pub center: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    /// Minimum weighted fraction of matched modes for a phase to count.
    pub threshold: f64,
    pub exclusions: Vec<Exclusion>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        let ex = |label: &str, center, tolerance| Exclusion { label: label.into(), center, tolerance };
        ClassifyOptions {
            threshold: 0.5,
            exclusions: vec![
                ex("GaAs TO", 268.0, 8.0),
                ex("GaAs LO", 292.0, 8.0),
                ex("Er fluorescence", 1300.0, 60.0),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakAssignment {
    pub position: f64,
    /// Mode or exclusion label; empty when unassigned.
    pub label: String,
    pub phase: Option<Phase>,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub phase: Phase,
    pub scores: Vec<(Phase, f64)>,
    pub assignments: Vec<PeakAssignment>,
}

impl Classification {
    pub fn score(&self, phase: Phase) -> f64 {
        self.scores.iter().find(|(p, _)| *p == phase).map_or(0.0, |(_, s)| *s)
    }
}

/// Classify from peak positions in cm⁻¹.
pub fn classify_phase(peaks: &[f64], table: &PhononModeTable, opts: &ClassifyOptions) -> Classification {
    let mut assignments = Vec::with_capacity(peaks.len());
    let mut kept = Vec::new();
    for &p in peaks {
        if let Some(e) = opts.exclusions.iter().find(|e| (p - e.center).abs() <= e.tolerance) {
            assignments.push(PeakAssignment { position: p, label: e.label.clone(), phase: None, excluded: true });
        } else {
            kept.push(p);
            let hit = table.phases.iter().find_map(|ph| {
                ph.modes
                    .iter()
                    .find(|m| (p - m.center).abs() <= m.tolerance)
                    .map(|m| (ph.phase, m.label.clone()))
            });
            assignments.push(match hit {
                Some((phase, label)) => PeakAssignment { position: p, label, phase: Some(phase), excluded: false },
                None => PeakAssignment { position: p, label: String::new(), phase: None, excluded: false },
            });
        }
    }

    let scores: Vec<(Phase, f64)> = table
        .phases
        .iter()
        .map(|ph| {
            let total: f64 = ph.modes.iter().map(|m| m.weight).sum();
            let matched: f64 = ph
                .modes
                .iter()
                .filter(|m| kept.iter().any(|p| (p - m.center).abs() <= m.tolerance))
                .map(|m| m.weight)
                .sum();
            (ph.phase, matched / total)
        })
        .collect();
    let passing: Vec<Phase> = scores.iter().filter(|(_, s)| *s >= opts.threshold).map(|(p, _)| *p).collect();
    let phase = match passing.as_slice() {
        [] => Phase::Unknown,
        [one] => *one,
        _ => Phase::Mixed,
    };
    Classification { phase, scores, assignments }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineModel {
    #[default]
    Gaussian,
    Lorentzian,
}

impl FromStr for LineModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(LineModel::Gaussian),
            "lorentzian" | "lorentz" => Ok(LineModel::Lorentzian),
            other => Err(Error::InvalidInput(format!("unknown line model '{other}'"))),
        }
    }
}

impl fmt::Display for LineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineModel::Gaussian => "gaussian",
            LineModel::Lorentzian => "lorentzian",
        })
    }
}

impl LineModel {
    /// Unit-height profile with full width `fwhm`.
    pub fn shape(self, dx: f64, fwhm: f64) -> f64 {
        let r = dx / fwhm;
        match self {
            LineModel::Gaussian => (-4.0 * std::f64::consts::LN_2 * r * r).exp(),
            LineModel::Lorentzian => 1.0 / (1.0 + 4.0 * r * r),
        }
    }
}

/// Single line fitted in the spectrum's own abscissa unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NativeLineFit {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub background: f64,
    pub center_err: f64,
    pub fwhm_err: f64,
    pub amplitude_err: f64,
    pub background_err: f64,
    pub residual_rms: f64,
    pub model: LineModel,
}

/// PLE line: centre in THz, width in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub center_thz: f64,
    pub center_err_thz: f64,
    pub fwhm_ghz: f64,
    pub fwhm_err_ghz: f64,
    pub amplitude: f64,
    pub amplitude_err: f64,
    pub background: f64,
    pub background_err: f64,
    pub residual_rms: f64,
    pub model: LineModel,
}

fn half_width_estimate(x: &[f64], d: &[f64], imax: usize) -> f64 {
    let half = d[imax] / 2.0;
    let walk = |dir: isize| {
        let mut i = imax as isize;
        loop {
            let j = i + dir;
            if j < 0 || j as usize >= x.len() {
                return x[i as usize];
            }
            if d[j as usize] < half {
                let (a, b) = (d[i as usize], d[j as usize]);
                let t = (a - half) / (a - b);
                return x[i as usize] + t * (x[j as usize] - x[i as usize]);
            }
            i = j;
        }
    };
    (walk(1) - walk(-1)).abs()
}

/// Single line plus constant background, in the spectrum's own unit.
pub fn fit_line_native(s: &Spectrum, model: LineModel) -> Result<NativeLineFit> {
    let n = s.len();
    if n < 10 {
        return Err(Error::IllPosed(format!("{n} points, at least 10 needed")));
    }
    let (x, y) = (&s.x, &s.y);
    let step = (x[n - 1] - x[0]).abs() / (n - 1) as f64;
    let base = median(y);
    let d: Vec<f64> = y.iter().map(|v| v - base).collect();
    let (imax, top) = d
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let noise = crate::xrdfit::noise_sigma(y);
    if !(top > 3.0 * noise) || top <= 0.0 {
        return Err(Error::IllPosed("no line above noise".into()));
    }
    if imax < 2 || imax + 2 >= n {
        return Err(Error::IllPosed("line at the edge of the scan".into()));
    }
    let w0 = half_width_estimate(x, &d, imax);
    if w0 < 3.0 * step {
        return Err(Error::IllPosed("line not resolved by three samples".into()));
    }

    let residuals = |p: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(t, v)| p[2] * model.shape(t - p[0], p[1]) + p[3] - v)
            .collect::<Vec<_>>()
    };
    let fit = levenberg_marquardt(residuals, &[x[imax], w0, top, base], &[w0, w0, top, top], &LmOptions::default())?;
    let p = &fit.params;
    let u = &fit.uncertainties;
    let (lo, hi) = (x[0].min(x[n - 1]), x[0].max(x[n - 1]));
    if p[0] < lo + 2.0 * step || p[0] > hi - 2.0 * step {
        return Err(Error::IllPosed(format!("fitted centre {} at the edge of the scan", p[0])));
    }
    if !(p[2] > 3.0 * u[2]) {
        return Err(Error::IllPosed("fitted amplitude not significant".into()));
    }
    Ok(NativeLineFit {
        center: p[0],
        fwhm: p[1].abs(),
        amplitude: p[2],
        background: p[3],
        center_err: u[0],
        fwhm_err: u[1],
        amplitude_err: u[2],
        background_err: u[3],
        residual_rms: fit.residual_rms,
        model,
    })
}

/// PLE resonance fit on a THz axis; wavelength data are converted first.
pub fn fit_line(s: &Spectrum, model: LineModel) -> Result<LineFit> {
    let f = fit_line_native(&s.to_terahertz()?, model)?;
    Ok(LineFit {
        center_thz: f.center,
        center_err_thz: f.center_err,
        fwhm_ghz: f.fwhm * 1000.0,
        fwhm_err_ghz: f.fwhm_err * 1000.0,
        amplitude: f.amplitude,
        amplitude_err: f.amplitude_err,
        background: f.background,
        background_err: f.background_err,
        residual_rms: f.residual_rms,
        model,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeFit {
    pub t1_ms: f64,
    pub t1_err_ms: f64,
    pub amplitude: f64,
    pub amplitude_err: f64,
    pub background: f64,
    pub background_err: f64,
    pub residual_rms: f64,
}

/// Minimum trace length in units of the fitted lifetime.
pub const MIN_LIFETIMES_COVERED: f64 = 3.0;

/// `A exp(-(t - t0)/T1) + B` with t0 the first sample time.
pub fn fit_lifetime(decay: &Spectrum) -> Result<LifetimeFit> {
    if decay.unit != XUnit::Second {
        return Err(Error::InvalidInput(format!("decay abscissa must be in s, got {}", decay.unit)));
    }
    let n = decay.len();
    if n < 10 {
        return Err(Error::IllPosed(format!("{n} points, at least 10 needed")));
    }
    if decay.x[1] < decay.x[0] {
        return Err(Error::InvalidInput("decay time must increase".into()));
    }
    let (t, y) = (&decay.x, &decay.y);
    let t0 = t[0];
    let span = t[n - 1] - t0;
    let tail = (n / 10).max(3);
    let b0 = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let head = y[..3].iter().sum::<f64>() / 3.0;
    let a0 = head - b0;
    if !(a0 > 0.0) {
        return Err(Error::IllPosed("trace does not decay".into()));
    }
    // first 1/e crossing
    let target = b0 + a0 / std::f64::consts::E;
    let tau0 = t
        .iter()
        .zip(y)
        .find(|(_, v)| **v <= target)
        .map(|(ti, _)| (ti - t0).max(span / n as f64))
        .unwrap_or(span);

    let residuals = |p: &[f64]| {
        t.iter()
            .zip(y)
            .map(|(ti, v)| p[0] * (-(ti - t0) / p[1]).exp() + p[2] - v)
            .collect::<Vec<_>>()
    };
    let fit = levenberg_marquardt(residuals, &[a0, tau0, b0], &[a0, tau0, a0], &LmOptions::default());
    let fit = match fit {
        Ok(f) => f,
        Err(Error::NonConvergence { .. }) if span < MIN_LIFETIMES_COVERED * tau0 => {
            return Err(Error::WindowTooShort { covered: span / tau0 });
        }
        Err(e) => return Err(e),
    };
    let p = &fit.params;
    let u = &fit.uncertainties;
    let t1 = p[1].abs();
    if span < MIN_LIFETIMES_COVERED * t1 {
        return Err(Error::WindowTooShort { covered: span / t1 });
    }
    Ok(LifetimeFit {
        t1_ms: t1 * 1e3,
        t1_err_ms: u[1] * 1e3,
        amplitude: p[0],
        amplitude_err: u[0],
        background: p[2],
        background_err: u[2],
        residual_rms: fit.residual_rms,
    })
}

/// Uniformly sampled single line with additive Gaussian noise.
#[allow(clippy::too_many_arguments)]
pub fn synthetic_line(
    model: LineModel,
    center: f64,
    fwhm: f64,
    amplitude: f64,
    background: f64,
    range: (f64, f64),
    points: usize,
    noise: f64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(0.0)).expect("finite noise");
    let step = (range.1 - range.0) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let x = range.0 + i as f64 * step;
            (x, amplitude * model.shape(x - center, fwhm) + background + normal.sample(&mut rng))
        })
        .collect()
}

/// Single-exponential decay sampled from t = 0 over `span` seconds.
pub fn synthetic_decay(t1: f64, amplitude: f64, background: f64, span: f64, points: usize, noise: f64, seed: u64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(0.0)).expect("finite noise");
    let step = span / (points - 1) as f64;
    let x: Vec<f64> = (0..points).map(|i| i as f64 * step).collect();
    let y = x
        .iter()
        .map(|t| amplitude * (-t / t1).exp() + background + normal.sample(&mut rng))
        .collect();
    Spectrum { x, y, unit: XUnit::Second, sample: String::new() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raman(centers: &[f64], fwhm: f64) -> Spectrum {
        let x: Vec<f64> = (0..1500).map(|i| 100.0 + i as f64 * 0.5).collect();
        let y = x
            .iter()
            .map(|x| centers.iter().map(|c| 100.0 * LineModel::Lorentzian.shape(x - c, fwhm)).sum::<f64>() + 5.0)
            .collect();
        Spectrum::new(x, y, XUnit::Wavenumber).unwrap()
    }

    fn positions(s: &Spectrum) -> Vec<f64> {
        detect_peaks(s, 0.05).iter().map(|p| p.center).collect()
    }

    #[test]
    fn single_peak_found_within_a_bin() {
        let p = positions(&raman(&[449.0], 10.0));
        assert_eq!(p.len(), 1);
        assert!((p[0] - 449.0).abs() <= 0.5);
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let s = Spectrum::new((0..50).map(f64::from).collect(), vec![3.0; 50], XUnit::Wavenumber).unwrap();
        assert!(detect_peaks(&s, 0.05).is_empty());
    }

    #[test]
    fn overlapping_peaks_separated_by_three_widths() {
        let p = positions(&raman(&[400.0, 430.0], 10.0));
        assert_eq!(p.len(), 2, "{p:?}");
        assert!((p[0] - 400.0).abs() < 1.0 && (p[1] - 430.0).abs() < 1.0);
    }

    #[test]
    fn prominence_ignores_small_shoulders() {
        let mut s = raman(&[449.0], 10.0);
        s.y[700] += 0.5;
        assert_eq!(positions(&s).len(), 1);
    }

    #[test]
    fn classification_examples() {
        let t = PhononModeTable::default();
        let o = ClassifyOptions::default();
        assert_eq!(classify_phase(&[144.0, 399.0, 515.0, 639.0], &t, &o).phase, Phase::Anatase);
        assert_eq!(classify_phase(&[449.0, 614.0], &t, &o).phase, Phase::Rutile);
        assert_eq!(classify_phase(&[], &t, &o).phase, Phase::Unknown);
        assert_eq!(
            classify_phase(&[144.0, 399.0, 515.0, 449.0, 614.0], &t, &o).phase,
            Phase::Mixed
        );
    }

    #[test]
    fn substrate_and_fluorescence_are_excluded() {
        let t = PhononModeTable::default();
        let o = ClassifyOptions::default();
        let c = classify_phase(&[268.0, 292.0, 1302.0, 449.0, 612.0], &t, &o);
        assert_eq!(c.phase, Phase::Rutile);
        let er = c.assignments.iter().find(|a| a.position == 1302.0).unwrap();
        assert!(er.excluded && er.label == "Er fluorescence");
        // the fluorescence band alone never yields a phase
        assert_eq!(classify_phase(&[1300.0, 268.0], &t, &o).phase, Phase::Unknown);
    }

    #[test]
    fn spectrum_pipeline_classifies_anatase() {
        let s = raman(&[144.0, 399.0, 515.0, 639.0, 268.0], 8.0);
        let c = classify_phase(&positions(&s), &PhononModeTable::default(), &ClassifyOptions::default());
        assert_eq!(c.phase, Phase::Anatase);
        assert!((c.score(Phase::Anatase) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_from_toml() {
        let t = PhononModeTable::from_toml(
            "[[phases]]\nphase = \"rutile\"\nmodes = [{ label = \"Eg\", center = 447.0, tolerance = 5.0 }]\n",
        )
        .unwrap();
        assert_eq!(t.phases[0].modes[0].weight, 1.0);
        assert!(PhononModeTable::from_toml("[[phases]]\nphase = \"rutile\"\nmodes = []\n").is_err());
        assert!(PhononModeTable::from_toml("bogus = 1\n").is_err());
    }

    #[test]
    fn gaussian_line_round_trip() {
        let pts = synthetic_line(LineModel::Gaussian, 196.0, 0.040, 1.0, 0.1, (195.8, 196.2), 201, 0.02, 3);
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let f = fit_line(&Spectrum::new(x, y, XUnit::Terahertz).unwrap(), LineModel::Gaussian).unwrap();
        assert!((f.center_thz - 196.0).abs() < 0.03 * 0.040);
        assert!((f.fwhm_ghz - 40.0).abs() < 0.03 * 40.0);
    }

    #[test]
    fn wavelength_input_matches_frequency_fit() {
        let pts = synthetic_line(LineModel::Lorentzian, 1532.9, 0.41, 2.0, 0.0, (1529.0, 1537.0), 321, 0.02, 9);
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let nm = Spectrum::new(x, y, XUnit::Nanometre).unwrap();
        let native = fit_line_native(&nm, LineModel::Lorentzian).unwrap();
        let thz = fit_line(&nm, LineModel::Lorentzian).unwrap();
        let converted = C_NM_THZ / native.center;
        assert!((converted - thz.center_thz).abs() < thz.center_err_thz.max(1e-9));
    }

    #[test]
    fn noiseless_decay_is_exact() {
        let d = synthetic_decay(2e-3, 1.0, 0.05, 12e-3, 400, 0.0, 0);
        let f = fit_lifetime(&d).unwrap();
        assert!((f.t1_ms - 2.000).abs() < 1e-6, "{}", f.t1_ms);
        assert!((f.background - 0.05).abs() < 1e-9);
    }

    #[test]
    fn short_window_is_rejected() {
        let d = synthetic_decay(5e-3, 1.0, 0.0, 8e-3, 200, 0.002, 1);
        assert!(matches!(fit_lifetime(&d), Err(Error::WindowTooShort { .. })));
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![1.0, 2.0, 2.0], vec![0.0; 3], XUnit::Terahertz).is_err());
        assert!(Spectrum::new(vec![3.0, 2.0, 1.0], vec![0.0; 3], XUnit::Terahertz).is_ok());
        assert!("cm^-1".parse::<XUnit>().is_ok());
        assert!("furlong".parse::<XUnit>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn classification_ignores_scale_and_offset(scale in 0.01f64..100.0, offset in -50.0f64..50.0) {
            let s = raman(&[144.0, 399.0, 515.0, 639.0], 8.0);
            let t = s.y.iter().map(|y| y * scale + offset).collect();
            let s2 = Spectrum::new(s.x.clone(), t, XUnit::Wavenumber).unwrap();
            let (a, b) = (positions(&s), positions(&s2));
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).abs() < 1e-9);
            }
            let t = PhononModeTable::default();
            let o = ClassifyOptions::default();
            prop_assert_eq!(classify_phase(&a, &t, &o).phase, classify_phase(&b, &t, &o).phase);
        }
    }
}
