//! Single-peak diffraction analysis: Voigt fitting, Scherrer/Wilson
//! size-strain separation and Bragg-law lattice parameters.
//!
//! Size and strain come from a single-line decomposition. The Lorentzian
//! integral breadth is attributed to finite grain size and the Gaussian one
//! to microstrain:
//!
//! ```text
//! beta_L = (pi/2) fwhm_L          tau = K lambda / (beta_L cos theta)
//! beta_G = (fwhm_G/2) sqrt(pi/ln2)   eps = beta_G / (4 tan theta)
//! ```

use std::f64::consts::{LN_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::crystal::CrystalSystem;
use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};
use crate::voigt::{voigt_fwhm, voigt_unit_height};

/// Cu K-alpha1, Å.
pub const CU_KA1: f64 = 1.540598;
pub const DEFAULT_SCHERRER_K: f64 = 0.9;
pub const MIN_WINDOW_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionScan {
    pub two_theta: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl DiffractionScan {
    pub fn new(two_theta: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if two_theta.len() != intensity.len() {
            return Err(Error::InvalidInput(format!(
                "{} angles but {} intensities",
                two_theta.len(),
                intensity.len()
            )));
        }
        if two_theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("2theta must be strictly increasing".into()));
        }
        if let Some(bad) = intensity.iter().find(|y| !(**y >= 0.0) || !y.is_finite()) {
            return Err(Error::InvalidInput(format!("intensity {bad} is negative or not finite")));
        }
        Ok(DiffractionScan { two_theta, intensity })
    }

    pub fn len(&self) -> usize {
        self.two_theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.two_theta.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeakUncertainty {
    pub center: f64,
    pub fwhm_g: f64,
    pub fwhm_l: f64,
    pub amplitude: f64,
    pub slope: f64,
    pub offset: f64,
}

/// Fitted Voigt peak on a linear background. Angles in degrees 2θ.
///
/// The background is `slope * (2θ - reference) + offset`, with `reference`
/// the middle of the fit window.
#[derive(Debug, Clone, PartialEq)]
pub struct VoigtPeak {
    pub center: f64,
    pub fwhm_g: f64,
    pub fwhm_l: f64,
    /// Peak height above background, counts.
    pub amplitude: f64,
    pub slope: f64,
    pub offset: f64,
    pub reference: f64,
    pub uncertainty: PeakUncertainty,
    /// Covariance of (center, fwhm_G, fwhm_L).
    pub shape_covariance: [[f64; 3]; 3],
    pub residual_rms: f64,
    pub window: (f64, f64),
    pub iterations: usize,
}

impl VoigtPeak {
    /// Noise-free peak with zero uncertainty, used for forward modelling.
    pub fn exact(center: f64, fwhm_g: f64, fwhm_l: f64, amplitude: f64) -> Self {
        VoigtPeak {
            center,
            fwhm_g,
            fwhm_l,
            amplitude,
            slope: 0.0,
            offset: 0.0,
            reference: center,
            uncertainty: PeakUncertainty::default(),
            shape_covariance: [[0.0; 3]; 3],
            residual_rms: 0.0,
            window: (f64::NEG_INFINITY, f64::INFINITY),
            iterations: 0,
        }
    }

    pub fn eval(&self, two_theta: f64) -> f64 {
        self.amplitude * voigt_unit_height(two_theta - self.center, self.fwhm_g, self.fwhm_l)
            + self.slope * (two_theta - self.reference)
            + self.offset
    }

    /// Total FWHM of the Voigt profile, degrees.
    pub fn fwhm(&self) -> f64 {
        voigt_fwhm(self.fwhm_g, self.fwhm_l)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Robust noise level from second differences; insensitive to smooth peaks.
pub(crate) fn noise_sigma(y: &[f64]) -> f64 {
    if y.len() < 3 {
        return 0.0;
    }
    let d2: Vec<f64> = y.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    let m = median(d2.clone());
    let mad = median(d2.iter().map(|d| (d - m).abs()).collect());
    1.4826 * mad / 6f64.sqrt()
}

fn line_through(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Half-height crossing searched outward from `peak`; returns the
/// interpolated abscissa, or the end point if the profile never drops.
fn half_crossing(x: &[f64], d: &[f64], peak: usize, half: f64, step: isize) -> f64 {
    let mut i = peak as isize;
    loop {
        let j = i + step;
        if j < 0 || j as usize >= x.len() {
            return x[i as usize];
        }
        let (a, b) = (d[i as usize], d[j as usize]);
        if b < half {
            let t = (a - half) / (a - b);
            return x[i as usize] + t * (x[j as usize] - x[i as usize]);
        }
        i = j;
    }
}

/// Least-squares Voigt plus linear background over `window` (degrees 2θ).
pub fn fit_voigt(scan: &DiffractionScan, window: (f64, f64)) -> Result<VoigtPeak> {
    fit_voigt_with(scan, window, &LmOptions::default())
}

pub fn fit_voigt_with(scan: &DiffractionScan, window: (f64, f64), opts: &LmOptions) -> Result<VoigtPeak> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!("empty fit window {lo}:{hi}")));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = scan
        .two_theta
        .iter()
        .zip(&scan.intensity)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, y)| (*t, *y))
        .unzip();
    let n = x.len();
    if n < MIN_WINDOW_POINTS {
        return Err(Error::IllPosed(format!(
            "{n} points in window, at least {MIN_WINDOW_POINTS} needed"
        )));
    }
    let x_first = x[0];
    let x_last = x[n - 1];
    let step = (x_last - x_first) / (n - 1) as f64;
    let reference = 0.5 * (x_first + x_last);

    // background guess from the outer tenths of the window
    let edge = (n / 10).max(3);
    let ex: Vec<f64> = x[..edge].iter().chain(&x[n - edge..]).copied().collect();
    let ey: Vec<f64> = y[..edge].iter().chain(&y[n - edge..]).copied().collect();
    let (slope0, icpt0) = line_through(&ex, &ey);
    let d: Vec<f64> = x.iter().zip(&y).map(|(x, y)| y - (slope0 * x + icpt0)).collect();

    let (imax, amp0) = d
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let noise = noise_sigma(&y);
    if !(amp0 > 3.0 * noise) || amp0 <= 0.0 {
        return Err(Error::IllPosed(format!(
            "no peak above noise (height {amp0:.3e}, noise {noise:.3e})"
        )));
    }
    if imax < 2 || imax + 2 >= n {
        return Err(Error::IllPosed("peak at window edge".into()));
    }
    let left = half_crossing(&x, &d, imax, amp0 / 2.0, -1);
    let right = half_crossing(&x, &d, imax, amp0 / 2.0, 1);
    if right - left < 3.0 * step {
        return Err(Error::IllPosed("peak not resolved by three samples".into()));
    }
    let fwhm0 = right - left;
    let width0 = fwhm0 / 1.6376;

    let model = |p: &[f64], t: f64| {
        p[3] * voigt_unit_height(t - p[0], p[1], p[2]) + p[4] * (t - reference) + p[5]
    };
    let residuals = |p: &[f64]| x.iter().zip(&y).map(|(t, y)| model(p, *t) - y).collect::<Vec<_>>();
    let p0 = [
        x[imax],
        width0,
        width0,
        amp0,
        slope0,
        slope0 * reference + icpt0,
    ];
    let scales = [fwhm0, fwhm0, fwhm0, amp0, amp0 / (x_last - x_first), amp0];
    let fit = levenberg_marquardt(residuals, &p0, &scales, opts)?;
    let p = &fit.params;

    let (center, fwhm_g, fwhm_l, amplitude) = (p[0], p[1].abs(), p[2].abs(), p[3]);
    if !(amplitude > 3.0 * fit.residual_rms) || amplitude <= 0.0 {
        return Err(Error::IllPosed(format!(
            "fitted amplitude {amplitude:.3e} below 3x residual rms {:.3e}",
            fit.residual_rms
        )));
    }
    if amplitude < 3.0 * fit.uncertainties[3] {
        return Err(Error::IllPosed(format!(
            "fitted amplitude {amplitude:.3e} not significant (± {:.3e})",
            fit.uncertainties[3]
        )));
    }
    if center < x_first + 2.0 * step || center > x_last - 2.0 * step {
        return Err(Error::IllPosed(format!("peak centre {center:.4} at window edge")));
    }
    if voigt_fwhm(fwhm_g, fwhm_l) < 3.0 * step {
        return Err(Error::IllPosed("peak not resolved by three samples".into()));
    }

    let sign = [1.0, p[1].signum(), p[2].signum()];
    let mut shape_covariance = [[0.0; 3]; 3];
    for (i, row) in shape_covariance.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = fit.covariance[(i, j)] * sign[i] * sign[j];
        }
    }
    let u = &fit.uncertainties;
    Ok(VoigtPeak {
        center,
        fwhm_g,
        fwhm_l,
        amplitude,
        slope: p[4],
        offset: p[5],
        reference,
        uncertainty: PeakUncertainty {
            center: u[0],
            fwhm_g: u[1],
            fwhm_l: u[2],
            amplitude: u[3],
            slope: u[4],
            offset: u[5],
        },
        shape_covariance,
        residual_rms: fit.residual_rms,
        window,
        iterations: fit.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeStrainResult {
    pub tau_nm: f64,
    pub tau_err_nm: f64,
    pub epsilon_pct: f64,
    pub epsilon_err_pct: f64,
    pub wavelength: f64,
    pub k: f64,
}

/// Instrument profile removed before the size-strain split: Gaussian widths
/// in quadrature, Lorentzian widths linearly. Degrees 2θ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Instrument {
    pub fwhm_g: f64,
    pub fwhm_l: f64,
}

fn integral_breadths_rad(fwhm_g: f64, fwhm_l: f64) -> (f64, f64) {
    let deg = PI / 180.0;
    let beta_g = fwhm_g / 2.0 * (PI / LN_2).sqrt() * deg;
    let beta_l = PI / 2.0 * fwhm_l * deg;
    (beta_g, beta_l)
}

pub fn size_strain(peak: &VoigtPeak, wavelength: f64, k: f64) -> Result<SizeStrainResult> {
    size_strain_corrected(peak, wavelength, k, &Instrument::default())
}

pub fn size_strain_corrected(
    peak: &VoigtPeak,
    wavelength: f64,
    k: f64,
    instrument: &Instrument,
) -> Result<SizeStrainResult> {
    if !(wavelength > 0.0) || !(k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "wavelength and K must be positive, got {wavelength} and {k}"
        )));
    }
    if !(peak.center > 0.0 && peak.center < 180.0) {
        return Err(Error::OutOfRange(peak.center));
    }
    let g2 = peak.fwhm_g.powi(2) - instrument.fwhm_g.powi(2);
    let g = g2.max(0.0).sqrt();
    let l = peak.fwhm_l - instrument.fwhm_l;
    let cov = &peak.shape_covariance;
    if !(l > cov[2][2].sqrt()) || l <= 0.0 {
        return Err(Error::DegenerateBreadth("lorentzian"));
    }
    if !(g > cov[1][1].sqrt()) || g <= 0.0 {
        return Err(Error::DegenerateBreadth("gaussian"));
    }

    let theta = peak.center.to_radians() / 2.0;
    let (beta_g, beta_l) = integral_breadths_rad(g, l);
    let tau = k * wavelength / (beta_l * theta.cos()) / 10.0;
    let eps = beta_g / (4.0 * theta.tan()) * 100.0;

    // gradients with respect to (center, fwhm_G, fwhm_L) of the raw peak
    let dtheta = PI / 360.0;
    let grad_tau = [tau * theta.tan() * dtheta, 0.0, -tau / l];
    let grad_eps = [
        -eps / (theta.sin() * theta.cos()) * dtheta,
        eps / g * (peak.fwhm_g / g),
        0.0,
    ];
    let var = |grad: &[f64; 3]| -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += grad[i] * cov[i][j] * grad[j];
            }
        }
        s.max(0.0)
    };
    Ok(SizeStrainResult {
        tau_nm: tau,
        tau_err_nm: var(&grad_tau).sqrt(),
        epsilon_pct: eps,
        epsilon_err_pct: var(&grad_eps).sqrt(),
        wavelength,
        k,
    })
}

/// Component FWHMs (fwhm_G, fwhm_L) in degrees 2θ that produce grain size
/// `tau_nm` and strain `eps_pct` at `two_theta`; inverse of [`size_strain`].
pub fn breadths_for(tau_nm: f64, eps_pct: f64, two_theta: f64, wavelength: f64, k: f64) -> (f64, f64) {
    let theta = two_theta.to_radians() / 2.0;
    let beta_l = k * wavelength / (tau_nm * 10.0 * theta.cos());
    let beta_g = 4.0 * eps_pct / 100.0 * theta.tan();
    let fwhm_l = (beta_l / (PI / 2.0)).to_degrees();
    let fwhm_g = (beta_g * 2.0 / (PI / LN_2).sqrt()).to_degrees();
    (fwhm_g, fwhm_l)
}

/// Smallest accepted scattering angle; below it d diverges.
pub const MIN_TWO_THETA: f64 = 0.01;

/// Interplanar spacing d = λ / (2 sin θ), Å.
pub fn bragg_d(two_theta: f64, wavelength: f64) -> Result<f64> {
    if !(two_theta > MIN_TWO_THETA && two_theta < 180.0) {
        return Err(Error::OutOfRange(two_theta));
    }
    if !(wavelength > 0.0) {
        return Err(Error::InvalidInput(format!("wavelength {wavelength} must be positive")));
    }
    Ok(wavelength / (2.0 * (two_theta.to_radians() / 2.0).sin()))
}

/// Scattering angle for spacing `d`, degrees 2θ.
pub fn bragg_two_theta(d: f64, wavelength: f64) -> Result<f64> {
    let s = wavelength / (2.0 * d);
    if !(d > 0.0) || !(wavelength > 0.0) || s >= 1.0 {
        return Err(Error::OutOfRange(s));
    }
    Ok(2.0 * s.asin().to_degrees())
}

/// Lattice parameter from the spacing of one reflection given by its
/// unreduced indices, e.g. `[0, 0, 4]`.
///
/// Cubic: a = d·√(h²+k²+l²). Tetragonal: c from (00l), a from (hk0);
/// mixed tetragonal reflections need a second reflection and are rejected.
pub fn lattice_param(d: f64, hkl: [i32; 3], system: CrystalSystem) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidInput(format!("spacing {d} must be positive")));
    }
    let [h, k, l] = hkl.map(|v| v as f64);
    if hkl == [0, 0, 0] {
        return Err(Error::InvalidInput("reflection (000)".into()));
    }
    if system.is_cubic() {
        return Ok(d * (h * h + k * k + l * l).sqrt());
    }
    if h == 0.0 && k == 0.0 {
        Ok(d * l.abs())
    } else if l == 0.0 {
        Ok(d * (h * h + k * k).sqrt())
    } else {
        Err(Error::InvalidInput(format!(
            "({} {} {}) mixes a and c; a tetragonal cell needs (00l) or (hk0)",
            hkl[0], hkl[1], hkl[2]
        )))
    }
}

/// Uniformly sampled Voigt scan with additive Gaussian noise of standard
/// deviation `noise`, clipped at zero. Deterministic in `seed`.
pub fn synthetic_scan(peak: &VoigtPeak, range: (f64, f64), points: usize, noise: f64, seed: u64) -> DiffractionScan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(0.0)).expect("finite noise");
    let step = (range.1 - range.0) / (points - 1) as f64;
    let two_theta: Vec<f64> = (0..points).map(|i| range.0 + i as f64 * step).collect();
    let intensity = two_theta
        .iter()
        .map(|t| (peak.eval(*t) + normal.sample(&mut rng)).max(0.0))
        .collect();
    DiffractionScan { two_theta, intensity }
}
