//! Elemental depth profiles and interdiffusion fits.
//!
//! A diffused step is modelled by the constant-source solution
//! `c(z) = c0/2 erfc((z - z0)/L) + baseline` with `L = 2 sqrt(D t)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions};

/// Default thermal budget: ~20 min growth plus a 30 min anneal, s.
pub const DEFAULT_TIME_S: f64 = 3000.0;
/// nm²/s to cm²/s.
pub const NM2_TO_CM2: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile {
    /// Signed distance from the nominal interface, nm.
    pub z: Vec<f64>,
    pub channels: Vec<(String, Vec<f64>)>,
}

impl DepthProfile {
    pub fn new(z: Vec<f64>, channels: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let up = z.windows(2).all(|w| w[1] > w[0]);
        let down = z.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidInput("depth axis must be strictly monotone".into()));
        }
        for (name, c) in &channels {
            if c.len() != z.len() {
                return Err(Error::InvalidInput(format!(
                    "channel {name} has {} values for {} depths",
                    c.len(),
                    z.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("channel {name} has non-finite values")));
            }
        }
        Ok(DepthProfile { z, channels })
    }

    pub fn channel(&self, element: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(element))
            .map(|(_, c)| c.as_slice())
    }
}

/// Divide every channel by its own maximum.
pub fn normalize(raw: &DepthProfile) -> Result<DepthProfile> {
    let mut channels = Vec::with_capacity(raw.channels.len());
    for (name, c) in &raw.channels {
        if c.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidInput(format!("channel {name} has negative counts")));
        }
        let max = c.iter().cloned().fold(0.0, f64::max);
        if !(max > 0.0) {
            return Err(Error::AllZeroChannel(name.clone()));
        }
        channels.push((name.clone(), c.iter().map(|v| v / max).collect()));
    }
    Ok(DepthProfile { z: raw.z.clone(), channels })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionOptions {
    /// Explicit fit window in nm; overrides the automatic one.
    pub window: Option<(f64, f64)>,
    /// Cut the window before a secondary rise (accumulation) on the low side.
    pub exclude_accumulation: bool,
}

impl Default for DiffusionOptions {
    fn default() -> Self {
        DiffusionOptions { window: None, exclude_accumulation: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionFit {
    pub l_nm: f64,
    pub l_err_nm: f64,
    pub d_cm2_s: f64,
    pub d_err_cm2_s: f64,
    pub c0: f64,
    pub z0_nm: f64,
    pub z0_err_nm: f64,
    pub baseline: f64,
    pub residual_rms: f64,
    pub t_s: f64,
    /// `L` hit the sampling step and was clamped to it.
    pub at_resolution_floor: bool,
    pub window: (f64, f64),
}

impl DiffusionFit {
    pub fn d_nm2_s(&self) -> f64 {
        self.d_cm2_s / NM2_TO_CM2
    }
}

fn erfc_model(p: &[f64], z: f64) -> f64 {
    p[0] / 2.0 * libm::erfc((z - p[1]) / p[2]) + p[3]
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Position where `c` first crosses `level`, linearly interpolated.
fn crossing(z: &[f64], c: &[f64], level: f64) -> Option<f64> {
    let above = c[0] > level;
    for i in 1..z.len() {
        if (c[i] > level) != above {
            let t = (c[i - 1] - level) / (c[i - 1] - c[i]);
            return Some(z[i - 1] + t * (z[i] - z[i - 1]));
        }
    }
    None
}

/// Fit one element channel of a normalised profile.
pub fn fit_diffusion(profile: &DepthProfile, element: &str, t_s: f64, opts: &DiffusionOptions) -> Result<DiffusionFit> {
    if !(t_s > 0.0) {
        return Err(Error::InvalidInput(format!("time {t_s} s must be positive")));
    }
    let chan = profile
        .channel(element)
        .ok_or_else(|| Error::InvalidInput(format!("no channel named {element}")))?;

    // work on ascending z
    let mut pts: Vec<(f64, f64)> = profile.z.iter().cloned().zip(chan.iter().cloned()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((lo, hi)) = opts.window {
        pts.retain(|(z, _)| *z >= lo && *z <= hi);
    }
    if pts.len() < 8 {
        return Err(Error::IllPosed(format!("{} points in window, at least 8 needed", pts.len())));
    }
    let (mut z, mut c): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();

    let range = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - c.iter().cloned().fold(f64::INFINITY, f64::min);
    let edge = (z.len() / 10).max(2);
    let contrast = mean(&c[..edge]) - mean(&c[c.len() - edge..]);
    if !(range > 0.0) || contrast.abs() < 0.3 * range {
        return Err(Error::MonotonicityViolation(format!(
            "{element}: end-to-end contrast {contrast:.3} is under 0.3 of the range {range:.3}"
        )));
    }

    if opts.window.is_none() && opts.exclude_accumulation {
        // orientation: high side first
        let falling = contrast > 0.0;
        let half = 0.5 * (mean(&c[..edge]) + mean(&c[c.len() - edge..]));
        let start = crossing(&z, &c, half).map_or(0, |zc| z.partition_point(|v| *v < zc));
        let rising = |v: f64| if falling { v } else { -v };
        let mut best = start;
        for i in start..c.len() {
            if rising(c[i]) < rising(c[best]) {
                best = i;
            }
            if rising(c[i]) - rising(c[best]) > 0.1 * range {
                z.truncate(best + 1);
                c.truncate(best + 1);
                break;
            }
        }
        if z.len() < 8 {
            return Err(Error::IllPosed("window too short after excluding accumulation".into()));
        }
    }

    let n = z.len();
    let step = (z[n - 1] - z[0]) / (n - 1) as f64;
    let window = (z[0], z[n - 1]);
    let edge = (n / 10).max(2);
    let b0 = mean(&c[n - edge..]);
    let c00 = mean(&c[..edge]) - b0;
    let z0 = crossing(&z, &c, b0 + 0.5 * c00).unwrap_or(0.5 * (z[0] + z[n - 1]));
    let q1 = crossing(&z, &c, b0 + 0.76 * c00);
    let q3 = crossing(&z, &c, b0 + 0.24 * c00);
    let l0 = match (q1, q3) {
        (Some(a), Some(b)) if (b - a).abs() > 0.0 => ((b - a).abs()).max(step),
        _ => step,
    };

    let d_from = |l: f64| l * l / (4.0 * t_s);
    // sharp step: nothing sampled inside the 10-90% band
    let inside = c
        .iter()
        .filter(|v| {
            let f = (**v - b0) / c00;
            f > 0.1 && f < 0.9
        })
        .count();
    if inside == 0 {
        let d = d_from(step);
        let resid: Vec<f64> = z.iter().zip(&c).map(|(zi, ci)| erfc_model(&[c00, z0, step, b0], *zi) - ci).collect();
        return Ok(DiffusionFit {
            l_nm: step,
            l_err_nm: 0.0,
            d_cm2_s: d * NM2_TO_CM2,
            d_err_cm2_s: 0.0,
            c0: c00,
            z0_nm: z0,
            z0_err_nm: step / 2.0,
            baseline: b0,
            residual_rms: (resid.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt(),
            t_s,
            at_resolution_floor: true,
            window,
        });
    }

    let residuals = |p: &[f64]| {
        let q = [p[0], p[1], p[2].abs().max(1e-12), p[3]];
        z.iter().zip(&c).map(|(zi, ci)| erfc_model(&q, *zi) - ci).collect::<Vec<_>>()
    };
    let scale = c00.abs().max(1e-12);
    let fit = levenberg_marquardt(residuals, &[c00, z0, l0, b0], &[scale, l0, l0, scale], &LmOptions::default())?;
    let p = &fit.params;
    let u = &fit.uncertainties;
    let mut l = p[2].abs();
    let mut l_err = u[2];
    let floor = l < step;
    if floor {
        l = step;
        l_err = 0.0;
    }
    let d = d_from(l);
    Ok(DiffusionFit {
        l_nm: l,
        l_err_nm: l_err,
        d_cm2_s: d * NM2_TO_CM2,
        d_err_cm2_s: 2.0 * d * l_err / l * NM2_TO_CM2,
        c0: p[0],
        z0_nm: p[1],
        z0_err_nm: u[1],
        baseline: p[3],
        residual_rms: fit.residual_rms,
        t_s,
        at_resolution_floor: floor,
        window,
    })
}

/// Diffusion length for coefficient `d_cm2_s` after `t_s`, nm.
pub fn diffusion_length_nm(d_cm2_s: f64, t_s: f64) -> f64 {
    2.0 * (d_cm2_s / NM2_TO_CM2 * t_s).sqrt()
}

/// Sampled erfc step with additive Gaussian noise, single channel.
#[allow(clippy::too_many_arguments)]
pub fn synthetic_profile(
    element: &str,
    d_cm2_s: f64,
    t_s: f64,
    z0: f64,
    range: (f64, f64),
    points: usize,
    noise: f64,
    seed: u64,
) -> DepthProfile {
    let l = diffusion_length_nm(d_cm2_s, t_s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(0.0)).expect("finite noise");
    let step = (range.1 - range.0) / (points - 1) as f64;
    let z: Vec<f64> = (0..points).map(|i| range.0 + i as f64 * step).collect();
    let c = z
        .iter()
        .map(|zi| erfc_model(&[1.0, z0, l, 0.0], *zi) + normal.sample(&mut rng))
        .collect();
    DepthProfile { z, channels: vec![(element.to_string(), c)] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        let raw = DepthProfile::new(
            vec![0.0, 1.0, 2.0],
            vec![("Ga".into(), vec![2.0, 4.0, 8.0]), ("Ti".into(), vec![30.0, 10.0, 0.0])],
        )
        .unwrap();
        let n = normalize(&raw).unwrap();
        assert_eq!(n.channel("Ga").unwrap(), &[0.25, 0.5, 1.0]);
        assert_eq!(n.channel("ti").unwrap()[0], 1.0);
        assert_eq!(normalize(&n).unwrap(), n);
        let zero = DepthProfile::new(vec![0.0, 1.0], vec![("C".into(), vec![0.0, 0.0])]).unwrap();
        assert_eq!(normalize(&zero), Err(Error::AllZeroChannel("C".into())));
    }

    #[test]
    fn recovers_forward_simulated_d() {
        for seed in 0..10 {
            let p = synthetic_profile("Ga", 1e-17, 3000.0, 0.0, (-20.0, 20.0), 161, 0.01, seed);
            let f = fit_diffusion(&p, "Ga", 3000.0, &DiffusionOptions::default()).unwrap();
            assert!((f.d_cm2_s / 1e-17 - 1.0).abs() < 0.10, "seed {seed}: D = {:e}", f.d_cm2_s);
            assert!(!f.at_resolution_floor);
        }
    }

    #[test]
    fn length_and_coefficient_are_consistent() {
        let p = synthetic_profile("Ga", 1e-17, 3000.0, 1.0, (-20.0, 20.0), 161, 0.01, 4);
        let f = fit_diffusion(&p, "Ga", 3000.0, &DiffusionOptions::default()).unwrap();
        assert!((diffusion_length_nm(f.d_cm2_s, f.t_s) / f.l_nm - 1.0).abs() < 1e-12);
        // unit arithmetic: 1e-17 cm²/s over 3000 s is 2√3 nm
        assert!((diffusion_length_nm(1e-17, 3000.0) - 2.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sharp_step_hits_resolution_floor() {
        let z: Vec<f64> = (0..41).map(|i| -10.0 + i as f64 * 0.5).collect();
        let c = z.iter().map(|z| if *z < 0.2 { 1.0 } else { 0.0 }).collect();
        let p = DepthProfile::new(z, vec![("Ga".into(), c)]).unwrap();
        let f = fit_diffusion(&p, "Ga", 3000.0, &DiffusionOptions::default()).unwrap();
        assert!(f.at_resolution_floor);
        assert!((f.l_nm - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rising_profile_fits_with_negative_amplitude() {
        let mut p = synthetic_profile("Ti", 1e-17, 3000.0, 0.0, (-20.0, 20.0), 161, 0.005, 8);
        p.channels[0].1 = p.channels[0].1.iter().map(|v| 1.0 - v).collect();
        let f = fit_diffusion(&p, "Ti", 3000.0, &DiffusionOptions::default()).unwrap();
        assert!(f.c0 < 0.0);
        assert!((f.l_nm / diffusion_length_nm(1e-17, 3000.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn flat_or_peaked_profile_is_rejected() {
        let z: Vec<f64> = (0..41).map(|i| i as f64).collect();
        let c = z.iter().map(|z| (-(z - 20.0f64).powi(2) / 20.0).exp()).collect();
        let p = DepthProfile::new(z, vec![("C".into(), c)]).unwrap();
        assert!(matches!(
            fit_diffusion(&p, "C", 3000.0, &DiffusionOptions::default()),
            Err(Error::MonotonicityViolation(_))
        ));
    }

    #[test]
    fn accumulation_bump_is_excluded() {
        let mut p = synthetic_profile("Ga", 1e-17, 3000.0, 0.0, (-20.0, 30.0), 201, 0.005, 2);
        for (z, v) in p.z.iter().zip(p.channels[0].1.iter_mut()) {
            *v += 0.4 * (-(z - 18.0).powi(2) / 4.0).exp();
        }
        let f = fit_diffusion(&p, "Ga", 3000.0, &DiffusionOptions::default()).unwrap();
        assert!(f.window.1 < 15.0, "window {:?}", f.window);
        assert!((f.l_nm / diffusion_length_nm(1e-17, 3000.0) - 1.0).abs() < 0.1);
        let whole = DiffusionOptions { window: None, exclude_accumulation: false };
        let g = fit_diffusion(&p, "Ga", 3000.0, &whole).unwrap();
        assert!((g.l_nm - f.l_nm).abs() > 0.05);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn translation_moves_only_the_interface(shift in -7.0f64..7.0) {
            let p = synthetic_profile("Ga", 1e-17, 3000.0, 0.0, (-20.0, 20.0), 161, 0.01, 5);
            let mut q = p.clone();
            q.z.iter_mut().for_each(|z| *z += shift);
            let a = fit_diffusion(&p, "Ga", 3000.0, &DiffusionOptions::default()).unwrap();
            let b = fit_diffusion(&q, "Ga", 3000.0, &DiffusionOptions::default()).unwrap();
            prop_assert!((b.z0_nm - a.z0_nm - shift).abs() < 1e-6);
            prop_assert!((b.l_nm - a.l_nm).abs() < 1e-6);
            prop_assert!((b.d_cm2_s / a.d_cm2_s - 1.0).abs() < 1e-6);
        }
    }
}
