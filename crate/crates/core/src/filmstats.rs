//! AFM roughness, growth-rate arithmetic and the empirical phase rule.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::spectra::Phase;

/// Deposition per laser shot, Å.
pub const DEFAULT_RATE_A_PER_SHOT: f64 = 0.17;
pub const MIN_GRID: usize = 16;

/// Row-major height grid in nm.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    pub rows: usize,
    pub cols: usize,
    pub heights: Vec<f64>,
    /// nm per pixel.
    pub pitch_nm: f64,
}

impl HeightMap {
    pub fn new(rows: usize, cols: usize, heights: Vec<f64>, pitch_nm: f64) -> Result<Self> {
        if heights.len() != rows * cols {
            return Err(Error::DegenerateGrid(format!(
                "{} values for a {rows}x{cols} grid",
                heights.len()
            )));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::DegenerateGrid("non-finite height".into()));
        }
        if !(pitch_nm > 0.0) {
            return Err(Error::DegenerateGrid(format!("pitch {pitch_nm} nm must be positive")));
        }
        Ok(HeightMap { rows, cols, heights, pitch_nm })
    }

    pub fn from_fn(rows: usize, cols: usize, pitch_nm: f64, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut h = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                h.push(f(r, c));
            }
        }
        Self::new(rows, cols, h, pitch_nm)
    }

    pub fn scan_size_um(&self) -> (f64, f64) {
        (self.cols as f64 * self.pitch_nm / 1000.0, self.rows as f64 * self.pitch_nm / 1000.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Detrend {
    None,
    #[default]
    Plane,
}

impl FromStr for Detrend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Detrend::None),
            "plane" => Ok(Detrend::Plane),
            other => Err(Error::InvalidInput(format!("unknown detrend '{other}'"))),
        }
    }
}

/// Standard deviation of heights after optional least-squares plane
/// removal, pm.
pub fn rms_roughness(map: &HeightMap, detrend: Detrend) -> Result<f64> {
    if map.rows < MIN_GRID || map.cols < MIN_GRID {
        return Err(Error::DegenerateGrid(format!(
            "{}x{} grid, at least {MIN_GRID}x{MIN_GRID} needed",
            map.rows, map.cols
        )));
    }
    let n = (map.rows * map.cols) as f64;
    let mean = map.heights.iter().sum::<f64>() / n;
    // centred pixel coordinates make the plane fit separable on a full grid
    let xc = (map.cols as f64 - 1.0) / 2.0;
    let yc = (map.rows as f64 - 1.0) / 2.0;
    let (mut sx, mut sy) = (0.0, 0.0);
    if detrend == Detrend::Plane {
        let (mut zx, mut zy, mut xx, mut yy) = (0.0, 0.0, 0.0, 0.0);
        for r in 0..map.rows {
            for c in 0..map.cols {
                let z = map.heights[r * map.cols + c] - mean;
                let (x, y) = (c as f64 - xc, r as f64 - yc);
                zx += z * x;
                zy += z * y;
                xx += x * x;
                yy += y * y;
            }
        }
        sx = zx / xx;
        sy = zy / yy;
    }
    let mut ss = 0.0;
    for r in 0..map.rows {
        for c in 0..map.cols {
            let z = map.heights[r * map.cols + c] - mean - sx * (c as f64 - xc) - sy * (r as f64 - yc);
            ss += z * z;
        }
    }
    Ok((ss / n).sqrt() * 1000.0)
}

/// Film thickness after `shots` laser pulses at `rate` Å/shot, nm.
pub fn thickness_from_shots(shots: u64, rate_a_per_shot: f64) -> f64 {
    shots as f64 * rate_a_per_shot / 10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Substrate {
    GaAs,
    GaSb,
    Soi,
}

impl FromStr for Substrate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaas" => Ok(Substrate::GaAs),
            "gasb" => Ok(Substrate::GaSb),
            "soi" | "si" => Ok(Substrate::Soi),
            other => Err(Error::InvalidInput(format!("unknown substrate '{other}'"))),
        }
    }
}

impl fmt::Display for Substrate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Substrate::GaAs => "GaAs",
            Substrate::GaSb => "GaSb",
            Substrate::Soi => "SOI",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prep {
    ArsenicCapped,
    OxideDesorbed,
}

impl FromStr for Prep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "capped" | "arsenic-capped" => Ok(Prep::ArsenicCapped),
            "desorbed" | "oxide-desorbed" => Ok(Prep::OxideDesorbed),
            other => Err(Error::InvalidInput(format!("unknown preparation '{other}'"))),
        }
    }
}

impl fmt::Display for Prep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prep::ArsenicCapped => "arsenic-capped",
            Prep::OxideDesorbed => "oxide-desorbed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Doping {
    Bulk,
    Sandwich,
    #[default]
    Undoped,
}

impl FromStr for Doping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bulk" => Ok(Doping::Bulk),
            "sandwich" => Ok(Doping::Sandwich),
            "undoped" => Ok(Doping::Undoped),
            other => Err(Error::InvalidInput(format!("unknown doping '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRecord {
    pub substrate: Substrate,
    pub prep: Prep,
    pub t_grow_c: f64,
    pub buffer_shots: u64,
    pub doping: Doping,
}

/// Empirical thresholds read off the growth phase diagram. Not physics.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseRules {
    pub t_rutile_c: f64,
    pub shot_threshold: u64,
    pub anatase_window_c: (f64, f64),
    pub domain_c: (f64, f64),
}

impl Default for PhaseRules {
    fn default() -> Self {
        PhaseRules {
            t_rutile_c: 450.0,
            shot_threshold: 500,
            anatase_window_c: (370.0, 400.0),
            domain_c: (300.0, 650.0),
        }
    }
}

impl PhaseRules {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasePrediction {
    pub phase: Phase,
    /// Which rule fired.
    pub rule: &'static str,
}

/// Rules in fixed priority: temperature, then buffer thickness, then the
/// low-temperature anatase window.
pub fn predict_phase(record: &GrowthRecord, rules: &PhaseRules) -> Result<PhasePrediction> {
    let t = record.t_grow_c;
    if !(t >= rules.domain_c.0 && t <= rules.domain_c.1) {
        return Err(Error::OutOfDomain(format!(
            "growth temperature {t} C outside [{}, {}]",
            rules.domain_c.0, rules.domain_c.1
        )));
    }
    if t >= rules.t_rutile_c {
        return Ok(PhasePrediction { phase: Phase::Rutile, rule: "temperature" });
    }
    if record.buffer_shots >= rules.shot_threshold {
        return Ok(PhasePrediction { phase: Phase::Rutile, rule: "buffer-thickness" });
    }
    if t >= rules.anatase_window_c.0 && t <= rules.anatase_window_c.1 {
        return Ok(PhasePrediction { phase: Phase::Anatase, rule: "low-temperature-window" });
    }
    Err(Error::OutOfDomain(format!(
        "{t} C with {} buffer shots is covered by no rule",
        record.buffer_shots
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn tilted_plane_is_flat() {
        let m = HeightMap::from_fn(32, 40, 10.0, |r, c| 0.3 * r as f64 - 0.7 * c as f64 + 5.0).unwrap();
        assert!(rms_roughness(&m, Detrend::Plane).unwrap() < 1e-9);
        assert!(rms_roughness(&m, Detrend::None).unwrap() > 1.0);
    }

    #[test]
    fn sinusoid_rms() {
        // 16 whole periods across the columns
        let a = 2.0;
        let m = HeightMap::from_fn(64, 256, 4.0, |_, c| a * (2.0 * std::f64::consts::PI * c as f64 / 16.0).sin()).unwrap();
        let rms = rms_roughness(&m, Detrend::Plane).unwrap();
        assert!((rms / (a / 2f64.sqrt() * 1000.0) - 1.0).abs() < 0.01, "{rms}");
    }

    #[test]
    fn gaussian_roughness() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = Normal::new(0.0, 0.3).unwrap();
        let m = HeightMap::from_fn(256, 256, 2.0, |_, _| n.sample(&mut rng)).unwrap();
        let rms = rms_roughness(&m, Detrend::Plane).unwrap();
        assert!((rms / 300.0 - 1.0).abs() < 0.03, "{rms}");
    }

    #[test]
    fn small_grid_is_degenerate() {
        let m = HeightMap::from_fn(15, 64, 1.0, |_, _| 0.0).unwrap();
        assert!(matches!(rms_roughness(&m, Detrend::Plane), Err(Error::DegenerateGrid(_))));
        assert!(HeightMap::new(2, 2, vec![0.0; 3], 1.0).is_err());
    }

    #[test]
    fn shots_to_thickness() {
        assert_eq!(thickness_from_shots(0, 0.17), 0.0);
        assert!((thickness_from_shots(500, 0.17) - 8.5).abs() < 1e-12);
        assert!((thickness_from_shots(70, 0.17) - 1.19).abs() < 1e-12);
    }

    fn rec(prep: Prep, t: f64, shots: u64) -> GrowthRecord {
        GrowthRecord { substrate: Substrate::GaAs, prep, t_grow_c: t, buffer_shots: shots, doping: Doping::Bulk }
    }

    #[test]
    fn quoted_phase_outcomes() {
        let r = PhaseRules::default();
        assert_eq!(predict_phase(&rec(Prep::ArsenicCapped, 390.0, 70), &r).unwrap().phase, Phase::Anatase);
        assert_eq!(predict_phase(&rec(Prep::ArsenicCapped, 390.0, 500), &r).unwrap().phase, Phase::Rutile);
        assert_eq!(predict_phase(&rec(Prep::OxideDesorbed, 565.0, 0), &r).unwrap().phase, Phase::Rutile);
        assert!(matches!(predict_phase(&rec(Prep::OxideDesorbed, 420.0, 0), &r), Err(Error::OutOfDomain(_))));
        assert!(matches!(predict_phase(&rec(Prep::OxideDesorbed, 700.0, 0), &r), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn rules_from_toml() {
        let r = PhaseRules::from_toml("t_rutile_c = 460.0\nshot_threshold = 300\n").unwrap();
        assert_eq!(r.shot_threshold, 300);
        assert_eq!(r.anatase_window_c, (370.0, 400.0));
        assert!(PhaseRules::from_toml("colour = 1").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn plane_invariance(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -10.0f64..10.0) {
            let base = HeightMap::from_fn(20, 24, 1.0, |r, k| ((r * 7 + k * 13) % 11) as f64 * 0.1).unwrap();
            let tilted = HeightMap::from_fn(20, 24, 1.0, |r, k| {
                base.heights[r * 24 + k] + a * k as f64 + b * r as f64 + c
            }).unwrap();
            let x = rms_roughness(&base, Detrend::Plane).unwrap();
            let y = rms_roughness(&tilted, Detrend::Plane).unwrap();
            prop_assert!((x - y).abs() < 1e-9 * x.max(1.0));
        }

        #[test]
        fn thickness_is_linear(s in 0u64..100_000, t in 0u64..100_000, rate in 0.0f64..1.0) {
            let sum = thickness_from_shots(s + t, rate);
            prop_assert!((sum - thickness_from_shots(s, rate) - thickness_from_shots(t, rate)).abs() < 1e-9 * sum.max(1.0));
        }

        #[test]
        fn prediction_is_total_on_rule_domain(t in 300.0f64..650.0, shots in 0u64..2000) {
            let r = PhaseRules::default();
            let p = predict_phase(&rec(Prep::ArsenicCapped, t, shots), &r);
            let covered = t >= 450.0 || shots >= 500 || (370.0..=400.0).contains(&t);
            prop_assert_eq!(p.is_ok(), covered);
        }
    }
}
