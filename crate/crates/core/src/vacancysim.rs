//! One-dimensional oxygen-vacancy kinetics in a growing oxide film.
//!
//! ```text
//! dc/dt = D d2c/dz2 - k(P) c        0 < z < H(t)
//! ```
//!
//! with zero flux at the substrate and at the free surface. Material
//! deposited at rate `r` carries vacancy fraction `g(P)`. Deposit collects in
//! a partial top layer and becomes a grid cell once it reaches `dz`.
//!
//! The rate laws and constants are illustrative only; nothing here is fitted
//! to measured vacancy densities.

use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Pressure dependence of a rate or fraction. Pressures in Torr.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PressureLaw {
    Constant { value: f64 },
    /// `scale / (1 + P/p0)`
    Decreasing { scale: f64, p0: f64 },
    /// `scale * P / (P + p0)`
    Increasing { scale: f64, p0: f64 },
    /// `below` for `P < threshold`, `above` otherwise.
    Step { below: f64, above: f64, threshold: f64 },
}

impl fmt::Display for PressureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PressureLaw::Constant { value } => write!(f, "constant({value})"),
            PressureLaw::Decreasing { scale, p0 } => write!(f, "decreasing(scale={scale}, p0={p0})"),
            PressureLaw::Increasing { scale, p0 } => write!(f, "increasing(scale={scale}, p0={p0})"),
            PressureLaw::Step { below, above, threshold } => {
                write!(f, "step(below={below}, above={above}, threshold={threshold})")
            }
        }
    }
}

impl PressureLaw {
    pub fn eval(&self, p: f64) -> f64 {
        match *self {
            PressureLaw::Constant { value } => value,
            PressureLaw::Decreasing { scale, p0 } => scale / (1.0 + p / p0),
            PressureLaw::Increasing { scale, p0 } => scale * p / (p + p0),
            PressureLaw::Step { below, above, threshold } => {
                if p < threshold {
                    below
                } else {
                    above
                }
            }
        }
    }

    /// Largest value over all pressures.
    pub fn sup(&self) -> f64 {
        match *self {
            PressureLaw::Constant { value } => value,
            PressureLaw::Decreasing { scale, .. } | PressureLaw::Increasing { scale, .. } => scale,
            PressureLaw::Step { below, above, .. } => below.max(above),
        }
    }

    fn check(&self, what: &str, unit_interval: bool) -> Result<()> {
        let vals: Vec<f64> = match *self {
            PressureLaw::Constant { value } => vec![value],
            PressureLaw::Decreasing { scale, p0 } | PressureLaw::Increasing { scale, p0 } => {
                if !(p0 > 0.0) {
                    return Err(Error::Config(format!("{what}: p0 must be positive")));
                }
                vec![scale]
            }
            PressureLaw::Step { below, above, .. } => vec![below, above],
        };
        for v in vals {
            if !(v >= 0.0) || (unit_interval && v > 1.0) {
                return Err(Error::Config(format!("{what}: value {v} out of range")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacancyParams {
    /// Vacancy diffusivity, nm²/s.
    pub d_v: f64,
    /// Fraction of vacancies in freshly deposited material.
    pub incorporation: PressureLaw,
    /// Annihilation rate, 1/s.
    pub annihilation: PressureLaw,
    /// Grid spacing, nm.
    pub dz: f64,
}

pub const DEFAULT_G0: f64 = 0.05;
pub const DEFAULT_P0_TORR: f64 = 1e-3;
pub const DEFAULT_K0: f64 = 1e-3;
pub const DEFAULT_D_V: f64 = 1e-2;
pub const DEFAULT_DZ: f64 = 0.5;
/// 0.17 Å/shot at ~3.4 Hz, i.e. 70 nm in about 20 minutes.
pub const DEFAULT_RATE_NM_S: f64 = 0.0583;

impl Default for VacancyParams {
    fn default() -> Self {
        VacancyParams {
            d_v: DEFAULT_D_V,
            incorporation: PressureLaw::Decreasing { scale: DEFAULT_G0, p0: DEFAULT_P0_TORR },
            annihilation: PressureLaw::Increasing { scale: DEFAULT_K0, p0: DEFAULT_P0_TORR },
            dz: DEFAULT_DZ,
        }
    }
}

impl VacancyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_v >= 0.0) || !self.d_v.is_finite() {
            return Err(Error::Config(format!("d_v = {} must be finite and >= 0", self.d_v)));
        }
        if !(self.dz > 0.0) {
            return Err(Error::Config(format!("dz = {} must be positive", self.dz)));
        }
        self.incorporation.check("incorporation", true)?;
        self.annihilation.check("annihilation", false)
    }

    /// Largest explicit step keeping every update a convex combination
    /// (hence 0 <= c <= max g): `dt <= 1 / (2 D/dz² + k)`.
    pub fn stability_bound(&self, pressure: f64) -> f64 {
        let rate = 2.0 * self.d_v / (self.dz * self.dz) + self.annihilation.eval(pressure);
        if rate > 0.0 {
            1.0 / rate
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub duration_s: f64,
    pub rate_nm_s: f64,
    pub pressure_torr: f64,
    /// Recorded with the run; the default laws have no temperature term.
    #[serde(default)]
    pub temperature_c: f64,
    /// Material grown in this segment belongs to the buffer layer.
    #[serde(default)]
    pub buffer: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSchedule {
    #[serde(rename = "segment", default)]
    pub segments: Vec<Segment>,
}

impl GrowthSchedule {
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration_s > 0.0) || !(s.rate_nm_s >= 0.0) || !(s.pressure_torr >= 0.0) {
                return Err(Error::Config(format!(
                    "segment {i}: duration must be > 0, rate and pressure >= 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VacancyState {
    /// Site fraction per full cell, substrate first.
    pub c: Vec<f64>,
    /// Thickness of the partial top layer, nm (< dz).
    pub pending_h: f64,
    /// Vacancy content of the partial layer, nm (fraction × thickness).
    pub pending_q: f64,
    pub t: f64,
    /// Thickness at the end of the last buffer segment, nm.
    pub buffer_top: f64,
    dz: f64,
}

impl VacancyState {
    pub fn new(dz: f64) -> Self {
        VacancyState { c: Vec::new(), pending_h: 0.0, pending_q: 0.0, t: 0.0, buffer_top: 0.0, dz }
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn thickness(&self) -> f64 {
        self.c.len() as f64 * self.dz + self.pending_h
    }

    /// ∫ c dz over the film, nm.
    pub fn content(&self) -> f64 {
        self.c.iter().sum::<f64>() * self.dz + self.pending_q
    }

    /// Film-average site fraction; `None` for an empty film.
    pub fn mean(&self) -> Option<f64> {
        let h = self.thickness();
        (h > 0.0).then(|| self.content() / h)
    }

    /// Average over material above the buffer; whole film when no buffer.
    pub fn active_mean(&self) -> Option<f64> {
        let b = self.buffer_top;
        let h = self.thickness();
        if !(h - b > 1e-12) {
            return None;
        }
        let mut q = self.pending_q;
        for (i, c) in self.c.iter().enumerate() {
            let lo = i as f64 * self.dz;
            let hi = lo + self.dz;
            let overlap = (hi - lo.max(b)).clamp(0.0, self.dz);
            q += c * overlap;
        }
        // partial layer below the buffer top only when the film is all buffer
        Some(q / (h - b))
    }
}

/// Advance one explicit step of length `dt` under `segment` conditions.
pub fn step(state: &mut VacancyState, params: &VacancyParams, segment: &Segment, dt: f64) -> Result<()> {
    let bound = params.stability_bound(segment.pressure_torr);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::StabilityViolation { dt, bound });
    }
    let k = params.annihilation.eval(segment.pressure_torr);
    let g = params.incorporation.eval(segment.pressure_torr);
    let r = params.d_v * dt / (params.dz * params.dz);
    let decay = 1.0 - k * dt;

    let n = state.c.len();
    if n > 0 {
        let old = state.c.clone();
        for i in 0..n {
            let left = if i == 0 { old[0] } else { old[i - 1] };
            let right = if i + 1 == n { old[n - 1] } else { old[i + 1] };
            state.c[i] = old[i] + r * (left - 2.0 * old[i] + right) - k * dt * old[i];
        }
    }
    state.pending_q *= decay;

    let h = segment.rate_nm_s * dt;
    state.pending_h += h;
    state.pending_q += g * h;
    while state.pending_h >= state.dz * (1.0 - 1e-12) {
        let frac = state.pending_q / state.pending_h;
        state.c.push(frac);
        state.pending_q -= frac * state.dz;
        state.pending_h = (state.pending_h - state.dz).max(0.0);
        if state.pending_h == 0.0 {
            state.pending_q = 0.0;
        }
    }
    state.t += dt;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Requested step, s; shortened to the stability bound and to divide
    /// each segment evenly.
    pub max_dt: f64,
    /// Spacing of time-series samples, s.
    pub record_every: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { max_dt: 1.0, record_every: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub thickness: f64,
    /// NaN while the film is empty.
    pub mean_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// Cell centres, nm from the substrate.
    pub z: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub series: Vec<SeriesPoint>,
    /// Field at the end of every segment.
    pub snapshots: Vec<Snapshot>,
    pub state: VacancyState,
}

impl SimResult {
    /// Final film-average site fraction; `None` flags an empty film.
    pub fn final_mean(&self) -> Option<f64> {
        self.state.mean()
    }
}

fn snapshot(state: &VacancyState) -> Snapshot {
    Snapshot {
        t: state.t,
        z: (0..state.c.len()).map(|i| (i as f64 + 0.5) * state.dz).collect(),
        c: state.c.clone(),
    }
}

pub fn simulate(schedule: &GrowthSchedule, params: &VacancyParams, opts: &SimOptions) -> Result<SimResult> {
    params.validate()?;
    schedule.validate()?;
    if !(opts.max_dt > 0.0) || !(opts.record_every > 0.0) {
        return Err(Error::InvalidInput("max_dt and record_every must be positive".into()));
    }
    let mut state = VacancyState::new(params.dz);
    let point = |s: &VacancyState| SeriesPoint { t: s.t, thickness: s.thickness(), mean_c: s.mean().unwrap_or(f64::NAN) };
    let mut series = vec![point(&state)];
    let mut snapshots = Vec::new();
    let mut next_record = opts.record_every;
    let mut t_start = 0.0;

    for seg in &schedule.segments {
        let dt_cap = opts.max_dt.min(params.stability_bound(seg.pressure_torr));
        let steps = (seg.duration_s / dt_cap).ceil().max(1.0) as u64;
        let dt = seg.duration_s / steps as f64;
        for i in 1..=steps {
            step(&mut state, params, seg, dt)?;
            // recompute from the segment start to avoid drift in t
            state.t = t_start + i as f64 * dt;
            if state.t >= next_record - 1e-9 {
                series.push(point(&state));
                while next_record <= state.t + 1e-9 {
                    next_record += opts.record_every;
                }
            }
        }
        t_start += seg.duration_s;
        state.t = t_start;
        if seg.buffer {
            state.buffer_top = state.thickness();
        }
        if series.last().map(|p| p.t) != Some(state.t) {
            series.push(point(&state));
        }
        snapshots.push(snapshot(&state));
    }
    Ok(SimResult { series, snapshots, state })
}

/// Buffer-then-growth-then-anneal schedule used by [`saturation_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleTemplate {
    pub rate_nm_s: f64,
    pub buffer_pressure_torr: f64,
    pub growth_pressure_torr: f64,
    pub growth_thickness_nm: f64,
    pub anneal_s: f64,
    pub anneal_pressure_torr: f64,
    pub temperature_c: f64,
}

impl Default for ScheduleTemplate {
    fn default() -> Self {
        ScheduleTemplate {
            rate_nm_s: DEFAULT_RATE_NM_S,
            buffer_pressure_torr: 0.0,
            growth_pressure_torr: 0.020,
            growth_thickness_nm: 60.0,
            anneal_s: 1800.0,
            anneal_pressure_torr: 0.020,
            temperature_c: 390.0,
        }
    }
}

impl ScheduleTemplate {
    pub fn build(&self, buffer_nm: f64) -> Result<GrowthSchedule> {
        if !(buffer_nm >= 0.0) || !(self.rate_nm_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "buffer {buffer_nm} nm and rate {} nm/s must be non-negative and positive",
                self.rate_nm_s
            )));
        }
        let seg = |duration_s, rate_nm_s, pressure_torr, buffer| Segment {
            duration_s,
            rate_nm_s,
            pressure_torr,
            temperature_c: self.temperature_c,
            buffer,
        };
        let mut segments = Vec::new();
        if buffer_nm > 0.0 {
            segments.push(seg(buffer_nm / self.rate_nm_s, self.rate_nm_s, self.buffer_pressure_torr, true));
        }
        if self.growth_thickness_nm > 0.0 {
            segments.push(seg(
                self.growth_thickness_nm / self.rate_nm_s,
                self.rate_nm_s,
                self.growth_pressure_torr,
                false,
            ));
        }
        if self.anneal_s > 0.0 {
            segments.push(seg(self.anneal_s, 0.0, self.anneal_pressure_torr, false));
        }
        Ok(GrowthSchedule { segments })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMetric {
    /// Mean over material grown after the buffer.
    #[default]
    ActiveLayer,
    WholeFilm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub buffer_nm: f64,
    /// Selected metric.
    pub mean_c: f64,
    pub film_mean_c: f64,
    pub active_mean_c: f64,
}

/// One simulation per buffer thickness; runs in parallel under `exec`
/// with results identical to a sequential run.
pub fn saturation_scan(
    buffers_nm: &[f64],
    template: &ScheduleTemplate,
    params: &VacancyParams,
    opts: &SimOptions,
    metric: ScanMetric,
    exec: Exec,
) -> Result<Vec<ScanPoint>> {
    if buffers_nm.is_empty() {
        return Err(Error::InvalidInput("no buffer thicknesses given".into()));
    }
    let runs = par::map(exec, buffers_nm, |b| -> Result<ScanPoint> {
        let res = simulate(&template.build(*b)?, params, opts)?;
        let film = res.state.mean().unwrap_or(f64::NAN);
        let active = res.state.active_mean().unwrap_or(f64::NAN);
        Ok(ScanPoint {
            buffer_nm: *b,
            mean_c: match metric {
                ScanMetric::ActiveLayer => active,
                ScanMetric::WholeFilm => film,
            },
            film_mean_c: film,
            active_mean_c: active,
        })
    });
    runs.into_iter().collect()
}

/// Film-average site fraction from the single-compartment balance
/// `dN/dt = r g - k N`, `N` the content per area, integrated exactly per
/// segment. Holds for any D because k is uniform and no flux leaves.
pub fn well_mixed_mean(schedule: &GrowthSchedule, params: &VacancyParams) -> Option<f64> {
    let mut n = 0.0;
    let mut h = 0.0;
    for s in &schedule.segments {
        let k = params.annihilation.eval(s.pressure_torr);
        let src = s.rate_nm_s * params.incorporation.eval(s.pressure_torr);
        let d = s.duration_s;
        n = if k > 0.0 {
            n * (-k * d).exp() + src / k * (1.0 - (-k * d).exp())
        } else {
            n + src * d
        };
        h += s.rate_nm_s * d;
    }
    (h > 0.0).then(|| n / h)
}

pub const DEFAULT_SCAN_BUFFERS_NM: [f64; 6] = [0.0, 2.0, 5.0, 10.0, 20.0, 40.0];
