use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use tio2kit::crystal::{parse_hkl, BulkLattice, CrystalSystem, MillerIndex};
use tio2kit::filmstats::{self, Detrend, Doping, GrowthRecord, Prep, Substrate};
use tio2kit::io::{self, Column, PlotFormat, PlotKind, Provenance, ResultTable};
use tio2kit::mcia::{self, FilmSpec, MciaConfig};
use tio2kit::par::{self, Exec};
use tio2kit::profiles::{self, DiffusionOptions};
use tio2kit::spectra::{self, ClassifyOptions, LineModel, Phase, Spectrum, XUnit};
use tio2kit::vacancysim::{self, GrowthSchedule, ScanMetric, SimOptions, VacancyParams};
use tio2kit::xrdfit::{self, Instrument};
use tio2kit::Error;

use crate::{config, exit, Cli, Command};

/// A library or I/O error tagged with the command that raised it.
#[derive(Debug)]
pub struct CliError {
    module: &'static str,
    kind: Kind,
}

#[derive(Debug)]
enum Kind {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl CliError {
    fn lib(module: &'static str, e: Error) -> Self {
        CliError { module, kind: Kind::Lib(e) }
    }

    fn usage(module: &'static str, msg: impl Into<String>) -> Self {
        CliError { module, kind: Kind::Usage(msg.into()) }
    }

    pub fn exit_code(&self) -> u8 {
        match &self.kind {
            Kind::Io(..) | Kind::Usage(_) => exit::USAGE,
            Kind::Lib(Error::Parse { .. }) => exit::PARSE,
            Kind::Lib(Error::Config(_) | Error::InvalidInput(_) | Error::SchemaMismatch(_)) => exit::USAGE,
            Kind::Lib(_) => exit::NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Lib(e) => write!(f, "{}: {e}", self.module),
            Kind::Io(p, e) => write!(f, "{}: {}: {e}", self.module, p.display()),
            Kind::Usage(m) => write!(f, "{}: {m}", self.module),
        }
    }
}

type Res<T> = std::result::Result<T, CliError>;

trait Tag<T> {
    fn tag(self, module: &'static str) -> Res<T>;
    /// Prefix file-level errors with the file name.
    fn in_file(self, module: &'static str, path: &Path) -> Res<T>;
}

impl<T> Tag<T> for tio2kit::Result<T> {
    fn tag(self, module: &'static str) -> Res<T> {
        self.map_err(|e| CliError::lib(module, e))
    }

    fn in_file(self, module: &'static str, path: &Path) -> Res<T> {
        self.map_err(|e| {
            let e = match e {
                Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
                Error::IllPosed(m) => Error::IllPosed(format!("{}: {m}", path.display())),
                other => other,
            };
            CliError::lib(module, e)
        })
    }
}

fn read_bytes(module: &'static str, path: &Path) -> Res<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError { module, kind: Kind::Io(path.to_path_buf(), e) })
}

fn read_text(module: &'static str, path: &Path) -> Res<(Vec<u8>, String)> {
    let bytes = read_bytes(module, path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::lib(module, Error::Parse { line: 0, msg: format!("{}: not UTF-8", path.display()) }))?;
    Ok((bytes, text))
}

fn write_file(module: &'static str, path: &Path, bytes: &[u8]) -> Res<()> {
    std::fs::write(path, bytes).map_err(|e| CliError { module, kind: Kind::Io(path.to_path_buf(), e) })
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    // also catches NaN bounds
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(format!("window {lo}:{hi} is empty"));
    }
    Ok((lo, hi))
}

/// Everything a command hands back: the main table and, when a plot was
/// requested and the command supports one, the plot table and kind.
struct Output {
    table: ResultTable,
    plot: Option<(ResultTable, PlotKind)>,
}

impl Output {
    fn table(table: ResultTable) -> Self {
        Output { table, plot: None }
    }
}

pub fn run(cli: &Cli, args: &[String]) -> Res<()> {
    let common = &cli.common;
    let exec = if common.jobs == 1 { Exec::Sequential } else { Exec::Auto };
    let command_line = std::iter::once("tio2kit").chain(args.iter().map(String::as_str)).collect::<Vec<_>>().join(" ");
    let ctx = Ctx {
        config_dir: common.config_dir.clone(),
        exec,
        command_line,
        want_plot: common.plot.is_some(),
    };

    if ctx.want_plot && !has_plot(&cli.command) {
        return Err(CliError::usage("plot", "this command has no plot output"));
    }
    let out = with_pool(common.jobs, || dispatch(&cli.command, &ctx))??;

    let csv = out.table.to_csv();
    match &common.out {
        Some(p) => write_file("output", p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    if let Some(path) = &common.plot {
        let Some((table, kind)) = &out.plot else {
            unreachable!("plot support is checked before dispatch")
        };
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("svg") => PlotFormat::Svg,
            _ => PlotFormat::Csv,
        };
        let bytes = io::emit_plot_data(table, *kind, format).tag("plot")?;
        write_file("plot", path, &bytes)?;
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Res<T> {
    if jobs <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::usage("jobs", e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_pool<T: Send>(_jobs: usize, f: impl FnOnce() -> T + Send) -> Res<T> {
    Ok(f())
}

struct Ctx {
    config_dir: Option<PathBuf>,
    exec: Exec,
    command_line: String,
    want_plot: bool,
}

impl Ctx {
    fn dir(&self) -> Option<&Path> {
        self.config_dir.as_deref()
    }

    fn provenance(&self) -> Provenance {
        Provenance::new(self.command_line.clone())
    }
}

fn has_plot(cmd: &Command) -> bool {
    !matches!(
        cmd,
        Command::Spectra(SpectraCmd::Classify(_))
            | Command::Vacancy(VacancyCmd::Scan(_))
            | Command::Film(_)
    )
}

fn dispatch(cmd: &Command, ctx: &Ctx) -> Res<Output> {
    match cmd {
        Command::Mcia(a) => run_mcia(a, ctx),
        Command::XrdFit(a) => run_xrd(a, ctx),
        Command::Spectra(SpectraCmd::Classify(a)) => run_classify(a, ctx),
        Command::Spectra(SpectraCmd::PleFit(a)) => run_ple(a, ctx),
        Command::Spectra(SpectraCmd::Lifetime(a)) => run_lifetime(a, ctx),
        Command::Profile(ProfileCmd::Fit(a)) => run_profile(a, ctx),
        Command::Vacancy(VacancyCmd::Sim(a)) => run_vacancy_sim(a, ctx),
        Command::Vacancy(VacancyCmd::Scan(a)) => run_vacancy_scan(a, ctx),
        Command::Film(FilmCmd::Rms(a)) => run_rms(a, ctx),
        Command::Film(FilmCmd::Predict(a)) => run_predict(a, ctx),
    }
}

// ---------------------------------------------------------------- mcia

#[derive(Debug, Args)]
pub struct McIaArgs {
    /// Substrate material names (built-in or from lattices.toml).
    #[arg(long, value_delimiter = ',', default_value = "gaas")]
    pub substrate: Vec<String>,
    /// Substrate surface planes.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub substrate_plane: Vec<MillerIndex>,
    /// Film material names.
    #[arg(long, value_delimiter = ',', default_value = "anatase,rutile")]
    pub film: Vec<String>,
    /// Film planes scanned for every film.
    #[arg(long, value_delimiter = ',', default_value = "100,001,110,101,111,210")]
    pub planes: Vec<MillerIndex>,
    /// Largest supercell area searched, Å².
    #[arg(long, default_value_t = mcia::DEFAULT_MAX_AREA)]
    pub max_area: f64,
    /// Largest principal strain accepted, as a fraction.
    #[arg(long, default_value_t = mcia::DEFAULT_MAX_STRAIN)]
    pub max_strain: f64,
    /// Largest |h|,|k|,|l| accepted for a plane.
    #[arg(long, default_value_t = 40)]
    pub max_index: u32,
}

fn run_mcia(a: &McIaArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "mcia";
    let lib = config::lattices(ctx.dir()).tag(M)?;
    let get = |name: &str| -> Res<BulkLattice> {
        lib.get(name).cloned().ok_or_else(|| {
            let known: Vec<&str> = lib.names().collect();
            CliError::usage(M, format!("unknown material '{name}' (known: {})", known.join(", ")))
        })
    };
    let sub_planes: Vec<MillerIndex> = a.substrate_plane.clone();
    let film_planes: Vec<MillerIndex> = a.planes.clone();
    let mut substrates = Vec::new();
    for s in &a.substrate {
        let l = get(s)?;
        for p in &sub_planes {
            substrates.push((l.clone(), *p));
        }
    }
    let films = a
        .film
        .iter()
        .map(|f| Ok(FilmSpec { lattice: get(f)?, planes: film_planes.clone() }))
        .collect::<Res<Vec<_>>>()?;
    let cfg = MciaConfig { max_area: a.max_area, max_linear_strain: a.max_strain, max_index: a.max_index };
    let rows = mcia::mcia_map_with(&substrates, &films, &cfg, ctx.exec).tag(M)?;

    let prov = ctx
        .provenance()
        .param("max_area_A2", a.max_area)
        .param("max_strain", a.max_strain)
        .param("max_index", a.max_index);
    let mut t = ResultTable::new(
        vec![
            Column::text("substrate"),
            Column::text("substrate_plane"),
            Column::text("film"),
            Column::text("film_plane"),
            Column::num("area", "A2", 2),
            Column::num("film_area", "A2", 2),
            Column::num("n_sub", "cells", 0),
            Column::num("n_film", "cells", 0),
            Column::num("misfit", "pct", 3),
            Column::num("rotation", "deg", 2),
            Column::text("is_min"),
        ],
        prov,
    );
    for r in &rows {
        let m = r.result.as_ref();
        t.push(vec![
            r.substrate.as_str().into(),
            r.substrate_plane.to_string().into(),
            r.film.as_str().into(),
            r.plane.to_string().into(),
            m.map(|m| m.area).into(),
            m.map(|m| m.film_area).into(),
            m.map(|m| m.n_sub as i64).into(),
            m.map(|m| m.n_film as i64).into(),
            m.map(|m| m.misfit * 100.0).into(),
            m.map(|m| m.rotation_deg).into(),
            r.is_min.into(),
        ])
        .tag(M)?;
    }
    let plot = ctx.want_plot.then(|| (t.clone(), PlotKind::Map));
    Ok(Output { table: t, plot })
}

// ---------------------------------------------------------------- xrd

#[derive(Debug, Args)]
pub struct XrdArgs {
    /// Two-column scans: 2θ in degrees, intensity.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Fit window LO:HI in degrees 2θ.
    #[arg(long, value_parser = parse_window)]
    pub window: (f64, f64),
    /// X-ray wavelength, Å.
    #[arg(long, default_value_t = xrdfit::CU_KA1)]
    pub lambda: f64,
    /// Scherrer shape factor.
    #[arg(long = "k", default_value_t = xrdfit::DEFAULT_SCHERRER_K)]
    pub k: f64,
    /// Reflection indices, e.g. 004; enables the lattice-parameter column.
    #[arg(long)]
    pub reflection: Option<String>,
    /// Crystal system for the lattice parameter.
    #[arg(long, default_value = "tetragonal-i")]
    pub system: CrystalSystem,
    /// Instrumental Gaussian FWHM, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub instrument_g: f64,
    /// Instrumental Lorentzian FWHM, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub instrument_l: f64,
}

struct XrdRow {
    peak: xrdfit::VoigtPeak,
    ss: xrdfit::SizeStrainResult,
    d: f64,
    lattice: Option<f64>,
    scan: xrdfit::DiffractionScan,
}

fn run_xrd(a: &XrdArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "xrd-fit";
    let hkl = a.reflection.as_deref().map(parse_hkl).transpose().tag(M)?;
    let inst = Instrument { fwhm_g: a.instrument_g, fwhm_l: a.instrument_l };
    let inputs = a.files.iter().map(|p| read_text(M, p)).collect::<Res<Vec<_>>>()?;
    let jobs: Vec<(&PathBuf, &str)> = a.files.iter().zip(&inputs).map(|(p, (_, t))| (p, t.as_str())).collect();
    let results = par::map(ctx.exec, &jobs, |(path, text)| -> Res<XrdRow> {
        let scan = io::read_scan(text).in_file(M, path)?;
        let peak = xrdfit::fit_voigt(&scan, a.window).in_file(M, path)?;
        let ss = xrdfit::size_strain_corrected(&peak, a.lambda, a.k, &inst).in_file(M, path)?;
        let d = xrdfit::bragg_d(peak.center, a.lambda).in_file(M, path)?;
        let lattice = hkl.map(|h| xrdfit::lattice_param(d, h, a.system)).transpose().in_file(M, path)?;
        Ok(XrdRow { peak, ss, d, lattice, scan })
    });
    let results = results.into_iter().collect::<Res<Vec<_>>>()?;

    let mut prov = ctx
        .provenance()
        .param("window_deg", format!("{}:{}", a.window.0, a.window.1))
        .param("lambda_A", a.lambda)
        .param("k", a.k)
        .param("instrument_fwhm_deg", format!("g={} l={}", a.instrument_g, a.instrument_l));
    if let Some(r) = &a.reflection {
        prov = prov.param("reflection", r).param("system", a.system);
    }
    for (p, (bytes, _)) in a.files.iter().zip(&inputs) {
        prov = prov.input(&p.display().to_string(), bytes);
    }
    let mut t = ResultTable::new(
        vec![
            Column::text("file"),
            Column::num("center", "deg", 4),
            Column::num("center_err", "deg", 4),
            Column::num("fwhm_g", "deg", 4),
            Column::num("fwhm_g_err", "deg", 4),
            Column::num("fwhm_l", "deg", 4),
            Column::num("fwhm_l_err", "deg", 4),
            Column::sci("amplitude", "counts", 4),
            Column::num("tau", "nm", 2),
            Column::num("tau_err", "nm", 2),
            Column::num("strain", "pct", 4),
            Column::num("strain_err", "pct", 4),
            Column::num("d", "A", 4),
            Column::num("lattice_param", "A", 4),
            Column::sci("residual_rms", "counts", 3),
        ],
        prov,
    );
    for (p, r) in a.files.iter().zip(&results) {
        let u = &r.peak.uncertainty;
        t.push(vec![
            p.display().to_string().into(),
            r.peak.center.into(),
            u.center.into(),
            r.peak.fwhm_g.into(),
            u.fwhm_g.into(),
            r.peak.fwhm_l.into(),
            u.fwhm_l.into(),
            r.peak.amplitude.into(),
            r.ss.tau_nm.into(),
            r.ss.tau_err_nm.into(),
            r.ss.epsilon_pct.into(),
            r.ss.epsilon_err_pct.into(),
            r.d.into(),
            r.lattice.into(),
            r.peak.residual_rms.into(),
        ])
        .tag(M)?;
    }
    let plot = if ctx.want_plot {
        // first file only; the window is what was fitted
        let r = &results[0];
        let mut pt = ResultTable::new(
            vec![Column::num("x", "deg", 4), Column::sci("observed", "counts", 5), Column::sci("fitted", "counts", 5)],
            ctx.provenance(),
        );
        for (x, y) in r.scan.two_theta.iter().zip(&r.scan.intensity) {
            if *x >= r.peak.window.0 && *x <= r.peak.window.1 {
                pt.push(vec![(*x).into(), (*y).into(), r.peak.eval(*x).into()]).tag(M)?;
            }
        }
        Some((pt, PlotKind::PeakFit))
    } else {
        None
    };
    Ok(Output { table: t, plot })
}

// ---------------------------------------------------------------- spectra

#[derive(Debug, Subcommand)]
pub enum SpectraCmd {
    /// Assign Raman peaks to anatase/rutile modes.
    Classify(ClassifyArgs),
    /// Fit one PLE line; centre in THz, width in GHz.
    PleFit(PleArgs),
    /// Fit a single-exponential decay (time column in s).
    Lifetime(LifetimeArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Minimum peak prominence, intensity units.
    #[arg(long, default_value_t = 0.0)]
    pub min_prominence: f64,
    /// Minimum score for a phase call.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Phonon-mode table (TOML); overrides phonons.toml.
    #[arg(long)]
    pub modes: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Gaussian,
    Lorentzian,
}

impl From<ModelArg> for LineModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gaussian => LineModel::Gaussian,
            ModelArg::Lorentzian => LineModel::Lorentzian,
        }
    }
}

#[derive(Debug, Args)]
pub struct PleArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub model: ModelArg,
    /// Abscissa unit when the file does not declare one (nm, thz, cm-1).
    #[arg(long)]
    pub unit: Option<XUnit>,
}

#[derive(Debug, Args)]
pub struct LifetimeArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

fn add_inputs(mut prov: Provenance, files: &[PathBuf], inputs: &[(Vec<u8>, String)]) -> Provenance {
    for (p, (bytes, _)) in files.iter().zip(inputs) {
        prov = prov.input(&p.display().to_string(), bytes);
    }
    prov
}

/// Raw bytes (for the digest) and decoded text of each input file.
type Inputs = Vec<(Vec<u8>, String)>;

fn load_spectra(m: &'static str, files: &[PathBuf], unit: Option<XUnit>) -> Res<(Inputs, Vec<Spectrum>)> {
    let inputs = files.iter().map(|p| read_text(m, p)).collect::<Res<Vec<_>>>()?;
    let spectra = files
        .iter()
        .zip(&inputs)
        .map(|(p, (_, t))| io::read_spectrum(t, unit).in_file(m, p))
        .collect::<Res<Vec<_>>>()?;
    Ok((inputs, spectra))
}

fn run_classify(a: &ClassifyArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "spectra classify";
    let table = config::phonons(ctx.dir(), a.modes.as_deref()).tag(M)?;
    let opts = ClassifyOptions { threshold: a.threshold, ..ClassifyOptions::default() };
    let (inputs, spectra) = load_spectra(M, &a.files, Some(XUnit::Wavenumber))?;
    let mut prov = ctx.provenance().param("min_prominence", a.min_prominence).param("threshold", a.threshold);
    if let Some(m) = &a.modes {
        prov = prov.param("modes", m.display());
    }
    let mut t = ResultTable::new(
        vec![
            Column::text("file"),
            Column::text("phase"),
            Column::num("anatase_score", "frac", 3),
            Column::num("rutile_score", "frac", 3),
            Column::num("peaks", "count", 0),
            Column::text("assignments"),
        ],
        add_inputs(prov, &a.files, &inputs),
    );
    for (p, s) in a.files.iter().zip(&spectra) {
        if s.unit != XUnit::Wavenumber {
            return Err(CliError::usage(M, format!("{}: Raman shift must be in cm-1, got {}", p.display(), s.unit)));
        }
        let peaks: Vec<f64> = spectra::detect_peaks(s, a.min_prominence).iter().map(|d| d.center).collect();
        let c = spectra::classify_phase(&peaks, &table, &opts);
        let assigned: Vec<String> = c
            .assignments
            .iter()
            .filter(|x| !x.label.is_empty())
            .map(|x| format!("{:.1}:{}", x.position, x.label))
            .collect();
        t.push(vec![
            p.display().to_string().into(),
            c.phase.to_string().into(),
            c.score(Phase::Anatase).into(),
            c.score(Phase::Rutile).into(),
            (peaks.len() as i64).into(),
            assigned.join(" ").into(),
        ])
        .tag(M)?;
    }
    Ok(Output::table(t))
}

fn run_ple(a: &PleArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "spectra ple-fit";
    let model = LineModel::from(a.model);
    let (inputs, spectra) = load_spectra(M, &a.files, a.unit)?;
    let fits = par::map(ctx.exec, &spectra, |s| -> tio2kit::Result<_> {
        let thz = s.to_terahertz()?;
        let native = spectra::fit_line_native(&thz, model)?;
        Ok((spectra::fit_line(s, model)?, thz, native))
    });
    let prov = add_inputs(ctx.provenance().param("model", model), &a.files, &inputs);
    let mut t = ResultTable::new(
        vec![
            Column::text("file"),
            Column::num("center", "THz", 5),
            Column::num("center_err", "THz", 5),
            Column::num("fwhm", "GHz", 2),
            Column::num("fwhm_err", "GHz", 2),
            Column::sci("amplitude", "counts", 4),
            Column::sci("background", "counts", 4),
            Column::sci("residual_rms", "counts", 3),
        ],
        prov,
    );
    let mut first = None;
    for (p, f) in a.files.iter().zip(fits) {
        let (f, thz, native) = f.in_file(M, p)?;
        t.push(vec![
            p.display().to_string().into(),
            f.center_thz.into(),
            f.center_err_thz.into(),
            f.fwhm_ghz.into(),
            f.fwhm_err_ghz.into(),
            f.amplitude.into(),
            f.background.into(),
            f.residual_rms.into(),
        ])
        .tag(M)?;
        first.get_or_insert((thz, native));
    }
    let plot = match (ctx.want_plot, first) {
        (true, Some((s, f))) => {
            let mut pt = ResultTable::new(
                vec![Column::num("x", "THz", 6), Column::sci("observed", "counts", 5), Column::sci("fitted", "counts", 5)],
                ctx.provenance(),
            );
            for (x, y) in s.x.iter().zip(&s.y) {
                let fit = f.amplitude * model.shape(x - f.center, f.fwhm) + f.background;
                pt.push(vec![(*x).into(), (*y).into(), fit.into()]).tag(M)?;
            }
            Some((pt, PlotKind::PeakFit))
        }
        _ => None,
    };
    Ok(Output { table: t, plot })
}

fn run_lifetime(a: &LifetimeArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "spectra lifetime";
    let (inputs, spectra) = load_spectra(M, &a.files, Some(XUnit::Second))?;
    let fits = par::map(ctx.exec, &spectra, spectra::fit_lifetime);
    let mut t = ResultTable::new(
        vec![
            Column::text("file"),
            Column::num("t1", "ms", 4),
            Column::num("t1_err", "ms", 4),
            Column::sci("amplitude", "counts", 4),
            Column::sci("background", "counts", 4),
            Column::sci("residual_rms", "counts", 3),
        ],
        add_inputs(ctx.provenance(), &a.files, &inputs),
    );
    let mut first = None;
    for ((p, f), s) in a.files.iter().zip(fits).zip(&spectra) {
        let f = f.in_file(M, p)?;
        t.push(vec![
            p.display().to_string().into(),
            f.t1_ms.into(),
            f.t1_err_ms.into(),
            f.amplitude.into(),
            f.background.into(),
            f.residual_rms.into(),
        ])
        .tag(M)?;
        first.get_or_insert((s, f));
    }
    let plot = match (ctx.want_plot, first) {
        (true, Some((s, f))) => {
            let mut pt = ResultTable::new(
                vec![Column::sci("x", "s", 5), Column::sci("observed", "counts", 5), Column::sci("fitted", "counts", 5)],
                ctx.provenance(),
            );
            let t0 = s.x[0];
            for (x, y) in s.x.iter().zip(&s.y) {
                let fit = f.amplitude * (-(x - t0) / (f.t1_ms * 1e-3)).exp() + f.background;
                pt.push(vec![(*x).into(), (*y).into(), fit.into()]).tag(M)?;
            }
            Some((pt, PlotKind::PeakFit))
        }
        _ => None,
    };
    Ok(Output { table: t, plot })
}

// ---------------------------------------------------------------- profile

#[derive(Debug, Subcommand)]
pub enum ProfileCmd {
    /// Fit an erfc step to one element channel and report L and D.
    Fit(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Depth profile: z_nm column plus one column per element.
    pub file: PathBuf,
    /// Column to fit.
    #[arg(long)]
    pub element: String,
    /// Annealing/growth time, s.
    #[arg(long, default_value_t = profiles::DEFAULT_TIME_S)]
    pub time: f64,
    /// Fit window LO:HI in nm.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
    /// Keep a near-interface accumulation inside the fit window.
    #[arg(long)]
    pub keep_accumulation: bool,
}

fn run_profile(a: &ProfileArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "profile fit";
    let (bytes, text) = read_text(M, &a.file)?;
    let raw = io::read_profile(&text).in_file(M, &a.file)?;
    let norm = profiles::normalize(&raw).tag(M)?;
    let opts = DiffusionOptions { window: a.window, exclude_accumulation: !a.keep_accumulation };
    let f = profiles::fit_diffusion(&norm, &a.element, a.time, &opts).tag(M)?;
    let mut prov = ctx
        .provenance()
        .input(&a.file.display().to_string(), &bytes)
        .param("element", &a.element)
        .param("time_s", a.time)
        .param("exclude_accumulation", !a.keep_accumulation);
    if f.at_resolution_floor {
        prov = prov.note("step sharper than the depth sampling; L and D are upper bounds");
    }
    let mut t = ResultTable::new(
        vec![
            Column::text("element"),
            Column::num("l", "nm", 3),
            Column::num("l_err", "nm", 3),
            Column::sci("d", "cm2_s", 3),
            Column::sci("d_err", "cm2_s", 3),
            Column::num("z0", "nm", 3),
            Column::num("z0_err", "nm", 3),
            Column::num("window_lo", "nm", 2),
            Column::num("window_hi", "nm", 2),
            Column::sci("residual_rms", "frac", 3),
            Column::text("at_resolution_floor"),
        ],
        prov,
    );
    t.push(vec![
        a.element.as_str().into(),
        f.l_nm.into(),
        f.l_err_nm.into(),
        f.d_cm2_s.into(),
        f.d_err_cm2_s.into(),
        f.z0_nm.into(),
        f.z0_err_nm.into(),
        f.window.0.into(),
        f.window.1.into(),
        f.residual_rms.into(),
        f.at_resolution_floor.into(),
    ])
    .tag(M)?;
    let plot = if ctx.want_plot {
        let c = norm.channel(&a.element).unwrap_or_default();
        let mut pt = ResultTable::new(
            vec![Column::num("z", "nm", 3), Column::num("observed", "frac", 5), Column::num("fitted", "frac", 5)],
            ctx.provenance(),
        );
        for (z, y) in norm.z.iter().zip(c) {
            let fit = f.c0 / 2.0 * libm::erfc((z - f.z0_nm) / f.l_nm) + f.baseline;
            pt.push(vec![(*z).into(), (*y).into(), fit.into()]).tag(M)?;
        }
        Some((pt, PlotKind::Profile))
    } else {
        None
    };
    Ok(Output { table: t, plot })
}

// ---------------------------------------------------------------- vacancy

#[derive(Debug, Subcommand)]
pub enum VacancyCmd {
    /// Simulate one growth schedule.
    Sim(VacancySimArgs),
    /// Final vacancy level against buffer thickness.
    Scan(VacancyScanArgs),
}

#[derive(Debug, Args)]
pub struct VacancySimArgs {
    /// Schedule TOML with [[segment]] tables and optional [params].
    pub schedule: PathBuf,
    /// Requested time step, s.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    /// Time-series spacing, s.
    #[arg(long, default_value_t = 10.0)]
    pub record_every: f64,
    /// Also write the end-of-segment depth profiles here.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Active,
    Film,
}

#[derive(Debug, Args)]
pub struct VacancyScanArgs {
    /// Optional TOML with [params] and [template].
    pub config: Option<PathBuf>,
    /// Buffer thicknesses, nm.
    #[arg(long, value_delimiter = ',')]
    pub buffers: Option<Vec<f64>>,
    /// Mean over the layer grown after the buffer, or over the whole film.
    #[arg(long, value_enum, default_value = "active")]
    pub metric: MetricArg,
    /// Requested time step, s.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
}

fn vacancy_inputs(m: &'static str, ctx: &Ctx, path: Option<&Path>) -> Res<(config::VacancyFile, Option<Vec<u8>>)> {
    let defaults = config::vacancy_defaults(ctx.dir()).tag(m)?;
    let Some(path) = path else { return Ok((defaults, None)) };
    let (bytes, text) = read_text(m, path)?;
    let mut file = config::parse_vacancy(&text, &path.display().to_string()).tag(m)?;
    if file.params.is_none() {
        file.params = defaults.params;
    }
    if file.template.is_none() {
        file.template = defaults.template;
    }
    Ok((file, Some(bytes)))
}

fn params_provenance(prov: Provenance, p: &VacancyParams) -> Provenance {
    prov.param("d_v_nm2_s", p.d_v)
        .param("incorporation", p.incorporation)
        .param("annihilation_1_s", p.annihilation)
        .param("dz_nm", p.dz)
}

fn run_vacancy_sim(a: &VacancySimArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "vacancy sim";
    let (file, bytes) = vacancy_inputs(M, ctx, Some(&a.schedule))?;
    if file.segments.is_empty() {
        return Err(CliError::lib(M, Error::Config(format!("{}: no [[segment]] tables", a.schedule.display()))));
    }
    let params = file.params.unwrap_or_default();
    let schedule = GrowthSchedule { segments: file.segments };
    let opts = SimOptions { max_dt: a.dt, record_every: a.record_every };
    let res = vacancysim::simulate(&schedule, &params, &opts).tag(M)?;

    let mut prov = ctx.provenance().input(&a.schedule.display().to_string(), bytes.as_deref().unwrap_or_default());
    prov = params_provenance(prov, &params).param("max_dt_s", a.dt);
    if let Some(w) = vacancysim::well_mixed_mean(&schedule, &params) {
        prov = prov.note(format!("well-mixed mean {w:.6e}"));
    }
    let mut t = ResultTable::new(
        vec![Column::num("t", "s", 1), Column::num("thickness", "nm", 3), Column::sci("mean_c", "frac", 5)],
        prov,
    );
    for s in &res.series {
        t.push(vec![s.t.into(), s.thickness.into(), s.mean_c.into()]).tag(M)?;
    }
    if let Some(path) = &a.snapshots {
        let mut st = ResultTable::new(
            vec![Column::num("t", "s", 1), Column::num("z", "nm", 3), Column::sci("c", "frac", 5)],
            ctx.provenance(),
        );
        for snap in &res.snapshots {
            for (z, c) in snap.z.iter().zip(&snap.c) {
                st.push(vec![snap.t.into(), (*z).into(), (*c).into()]).tag(M)?;
            }
        }
        write_file(M, path, st.to_csv().as_bytes())?;
    }
    let plot = ctx.want_plot.then(|| (t.clone(), PlotKind::Timeseries));
    Ok(Output { table: t, plot })
}

fn run_vacancy_scan(a: &VacancyScanArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "vacancy scan";
    let (file, bytes) = vacancy_inputs(M, ctx, a.config.as_deref())?;
    let params = file.params.unwrap_or_default();
    let template = file.template.unwrap_or_default();
    let buffers = a.buffers.clone().unwrap_or_else(|| vacancysim::DEFAULT_SCAN_BUFFERS_NM.to_vec());
    let metric = match a.metric {
        MetricArg::Active => ScanMetric::ActiveLayer,
        MetricArg::Film => ScanMetric::WholeFilm,
    };
    let opts = SimOptions { max_dt: a.dt, ..SimOptions::default() };
    let points = vacancysim::saturation_scan(&buffers, &template, &params, &opts, metric, ctx.exec).tag(M)?;

    let mut prov = ctx.provenance();
    if let (Some(p), Some(b)) = (&a.config, &bytes) {
        prov = prov.input(&p.display().to_string(), b);
    }
    prov = params_provenance(prov, &params)
        .param("metric", format!("{:?}", a.metric).to_lowercase())
        .param("growth_pressure_torr", template.growth_pressure_torr)
        .param("growth_thickness_nm", template.growth_thickness_nm)
        .param("anneal_s", template.anneal_s);
    let mut t = ResultTable::new(
        vec![
            Column::num("buffer", "nm", 2),
            Column::sci("mean_c", "frac", 6),
            Column::sci("film_mean_c", "frac", 6),
            Column::sci("active_mean_c", "frac", 6),
        ],
        prov,
    );
    for p in &points {
        t.push(vec![p.buffer_nm.into(), p.mean_c.into(), p.film_mean_c.into(), p.active_mean_c.into()]).tag(M)?;
    }
    Ok(Output::table(t))
}

// ---------------------------------------------------------------- film

#[derive(Debug, Subcommand)]
pub enum FilmCmd {
    /// RMS roughness of AFM height maps.
    Rms(RmsArgs),
    /// Expected phase for a growth record.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct RmsArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Pixel pitch, nm, when the file does not say.
    #[arg(long)]
    pub pitch: Option<f64>,
    /// Background removed before the RMS: plane or none.
    #[arg(long, default_value = "plane")]
    pub detrend: Detrend,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// gaas, gasb or soi.
    #[arg(long)]
    pub substrate: Substrate,
    /// Surface preparation: capped or desorbed.
    #[arg(long)]
    pub prep: Prep,
    /// Growth temperature, °C.
    #[arg(long)]
    pub tgrow: f64,
    /// Laser shots spent on the buffer layer.
    #[arg(long, default_value_t = 0)]
    pub buffer_shots: u64,
    /// undoped, bulk or sandwich.
    #[arg(long, default_value = "undoped")]
    pub doping: Doping,
    /// Rule thresholds (TOML); overrides phase_rules.toml.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Deposition per shot, Å.
    #[arg(long, default_value_t = filmstats::DEFAULT_RATE_A_PER_SHOT)]
    pub rate: f64,
}

fn run_rms(a: &RmsArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "film rms";
    let inputs = a.files.iter().map(|p| read_text(M, p)).collect::<Res<Vec<_>>>()?;
    let jobs: Vec<(&PathBuf, &str)> = a.files.iter().zip(&inputs).map(|(p, (_, t))| (p, t.as_str())).collect();
    let results = par::map(ctx.exec, &jobs, |(p, text)| -> Res<_> {
        let map = io::read_height_map(text, a.pitch).in_file(M, p)?;
        let rms = filmstats::rms_roughness(&map, a.detrend).in_file(M, p)?;
        Ok((map.rows, map.cols, map.scan_size_um(), rms))
    });
    let prov = add_inputs(ctx.provenance().param("detrend", format!("{:?}", a.detrend).to_lowercase()), &a.files, &inputs);
    let mut t = ResultTable::new(
        vec![
            Column::text("file"),
            Column::num("rows", "px", 0),
            Column::num("cols", "px", 0),
            Column::num("scan_x", "um", 3),
            Column::num("scan_y", "um", 3),
            Column::num("rms", "pm", 1),
        ],
        prov,
    );
    for (p, r) in a.files.iter().zip(results) {
        let (rows, cols, (sx, sy), rms) = r?;
        t.push(vec![
            p.display().to_string().into(),
            (rows as i64).into(),
            (cols as i64).into(),
            sx.into(),
            sy.into(),
            rms.into(),
        ])
        .tag(M)?;
    }
    Ok(Output::table(t))
}

fn run_predict(a: &PredictArgs, ctx: &Ctx) -> Res<Output> {
    const M: &str = "film predict";
    let rules = config::phase_rules(ctx.dir(), a.rules.as_deref()).tag(M)?;
    let record = GrowthRecord {
        substrate: a.substrate,
        prep: a.prep,
        t_grow_c: a.tgrow,
        buffer_shots: a.buffer_shots,
        doping: a.doping,
    };
    let pred = filmstats::predict_phase(&record, &rules).tag(M)?;
    let prov = ctx
        .provenance()
        .param("t_rutile_c", rules.t_rutile_c)
        .param("shot_threshold", rules.shot_threshold)
        .param("anatase_window_c", format!("{}:{}", rules.anatase_window_c.0, rules.anatase_window_c.1))
        .param("rate_A_per_shot", a.rate);
    let mut t = ResultTable::new(
        vec![
            Column::text("substrate"),
            Column::text("prep"),
            Column::num("t_grow", "C", 1),
            Column::num("buffer", "shots", 0),
            Column::num("buffer_thickness", "nm", 2),
            Column::text("phase"),
            Column::text("rule"),
        ],
        prov,
    );
    t.push(vec![
        a.substrate.to_string().into(),
        a.prep.to_string().into(),
        a.tgrow.into(),
        (a.buffer_shots as i64).into(),
        filmstats::thickness_from_shots(a.buffer_shots, a.rate).into(),
        pred.phase.to_string().into(),
        pred.rule.into(),
    ])
    .tag(M)?;
    Ok(Output::table(t))
}
