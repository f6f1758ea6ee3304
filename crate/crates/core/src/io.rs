//! Delimited-text input, result tables with provenance, and plot data.
//!
//! Every table is plain CSV preceded by `# key: value` provenance lines.
//! Column headers carry units as `name_unit`; numbers are printed with a
//! fixed per-column precision so identical inputs give identical bytes.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filmstats::HeightMap;
use crate::profiles::DepthProfile;
use crate::spectra::{Spectrum, XUnit};
use crate::xrdfit::DiffractionScan;

pub const TOOL_NAME: &str = "tio2kit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    /// Required for numeric columns.
    pub unit: Option<String>,
    /// Digits after the decimal point, or significant digits in exponent
    /// notation when `scientific`.
    pub precision: usize,
    pub scientific: bool,
}

impl Column {
    pub fn text(name: &str) -> Self {
        Column { name: name.into(), unit: None, precision: 0, scientific: false }
    }

    pub fn num(name: &str, unit: &str, precision: usize) -> Self {
        Column { name: name.into(), unit: Some(unit.into()), precision, scientific: false }
    }

    pub fn sci(name: &str, unit: &str, precision: usize) -> Self {
        Column { name: name.into(), unit: Some(unit.into()), precision, scientific: true }
    }

    pub fn header(&self) -> String {
        match &self.unit {
            Some(u) => format!("{}_{}", self.name, u),
            None => self.name.clone(),
        }
    }

    fn render(&self, cell: &Cell) -> String {
        match cell {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(v) if self.scientific => format!("{:.*e}", self.precision, v),
            Cell::Num(v) => {
                let s = format!("{:.*}", self.precision, v);
                // no negative zero in output
                if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                    s.trim_start_matches('-').to_string()
                } else {
                    s
                }
            }
            Cell::Int(v) => v.to_string(),
            Cell::Text(t) => quote(t),
            Cell::Empty => String::new(),
        }
    }
}

fn quote(t: &str) -> String {
    if t.contains([',', '"', '\n']) {
        format!("\"{}\"", t.replace('"', "\"\""))
    } else {
        t.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub command: String,
    /// (path as given, sha256 of contents)
    pub inputs: Vec<(String, String)>,
    pub params: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(command: impl Into<String>) -> Self {
        Provenance { command: command.into(), ..Default::default() }
    }

    pub fn input(mut self, path: &str, bytes: &[u8]) -> Self {
        self.inputs.push((path.to_string(), sha256_hex(bytes)));
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Provenance,
}

impl ResultTable {
    pub fn new(columns: Vec<Column>, provenance: Provenance) -> Self {
        ResultTable { columns, rows: Vec::new(), provenance }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::SchemaMismatch(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (c, cell) in self.columns.iter().zip(&row) {
            if matches!(cell, Cell::Num(_) | Cell::Int(_)) && c.unit.is_none() {
                return Err(Error::SchemaMismatch(format!("numeric value in unitless column {}", c.name)));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn numeric_column(&self, idx: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match &r[idx] {
                Cell::Num(v) => *v,
                Cell::Int(v) => *v as f64,
                _ => f64::NAN,
            })
            .collect()
    }

    fn provenance_block(&self) -> String {
        let p = &self.provenance;
        let mut s = String::new();
        let _ = writeln!(s, "# tool: {TOOL_NAME} {VERSION}");
        if !p.command.is_empty() {
            let _ = writeln!(s, "# command: {}", p.command);
        }
        for (path, digest) in &p.inputs {
            let _ = writeln!(s, "# input: {path} sha256={digest}");
        }
        for (k, v) in &p.params {
            let _ = writeln!(s, "# param: {k}={v}");
        }
        for n in &p.notes {
            let _ = writeln!(s, "# note: {n}");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.provenance_block();
        let header: Vec<String> = self.columns.iter().map(Column::header).collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = self.columns.iter().zip(row).map(|(c, v)| c.render(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Numeric columns of a delimited text file.
#[derive(Debug, Clone, PartialEq)]
pub struct TextTable {
    pub header: Option<Vec<String>>,
    pub columns: Vec<Vec<f64>>,
    /// `# key: value` comment lines, in order.
    pub meta: Vec<(String, String)>,
}

impl TextTable {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|(_, v)| v.as_str())
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c == ';' || c == '\t' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect()
}

/// Parse comma, semicolon, tab or whitespace separated numbers. Blank and
/// `#` lines are skipped; one non-numeric header line is allowed before
/// the first data row. Errors name the 1-based line.
pub fn parse_table(text: &str) -> Result<TextTable> {
    let mut header: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut meta = Vec::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once(':') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let fields = split_fields(line);
        let nums: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match nums {
            Ok(v) => {
                if !seen_data {
                    columns = vec![Vec::new(); v.len()];
                    seen_data = true;
                }
                if v.len() != columns.len() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected {} fields, found {}", columns.len(), v.len()),
                    });
                }
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(Error::Parse { line: line_no, msg: format!("non-finite value {bad}") });
                }
                for (c, x) in columns.iter_mut().zip(v) {
                    c.push(x);
                }
            }
            Err(_) if !seen_data && header.is_none() => {
                header = Some(fields.iter().map(|s| s.to_string()).collect());
            }
            Err(_) => {
                let bad = fields.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or(&"");
                return Err(Error::Parse { line: line_no, msg: format!("non-numeric field '{bad}'") });
            }
        }
    }
    if let (Some(h), true) = (&header, seen_data) {
        if h.len() != columns.len() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header has {} names for {} columns", h.len(), columns.len()),
            });
        }
    }
    Ok(TextTable { header, columns, meta })
}

fn two_columns(t: &TextTable, what: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    if t.columns.len() < 2 || t.columns[0].is_empty() {
        return Err(Error::Parse { line: 0, msg: format!("{what} needs two numeric columns") });
    }
    Ok((t.columns[0].clone(), t.columns[1].clone()))
}

pub fn read_scan(text: &str) -> Result<DiffractionScan> {
    let t = parse_table(text)?;
    let (x, y) = two_columns(&t, "scan")?;
    DiffractionScan::new(x, y)
}

/// Unit from `# unit: THz` or from the first header name (`x_THz`,
/// `wavenumber_cm-1`); `fallback` otherwise.
pub fn read_spectrum(text: &str, fallback: Option<XUnit>) -> Result<Spectrum> {
    let t = parse_table(text)?;
    let unit = if let Some(u) = t.meta("unit") {
        u.parse()?
    } else if let Some(h) = t.header.as_ref().and_then(|h| h.first()) {
        match h.rsplit_once('_').map(|(_, u)| u.parse::<XUnit>()) {
            Some(Ok(u)) => u,
            _ => fallback.ok_or_else(|| Error::Parse { line: 0, msg: format!("no unit in header '{h}'") })?,
        }
    } else {
        fallback.ok_or_else(|| Error::Parse { line: 0, msg: "no unit line".into() })?
    };
    let (x, y) = two_columns(&t, "spectrum")?;
    let s = Spectrum::new(x, y, unit)?;
    Ok(match t.meta("sample") {
        Some(id) => s.with_sample(id),
        None => s,
    })
}

/// Header row `z_nm,<element>,...`.
pub fn read_profile(text: &str) -> Result<DepthProfile> {
    let t = parse_table(text)?;
    let header = t
        .header
        .ok_or_else(|| Error::Parse { line: 0, msg: "profile needs a header row naming elements".into() })?;
    if t.columns.len() < 2 {
        return Err(Error::Parse { line: 0, msg: "profile needs z and at least one element".into() });
    }
    let mut cols = t.columns.into_iter();
    let z = cols.next().unwrap();
    let channels = header[1..].iter().cloned().zip(cols).collect();
    DepthProfile::new(z, channels)
}

/// Plain matrix of heights in nm, or a single column with `# rows:` and
/// `# cols:` lines. Pitch from `# pitch_nm:` or `pitch_nm`.
pub fn read_height_map(text: &str, pitch_nm: Option<f64>) -> Result<HeightMap> {
    let t = parse_table(text)?;
    let pitch = match (t.meta("pitch_nm"), pitch_nm) {
        (_, Some(p)) => p,
        (Some(p), None) => p
            .parse()
            .map_err(|_| Error::Parse { line: 0, msg: format!("bad pitch_nm '{p}'") })?,
        (None, None) => return Err(Error::Parse { line: 0, msg: "pixel pitch not given".into() }),
    };
    let meta_usize = |k: &str| -> Result<Option<usize>> {
        t.meta(k)
            .map(|v| v.parse::<usize>().map_err(|_| Error::Parse { line: 0, msg: format!("bad {k} '{v}'") }))
            .transpose()
    };
    if t.columns.len() == 1 {
        let (rows, cols) = match (meta_usize("rows")?, meta_usize("cols")?) {
            (Some(r), Some(c)) => (r, c),
            _ => return Err(Error::Parse { line: 0, msg: "single-column raster needs rows and cols".into() }),
        };
        return HeightMap::new(rows, cols, t.columns[0].clone(), pitch);
    }
    let rows = t.columns.first().map_or(0, Vec::len);
    let cols = t.columns.len();
    let mut h = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in &t.columns {
            h.push(c[r]);
        }
    }
    HeightMap::new(rows, cols, h, pitch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Map,
    PeakFit,
    Profile,
    Timeseries,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map" => Ok(PlotKind::Map),
            "peak-fit" => Ok(PlotKind::PeakFit),
            "profile" => Ok(PlotKind::Profile),
            "timeseries" => Ok(PlotKind::Timeseries),
            other => Err(Error::InvalidInput(format!("unknown plot kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Csv,
    Svg,
}

fn require(table: &ResultTable, names: &[&str]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            table
                .column_index(n)
                .ok_or_else(|| Error::SchemaMismatch(format!("missing column '{n}'")))
        })
        .collect()
}

fn text_of(c: &Cell) -> String {
    match c {
        Cell::Text(t) => t.clone(),
        Cell::Int(i) => i.to_string(),
        Cell::Num(v) => format!("{v}"),
        Cell::Empty => String::new(),
    }
}

/// Plot-ready data for one of the supported figure kinds.
///
/// * map: `substrate, substrate_plane, film, film_plane, area, is_min`
/// * peak-fit: `x, observed, fitted`; residuals are added
/// * profile: `z` plus numeric series
/// * timeseries: `t` plus numeric series
pub fn emit_plot_data(table: &ResultTable, kind: PlotKind, format: PlotFormat) -> Result<Vec<u8>> {
    if table.rows.is_empty() {
        return Err(Error::SchemaMismatch("empty table".into()));
    }
    match kind {
        PlotKind::Map => emit_map(table, format),
        PlotKind::PeakFit => emit_peak_fit(table, format),
        PlotKind::Profile => emit_series(table, "z", format),
        PlotKind::Timeseries => emit_series(table, "t", format),
    }
}

fn emit_map(table: &ResultTable, format: PlotFormat) -> Result<Vec<u8>> {
    let idx = require(table, &["substrate", "substrate_plane", "film", "film_plane", "area", "is_min"])?;
    let area_col = &table.columns[idx[4]];
    let mut rows: Vec<String> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    let mut cells = Vec::new();
    for r in &table.rows {
        let row = format!("{}({})", text_of(&r[idx[0]]), text_of(&r[idx[1]]));
        let col = format!("{}({})", text_of(&r[idx[2]]), text_of(&r[idx[3]]));
        if !rows.contains(&row) {
            rows.push(row.clone());
        }
        if !cols.contains(&col) {
            cols.push(col.clone());
        }
        let marker = text_of(&r[idx[5]]) == "true";
        cells.push((row, col, r[idx[4]].clone(), marker));
    }
    match format {
        PlotFormat::Csv => {
            let mut s = format!("row,col,row_index,col_index,{},min_marker\n", area_col.header());
            for (row, col, area, m) in &cells {
                let ri = rows.iter().position(|x| x == row).unwrap();
                let ci = cols.iter().position(|x| x == col).unwrap();
                let _ = writeln!(s, "{},{},{ri},{ci},{},{}", quote(row), quote(col), area_col.render(area), if *m { "*" } else { "" });
            }
            Ok(s.into_bytes())
        }
        PlotFormat::Svg => {
            let (cw, ch, left, top) = (90.0, 24.0, 140.0, 40.0);
            let w = left + cw * cols.len() as f64 + 10.0;
            let h = top + ch * rows.len() as f64 + 10.0;
            let mut s = svg_open(w, h);
            for (ci, c) in cols.iter().enumerate() {
                let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#, left + cw * (ci as f64 + 0.5), top - 8.0, xml(c));
            }
            for (ri, r) in rows.iter().enumerate() {
                let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#, left - 6.0, top + ch * (ri as f64 + 0.65), xml(r));
            }
            for (row, col, area, m) in &cells {
                let ri = rows.iter().position(|x| x == row).unwrap() as f64;
                let ci = cols.iter().position(|x| x == col).unwrap() as f64;
                let fill = if *m { "#f4c542" } else { "#ffffff" };
                let _ = writeln!(s, r##"<rect x="{:.1}" y="{:.1}" width="{cw:.1}" height="{ch:.1}" fill="{fill}" stroke="#444"/>"##, left + cw * ci, top + ch * ri);
                let label = match area {
                    Cell::Empty => "-".to_string(),
                    other => area_col.render(other),
                };
                let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}{}</text>"#, left + cw * (ci + 0.5), top + ch * (ri + 0.65), xml(&label), if *m { " *" } else { "" });
            }
            s.push_str("</svg>\n");
            Ok(s.into_bytes())
        }
    }
}

fn emit_peak_fit(table: &ResultTable, format: PlotFormat) -> Result<Vec<u8>> {
    let idx = require(table, &["x", "observed", "fitted"])?;
    let x = table.numeric_column(idx[0]);
    let obs = table.numeric_column(idx[1]);
    let fit = table.numeric_column(idx[2]);
    let resid: Vec<f64> = obs.iter().zip(&fit).map(|(o, f)| o - f).collect();
    let xc = &table.columns[idx[0]];
    let yc = &table.columns[idx[1]];
    match format {
        PlotFormat::Csv => {
            let unit = yc.unit.clone().unwrap_or_default();
            let rc = Column { name: "residual".into(), unit: Some(unit.clone()), ..yc.clone() };
            let fc = Column { name: "fitted".into(), unit: Some(unit), ..yc.clone() };
            let mut s = format!("{},{},{},{}\n", xc.header(), yc.header(), fc.header(), rc.header());
            for i in 0..x.len() {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    xc.render(&Cell::Num(x[i])),
                    yc.render(&Cell::Num(obs[i])),
                    fc.render(&Cell::Num(fit[i])),
                    rc.render(&Cell::Num(resid[i]))
                );
            }
            Ok(s.into_bytes())
        }
        PlotFormat::Svg => {
            let mut s = svg_open(640.0, 480.0);
            let frame = Frame::new(&x, &[&obs, &fit], (60.0, 20.0, 600.0, 330.0));
            for (xi, yi) in x.iter().zip(&obs) {
                let (px, py) = frame.map(*xi, *yi);
                let _ = writeln!(s, r##"<circle cx="{px:.2}" cy="{py:.2}" r="1.5" fill="#1f77b4"/>"##);
            }
            s.push_str(&frame.polyline(&x, &fit, "#d62728"));
            let rframe = Frame::new(&x, &[&resid], (60.0, 360.0, 600.0, 460.0));
            s.push_str(&rframe.polyline(&x, &resid, "#555555"));
            s.push_str("</svg>\n");
            Ok(s.into_bytes())
        }
    }
}

fn emit_series(table: &ResultTable, axis: &str, format: PlotFormat) -> Result<Vec<u8>> {
    let ai = require(table, &[axis])?[0];
    let series: Vec<usize> = (0..table.columns.len())
        .filter(|i| *i != ai && table.columns[*i].unit.is_some())
        .collect();
    if series.is_empty() {
        return Err(Error::SchemaMismatch(format!("no numeric series besides '{axis}'")));
    }
    let x = table.numeric_column(ai);
    match format {
        PlotFormat::Csv => {
            let mut s = String::new();
            let header: Vec<String> = std::iter::once(ai).chain(series.iter().copied()).map(|i| table.columns[i].header()).collect();
            s.push_str(&header.join(","));
            s.push('\n');
            for r in &table.rows {
                let cells: Vec<String> = std::iter::once(ai)
                    .chain(series.iter().copied())
                    .map(|i| table.columns[i].render(&r[i]))
                    .collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            Ok(s.into_bytes())
        }
        PlotFormat::Svg => {
            let ys: Vec<Vec<f64>> = series.iter().map(|i| table.numeric_column(*i)).collect();
            let refs: Vec<&Vec<f64>> = ys.iter().collect();
            let frame = Frame::new(&x, &refs, (60.0, 20.0, 600.0, 440.0));
            let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
            let mut s = svg_open(640.0, 480.0);
            for (k, y) in ys.iter().enumerate() {
                s.push_str(&frame.polyline(&x, y, palette[k % palette.len()]));
                let _ = writeln!(s, r#"<text x="70" y="{}" font-size="10" fill="{}">{}</text>"#, 30 + 12 * k, palette[k % palette.len()], xml(&table.columns[series[k]].header()));
            }
            s.push_str("</svg>\n");
            Ok(s.into_bytes())
        }
    }
}

fn svg_open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n"
    )
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    bx: (f64, f64, f64, f64),
}

impl Frame {
    fn new(x: &[f64], ys: &[&Vec<f64>], bx: (f64, f64, f64, f64)) -> Self {
        let finite = |v: &[f64]| {
            v.iter().filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
        };
        let xr = finite(x);
        let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
        for y in ys {
            let r = finite(y);
            yr = (yr.0.min(r.0), yr.1.max(r.1));
        }
        let pad = |r: (f64, f64)| if r.1 > r.0 { r } else { (r.0 - 1.0, r.0 + 1.0) };
        Frame { x: pad(xr), y: pad(yr), bx }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (l, t, r, b) = self.bx;
        let px = l + (x - self.x.0) / (self.x.1 - self.x.0) * (r - l);
        let py = b - (y - self.y.0) / (self.y.1 - self.y.0) * (b - t);
        (px, py)
    }

    fn polyline(&self, x: &[f64], y: &[f64], color: &str) -> String {
        let pts: Vec<String> = x
            .iter()
            .zip(y)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| {
                let (px, py) = self.map(*a, *b);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n", pts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn table_rendering_is_fixed() {
        let mut t = ResultTable::new(
            vec![Column::text("name"), Column::num("area", "A2", 2), Column::sci("D", "cm2_s", 3)],
            Provenance::new("mcia").param("max_area", 500),
        );
        t.push(vec!["a,b".into(), 64.0.into(), 1.234e-17.into()]).unwrap();
        t.push(vec!["c".into(), (-0.0001).into(), Cell::Empty]).unwrap();
        let csv = t.to_csv();
        assert!(csv.contains("# param: max_area=500\n"));
        assert!(csv.contains("name,area_A2,D_cm2_s\n\"a,b\",64.00,1.234e-17\nc,0.00,\n"), "{csv}");
        assert!(t.push(vec!["x".into()]).is_err());
        let mut u = ResultTable::new(vec![Column::text("label")], Provenance::default());
        assert!(u.push(vec![1.0.into()]).is_err());
    }

    #[test]
    fn parser_reports_line() {
        let e = parse_table("# c\n2theta,counts\n1,2\n3,x\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 4, msg: "non-numeric field 'x'".into() });
        let e = parse_table("1 2\n3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let t = parse_table("# unit: THz\nx_THz\ty\n1\t2\n3\t4\n").unwrap();
        assert_eq!(t.columns, vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
        assert_eq!(t.meta("unit"), Some("THz"));
    }

    #[test]
    fn spectrum_units_from_header() {
        let s = read_spectrum("wavenumber_cm-1,intensity\n100,1\n101,2\n", None).unwrap();
        assert_eq!(s.unit, XUnit::Wavenumber);
        let s = read_spectrum("# unit: nm\n# sample: A1\n1530 1\n1531 2\n", None).unwrap();
        assert_eq!((s.unit, s.sample.as_str()), (XUnit::Nanometre, "A1"));
        assert!(read_spectrum("1 2\n3 4\n", None).is_err());
    }

    #[test]
    fn height_map_layouts() {
        let m = read_height_map("# pitch_nm: 2\n1 2 3\n4 5 6\n", None).unwrap();
        assert_eq!((m.rows, m.cols), (2, 3));
        assert_eq!(m.heights, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let m = read_height_map("# rows: 2\n# cols: 2\n1\n2\n3\n4\n", Some(1.0)).unwrap();
        assert_eq!(m.heights, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn profile_reader() {
        let p = read_profile("z_nm,Ga,Ti\n-1,1,0\n0,0.5,0.5\n1,0,1\n").unwrap();
        assert_eq!(p.channel("Ti").unwrap(), &[0.0, 0.5, 1.0]);
    }

    fn map_table() -> ResultTable {
        let mut t = ResultTable::new(
            vec![
                Column::text("substrate"),
                Column::text("substrate_plane"),
                Column::text("film"),
                Column::text("film_plane"),
                Column::num("area", "A2", 1),
                Column::text("is_min"),
            ],
            Provenance::new("mcia"),
        );
        t.push(vec!["GaAs".into(), "100".into(), "anatase".into(), "001".into(), 64.0.into(), true.into()]).unwrap();
        t.push(vec!["GaAs".into(), "100".into(), "anatase".into(), "101".into(), 120.0.into(), false.into()]).unwrap();
        t
    }

    #[test]
    fn map_plot_data() {
        let csv = String::from_utf8(emit_plot_data(&map_table(), PlotKind::Map, PlotFormat::Csv).unwrap()).unwrap();
        assert_eq!(
            csv,
            "row,col,row_index,col_index,area_A2,min_marker\nGaAs(100),anatase(001),0,0,64.0,*\nGaAs(100),anatase(101),0,1,120.0,\n"
        );
        let svg = emit_plot_data(&map_table(), PlotKind::Map, PlotFormat::Svg).unwrap();
        assert_eq!(svg, emit_plot_data(&map_table(), PlotKind::Map, PlotFormat::Svg).unwrap());
        assert!(emit_plot_data(&map_table(), PlotKind::PeakFit, PlotFormat::Csv).is_err());
    }

    #[test]
    fn empty_table_is_schema_mismatch() {
        let t = ResultTable::new(vec![Column::num("t", "s", 1)], Provenance::default());
        assert!(matches!(emit_plot_data(&t, PlotKind::Timeseries, PlotFormat::Csv), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn peak_fit_residuals() {
        let mut t = ResultTable::new(
            vec![Column::num("x", "deg", 3), Column::num("observed", "counts", 2), Column::num("fitted", "counts", 2)],
            Provenance::default(),
        );
        t.push(vec![1.0.into(), 10.0.into(), 9.5.into()]).unwrap();
        t.push(vec![2.0.into(), 20.0.into(), 21.0.into()]).unwrap();
        let csv = String::from_utf8(emit_plot_data(&t, PlotKind::PeakFit, PlotFormat::Csv).unwrap()).unwrap();
        assert_eq!(csv, "x_deg,observed_counts,fitted_counts,residual_counts\n1.000,10.00,9.50,0.50\n2.000,20.00,21.00,-1.00\n");
        assert!(emit_plot_data(&t, PlotKind::PeakFit, PlotFormat::Svg).is_ok());
    }
}
