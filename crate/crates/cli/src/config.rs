//! Optional files in the configuration directory. Missing files mean
//! built-in defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tio2kit::crystal::LatticeLibrary;
use tio2kit::filmstats::PhaseRules;
use tio2kit::spectra::PhononModeTable;
use tio2kit::vacancysim::{ScheduleTemplate, VacancyParams};
use tio2kit::Error;

fn read_optional(dir: Option<&Path>, name: &str) -> Result<Option<(PathBuf, String)>, Error> {
    let Some(dir) = dir else { return Ok(None) };
    let path = dir.join(name);
    if !path.exists() {
        return Ok(None);
    }
    std::fs::read_to_string(&path)
        .map(|t| Some((path.clone(), t)))
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn tagged(path: &Path, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub fn lattices(dir: Option<&Path>) -> Result<LatticeLibrary, Error> {
    let mut lib = LatticeLibrary::default();
    if let Some((p, t)) = read_optional(dir, "lattices.toml")? {
        lib.load_overrides(&t).map_err(|e| tagged(&p, e))?;
    }
    Ok(lib)
}

pub fn phonons(dir: Option<&Path>, explicit: Option<&Path>) -> Result<PhononModeTable, Error> {
    let found = match explicit {
        Some(p) => Some((
            p.to_path_buf(),
            std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        )),
        None => read_optional(dir, "phonons.toml")?,
    };
    match found {
        Some((p, t)) => PhononModeTable::from_toml(&t).map_err(|e| tagged(&p, e)),
        None => Ok(PhononModeTable::default()),
    }
}

pub fn phase_rules(dir: Option<&Path>, explicit: Option<&Path>) -> Result<PhaseRules, Error> {
    let found = match explicit {
        Some(p) => Some((
            p.to_path_buf(),
            std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        )),
        None => read_optional(dir, "phase_rules.toml")?,
    };
    match found {
        Some((p, t)) => PhaseRules::from_toml(&t).map_err(|e| tagged(&p, e)),
        None => Ok(PhaseRules::default()),
    }
}

/// Layout shared by vacancy.toml and schedule files.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacancyFile {
    pub params: Option<VacancyParams>,
    pub template: Option<ScheduleTemplate>,
    #[serde(rename = "segment", default)]
    pub segments: Vec<tio2kit::vacancysim::Segment>,
}

pub fn parse_vacancy(text: &str, origin: &str) -> Result<VacancyFile, Error> {
    toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))
}

pub fn vacancy_defaults(dir: Option<&Path>) -> Result<VacancyFile, Error> {
    match read_optional(dir, "vacancy.toml")? {
        Some((p, t)) => parse_vacancy(&t, &p.display().to_string()),
        None => Ok(VacancyFile::default()),
    }
}
