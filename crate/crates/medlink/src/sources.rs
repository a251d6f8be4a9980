//! Where scenarios and profiles come from: built-ins, files and the
//! `MEDLINK_PROFILE_DIR` directory.

use std::path::{Path, PathBuf};

use medlink_core::model::{builtin_profiles, validate_profile, Profiles, Scenario};

use crate::scenario_file::{load_scenario, parse_scenario, LoadError};

pub const PROFILE_DIR_VAR: &str = "MEDLINK_PROFILE_DIR";

pub const BUILTIN_SCENARIOS: &[(&str, &str)] = &[
    ("path1", include_str!("../scenarios/path1.scn")),
    ("path2", include_str!("../scenarios/path2.scn")),
    ("path3", include_str!("../scenarios/path3.scn")),
];

pub fn builtin_scenario_text(name: &str) -> Option<&'static str> {
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown built-in scenario `{0}` (path1, path2 or path3)")]
    UnknownBuiltin(String),
    #[error("{origin}: {error}")]
    Load { origin: String, error: LoadError },
    #[error("{origin}: a profile file may only hold [profile] sections")]
    NotProfiles { origin: String },
}

impl SourceError {
    /// `code: message` lines for standard error.
    pub fn lines(&self) -> Vec<String> {
        match self {
            SourceError::Io { .. } => vec![format!("io.read: {self}")],
            SourceError::UnknownBuiltin(_) => vec![format!("scenario.builtin.unknown: {self}")],
            SourceError::NotProfiles { .. } => vec![format!("profile.file.format: {self}")],
            SourceError::Load { origin, error } => match error {
                LoadError::Parse { .. } => vec![format!("scenario.parse: {origin}: {error}")],
                _ => error.lines(),
            },
        }
    }
}

fn read(path: &Path) -> Result<String, SourceError> {
    std::fs::read_to_string(path).map_err(|source| SourceError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Add the profiles of every `*.profile` file in `dir` (in file-name order)
/// to `base`. Later files may build on profiles from earlier ones.
pub fn load_profile_dir(dir: &Path, base: &Profiles) -> Result<Profiles, SourceError> {
    let entries = std::fs::read_dir(dir).map_err(|source| SourceError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "profile"))
        .collect();
    files.sort();

    let mut all = base.clone();
    for file in files {
        let origin = file.display().to_string();
        let text = read(&file)?;
        let (s, sections) = parse_scenario(&text).map_err(|error| SourceError::Load {
            origin: origin.clone(),
            error,
        })?;
        if s != Scenario::default() {
            return Err(SourceError::NotProfiles { origin });
        }
        for section in sections {
            let p = section.build(&all).map_err(|error| SourceError::Load {
                origin: origin.clone(),
                error,
            })?;
            let violations = validate_profile(&p);
            if !violations.is_empty() {
                return Err(SourceError::Load {
                    origin,
                    error: LoadError::Validation(violations),
                });
            }
            all.insert(p.id.clone(), p);
        }
    }
    Ok(all)
}

/// Built-in profiles plus those from `MEDLINK_PROFILE_DIR`, when set.
pub fn base_profiles() -> Result<Profiles, SourceError> {
    let builtin = builtin_profiles();
    match std::env::var_os(PROFILE_DIR_VAR) {
        Some(dir) if !dir.is_empty() => load_profile_dir(Path::new(&dir), &builtin),
        _ => Ok(builtin),
    }
}

/// Load `builtin:NAME` or a scenario file.
pub fn read_scenario(spec: &str, base: &Profiles) -> Result<Scenario, SourceError> {
    let (origin, text) = match spec.strip_prefix("builtin:") {
        Some(name) => (
            spec.to_owned(),
            builtin_scenario_text(name)
                .ok_or_else(|| SourceError::UnknownBuiltin(name.to_owned()))?
                .to_owned(),
        ),
        None => (spec.to_owned(), read(Path::new(spec))?),
    };
    load_scenario(&text, base).map_err(|error| SourceError::Load { origin, error })
}
