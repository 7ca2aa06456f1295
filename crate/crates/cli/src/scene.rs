//! Shared input loading: layout and trap configuration with their hash.

use std::path::Path;

use mwtrap::planefield::{presets, ElectrodeLayout, TrapConfigFile, TrapSystem};
use mwtrap::{Error, Result};

use crate::util::fnv1a64;

pub struct Inputs {
    pub layout: ElectrodeLayout,
    pub config: TrapConfigFile,
    /// FNV-1a over the layout and config JSON that shaped this run.
    pub hash: u64,
}

pub fn load(layout_path: Option<&Path>, config_path: Option<&Path>) -> Result<Inputs> {
    let layout_text = match layout_path {
        Some(p) => read(p)?,
        None => presets::FIVE_WIRE_LAYOUT_JSON.to_string(),
    };
    let layout = ElectrodeLayout::from_json(&layout_text)?;
    let config_text = match config_path {
        Some(p) => read(p)?,
        None => TrapConfigFile::reference().to_json(),
    };
    let config = TrapConfigFile::from_json(&config_text)?;
    let hash = fnv1a64(&[layout_text.as_bytes(), config_text.as_bytes()]);
    Ok(Inputs {
        layout,
        config,
        hash,
    })
}

impl Inputs {
    /// Assemble the configured system (stray model included as given).
    pub fn system(&self) -> Result<TrapSystem> {
        self.config.clone().into_system(self.layout.clone())
    }

    /// The compensated calibration scene when running on the shipped
    /// defaults; custom configs are taken literally.
    pub fn calibration_system(&self, custom: bool) -> Result<TrapSystem> {
        if custom {
            self.system()
        } else {
            presets::calibration_system(0.0)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("read {}: {e}", path.display())))
}
