//! Subcommand implementations: thin compositions of the library operations
//! with CSV/JSON emission. No physics lives here.

pub mod fig;
pub mod gate;
pub mod modes;
pub mod nf;
pub mod spins;
pub mod trap;
pub mod vexp;

use std::path::PathBuf;

/// Global flags shared by every subcommand.
pub struct Context {
    pub out: PathBuf,
    pub seed: u64,
    pub config: Option<PathBuf>,
    pub layout: Option<PathBuf>,
}

impl Context {
    pub fn inputs(&self) -> mwtrap::Result<crate::scene::Inputs> {
        crate::scene::load(self.layout.as_deref(), self.config.as_deref())
    }
}
