pub mod analysis;
pub mod config;
pub mod dualbase;
pub mod error;
pub mod fixedpt;
pub mod linalg;
pub mod flma;
pub mod oracle;
pub mod shiftadd;
pub mod softfloat;
pub mod stats;
pub mod vecfile;

pub use config::{FlmaConfig, Preset};
pub use dualbase::DualBase;
pub use error::{Error, Result};
pub use flma::{Flma, LinearFloat};
