pub mod analysis;
pub mod beamline;
pub mod constants;
pub mod cooling;
pub mod dynamics;
pub mod error;
pub mod modes;
pub mod numeric;
pub mod phonons;
pub mod plasma;
pub mod scenario;
pub mod species;

pub use error::{Error, Result};
pub use species::{species, IonSpecies};
