//! Collection-efficiency and photophysics toolkit for single NV emitters in
//! diamond.
//!
//! The crate answers one question: how many of the photons emitted by a
//! single colour centre make it into a collection objective, with and without
//! a hemispherical diamond solid-immersion lens (SIL)? And it provides the
//! analysis chain used to check such an emitter in the lab:
//!
//! - [`dipole`]: far-field s/p intensity of single dipoles and NV dipole pairs
//! - [`interface`]: Snell refraction, total internal reflection and Fresnel
//!   power transmittance at the diamond surface
//! - [`efficiency`]: solid-angle integration of the transmitted pattern, a
//!   Monte Carlo ray oracle, and NA sweeps
//! - [`photophysics`]: two-level photon streams, HBT correlation / g2(τ), and
//!   saturation-curve fitting
//! - [`io`]: the CSV and JSON file formats
//! - [`cli`]: the command-line front end used by the `diamond-sil` binary
//!
//! ```
//! use diamond_sil::efficiency::{efficiency_100_averaged, QuadratureConfig};
//! use diamond_sil::interface::{CollectionOptics, InterfaceConfig};
//!
//! let optics = CollectionOptics::new(0.85).unwrap();
//! let quad = QuadratureConfig::default();
//! let planar = efficiency_100_averaged(&InterfaceConfig::planar(), &optics, &quad, 4).unwrap();
//! let sil = efficiency_100_averaged(&InterfaceConfig::sil(), &optics, &quad, 4).unwrap();
//! assert!((sil.eta / planar.eta - 7.4).abs() < 0.2);
//! ```

pub mod cli;
pub mod dipole;
pub mod efficiency;
mod error;
pub mod interface;
pub mod io;
pub mod photophysics;
pub mod quadrature;

pub use error::{Error, Result};
