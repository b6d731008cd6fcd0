//! Design and verification toolkit for elastic-band-driven self-folding sheets.
//!
//! A printed sheet carries thin compliant hinges; elastic bands stretched
//! between hooks on either side of each hinge pull it closed until the band
//! moment balances the hinge's torsional stiffness. This crate provides:
//!
//! - [`model`]: the hinge/band moment balance and its equilibrium solver.
//! - [`design`]: forward design maps over parameter grids and inverse design
//!   for target fold angles.
//! - [`polyhedron`]: exact dihedral angles and solid geometry for the
//!   supported polyhedra.
//! - [`net`]: planar nets with hinge trees, rigid folding and closure checks.
//! - [`locomotion`]: vibration-motor driven planar motion and curvature fits.
//! - [`sensing`]: Hall and capacitive-touch stream classification and SNR.
//!
//! All quantities are SI (metres, radians, newtons) unless a name says
//! otherwise; file formats use millimetres and degrees.
//!
//! ```
//! use foldkit::model::{BandSpec, HingeSpec, JointConfig, solve_equilibrium};
//!
//! let hinge = HingeSpec::layered(2, 10e-3, 5e-3).unwrap();
//! let band = BandSpec::new("yellow", 12e-3, 120.0).unwrap();
//! let joint = JointConfig::new(hinge, band, 40e-3).unwrap();
//! let fold = solve_equilibrium(&joint).unwrap();
//! assert!(fold.alpha < std::f64::consts::PI);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod locomotion;
pub mod model;
pub mod net;
pub mod polyhedron;
pub mod sensing;

pub use error::{Error, Result};
