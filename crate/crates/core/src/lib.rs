//! Unicycles in cyclic pursuit: link geometry, steering laws, fixed-step
//! simulation, and linear stability analysis of circular formations.
//!
//! ```
//! use cyclic_pursuit::control::ControlParams;
//! use cyclic_pursuit::geometry::{construct_equally_spaced, Rotation};
//! use cyclic_pursuit::spectral::{stability_report, Classification};
//!
//! let (_, xi) = construct_equally_spaced(5, 2.0, Rotation::CounterClockwise).unwrap();
//! let params = ControlParams::new(1.0, -2.0).unwrap();
//! let verdict = stability_report(&xi, &params).unwrap();
//! assert_eq!(verdict.classification, Classification::AsymptoticallyStable);
//! ```

pub mod control;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linear;
pub mod matrix_io;
pub mod sim;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/geometry.md")]
    struct Geometry;
    #[doc = include_str!("../../../book/src/control.md")]
    struct Control;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/linearization.md")]
    struct Linearization;
    #[doc = include_str!("../../../book/src/stability.md")]
    struct Stability;
    #[doc = include_str!("../../../book/src/variant.md")]
    struct Variant;
    #[doc = include_str!("../../../book/src/scenarios.md")]
    struct Scenarios;
    #[doc = include_str!("../../../book/src/acceptance.md")]
    struct Acceptance;
}
