//! Physical-layer authentication of UAV control packets.
//!
//! A UAV with an `L`-element T-shaped array receives a control packet and
//! must decide whether it came from the ground control station (GCS), whose
//! direction, distance, power and Rician factor it knows, or from a
//! malicious attacker (MA) about which it knows nothing. The decision is a
//! generalized log-likelihood ratio test: the attacker's parameters are
//! replaced by their maximum-likelihood estimates (a 2-D direction grid
//! search plus closed forms), and the resulting statistic is compared with
//! a Neyman–Pearson threshold computed from a semi-closed-form false-alarm
//! approximation.
//!
//! Module map:
//!
//! * [`array`] – geometry, steering vectors, Rician channel synthesis.
//! * [`signal`] – training sequences, packet transmission, matched filter.
//! * [`estimator`] – ML estimation of the attacker parameters.
//! * [`detector`] – the test statistic and the decision.
//! * [`analytic`] – FAR/SDR approximations and threshold design.
//! * [`montecarlo`] – seeded trial generation, empirical rates and ROC.
//! * [`scenario`], [`experiments`] – the command-line experiment recipes.

pub mod analytic;
pub mod array;
pub mod detector;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod montecarlo;
pub mod scenario;
pub mod signal;

pub use error::{Error, Result};
pub use num_complex::Complex64;
