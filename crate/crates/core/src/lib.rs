//! Channel modeling and measurement analysis for in-body (implant) wireless
//! links at 915 MHz and 2.4 GHz.
//!
//! * [`model`]: depth-linear path loss with Gaussian shadowing, Friis
//!   external segment, link budgets and outage probability.
//! * [`multipath`]: S21 sweep → impulse response → power delay profile →
//!   mean excess delay, RMS delay spread and coherence bandwidth.
//! * [`estimation`]: least-squares fitting of model parameters and
//!   per-depth shadowing variance from measurement datasets.

pub mod cli;
pub mod estimation;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod multipath;
pub mod units;
