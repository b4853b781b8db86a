//! Feasibility and secret-key-rate simulator for wireless quantum key
//! distribution inside a lit room.
//!
//! A mobile transmitter on the floor sends weak coherent pulses (decoy-state
//! BB84) to a receiver on the ceiling. The link suffers Lambertian path loss,
//! and the receiver collects background light: isotropic ambient light and
//! the room's lamp reflected diffusely off the walls and floor. The crate
//! turns those into a per-pulse noise budget and the asymptotic key-rate
//! lower bound, and maps where the link is secure.
//!
//! Modules, bottom up:
//!
//! - [`geometry`]: room, poses, tessellation of reflecting surfaces.
//! - [`spectra`]: measured light-source spectra.
//! - [`channel`]: line-of-sight and reflected DC gains.
//! - [`noise`]: background photon counts.
//! - [`keyrate`]: decoy-state key rate.
//! - [`experiments`]: named scenarios, sweeps and secure-region searches.
//! - [`montecarlo`]: ray-sampling estimate of the reflection integral, used
//!   to cross-check [`channel::total_reflected_gain`].
//! - [`config`] and [`cli`]: the batch front-end.

pub mod channel;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod geometry;
pub mod keyrate;
pub mod montecarlo;
pub mod noise;
pub mod spectra;
