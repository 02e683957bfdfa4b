//! Bit-level fading models for wireless networks: single-hop channels, their
//! capacity regions, network cut-set bounds and random-coding simulations.

pub mod channels;
pub mod cli;
pub mod codingsim;
pub mod error;
pub mod fading;
pub mod gf2;
pub mod network;
pub mod regions;
pub mod rng;

pub use channels::{BcChannel, MacChannel, P2pChannel};
pub use error::{Error, Result};
pub use fading::{FadingPmf, SnrDistribution, StateSample};
pub use gf2::{Gf2Matrix, LevelVector};
pub use network::{parse_network, Cut, NetworkSpec};
pub use regions::RateRegion;
