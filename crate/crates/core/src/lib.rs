//! Nilpotent approximation of Carnot–Carathéodory structures, free Carnot
//! group lifting and blow-ups of horizontal curves.
//!
//! The symbolic layer ([`jets`], [`ccfields`], [`nilpotent`], [`freecarnot`])
//! works with exact rationals. Floats appear only in [`curves`].

pub mod ccfields;
pub mod curves;
pub mod error;
pub mod freecarnot;
pub mod jets;
pub mod linalg;
pub mod models;
pub mod nilpotent;
pub mod poly;
pub mod rational;

pub use ccfields::{AdaptedFrame, BracketWord, CCStructure, PolyVectorField};
pub use error::{Error, Result};
pub use jets::{Jet, JetMap, Weights};
pub use rational::Q;
