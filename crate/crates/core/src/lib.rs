//! Headless engine for gesture-driven data presentations.
//!
//! Hand landmarks go in, layer-ordered render commands come out.

pub mod data;
pub mod dimpvis;
pub mod gesture;
pub mod landmark;
pub mod layout;
pub mod scale;
pub mod scene;
pub mod synthetic;
pub mod interaction;
pub mod story;
pub mod session;
pub mod svg;
pub mod trace;
