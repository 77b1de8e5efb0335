//! Differentiable hand kinematics on depth images.
//!
//! The crate is organized around a 61-parameter hand model: a 6D base pose,
//! five palm vectors, 15 bone lengths, and 25 joint angles. A forward
//! kinematics layer maps those parameters to 21 joint locations by chaining
//! homogeneous transforms, and every part of the layer is analytically
//! differentiable so it can sit inside a trained regression network.
//!
//! Modules:
//!
//! - [`hand`]: parameter vector, kinematic topology, forward kinematics.
//! - [`diff`]: forward-mode derivatives of the kinematics and composed losses.
//! - [`metrics`]: training losses, evaluation metrics, joint-limit statistics.
//! - [`ik`]: per-finger damped Gauss-Newton angle recovery from joint locations.
//! - [`normalize`]: exact point-space geometry of the appearance-normalization
//!   pipeline (camera rotation, re-center / rotate / re-scale, back-transform).
//! - [`depth`]: depth-frame preprocessing to normalized rasters, raster-space
//!   normalization stages, and online augmentation.
//! - [`dataset`]: on-disk dataset format (binary rasters, JSON manifests,
//!   JSON-lines annotations).
//! - [`synth`]: synthetic labeled depth-data generation from the hand model.
//! - [`learn`]: a small from-scratch network stack, Adam, the normalization
//!   cascade trainer, and the end-to-end pose trainer.

pub mod dataset;
pub mod depth;
pub mod diff;
pub mod error;
pub mod hand;
pub mod ik;
pub mod learn;
pub mod metrics;
pub mod normalize;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};

/// Derives a child RNG seed from a parent seed and a stream label.
///
/// Sample-level work (augmentation, per-frame generation) draws from its own
/// stream so concurrent processing cannot change outputs.
pub fn derive_seed(parent: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the parent via splitmix64 finalizer.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = parent ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
