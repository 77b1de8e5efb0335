//! The 61-scalar hand parameter vector and its fixed flattening order.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::topology::{ANGLE_COUNT, BONE_COUNT};

/// Length of the flattened parameter vector.
pub const PARAM_COUNT: usize = 61;

/// All learnable inputs of the kinematic layer.
///
/// Flattening order (fixed; round-trips exactly):
///
/// | indices | contents |
/// |---------|----------|
/// | 0..3    | base translation (mm) |
/// | 3..6    | base orientation, intrinsic Z-Y-X Euler angles (rad) |
/// | 6..18   | finger vectors thumb, index, ring, pinky (mm, 3 each) |
/// | 18..21  | wrist vector (mm) |
/// | 21..36  | bone lengths, finger-major T I M R P, 3 per finger (mm) |
/// | 36..61  | joint angles, finger-major T I M R P, 5 per finger (rad) |
///
/// The middle finger has no base vector: the hand base sits at its MCP joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandParameters {
    /// Position of the middle-finger MCP joint (the hand base), mm.
    pub base_translation: [f64; 3],
    /// Orientation of the hand base as intrinsic Z-Y-X Euler angles
    /// `[rz, ry, rx]`: the rotation matrix is `Rz(rz) * Ry(ry) * Rx(rx)`.
    pub base_orientation: [f64; 3],
    /// Vectors from the hand base to the thumb, index, ring, and pinky MCP
    /// joints, expressed in the base frame, mm.
    pub finger_vectors: [[f64; 3]; 4],
    /// Vector from the hand base to the wrist, base frame, mm.
    pub wrist_vector: [f64; 3],
    /// Bone lengths (MCP->PIP, PIP->DIP, DIP->TIP per finger), mm.
    pub bone_lengths: [f64; BONE_COUNT],
    /// Joint angles, five per finger in DH-row order, rad.
    pub joint_angles: [f64; ANGLE_COUNT],
}

impl HandParameters {
    /// Checks the type invariants: all values finite, bone lengths strictly
    /// positive, joint angles within `(-pi, pi]`.
    pub fn validate(&self) -> Result<()> {
        let flat = self.to_flat();
        if let Some(i) = flat.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "hand parameter {i} is not finite"
            )));
        }
        if let Some(i) = self.bone_lengths.iter().position(|&r| r <= 0.0) {
            return Err(Error::invalid(format!(
                "bone length {i} must be strictly positive, got {}",
                self.bone_lengths[i]
            )));
        }
        if let Some(i) = self
            .joint_angles
            .iter()
            .position(|&a| !(a > -PI && a <= PI))
        {
            return Err(Error::invalid(format!(
                "joint angle {i} = {} is outside (-pi, pi]",
                self.joint_angles[i]
            )));
        }
        Ok(())
    }

    pub fn to_flat(&self) -> [f64; PARAM_COUNT] {
        let mut out = [0.0; PARAM_COUNT];
        out[0..3].copy_from_slice(&self.base_translation);
        out[3..6].copy_from_slice(&self.base_orientation);
        for (i, v) in self.finger_vectors.iter().enumerate() {
            out[6 + 3 * i..9 + 3 * i].copy_from_slice(v);
        }
        out[18..21].copy_from_slice(&self.wrist_vector);
        out[21..36].copy_from_slice(&self.bone_lengths);
        out[36..61].copy_from_slice(&self.joint_angles);
        out
    }

    /// Rebuilds parameters from the flattened layout without checking
    /// invariants. Training code uses this on raw network outputs.
    pub fn from_flat_unchecked(flat: &[f64; PARAM_COUNT]) -> Self {
        let mut finger_vectors = [[0.0; 3]; 4];
        for (i, v) in finger_vectors.iter_mut().enumerate() {
            v.copy_from_slice(&flat[6 + 3 * i..9 + 3 * i]);
        }
        HandParameters {
            base_translation: flat[0..3].try_into().unwrap(),
            base_orientation: flat[3..6].try_into().unwrap(),
            finger_vectors,
            wrist_vector: flat[18..21].try_into().unwrap(),
            bone_lengths: flat[21..36].try_into().unwrap(),
            joint_angles: flat[36..61].try_into().unwrap(),
        }
    }

    pub fn from_flat(flat: &[f64; PARAM_COUNT]) -> Result<Self> {
        let p = Self::from_flat_unchecked(flat);
        p.validate()?;
        Ok(p)
    }

    /// Flat index of the first angle of `finger` (finger index 0..5).
    pub fn angle_offset(finger: usize) -> usize {
        36 + finger * 5
    }

    /// Flat index of the first bone length of `finger`.
    pub fn bone_offset(finger: usize) -> usize {
        21 + finger * 3
    }
}

/// Human-readable labels for the 61 flattened parameters, in order.
pub fn param_labels() -> Vec<String> {
    let mut labels = Vec::with_capacity(PARAM_COUNT);
    for axis in ["x", "y", "z"] {
        labels.push(format!("base_t_{axis}"));
    }
    for axis in ["rz", "ry", "rx"] {
        labels.push(format!("base_{axis}"));
    }
    for f in ["T", "I", "R", "P"] {
        for axis in ["x", "y", "z"] {
            labels.push(format!("v_{f}_{axis}"));
        }
    }
    for axis in ["x", "y", "z"] {
        labels.push(format!("v_W_{axis}"));
    }
    for f in ["T", "I", "M", "R", "P"] {
        for n in 1..=3 {
            labels.push(format!("r_{f}{n}"));
        }
    }
    for f in ["T", "I", "M", "R", "P"] {
        for n in 1..=5 {
            labels.push(format!("theta_{f}{n}"));
        }
    }
    labels
}
