//! The 61-parameter hand representation and its forward kinematics.
//!
//! A hand is described by a 6D base pose (the middle-finger MCP frame), five
//! palm vectors from the base to the other finger bases and the wrist, 15
//! bone lengths, and 25 joint angles. Each finger is a serial chain of five
//! Denavit-Hartenberg transforms; the twist and offset entries of the chain
//! are fixed per-topology constants while angles and bone lengths are the
//! learnable inputs.

mod fkine;
mod joints;
mod params;
mod topology;

pub use fkine::{base_matrix, dh_matrix, fkine, fkine_unchecked, hand_scale, hand_scale_unchecked};
pub(crate) use fkine::{finger_chain_points, fkine_generic};
pub use joints::{JointLabel, JointSet, JOINT_COUNT};
pub use params::{HandParameters, PARAM_COUNT};
pub use topology::{
    DhRow, Finger, FingerChain, FingerJoint, KinematicTopology, ANGLE_COUNT, BONE_COUNT, FINGERS,
    FINGER_JOINTS,
};
