//! Exact point-space geometry of the appearance-normalization pipeline:
//! rotating the camera frame onto the hand's center of mass, extracting the
//! ground-truth translation / in-plane rotation / scale of a sample,
//! applying and inverting the three normalization stages, and undoing the
//! offline preprocessing.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand::{Finger, FingerJoint, JointSet, KinematicTopology};
use crate::ik::HandShape;

/// Everything recorded while normalizing one sample, sufficient to undo the
/// whole chain. Serialized as JSON next to each processed sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformState {
    /// Middle-finger MCP position in the COM-relative rotated frame, mm.
    pub t_mm: [f64; 3],
    /// In-plane angle of the middle finger against +x, rad, in (-pi, pi].
    pub alpha_z_rad: f64,
    /// Overall hand scale, dimensionless, positive.
    pub scale: f64,
    /// Hand center of mass in raw camera coordinates, mm.
    pub com_mm: [f64; 3],
    /// Rotation applied to camera points during preprocessing (row-major).
    pub r_cam: [[f64; 3]; 3],
    /// Depth of the rotated COM, subtracted during preprocessing, mm.
    pub com_depth_mm: f64,
}

impl TransformState {
    /// A state that makes every stage of the pipeline the identity.
    pub fn identity() -> Self {
        TransformState {
            t_mm: [0.0; 3],
            alpha_z_rad: 0.0,
            scale: 1.0,
            com_mm: [0.0, 0.0, 1.0],
            r_cam: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            com_depth_mm: 0.0,
        }
    }

    pub fn r_cam_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.r_cam[i][j])
    }

    pub fn set_r_cam(&mut self, m: &Matrix3<f64>) {
        for i in 0..3 {
            for j in 0..3 {
                self.r_cam[i][j] = m[(i, j)];
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::invalid(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        let r = self.r_cam_matrix();
        let defect = (r.transpose() * r - Matrix3::identity()).norm();
        if defect > 1e-6 || (r.determinant() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid("r_cam must be a proper rotation"));
        }
        Ok(())
    }
}

/// The three invertible point-space stages of appearance normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Subtract `t` (re-centers the planar position and the depth on the
    /// middle-finger MCP).
    Recenter,
    /// Rotate by `Rz(-alpha_z)` so the middle finger aligns with +x.
    Rotate,
    /// Divide by the scale in all three directions.
    Rescale,
}

fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation taking the COM onto the optical axis.
///
/// Composed from `alpha_y = atan2(com_x, com_z)` and the x-tilt of the
/// y-rotated COM; signs are fixed so that `R * com = (0, 0, |com|)`.
pub fn camera_rotation(com: [f64; 3]) -> Result<Matrix3<f64>> {
    if com.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("camera_rotation: non-finite COM"));
    }
    if com[2] <= 0.0 {
        return Err(Error::invalid(format!(
            "camera_rotation: COM depth must be positive, got {}",
            com[2]
        )));
    }
    let alpha_y = com[0].atan2(com[2]);
    let ry = nalgebra::Rotation3::from_axis_angle(&Vector3::y_axis(), -alpha_y);
    let tilted = ry * Vector3::new(com[0], com[1], com[2]);
    let alpha_x = tilted[1].atan2(tilted[2]);
    let rx = nalgebra::Rotation3::from_axis_angle(&Vector3::x_axis(), alpha_x);
    Ok((rx * ry).into_inner())
}

/// Ground-truth normalization parameters of one sample, computed from joint
/// locations already expressed in the COM-relative rotated frame.
///
/// Returns the middle-MCP translation `t`, the in-plane middle-finger angle
/// `alpha_z` (MCP->TIP direction projected to the x-y plane, against +x),
/// and the overall scale `s` from lengths measured off the joints.
pub fn gt_transform_params(
    joints: &JointSet,
    topo: &KinematicTopology,
) -> Result<([f64; 3], f64, f64)> {
    let t = joints.middle_mcp();
    let tip = joints.finger(Finger::Middle, FingerJoint::Tip);
    let dx = tip[0] - t[0];
    let dy = tip[1] - t[1];
    if (dx * dx + dy * dy).sqrt() < 1e-9 {
        return Err(Error::degenerate(
            "middle finger has no in-plane extent; alpha_z undefined",
        ));
    }
    let alpha_z = dy.atan2(dx);

    let shape = HandShape::from_joints(&joints.clone())?;
    let mut length_sum: f64 = shape.bone_lengths.iter().sum();
    for v in &shape.base_vectors {
        length_sum += (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    }
    let s = length_sum / topo.reference_length_sum_mm;
    Ok((t, alpha_z, s))
}

/// Applies one normalization stage to a set of points.
pub fn apply_normalization(
    points: &[[f64; 3]],
    state: &TransformState,
    stage: Stage,
) -> Result<Vec<[f64; 3]>> {
    if stage == Stage::Rescale && !(state.scale > 0.0) {
        return Err(Error::invalid(format!(
            "rescale needs a positive scale, got {}",
            state.scale
        )));
    }
    let out = match stage {
        Stage::Recenter => points
            .iter()
            .map(|p| {
                [
                    p[0] - state.t_mm[0],
                    p[1] - state.t_mm[1],
                    p[2] - state.t_mm[2],
                ]
            })
            .collect(),
        Stage::Rotate => {
            let r = rot_z(-state.alpha_z_rad);
            points
                .iter()
                .map(|p| {
                    let q = r * Vector3::new(p[0], p[1], p[2]);
                    [q[0], q[1], q[2]]
                })
                .collect()
        }
        Stage::Rescale => {
            let inv = 1.0 / state.scale;
            points
                .iter()
                .map(|p| [p[0] * inv, p[1] * inv, p[2] * inv])
                .collect()
        }
    };
    Ok(out)
}

/// Convenience: all three stages in pipeline order (recenter, rotate,
/// rescale).
pub fn apply_normalization_chain(
    points: &[[f64; 3]],
    state: &TransformState,
) -> Result<Vec<[f64; 3]>> {
    let p = apply_normalization(points, state, Stage::Recenter)?;
    let p = apply_normalization(&p, state, Stage::Rotate)?;
    apply_normalization(&p, state, Stage::Rescale)
}

/// Inverse of the normalization chain on joint estimates:
/// `j = Rz(alpha_z) * (s * j_norm) + t` per joint.
pub fn back_transform(joints_norm: &JointSet, state: &TransformState) -> Result<JointSet> {
    if !(state.scale > 0.0) {
        return Err(Error::invalid(format!(
            "back_transform needs a positive scale, got {}",
            state.scale
        )));
    }
    let r = rot_z(state.alpha_z_rad);
    Ok(joints_norm.map(|p| {
        let q = r * Vector3::new(p[0] * state.scale, p[1] * state.scale, p[2] * state.scale);
        [
            q[0] + state.t_mm[0],
            q[1] + state.t_mm[1],
            q[2] + state.t_mm[2],
        ]
    }))
}

/// Undoes the offline preprocessing: restores the stored COM depth and
/// rotates back into the raw camera frame with the transpose of `r_cam`.
pub fn postprocess_to_camera(joints: &JointSet, state: &TransformState) -> JointSet {
    let r_inv = state.r_cam_matrix().transpose();
    joints.map(|p| {
        let q = r_inv * Vector3::new(p[0], p[1], p[2] + state.com_depth_mm);
        [q[0], q[1], q[2]]
    })
}

/// Maps raw camera-frame points into the COM-relative rotated frame used by
/// processed samples (the inverse of [`postprocess_to_camera`]).
pub fn camera_to_processed(points: &[[f64; 3]], state: &TransformState) -> Vec<[f64; 3]> {
    let r = state.r_cam_matrix();
    points
        .iter()
        .map(|p| {
            let q = r * Vector3::new(p[0], p[1], p[2]);
            [q[0], q[1], q[2] - state.com_depth_mm]
        })
        .collect()
}
