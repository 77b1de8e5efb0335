//! Inverse kinematics: recovering the 25 joint angles (and the base frame)
//! from observed joint locations, given the hand shape.
//!
//! The finger chains are kinematically independent once the base frame and
//! palm vectors are known, so the solve splits into five damped Gauss-Newton
//! problems of five angles each, against the nine observed coordinates of
//! that finger's PIP/DIP/TIP joints. The base orientation is recovered first
//! by an orthogonal Procrustes fit of the shape's palm vectors onto the
//! observed ones.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};
use crate::hand::{
    finger_chain_points, Finger, FingerJoint, HandParameters, JointSet, KinematicTopology, FINGERS,
};
use crate::scalar::{Dual, Real};

/// The shape half of the parameter vector: what IK treats as known.
#[derive(Debug, Clone)]
pub struct HandShape {
    /// Bone lengths, finger-major T I M R P, mm.
    pub bone_lengths: [f64; 15],
    /// Palm vectors thumb, index, ring, pinky, wrist in the base frame, mm.
    pub base_vectors: [[f64; 3]; 5],
}

impl HandShape {
    pub fn from_parameters(params: &HandParameters) -> Self {
        HandShape {
            bone_lengths: params.bone_lengths,
            base_vectors: [
                params.finger_vectors[0],
                params.finger_vectors[1],
                params.finger_vectors[2],
                params.finger_vectors[3],
                params.wrist_vector,
            ],
        }
    }

    /// Measures a shape directly off a joint set: bone lengths from chain
    /// distances, palm vectors from MCP offsets in the observation frame.
    pub fn from_joints(joints: &JointSet) -> Result<Self> {
        let base = joints.middle_mcp();
        let mut bone_lengths = [0.0; 15];
        for finger in FINGERS {
            let f = finger.index();
            let chain = [
                joints.finger(finger, FingerJoint::Mcp),
                joints.finger(finger, FingerJoint::Pip),
                joints.finger(finger, FingerJoint::Dip),
                joints.finger(finger, FingerJoint::Tip),
            ];
            for k in 0..3 {
                let d = dist(chain[k], chain[k + 1]);
                if d <= 1e-9 {
                    return Err(Error::degenerate(format!(
                        "finger {} bone {k} has zero observed length",
                        finger.short_name()
                    )));
                }
                bone_lengths[3 * f + k] = d;
            }
        }
        let v = |p: [f64; 3]| [p[0] - base[0], p[1] - base[1], p[2] - base[2]];
        Ok(HandShape {
            bone_lengths,
            base_vectors: [
                v(joints.finger(Finger::Thumb, FingerJoint::Mcp)),
                v(joints.finger(Finger::Index, FingerJoint::Mcp)),
                v(joints.finger(Finger::Ring, FingerJoint::Mcp)),
                v(joints.finger(Finger::Pinky, FingerJoint::Mcp)),
                v(joints.wrist()),
            ],
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.bone_lengths.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("shape bone lengths must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IkOptions {
    pub max_iterations: usize,
    /// Stop once the stacked residual norm falls below this (mm).
    pub residual_tol_mm: f64,
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        IkOptions {
            max_iterations: 100,
            residual_tol_mm: 1e-10,
            initial_damping: 1e-6,
            damping_increase: 10.0,
            damping_decrease: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IkResult {
    /// Recovered joint angles, finger-major, rad.
    pub angles: [f64; 25],
    /// Euclidean norm of the stacked 45-coordinate chain residual, mm.
    pub residual_mm: f64,
    /// False when any finger exhausted its iteration budget while still
    /// improving; the residual is reported either way.
    pub converged: bool,
    /// Base frame used for the per-finger solves.
    pub base_translation: [f64; 3],
    pub base_rotation: Matrix3<f64>,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Orthogonal Procrustes: rotation `R` minimizing `sum ||R a_i - b_i||^2`.
fn kabsch(from: &[[f64; 3]; 5], to: &[Vector3<f64>; 5]) -> Matrix3<f64> {
    let mut c = Matrix3::<f64>::zeros();
    for (a, b) in from.iter().zip(to.iter()) {
        let av = Vector3::new(a[0], a[1], a[2]);
        c += b * av.transpose();
    }
    let svd = c.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let d = (u * v_t).determinant();
    let mut s = Matrix3::identity();
    s[(2, 2)] = if d < 0.0 { -1.0 } else { 1.0 };
    u * s * v_t
}

/// Recovers joint angles from observed joint locations.
///
/// The base translation is read off the middle-finger MCP; the base rotation
/// comes from a Procrustes fit of the shape's palm vectors; each finger is
/// then solved by Levenberg-damped Gauss-Newton from a zero-angle start,
/// with the damping multiplied on step rejection and relaxed on acceptance.
pub fn ik_angles(
    joints: &JointSet,
    shape: &HandShape,
    topo: &KinematicTopology,
    opts: &IkOptions,
) -> Result<IkResult> {
    shape.validate()?;
    // Degenerate observations make the chain directions meaningless.
    for finger in FINGERS {
        let chain = [
            joints.finger(finger, FingerJoint::Mcp),
            joints.finger(finger, FingerJoint::Pip),
            joints.finger(finger, FingerJoint::Dip),
            joints.finger(finger, FingerJoint::Tip),
        ];
        for k in 0..3 {
            if dist(chain[k], chain[k + 1]) <= 1e-9 {
                return Err(Error::degenerate(format!(
                    "finger {} has a zero-length observed bone",
                    finger.short_name()
                )));
            }
        }
    }

    let t = joints.middle_mcp();
    let observed = [
        obs_vec(joints.finger(Finger::Thumb, FingerJoint::Mcp), t),
        obs_vec(joints.finger(Finger::Index, FingerJoint::Mcp), t),
        obs_vec(joints.finger(Finger::Ring, FingerJoint::Mcp), t),
        obs_vec(joints.finger(Finger::Pinky, FingerJoint::Mcp), t),
        obs_vec(joints.wrist(), t),
    ];
    let r_base = kabsch(&shape.base_vectors, &observed);

    let mut angles = [0.0; 25];
    let mut total_sse = 0.0;
    let mut converged = true;
    for finger in FINGERS {
        let f = finger.index();
        // Observed PIP/DIP/TIP in the finger-base frame.
        let v = match f {
            0 => shape.base_vectors[0],
            1 => shape.base_vectors[1],
            3 => shape.base_vectors[2],
            4 => shape.base_vectors[3],
            _ => [0.0; 3],
        };
        let mut targets = [[0.0; 3]; 3];
        for (slot, joint) in [FingerJoint::Pip, FingerJoint::Dip, FingerJoint::Tip]
            .into_iter()
            .enumerate()
        {
            let p = joints.finger(finger, joint);
            let local = r_base.transpose() * Vector3::new(p[0] - t[0], p[1] - t[1], p[2] - t[2]);
            targets[slot] = [local[0] - v[0], local[1] - v[1], local[2] - v[2]];
        }
        let bones: [f64; 3] = shape.bone_lengths[3 * f..3 * f + 3].try_into().unwrap();
        let (theta, sse, finger_converged) = solve_finger(&bones, &targets, topo, finger, opts);
        angles[5 * f..5 * f + 5].copy_from_slice(&theta);
        total_sse += sse;
        converged &= finger_converged;
    }

    Ok(IkResult {
        angles,
        residual_mm: total_sse.sqrt(),
        converged,
        base_translation: t,
        base_rotation: r_base,
    })
}

fn obs_vec(p: [f64; 3], t: [f64; 3]) -> Vector3<f64> {
    Vector3::new(p[0] - t[0], p[1] - t[1], p[2] - t[2])
}

/// Residual and 9x5 Jacobian of one finger chain at the given angles.
fn finger_residual(
    angles: &[f64; 5],
    bones: &[f64; 3],
    targets: &[[f64; 3]; 3],
    chain: &crate::hand::FingerChain,
) -> (SVector<f64, 9>, SMatrix<f64, 9, 5>) {
    let mut seeded = [Dual::<5>::constant(0.0); 5];
    for (i, s) in seeded.iter_mut().enumerate() {
        *s = Dual::variable(angles[i], i);
    }
    let bones_d = [
        Dual::<5>::constant(bones[0]),
        Dual::<5>::constant(bones[1]),
        Dual::<5>::constant(bones[2]),
    ];
    let points = finger_chain_points(&seeded, &bones_d, chain);
    let mut r = SVector::<f64, 9>::zeros();
    let mut jac = SMatrix::<f64, 9, 5>::zeros();
    for slot in 0..3 {
        for c in 0..3 {
            let row = slot * 3 + c;
            r[row] = points[slot][c].v - targets[slot][c];
            for p in 0..5 {
                jac[(row, p)] = points[slot][c].d[p];
            }
        }
    }
    (r, jac)
}

fn solve_finger(
    bones: &[f64; 3],
    targets: &[[f64; 3]; 3],
    topo: &KinematicTopology,
    finger: Finger,
    opts: &IkOptions,
) -> ([f64; 5], f64, bool) {
    let chain = topo.chain(finger);
    let mut theta = [0.0; 5];
    let (mut r, mut jac) = finger_residual(&theta, bones, targets, chain);
    let mut sse = r.norm_squared();
    let mut damping = opts.initial_damping;
    let tol_sq = opts.residual_tol_mm * opts.residual_tol_mm;
    let mut converged = false;

    for _ in 0..opts.max_iterations {
        if sse <= tol_sq {
            converged = true;
            break;
        }
        let jtj = jac.transpose() * jac;
        let jtr = jac.transpose() * r;
        let mut accepted = false;
        // Retry with stronger damping until the step reduces the residual.
        for _ in 0..40 {
            let lhs = jtj + SMatrix::<f64, 5, 5>::identity() * damping;
            let Some(step) = lhs.lu().solve(&(-jtr)) else {
                damping *= opts.damping_increase;
                continue;
            };
            let mut trial = theta;
            for i in 0..5 {
                trial[i] += step[i];
            }
            let (r_trial, jac_trial) = finger_residual(&trial, bones, targets, chain);
            let sse_trial = r_trial.norm_squared();
            if sse_trial < sse {
                theta = trial;
                r = r_trial;
                jac = jac_trial;
                let improvement = sse - sse_trial;
                sse = sse_trial;
                damping = (damping / opts.damping_decrease).max(1e-15);
                accepted = true;
                // Relative stall: nothing left to gain at this precision.
                if improvement <= sse * 1e-14 {
                    converged = true;
                }
                break;
            }
            damping *= opts.damping_increase;
            if damping > 1e14 {
                break;
            }
        }
        if !accepted {
            // Local minimum at numerical precision.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    if sse <= tol_sq {
        converged = true;
    }
    (theta, sse, converged)
}
