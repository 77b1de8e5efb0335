//! Forward kinematics: chaining homogeneous transforms from the hand base
//! through per-finger Denavit-Hartenberg rows.
//!
//! The core is generic over [`Real`] so the same code path produces plain
//! positions (`f64`) and forward-mode Jacobians ([`crate::scalar::Dual`]).

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::joints::{JointLabel, JointSet, JOINT_COUNT};
use super::params::{HandParameters, PARAM_COUNT};
use super::topology::{FingerJoint, KinematicTopology, FINGERS};

/// Row-major homogeneous transform over any differentiable scalar.
pub(crate) type M4<T> = [[T; 4]; 4];

pub(crate) fn identity<T: Real>() -> M4<T> {
    let z = T::constant(0.0);
    let o = T::constant(1.0);
    [[o, z, z, z], [z, o, z, z], [z, z, o, z], [z, z, z, o]]
}

pub(crate) fn mat_mul<T: Real>(a: &M4<T>, b: &M4<T>) -> M4<T> {
    let mut out = [[T::constant(0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = a[i][0] * b[0][j];
            for k in 1..4 {
                acc = acc + a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub(crate) fn translation<T: Real>(v: [T; 3]) -> M4<T> {
    let mut m = identity::<T>();
    m[0][3] = v[0];
    m[1][3] = v[1];
    m[2][3] = v[2];
    m
}

/// Position of the frame origin: the translation column.
pub(crate) fn origin_of<T: Real>(m: &M4<T>) -> [T; 3] {
    [m[0][3], m[1][3], m[2][3]]
}

/// Classic Denavit-Hartenberg transform `Rz(theta) * Tz(d) * Tx(r) * Rx(alpha)`.
pub(crate) fn dh_generic<T: Real>(theta: T, r: T, alpha: T, d: T) -> M4<T> {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sa, ca) = (alpha.sin(), alpha.cos());
    let z = T::constant(0.0);
    let o = T::constant(1.0);
    [
        [ct, -st * ca, st * sa, r * ct],
        [st, ct * ca, -ct * sa, r * st],
        [z, sa, ca, d],
        [z, z, z, o],
    ]
}

/// Rotation from intrinsic Z-Y-X Euler angles times translation:
/// `T(t) * Rz(rz) * Ry(ry) * Rx(rx)`.
pub(crate) fn base_generic<T: Real>(t: [T; 3], euler_zyx: [T; 3]) -> M4<T> {
    let (sz, cz) = (euler_zyx[0].sin(), euler_zyx[0].cos());
    let (sy, cy) = (euler_zyx[1].sin(), euler_zyx[1].cos());
    let (sx, cx) = (euler_zyx[2].sin(), euler_zyx[2].cos());
    let z = T::constant(0.0);
    let o = T::constant(1.0);
    // Rz * Ry * Rx expanded.
    [
        [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx, t[0]],
        [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx, t[1]],
        [-sy, cy * sx, cy * cx, t[2]],
        [z, z, z, o],
    ]
}

fn to_nalgebra(m: &M4<f64>) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

/// The standard DH transform for one chain row.
///
/// Arguments follow the per-row parameterization: joint angle `theta` (rad),
/// link length `r` (mm), fixed twist `alpha` (rad), fixed offset `d` (mm).
pub fn dh_matrix(theta: f64, r: f64, alpha: f64, d: f64) -> Result<Matrix4<f64>> {
    for (name, v) in [("theta", theta), ("r", r), ("alpha", alpha), ("d", d)] {
        if !v.is_finite() {
            return Err(Error::invalid(format!("dh_matrix: {name} is not finite")));
        }
    }
    Ok(to_nalgebra(&dh_generic(theta, r, alpha, d)))
}

/// Homogeneous transform of the 6D hand base pose: translation plus an
/// intrinsic Z-Y-X Euler rotation.
pub fn base_matrix(translation: [f64; 3], orientation_zyx: [f64; 3]) -> Result<Matrix4<f64>> {
    if translation.iter().chain(orientation_zyx.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("base_matrix: non-finite input"));
    }
    Ok(to_nalgebra(&base_generic(translation, orientation_zyx)))
}

/// Generic forward kinematics over the flattened parameter vector.
///
/// Returns the 21 joint positions in canonical [`JointLabel`] order. Chains
/// reuse the accumulated prefix product along each finger.
pub(crate) fn fkine_generic<T: Real>(
    lambda: &[T; PARAM_COUNT],
    topo: &KinematicTopology,
) -> [[T; 3]; JOINT_COUNT] {
    let base = base_generic(
        [lambda[0], lambda[1], lambda[2]],
        [lambda[3], lambda[4], lambda[5]],
    );
    let mut out = [[T::constant(0.0); 3]; JOINT_COUNT];

    // Wrist: base frame translated by the wrist vector.
    let wrist = mat_mul(&base, &translation([lambda[18], lambda[19], lambda[20]]));
    out[JointLabel::Wrist.index()] = origin_of(&wrist);

    for finger in FINGERS {
        let f = finger.index();
        let chain = topo.chain(finger);
        // Thumb, index, ring, pinky carry vectors at slots 0..4; the middle
        // finger base coincides with the hand base.
        let v = match f {
            0 => [lambda[6], lambda[7], lambda[8]],
            1 => [lambda[9], lambda[10], lambda[11]],
            3 => [lambda[12], lambda[13], lambda[14]],
            4 => [lambda[15], lambda[16], lambda[17]],
            _ => [T::constant(0.0); 3],
        };
        let mut m = mat_mul(&base, &translation(v));
        out[JointLabel::Finger(finger, FingerJoint::Mcp).index()] = origin_of(&m);

        let bone_rows = chain.bone_rows();
        let angle_base = HandParameters::angle_offset(f);
        let bone_base = HandParameters::bone_offset(f);
        for (n, row) in chain.rows.iter().enumerate() {
            let theta = lambda[angle_base + n];
            let r = match bone_rows.iter().position(|&b| b == n) {
                Some(k) => lambda[bone_base + k],
                None => T::constant(0.0),
            };
            let dh = dh_generic(
                theta,
                r,
                T::constant(row.alpha_rad),
                T::constant(row.d_mm),
            );
            m = mat_mul(&m, &dh);
            for (joint, label) in [
                (FingerJoint::Pip, JointLabel::Finger(finger, FingerJoint::Pip)),
                (FingerJoint::Dip, JointLabel::Finger(finger, FingerJoint::Dip)),
                (FingerJoint::Tip, JointLabel::Finger(finger, FingerJoint::Tip)),
            ] {
                if chain.n_dh(joint) == n + 1 {
                    out[label.index()] = origin_of(&m);
                }
            }
        }
    }
    out
}

/// Local positions of the PIP, DIP, and TIP joints of one finger chain,
/// expressed in the finger-base frame (after the palm vector, before any DH
/// row). Shared by the full forward pass and the per-finger IK solver.
pub(crate) fn finger_chain_points<T: Real>(
    angles: &[T; 5],
    bones: &[T; 3],
    chain: &super::topology::FingerChain,
) -> [[T; 3]; 3] {
    let mut m = identity::<T>();
    let bone_rows = chain.bone_rows();
    let mut out = [[T::constant(0.0); 3]; 3];
    for (n, row) in chain.rows.iter().enumerate() {
        let r = match bone_rows.iter().position(|&b| b == n) {
            Some(k) => bones[k],
            None => T::constant(0.0),
        };
        let dh = dh_generic(angles[n], r, T::constant(row.alpha_rad), T::constant(row.d_mm));
        m = mat_mul(&m, &dh);
        for (slot, joint) in [FingerJoint::Pip, FingerJoint::Dip, FingerJoint::Tip]
            .into_iter()
            .enumerate()
        {
            if chain.n_dh(joint) == n + 1 {
                out[slot] = origin_of(&m);
            }
        }
    }
    out
}

/// Forward kinematics on a raw flattened vector, without invariant checks.
///
/// Training paths feed unconstrained network outputs through this; the
/// mapping itself is defined for any finite values.
pub fn fkine_unchecked(lambda: &[f64; PARAM_COUNT], topo: &KinematicTopology) -> JointSet {
    let positions = fkine_generic::<f64>(lambda, topo);
    JointSet::from_positions_unchecked(positions)
}

/// Maps validated hand parameters to the 21 joint locations.
pub fn fkine(params: &HandParameters, topo: &KinematicTopology) -> Result<JointSet> {
    params.validate()?;
    Ok(fkine_unchecked(&params.to_flat(), topo))
}

/// Overall hand scale: the sum of the 20 hand lengths (15 bone lengths plus
/// the magnitudes of the four finger vectors and the wrist vector) divided
/// by `reference_sum`.
pub fn hand_scale(params: &HandParameters, reference_sum: f64) -> Result<f64> {
    params.validate()?;
    if !(reference_sum.is_finite() && reference_sum > 0.0) {
        return Err(Error::invalid(format!(
            "hand_scale: reference_sum must be positive, got {reference_sum}"
        )));
    }
    Ok(hand_scale_unchecked(params, reference_sum))
}

pub fn hand_scale_unchecked(params: &HandParameters, reference_sum: f64) -> f64 {
    let mut sum: f64 = params.bone_lengths.iter().sum();
    for v in params
        .finger_vectors
        .iter()
        .chain(std::iter::once(&params.wrist_vector))
    {
        sum += (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    }
    sum / reference_sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::topology::Finger;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn reference_params() -> HandParameters {
        crate::synth::HandShapeProfile::reference().nominal_parameters()
    }

    #[test]
    fn dh_identity_and_pure_extension() {
        let m = dh_matrix(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(m, Matrix4::identity());

        let m = dh_matrix(0.0, 10.0, 0.0, 0.0).unwrap();
        let mut expect = Matrix4::identity();
        expect[(0, 3)] = 10.0;
        assert_eq!(m, expect);
    }

    #[test]
    fn dh_hand_evaluated_entry_by_entry() {
        // theta = pi/2, r = 5, alpha = pi/2, d = 2. Expanding the four-factor
        // product Rz * Tz * Tx * Rx by hand:
        //   [ 0  0  1  0 ]
        //   [ 1  0  0  5 ]
        //   [ 0  1  0  2 ]
        //   [ 0  0  0  1 ]
        let m = dh_matrix(FRAC_PI_2, 5.0, FRAC_PI_2, 2.0).unwrap();
        let expect = [
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 5.0],
            [0.0, 1.0, 0.0, 2.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(m[(i, j)], expect[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn dh_rotation_block_is_orthonormal() {
        let m = dh_matrix(0.83, 17.0, -1.1, 4.0).unwrap();
        let r = m.fixed_view::<3, 3>(0, 0);
        let rtr = r.transpose() * r;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(rtr[(i, j)], expect, epsilon = 1e-14);
            }
        }
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-14);
        assert_eq!(m[(3, 0)], 0.0);
        assert_eq!(m[(3, 3)], 1.0);
    }

    #[test]
    fn dh_rejects_non_finite() {
        assert!(dh_matrix(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(dh_matrix(0.0, f64::INFINITY, 0.0, 0.0).is_err());
    }

    #[test]
    fn base_zero_is_identity_and_translation_passthrough() {
        assert_eq!(
            base_matrix([0.0; 3], [0.0; 3]).unwrap(),
            Matrix4::identity()
        );
        let m = base_matrix([1.0, 2.0, 3.0], [0.0; 3]).unwrap();
        assert_eq!(m.fixed_view::<3, 3>(0, 0), nalgebra::Matrix3::identity());
        assert_eq!(m[(0, 3)], 1.0);
        assert_eq!(m[(1, 3)], 2.0);
        assert_eq!(m[(2, 3)], 3.0);
    }

    #[test]
    fn base_first_euler_axis_matches_rotation_oracle() {
        // Independent oracle: nalgebra's Rotation3 about z.
        let m = base_matrix([0.0; 3], [FRAC_PI_2, 0.0, 0.0]).unwrap();
        let oracle = nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::z_axis(), FRAC_PI_2);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(m[(i, j)], oracle[(i, j)], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn base_general_euler_matches_rotation_oracle() {
        let (rz, ry, rx) = (0.4, -0.9, 1.3);
        let m = base_matrix([0.0; 3], [rz, ry, rx]).unwrap();
        let oracle = nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::z_axis(), rz)
            * nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::y_axis(), ry)
            * nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::x_axis(), rx);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(m[(i, j)], oracle[(i, j)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn zero_angles_give_straight_fingers() {
        let topo = KinematicTopology::default();
        let mut params = reference_params();
        params.joint_angles = [0.0; 25];
        params.base_translation = [0.0; 3];
        params.base_orientation = [0.0; 3];
        let joints = fkine(&params, &topo).unwrap();

        for finger in FINGERS {
            let f = finger.index();
            let mcp = joints.finger(finger, FingerJoint::Mcp);
            let bones = &params.bone_lengths[3 * f..3 * f + 3];
            let expected_dists = [bones[0], bones[0] + bones[1], bones[0] + bones[1] + bones[2]];
            for (joint, expect) in [FingerJoint::Pip, FingerJoint::Dip, FingerJoint::Tip]
                .into_iter()
                .zip(expected_dists)
            {
                let p = joints.finger(finger, joint);
                // Straight ray along the MCP frame's +x (the base x axis here).
                assert_relative_eq!(p[0] - mcp[0], expect, epsilon = 1e-12);
                assert_relative_eq!(p[1], mcp[1], epsilon = 1e-12);
                assert_relative_eq!(p[2], mcp[2], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn middle_mcp_is_exactly_the_base_translation() {
        let topo = KinematicTopology::default();
        let mut params = reference_params();
        params.base_translation = [12.25, -3.5, 401.125];
        params.base_orientation = [0.3, 0.2, -0.4];
        let joints = fkine(&params, &topo).unwrap();
        assert_eq!(joints.middle_mcp(), params.base_translation);
    }

    #[test]
    fn translation_shifts_every_joint_exactly() {
        let topo = KinematicTopology::default();
        let params = reference_params();
        let j0 = fkine(&params, &topo).unwrap();
        let delta = [7.5, -12.25, 3.125];
        let mut shifted = params.clone();
        for k in 0..3 {
            shifted.base_translation[k] += delta[k];
        }
        let j1 = fkine(&shifted, &topo).unwrap();
        for (a, b) in j0.positions().iter().zip(j1.positions().iter()) {
            for k in 0..3 {
                // Exact: translation enters additively at the end of each chain.
                assert_relative_eq!(b[k] - a[k], delta[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn wrist_is_base_applied_to_wrist_vector() {
        let topo = KinematicTopology::default();
        let params = reference_params();
        let joints = fkine(&params, &topo).unwrap();
        let base = base_matrix(params.base_translation, params.base_orientation).unwrap();
        let v = params.wrist_vector;
        let expect = base * nalgebra::Vector4::new(v[0], v[1], v[2], 1.0);
        let w = joints.wrist();
        for k in 0..3 {
            assert_relative_eq!(w[k], expect[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn bone_length_consistency_along_chains() {
        let topo = KinematicTopology::default();
        let mut params = reference_params();
        // A bent pose, angles safely inside limits.
        for (i, a) in params.joint_angles.iter_mut().enumerate() {
            *a = 0.03 + 0.011 * (i as f64 % 5.0);
        }
        let joints = fkine(&params, &topo).unwrap();
        for finger in FINGERS {
            let f = finger.index();
            let chain = [
                joints.finger(finger, FingerJoint::Mcp),
                joints.finger(finger, FingerJoint::Pip),
                joints.finger(finger, FingerJoint::Dip),
                joints.finger(finger, FingerJoint::Tip),
            ];
            for k in 0..3 {
                let d: f64 = (0..3)
                    .map(|c| (chain[k + 1][c] - chain[k][c]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert_relative_eq!(
                    d,
                    params.bone_lengths[3 * f + k],
                    epsilon = 1e-9,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn fkine_is_bitwise_pure() {
        let topo = KinematicTopology::default();
        let params = reference_params();
        let a = fkine(&params, &topo).unwrap();
        let b = fkine(&params, &topo).unwrap();
        for (pa, pb) in a.positions().iter().zip(b.positions().iter()) {
            for k in 0..3 {
                assert_eq!(pa[k].to_bits(), pb[k].to_bits());
            }
        }
    }

    #[test]
    fn hand_scale_reference_and_linearity() {
        let params = reference_params();
        let reference = crate::synth::HandShapeProfile::reference().length_sum_mm();
        assert_relative_eq!(hand_scale(&params, reference).unwrap(), 1.0, epsilon = 1e-12);

        let mut doubled = params.clone();
        for r in doubled.bone_lengths.iter_mut() {
            *r *= 2.0;
        }
        for v in doubled.finger_vectors.iter_mut() {
            for c in v.iter_mut() {
                *c *= 2.0;
            }
        }
        for c in doubled.wrist_vector.iter_mut() {
            *c *= 2.0;
        }
        assert_relative_eq!(hand_scale(&doubled, reference).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn hand_scale_matches_flat_summation_oracle() {
        let params = reference_params();
        // Independent oracle: sum the 20 length terms one by one.
        let mut oracle = 0.0;
        for r in params.bone_lengths {
            oracle += r;
        }
        for v in [
            params.finger_vectors[0],
            params.finger_vectors[1],
            params.finger_vectors[2],
            params.finger_vectors[3],
            params.wrist_vector,
        ] {
            oracle += (v[0].powi(2) + v[1].powi(2) + v[2].powi(2)).sqrt();
        }
        let reference = 412.7;
        let got = hand_scale(&params, reference).unwrap();
        assert_relative_eq!(got, oracle / reference, max_relative = 1e-12);
    }

    #[test]
    fn hand_scale_rejects_bad_reference() {
        let params = reference_params();
        assert!(hand_scale(&params, 0.0).is_err());
        assert!(hand_scale(&params, -5.0).is_err());
    }

    #[test]
    fn middle_finger_tip_reaches_expected_point_under_pure_flexion() {
        // 90 degrees of MCP flexion on the default table folds the middle
        // finger from +x toward +z.
        let topo = KinematicTopology::default();
        let mut params = reference_params();
        params.base_translation = [0.0; 3];
        params.base_orientation = [0.0; 3];
        params.joint_angles = [0.0; 25];
        let f = Finger::Middle.index();
        params.joint_angles[f * 5 + 2] = FRAC_PI_2;
        let joints = fkine(&params, &topo).unwrap();
        let tip = joints.finger(Finger::Middle, FingerJoint::Tip);
        let total: f64 = params.bone_lengths[3 * f..3 * f + 3].iter().sum();
        // Flexion rotates about the local -y axis after the two side rows.
        assert_relative_eq!(tip[0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(tip[1], 0.0, epsilon = 1e-9);
        assert_relative_eq!(tip[2].abs(), total, epsilon = 1e-9);
    }
}
