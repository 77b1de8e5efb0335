//! Training losses, the joint-location evaluation metric, and joint-limit
//! violation statistics.
//!
//! Angles are radians everywhere inside the crate; the violation statistics
//! convert to degrees only at this reporting boundary. Batch reductions are
//! plain left-to-right sums over the given order, so results do not depend on
//! any internal parallelism.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand::{JointSet, ANGLE_COUNT, JOINT_COUNT};

/// Frequency and severity of joint-angle limit violations.
///
/// `violated_fraction` counts violating angles over all angles of all
/// samples (`25 * batch` denominators). Both averages are absolute
/// overshoots in degrees: `avg_violation_given_violation_deg` averages over
/// violating angles only, `avg_violation_total_deg` over all angles (zeros
/// included). An empty violation set reports zero for both by convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationStats {
    pub violated_fraction: f64,
    pub avg_violation_given_violation_deg: f64,
    pub avg_violation_total_deg: f64,
}

/// Flat evaluation report, serializable as JSON.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricsReport {
    pub e_joint_mm: f64,
    pub violated_fraction: f64,
    pub avg_violation_deg: f64,
    pub avg_violation_total_deg: f64,
}

impl MetricsReport {
    pub fn new(e_joint_mm: f64, stats: ViolationStats) -> Self {
        MetricsReport {
            e_joint_mm,
            violated_fraction: stats.violated_fraction,
            avg_violation_deg: stats.avg_violation_given_violation_deg,
            avg_violation_total_deg: stats.avg_violation_total_deg,
        }
    }
}

fn check_batches(estimates: &[JointSet], targets: &[JointSet]) -> Result<()> {
    if estimates.len() != targets.len() {
        return Err(Error::invalid(format!(
            "batch size mismatch: {} estimates vs {} targets",
            estimates.len(),
            targets.len()
        )));
    }
    Ok(())
}

/// Squared Euclidean joint position loss:
/// `1/2 * sum_batch sum_joints ||j_est - j_gt||^2` (mm^2).
pub fn joint_loss(estimates: &[JointSet], targets: &[JointSet]) -> Result<f64> {
    check_batches(estimates, targets)?;
    let mut sum = 0.0;
    for (est, tgt) in estimates.iter().zip(targets.iter()) {
        for (a, b) in est.positions().iter().zip(tgt.positions().iter()) {
            for c in 0..3 {
                let d = a[c] - b[c];
                sum += d * d;
            }
        }
    }
    Ok(0.5 * sum)
}

/// Quadratic limit penalty:
/// `sum_batch (||min(theta - low, 0)||^2 + ||max(theta - up, 0)||^2)`.
pub fn constraint_loss(
    angles: &[[f64; ANGLE_COUNT]],
    limits: (&[f64; ANGLE_COUNT], &[f64; ANGLE_COUNT]),
) -> Result<f64> {
    let (low, up) = limits;
    if low.iter().zip(up.iter()).any(|(l, u)| !(l < u)) {
        return Err(Error::invalid("angle limits must satisfy low < up"));
    }
    let mut sum = 0.0;
    for sample in angles {
        for a in 0..ANGLE_COUNT {
            let under = (sample[a] - low[a]).min(0.0);
            let over = (sample[a] - up[a]).max(0.0);
            sum += under * under + over * over;
        }
    }
    Ok(sum)
}

/// Mean per-joint 3D location error in millimeters: the average over all
/// images and joints of the Euclidean distance between estimate and target.
pub fn e_joint(estimates: &[JointSet], targets: &[JointSet]) -> Result<f64> {
    check_batches(estimates, targets)?;
    if estimates.is_empty() {
        return Err(Error::invalid("e_joint needs a non-empty batch"));
    }
    let mut sum = 0.0;
    for (est, tgt) in estimates.iter().zip(targets.iter()) {
        for (a, b) in est.positions().iter().zip(tgt.positions().iter()) {
            let mut sq = 0.0;
            for c in 0..3 {
                let d = a[c] - b[c];
                sq += d * d;
            }
            sum += sq.sqrt();
        }
    }
    Ok(sum / (estimates.len() * JOINT_COUNT) as f64)
}

/// Joint-limit violation statistics over a batch of angle vectors.
pub fn violation_stats(
    angles: &[[f64; ANGLE_COUNT]],
    limits: (&[f64; ANGLE_COUNT], &[f64; ANGLE_COUNT]),
) -> Result<ViolationStats> {
    let (low, up) = limits;
    if low.iter().zip(up.iter()).any(|(l, u)| !(l < u)) {
        return Err(Error::invalid("angle limits must satisfy low < up"));
    }
    if angles.is_empty() {
        return Err(Error::invalid("violation_stats needs a non-empty batch"));
    }
    let mut violated = 0usize;
    let mut overshoot_sum_rad = 0.0;
    let total = angles.len() * ANGLE_COUNT;
    for sample in angles {
        for a in 0..ANGLE_COUNT {
            let overshoot = if sample[a] < low[a] {
                low[a] - sample[a]
            } else if sample[a] > up[a] {
                sample[a] - up[a]
            } else {
                0.0
            };
            if overshoot > 0.0 {
                violated += 1;
                overshoot_sum_rad += overshoot;
            }
        }
    }
    let to_deg = 180.0 / std::f64::consts::PI;
    Ok(ViolationStats {
        violated_fraction: violated as f64 / total as f64,
        avg_violation_given_violation_deg: if violated == 0 {
            0.0
        } else {
            overshoot_sum_rad * to_deg / violated as f64
        },
        avg_violation_total_deg: overshoot_sum_rad * to_deg / total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::JointLabel;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn joints_at(offset: f64) -> JointSet {
        let mut positions = [[0.0; 3]; JOINT_COUNT];
        for (i, p) in positions.iter_mut().enumerate() {
            *p = [i as f64 + offset, 2.0 * i as f64, -(i as f64)];
        }
        JointSet::from_positions(positions).unwrap()
    }

    fn default_limits() -> ([f64; ANGLE_COUNT], [f64; ANGLE_COUNT]) {
        crate::hand::KinematicTopology::default().angle_limits()
    }

    #[test]
    fn joint_loss_zero_and_single_term() {
        let a = joints_at(0.0);
        assert_eq!(joint_loss(&[a.clone()], &[a.clone()]).unwrap(), 0.0);

        let mut b = a.clone();
        let mut p = b.get(JointLabel::Wrist);
        p[0] += 3.0;
        p[1] += 4.0;
        b.set(JointLabel::Wrist, p);
        assert_relative_eq!(joint_loss(&[b], &[a]).unwrap(), 12.5, epsilon = 1e-12);
    }

    #[test]
    fn joint_loss_matches_naive_double_loop() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let batch: Vec<JointSet> = (0..7).map(|i| joints_at(i as f64 * 0.37)).collect();
        let targets: Vec<JointSet> = (0..7)
            .map(|_| {
                joints_at(0.0).map(|p| {
                    [
                        p[0] + rng.random_range(-1.0..1.0),
                        p[1] + rng.random_range(-1.0..1.0),
                        p[2] + rng.random_range(-1.0..1.0),
                    ]
                })
            })
            .collect();
        let got = joint_loss(&batch, &targets).unwrap();
        let mut oracle = 0.0;
        for i in 0..batch.len() {
            for j in 0..JOINT_COUNT {
                let a = batch[i].positions()[j];
                let b = targets[i].positions()[j];
                oracle += 0.5
                    * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2));
            }
        }
        assert_relative_eq!(got, oracle, max_relative = 1e-12);
    }

    #[test]
    fn joint_loss_rejects_mismatched_batches() {
        let a = joints_at(0.0);
        assert!(joint_loss(&[a.clone(), a.clone()], &[a]).is_err());
    }

    #[test]
    fn constraint_loss_cases() {
        let (low, up) = default_limits();
        let inside = [0.05; ANGLE_COUNT];
        assert_eq!(constraint_loss(&[inside], (&low, &up)).unwrap(), 0.0);

        let mut over = inside;
        over[4] = up[4] + 0.1;
        let loss = constraint_loss(&[over], (&low, &up)).unwrap();
        assert_relative_eq!(loss, 0.01, epsilon = 1e-12);

        // Batch additivity.
        let two = constraint_loss(&[over, over], (&low, &up)).unwrap();
        assert_relative_eq!(two, 2.0 * loss, epsilon = 1e-15);
    }

    #[test]
    fn e_joint_cases() {
        let a = joints_at(0.0);
        assert_eq!(e_joint(&[a.clone()], &[a.clone()]).unwrap(), 0.0);

        let mut b = a.clone();
        let mut p = b.get(JointLabel::Wrist);
        p[2] += 5.0;
        b.set(JointLabel::Wrist, p);
        assert_relative_eq!(
            e_joint(&[b], &[a.clone()]).unwrap(),
            5.0 / 21.0,
            epsilon = 1e-12
        );
        assert!(e_joint(&[], &[]).is_err());
    }

    #[test]
    fn e_joint_matches_naive_double_loop_and_permutation_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let batch: Vec<JointSet> = (0..5)
            .map(|_| joints_at(rng.random_range(-2.0..2.0)))
            .collect();
        let targets: Vec<JointSet> = (0..5)
            .map(|_| joints_at(rng.random_range(-2.0..2.0)))
            .collect();
        let got = e_joint(&batch, &targets).unwrap();
        let mut oracle = 0.0;
        for i in 0..batch.len() {
            for j in 0..JOINT_COUNT {
                let a = batch[i].positions()[j];
                let b = targets[i].positions()[j];
                oracle += ((a[0] - b[0]).powi(2)
                    + (a[1] - b[1]).powi(2)
                    + (a[2] - b[2]).powi(2))
                .sqrt();
            }
        }
        oracle /= (batch.len() * JOINT_COUNT) as f64;
        assert_relative_eq!(got, oracle, max_relative = 1e-12);

        // Common permutation of image order.
        let perm = [3usize, 0, 4, 1, 2];
        let batch_p: Vec<JointSet> = perm.iter().map(|&i| batch[i].clone()).collect();
        let targets_p: Vec<JointSet> = perm.iter().map(|&i| targets[i].clone()).collect();
        assert_relative_eq!(
            e_joint(&batch_p, &targets_p).unwrap(),
            got,
            max_relative = 1e-12
        );
    }

    #[test]
    fn violation_stats_cases() {
        let (low, up) = default_limits();
        let inside = [0.05; ANGLE_COUNT];
        let s = violation_stats(&[inside], (&low, &up)).unwrap();
        assert_eq!(
            s,
            ViolationStats {
                violated_fraction: 0.0,
                avg_violation_given_violation_deg: 0.0,
                avg_violation_total_deg: 0.0
            }
        );

        // One of 25 angles over by exactly 10 degrees.
        let mut over = inside;
        over[7] = up[7] + 10.0_f64.to_radians();
        let s = violation_stats(&[over], (&low, &up)).unwrap();
        assert_relative_eq!(s.violated_fraction, 0.04, epsilon = 1e-12);
        assert_relative_eq!(s.avg_violation_given_violation_deg, 10.0, epsilon = 1e-9);
        assert_relative_eq!(s.avg_violation_total_deg, 0.4, epsilon = 1e-9);
    }

    #[test]
    fn violation_stats_matches_naive_loop() {
        let (low, up) = default_limits();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let batch: Vec<[f64; ANGLE_COUNT]> = (0..40)
            .map(|_| {
                let mut a = [0.0; ANGLE_COUNT];
                for v in a.iter_mut() {
                    *v = rng.random_range(-1.0..2.0);
                }
                a
            })
            .collect();
        let got = violation_stats(&batch, (&low, &up)).unwrap();

        let mut count = 0usize;
        let mut sum_deg = 0.0;
        for sample in &batch {
            for a in 0..ANGLE_COUNT {
                let v = sample[a];
                let over = if v < low[a] {
                    low[a] - v
                } else if v > up[a] {
                    v - up[a]
                } else {
                    0.0
                };
                if over > 0.0 {
                    count += 1;
                    sum_deg += over.to_degrees();
                }
            }
        }
        assert_eq!(
            got.violated_fraction,
            count as f64 / (batch.len() * ANGLE_COUNT) as f64
        );
        assert_relative_eq!(
            got.avg_violation_given_violation_deg,
            sum_deg / count as f64,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            got.avg_violation_total_deg,
            sum_deg / (batch.len() * ANGLE_COUNT) as f64,
            max_relative = 1e-12
        );
        assert!(got.avg_violation_total_deg <= got.avg_violation_given_violation_deg);
    }

    #[test]
    fn metrics_report_round_trips_as_json() {
        let report = MetricsReport {
            e_joint_mm: 12.5,
            violated_fraction: 0.04,
            avg_violation_deg: 10.0,
            avg_violation_total_deg: 0.4,
        };
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("e_joint_mm"));
        let back: MetricsReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.e_joint_mm, report.e_joint_mm);
    }
}
