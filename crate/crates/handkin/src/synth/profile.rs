//! Hand-shape profiles: the per-subject means and variances that synthetic
//! hands are drawn from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand::{HandParameters, BONE_COUNT};

/// Shape statistics of one synthetic subject plus the geometry used when
/// rendering it (capsule and palm-sphere radii).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HandShapeProfile {
    pub name: String,
    /// Mean bone lengths, finger-major T I M R P, mm.
    pub bone_means_mm: [f64; BONE_COUNT],
    /// Mean palm vectors thumb, index, ring, pinky, wrist, mm.
    pub vector_means_mm: [[f64; 3]; 5],
    /// Standard deviation applied per shape scalar when sampling, mm.
    pub shape_std_mm: f64,
    /// Capsule radius of finger bones when rendering, mm.
    pub bone_radius_mm: f64,
    /// Radius of the palm spheres when rendering, mm.
    pub palm_radius_mm: f64,
}

impl HandShapeProfile {
    /// The built-in average hand all defaults derive from.
    pub fn reference() -> Self {
        HandShapeProfile {
            name: "reference".to_string(),
            bone_means_mm: [
                40.0, 32.0, 25.0, // thumb
                42.0, 25.0, 20.0, // index
                45.0, 28.0, 22.0, // middle
                42.0, 26.0, 21.0, // ring
                33.0, 20.0, 18.0, // pinky
            ],
            vector_means_mm: [
                [-35.0, 30.0, -8.0], // thumb
                [0.0, 20.0, 0.0],    // index
                [-3.0, -20.0, 0.0],  // ring
                [-10.0, -38.0, 0.0], // pinky
                [-65.0, 0.0, 0.0],   // wrist
            ],
            shape_std_mm: 2.0,
            bone_radius_mm: 7.0,
            palm_radius_mm: 14.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bone_means_mm.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::invalid(format!(
                "profile {}: bone means must be positive",
                self.name
            )));
        }
        if !(self.shape_std_mm >= 0.0) {
            return Err(Error::invalid(format!(
                "profile {}: shape std must be non-negative",
                self.name
            )));
        }
        if !(self.bone_radius_mm > 0.0 && self.palm_radius_mm > 0.0) {
            return Err(Error::invalid(format!(
                "profile {}: render radii must be positive",
                self.name
            )));
        }
        Ok(())
    }

    /// Sum of the 20 mean lengths: 15 bones plus 5 palm-vector magnitudes.
    pub fn length_sum_mm(&self) -> f64 {
        let mut sum: f64 = self.bone_means_mm.iter().sum();
        for v in &self.vector_means_mm {
            sum += (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        }
        sum
    }

    /// Parameters of the mean hand of this profile: shape at the means,
    /// all joint angles zero, base at a nominal camera-facing pose.
    pub fn nominal_parameters(&self) -> HandParameters {
        HandParameters {
            base_translation: [0.0, 0.0, 420.0],
            base_orientation: [0.0; 3],
            finger_vectors: [
                self.vector_means_mm[0],
                self.vector_means_mm[1],
                self.vector_means_mm[2],
                self.vector_means_mm[3],
            ],
            wrist_vector: self.vector_means_mm[4],
            bone_lengths: self.bone_means_mm,
            joint_angles: [0.0; 25],
        }
    }

    /// A deterministic family of `count` distinct profiles derived from the
    /// reference hand: each member gets a global size factor plus a small
    /// per-length perturbation, both fixed by `seed`.
    pub fn family(count: usize, seed: u64) -> Vec<HandShapeProfile> {
        use rand::{Rng, SeedableRng};
        let reference = Self::reference();
        (0..count)
            .map(|i| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::derive_seed(
                    seed,
                    &format!("profile/{i}"),
                ));
                let global: f64 = rng.random_range(0.85..1.15);
                let mut p = reference.clone();
                p.name = format!("shape{i:02}");
                for r in p.bone_means_mm.iter_mut() {
                    let jitter: f64 = rng.random_range(0.95..1.05);
                    *r *= global * jitter;
                }
                for v in p.vector_means_mm.iter_mut() {
                    let jitter: f64 = rng.random_range(0.95..1.05);
                    for c in v.iter_mut() {
                        *c *= global * jitter;
                    }
                }
                p.bone_radius_mm *= global;
                p.palm_radius_mm *= global;
                p
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_profile_is_valid() {
        let p = HandShapeProfile::reference();
        p.validate().unwrap();
        assert!(p.length_sum_mm() > 400.0);
        p.nominal_parameters().validate().unwrap();
    }

    #[test]
    fn family_is_deterministic_and_distinct() {
        let a = HandShapeProfile::family(4, 7);
        let b = HandShapeProfile::family(4, 7);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.bone_means_mm, y.bone_means_mm);
        }
        assert_ne!(a[0].bone_means_mm, a[1].bone_means_mm);
        for p in &a {
            p.validate().unwrap();
        }
    }
}
