//! Scalar comparison measures.
//!
//! Weight-space similarity (cosine), function-space similarity
//! (label disagreement), accuracy, Brier score, and the ensemble
//! Jensen-Shannon spread. All reductions accumulate in `f64`. Prediction
//! matrices can only be compared when their example-set digests match.

use alloc::vec::Vec;
// Inherent float methods shadow these under std; libm backs them under no_std.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::digest::Digest;
use crate::error::{CoreError, Result};
use crate::linalg;
use crate::net::{self, PredictionMatrix, WeightVector};

/// One point in the diversity-accuracy plane.
///
/// `normalized_diversity` is `raw_disagreement / (1 - accuracy)` and is
/// absent at accuracy 1, where the normalization is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityPoint {
    pub accuracy: f64,
    pub raw_disagreement: f64,
    pub normalized_diversity: Option<f64>,
    pub method: alloc::string::String,
    pub reference_digest: Digest,
}

/// Cosine of the angle between two weight vectors.
pub fn cosine_similarity(a: &WeightVector, b: &WeightVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CoreError::Shape {
            context: "cosine operands",
            expected: a.len(),
            got: b.len(),
        });
    }
    let na = linalg::norm(a.values());
    let nb = linalg::norm(b.values());
    if na == 0.0 || nb == 0.0 {
        return Err(CoreError::invalid(
            "cosine similarity of a zero weight vector",
        ));
    }
    Ok(linalg::dot(a.values(), b.values()) / (na * nb))
}

fn check_comparable(a: &PredictionMatrix, b: &PredictionMatrix) -> Result<()> {
    if a.rows() != b.rows() || a.classes() != b.classes() {
        return Err(CoreError::Shape {
            context: "prediction matrices",
            expected: a.rows() * a.classes(),
            got: b.rows() * b.classes(),
        });
    }
    if a.example_set_digest() != b.example_set_digest() {
        return Err(CoreError::DigestMismatch {
            context: "prediction matrices come from different example sets",
        });
    }
    Ok(())
}

/// Fraction of examples whose argmax labels differ.
pub fn disagreement(a: &PredictionMatrix, b: &PredictionMatrix) -> Result<f64> {
    check_comparable(a, b)?;
    let la = net::predict_labels(a);
    let lb = net::predict_labels(b);
    let differing = la.iter().zip(lb.iter()).filter(|(x, y)| x != y).count();
    Ok(differing as f64 / la.len() as f64)
}

/// Fraction of examples whose argmax label matches the truth.
pub fn accuracy(pm: &PredictionMatrix, labels: &[u32]) -> Result<f64> {
    if labels.len() != pm.rows() {
        return Err(CoreError::Shape {
            context: "accuracy labels",
            expected: pm.rows(),
            got: labels.len(),
        });
    }
    let predicted = net::predict_labels(pm);
    let correct = predicted
        .iter()
        .zip(labels.iter())
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Multiclass Brier score: mean over examples of the summed squared error
/// against the one-hot label.
pub fn brier(pm: &PredictionMatrix, labels: &[u32]) -> Result<f64> {
    if labels.len() != pm.rows() {
        return Err(CoreError::Shape {
            context: "brier labels",
            expected: pm.rows(),
            got: labels.len(),
        });
    }
    let mut total = 0.0f64;
    for (i, &label) in labels.iter().enumerate() {
        for (c, &p) in pm.row(i).iter().enumerate() {
            let target = if c == label as usize { 1.0 } else { 0.0 };
            let diff = f64::from(p) - target;
            total += diff * diff;
        }
    }
    Ok(total / labels.len() as f64)
}

/// Sum over members of `KL(member || mean)`, averaged over examples,
/// natural log. This is the paper-exact form without a `1/M` factor;
/// [`js_spread_normalized`] divides it out for cross-M comparisons.
pub fn js_spread(members: &[&PredictionMatrix]) -> Result<f64> {
    if members.len() < 2 {
        return Err(CoreError::invalid("JS spread needs at least 2 members"));
    }
    for m in &members[1..] {
        check_comparable(members[0], m)?;
    }
    let rows = members[0].rows();
    let classes = members[0].classes();
    let inv_m = 1.0 / members.len() as f64;
    let mut total = 0.0f64;
    let mut mean = alloc::vec![0.0f64; classes];
    for i in 0..rows {
        for v in mean.iter_mut() {
            *v = 0.0;
        }
        for m in members {
            for (mv, &p) in mean.iter_mut().zip(m.row(i).iter()) {
                *mv += f64::from(p) * inv_m;
            }
        }
        for m in members {
            let mut kl = 0.0f64;
            for (&p, &mv) in m.row(i).iter().zip(mean.iter()) {
                let p = f64::from(p);
                // 0 log 0 := 0; mean >= p/M so the ratio is finite when p > 0.
                if p > 0.0 {
                    kl += p * (p / mv).ln();
                }
            }
            total += kl;
        }
    }
    Ok(total / rows as f64)
}

/// [`js_spread`] divided by the member count.
pub fn js_spread_normalized(members: &[&PredictionMatrix]) -> Result<f64> {
    Ok(js_spread(members)? / members.len() as f64)
}

/// Scores a sampled function against a reference, yielding a point for the
/// diversity-accuracy plane.
pub fn diversity_point(
    pm_sample: &PredictionMatrix,
    pm_reference: &PredictionMatrix,
    labels: &[u32],
    method: &str,
) -> Result<DiversityPoint> {
    let a = accuracy(pm_sample, labels)?;
    let d = disagreement(pm_sample, pm_reference)?;
    let normalized = if a < 1.0 { Some(d / (1.0 - a)) } else { None };
    Ok(DiversityPoint {
        accuracy: a,
        raw_disagreement: d,
        normalized_diversity: normalized,
        method: alloc::string::String::from(method),
        reference_digest: pm_reference.example_set_digest(),
    })
}

/// Arithmetic mean of the members' probability rows.
pub fn ensemble_average(members: &[&PredictionMatrix]) -> Result<PredictionMatrix> {
    if members.is_empty() {
        return Err(CoreError::invalid("ensemble average of zero members"));
    }
    for m in &members[1..] {
        check_comparable(members[0], m)?;
    }
    let rows = members[0].rows();
    let classes = members[0].classes();
    let inv_m = 1.0 / members.len() as f64;
    let mut probs = alloc::vec![0.0f64; rows * classes];
    for m in members {
        for (acc, &p) in probs.iter_mut().zip(m.probs().iter()) {
            *acc += f64::from(p) * inv_m;
        }
    }
    PredictionMatrix::new(
        probs.iter().map(|&p| p as f32).collect(),
        rows,
        classes,
        members[0].example_set_digest(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digest::Digest;
    use crate::net::{Activation, InitScheme, NetworkSpec};

    fn pm(rows: &[&[f32]]) -> PredictionMatrix {
        pm_tagged(rows, Digest([7; 16]))
    }

    fn pm_tagged(rows: &[&[f32]], digest: Digest) -> PredictionMatrix {
        let classes = rows[0].len();
        let probs: Vec<f32> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        PredictionMatrix::new(probs, rows.len(), classes, digest).unwrap()
    }

    fn wv(values: &[f32]) -> WeightVector {
        // 1-in, C-out single layer has (1+1)*C params; use C=2 -> 4, so pad.
        let spec = NetworkSpec::new(
            alloc::vec![1, values.len() / 2],
            Activation::Relu,
            InitScheme::HeNormal,
        )
        .unwrap();
        WeightVector::from_values(values.to_vec(), &spec).unwrap()
    }

    #[test]
    fn cosine_basics() {
        let a = wv(&[1.0, 1.0, 0.0, 0.0]);
        let b = wv(&[1.0, 0.0, 0.0, 0.0]);
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let mut neg = a.clone();
        for v in neg.values_mut() {
            *v = -*v;
        }
        assert!((cosine_similarity(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        // ((1,1),(1,0)) -> 1/sqrt(2).
        let c = cosine_similarity(&a, &b).unwrap();
        assert!((c - 0.70710678).abs() < 1e-8, "{c}");
    }

    #[test]
    fn cosine_rejects_zero_vector() {
        let a = wv(&[1.0, 1.0, 0.0, 0.0]);
        let z = wv(&[0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            cosine_similarity(&a, &z),
            Err(CoreError::Invalid { .. })
        ));
    }

    #[test]
    fn disagreement_counts_differing_argmax_rows() {
        let a = pm(&[
            &[0.9, 0.1],
            &[0.9, 0.1],
            &[0.9, 0.1],
            &[0.9, 0.1],
            &[0.9, 0.1],
        ]);
        let b = pm(&[
            &[0.1, 0.9],
            &[0.1, 0.9],
            &[0.1, 0.9],
            &[0.1, 0.9],
            &[0.9, 0.1],
        ]);
        assert_eq!(disagreement(&a, &a).unwrap(), 0.0);
        assert!((disagreement(&a, &b).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(
            disagreement(&a, &b).unwrap(),
            disagreement(&b, &a).unwrap()
        );
    }

    #[test]
    fn disagreement_requires_matching_example_sets() {
        let a = pm_tagged(&[&[1.0, 0.0]], Digest([1; 16]));
        let b = pm_tagged(&[&[1.0, 0.0]], Digest([2; 16]));
        assert!(matches!(
            disagreement(&a, &b),
            Err(CoreError::DigestMismatch { .. })
        ));
    }

    #[test]
    fn accuracy_counts() {
        let m = pm(&[&[0.9, 0.1], &[0.2, 0.8], &[0.6, 0.4], &[0.3, 0.7]]);
        assert_eq!(accuracy(&m, &[0, 1, 0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&m, &[1, 0, 1, 0]).unwrap(), 0.0);
        assert_eq!(accuracy(&m, &[0, 1, 1, 0]).unwrap(), 0.5);
    }

    #[test]
    fn brier_spot_values() {
        let onehot = pm(&[&[1.0, 0.0]]);
        assert_eq!(brier(&onehot, &[0]).unwrap(), 0.0);
        // Confidently wrong: two coordinates off by one.
        assert_eq!(brier(&onehot, &[1]).unwrap(), 2.0);
        let uniform10 = pm(&[&[0.1; 10]]);
        assert!((brier(&uniform10, &[3]).unwrap() - 0.90).abs() < 1e-6);
    }

    #[test]
    fn brier_uniform_closed_form_across_class_counts() {
        for classes in [2usize, 5, 10] {
            let row: Vec<f32> = alloc::vec![1.0 / classes as f32; classes];
            let m = pm(&[&row]);
            let expected =
                (1.0 - 1.0 / classes as f64).powi(2) + (classes as f64 - 1.0) / (classes as f64).powi(2);
            assert!((brier(&m, &[0]).unwrap() - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn js_spread_cases() {
        let a = pm(&[&[1.0, 0.0]]);
        let b = pm(&[&[0.0, 1.0]]);
        assert!(js_spread(&[&a, &a]).unwrap().abs() < 1e-12);
        let v = js_spread(&[&a, &b]).unwrap();
        assert!((v - 2.0 * core::f64::consts::LN_2).abs() < 1e-9, "{v}");
        // Permutation invariance.
        assert_eq!(js_spread(&[&a, &b]).unwrap(), js_spread(&[&b, &a]).unwrap());
        assert!((js_spread_normalized(&[&a, &b]).unwrap() - v / 2.0).abs() < 1e-12);
    }

    #[test]
    fn diversity_point_guards_perfect_accuracy() {
        let reference = pm(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let p = diversity_point(&reference, &reference, &[0, 1], "self").unwrap();
        assert_eq!(p.accuracy, 1.0);
        assert_eq!(p.raw_disagreement, 0.0);
        assert!(p.normalized_diversity.is_none());
        let p = diversity_point(&reference, &reference, &[1, 1], "self").unwrap();
        assert_eq!(p.accuracy, 0.5);
        assert_eq!(p.normalized_diversity, Some(0.0));
    }

    #[test]
    fn ensemble_average_preserves_rows() {
        let a = pm(&[&[1.0, 0.0]]);
        let b = pm(&[&[0.0, 1.0]]);
        let single = ensemble_average(&[&a]).unwrap();
        assert_eq!(single, a);
        let avg = ensemble_average(&[&a, &b]).unwrap();
        assert_eq!(avg.row(0), &[0.5, 0.5]);
    }
}
