//! Membership of a discrete probability in the credal set of a possibility measure.

use crate::error::{Error, Result};

/// Tolerance for sums of probabilities.
pub const PROB_SUM_TOL: f64 = 1e-12;
const BINDING_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCredalInstance {
    pub atoms: Vec<String>,
    pub probs: Vec<f64>,
    pub contour_values: Vec<f64>,
}

impl DiscreteCredalInstance {
    pub fn new(atoms: Vec<String>, probs: Vec<f64>, contour_values: Vec<f64>) -> Result<Self> {
        if atoms.len() != probs.len() || atoms.len() != contour_values.len() || atoms.is_empty() {
            return Err(Error::Argument("atoms, probs and contour values must have equal nonzero length".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Argument("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Argument(format!("probabilities sum to {total}, not 1")));
        }
        if contour_values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Argument("contour values must lie in [0,1]".into()));
        }
        let top = contour_values.iter().copied().fold(0.0, f64::max);
        if top != 1.0 {
            return Err(Error::Argument(format!("contour maximum is {top}, not 1")));
        }
        Ok(DiscreteCredalInstance { atoms, probs, contour_values })
    }
}

/// The α-cut at which `P(cut) >= 1 - α` failed.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalWitness {
    pub alpha: f64,
    pub cut: Vec<String>,
    pub cut_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredalVerdict {
    pub member: bool,
    pub witness: Option<CredalWitness>,
}

/// Checks `P(C^α) >= 1 - α` at every binding level.
///
/// The constraint binds just above each distinct contour value `v`, where the
/// cut is `{π > v}`; the level `0` contributes the whole space.
pub fn credal_membership(instance: &DiscreteCredalInstance) -> CredalVerdict {
    let mut levels: Vec<f64> = instance.contour_values.clone();
    levels.push(0.0);
    // highest level first, so the witness is the smallest violated cut
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    for &v in &levels {
        if v >= 1.0 {
            continue;
        }
        let mass: f64 = instance
            .contour_values
            .iter()
            .zip(&instance.probs)
            .filter(|(&c, _)| c > v)
            .map(|(_, &p)| p)
            .sum();
        if mass < 1.0 - v - BINDING_EPS {
            let cut = instance
                .contour_values
                .iter()
                .zip(&instance.atoms)
                .filter(|(&c, _)| c > v)
                .map(|(_, a)| a.clone())
                .collect();
            return CredalVerdict {
                member: false,
                witness: Some(CredalWitness { alpha: (v + BINDING_EPS).min(1.0), cut, cut_probability: mass }),
            };
        }
    }
    CredalVerdict { member: true, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc(probs: [f64; 3]) -> DiscreteCredalInstance {
        DiscreteCredalInstance::new(
            vec!["a".into(), "b".into(), "c".into()],
            probs.to_vec(),
            vec![1.0, 0.6, 0.3],
        )
        .unwrap()
    }

    #[test]
    fn dominated_probability_is_member() {
        assert!(credal_membership(&abc([0.5, 0.3, 0.2])).member);
    }

    #[test]
    fn violation_reports_singleton_cut() {
        let v = credal_membership(&abc([0.2, 0.3, 0.5]));
        assert!(!v.member);
        let w = v.witness.unwrap();
        assert_eq!(w.cut, vec!["a".to_string()]);
        assert!(w.alpha > 0.6 && w.alpha < 0.6 + 1e-9);
        assert!((w.cut_probability - 0.2).abs() < 1e-15);
    }

    #[test]
    fn point_mass_on_mode_is_member() {
        assert!(credal_membership(&abc([1.0, 0.0, 0.0])).member);
    }

    #[test]
    fn invalid_instances_are_rejected() {
        let atoms = vec!["a".to_string(), "b".into()];
        assert!(DiscreteCredalInstance::new(atoms.clone(), vec![0.5, 0.6], vec![1.0, 0.2]).is_err());
        assert!(DiscreteCredalInstance::new(atoms.clone(), vec![0.5, 0.5], vec![0.9, 0.2]).is_err());
        assert!(DiscreteCredalInstance::new(atoms, vec![0.5], vec![1.0]).is_err());
    }
}
