use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Table, TabularError};
use crate::rng::{derive_seed, rng_for};

/// How validation splits are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub n_splits: usize,
    pub valid_fraction: f64,
    pub stratified: bool,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan { seed: 0, n_splits: 10, valid_fraction: 0.3, stratified: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub splits: Vec<Split>,
    /// Set when stratification was requested but some class had fewer rows
    /// than `n_splits`, so plain shuffling was used instead.
    pub stratification_downgraded: bool,
}

/// Seed used for split `index` of a plan seeded with `seed`.
pub fn split_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64)
}

pub fn make_splits(table: &Table, plan: &SplitPlan) -> Result<Splits, TabularError> {
    split_labels(&table.labels(), table.class_count(), plan)
}

pub(crate) fn split_labels(labels: &[usize], class_count: usize, plan: &SplitPlan) -> Result<Splits, TabularError> {
    let n = labels.len();
    if plan.n_splits == 0 {
        return Err(TabularError::Split("n_splits must be at least 1".into()));
    }
    if !(plan.valid_fraction > 0.0 && plan.valid_fraction < 1.0) {
        return Err(TabularError::Split(format!("valid_fraction {} outside (0, 1)", plan.valid_fraction)));
    }
    if n < 2 {
        return Err(TabularError::Split(format!("need at least 2 rows to split, found {n}")));
    }
    let n_valid = ((plan.valid_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count.max(1)];
    for (i, &y) in labels.iter().enumerate() {
        if y >= by_class.len() {
            by_class.resize(y + 1, Vec::new());
        }
        by_class[y].push(i);
    }
    let present: Vec<&Vec<usize>> = by_class.iter().filter(|c| !c.is_empty()).collect();
    let downgraded = plan.stratified && present.iter().any(|c| c.len() < plan.n_splits);
    let stratify = plan.stratified && !downgraded;
    let quotas = stratify.then(|| class_quotas(&by_class, plan.valid_fraction, n_valid));

    let splits = (0..plan.n_splits)
        .map(|s| {
            let mut rng = rng_for(plan.seed, s as u64);
            let mut valid = Vec::with_capacity(n_valid);
            match &quotas {
                Some(quotas) => {
                    for (members, &q) in by_class.iter().zip(quotas) {
                        let mut members = members.clone();
                        members.shuffle(&mut rng);
                        valid.extend_from_slice(&members[..q]);
                    }
                }
                None => {
                    let mut all: Vec<usize> = (0..n).collect();
                    all.shuffle(&mut rng);
                    valid.extend_from_slice(&all[..n_valid]);
                }
            }
            let mut in_valid = vec![false; n];
            for &i in &valid {
                in_valid[i] = true;
            }
            valid.sort_unstable();
            let train = (0..n).filter(|&i| !in_valid[i]).collect();
            Split { train, valid }
        })
        .collect();
    Ok(Splits { splits, stratification_downgraded: downgraded })
}

/// Per-class validation counts: floor of the proportional share, with the
/// remainder going to the classes with the largest fractional parts.
fn class_quotas(by_class: &[Vec<usize>], fraction: f64, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = by_class.iter().map(|c| fraction * c.len() as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..by_class.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut remaining = total.saturating_sub(assigned);
    for &c in order.iter().cycle().take(order.len() * 2) {
        if remaining == 0 {
            break;
        }
        if quotas[c] < by_class[c].len() {
            quotas[c] += 1;
            remaining -= 1;
        }
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(n_splits: usize, frac: f64, stratified: bool, seed: u64) -> SplitPlan {
        SplitPlan { seed, n_splits, valid_fraction: frac, stratified }
    }

    #[test]
    fn cardinalities_and_disjointness() {
        let labels = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let s = split_labels(&labels, 2, &plan(2, 0.3, false, 7)).unwrap();
        assert_eq!(s.splits.len(), 2);
        for sp in &s.splits {
            assert_eq!(sp.train.len(), 7);
            assert_eq!(sp.valid.len(), 3);
            assert!(sp.valid.iter().all(|v| !sp.train.contains(v)));
        }
    }

    #[test]
    fn deterministic() {
        let labels: Vec<usize> = (0..50).map(|i| i % 3).collect();
        let a = split_labels(&labels, 3, &plan(4, 0.3, true, 11)).unwrap();
        let b = split_labels(&labels, 3, &plan(4, 0.3, true, 11)).unwrap();
        assert_eq!(a, b);
        let c = split_labels(&labels, 3, &plan(4, 0.3, true, 12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stratified_six_four() {
        let labels = [vec![0; 6], vec![1; 4]].concat();
        let s = split_labels(&labels, 2, &plan(3, 0.5, true, 1)).unwrap();
        assert!(!s.stratification_downgraded);
        for sp in &s.splits {
            let a = sp.valid.iter().filter(|&&i| labels[i] == 0).count();
            let b = sp.valid.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!((a, b), (3, 2));
        }
    }

    #[test]
    fn rare_class_downgrades() {
        let labels = [vec![0; 20], vec![1; 2]].concat();
        let s = split_labels(&labels, 2, &plan(5, 0.3, true, 1)).unwrap();
        assert!(s.stratification_downgraded);
        assert_eq!(s.splits[0].valid.len(), 7);
    }

    #[test]
    fn invalid_plans() {
        assert!(split_labels(&[0, 1], 2, &plan(0, 0.3, false, 0)).is_err());
        assert!(split_labels(&[0, 1], 2, &plan(1, 1.0, false, 0)).is_err());
        assert!(split_labels(&[0], 2, &plan(1, 0.5, false, 0)).is_err());
    }
}
