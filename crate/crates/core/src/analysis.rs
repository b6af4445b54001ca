//! Feature-label correlation ranking and local gene-ontology enrichment:
//! exact hypergeometric tail p-values with Benjamini-Hochberg correction.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub feature_name: String,
    pub r: f64,
}

/// Pearson (point-biserial) correlation of each feature column with the 0/1
/// label, population moments. Constant columns get r = 0. Sorted by |r|
/// descending, ties by feature name ascending.
pub fn feature_label_correlation(data: &Dataset) -> Result<Vec<CorrelationRecord>> {
    if !data.y.contains(&0) || !data.y.contains(&1) {
        return Err(CoreError::DegenerateClass);
    }
    let n = data.n() as f64;
    let label_mean = data.y.iter().map(|&l| l as f64).sum::<f64>() / n;
    let label_var =
        data.y.iter().map(|&l| (l as f64 - label_mean) * (l as f64 - label_mean)).sum::<f64>() / n;

    let mut records = Vec::with_capacity(data.d());
    for j in 0..data.d() {
        let col = data.x.column(j);
        let mean = col.iter().sum::<f64>() / n;
        let mut var = 0.0;
        let mut cov = 0.0;
        for (&v, &l) in col.iter().zip(&data.y) {
            let dv = v - mean;
            var += dv * dv;
            cov += dv * (l as f64 - label_mean);
        }
        var /= n;
        cov /= n;
        let r = if var < 1e-24 { 0.0 } else { cov / libm::sqrt(var * label_var) };
        records.push(CorrelationRecord { feature_name: data.feature_names[j].clone(), r });
    }
    records.sort_by(|a, b| {
        b.r.abs().total_cmp(&a.r.abs()).then_with(|| a.feature_name.cmp(&b.feature_name))
    });
    Ok(records)
}

/// Upper tail P(X >= k) for X ~ Hypergeometric(N, K, n), computed in log space
/// from a log-factorial table with compensated summation.
pub fn hypergeom_tail(k: usize, big_k: usize, n: usize, big_n: usize) -> Result<f64> {
    if big_k > big_n || n > big_n {
        return Err(CoreError::InvalidCounts {
            reason: format!("K={big_k}, n={n} must not exceed N={big_n}"),
        });
    }
    if k > big_k.min(n) {
        return Err(CoreError::InvalidCounts {
            reason: format!("k={k} exceeds min(K={big_k}, n={n})"),
        });
    }

    if k == 0 {
        return Ok(1.0);
    }

    // ln i! for i in 0..=N
    let mut ln_fact = Vec::with_capacity(big_n + 1);
    ln_fact.push(0.0f64);
    for i in 1..=big_n {
        ln_fact.push(ln_fact[i - 1] + libm::log(i as f64));
    }
    let ln_choose = |n: usize, r: usize| ln_fact[n] - ln_fact[r] - ln_fact[n - r];

    let ln_denom = ln_choose(big_n, n);
    let upper = big_k.min(n);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64; // Kahan compensation
    for i in k..=upper {
        if n - i > big_n - big_k {
            continue; // impossible draw
        }
        let term =
            libm::exp(ln_choose(big_k, i) + ln_choose(big_n - big_k, n - i) - ln_denom);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum.min(1.0))
}

/// Benjamini-Hochberg step-up adjustment, returned in input order.
pub fn bh_adjust(p_values: &[f64]) -> Result<Vec<f64>> {
    for &p in p_values {
        if !(p > 0.0 && p <= 1.0) {
            return Err(CoreError::InvalidP { value: p });
        }
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));

    let mut adjusted = alloc::vec![0.0f64; m];
    let mut running_min = 1.0f64;
    for (rank, &idx) in order.iter().enumerate().rev() {
        let q = (p_values[idx] * m as f64 / (rank + 1) as f64).min(1.0);
        running_min = running_min.min(q);
        adjusted[idx] = running_min;
    }
    Ok(adjusted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoNamespace {
    Process,
    Function,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoAnnotation {
    pub term_id: String,
    pub term_name: String,
    pub namespace: GoNamespace,
    pub genes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentRecord {
    pub term_id: String,
    pub term_name: String,
    pub namespace: GoNamespace,
    /// overlap of the term with the target set
    pub k: usize,
    /// target size
    pub n: usize,
    /// term genes present in the background
    pub big_k: usize,
    /// background size
    pub big_n: usize,
    pub p_value: f64,
    pub q_value: f64,
}

/// Two-list enrichment: each term in the namespace is tested for
/// over-representation of its genes in the target relative to the background.
/// Terms annotating no background genes are skipped and excluded from the BH
/// family. Sorted by p ascending, ties by term id.
pub fn enrich(
    target: &[String],
    background: &[String],
    annotations: &[GoAnnotation],
    namespace: GoNamespace,
) -> Result<Vec<EnrichmentRecord>> {
    if target.is_empty() || background.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let mut bg_sorted: Vec<&String> = background.iter().collect();
    bg_sorted.sort();
    bg_sorted.dedup();
    let mut target_sorted: Vec<&String> = target.iter().collect();
    target_sorted.sort();
    target_sorted.dedup();
    if target_sorted.iter().any(|t| bg_sorted.binary_search(t).is_err()) {
        return Err(CoreError::TargetNotSubset);
    }

    let big_n = bg_sorted.len();
    let n = target_sorted.len();

    let mut records = Vec::new();
    for ann in annotations.iter().filter(|a| a.namespace == namespace) {
        let mut genes: Vec<&String> = ann.genes.iter().collect();
        genes.sort();
        genes.dedup();
        let big_k = genes.iter().filter(|g| bg_sorted.binary_search(g).is_ok()).count();
        if big_k == 0 {
            continue;
        }
        let k = genes.iter().filter(|g| target_sorted.binary_search(g).is_ok()).count();
        let p_value = hypergeom_tail(k, big_k, n, big_n)?;
        records.push(EnrichmentRecord {
            term_id: ann.term_id.clone(),
            term_name: ann.term_name.clone(),
            namespace: ann.namespace,
            k,
            n,
            big_k,
            big_n,
            p_value,
            q_value: 0.0,
        });
    }

    let p_values: Vec<f64> = records.iter().map(|r| r.p_value).collect();
    let q_values = bh_adjust(&p_values)?;
    for (r, q) in records.iter_mut().zip(q_values) {
        r.q_value = q;
    }
    records.sort_by(|a, b| a.p_value.total_cmp(&b.p_value).then_with(|| a.term_id.cmp(&b.term_id)));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use crate::matrix::Matrix;

    fn dataset(cols: &[(&str, Vec<f64>)], y: Vec<u8>) -> Dataset {
        let n = y.len();
        let ids = (0..n).map(|i| format!("g{i}")).collect();
        let names = cols.iter().map(|(name, _)| name.to_string()).collect();
        let rows: Vec<Vec<f64>> =
            (0..n).map(|i| cols.iter().map(|(_, v)| v[i]).collect()).collect();
        Dataset::new(ids, names, Matrix::from_rows(&rows).unwrap(), y).unwrap()
    }

    #[test]
    fn correlation_identity_and_constant() {
        let data = dataset(
            &[
                ("same_as_label", vec![0.0, 0.0, 1.0, 1.0]),
                ("constant", vec![3.0, 3.0, 3.0, 3.0]),
            ],
            vec![0, 0, 1, 1],
        );
        let recs = feature_label_correlation(&data).unwrap();
        assert_eq!(recs[0].feature_name, "same_as_label");
        assert!((recs[0].r - 1.0).abs() < 1e-12);
        assert_eq!(recs[1].r, 0.0);
    }

    #[test]
    fn correlation_hand_value() {
        let data = dataset(&[("f", vec![1.0, 2.0, 3.0, 4.0])], vec![0, 0, 1, 1]);
        let recs = feature_label_correlation(&data).unwrap();
        assert!((recs[0].r - 0.894427).abs() < 1e-6);
    }

    #[test]
    fn correlation_affine_invariance() {
        let base = vec![0.3, -1.2, 2.5, 0.9, -0.4, 1.8];
        let y = vec![0, 1, 1, 0, 0, 1];
        let d1 = dataset(&[("f", base.clone())], y.clone());
        let scaled: Vec<f64> = base.iter().map(|v| 3.5 * v + 10.0).collect();
        let d2 = dataset(&[("f", scaled)], y.clone());
        let negated: Vec<f64> = base.iter().map(|v| -v).collect();
        let d3 = dataset(&[("f", negated)], y);
        let r1 = feature_label_correlation(&d1).unwrap()[0].r;
        let r2 = feature_label_correlation(&d2).unwrap()[0].r;
        let r3 = feature_label_correlation(&d3).unwrap()[0].r;
        assert!((r1 - r2).abs() < 1e-12);
        assert!((r1 + r3).abs() < 1e-12);
    }

    #[test]
    fn correlation_needs_both_classes() {
        let data = dataset(&[("f", vec![1.0, 2.0])], vec![1, 1]);
        assert_eq!(feature_label_correlation(&data).unwrap_err(), CoreError::DegenerateClass);
    }

    #[test]
    fn hypergeom_certain_event() {
        assert_eq!(hypergeom_tail(0, 4, 5, 10).unwrap(), 1.0);
        assert_eq!(hypergeom_tail(0, 0, 3, 7).unwrap(), 1.0);
    }

    #[test]
    fn hypergeom_exact_fraction() {
        // C(4,3)C(6,2) + C(4,4)C(6,1) over C(10,5) = 66/252
        let p = hypergeom_tail(3, 4, 5, 10).unwrap();
        assert!((p - 66.0 / 252.0).abs() < 1e-14, "p = {p}");
    }

    #[test]
    fn hypergeom_invalid_counts() {
        assert!(matches!(hypergeom_tail(6, 4, 8, 10), Err(CoreError::InvalidCounts { .. })));
        assert!(matches!(hypergeom_tail(1, 11, 5, 10), Err(CoreError::InvalidCounts { .. })));
    }

    #[test]
    fn hypergeom_monotone_in_k() {
        let mut prev = 2.0;
        for k in 0..=4 {
            let p = hypergeom_tail(k, 4, 5, 10).unwrap();
            assert!(p <= prev);
            prev = p;
        }
    }

    #[test]
    fn bh_hand_cases() {
        let q = bh_adjust(&[0.01, 0.02, 0.03]).unwrap();
        for v in &q {
            assert!((v - 0.03).abs() < 1e-15);
        }
        assert_eq!(bh_adjust(&[0.2]).unwrap(), vec![0.2]);
        let q = bh_adjust(&[0.05, 0.05]).unwrap();
        assert_eq!(q, vec![0.05, 0.05]);
    }

    #[test]
    fn bh_rejects_invalid() {
        assert!(matches!(bh_adjust(&[0.0]), Err(CoreError::InvalidP { .. })));
        assert!(matches!(bh_adjust(&[1.5]), Err(CoreError::InvalidP { .. })));
    }

    fn annotations() -> Vec<GoAnnotation> {
        let genes = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        vec![
            GoAnnotation {
                term_id: "GO:0000001".to_string(),
                term_name: "secretion".to_string(),
                namespace: GoNamespace::Process,
                genes: genes(&["g0", "g1", "g2", "g3"]),
            },
            GoAnnotation {
                term_id: "GO:0000002".to_string(),
                term_name: "binding".to_string(),
                namespace: GoNamespace::Function,
                genes: genes(&["g4", "g5"]),
            },
            GoAnnotation {
                term_id: "GO:0000003".to_string(),
                term_name: "orphan".to_string(),
                namespace: GoNamespace::Process,
                genes: genes(&["zz1", "zz2"]),
            },
        ]
    }

    fn universe() -> Vec<String> {
        (0..10).map(|i| format!("g{i}")).collect()
    }

    #[test]
    fn enrich_matches_hypergeom_oracle() {
        let target: Vec<String> = ["g0", "g1", "g2", "g8", "g9"].iter().map(|s| s.to_string()).collect();
        let recs = enrich(&target, &universe(), &annotations(), GoNamespace::Process).unwrap();
        // orphan term annotates no background genes and is skipped
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].term_id, "GO:0000001");
        assert_eq!((recs[0].k, recs[0].big_k, recs[0].n, recs[0].big_n), (3, 4, 5, 10));
        assert!((recs[0].p_value - 66.0 / 252.0).abs() < 1e-14);
        assert_eq!(recs[0].q_value, recs[0].p_value); // single term family
    }

    #[test]
    fn enrich_target_equals_background() {
        let bg = universe();
        let recs = enrich(&bg, &bg, &annotations(), GoNamespace::Process).unwrap();
        assert!(recs.iter().all(|r| r.p_value == 1.0));
    }

    #[test]
    fn enrich_namespace_filter() {
        let target: Vec<String> = ["g4", "g5"].iter().map(|s| s.to_string()).collect();
        let recs = enrich(&target, &universe(), &annotations(), GoNamespace::Function).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].term_id, "GO:0000002");
        assert!(recs.iter().all(|r| r.namespace == GoNamespace::Function));
    }

    #[test]
    fn enrich_error_paths() {
        let not_subset = vec!["absent".to_string()];
        assert_eq!(
            enrich(&not_subset, &universe(), &annotations(), GoNamespace::Process).unwrap_err(),
            CoreError::TargetNotSubset
        );
        let empty: Vec<String> = vec![];
        assert_eq!(
            enrich(&empty, &universe(), &annotations(), GoNamespace::Process).unwrap_err(),
            CoreError::EmptySet
        );
    }
}
