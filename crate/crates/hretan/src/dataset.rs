//! Binary-feature datasets: CSV ingestion, hierarchy-consistency
//! validation, stratified fold assignment, and feature-subset projection.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::ClosureTable;

/// One labelled instance. Values are positional, aligned with the owning
/// [`Dataset`]'s feature order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    values: Vec<u8>,
    label: String,
}

impl Instance {
    pub fn new(values: Vec<u8>, label: impl Into<String>) -> Self {
        Instance {
            values,
            label: label.into(),
        }
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn value(&self, col: usize) -> u8 {
        self.values[col]
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// A binary-feature dataset with exactly two class labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<String>,
    index: HashMap<String, usize>,
    instances: Vec<Instance>,
    /// The two distinct labels, lexicographically sorted.
    labels: [String; 2],
}

/// A hierarchy-consistency violation: feature `feature` is positive in
/// instance `instance` while its ancestor `ancestor` is not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub instance: usize,
    pub feature: String,
    pub ancestor: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instance {}: {}=1 but ancestor {}=0",
            self.instance, self.feature, self.ancestor
        )
    }
}

impl Dataset {
    /// Builds a dataset from rows of (values, label). Rows must all match
    /// the feature count, values must be 0/1, and exactly two distinct
    /// labels must occur.
    pub fn from_rows(features: Vec<String>, rows: Vec<(Vec<u8>, String)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &features {
            if f.is_empty() || f.chars().any(char::is_whitespace) || f == "class" {
                return Err(Error::DatasetShape {
                    message: format!("invalid feature identifier '{f}'"),
                });
            }
            if !seen.insert(f.clone()) {
                return Err(Error::DatasetShape {
                    message: format!("duplicate feature '{f}'"),
                });
            }
        }
        let mut distinct: Vec<String> = Vec::new();
        let mut instances = Vec::with_capacity(rows.len());
        for (values, label) in rows {
            if values.len() != features.len() {
                return Err(Error::DatasetShape {
                    message: format!(
                        "row has {} values, expected {}",
                        values.len(),
                        features.len()
                    ),
                });
            }
            if values.iter().any(|&v| v > 1) {
                return Err(Error::DatasetShape {
                    message: "feature values must be 0 or 1".into(),
                });
            }
            if label.is_empty() {
                return Err(Error::DatasetShape {
                    message: "empty class label".into(),
                });
            }
            if !distinct.contains(&label) {
                distinct.push(label.clone());
            }
            instances.push(Instance { values, label });
        }
        Self::finish(features, seen, instances, distinct)
    }

    fn finish(
        features: Vec<String>,
        _seen: HashSet<String>,
        instances: Vec<Instance>,
        mut distinct: Vec<String>,
    ) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::DatasetShape {
                message: "dataset has no instances".into(),
            });
        }
        if distinct.len() != 2 {
            return Err(Error::DatasetShape {
                message: format!("expected 2 distinct class labels, found {}", distinct.len()),
            });
        }
        distinct.sort_unstable();
        let index = features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();
        Ok(Dataset {
            features,
            index,
            instances,
            labels: [distinct.remove(0), distinct.remove(0)],
        })
    }

    /// Parses the dataset CSV format: header row of feature identifiers
    /// followed by the literal `class`; data rows of 0/1 values and a
    /// non-empty label.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();

        let header = match records.next() {
            Some(rec) => rec.map_err(|e| Error::DatasetParse {
                row: 1,
                message: e.to_string(),
            })?,
            None => {
                return Err(Error::DatasetShape {
                    message: "dataset has no instances".into(),
                })
            }
        };
        let ncol = header.len();
        if ncol == 0 || header.get(ncol - 1) != Some("class") {
            return Err(Error::DatasetParse {
                row: 1,
                message: "header must end with the literal column 'class'".into(),
            });
        }
        let mut features = Vec::with_capacity(ncol - 1);
        let mut seen = HashSet::new();
        for f in header.iter().take(ncol - 1) {
            if f.is_empty() || f.chars().any(char::is_whitespace) || f == "class" {
                return Err(Error::DatasetParse {
                    row: 1,
                    message: format!("invalid feature identifier '{f}'"),
                });
            }
            if !seen.insert(f.to_string()) {
                return Err(Error::DatasetParse {
                    row: 1,
                    message: format!("duplicate feature '{f}'"),
                });
            }
            features.push(f.to_string());
        }

        let mut instances = Vec::new();
        let mut distinct: Vec<String> = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| Error::DatasetParse {
                row: 0,
                message: e.to_string(),
            })?;
            let row = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != ncol {
                return Err(Error::DatasetParse {
                    row,
                    message: format!("expected {} columns, found {}", ncol, rec.len()),
                });
            }
            let mut values = Vec::with_capacity(ncol - 1);
            for (c, v) in rec.iter().take(ncol - 1).enumerate() {
                match v {
                    "0" => values.push(0),
                    "1" => values.push(1),
                    other => {
                        return Err(Error::DatasetParse {
                            row,
                            message: format!(
                                "non-binary value '{}' for feature '{}'",
                                other, features[c]
                            ),
                        })
                    }
                }
            }
            let label = rec.get(ncol - 1).unwrap_or("").to_string();
            if label.is_empty() {
                return Err(Error::DatasetParse {
                    row,
                    message: "empty class label".into(),
                });
            }
            if !distinct.contains(&label) {
                if distinct.len() == 2 {
                    return Err(Error::DatasetParse {
                        row,
                        message: format!(
                            "third distinct class label '{label}' (binary classification only)"
                        ),
                    });
                }
                distinct.push(label.clone());
            }
            instances.push(Instance { values, label });
        }
        Self::finish(features, seen, instances, distinct)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    /// Writes the dataset back out in the CSV format `from_reader` accepts.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header: Vec<&str> = self.features.iter().map(String::as_str).collect();
        header.push("class");
        writeln!(w, "{}", header.join(","))?;
        for inst in &self.instances {
            let mut row: Vec<String> = inst.values.iter().map(u8::to_string).collect();
            row.push(inst.label.clone());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or(Error::UnknownFeature {
            feature: name.to_string(),
        })
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// The two class labels, lexicographically sorted.
    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or(Error::UnknownLabel {
                label: label.to_string(),
            })
    }

    /// Instance counts per label, aligned with [`Dataset::labels`].
    pub fn label_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for inst in &self.instances {
            if inst.label == self.labels[0] {
                counts[0] += 1;
            } else {
                counts[1] += 1;
            }
        }
        counts
    }

    /// Reports every (instance, feature, ancestor) triple where the
    /// feature is positive but the ancestor is not. An empty result means
    /// the dataset is hierarchy-consistent; the descendant-side rule is
    /// the contrapositive, so checking one direction suffices.
    pub fn validate_consistency(&self, closure: &ClosureTable) -> Result<Vec<Violation>> {
        // Per column: ancestors that are also dataset columns.
        let mut ancestor_cols: Vec<Vec<usize>> = Vec::with_capacity(self.features.len());
        for f in &self.features {
            if !closure.contains(f) {
                return Err(Error::FeatureNotInHierarchy { feature: f.clone() });
            }
            let cols = closure
                .ancestors_of(f)?
                .into_iter()
                .filter_map(|a| self.index.get(a).copied())
                .collect();
            ancestor_cols.push(cols);
        }
        let mut violations = Vec::new();
        for (i, inst) in self.instances.iter().enumerate() {
            for (x, ancs) in ancestor_cols.iter().enumerate() {
                if inst.values[x] == 1 {
                    for &y in ancs {
                        if inst.values[y] == 0 {
                            violations.push(Violation {
                                instance: i,
                                feature: self.features[x].clone(),
                                ancestor: self.features[y].clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(violations)
    }

    /// Projects the dataset onto `keep`, preserving the original column
    /// order, instance order, and labels.
    pub fn restrict<S: AsRef<str>>(&self, keep: &[S]) -> Result<Dataset> {
        let cols = self.keep_columns(keep)?;
        let features: Vec<String> = cols.iter().map(|&c| self.features[c].clone()).collect();
        let index = features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();
        let instances = self
            .instances
            .iter()
            .map(|inst| Instance {
                values: cols.iter().map(|&c| inst.values[c]).collect(),
                label: inst.label.clone(),
            })
            .collect();
        Ok(Dataset {
            features,
            index,
            instances,
            labels: self.labels.clone(),
        })
    }

    /// Projects a single instance of this dataset's schema onto `keep`,
    /// with columns ordered as in [`Dataset::restrict`].
    pub fn restrict_instance<S: AsRef<str>>(&self, inst: &Instance, keep: &[S]) -> Result<Instance> {
        let cols = self.keep_columns(keep)?;
        Ok(Instance {
            values: cols.iter().map(|&c| inst.values[c]).collect(),
            label: inst.label.clone(),
        })
    }

    fn keep_columns<S: AsRef<str>>(&self, keep: &[S]) -> Result<Vec<usize>> {
        let mut wanted = HashSet::with_capacity(keep.len());
        for k in keep {
            wanted.insert(self.feature_index(k.as_ref())?);
        }
        Ok((0..self.features.len())
            .filter(|c| wanted.contains(c))
            .collect())
    }

    /// The sub-dataset at the given instance indices. Labels are carried
    /// over from the parent even if one class ends up absent.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.clone(),
            index: self.index.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Deterministic stratified fold assignment: each class's indices are
    /// shuffled with the seeded generator, then dealt round-robin. Classes
    /// are processed in label order, each starting at the fold after the
    /// previous class's last deal, which also balances total fold sizes.
    pub fn stratified_folds(&self, k: usize, seed: u64) -> Result<FoldAssignment> {
        if k < 2 {
            return Err(Error::FoldConfig {
                message: format!("fold count must be at least 2, got {k}"),
            });
        }
        if k > self.instances.len() {
            return Err(Error::FoldConfig {
                message: format!(
                    "fold count {} exceeds instance count {}",
                    k,
                    self.instances.len()
                ),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fold_of = vec![0usize; self.instances.len()];
        let mut offset = 0usize;
        for label in &self.labels {
            let mut members: Vec<usize> = self
                .instances
                .iter()
                .enumerate()
                .filter(|(_, inst)| &inst.label == label)
                .map(|(i, _)| i)
                .collect();
            members.shuffle(&mut rng);
            for (i, &idx) in members.iter().enumerate() {
                fold_of[idx] = (offset + i) % k;
            }
            offset = (offset + members.len()) % k;
        }
        Ok(FoldAssignment { seed, k, fold_of })
    }
}

/// A partition of instance indices into `k` folds, stratified per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub seed: u64,
    pub k: usize,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    /// Instance indices held out by fold `f`.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == f)
            .collect()
    }

    /// Instance indices of every fold except `f`.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != f)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::FeatureDag;

    pub(crate) fn example_closure() -> ClosureTable {
        FeatureDag::new(
            &["F", "B", "E", "C", "A", "D"],
            &[("B", "F"), ("E", "F"), ("C", "E"), ("D", "A")],
        )
        .unwrap()
        .build_closure()
    }

    fn csv_two_rows() -> &'static str {
        "F,B,E,C,A,D,class\n1,0,1,1,0,0,pro\n0,0,0,0,0,0,anti\n"
    }

    #[test]
    fn loads_example_instance() {
        let ds = Dataset::from_reader(csv_two_rows().as_bytes()).unwrap();
        assert_eq!(ds.num_features(), 6);
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.features()[3], "C");
        assert_eq!(ds.instances()[0].value(3), 1);
        assert_eq!(ds.instances()[0].label(), "pro");
        assert_eq!(ds.labels(), &["anti".to_string(), "pro".to_string()]);
        assert_eq!(ds.label_counts(), [1, 1]);
    }

    #[test]
    fn three_labels_rejected_with_row() {
        let csv = "a,class\n1,x\n0,y\n1,z\n";
        match Dataset::from_reader(csv.as_bytes()).unwrap_err() {
            Error::DatasetParse { row, message } => {
                assert_eq!(row, 4);
                assert!(message.contains('z'));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_binary_value_rejected_with_row() {
        let csv = "a,b,class\n1,0,x\n2,0,y\n";
        match Dataset::from_reader(csv.as_bytes()).unwrap_err() {
            Error::DatasetParse { row, message } => {
                assert_eq!(row, 3);
                assert!(message.contains('2'));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn wrong_column_count_rejected() {
        let csv = "a,b,class\n1,0,x\n1,y\n";
        match Dataset::from_reader(csv.as_bytes()).unwrap_err() {
            Error::DatasetParse { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_and_single_label_rejected() {
        assert!(matches!(
            Dataset::from_reader("a,class\n".as_bytes()).unwrap_err(),
            Error::DatasetShape { .. }
        ));
        assert!(matches!(
            Dataset::from_reader("a,class\n1,x\n0,x\n".as_bytes()).unwrap_err(),
            Error::DatasetShape { .. }
        ));
    }

    #[test]
    fn header_must_end_with_class() {
        assert!(matches!(
            Dataset::from_reader("a,b\n1,0\n".as_bytes()).unwrap_err(),
            Error::DatasetParse { row: 1, .. }
        ));
    }

    #[test]
    fn csv_round_trip() {
        let ds = Dataset::from_reader(csv_two_rows().as_bytes()).unwrap();
        let mut buf = Vec::new();
        ds.to_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), csv_two_rows());
    }

    #[test]
    fn consistency_clean_on_example_instance() {
        let ds = Dataset::from_reader(csv_two_rows().as_bytes()).unwrap();
        let violations = ds.validate_consistency(&example_closure()).unwrap();
        assert!(violations.is_empty());
    }

    #[test]
    fn consistency_flags_unannotated_ancestor() {
        let dag = FeatureDag::new(&[], &[("a", "b")]).unwrap();
        let ds = Dataset::from_reader("a,b,class\n1,0,x\n0,0,y\n".as_bytes()).unwrap();
        let violations = ds.validate_consistency(&dag.build_closure()).unwrap();
        assert_eq!(
            violations,
            vec![Violation {
                instance: 0,
                feature: "a".into(),
                ancestor: "b".into(),
            }]
        );
    }

    #[test]
    fn all_zero_instance_is_consistent() {
        let dag = FeatureDag::new(&[], &[("a", "b")]).unwrap();
        let ds = Dataset::from_reader("a,b,class\n0,0,x\n0,0,y\n".as_bytes()).unwrap();
        assert!(ds.validate_consistency(&dag.build_closure()).unwrap().is_empty());
    }

    #[test]
    fn consistency_requires_hierarchy_membership() {
        let dag = FeatureDag::new(&["a"], &[]).unwrap();
        let ds = Dataset::from_reader("a,b,class\n0,0,x\n0,0,y\n".as_bytes()).unwrap();
        assert!(matches!(
            ds.validate_consistency(&dag.build_closure()).unwrap_err(),
            Error::FeatureNotInHierarchy { .. }
        ));
    }

    fn dataset_with_counts(n_a: usize, n_b: usize) -> Dataset {
        let rows = (0..n_a)
            .map(|_| (vec![0u8], "a".to_string()))
            .chain((0..n_b).map(|_| (vec![1u8], "b".to_string())))
            .collect();
        Dataset::from_rows(vec!["f".into()], rows).unwrap()
    }

    #[test]
    fn stratified_folds_balance_each_class() {
        let ds = dataset_with_counts(12, 8);
        let folds = ds.stratified_folds(10, 1).unwrap();
        let mut per_fold_a = vec![0usize; 10];
        let mut per_fold_b = vec![0usize; 10];
        for (i, inst) in ds.instances().iter().enumerate() {
            if inst.label() == "a" {
                per_fold_a[folds.fold_of[i]] += 1;
            } else {
                per_fold_b[folds.fold_of[i]] += 1;
            }
        }
        assert_eq!(per_fold_a.iter().sum::<usize>(), 12);
        assert_eq!(per_fold_b.iter().sum::<usize>(), 8);
        assert!(per_fold_a.iter().max().unwrap() - per_fold_a.iter().min().unwrap() <= 1);
        assert!(per_fold_b.iter().max().unwrap() - per_fold_b.iter().min().unwrap() <= 1);
        // The offset deal also balances fold totals: every fold holds 2.
        for f in 0..10 {
            assert_eq!(per_fold_a[f] + per_fold_b[f], 2);
        }
    }

    #[test]
    fn stratified_folds_deterministic() {
        let ds = dataset_with_counts(12, 8);
        assert_eq!(
            ds.stratified_folds(10, 42).unwrap(),
            ds.stratified_folds(10, 42).unwrap()
        );
        assert_ne!(
            ds.stratified_folds(10, 42).unwrap(),
            ds.stratified_folds(10, 43).unwrap()
        );
    }

    #[test]
    fn leave_one_out_partition() {
        let ds = dataset_with_counts(3, 2);
        let folds = ds.stratified_folds(5, 9).unwrap();
        let mut seen = vec![false; 5];
        for &f in &folds.fold_of {
            seen[f] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn fold_count_bounds() {
        let ds = dataset_with_counts(3, 2);
        assert!(ds.stratified_folds(1, 0).is_err());
        assert!(ds.stratified_folds(6, 0).is_err());
    }

    #[test]
    fn restrict_identity_and_projection() {
        let ds = Dataset::from_reader(csv_two_rows().as_bytes()).unwrap();
        let all = ds.restrict(ds.features()).unwrap();
        assert_eq!(all.features(), ds.features());
        assert_eq!(all.instances(), ds.instances());

        let sub = ds.restrict(&["C", "A"]).unwrap();
        assert_eq!(sub.features(), &["C", "A"]);
        assert_eq!(sub.instances()[0].values(), &[1, 0]);
        assert_eq!(sub.instances()[0].label(), "pro");
    }

    #[test]
    fn restrict_to_empty_keeps_labels_only() {
        let ds = Dataset::from_reader(csv_two_rows().as_bytes()).unwrap();
        let empty = ds.restrict::<&str>(&[]).unwrap();
        assert_eq!(empty.num_features(), 0);
        assert_eq!(empty.len(), 2);
        assert_eq!(empty.instances()[1].label(), "anti");
    }

    #[test]
    fn restrict_unknown_feature_fails() {
        let ds = Dataset::from_reader(csv_two_rows().as_bytes()).unwrap();
        assert!(ds.restrict(&["Z"]).is_err());
    }

    #[test]
    fn restrict_instance_matches_dataset_restrict() {
        let ds = Dataset::from_reader(csv_two_rows().as_bytes()).unwrap();
        let keep = ["C", "A"];
        let restricted = ds.restrict(&keep).unwrap();
        for (inst, want) in ds.instances().iter().zip(restricted.instances()) {
            assert_eq!(&ds.restrict_instance(inst, &keep).unwrap(), want);
        }
    }
}
