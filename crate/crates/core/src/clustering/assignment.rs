//! Per-class clustering and the resulting cluster map.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clustering::kmeans::kmeans;
use crate::data::DomainDataset;
use crate::error::{Error, Result};
use crate::model::{forward, ModelSpec, ParamVector};
use crate::rng;
use crate::Scalar;

pub const DEFAULT_KMEANS_MAX_ITER: usize = 200;
pub const DEFAULT_KMEANS_TOL: Scalar = 1e-10;

/// Feature space the per-class k-means runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSpace {
    /// Raw input features (no trained model required).
    RawInput,
    /// Encoder output `z = h(x)` of a given model.
    EncoderOutput,
}

/// Result of clustering every class separately: a sample-to-cluster map over
/// globally unique cluster ids, cluster sizes, their population weights, and
/// the class each cluster belongs to. Clusters never span classes and are
/// never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    assignment: Vec<usize>,
    centroids: Vec<Vec<Scalar>>,
    sizes: Vec<usize>,
    weights: Vec<Scalar>,
    class_of_cluster: Vec<usize>,
}

impl ClusterAssignment {
    fn from_parts(
        assignment: Vec<usize>,
        centroids: Vec<Vec<Scalar>>,
        class_of_cluster: Vec<usize>,
    ) -> Result<Self> {
        let k_total = centroids.len();
        let mut sizes = vec![0usize; k_total];
        for &c in &assignment {
            if c >= k_total {
                return Err(Error::data(format!("cluster id {c} out of range ({k_total} clusters)")));
            }
            sizes[c] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::data(format!("cluster {empty} is empty")));
        }
        let n = assignment.len() as Scalar;
        let weights = sizes.iter().map(|&s| s as Scalar / n).collect();
        let out = ClusterAssignment { assignment, centroids, sizes, weights, class_of_cluster };
        debug_assert!((out.weights.iter().sum::<Scalar>() - 1.0).abs() < 1e-12);
        Ok(out)
    }

    /// Total number of clusters across all classes.
    #[inline]
    pub fn cluster_count(&self) -> usize {
        self.centroids.len()
    }

    #[inline]
    pub fn sample_count(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn cluster_of(&self, sample: usize) -> usize {
        self.assignment[sample]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn centroids(&self) -> &[Vec<Scalar>] {
        &self.centroids
    }

    /// Per-cluster population sizes.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Per-cluster population weights, summing to 1.
    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn class_of_cluster(&self) -> &[usize] {
        &self.class_of_cluster
    }

    /// Sample ids of cluster `k`, ascending.
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == k).collect()
    }

    /// Per-cluster counts of the given sample ids.
    pub fn histogram(&self, indices: &[usize]) -> Vec<usize> {
        let mut hist = vec![0usize; self.cluster_count()];
        for &i in indices {
            hist[self.assignment[i]] += 1;
        }
        hist
    }

    /// Writes the map as CSV (`sample_id,class_id,cluster_id`), sample order.
    pub fn write_csv<W: std::io::Write>(&self, dataset: &DomainDataset, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["sample_id", "class_id", "cluster_id"])?;
        for (i, &cluster) in self.assignment.iter().enumerate() {
            writer.write_record([
                i.to_string(),
                dataset.sample(i).label.to_string(),
                cluster.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Writes the map to a CSV file.
    pub fn save_csv(&self, dataset: &DomainDataset, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        self.write_csv(dataset, file)
    }

    /// Reloads a saved map, recomputing sizes, weights, and raw-space
    /// centroids from the dataset.
    pub fn load_csv(dataset: &DomainDataset, path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path.as_ref())?;
        let mut assignment = vec![usize::MAX; dataset.len()];
        let mut class_by_cluster: std::collections::BTreeMap<usize, usize> = Default::default();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let parse = |ix: usize| -> Result<usize> {
                record
                    .get(ix)
                    .ok_or_else(|| Error::data(format!("line {line}: missing column {ix}")))?
                    .parse()
                    .map_err(|_| Error::data(format!("line {line}: non-integer value")))
            };
            let sample_id = parse(0)?;
            let class_id = parse(1)?;
            let cluster_id = parse(2)?;
            if sample_id >= dataset.len() {
                return Err(Error::data(format!("line {line}: sample_id {sample_id} out of range")));
            }
            if dataset.sample(sample_id).label != class_id {
                return Err(Error::data(format!(
                    "line {line}: class_id {class_id} disagrees with dataset label {}",
                    dataset.sample(sample_id).label
                )));
            }
            assignment[sample_id] = cluster_id;
            if let Some(prev) = class_by_cluster.insert(cluster_id, class_id) {
                if prev != class_id {
                    return Err(Error::data(format!("cluster {cluster_id} spans classes {prev} and {class_id}")));
                }
            }
        }
        if let Some(missing) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(Error::data(format!("sample {missing} missing from assignment CSV")));
        }
        let k_total = class_by_cluster.keys().max().map_or(0, |m| m + 1);
        let class_of_cluster: Vec<usize> = (0..k_total)
            .map(|k| {
                class_by_cluster
                    .get(&k)
                    .copied()
                    .ok_or_else(|| Error::data(format!("cluster id {k} absent from CSV")))
            })
            .collect::<Result<_>>()?;
        // Raw-space centroids recomputed as member means.
        let mut centroids = vec![vec![0.0; dataset.feature_dim()]; k_total];
        let mut counts = vec![0usize; k_total];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for (t, &v) in centroids[c].iter_mut().zip(&dataset.sample(i).features) {
                *t += v;
            }
        }
        for (c, count) in counts.iter().enumerate() {
            if *count > 0 {
                for t in &mut centroids[c] {
                    *t /= *count as Scalar;
                }
            }
        }
        ClusterAssignment::from_parts(assignment, centroids, class_of_cluster)
    }
}

/// Runs k-means within each class and stitches the results into one
/// assignment with globally unique cluster ids.
///
/// Each class contributes `min(k, class_size)` clusters (a warning is logged
/// when the clamp engages). The clustering space is raw features unless an
/// encoder is supplied.
pub fn cluster_per_class(
    dataset: &DomainDataset,
    k: usize,
    space: ClusterSpace,
    encoder: Option<(&ParamVector, &ModelSpec)>,
    seed: u64,
) -> Result<ClusterAssignment> {
    if dataset.is_empty() {
        return Err(Error::data("cannot cluster an empty dataset"));
    }
    if k == 0 {
        return Err(Error::config("clusters per class must be >= 1"));
    }
    let points: Vec<Vec<Scalar>> = match space {
        ClusterSpace::RawInput => dataset.samples().iter().map(|s| s.features.clone()).collect(),
        ClusterSpace::EncoderOutput => {
            let (params, spec) =
                encoder.ok_or_else(|| Error::config("encoder_output space requires model parameters"))?;
            dataset
                .samples()
                .iter()
                .map(|s| forward(params, spec, &s.features).map(|(z, _)| z))
                .collect::<Result<_>>()?
        }
    };

    let mut assignment = vec![usize::MAX; dataset.len()];
    let mut centroids = Vec::new();
    let mut class_of_cluster = Vec::new();
    for class in 0..dataset.class_count() {
        let members = dataset.class_members(class);
        if members.is_empty() {
            log::warn!("class {class} has no samples; it contributes no clusters");
            continue;
        }
        let k_c = k.min(members.len());
        if k_c < k {
            log::warn!("class {class} has {} samples; clamping k from {k} to {k_c}", members.len());
        }
        let class_points: Vec<Vec<Scalar>> = members.iter().map(|&i| points[i].clone()).collect();
        let class_seed = rand::Rng::gen::<u64>(&mut rng::stream(seed, "kmeans-class", class as u64));
        let result = kmeans(&class_points, k_c, class_seed, DEFAULT_KMEANS_MAX_ITER, DEFAULT_KMEANS_TOL)?;
        let base = centroids.len();
        for (&sample, &local) in members.iter().zip(&result.labels) {
            assignment[sample] = base + local;
        }
        centroids.extend(result.centroids);
        class_of_cluster.extend(std::iter::repeat(class).take(k_c));
    }
    ClusterAssignment::from_parts(assignment, centroids, class_of_cluster)
}
