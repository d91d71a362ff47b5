use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::MarkovicParams;
use crate::data::{load_csv, Dataset, LabelColumn};
use crate::error::{Error, Result};
use crate::synth::BlobParams;
use crate::tree::GrowthParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        label_column: LabelColumn,
    },
    Synthetic(BlobParams),
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic(BlobParams::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Proposed,
    Centralized,
    Ncff,
    Cffcp,
    Markovic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Proposed,
        ModelKind::Centralized,
        ModelKind::Ncff,
        ModelKind::Cffcp,
        ModelKind::Markovic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Proposed => "proposed",
            ModelKind::Centralized => "centralized",
            ModelKind::Ncff => "ncff",
            ModelKind::Cffcp => "cffcp",
            ModelKind::Markovic => "markovic",
        }
    }

    /// Models that run the collaborative growth protocol.
    pub fn is_collaborative(self) -> bool {
        matches!(self, ModelKind::Proposed | ModelKind::Cffcp)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSpec {
    Iid,
    Alpha(usize),
}

/// Everything one experiment needs. Serialized as JSON; every field has a
/// default so config files only list what they change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub model: ModelKind,
    pub clients: usize,
    pub trees: usize,
    pub partition: PartitionSpec,
    pub growth: GrowthParams,
    pub markovic: MarkovicParams,
    pub runs: usize,
    pub master_seed: u64,
    pub test_fraction: f64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::default(),
            model: ModelKind::Proposed,
            clients: 10,
            trees: 100,
            partition: PartitionSpec::Alpha(2),
            growth: GrowthParams::default(),
            markovic: MarkovicParams::default(),
            runs: 10,
            master_seed: 0,
            test_fraction: 0.2,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bad = |e: &dyn fmt::Display| Error::Config(vec![format!("{}: {e}", path.display())]);
        let text = std::fs::read_to_string(path).map_err(|e| bad(&e))?;
        serde_json::from_str(&text).map_err(|e| bad(&e))
    }

    /// Every problem with the configuration that can be found without
    /// loading data.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if self.clients == 0 {
            p.push("clients must be at least 1".into());
        }
        if self.trees == 0 {
            p.push("trees must be at least 1".into());
        }
        if self.model.is_collaborative() && self.trees < self.clients {
            p.push(format!(
                "{} needs trees >= clients, got {} trees and {} clients",
                self.model, self.trees, self.clients
            ));
        }
        if self.partition == PartitionSpec::Alpha(0) {
            p.push("alpha must be at least 1".into());
        }
        if self.runs == 0 {
            p.push("runs must be at least 1".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            p.push(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            ));
        }
        if self.growth.max_depth == Some(0) {
            p.push("max_depth must be at least 1".into());
        }
        if self.growth.min_samples_split == 0 {
            p.push("min_samples_split must be at least 1".into());
        }
        if self.growth.feature_sample_count == Some(0) {
            p.push("feature_sample_count must be at least 1".into());
        }
        if self.model == ModelKind::Markovic {
            let m = &self.markovic;
            if m.top_t == 0 || m.top_t > m.per_client_forest_size {
                p.push(format!(
                    "markovic.top_t must be in 1..={}, got {}",
                    m.per_client_forest_size, m.top_t
                ));
            }
            if !(m.validation_fraction > 0.0 && m.validation_fraction < 1.0) {
                p.push("markovic.validation_fraction must lie in (0, 1)".into());
            }
        }
        if let DatasetSource::Csv { path, .. } = &self.dataset {
            if !path.exists() {
                p.push(format!("dataset {} does not exist", path.display()));
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Checks that need the loaded dataset.
    pub fn validate_against(&self, ds: &Dataset) -> Result<()> {
        let mut problems = self.problems();
        problems.extend(self.growth.problems(ds.feature_count()));
        problems.dedup();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            DatasetSource::Csv { path, label_column } => load_csv(path, label_column),
            DatasetSource::Synthetic(params) => params.generate(self.master_seed),
        }
    }
}

/// Parameter an ablation sweeps over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha,
    MaxDepth,
    NTrees,
    MinSamplesSplit,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::MaxDepth => "max_depth",
            SweepParam::NTrees => "n_trees",
            SweepParam::MinSamplesSplit => "min_samples_split",
        }
    }

    /// `config` with the swept parameter set to `value`; `None` is only
    /// meaningful for `max_depth` (no cap).
    pub fn apply(
        self,
        config: &ExperimentConfig,
        value: Option<usize>,
    ) -> Result<ExperimentConfig> {
        let mut c = config.clone();
        match (self, value) {
            (SweepParam::Alpha, Some(v)) => c.partition = PartitionSpec::Alpha(v),
            (SweepParam::MaxDepth, v) => c.growth.max_depth = v,
            (SweepParam::NTrees, Some(v)) => c.trees = v,
            (SweepParam::MinSamplesSplit, Some(v)) => c.growth.min_samples_split = v,
            (p, None) => {
                return Err(Error::InvalidParameter(format!(
                    "{} needs a numeric value",
                    p.name()
                )));
            }
        }
        Ok(c)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParam::Alpha),
            "max_depth" => Ok(SweepParam::MaxDepth),
            "n_trees" | "trees" => Ok(SweepParam::NTrees),
            "min_samples_split" | "min_split" => Ok(SweepParam::MinSamplesSplit),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep parameter {other:?} (expected alpha, max_depth, n_trees or min_samples_split)"
            ))),
        }
    }
}

/// Parse a sweep value list such as `5,10,12,none`.
pub fn parse_sweep_values(s: &str) -> Result<Vec<Option<usize>>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| match v {
            "none" | "None" | "unlimited" => Ok(None),
            _ => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidParameter(format!("bad sweep value {v:?}"))),
        })
        .collect()
}

pub fn sweep_value_label(value: Option<usize>) -> String {
    value.map_or_else(|| "none".to_string(), |v| v.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_config_with_defaults() {
        let json = r#"{
            "dataset": {"csv": {"path": "pendigits.csv", "label_column": "class"}},
            "model": "ncff",
            "partition": {"alpha": 3},
            "growth": {"max_depth": 10}
        }"#;
        let c: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.model, ModelKind::Ncff);
        assert_eq!(c.partition, PartitionSpec::Alpha(3));
        assert_eq!(c.growth.max_depth, Some(10));
        assert_eq!(c.growth.min_samples_split, 2);
        assert_eq!((c.clients, c.trees, c.runs), (10, 100, 10));
        assert_eq!(
            c.dataset,
            DatasetSource::Csv {
                path: "pendigits.csv".into(),
                label_column: LabelColumn::Name("class".into())
            }
        );
        let iid: ExperimentConfig = serde_json::from_str(r#"{"partition": "iid"}"#).unwrap();
        assert_eq!(iid.partition, PartitionSpec::Iid);
    }

    #[test]
    fn problems_are_aggregated() {
        let c = ExperimentConfig {
            clients: 10,
            trees: 5,
            runs: 0,
            test_fraction: 1.5,
            ..ExperimentConfig::default()
        };
        match c.validate().unwrap_err() {
            Error::Config(problems) => assert_eq!(problems.len(), 3, "{problems:?}"),
            other => panic!("{other}"),
        }
        assert!(ExperimentConfig::default().validate().is_ok());
    }

    #[test]
    fn sweep_parsing() {
        assert_eq!(
            parse_sweep_values("5, 10,none").unwrap(),
            vec![Some(5), Some(10), None]
        );
        assert!(parse_sweep_values("5,x").is_err());
        assert!("depth".parse::<SweepParam>().is_err());
        let c = SweepParam::MaxDepth
            .apply(&ExperimentConfig::default(), None)
            .unwrap();
        assert_eq!(c.growth.max_depth, None);
        assert!(SweepParam::Alpha
            .apply(&ExperimentConfig::default(), None)
            .is_err());
        let c = SweepParam::NTrees
            .apply(&ExperimentConfig::default(), Some(30))
            .unwrap();
        assert_eq!(c.trees, 30);
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("gbdt".parse::<ModelKind>().is_err());
    }
}
