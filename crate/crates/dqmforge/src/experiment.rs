//! Experiment configs: one instance class, several pipelines, one report
//! per pipeline and one comparison per pipeline pair.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use dqmforge_core::bench::{
    compare, resolve_success, ComparisonRecord, Instance, Pipeline, RunReport,
};
use dqmforge_core::embed::{RepairMode, DEFAULT_ATTEMPTS};
use dqmforge_core::sample::{
    BetaSchedule, SamplerParams, DEFAULT_EXACT_CAP, DEFAULT_READS, DEFAULT_SWEEPS,
};

use crate::formats::{write_bytes, FgaConfigJson, InstanceFile};
use crate::modes::{parse_chain_mode, parse_encoding, parse_hardware, parse_penalty, parse_repair};
use crate::report::{emit_comparisons, emit_report, Format};
use crate::runner::{
    gen_coloring_files, gen_fga_files, instances_from_files, load_instances, resolve_hardware,
    run_pipeline_par,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Family {
    Coloring {
        nodes: usize,
        colors: usize,
        edge_prob: f64,
        count: usize,
    },
    Fga {
        flights: usize,
        gates: usize,
        count: usize,
        #[serde(default = "auto")]
        mu: String,
        #[serde(default)]
        config: FgaConfigJson,
    },
    Files {
        paths: Vec<PathBuf>,
    },
}

fn auto() -> String {
    "auto".into()
}
fn native() -> String {
    "native".into()
}
fn utc() -> String {
    "utc".into()
}
fn majority() -> String {
    RepairMode::Majority.name().into()
}
fn reads() -> usize {
    DEFAULT_READS
}
fn sweeps() -> usize {
    DEFAULT_SWEEPS
}
fn attempts() -> usize {
    DEFAULT_ATTEMPTS
}
fn cap() -> u128 {
    DEFAULT_EXACT_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub encoding: String,
    #[serde(default = "native")]
    pub hardware: String,
    #[serde(default = "auto")]
    pub penalty: String,
    #[serde(default = "utc")]
    pub chain_mode: String,
    #[serde(default = "majority")]
    pub repair: String,
    #[serde(default = "reads")]
    pub reads: usize,
    #[serde(default = "sweeps")]
    pub sweeps: usize,
    #[serde(default = "attempts")]
    pub attempts: usize,
    /// explicit `[hot, cold]` inverse temperatures
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<(f64, f64)>,
}

impl PipelineConfig {
    /// Resolves every option; `base` anchors relative hardware paths.
    pub fn build(&self, seed: u64, base: &Path, index: usize) -> Result<Pipeline> {
        let ctx =
            |field: &str, e: String| Error::schema(format!("pipelines[{index}].{field}: {e}"));
        let hardware = resolve_hardware(
            &parse_hardware(&self.hardware).map_err(|e| ctx("hardware", e))?,
            base,
        )?;
        let sampler = SamplerParams {
            num_reads: self.reads,
            sweeps: self.sweeps,
            beta: match self.beta {
                Some((hot, cold)) => BetaSchedule::Explicit { hot, cold },
                None => BetaSchedule::Auto,
            },
            seed,
        };
        sampler
            .validate()
            .map_err(|e| ctx("sampler", e.to_string()))?;
        if self.attempts == 0 {
            return Err(ctx("attempts", "must be >= 1".into()));
        }
        let mut pipe = Pipeline::new(
            parse_encoding(&self.encoding).map_err(|e| ctx("encoding", e))?,
            hardware,
            sampler,
        );
        pipe.penalty = parse_penalty(&self.penalty).map_err(|e| ctx("penalty", e))?;
        pipe.chain_strength =
            parse_chain_mode(&self.chain_mode).map_err(|e| ctx("chain_mode", e))?;
        pipe.repair = parse_repair(&self.repair).map_err(|e| ctx("repair", e))?;
        pipe.embed_attempts = self.attempts;
        if let Some(name) = &self.name {
            pipe.name = name.clone();
        }
        Ok(pipe)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub pipelines: Vec<PipelineConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "cap")]
    pub exact_cap: u128,
    pub output_dir: PathBuf,
}

pub struct ExperimentOutcome {
    pub reports: Vec<RunReport>,
    pub comparisons: Vec<ComparisonRecord>,
}

impl ExperimentConfig {
    pub fn instances(&self, base: &Path) -> Result<Vec<Instance>> {
        let files = match &self.family {
            Family::Coloring {
                nodes,
                colors,
                edge_prob,
                count,
            } => gen_coloring_files(*nodes, *colors, *edge_prob, *count, self.seed)?,
            Family::Fga {
                flights,
                gates,
                count,
                mu,
                config,
            } => {
                let mu = parse_penalty(mu).map_err(|e| Error::schema(format!("family.mu: {e}")))?;
                gen_fga_files(
                    *flights,
                    *gates,
                    *count,
                    self.seed,
                    &config.to_config()?,
                    mu,
                )?
            }
            Family::Files { paths } => {
                let paths: Vec<PathBuf> = paths.iter().map(|p| base.join(p)).collect();
                return load_instances(&paths, self.exact_cap);
            }
        };
        let files: Vec<(String, InstanceFile)> =
            files.into_iter().map(|f| (String::new(), f)).collect();
        instances_from_files(&files, self.exact_cap)
    }

    pub fn pipelines(&self, base: &Path) -> Result<Vec<Pipeline>> {
        if self.pipelines.is_empty() {
            return Err(Error::schema(
                "pipelines: at least one pipeline is required",
            ));
        }
        let pipes = self
            .pipelines
            .iter()
            .enumerate()
            .map(|(i, p)| p.build(self.seed, base, i))
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in pipes.iter().enumerate() {
            if pipes[..i]
                .iter()
                .any(|q| file_stem(&q.name) == file_stem(&p.name))
            {
                return Err(Error::schema(format!(
                    "pipelines[{i}]: duplicate name `{}`",
                    p.name
                )));
            }
        }
        Ok(pipes)
    }

    /// Runs every pipeline, resolves success across them and compares
    /// every ordered pair `(a, b)` with `a` listed first.
    pub fn run(&self, base: &Path) -> Result<ExperimentOutcome> {
        let instances = self.instances(base)?;
        let pipes = self.pipelines(base)?;
        let mut reports = pipes
            .iter()
            .map(|p| run_pipeline_par(&instances, p))
            .collect::<dqmforge_core::Result<Vec<_>>>()?;
        resolve_success(&instances, &mut reports);
        let mut comparisons = Vec::new();
        for (i, a) in reports.iter().enumerate() {
            for b in &reports[i + 1..] {
                comparisons.push(compare(a, b)?);
            }
        }
        Ok(ExperimentOutcome {
            reports,
            comparisons,
        })
    }
}

/// File-name form of a pipeline name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `<pipeline>.report.json` per report and
/// `<a>__<b>.comparison.json` per pair; returns the written paths.
pub fn write_outcome(
    outcome: &ExperimentOutcome,
    dir: &Path,
    params: Option<&Value>,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for report in &outcome.reports {
        let path = dir.join(format!("{}.report.json", file_stem(&report.pipeline.name)));
        write_bytes(&path, &emit_report(report, params, Format::Json)?)?;
        written.push(path);
    }
    for c in &outcome.comparisons {
        let path = dir.join(format!(
            "{}__{}.comparison.json",
            file_stem(&c.left),
            file_stem(&c.right)
        ));
        write_bytes(
            &path,
            &emit_comparisons(std::slice::from_ref(c), Format::Json)?,
        )?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_errors() {
        let text = r#"{
            "family": {"type": "coloring", "nodes": 5, "colors": 3, "edge_prob": 0.5, "count": 3},
            "pipelines": [{"encoding": "one-hot", "reads": 10, "sweeps": 50},
                          {"encoding": "domain-wall", "reads": 10, "sweeps": 50}],
            "seed": 4,
            "output_dir": "out"
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.exact_cap, DEFAULT_EXACT_CAP);
        let base = Path::new(".");
        let outcome = cfg.run(base).unwrap();
        assert_eq!(outcome.reports.len(), 2);
        assert_eq!(outcome.comparisons.len(), 1);
        assert_eq!(outcome.comparisons[0].left, "one-hot/native");

        let mut dup = cfg.clone();
        dup.pipelines[1].encoding = "one-hot".into();
        assert!(dup.pipelines(base).is_err());
        let mut bad = cfg;
        bad.pipelines[0].penalty = "strong".into();
        let err = bad.pipelines(base).unwrap_err().to_string();
        assert!(err.starts_with("pipelines[0].penalty"), "{err}");
        assert!(
            serde_json::from_str::<ExperimentConfig>(&text.replace("\"seed\"", "\"sed\"")).is_err()
        );
    }

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(
            file_stem("one-hot/chimera(4,4,4)"),
            "one-hot_chimera_4_4_4_"
        );
    }
}
