//! Pipelines, per-instance metrics, class statistics and pairwise
//! comparison of pipelines.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::embed::{
    apply_embedding, chain_strength, embed_greedy, unembed, ChainStrengthMode, EmbedOutcome,
    Embedding, HardwareGraph, RepairMode, DEFAULT_ATTEMPTS,
};
use crate::encode::{decode_with_meta, encode, EncodeOptions, PenaltyMode};
use crate::model::{DiscreteModel, Encoding, Vartype};
use crate::problems::{coloring_dqm, fga_dqm, FgaInstance, Graph};
use crate::rng::derive_seed_in;
use crate::sample::{anneal, solve_exact, SamplerParams};
use crate::{Error, Result};

/// Threshold for a significant result.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

const EMBED_STREAM: u64 = 1;
const SAMPLE_STREAM: u64 = 2;

/// A cost that may be the infinite sentinel of an instance without any
/// valid solution. Infinite compares greater than every finite cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl Cost {
    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Cost::Infinite
    }

    pub fn total_cmp(&self, other: &Cost) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.total_cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }

    /// Mean of costs; infinite as soon as one is.
    pub fn mean(costs: &[Cost]) -> Cost {
        let values: Option<Vec<f64>> = costs.iter().map(|c| c.finite()).collect();
        match values {
            Some(v) if !v.is_empty() => Cost::Finite(v.iter().sum::<f64>() / v.len() as f64),
            Some(_) => Cost::Finite(0.0),
            None => Cost::Infinite,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

/// Lower-tail binomial probability `2^-N sum_{k<=n_w} C(N, k)` with
/// `N = n_b + n_w`: the chance of `n_b` or more wins out of `N` fair coin
/// flips. `None` when there is nothing to compare.
pub fn significance(n_b: u64, n_w: u64) -> Option<f64> {
    let n = n_b + n_w;
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let ln_fact_n = libm::lgamma(nf + 1.0);
    let terms: Vec<f64> = (0..=n_w)
        .map(|k| {
            let kf = k as f64;
            ln_fact_n - libm::lgamma(kf + 1.0) - libm::lgamma(nf - kf + 1.0)
        })
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_sum = top + libm::log(terms.iter().map(|t| libm::exp(t - top)).sum::<f64>());
    Some(libm::exp(ln_sum - nf * core::f64::consts::LN_2).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    SignificantWin,
    NotSignificant,
    SignificantLoss,
    NotApplicable,
    /// the left pipeline could not embed any instance
    FailLeft,
    FailRight,
    FailBoth,
}

impl Verdict {
    pub fn from_p(p: Option<f64>) -> Verdict {
        match p {
            None => Verdict::NotApplicable,
            Some(p) if p < SIGNIFICANCE_LEVEL => Verdict::SignificantWin,
            Some(p) if p > 1.0 - SIGNIFICANCE_LEVEL => Verdict::SignificantLoss,
            Some(_) => Verdict::NotSignificant,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::SignificantWin => "significant-win",
            Verdict::NotSignificant => "not-significant",
            Verdict::SignificantLoss => "significant-loss",
            Verdict::NotApplicable => "not-applicable",
            Verdict::FailLeft => "fail-left",
            Verdict::FailRight => "fail-right",
            Verdict::FailBoth => "fail-both",
        }
    }

    pub fn from_name(name: &str) -> Option<Verdict> {
        [
            Verdict::SignificantWin,
            Verdict::NotSignificant,
            Verdict::SignificantLoss,
            Verdict::NotApplicable,
            Verdict::FailLeft,
            Verdict::FailRight,
            Verdict::FailBoth,
        ]
        .into_iter()
        .find(|v| v.name() == name)
    }
}

/// How raw DQM energies become the reported cost `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    Raw,
    /// divide by the edge count of a coloring instance
    PerEdge(usize),
    /// subtract the exact optimum
    SubtractOptimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub dqm: DiscreteModel,
    pub normalization: Normalization,
    /// exact minimum of `dqm`, when known
    pub optimum: Option<f64>,
}

impl Instance {
    pub fn coloring(id: impl Into<String>, graph: &Graph, k: usize) -> Result<Self> {
        Ok(Instance {
            id: id.into(),
            dqm: coloring_dqm(graph, k)?,
            normalization: Normalization::PerEdge(graph.num_edges()),
            optimum: None,
        })
    }

    /// Flight-gate instance; its optimum is always computed since the cost
    /// is reported relative to it.
    pub fn fga(
        id: impl Into<String>,
        inst: &FgaInstance,
        mu: PenaltyMode,
        cap: u128,
    ) -> Result<Self> {
        let dqm = fga_dqm(inst, mu)?;
        let optimum = solve_exact(&dqm, cap)?.energy;
        Ok(Instance {
            id: id.into(),
            dqm,
            normalization: Normalization::SubtractOptimum,
            optimum: Some(optimum),
        })
    }

    /// Fills in the exact optimum when the search space is within `cap`.
    pub fn with_exact_optimum(mut self, cap: u128) -> Result<Self> {
        if self.optimum.is_none() && self.dqm.search_space() <= cap {
            self.optimum = Some(solve_exact(&self.dqm, cap)?.energy);
        }
        Ok(self)
    }

    pub fn normalize(&self, energy: f64) -> Result<f64> {
        match self.normalization {
            Normalization::Raw => Ok(energy),
            Normalization::PerEdge(edges) => Ok(energy / edges.max(1) as f64),
            Normalization::SubtractOptimum => {
                self.optimum.map(|opt| energy - opt).ok_or_else(|| {
                    Error::Config(format!(
                        "instance {}: cost needs the exact optimum",
                        self.id
                    ))
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Hardware {
    Native,
    Graph(HardwareGraph),
}

impl Hardware {
    pub fn name(&self) -> &str {
        match self {
            Hardware::Native => "native",
            Hardware::Graph(g) => g.name(),
        }
    }
}

/// One encoding/hardware combination with all of its settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub name: String,
    pub encoding: Encoding,
    pub penalty: PenaltyMode,
    pub hardware: Hardware,
    pub chain_strength: ChainStrengthMode,
    pub repair: RepairMode,
    pub sampler: SamplerParams,
    pub embed_attempts: usize,
}

impl Pipeline {
    pub fn new(encoding: Encoding, hardware: Hardware, sampler: SamplerParams) -> Self {
        let name = format!("{}/{}", encoding.name(), hardware.name());
        Pipeline {
            name,
            encoding,
            penalty: PenaltyMode::AutoMax,
            hardware,
            chain_strength: ChainStrengthMode::default(),
            repair: RepairMode::default(),
            sampler,
            embed_attempts: DEFAULT_ATTEMPTS,
        }
    }

    pub fn info(&self) -> PipelineInfo {
        let native = self.hardware == Hardware::Native;
        PipelineInfo {
            name: self.name.clone(),
            encoding: self.encoding,
            penalty: self.penalty,
            hardware: String::from(self.hardware.name()),
            chain_mode: if native {
                String::from("none")
            } else {
                self.chain_strength.name()
            },
            repair: if native {
                String::from("none")
            } else {
                String::from(self.repair.name())
            },
            num_reads: self.sampler.num_reads,
            sweeps: self.sampler.sweeps,
            seed: self.sampler.seed,
        }
    }
}

/// The settings a report was produced with.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineInfo {
    pub name: String,
    pub encoding: Encoding,
    pub penalty: PenaltyMode,
    pub hardware: String,
    pub chain_mode: String,
    pub repair: String,
    pub num_reads: usize,
    pub sweeps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceReport {
    pub instance_id: String,
    /// discrete variables of the instance
    pub num_vars: usize,
    pub embed_failed: bool,
    /// fraction of reads without broken chains
    pub r_chain: f64,
    /// fraction of reads decoding to a constraint-satisfying assignment
    pub r_enc: f64,
    /// lowest raw DQM energy over valid reads
    pub best_energy: Cost,
    pub best_c: Cost,
    pub mean_c: Cost,
    /// energy counted as optimal: the exact optimum, or the best found by
    /// any compared pipeline
    pub reference: Option<f64>,
    pub success: bool,
    pub max_chain_length: usize,
}

impl InstanceReport {
    fn failed(instance: &Instance) -> Self {
        InstanceReport {
            instance_id: instance.id.clone(),
            num_vars: instance.dqm.n(),
            embed_failed: true,
            r_chain: 0.0,
            r_enc: 0.0,
            best_energy: Cost::Infinite,
            best_c: Cost::Infinite,
            mean_c: Cost::Infinite,
            reference: None,
            success: false,
            max_chain_length: 0,
        }
    }

    fn resolve(&mut self, reference: Option<f64>) {
        self.reference = reference;
        self.success = match (self.best_energy, reference) {
            (Cost::Finite(best), Some(r)) => reaches(best, r),
            _ => false,
        };
    }
}

fn reaches(energy: f64, optimum: f64) -> bool {
    (energy - optimum).abs() <= 1e-9 * optimum.abs().max(1.0)
}

/// Mean, sample standard deviation and standard error over instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: Cost,
    pub std: Cost,
    pub stderr: Cost,
}

impl Stat {
    pub fn of(values: &[Cost]) -> Stat {
        let finite: Option<Vec<f64>> = values.iter().map(|c| c.finite()).collect();
        let Some(v) = finite else {
            return Stat {
                mean: Cost::Infinite,
                std: Cost::Infinite,
                stderr: Cost::Infinite,
            };
        };
        if v.is_empty() {
            return Stat {
                mean: Cost::Finite(0.0),
                std: Cost::Finite(0.0),
                stderr: Cost::Finite(0.0),
            };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = if v.len() > 1 {
            libm::sqrt(v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0))
        } else {
            0.0
        };
        Stat {
            mean: Cost::Finite(mean),
            std: Cost::Finite(std),
            stderr: Cost::Finite(std / libm::sqrt(n)),
        }
    }

    fn of_rates(values: impl Iterator<Item = f64>) -> Stat {
        Stat::of(&values.map(Cost::Finite).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub instances: usize,
    pub r_chain: Stat,
    pub r_enc: Stat,
    pub best_c: Stat,
    pub mean_c: Stat,
    /// fraction of instances where the optimum was found
    pub success: f64,
    pub embed_failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub pipeline: PipelineInfo,
    pub instances: Vec<InstanceReport>,
}

impl RunReport {
    pub fn summary(&self) -> ClassSummary {
        let inst = &self.instances;
        ClassSummary {
            instances: inst.len(),
            r_chain: Stat::of_rates(inst.iter().map(|r| r.r_chain)),
            r_enc: Stat::of_rates(inst.iter().map(|r| r.r_enc)),
            best_c: Stat::of(&inst.iter().map(|r| r.best_c).collect::<Vec<_>>()),
            mean_c: Stat::of(&inst.iter().map(|r| r.mean_c).collect::<Vec<_>>()),
            success: if inst.is_empty() {
                0.0
            } else {
                inst.iter().filter(|r| r.success).count() as f64 / inst.len() as f64
            },
            embed_failures: inst.iter().filter(|r| r.embed_failed).count(),
        }
    }

    pub fn all_embeddings_failed(&self) -> bool {
        !self.instances.is_empty() && self.instances.iter().all(|r| r.embed_failed)
    }
}

/// Runs `pipeline` on the instance at position `index` of its class; the
/// index selects the embedding and sampling streams.
pub fn run_instance(
    instance: &Instance,
    index: usize,
    pipeline: &Pipeline,
) -> Result<InstanceReport> {
    let encoded = encode(
        &instance.dqm,
        &EncodeOptions::new(pipeline.encoding, pipeline.penalty),
    )?;
    let meta = encoded.meta().cloned().ok_or(Error::MissingMeta)?;
    let logical = encoded.as_vartype(Vartype::Spin)?;
    let master = pipeline.sampler.seed;
    let sampler = SamplerParams {
        seed: derive_seed_in(master, SAMPLE_STREAM, index as u64),
        ..pipeline.sampler.clone()
    };

    let (reads, broken, max_chain_length): (Vec<Option<Vec<i8>>>, Vec<bool>, usize) =
        match &pipeline.hardware {
            Hardware::Native => {
                let set = anneal(&logical, &sampler)?;
                let n = set.num_reads();
                (
                    set.reads.into_iter().map(|r| Some(r.config)).collect(),
                    alloc::vec![false; n],
                    1,
                )
            }
            Hardware::Graph(hw) => {
                let edges = logical.interaction_edges();
                let embed_seed = derive_seed_in(master, EMBED_STREAM, index as u64);
                let chains = match embed_greedy(
                    logical.num_vars(),
                    &edges,
                    hw,
                    pipeline.embed_attempts,
                    embed_seed,
                )? {
                    EmbedOutcome::Found(chains) => chains,
                    EmbedOutcome::Fail { .. } => return Ok(InstanceReport::failed(instance)),
                };
                let emb =
                    Embedding::new(chains, chain_strength(&logical, pipeline.chain_strength)?)?;
                let physical = apply_embedding(&logical, &emb, hw)?;
                let set = anneal(&physical, &sampler)?;
                let configs: Vec<Vec<i8>> = set.reads.into_iter().map(|r| r.config).collect();
                let out = unembed(&configs, &emb, pipeline.repair)?;
                (out.reads, out.broken, emb.max_chain_length())
            }
        };

    let num_reads = reads.len();
    let mut energies = Vec::new();
    for read in reads.iter().flatten() {
        if let Some(a) = decode_with_meta(&meta, Vartype::Spin, read)?.assignment {
            energies.push(instance.dqm.energy(&a)?);
        }
    }
    let best = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let (best_energy, best_c, mean_c) = if energies.is_empty() {
        (Cost::Infinite, Cost::Infinite, Cost::Infinite)
    } else {
        let normalized: Vec<f64> = energies
            .iter()
            .map(|&e| instance.normalize(e))
            .collect::<Result<_>>()?;
        (
            Cost::Finite(best),
            Cost::Finite(instance.normalize(best)?),
            Cost::Finite(normalized.iter().sum::<f64>() / normalized.len() as f64),
        )
    };
    let mut report = InstanceReport {
        instance_id: instance.id.clone(),
        num_vars: instance.dqm.n(),
        embed_failed: false,
        r_chain: broken.iter().filter(|&&b| !b).count() as f64 / num_reads as f64,
        r_enc: energies.len() as f64 / num_reads as f64,
        best_energy,
        best_c,
        mean_c,
        reference: None,
        success: false,
        max_chain_length,
    };
    report.resolve(instance.optimum);
    Ok(report)
}

/// Runs every instance sequentially.
pub fn run_pipeline(instances: &[Instance], pipeline: &Pipeline) -> Result<RunReport> {
    if instances.is_empty() {
        return Err(Error::Config("no instances to run".into()));
    }
    let reports = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| run_instance(inst, i, pipeline))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        pipeline: pipeline.info(),
        instances: reports,
    })
}

/// For instances without a known optimum, counts as optimal the best
/// energy reached by any of `reports`, and recomputes success.
pub fn resolve_success(instances: &[Instance], reports: &mut [RunReport]) {
    for inst in instances {
        let reference = inst.optimum.or_else(|| {
            reports
                .iter()
                .flat_map(|r| r.instances.iter())
                .filter(|r| r.instance_id == inst.id)
                .filter_map(|r| r.best_energy.finite())
                .reduce(f64::min)
        });
        for report in reports.iter_mut() {
            for r in report
                .instances
                .iter_mut()
                .filter(|r| r.instance_id == inst.id)
            {
                r.resolve(reference);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub left: String,
    pub right: String,
    /// instances where the left pipeline found the better solution
    pub n_b: u64,
    pub n_w: u64,
    pub p: Option<f64>,
    pub verdict: Verdict,
}

/// Counts per-instance wins on best raw energy. Infinite loses to any
/// finite value and equal values are ignored.
pub fn compare(left: &RunReport, right: &RunReport) -> Result<ComparisonRecord> {
    let index = |r: &RunReport| -> Result<BTreeMap<String, Cost>> {
        let mut map = BTreeMap::new();
        for inst in &r.instances {
            if map
                .insert(inst.instance_id.clone(), inst.best_energy)
                .is_some()
            {
                return Err(Error::Config(format!(
                    "duplicate instance {}",
                    inst.instance_id
                )));
            }
        }
        Ok(map)
    };
    let a = index(left)?;
    let b = index(right)?;
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return Err(Error::Config(format!(
            "reports {} and {} cover different instances",
            left.pipeline.name, right.pipeline.name
        )));
    }
    let (mut n_b, mut n_w) = (0, 0);
    for (x, y) in a.values().zip(b.values()) {
        match (x, y) {
            (Cost::Finite(x), Cost::Finite(y)) if reaches(*x, *y) => {}
            _ => match x.total_cmp(y) {
                Ordering::Less => n_b += 1,
                Ordering::Greater => n_w += 1,
                Ordering::Equal => {}
            },
        }
    }
    let p = significance(n_b, n_w);
    let verdict = match (left.all_embeddings_failed(), right.all_embeddings_failed()) {
        (true, true) => Verdict::FailBoth,
        (true, false) => Verdict::FailLeft,
        (false, true) => Verdict::FailRight,
        (false, false) => Verdict::from_p(p),
    };
    Ok(ComparisonRecord {
        left: left.pipeline.name.clone(),
        right: right.pipeline.name.clone(),
        n_b,
        n_w,
        p,
        verdict,
    })
}

/// One point of a constraint-strength sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub multiplier: f64,
    /// class statistics of the best cost per instance
    pub best_c: Stat,
    pub r_enc: Stat,
}

/// Re-runs `pipeline` with the penalty scaled by each multiplier, using
/// `runner` to execute a pipeline over the instances.
pub fn constraint_sweep<F>(
    instances: &[Instance],
    pipeline: &Pipeline,
    multipliers: &[f64],
    runner: F,
) -> Result<Vec<SweepPoint>>
where
    F: Fn(&[Instance], &Pipeline) -> Result<RunReport>,
{
    if multipliers.is_empty() {
        return Err(Error::InvalidParameter("no multipliers to sweep".into()));
    }
    let mut points = Vec::with_capacity(multipliers.len());
    for &multiplier in multipliers {
        let mode = PenaltyMode::Scaled(multiplier);
        mode.validate()?;
        let scaled = Pipeline {
            penalty: mode,
            ..pipeline.clone()
        };
        let summary = runner(instances, &scaled)?.summary();
        points.push(SweepPoint {
            multiplier,
            best_c: summary.best_c,
            r_enc: summary.r_enc,
        });
    }
    Ok(points)
}
