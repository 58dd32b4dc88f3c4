//! Command-line driver.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use dqmforge_core::bench::{compare, resolve_success, Pipeline};
use dqmforge_core::embed::{
    apply_embedding, chain_strength, embed_greedy, unembed, ChainStrengthMode, EmbedOutcome,
    Embedding, RepairMode, DEFAULT_ATTEMPTS,
};
use dqmforge_core::encode::{decode, encode, EncodeOptions, PenaltyMode};
use dqmforge_core::model::{Assignment, BinaryModel, Encoding, Vartype};
use dqmforge_core::problems::THREE_COLORING_EDGE_PROB;
use dqmforge_core::sample::{
    solve_exact, BetaSchedule, SamplerParams, DEFAULT_EXACT_CAP, DEFAULT_READS, DEFAULT_SWEEPS,
};

use crate::experiment::{write_outcome, ExperimentConfig};
use crate::formats::{
    read_json, to_json_bytes, write_bytes, BinaryModelJson, EmbeddingJson, FgaConfigJson,
    InstanceFile, SampleJson, SampleSetJson,
};
use crate::modes::{
    parse_chain_mode, parse_encoding, parse_hardware, parse_penalty, parse_repair, penalty_name,
    HardwareSpec,
};
use crate::report::{
    comparison_table, emit_comparisons, emit_report, emit_sweep, Format, RunReportJson,
};
use crate::runner::{
    anneal_par, gen_coloring_files, gen_fga_files, load_instances, resolve_hardware,
    run_pipeline_par, sweep_par,
};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "dqmforge",
    version,
    about = "Encode, embed, sample and benchmark discrete quadratic models"
)]
pub struct Cli {
    /// Master seed for every random choice
    #[arg(long, global = true, env = "DQMFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (outputs do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate benchmark instances
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compile a discrete model into a binary model
    Encode(EncodeArgs),
    /// Find a minor embedding of a binary model's interaction graph
    Embed(EmbedArgs),
    /// Anneal a binary model, optionally through an embedding
    Sample(SampleArgs),
    /// Solve a discrete or binary model exhaustively
    Exact(ExactArgs),
    /// Decode samples of an encoded model into assignments
    Decode(DecodeArgs),
    /// Run, sweep and compare pipelines
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Random graph coloring instances
    Coloring(GenColoringArgs),
    /// Synthetic flight-gate assignment instances
    Fga(GenFgaArgs),
}

#[derive(Debug, Args)]
pub struct GenColoringArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long, default_value_t = 3)]
    pub colors: usize,
    #[arg(long, default_value_t = THREE_COLORING_EDGE_PROB)]
    pub edge_prob: f64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenFgaArgs {
    #[arg(long, default_value_t = 7)]
    pub flights: usize,
    #[arg(long, default_value_t = 2)]
    pub gates: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Generator ranges as JSON; unset fields keep their defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Strength of the gate-overlap penalty
    #[arg(long, default_value = "auto", value_parser = parse_penalty)]
    pub mu: PenaltyMode,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long, value_parser = parse_encoding)]
    pub encoding: Encoding,
    #[arg(long, default_value = "auto", value_parser = parse_penalty)]
    pub penalty: PenaltyMode,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// chimera:R,C,S or a hardware graph file
    #[arg(long, value_parser = parse_hardware)]
    pub hardware: HardwareSpec,
    #[arg(long, default_value = "utc", value_parser = parse_chain_mode)]
    pub chain_mode: ChainStrengthMode,
    #[arg(long, default_value_t = DEFAULT_ATTEMPTS)]
    pub attempts: usize,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = DEFAULT_READS)]
    pub reads: usize,
    #[arg(long, default_value_t = DEFAULT_SWEEPS)]
    pub sweeps: usize,
    /// Explicit inverse temperatures HOT,COLD instead of the automatic range
    #[arg(long, value_parser = parse_beta)]
    pub beta: Option<(f64, f64)>,
}

impl SamplerArgs {
    fn params(&self, seed: u64) -> Result<SamplerParams> {
        let params = SamplerParams {
            num_reads: self.reads,
            sweeps: self.sweeps,
            beta: match self.beta {
                Some((hot, cold)) => BetaSchedule::Explicit { hot, cold },
                None => BetaSchedule::Auto,
            },
            seed,
        };
        params.validate()?;
        Ok(params)
    }
}

fn parse_beta(s: &str) -> std::result::Result<(f64, f64), String> {
    let (hot, cold) = s
        .split_once(',')
        .ok_or_else(|| format!("expected HOT,COLD, got `{s}`"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad inverse temperature `{t}`"))
    };
    Ok((num(hot)?, num(cold)?))
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Sample through this embedding (needs --hardware)
    #[arg(long, requires = "hardware")]
    pub embedding: Option<PathBuf>,
    #[arg(long, value_parser = parse_hardware, requires = "embedding")]
    pub hardware: Option<HardwareSpec>,
    #[arg(long, default_value = "majority", value_parser = parse_repair)]
    pub repair: RepairMode,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// Largest search space to enumerate
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub cap: u128,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Also report energies under this discrete model
    #[arg(long)]
    pub dqm: Option<PathBuf>,
    pub model: PathBuf,
    pub samples: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Run one pipeline over instances, or a whole experiment config
    Run(BenchRunArgs),
    /// Mean cost against the constraint strength multiplier
    Sweep(BenchSweepArgs),
    /// Pairwise sign tests between run reports
    Compare(BenchCompareArgs),
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, value_parser = parse_encoding)]
    pub encoding: Option<Encoding>,
    /// native, chimera:R,C,S or a hardware graph file
    #[arg(long, default_value = "native", value_parser = parse_hardware)]
    pub hardware: HardwareSpec,
    #[arg(long, default_value = "auto", value_parser = parse_penalty)]
    pub penalty: PenaltyMode,
    #[arg(long, default_value = "utc", value_parser = parse_chain_mode)]
    pub chain_mode: ChainStrengthMode,
    #[arg(long, default_value = "majority", value_parser = parse_repair)]
    pub repair: RepairMode,
    #[arg(long, default_value_t = DEFAULT_ATTEMPTS)]
    pub attempts: usize,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub exact_cap: u128,
}

impl PipelineArgs {
    fn build(&self, seed: u64) -> Result<Pipeline> {
        let encoding = self
            .encoding
            .ok_or_else(|| Error::schema("--encoding is required unless --config is given"))?;
        if self.attempts == 0 {
            return Err(Error::schema("--attempts must be >= 1"));
        }
        let hardware = resolve_hardware(&self.hardware, Path::new("."))?;
        let mut pipe = Pipeline::new(encoding, hardware, self.sampler.params(seed)?);
        pipe.penalty = self.penalty;
        pipe.chain_strength = self.chain_mode;
        pipe.repair = self.repair;
        pipe.embed_attempts = self.attempts;
        Ok(pipe)
    }
}

#[derive(Debug, Args)]
pub struct BenchRunArgs {
    /// Experiment config; replaces the pipeline flags
    #[arg(long, conflicts_with = "instances")]
    pub config: Option<PathBuf>,
    /// Instance files or directories of them
    pub instances: Vec<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Output file (stdout when absent); with --config, overrides the output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchSweepArgs {
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.25, 1.0, 4.0])]
    pub multipliers: Vec<f64>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchCompareArgs {
    /// Two or more run reports; every pair is compared
    #[arg(num_args = 2.., required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// table, json or csv
    #[arg(long, default_value = "table")]
    pub format: String,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return 1;
        }
        // a pool may already exist when called in-process more than once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_bytes(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn hardware_name(spec: &HardwareSpec) -> String {
    match spec {
        HardwareSpec::Native => "native".into(),
        HardwareSpec::Chimera(r, c, s) => format!("chimera({r},{c},{s})"),
        HardwareSpec::File(p) => p.display().to_string(),
    }
}

fn sampler_json(p: &SamplerParams) -> Value {
    let beta = match p.beta {
        BetaSchedule::Auto => json!("auto"),
        BetaSchedule::Explicit { hot, cold } => json!([hot, cold]),
    };
    json!({"num_reads": p.num_reads, "sweeps": p.sweeps, "beta": beta, "seed": p.seed})
}

fn pipeline_json(a: &PipelineArgs, p: &Pipeline) -> Value {
    json!({
        "encoding": p.encoding.name(),
        "hardware": hardware_name(&a.hardware),
        "penalty": penalty_name(p.penalty),
        "chain_mode": p.chain_strength.name(),
        "repair": p.repair.name(),
        "attempts": p.embed_attempts,
        "sampler": sampler_json(&p.sampler),
        "exact_cap": a.exact_cap.to_string(),
    })
}

fn paths_json(paths: &[PathBuf]) -> Value {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Gen(GenCommand::Coloring(a)) => {
            let files = gen_coloring_files(a.nodes, a.colors, a.edge_prob, a.count, seed)?;
            let params = json!({"command": "gen coloring", "nodes": a.nodes, "colors": a.colors,
                "edge_prob": a.edge_prob, "count": a.count, "seed": seed});
            write_instances(files, &a.out_dir, &params)
        }
        Command::Gen(GenCommand::Fga(a)) => {
            let config = match &a.config {
                Some(p) => read_json::<FgaConfigJson>(p)?,
                None => FgaConfigJson::default(),
            };
            let files = gen_fga_files(
                a.flights,
                a.gates,
                a.count,
                seed,
                &config.to_config()?,
                a.mu,
            )?;
            let params = json!({"command": "gen fga", "flights": a.flights, "gates": a.gates, "count": a.count,
                "mu": penalty_name(a.mu), "config": config, "seed": seed});
            write_instances(files, &a.out_dir, &params)
        }
        Command::Encode(a) => {
            let dqm = read_json::<InstanceFile>(&a.input)?.to_model()?;
            let bm = encode(&dqm, &EncodeOptions::new(a.encoding, a.penalty))?;
            let mut out = BinaryModelJson::from_model(&bm);
            out.params = Some(
                json!({"command": "encode", "input": a.input.display().to_string(),
                "encoding": a.encoding.name(), "penalty": penalty_name(a.penalty)}),
            );
            write_bytes(&a.output, &to_json_bytes(&out))
        }
        Command::Embed(a) => cmd_embed(a, seed),
        Command::Sample(a) => cmd_sample(a, seed),
        Command::Exact(a) => cmd_exact(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Bench(BenchCommand::Run(a)) => cmd_bench_run(a, seed),
        Command::Bench(BenchCommand::Sweep(a)) => {
            let instances = load_instances(&a.instances, a.pipeline.exact_cap)?;
            let pipe = a.pipeline.build(seed)?;
            let points = sweep_par(&instances, &pipe, &a.multipliers)?;
            let params = json!({"command": "bench sweep", "instances": paths_json(&a.instances),
                "multipliers": a.multipliers, "pipeline": pipeline_json(&a.pipeline, &pipe)});
            output(
                a.out.as_deref(),
                &emit_sweep(&pipe.name, &points, Some(&params), a.format)?,
            )
        }
        Command::Bench(BenchCommand::Compare(a)) => {
            let reports = a
                .reports
                .iter()
                .map(|p| read_json::<RunReportJson>(p)?.to_report())
                .collect::<Result<Vec<_>>>()?;
            let mut records = Vec::new();
            for (i, x) in reports.iter().enumerate() {
                for y in &reports[i + 1..] {
                    records.push(compare(x, y)?);
                }
            }
            let bytes = match a.format.as_str() {
                "table" => comparison_table(&records).into_bytes(),
                "json" => emit_comparisons(&records, Format::Json)?,
                "csv" => emit_comparisons(&records, Format::Csv)?,
                other => {
                    return Err(Error::schema(format!(
                        "--format: unknown comparison format `{other}` (table, json, csv)"
                    )))
                }
            };
            output(a.out.as_deref(), &bytes)
        }
    }
}

fn write_instances(files: Vec<InstanceFile>, dir: &Path, params: &Value) -> Result<()> {
    for mut f in files {
        let id = f.id.clone().expect("generated instances carry ids");
        f.params = Some(params.clone());
        write_bytes(&dir.join(format!("{id}.json")), &to_json_bytes(&f))?;
    }
    Ok(())
}

fn cmd_embed(a: &EmbedArgs, seed: u64) -> Result<()> {
    let model = read_json::<BinaryModelJson>(&a.input)?.to_model()?;
    let spin = model.as_vartype(Vartype::Spin)?;
    let hw = match resolve_hardware(&a.hardware, Path::new("."))? {
        dqmforge_core::bench::Hardware::Graph(g) => g,
        dqmforge_core::bench::Hardware::Native => {
            return Err(Error::schema(
                "--hardware: embedding needs a hardware graph",
            ))
        }
    };
    if a.attempts == 0 {
        return Err(Error::schema("--attempts must be >= 1"));
    }
    let params = json!({"command": "embed", "input": a.input.display().to_string(),
        "hardware": hw.name(), "chain_mode": a.chain_mode.name(), "attempts": a.attempts, "seed": seed});
    let mut out = match embed_greedy(
        spin.num_vars(),
        &spin.interaction_edges(),
        &hw,
        a.attempts,
        seed,
    )? {
        EmbedOutcome::Found(chains) => {
            let emb = Embedding::new(chains, chain_strength(&spin, a.chain_mode)?)?;
            EmbeddingJson::from_embedding(&emb)
        }
        EmbedOutcome::Fail { attempts } => EmbeddingJson::failed(attempts),
    };
    out.params = Some(params);
    write_bytes(&a.output, &to_json_bytes(&out))
}

fn cmd_sample(a: &SampleArgs, seed: u64) -> Result<()> {
    let model = read_json::<BinaryModelJson>(&a.input)?.to_model()?;
    let params = a.sampler.params(seed)?;
    let mut echo = json!({"command": "sample", "input": a.input.display().to_string(), "sampler": sampler_json(&params)});
    let mut out = match (&a.embedding, &a.hardware) {
        (Some(emb_path), Some(spec)) => {
            let emb = read_json::<EmbeddingJson>(emb_path)?.to_embedding()?;
            let hw = match resolve_hardware(spec, Path::new("."))? {
                dqmforge_core::bench::Hardware::Graph(g) => g,
                dqmforge_core::bench::Hardware::Native => {
                    return Err(Error::schema("--hardware: needs a hardware graph"))
                }
            };
            let spin = model.as_vartype(Vartype::Spin)?;
            emb.validate(spin.num_vars(), &spin.interaction_edges(), &hw)?;
            let physical = apply_embedding(&spin, &emb, &hw)?;
            let set = anneal_par(&physical, &params)?;
            let configs: Vec<Vec<i8>> = set.reads.into_iter().map(|r| r.config).collect();
            let un = unembed(&configs, &emb, a.repair)?;
            echo["embedding"] = json!(emb_path.display().to_string());
            echo["hardware"] = json!(hw.name());
            echo["repair"] = json!(a.repair.name());
            echo["r_chain"] = json!(un.r_chain());
            aggregate_logical(&model, &un.reads, &un.broken)?
        }
        _ => SampleSetJson::from_sample_set(&anneal_par(&model, &params)?),
    };
    if model.meta().is_some() {
        for s in &mut out.samples {
            s.valid = Some(decode(&model, &s.config)?.is_valid());
        }
    }
    out.params = Some(echo);
    write_bytes(&a.output, &to_json_bytes(&out))
}

/// Groups repaired logical spin reads by configuration, in the model's
/// vartype, lowest energy first.
fn aggregate_logical(
    model: &BinaryModel,
    reads: &[Option<Vec<i8>>],
    broken: &[bool],
) -> Result<SampleSetJson> {
    let mut groups: BTreeMap<Vec<i8>, (usize, usize)> = BTreeMap::new();
    let mut discarded = 0;
    for (read, &b) in reads.iter().zip(broken) {
        match read {
            Some(spins) => {
                let config: Vec<i8> = spins
                    .iter()
                    .map(|&s| model.vartype().from_spin_value(s))
                    .collect();
                let g = groups.entry(config).or_default();
                g.0 += 1;
                g.1 += usize::from(b);
            }
            None => discarded += 1,
        }
    }
    let mut samples = groups
        .into_iter()
        .map(|(config, (count, broken))| {
            let energy = model.energy(&config)?;
            Ok(SampleJson {
                config,
                energy,
                count,
                valid: None,
                broken: Some(broken),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by(|x, y| {
        x.energy
            .total_cmp(&y.energy)
            .then_with(|| x.config.cmp(&y.config))
    });
    Ok(SampleSetJson {
        vartype: model.vartype().to_string(),
        samples,
        discarded: Some(discarded),
        num_optima: None,
        params: None,
    })
}

#[derive(Serialize)]
struct DqmSolution {
    energy: f64,
    optima: Vec<Vec<usize>>,
    num_optima: u64,
    params: Value,
}

fn cmd_exact(a: &ExactArgs) -> Result<()> {
    let raw: Value = read_json(&a.input)?;
    let params = json!({"command": "exact", "input": a.input.display().to_string(), "cap": a.cap.to_string()});
    let bytes = if raw.get("num_vars").is_some() {
        let model = serde_json::from_value::<BinaryModelJson>(raw)
            .map_err(|source| Error::Json {
                path: a.input.clone(),
                source,
            })?
            .to_model()?;
        let sol = solve_exact(&model, a.cap)?;
        to_json_bytes(&SampleSetJson {
            vartype: model.vartype().to_string(),
            samples: sol
                .optima
                .into_iter()
                .map(|config| SampleJson {
                    config,
                    energy: sol.energy,
                    count: 1,
                    valid: None,
                    broken: None,
                })
                .collect(),
            discarded: None,
            num_optima: Some(sol.num_optima),
            params: Some(params),
        })
    } else {
        let dqm = serde_json::from_value::<InstanceFile>(raw)
            .map_err(|source| Error::Json {
                path: a.input.clone(),
                source,
            })?
            .to_model()?;
        let sol = solve_exact(&dqm, a.cap)?;
        to_json_bytes(&DqmSolution {
            energy: sol.energy,
            optima: sol.optima.into_iter().map(Assignment::into_inner).collect(),
            num_optima: sol.num_optima,
            params,
        })
    };
    write_bytes(&a.output, &bytes)
}

#[derive(Serialize)]
struct DecodedJson {
    config: Vec<i8>,
    count: usize,
    energy: f64,
    valid: bool,
    assignment: Option<Vec<usize>>,
    violated_vars: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dqm_energy: Option<f64>,
}

fn cmd_decode(a: &DecodeArgs) -> Result<()> {
    let model = read_json::<BinaryModelJson>(&a.model)?.to_model()?;
    let samples = read_json::<SampleSetJson>(&a.samples)?;
    if samples.vartype()? != model.vartype() {
        return Err(Error::schema(format!(
            "vartype: samples are {} but the model is {}",
            samples.vartype,
            model.vartype()
        )));
    }
    let dqm = a
        .dqm
        .as_ref()
        .map(|p| read_json::<InstanceFile>(p)?.to_model())
        .transpose()?;
    let decoded = samples
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let d = decode(&model, &s.config)
                .map_err(|e| Error::schema(format!("samples[{k}].config: {e}")))?;
            let dqm_energy = match (&dqm, &d.assignment) {
                (Some(m), Some(x)) => Some(m.energy(x)?),
                _ => None,
            };
            Ok(DecodedJson {
                config: s.config.clone(),
                count: s.count,
                energy: model.energy(&s.config)?,
                valid: d.is_valid(),
                assignment: d.assignment.map(Assignment::into_inner),
                violated_vars: d.violated_vars,
                dqm_energy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let params = json!({"command": "decode", "model": a.model.display().to_string(),
        "samples": a.samples.display().to_string()});
    write_bytes(
        &a.output,
        &to_json_bytes(&json!({"decoded": decoded, "params": params})),
    )
}

fn cmd_bench_run(a: &BenchRunArgs, seed: u64) -> Result<()> {
    if let Some(config_path) = &a.config {
        let mut config = read_json::<ExperimentConfig>(config_path)?;
        let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        if let Some(dir) = &a.out {
            config.output_dir = dir.clone();
        } else {
            config.output_dir = base.join(&config.output_dir);
        }
        let outcome = config.run(&base)?;
        let params = json!({"command": "bench run", "config": config});
        let written = write_outcome(&outcome, &config.output_dir, Some(&params))?;
        let mut stdout = std::io::stdout();
        let _ = stdout.write_all(comparison_table(&outcome.comparisons).as_bytes());
        for p in written {
            let _ = writeln!(stdout, "wrote {}", p.display());
        }
        return Ok(());
    }
    if a.instances.is_empty() {
        return Err(Error::schema("bench run needs instance files or --config"));
    }
    let instances = load_instances(&a.instances, a.pipeline.exact_cap)?;
    let pipe = a.pipeline.build(seed)?;
    let mut reports = vec![run_pipeline_par(&instances, &pipe)?];
    resolve_success(&instances, &mut reports);
    let params = json!({"command": "bench run", "instances": paths_json(&a.instances),
        "pipeline": pipeline_json(&a.pipeline, &pipe)});
    output(
        a.out.as_deref(),
        &emit_report(&reports[0], Some(&params), a.format)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_from(["dqmforge", "encode", "--bogus"]), 1);
        assert_eq!(
            main_from(["dqmforge", "encode", "--encoding", "unary", "a", "b"]),
            1
        );
        assert_eq!(main_from(["dqmforge", "--help"]), 0);
    }

    #[test]
    fn missing_input_exits_two() {
        assert_eq!(
            main_from([
                "dqmforge",
                "encode",
                "--encoding",
                "dw",
                "/nonexistent/in.json",
                "/tmp/x.json"
            ]),
            2
        );
    }
}
