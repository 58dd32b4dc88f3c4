//! Parallel execution over reads and instances, instance generation and
//! loading.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use dqmforge_core::bench::{
    constraint_sweep, run_instance, Hardware, Instance, Pipeline, RunReport, SweepPoint,
};
use dqmforge_core::embed::gen_chimera;
use dqmforge_core::encode::PenaltyMode;
use dqmforge_core::model::BinaryModel;
use dqmforge_core::problems::{coloring_dqm, fga_dqm, gen_er_graph, gen_fga, FgaConfig};
use dqmforge_core::rng::derive_seed;
use dqmforge_core::sample::{Annealer, SampleSet, SamplerParams};

use crate::formats::{read_json, FgaJson, GraphJson, HardwareJson, InstanceFile};
use crate::modes::HardwareSpec;
use crate::{Error, Result};

/// Anneals with reads spread over the rayon pool; identical to the
/// sequential sampler.
pub fn anneal_par(model: &BinaryModel, params: &SamplerParams) -> Result<SampleSet> {
    let annealer = Annealer::new(model, params)?;
    let reads = (0..annealer.num_reads())
        .into_par_iter()
        .map(|r| annealer.read(r))
        .collect();
    Ok(SampleSet {
        vartype: model.vartype(),
        reads,
    })
}

/// Runs the instances concurrently; the report is in instance order.
pub fn run_pipeline_par(
    instances: &[Instance],
    pipeline: &Pipeline,
) -> dqmforge_core::Result<RunReport> {
    if instances.is_empty() {
        return Err(dqmforge_core::Error::Config("no instances to run".into()));
    }
    let reports = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| run_instance(inst, i, pipeline))
        .collect::<dqmforge_core::Result<Vec<_>>>()?;
    Ok(RunReport {
        pipeline: pipeline.info(),
        instances: reports,
    })
}

pub fn sweep_par(
    instances: &[Instance],
    pipeline: &Pipeline,
    multipliers: &[f64],
) -> Result<Vec<SweepPoint>> {
    Ok(constraint_sweep(
        instances,
        pipeline,
        multipliers,
        run_pipeline_par,
    )?)
}

/// Seeded coloring instances, instance `k` drawn from `derive_seed(seed, k)`.
pub fn gen_coloring_files(
    nodes: usize,
    colors: usize,
    edge_prob: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<InstanceFile>> {
    (0..count)
        .map(|k| {
            let graph = gen_er_graph(nodes, edge_prob, derive_seed(seed, k as u64))?;
            let mut file = InstanceFile::from_model(&coloring_dqm(&graph, colors)?);
            file.id = Some(format!("coloring-q{nodes}-k{colors}-{k:04}"));
            file.graph = Some(GraphJson::from_graph(&graph));
            Ok(file)
        })
        .collect()
}

pub fn gen_fga_files(
    flights: usize,
    gates: usize,
    count: usize,
    seed: u64,
    config: &FgaConfig,
    mu: PenaltyMode,
) -> Result<Vec<InstanceFile>> {
    (0..count)
        .map(|k| {
            let inst = gen_fga(flights, gates, derive_seed(seed, k as u64), config)?;
            let mut file = InstanceFile::from_model(&fga_dqm(&inst, mu)?);
            file.id = Some(format!("fga-n{flights}-m{gates}-{k:04}"));
            file.fga = Some(FgaJson::from_instance(&inst));
            Ok(file)
        })
        .collect()
}

/// Expands directories into their `.json` files, sorted by name.
pub fn expand_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(|source| Error::Io {
                path: p.clone(),
                source,
            })?;
            let mut files: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::schema("no instance files found"));
    }
    Ok(out)
}

pub fn instances_from_files(files: &[(String, InstanceFile)], cap: u128) -> Result<Vec<Instance>> {
    let instances: Vec<Instance> = files
        .par_iter()
        .map(|(id, f)| f.to_instance(id, cap))
        .collect::<Result<_>>()?;
    let mut ids: Vec<&str> = instances.iter().map(|i| i.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::schema(format!("duplicate instance id `{}`", w[0])));
    }
    Ok(instances)
}

/// Reads instance files; ids default to the file stem.
pub fn load_instances(paths: &[PathBuf], cap: u128) -> Result<Vec<Instance>> {
    let files = expand_paths(paths)?
        .into_iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let stem = stem
                .strip_suffix(".dqm")
                .map(str::to_string)
                .unwrap_or(stem);
            read_json::<InstanceFile>(&p).map(|f| (stem, f))
        })
        .collect::<Result<Vec<_>>>()?;
    instances_from_files(&files, cap)
}

/// Builds the hardware a spec names; files are resolved against `base`.
pub fn resolve_hardware(spec: &HardwareSpec, base: &Path) -> Result<Hardware> {
    match spec {
        HardwareSpec::Native => Ok(Hardware::Native),
        HardwareSpec::Chimera(r, c, s) => Ok(Hardware::Graph(gen_chimera(*r, *c, *s)?)),
        HardwareSpec::File(p) => {
            let path = base.join(p);
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(Hardware::Graph(
                read_json::<HardwareJson>(&path)?.to_graph(&stem)?,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dqmforge_core::bench::run_pipeline;
    use dqmforge_core::model::Encoding;
    use dqmforge_core::sample::anneal;

    #[test]
    fn parallel_sampler_matches_sequential() {
        let files = gen_coloring_files(6, 3, 0.5, 1, 2).unwrap();
        let dqm = files[0].to_model().unwrap();
        let bm = dqmforge_core::encode::encode(
            &dqm,
            &dqmforge_core::encode::EncodeOptions::new(Encoding::OneHot, PenaltyMode::AutoMax),
        )
        .unwrap();
        let params = SamplerParams {
            num_reads: 16,
            sweeps: 50,
            ..SamplerParams::with_seed(9)
        };
        assert_eq!(
            anneal_par(&bm, &params).unwrap(),
            anneal(&bm, &params).unwrap()
        );
    }

    #[test]
    fn parallel_pipeline_matches_sequential() {
        let files: Vec<(String, InstanceFile)> = gen_coloring_files(6, 3, 0.5, 4, 1)
            .unwrap()
            .into_iter()
            .map(|f| (String::new(), f))
            .collect();
        let instances = instances_from_files(&files, 1 << 20).unwrap();
        assert_eq!(instances[2].id, "coloring-q6-k3-0002");
        let pipe = Pipeline::new(
            Encoding::DomainWall,
            Hardware::Native,
            SamplerParams {
                num_reads: 10,
                sweeps: 100,
                ..SamplerParams::with_seed(1)
            },
        );
        assert_eq!(
            run_pipeline_par(&instances, &pipe).unwrap(),
            run_pipeline(&instances, &pipe).unwrap()
        );
    }

    #[test]
    fn duplicate_ids_rejected() {
        let f = gen_coloring_files(4, 3, 0.5, 1, 1).unwrap().remove(0);
        let files = vec![("a".to_string(), f.clone()), ("b".to_string(), f)];
        assert!(instances_from_files(&files, 1 << 20).is_err());
    }

    #[test]
    fn fga_files_carry_the_optimum() {
        let files: Vec<(String, InstanceFile)> =
            gen_fga_files(7, 2, 2, 5, &FgaConfig::default(), PenaltyMode::AutoMax)
                .unwrap()
                .into_iter()
                .map(|f| (String::new(), f))
                .collect();
        let instances = instances_from_files(&files, 1 << 20).unwrap();
        assert!(instances.iter().all(|i| i.optimum.is_some()));
    }
}
