//! JSON forms of models, problem instances, hardware graphs, embeddings
//! and sample sets.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use dqmforge_core::bench::{Instance, Normalization};
use dqmforge_core::embed::{Embedding, HardwareGraph};
use dqmforge_core::model::{BinaryModel, DiscreteModel, Encoding, EncodingMeta, Vartype};
use dqmforge_core::problems::{FgaConfig, FgaInstance, Graph, IntRange};
use dqmforge_core::sample::SampleSet;

use crate::{Error, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory JSON serialization");
    out.push(b'\n');
    out
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, &to_json_bytes(value))
}

fn field<T>(what: impl std::fmt::Display, r: dqmforge_core::Result<T>) -> Result<T> {
    r.map_err(|e| Error::schema(format!("{what}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub q: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphJson {
    pub fn from_graph(g: &Graph) -> Self {
        GraphJson {
            q: g.q(),
            edges: g.edges().to_vec(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        field("graph.edges", Graph::new(self.q, self.edges.clone()))
    }
}

/// Flight-gate parameters under their symbol names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgaJson {
    pub n_flights: usize,
    pub m_gates: usize,
    pub n_d: Vec<f64>,
    pub n_a: Vec<f64>,
    pub n_ij: Vec<Vec<f64>>,
    pub t_in: Vec<f64>,
    pub t_out: Vec<f64>,
    pub t_a: Vec<f64>,
    pub t_d: Vec<f64>,
    pub t_ab: Vec<Vec<f64>>,
    pub t_buf: f64,
}

impl FgaJson {
    pub fn from_instance(inst: &FgaInstance) -> Self {
        FgaJson {
            n_flights: inst.n_flights,
            m_gates: inst.m_gates,
            n_d: inst.n_dep.clone(),
            n_a: inst.n_arr.clone(),
            n_ij: inst.n_transfer.clone(),
            t_in: inst.t_in.clone(),
            t_out: inst.t_out.clone(),
            t_a: inst.t_gate_arr.clone(),
            t_d: inst.t_gate_dep.clone(),
            t_ab: inst.t_gate_gate.clone(),
            t_buf: inst.t_buf,
        }
    }

    pub fn to_instance(&self) -> Result<FgaInstance> {
        let inst = FgaInstance {
            n_flights: self.n_flights,
            m_gates: self.m_gates,
            n_dep: self.n_d.clone(),
            n_arr: self.n_a.clone(),
            n_transfer: self.n_ij.clone(),
            t_in: self.t_in.clone(),
            t_out: self.t_out.clone(),
            t_gate_arr: self.t_a.clone(),
            t_gate_dep: self.t_d.clone(),
            t_gate_gate: self.t_ab.clone(),
            t_buf: self.t_buf,
        };
        field("fga", inst.validate())?;
        Ok(inst)
    }
}

/// Generator ranges; inclusive ranges are written as `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FgaConfigJson {
    pub passengers: (u32, u32),
    pub transfer_passengers: (u32, u32),
    pub transfer_prob: f64,
    pub gate_time: (u32, u32),
    pub arrival_time: (u32, u32),
    pub stay: (u32, u32),
    pub buffer: f64,
}

impl Default for FgaConfigJson {
    fn default() -> Self {
        FgaConfigJson::from_config(&FgaConfig::default())
    }
}

impl FgaConfigJson {
    pub fn from_config(c: &FgaConfig) -> Self {
        let pair = |r: IntRange| (r.lo, r.hi);
        FgaConfigJson {
            passengers: pair(c.passengers),
            transfer_passengers: pair(c.transfer_passengers),
            transfer_prob: c.transfer_prob,
            gate_time: pair(c.gate_time),
            arrival_time: pair(c.arrival_time),
            stay: pair(c.stay),
            buffer: c.buffer,
        }
    }

    pub fn to_config(&self) -> Result<FgaConfig> {
        let range = |(lo, hi): (u32, u32)| IntRange::new(lo, hi);
        let config = FgaConfig {
            passengers: range(self.passengers),
            transfer_passengers: range(self.transfer_passengers),
            transfer_prob: self.transfer_prob,
            gate_time: range(self.gate_time),
            arrival_time: range(self.arrival_time),
            stay: range(self.stay),
            buffer: self.buffer,
        };
        config.validate()?;
        Ok(config)
    }
}

/// A discrete model, optionally with the problem it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub n: usize,
    pub m: usize,
    pub linear: Vec<(usize, usize, f64)>,
    pub quadratic: Vec<(usize, usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fga: Option<FgaJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

impl InstanceFile {
    pub fn from_model(dqm: &DiscreteModel) -> Self {
        InstanceFile {
            id: None,
            n: dqm.n(),
            m: dqm.m(),
            linear: dqm.linear_terms().map(|((i, a), v)| (i, a, v)).collect(),
            quadratic: dqm
                .quadratic_terms()
                .map(|((i, j, a, b), v)| (i, j, a, b, v))
                .collect(),
            graph: None,
            fga: None,
            params: None,
        }
    }

    pub fn to_model(&self) -> Result<DiscreteModel> {
        let mut d = field("n/m", DiscreteModel::new(self.n, self.m))?;
        for (k, &(i, a, v)) in self.linear.iter().enumerate() {
            field(format_args!("linear[{k}]"), d.add_linear(i, a, v))?;
        }
        for (k, &(i, j, a, b, v)) in self.quadratic.iter().enumerate() {
            field(
                format_args!("quadratic[{k}]"),
                d.add_quadratic(i, j, a, b, v),
            )?;
        }
        Ok(d)
    }

    /// Benchmark instance; the exact optimum is attached when the search
    /// space is within `cap`.
    pub fn to_instance(&self, default_id: &str, cap: u128) -> Result<Instance> {
        let dqm = self.to_model()?;
        let id = self.id.clone().unwrap_or_else(|| default_id.to_string());
        let normalization = match (&self.graph, &self.fga) {
            (Some(_), Some(_)) => {
                return Err(Error::schema(format!(
                    "instance {id}: both graph and fga given"
                )))
            }
            (Some(g), None) => {
                let graph = g.to_graph()?;
                if graph.q() != dqm.n() {
                    return Err(Error::schema(format!(
                        "instance {id}: graph.q {} differs from n {}",
                        graph.q(),
                        dqm.n()
                    )));
                }
                Normalization::PerEdge(graph.num_edges())
            }
            (None, Some(f)) => {
                f.to_instance()?;
                if dqm.search_space() > cap {
                    return Err(Error::schema(format!(
                        "instance {id}: flight-gate cost needs the exact optimum but {} assignments exceed the cap {cap}",
                        dqm.search_space()
                    )));
                }
                Normalization::SubtractOptimum
            }
            (None, None) => Normalization::Raw,
        };
        let instance = Instance {
            id,
            dqm,
            normalization,
            optimum: None,
        };
        Ok(instance.with_exact_optimum(cap)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaJson {
    pub encoding: String,
    pub n: usize,
    pub m: usize,
    /// `[i, slot, variable]` triples
    pub var_layout: Vec<(usize, usize, usize)>,
    pub penalty_strength: f64,
}

impl MetaJson {
    pub fn from_meta(meta: &EncodingMeta) -> Self {
        MetaJson {
            encoding: meta.encoding.name().to_string(),
            n: meta.n,
            m: meta.m,
            var_layout: meta
                .layout
                .iter()
                .enumerate()
                .flat_map(|(i, slots)| slots.iter().enumerate().map(move |(s, &v)| (i, s, v)))
                .collect(),
            penalty_strength: meta.penalty_strength,
        }
    }

    pub fn to_meta(&self) -> Result<EncodingMeta> {
        let encoding = match self.encoding.as_str() {
            "one-hot" => Encoding::OneHot,
            "domain-wall" => Encoding::DomainWall,
            "raw" => Encoding::Raw,
            other => {
                return Err(Error::schema(format!(
                    "meta.encoding: unknown encoding `{other}`"
                )))
            }
        };
        if self.m < 2 {
            return Err(Error::schema(format!(
                "meta.m: must be >= 2, got {}",
                self.m
            )));
        }
        let slots = encoding.slots(self.m);
        let mut layout: Vec<Vec<Option<usize>>> = vec![vec![None; slots]; self.n];
        for (k, &(i, s, v)) in self.var_layout.iter().enumerate() {
            let cell = layout
                .get_mut(i)
                .and_then(|row| row.get_mut(s))
                .ok_or_else(|| {
                    Error::schema(format!(
                        "meta.var_layout[{k}]: slot ({i}, {s}) out of range"
                    ))
                })?;
            if cell.replace(v).is_some() {
                return Err(Error::schema(format!(
                    "meta.var_layout[{k}]: slot ({i}, {s}) given twice"
                )));
            }
        }
        let layout = layout
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(s, v)| {
                        v.ok_or_else(|| {
                            Error::schema(format!("meta.var_layout: slot ({i}, {s}) missing"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EncodingMeta {
            encoding,
            n: self.n,
            m: self.m,
            layout,
            penalty_strength: self.penalty_strength,
        })
    }
}

fn vartype_name(v: Vartype) -> String {
    v.to_string()
}

fn parse_vartype(s: &str) -> Result<Vartype> {
    match s {
        "BINARY" => Ok(Vartype::Binary),
        "SPIN" => Ok(Vartype::Spin),
        _ => Err(Error::schema(format!(
            "vartype: expected BINARY or SPIN, got `{s}`"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryModelJson {
    pub num_vars: usize,
    pub vartype: String,
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

impl BinaryModelJson {
    pub fn from_model(bm: &BinaryModel) -> Self {
        BinaryModelJson {
            num_vars: bm.num_vars(),
            vartype: vartype_name(bm.vartype()),
            linear: bm
                .linear()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
            quadratic: bm.quadratic_terms().map(|((i, j), v)| (i, j, v)).collect(),
            offset: bm.offset(),
            meta: bm.meta().map(MetaJson::from_meta),
            params: None,
        }
    }

    pub fn to_model(&self) -> Result<BinaryModel> {
        let mut bm = BinaryModel::new(self.num_vars, parse_vartype(&self.vartype)?);
        for (k, &(i, v)) in self.linear.iter().enumerate() {
            field(format_args!("linear[{k}]"), bm.add_linear(i, v))?;
        }
        for (k, &(i, j, v)) in self.quadratic.iter().enumerate() {
            field(format_args!("quadratic[{k}]"), bm.add_quadratic(i, j, v))?;
        }
        if !self.offset.is_finite() {
            return Err(Error::schema("offset: must be finite"));
        }
        bm.add_offset(self.offset);
        match &self.meta {
            Some(meta) => field("meta", bm.with_meta(meta.to_meta()?)),
            None => Ok(bm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub num_qubits: usize,
    pub edges: Vec<(usize, usize)>,
}

impl HardwareJson {
    pub fn from_graph(hw: &HardwareGraph) -> Self {
        HardwareJson {
            name: Some(hw.name().to_string()),
            num_qubits: hw.num_qubits(),
            edges: hw.edges().to_vec(),
        }
    }

    pub fn to_graph(&self, default_name: &str) -> Result<HardwareGraph> {
        let name = self
            .name
            .clone()
            .unwrap_or_else(|| default_name.to_string());
        field(
            "edges",
            HardwareGraph::new(self.num_qubits, self.edges.clone(), name),
        )
    }
}

/// An embedding, or the record of a failed search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<BTreeMap<usize, Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

impl EmbeddingJson {
    pub fn from_embedding(emb: &Embedding) -> Self {
        EmbeddingJson {
            status: None,
            attempts: None,
            chains: Some(emb.chains().iter().cloned().enumerate().collect()),
            chain_strength: Some(emb.chain_strength()),
            params: None,
        }
    }

    pub fn failed(attempts: usize) -> Self {
        EmbeddingJson {
            status: Some("FAIL".into()),
            attempts: Some(attempts),
            chains: None,
            chain_strength: None,
            params: None,
        }
    }

    pub fn is_fail(&self) -> bool {
        self.status.as_deref() == Some("FAIL")
    }

    pub fn to_embedding(&self) -> Result<Embedding> {
        if let Some(status) = &self.status {
            return Err(Error::schema(format!(
                "status: embedding is `{status}`, no chains to use"
            )));
        }
        let chains = self
            .chains
            .as_ref()
            .ok_or_else(|| Error::schema("chains: missing"))?;
        let strength = self
            .chain_strength
            .ok_or_else(|| Error::schema("chain_strength: missing"))?;
        for (k, &var) in chains.keys().enumerate() {
            if var != k {
                return Err(Error::schema(format!("chains: variable {k} missing")));
            }
        }
        field(
            "chains",
            Embedding::new(chains.values().cloned().collect(), strength),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleJson {
    pub config: Vec<i8>,
    pub energy: f64,
    pub count: usize,
    /// whether the configuration decodes to a valid assignment
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid: Option<bool>,
    /// reads of this configuration that had broken chains before repair
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broken: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSetJson {
    pub vartype: String,
    pub samples: Vec<SampleJson>,
    /// reads dropped by chain repair
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discarded: Option<usize>,
    /// optimum count when the samples are the optima of an exact solve
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_optima: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

impl SampleSetJson {
    pub fn from_sample_set(set: &SampleSet) -> Self {
        SampleSetJson {
            vartype: vartype_name(set.vartype),
            samples: set
                .aggregate()
                .into_iter()
                .map(|s| SampleJson {
                    config: s.config,
                    energy: s.energy,
                    count: s.count,
                    valid: None,
                    broken: None,
                })
                .collect(),
            discarded: None,
            num_optima: None,
            params: None,
        }
    }

    pub fn vartype(&self) -> Result<Vartype> {
        parse_vartype(&self.vartype)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dqmforge_core::encode::{encode, EncodeOptions, PenaltyMode};
    use dqmforge_core::problems::{coloring_dqm, gen_er_graph, gen_fga};

    fn roundtrip<T: Serialize + DeserializeOwned>(v: &T) -> T {
        serde_json::from_slice(&to_json_bytes(v)).unwrap()
    }

    #[test]
    fn dqm_file_round_trip() {
        let g = gen_er_graph(6, 0.5, 3).unwrap();
        let dqm = coloring_dqm(&g, 3).unwrap();
        let mut file = InstanceFile::from_model(&dqm);
        file.graph = Some(GraphJson::from_graph(&g));
        let back = roundtrip(&file);
        assert_eq!(back.to_model().unwrap(), dqm);
        let inst = back.to_instance("x", 1 << 20).unwrap();
        assert_eq!(inst.normalization, Normalization::PerEdge(g.num_edges()));
        assert!(inst.optimum.is_some());
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = r#"{"n": 2, "m": 3, "linear": [[0, 1, 1.0], [5, 0, 2.0]], "quadratic": []}"#;
        let file: InstanceFile = serde_json::from_str(bad).unwrap();
        let err = file.to_model().unwrap_err().to_string();
        assert!(err.starts_with("linear[1]"), "{err}");
        let missing =
            serde_json::from_str::<InstanceFile>(r#"{"n": 2, "linear": [], "quadratic": []}"#);
        assert!(missing.unwrap_err().to_string().contains("`m`"));
    }

    #[test]
    fn encoded_model_round_trip_keeps_meta() {
        let dqm = coloring_dqm(&gen_er_graph(5, 0.5, 1).unwrap(), 3).unwrap();
        for encoding in [Encoding::OneHot, Encoding::DomainWall] {
            let bm = encode(
                &dqm,
                &EncodeOptions::new(encoding, PenaltyMode::Scaled(2.0)),
            )
            .unwrap();
            let back = roundtrip(&BinaryModelJson::from_model(&bm))
                .to_model()
                .unwrap();
            assert_eq!(back.meta(), bm.meta());
            assert_eq!(back.offset(), bm.offset());
            assert_eq!(back.linear(), bm.linear());
            assert_eq!(
                back.quadratic_terms().collect::<Vec<_>>(),
                bm.quadratic_terms().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn fga_round_trip() {
        let inst = gen_fga(7, 2, 4, &FgaConfig::default()).unwrap();
        assert_eq!(
            roundtrip(&FgaJson::from_instance(&inst))
                .to_instance()
                .unwrap(),
            inst
        );
        let cfg = roundtrip(&FgaConfigJson::default()).to_config().unwrap();
        assert_eq!(cfg, FgaConfig::default());
        let partial: FgaConfigJson = serde_json::from_str(r#"{"buffer": 5.0}"#).unwrap();
        assert_eq!(partial.to_config().unwrap().buffer, 5.0);
        assert!(serde_json::from_str::<FgaConfigJson>(r#"{"bufer": 5.0}"#).is_err());
    }

    #[test]
    fn embedding_round_trip_and_fail() {
        let chains: Vec<Vec<usize>> = (0..12).map(|v| vec![2 * v, 2 * v + 1]).collect();
        let emb = Embedding::new(chains, 1.5).unwrap();
        let text = String::from_utf8(to_json_bytes(&EmbeddingJson::from_embedding(&emb))).unwrap();
        assert!(text.contains("\"10\""));
        let back: EmbeddingJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_embedding().unwrap(), emb);
        let fail = roundtrip(&EmbeddingJson::failed(3));
        assert!(fail.is_fail());
        assert!(fail.to_embedding().is_err());
    }

    #[test]
    fn hardware_round_trip() {
        let hw = dqmforge_core::embed::gen_chimera(2, 2, 4).unwrap();
        assert_eq!(
            roundtrip(&HardwareJson::from_graph(&hw))
                .to_graph("x")
                .unwrap(),
            hw
        );
    }
}
