//! Report files: JSON (lossless), CSV and plot data.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use dqmforge_core::bench::{
    ClassSummary, ComparisonRecord, Cost, InstanceReport, PipelineInfo, RunReport, Stat,
    SweepPoint, Verdict,
};

use crate::formats::to_json_bytes;
use crate::modes::{parse_encoding, parse_penalty, penalty_name};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    PlotData,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "plotdata" => Ok(Format::PlotData),
            _ => Err(format!("unknown format `{s}` (json, csv, plotdata)")),
        }
    }
}

/// Finite costs as numbers, the infinite sentinel as the string "inf".
mod cost_serde {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(c: &Cost, s: S) -> Result<S::Ok, S::Error> {
        match c {
            Cost::Finite(v) => s.serialize_f64(*v),
            Cost::Infinite => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Cost, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Cost::Finite(v)),
            Repr::Text(t) if t == "inf" => Ok(Cost::Infinite),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{t}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineJson {
    pub name: String,
    pub encoding: String,
    pub penalty: String,
    pub hardware: String,
    pub chain_mode: String,
    pub repair: String,
    pub num_reads: usize,
    pub sweeps: usize,
    pub seed: u64,
}

impl PipelineJson {
    fn from_info(p: &PipelineInfo) -> Self {
        PipelineJson {
            name: p.name.clone(),
            encoding: p.encoding.name().to_string(),
            penalty: penalty_name(p.penalty),
            hardware: p.hardware.clone(),
            chain_mode: p.chain_mode.clone(),
            repair: p.repair.clone(),
            num_reads: p.num_reads,
            sweeps: p.sweeps,
            seed: p.seed,
        }
    }

    fn to_info(&self) -> Result<PipelineInfo> {
        Ok(PipelineInfo {
            name: self.name.clone(),
            encoding: parse_encoding(&self.encoding)
                .map_err(|e| Error::schema(format!("pipeline.encoding: {e}")))?,
            penalty: parse_penalty(&self.penalty)
                .map_err(|e| Error::schema(format!("pipeline.penalty: {e}")))?,
            hardware: self.hardware.clone(),
            chain_mode: self.chain_mode.clone(),
            repair: self.repair.clone(),
            num_reads: self.num_reads,
            sweeps: self.sweeps,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub instance_id: String,
    pub num_vars: usize,
    pub embed_failed: bool,
    pub r_chain: f64,
    pub r_enc: f64,
    #[serde(with = "cost_serde")]
    pub best_energy: Cost,
    #[serde(with = "cost_serde")]
    pub best_c: Cost,
    #[serde(with = "cost_serde")]
    pub mean_c: Cost,
    pub reference: Option<f64>,
    pub success: bool,
    pub max_chain_length: usize,
}

impl InstanceJson {
    fn from_report(r: &InstanceReport) -> Self {
        InstanceJson {
            instance_id: r.instance_id.clone(),
            num_vars: r.num_vars,
            embed_failed: r.embed_failed,
            r_chain: r.r_chain,
            r_enc: r.r_enc,
            best_energy: r.best_energy,
            best_c: r.best_c,
            mean_c: r.mean_c,
            reference: r.reference,
            success: r.success,
            max_chain_length: r.max_chain_length,
        }
    }

    fn to_report(&self) -> Result<InstanceReport> {
        for (name, rate) in [("r_chain", self.r_chain), ("r_enc", self.r_enc)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::schema(format!(
                    "instances[{}].{name}: {rate} not in [0, 1]",
                    self.instance_id
                )));
            }
        }
        Ok(InstanceReport {
            instance_id: self.instance_id.clone(),
            num_vars: self.num_vars,
            embed_failed: self.embed_failed,
            r_chain: self.r_chain,
            r_enc: self.r_enc,
            best_energy: self.best_energy,
            best_c: self.best_c,
            mean_c: self.mean_c,
            reference: self.reference,
            success: self.success,
            max_chain_length: self.max_chain_length,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatJson {
    #[serde(with = "cost_serde")]
    pub mean: Cost,
    #[serde(with = "cost_serde")]
    pub std: Cost,
    #[serde(with = "cost_serde")]
    pub stderr: Cost,
}

impl From<Stat> for StatJson {
    fn from(s: Stat) -> Self {
        StatJson {
            mean: s.mean,
            std: s.std,
            stderr: s.stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryJson {
    pub instances: usize,
    pub r_chain: StatJson,
    pub r_enc: StatJson,
    pub best_c: StatJson,
    pub mean_c: StatJson,
    pub success: f64,
    pub embed_failures: usize,
}

impl From<ClassSummary> for SummaryJson {
    fn from(s: ClassSummary) -> Self {
        SummaryJson {
            instances: s.instances,
            r_chain: s.r_chain.into(),
            r_enc: s.r_enc.into(),
            best_c: s.best_c.into(),
            mean_c: s.mean_c.into(),
            success: s.success,
            embed_failures: s.embed_failures,
        }
    }
}

/// A run report on disk. The summary is derived and ignored on reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReportJson {
    pub pipeline: PipelineJson,
    pub instances: Vec<InstanceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<SummaryJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

impl RunReportJson {
    pub fn from_report(r: &RunReport) -> Self {
        RunReportJson {
            pipeline: PipelineJson::from_info(&r.pipeline),
            instances: r.instances.iter().map(InstanceJson::from_report).collect(),
            summary: Some(r.summary().into()),
            params: None,
        }
    }

    pub fn to_report(&self) -> Result<RunReport> {
        Ok(RunReport {
            pipeline: self.pipeline.to_info()?,
            instances: self
                .instances
                .iter()
                .map(InstanceJson::to_report)
                .collect::<Result<_>>()?,
        })
    }
}

/// Three significant digits.
pub fn format_p(p: Option<f64>) -> String {
    p.map_or_else(String::new, |p| format!("{p:.2e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonJson {
    pub left: String,
    pub right: String,
    pub n_b: u64,
    pub n_w: u64,
    pub p: Option<f64>,
    pub verdict: String,
}

impl ComparisonJson {
    pub fn from_record(c: &ComparisonRecord) -> Self {
        ComparisonJson {
            left: c.left.clone(),
            right: c.right.clone(),
            n_b: c.n_b,
            n_w: c.n_w,
            p: c.p,
            verdict: c.verdict.name().to_string(),
        }
    }

    pub fn to_record(&self) -> Result<ComparisonRecord> {
        let verdict = Verdict::from_name(&self.verdict)
            .ok_or_else(|| Error::schema(format!("verdict: unknown verdict `{}`", self.verdict)))?;
        Ok(ComparisonRecord {
            left: self.left.clone(),
            right: self.right.clone(),
            n_b: self.n_b,
            n_w: self.n_w,
            p: self.p,
            verdict,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPointJson {
    pub multiplier: f64,
    pub best_c: StatJson,
    pub r_enc: StatJson,
}

impl From<&SweepPoint> for SweepPointJson {
    fn from(p: &SweepPoint) -> Self {
        SweepPointJson {
            multiplier: p.multiplier,
            best_c: p.best_c.into(),
            r_enc: p.r_enc.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJson {
    pub pipeline: String,
    pub points: Vec<SweepPointJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::schema(format!("csv: {}", e.error())))
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "instance_id",
    "encoding",
    "hardware",
    "chain_mode",
    "r_chain",
    "r_enc",
    "best_c",
    "mean_c",
    "success",
];

/// `(x, y, yerr)`
pub type PlotPoint = (f64, Cost, Cost);

/// One `x,y,yerr` table per series.
pub fn plotdata(series: &[(&str, Vec<PlotPoint>)]) -> Vec<u8> {
    let mut out = String::new();
    for (k, (name, points)) in series.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# series: {name}\nx,y,yerr\n"));
        for (x, y, err) in points {
            out.push_str(&format!("{x},{y},{err}\n"));
        }
    }
    out.into_bytes()
}

pub fn emit_report(report: &RunReport, params: Option<&Value>, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut json = RunReportJson::from_report(report);
            json.params = params.cloned();
            Ok(to_json_bytes(&json))
        }
        Format::Csv => {
            let p = &report.pipeline;
            csv_bytes(
                &REPORT_COLUMNS,
                report.instances.iter().map(|r| {
                    vec![
                        r.instance_id.clone(),
                        p.encoding.name().to_string(),
                        p.hardware.clone(),
                        p.chain_mode.clone(),
                        r.r_chain.to_string(),
                        r.r_enc.to_string(),
                        r.best_c.to_string(),
                        r.mean_c.to_string(),
                        r.success.to_string(),
                    ]
                }),
            )
        }
        Format::PlotData => {
            // class mean against problem size, with the standard deviation
            let s = report.summary();
            let n = report.instances.len().max(1) as f64;
            let x = report
                .instances
                .iter()
                .map(|r| r.num_vars as f64)
                .sum::<f64>()
                / n;
            let point = |st: Stat| vec![(x, st.mean, st.std)];
            let success = Stat::of(
                &report
                    .instances
                    .iter()
                    .map(|r| Cost::Finite(if r.success { 1.0 } else { 0.0 }))
                    .collect::<Vec<_>>(),
            );
            Ok(plotdata(&[
                ("r_chain", point(s.r_chain)),
                ("r_enc", point(s.r_enc)),
                ("best_c", point(s.best_c)),
                ("mean_c", point(s.mean_c)),
                ("success", point(success)),
            ]))
        }
    }
}

pub fn emit_comparisons(records: &[ComparisonRecord], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(to_json_bytes(
            &records
                .iter()
                .map(ComparisonJson::from_record)
                .collect::<Vec<_>>(),
        )),
        Format::Csv => csv_bytes(
            &["left", "right", "n_b", "n_w", "p", "verdict"],
            records.iter().map(|c| {
                vec![
                    c.left.clone(),
                    c.right.clone(),
                    c.n_b.to_string(),
                    c.n_w.to_string(),
                    format_p(c.p),
                    c.verdict.name().to_string(),
                ]
            }),
        ),
        Format::PlotData => Err(Error::schema("comparisons have no plot data form")),
    }
}

/// Fixed-width text table for terminals.
pub fn comparison_table(records: &[ComparisonRecord]) -> String {
    let width = records
        .iter()
        .map(|c| c.left.len().max(c.right.len()))
        .chain([5])
        .max()
        .unwrap_or(5);
    let mut out = format!(
        "{:<width$}  {:<width$}  {:>5}  {:>5}  {:>9}  verdict\n",
        "left", "right", "n_b", "n_w", "p"
    );
    for c in records {
        let p = match c.verdict {
            Verdict::FailLeft | Verdict::FailRight | Verdict::FailBoth => "FAIL".to_string(),
            _ => format_p(c.p),
        };
        out.push_str(&format!(
            "{:<width$}  {:<width$}  {:>5}  {:>5}  {:>9}  {}\n",
            c.left,
            c.right,
            c.n_b,
            c.n_w,
            p,
            c.verdict.name()
        ));
    }
    out
}

pub fn emit_sweep(
    pipeline: &str,
    points: &[SweepPoint],
    params: Option<&Value>,
    format: Format,
) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(to_json_bytes(&SweepJson {
            pipeline: pipeline.to_string(),
            points: points.iter().map(SweepPointJson::from).collect(),
            params: params.cloned(),
        })),
        Format::Csv => csv_bytes(
            &[
                "multiplier",
                "best_c",
                "best_c_stderr",
                "r_enc",
                "r_enc_stderr",
            ],
            points.iter().map(|p| {
                vec![
                    p.multiplier.to_string(),
                    p.best_c.mean.to_string(),
                    p.best_c.stderr.to_string(),
                    p.r_enc.mean.to_string(),
                    p.r_enc.stderr.to_string(),
                ]
            }),
        ),
        Format::PlotData => Ok(plotdata(&[
            (
                "best_c",
                points
                    .iter()
                    .map(|p| (p.multiplier, p.best_c.mean, p.best_c.stderr))
                    .collect(),
            ),
            (
                "r_enc",
                points
                    .iter()
                    .map(|p| (p.multiplier, p.r_enc.mean, p.r_enc.stderr))
                    .collect(),
            ),
        ])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dqmforge_core::bench::{compare, Hardware, Pipeline};
    use dqmforge_core::model::Encoding;
    use dqmforge_core::sample::SamplerParams;

    fn sample_report() -> RunReport {
        let info = Pipeline::new(
            Encoding::DomainWall,
            Hardware::Native,
            SamplerParams::with_seed(3),
        )
        .info();
        let inst = |id: &str, best: Cost, success| InstanceReport {
            instance_id: id.to_string(),
            num_vars: 10,
            embed_failed: false,
            r_chain: 1.0,
            r_enc: 0.25,
            best_energy: best,
            best_c: best,
            mean_c: best,
            reference: Some(0.1),
            success,
            max_chain_length: 1,
        };
        RunReport {
            pipeline: info,
            instances: vec![
                inst("a", Cost::Finite(0.1), true),
                inst("b,c", Cost::Infinite, false),
            ],
        }
    }

    #[test]
    fn json_round_trip() {
        let report = sample_report();
        let bytes = emit_report(&report, None, Format::Json).unwrap();
        let back: RunReportJson = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back.to_report().unwrap(), report);
        assert!(String::from_utf8(bytes).unwrap().contains("\"inf\""));
    }

    #[test]
    fn csv_layout() {
        let bytes = emit_report(&sample_report(), None, Format::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], REPORT_COLUMNS.join(","));
        assert_eq!(lines[1], "a,domain-wall,native,none,1,0.25,0.1,0.1,true");
        assert_eq!(
            lines[2],
            "\"b,c\",domain-wall,native,none,1,0.25,inf,inf,false"
        );

        let empty = RunReport {
            instances: vec![],
            ..sample_report()
        };
        let header = String::from_utf8(emit_report(&empty, None, Format::Csv).unwrap()).unwrap();
        assert_eq!(header.trim_end(), REPORT_COLUMNS.join(","));
    }

    #[test]
    fn plotdata_series() {
        let text =
            String::from_utf8(emit_report(&sample_report(), None, Format::PlotData).unwrap())
                .unwrap();
        assert!(text.contains("# series: best_c\nx,y,yerr\n10,inf,inf\n"));
        assert!(text.contains("# series: r_enc\nx,y,yerr\n10,0.25,0\n"));
    }

    #[test]
    fn comparison_formats() {
        let mut right = sample_report();
        right.pipeline.name = "other".into();
        right.instances[1].best_energy = Cost::Finite(3.0);
        let rec = compare(&sample_report(), &right).unwrap();
        let csv =
            String::from_utf8(emit_comparisons(std::slice::from_ref(&rec), Format::Csv).unwrap())
                .unwrap();
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "domain-wall/native,other,0,1,1.00e0,significant-loss"
        );
        let json = emit_comparisons(std::slice::from_ref(&rec), Format::Json).unwrap();
        let back: Vec<ComparisonJson> = serde_json::from_slice(&json).unwrap();
        assert_eq!(back[0].to_record().unwrap(), rec);
        assert!(comparison_table(&[rec]).contains("1.00e0"));
        assert_eq!(format_p(Some(2.2737367544323206e-13)), "2.27e-13");
    }
}
