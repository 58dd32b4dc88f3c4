//! Text forms of the option enums, shared by the CLI, experiment configs
//! and report files.

use std::path::PathBuf;

use dqmforge_core::embed::{ChainStrengthMode, RepairMode, UTC_PREFACTOR};
use dqmforge_core::encode::PenaltyMode;
use dqmforge_core::model::Encoding;

/// Splits `name:arg` or `name(arg)`.
fn split_call(s: &str) -> (&str, Option<&str>) {
    if let Some((head, rest)) = s.split_once('(') {
        return (
            head.trim(),
            Some(rest.strip_suffix(')').unwrap_or(rest).trim()),
        );
    }
    match s.split_once(':') {
        Some((head, arg)) => (head.trim(), Some(arg.trim())),
        None => (s.trim(), None),
    }
}

fn positive(s: Option<&str>, what: &str) -> Result<f64, String> {
    let s = s.ok_or_else(|| format!("{what} needs a value"))?;
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("{what} value `{s}` must be a positive number")),
    }
}

pub fn parse_encoding(s: &str) -> Result<Encoding, String> {
    match s.to_ascii_lowercase().as_str() {
        "one-hot" | "onehot" | "oh" => Ok(Encoding::OneHot),
        "domain-wall" | "domainwall" | "dw" => Ok(Encoding::DomainWall),
        _ => Err(format!("unknown encoding `{s}` (one-hot, domain-wall)")),
    }
}

pub fn parse_penalty(s: &str) -> Result<PenaltyMode, String> {
    match split_call(s) {
        ("auto" | "auto-max", None) => Ok(PenaltyMode::AutoMax),
        ("fixed", v) => positive(v, "fixed penalty").map(PenaltyMode::Fixed),
        ("scaled", v) => positive(v, "penalty multiplier").map(PenaltyMode::Scaled),
        _ => Err(format!(
            "unknown penalty mode `{s}` (auto, fixed:V, scaled:K)"
        )),
    }
}

pub fn penalty_name(mode: PenaltyMode) -> String {
    match mode {
        PenaltyMode::AutoMax => "auto-max".into(),
        PenaltyMode::Fixed(v) => format!("fixed({v})"),
        PenaltyMode::Scaled(k) => format!("scaled({k})"),
    }
}

pub fn parse_chain_mode(s: &str) -> Result<ChainStrengthMode, String> {
    match split_call(s) {
        ("utc", None) => Ok(ChainStrengthMode::Utc(UTC_PREFACTOR)),
        ("utc", v) => positive(v, "utc prefactor").map(ChainStrengthMode::Utc),
        ("fixed", v) => positive(v, "fixed chain strength").map(ChainStrengthMode::Fixed),
        ("max", None) => Ok(ChainStrengthMode::Max),
        _ => Err(format!(
            "unknown chain mode `{s}` (utc, utc:P, fixed:V, max)"
        )),
    }
}

pub fn parse_repair(s: &str) -> Result<RepairMode, String> {
    match s {
        "majority" => Ok(RepairMode::Majority),
        "discard" => Ok(RepairMode::Discard),
        _ => Err(format!("unknown repair mode `{s}` (majority, discard)")),
    }
}

/// Where a pipeline samples: the logical model itself, a generated
/// Chimera graph or a hardware graph file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HardwareSpec {
    Native,
    Chimera(usize, usize, usize),
    File(PathBuf),
}

pub fn parse_hardware(s: &str) -> Result<HardwareSpec, String> {
    if s == "native" {
        return Ok(HardwareSpec::Native);
    }
    match split_call(s) {
        ("chimera", Some(dims)) => {
            let parts: Vec<usize> = dims
                .split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| format!("bad chimera dimensions `{dims}`"))?;
            match parts[..] {
                [r, c, k] => Ok(HardwareSpec::Chimera(r, c, k)),
                _ => Err(format!("chimera needs rows,cols,shore, got `{dims}`")),
            }
        }
        _ if s.ends_with(".json") => Ok(HardwareSpec::File(PathBuf::from(s))),
        _ => Err(format!(
            "unknown hardware `{s}` (native, chimera:R,C,S or a .json file)"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse_back() {
        for mode in [
            PenaltyMode::AutoMax,
            PenaltyMode::Fixed(2.5),
            PenaltyMode::Scaled(0.25),
        ] {
            assert_eq!(parse_penalty(&penalty_name(mode)), Ok(mode));
        }
        for mode in [
            ChainStrengthMode::Utc(1.414),
            ChainStrengthMode::Fixed(3.0),
            ChainStrengthMode::Max,
        ] {
            assert_eq!(parse_chain_mode(&mode.name()), Ok(mode));
        }
        for mode in [RepairMode::Majority, RepairMode::Discard] {
            assert_eq!(parse_repair(mode.name()), Ok(mode));
        }
        for e in [Encoding::OneHot, Encoding::DomainWall] {
            assert_eq!(parse_encoding(e.name()), Ok(e));
        }
    }

    #[test]
    fn hardware_specs() {
        assert_eq!(parse_hardware("native"), Ok(HardwareSpec::Native));
        assert_eq!(
            parse_hardware("chimera:4,4,4"),
            Ok(HardwareSpec::Chimera(4, 4, 4))
        );
        assert_eq!(
            parse_hardware("chimera(2,1,4)"),
            Ok(HardwareSpec::Chimera(2, 1, 4))
        );
        assert_eq!(
            parse_hardware("hw/adv.json"),
            Ok(HardwareSpec::File("hw/adv.json".into()))
        );
        assert!(parse_hardware("chimera:4,4").is_err());
        assert!(parse_hardware("pegasus").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(parse_penalty("scaled:0").is_err());
        assert!(parse_penalty("fixed").is_err());
        assert!(parse_chain_mode("fixed:-1").is_err());
        assert!(parse_encoding("unary").is_err());
    }
}
