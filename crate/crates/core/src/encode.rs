//! One-hot and domain-wall encodings of discrete models.
//!
//! One-hot spends `m` binary variables per discrete variable and adds
//! `lambda * (sum_a x_{i,a} - 1)^2`. Domain-wall spends `m - 1` spins on a
//! chain pinned to -1 on the left and +1 on the right; the value of the
//! variable is the position of the single domain wall, and
//! `x_{i,a} = (s_{i,a} - s_{i,a-1}) / 2`.

use alloc::format;
use alloc::vec::Vec;

use crate::model::{Assignment, BinaryModel, DiscreteModel, Encoding, EncodingMeta, Vartype};
use crate::{Error, Result};

/// How a constraint strength (lambda, kappa or mu) is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PenaltyMode {
    /// Largest coefficient magnitude of the unencoded model.
    #[default]
    AutoMax,
    Fixed(f64),
    /// Multiplier on the auto-max value.
    Scaled(f64),
}

impl PenaltyMode {
    pub fn validate(self) -> Result<()> {
        match self {
            PenaltyMode::AutoMax => Ok(()),
            PenaltyMode::Fixed(v) | PenaltyMode::Scaled(v) if v.is_finite() && v > 0.0 => Ok(()),
            PenaltyMode::Fixed(v) | PenaltyMode::Scaled(v) => Err(Error::InvalidParameter(
                format!("penalty value must be positive and finite, got {v}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeOptions {
    pub encoding: Encoding,
    pub penalty: PenaltyMode,
}

impl EncodeOptions {
    pub fn new(encoding: Encoding, penalty: PenaltyMode) -> Self {
        EncodeOptions { encoding, penalty }
    }
}

/// A decoded read. `assignment` is present exactly when every variable
/// satisfied its encoding constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedSample {
    pub assignment: Option<Assignment>,
    pub violated_vars: Vec<usize>,
}

impl DecodedSample {
    pub fn is_valid(&self) -> bool {
        self.assignment.is_some()
    }
}

/// Resolves a penalty mode against a model. An all-zero model yields 1.0
/// under auto-max.
pub fn penalty_strength(model: &DiscreteModel, mode: PenaltyMode) -> Result<f64> {
    mode.validate()?;
    let auto = || model.max_abs_coefficient().unwrap_or(1.0);
    Ok(match mode {
        PenaltyMode::AutoMax => auto(),
        PenaltyMode::Fixed(v) => v,
        PenaltyMode::Scaled(k) => k * auto(),
    })
}

/// The vartype an encoder emits natively.
pub fn native_vartype(encoding: Encoding) -> Vartype {
    match encoding {
        Encoding::DomainWall => Vartype::Spin,
        Encoding::OneHot | Encoding::Raw => Vartype::Binary,
    }
}

pub fn encode(model: &DiscreteModel, opts: &EncodeOptions) -> Result<BinaryModel> {
    match opts.encoding {
        Encoding::OneHot => encode_one_hot(model, opts.penalty),
        Encoding::DomainWall => encode_domain_wall(model, opts.penalty),
        Encoding::Raw => Err(Error::InvalidParameter(
            "raw is not a discrete-variable encoding".into(),
        )),
    }
}

/// QUBO over `n*m` variables: `H_DQM + lambda * sum_i (sum_a x_{i,a} - 1)^2`.
pub fn encode_one_hot(model: &DiscreteModel, penalty: PenaltyMode) -> Result<BinaryModel> {
    let lambda = penalty_strength(model, penalty)?;
    let (n, m) = (model.n(), model.m());
    let meta = EncodingMeta::contiguous(Encoding::OneHot, n, m, lambda);
    let idx = |i: usize, a: usize| meta.layout[i][a];
    let mut q = BinaryModel::new(n * m, Vartype::Binary);

    for ((i, a), v) in model.linear_terms() {
        q.add_linear(idx(i, a), v)?;
    }
    for ((i, j, a, b), v) in model.quadratic_terms() {
        q.add_quadratic(idx(i, a), idx(j, b), v)?;
    }
    // (sum x - 1)^2 = -sum x + 2 sum_{a<b} x_a x_b + 1, using x^2 = x
    for i in 0..n {
        for a in 0..m {
            q.add_linear(idx(i, a), -lambda)?;
            for b in a + 1..m {
                q.add_quadratic(idx(i, a), idx(i, b), 2.0 * lambda)?;
            }
        }
        q.add_offset(lambda);
    }
    q.with_meta(meta)
}

/// `x_{i,a}` as `constant + sum coef * s` over inner spins.
struct SpinAffine {
    constant: f64,
    terms: [(usize, f64); 2],
    len: usize,
}

impl SpinAffine {
    fn terms(&self) -> &[(usize, f64)] {
        &self.terms[..self.len]
    }
}

fn domain_wall_indicator(slots: &[usize], m: usize, alpha: usize) -> SpinAffine {
    let mut out = SpinAffine {
        constant: 0.0,
        terms: [(0, 0.0); 2],
        len: 0,
    };
    // + s_{alpha} / 2, with s_{m-1} = +1
    if alpha == m - 1 {
        out.constant += 0.5;
    } else {
        out.terms[out.len] = (slots[alpha], 0.5);
        out.len += 1;
    }
    // - s_{alpha-1} / 2, with s_{-1} = -1
    if alpha == 0 {
        out.constant += 0.5;
    } else {
        out.terms[out.len] = (slots[alpha - 1], -0.5);
        out.len += 1;
    }
    out
}

/// Ising model over `n*(m-1)` inner spins: `H_DQM` with the domain-wall
/// substitution plus `-kappa * sum_{a=-1}^{m-2} s_a s_{a+1}` per variable.
pub fn encode_domain_wall(model: &DiscreteModel, penalty: PenaltyMode) -> Result<BinaryModel> {
    let kappa = penalty_strength(model, penalty)?;
    let (n, m) = (model.n(), model.m());
    let meta = EncodingMeta::contiguous(Encoding::DomainWall, n, m, kappa);
    let mut s = BinaryModel::new(n * (m - 1), Vartype::Spin);
    let x = |i: usize, a: usize| domain_wall_indicator(&meta.layout[i], m, a);

    for ((i, a), v) in model.linear_terms() {
        let xa = x(i, a);
        s.add_offset(v * xa.constant);
        for &(k, c) in xa.terms() {
            s.add_linear(k, v * c)?;
        }
    }
    for ((i, j, a, b), v) in model.quadratic_terms() {
        let (xa, xb) = (x(i, a), x(j, b));
        s.add_offset(v * xa.constant * xb.constant);
        for &(k, c) in xa.terms() {
            s.add_linear(k, v * c * xb.constant)?;
        }
        for &(l, c) in xb.terms() {
            s.add_linear(l, v * c * xa.constant)?;
        }
        // i != j, so the spins are distinct
        for &(k, ck) in xa.terms() {
            for &(l, cl) in xb.terms() {
                s.add_quadratic(k, l, v * ck * cl)?;
            }
        }
    }
    for i in 0..n {
        let slots = &meta.layout[i];
        // boundary bonds: -kappa * (-1) * s_0 and -kappa * s_{m-2} * (+1)
        s.add_linear(slots[0], kappa)?;
        s.add_linear(slots[m - 2], -kappa)?;
        for a in 0..m.saturating_sub(2) {
            s.add_quadratic(slots[a], slots[a + 1], -kappa)?;
        }
    }
    s.with_meta(meta)
}

/// Decodes a configuration of an encoded model.
pub fn decode(model: &BinaryModel, config: &[i8]) -> Result<DecodedSample> {
    let meta = model.meta().ok_or(Error::MissingMeta)?;
    model.check_config(config)?;
    Ok(decode_unchecked(meta, model.vartype(), config))
}

/// Decodes a configuration given only the metadata and the vartype its
/// values are expressed in.
pub fn decode_with_meta(
    meta: &EncodingMeta,
    vartype: Vartype,
    config: &[i8],
) -> Result<DecodedSample> {
    if config.len() != meta.num_binary_vars() {
        return Err(Error::DimensionMismatch {
            what: "configuration",
            expected: meta.num_binary_vars(),
            found: config.len(),
        });
    }
    if let Some(&v) = config.iter().find(|&&v| !vartype.admits(v)) {
        return Err(Error::InvalidValue(format!("{v} is not a {vartype} value")));
    }
    Ok(decode_unchecked(meta, vartype, config))
}

fn decode_unchecked(meta: &EncodingMeta, vartype: Vartype, config: &[i8]) -> DecodedSample {
    let mut values = Vec::with_capacity(meta.n);
    let mut violated = Vec::new();
    // b = 1 <=> z = -1
    let spin = |k: usize| vartype.to_spin_value(config[k]);
    let bit = |k: usize| spin(k) == -1;

    for (i, slots) in meta.layout.iter().enumerate() {
        let value = match meta.encoding {
            Encoding::OneHot => {
                let mut hot = slots.iter().enumerate().filter(|&(_, &k)| bit(k));
                match (hot.next(), hot.next()) {
                    (Some((a, _)), None) => Some(a),
                    _ => None,
                }
            }
            Encoding::DomainWall => {
                let mut prev = -1i8;
                let mut walls = 0;
                let mut down = 0;
                for &k in slots {
                    let s = spin(k);
                    if s != prev {
                        walls += 1;
                    }
                    if s == -1 {
                        down += 1;
                    }
                    prev = s;
                }
                if prev != 1 {
                    walls += 1;
                }
                (walls == 1).then_some(down)
            }
            Encoding::Raw => Some(usize::from(bit(slots[0]))),
        };
        match value {
            Some(v) => values.push(v),
            None => violated.push(i),
        }
    }
    DecodedSample {
        assignment: violated.is_empty().then(|| Assignment::new(values)),
        violated_vars: violated,
    }
}

/// Configuration, in the encoding's native vartype, that decodes to `a`.
pub fn encode_assignment(meta: &EncodingMeta, a: &Assignment) -> Result<Vec<i8>> {
    a.check(meta.n, meta.m)?;
    let mut config = match meta.encoding {
        Encoding::DomainWall => alloc::vec![1i8; meta.num_binary_vars()],
        Encoding::OneHot | Encoding::Raw => alloc::vec![0i8; meta.num_binary_vars()],
    };
    for (slots, &d) in meta.layout.iter().zip(a.values()) {
        match meta.encoding {
            Encoding::OneHot => config[slots[d]] = 1,
            // the wall sits left of inner spin d
            Encoding::DomainWall => slots[..d].iter().for_each(|&k| config[k] = -1),
            Encoding::Raw => config[slots[0]] = d as i8,
        }
    }
    Ok(config)
}

/// Like [`encode_assignment`], expressed in `model`'s vartype.
pub fn config_for_assignment(model: &BinaryModel, a: &Assignment) -> Result<Vec<i8>> {
    let meta = model.meta().ok_or(Error::MissingMeta)?;
    let native = native_vartype(meta.encoding);
    let config = encode_assignment(meta, a)?;
    let target = model.vartype();
    Ok(config
        .into_iter()
        .map(|v| target.from_spin_value(native.to_spin_value(v)))
        .collect())
}
