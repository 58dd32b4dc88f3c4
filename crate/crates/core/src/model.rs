//! Discrete and binary quadratic models.
//!
//! A [`DiscreteModel`] assigns one of `m` values to each of `n` variables and
//! scores assignments with linear and pairwise coefficients. A
//! [`BinaryModel`] is the QUBO or Ising problem an annealer consumes; models
//! produced by an encoder carry [`EncodingMeta`] so samples can be decoded
//! without the source model.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Absolute tolerance used when energies are compared for equality.
pub const ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vartype {
    /// b in {0, 1}
    Binary,
    /// z in {-1, +1}
    Spin,
}

impl Vartype {
    pub fn admits(self, value: i8) -> bool {
        match self {
            Vartype::Binary => value == 0 || value == 1,
            Vartype::Spin => value == -1 || value == 1,
        }
    }

    /// Maps a value of this vartype to the spin it represents, b = (1 - z)/2.
    pub fn to_spin_value(self, value: i8) -> i8 {
        match self {
            Vartype::Binary => 1 - 2 * value,
            Vartype::Spin => value,
        }
    }

    pub fn from_spin_value(self, spin: i8) -> i8 {
        match self {
            Vartype::Binary => (1 - spin) / 2,
            Vartype::Spin => spin,
        }
    }
}

impl fmt::Display for Vartype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vartype::Binary => f.write_str("BINARY"),
            Vartype::Spin => f.write_str("SPIN"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Encoding {
    OneHot,
    DomainWall,
    /// One binary variable per discrete variable of size two.
    Raw,
}

impl Encoding {
    /// Binary variables used per discrete variable of size `m`.
    pub fn slots(self, m: usize) -> usize {
        match self {
            Encoding::OneHot => m,
            Encoding::DomainWall => m - 1,
            Encoding::Raw => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Encoding::OneHot => "one-hot",
            Encoding::DomainWall => "domain-wall",
            Encoding::Raw => "raw",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a binary model's variables map back onto a discrete model.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingMeta {
    pub encoding: Encoding,
    pub n: usize,
    pub m: usize,
    /// `layout[i][slot]` is the binary variable holding slot `slot` of
    /// discrete variable `i`.
    pub layout: Vec<Vec<usize>>,
    pub penalty_strength: f64,
}

impl EncodingMeta {
    /// Contiguous layout: variable `i` occupies `i*slots .. (i+1)*slots`.
    pub fn contiguous(encoding: Encoding, n: usize, m: usize, penalty_strength: f64) -> Self {
        let slots = encoding.slots(m);
        let layout = (0..n)
            .map(|i| (0..slots).map(|s| i * slots + s).collect())
            .collect();
        EncodingMeta {
            encoding,
            n,
            m,
            layout,
            penalty_strength,
        }
    }

    pub fn slots(&self) -> usize {
        self.encoding.slots(self.m)
    }

    pub fn num_binary_vars(&self) -> usize {
        self.n * self.slots()
    }

    /// Checks that the layout is a bijection onto `0..num_vars`.
    pub fn validate(&self, num_vars: usize) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidModel(format!(
                "meta m must be >= 2, got {}",
                self.m
            )));
        }
        if self.encoding == Encoding::Raw && self.m != 2 {
            return Err(Error::InvalidModel("raw encoding requires m = 2".into()));
        }
        if self.layout.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "meta layout",
                expected: self.n,
                found: self.layout.len(),
            });
        }
        if self.num_binary_vars() != num_vars {
            return Err(Error::DimensionMismatch {
                what: "binary variable count for meta",
                expected: self.num_binary_vars(),
                found: num_vars,
            });
        }
        let mut seen = vec![false; num_vars];
        for (i, slots) in self.layout.iter().enumerate() {
            if slots.len() != self.slots() {
                return Err(Error::InvalidModel(format!(
                    "meta layout of variable {i} has {} slots, expected {}",
                    slots.len(),
                    self.slots()
                )));
            }
            for &v in slots {
                if v >= num_vars || seen[v] {
                    return Err(Error::InvalidModel(format!(
                        "meta layout is not a bijection (variable {i}, index {v})"
                    )));
                }
                seen[v] = true;
            }
        }
        Ok(())
    }
}

/// Values `d_0 .. d_{n-1}` of a discrete model's variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(values: Vec<usize>) -> Self {
        Assignment(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Checks length `n` and every value in `0..m`.
    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::DimensionMismatch {
                what: "assignment",
                expected: n,
                found: self.0.len(),
            });
        }
        if let Some((i, &v)) = self.0.iter().enumerate().find(|(_, &v)| v >= m) {
            return Err(Error::InvalidValue(format!(
                "variable {i} has value {v}, outside 0..{m}"
            )));
        }
        Ok(())
    }
}

impl From<Vec<usize>> for Assignment {
    fn from(values: Vec<usize>) -> Self {
        Assignment(values)
    }
}

/// n discrete variables with m values each, scored by
/// `sum_i linear(i, d_i) + sum_{i<j} D(i, j, d_i, d_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    n: usize,
    m: usize,
    linear: BTreeMap<(usize, usize), f64>,
    // keys (i, j, alpha, beta) with i < j
    quadratic: BTreeMap<(usize, usize, usize, usize), f64>,
}

impl DiscreteModel {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidModel("a discrete model needs n >= 1".into()));
        }
        if m < 2 {
            return Err(Error::InvalidModel(format!(
                "variable size m must be >= 2, got {m}"
            )));
        }
        Ok(DiscreteModel {
            n,
            m,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn check_index(&self, i: usize, alpha: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::InvalidModel(format!(
                "variable {i} out of range 0..{}",
                self.n
            )));
        }
        if alpha >= self.m {
            return Err(Error::InvalidModel(format!(
                "value {alpha} out of range 0..{}",
                self.m
            )));
        }
        Ok(())
    }

    fn check_coefficient(value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidModel(format!(
                "non-finite coefficient {value}"
            )));
        }
        Ok(())
    }

    /// Adds `value` to the coefficient of `x_{i,alpha}`.
    pub fn add_linear(&mut self, i: usize, alpha: usize, value: f64) -> Result<()> {
        self.check_index(i, alpha)?;
        Self::check_coefficient(value)?;
        accumulate(&mut self.linear, (i, alpha), value);
        Ok(())
    }

    /// Adds `value` to `D(i, j, alpha, beta)`. Self-interactions are rejected.
    pub fn add_quadratic(
        &mut self,
        i: usize,
        j: usize,
        alpha: usize,
        beta: usize,
        value: f64,
    ) -> Result<()> {
        self.check_index(i, alpha)?;
        self.check_index(j, beta)?;
        Self::check_coefficient(value)?;
        if i == j {
            return Err(Error::InvalidModel(format!(
                "self-interaction ({i}, {i}, {alpha}, {beta}) must be expressed as a linear term"
            )));
        }
        let key = if i < j {
            (i, j, alpha, beta)
        } else {
            (j, i, beta, alpha)
        };
        accumulate(&mut self.quadratic, key, value);
        Ok(())
    }

    pub fn linear(&self, i: usize, alpha: usize) -> f64 {
        self.linear.get(&(i, alpha)).copied().unwrap_or(0.0)
    }

    pub fn quadratic(&self, i: usize, j: usize, alpha: usize, beta: usize) -> f64 {
        let key = if i < j {
            (i, j, alpha, beta)
        } else {
            (j, i, beta, alpha)
        };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    /// Nonzero linear entries `((i, alpha), value)` in key order.
    pub fn linear_terms(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.linear.iter().map(|(&k, &v)| (k, v))
    }

    /// Nonzero quadratic entries `((i, j, alpha, beta), value)`, `i < j`.
    pub fn quadratic_terms(
        &self,
    ) -> impl Iterator<Item = ((usize, usize, usize, usize), f64)> + '_ {
        self.quadratic.iter().map(|(&k, &v)| (k, v))
    }

    pub fn num_linear(&self) -> usize {
        self.linear.len()
    }

    pub fn num_quadratic(&self) -> usize {
        self.quadratic.len()
    }

    /// Interacting variable pairs `(i, j)`, `i < j`, sorted.
    pub fn interactions(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> =
            self.quadratic.keys().map(|&(i, j, _, _)| (i, j)).collect();
        pairs.dedup();
        pairs
    }

    /// Largest coefficient magnitude, or `None` when every coefficient is zero.
    pub fn max_abs_coefficient(&self) -> Option<f64> {
        self.linear
            .values()
            .chain(self.quadratic.values())
            .map(|v| v.abs())
            .filter(|&v| v > 0.0)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
    }

    /// Energy of an assignment.
    pub fn energy(&self, assignment: &Assignment) -> Result<f64> {
        assignment.check(self.n, self.m)?;
        Ok(self.energy_unchecked(assignment.values()))
    }

    pub(crate) fn energy_unchecked(&self, d: &[usize]) -> f64 {
        let mut e = 0.0;
        for (i, &a) in d.iter().enumerate() {
            e += self.linear(i, a);
        }
        for (&(i, j, a, b), &v) in &self.quadratic {
            if d[i] == a && d[j] == b {
                e += v;
            }
        }
        e
    }

    /// Number of assignments, `m^n`, saturating.
    pub fn search_space(&self) -> u128 {
        (self.m as u128)
            .checked_pow(self.n as u32)
            .unwrap_or(u128::MAX)
    }
}

/// Energy of an assignment under a discrete model.
pub fn dqm_energy(model: &DiscreteModel, assignment: &Assignment) -> Result<f64> {
    model.energy(assignment)
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, f64>, key: K, value: f64) {
    if value == 0.0 {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(e) => {
            e.insert(value);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += value;
            // exact cancellation leaves no entry behind
            if *e.get() == 0.0 {
                e.remove();
            }
        }
    }
}

/// A QUBO (`Binary`) or Ising (`Spin`) model with a constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    num_vars: usize,
    vartype: Vartype,
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    meta: Option<EncodingMeta>,
}

impl BinaryModel {
    pub fn new(num_vars: usize, vartype: Vartype) -> Self {
        BinaryModel {
            num_vars,
            vartype,
            linear: vec![0.0; num_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
            meta: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn vartype(&self) -> Vartype {
        self.vartype
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn meta(&self) -> Option<&EncodingMeta> {
        self.meta.as_ref()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    /// Nonzero couplings `((i, j), value)`, `i < j`, in key order.
    pub fn quadratic_terms(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.quadratic.iter().map(|(&k, &v)| (k, v))
    }

    pub fn num_interactions(&self) -> usize {
        self.quadratic.len()
    }

    pub fn add_linear(&mut self, i: usize, value: f64) -> Result<()> {
        if i >= self.num_vars {
            return Err(Error::InvalidModel(format!(
                "variable {i} out of range 0..{}",
                self.num_vars
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidModel(format!("non-finite field {value}")));
        }
        self.linear[i] += value;
        Ok(())
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= self.num_vars || j >= self.num_vars {
            return Err(Error::InvalidModel(format!(
                "coupling ({i}, {j}) out of range 0..{}",
                self.num_vars
            )));
        }
        if i == j {
            return Err(Error::InvalidModel(format!(
                "self-loop coupling on variable {i}"
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidModel(format!("non-finite coupling {value}")));
        }
        let key = if i < j { (i, j) } else { (j, i) };
        accumulate(&mut self.quadratic, key, value);
        Ok(())
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    /// Attaches encoding metadata after checking it fits this model.
    pub fn with_meta(mut self, meta: EncodingMeta) -> Result<Self> {
        meta.validate(self.num_vars)?;
        self.meta = Some(meta);
        Ok(self)
    }

    pub fn without_meta(mut self) -> Self {
        self.meta = None;
        self
    }

    /// Sorted adjacency lists `(neighbor, coupling)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_vars];
        for (&(i, j), &v) in &self.quadratic {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    /// Interacting pairs `(i, j)`, `i < j`.
    pub fn interaction_edges(&self) -> Vec<(usize, usize)> {
        self.quadratic.keys().copied().collect()
    }

    pub fn check_config(&self, config: &[i8]) -> Result<()> {
        if config.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                what: "configuration",
                expected: self.num_vars,
                found: config.len(),
            });
        }
        if let Some((i, &v)) = config
            .iter()
            .enumerate()
            .find(|(_, &v)| !self.vartype.admits(v))
        {
            return Err(Error::InvalidValue(format!(
                "variable {i} has value {v}, not a {} value",
                self.vartype
            )));
        }
        Ok(())
    }

    /// Energy including the offset.
    pub fn energy(&self, config: &[i8]) -> Result<f64> {
        self.check_config(config)?;
        Ok(self.energy_unchecked(config))
    }

    pub(crate) fn energy_unchecked(&self, config: &[i8]) -> f64 {
        let mut e = self.offset;
        for (h, &x) in self.linear.iter().zip(config) {
            e += h * f64::from(x);
        }
        for (&(i, j), &v) in &self.quadratic {
            e += v * f64::from(config[i]) * f64::from(config[j]);
        }
        e
    }

    /// Ising form via b = (1 - z)/2.
    pub fn to_spin(&self) -> Result<BinaryModel> {
        if self.vartype != Vartype::Binary {
            return Err(Error::WrongVartype {
                expected: Vartype::Binary,
                found: self.vartype,
            });
        }
        let mut out = BinaryModel::new(self.num_vars, Vartype::Spin);
        out.meta = self.meta.clone();
        out.offset = self.offset;
        for (i, &h) in self.linear.iter().enumerate() {
            // h b = h/2 - (h/2) z
            out.offset += h / 2.0;
            out.linear[i] -= h / 2.0;
        }
        for (&(i, j), &q) in &self.quadratic {
            // q b_i b_j = q/4 (1 - z_i - z_j + z_i z_j)
            out.offset += q / 4.0;
            out.linear[i] -= q / 4.0;
            out.linear[j] -= q / 4.0;
            accumulate(&mut out.quadratic, (i, j), q / 4.0);
        }
        Ok(out)
    }

    /// QUBO form via z = 1 - 2b.
    pub fn to_binary(&self) -> Result<BinaryModel> {
        if self.vartype != Vartype::Spin {
            return Err(Error::WrongVartype {
                expected: Vartype::Spin,
                found: self.vartype,
            });
        }
        let mut out = BinaryModel::new(self.num_vars, Vartype::Binary);
        out.meta = self.meta.clone();
        out.offset = self.offset;
        for (i, &h) in self.linear.iter().enumerate() {
            out.offset += h;
            out.linear[i] -= 2.0 * h;
        }
        for (&(i, j), &jv) in &self.quadratic {
            // J z_i z_j = J (1 - 2b_i)(1 - 2b_j)
            out.offset += jv;
            out.linear[i] -= 2.0 * jv;
            out.linear[j] -= 2.0 * jv;
            accumulate(&mut out.quadratic, (i, j), 4.0 * jv);
        }
        Ok(out)
    }

    /// Converts to the requested vartype, cloning when it already matches.
    pub fn as_vartype(&self, vartype: Vartype) -> Result<BinaryModel> {
        match (self.vartype, vartype) {
            (a, b) if a == b => Ok(self.clone()),
            (Vartype::Binary, Vartype::Spin) => self.to_spin(),
            _ => self.to_binary(),
        }
    }

    /// Drops exact-zero couplings.
    pub fn canonicalize(&self) -> BinaryModel {
        let mut out = self.clone();
        out.quadratic.retain(|_, v| *v != 0.0);
        out
    }

    /// Largest field or coupling magnitude, `None` if all are zero.
    pub fn max_abs_coefficient(&self) -> Option<f64> {
        self.linear
            .iter()
            .chain(self.quadratic.values())
            .map(|v| v.abs())
            .filter(|&v| v > 0.0)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
    }
}

pub fn to_spin(model: &BinaryModel) -> Result<BinaryModel> {
    model.to_spin()
}

pub fn to_binary(model: &BinaryModel) -> Result<BinaryModel> {
    model.to_binary()
}

pub fn binary_energy(model: &BinaryModel, config: &[i8]) -> Result<f64> {
    model.energy(config)
}

/// All `2^n` configurations of the given vartype, in binary counting order.
#[cfg(test)]
pub(crate) fn all_configs(n: usize, vartype: Vartype) -> Vec<Vec<i8>> {
    (0..1u32 << n)
        .map(|bits| {
            (0..n)
                .map(|k| {
                    let b = ((bits >> k) & 1) as i8;
                    match vartype {
                        Vartype::Binary => b,
                        Vartype::Spin => 1 - 2 * b,
                    }
                })
                .collect()
        })
        .collect()
}
