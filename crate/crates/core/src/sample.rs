//! Simulated annealing and exhaustive solvers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Assignment, BinaryModel, DiscreteModel, Vartype};
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

pub const DEFAULT_READS: usize = 100;
pub const DEFAULT_SWEEPS: usize = 1000;
/// Largest search space the exhaustive solvers accept by default.
pub const DEFAULT_EXACT_CAP: u128 = 1 << 24;
/// Optimal configurations kept by the exhaustive solvers; beyond this only
/// the count grows.
pub const OPTIMA_LIMIT: usize = 1 << 16;

/// Inverse temperatures used when a model has no nonzero coefficient.
pub const FALLBACK_BETA: (f64, f64) = (0.1, 10.0);

/// Full energy recomputation interval of the enumerators.
const RESYNC: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BetaSchedule {
    /// derived from the model by [`auto_beta`]
    #[default]
    Auto,
    Explicit {
        hot: f64,
        cold: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerParams {
    pub num_reads: usize,
    pub sweeps: usize,
    pub beta: BetaSchedule,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            num_reads: DEFAULT_READS,
            sweeps: DEFAULT_SWEEPS,
            beta: BetaSchedule::Auto,
            seed: 0,
        }
    }
}

impl SamplerParams {
    pub fn with_seed(seed: u64) -> Self {
        SamplerParams {
            seed,
            ..SamplerParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_reads < 1 {
            return Err(Error::InvalidParameter("num_reads must be >= 1".into()));
        }
        if self.sweeps < 1 {
            return Err(Error::InvalidParameter("sweeps must be >= 1".into()));
        }
        if let BetaSchedule::Explicit { hot, cold } = self.beta {
            if !(hot.is_finite() && cold.is_finite() && hot > 0.0 && hot < cold) {
                return Err(Error::InvalidParameter(format!(
                    "beta range ({hot}, {cold}) must satisfy 0 < hot < cold"
                )));
            }
        }
        Ok(())
    }
}

/// One annealing read.
#[derive(Debug, Clone, PartialEq)]
pub struct Read {
    /// values in the vartype of the sampled model
    pub config: Vec<i8>,
    pub energy: f64,
    pub seed: u64,
}

/// Distinct configuration with its multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub config: Vec<i8>,
    pub energy: f64,
    pub count: usize,
}

/// Reads in read-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub vartype: Vartype,
    pub reads: Vec<Read>,
}

impl SampleSet {
    pub fn num_reads(&self) -> usize {
        self.reads.len()
    }

    /// Lowest-energy read; the earliest one on ties.
    pub fn best(&self) -> Option<&Read> {
        self.reads
            .iter()
            .reduce(|a, b| if b.energy < a.energy { b } else { a })
    }

    /// Distinct configurations sorted by energy, then configuration.
    pub fn aggregate(&self) -> Vec<Sample> {
        let mut sorted: Vec<&Read> = self.reads.iter().collect();
        sorted.sort_by(|a, b| a.config.cmp(&b.config));
        let mut out: Vec<Sample> = Vec::new();
        for read in sorted {
            match out.last_mut() {
                Some(last) if last.config == read.config => last.count += 1,
                _ => out.push(Sample {
                    config: read.config.clone(),
                    energy: read.energy,
                    count: 1,
                }),
            }
        }
        out.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.config.cmp(&b.config))
        });
        out
    }

    /// Checks stored energies against `model`.
    pub fn verify(&self, model: &BinaryModel) -> Result<()> {
        for (r, read) in self.reads.iter().enumerate() {
            let e = model.energy(&read.config)?;
            if (e - read.energy).abs() > 1e-9 * e.abs().max(1.0) {
                return Err(Error::InvalidValue(format!(
                    "read {r}: stored energy {} but model gives {e}",
                    read.energy
                )));
            }
        }
        Ok(())
    }
}

/// Spin-form coefficients in adjacency layout.
struct SpinForm {
    h: Vec<f64>,
    nbrs: Vec<Vec<(usize, f64)>>,
}

impl SpinForm {
    fn new(model: &BinaryModel) -> Result<Self> {
        let spin = model.as_vartype(Vartype::Spin)?;
        Ok(SpinForm {
            h: spin.linear().to_vec(),
            nbrs: spin.adjacency(),
        })
    }

    fn fields(&self, s: &[i8]) -> Vec<f64> {
        (0..self.h.len())
            .map(|i| {
                self.h[i]
                    + self.nbrs[i]
                        .iter()
                        .map(|&(j, w)| w * f64::from(s[j]))
                        .sum::<f64>()
            })
            .collect()
    }
}

/// `(beta_hot, beta_cold)`: the largest single-flip energy change is
/// accepted with probability 1/2 at the hot end, and a change the size of
/// the smallest nonzero coefficient with probability 1/100 at the cold end.
pub fn auto_beta(model: &BinaryModel) -> Result<(f64, f64)> {
    let spin = model.as_vartype(Vartype::Spin)?;
    let adj = spin.adjacency();
    let max_flip = (0..spin.num_vars())
        .map(|i| 2.0 * (spin.linear()[i].abs() + adj[i].iter().map(|(_, w)| w.abs()).sum::<f64>()))
        .fold(0.0, f64::max);
    let min_coef = spin
        .linear()
        .iter()
        .copied()
        .chain(spin.quadratic_terms().map(|(_, w)| w))
        .map(f64::abs)
        .filter(|&c| c > 0.0)
        .fold(f64::INFINITY, f64::min);
    if max_flip == 0.0 || !min_coef.is_finite() {
        return Ok(FALLBACK_BETA);
    }
    let hot = core::f64::consts::LN_2 / max_flip;
    let cold = libm::log(100.0) / min_coef;
    // degenerate models can put both ends together; keep the ladder ordered
    Ok((hot, cold.max(hot)))
}

/// Geometric inverse-temperature ladder with one rung per sweep.
pub fn beta_ladder(hot: f64, cold: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![cold];
    }
    let ratio = cold / hot;
    (0..sweeps)
        .map(|k| hot * libm::pow(ratio, k as f64 / (sweeps - 1) as f64))
        .collect()
}

/// Metropolis annealer prepared for one model; reads are independent and
/// may be produced in any order.
pub struct Annealer<'a> {
    model: &'a BinaryModel,
    spin: SpinForm,
    betas: Vec<f64>,
    params: SamplerParams,
}

impl<'a> Annealer<'a> {
    pub fn new(model: &'a BinaryModel, params: &SamplerParams) -> Result<Self> {
        params.validate()?;
        if model.num_vars() == 0 {
            return Err(Error::InvalidModel(
                "cannot sample a model without variables".into(),
            ));
        }
        let (hot, cold) = match params.beta {
            BetaSchedule::Auto => auto_beta(model)?,
            BetaSchedule::Explicit { hot, cold } => (hot, cold),
        };
        Ok(Annealer {
            model,
            spin: SpinForm::new(model)?,
            betas: beta_ladder(hot, cold, params.sweeps),
            params: params.clone(),
        })
    }

    pub fn num_reads(&self) -> usize {
        self.params.num_reads
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Final spins of read `r` and the incrementally tracked energy change
    /// relative to the initial state.
    fn run(&self, seed: u64) -> (Vec<i8>, Vec<i8>, f64) {
        let n = self.spin.h.len();
        let mut rng = rng_from_seed(seed);
        let mut s: Vec<i8> = (0..n)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        let initial = s.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut field = self.spin.fields(&s);
        let mut delta_total = 0.0;
        for &beta in &self.betas {
            for &i in &order {
                let delta = -2.0 * f64::from(s[i]) * field[i];
                if delta <= 0.0 || rng.gen::<f64>() < libm::exp(-beta * delta) {
                    s[i] = -s[i];
                    delta_total += delta;
                    let step = 2.0 * f64::from(s[i]);
                    for &(j, w) in &self.spin.nbrs[i] {
                        field[j] += w * step;
                    }
                }
            }
        }
        (initial, s, delta_total)
    }

    /// Read `r`, with its seed derived from the master seed.
    pub fn read(&self, r: usize) -> Read {
        let seed = derive_seed(self.params.seed, r as u64);
        let (_, s, _) = self.run(seed);
        let vartype = self.model.vartype();
        let config: Vec<i8> = s.iter().map(|&z| vartype.from_spin_value(z)).collect();
        let energy = self.model.energy_unchecked(&config);
        Read {
            config,
            energy,
            seed,
        }
    }

    pub fn run_all(&self) -> SampleSet {
        SampleSet {
            vartype: self.model.vartype(),
            reads: (0..self.params.num_reads).map(|r| self.read(r)).collect(),
        }
    }
}

/// Anneals `model` sequentially; see [`Annealer`] for parallel use.
pub fn anneal(model: &BinaryModel, params: &SamplerParams) -> Result<SampleSet> {
    Ok(Annealer::new(model, params)?.run_all())
}

/// Exact minimum and optimal configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution<C> {
    pub energy: f64,
    /// optimal configurations in enumeration-independent sorted order, at
    /// most [`OPTIMA_LIMIT`] of them
    pub optima: Vec<C>,
    pub num_optima: u64,
}

impl<C> ExactSolution<C> {
    pub fn is_complete(&self) -> bool {
        self.optima.len() as u64 == self.num_optima
    }
}

/// Models that can be minimized by exhaustive enumeration.
pub trait Exhaustive {
    type Config: Ord + Clone;

    fn search_space_size(&self) -> u128;

    /// Visits every configuration once, reporting each with an
    /// approximate energy.
    fn enumerate(&self, visit: &mut dyn FnMut(&[usize], f64));

    fn exact_energy(&self, state: &[usize]) -> f64;

    fn config(&self, state: &[usize]) -> Self::Config;

    /// Scale of the energies, for the candidate tolerance.
    fn magnitude(&self) -> f64;
}

/// Exhaustive minimization refusing search spaces beyond `cap`.
pub fn solve_exact<M: Exhaustive>(model: &M, cap: u128) -> Result<ExactSolution<M::Config>> {
    let size = model.search_space_size();
    if size > cap {
        return Err(Error::SearchSpaceTooLarge { size, cap });
    }
    // approximate energies drift slightly; keep near-ties and settle them
    // with exact energies at the end
    let slack = 1e-6 * model.magnitude().max(1.0);
    let mut best = f64::INFINITY;
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let mut overflow = false;
    model.enumerate(&mut |state, e| {
        if e < best - slack {
            best = e;
            candidates.clear();
            overflow = false;
        }
        if e <= best + slack {
            best = best.min(e);
            if candidates.len() < 4 * OPTIMA_LIMIT {
                candidates.push(state.to_vec());
            } else {
                overflow = true;
            }
        }
    });
    let exact: Vec<f64> = candidates.iter().map(|s| model.exact_energy(s)).collect();
    let energy = exact.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * energy.abs().max(1.0);
    let mut optima: Vec<M::Config> = candidates
        .iter()
        .zip(&exact)
        .filter(|(_, &e)| e - energy <= tol)
        .map(|(s, _)| model.config(s))
        .collect();
    let mut num_optima = optima.len() as u64;
    if overflow {
        // only reachable for massively degenerate models: every
        // configuration within the slack is counted
        num_optima = count_within(model, energy + tol);
    }
    optima.sort();
    optima.truncate(OPTIMA_LIMIT);
    Ok(ExactSolution {
        energy,
        optima,
        num_optima,
    })
}

fn count_within<M: Exhaustive>(model: &M, bound: f64) -> u64 {
    let mut count = 0;
    let slack = 1e-6 * model.magnitude().max(1.0);
    model.enumerate(&mut |state, e| {
        if e <= bound + slack && model.exact_energy(state) <= bound {
            count += 1;
        }
    });
    count
}

impl Exhaustive for BinaryModel {
    type Config = Vec<i8>;

    fn search_space_size(&self) -> u128 {
        if self.num_vars() >= 128 {
            u128::MAX
        } else {
            1u128 << self.num_vars()
        }
    }

    fn enumerate(&self, visit: &mut dyn FnMut(&[usize], f64)) {
        // binary reflected Gray code over spins; state[i] = 1 means z = -1
        let spin = SpinForm::new(self).expect("conversion to spin form cannot fail");
        let n = self.num_vars();
        let offset = self
            .as_vartype(Vartype::Spin)
            .map(|m| m.offset())
            .unwrap_or(0.0);
        let mut s = vec![1i8; n];
        let mut state = vec![0usize; n];
        let full = |s: &[i8]| {
            let f = spin.fields(s);
            offset
                + (0..n)
                    .map(|i| f64::from(s[i]) * (spin.h[i] + f[i]) / 2.0)
                    .sum::<f64>()
        };
        let mut field = spin.fields(&s);
        let mut e = full(&s);
        visit(&state, e);
        let total: u64 = 1 << n;
        for k in 1..total {
            let i = k.trailing_zeros() as usize;
            e += -2.0 * f64::from(s[i]) * field[i];
            s[i] = -s[i];
            state[i] ^= 1;
            let step = 2.0 * f64::from(s[i]);
            for &(j, w) in &spin.nbrs[i] {
                field[j] += w * step;
            }
            if k % RESYNC == 0 {
                e = full(&s);
            }
            visit(&state, e);
        }
    }

    fn exact_energy(&self, state: &[usize]) -> f64 {
        self.energy_unchecked(&self.config(state))
    }

    fn config(&self, state: &[usize]) -> Vec<i8> {
        let vartype = self.vartype();
        state
            .iter()
            .map(|&b| vartype.from_spin_value(if b == 1 { -1 } else { 1 }))
            .collect()
    }

    fn magnitude(&self) -> f64 {
        self.offset().abs()
            + self.linear().iter().map(|v| v.abs()).sum::<f64>()
            + self.quadratic_terms().map(|(_, v)| v.abs()).sum::<f64>()
    }
}

/// Dense per-pair tables for fast DQM energy updates.
struct DenseDqm {
    m: usize,
    linear: Vec<f64>,
    tables: Vec<Vec<f64>>,
    /// `(neighbor, table, this variable is the row index)`
    nbrs: Vec<Vec<(usize, usize, bool)>>,
}

impl DenseDqm {
    fn new(model: &DiscreteModel) -> Self {
        let (n, m) = (model.n(), model.m());
        let mut linear = vec![0.0; n * m];
        for ((i, a), v) in model.linear_terms() {
            linear[i * m + a] = v;
        }
        let mut index = alloc::collections::BTreeMap::new();
        let mut tables: Vec<Vec<f64>> = Vec::new();
        let mut nbrs = vec![Vec::new(); n];
        for ((i, j, a, b), v) in model.quadratic_terms() {
            let t = *index.entry((i, j)).or_insert_with(|| {
                tables.push(vec![0.0; m * m]);
                nbrs[i].push((j, tables.len() - 1, true));
                nbrs[j].push((i, tables.len() - 1, false));
                tables.len() - 1
            });
            tables[t][a * m + b] = v;
        }
        DenseDqm {
            m,
            linear,
            tables,
            nbrs,
        }
    }

    /// Energy contributed by variable `i` taking value `a`.
    fn local(&self, i: usize, a: usize, d: &[usize]) -> f64 {
        let m = self.m;
        let mut e = self.linear[i * m + a];
        for &(j, t, row) in &self.nbrs[i] {
            e += if row {
                self.tables[t][a * m + d[j]]
            } else {
                self.tables[t][d[j] * m + a]
            };
        }
        e
    }

    fn energy(&self, d: &[usize]) -> f64 {
        let m = self.m;
        let mut e: f64 = d
            .iter()
            .enumerate()
            .map(|(i, &a)| self.linear[i * m + a])
            .sum();
        for (i, list) in self.nbrs.iter().enumerate() {
            for &(j, t, row) in list {
                if row {
                    e += self.tables[t][d[i] * m + d[j]];
                }
            }
        }
        e
    }
}

impl Exhaustive for DiscreteModel {
    type Config = Assignment;

    fn search_space_size(&self) -> u128 {
        self.search_space()
    }

    fn enumerate(&self, visit: &mut dyn FnMut(&[usize], f64)) {
        // loopless reflected mixed-radix Gray code: one variable moves by
        // one value per step
        let dense = DenseDqm::new(self);
        let (n, m) = (self.n(), self.m());
        let mut d = vec![0usize; n];
        let mut dir = vec![true; n];
        let mut focus: Vec<usize> = (0..=n).collect();
        let mut e = dense.energy(&d);
        visit(&d, e);
        let mut k: u64 = 0;
        loop {
            let j = focus[0];
            focus[0] = 0;
            if j == n {
                break;
            }
            let old = d[j];
            let new = if dir[j] { old + 1 } else { old - 1 };
            e += dense.local(j, new, &d) - dense.local(j, old, &d);
            d[j] = new;
            if new == 0 || new == m - 1 {
                dir[j] = !dir[j];
                focus[j] = focus[j + 1];
                focus[j + 1] = j + 1;
            }
            k += 1;
            if k.is_multiple_of(RESYNC) {
                e = dense.energy(&d);
            }
            visit(&d, e);
        }
    }

    fn exact_energy(&self, state: &[usize]) -> f64 {
        self.energy_unchecked(state)
    }

    fn config(&self, state: &[usize]) -> Assignment {
        Assignment::new(state.to_vec())
    }

    fn magnitude(&self) -> f64 {
        self.linear_terms().map(|(_, v)| v.abs()).sum::<f64>()
            + self.quadratic_terms().map(|(_, v)| v.abs()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::all_configs;
    use crate::problems::{coloring_dqm, Graph};

    fn chain(n: usize, j: f64) -> BinaryModel {
        let mut m = BinaryModel::new(n, Vartype::Spin);
        for i in 0..n - 1 {
            m.add_quadratic(i, i + 1, j).unwrap();
        }
        m
    }

    fn random_binary(n: usize, vartype: Vartype, seed: u64) -> BinaryModel {
        let mut rng = rng_from_seed(seed);
        let mut m = BinaryModel::new(n, vartype);
        for i in 0..n {
            m.add_linear(i, rng.gen_range(-1.0..1.0)).unwrap();
            for j in i + 1..n {
                if rng.gen::<f64>() < 0.6 {
                    m.add_quadratic(i, j, rng.gen_range(-1.0..1.0)).unwrap();
                }
            }
        }
        m.add_offset(rng.gen_range(-1.0..1.0));
        m
    }

    fn random_dqm(n: usize, m: usize, seed: u64) -> DiscreteModel {
        let mut rng = rng_from_seed(seed);
        let mut d = DiscreteModel::new(n, m).unwrap();
        for i in 0..n {
            for a in 0..m {
                d.add_linear(i, a, rng.gen_range(-1.0..1.0)).unwrap();
            }
            for j in i + 1..n {
                for a in 0..m {
                    for b in 0..m {
                        d.add_quadratic(i, j, a, b, rng.gen_range(-1.0..1.0))
                            .unwrap();
                    }
                }
            }
        }
        d
    }

    #[test]
    fn single_field_always_relaxes() {
        let mut m = BinaryModel::new(1, Vartype::Spin);
        m.add_linear(0, 1.0).unwrap();
        let set = anneal(&m, &SamplerParams::with_seed(3)).unwrap();
        assert_eq!(set.num_reads(), 100);
        assert!(set.reads.iter().all(|r| r.config == vec![-1]));
    }

    #[test]
    fn ferromagnetic_chain_ground_state() {
        let m = chain(8, -1.0);
        let set = anneal(&m, &SamplerParams::with_seed(5)).unwrap();
        assert_eq!(set.best().unwrap().energy, -7.0);
        let exact = solve_exact(&m, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(exact.energy, -7.0);
        assert_eq!(exact.optima.len(), 2);
    }

    #[test]
    fn short_chains_nearly_always_reach_ground() {
        for n in [2, 5, 9, 12] {
            let m = chain(n, -1.0);
            let ground = solve_exact(&m, DEFAULT_EXACT_CAP).unwrap().energy;
            let set = anneal(&m, &SamplerParams::with_seed(n as u64)).unwrap();
            let hits = set
                .reads
                .iter()
                .filter(|r| (r.energy - ground).abs() < 1e-9)
                .count();
            assert!(hits >= 99, "chain of {n}: {hits} ground reads");
        }
    }

    #[test]
    fn deterministic_and_order_free() {
        let m = random_binary(10, Vartype::Binary, 2);
        let params = SamplerParams {
            num_reads: 20,
            sweeps: 50,
            ..SamplerParams::with_seed(9)
        };
        let a = anneal(&m, &params).unwrap();
        assert_eq!(a, anneal(&m, &params).unwrap());
        let annealer = Annealer::new(&m, &params).unwrap();
        for r in (0..20).rev() {
            assert_eq!(annealer.read(r), a.reads[r]);
        }
        a.verify(&m).unwrap();
        assert!(a
            .reads
            .iter()
            .all(|r| r.config.iter().all(|&b| b == 0 || b == 1)));
    }

    #[test]
    fn incremental_energy_matches_recomputation() {
        for seed in 0..10 {
            let m = random_binary(12, Vartype::Spin, seed);
            let params = SamplerParams {
                num_reads: 5,
                sweeps: 30,
                ..SamplerParams::with_seed(seed)
            };
            let annealer = Annealer::new(&m, &params).unwrap();
            for r in 0..5 {
                let (start, end, delta) = annealer.run(derive_seed(seed, r));
                let diff = m.energy(&end).unwrap() - m.energy(&start).unwrap();
                assert!((diff - delta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn auto_beta_values() {
        let mut two = BinaryModel::new(1, Vartype::Spin);
        two.add_linear(0, 1.0).unwrap();
        // max flip 2: accepted with probability 1/2 at beta_hot
        let (hot, cold) = auto_beta(&two).unwrap();
        assert!((hot - core::f64::consts::LN_2 / 2.0).abs() < 1e-12);
        assert!((hot - 0.347).abs() < 1e-3);
        assert!((cold - 4.605).abs() < 1e-3);
        assert_eq!(
            auto_beta(&BinaryModel::new(3, Vartype::Spin)).unwrap(),
            (0.1, 10.0)
        );
    }

    #[test]
    fn ladder_is_geometric() {
        let b = beta_ladder(0.5, 8.0, 5);
        assert_eq!(b.len(), 5);
        assert!((b[0] - 0.5).abs() < 1e-12 && (b[4] - 8.0).abs() < 1e-12);
        assert!((b[2] - 2.0).abs() < 1e-12);
        assert_eq!(beta_ladder(0.5, 8.0, 1), vec![8.0]);
    }

    #[test]
    fn params_validation() {
        let bad = SamplerParams {
            beta: BetaSchedule::Explicit {
                hot: 2.0,
                cold: 1.0,
            },
            ..SamplerParams::default()
        };
        assert!(bad.validate().is_err());
        assert!(SamplerParams {
            num_reads: 0,
            ..SamplerParams::default()
        }
        .validate()
        .is_err());
        assert!(SamplerParams {
            sweeps: 0,
            ..SamplerParams::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn aggregate_counts_sum_to_reads() {
        let m = random_binary(4, Vartype::Spin, 1);
        let set = anneal(
            &m,
            &SamplerParams {
                sweeps: 5,
                ..SamplerParams::with_seed(1)
            },
        )
        .unwrap();
        let agg = set.aggregate();
        assert_eq!(agg.iter().map(|s| s.count).sum::<usize>(), 100);
        assert!(agg.windows(2).all(|w| w[0].energy <= w[1].energy));
    }

    #[test]
    fn exact_zero_model() {
        let mut m = BinaryModel::new(3, Vartype::Binary);
        m.add_offset(0.0);
        let sol = solve_exact(&m, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(sol.energy, 0.0);
        assert_eq!(sol.num_optima, 8);
        assert!(sol.is_complete());
    }

    #[test]
    fn exact_triangle_coloring() {
        let g = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let sol = solve_exact(&coloring_dqm(&g, 3).unwrap(), DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(sol.energy, 0.0);
        assert_eq!(sol.optima.len(), 6);
    }

    #[test]
    fn exact_binary_matches_brute_force() {
        for (seed, vartype) in [
            (0, Vartype::Binary),
            (1, Vartype::Spin),
            (2, Vartype::Binary),
        ] {
            let m = random_binary(9, vartype, seed);
            let energies: Vec<(Vec<i8>, f64)> = all_configs(9, vartype)
                .into_iter()
                .map(|c| {
                    let e = m.energy(&c).unwrap();
                    (c, e)
                })
                .collect();
            let min = energies.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
            let mut want: Vec<Vec<i8>> = energies
                .into_iter()
                .filter(|x| x.1 - min <= 1e-9)
                .map(|x| x.0)
                .collect();
            want.sort();
            let sol = solve_exact(&m, DEFAULT_EXACT_CAP).unwrap();
            assert!((sol.energy - min).abs() < 1e-9);
            assert_eq!(sol.optima, want);
        }
    }

    #[test]
    fn exact_dqm_matches_brute_force() {
        for seed in 0..20 {
            let d = random_dqm(3, 3, seed);
            let mut all = Vec::new();
            for k in 0..27 {
                let a = Assignment::new(vec![k % 3, (k / 3) % 3, k / 9]);
                let e = d.energy(&a).unwrap();
                all.push((a, e));
            }
            let min = all.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
            let sol = solve_exact(&d, DEFAULT_EXACT_CAP).unwrap();
            assert!((sol.energy - min).abs() < 1e-9);
            let mut want: Vec<Assignment> = all
                .into_iter()
                .filter(|x| x.1 - min <= 1e-9)
                .map(|x| x.0)
                .collect();
            want.sort();
            assert_eq!(sol.optima, want);
        }
    }

    #[test]
    fn mixed_radix_visits_everything_once() {
        let d = DiscreteModel::new(3, 4).unwrap();
        let mut seen = Vec::new();
        d.enumerate(&mut |s, _| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 64);
        for w in seen.windows(2) {
            let moved: usize = w[0].iter().zip(&w[1]).map(|(a, b)| a.abs_diff(*b)).sum();
            assert_eq!(moved, 1);
        }
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 64);
    }

    #[test]
    fn refuses_large_spaces() {
        let m = BinaryModel::new(30, Vartype::Spin);
        assert!(matches!(
            solve_exact(&m, DEFAULT_EXACT_CAP),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
        let d = DiscreteModel::new(16, 3).unwrap();
        assert!(solve_exact(&d, DEFAULT_EXACT_CAP).is_err());
    }

    #[test]
    fn degenerate_optima_are_counted() {
        let m = BinaryModel::new(18, Vartype::Spin);
        let sol = solve_exact(&m, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(sol.num_optima, 1 << 18);
        assert_eq!(sol.optima.len(), OPTIMA_LIMIT);
        assert!(!sol.is_complete());
    }
}
