//! Benchmark problem families: max-k-coloring of Erdos-Renyi graphs and
//! flight-gate assignment.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::encode::{penalty_strength, PenaltyMode};
use crate::model::DiscreteModel;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Edge probability of the three-coloring suite.
pub const THREE_COLORING_EDGE_PROB: f64 = 0.5;
/// Edge probability of the k-coloring suite, which uses `q = 2k` nodes.
pub const K_COLORING_EDGE_PROB: f64 = 0.75;

/// Simple undirected graph on nodes `0..q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    q: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, normalizing each edge to `(small, large)` and sorting.
    /// Self-loops, duplicates and out-of-range nodes are rejected.
    pub fn new(q: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidModel(format!("self-loop on node {a}")));
            }
            if a >= q || b >= q {
                return Err(Error::InvalidModel(format!(
                    "edge ({a}, {b}) outside 0..{q}"
                )));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        let before = norm.len();
        norm.dedup();
        if norm.len() != before {
            return Err(Error::InvalidModel("duplicate edge".into()));
        }
        Ok(Graph { q, edges: norm })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

/// G(q, p): each of the `q(q-1)/2` pairs is an edge independently with
/// probability `p`.
pub fn gen_er_graph(q: usize, p: f64, seed: u64) -> Result<Graph> {
    if q < 1 {
        return Err(Error::InvalidParameter(
            "graph needs at least one node".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {p} not in [0, 1]"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph { q, edges })
}

/// `H = sum_a sum_{(i,j) in E} x_{i,a} x_{j,a}`: the number of edges whose
/// endpoints share a color.
pub fn coloring_dqm(graph: &Graph, k: usize) -> Result<DiscreteModel> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two colors, got {k}"
        )));
    }
    let mut d = DiscreteModel::new(graph.q(), k)?;
    for &(i, j) in graph.edges() {
        for a in 0..k {
            d.add_quadratic(i, j, a, a, 1.0)?;
        }
    }
    Ok(d)
}

/// Inclusive integer range for the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub lo: u32,
    pub hi: u32,
}

impl IntRange {
    pub const fn new(lo: u32, hi: u32) -> Self {
        IntRange { lo, hi }
    }

    pub const fn constant(v: u32) -> Self {
        IntRange { lo: v, hi: v }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        f64::from(rng.gen_range(self.lo..=self.hi))
    }
}

/// Ranges for synthetic flight-gate instances.
#[derive(Debug, Clone, PartialEq)]
pub struct FgaConfig {
    /// departing and arriving passengers per flight
    pub passengers: IntRange,
    pub transfer_passengers: IntRange,
    /// probability that an ordered flight pair has transfer passengers
    pub transfer_prob: f64,
    /// gate-to-gate, gate-to-claim and check-in-to-gate times
    pub gate_time: IntRange,
    pub arrival_time: IntRange,
    /// time a flight occupies its gate, `t_out - t_in`
    pub stay: IntRange,
    pub buffer: f64,
}

impl Default for FgaConfig {
    fn default() -> Self {
        FgaConfig {
            passengers: IntRange::new(0, 50),
            transfer_passengers: IntRange::new(0, 20),
            transfer_prob: 0.5,
            gate_time: IntRange::new(1, 10),
            arrival_time: IntRange::new(0, 240),
            // with the defaults about a third of all flight pairs conflict
            stay: IntRange::new(20, 60),
            buffer: 10.0,
        }
    }
}

impl FgaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("passengers", self.passengers),
            ("transfer_passengers", self.transfer_passengers),
            ("gate_time", self.gate_time),
            ("arrival_time", self.arrival_time),
            ("stay", self.stay),
        ] {
            if r.lo > r.hi {
                return Err(Error::Config(format!(
                    "{name}: empty range {}..={}",
                    r.lo, r.hi
                )));
            }
        }
        if self.stay.lo == 0 {
            return Err(Error::Config(
                "stay: flights must depart after they arrive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.transfer_prob) {
            return Err(Error::Config(format!(
                "transfer_prob: {} not in [0, 1]",
                self.transfer_prob
            )));
        }
        if !(self.buffer.is_finite() && self.buffer >= 0.0) {
            return Err(Error::Config(format!(
                "buffer: {} must be >= 0",
                self.buffer
            )));
        }
        Ok(())
    }
}

/// One flight-gate assignment instance. Field names follow the usual
/// symbols: `n_dep` is n^d, `t_gate_dep` is t^d_alpha and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct FgaInstance {
    pub n_flights: usize,
    pub m_gates: usize,
    pub n_dep: Vec<f64>,
    pub n_arr: Vec<f64>,
    /// `n_transfer[i][j]` passengers change from flight i to flight j
    pub n_transfer: Vec<Vec<f64>>,
    pub t_in: Vec<f64>,
    pub t_out: Vec<f64>,
    /// gate to baggage claim
    pub t_gate_arr: Vec<f64>,
    /// check-in to gate
    pub t_gate_dep: Vec<f64>,
    pub t_gate_gate: Vec<Vec<f64>>,
    pub t_buf: f64,
}

impl FgaInstance {
    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.n_flights, self.m_gates);
        if n < 1 || m < 1 {
            return Err(Error::InvalidModel(
                "need at least one flight and one gate".into(),
            ));
        }
        let lens = [
            ("n_dep", self.n_dep.len(), n),
            ("n_arr", self.n_arr.len(), n),
            ("n_transfer", self.n_transfer.len(), n),
            ("t_in", self.t_in.len(), n),
            ("t_out", self.t_out.len(), n),
            ("t_gate_arr", self.t_gate_arr.len(), m),
            ("t_gate_dep", self.t_gate_dep.len(), m),
            ("t_gate_gate", self.t_gate_gate.len(), m),
        ];
        for (what, found, expected) in lens {
            if found != expected {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        if let Some(row) = self.n_transfer.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                what: "n_transfer row",
                expected: n,
                found: row.len(),
            });
        }
        if let Some(row) = self.t_gate_gate.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                what: "t_gate_gate row",
                expected: m,
                found: row.len(),
            });
        }
        let nonneg = |v: &f64| v.is_finite() && *v >= 0.0;
        let all_nonneg = self.n_dep.iter().all(nonneg)
            && self.n_arr.iter().all(nonneg)
            && self.n_transfer.iter().flatten().all(nonneg)
            && self.t_in.iter().all(nonneg)
            && self.t_out.iter().all(nonneg)
            && self.t_gate_arr.iter().all(nonneg)
            && self.t_gate_dep.iter().all(nonneg)
            && self.t_gate_gate.iter().flatten().all(nonneg)
            && nonneg(&self.t_buf);
        if !all_nonneg {
            return Err(Error::InvalidModel(
                "counts and times must be finite and >= 0".into(),
            ));
        }
        if let Some(i) = (0..n).find(|&i| self.t_out[i] <= self.t_in[i]) {
            return Err(Error::InvalidModel(format!(
                "flight {i} departs before it arrives"
            )));
        }
        for a in 0..m {
            if self.t_gate_gate[a][a] != 0.0 {
                return Err(Error::InvalidModel(format!(
                    "t_gate_gate[{a}][{a}] must be 0"
                )));
            }
            for b in 0..m {
                if self.t_gate_gate[a][b] != self.t_gate_gate[b][a] {
                    return Err(Error::InvalidModel("t_gate_gate must be symmetric".into()));
                }
            }
        }
        Ok(())
    }

    /// Whether flights `i` and `j` may not share a gate.
    pub fn conflicts(&self, i: usize, j: usize) -> bool {
        i != j
            && self.t_in[i] - self.t_out[j] < self.t_buf
            && self.t_in[j] - self.t_out[i] < self.t_buf
    }

    /// Forbidden flight pairs `(i, j)`, `i < j`.
    pub fn forbidden_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_flights;
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.conflicts(i, j))
            .collect()
    }
}

/// Synthetic instance with `n` flights and `m` gates drawn from `config`.
pub fn gen_fga(n: usize, m: usize, seed: u64, config: &FgaConfig) -> Result<FgaInstance> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidParameter(
            "need at least one flight and one gate".into(),
        ));
    }
    config.validate()?;
    let mut rng = rng_from_seed(seed);
    let n_dep = (0..n).map(|_| config.passengers.draw(&mut rng)).collect();
    let n_arr = (0..n).map(|_| config.passengers.draw(&mut rng)).collect();
    let mut n_transfer = vec![vec![0.0; n]; n];
    for (i, row) in n_transfer.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j && rng.gen::<f64>() < config.transfer_prob {
                *cell = config.transfer_passengers.draw(&mut rng);
            }
        }
    }
    let mut t_in = Vec::with_capacity(n);
    let mut t_out = Vec::with_capacity(n);
    for _ in 0..n {
        let arrive = config.arrival_time.draw(&mut rng);
        t_in.push(arrive);
        t_out.push(arrive + config.stay.draw(&mut rng));
    }
    let t_gate_arr = (0..m).map(|_| config.gate_time.draw(&mut rng)).collect();
    let t_gate_dep = (0..m).map(|_| config.gate_time.draw(&mut rng)).collect();
    let mut t_gate_gate = vec![vec![0.0; m]; m];
    for (a, b) in (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))) {
        let t = config.gate_time.draw(&mut rng);
        t_gate_gate[a][b] = t;
        t_gate_gate[b][a] = t;
    }
    Ok(FgaInstance {
        n_flights: n,
        m_gates: m,
        n_dep,
        n_arr,
        n_transfer,
        t_in,
        t_out,
        t_gate_arr,
        t_gate_dep,
        t_gate_gate,
        t_buf: config.buffer,
    })
}

/// Transit-time cost without the temporal constraint.
pub fn fga_cost_dqm(inst: &FgaInstance) -> Result<DiscreteModel> {
    inst.validate()?;
    let (n, m) = (inst.n_flights, inst.m_gates);
    if m < 2 {
        return Err(Error::InvalidParameter(
            "a discrete model needs at least two gates".into(),
        ));
    }
    let mut d = DiscreteModel::new(n, m)?;
    for i in 0..n {
        for a in 0..m {
            d.add_linear(
                i,
                a,
                inst.n_dep[i] * inst.t_gate_dep[a] + inst.n_arr[i] * inst.t_gate_arr[a],
            )?;
        }
    }
    for i in 0..n {
        for j in 0..n {
            let pax = inst.n_transfer[i][j];
            if i == j || pax == 0.0 {
                continue;
            }
            for a in 0..m {
                for b in 0..m {
                    d.add_quadratic(i, j, a, b, pax * inst.t_gate_gate[a][b])?;
                }
            }
        }
    }
    Ok(d)
}

/// Transit cost plus `mu * sum_a sum_{(i,j) in E} x_{i,a} x_{j,a}`, with mu
/// resolved from the cost-only model.
pub fn fga_dqm(inst: &FgaInstance, mu_mode: PenaltyMode) -> Result<DiscreteModel> {
    let mut d = fga_cost_dqm(inst)?;
    let mu = penalty_strength(&d, mu_mode)?;
    for (i, j) in inst.forbidden_pairs() {
        for a in 0..inst.m_gates {
            d.add_quadratic(i, j, a, a, mu)?;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Assignment, ENERGY_TOL};

    fn assignments(n: usize, m: usize) -> impl Iterator<Item = Assignment> {
        (0..m.pow(n as u32)).map(move |mut k| {
            let mut v = vec![0; n];
            for s in v.iter_mut() {
                *s = k % m;
                k /= m;
            }
            Assignment::new(v)
        })
    }

    fn two_flights(overlap: bool) -> FgaInstance {
        FgaInstance {
            n_flights: 2,
            m_gates: 2,
            n_dep: vec![1.0, 2.0],
            n_arr: vec![3.0, 4.0],
            n_transfer: vec![vec![0.0; 2]; 2],
            t_in: vec![0.0, if overlap { 5.0 } else { 100.0 }],
            t_out: vec![10.0, if overlap { 15.0 } else { 110.0 }],
            t_gate_arr: vec![1.0, 1.0],
            t_gate_dep: vec![1.0, 1.0],
            t_gate_gate: vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            t_buf: 5.0,
        }
    }

    #[test]
    fn er_extremes() {
        let full = gen_er_graph(5, 1.0, 3).unwrap();
        assert_eq!(full.num_edges(), 10);
        assert!(gen_er_graph(5, 0.0, 3).unwrap().edges().is_empty());
        assert!(gen_er_graph(5, 1.5, 3).is_err());
        assert!(gen_er_graph(5, -0.1, 3).is_err());
        assert_eq!(gen_er_graph(9, 0.5, 4), gen_er_graph(9, 0.5, 4));
    }

    #[test]
    fn er_edge_count_is_binomial() {
        // 190 pairs at p = 0.5: mean 95, variance 47.5
        let seeds = 1000;
        let total: usize = (0..seeds)
            .map(|s| gen_er_graph(20, 0.5, s).unwrap().num_edges())
            .sum();
        let mean = total as f64 / seeds as f64;
        let stderr = (47.5f64 / seeds as f64).sqrt();
        assert!((mean - 95.0).abs() < 3.0 * stderr, "mean edge count {mean}");
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(3, vec![(0, 0)]).is_err());
        assert!(Graph::new(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, vec![(0, 3)]).is_err());
        assert_eq!(Graph::new(3, vec![(2, 0)]).unwrap().edges(), &[(0, 2)]);
    }

    #[test]
    fn triangle_coloring() {
        let g = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let d = coloring_dqm(&g, 3).unwrap();
        assert_eq!(d.energy(&Assignment::new(vec![0, 1, 2])).unwrap(), 0.0);
        assert_eq!(d.energy(&Assignment::new(vec![1, 1, 1])).unwrap(), 3.0);
        assert_eq!(d.max_abs_coefficient(), Some(1.0));
        assert_eq!(d.num_linear(), 0);
        assert!(coloring_dqm(&g, 1).is_err());
    }

    #[test]
    fn coloring_energy_counts_monochromatic_edges() {
        for seed in 0..20 {
            let g = gen_er_graph(5, 0.5, seed).unwrap();
            let d = coloring_dqm(&g, 3).unwrap();
            for a in assignments(5, 3) {
                let clashes = g
                    .edges()
                    .iter()
                    .filter(|&&(i, j)| a.values()[i] == a.values()[j])
                    .count();
                assert_eq!(d.energy(&a).unwrap(), clashes as f64);
            }
        }
    }

    #[test]
    fn fga_default_shape_and_determinism() {
        let cfg = FgaConfig::default();
        let inst = gen_fga(7, 2, 42, &cfg).unwrap();
        assert_eq!(inst.n_flights, 7);
        assert_eq!(inst.m_gates, 2);
        inst.validate().unwrap();
        assert_eq!(inst, gen_fga(7, 2, 42, &cfg).unwrap());
        assert_ne!(inst, gen_fga(7, 2, 43, &cfg).unwrap());
    }

    #[test]
    fn fga_constant_ranges() {
        let cfg = FgaConfig {
            passengers: IntRange::constant(7),
            transfer_passengers: IntRange::constant(3),
            transfer_prob: 1.0,
            gate_time: IntRange::constant(4),
            arrival_time: IntRange::constant(10),
            stay: IntRange::constant(5),
            buffer: 2.0,
        };
        let inst = gen_fga(3, 2, 1, &cfg).unwrap();
        assert!(inst.n_dep.iter().chain(&inst.n_arr).all(|&v| v == 7.0));
        assert!(inst.t_in.iter().all(|&v| v == 10.0));
        assert!(inst.t_out.iter().all(|&v| v == 15.0));
        assert!(inst
            .t_gate_arr
            .iter()
            .chain(&inst.t_gate_dep)
            .all(|&v| v == 4.0));
        assert_eq!(inst.t_gate_gate, vec![vec![0.0, 4.0], vec![4.0, 0.0]]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inst.n_transfer[i][j], if i == j { 0.0 } else { 3.0 });
            }
        }
        assert_eq!(inst.t_buf, 2.0);
    }

    #[test]
    fn fga_rejects_empty_ranges() {
        let cfg = FgaConfig {
            passengers: IntRange::new(5, 4),
            ..FgaConfig::default()
        };
        assert!(matches!(gen_fga(7, 2, 0, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn single_flight_single_gate_cost() {
        let inst = FgaInstance {
            n_flights: 1,
            m_gates: 1,
            n_dep: vec![3.0],
            n_arr: vec![5.0],
            n_transfer: vec![vec![0.0]],
            t_in: vec![0.0],
            t_out: vec![1.0],
            t_gate_arr: vec![2.0],
            t_gate_dep: vec![7.0],
            t_gate_gate: vec![vec![0.0]],
            t_buf: 0.0,
        };
        inst.validate().unwrap();
        // with one gate there is a single assignment
        assert_eq!(
            inst.n_dep[0] * inst.t_gate_dep[0] + inst.n_arr[0] * inst.t_gate_arr[0],
            31.0
        );
        // a discrete model needs two values, so add an unused gate far away
        let mut two = inst.clone();
        two.m_gates = 2;
        two.t_gate_arr.push(100.0);
        two.t_gate_dep.push(100.0);
        two.t_gate_gate = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let d = fga_dqm(&two, PenaltyMode::AutoMax).unwrap();
        assert_eq!(d.energy(&Assignment::new(vec![0])).unwrap(), 31.0);
    }

    #[test]
    fn overlapping_flights_pay_mu_on_shared_gate() {
        let inst = two_flights(true);
        assert_eq!(inst.forbidden_pairs(), vec![(0, 1)]);
        let cost = fga_cost_dqm(&inst).unwrap();
        let d = fga_dqm(&inst, PenaltyMode::Fixed(50.0)).unwrap();
        let same = Assignment::new(vec![1, 1]);
        let split = Assignment::new(vec![0, 1]);
        assert_eq!(d.energy(&same).unwrap(), cost.energy(&same).unwrap() + 50.0);
        assert_eq!(d.energy(&split).unwrap(), cost.energy(&split).unwrap());

        let apart = two_flights(false);
        assert!(apart.forbidden_pairs().is_empty());
    }

    #[test]
    fn forbidden_pairs_symmetric_and_irreflexive() {
        let inst = gen_fga(7, 2, 9, &FgaConfig::default()).unwrap();
        for i in 0..7 {
            assert!(!inst.conflicts(i, i));
            for j in 0..7 {
                assert_eq!(inst.conflicts(i, j), inst.conflicts(j, i));
            }
        }
    }

    #[test]
    fn large_mu_optima_respect_temporal_constraints() {
        // brute force: with mu above the whole transit-cost range, optima
        // are conflict-free whenever a conflict-free assignment exists
        let cfg = FgaConfig::default();
        let mut checked = 0;
        for seed in 0..30 {
            let inst = gen_fga(5, 2, seed, &cfg).unwrap();
            let cost = fga_cost_dqm(&inst).unwrap();
            let energies: Vec<f64> = assignments(5, 2)
                .map(|a| cost.energy(&a).unwrap())
                .collect();
            let spread = energies.iter().cloned().fold(f64::MIN, f64::max)
                - energies.iter().cloned().fold(f64::MAX, f64::min);
            let feasible = |a: &Assignment| {
                inst.forbidden_pairs()
                    .iter()
                    .all(|&(i, j)| a.values()[i] != a.values()[j])
            };
            if !assignments(5, 2).any(|a| feasible(&a)) {
                continue;
            }
            checked += 1;
            let d = fga_dqm(&inst, PenaltyMode::Fixed(spread + 1.0)).unwrap();
            let all: Vec<(Assignment, f64)> = assignments(5, 2)
                .map(|a| {
                    let e = d.energy(&a).unwrap();
                    (a, e)
                })
                .collect();
            let min = all.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
            for (a, e) in &all {
                if (e - min).abs() < ENERGY_TOL {
                    assert!(feasible(a), "seed {seed}");
                }
            }
        }
        assert!(checked > 0);
    }
}
