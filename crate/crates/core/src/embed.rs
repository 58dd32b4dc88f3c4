//! Hardware graphs, chain embeddings and chain-break repair.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{BinaryModel, Vartype};
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Default uniform-torque-compensation prefactor.
pub const UTC_PREFACTOR: f64 = 1.414;

/// Default number of embedding attempts.
pub const DEFAULT_ATTEMPTS: usize = 3;

const FREE: usize = usize::MAX;

/// Undirected graph of physical qubits and couplers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareGraph {
    name: String,
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl HardwareGraph {
    pub fn new(
        num_qubits: usize,
        edges: Vec<(usize, usize)>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidModel(format!("self-loop on qubit {a}")));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::InvalidModel(format!(
                    "coupler ({a}, {b}) outside 0..{num_qubits}"
                )));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adj = vec![Vec::new(); num_qubits];
        for &(a, b) in &norm {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(HardwareGraph {
            name: name.into(),
            num_qubits,
            edges: norm,
            adj,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Couplers `(a, b)`, `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adj[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.adj[a].binary_search(&b).is_ok()
    }
}

/// Chimera lattice of `rows x cols` unit cells, each a complete bipartite
/// `K_{shore,shore}`. Qubit `((r * cols + c) * 2 + u) * shore + k` is number
/// `k` on side `u` of cell `(r, c)`; side 0 couples vertically, side 1
/// horizontally.
pub fn gen_chimera(rows: usize, cols: usize, shore: usize) -> Result<HardwareGraph> {
    if rows < 1 || cols < 1 || shore < 1 {
        return Err(Error::InvalidParameter(
            "chimera dimensions must be >= 1".into(),
        ));
    }
    let q = |r: usize, c: usize, u: usize, k: usize| ((r * cols + c) * 2 + u) * shore + k;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            for a in 0..shore {
                for b in 0..shore {
                    edges.push((q(r, c, 0, a), q(r, c, 1, b)));
                }
                if r + 1 < rows {
                    edges.push((q(r, c, 0, a), q(r + 1, c, 0, a)));
                }
                if c + 1 < cols {
                    edges.push((q(r, c, 1, a), q(r, c + 1, 1, a)));
                }
            }
        }
    }
    HardwareGraph::new(
        rows * cols * 2 * shore,
        edges,
        format!("chimera({rows},{cols},{shore})"),
    )
}

/// Logical variable `i` is represented by the physical qubits `chains[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    chains: Vec<Vec<usize>>,
    chain_strength: f64,
}

impl Embedding {
    pub fn new(chains: Vec<Vec<usize>>, chain_strength: f64) -> Result<Self> {
        if !(chain_strength.is_finite() && chain_strength > 0.0) {
            return Err(Error::InvalidEmbedding(format!(
                "chain strength {chain_strength} must be positive"
            )));
        }
        Ok(Embedding {
            chains,
            chain_strength,
        })
    }

    /// One qubit per variable, qubit `i` for variable `i`.
    pub fn identity(num_vars: usize, chain_strength: f64) -> Result<Self> {
        Embedding::new((0..num_vars).map(|i| vec![i]).collect(), chain_strength)
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn chain_strength(&self) -> f64 {
        self.chain_strength
    }

    pub fn num_vars(&self) -> usize {
        self.chains.len()
    }

    pub fn num_qubits_used(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Logical variable owning each physical qubit.
    fn owners(&self, num_qubits: usize) -> Result<Vec<usize>> {
        let mut owner = vec![FREE; num_qubits];
        for (v, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(Error::InvalidEmbedding(format!(
                    "chain of variable {v} is empty"
                )));
            }
            for &q in chain {
                if q >= num_qubits {
                    return Err(Error::InvalidEmbedding(format!(
                        "qubit {q} of variable {v} outside 0..{num_qubits}"
                    )));
                }
                if owner[q] != FREE {
                    return Err(Error::InvalidEmbedding(format!(
                        "qubit {q} used by variables {} and {v}",
                        owner[q]
                    )));
                }
                owner[q] = v;
            }
        }
        Ok(owner)
    }

    /// Checks disjointness, chain connectivity and that every logical edge
    /// has at least one coupler between its two chains.
    pub fn validate(
        &self,
        num_vars: usize,
        logical_edges: &[(usize, usize)],
        hw: &HardwareGraph,
    ) -> Result<()> {
        if self.chains.len() != num_vars {
            return Err(Error::DimensionMismatch {
                what: "embedding chains",
                expected: num_vars,
                found: self.chains.len(),
            });
        }
        let owner = self.owners(hw.num_qubits())?;
        for (v, chain) in self.chains.iter().enumerate() {
            if !chain_connected(chain, &owner, v, hw) {
                return Err(Error::InvalidEmbedding(format!(
                    "chain of variable {v} is disconnected"
                )));
            }
        }
        for &(i, j) in logical_edges {
            if i >= num_vars || j >= num_vars {
                return Err(Error::InvalidEmbedding(format!(
                    "logical edge ({i}, {j}) out of range"
                )));
            }
            let touches = self.chains[i]
                .iter()
                .any(|&a| hw.neighbors(a).iter().any(|&b| owner[b] == j));
            if !touches {
                return Err(Error::InvalidEmbedding(format!(
                    "no coupler between the chains of {i} and {j}"
                )));
            }
        }
        Ok(())
    }
}

fn chain_connected(chain: &[usize], owner: &[usize], v: usize, hw: &HardwareGraph) -> bool {
    let mut seen = vec![chain[0]];
    let mut stack = vec![chain[0]];
    while let Some(a) = stack.pop() {
        for &b in hw.neighbors(a) {
            if owner[b] == v && !seen.contains(&b) {
                seen.push(b);
                stack.push(b);
            }
        }
    }
    seen.len() == chain.len()
}

/// Result of an embedding search; failure is an expected outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbedOutcome {
    Found(Vec<Vec<usize>>),
    Fail { attempts: usize },
}

impl EmbedOutcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, EmbedOutcome::Fail { .. })
    }
}

/// Greedy chain embedding of the graph with `num_vars` nodes and
/// `logical_edges` into `hw`. Each attempt visits the variables in a seeded
/// random breadth-first order, roots each one at the free qubit closest to
/// its placed neighbors and claims shortest free paths towards them. Qubits
/// that had to be shared are then resolved by rip-up-and-reroute passes in
/// which contested qubits grow more expensive, and finally chains are
/// shortened where possible.
pub fn embed_greedy(
    num_vars: usize,
    logical_edges: &[(usize, usize)],
    hw: &HardwareGraph,
    attempts: usize,
    seed: u64,
) -> Result<EmbedOutcome> {
    if attempts < 1 {
        return Err(Error::InvalidParameter(
            "need at least one embedding attempt".into(),
        ));
    }
    let mut adj = vec![Vec::new(); num_vars];
    for &(i, j) in logical_edges {
        if i == j || i >= num_vars || j >= num_vars {
            return Err(Error::InvalidModel(format!("bad logical edge ({i}, {j})")));
        }
        adj[i].push(j);
        adj[j].push(i);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    if num_vars <= hw.num_qubits() && logical_edges.iter().all(|&(i, j)| hw.has_edge(i, j)) {
        return Ok(EmbedOutcome::Found(
            (0..num_vars).map(|i| vec![i]).collect(),
        ));
    }
    if num_vars > hw.num_qubits() {
        return Ok(EmbedOutcome::Fail { attempts });
    }
    for attempt in 0..attempts {
        if let Some(chains) = greedy_attempt(&adj, hw, derive_seed(seed, attempt as u64)) {
            return Ok(EmbedOutcome::Found(chains));
        }
    }
    Ok(EmbedOutcome::Fail { attempts })
}

fn bfs_order<R: Rng>(adj: &[Vec<usize>], rng: &mut R) -> Vec<usize> {
    let n = adj.len();
    let mut starts: Vec<usize> = (0..n).collect();
    starts.shuffle(rng);
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
            next.shuffle(rng);
            for u in next {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    order
}

/// Node-weighted shortest paths from `chain`: entering qubit `q` costs
/// `weight[q]`. Returns distances and parents for path recovery.
fn weighted_distances(
    chain: &[usize],
    weight: &[f64],
    base: f64,
    hw: &HardwareGraph,
) -> (Vec<f64>, Vec<usize>) {
    let n = hw.num_qubits();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![FREE; n];
    let mut heap = BinaryHeap::new();
    for &q in chain {
        // reaching the chain through a qubit it shares is not free
        dist[q] = weight[q] / base - 1.0;
        heap.push(Reverse(Dist(dist[q], q)));
    }
    while let Some(Reverse(Dist(d, a))) = heap.pop() {
        if d > dist[a] {
            continue;
        }
        for &b in hw.neighbors(a) {
            let nd = d + weight[b];
            if nd < dist[b] {
                dist[b] = nd;
                parent[b] = a;
                heap.push(Reverse(Dist(nd, b)));
            }
        }
    }
    (dist, parent)
}

#[derive(PartialEq)]
struct Dist(f64, usize);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Rip-up-and-reroute passes allowed per attempt.
const NEGOTIATION_PASSES: usize = 100;
/// Give up once this many passes in a row fail to share fewer qubits than
/// the best seen so far.
const STALL_PASSES: usize = 40;
/// Cost multiplier of a qubit per additional chain sharing it.
const SHARE_BASE: f64 = 2.0;
/// Cost growth of a qubit for every pass it stays shared.
const HISTORY_GAIN: f64 = 0.5;

struct Router<'a> {
    adj: &'a [Vec<usize>],
    hw: &'a HardwareGraph,
    qubits: Vec<usize>,
    usage: Vec<u32>,
    history: Vec<f64>,
    chains: Vec<Vec<usize>>,
}

impl<'a> Router<'a> {
    fn rip(&mut self, v: usize) -> Vec<usize> {
        let old = core::mem::take(&mut self.chains[v]);
        for &q in &old {
            self.usage[q] -= 1;
        }
        old
    }

    fn commit(&mut self, v: usize, chain: Vec<usize>) {
        for &q in &chain {
            self.usage[q] += 1;
        }
        self.chains[v] = chain;
    }

    fn shared(&self) -> usize {
        self.usage.iter().filter(|&&u| u > 1).count()
    }

    /// Best chain for `v` against the other chains: a root minimizing the
    /// summed path cost to every placed neighbor, plus those paths.
    fn route(&self, v: usize, base: f64, gain: f64) -> Option<Vec<usize>> {
        let weight: Vec<f64> = self
            .usage
            .iter()
            .zip(&self.history)
            .map(|(&u, &h)| (1.0 + gain * h) * libm::pow(base, f64::from(u)))
            .collect();
        let placed: Vec<usize> = self.adj[v]
            .iter()
            .copied()
            .filter(|&u| !self.chains[u].is_empty())
            .collect();
        if placed.is_empty() {
            // fresh component: the cheapest, best-connected qubit
            let free = |q: usize| {
                self.hw
                    .neighbors(q)
                    .iter()
                    .filter(|&&x| self.usage[x] == 0)
                    .count()
            };
            let root = self.qubits.iter().copied().min_by(|&a, &b| {
                weight[a]
                    .total_cmp(&weight[b])
                    .then_with(|| free(b).cmp(&free(a)))
            })?;
            return Some(vec![root]);
        }
        let searches: Vec<(Vec<f64>, Vec<usize>)> = placed
            .iter()
            .map(|&u| weighted_distances(&self.chains[u], &weight, base, self.hw))
            .collect();
        let mut root = None;
        let mut best = f64::INFINITY;
        for &q in &self.qubits {
            if placed.iter().any(|&u| self.chains[u].contains(&q)) {
                continue;
            }
            // the root's own cost is paid once, not once per neighbor
            let cost = searches.iter().map(|(d, _)| d[q]).sum::<f64>()
                - (searches.len() - 1) as f64 * weight[q];
            if cost < best {
                best = cost;
                root = Some(q);
            }
        }
        let root = root?;
        let mut chain = vec![root];
        for (&u, (_, parent)) in placed.iter().zip(&searches) {
            let mut q = root;
            while !self.chains[u].contains(&parent[q]) {
                q = parent[q];
                if !chain.contains(&q) {
                    chain.push(q);
                }
            }
        }
        Some(chain)
    }
}

fn greedy_attempt(adj: &[Vec<usize>], hw: &HardwareGraph, seed: u64) -> Option<Vec<Vec<usize>>> {
    let mut rng = rng_from_seed(seed);
    let n_q = hw.num_qubits();
    let mut order = bfs_order(adj, &mut rng);
    let mut qubits: Vec<usize> = (0..n_q).collect();
    qubits.shuffle(&mut rng);
    let mut r = Router {
        adj,
        hw,
        qubits,
        usage: vec![0; n_q],
        history: vec![0.0; n_q],
        chains: vec![Vec::new(); adj.len()],
    };
    // sharing a qubit then costs more than any path through free ones
    let strict = (n_q + 1) as f64;

    for &v in &order {
        let chain = r.route(v, strict, 0.0)?;
        r.commit(v, chain);
    }
    let mut pass = 0;
    let (mut fewest, mut since) = (usize::MAX, 0);
    while r.shared() > 0 {
        if r.shared() < fewest {
            fewest = r.shared();
            since = 0;
        }
        if pass == NEGOTIATION_PASSES || since == STALL_PASSES {
            return None;
        }
        pass += 1;
        since += 1;
        for (h, &u) in r.history.iter_mut().zip(&r.usage) {
            if u > 1 {
                *h += f64::from(u - 1);
            }
        }
        order.shuffle(&mut rng);
        for &v in &order {
            r.rip(v);
            let chain = r.route(v, SHARE_BASE, HISTORY_GAIN)?;
            r.commit(v, chain);
        }
    }
    // shorten chains while staying overlap-free
    loop {
        let mut improved = false;
        order.shuffle(&mut rng);
        for &v in &order {
            let old = r.rip(v);
            match r.route(v, strict, 0.0) {
                Some(chain)
                    if chain.len() < old.len() && chain.iter().all(|&q| r.usage[q] == 0) =>
                {
                    r.commit(v, chain);
                    improved = true;
                }
                _ => r.commit(v, old),
            }
        }
        if !improved {
            break;
        }
    }
    let mut chains = r.chains;
    for chain in &mut chains {
        chain.sort_unstable();
    }
    Some(chains)
}

/// How the intra-chain coupling magnitude is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainStrengthMode {
    /// prefactor x RMS coupling x sqrt(mean degree)
    Utc(f64),
    Fixed(f64),
    /// largest field or coupling magnitude
    Max,
}

impl Default for ChainStrengthMode {
    fn default() -> Self {
        ChainStrengthMode::Utc(UTC_PREFACTOR)
    }
}

impl ChainStrengthMode {
    pub fn name(&self) -> String {
        match self {
            ChainStrengthMode::Utc(p) => format!("utc({p})"),
            ChainStrengthMode::Fixed(v) => format!("fixed({v})"),
            ChainStrengthMode::Max => "max".to_string(),
        }
    }
}

/// Chain strength for the logical spin model. Every mode gives 1.0 when
/// the model has no couplings.
pub fn chain_strength(logical: &BinaryModel, mode: ChainStrengthMode) -> Result<f64> {
    if logical.vartype() != Vartype::Spin {
        return Err(Error::WrongVartype {
            expected: Vartype::Spin,
            found: logical.vartype(),
        });
    }
    match mode {
        ChainStrengthMode::Utc(p) | ChainStrengthMode::Fixed(p) if !(p.is_finite() && p > 0.0) => {
            return Err(Error::InvalidParameter(format!(
                "chain strength parameter {p} must be positive"
            )));
        }
        _ => {}
    }
    let couplings = logical.num_interactions();
    if couplings == 0 {
        return Ok(1.0);
    }
    Ok(match mode {
        ChainStrengthMode::Fixed(v) => v,
        ChainStrengthMode::Max => logical.max_abs_coefficient().unwrap_or(1.0),
        ChainStrengthMode::Utc(prefactor) => {
            let sq: f64 = logical.quadratic_terms().map(|(_, j)| j * j).sum();
            let rms = libm::sqrt(sq / couplings as f64);
            let mean_degree = 2.0 * couplings as f64 / logical.num_vars() as f64;
            prefactor * rms * libm::sqrt(mean_degree)
        }
    })
}

/// Physical spin model over all qubits of `hw`. Fields are split equally
/// across a chain, couplings equally across all couplers joining two
/// chains, and every coupler inside a chain gets `-chain_strength`.
pub fn apply_embedding(
    logical: &BinaryModel,
    emb: &Embedding,
    hw: &HardwareGraph,
) -> Result<BinaryModel> {
    if logical.vartype() != Vartype::Spin {
        return Err(Error::WrongVartype {
            expected: Vartype::Spin,
            found: logical.vartype(),
        });
    }
    let edges = logical.interaction_edges();
    emb.validate(logical.num_vars(), &edges, hw)?;
    let owner = emb.owners(hw.num_qubits())?;
    let mut phys = BinaryModel::new(hw.num_qubits(), Vartype::Spin);
    phys.add_offset(logical.offset());
    for (v, chain) in emb.chains().iter().enumerate() {
        let h = logical.linear()[v];
        if h != 0.0 {
            let share = h / chain.len() as f64;
            for &q in chain {
                phys.add_linear(q, share)?;
            }
        }
        for &a in chain {
            for &b in hw.neighbors(a) {
                if a < b && owner[b] == v {
                    phys.add_quadratic(a, b, -emb.chain_strength())?;
                }
            }
        }
    }
    for ((i, j), value) in logical.quadratic_terms() {
        let couplers: Vec<(usize, usize)> = emb.chains()[i]
            .iter()
            .flat_map(|&a| {
                hw.neighbors(a)
                    .iter()
                    .filter(|&&b| owner[b] == j)
                    .map(move |&b| (a, b))
            })
            .collect();
        let share = value / couplers.len() as f64;
        for (a, b) in couplers {
            phys.add_quadratic(a, b, share)?;
        }
    }
    Ok(phys)
}

/// Energy of aligned chains: `-chain_strength` per intra-chain coupler.
pub fn chain_ground_energy(emb: &Embedding, hw: &HardwareGraph) -> Result<f64> {
    let owner = emb.owners(hw.num_qubits())?;
    let couplers = hw
        .edges()
        .iter()
        .filter(|&&(a, b)| owner[a] != FREE && owner[a] == owner[b])
        .count();
    Ok(-emb.chain_strength() * couplers as f64)
}

/// Spreads a logical spin configuration over the chains; unused qubits
/// get `+1`.
pub fn embed_config(logical: &[i8], emb: &Embedding, num_qubits: usize) -> Result<Vec<i8>> {
    if logical.len() != emb.num_vars() {
        return Err(Error::DimensionMismatch {
            what: "logical configuration",
            expected: emb.num_vars(),
            found: logical.len(),
        });
    }
    let mut phys = vec![1i8; num_qubits];
    for (chain, &s) in emb.chains().iter().zip(logical) {
        for &q in chain {
            phys[q] = s;
        }
    }
    Ok(phys)
}

/// What to do with a read whose chains disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepairMode {
    /// Resolve each broken chain to its majority spin; ties take the spin
    /// of the lowest-index qubit.
    #[default]
    Majority,
    Discard,
}

impl RepairMode {
    pub fn name(self) -> &'static str {
        match self {
            RepairMode::Majority => "majority",
            RepairMode::Discard => "discard",
        }
    }
}

/// Logical reads recovered from physical ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Unembedded {
    /// `reads[r]` is `None` when read `r` was discarded
    pub reads: Vec<Option<Vec<i8>>>,
    /// whether read `r` had any broken chain before repair
    pub broken: Vec<bool>,
}

impl Unembedded {
    /// Fraction of reads without broken chains.
    pub fn r_chain(&self) -> f64 {
        if self.broken.is_empty() {
            return 0.0;
        }
        self.broken.iter().filter(|&&b| !b).count() as f64 / self.broken.len() as f64
    }
}

/// Maps physical spin reads back to logical variables.
pub fn unembed(physical: &[Vec<i8>], emb: &Embedding, repair: RepairMode) -> Result<Unembedded> {
    let width = emb
        .chains()
        .iter()
        .flatten()
        .map(|&q| q + 1)
        .max()
        .unwrap_or(0);
    let mut reads = Vec::with_capacity(physical.len());
    let mut broken = Vec::with_capacity(physical.len());
    for (r, read) in physical.iter().enumerate() {
        if read.len() < width {
            return Err(Error::DimensionMismatch {
                what: "physical read",
                expected: width,
                found: read.len(),
            });
        }
        if let Some(&bad) = read.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidValue(format!(
                "read {r} holds non-spin value {bad}"
            )));
        }
        let mut any_broken = false;
        let mut logical = Vec::with_capacity(emb.num_vars());
        for chain in emb.chains() {
            let sum: i64 = chain.iter().map(|&q| i64::from(read[q])).sum();
            if sum.unsigned_abs() as usize != chain.len() {
                any_broken = true;
            }
            logical.push(match sum {
                s if s > 0 => 1,
                s if s < 0 => -1,
                _ => read[*chain.iter().min().expect("validated chains are nonempty")],
            });
        }
        broken.push(any_broken);
        reads.push(if any_broken && repair == RepairMode::Discard {
            None
        } else {
            Some(logical)
        });
    }
    Ok(Unembedded { reads, broken })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::all_configs;
    use rand::Rng;

    fn complete(n: usize) -> Vec<(usize, usize)> {
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect()
    }

    fn found(outcome: EmbedOutcome) -> Vec<Vec<usize>> {
        match outcome {
            EmbedOutcome::Found(c) => c,
            EmbedOutcome::Fail { .. } => panic!("embedding failed"),
        }
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
        let mut rng = rng_from_seed(seed);
        complete(n)
            .into_iter()
            .filter(|_| rng.gen::<f64>() < p)
            .collect()
    }

    fn random_spin_model(n: usize, edges: &[(usize, usize)], seed: u64) -> BinaryModel {
        let mut rng = rng_from_seed(seed);
        let mut m = BinaryModel::new(n, Vartype::Spin);
        for i in 0..n {
            m.add_linear(i, rng.gen_range(-1.0..1.0)).unwrap();
        }
        for &(i, j) in edges {
            m.add_quadratic(i, j, rng.gen_range(-1.0..1.0)).unwrap();
        }
        m.add_offset(0.5);
        m
    }

    #[test]
    fn chimera_counts() {
        let one = gen_chimera(1, 1, 4).unwrap();
        assert_eq!(one.num_qubits(), 8);
        assert_eq!(one.edges().len(), 16);
        let two = gen_chimera(2, 1, 4).unwrap();
        assert_eq!(two.num_qubits(), 16);
        // one coupler per vertical-side qubit of the upper cell
        assert_eq!(two.edges().len(), 2 * 16 + 4);
        let wide = gen_chimera(1, 2, 4).unwrap();
        assert_eq!(wide.edges().len(), 2 * 16 + 4);
        assert_eq!(gen_chimera(16, 16, 4).unwrap().num_qubits(), 2048);
        let c = gen_chimera(4, 4, 4).unwrap();
        // 16 cells * 16 + vertical 3*4*4 + horizontal 4*3*4
        assert_eq!(c.edges().len(), 256 + 48 + 48);
        assert!(c.neighbors(0).len() <= 6);
        assert!(gen_chimera(0, 1, 4).is_err());
    }

    #[test]
    fn identity_when_logical_is_subgraph() {
        let hw = gen_chimera(1, 1, 4).unwrap();
        let chains = found(embed_greedy(6, &[(0, 4), (1, 4), (0, 5)], &hw, 1, 0).unwrap());
        assert!(chains.iter().enumerate().all(|(i, c)| c == &vec![i]));
    }

    #[test]
    fn k5_does_not_fit_a_square() {
        let hw = HardwareGraph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], "cycle").unwrap();
        let out = embed_greedy(5, &complete(5), &hw, 3, 1).unwrap();
        assert_eq!(out, EmbedOutcome::Fail { attempts: 3 });
    }

    #[test]
    fn k4_into_one_cell() {
        let hw = gen_chimera(1, 1, 4).unwrap();
        for seed in 0..20 {
            let chains = found(embed_greedy(4, &complete(4), &hw, 3, seed).unwrap());
            let emb = Embedding::new(chains, 1.0).unwrap();
            emb.validate(4, &complete(4), &hw).unwrap();
            assert!(
                emb.max_chain_length() <= 2,
                "seed {seed}: {:?}",
                emb.chains()
            );
        }
    }

    #[test]
    fn greedy_embeddings_are_valid() {
        let hw = gen_chimera(4, 4, 4).unwrap();
        let mut successes = 0;
        for trial in 0..100u64 {
            let n = 2 + (trial as usize % 11);
            let edges = random_graph(n, 0.5, trial);
            if let EmbedOutcome::Found(chains) = embed_greedy(n, &edges, &hw, 3, trial).unwrap() {
                successes += 1;
                Embedding::new(chains, 1.0)
                    .unwrap()
                    .validate(n, &edges, &hw)
                    .unwrap();
            }
        }
        assert!(successes >= 90, "{successes} of 100 embedded");
    }

    #[test]
    fn validate_rejects_bad_embeddings() {
        let hw = gen_chimera(1, 1, 4).unwrap();
        let overlap = Embedding::new(vec![vec![0], vec![0, 4]], 1.0).unwrap();
        assert!(overlap.validate(2, &[], &hw).is_err());
        let split = Embedding::new(vec![vec![0, 1]], 1.0).unwrap();
        assert!(split.validate(1, &[], &hw).is_err());
        let apart = Embedding::new(vec![vec![0], vec![1]], 1.0).unwrap();
        assert!(apart.validate(2, &[(0, 1)], &hw).is_err());
        assert!(Embedding::new(vec![vec![0]], 0.0).is_err());
    }

    #[test]
    fn chain_strength_modes() {
        // 4-regular ring of 5 with |J| = 1: 10 couplings, mean degree 4
        let mut m = BinaryModel::new(5, Vartype::Spin);
        for (i, j) in complete(5) {
            m.add_quadratic(i, j, if (i + j) % 2 == 0 { 1.0 } else { -1.0 })
                .unwrap();
        }
        let utc = chain_strength(&m, ChainStrengthMode::Utc(1.414)).unwrap();
        assert!((utc - 2.828).abs() < 1e-12);
        assert_eq!(
            chain_strength(&m, ChainStrengthMode::Fixed(2.5)).unwrap(),
            2.5
        );
        let mut single = BinaryModel::new(2, Vartype::Spin);
        single.add_quadratic(0, 1, -3.0).unwrap();
        assert_eq!(
            chain_strength(&single, ChainStrengthMode::Max).unwrap(),
            3.0
        );
        let mut free = BinaryModel::new(2, Vartype::Spin);
        free.add_linear(0, 5.0).unwrap();
        for mode in [
            ChainStrengthMode::default(),
            ChainStrengthMode::Max,
            ChainStrengthMode::Fixed(7.0),
        ] {
            assert_eq!(chain_strength(&free, mode).unwrap(), 1.0);
        }
        assert!(chain_strength(&m, ChainStrengthMode::Fixed(-1.0)).is_err());
        assert!(chain_strength(
            &BinaryModel::new(1, Vartype::Binary),
            ChainStrengthMode::Max
        )
        .is_err());
    }

    #[test]
    fn unit_chains_reproduce_the_logical_model() {
        let hw = gen_chimera(1, 1, 4).unwrap();
        let mut m = BinaryModel::new(8, Vartype::Spin);
        m.add_linear(2, 0.5).unwrap();
        m.add_quadratic(0, 4, -1.5).unwrap();
        m.add_offset(2.0);
        let phys = apply_embedding(&m, &Embedding::identity(8, 3.0).unwrap(), &hw).unwrap();
        assert_eq!(phys, m);
    }

    #[test]
    fn field_split_over_chain() {
        let hw = gen_chimera(1, 1, 4).unwrap();
        let mut m = BinaryModel::new(1, Vartype::Spin);
        m.add_linear(0, 1.0).unwrap();
        let emb = Embedding::new(vec![vec![0, 4]], 2.0).unwrap();
        let phys = apply_embedding(&m, &emb, &hw).unwrap();
        assert_eq!(phys.linear()[0], 0.5);
        assert_eq!(phys.linear()[4], 0.5);
        assert_eq!(phys.quadratic(0, 4), -2.0);
        assert_eq!(phys.num_interactions(), 1);
    }

    #[test]
    fn aligned_energy_shift_is_constant() {
        // six physical qubits: a triangle embedded with chains of length 2
        let hw = HardwareGraph::new(
            6,
            vec![
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 0),
                (1, 4),
                (0, 3),
            ],
            "ring",
        )
        .unwrap();
        let emb = Embedding::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]], 1.7).unwrap();
        let m = random_spin_model(3, &complete(3), 11);
        let phys = apply_embedding(&m, &emb, &hw).unwrap();
        let shift = chain_ground_energy(&emb, &hw).unwrap();
        for z in all_configs(3, Vartype::Spin) {
            let p = embed_config(&z, &emb, 6).unwrap();
            let diff = phys.energy(&p).unwrap() - m.energy(&z).unwrap();
            assert!((diff - shift).abs() < 1e-9);
        }
        // broken chains cost more than aligned ones with the same majority
        let aligned = embed_config(&[1, 1, 1], &emb, 6).unwrap();
        let mut broken = aligned.clone();
        broken[0] = -1;
        assert!(phys.energy(&broken).unwrap() > phys.energy(&aligned).unwrap() - 4.0 * 1.7);
    }

    #[test]
    fn majority_and_ties() {
        let emb = Embedding::new(vec![vec![0, 1, 2], vec![4, 3]], 1.0).unwrap();
        let out = unembed(&[vec![1, 1, -1, -1, 1]], &emb, RepairMode::Majority).unwrap();
        // chain [4, 3] ties; qubit 3 is the lowest index
        assert_eq!(out.reads[0], Some(vec![1, -1]));
        assert_eq!(out.broken, vec![true]);
        let dropped = unembed(&[vec![1, 1, -1, -1, 1]], &emb, RepairMode::Discard).unwrap();
        assert_eq!(dropped.reads[0], None);
        assert_eq!(dropped.r_chain(), 0.0);
    }

    #[test]
    fn unbroken_reads_agree_across_repair_modes() {
        let emb = Embedding::new(vec![vec![0, 1], vec![2]], 1.0).unwrap();
        let reads = vec![vec![-1, -1, 1], vec![1, 1, 1]];
        let a = unembed(&reads, &emb, RepairMode::Majority).unwrap();
        let b = unembed(&reads, &emb, RepairMode::Discard).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.r_chain(), 1.0);
        assert!(unembed(&[vec![1]], &emb, RepairMode::Majority).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn discard_never_keeps_broken_reads(
                bits in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 8), 1..20)
            ) {
                let emb = Embedding::new(vec![vec![0, 4], vec![1, 5, 2], vec![3]], 1.0).unwrap();
                let reads: Vec<Vec<i8>> =
                    bits.iter().map(|r| r.iter().map(|&b| if b { 1 } else { -1 }).collect()).collect();
                let out = unembed(&reads, &emb, RepairMode::Discard).unwrap();
                for (read, broken) in out.reads.iter().zip(&out.broken) {
                    prop_assert_eq!(read.is_none(), *broken);
                }
                let r = out.r_chain();
                prop_assert!((0.0..=1.0).contains(&r));
            }
        }
    }
}
