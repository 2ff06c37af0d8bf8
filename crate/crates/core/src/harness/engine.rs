//! The synchronous per-iteration pipeline shared by every simulated scenario.

use nalgebra::DVector;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::config::Strategy;
use crate::classification::{classify_event, f_hat, update_belief, update_direction, ClassifierParams, Event, INITIAL_BELIEF};
use crate::decision::{decide, global_desire, quorum_prob, translate_neighbor_g, DecisionParams};
use crate::diffusion::{atc_adapt, atc_combine, modified_combine, split_weights};
use crate::error::{invalid, Error, Result};
use crate::network::{sample_data, AgentEnvironment, CombinationMatrix, ModelPair, ObservedAssignment, Topology};

/// Estimates above this norm abort the run.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// Where agents' streaming data comes from.
pub trait DataSource {
    fn dim(&self) -> usize;

    /// One `(d, u)` pair for agent `k`.
    fn sample(&mut self, k: usize, rng: &mut dyn RngCore) -> (f64, DVector<f64>);

    fn mu(&self, k: usize) -> f64;

    /// A topology for the coming iteration, if it changes over time.
    fn refresh_topology(&mut self) -> Option<Topology> {
        None
    }

    /// Called once the new estimates are known.
    fn after_combine(&mut self, _estimates: &[DVector<f64>], _topology: &Topology, _rng: &mut dyn RngCore) {}
}

/// Stationary agents observing one of two fixed models.
#[derive(Debug, Clone)]
pub struct StaticSource {
    envs: Vec<AgentEnvironment>,
    targets: Vec<DVector<f64>>,
}

impl StaticSource {
    pub fn new(envs: Vec<AgentEnvironment>, models: &ModelPair, f: &ObservedAssignment) -> Result<Self> {
        if envs.len() != f.len() {
            return invalid("environment and assignment sizes differ");
        }
        if envs.iter().any(|e| e.dim() != models.dim()) {
            return Err(Error::DimensionMismatch {
                expected: models.dim(),
                found: envs.iter().map(|e| e.dim()).find(|&d| d != models.dim()).unwrap_or(0),
            });
        }
        let targets = (0..f.len()).map(|k| models.get(f.get(k)).clone()).collect();
        Ok(StaticSource { envs, targets })
    }

    pub fn envs(&self) -> &[AgentEnvironment] {
        &self.envs
    }
}

impl DataSource for StaticSource {
    fn dim(&self) -> usize {
        self.targets[0].len()
    }

    fn sample(&mut self, k: usize, rng: &mut dyn RngCore) -> (f64, DVector<f64>) {
        sample_data(&self.targets[k], &self.envs[k], rng)
    }

    fn mu(&self, k: usize) -> f64 {
        self.envs[k].mu()
    }
}

/// Which of steps 7 and 8 runs first. Only the listed order is correct; the
/// swapped one exists so tests can tell the two apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PipelineOrder {
    #[default]
    SplitThenCombine,
    CombineThenSplit,
}

/// How combination weights are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    /// `1/n_k` over the current neighborhood.
    Uniform,
    /// A fixed matrix (static topologies only).
    Fixed(CombinationMatrix),
    /// Uniform over neighbors believed informed, else over the others.
    Fast,
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub strategy: Strategy,
    pub weights: WeightRule,
    pub classifier: ClassifierParams,
    pub decision: DecisionParams,
    pub share_directions: bool,
    pub order: PipelineOrder,
    /// Replace classification and decisions by ground truth with every agent
    /// agreeing on this model.
    pub oracle: Option<u8>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            strategy: Strategy::Modified,
            weights: WeightRule::Uniform,
            classifier: ClassifierParams::default(),
            decision: DecisionParams::default(),
            share_directions: false,
            order: PipelineOrder::default(),
            oracle: None,
        }
    }
}

/// Event counts split by whether the pair truly shares a model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub same: [u64; 3],
    pub different: [u64; 3],
}

impl EventCounts {
    fn record(&mut self, same: bool, e: Event) {
        let i = match e {
            Event::Agree => 0,
            Event::Disagree => 1,
            Event::NoUpdate => 2,
        };
        if same {
            self.same[i] += 1;
        } else {
            self.different[i] += 1;
        }
    }

    pub fn merge(&mut self, o: &EventCounts) {
        for i in 0..3 {
            self.same[i] += o.same[i];
            self.different[i] += o.different[i];
        }
    }

    /// Fraction of far-field same-model events that were agreements.
    pub fn detection_rate(&self) -> f64 {
        self.same[0] as f64 / (self.same[0] + self.same[1]) as f64
    }

    /// Fraction of far-field different-model events that were agreements.
    pub fn false_alarm_rate(&self) -> f64 {
        self.different[0] as f64 / (self.different[0] + self.different[1]) as f64
    }
}

/// State of one network run.
pub struct Engine<S: DataSource> {
    source: S,
    opts: EngineOptions,
    f: ObservedAssignment,
    topology: Topology,
    /// `a[k][l]`: weight agent `k` gives to `l`.
    a: Vec<Vec<f64>>,
    w: Vec<DVector<f64>>,
    psi: Vec<DVector<f64>>,
    /// `h[k][l]`: agent `k`'s copy of `l`'s smoothed direction.
    h: Vec<Vec<DVector<f64>>>,
    shared_h: Vec<DVector<f64>>,
    belief: Vec<Vec<f64>>,
    g: Vec<u8>,
    a1: Vec<Vec<f64>>,
    a2: Vec<Vec<f64>>,
    iteration: usize,
    events: EventCounts,
}

impl<S: DataSource> Engine<S> {
    /// Every agent starts at `w = 0`, `h = 0`, belief one half about each
    /// neighbor, and desiring its own observed model.
    pub fn new(source: S, topology: Topology, f: ObservedAssignment, opts: EngineOptions) -> Result<Self> {
        let n = topology.len();
        if f.len() != n {
            return invalid("assignment and topology sizes differ");
        }
        opts.classifier.validate()?;
        opts.decision.validate()?;
        if let WeightRule::Fixed(a) = &opts.weights {
            CombinationMatrix::new(&topology, a.matrix().clone())?;
        }
        if opts.strategy == Strategy::Conventional && opts.weights == WeightRule::Fast {
            return invalid("fast weights need the modified strategy");
        }
        let m = source.dim();
        let zero = DVector::zeros(m);
        let mut belief = vec![vec![INITIAL_BELIEF; n]; n];
        for (k, row) in belief.iter_mut().enumerate() {
            row[k] = 1.0;
        }
        let mut e = Engine {
            source,
            f,
            a: Vec::new(),
            w: vec![zero.clone(); n],
            psi: vec![zero.clone(); n],
            h: vec![vec![zero.clone(); n]; n],
            shared_h: vec![zero; n],
            belief,
            g: vec![1; n],
            a1: vec![vec![0.0; n]; n],
            a2: vec![vec![0.0; n]; n],
            iteration: 0,
            events: EventCounts::default(),
            topology,
            opts,
        };
        if let Some(q) = e.opts.oracle {
            e.g = (0..n).map(|k| u8::from(e.f.get(k) == q)).collect();
        }
        e.reset_weights();
        for k in 0..n {
            e.split(k);
        }
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn estimates(&self) -> &[DVector<f64>] {
        &self.w
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn observed(&self) -> &ObservedAssignment {
        &self.f
    }

    /// Own-frame desires.
    pub fn desires(&self) -> &[u8] {
        &self.g
    }

    /// Network-frame desires.
    pub fn global_desires(&self) -> Vec<u8> {
        (0..self.len()).map(|k| global_desire(self.f.get(k), self.g[k])).collect()
    }

    pub fn belief(&self, k: usize, l: usize) -> f64 {
        self.belief[k][l]
    }

    pub fn f_hat(&self, k: usize, l: usize) -> u8 {
        if k == l {
            1
        } else if self.opts.oracle.is_some() {
            u8::from(self.f.same(k, l))
        } else {
            f_hat(self.belief[k][l])
        }
    }

    /// Combination weights in effect for the last combine: `(a1, a2)` columns
    /// of agent `k`.
    pub fn split_columns(&self, k: usize) -> (&[f64], &[f64]) {
        (&self.a1[k], &self.a2[k])
    }

    pub fn events(&self) -> &EventCounts {
        &self.events
    }

    pub fn is_modified(&self) -> bool {
        self.opts.strategy != Strategy::Conventional
    }

    fn reset_weights(&mut self) {
        let n = self.len();
        self.a = match &self.opts.weights {
            WeightRule::Fixed(m) => (0..n).map(|k| m.column(k).iter().copied().collect()).collect(),
            _ => (0..n)
                .map(|k| {
                    let mut col = vec![0.0; n];
                    let w = 1.0 / self.topology.degree(k) as f64;
                    for &l in self.topology.neighbors(k) {
                        col[l] = w;
                    }
                    col
                })
                .collect(),
        };
    }

    /// Step 7 for agent `k`, from its current tables and desire.
    fn split(&mut self, k: usize) {
        let n = self.len();
        let g = self.g[k];
        let nbrs = self.topology.neighbors(k);
        let table: Vec<Option<u8>> = {
            let mut t = vec![None; n];
            for &l in nbrs {
                t[l] = Some(self.f_hat(k, l));
            }
            t
        };
        if self.opts.weights == WeightRule::Fast {
            let informed: Vec<usize> = nbrs.iter().copied().filter(|&l| table[l] == Some(g)).collect();
            let col = &mut self.a[k];
            col.iter_mut().for_each(|v| *v = 0.0);
            if !informed.is_empty() {
                let w = 1.0 / informed.len() as f64;
                for l in informed {
                    col[l] = w;
                }
            } else if nbrs.len() > 1 {
                let w = 1.0 / (nbrs.len() - 1) as f64;
                for &l in nbrs.iter().filter(|&&l| l != k) {
                    col[l] = w;
                }
            } else {
                col[k] = 1.0;
            }
        }
        let (a1, a2) = split_weights(&self.a[k], &table, g);
        self.a1[k] = a1;
        self.a2[k] = a2;
    }

    /// Runs one full iteration.
    pub fn step(&mut self, rng: &mut dyn RngCore) -> Result<()> {
        let n = self.len();
        if let Some(t) = self.source.refresh_topology() {
            if t.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: t.len() });
            }
            self.topology = t;
            self.reset_weights();
            // directions of agents out of range are forgotten
            for k in 0..n {
                for l in 0..n {
                    if !self.topology.contains(k, l) {
                        self.h[k][l].fill(0.0);
                    }
                }
            }
        }

        // 1. adapt
        for k in 0..n {
            let (d, u) = self.source.sample(k, rng);
            self.psi[k] = atc_adapt(&self.w[k], d, &u, self.source.mu(k));
        }

        if self.opts.strategy == Strategy::Conventional {
            let next: Vec<_> = (0..n).map(|k| atc_combine(&self.psi, &self.a[k])).collect();
            return self.finish(next, rng);
        }

        if self.opts.oracle.is_none() {
            self.classify();
            self.decide(rng);
        }

        // 7 and 8
        let next: Vec<_> = match self.opts.order {
            PipelineOrder::SplitThenCombine => {
                for k in 0..n {
                    self.split(k);
                }
                (0..n).map(|k| modified_combine(&self.psi, &self.w, &self.a1[k], &self.a2[k])).collect()
            }
            PipelineOrder::CombineThenSplit => {
                let next = (0..n).map(|k| modified_combine(&self.psi, &self.w, &self.a1[k], &self.a2[k])).collect();
                for k in 0..n {
                    self.split(k);
                }
                next
            }
        };
        self.finish(next, rng)
    }

    /// Steps 2 to 4.
    fn classify(&mut self) {
        let n = self.len();
        let p = self.opts.classifier;
        if self.opts.share_directions {
            for l in 0..n {
                self.shared_h[l] = update_direction(&self.shared_h[l], &self.psi[l], &self.w[l], self.source.mu(l), p.nu);
            }
        } else {
            for k in 0..n {
                for &l in self.topology.neighbors(k) {
                    self.h[k][l] = update_direction(&self.h[k][l], &self.psi[l], &self.w[l], self.source.mu(l), p.nu);
                }
            }
        }
        for k in 0..n {
            for &l in self.topology.neighbors(k) {
                if l == k {
                    continue;
                }
                let e = if self.opts.share_directions {
                    classify_event(&self.shared_h[k], &self.shared_h[l], p.eta)
                } else {
                    classify_event(&self.h[k][k], &self.h[k][l], p.eta)
                };
                self.events.record(self.f.same(k, l), e);
                self.belief[k][l] = update_belief(self.belief[k][l], e, p.alpha);
            }
        }
    }

    /// Steps 5 and 6, from the previous desires.
    fn decide(&mut self, rng: &mut dyn RngCore) {
        let n = self.len();
        let prev = self.g.clone();
        let params = self.opts.decision;
        for k in 0..n {
            let nbrs = self.topology.neighbors(k);
            let n_g = nbrs
                .iter()
                .filter(|&&l| translate_neighbor_g(prev[l], self.f_hat(k, l)) == prev[k])
                .count();
            let beta = params.beta[global_desire(self.f.get(k), prev[k]) as usize];
            let q = quorum_prob(n_g, nbrs.len(), params.k, beta);
            self.g[k] = decide(prev[k], q, rng);
        }
    }

    fn finish(&mut self, next: Vec<DVector<f64>>, rng: &mut dyn RngCore) -> Result<()> {
        self.iteration += 1;
        for (k, w) in next.iter().enumerate() {
            let norm = w.norm();
            if !(norm <= DIVERGENCE_NORM) {
                return Err(Error::Diverged {
                    iteration: self.iteration,
                    agent: k,
                    norm,
                });
            }
        }
        self.w = next;
        self.source.after_combine(&self.w, &self.topology, rng);
        Ok(())
    }

    /// Fraction of neighbor pairs whose classification is correct.
    pub fn f_hat_accuracy(&self) -> f64 {
        let mut total = 0usize;
        let mut right = 0usize;
        for k in 0..self.len() {
            for &l in self.topology.neighbors(k) {
                if l != k {
                    total += 1;
                    right += usize::from((self.f_hat(k, l) == 1) == self.f.same(k, l));
                }
            }
        }
        if total == 0 {
            1.0
        } else {
            right as f64 / total as f64
        }
    }

    /// Fraction of neighbor pairs whose belief has reached the right end:
    /// at least `hi` for same-model pairs, at most `1 - hi` otherwise.
    pub fn belief_endpoint_fraction(&self, hi: f64) -> f64 {
        let mut total = 0usize;
        let mut right = 0usize;
        for k in 0..self.len() {
            for &l in self.topology.neighbors(k) {
                if l != k {
                    total += 1;
                    let b = self.belief[k][l];
                    let ok = if self.f.same(k, l) { b >= hi } else { b <= 1.0 - hi };
                    right += usize::from(ok);
                }
            }
        }
        if total == 0 {
            1.0
        } else {
            right as f64 / total as f64
        }
    }
}
