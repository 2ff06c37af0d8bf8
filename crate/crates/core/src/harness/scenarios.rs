//! Scenario drivers: network realization, replica fan-out, and summaries.

use nalgebra::DVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, ScenarioKind};
use super::engine::{DataSource, Engine, EngineOptions, EventCounts, StaticSource, WeightRule};
use super::metrics::{agreement_fraction, agreement_time, ensemble_db, first_crossing, msd_linear, steady_state_db, to_db};
use crate::classification::{
    belief_error_bound, belief_error_oracle, default_horizon, estimate_tau, pd_pf_bounds, DirectionBenchmark,
};
use crate::error::{Error, Result};
use crate::markov::{
    build_exact_chain, expected_absorption_times, ChainKind, transient_spectral_radius, verify_k_monotonicity, SweepRow,
};
use crate::mobility::{cohesion_term, measure_target, update_motion, AgentPose, MotionParams, Vec2};
use crate::network::{
    bias_limit, generate_topology, perron_vector, random_environments, uniform_weights, AgentEnvironment, ModelPair,
    ObservedAssignment, Topology,
};

/// Generator for the network realization; replica `r` uses stream `r + 1`.
pub fn network_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64 + 1);
    rng
}

/// Topology, environments, and assignment shared by all replicas.
#[derive(Debug, Clone)]
pub struct StaticNetwork {
    pub topology: Topology,
    pub envs: Vec<AgentEnvironment>,
    pub f: ObservedAssignment,
    pub models: ModelPair,
}

impl StaticNetwork {
    pub fn realize(cfg: &ScenarioConfig) -> Result<Self> {
        let mut rng = network_rng(cfg.seed);
        let topology = match &cfg.topology {
            Some(t) => t.clone(),
            None => generate_topology(cfg.agents, cfg.mean_degree, &mut rng)?,
        };
        let envs = random_environments(cfg.agents, cfg.models.dim(), cfg.mu, cfg.ru_range, cfg.noise_db_range, &mut rng)?;
        Ok(StaticNetwork {
            topology,
            envs,
            f: ObservedAssignment::split(cfg.agents, cfg.split),
            models: cfg.models.clone(),
        })
    }

    /// Limit point of conventional diffusion with uniform weights.
    pub fn conventional_limit(&self) -> Result<DVector<f64>> {
        let c = perron_vector(&uniform_weights(&self.topology))?;
        bias_limit(&c, &self.models, &self.f)
    }
}

pub fn engine_options(cfg: &ScenarioConfig) -> EngineOptions {
    EngineOptions {
        strategy: cfg.strategy,
        weights: if cfg.uses_fast_weights() {
            WeightRule::Fast
        } else {
            WeightRule::Uniform
        },
        classifier: cfg.classifier(),
        decision: cfg.decision(),
        share_directions: cfg.share_directions,
        ..Default::default()
    }
}

/// Agents moving in the plane toward their estimate of one of two targets.
#[derive(Debug, Clone)]
pub struct FishSource {
    poses: Vec<AgentPose>,
    prev_dir: Vec<Option<Vec2>>,
    targets: Vec<Vec2>,
    params: MotionParams,
    comm_radius: f64,
    mu: f64,
}

impl FishSource {
    pub fn new(poses: Vec<AgentPose>, models: &ModelPair, f: &ObservedAssignment, params: MotionParams, comm_radius: f64, mu: f64) -> Result<Self> {
        if models.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: models.dim() });
        }
        if poses.len() != f.len() {
            return Err(Error::DimensionMismatch { expected: f.len(), found: poses.len() });
        }
        let targets = (0..f.len())
            .map(|k| {
                let w = models.get(f.get(k));
                Vec2::new(w[0], w[1])
            })
            .collect();
        Ok(FishSource {
            prev_dir: vec![None; poses.len()],
            poses,
            targets,
            params,
            comm_radius,
            mu,
        })
    }

    /// Agents at rest, uniformly spread over a square centred at the origin.
    pub fn scattered<R: Rng + ?Sized>(n: usize, side: f64, rng: &mut R) -> Vec<AgentPose> {
        (0..n)
            .map(|_| {
                let x = (rng.random::<f64>() - 0.5) * side;
                let y = (rng.random::<f64>() - 0.5) * side;
                AgentPose::at_rest(Vec2::new(x, y))
            })
            .collect()
    }

    pub fn poses(&self) -> &[AgentPose] {
        &self.poses
    }

    pub fn proximity(&self) -> Topology {
        let pts: Vec<[f64; 2]> = self.poses.iter().map(|p| [p.x.x, p.x.y]).collect();
        Topology::proximity(&pts, self.comm_radius)
    }
}

impl DataSource for FishSource {
    fn dim(&self) -> usize {
        2
    }

    fn sample(&mut self, k: usize, rng: &mut dyn RngCore) -> (f64, DVector<f64>) {
        let (d, u) = measure_target(&self.poses[k].x, self.prev_dir[k].as_ref(), &self.targets[k], &self.params, rng);
        self.prev_dir[k] = Some(u);
        (d, DVector::from_column_slice(u.as_slice()))
    }

    fn mu(&self, _k: usize) -> f64 {
        self.mu
    }

    fn refresh_topology(&mut self) -> Option<Topology> {
        Some(self.proximity())
    }

    fn after_combine(&mut self, estimates: &[DVector<f64>], topology: &Topology, _rng: &mut dyn RngCore) {
        let positions: Vec<Vec2> = self.poses.iter().map(|p| p.x).collect();
        let next: Vec<AgentPose> = (0..self.poses.len())
            .map(|k| {
                let nbrs = topology.neighbors(k);
                let vel: Vec<Vec2> = nbrs.iter().map(|&l| self.poses[l].v).collect();
                let weights = vec![1.0 / nbrs.len() as f64; nbrs.len()];
                let delta = cohesion_term(k, &positions, nbrs, self.params.d_s);
                let goal = Vec2::new(estimates[k][0], estimates[k][1]);
                update_motion(&self.poses[k], &goal, &vel, &weights, &delta, &self.params)
            })
            .collect();
        self.poses = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefRow {
    pub iteration: usize,
    pub observer: usize,
    pub neighbor: usize,
    pub belief: f64,
    pub f_hat: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub agent: usize,
    pub x1: f64,
    pub x2: f64,
    pub v1: f64,
    pub v2: f64,
    pub g_global: u8,
    /// Squared deviation of the agent's estimate from the target it
    /// currently desires, in dB.
    pub msd_to_target: f64,
}

/// Everything recorded from one replica. Per-iteration vectors have
/// `iterations + 1` entries, index 0 being the initial state.
#[derive(Debug, Clone)]
pub struct ReplicaTrace {
    pub replica: usize,
    /// `[MSD to w0, MSD to w1]` in linear units.
    pub msd: Vec<[f64; 2]>,
    /// Network-frame desires; empty for the conventional strategy.
    pub desires: Vec<Vec<u8>>,
    pub f_hat_accuracy: Vec<f64>,
    pub agreement_time: Option<usize>,
    /// Unanimous final desire, if any.
    pub agreed_model: Option<u8>,
    pub belief_endpoints: f64,
    /// Network-average estimate averaged over the last tenth of the run.
    pub tail_mean_estimate: DVector<f64>,
    pub events: EventCounts,
    pub beliefs: Vec<BeliefRow>,
    /// Positions per step (fish scenario).
    pub positions: Vec<Vec<[f64; 2]>>,
    pub trajectory: Vec<TrajectoryRow>,
}

impl ReplicaTrace {
    /// Model the replica settled on; falls back to the final majority.
    pub fn chosen_model(&self) -> Option<u8> {
        self.agreed_model.or_else(|| {
            self.desires.last().map(|d| {
                let ones = d.iter().filter(|&&x| x == 1).count();
                u8::from(2 * ones >= d.len())
            })
        })
    }

    pub fn msd_column(&self, q: u8) -> Vec<f64> {
        self.msd.iter().map(|m| m[q as usize]).collect()
    }
}

/// Results of a multi-replica simulation.
#[derive(Debug, Clone)]
pub struct TraceSet {
    pub config: ScenarioConfig,
    pub replicas: Vec<ReplicaTrace>,
    /// Limit point of conventional diffusion (static scenarios).
    pub conventional_limit: Option<DVector<f64>>,
    pub mean_degree: f64,
}

impl TraceSet {
    pub fn iterations(&self) -> usize {
        self.replicas.first().map_or(0, |r| r.msd.len().saturating_sub(1))
    }

    /// Ensemble MSD to each model, in dB.
    pub fn msd_db(&self) -> [Vec<f64>; 2] {
        let col = |q: u8| {
            let cols: Vec<Vec<f64>> = self.replicas.iter().map(|r| r.msd_column(q)).collect();
            let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            ensemble_db(&refs)
        };
        [col(0), col(1)]
    }

    /// Per-replica linear curves to the chosen and the other model.
    fn aligned_linear(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        self.replicas
            .iter()
            .map(|r| {
                let q = r.chosen_model().unwrap_or(0);
                (r.msd_column(q), r.msd_column(1 - q))
            })
            .unzip()
    }

    /// Ensemble MSD to each replica's chosen model and to the other one, in dB.
    pub fn aligned_db(&self) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.aligned_linear();
        let ra: Vec<&[f64]> = a.iter().map(|c| c.as_slice()).collect();
        let rb: Vec<&[f64]> = b.iter().map(|c| c.as_slice()).collect();
        (ensemble_db(&ra), ensemble_db(&rb))
    }

    /// Steady-state aligned MSD, averaged over the last tenth of the run.
    pub fn steady_state_aligned_db(&self) -> (f64, f64) {
        let window = self.tail_window();
        let (a, b) = self.aligned_linear();
        (steady_state_db(&mean_curve(&a), window), steady_state_db(&mean_curve(&b), window))
    }

    pub fn steady_state_db(&self) -> [f64; 2] {
        let window = self.tail_window();
        let c0: Vec<Vec<f64>> = self.replicas.iter().map(|r| r.msd_column(0)).collect();
        let c1: Vec<Vec<f64>> = self.replicas.iter().map(|r| r.msd_column(1)).collect();
        [steady_state_db(&mean_curve(&c0), window), steady_state_db(&mean_curve(&c1), window)]
    }

    fn tail_window(&self) -> usize {
        (self.iterations() / 10).max(1)
    }

    /// Iteration at which the aligned ensemble curve first reaches `level`.
    pub fn time_to_level(&self, level: f64) -> Option<usize> {
        first_crossing(&self.aligned_db().0, level)
    }

    /// Mean fraction of agents desiring the majority model; NaN without
    /// decisions.
    pub fn agreement_fraction(&self) -> Vec<f64> {
        let len = self.iterations() + 1;
        if self.replicas.iter().any(|r| r.desires.is_empty()) {
            return vec![f64::NAN; len];
        }
        (0..len)
            .map(|i| self.replicas.iter().map(|r| agreement_fraction(&r.desires[i])).sum::<f64>() / self.replicas.len() as f64)
            .collect()
    }

    pub fn agreement_times(&self) -> Vec<Option<usize>> {
        self.replicas.iter().map(|r| r.agreement_time).collect()
    }

    /// Median agreement time, counting runs without agreement as infinite.
    pub fn median_agreement_time(&self) -> Option<f64> {
        let mut t: Vec<f64> = self
            .agreement_times()
            .iter()
            .map(|t| t.map_or(f64::INFINITY, |v| v as f64))
            .collect();
        if t.is_empty() {
            return None;
        }
        t.sort_by(f64::total_cmp);
        let m = t.len();
        let med = if m % 2 == 1 { t[m / 2] } else { 0.5 * (t[m / 2 - 1] + t[m / 2]) };
        med.is_finite().then_some(med)
    }

    pub fn events(&self) -> EventCounts {
        let mut e = EventCounts::default();
        for r in &self.replicas {
            e.merge(&r.events);
        }
        e
    }

    /// Network-average estimate averaged over replicas and the tail window.
    pub fn tail_mean_estimate(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.config.models.dim());
        for r in &self.replicas {
            acc += &r.tail_mean_estimate;
        }
        acc / self.replicas.len() as f64
    }
}

fn mean_curve(curves: &[Vec<f64>]) -> Vec<f64> {
    let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / curves.len() as f64)
        .collect()
}

/// Runs one engine for `iterations` steps, recording its trace.
fn record<S: DataSource>(
    mut engine: Engine<S>,
    cfg: &ScenarioConfig,
    replica: usize,
    rng: &mut ChaCha8Rng,
    mut observe: impl FnMut(&Engine<S>, usize, &mut ReplicaTrace),
) -> Result<ReplicaTrace> {
    let iters = cfg.iterations;
    let modified = engine.is_modified();
    let tail_from = iters - (iters / 10).max(1) + 1;
    let mut trace = ReplicaTrace {
        replica,
        msd: Vec::with_capacity(iters + 1),
        desires: Vec::new(),
        f_hat_accuracy: Vec::new(),
        agreement_time: None,
        agreed_model: None,
        belief_endpoints: f64::NAN,
        tail_mean_estimate: DVector::zeros(cfg.models.dim()),
        events: EventCounts::default(),
        beliefs: Vec::new(),
        positions: Vec::new(),
        trajectory: Vec::new(),
    };
    let stride = if replica == 0 { cfg.belief_stride } else { None };
    let mut tail_count = 0usize;
    for i in 0..=iters {
        if i > 0 {
            engine.step(rng)?;
        }
        let w = engine.estimates();
        trace.msd.push([msd_linear(w, cfg.models.get(0)), msd_linear(w, cfg.models.get(1))]);
        if modified {
            trace.desires.push(engine.global_desires());
            trace.f_hat_accuracy.push(engine.f_hat_accuracy());
        }
        if i >= tail_from {
            for wk in w {
                trace.tail_mean_estimate += wk;
            }
            tail_count += w.len();
        }
        if let Some(s) = stride {
            if i % s == 0 && modified {
                for k in 0..engine.len() {
                    for &l in engine.topology().neighbors(k) {
                        if l != k {
                            trace.beliefs.push(BeliefRow {
                                iteration: i,
                                observer: k,
                                neighbor: l,
                                belief: engine.belief(k, l),
                                f_hat: engine.f_hat(k, l),
                            });
                        }
                    }
                }
            }
        }
        observe(&engine, i, &mut trace);
    }
    trace.tail_mean_estimate /= tail_count.max(1) as f64;
    if modified {
        trace.agreement_time = agreement_time(&trace.desires);
        trace.agreed_model = trace.agreement_time.map(|_| trace.desires[iters][0]);
        trace.belief_endpoints = engine.belief_endpoint_fraction(0.9);
    }
    trace.events = *engine.events();
    Ok(trace)
}

/// Runs a static two-model scenario, replicas in parallel.
pub fn run_static(cfg: &ScenarioConfig) -> Result<TraceSet> {
    let net = StaticNetwork::realize(cfg)?;
    let conventional_limit = net.conventional_limit().ok();
    let opts = engine_options(cfg);
    let replicas = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(cfg.seed, r);
            let src = StaticSource::new(net.envs.clone(), &net.models, &net.f)?;
            let engine = Engine::new(src, net.topology.clone(), net.f.clone(), opts.clone())?;
            record(engine, cfg, r, &mut rng, |_, _, _| {})
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceSet {
        config: cfg.clone(),
        replicas,
        conventional_limit,
        mean_degree: net.topology.mean_degree(),
    })
}

/// Runs the mobile scenario, replicas in parallel.
pub fn run_fish(cfg: &ScenarioConfig) -> Result<TraceSet> {
    let opts = engine_options(cfg);
    let f = ObservedAssignment::split(cfg.agents, cfg.split);
    let mut initial_degree = 0.0;
    let replicas = (0..cfg.replicas)
        .map(|r| {
            let mut rng = replica_rng(cfg.seed, r);
            let poses = FishSource::scattered(cfg.agents, cfg.fish.init_side, &mut rng);
            let src = FishSource::new(poses, &cfg.models, &f, cfg.fish.motion, cfg.fish.comm_radius, cfg.mu)?;
            let topology = src.proximity();
            if r == 0 {
                initial_degree = topology.mean_degree();
            }
            Ok((rng, Engine::new(src, topology, f.clone(), opts.clone())?))
        })
        .collect::<Result<Vec<_>>>()?;
    let replicas = replicas
        .into_par_iter()
        .enumerate()
        .map(|(r, (mut rng, engine))| {
            record(engine, cfg, r, &mut rng, |e, i, trace| {
                let poses = e.source().poses();
                trace.positions.push(poses.iter().map(|p| [p.x.x, p.x.y]).collect());
                if r != 0 {
                    return;
                }
                let g = e.global_desires();
                for (k, p) in poses.iter().enumerate() {
                    let target = cfg.models.get(g[k]);
                    trace.trajectory.push(TrajectoryRow {
                        step: i,
                        agent: k,
                        x1: p.x.x,
                        x2: p.x.y,
                        v1: p.v.x,
                        v2: p.v.y,
                        g_global: g[k],
                        msd_to_target: to_db((target - &e.estimates()[k]).norm_squared()),
                    });
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceSet {
        config: cfg.clone(),
        replicas,
        conventional_limit: None,
        mean_degree: initial_degree,
    })
}

/// Arrival statistics of a fish run relative to its chosen target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalReport {
    pub chosen_model: Option<u8>,
    pub agreement_time: Option<usize>,
    /// First step from which every agent stays within the arrival radius.
    pub arrival_step: Option<usize>,
    pub final_max_distance: f64,
    pub final_median_spacing: f64,
}

pub fn arrival_report(trace: &ReplicaTrace, cfg: &ScenarioConfig) -> ArrivalReport {
    let q = trace.chosen_model().unwrap_or(0);
    let target = cfg.models.get(q);
    let max_dist = |pos: &Vec<[f64; 2]>| {
        pos.iter()
            .map(|p| ((p[0] - target[0]).powi(2) + (p[1] - target[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    };
    let within: Vec<bool> = trace.positions.iter().map(|p| max_dist(p) <= cfg.fish.arrival_radius).collect();
    let arrival_step = match within.iter().rposition(|w| !w) {
        None if !within.is_empty() => Some(0),
        Some(i) if i + 1 < within.len() => Some(i + 1),
        _ => None,
    };
    let last = trace.positions.last().cloned().unwrap_or_default();
    ArrivalReport {
        chosen_model: trace.chosen_model(),
        agreement_time: trace.agreement_time,
        arrival_step,
        final_max_distance: if last.is_empty() { f64::NAN } else { max_dist(&last) },
        final_median_spacing: median_nearest_neighbor(&last),
    }
}

fn median_nearest_neighbor(pos: &[[f64; 2]]) -> f64 {
    if pos.len() < 2 {
        return f64::NAN;
    }
    let mut d: Vec<f64> = pos
        .iter()
        .enumerate()
        .map(|(k, p)| {
            pos.iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .map(|(_, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

/// One row of the chain sweep output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub chain: ChainKind,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: u32,
    pub rho_q: f64,
    pub mean_absorption: f64,
    pub identity_residual: f64,
    pub boundary_residual: f64,
}

impl From<SweepRow> for ChainRow {
    fn from(r: SweepRow) -> Self {
        ChainRow {
            chain: ChainKind::MeanField,
            n: r.n,
            k: r.k,
            rho_q: r.rho_q,
            mean_absorption: r.mean_absorption,
            identity_residual: r.identity_residual,
            boundary_residual: r.boundary_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSweep {
    pub rows: Vec<ChainRow>,
    /// `(N, strictly decreasing in K)` for every mean-field size.
    pub monotone: Vec<(usize, bool)>,
    pub lemma_checked: usize,
    pub lemma_violations: usize,
}

/// Mean-field sweeps plus exact chains on complete graphs.
pub fn run_chain_sweep(cfg: &ScenarioConfig) -> Result<ChainSweep> {
    let mut out = ChainSweep {
        rows: Vec::new(),
        monotone: Vec::new(),
        lemma_checked: 0,
        lemma_violations: 0,
    };
    for &n in &cfg.chain.agents {
        let rep = verify_k_monotonicity(n, cfg.chain.k_max)?;
        out.monotone.push((n, rep.strictly_decreasing));
        out.lemma_checked += rep.lemma_checked;
        out.lemma_violations += rep.lemma_violations;
        out.rows.extend(rep.rows.into_iter().map(ChainRow::from));
    }
    for &n in &cfg.chain.exact_agents {
        let t = Topology::complete(n)?;
        for k in 1..=cfg.chain.k_max {
            let params = crate::decision::DecisionParams { k, beta: cfg.beta };
            let chain = build_exact_chain(&t, &params)?;
            let spec = transient_spectral_radius(&chain)?;
            let times = expected_absorption_times(&chain)?;
            // half the agents desiring model 1
            let start = (1usize << (n / 2)) - 1;
            out.rows.push(ChainRow {
                chain: ChainKind::Exact,
                n,
                k,
                rho_q: spec.rho,
                mean_absorption: times[start],
                identity_residual: spec.residual.unwrap_or(f64::NAN),
                boundary_residual: f64::NAN,
            });
        }
    }
    Ok(out)
}

/// Outcome of the controlled classifier benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyBench {
    pub tau_hat: f64,
    pub far_field_probability: f64,
    pub far_field_bound: f64,
    pub near_field_probability: f64,
    pub near_field_bound: f64,
    pub detection: f64,
    pub detection_bound: f64,
    pub false_alarm: f64,
    pub false_alarm_bound: f64,
    /// Belief tail frequency at the measured detection rate.
    pub belief_tail: f64,
    pub belief_tail_bound: f64,
    pub samples: usize,
}

/// Pins estimates and measures far-field, near-field, detection, and false
/// alarm frequencies of the smoothed-direction classifier.
pub fn run_classify_bench(cfg: &ScenarioConfig) -> Result<ClassifyBench> {
    let b = cfg.bench;
    let p = cfg.classifier();
    let mut rng = network_rng(cfg.seed);
    let dim = cfg.models.dim();
    let noise = (b.noise_db, b.noise_db);
    let env = random_environments(1, dim, cfg.mu, cfg.ru_range, noise, &mut rng)?.remove(0);
    let tau = estimate_tau(&env, &cfg.models, b.tau_samples, &mut rng)?;
    let bench = DirectionBenchmark::new(p.nu, p.eta, b.samples);
    let (w0, w1) = (cfg.models.get(0), cfg.models.get(1));
    let axis = (w1 - w0) / cfg.models.separation();

    let far_w = w0 + &axis * b.far_distance;
    let far = bench.far_field_probability(&env, w0, &far_w, &mut rng)?;
    let near_w = w0 + &axis * b.near_distance;
    let near = bench.far_field_probability(&env, w0, &near_w, &mut rng)?;

    let pd = bench.event_rates(&env, w0, &far_w, &env, w0, &far_w, &mut rng)?[0];
    // pinned between the two models, where the mean directions are opposite
    let mid = (w0 + w1) / 2.0;
    let pf = bench.event_rates(&env, w0, &mid, &env, w1, &mid, &mut rng)?[0];
    let (pd_bound, pf_bound) = pd_pf_bounds(p.nu, tau);

    let horizon = default_horizon(p.alpha);
    let tail = belief_error_oracle(pd, p.alpha, horizon, b.oracle_trials, &mut rng)?;
    let tail_bound = belief_error_bound(pd, p.alpha)?;

    Ok(ClassifyBench {
        tau_hat: tau,
        far_field_probability: far,
        far_field_bound: 1.0 - p.nu * tau / 2.0,
        near_field_probability: near,
        near_field_bound: p.nu * env.sigma_v2() * env.ru().trace() / (2.0 * p.eta * p.eta),
        detection: pd,
        detection_bound: pd_bound,
        false_alarm: pf,
        false_alarm_bound: pf_bound,
        belief_tail: tail.below_half,
        belief_tail_bound: tail_bound,
        samples: b.samples,
    })
}

/// Runs a simulated scenario of either kind.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<TraceSet> {
    cfg.validate()?;
    match cfg.kind {
        ScenarioKind::StaticTwoModel => run_static(cfg),
        ScenarioKind::Fish => run_fish(cfg),
        other => Err(Error::Config(format!("{other:?} is not a simulated scenario"))),
    }
}

/// Builds a fresh engine over a static network, for step-wise use.
pub fn static_engine(net: &StaticNetwork, opts: EngineOptions) -> Result<Engine<StaticSource>> {
    let src = StaticSource::new(net.envs.clone(), &net.models, &net.f)?;
    Engine::new(src, net.topology.clone(), net.f.clone(), opts)
}
