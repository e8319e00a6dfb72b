//! Multi-objective particle swarm optimizer over the 32-dimensional fuzzy
//! membership parameter vector.
//!
//! Minimizes the bi-objective (E, U) — accumulated squared tracking error
//! and summed per-channel control peaks — with inertia/attraction velocity
//! dynamics, box-constrained positions on `[0,1]^32`, per-particle
//! non-dominated local sets, a capacity-bounded global archive reduced by
//! average-linkage clustering, and a fuzzy-membership compromise selector
//! over the final front.
//!
//! Randomness is drawn from per-(purpose, generation, particle) ChaCha8
//! streams derived from one master seed, so results are bit-reproducible
//! and independent of evaluation order (serial or parallel).

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::fuzzy::{FuzzyParamVector, PARAM_DIM};

/// Objective value assigned to divergent simulations; dominated by every
/// finite evaluation.
pub const DIVERGENCE_SENTINEL: f64 = 1e12;

/// One bi-objective evaluation: `e` is the sum of squared tracking errors
/// over all samples and channels, `u` the sum of per-channel control peaks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectivePair {
    /// Accumulated squared tracking error.
    pub e: f64,
    /// Sum over channels of the control signal's ∞-norm.
    pub u: f64,
}

impl ObjectivePair {
    /// The sentinel returned for divergent simulations.
    pub fn sentinel() -> Self {
        ObjectivePair {
            e: DIVERGENCE_SENTINEL,
            u: DIVERGENCE_SENTINEL,
        }
    }

    /// True if this pair is the divergence sentinel.
    pub fn is_sentinel(&self) -> bool {
        self.e >= DIVERGENCE_SENTINEL && self.u >= DIVERGENCE_SENTINEL
    }

    /// Builds the pair from per-sample error and control rows:
    /// `e = Σ (e1² + e2²)`, `u = max|u1| + max|u2|`.
    pub fn from_samples(e: &[[f64; 2]], u: &[[f64; 2]]) -> Self {
        let mut sum = 0.0;
        for row in e {
            sum += row[0] * row[0] + row[1] * row[1];
        }
        let mut peak = [0.0f64; 2];
        for row in u {
            for ch in 0..2 {
                let a = row[ch].abs();
                if a > peak[ch] {
                    peak[ch] = a;
                }
            }
        }
        ObjectivePair {
            e: sum,
            u: peak[0] + peak[1],
        }
    }
}

/// Strict Pareto dominance for minimization: `a` is no worse in both
/// objectives and strictly better in at least one.
pub fn dominates(a: &ObjectivePair, b: &ObjectivePair) -> bool {
    a.e <= b.e && a.u <= b.u && (a.e < b.e || a.u < b.u)
}

/// Weighted single-objective baseline: `Σ_t Σ_channels (γ1·e² + γ2·u²)`
/// over parallel per-sample error and control rows.
pub fn scalar_objective(e: &[[f64; 2]], u: &[[f64; 2]], gamma1: f64, gamma2: f64) -> f64 {
    let mut total = 0.0;
    for row in e {
        total += gamma1 * (row[0] * row[0] + row[1] * row[1]);
    }
    for row in u {
        total += gamma2 * (row[0] * row[0] + row[1] * row[1]);
    }
    total
}

/// One archived solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveEntry {
    /// Decision vector (membership parameters).
    pub position: FuzzyParamVector,
    /// Its evaluation.
    pub objectives: ObjectivePair,
}

/// A capacity-bounded, mutually non-dominated solution set — used both for
/// the global set (capacity 50) and each particle's local set (capacity
/// 10).
#[derive(Clone, Debug)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
    capacity: usize,
}

impl Archive {
    /// Empty archive with the given capacity (≥ 2 so the two objective
    /// extremes can always coexist).
    pub fn new(capacity: usize) -> Self {
        Archive {
            entries: Vec::new(),
            capacity: capacity.max(2),
        }
    }

    /// Current members.
    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    /// Capacity bound.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when no member is stored.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Objective pairs of all members, in storage order.
    pub fn objectives(&self) -> Vec<ObjectivePair> {
        self.entries.iter().map(|en| en.objectives).collect()
    }

    /// True if any member has a finite (non-sentinel) evaluation.
    pub fn has_finite(&self) -> bool {
        self.entries.iter().any(|en| !en.objectives.is_sentinel())
    }

    /// Inserts a candidate: rejected if dominated by (or duplicating the
    /// objectives of) an existing member; members it dominates are
    /// removed; overflow triggers clustering reduction back to capacity.
    /// Returns whether the candidate was admitted.
    pub fn insert(&mut self, position: FuzzyParamVector, objectives: ObjectivePair) -> bool {
        let admitted = self.screen_in(position, objectives);
        if self.entries.len() > self.capacity {
            let taken = core::mem::take(&mut self.entries);
            self.entries = cluster_reduce(taken, self.capacity);
        }
        admitted
    }

    /// Inserts a whole batch under the same dominance screening, running
    /// the clustering reduction at most once at the end (one update).
    pub fn insert_batch(&mut self, items: &[(FuzzyParamVector, ObjectivePair)]) {
        for (pos, obj) in items {
            self.screen_in(*pos, *obj);
        }
        if self.entries.len() > self.capacity {
            let taken = core::mem::take(&mut self.entries);
            self.entries = cluster_reduce(taken, self.capacity);
        }
    }

    /// Dominance screening without capacity enforcement.
    fn screen_in(&mut self, position: FuzzyParamVector, objectives: ObjectivePair) -> bool {
        if self
            .entries
            .iter()
            .any(|en| dominates(&en.objectives, &objectives) || en.objectives == objectives)
        {
            return false;
        }
        self.entries.retain(|en| !dominates(&objectives, &en.objectives));
        self.entries.push(ArchiveEntry { position, objectives });
        true
    }
}

/// Swarm hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwarmConfig {
    /// Number of particles.
    pub population: usize,
    /// Number of generations.
    pub generations: usize,
    /// Inertia weight α.
    pub alpha: f64,
    /// Attraction toward the local guide.
    pub c1: f64,
    /// Attraction toward the global guide.
    pub c2: f64,
    /// Interval count defining the velocity bound `v_max = range/N_int`.
    pub n_int: usize,
    /// Master RNG seed.
    pub seed: u64,
    /// Global archive capacity.
    pub archive_capacity: usize,
    /// Local set capacity per particle.
    pub local_capacity: usize,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            population: 30,
            generations: 50,
            alpha: 0.99,
            c1: 2.0,
            c2: 2.0,
            n_int: 20,
            seed: 42,
            archive_capacity: 50,
            local_capacity: 10,
        }
    }
}

impl SwarmConfig {
    /// Checks positivity and range constraints.
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.population == 0 {
            return Err(CoreError::InvalidConfig {
                field: "population".into(),
                reason: "must be at least 1".into(),
            });
        }
        if self.generations == 0 {
            return Err(CoreError::InvalidConfig {
                field: "generations".into(),
                reason: "must be at least 1".into(),
            });
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CoreError::InvalidConfig {
                field: "alpha".into(),
                reason: "inertia must lie in (0, 1]".into(),
            });
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "c1/c2".into(),
                reason: "attraction coefficients must be non-negative".into(),
            });
        }
        if self.n_int == 0 {
            return Err(CoreError::InvalidConfig {
                field: "n_int".into(),
                reason: "interval count must be at least 1".into(),
            });
        }
        if self.archive_capacity < 2 || self.local_capacity < 2 {
            return Err(CoreError::InvalidConfig {
                field: "archive_capacity/local_capacity".into(),
                reason: "capacities must be at least 2".into(),
            });
        }
        Ok(())
    }

    /// Velocity bound per coordinate on the `[0,1]` search box.
    pub fn v_max(&self) -> f64 {
        (1.0 - 0.0) / self.n_int as f64
    }
}

/// Velocity bound `(p_max − p_min)/N_int`.
pub fn v_max(p_max: f64, p_min: f64, n_int: usize) -> Result<f64, CoreError> {
    if n_int == 0 {
        return Err(CoreError::InvalidConfig {
            field: "n_int".into(),
            reason: "interval count must be at least 1".into(),
        });
    }
    if !(p_max > p_min) {
        return Err(CoreError::InvalidConfig {
            field: "p_max/p_min".into(),
            reason: "search range must be non-degenerate".into(),
        });
    }
    Ok((p_max - p_min) / n_int as f64)
}

/// One swarm member.
#[derive(Clone, Debug)]
pub struct Particle {
    /// Current decision vector, each coordinate in `[0,1]`.
    pub position: FuzzyParamVector,
    /// Current velocity, each coordinate in `[−v_max, v_max]`.
    pub velocity: FuzzyParamVector,
    /// Non-dominated personal history (capacity 10 by default).
    pub local_set: Archive,
}

impl Particle {
    fn new(position: FuzzyParamVector, local_capacity: usize) -> Self {
        Particle {
            position,
            velocity: [0.0; PARAM_DIM],
            local_set: Archive::new(local_capacity),
        }
    }
}

/// New velocity `v' = α·v + c1·r1·(p* − p) + c2·r2·(p** − p)` with fresh
/// `r1, r2 ~ U(0,1)` drawn per dimension (r1 then r2, ascending
/// dimension), clamped to `±v_max`.
pub fn update_velocity(
    p: &Particle,
    p_star: &FuzzyParamVector,
    p_dstar: &FuzzyParamVector,
    cfg: &SwarmConfig,
    rng: &mut impl RngCore,
) -> FuzzyParamVector {
    let vm = cfg.v_max();
    let mut v = [0.0; PARAM_DIM];
    for d in 0..PARAM_DIM {
        let r1: f64 = rng.gen();
        let r2: f64 = rng.gen();
        let raw = cfg.alpha * p.velocity[d]
            + cfg.c1 * r1 * (p_star[d] - p.position[d])
            + cfg.c2 * r2 * (p_dstar[d] - p.position[d]);
        v[d] = raw.clamp(-vm, vm);
    }
    v
}

/// New position `p + v'`, clamped to `[0,1]` per coordinate; a clamped
/// coordinate has its velocity reset to zero. Returns (position,
/// velocity).
pub fn update_position(
    position: &FuzzyParamVector,
    velocity: &FuzzyParamVector,
) -> (FuzzyParamVector, FuzzyParamVector) {
    let mut p = [0.0; PARAM_DIM];
    let mut v = *velocity;
    for d in 0..PARAM_DIM {
        let raw = position[d] + velocity[d];
        let clamped = raw.clamp(0.0, 1.0);
        if clamped != raw {
            v[d] = 0.0;
        }
        p[d] = clamped;
    }
    (p, v)
}

/// Draws the guide pair: `p*` uniformly from the particle's local set,
/// `p**` uniformly from the global archive (local drawn first). An empty
/// set falls back to the particle's own position.
pub fn select_guides(
    p: &Particle,
    global: &Archive,
    rng: &mut impl RngCore,
) -> (FuzzyParamVector, FuzzyParamVector) {
    let draw = |set: &Archive, rng: &mut dyn RngCore| -> FuzzyParamVector {
        if set.is_empty() {
            p.position
        } else {
            let idx = (rng.next_u64() % set.len() as u64) as usize;
            set.entries()[idx].position
        }
    };
    let p_star = draw(&p.local_set, rng);
    let p_dstar = draw(global, rng);
    (p_star, p_dstar)
}

/// Reduces a mutually non-dominated set to `target` members by
/// average-linkage agglomerative clustering in min–max normalized
/// objective space. Each surviving cluster is represented by the member
/// nearest its centroid, except that the two single-objective extreme
/// points always survive (their clusters are pinned to them and never
/// merge with each other). Ties break by insertion order; output keeps
/// insertion order.
pub fn cluster_reduce(entries: Vec<ArchiveEntry>, target: usize) -> Vec<ArchiveEntry> {
    let n = entries.len();
    if n <= target.max(2) || n <= 2 {
        return entries;
    }
    // Min–max normalization per objective over the set.
    let mut e_lo = f64::INFINITY;
    let mut e_hi = f64::NEG_INFINITY;
    let mut u_lo = f64::INFINITY;
    let mut u_hi = f64::NEG_INFINITY;
    for en in &entries {
        e_lo = e_lo.min(en.objectives.e);
        e_hi = e_hi.max(en.objectives.e);
        u_lo = u_lo.min(en.objectives.u);
        u_hi = u_hi.max(en.objectives.u);
    }
    let scale = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let pts: Vec<[f64; 2]> = entries
        .iter()
        .map(|en| {
            [
                scale(en.objectives.e, e_lo, e_hi),
                scale(en.objectives.u, u_lo, u_hi),
            ]
        })
        .collect();
    // Extreme members (first index at each objective minimum) are pinned.
    let mut idx_min_e = 0;
    let mut idx_min_u = 0;
    for (i, en) in entries.iter().enumerate() {
        if en.objectives.e < entries[idx_min_e].objectives.e {
            idx_min_e = i;
        }
        if en.objectives.u < entries[idx_min_u].objectives.u {
            idx_min_u = i;
        }
    }
    struct Cluster {
        members: Vec<usize>,
        pinned: Option<usize>,
    }
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            members: alloc::vec![i],
            pinned: if i == idx_min_e {
                Some(idx_min_e)
            } else if i == idx_min_u {
                Some(idx_min_u)
            } else {
                None
            },
        })
        .collect();
    let dist = |a: usize, b: usize| -> f64 {
        let dx = pts[a][0] - pts[b][0];
        let dy = pts[a][1] - pts[b][1];
        (dx * dx + dy * dy).sqrt()
    };
    while clusters.len() > target {
        // Find the pair with the smallest average inter-cluster distance;
        // two pinned clusters never merge.
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                if clusters[a].pinned.is_some() && clusters[b].pinned.is_some() {
                    continue;
                }
                let mut sum = 0.0;
                for &i in &clusters[a].members {
                    for &j in &clusters[b].members {
                        sum += dist(i, j);
                    }
                }
                let d = sum / (clusters[a].members.len() * clusters[b].members.len()) as f64;
                if best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        let Some((a, b, _)) = best else {
            break; // Only mutually pinned clusters remain.
        };
        let absorbed = clusters.remove(b);
        clusters[a].members.extend(absorbed.members);
        if clusters[a].pinned.is_none() {
            clusters[a].pinned = absorbed.pinned;
        }
    }
    // Representative per cluster: the pinned extreme, else the member
    // nearest the cluster centroid (ties by insertion order).
    let mut keep: Vec<usize> = clusters
        .iter()
        .map(|cl| {
            if let Some(pin) = cl.pinned {
                return pin;
            }
            let m = cl.members.len() as f64;
            let cx = cl.members.iter().map(|&i| pts[i][0]).sum::<f64>() / m;
            let cy = cl.members.iter().map(|&i| pts[i][1]).sum::<f64>() / m;
            let mut best = cl.members[0];
            let mut best_d = f64::INFINITY;
            let mut sorted = cl.members.clone();
            sorted.sort_unstable();
            for &i in &sorted {
                let dx = pts[i][0] - cx;
                let dy = pts[i][1] - cy;
                let d = dx * dx + dy * dy;
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        })
        .collect();
    keep.sort_unstable();
    keep.dedup();
    let mut out = Vec::with_capacity(keep.len());
    let mut taken: Vec<Option<ArchiveEntry>> = entries.into_iter().map(Some).collect();
    for i in keep {
        if let Some(en) = taken[i].take() {
            out.push(en);
        }
    }
    out
}

/// Selects the compromise solution from a front by fuzzy satisfaction:
/// per-objective membership `μ_k = (F_max − F_k)/(F_max − F_min)` clamped
/// to `[0,1]` (1 everywhere when an objective is constant); the winner
/// maximizes `Σ_k μ_k`, ties broken first by the larger worst-case
/// membership `min_k μ_k`, then by smaller E.
pub fn best_compromise(pareto: &Archive) -> Option<ArchiveEntry> {
    let entries = pareto.entries();
    if entries.is_empty() {
        return None;
    }
    let mut e_lo = f64::INFINITY;
    let mut e_hi = f64::NEG_INFINITY;
    let mut u_lo = f64::INFINITY;
    let mut u_hi = f64::NEG_INFINITY;
    for en in entries {
        e_lo = e_lo.min(en.objectives.e);
        e_hi = e_hi.max(en.objectives.e);
        u_lo = u_lo.min(en.objectives.u);
        u_hi = u_hi.max(en.objectives.u);
    }
    let mu = |v: f64, lo: f64, hi: f64| -> f64 {
        if hi > lo {
            ((hi - v) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            1.0
        }
    };
    let tol = 1e-12;
    let mut best = 0;
    let mut best_sum = f64::NEG_INFINITY;
    let mut best_min = f64::NEG_INFINITY;
    for (i, en) in entries.iter().enumerate() {
        let m_e = mu(en.objectives.e, e_lo, e_hi);
        let m_u = mu(en.objectives.u, u_lo, u_hi);
        let sum = m_e + m_u;
        let min = m_e.min(m_u);
        let better = if sum > best_sum + tol {
            true
        } else if sum < best_sum - tol {
            false
        } else if min > best_min + tol {
            true
        } else if min < best_min - tol {
            false
        } else {
            en.objectives.e < entries[best].objectives.e
        };
        if better {
            best = i;
            best_sum = sum;
            best_min = min;
        }
    }
    Some(entries[best].clone())
}

/// Per-generation record: every particle's evaluation plus snapshots of
/// both solution sets after the update.
#[derive(Clone, Debug)]
pub struct GenerationLog {
    /// Generation index, starting at 0.
    pub generation: usize,
    /// Objective pair per particle, indexed by particle.
    pub evaluations: Vec<ObjectivePair>,
    /// Bounded global-set objectives after this generation's union and
    /// clustering reduction.
    pub archive_objectives: Vec<ObjectivePair>,
    /// Cumulative non-dominated front over every evaluation so far (the
    /// unbounded external set); its dominated hypervolume never
    /// decreases.
    pub front_objectives: Vec<ObjectivePair>,
}

/// Output of a swarm run.
#[derive(Clone, Debug)]
pub struct RunResult {
    /// Final global archive — the Pareto front estimate.
    pub pareto: Archive,
    /// Per-generation fitness log.
    pub history: Vec<GenerationLog>,
}

const STREAM_INIT: u64 = 1;
const STREAM_GUIDES: u64 = 2;
const STREAM_VELOCITY: u64 = 3;

/// A fresh ChaCha8 stream keyed by (purpose, generation, particle) on top
/// of the master seed; draws are independent across keys, making results
/// identical regardless of evaluation order.
fn stream_rng(seed: u64, purpose: u64, generation: usize, particle: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 56) | ((generation as u64) << 28) | particle as u64);
    rng
}

/// Runs the swarm with a serial evaluator.
pub fn run<F>(cfg: &SwarmConfig, eval: F) -> Result<RunResult, CoreError>
where
    F: Fn(&FuzzyParamVector) -> ObjectivePair,
{
    run_mapped(cfg, |positions| positions.iter().map(&eval).collect())
}

/// Runs the swarm with a caller-supplied batch evaluator (e.g. a parallel
/// map). The evaluator must return one objective pair per position, in
/// order; since evaluations are pure and randomness is keyed per particle,
/// parallel and serial mappers produce bit-identical results.
pub fn run_mapped<M>(cfg: &SwarmConfig, mut evaluate_all: M) -> Result<RunResult, CoreError>
where
    M: FnMut(&[FuzzyParamVector]) -> Vec<ObjectivePair>,
{
    cfg.validate()?;
    let mut particles: Vec<Particle> = (0..cfg.population)
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, STREAM_INIT, 0, i);
            let mut pos = [0.0; PARAM_DIM];
            for v in pos.iter_mut() {
                *v = rng.gen::<f64>();
            }
            Particle::new(pos, cfg.local_capacity)
        })
        .collect();
    // Bounded global set: guide source and returned front.
    let mut archive = Archive::new(cfg.archive_capacity);
    // Unbounded external set: cumulative non-dominated union of every
    // evaluation, merged into the global set each generation.
    let mut external = Archive::new(usize::MAX);
    let mut history = Vec::with_capacity(cfg.generations);

    for generation in 0..cfg.generations {
        let positions: Vec<FuzzyParamVector> =
            particles.iter().map(|p| p.position).collect();
        let evals = evaluate_all(&positions);
        if evals.len() != positions.len() {
            return Err(CoreError::DimensionMismatch {
                context: "swarm evaluation batch",
                expected: alloc::format!("{}", positions.len()),
                actual: alloc::format!("{}", evals.len()),
            });
        }
        // Sentinels stay out of every set while any finite point exists.
        let any_finite =
            external.has_finite() || evals.iter().any(|o| !o.is_sentinel());
        let mut admitted: Vec<(FuzzyParamVector, ObjectivePair)> = Vec::new();
        for (p, obj) in particles.iter_mut().zip(evals.iter()) {
            if !obj.is_sentinel() || !any_finite {
                p.local_set.insert(p.position, *obj);
                admitted.push((p.position, *obj));
            }
        }
        for (pos, obj) in &admitted {
            external.insert(*pos, *obj);
        }
        archive.insert_batch(&admitted);
        history.push(GenerationLog {
            generation,
            evaluations: evals,
            archive_objectives: archive.objectives(),
            front_objectives: external.objectives(),
        });
        for (i, p) in particles.iter_mut().enumerate() {
            let mut grng = stream_rng(cfg.seed, STREAM_GUIDES, generation, i);
            let (p_star, p_dstar) = select_guides(p, &archive, &mut grng);
            let mut vrng = stream_rng(cfg.seed, STREAM_VELOCITY, generation, i);
            let v = update_velocity(p, &p_star, &p_dstar, cfg, &mut vrng);
            let (new_pos, new_vel) = update_position(&p.position, &v);
            p.position = new_pos;
            p.velocity = new_vel;
        }
    }
    Ok(RunResult { pareto: archive, history })
}

/// Hypervolume (area dominated up to `reference`) of a 2-D minimization
/// set; points not strictly better than the reference in both objectives
/// contribute nothing.
pub fn hypervolume(points: &[ObjectivePair], reference: &ObjectivePair) -> f64 {
    let mut front: Vec<ObjectivePair> = points
        .iter()
        .copied()
        .filter(|p| p.e < reference.e && p.u < reference.u)
        .collect();
    front.sort_by(|a, b| a.e.partial_cmp(&b.e).expect("finite objectives"));
    let mut hv = 0.0;
    let mut best_u = reference.u;
    for p in &front {
        if p.u < best_u {
            hv += (reference.e - p.e) * (best_u - p.u);
            best_u = p.u;
        }
    }
    hv
}
