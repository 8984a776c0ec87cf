//! Monte Carlo wave-function trajectories.
//!
//! Each trajectory evolves under `H_nh = H - (i/2) sum_k c_k† c_k`. A uniform
//! threshold `r` is drawn up front; when the squared norm drops below `r` the
//! crossing is located by bisection inside the step, a jump `c_k` is applied
//! with probability proportional to `||c_k psi||^2`, the state is
//! renormalized and a fresh threshold is drawn.
//!
//! Trajectory `i` of an ensemble draws from `ChaCha8Rng` seeded with the
//! master seed and switched to stream `i`, so any single trajectory can be
//! regenerated independently of the others.
//!
//! Until its first jump every trajectory follows the same no-jump path. The
//! ensemble integrates that path once, records its norm after every step and
//! keeps periodic checkpoints; a trajectory only needs its own integration
//! from the checkpoint before its first threshold crossing. The result is
//! bit-identical to running [`mcwf_trajectory`] for every index.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compiled::{CompiledOperator, Rk4};
use super::{
    collapse_operators, damping_term, leaks, norm_sqr, CollapseOperator, DecoherenceRates, StepPlan, TimeGrid,
    TruncationReport, DEFAULT_TRUNCATION_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::fockspace::{HilbertSpec, KetState};
use crate::model::TimeDependentOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Observables evaluated on the normalized lab-frame state at each output.
pub type ObservableFn<'a> = dyn Fn(&[Complex64]) -> Vec<f64> + Sync + 'a;

/// Random stream of trajectory `index` under `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    /// Index into [`TrajectoryEnsemble::channels`].
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// `outputs[k]` holds the observables at output time `k`.
    pub outputs: Vec<Vec<f64>>,
    /// Top-two-level populations of modes `a` and `b` at each output.
    pub leaks: Vec<(f64, f64)>,
    pub jumps: Vec<JumpEvent>,
}

/// A record shared by one or more trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRecord {
    pub record: TrajectoryRecord,
    /// Trajectory indices that produced this record, ascending.
    pub trajectories: Vec<usize>,
}

impl WeightedRecord {
    pub fn multiplicity(&self) -> usize {
        self.trajectories.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McwfOptions {
    /// Bisections used to locate a jump inside a step (resolution `dt / 2^n`).
    pub bisections: u32,
    pub truncation_threshold: f64,
    /// Upper bound on stored no-jump checkpoints.
    pub max_checkpoints: usize,
}

impl Default for McwfOptions {
    fn default() -> Self {
        McwfOptions { bisections: 4, truncation_threshold: DEFAULT_TRUNCATION_THRESHOLD, max_checkpoints: 256 }
    }
}

/// Ensemble statistics over `n_traj` trajectories.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub n_traj: usize,
    pub master_seed: u64,
    pub times: Vec<f64>,
    pub channels: Vec<String>,
    /// `mean[k][o]`: mean of observable `o` at output `k`.
    pub mean: Vec<Vec<f64>>,
    /// Sample standard deviation over `sqrt(n_traj)`.
    pub stderr: Vec<Vec<f64>>,
    pub mean_leaks: Vec<(f64, f64)>,
    pub jump_counts: Vec<usize>,
    pub n_jumped: usize,
    pub truncation: TruncationReport,
    pub records: Vec<WeightedRecord>,
}

impl TrajectoryEnsemble {
    fn from_records(
        n_traj: usize,
        master_seed: u64,
        times: Vec<f64>,
        channels: Vec<String>,
        records: Vec<WeightedRecord>,
        truncation_threshold: f64,
    ) -> Self {
        let n = n_traj as f64;
        let n_out = times.len();
        let n_obs = records.first().map_or(0, |r| r.record.outputs.first().map_or(0, Vec::len));
        let mut mean = vec![vec![0.0; n_obs]; n_out];
        let mut mean_leaks = vec![(0.0, 0.0); n_out];
        for wr in &records {
            let m = wr.multiplicity() as f64;
            for k in 0..n_out {
                for (acc, x) in mean[k].iter_mut().zip(&wr.record.outputs[k]) {
                    *acc += m * x;
                }
                mean_leaks[k].0 += m * wr.record.leaks[k].0;
                mean_leaks[k].1 += m * wr.record.leaks[k].1;
            }
        }
        for k in 0..n_out {
            mean[k].iter_mut().for_each(|x| *x /= n);
            mean_leaks[k].0 /= n;
            mean_leaks[k].1 /= n;
        }
        let mut stderr = vec![vec![0.0; n_obs]; n_out];
        for wr in &records {
            let m = wr.multiplicity() as f64;
            for k in 0..n_out {
                for ((acc, x), mu) in stderr[k].iter_mut().zip(&wr.record.outputs[k]).zip(&mean[k]) {
                    *acc += m * (x - mu) * (x - mu);
                }
            }
        }
        for row in stderr.iter_mut() {
            row.iter_mut().for_each(|v| *v = (*v / (n - 1.0)).sqrt() / n.sqrt());
        }
        let mut jump_counts = vec![0; channels.len()];
        let mut n_jumped = 0;
        for wr in &records {
            if !wr.record.jumps.is_empty() {
                n_jumped += wr.multiplicity();
            }
            for j in &wr.record.jumps {
                jump_counts[j.channel] += wr.multiplicity();
            }
        }
        let mut truncation = TruncationReport::new(truncation_threshold);
        for (t, (la, lb)) in times.iter().zip(&mean_leaks) {
            truncation.observe(*t, *la, *lb);
        }
        TrajectoryEnsemble {
            n_traj,
            master_seed,
            times,
            channels,
            mean,
            stderr,
            mean_leaks,
            jump_counts,
            n_jumped,
            truncation,
            records,
        }
    }

    /// Record produced by trajectory `index`.
    pub fn record_of(&self, index: usize) -> Option<&TrajectoryRecord> {
        self.records.iter().find(|wr| wr.trajectories.binary_search(&index).is_ok()).map(|wr| &wr.record)
    }

    /// Fraction of trajectories with at least one jump up to output `k`.
    pub fn fraction_jumped_by(&self, k: usize) -> f64 {
        let t = self.times[k];
        let count: usize = self
            .records
            .iter()
            .filter(|wr| wr.record.jumps.first().is_some_and(|j| j.time <= t))
            .map(WeightedRecord::multiplicity)
            .sum();
        count as f64 / self.n_traj as f64
    }

    /// Jackknife estimate and standard error of a function of the observable
    /// means at output `k`.
    pub fn jackknife<F: Fn(&[f64]) -> f64>(&self, k: usize, f: F) -> (f64, f64) {
        let n = self.n_traj as f64;
        let mean = &self.mean[k];
        let value = f(mean);
        let mut loo = vec![0.0; mean.len()];
        let thetas: Vec<(f64, f64)> = self
            .records
            .iter()
            .map(|wr| {
                for ((l, mu), x) in loo.iter_mut().zip(mean).zip(&wr.record.outputs[k]) {
                    *l = (n * mu - x) / (n - 1.0);
                }
                (wr.multiplicity() as f64, f(&loo))
            })
            .collect();
        let bar = thetas.iter().map(|(m, th)| m * th).sum::<f64>() / n;
        let var = (n - 1.0) / n * thetas.iter().map(|(m, th)| m * (th - bar) * (th - bar)).sum::<f64>();
        (value, var.sqrt())
    }
}

/// Precompiled trajectory propagator.
pub struct McwfSolver {
    spec: HilbertSpec,
    op: CompiledOperator,
    plan: StepPlan,
    collapse: Vec<CollapseOperator>,
    times: Vec<f64>,
    phi0: Vec<Complex64>,
    t0: f64,
    options: McwfOptions,
}

struct Trajectory<'a> {
    rng: ChaCha8Rng,
    threshold: f64,
    rk: Rk4,
    next: Vec<Complex64>,
    trial: Vec<Complex64>,
    scratch: Vec<Complex64>,
    record: TrajectoryRecord,
    obs: &'a ObservableFn<'a>,
}

impl McwfSolver {
    pub fn new(
        h: &TimeDependentOperator,
        rates: &DecoherenceRates,
        psi0: &KetState,
        grid: &TimeGrid,
        options: McwfOptions,
    ) -> Result<Self> {
        let spec = psi0.spec().clone();
        if h.spec() != &spec {
            return Err(Error::IncompatibleSpaces(format!("{:?} vs {:?}", h.spec(), spec)));
        }
        if !psi0.is_normalized() {
            return Err(Error::ConfigInvalid("initial state must be normalized".into()));
        }
        let collapse = collapse_operators(&spec, rates)?;
        let damping = damping_term(&spec, &collapse)?;
        let op = CompiledOperator::auto(h, Some(&damping));
        let plan = grid.plan(op.max_frequency());
        let phi0 = op.from_lab(grid.t_start(), psi0.amplitudes());
        Ok(McwfSolver {
            spec,
            op,
            plan,
            collapse,
            times: grid.outputs().to_vec(),
            phi0,
            t0: grid.t_start(),
            options,
        })
    }

    pub fn channels(&self) -> Vec<String> {
        self.collapse.iter().map(|c| c.name.to_string()).collect()
    }

    pub fn steps_per_trajectory(&self) -> usize {
        self.plan.total_steps()
    }

    fn can_jump(&self) -> bool {
        !self.collapse.is_empty()
    }

    fn observe(&self, t: f64, phi: &[Complex64], tr: &mut Trajectory) {
        let mut psi = self.op.to_lab(t, phi);
        let s = 1.0 / norm_sqr(&psi).sqrt();
        psi.iter_mut().for_each(|x| *x *= s);
        tr.record.outputs.push((tr.obs)(&psi));
        tr.record.leaks.push(leaks(&self.spec, &psi));
    }

    fn start<'a>(&self, master_seed: u64, index: usize, obs: &'a ObservableFn<'a>) -> Trajectory<'a> {
        let mut rng = trajectory_rng(master_seed, index as u64);
        let threshold = rng.gen::<f64>();
        let n = self.op.dim();
        Trajectory {
            rng,
            threshold,
            rk: Rk4::new(&self.op),
            next: vec![ZERO; n],
            trial: vec![ZERO; n],
            scratch: vec![ZERO; n],
            record: TrajectoryRecord { outputs: Vec::new(), leaks: Vec::new(), jumps: Vec::new() },
            obs,
        }
    }

    /// Applies a jump at time `t` to the frame state `phi`.
    fn jump(&self, t: f64, phi: &mut Vec<Complex64>, tr: &mut Trajectory) {
        let psi = self.op.to_lab(t, phi);
        let mut candidates = Vec::with_capacity(self.collapse.len());
        let mut total = 0.0;
        for c in &self.collapse {
            c.op.data().matvec(&psi, &mut tr.scratch);
            let w = norm_sqr(&tr.scratch);
            total += w;
            candidates.push(w);
        }
        let u = tr.rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut channel = candidates.len() - 1;
        for (k, w) in candidates.iter().enumerate() {
            acc += w;
            if u < acc {
                channel = k;
                break;
            }
        }
        if total > 0.0 {
            self.collapse[channel].op.data().matvec(&psi, &mut tr.scratch);
            let s = 1.0 / candidates[channel].sqrt();
            tr.scratch.iter_mut().for_each(|x| *x *= s);
            *phi = self.op.from_lab(t, &tr.scratch);
            tr.record.jumps.push(JumpEvent { time: t, channel });
        } else {
            let s = 1.0 / norm_sqr(phi).sqrt();
            phi.iter_mut().for_each(|x| *x *= s);
        }
        tr.threshold = tr.rng.gen::<f64>();
    }

    /// One step of length `h` from `t`, with jump detection.
    fn advance(&self, t: f64, h: f64, phi: &mut Vec<Complex64>, tr: &mut Trajectory) -> Result<()> {
        let (mut t, mut h) = (t, h);
        loop {
            tr.rk.step(&self.op, t, h, phi, &mut tr.next);
            let n2 = norm_sqr(&tr.next);
            if !n2.is_finite() {
                return Err(Error::IntegratorFailure(format!("non-finite amplitudes at t = {t}")));
            }
            if !self.can_jump() || n2 >= tr.threshold {
                std::mem::swap(phi, &mut tr.next);
                return Ok(());
            }
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..self.options.bisections {
                let mid = 0.5 * (lo + hi);
                tr.rk.step(&self.op, t, mid, phi, &mut tr.trial);
                if norm_sqr(&tr.trial) < tr.threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            tr.rk.step(&self.op, t, hi, phi, &mut tr.next);
            std::mem::swap(phi, &mut tr.next);
            t += hi;
            self.jump(t, phi, tr);
            h -= hi;
            if h <= 0.0 {
                return Ok(());
            }
        }
    }

    /// Continues from step `j` of interval `iv` with `phi` the state before that step.
    fn run_from(&self, iv: usize, j: usize, mut phi: Vec<Complex64>, tr: &mut Trajectory) -> Result<()> {
        for (k, interval) in self.plan.intervals.iter().enumerate().skip(iv) {
            let j0 = if k == iv { j } else { 0 };
            for step in j0..interval.steps {
                self.advance(interval.time(step), interval.dt, &mut phi, tr)?;
            }
            self.observe(interval.time(interval.steps), &phi, tr);
        }
        Ok(())
    }

    /// Single trajectory `index` of the ensemble seeded by `master_seed`.
    pub fn trajectory(&self, master_seed: u64, index: usize, obs: &ObservableFn) -> Result<TrajectoryRecord> {
        let mut tr = self.start(master_seed, index, obs);
        self.observe(self.t0, &self.phi0, &mut tr);
        self.run_from(0, 0, self.phi0.clone(), &mut tr)?;
        Ok(tr.record)
    }

    pub fn ensemble(&self, n_traj: usize, master_seed: u64, obs: &ObservableFn) -> Result<TrajectoryEnsemble> {
        if n_traj < 2 {
            return Err(Error::ConfigInvalid(format!("an ensemble needs at least 2 trajectories, got {n_traj}")));
        }
        let prefix = self.no_jump_prefix(obs)?;

        let mut starts = Vec::new();
        let mut shared = Vec::new();
        for i in 0..n_traj {
            let tr = self.start(master_seed, i, obs);
            let first = if self.can_jump() { prefix.running_min.partition_point(|&m| m >= tr.threshold) } else { usize::MAX };
            if first < prefix.running_min.len() {
                starts.push((i, first, tr));
            } else {
                shared.push(i);
            }
        }

        let jumped: Vec<(usize, TrajectoryRecord)> = starts
            .into_par_iter()
            .map(|(i, g, mut tr)| {
                let (iv, j) = prefix.locate[g];
                let (cg, state) = &prefix.checkpoints[prefix.checkpoints.partition_point(|c| c.0 <= g) - 1];
                let mut phi = state.clone();
                for gg in *cg..g {
                    let (civ, cj) = prefix.locate[gg];
                    let interval = &self.plan.intervals[civ];
                    tr.rk.step_in_place(&self.op, interval.time(cj), interval.dt, &mut phi);
                }
                tr.record.outputs = prefix.record.outputs[..=iv].to_vec();
                tr.record.leaks = prefix.record.leaks[..=iv].to_vec();
                self.run_from(iv, j, phi, &mut tr)?;
                Ok((i, tr.record))
            })
            .collect::<Result<_>>()?;

        let mut records: Vec<WeightedRecord> =
            jumped.into_iter().map(|(i, record)| WeightedRecord { record, trajectories: vec![i] }).collect();
        if !shared.is_empty() {
            records.push(WeightedRecord { record: prefix.record, trajectories: shared });
        }
        records.sort_by_key(|wr| wr.trajectories[0]);
        Ok(TrajectoryEnsemble::from_records(
            n_traj,
            master_seed,
            self.times.clone(),
            self.channels(),
            records,
            self.options.truncation_threshold,
        ))
    }

    fn no_jump_prefix(&self, obs: &ObservableFn) -> Result<NoJumpPrefix> {
        let total = self.plan.total_steps();
        let stride = total.div_ceil(self.options.max_checkpoints.max(1)).max(1);
        let mut tr = self.start(0, 0, obs);
        let mut phi = self.phi0.clone();
        let mut running_min = Vec::with_capacity(total);
        let mut locate = Vec::with_capacity(total);
        let mut checkpoints = Vec::new();
        let mut min = f64::INFINITY;
        self.observe(self.t0, &phi, &mut tr);
        for (k, interval) in self.plan.intervals.iter().enumerate() {
            for j in 0..interval.steps {
                let g = locate.len();
                if g % stride == 0 {
                    checkpoints.push((g, phi.clone()));
                }
                locate.push((k, j));
                tr.rk.step_in_place(&self.op, interval.time(j), interval.dt, &mut phi);
                let n2 = norm_sqr(&phi);
                if !n2.is_finite() {
                    return Err(Error::IntegratorFailure(format!("non-finite amplitudes at t = {}", interval.time(j))));
                }
                min = min.min(n2);
                running_min.push(min);
            }
            self.observe(interval.time(interval.steps), &phi, &mut tr);
        }
        Ok(NoJumpPrefix { running_min, locate, checkpoints, record: tr.record })
    }
}

struct NoJumpPrefix {
    /// Running minimum of the squared norm after each global step.
    running_min: Vec<f64>,
    /// `(interval, step)` of each global step.
    locate: Vec<(usize, usize)>,
    /// States before selected global steps.
    checkpoints: Vec<(usize, Vec<Complex64>)>,
    record: TrajectoryRecord,
}

/// Trajectory `index` under `master_seed`; see [`McwfSolver`].
#[allow(clippy::too_many_arguments)]
pub fn mcwf_trajectory(
    h: &TimeDependentOperator,
    rates: &DecoherenceRates,
    psi0: &KetState,
    grid: &TimeGrid,
    master_seed: u64,
    index: usize,
    obs: &ObservableFn,
    options: McwfOptions,
) -> Result<TrajectoryRecord> {
    McwfSolver::new(h, rates, psi0, grid, options)?.trajectory(master_seed, index, obs)
}

#[allow(clippy::too_many_arguments)]
pub fn mcwf_ensemble(
    h: &TimeDependentOperator,
    rates: &DecoherenceRates,
    psi0: &KetState,
    grid: &TimeGrid,
    n_traj: usize,
    master_seed: u64,
    obs: &ObservableFn,
    options: McwfOptions,
) -> Result<TrajectoryEnsemble> {
    McwfSolver::new(h, rates, psi0, grid, options)?.ensemble(n_traj, master_seed, obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{mode_op, OperatorMatrix, MODE_A, QUBIT};
    use crate::solvers::StepControl;

    fn excited_population(psi: &[Complex64]) -> Vec<f64> {
        vec![psi[1].norm_sqr()]
    }

    #[test]
    fn streams_are_independent_and_stable() {
        let a: f64 = trajectory_rng(7, 0).gen();
        let b: f64 = trajectory_rng(7, 1).gen();
        assert_ne!(a, b);
        assert_eq!(a, trajectory_rng(7, 0).gen::<f64>());
    }

    #[test]
    fn shared_prefix_matches_independent_trajectories() {
        let spec = HilbertSpec::qubit_two_modes(2, 3, 3).unwrap();
        let a = mode_op(&spec, MODE_A).unwrap();
        let sx = crate::fockspace::qubit_op(&spec, crate::fockspace::AtomOp::SigmaEg).unwrap().plus_adjoint();
        let h = TimeDependentOperator::constant(sx.add(&a.multiply(&sx).unwrap().plus_adjoint().scale_real(0.3)).unwrap());
        let psi0 = KetState::basis(&spec, &[1, 1, 0]).unwrap();
        let rates = DecoherenceRates { gamma: 0.4, gamma_ph: 0.2, kappa_a: 0.3, kappa_b: 0.1 };
        let grid = TimeGrid::uniform(0.0, 2.0, 5, StepControl::Fixed(0.01)).unwrap();
        let options = McwfOptions { max_checkpoints: 7, ..Default::default() };
        let solver = McwfSolver::new(&h, &rates, &psi0, &grid, options).unwrap();
        let obs = |psi: &[Complex64]| vec![psi.iter().map(|x| x.re).sum::<f64>()];
        let ens = solver.ensemble(40, 11, &obs).unwrap();
        assert!(ens.n_jumped > 0 && ens.n_jumped < 40);
        for i in 0..40 {
            let direct = solver.trajectory(11, i, &obs).unwrap();
            assert_eq!(ens.record_of(i).unwrap(), &direct, "trajectory {i}");
        }
    }

    #[test]
    fn decay_without_coherent_dynamics() {
        let spec = HilbertSpec::single(QUBIT, 2).unwrap();
        let h = TimeDependentOperator::constant(OperatorMatrix::zeros(&spec));
        let psi0 = KetState::basis(&spec, &[1]).unwrap();
        let rates = DecoherenceRates { gamma: 1.0, ..Default::default() };
        let grid = TimeGrid::uniform(0.0, 2.0, 5, StepControl::Fixed(0.01)).unwrap();
        let ens = mcwf_ensemble(&h, &rates, &psi0, &grid, 400, 3, &excited_population, McwfOptions::default()).unwrap();
        for k in 0..5 {
            let p = 1.0 - (-grid.outputs()[k]).exp();
            let sigma = (p * (1.0 - p) / 400.0).sqrt();
            assert!((ens.fraction_jumped_by(k) - p).abs() <= 3.0 * sigma + 1e-12);
        }
        assert_eq!(ens.jump_counts, vec![ens.n_jumped]);
    }

    #[test]
    fn jackknife_of_mean_is_stderr() {
        let spec = HilbertSpec::single(QUBIT, 2).unwrap();
        let h = TimeDependentOperator::constant(OperatorMatrix::zeros(&spec));
        let psi0 = KetState::basis(&spec, &[1]).unwrap();
        let rates = DecoherenceRates { gamma: 1.0, ..Default::default() };
        let grid = TimeGrid::uniform(0.0, 1.0, 3, StepControl::Fixed(0.01)).unwrap();
        let ens = mcwf_ensemble(&h, &rates, &psi0, &grid, 200, 9, &excited_population, McwfOptions::default()).unwrap();
        let (v, se) = ens.jackknife(2, |m| m[0]);
        assert!((v - ens.mean[2][0]).abs() < 1e-15);
        assert!((se - ens.stderr[2][0]).abs() < 1e-12);
    }

    #[test]
    fn rejects_single_trajectory() {
        let spec = HilbertSpec::single(QUBIT, 2).unwrap();
        let h = TimeDependentOperator::constant(OperatorMatrix::zeros(&spec));
        let psi0 = KetState::basis(&spec, &[1]).unwrap();
        let grid = TimeGrid::uniform(0.0, 1.0, 2, StepControl::default()).unwrap();
        let r = mcwf_ensemble(&h, &DecoherenceRates::default(), &psi0, &grid, 1, 0, &excited_population, McwfOptions::default());
        assert!(matches!(r, Err(Error::ConfigInvalid(_))));
    }
}
