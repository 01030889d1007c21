//! The acceptance and invariant suite.
//!
//! Every check returns a [`CheckResult`] with the measured quantity and the
//! threshold it was compared against. Runs made by the checks are kept so
//! that the per-run invariants (mean velocity, endpoints, Gronwall bounds)
//! can be asserted over all of them at the end.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::boundary::{pi_bounds, relaxation_rate};
use crate::config::{boundary_relax, mixed_mode, single_mode, stationary, Target};
use crate::diagnostics::{gronwall_monitor, xi_bound_monitor, MonitorSettings};
use crate::error::Error;
use crate::galerkin::{output_grid, run_from, Galerkin, GalerkinState, RhsVariant, RunOptions, Stepping, Trajectory};
use crate::model::{stationary_xi, InitialData, ModelParams};
use crate::oracle::{dense_rhs, fit_damped_oscillation, linearized_prediction, twin_run_divergence, uniqueness_factor};

/// One pass/fail line of the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    /// `measured <= threshold`.
    fn at_most(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::new(name, measured <= threshold, measured, threshold, detail)
    }

    /// `measured >= threshold`.
    fn at_least(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::new(name, measured >= threshold, measured, threshold, detail)
    }

    fn failed_run(name: &str, err: impl fmt::Display) -> Self {
        Self::new(name, false, f64::NAN, f64::NAN, format!("run failed: {err}"))
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<34} measured {:>11.4e}  threshold {:>11.4e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold,
            self.detail
        )
    }
}

/// A trajectory produced by one of the checks.
#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub label: String,
    pub params: ModelParams,
    pub traj: Trajectory,
}

/// Suite outcome.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
    /// Informational lines (smallness status, bound reports).
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Parameters shared by the suite; each check fixes its own `N` and
/// initial data.
#[derive(Debug, Clone)]
pub struct Suite {
    pub base: ModelParams,
    pub variant: RhsVariant,
    pub runs: Vec<SuiteRun>,
    pub notes: Vec<String>,
}

fn params_with(base: &ModelParams, modes: usize) -> ModelParams {
    let mut p = base.clone();
    p.modes = modes;
    p.grid = p.oversample * modes + 1;
    p
}

fn relaxed(stepping: Stepping, variant: RhsVariant) -> RunOptions {
    RunOptions {
        stepping,
        monitors: MonitorSettings::relaxed(),
        variant,
    }
}

impl Suite {
    /// The default suite: `a = P = 1`, `gamma = 5`, `mu = 0.1`, `R = 2`.
    pub fn new(variant: RhsVariant) -> Self {
        Self::with_base(ModelParams::new(1.0, 5.0, 0.1, 1.0, 2, 32).expect("valid"), variant)
    }

    pub fn with_base(base: ModelParams, variant: RhsVariant) -> Self {
        Self {
            base,
            variant,
            runs: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn run(
        &mut self,
        label: &str,
        params: &ModelParams,
        init: &InitialData,
        t_end: f64,
        outputs: &[f64],
        options: &RunOptions,
    ) -> Result<Trajectory, Error> {
        let system = Galerkin::with_variant(params.clone(), self.variant)?;
        let state = system.initial_state(init)?;
        self.run_state(label, &system, state, t_end, outputs, options)
    }

    fn run_state(
        &mut self,
        label: &str,
        system: &Galerkin,
        state: GalerkinState,
        t_end: f64,
        outputs: &[f64],
        options: &RunOptions,
    ) -> Result<Trajectory, Error> {
        let options = RunOptions {
            variant: self.variant,
            ..options.clone()
        };
        match run_from(system, state, t_end, outputs, &options) {
            Ok(traj) => {
                self.runs.push(SuiteRun {
                    label: label.to_string(),
                    params: system.params().clone(),
                    traj: traj.clone(),
                });
                Ok(traj)
            }
            Err(abort) => {
                if !abort.partial.is_empty() {
                    self.runs.push(SuiteRun {
                        label: format!("{label} (aborted)"),
                        params: system.params().clone(),
                        traj: abort.partial,
                    });
                }
                Err(abort.error)
            }
        }
    }

    /// Stationary data stays stationary: coefficients and diagnostics over
    /// `t in [0, 10]` with `N = 32`.
    pub fn stationary_preservation(&mut self) -> Vec<CheckResult> {
        let name = "1 stationary preservation";
        let p = params_with(&self.base, 32);
        let start = Instant::now();
        let opts = RunOptions {
            stepping: Stepping::Adaptive { h0: 1e-3, h_max: 0.05 },
            monitors: MonitorSettings::default(),
            variant: self.variant,
        };
        let traj = match self.run("stationary", &p, &stationary(&p), 10.0, &output_grid(10.0, 0.05), &opts) {
            Ok(t) => t,
            Err(e) => return vec![CheckResult::failed_run(name, e)],
        };
        let elapsed = start.elapsed().as_secs_f64();
        let coeff = traj
            .states
            .iter()
            .flat_map(|s| s.alpha.iter().chain(&s.gtilde))
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let first = &traj.records[0];
        let xs = stationary_xi(&p);
        let drift = traj
            .records
            .iter()
            .map(|r| {
                [
                    r.kinetic - first.kinetic,
                    r.internal - first.internal,
                    r.pv - first.pv,
                    r.total_energy - first.total_energy,
                    r.dissipation_rate,
                    r.dissipation_cum,
                    r.energy_residual,
                    r.eta - first.eta,
                    r.chi - first.chi,
                    r.volume - first.volume,
                    r.s_boundary - first.s_boundary,
                    r.pi - xs,
                    r.pi_t,
                    r.xi_min - xs,
                    r.xi_max - xs,
                    r.f_norm,
                    r.m_u,
                ]
                .into_iter()
                .fold(0.0f64, |m, x| m.max(x.abs()))
            })
            .fold(0.0f64, f64::max);
        vec![
            CheckResult::at_most(name, coeff.max(drift), 1e-12, format!("coefficients {coeff:.1e}, diagnostics drift {drift:.1e}")),
            CheckResult::at_most("1 stationary runtime [s]", elapsed, 10.0, format!("{} steps", traj.accepted_steps)),
        ]
    }

    /// Energy residual of `single_mode(k = 4, 0.01)` with `dt = 5e-4` over
    /// `[0, 5]`, and its reduction when `dt` is quartered.
    pub fn energy_identity(&mut self) -> Vec<CheckResult> {
        let p = params_with(&self.base, 32);
        let init = single_mode(&p, 4, 0.01, Target::Velocity);
        let outputs = output_grid(5.0, 0.05);
        let mut residuals = Vec::new();
        for (label, dt) in [("energy dt", 5e-4), ("energy dt/4", 1.25e-4)] {
            let opts = relaxed(Stepping::Fixed { dt }, self.variant);
            match self.run(label, &p, &init, 5.0, &outputs, &opts) {
                Ok(t) => residuals.push(t.records.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max)),
                Err(e) => {
                    return vec![
                        CheckResult::failed_run("2 energy identity", &e),
                        CheckResult::failed_run("2 energy residual dt-convergence", e),
                    ]
                }
            }
        }
        let ratio = residuals[0] / residuals[1].max(f64::MIN_POSITIVE);
        vec![
            CheckResult::at_most("2 energy identity", residuals[0], 1e-8, "max |E + int D - E0|, 1e4 steps"),
            CheckResult::at_least(
                "2 energy residual dt-convergence",
                ratio,
                200.0,
                format!("residual {:.2e} -> {:.2e}", residuals[0], residuals[1]),
            ),
        ]
    }

    /// Small-amplitude modes against the linearized prediction.
    pub fn mode_dissipation(&mut self) -> Vec<CheckResult> {
        let p = params_with(&self.base, 32);
        let mut out = Vec::new();

        // Undamped mode: frequency and amplitude over three periods.
        let lin1 = linearized_prediction(1, &p);
        let period = 2.0 * PI / lin1.omega;
        let samples_per_period = 64.0;
        let ds = period / samples_per_period;
        let t_end = 3.0 * period;
        let outputs = output_grid(t_end, ds);
        let opts = relaxed(Stepping::Fixed { dt: ds / 8.0 }, self.variant);
        let init = single_mode(&p, 1, 1e-4, Target::Velocity);
        match self.run("mode 1", &p, &init, t_end, &outputs, &opts) {
            Ok(traj) => {
                let g: Vec<f64> = traj.states.iter().map(|s| s.gtilde[0]).collect();
                match fit_damped_oscillation(&g, ds) {
                    Some(fit) => {
                        let rel = (fit.omega - lin1.omega).abs() / lin1.omega;
                        out.push(CheckResult::at_most(
                            "3 mode-1 frequency (rel)",
                            rel,
                            1e-3,
                            format!("fit {:.6} vs omega_1 {:.6}", fit.omega, lin1.omega),
                        ));
                        let loss = 1.0 - (-fit.decay * t_end).exp();
                        out.push(CheckResult::at_most(
                            "3 mode-1 amplitude loss, 3 periods",
                            loss,
                            0.01,
                            format!("fitted amplitude decay rate {:.3e}", fit.decay),
                        ));
                    }
                    None => {
                        out.push(CheckResult::new("3 mode-1 frequency (rel)", false, f64::NAN, 1e-3, "no oscillation found"));
                        out.push(CheckResult::new("3 mode-1 amplitude loss, 3 periods", false, f64::NAN, 0.01, "no oscillation found"));
                    }
                }
            }
            Err(e) => {
                out.push(CheckResult::failed_run("3 mode-1 frequency (rel)", &e));
                out.push(CheckResult::failed_run("3 mode-1 amplitude loss, 3 periods", e));
            }
        }

        // Damped mode: energy decay rate mu pi^2 k^2.
        let name = "3 mode-3 decay rate (rel)";
        let lin3 = linearized_prediction(3, &p);
        let expected = p.mu * 9.0 * PI * PI;
        let period = 2.0 * PI / lin3.omega;
        let ds = period / 64.0;
        let t_end = 3.0 * period;
        let opts = relaxed(Stepping::Fixed { dt: ds / 8.0 }, self.variant);
        let init = single_mode(&p, 3, 1e-4, Target::Velocity);
        match self.run("mode 3", &p, &init, t_end, &output_grid(t_end, ds), &opts) {
            Ok(traj) => {
                let g: Vec<f64> = traj.states.iter().map(|s| s.gtilde[2]).collect();
                match fit_damped_oscillation(&g, ds) {
                    Some(fit) => {
                        let rate = 2.0 * fit.decay;
                        out.push(CheckResult::at_most(
                            name,
                            (rate - expected).abs() / expected,
                            0.01,
                            format!("energy decay {rate:.5} vs mu pi^2 9 = {expected:.5}"),
                        ));
                    }
                    None => out.push(CheckResult::new(name, false, f64::NAN, 0.01, "no oscillation found")),
                }
            }
            Err(e) => out.push(CheckResult::failed_run(name, e)),
        }
        out
    }

    /// Boundary relaxation from `pi0 = xi*/2` and `2 xi*`.
    pub fn boundary_bracket(&mut self) -> Vec<CheckResult> {
        let p = params_with(&self.base, 32);
        let xs = stationary_xi(&p);
        let t_end = 50.0 / relaxation_rate(&p);
        let mut out = Vec::new();
        for (label, pi0) in [("0.5 xi*", 0.5 * xs), ("2 xi*", 2.0 * xs)] {
            let name = format!("4 bracket, pi0 = {label}");
            let opts = RunOptions {
                stepping: Stepping::Adaptive {
                    h0: 1e-4,
                    h_max: t_end / 1000.0,
                },
                monitors: MonitorSettings {
                    energy_tol: None,
                    ..MonitorSettings::default()
                },
                variant: self.variant,
            };
            match self.run(&name, &p, &boundary_relax(pi0), t_end, &output_grid(t_end, t_end / 1000.0), &opts) {
                Ok(traj) => {
                    let (lo, hi) = pi_bounds(pi0, &p);
                    let excursion = traj
                        .records
                        .iter()
                        .map(|r| (lo - r.pi).max(r.pi - hi).max(0.0))
                        .fold(0.0, f64::max);
                    out.push(CheckResult::at_most(&name, excursion, p.tol_ode, format!("bracket [{lo}, {hi}]")));
                    let gap = (traj.records.last().unwrap().pi - xs).abs();
                    out.push(CheckResult::at_most(
                        &format!("4 convergence, pi0 = {label}"),
                        gap,
                        1e-6,
                        format!("|pi - xi*| at t = {t_end:.3}"),
                    ));
                }
                Err(e) => out.push(CheckResult::failed_run(&name, e)),
            }
        }
        out
    }

    /// Fast right-hand side against the dense oracle on a random corpus.
    pub fn oracle_equivalence(&mut self) -> Vec<CheckResult> {
        let name = "5 oracle equivalence";
        let mut p = params_with(&self.base, 16);
        p.oversample = 32;
        p.grid = 32 * 16 + 1;
        let system = match Galerkin::with_variant(p.clone(), self.variant) {
            Ok(s) => s,
            Err(e) => return vec![CheckResult::failed_run(name, e)],
        };
        // The projection at the configured oversampling, for the aliasing report.
        let coarse = Galerkin::with_variant(params_with(&self.base, 16), self.variant).ok();
        let corpus = random_corpus(&system, 100, 0x5eed);
        let mut worst = 0.0f64;
        let mut aliasing = 0.0f64;
        for state in &corpus {
            let fast = match system.assemble_rhs(state) {
                Ok(r) => r,
                Err(e) => return vec![CheckResult::failed_run(name, e)],
            };
            let dense = match dense_rhs(&system, state, 8) {
                Ok(r) => r,
                Err(e) => return vec![CheckResult::failed_run(name, e)],
            };
            worst = worst.max(rhs_gap(&fast, &dense));
            if let Some(Ok(r)) = coarse.as_ref().map(|s| s.assemble_rhs(state)) {
                aliasing = aliasing.max(rhs_gap(&r, &dense));
            }
        }
        self.notes.push(format!(
            "pressure projection aliasing on the oracle corpus at oversample {}: max |fast - dense| = {aliasing:.3e}",
            self.base.oversample
        ));
        vec![CheckResult::at_most(name, worst, 1e-8, format!("{} states, N = 16, M = {}", corpus.len(), p.grid))]
    }

    /// Mean velocity and endpoint invariants on every recorded snapshot.
    pub fn snapshot_invariants(&self) -> Vec<CheckResult> {
        let mut mean = 0.0f64;
        let mut endpoint = 0.0f64;
        let mut count = 0usize;
        for run in &self.runs {
            for r in &run.traj.records {
                mean = mean.max(r.mean_v_residual);
                endpoint = endpoint.max(r.endpoint_mismatch);
                count += 1;
            }
        }
        vec![
            CheckResult::at_most("6 mean velocity residual", mean, 1e-12, format!("{count} snapshots, {} runs", self.runs.len())),
            CheckResult::at_most("6 endpoint mismatch", endpoint, 0.0, "xi(0) = xi(1) = pi exactly"),
        ]
    }

    /// L2 error of `N = 8, 16, 32` against `N = 64` on analytic data.
    pub fn self_convergence(&mut self) -> Vec<CheckResult> {
        let t_end = 0.5;
        let opts = relaxed(Stepping::Fixed { dt: 1e-3 }, self.variant);
        let mut finals = Vec::new();
        for n in [8usize, 16, 32, 64] {
            let p = params_with(&self.base, n);
            let init = match mixed_mode(&p, 0.01, 0.6) {
                Ok(i) => i,
                Err(e) => return vec![CheckResult::failed_run("7 self-convergence", e)],
            };
            match self.run(&format!("convergence N = {n}"), &p, &init, t_end, &[t_end], &opts) {
                Ok(t) => finals.push(t.last_state().unwrap().clone()),
                Err(e) => return vec![CheckResult::failed_run("7 self-convergence", e)],
            }
        }
        let reference = finals.last().unwrap();
        let errors: Vec<f64> = finals[..3].iter().map(|s| coefficient_distance(s, reference)).collect();
        let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
        let r1 = errors[0] / errors[1];
        let r2 = errors[1] / errors[2];
        self.notes.push(format!(
            "self-convergence: observed algebraic orders log2(e_N / e_2N) = {:.2}, {:.2}",
            r1.log2(),
            r2.log2()
        ));
        vec![
            CheckResult::new(
                "7 self-convergence monotone",
                decreasing,
                errors[2],
                errors[1],
                format!("L2 errors N=8,16,32: {:.3e}, {:.3e}, {:.3e}", errors[0], errors[1], errors[2]),
            ),
            CheckResult::new(
                "7 spectral decay (ratio growth)",
                r2 > r1 && decreasing,
                r2 / r1,
                1.0,
                format!("error ratios {r1:.2} then {r2:.2}"),
            ),
        ]
    }

    /// Gronwall bounds of the second energy functional on every run.
    pub fn gronwall(&mut self) -> Vec<CheckResult> {
        let mut local = f64::INFINITY;
        let mut global = f64::INFINITY;
        let mut applicable = 0usize;
        for run in &self.runs {
            if run.traj.len() < 2 {
                continue;
            }
            let rep = gronwall_monitor(&run.traj, &run.params, 1e-6);
            local = local.min(rep.local_margin);
            if rep.global_applicable {
                applicable += 1;
                global = global.min(rep.global_margin);
            }
        }
        vec![
            CheckResult::at_least("8 Gronwall local form (margin)", local, -1e-6, format!("{} runs", self.runs.len())),
            CheckResult::at_least(
                "8 Gronwall global form (margin)",
                if applicable == 0 { f64::INFINITY } else { global },
                -1e-6,
                format!("{applicable} runs satisfy the smallness condition"),
            ),
        ]
    }

    /// Twin runs differing by `1e-8` in `alpha_1`.
    pub fn uniqueness_probe(&mut self) -> Vec<CheckResult> {
        let name = "9 twin-run distance / bound";
        let p = params_with(&self.base, 32);
        let system = match Galerkin::with_variant(p.clone(), self.variant) {
            Ok(s) => s,
            Err(e) => return vec![CheckResult::failed_run(name, e)],
        };
        let init = match mixed_mode(&p, 0.02, 0.5) {
            Ok(i) => i,
            Err(e) => return vec![CheckResult::failed_run(name, e)],
        };
        let a = match system.initial_state(&init) {
            Ok(s) => s,
            Err(e) => return vec![CheckResult::failed_run(name, e)],
        };
        let eps = 1e-8;
        let mut b = a.clone();
        b.alpha[0] += eps;
        let opts = relaxed(Stepping::Fixed { dt: 1e-3 }, self.variant);
        let twin = match twin_run_divergence(&system, a, b, 2.0, &output_grid(2.0, 0.01), &opts) {
            Ok(t) => t,
            Err(e) => return vec![CheckResult::failed_run(name, e.error)],
        };
        let k = uniqueness_factor(&twin.a, &twin.b, &p);
        let bound = 10.0 * k * eps;
        let dist = twin.max_distance();
        self.runs.push(SuiteRun {
            label: "twin a".into(),
            params: p.clone(),
            traj: twin.a,
        });
        self.runs.push(SuiteRun {
            label: "twin b".into(),
            params: p,
            traj: twin.b,
        });
        vec![CheckResult::at_most(
            name,
            dist / bound,
            1.0,
            format!("max distance {dist:.3e}, K(T) = {k:.4}, bound {bound:.3e}"),
        )]
    }

    /// Criteria 1 to 9 in order, then the per-run invariants.
    pub fn run_all(&mut self) -> SuiteReport {
        let mut checks = Vec::new();
        checks.extend(self.stationary_preservation());
        checks.extend(self.energy_identity());
        checks.extend(self.mode_dissipation());
        checks.extend(self.boundary_bracket());
        checks.extend(self.oracle_equivalence());
        checks.extend(self.self_convergence());
        checks.extend(self.uniqueness_probe());
        checks.extend(self.snapshot_invariants());
        checks.extend(self.gronwall());
        checks.sort_by_key(|c| c.name.split_whitespace().next().and_then(|n| n.parse::<u32>().ok()).unwrap_or(99));
        SuiteReport {
            checks,
            notes: self.notes(),
        }
    }

    fn notes(&self) -> Vec<String> {
        let mut notes = self.notes.clone();
        let xs = stationary_xi(&self.base);
        let thr = self.base.smallness_threshold(xs);
        let small_runs = self
            .runs
            .iter()
            .filter(|r| {
                let xi_plus = r.traj.records.iter().map(|x| x.xi_max).fold(0.0, f64::max);
                r.params.mu <= r.params.smallness_threshold(xi_plus)
            })
            .count();
        notes.push(format!(
            "smallness mu <= a gamma / xi_+^(gamma+1): mu = {}, threshold at xi_+ = xi* is {thr:.4e} ({}); holds on {small_runs} of {} runs",
            self.base.mu,
            if self.base.mu <= thr { "holds" } else { "does not hold" },
            self.runs.len()
        ));
        let mut hyp = 0;
        let mut violated = Vec::new();
        for run in &self.runs {
            let rep = xi_bound_monitor(&run.traj, &run.params);
            if !rep.floor_ok {
                notes.push(format!("{}: xi dropped below the floor", run.label));
            }
            if rep.hypothesis_holds {
                hyp += 1;
                if !rep.bound_holds {
                    violated.push(run.label.clone());
                }
            }
        }
        notes.push(format!(
            "upper bound on xi: hypothesis ||(1-T) xi_t|| <= P/(2 mu) holds on {hyp} runs; bound violated on [{}]",
            violated.join(", ")
        ));
        if !self.base.cutoff_applies() {
            notes.push("gamma <= 3: lower-bound cut-off does not apply; xi_min is empirical only".into());
        }
        notes
    }
}

fn rhs_gap(fast: &crate::galerkin::Rhs, dense: &crate::oracle::DenseRhs) -> f64 {
    fast.dalpha
        .iter()
        .zip(&dense.dalpha)
        .chain(fast.dgtilde.iter().zip(&dense.dgtilde))
        .map(|(a, b)| (a - b).abs())
        .fold((fast.dpi - dense.dpi).abs(), f64::max)
}

/// Mutation checks: the flipped pressure pairing must fail the energy
/// identity, the disabled projector must fail the mode-1 checks.
pub fn mutation_sensitivity(base: &ModelParams) -> Vec<CheckResult> {
    let mut flipped = Suite::with_base(base.clone(), RhsVariant::FlippedPressure);
    let energy = flipped.energy_identity();
    let caught_energy = energy.iter().any(|c| !c.passed);
    let mut untruncated = Suite::with_base(base.clone(), RhsVariant::NoTruncation);
    let modes = untruncated.mode_dissipation();
    let caught_modes = modes.iter().any(|c| !c.passed);
    let summarize = |cs: &[CheckResult]| {
        cs.iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect::<Vec<_>>()
            .join(", ")
    };
    vec![
        CheckResult::new(
            "10 mutation: flipped pressure",
            caught_energy,
            energy.iter().filter(|c| !c.passed).count() as f64,
            1.0,
            format!("failing: {}", summarize(&energy)),
        ),
        CheckResult::new(
            "10 mutation: no truncation",
            caught_modes,
            modes.iter().filter(|c| !c.passed).count() as f64,
            1.0,
            format!("failing: {}", summarize(&modes)),
        ),
    ]
}

/// The full suite including mutation checks.
pub fn run_suite(base: &ModelParams) -> SuiteReport {
    let mut suite = Suite::with_base(base.clone(), RhsVariant::Faithful);
    let mut report = suite.run_all();
    report.checks.extend(mutation_sensitivity(base));
    report
}

/// `||v_a - v_b|| + ||xi_a - xi_b||` from coefficients, padding the shorter
/// expansion with zeros. The affine parts cancel when the boundary values
/// agree, which holds for runs started from the same data.
pub fn coefficient_distance(a: &GalerkinState, b: &GalerkinState) -> f64 {
    let n = a.modes().max(b.modes());
    let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let dv: f64 = (0..n).map(|k| (get(&a.alpha, k) - get(&b.alpha, k)).powi(2)).sum();
    let dx: f64 = (0..n).map(|k| (get(&a.gtilde, k) - get(&b.gtilde, k)).powi(2)).sum();
    let dpi = a.pi() - b.pi();
    dv.sqrt() + (dx + dpi * dpi).sqrt()
}

/// Random states with coefficients drawn from `N(0, 0.01)` (standard
/// deviation 0.1), boundary value uniform in `[0.8, 1.25]`, rejected until
/// `min xi >= 0.5` on a fine grid.
pub fn random_corpus(system: &Galerkin, count: usize, seed: u64) -> Vec<GalerkinState> {
    let n = system.params().modes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.1).expect("valid distribution");
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let alpha: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let gtilde: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let pi = rng.random_range(0.8..1.25);
        let state = system.state_from_coeffs(alpha, gtilde, pi);
        if system.reconstruct_xi(&state, 16 * n + 1).min() >= 0.5 {
            out.push(state);
        }
    }
    out
}
