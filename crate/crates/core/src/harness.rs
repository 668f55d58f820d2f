//! Experiment configuration, plant/observer co-simulation and metric reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fde::{integrate, integrate_labeled, Memory, SimGrid, Trace};
use crate::fraccalc::FracOrder;
use crate::metrics::{chattering_index, rmse_from, settle_time_after, sup_error_from};
use crate::observer::{
    baseline_fault_readout, recover_fault_general_b, replay_gates, AugmentedField, GateMode, GateVector,
    Measurement, ObserverField, ObserverGains, ObserverSpec, ObserverState, Variant, DEFAULT_EPSILON,
};
use crate::plant::{
    assemble_field, FaultSignal, NoiseSpec, PlantModel, ARNEODO_PRESET, GENESIO_TESI_PRESET,
};
use crate::scalar::Real;

/// Settle tolerance as a multiple of the gate threshold.
pub const SETTLE_TOL_FACTOR: f64 = 5.0;
pub const DEFAULT_DWELL: f64 = 5.0;
pub const DEFAULT_STRIDE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<FracOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub gate_mode: GateMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryKeyword {
    /// Full memory up to 50 s, 5000 steps beyond.
    Auto,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemorySetting {
    Steps(usize),
    Keyword(MemoryKeyword),
}

impl Default for MemorySetting {
    fn default() -> Self {
        MemorySetting::Keyword(MemoryKeyword::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    pub t_end: f64,
    #[serde(default)]
    pub memory: MemorySetting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    DEFAULT_STRIDE
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            stride: DEFAULT_STRIDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    /// Defaults to `5 * epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle_tol: Option<f64>,
    #[serde(default = "default_dwell")]
    pub dwell: f64,
}

fn default_dwell() -> f64 {
    DEFAULT_DWELL
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            settle_tol: None,
            dwell: DEFAULT_DWELL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Candidate first, reference second.
    pub variants: Vec<Variant>,
}

/// Every experimental parameter of one run, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub plant: PlantConfig,
    pub fault: FaultSignal<f64>,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub observer: ObserverConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    /// Arneodo benchmark with cosine fault and state noise, 50 s at full memory.
    pub fn example1() -> Self {
        ExperimentConfig {
            plant: PlantConfig {
                preset: ARNEODO_PRESET.into(),
                alpha: None,
                betas: None,
                x0: None,
            },
            fault: FaultSignal::cosine(0.4, 1.0),
            noise: NoiseConfig { variance: 1.5 },
            observer: ObserverConfig {
                variant: Some(Variant::Proposed),
                lambdas: vec![1.0, 1.0, 10.0, 100.0],
                alphas: vec![10.0, 200.0, 50.0, 100.0],
                epsilon: DEFAULT_EPSILON,
                gate_mode: GateMode::Instantaneous,
                initial: None,
            },
            grid: GridConfig {
                h: 1e-3,
                t_end: 50.0,
                memory: MemorySetting::Keyword(MemoryKeyword::Full),
            },
            output: OutputConfig::default(),
            metrics: MetricsConfig::default(),
            compare: None,
            seed: 42,
        }
    }

    /// Genesio–Tesi benchmark, sine fault, all gains 0.5, proposed vs baseline.
    pub fn example2() -> Self {
        ExperimentConfig {
            plant: PlantConfig {
                preset: GENESIO_TESI_PRESET.into(),
                alpha: None,
                betas: None,
                x0: None,
            },
            fault: FaultSignal::sine(0.06, 1.0),
            noise: NoiseConfig::default(),
            observer: ObserverConfig {
                variant: Some(Variant::Proposed),
                lambdas: vec![0.5; 4],
                alphas: vec![0.5; 4],
                epsilon: DEFAULT_EPSILON,
                gate_mode: GateMode::Instantaneous,
                initial: None,
            },
            grid: GridConfig {
                h: 1e-3,
                t_end: 50.0,
                memory: MemorySetting::Keyword(MemoryKeyword::Full),
            },
            output: OutputConfig::default(),
            metrics: MetricsConfig::default(),
            compare: Some(CompareConfig {
                variants: vec![Variant::Proposed, Variant::Baseline],
            }),
            seed: 42,
        }
    }

    /// Bundled experiment by name (`example1`/`arneodo-paper`, `example2`/`genesio-tesi-paper`).
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "example1" | ARNEODO_PRESET => Ok(Self::example1()),
            "example2" | GENESIO_TESI_PRESET => Ok(Self::example2()),
            other => Err(Error::config("preset", format!("unknown preset `{other}`"))),
        }
    }

    fn build_plant(&self) -> Result<PlantModel<f64>> {
        let p = &self.plant;
        let base = PlantModel::<f64>::preset(&p.preset)?;
        let alpha = p.alpha.unwrap_or(base.alpha());
        if alpha.is_unit() {
            return Err(Error::config("plant.alpha", "order must lie in (0, 1)"));
        }
        let betas: Vec<f64> = match &p.betas {
            Some(b) => b.clone(),
            None => base.params().iter().map(|(_, v)| *v).collect(),
        };
        let x0 = p.x0.clone().unwrap_or_else(|| base.x0().to_vec());
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("plant.x0", "initial state must be finite"));
        }
        match p.preset.as_str() {
            ARNEODO_PRESET => PlantModel::arneodo(alpha, &betas, &x0),
            _ => PlantModel::genesio_tesi(alpha, &betas, &x0),
        }
    }

    fn build_grid(&self) -> Result<SimGrid<f64>> {
        let g = &self.grid;
        match g.memory {
            MemorySetting::Keyword(MemoryKeyword::Auto) => SimGrid::with_default_memory(g.h, g.t_end),
            MemorySetting::Keyword(MemoryKeyword::Full) => SimGrid::new(g.h, g.t_end, Memory::Full),
            MemorySetting::Steps(l) => SimGrid::new(g.h, g.t_end, Memory::Steps(l)),
        }
    }

    fn observer_spec(&self, variant: Variant) -> ObserverSpec<f64> {
        let o = &self.observer;
        ObserverSpec {
            variant,
            gains: ObserverGains::new(o.lambdas.clone(), o.alphas.clone(), o.epsilon),
            gate_mode: o.gate_mode,
            initial: o.initial.clone(),
        }
    }

    /// Validates and builds the typed experiment. The variant defaults to the
    /// configured one; a run with no variant configured is rejected.
    pub fn resolve(&self) -> Result<Experiment<f64>> {
        let variant = self
            .observer
            .variant
            .ok_or_else(|| Error::config("observer.variant", "missing"))?;
        self.resolve_as(variant)
    }

    /// Like [`resolve`](Self::resolve) with the variant given explicitly.
    /// Gain lists longer than the variant needs are truncated.
    pub fn resolve_as(&self, variant: Variant) -> Result<Experiment<f64>> {
        let plant = self.build_plant()?;
        let grid = self.build_grid()?;
        self.fault.validate()?;
        let noise = NoiseSpec::new(self.noise.variance, self.seed)?;
        if self.output.stride < 1 {
            return Err(Error::config("output.stride", "stride must be at least 1"));
        }
        let n = plant.n();
        let mut observer = self.observer_spec(variant);
        let need = variant.gain_count(n);
        if observer.gains.lambdas.len() > need && observer.gains.alphas.len() > need {
            observer.gains = observer.gains.truncated(need);
        }
        observer.validate(n).map_err(|e| match e {
            Error::Dimension(msg) => Error::config("observer", msg),
            other => other,
        })?;
        let settle_tol = self
            .metrics
            .settle_tol
            .unwrap_or(SETTLE_TOL_FACTOR * self.observer.epsilon);
        if !(settle_tol > 0.0) || !(self.metrics.dwell > 0.0) {
            return Err(Error::config("metrics", "settle_tol and dwell must be positive"));
        }
        Ok(Experiment {
            plant,
            fault: self.fault.clone(),
            noise,
            observer,
            grid,
            settle_tol,
            dwell: self.metrics.dwell,
        })
    }

    /// The two variants of a comparison run.
    pub fn compare_variants(&self) -> Result<[Variant; 2]> {
        let c = self
            .compare
            .as_ref()
            .ok_or_else(|| Error::config("compare.variants", "missing"))?;
        match c.variants.as_slice() {
            [a, b] => Ok([*a, *b]),
            other => Err(Error::config(
                "compare.variants",
                format!("expected two variants, got {}", other.len()),
            )),
        }
    }
}

/// A validated experiment ready to simulate.
#[derive(Debug, Clone)]
pub struct Experiment<T = f64> {
    pub plant: PlantModel<T>,
    pub fault: FaultSignal<T>,
    pub noise: NoiseSpec<T>,
    pub observer: ObserverSpec<T>,
    pub grid: SimGrid<T>,
    pub settle_tol: T,
    pub dwell: T,
}

impl<T: Real> Experiment<T> {
    pub fn new(plant: PlantModel<T>, fault: FaultSignal<T>, observer: ObserverSpec<T>, grid: SimGrid<T>) -> Self {
        let eps = observer.gains.epsilon;
        Experiment {
            plant,
            fault,
            noise: NoiseSpec::off(),
            observer,
            grid,
            settle_tol: T::lit(SETTLE_TOL_FACTOR) * eps,
            dwell: T::lit(DEFAULT_DWELL),
        }
    }

    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        let n = self.plant.n();
        let mut observer = self.observer.clone();
        observer.variant = variant;
        let need = variant.gain_count(n);
        if observer.gains.lambdas.len() < need {
            return Err(Error::Dimension(format!("{} observer needs {need} gains", variant.as_str())));
        }
        observer.gains = observer.gains.truncated(need);
        if observer.initial.as_ref().is_some_and(|i| i.len() != variant.state_len(n)) {
            observer.initial = None;
        }
        observer.validate(n)?;
        Ok(Experiment {
            observer,
            ..self.clone()
        })
    }

    fn augmented_labels(&self) -> Vec<String> {
        let n = self.plant.n();
        (1..=n)
            .map(|i| format!("x{i}"))
            .chain(self.observer.variant.labels(n))
            .collect()
    }

    fn augmented_x0(&self) -> Vec<T> {
        let n = self.plant.n();
        let mut x0 = self.plant.x0().to_vec();
        x0.extend(self.observer.initial_state(n));
        x0
    }

    /// Plant and observer integrated together as one augmented system.
    pub fn run(&self) -> Result<ObserverRun<T>> {
        self.observer.validate(self.plant.n())?;
        let plant_field = assemble_field(&self.plant, &self.fault, &self.noise)?;
        let obs = ObserverField::new(self.observer.clone(), self.plant.clone(), Measurement::External)?;
        let mut field = AugmentedField::new(plant_field, obs);
        let mut trace = integrate_labeled(
            &mut field,
            self.plant.alpha(),
            &self.grid,
            &self.augmented_x0(),
            self.augmented_labels(),
        )?;
        trace.set_seed(self.noise.enabled().then_some(self.noise.seed));
        ObserverRun::from_trace(self, trace)
    }

    /// Plant trajectory alone.
    pub fn run_plant(&self) -> Result<Trace<T>> {
        let mut field = assemble_field(&self.plant, &self.fault, &self.noise)?;
        let mut trace = integrate(&mut field, self.plant.alpha(), &self.grid, self.plant.x0())?;
        trace.set_seed(self.noise.enabled().then_some(self.noise.seed));
        Ok(trace)
    }

    /// Observer driven by a recorded plant trajectory; it reads `x_1` only.
    pub fn run_on_plant_trace(&self, plant_trace: &Trace<T>) -> Result<ObserverRun<T>> {
        let n = self.plant.n();
        if plant_trace.n_channels() != n || plant_trace.n_rows() != self.grid.n_steps() + 1 {
            return Err(Error::Dimension("plant trace does not match the experiment".into()));
        }
        let ys = plant_trace.channel(0);
        let obs_trace = self.run_observer_on_output(ys)?;
        let width = n + obs_trace.n_channels();
        let mut values = Vec::with_capacity(plant_trace.n_rows() * width);
        for (p, o) in plant_trace.rows().zip(obs_trace.rows()) {
            values.extend_from_slice(p);
            values.extend_from_slice(o);
        }
        let mut trace = Trace::from_rows(self.grid, self.augmented_labels(), values)?;
        trace.set_seed(plant_trace.seed());
        for k in [plant_trace.diverged_at(), obs_trace.diverged_at()].into_iter().flatten() {
            trace.mark_diverged(k);
        }
        ObserverRun::from_trace(self, trace)
    }

    /// Integrates the observer alone on a sampled output sequence.
    pub fn run_observer_on_output(&self, ys: Vec<T>) -> Result<Trace<T>> {
        let n = self.plant.n();
        if ys.len() != self.grid.n_steps() + 1 {
            return Err(Error::Dimension("output samples do not cover the grid".into()));
        }
        let x0 = self.observer.initial_state(n);
        let mut field = ObserverField::new(self.observer.clone(), self.plant.clone(), Measurement::Recorded(ys))?;
        integrate_labeled(
            &mut field,
            self.plant.alpha(),
            &self.grid,
            &x0,
            self.observer.variant.labels(n),
        )
    }
}

/// Settle time and post-settle RMSE of one error channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMetrics<T = f64> {
    pub name: String,
    pub settle_time: Option<T>,
    pub rmse_post_settle: Option<T>,
}

/// Summary metrics of one observer run. Everything is `None` for a diverged run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<T = f64> {
    pub variant: Variant,
    pub diverged: bool,
    /// `e_1..e_n`, plus `e_f` for the proposed observer.
    pub channels: Vec<ChannelMetrics<T>>,
    /// Latest channel settle time; start of the fault-metric window.
    pub settled_at: Option<T>,
    pub fault_rmse_post_settle: Option<T>,
    pub chattering_index: Option<T>,
    pub sup_error_post_settle: Option<T>,
}

impl<T: Real> MetricsReport<T> {
    pub fn channel(&self, name: &str) -> Option<&ChannelMetrics<T>> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn settle(&self, name: &str) -> Option<T> {
        self.channel(name).and_then(|c| c.settle_time)
    }

    /// Flat `key = value` pairs; absent metrics print as `never`/`na`.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let fmt = |v: Option<T>, none: &str| v.map_or(none.to_string(), |x| format!("{x}"));
        let mut kv = vec![
            ("variant".to_string(), self.variant.as_str().to_string()),
            ("diverged".to_string(), self.diverged.to_string()),
        ];
        for c in &self.channels {
            kv.push((format!("settle_time.{}", c.name), fmt(c.settle_time, "never")));
            kv.push((format!("rmse_post_settle.{}", c.name), fmt(c.rmse_post_settle, "na")));
        }
        kv.push(("settled_at".into(), fmt(self.settled_at, "never")));
        kv.push(("fault_rmse_post_settle".into(), fmt(self.fault_rmse_post_settle, "na")));
        kv.push(("chattering_index".into(), fmt(self.chattering_index, "na")));
        kv.push(("sup_error_post_settle".into(), fmt(self.sup_error_post_settle, "na")));
        kv
    }
}

/// Trace of one observer run with its derived channels and metrics.
#[derive(Debug, Clone)]
pub struct ObserverRun<T = f64> {
    pub variant: Variant,
    pub n: usize,
    /// Plant channels `x1..xn` followed by the flat observer state.
    pub trace: Trace<T>,
    /// `E_i` actually applied at each row.
    pub gates: Vec<GateVector>,
    /// `e_1..e_n` (and `e_f`), channel-major.
    pub errors: Vec<Vec<T>>,
    pub error_labels: Vec<String>,
    pub fault_true: Vec<T>,
    pub fault_estimate: Vec<T>,
    pub report: MetricsReport<T>,
}

impl<T: Real> ObserverRun<T> {
    fn from_trace(exp: &Experiment<T>, trace: Trace<T>) -> Result<Self> {
        let n = exp.plant.n();
        let variant = exp.observer.variant;
        let rows = trace.n_rows();
        let states: Vec<ObserverState<T>> = trace
            .rows()
            .map(|r| ObserverState::from_flat(variant, n, &r[n..]))
            .collect::<Result<_>>()?;
        let ys: Vec<T> = trace.rows().map(|r| r[0]).collect();
        let gates = replay_gates(
            &exp.observer,
            n,
            trace.rows().map(|r| (r[0], r[n..].to_vec())),
        );

        let mut error_labels: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
        let mut errors = vec![Vec::with_capacity(rows); n];
        for (s, y) in states.iter().zip(&ys) {
            for (ch, e) in errors.iter_mut().zip(s.errors(*y)) {
                ch.push(e);
            }
        }
        if variant == Variant::Proposed {
            error_labels.push("e_f".into());
            errors.push(states.iter().map(|s| s.fault_error()).collect());
        }

        let fault_true: Vec<T> = (0..rows).map(|k| exp.fault.value(exp.grid.time(k))).collect();
        let fault_estimate: Vec<T> = states
            .iter()
            .zip(&ys)
            .map(|(s, y)| match variant {
                Variant::Proposed if exp.plant.has_unit_gain() => s.f_hat,
                Variant::Proposed => recover_fault_general_b(exp.plant.gain(&s.x_hat), s.f_hat).unwrap_or(T::nan()),
                Variant::Baseline => {
                    baseline_fault_readout(&s.x_tilde_full(*y), s.theta_tilde, &exp.plant).unwrap_or(T::nan())
                }
            })
            .collect();

        let report = compute_report(exp, &trace, &gates, &error_labels, &errors, &fault_estimate, &fault_true)?;
        Ok(ObserverRun {
            variant,
            n,
            trace,
            gates,
            errors,
            error_labels,
            fault_true,
            fault_estimate,
            report,
        })
    }

    pub fn error(&self, label: &str) -> Option<&[T]> {
        self.error_labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.errors[i].as_slice())
    }

    /// Fault metrics over `t >= from_t`: (RMSE, chattering index, sup error).
    pub fn fault_metrics_from(&self, from_t: T) -> Result<(T, T, T)> {
        let g = self.trace.grid();
        Ok((
            rmse_from(&self.fault_estimate, &self.fault_true, g, from_t)?,
            chattering_index(&self.fault_estimate, &self.fault_true, g, from_t)?,
            sup_error_from(&self.fault_estimate, &self.fault_true, g, from_t)?,
        ))
    }
}

fn compute_report<T: Real>(
    exp: &Experiment<T>,
    trace: &Trace<T>,
    gates: &[GateVector],
    labels: &[String],
    errors: &[Vec<T>],
    estimate: &[T],
    truth: &[T],
) -> Result<MetricsReport<T>> {
    let variant = exp.observer.variant;
    if trace.is_diverged() {
        return Ok(MetricsReport {
            variant,
            diverged: true,
            channels: labels
                .iter()
                .map(|l| ChannelMetrics {
                    name: l.clone(),
                    settle_time: None,
                    rmse_post_settle: None,
                })
                .collect(),
            settled_at: None,
            fault_rmse_post_settle: None,
            chattering_index: None,
            sup_error_post_settle: None,
        });
    }
    let grid = &exp.grid;
    let zeros = vec![T::zero(); trace.n_rows()];
    let mut channels = Vec::with_capacity(labels.len());
    for (stage, (label, ch)) in labels.iter().zip(errors).enumerate() {
        // A stage only runs once its enabling gate E_{stage} has opened; before
        // that its error sits frozen and would count as trivially settled.
        let Some(active) = gates.iter().position(|g| g.get(stage)) else {
            channels.push(ChannelMetrics {
                name: label.clone(),
                settle_time: None,
                rmse_post_settle: None,
            });
            continue;
        };
        let settle = settle_time_after(ch, grid, exp.settle_tol, exp.dwell, active)?;
        let rmse = settle.map(|t| rmse_from(ch, &zeros, grid, t)).transpose()?;
        channels.push(ChannelMetrics {
            name: label.clone(),
            settle_time: settle,
            rmse_post_settle: rmse,
        });
    }
    let settled_at = channels
        .iter()
        .map(|c| c.settle_time)
        .try_fold(T::zero(), |acc, s| s.map(|t| acc.max(t)));
    let window = settled_at.filter(|&t| grid.index_at(t) < grid.n_steps());
    let (rmse, chat, sup) = match window {
        Some(t) => (
            Some(rmse_from(estimate, truth, grid, t)?),
            Some(chattering_index(estimate, truth, grid, t)?),
            Some(sup_error_from(estimate, truth, grid, t)?),
        ),
        None => (None, None, None),
    };
    Ok(MetricsReport {
        variant,
        diverged: false,
        channels,
        settled_at,
        fault_rmse_post_settle: rmse,
        chattering_index: chat,
        sup_error_post_settle: sup,
    })
}

/// Paired comparison of two observers on one recorded plant run.
#[derive(Debug, Clone)]
pub struct Comparison<T = f64> {
    /// Candidate first, reference second.
    pub runs: [ObserverRun<T>; 2],
    /// Common window start: the later of the two settle times.
    pub window_start: Option<T>,
    pub chattering: [Option<T>; 2],
    pub sup_error: [Option<T>; 2],
    pub candidate_wins_chattering: bool,
    pub candidate_wins_sup_error: bool,
}

fn strictly_better<T: Real>(cand: Option<T>, reference: Option<T>) -> bool {
    match (cand, reference) {
        (Some(c), Some(r)) => c < r,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Runs both variants on the same plant trajectory (same noise realisation)
/// and compares fault chattering and post-settle sup error over a common window.
pub fn compare_variants<T: Real>(exp: &Experiment<T>, variants: [Variant; 2]) -> Result<Comparison<T>> {
    let cand = exp.with_variant(variants[0])?;
    let reference = exp.with_variant(variants[1])?;
    let plant_trace = exp.run_plant()?;
    let (ra, rb) = std::thread::scope(|s| {
        let ha = s.spawn(|| cand.run_on_plant_trace(&plant_trace));
        let hb = s.spawn(|| reference.run_on_plant_trace(&plant_trace));
        (
            ha.join().expect("observer thread panicked"),
            hb.join().expect("observer thread panicked"),
        )
    });
    let runs = [ra?, rb?];
    let window_start = match (runs[0].report.settled_at, runs[1].report.settled_at) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (Some(a), None) | (None, Some(a)) => Some(a),
        (None, None) => None,
    }
    .filter(|&t| exp.grid.index_at(t) < exp.grid.n_steps());

    let mut chattering = [None, None];
    let mut sup_error = [None, None];
    if let Some(t0) = window_start {
        for (i, run) in runs.iter().enumerate() {
            if run.report.diverged || run.report.settled_at.is_none() {
                continue;
            }
            let (_, c, s) = run.fault_metrics_from(t0)?;
            chattering[i] = Some(c);
            sup_error[i] = Some(s);
        }
    }
    Ok(Comparison {
        candidate_wins_chattering: strictly_better(chattering[0], chattering[1]),
        candidate_wins_sup_error: strictly_better(sup_error[0], sup_error[1]),
        runs,
        window_start,
        chattering,
        sup_error,
    })
}

/// Resolves a config and runs its observer co-simulated with the plant.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ObserverRun<f64>> {
    cfg.resolve()?.run()
}

/// Resolves a comparison config and runs both variants.
pub fn compare_observers(cfg: &ExperimentConfig) -> Result<Comparison<f64>> {
    let variants = cfg.compare_variants()?;
    let exp = cfg.resolve_as(variants[0])?;
    compare_variants(&exp, variants)
}
