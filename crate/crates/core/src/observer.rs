//! Step-by-step super-twisting sliding-mode observers.
//!
//! Two structures share the same cascade of gated super-twisting pairs
//! `(x̂_i, x̃_{i+1})` driven by `e_i`:
//!
//! * [`Variant::Baseline`] closes the chain with `(x̂_n, θ̃)`; the fault is read
//!   off algebraically as `b(x̃)^-1 (θ̃ - a(x̃))`.
//! * [`Variant::Proposed`] injects `a(x̃) + f̃` into the last pair and adds a
//!   further pair `(f̂, θ̃)` driven by `e_f = f̃ - f̂`, so the fault estimate is
//!   itself the output of a super-twisting stage.
//!
//! Flat state layout (pair order, 0-based):
//! `[x̂1, x̃2, x̂2, x̃3, .., x̂_{n-1}, x̃_n, x̂_n, tail..]` with tail `[f̃, f̂, θ̃]`
//! (proposed) or `[θ̃]` (baseline).

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fde::VectorField;
use crate::fraccalc::{gamma, FracOrder};
use crate::plant::{PlantField, PlantModel};
use crate::scalar::{sign, sqrt_sign, Real};

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Below this `|b|` fault recovery is refused.
pub const SINGULAR_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Fault as an observer state, filtered through an extra stage.
    Proposed,
    /// Fault recovered algebraically from the last stage.
    Baseline,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Proposed => "proposed",
            Variant::Baseline => "baseline",
        }
    }

    /// Number of `(lambda, alpha)` gain pairs for an `n`-state plant.
    pub fn gain_count(self, n: usize) -> usize {
        match self {
            Variant::Proposed => n + 1,
            Variant::Baseline => n,
        }
    }

    /// Number of gates `E_i`.
    pub fn gate_count(self, n: usize) -> usize {
        match self {
            Variant::Proposed => n,
            Variant::Baseline => n - 1,
        }
    }

    /// Length of the flat observer state.
    pub fn state_len(self, n: usize) -> usize {
        match self {
            Variant::Proposed => 2 * n + 2,
            Variant::Baseline => 2 * n,
        }
    }

    pub fn labels(self, n: usize) -> Vec<String> {
        let mut out = Vec::with_capacity(self.state_len(n));
        for i in 1..n {
            out.push(format!("xhat{i}"));
            out.push(format!("xtilde{}", i + 1));
        }
        out.push(format!("xhat{n}"));
        match self {
            Variant::Proposed => {
                out.extend(["f_tilde", "f_hat", "theta_tilde"].map(String::from));
            }
            Variant::Baseline => out.push("theta_tilde".into()),
        }
        out
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Variant::Proposed),
            "baseline" => Ok(Variant::Baseline),
            other => Err(Error::config("observer.variant", format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Re-evaluated from the current errors at every step.
    #[default]
    Instantaneous,
    /// Once a gate opens it stays open.
    Latching,
}

/// Super-twisting gains `lambda_i`, `alpha_i` and the gate threshold `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + DeserializeOwned")]
pub struct ObserverGains<T = f64> {
    pub lambdas: Vec<T>,
    pub alphas: Vec<T>,
    pub epsilon: T,
}

impl<T: Real> ObserverGains<T> {
    pub fn new(lambdas: Vec<T>, alphas: Vec<T>, epsilon: T) -> Self {
        ObserverGains {
            lambdas,
            alphas,
            epsilon,
        }
    }

    /// Every gain equal to `g`.
    pub fn uniform(g: T, count: usize, epsilon: T) -> Self {
        Self::new(vec![g; count], vec![g; count], epsilon)
    }

    /// Multiplies every lambda and alpha by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        ObserverGains {
            lambdas: self.lambdas.iter().map(|&l| l * factor).collect(),
            alphas: self.alphas.iter().map(|&a| a * factor).collect(),
            epsilon: self.epsilon,
        }
    }

    /// First `count` gain pairs.
    pub fn truncated(&self, count: usize) -> Self {
        ObserverGains {
            lambdas: self.lambdas.iter().take(count).copied().collect(),
            alphas: self.alphas.iter().take(count).copied().collect(),
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self, variant: Variant, n: usize) -> Result<()> {
        let need = variant.gain_count(n);
        if self.lambdas.len() != need || self.alphas.len() != need {
            return Err(Error::Dimension(format!(
                "{} observer on a {n}-state plant needs {need} lambdas and alphas, got {} and {}",
                variant.as_str(),
                self.lambdas.len(),
                self.alphas.len()
            )));
        }
        for (name, gains) in [("observer.lambdas", &self.lambdas), ("observer.alphas", &self.alphas)] {
            if let Some((i, g)) = gains.iter().enumerate().find(|(_, g)| !(**g > T::zero()) || !g.is_finite()) {
                return Err(Error::config(name, format!("gain {} must be positive, got {g}", i + 1)));
            }
        }
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(Error::config(
                "observer.epsilon",
                format!("gate threshold must be positive, got {}", self.epsilon),
            ));
        }
        Ok(())
    }
}

/// Everything needed to build an observer besides the plant.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSpec<T = f64> {
    pub variant: Variant,
    pub gains: ObserverGains<T>,
    pub gate_mode: GateMode,
    /// Initial flat state; zeros when `None`.
    pub initial: Option<Vec<T>>,
}

impl<T: Real> ObserverSpec<T> {
    pub fn new(variant: Variant, gains: ObserverGains<T>) -> Self {
        ObserverSpec {
            variant,
            gains,
            gate_mode: GateMode::Instantaneous,
            initial: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Dimension("plant has no states".into()));
        }
        if self.variant == Variant::Baseline && n < 2 {
            return Err(Error::Dimension("baseline observer needs n >= 2".into()));
        }
        self.gains.validate(self.variant, n)?;
        if let Some(init) = &self.initial {
            if init.len() != self.variant.state_len(n) {
                return Err(Error::Dimension(format!(
                    "observer initial state needs {} values, got {}",
                    self.variant.state_len(n),
                    init.len()
                )));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self, n: usize) -> Vec<T> {
        self.initial
            .clone()
            .unwrap_or_else(|| vec![T::zero(); self.variant.state_len(n)])
    }
}

/// Observer internal state. `x_tilde[0]` is `x̃_2`; `x̃_1` is the measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState<T = f64> {
    pub x_hat: Vec<T>,
    pub x_tilde: Vec<T>,
    pub f_tilde: T,
    pub f_hat: T,
    pub theta_tilde: T,
}

impl<T: Real> ObserverState<T> {
    pub fn zeros(n: usize) -> Self {
        ObserverState {
            x_hat: vec![T::zero(); n],
            x_tilde: vec![T::zero(); n.saturating_sub(1)],
            f_tilde: T::zero(),
            f_hat: T::zero(),
            theta_tilde: T::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.x_hat.len()
    }

    /// `e_1 = y - x̂_1`, `e_i = x̃_i - x̂_i`.
    pub fn errors(&self, y: T) -> Vec<T> {
        let mut e = Vec::with_capacity(self.n());
        e.push(y - self.x_hat[0]);
        e.extend(self.x_tilde.iter().zip(&self.x_hat[1..]).map(|(t, h)| *t - *h));
        e
    }

    /// `e_f = f̃ - f̂`.
    pub fn fault_error(&self) -> T {
        self.f_tilde - self.f_hat
    }

    /// `(y, x̃_2, .., x̃_n)`.
    pub fn x_tilde_full(&self, y: T) -> Vec<T> {
        let mut v = Vec::with_capacity(self.n());
        v.push(y);
        v.extend_from_slice(&self.x_tilde);
        v
    }

    pub fn to_flat(&self, variant: Variant) -> Vec<T> {
        let n = self.n();
        let mut out = Vec::with_capacity(variant.state_len(n));
        for i in 0..n - 1 {
            out.push(self.x_hat[i]);
            out.push(self.x_tilde[i]);
        }
        out.push(self.x_hat[n - 1]);
        match variant {
            Variant::Proposed => out.extend([self.f_tilde, self.f_hat, self.theta_tilde]),
            Variant::Baseline => out.push(self.theta_tilde),
        }
        out
    }

    pub fn from_flat(variant: Variant, n: usize, flat: &[T]) -> Result<Self> {
        if flat.len() != variant.state_len(n) {
            return Err(Error::Dimension(format!(
                "flat observer state needs {} values, got {}",
                variant.state_len(n),
                flat.len()
            )));
        }
        let layout = Layout { n };
        let mut s = Self::zeros(n);
        for i in 0..n {
            s.x_hat[i] = flat[layout.x_hat(i)];
        }
        for i in 1..n {
            s.x_tilde[i - 1] = flat[layout.x_tilde(i)];
        }
        match variant {
            Variant::Proposed => {
                s.f_tilde = flat[layout.tail()];
                s.f_hat = flat[layout.tail() + 1];
                s.theta_tilde = flat[layout.tail() + 2];
            }
            Variant::Baseline => s.theta_tilde = flat[layout.tail()],
        }
        Ok(s)
    }
}

#[derive(Clone, Copy)]
struct Layout {
    n: usize,
}

impl Layout {
    /// Position of `x̂_{i+1}` (0-based `i`).
    #[inline]
    fn x_hat(self, i: usize) -> usize {
        2 * i
    }

    /// Position of `x̃_{i+1}` (0-based `i >= 1`).
    #[inline]
    fn x_tilde(self, i: usize) -> usize {
        2 * i - 1
    }

    #[inline]
    fn tail(self) -> usize {
        2 * self.n - 1
    }
}

/// Gates `E_1..E_m`; `E_i` open iff `|e_j| <= epsilon` for all `j <= i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateVector(pub Vec<bool>);

impl GateVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `E_i` (1-based); `E_0` is always open.
    pub fn get(&self, i: usize) -> bool {
        i == 0 || self.0[i - 1]
    }

    pub fn is_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[0] || !w[1])
    }

    pub fn all_open(&self) -> bool {
        self.0.iter().all(|&g| g)
    }
}

/// Evaluates the gate conjunction over `errors`.
pub fn gates<T: Real>(errors: &[T], epsilon: T) -> GateVector {
    let mut open = true;
    GateVector(
        errors
            .iter()
            .map(|e| {
                open = open && e.abs() <= epsilon;
                open
            })
            .collect(),
    )
}

/// Applies the configured [`GateMode`] over a sequence of evaluations.
#[derive(Debug, Clone)]
pub struct GateTracker {
    mode: GateMode,
    latched: Vec<bool>,
}

impl GateTracker {
    pub fn new(mode: GateMode, count: usize) -> Self {
        GateTracker {
            mode,
            latched: vec![false; count],
        }
    }

    pub fn update<T: Real>(&mut self, errors: &[T], epsilon: T) -> GateVector {
        let errors = &errors[..self.latched.len()];
        match self.mode {
            GateMode::Instantaneous => gates(errors, epsilon),
            GateMode::Latching => {
                // Gate i latches when |e_i| <= epsilon while every lower gate is latched.
                let mut prefix = true;
                for (l, e) in self.latched.iter_mut().zip(errors) {
                    *l = *l || (prefix && e.abs() <= epsilon);
                    prefix = *l;
                }
                GateVector(self.latched.clone())
            }
        }
    }
}

/// Tuning of one fractional super-twisting loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FstaParams<T = f64> {
    pub lambda: T,
    pub alpha_gain: T,
    /// Documented bound `|rho(t)| <= L`; not used in the computation.
    pub perturbation_bound: T,
}

impl<T: Real> FstaParams<T> {
    pub fn new(lambda: T, alpha_gain: T) -> Result<Self> {
        if !(lambda > T::zero()) || !(alpha_gain > T::zero()) {
            return Err(Error::domain("FstaParams", "gains must be strictly positive"));
        }
        Ok(FstaParams {
            lambda,
            alpha_gain,
            perturbation_bound: T::zero(),
        })
    }
}

/// Unperturbed super-twisting right-hand side:
/// `(xi2 - lambda |xi1|^0.5 sign(xi1), -alpha sign(xi1))`.
pub fn fsta_rhs<T: Real>(xi1: T, xi2: T, p: &FstaParams<T>) -> (T, T) {
    (xi2 - p.lambda * sqrt_sign(xi1), -p.alpha_gain * sign(xi1))
}

/// Finite convergence time `T_s = (Γ(alpha + 1) v_s)^(1 / alpha)`.
pub fn sta_convergence_time<T: Real>(alpha: FracOrder<T>, v_s: T) -> Result<T> {
    if !(v_s > T::zero()) || !v_s.is_finite() {
        return Err(Error::domain(
            "sta_convergence_time",
            format!("integer-order time must be positive, got {v_s}"),
        ));
    }
    let a = alpha.value();
    Ok((gamma(a + T::one())? * v_s).powf(T::one() / a))
}

fn check_gain<T: Real>(b: T) -> Result<()> {
    if !(b.abs() >= T::lit(SINGULAR_GAIN)) {
        return Err(Error::SingularGain(b.to_f64_lossy()));
    }
    Ok(())
}

/// Recovers `f` from an additive estimate `D̂ = b f`: `f̂ = D̂ / b(x̂)`.
pub fn recover_fault_general_b<T: Real>(b_at_xhat: T, d_hat: T) -> Result<T> {
    check_gain(b_at_xhat)?;
    Ok(d_hat / b_at_xhat)
}

/// Baseline fault readout `b(x̃)^-1 (θ̃ - a(x̃))`, with `x̃ = (y, x̃_2, .., x̃_n)`.
pub fn baseline_fault_readout<T: Real>(x_tilde: &[T], theta_tilde: T, plant: &PlantModel<T>) -> Result<T> {
    if x_tilde.len() != plant.n() {
        return Err(Error::Dimension(format!(
            "x̃ has {} components, plant has {}",
            x_tilde.len(),
            plant.n()
        )));
    }
    let b = plant.gain(x_tilde);
    check_gain(b)?;
    Ok((theta_tilde - plant.drift(x_tilde)) / b)
}

// Shared cascade: pairs (x̂_i, x̃_{i+1}) for i = 1..n-1.
fn cascade_rhs<T: Real>(
    layout: Layout,
    flat: &[T],
    y: T,
    gains: &ObserverGains<T>,
    gates: &GateVector,
    out: &mut [T],
) {
    let n = layout.n;
    for i in 0..n - 1 {
        let gate = if gates.get(i) { T::one() } else { T::zero() };
        let e = current_error(layout, flat, y, i);
        let next = flat[layout.x_tilde(i + 1)];
        out[layout.x_hat(i)] = gate * (next + gains.lambdas[i] * sqrt_sign(e));
        out[layout.x_tilde(i + 1)] = gate * gains.alphas[i] * sign(e);
    }
}

#[inline]
fn current_error<T: Real>(layout: Layout, flat: &[T], y: T, i: usize) -> T {
    let measured = if i == 0 { y } else { flat[layout.x_tilde(i)] };
    measured - flat[layout.x_hat(i)]
}

fn flat_errors<T: Real>(layout: Layout, flat: &[T], y: T, out: &mut Vec<T>) {
    out.clear();
    out.extend((0..layout.n).map(|i| current_error(layout, flat, y, i)));
}

fn proposed_flat<T: Real>(
    n: usize,
    flat: &[T],
    y: T,
    gains: &ObserverGains<T>,
    drift_at_tilde: T,
    gates: &GateVector,
    out: &mut [T],
) {
    let layout = Layout { n };
    cascade_rhs(layout, flat, y, gains, gates, out);
    let last = n - 1;
    let g_last = if gates.get(last) { T::one() } else { T::zero() };
    let e_n = current_error(layout, flat, y, last);
    let tail = layout.tail();
    let (f_tilde, f_hat, theta) = (flat[tail], flat[tail + 1], flat[tail + 2]);
    out[layout.x_hat(last)] = g_last * (drift_at_tilde + f_tilde + gains.lambdas[last] * sqrt_sign(e_n));
    out[tail] = g_last * gains.alphas[last] * sign(e_n);

    let g_f = if gates.get(n) { T::one() } else { T::zero() };
    let e_f = f_tilde - f_hat;
    out[tail + 1] = g_f * (theta + gains.lambdas[n] * sqrt_sign(e_f));
    out[tail + 2] = g_f * gains.alphas[n] * sign(e_f);
}

fn baseline_flat<T: Real>(
    n: usize,
    flat: &[T],
    y: T,
    gains: &ObserverGains<T>,
    gates: &GateVector,
    out: &mut [T],
) {
    let layout = Layout { n };
    cascade_rhs(layout, flat, y, gains, gates, out);
    let last = n - 1;
    let g_last = if gates.get(last) { T::one() } else { T::zero() };
    let e_n = current_error(layout, flat, y, last);
    let tail = layout.tail();
    out[layout.x_hat(last)] = g_last * (flat[tail] + gains.lambdas[last] * sqrt_sign(e_n));
    out[tail] = g_last * gains.alphas[last] * sign(e_n);
}

fn check_gates(gates: &GateVector, variant: Variant, n: usize) -> Result<()> {
    if gates.len() != variant.gate_count(n) {
        return Err(Error::Dimension(format!(
            "{} observer needs {} gates, got {}",
            variant.as_str(),
            variant.gate_count(n),
            gates.len()
        )));
    }
    Ok(())
}

/// Derivative of the proposed observer state; `a(.)` is evaluated at
/// `(y, x̃_2, .., x̃_n)`.
pub fn proposed_observer_rhs<T: Real>(
    s: &ObserverState<T>,
    y: T,
    gains: &ObserverGains<T>,
    plant: &PlantModel<T>,
    gates: &GateVector,
) -> Result<ObserverState<T>> {
    let n = plant.n();
    if s.n() != n {
        return Err(Error::Dimension(format!("observer has {} states, plant {n}", s.n())));
    }
    gains.validate(Variant::Proposed, n)?;
    check_gates(gates, Variant::Proposed, n)?;
    let flat = s.to_flat(Variant::Proposed);
    let mut out = vec![T::zero(); flat.len()];
    let drift = plant.drift(&s.x_tilde_full(y));
    proposed_flat(n, &flat, y, gains, drift, gates, &mut out);
    ObserverState::from_flat(Variant::Proposed, n, &out)
}

/// Derivative of the baseline observer state. `f̃`/`f̂` are unused and stay zero.
pub fn baseline_observer_rhs<T: Real>(
    s: &ObserverState<T>,
    y: T,
    gains: &ObserverGains<T>,
    gates: &GateVector,
) -> Result<ObserverState<T>> {
    let n = s.n();
    gains.validate(Variant::Baseline, n)?;
    check_gates(gates, Variant::Baseline, n)?;
    let flat = s.to_flat(Variant::Baseline);
    let mut out = vec![T::zero(); flat.len()];
    baseline_flat(n, &flat, y, gains, gates, &mut out);
    ObserverState::from_flat(Variant::Baseline, n, &out)
}

/// Where the observer reads its output measurement from.
#[derive(Debug, Clone)]
pub enum Measurement<T> {
    /// Recorded `x_1` samples, one per grid row.
    Recorded(Vec<T>),
    /// Supplied by the caller through [`ObserverField::eval_with_output`].
    External,
}

/// Observer right-hand side as a [`VectorField`].
#[derive(Debug, Clone)]
pub struct ObserverField<T = f64> {
    spec: ObserverSpec<T>,
    plant: PlantModel<T>,
    measurement: Measurement<T>,
    tracker: GateTracker,
    errors: Vec<T>,
    tilde: Vec<T>,
}

impl<T: Real> ObserverField<T> {
    pub fn new(spec: ObserverSpec<T>, plant: PlantModel<T>, measurement: Measurement<T>) -> Result<Self> {
        let n = plant.n();
        spec.validate(n)?;
        let tracker = GateTracker::new(spec.gate_mode, spec.variant.gate_count(n));
        Ok(ObserverField {
            spec,
            plant,
            measurement,
            tracker,
            errors: Vec::with_capacity(n),
            tilde: vec![T::zero(); n],
        })
    }

    pub fn spec(&self) -> &ObserverSpec<T> {
        &self.spec
    }

    /// Evaluates with an explicit output sample `y`.
    pub fn eval_with_output(&mut self, y: T, x: &[T], dx: &mut [T]) {
        let n = self.plant.n();
        let layout = Layout { n };
        flat_errors(layout, x, y, &mut self.errors);
        let g = self.tracker.update(&self.errors, self.spec.gains.epsilon);
        match self.spec.variant {
            Variant::Proposed => {
                self.tilde[0] = y;
                for i in 1..n {
                    self.tilde[i] = x[layout.x_tilde(i)];
                }
                let drift = self.plant.drift(&self.tilde);
                proposed_flat(n, x, y, &self.spec.gains, drift, &g, dx);
            }
            Variant::Baseline => baseline_flat(n, x, y, &self.spec.gains, &g, dx),
        }
    }
}

impl<T: Real> VectorField<T> for ObserverField<T> {
    fn dim(&self) -> usize {
        self.spec.variant.state_len(self.plant.n())
    }

    fn has_discontinuities(&self) -> bool {
        true
    }

    fn eval(&mut self, step: usize, _t: T, x: &[T], dx: &mut [T]) {
        let y = match &self.measurement {
            Measurement::Recorded(ys) => ys[step - 1],
            Measurement::External => panic!("external measurement requires eval_with_output"),
        };
        self.eval_with_output(y, x, dx);
    }
}

/// Plant and observer as one state vector; only `x_1` crosses over.
#[derive(Debug, Clone)]
pub struct AugmentedField<T = f64> {
    plant: PlantField<T>,
    observer: ObserverField<T>,
}

impl<T: Real> AugmentedField<T> {
    pub fn new(plant: PlantField<T>, observer: ObserverField<T>) -> Self {
        AugmentedField { plant, observer }
    }
}

impl<T: Real> VectorField<T> for AugmentedField<T> {
    fn dim(&self) -> usize {
        self.plant.dim() + self.observer.dim()
    }

    fn has_discontinuities(&self) -> bool {
        true
    }

    fn eval(&mut self, step: usize, t: T, x: &[T], dx: &mut [T]) {
        let n = self.plant.dim();
        let (xp, xo) = x.split_at(n);
        let (dp, dobs) = dx.split_at_mut(n);
        self.plant.eval(step, t, xp, dp);
        self.observer.eval_with_output(xp[0], xo, dobs);
    }
}

/// Gate history of an observer run, replayed from its states and outputs.
pub fn replay_gates<T: Real>(
    spec: &ObserverSpec<T>,
    n: usize,
    rows: impl Iterator<Item = (T, Vec<T>)>,
) -> Vec<GateVector> {
    let layout = Layout { n };
    let mut tracker = GateTracker::new(spec.gate_mode, spec.variant.gate_count(n));
    let mut errs = Vec::with_capacity(n);
    rows.map(|(y, flat)| {
        flat_errors(layout, &flat, y, &mut errs);
        tracker.update(&errs, spec.gains.epsilon)
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half_gains(count: usize) -> ObserverGains<f64> {
        ObserverGains::uniform(0.5, count, 0.01)
    }

    #[test]
    fn fsta_values() {
        let p = FstaParams::new(2.0, 3.0).unwrap();
        assert_eq!(fsta_rhs(0.0, 0.0, &p), (0.0, 0.0));
        assert_eq!(fsta_rhs(1.0, 0.0, &p), (-2.0, -3.0));
        assert!(FstaParams::new(0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn fsta_is_odd(x1 in -1e3_f64..1e3, x2 in -1e3_f64..1e3, l in 1e-3_f64..1e2, a in 1e-3_f64..1e2) {
            let p = FstaParams::new(l, a).unwrap();
            let (u, v) = fsta_rhs(x1, x2, &p);
            let (um, vm) = fsta_rhs(-x1, -x2, &p);
            prop_assert_eq!(um, -u);
            prop_assert_eq!(vm, -v);
        }

        #[test]
        fn gates_are_monotone(errs in proptest::collection::vec(-0.05_f64..0.05, 1..8), eps in 1e-3_f64..0.05) {
            let g = gates(&errs, eps);
            prop_assert!(g.is_monotone());
            for i in 1..=errs.len() {
                prop_assert_eq!(g.get(i), errs[..i].iter().all(|e| e.abs() <= eps));
            }
        }
    }

    #[test]
    fn gate_examples() {
        let eps = 0.01;
        assert!(gates(&[0.0, 0.0, 0.0], eps).all_open());
        assert_eq!(gates(&[0.02, 0.0, 0.0], eps).0, vec![false; 3]);
        assert_eq!(gates(&[eps / 2.0, 2.0 * eps, 0.0], eps).0, vec![true, false, false]);
    }

    #[test]
    fn latching_keeps_gates_open() {
        let mut t = GateTracker::new(GateMode::Latching, 2);
        assert_eq!(t.update(&[0.0, 1.0], 0.1).0, vec![true, false]);
        assert_eq!(t.update(&[1.0, 0.0], 0.1).0, vec![true, true]);
        assert_eq!(t.update(&[1.0, 1.0], 0.1).0, vec![true, true]);
        let mut inst = GateTracker::new(GateMode::Instantaneous, 2);
        inst.update(&[0.0, 0.0], 0.1);
        assert_eq!(inst.update(&[1.0, 0.0], 0.1).0, vec![false, false]);
    }

    #[test]
    fn flat_layout_round_trip() {
        let s = ObserverState {
            x_hat: vec![1.0, 2.0, 3.0],
            x_tilde: vec![4.0, 5.0],
            f_tilde: 6.0,
            f_hat: 7.0,
            theta_tilde: 8.0,
        };
        let flat = s.to_flat(Variant::Proposed);
        assert_eq!(flat, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0, 7.0, 8.0]);
        assert_eq!(ObserverState::from_flat(Variant::Proposed, 3, &flat).unwrap(), s);
        assert_eq!(
            Variant::Proposed.labels(3),
            ["xhat1", "xtilde2", "xhat2", "xtilde3", "xhat3", "f_tilde", "f_hat", "theta_tilde"]
        );
        assert_eq!(Variant::Baseline.labels(3).len(), 6);
        assert!(ObserverState::<f64>::from_flat(Variant::Baseline, 3, &flat).is_err());
    }

    #[test]
    fn gain_validation() {
        assert!(half_gains(4).validate(Variant::Proposed, 3).is_ok());
        assert!(half_gains(3).validate(Variant::Proposed, 3).is_err());
        assert!(half_gains(3).validate(Variant::Baseline, 3).is_ok());
        let mut g = half_gains(4);
        g.alphas[2] = 0.0;
        assert!(g.validate(Variant::Proposed, 3).is_err());
        let mut g = half_gains(4);
        g.epsilon = 0.0;
        assert!(g.validate(Variant::Proposed, 3).is_err());
    }

    #[test]
    fn proposed_fixed_point() {
        let plant = PlantModel::<f64>::arneodo_paper();
        let x = [0.3, -0.4, 0.9];
        let f = 0.25;
        let s = ObserverState {
            x_hat: x.to_vec(),
            x_tilde: x[1..].to_vec(),
            f_tilde: f,
            f_hat: f,
            theta_tilde: 0.0,
        };
        assert!(s.errors(x[0]).iter().all(|&e| e == 0.0));
        let g = gates(&s.errors(x[0]), 0.01);
        let d = proposed_observer_rhs(&s, x[0], &half_gains(4), &plant, &g).unwrap();
        assert_eq!(d.x_hat[0], x[1]);
        assert_eq!(d.x_hat[1], x[2]);
        assert_eq!(d.x_hat[2], plant.drift(&x) + f);
        assert_eq!(d.x_tilde, vec![0.0, 0.0]);
        assert_eq!((d.f_tilde, d.f_hat, d.theta_tilde), (0.0, 0.0, 0.0));
    }

    #[test]
    fn baseline_fixed_point() {
        let plant = PlantModel::<f64>::arneodo_paper();
        let x = [0.3, -0.4, 0.9];
        let theta = plant.drift(&x) + 0.25;
        let s = ObserverState {
            x_hat: x.to_vec(),
            x_tilde: x[1..].to_vec(),
            f_tilde: 0.0,
            f_hat: 0.0,
            theta_tilde: theta,
        };
        let g = gates(&s.errors(x[0])[..2], 0.01);
        let d = baseline_observer_rhs(&s, x[0], &half_gains(3), &g).unwrap();
        assert_eq!(d.x_hat, vec![x[1], x[2], theta]);
        assert_eq!(d.theta_tilde, 0.0);
    }

    #[test]
    fn closed_gates_freeze_all_but_first_pair() {
        let plant = PlantModel::<f64>::arneodo_paper();
        let mut s = ObserverState::zeros(3);
        s.x_tilde = vec![0.7, -0.2];
        s.f_tilde = 0.3;
        s.theta_tilde = 1.1;
        let closed = GateVector(vec![false; 3]);
        let d = proposed_observer_rhs(&s, 1.0, &half_gains(4), &plant, &closed).unwrap();
        assert_eq!(d.x_hat[0], 0.7 + 0.5);
        assert_eq!(d.x_tilde[0], 0.5);
        let rest = d.to_flat(Variant::Proposed);
        assert!(rest[2..].iter().all(|&v| v == 0.0));

        let closed = GateVector(vec![false; 2]);
        let d = baseline_observer_rhs(&s, 1.0, &half_gains(3), &closed).unwrap();
        assert!(d.to_flat(Variant::Baseline)[2..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn proposed_hand_evaluation() {
        // n = 3, all gains 0.5, e1 = 1, every gate forced open.
        let plant = PlantModel::<f64>::genesio_tesi_paper();
        let s = ObserverState {
            x_hat: vec![0.0, 0.1, 0.2],
            x_tilde: vec![0.5, -0.3],
            f_tilde: 0.4,
            f_hat: 0.15,
            theta_tilde: -0.2,
        };
        let y = 1.0;
        let open = GateVector(vec![true; 3]);
        let d = proposed_observer_rhs(&s, y, &half_gains(4), &plant, &open).unwrap();
        // e = (1, 0.4, -0.5), e_f = 0.25
        // a(1, 0.5, -0.3) = -1 - 0.55 + 0.132 + 1 = -0.418
        let a = -1.0 - 1.1 * 0.5 - 0.44 * -0.3 + 1.0;
        assert!((a - -0.418_f64).abs() < 1e-12);
        let expect = [
            0.5 + 0.5 * 1.0,
            0.5 * 1.0,
            -0.3 + 0.5 * 0.4_f64.sqrt(),
            0.5,
            a + 0.4 - 0.5 * 0.5_f64.sqrt(),
            -0.5,
            -0.2 + 0.5 * 0.5,
            0.5,
        ];
        for (got, want) in d.to_flat(Variant::Proposed).iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn baseline_hand_evaluation() {
        let s = ObserverState {
            x_hat: vec![0.0, 0.1, 0.2],
            x_tilde: vec![0.5, -0.3],
            f_tilde: 0.0,
            f_hat: 0.0,
            theta_tilde: -0.2,
        };
        let open = GateVector(vec![true; 2]);
        let d = baseline_observer_rhs(&s, 1.0, &half_gains(3), &open).unwrap();
        let expect = [
            1.0,
            0.5,
            -0.3 + 0.5 * 0.4_f64.sqrt(),
            0.5,
            -0.2 - 0.5 * 0.5_f64.sqrt(),
            -0.5,
        ];
        for (got, want) in d.to_flat(Variant::Baseline).iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn prefix_agreement() {
        let plant = PlantModel::<f64>::arneodo_paper();
        let s = ObserverState {
            x_hat: vec![0.2, -0.1, 0.4],
            x_tilde: vec![0.205, -0.3],
            f_tilde: 0.1,
            f_hat: 0.0,
            theta_tilde: 0.3,
        };
        let y = 0.199;
        let g = gates(&s.errors(y), 0.01);
        let dp = proposed_observer_rhs(&s, y, &half_gains(4), &plant, &g).unwrap();
        let gb = GateVector(g.0[..2].to_vec());
        let db = baseline_observer_rhs(&s, y, &half_gains(3), &gb).unwrap();
        let (fp, fb) = (dp.to_flat(Variant::Proposed), db.to_flat(Variant::Baseline));
        assert_eq!(fp[..4], fb[..4]);
    }

    #[test]
    fn rhs_dimension_errors() {
        let plant = PlantModel::<f64>::arneodo_paper();
        let s = ObserverState::zeros(3);
        let g = GateVector(vec![true; 3]);
        assert!(proposed_observer_rhs(&s, 0.0, &half_gains(3), &plant, &g).is_err());
        assert!(proposed_observer_rhs(&ObserverState::zeros(2), 0.0, &half_gains(4), &plant, &g).is_err());
        assert!(baseline_observer_rhs(&s, 0.0, &half_gains(3), &g).is_err());
    }

    #[test]
    fn fault_readouts() {
        let plant = PlantModel::<f64>::arneodo_paper();
        let xt = [1.0, 1.0, 1.0];
        assert_eq!(baseline_fault_readout(&xt, plant.drift(&xt), &plant).unwrap(), 0.0);
        assert!((baseline_fault_readout(&xt, plant.drift(&xt) + 0.4, &plant).unwrap() - 0.4).abs() < 1e-15);
        assert!((baseline_fault_readout(&xt, 1.0, &plant).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(recover_fault_general_b(1.0, 0.3).unwrap(), 0.3);
        assert_eq!(recover_fault_general_b(2.0, 0.8).unwrap(), 0.4);
        assert!(matches!(recover_fault_general_b(1e-12, 1.0), Err(Error::SingularGain(_))));
    }

    #[test]
    fn convergence_time_values() {
        assert!((sta_convergence_time(FracOrder::unit(), 2.5).unwrap() - 2.5_f64).abs() < 1e-14);
        let g15 = std::f64::consts::PI.sqrt() / 2.0;
        let t = sta_convergence_time(FracOrder::new(0.5).unwrap(), 1.0).unwrap();
        assert!((t - g15 * g15).abs() < 1e-13);
        assert!((t - (std::f64::consts::PI.sqrt() / 2.0).powi(2)).abs() < 1e-13);
        let tiny = sta_convergence_time(FracOrder::new(0.9).unwrap(), 1e-12).unwrap();
        assert!(tiny < 1e-12);
        assert!(sta_convergence_time(FracOrder::new(0.9).unwrap(), 0.0).is_err());
    }
}
