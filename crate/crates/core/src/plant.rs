//! Observable canonical-form plants `D^alpha x_i = x_{i+1}`,
//! `D^alpha x_n = a(x) + b(x) f(t)`, the two chaotic benchmarks, fault
//! signals and the state-noise stream.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fde::VectorField;
use crate::fraccalc::FracOrder;
use crate::scalar::Real;

pub type StateFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

pub const ARNEODO_PRESET: &str = "arneodo-paper";
pub const GENESIO_TESI_PRESET: &str = "genesio-tesi-paper";

pub const ARNEODO_ALPHA: f64 = 0.97;
pub const ARNEODO_BETAS: [f64; 4] = [-5.5, 3.5, 0.8, -1.0];
pub const ARNEODO_X0: [f64; 3] = [-0.2, 0.5, 0.2];

pub const GENESIO_TESI_ALPHA: f64 = 0.9;
pub const GENESIO_TESI_BETAS: [f64; 4] = [1.0, 1.1, 0.44, 1.0];
/// Not published with the benchmark; a point inside the attractor's basin.
pub const GENESIO_TESI_X0: [f64; 3] = [-0.1, 0.5, 0.2];

/// Plant in observable canonical form. The integrator chain is implied;
/// only the drift `a(x)` and input gain `b(x)` are model specific.
#[derive(Clone)]
pub struct PlantModel<T = f64> {
    name: String,
    alpha: FracOrder<T>,
    params: Vec<(String, T)>,
    x0: Vec<T>,
    drift: StateFn<T>,
    gain: StateFn<T>,
    unit_gain: bool,
}

impl<T: fmt::Debug> fmt::Debug for PlantModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlantModel")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("params", &self.params)
            .field("x0", &self.x0)
            .field("unit_gain", &self.unit_gain)
            .finish()
    }
}

fn betas4<T: Real>(betas: &[T]) -> Result<[T; 4]> {
    betas
        .try_into()
        .map_err(|_| Error::config("plant.betas", format!("expected 4 entries, got {}", betas.len())))
}

fn state3<T: Real>(x0: &[T]) -> Result<Vec<T>> {
    if x0.len() != 3 {
        return Err(Error::config("plant.x0", format!("expected 3 entries, got {}", x0.len())));
    }
    Ok(x0.to_vec())
}

fn beta_params<T: Real>(b: [T; 4]) -> Vec<(String, T)> {
    b.iter()
        .enumerate()
        .map(|(i, v)| (format!("beta{}", i + 1), *v))
        .collect()
}

impl<T: Real> PlantModel<T> {
    /// Arneodo system: `a(x) = -b1 x1 - b2 x2 - b3 x3 + b4 x1^3`, `b = 1`.
    pub fn arneodo(alpha: FracOrder<T>, betas: &[T], x0: &[T]) -> Result<Self> {
        let b = betas4(betas)?;
        let drift: StateFn<T> =
            Arc::new(move |x: &[T]| -b[0] * x[0] - b[1] * x[1] - b[2] * x[2] + b[3] * x[0].powi(3));
        Ok(Self::with_unit_gain("arneodo", alpha, beta_params(b), state3(x0)?, drift))
    }

    /// Genesio–Tesi system: `a(x) = -b1 x1 - b2 x2 - b3 x3 + b4 x1^2`, `b = 1`.
    pub fn genesio_tesi(alpha: FracOrder<T>, betas: &[T], x0: &[T]) -> Result<Self> {
        let b = betas4(betas)?;
        let drift: StateFn<T> =
            Arc::new(move |x: &[T]| -b[0] * x[0] - b[1] * x[1] - b[2] * x[2] + b[3] * x[0].powi(2));
        Ok(Self::with_unit_gain("genesio-tesi", alpha, beta_params(b), state3(x0)?, drift))
    }

    pub fn arneodo_paper() -> Self {
        let c = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<_>>();
        Self::arneodo(FracOrder::new(T::lit(ARNEODO_ALPHA)).expect("valid order"), &c(&ARNEODO_BETAS), &c(&ARNEODO_X0))
            .expect("preset is valid")
    }

    pub fn genesio_tesi_paper() -> Self {
        let c = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<_>>();
        Self::genesio_tesi(
            FracOrder::new(T::lit(GENESIO_TESI_ALPHA)).expect("valid order"),
            &c(&GENESIO_TESI_BETAS),
            &c(&GENESIO_TESI_X0),
        )
        .expect("preset is valid")
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            ARNEODO_PRESET => Ok(Self::arneodo_paper()),
            GENESIO_TESI_PRESET => Ok(Self::genesio_tesi_paper()),
            other => Err(Error::config("plant.preset", format!("unknown preset `{other}`"))),
        }
    }

    /// General form with a state-dependent input gain `b(x)`.
    pub fn custom(
        name: impl Into<String>,
        alpha: FracOrder<T>,
        x0: Vec<T>,
        drift: StateFn<T>,
        gain: StateFn<T>,
    ) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::config("plant.x0", "state dimension must be at least 1"));
        }
        Ok(PlantModel {
            name: name.into(),
            alpha,
            params: Vec::new(),
            x0,
            drift,
            gain,
            unit_gain: false,
        })
    }

    fn with_unit_gain(
        name: &str,
        alpha: FracOrder<T>,
        params: Vec<(String, T)>,
        x0: Vec<T>,
        drift: StateFn<T>,
    ) -> Self {
        PlantModel {
            name: name.to_string(),
            alpha,
            params,
            x0,
            drift,
            gain: Arc::new(|_: &[T]| T::one()),
            unit_gain: true,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// State dimension `n`.
    pub fn n(&self) -> usize {
        self.x0.len()
    }

    pub fn alpha(&self) -> FracOrder<T> {
        self.alpha
    }

    pub fn params(&self) -> &[(String, T)] {
        &self.params
    }

    pub fn x0(&self) -> &[T] {
        &self.x0
    }

    pub fn has_unit_gain(&self) -> bool {
        self.unit_gain
    }

    pub fn drift(&self, x: &[T]) -> T {
        (self.drift)(x)
    }

    pub fn gain(&self, x: &[T]) -> T {
        (self.gain)(x)
    }

    /// Copy with a different initial state.
    pub fn with_x0(&self, x0: Vec<T>) -> Result<Self> {
        if x0.len() != self.n() {
            return Err(Error::config(
                "plant.x0",
                format!("expected {} entries, got {}", self.n(), x0.len()),
            ));
        }
        Ok(PlantModel { x0, ..self.clone() })
    }

    /// Copy with a different order.
    pub fn with_alpha(&self, alpha: FracOrder<T>) -> Self {
        PlantModel {
            alpha,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
#[serde(bound = "T: Real + Serialize + DeserializeOwned")]
pub enum FaultKind<T = f64> {
    Cosine,
    Sine,
    Step,
    /// `amplitude * (t - onset)`.
    Ramp,
    /// Zero-order hold of `samples` spaced `dt` apart from the onset, scaled by amplitude.
    Custom { dt: T, samples: Vec<T> },
}

/// Additive fault entering the last state equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + DeserializeOwned")]
pub struct FaultSignal<T = f64> {
    #[serde(flatten)]
    pub kind: FaultKind<T>,
    pub amplitude: T,
    /// Angular frequency in rad/s (sinusoids only).
    #[serde(default = "one")]
    pub frequency: T,
    #[serde(default)]
    pub onset: T,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> FaultSignal<T> {
    pub fn none() -> Self {
        FaultSignal {
            kind: FaultKind::Step,
            amplitude: T::zero(),
            frequency: T::one(),
            onset: T::zero(),
        }
    }

    pub fn cosine(amplitude: T, frequency: T) -> Self {
        FaultSignal {
            kind: FaultKind::Cosine,
            amplitude,
            frequency,
            onset: T::zero(),
        }
    }

    pub fn sine(amplitude: T, frequency: T) -> Self {
        FaultSignal {
            kind: FaultKind::Sine,
            amplitude,
            frequency,
            onset: T::zero(),
        }
    }

    pub fn step(amplitude: T, onset: T) -> Self {
        FaultSignal {
            kind: FaultKind::Step,
            amplitude,
            frequency: T::one(),
            onset,
        }
    }

    pub fn ramp(slope: T, onset: T) -> Self {
        FaultSignal {
            kind: FaultKind::Ramp,
            amplitude: slope,
            frequency: T::one(),
            onset,
        }
    }

    pub fn custom(dt: T, samples: Vec<T>, onset: T) -> Result<Self> {
        let f = FaultSignal {
            kind: FaultKind::Custom { dt, samples },
            amplitude: T::one(),
            frequency: T::one(),
            onset,
        };
        f.validate()?;
        Ok(f)
    }

    /// Checks the boundedness requirements.
    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.frequency.is_finite() || !self.onset.is_finite() {
            return Err(Error::config("fault", "amplitude, frequency and onset must be finite"));
        }
        if self.onset < T::zero() {
            return Err(Error::config("fault.onset", "onset must be non-negative"));
        }
        if let FaultKind::Custom { dt, samples } = &self.kind {
            if !(*dt > T::zero()) || !dt.is_finite() {
                return Err(Error::config("fault.dt", "sample spacing must be positive"));
            }
            if samples.is_empty() {
                return Err(Error::config("fault.samples", "no samples"));
            }
            if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
                return Err(Error::config("fault.samples", format!("sample {i} is not finite")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == T::zero()
    }

    /// `f(t)`; zero before the onset.
    pub fn value(&self, t: T) -> T {
        if t < self.onset {
            return T::zero();
        }
        let a = self.amplitude;
        match &self.kind {
            FaultKind::Cosine => a * (self.frequency * t).cos(),
            FaultKind::Sine => a * (self.frequency * t).sin(),
            FaultKind::Step => a,
            FaultKind::Ramp => a * (t - self.onset),
            FaultKind::Custom { dt, samples } => {
                let idx = ((t - self.onset) / *dt).floor().to_usize().unwrap_or(0);
                a * samples[idx.min(samples.len() - 1)]
            }
        }
    }
}

/// Free-function form of [`FaultSignal::value`].
pub fn fault_value<T: Real>(f: &FaultSignal<T>, t: T) -> T {
    f.value(t)
}

/// Additive white Gaussian state noise on the last equation: one draw per
/// grid step, held over the step, no step-size scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + DeserializeOwned")]
pub struct NoiseSpec<T = f64> {
    pub variance: T,
    #[serde(default)]
    pub seed: u64,
}

impl<T: Real> NoiseSpec<T> {
    pub fn off() -> Self {
        NoiseSpec {
            variance: T::zero(),
            seed: 0,
        }
    }

    pub fn new(variance: T, seed: u64) -> Result<Self> {
        let spec = NoiseSpec { variance, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= T::zero()) || !self.variance.is_finite() {
            return Err(Error::config(
                "noise.variance",
                format!("variance must be finite and >= 0, got {}", self.variance),
            ));
        }
        Ok(())
    }

    pub fn enabled(&self) -> bool {
        self.variance > T::zero()
    }
}

/// Seeded noise draws indexed by step; re-reading a step returns the cached draw.
#[derive(Debug, Clone)]
pub struct NoiseStream<T = f64> {
    rng: ChaCha8Rng,
    dist: Option<Normal<f64>>,
    drawn: Vec<T>,
}

impl<T: Real> NoiseStream<T> {
    pub fn new(spec: &NoiseSpec<T>) -> Self {
        let dist = spec
            .enabled()
            .then(|| Normal::new(0.0, spec.variance.to_f64_lossy().sqrt()).expect("valid sigma"));
        NoiseStream {
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            dist,
            drawn: Vec::new(),
        }
    }

    pub fn sample(&mut self, step: usize) -> T {
        let Some(dist) = self.dist else {
            return T::zero();
        };
        while self.drawn.len() <= step {
            let v = dist.sample(&mut self.rng);
            self.drawn.push(T::lit(v));
        }
        self.drawn[step]
    }
}

/// The plant's right-hand side with fault and noise attached.
#[derive(Debug, Clone)]
pub struct PlantField<T = f64> {
    plant: PlantModel<T>,
    fault: FaultSignal<T>,
    noise: NoiseStream<T>,
}

impl<T: Real> PlantField<T> {
    pub fn plant(&self) -> &PlantModel<T> {
        &self.plant
    }

    pub fn fault(&self) -> &FaultSignal<T> {
        &self.fault
    }
}

/// Builds the plant vector field: chain components plus
/// `a(x) + b(x) f(t) + n_k` in the last equation.
pub fn assemble_field<T: Real>(
    plant: &PlantModel<T>,
    fault: &FaultSignal<T>,
    noise: &NoiseSpec<T>,
) -> Result<PlantField<T>> {
    fault.validate()?;
    noise.validate()?;
    Ok(PlantField {
        plant: plant.clone(),
        fault: fault.clone(),
        noise: NoiseStream::new(noise),
    })
}

impl<T: Real> VectorField<T> for PlantField<T> {
    fn dim(&self) -> usize {
        self.plant.n()
    }

    fn eval(&mut self, step: usize, t: T, x: &[T], dx: &mut [T]) {
        let n = self.plant.n();
        dx[..n - 1].copy_from_slice(&x[1..n]);
        let forcing = if self.fault.is_zero() {
            T::zero()
        } else {
            self.plant.gain(x) * self.fault.value(t)
        };
        dx[n - 1] = self.plant.drift(x) + forcing + self.noise.sample(step);
    }
}
