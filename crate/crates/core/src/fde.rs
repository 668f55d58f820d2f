//! Explicit Grünwald–Letnikov stepping for commensurate Caputo systems
//! `D^alpha x = phi(t, x)`.

use crate::error::{Error, Result};
use crate::fraccalc::{gl_weights, FracOrder};
use crate::scalar::{dot, Real};

/// Any state component beyond this magnitude flags the run as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

/// Runs longer than this use short memory by default.
pub const FULL_MEMORY_HORIZON: f64 = 50.0;

/// Short-memory window used past [`FULL_MEMORY_HORIZON`].
pub const DEFAULT_SHORT_MEMORY: usize = 5000;

/// How much history the GL sum keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Memory {
    Full,
    Steps(usize),
}

/// Uniform time grid `t_k = k h`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid<T = f64> {
    h: T,
    t_end: T,
    n_steps: usize,
    memory: Memory,
}

impl<T: Real> SimGrid<T> {
    pub fn new(h: T, t_end: T, memory: Memory) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::config("grid.h", format!("step must be positive, got {h}")));
        }
        if !(t_end > T::zero()) || !t_end.is_finite() {
            return Err(Error::config(
                "grid.t_end",
                format!("horizon must be positive, got {t_end}"),
            ));
        }
        let n_steps = (t_end / h).round().to_usize().unwrap_or(0);
        if n_steps < 1 {
            return Err(Error::config("grid.t_end", "horizon shorter than one step"));
        }
        if let Memory::Steps(l) = memory {
            if l < 1 || l > n_steps {
                return Err(Error::config(
                    "grid.memory",
                    format!("memory length {l} outside [1, {n_steps}]"),
                ));
            }
        }
        Ok(SimGrid {
            h,
            t_end,
            n_steps,
            memory,
        })
    }

    /// Full memory up to 50 s, 5000 steps beyond.
    pub fn with_default_memory(h: T, t_end: T) -> Result<Self> {
        let memory = if t_end <= T::lit(FULL_MEMORY_HORIZON) {
            Memory::Full
        } else {
            let n = (t_end / h).round().to_usize().unwrap_or(0);
            Memory::Steps(DEFAULT_SHORT_MEMORY.min(n.max(1)))
        };
        Self::new(h, t_end, memory)
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn memory(&self) -> Memory {
        self.memory
    }

    /// Same grid with a different memory setting.
    pub fn with_memory(&self, memory: Memory) -> Result<Self> {
        Self::new(self.h, self.t_end, memory)
    }

    /// Effective window length in steps.
    pub fn memory_len(&self) -> usize {
        match self.memory {
            Memory::Full => self.n_steps,
            Memory::Steps(l) => l,
        }
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.h
    }

    /// Index of the first grid point with `t_k >= t` (clamped to the grid).
    pub fn index_at(&self, t: T) -> usize {
        if t <= T::zero() {
            return 0;
        }
        let k = (t / self.h - T::lit(1e-9)).ceil().to_usize().unwrap_or(usize::MAX);
        k.min(self.n_steps)
    }
}

/// Right-hand side `phi(t, x)` of a fractional system.
///
/// `step` is the index `k` of the point being produced; fields that hold a
/// value constant over a step (noise, recorded inputs) key on it.
pub trait VectorField<T: Real> {
    fn dim(&self) -> usize;

    /// True when the field contains `sign(.)` switching terms.
    fn has_discontinuities(&self) -> bool {
        false
    }

    fn eval(&mut self, step: usize, t: T, x: &[T], dx: &mut [T]);
}

/// Adapter turning a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<T: Real, F: FnMut(T, &[T], &mut [T])> VectorField<T> for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&mut self, _step: usize, t: T, x: &[T], dx: &mut [T]) {
        (self.f)(t, x, dx)
    }
}

/// Time series on a [`SimGrid`], one row per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T = f64> {
    grid: SimGrid<T>,
    labels: Vec<String>,
    values: Vec<T>,
    seed: Option<u64>,
    diverged_at: Option<usize>,
}

impl<T: Real> Trace<T> {
    /// Builds a trace from row-major values.
    pub fn from_rows(grid: SimGrid<T>, labels: Vec<String>, values: Vec<T>) -> Result<Self> {
        let rows = grid.n_steps() + 1;
        if values.len() != rows * labels.len() {
            return Err(Error::Dimension(format!(
                "trace needs {rows} x {} values, got {}",
                labels.len(),
                values.len()
            )));
        }
        Ok(Trace {
            grid,
            labels,
            values,
            seed: None,
            diverged_at: None,
        })
    }

    pub fn grid(&self) -> &SimGrid<T> {
        &self.grid
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.grid.n_steps() + 1
    }

    pub fn n_channels(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, k: usize) -> &[T] {
        let c = self.n_channels();
        &self.values[k * c..(k + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.n_channels().max(1))
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn channel(&self, c: usize) -> Vec<T> {
        self.rows().map(|r| r[c]).collect()
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn channel_by_label(&self, label: &str) -> Option<Vec<T>> {
        self.channel_index(label).map(|c| self.channel(c))
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.n_rows()).map(|k| self.grid.time(k)).collect()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn set_seed(&mut self, seed: Option<u64>) {
        self.seed = seed;
    }

    /// Step at which the run left the finite/bounded region, if it did.
    pub fn diverged_at(&self) -> Option<usize> {
        self.diverged_at
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub(crate) fn mark_diverged(&mut self, step: usize) {
        self.diverged_at = Some(self.diverged_at.map_or(step, |s| s.min(step)));
    }

    /// Sup-norm distance between two traces of identical shape.
    pub fn sup_distance(&self, other: &Trace<T>) -> Result<T> {
        if self.values.len() != other.values.len() {
            return Err(Error::Dimension("traces differ in shape".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max))
    }
}

/// Integrates `D^alpha x = phi(t, x)` from `x0` with the explicit GL scheme
///
/// `z_k = h^alpha phi(t_k, x_{k-1}) - Σ_{j=1..min(k, L)} w_j z_{k-j}`, `x_k = z_k + x0`.
///
/// A run whose state leaves `|x| <= 1e8` is flagged diverged and the
/// remaining rows are filled with NaN.
pub fn integrate<T, F>(
    field: &mut F,
    alpha: FracOrder<T>,
    grid: &SimGrid<T>,
    x0: &[T],
) -> Result<Trace<T>>
where
    T: Real,
    F: VectorField<T> + ?Sized,
{
    let labels = (1..=x0.len()).map(|i| format!("x{i}")).collect();
    integrate_labeled(field, alpha, grid, x0, labels)
}

pub(crate) fn integrate_labeled<T, F>(
    field: &mut F,
    alpha: FracOrder<T>,
    grid: &SimGrid<T>,
    x0: &[T],
    labels: Vec<String>,
) -> Result<Trace<T>>
where
    T: Real,
    F: VectorField<T> + ?Sized,
{
    let dim = field.dim();
    if x0.len() != dim {
        return Err(Error::Dimension(format!(
            "initial state has {} components, field has {dim}",
            x0.len()
        )));
    }
    if labels.len() != dim {
        return Err(Error::Dimension("label count differs from field dimension".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("integrate", "non-finite initial state"));
    }
    let n = grid.n_steps();
    let mem = grid.memory_len();
    let rev = gl_weights(alpha, n).reversed();
    // rev[n - m..n] = (w_m, ..., w_1)
    let hist_w = |m: usize| &rev[n - m..n];
    let ha = grid.h().powf(alpha.value());
    let limit = T::lit(DIVERGENCE_LIMIT);

    let mut values = Vec::with_capacity((n + 1) * dim);
    values.extend_from_slice(x0);
    let mut z: Vec<Vec<T>> = (0..dim)
        .map(|_| {
            let mut v = Vec::with_capacity(n + 1);
            v.push(T::zero());
            v
        })
        .collect();
    let mut x_prev = x0.to_vec();
    let mut rhs = vec![T::zero(); dim];
    let mut diverged = None;

    for k in 1..=n {
        field.eval(k, grid.time(k), &x_prev, &mut rhs);
        let m = k.min(mem);
        let w = hist_w(m);
        let mut bad = false;
        for c in 0..dim {
            let zc = &mut z[c];
            let zk = ha * rhs[c] - dot(&zc[k - m..k], w);
            zc.push(zk);
            let xk = zk + x0[c];
            x_prev[c] = xk;
            if !(xk.abs() <= limit) {
                bad = true;
            }
        }
        values.extend_from_slice(&x_prev);
        if bad {
            diverged = Some(k);
            values.resize((n + 1) * dim, T::nan());
            break;
        }
    }

    let mut trace = Trace::from_rows(*grid, labels, values)?;
    if let Some(k) = diverged {
        trace.mark_diverged(k);
    }
    Ok(trace)
}

/// Sup-norm deviation of short-memory runs from the full-memory run.
///
/// `make_field` must produce a fresh, identically seeded field per call.
pub fn memory_truncation_error<T, F, M>(
    mut make_field: M,
    alpha: FracOrder<T>,
    grid: &SimGrid<T>,
    x0: &[T],
    lens: &[usize],
) -> Result<Vec<(usize, T)>>
where
    T: Real,
    F: VectorField<T>,
    M: FnMut() -> F,
{
    let full_grid = grid.with_memory(Memory::Full)?;
    let reference = integrate(&mut make_field(), alpha, &full_grid, x0)?;
    lens.iter()
        .map(|&l| {
            let g = grid.with_memory(Memory::Steps(l))?;
            let run = integrate(&mut make_field(), alpha, &g, x0)?;
            Ok((l, run.sup_distance(&reference)?))
        })
        .collect()
}
