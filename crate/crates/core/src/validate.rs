//! Self-check suite for the numerical primitives: closed-form oracles that
//! are independent of the solver under test.

use std::time::Instant;

use crate::fde::{integrate, FnField, Memory, SimGrid};
use crate::fraccalc::{gamma, gl_derivative, gl_weights, mittag_leffler, FracOrder};

/// Tolerances used by [`run_checks`], in listing order.
pub const TOLERANCES: &[(&str, f64, &str)] = &[
    ("gamma_spot_values", 1e-12, "relative, vs 50-digit reference values"),
    ("weights_vs_binomial", 1e-10, "relative, j <= 30, binomial via gamma"),
    ("weights_unit_order", 0.0, "exact, alpha = 1 table is [1, -1, 0, ...]"),
    ("weights_partial_sums", 0.0, "partial sums positive and non-increasing"),
    ("derivative_matches_table", 1e-12, "relative, library derivative vs table sum"),
    ("power_rule", 1e-2, "relative, p in {1,2,3}, alpha in {0.5,0.9,0.97}, t in [0.1,1], h = 1e-3"),
    ("mittag_leffler_values", 1e-12, "relative, E_1(z) = e^z and E_0.5(-2) = e^4 erfc(2)"),
    ("solver_vs_mittag_leffler", 1e-2, "relative, alpha = 0.9, a = -1, t in [0.1,5], h = 1e-3"),
    ("solver_unit_order_euler", 1e-13, "absolute, alpha = 1 vs hand-rolled explicit Euler"),
    ("solver_zero_field", 0.0, "exact, phi = 0 returns x0 at every step"),
];

/// Outcome of one oracle check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn within(name: &'static str, measured: f64) -> Self {
        let tolerance = tolerance(name);
        Self {
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }

    fn flag(name: &'static str, ok: bool) -> Self {
        Self {
            name,
            measured: if ok { 0.0 } else { 1.0 },
            tolerance: tolerance(name),
            passed: ok,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<26} measured={:.3e} tol={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            fmt_tol(self.tolerance)
        )
    }
}

fn fmt_tol(t: f64) -> String {
    if t == 0.0 {
        "exact".into()
    } else {
        format!("{t:.0e}")
    }
}

fn tolerance(name: &str) -> f64 {
    TOLERANCES
        .iter()
        .find(|(n, ..)| *n == name)
        .map(|&(_, t, _)| t)
        .unwrap_or(0.0)
}

/// Full suite result.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub checks: Vec<Check>,
    pub elapsed_secs: f64,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Printable tolerance table, one line per check.
pub fn tolerance_listing() -> String {
    TOLERANCES
        .iter()
        .map(|(n, t, what)| format!("{n:<26} {:<6} {what}\n", fmt_tol(*t)))
        .collect()
}

/// Runs every check against the library weights.
pub fn run_checks() -> CheckReport {
    run_checks_with(|alpha, k| gl_weights(FracOrder::new(alpha).unwrap_or(FracOrder::unit()), k).weights().to_vec())
}

/// Runs every check, taking GL weights from `weights(alpha, k)`. Weight-level
/// and power-rule checks use the supplied table, so a broken recurrence shows.
pub fn run_checks_with<W>(weights: W) -> CheckReport
where
    W: Fn(f64, usize) -> Vec<f64>,
{
    let start = Instant::now();
    let checks = vec![
        check_gamma(),
        check_binomial(&weights),
        check_unit_table(&weights),
        check_partial_sums(&weights),
        check_table_derivative(&weights),
        check_power_rule(&weights),
        check_ml_values(),
        check_solver_ml(),
        check_solver_euler(),
        check_zero_field(),
    ];
    CheckReport {
        checks,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn worst(it: impl IntoIterator<Item = f64>) -> f64 {
    // NaN must fail the check, so it wins the fold.
    it.into_iter()
        .fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

fn nan_to_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

const GAMMA_REF: &[(f64, f64)] = &[
    (0.03, 32.784998351794135982),
    (0.1, 9.5135076986687318363),
    (1.5, 0.88622692545275801365),
    (1.97, 0.98768498382399157031),
    (2.9, 1.8273550806240360969),
    (10.3, 716430.68906237524455),
    (25.5, 3.0867705405286967828e24),
    (49.9, 4.1180110342530580419e62),
    (50.0, 6.0828186403426756087e62),
];

fn check_gamma() -> Check {
    let e = worst(
        GAMMA_REF
            .iter()
            .map(|&(x, g)| gamma(x).map(|v| rel(v, g)).unwrap_or(f64::INFINITY)),
    );
    Check::within("gamma_spot_values", nan_to_inf(e))
}

fn check_binomial<W: Fn(f64, usize) -> Vec<f64>>(weights: &W) -> Check {
    let mut e = 0.0f64;
    for &alpha in &[0.1, 0.5, 0.9, 0.97] {
        let w = weights(alpha, 30);
        let g1 = gamma(alpha + 1.0).unwrap_or(f64::NAN);
        for (j, &wj) in w.iter().enumerate().take(31) {
            // Γ(α−j+1) is negative for j ≥ 2; evaluate it by the recursion
            // downward from Γ(α+1) so only positive arguments reach gamma().
            let mut g_am = g1;
            for i in 0..j {
                g_am /= alpha - i as f64;
            }
            let direct = if j % 2 == 0 { 1.0 } else { -1.0 } * g1 / (gamma(j as f64 + 1.0).unwrap_or(f64::NAN) * g_am);
            e = worst([e, rel(wj, direct)]);
        }
        if w.len() != 31 {
            e = f64::INFINITY;
        }
    }
    Check::within("weights_vs_binomial", nan_to_inf(e))
}

fn check_unit_table<W: Fn(f64, usize) -> Vec<f64>>(weights: &W) -> Check {
    let w = weights(1.0, 20);
    let ok = w.len() == 21 && w[0] == 1.0 && w[1] == -1.0 && w[2..].iter().all(|&v| v == 0.0);
    Check::flag("weights_unit_order", ok)
}

fn check_partial_sums<W: Fn(f64, usize) -> Vec<f64>>(weights: &W) -> Check {
    let ok = [0.5, 0.9, 0.97].iter().all(|&alpha| {
        let w = weights(alpha, 1000);
        let mut s = 0.0;
        let mut prev = f64::INFINITY;
        w.iter().all(|&v| {
            s += v;
            let good = s > 0.0 && s <= prev;
            prev = s;
            good
        })
    });
    Check::flag("weights_partial_sums", ok)
}

fn table_derivative(w: &[f64], samples: &[f64], alpha: f64, h: f64) -> Vec<f64> {
    let scale = h.powf(-alpha);
    let base = samples[0];
    (0..samples.len())
        .map(|k| scale * (0..=k).map(|j| w[j] * (samples[k - j] - base)).sum::<f64>())
        .collect()
}

fn check_table_derivative<W: Fn(f64, usize) -> Vec<f64>>(weights: &W) -> Check {
    let h = 1e-2;
    let samples: Vec<f64> = (0..=200).map(|k| (k as f64 * h).sin() + 0.5).collect();
    let mut e = 0.0f64;
    for &alpha in &[0.5, 0.9] {
        let Ok(order) = FracOrder::new(alpha) else {
            return Check::within("derivative_matches_table", f64::INFINITY);
        };
        let lib = gl_derivative(&samples, order, h).unwrap_or_default();
        let tab = table_derivative(&weights(alpha, samples.len() - 1), &samples, alpha, h);
        if lib.len() != tab.len() {
            return Check::within("derivative_matches_table", f64::INFINITY);
        }
        e = worst(
            std::iter::once(e).chain(lib.iter().zip(&tab).skip(1).map(|(a, b)| (a - b).abs() / b.abs().max(1.0))),
        );
    }
    Check::within("derivative_matches_table", nan_to_inf(e))
}

fn check_power_rule<W: Fn(f64, usize) -> Vec<f64>>(weights: &W) -> Check {
    let h = 1e-3;
    let n = 1000;
    let mut e = 0.0f64;
    for &alpha in &[0.5, 0.9, 0.97] {
        let w = weights(alpha, n);
        if w.len() != n + 1 {
            return Check::within("power_rule", f64::INFINITY);
        }
        for p in 1..=3 {
            let pf = p as f64;
            let samples: Vec<f64> = (0..=n).map(|k| (k as f64 * h).powi(p)).collect();
            let d = table_derivative(&w, &samples, alpha, h);
            let c = gamma(pf + 1.0).unwrap_or(f64::NAN) / gamma(pf - alpha + 1.0).unwrap_or(f64::NAN);
            for (k, dk) in d.iter().enumerate().skip(100) {
                let t = k as f64 * h;
                e = worst([e, rel(*dk, c * t.powf(pf - alpha))]);
            }
        }
    }
    Check::within("power_rule", nan_to_inf(e))
}

fn check_ml_values() -> Check {
    let mut e = 0.0f64;
    let unit = FracOrder::<f64>::unit();
    for &z in &[-3.0, -1.0, -0.25, 0.5, 2.0] {
        e = worst([e, mittag_leffler(unit, z).map(|v| rel(v, f64::exp(z))).unwrap_or(f64::INFINITY)]);
    }
    let half = FracOrder::new(0.5).expect("0.5 is a valid order");
    e = worst([
        e,
        mittag_leffler(half, -2.0)
            .map(|v| rel(v, 0.25539567631050574387))
            .unwrap_or(f64::INFINITY),
    ]);
    Check::within("mittag_leffler_values", nan_to_inf(e))
}

fn check_solver_ml() -> Check {
    let alpha = FracOrder::new(0.9).expect("0.9 is a valid order");
    let Ok(grid) = SimGrid::new(1e-3, 5.0, Memory::Full) else {
        return Check::within("solver_vs_mittag_leffler", f64::INFINITY);
    };
    let mut field = FnField::new(1, |_: f64, x: &[f64], dx: &mut [f64]| dx[0] = -x[0]);
    let Ok(trace) = integrate(&mut field, alpha, &grid, &[1.0]) else {
        return Check::within("solver_vs_mittag_leffler", f64::INFINITY);
    };
    let e = worst(trace.rows().enumerate().skip(grid.index_at(0.1)).map(|(k, r)| {
        let t = grid.time(k);
        mittag_leffler(alpha, -t.powf(0.9))
            .map(|exact| rel(r[0], exact))
            .unwrap_or(f64::INFINITY)
    }));
    Check::within("solver_vs_mittag_leffler", nan_to_inf(e))
}

fn check_solver_euler() -> Check {
    let h = 1e-2;
    let Ok(grid) = SimGrid::new(h, 2.0, Memory::Full) else {
        return Check::within("solver_unit_order_euler", f64::INFINITY);
    };
    let rhs = |x: &[f64], dx: &mut [f64]| {
        dx[0] = x[1];
        dx[1] = -x[0] - 0.3 * x[1] + x[0] * x[0] * 0.1;
    };
    let mut field = FnField::new(2, move |_: f64, x: &[f64], dx: &mut [f64]| rhs(x, dx));
    let Ok(trace) = integrate(&mut field, FracOrder::unit(), &grid, &[1.0, 0.0]) else {
        return Check::within("solver_unit_order_euler", f64::INFINITY);
    };
    let mut x = [1.0, 0.0];
    let mut e = 0.0f64;
    for (k, row) in trace.rows().enumerate() {
        if k > 0 {
            let mut dx = [0.0; 2];
            rhs(&x, &mut dx);
            x = [x[0] + h * dx[0], x[1] + h * dx[1]];
        }
        e = worst([e, (row[0] - x[0]).abs(), (row[1] - x[1]).abs()]);
    }
    Check::within("solver_unit_order_euler", nan_to_inf(e))
}

fn check_zero_field() -> Check {
    let x0 = [0.3, -1.7, 12.5];
    let alpha = FracOrder::new(0.97).expect("0.97 is a valid order");
    let ok = SimGrid::new(1e-2, 3.0, Memory::Full)
        .and_then(|grid| {
            let mut field = FnField::new(3, |_: f64, _: &[f64], dx: &mut [f64]| dx.fill(0.0));
            integrate(&mut field, alpha, &grid, &x0)
        })
        .map(|trace| trace.rows().all(|r| r == x0))
        .unwrap_or(false);
    Check::flag("solver_zero_field", ok)
}
