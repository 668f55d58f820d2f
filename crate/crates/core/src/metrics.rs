//! Post-processing of error channels: settle times, RMSE and a
//! total-variation chattering index.

use crate::error::{Error, Result};
use crate::fde::SimGrid;
use crate::scalar::Real;

/// First `t` such that `|channel| <= tol` on the whole window `[t, t + dwell]`,
/// with the window inside the grid. `None` means the channel never settles.
pub fn settle_time<T: Real>(channel: &[T], grid: &SimGrid<T>, tol: T, dwell: T) -> Result<Option<T>> {
    settle_time_after(channel, grid, tol, dwell, 0)
}

/// [`settle_time`] restricted to candidate times at or after row `start`.
pub fn settle_time_after<T: Real>(
    channel: &[T],
    grid: &SimGrid<T>,
    tol: T,
    dwell: T,
    start: usize,
) -> Result<Option<T>> {
    if !(tol > T::zero()) || !(dwell > T::zero()) {
        return Err(Error::domain("settle_time", "tol and dwell must be positive"));
    }
    let span = (dwell / grid.h() - T::lit(1e-9)).ceil().to_usize().unwrap_or(usize::MAX);
    let mut last_bad: Option<usize> = None;
    for (j, v) in channel.iter().enumerate().skip(start) {
        if !(v.abs() <= tol) {
            last_bad = Some(j);
        }
        if j >= start.saturating_add(span) {
            let k = j - span;
            if last_bad.is_none_or(|b| b < k) {
                return Ok(Some(grid.time(k)));
            }
        }
    }
    Ok(None)
}

fn window_start<T: Real>(len: usize, grid: &SimGrid<T>, from_t: T) -> Result<usize> {
    let k0 = grid.index_at(from_t);
    if from_t < T::zero() || k0 + 1 >= len {
        return Err(Error::domain(
            "metrics",
            format!("window start {from_t} leaves no samples inside the grid"),
        ));
    }
    Ok(k0)
}

fn total_variation<T: Real>(xs: &[T]) -> T {
    xs.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Total variation of `channel` in excess of the truth's, per unit time, over
/// `t >= from_t`. Clamped at zero, so a smooth tracker scores 0.
pub fn chattering_index<T: Real>(channel: &[T], truth: &[T], grid: &SimGrid<T>, from_t: T) -> Result<T> {
    if channel.len() != truth.len() {
        return Err(Error::Dimension("channel and truth differ in length".into()));
    }
    let k0 = window_start(channel.len(), grid, from_t)?;
    let duration = grid.time(channel.len() - 1) - grid.time(k0);
    let excess = total_variation(&channel[k0..]) - total_variation(&truth[k0..]);
    Ok(excess.max(T::zero()) / duration)
}

/// Root-mean-square of `estimate - truth` over `t >= from_t`.
pub fn rmse_from<T: Real>(estimate: &[T], truth: &[T], grid: &SimGrid<T>, from_t: T) -> Result<T> {
    let k0 = window_start(estimate.len(), grid, from_t)?;
    let sq: T = estimate[k0..]
        .iter()
        .zip(&truth[k0..])
        .map(|(e, t)| (*e - *t).powi(2))
        .sum();
    Ok((sq / T::from_usize_lossy(estimate.len() - k0)).sqrt())
}

/// `sup |estimate - truth|` over `t >= from_t`.
pub fn sup_error_from<T: Real>(estimate: &[T], truth: &[T], grid: &SimGrid<T>, from_t: T) -> Result<T> {
    let k0 = window_start(estimate.len(), grid, from_t)?;
    Ok(estimate[k0..]
        .iter()
        .zip(&truth[k0..])
        .map(|(e, t)| (*e - *t).abs())
        .fold(T::zero(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fde::Memory;
    use proptest::prelude::*;

    fn grid(h: f64, t_end: f64) -> SimGrid<f64> {
        SimGrid::new(h, t_end, Memory::Full).unwrap()
    }

    #[test]
    fn settle_examples() {
        let g = grid(0.01, 3.0);
        let zeros = vec![0.0; g.n_steps() + 1];
        assert_eq!(settle_time(&zeros, &g, 0.1, 1.0).unwrap(), Some(0.0));
        let high = vec![0.2; g.n_steps() + 1];
        assert_eq!(settle_time(&high, &g, 0.1, 1.0).unwrap(), None);
        let ramp: Vec<f64> = (0..=g.n_steps()).map(|k| (1.0 - g.time(k)).max(0.0)).collect();
        let t = settle_time(&ramp, &g, 0.1, 1.0).unwrap().unwrap();
        assert!((t - 0.9).abs() < 1e-12);
    }

    #[test]
    fn settle_needs_whole_window() {
        let g = grid(0.1, 2.0);
        // Quiet only over the last 0.5 s: a 1 s dwell cannot fit.
        let c: Vec<f64> = (0..=20).map(|k| if k >= 15 { 0.0 } else { 1.0 }).collect();
        assert_eq!(settle_time(&c, &g, 0.1, 1.0).unwrap(), None);
        assert_eq!(settle_time(&c, &g, 0.1, 0.5).unwrap(), Some(1.5));
        let mut spiky = vec![0.0; 21];
        spiky[8] = f64::NAN;
        assert!((settle_time(&spiky, &g, 0.1, 1.0).unwrap().unwrap() - 0.9).abs() < 1e-12);
        assert!(settle_time(&spiky, &g, 0.0, 1.0).is_err());
        assert!((settle_time_after(&spiky, &g, 0.1, 1.0, 4).unwrap().unwrap() - 0.9).abs() < 1e-12);
        assert!((settle_time_after(&spiky, &g, 0.1, 1.0, 10).unwrap().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(settle_time_after(&spiky, &g, 0.1, 1.0, 11).unwrap(), None);
        assert_eq!(settle_time_after(&spiky, &g, 0.1, 1.0, 15).unwrap(), None);
    }

    #[test]
    fn chattering_examples() {
        let g = grid(1e-3, 1.0);
        let n = g.n_steps() + 1;
        let c = vec![2.0; n];
        assert_eq!(chattering_index(&c, &c, &g, 0.0).unwrap(), 0.0);
        let truth: Vec<f64> = (0..n).map(|k| g.time(k).sin()).collect();
        assert_eq!(chattering_index(&truth, &truth, &g, 0.3).unwrap(), 0.0);
        let a = 0.25;
        let square: Vec<f64> = (0..n).map(|k| if k % 2 == 0 { 0.0 } else { a }).collect();
        let idx = chattering_index(&square, &vec![0.0; n], &g, 0.0).unwrap();
        assert!((idx - a / 1e-3).abs() < 1e-6 * idx, "{idx}");
        assert!(chattering_index(&square, &square, &g, 5.0).is_err());
    }

    proptest! {
        #[test]
        fn chattering_shift_and_scale(
            base in proptest::collection::vec(-1.0_f64..1.0, 50),
            truth in proptest::collection::vec(-1.0_f64..1.0, 50),
            shift in -5.0_f64..5.0,
            scale in 0.1_f64..10.0,
        ) {
            let g = grid(0.1, 4.9);
            let i0 = chattering_index(&base, &truth, &g, 0.0).unwrap();
            let sb: Vec<f64> = base.iter().map(|v| v + shift).collect();
            let st: Vec<f64> = truth.iter().map(|v| v + shift).collect();
            let i1 = chattering_index(&sb, &st, &g, 0.0).unwrap();
            prop_assert!((i0 - i1).abs() <= 1e-9 * (1.0 + i0));
            let cb: Vec<f64> = base.iter().map(|v| v * scale).collect();
            let ct: Vec<f64> = truth.iter().map(|v| v * scale).collect();
            let i2 = chattering_index(&cb, &ct, &g, 0.0).unwrap();
            prop_assert!((i2 - scale * i0).abs() <= 1e-9 * (1.0 + i2));
            prop_assert!(i0 >= 0.0);
        }
    }

    #[test]
    fn rmse_and_sup() {
        let g = grid(0.5, 2.0);
        let est = [9.0, 1.0, 2.0, 3.0, 4.0];
        let truth = [0.0, 1.0, 2.0, 4.0, 2.0];
        assert!((rmse_from(&est, &truth, &g, 0.5).unwrap() - (5.0_f64 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(sup_error_from(&est, &truth, &g, 0.5).unwrap(), 2.0);
        assert_eq!(sup_error_from(&est, &truth, &g, 0.0).unwrap(), 9.0);
    }
}
