//! Explicit trace-norm error bounds and convergence sweeps.
//!
//! Three bounds, each valid above a threshold in `N`:
//!
//! * one partial-SWAP step against `exp(−i(α/N)σ)`: `8(e−2)(α/N)²`, for `N ≥ 2α`;
//! * one block of `D` steps against `exp(−iH/N)`:
//!   `(8D²α_max² + 4π²(e−2)(D+1))/N²`, for `N ≥ 4D·α_max`;
//! * the whole `N`-round protocol against `U_S`:
//!   `(8D²α_max² + 4π²(e−2)(D+1))/N`, same threshold.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{run_protocol, ProtocolSpec};

/// Errors at or below this value are excluded from log-log fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// A bound value together with the `N` above which it is proven.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub n_min: f64,
    pub valid: bool,
}

impl Bound {
    fn new(value: f64, n_min: f64, n: usize) -> Self {
        Self {
            value,
            n_min,
            valid: n as f64 >= n_min,
        }
    }
}

fn block_constant(d_count: usize, alpha_max: f64) -> f64 {
    let d = d_count as f64;
    8.0 * d * d * alpha_max * alpha_max + 4.0 * PI * PI * (E - 2.0) * (d + 1.0)
}

/// `8(e−2)(α/N)²`, valid for `N ≥ 2|α|`.
pub fn single_step_bound(alpha: f64, n: usize) -> Bound {
    let x = alpha / n as f64;
    Bound::new(8.0 * (E - 2.0) * x * x, 2.0 * alpha.abs(), n)
}

/// `(8D²α_max² + 4π²(e−2)(D+1))/N²`, valid for `N ≥ 4D·α_max`.
pub fn block_bound(d_count: usize, alpha_max: f64, n: usize) -> Bound {
    let nf = n as f64;
    Bound::new(
        block_constant(d_count, alpha_max) / (nf * nf),
        4.0 * d_count as f64 * alpha_max,
        n,
    )
}

/// `(8D²α_max² + (2π)²(e−2)(D+1))/N`, valid for `N ≥ 4D·α_max`.
pub fn total_bound(d_count: usize, alpha_max: f64, n: usize) -> Bound {
    Bound::new(
        block_constant(d_count, alpha_max) / n as f64,
        4.0 * d_count as f64 * alpha_max,
        n,
    )
}

/// All three bounds for one protocol configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Single-step bound at the largest `|α_k|` of the run.
    pub single_step: Bound,
    pub block: Bound,
    pub total: Bound,
}

impl BoundReport {
    pub fn new(d_count: usize, alpha_max: f64, max_abs_alpha: f64, n: usize) -> Self {
        Self {
            single_step: single_step_bound(max_abs_alpha, n),
            block: block_bound(d_count, alpha_max, n),
            total: total_bound(d_count, alpha_max, n),
        }
    }

    /// Smallest `N` for which every bound holds.
    pub fn n_min(&self) -> f64 {
        self.single_step.n_min.max(self.block.n_min).max(self.total.n_min)
    }

    pub fn all_valid(&self) -> bool {
        self.single_step.valid && self.block.valid && self.total.valid
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub measured_error: f64,
    pub analytic_bound: f64,
    pub valid: bool,
}

impl ConvergenceRow {
    pub fn below_threshold(&self) -> bool {
        !self.valid
    }

    pub fn violates_bound(&self) -> bool {
        self.valid && self.measured_error > self.analytic_bound
    }
}

/// Least-squares line through `(ln N, ln error)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// `None` when fewer than two rows have error above [`FIT_FLOOR`].
    pub fit: Option<LogLogFit>,
    /// Values of `N` left out of the fit because their error underflowed.
    pub excluded: Vec<usize>,
}

impl ConvergenceTable {
    pub fn from_rows(rows: Vec<ConvergenceRow>) -> Self {
        let (kept, excluded): (Vec<&ConvergenceRow>, Vec<&ConvergenceRow>) =
            rows.iter().partition(|r| r.measured_error > FIT_FLOOR);
        let points: Vec<(f64, f64)> = kept
            .iter()
            .map(|r| ((r.n as f64).ln(), r.measured_error.ln()))
            .collect();
        Self {
            fit: fit_line(&points),
            excluded: excluded.iter().map(|r| r.n).collect(),
            rows,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// Fit restricted to the last `k` rows.
    pub fn tail_fit(&self, k: usize) -> Option<LogLogFit> {
        let start = self.rows.len().saturating_sub(k);
        Self::from_rows(self.rows[start..].to_vec()).fit
    }

    pub fn violations(&self) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(|r| r.violates_bound())
    }

    /// CSV with columns `N, measured_error, analytic_bound, valid, slope`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["N", "measured_error", "analytic_bound", "valid", "slope"])?;
        let slope = self.slope().map(|s| s.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.measured_error.to_string(),
                r.analytic_bound.to_string(),
                r.valid.to_string(),
                slope.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn fit_line(points: &[(f64, f64)]) -> Option<LogLogFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LogLogFit {
        slope,
        intercept: my - slope * mx,
        points: points.len(),
    })
}

/// Runs the protocol once per `N` in `n_list` (ascending, at least three).
pub fn convergence_sweep(template: &ProtocolSpec, n_list: &[usize]) -> Result<ConvergenceTable> {
    if n_list.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a sweep needs at least 3 values of N, got {}",
            n_list.len()
        )));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N values must be strictly ascending".into()));
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            let result = run_protocol(&template.with_rounds(n))?;
            Ok(ConvergenceRow {
                n,
                measured_error: result.total_error,
                analytic_bound: result.bounds.total.value,
                valid: result.bounds.total.valid,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_rows(rows))
}
