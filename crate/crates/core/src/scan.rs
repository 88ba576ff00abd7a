//! Parameter sweeps and detection-threshold search along a state family.

use std::io::Write;

use rayon::prelude::*;

use crate::criteria::{Criterion, Decision, Verdict};
use crate::error::{invalid, Error, Result};
use crate::states::StateFamily;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const MAX_BISECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub param: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub param_name: String,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    /// First grid point reported as entangled.
    pub fn first_entangled(&self) -> Option<&ScanRow> {
        self.rows.iter().find(|r| r.verdict.is_entangled())
    }

    /// CSV with header `param,lhs,bound,violation,entangled`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param", "lhs", "bound", "violation", "entangled"])?;
        for row in &self.rows {
            let v = &row.verdict;
            w.write_record([
                format_sig(row.param),
                format_sig(v.lhs),
                format_sig(v.bound),
                format_sig(v.violation),
                (if v.is_entangled() { "1" } else { "0" }).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Round to 12 significant digits and print the shortest representation.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float round trip");
    // avoid "-0"
    if rounded == 0.0 {
        return "0".to_string();
    }
    rounded.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Entangled for parameter values above the threshold.
    DetectsAbove,
    /// Entangled for parameter values below the threshold.
    DetectsBelow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub criterion: String,
    pub family: String,
    pub value: f64,
    pub tolerance: f64,
    pub direction: Direction,
    pub iterations: usize,
}

fn evaluate_at(family: &StateFamily, criterion: &Criterion, value: f64) -> Result<Verdict> {
    family
        .eval(value)
        .and_then(|rho| criterion.evaluate(&rho))
        .map_err(|e| Error::Evaluation {
            param: family.param().to_string(),
            value,
            source: Box::new(e),
        })
}

/// Evaluate `criterion` on a uniform grid of `steps` points over
/// `[from, to]`, endpoints included. Grid points are evaluated in parallel;
/// rows come back in grid order.
pub fn sweep(family: &StateFamily, criterion: &Criterion, from: f64, to: f64, steps: usize) -> Result<ScanResult> {
    if !(from < to) || !from.is_finite() || !to.is_finite() {
        return Err(invalid(format!("sweep needs from < to, got [{from}, {to}]")));
    }
    if steps < 2 {
        return Err(invalid("sweep needs at least 2 steps"));
    }
    let h = (to - from) / (steps - 1) as f64;
    let rows = (0..steps)
        .into_par_iter()
        .map(|i| {
            let param = if i == steps - 1 { to } else { from + h * i as f64 };
            evaluate_at(family, criterion, param).map(|verdict| ScanRow { param, verdict })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        param_name: family.param().to_string(),
        rows,
    })
}

/// Bisect on the detection decision until the bracket is narrower than
/// `tol`. The two endpoints must disagree. Only one crossing is assumed;
/// for a non-monotone family the result is one of possibly several
/// crossings.
pub fn threshold(family: &StateFamily, criterion: &Criterion, from: f64, to: f64, tol: f64) -> Result<Threshold> {
    if !(from < to) || !from.is_finite() || !to.is_finite() {
        return Err(invalid(format!("threshold needs from < to, got [{from}, {to}]")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let lo_ent = evaluate_at(family, criterion, from)?.decision == Decision::Entangled;
    let hi_ent = evaluate_at(family, criterion, to)?.decision == Decision::Entangled;
    if lo_ent == hi_ent {
        return Err(Error::NoThreshold { from, to });
    }
    let direction = if hi_ent {
        Direction::DetectsAbove
    } else {
        Direction::DetectsBelow
    };

    // invariant: decision(lo) == lo_ent, decision(hi) == hi_ent
    let (mut lo, mut hi) = (from, to);
    let mut iterations = 0;
    while hi - lo >= tol && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let ent = evaluate_at(family, criterion, mid)?.is_entangled();
        if ent == lo_ent {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Threshold {
        criterion: criterion.to_string(),
        family: family.name().to_string(),
        value: 0.5 * (lo + hi),
        tolerance: 0.5 * (hi - lo),
        direction,
        iterations,
    })
}
