//! CSV tables for sweeps, prior curves and sensor error curves.
//!
//! Numbers are written with Rust's shortest round-trip formatting, which is
//! locale independent, so identical inputs give identical bytes.

use std::io::{self, Write};

use crate::error::Result;
use crate::model::{
    hypothesis_priors, sensor_error_probabilities, HypothesisPriors, ParameterDistribution,
    SafetyBand, SensorErrorRates,
};
use crate::montecarlo::{ParameterModel, ResultRow};

pub const RESULTS_HEADER: &str = "rule,contamination_db,pf_tot,pm_tot,avg_cost,pe_tot,stderr_cost,trials";
pub const PRIORS_HEADER: &str = "sigma,p_h0,p_h1,status";
pub const SENSOR_CURVES_HEADER: &str = "delta,sigma,pf,pm,status";

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

pub fn write_results<W: Write>(mut w: W, rows: &[ResultRow]) -> io::Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.rule,
            format_float(r.contamination_db),
            format_float(r.pf_tot),
            format_float(r.pm_tot),
            format_float(r.avg_cost),
            format_float(r.pe_tot),
            format_float(r.stderr_cost),
            r.trials
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorsRow {
    pub sigma: f64,
    pub priors: Result<HypothesisPriors>,
}

/// Hypothesis priors over a grid of spreads. Failures stay in their row.
pub fn priors_table(model: &ParameterModel, sigmas: &[f64]) -> Vec<PriorsRow> {
    sigmas
        .iter()
        .map(|&sigma| PriorsRow {
            sigma,
            priors: ParameterDistribution::new(model.theta0, sigma, model.theta_min, model.theta_max)
                .and_then(|d| hypothesis_priors(&d, &model.band)),
        })
        .collect()
}

pub fn write_priors<W: Write>(mut w: W, rows: &[PriorsRow]) -> io::Result<()> {
    writeln!(w, "{PRIORS_HEADER}")?;
    for r in rows {
        match &r.priors {
            Ok(p) => writeln!(
                w,
                "{},{},{},ok",
                format_float(r.sigma),
                format_float(p.p_h0),
                format_float(p.p_h1)
            )?,
            Err(e) => writeln!(w, "{},,,{}", format_float(r.sigma), quote(&format!("error: {e}")))?,
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorCurveRow {
    pub delta: f64,
    pub sigma: f64,
    pub rates: Result<SensorErrorRates>,
}

/// Sensor false-alarm and miss rates on a `delta × sigma` grid, delta-major.
pub fn sensor_curve_table(model: &ParameterModel, deltas: &[f64], sigmas: &[f64]) -> Vec<SensorCurveRow> {
    let band: SafetyBand = model.band;
    let mut rows = Vec::with_capacity(deltas.len() * sigmas.len());
    for &delta in deltas {
        for &sigma in sigmas {
            let rates = ParameterDistribution::new(model.theta0, sigma, model.theta_min, model.theta_max)
                .and_then(|d| sensor_error_probabilities(&d, &band, delta));
            rows.push(SensorCurveRow { delta, sigma, rates });
        }
    }
    rows
}

pub fn write_sensor_curves<W: Write>(mut w: W, rows: &[SensorCurveRow]) -> io::Result<()> {
    writeln!(w, "{SENSOR_CURVES_HEADER}")?;
    for r in rows {
        match &r.rates {
            Ok(s) => writeln!(
                w,
                "{},{},{},{},ok",
                format_float(r.delta),
                format_float(r.sigma),
                format_float(s.pf),
                format_float(s.pm)
            )?,
            Err(e) => writeln!(
                w,
                "{},{},,,{}",
                format_float(r.delta),
                format_float(r.sigma),
                quote(&format!("error: {e}"))
            )?,
        }
    }
    Ok(())
}
