//! Flat `key=value` scenario files.
//!
//! ```text
//! # reference experiment
//! domain.L=2*pi
//! control.lambda=2
//! kernel.M=30
//! sim.Nx=30
//! sim.Nt=167
//! sim.Tfinal=10
//! sim.mode=output_feedback
//! sim.nonlinear=true
//! sim.Niter=5
//! sim.scheme=consistent_euler
//! sim.u0=sin
//! sim.uhat0=zero
//! ```
//!
//! Missing keys keep the defaults above; unknown keys are rejected.

use std::f64::consts::PI;

use crate::cloop::SimConfig;
use crate::error::{Error, Result};
use crate::fdm::SchemeMode;

/// Parses a float, also accepting `pi` and `<c>*pi`.
fn parse_length(key: &str, v: &str) -> Result<f64> {
    let bad = || Error::Config(format!("{key}: cannot parse `{v}` as a number"));
    if v == "pi" {
        return Ok(PI);
    }
    if let Some(c) = v.strip_suffix("*pi") {
        return c.trim().parse::<f64>().map(|c| c * PI).map_err(|_| bad());
    }
    v.parse().map_err(|_| bad())
}

fn parse_int(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got `{v}`")))
}

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "domain.L" => cfg.length = parse_length(key, value)?,
            "control.lambda" => cfg.lambda = parse_length(key, value)?,
            "kernel.M" => cfg.kernel_m = parse_int(key, value)?,
            "sim.Nx" => cfg.nx = parse_int(key, value)?,
            "sim.Nt" => cfg.nt = parse_int(key, value)?,
            "sim.Tfinal" => cfg.tfinal = parse_length(key, value)?,
            "sim.mode" => cfg.mode = value.parse()?,
            "sim.nonlinear" => {
                cfg.nonlinear = value
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: expected true or false, got `{value}`")))?
            }
            "sim.Niter" => cfg.niter = parse_int(key, value)?,
            "sim.scheme" => cfg.scheme = SchemeMode::parse(value)?,
            "sim.u0" => cfg.u0 = value.parse()?,
            "sim.uhat0" => cfg.uhat0 = value.parse()?,
            other => return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Every key, with floats printed so they parse back bit-exactly.
pub fn render_config(cfg: &SimConfig) -> String {
    format!(
        "domain.L={:?}\ncontrol.lambda={:?}\nkernel.M={}\nsim.Nx={}\nsim.Nt={}\nsim.Tfinal={:?}\n\
         sim.mode={}\nsim.nonlinear={}\nsim.Niter={}\nsim.scheme={}\nsim.u0={}\nsim.uhat0={}\n",
        cfg.length,
        cfg.lambda,
        cfg.kernel_m,
        cfg.nx,
        cfg.nt,
        cfg.tfinal,
        cfg.mode.as_str(),
        cfg.nonlinear,
        cfg.niter,
        cfg.scheme.as_str(),
        cfg.u0,
        cfg.uhat0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloop::{ControlMode, Profile};

    #[test]
    fn defaults_and_overrides() {
        let cfg = parse_config("# comment\n\ndomain.L = 2*pi\nsim.Nx=60\nsim.mode=state_feedback\nsim.u0=0.5*sin\n").unwrap();
        assert_eq!(cfg.length, 2.0 * PI);
        assert_eq!(cfg.nx, 60);
        assert_eq!(cfg.mode, ControlMode::StateFeedback);
        assert_eq!(cfg.u0, Profile::Sin(0.5));
        assert_eq!(cfg.nt, 167);
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["sim.Niter=0", "sim.bogus=1", "sim.Nx", "sim.Nx=-3", "sim.scheme=rk4", "kernel.M=4"] {
            assert!(matches!(parse_config(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn render_parses_back() {
        let cfg = SimConfig {
            lambda: 0.1 + 0.2,
            u0: Profile::Table(vec![0.0; 31]),
            scheme: SchemeMode::PaperLiteral,
            ..SimConfig::default()
        };
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
    }
}
