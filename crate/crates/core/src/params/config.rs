//! Flat TOML configuration.
//!
//! Keys are the [`PhysParams`] field names in SI units. Unknown keys are
//! rejected. A key may be omitted only when the table preset is requested, in
//! which case the preset value is used.
//!
//! ```toml
//! mass = 5e-8
//! omega_m = 2.199114857512855e6
//! tau = "thirty-periods"    # or "printed", or a number of seconds
//! central_width = "literal" # or "sum"
//! ```

use std::path::Path;

use serde::Deserialize;

use super::{table1_preset, CentralWidth, PhysParams, TABLE1_PRINTED_TAU, TABLE1_TAU_PERIODS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Seconds(f64),
    Named(NamedTau),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedTau {
    ThirtyPeriods,
    Printed,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mass: Option<f64>,
    pub omega_m: Option<f64>,
    pub q_factor: Option<f64>,
    pub temperature: Option<f64>,
    pub tau: Option<TauSpec>,
    pub cavity_length: Option<f64>,
    pub wavelength: Option<f64>,
    pub gamma0: Option<f64>,
    pub gamma0_plus: Option<f64>,
    pub gamma0_minus: Option<f64>,
    pub gamma_e: Option<f64>,
    pub gamma_e_plus: Option<f64>,
    pub gamma_e_minus: Option<f64>,
    pub eps_plus: Option<f64>,
    pub eps_minus: Option<f64>,
    pub p_in: Option<f64>,
    pub central_width: Option<CentralWidth>,
}

impl ConfigFile {
    /// Resolves the config into parameters, falling back to the table preset
    /// for missing keys only when `use_preset` is set.
    pub fn resolve(&self, use_preset: bool) -> Result<PhysParams> {
        let base = table1_preset();
        let pick = |field: &'static str, v: Option<f64>, preset: f64| -> Result<f64> {
            match (v, use_preset) {
                (Some(v), _) => Ok(v),
                (None, true) => Ok(preset),
                (None, false) => Err(Error::Config(format!(
                    "missing key `{field}` (pass the table1 preset to fill defaults)"
                ))),
            }
        };

        let omega_m = pick("omega_m", self.omega_m, base.omega_m)?;
        let tau = match self.tau {
            Some(TauSpec::Seconds(s)) => s,
            Some(TauSpec::Named(NamedTau::ThirtyPeriods)) => {
                TABLE1_TAU_PERIODS * 2.0 * std::f64::consts::PI / omega_m
            }
            Some(TauSpec::Named(NamedTau::Printed)) => TABLE1_PRINTED_TAU,
            None if use_preset => TABLE1_TAU_PERIODS * 2.0 * std::f64::consts::PI / omega_m,
            None => return Err(Error::Config("missing key `tau`".into())),
        };

        let p = PhysParams {
            mass: pick("mass", self.mass, base.mass)?,
            omega_m,
            q_factor: pick("q_factor", self.q_factor, base.q_factor)?,
            temperature: pick("temperature", self.temperature, base.temperature)?,
            tau,
            cavity_length: pick("cavity_length", self.cavity_length, base.cavity_length)?,
            wavelength: pick("wavelength", self.wavelength, base.wavelength)?,
            gamma0: pick("gamma0", self.gamma0, base.gamma0)?,
            gamma0_plus: pick("gamma0_plus", self.gamma0_plus, base.gamma0_plus)?,
            gamma0_minus: pick("gamma0_minus", self.gamma0_minus, base.gamma0_minus)?,
            gamma_e: pick("gamma_e", self.gamma_e, base.gamma_e)?,
            gamma_e_plus: pick("gamma_e_plus", self.gamma_e_plus, base.gamma_e_plus)?,
            gamma_e_minus: pick("gamma_e_minus", self.gamma_e_minus, base.gamma_e_minus)?,
            eps_plus: pick("eps_plus", self.eps_plus, base.eps_plus)?,
            eps_minus: pick("eps_minus", self.eps_minus, base.eps_minus)?,
            p_in: pick("p_in", self.p_in, base.p_in)?,
            central_width: self.central_width.unwrap_or_default(),
        };
        p.validate()?;
        Ok(p)
    }
}

/// Parses TOML text into validated parameters.
pub fn parse_params(text: &str, use_preset: bool) -> Result<PhysParams> {
    let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.resolve(use_preset)
}

/// Loads parameters from an optional config file. Without a file, the preset
/// must be requested.
pub fn load_params(path: Option<&Path>, use_preset: bool) -> Result<PhysParams> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            parse_params(&text, use_preset)
        }
        None if use_preset => Ok(table1_preset()),
        None => Err(Error::Config(
            "no config file given and the table1 preset was not requested".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TauChoice;

    #[test]
    fn empty_config_with_preset_is_table1() {
        assert_eq!(parse_params("", true).unwrap(), table1_preset());
    }

    #[test]
    fn missing_key_without_preset_is_error() {
        let err = parse_params("mass = 1e-8", false).unwrap_err().to_string();
        assert!(err.contains("missing key"), "{err}");
    }

    #[test]
    fn unknown_key_is_error() {
        let err = parse_params("mas = 1e-8", true).unwrap_err().to_string();
        assert!(err.contains("mas"), "{err}");
    }

    #[test]
    fn tau_spellings() {
        let printed = parse_params("tau = \"printed\"", true).unwrap();
        assert_eq!(
            printed.tau,
            crate::params::table1_preset_with(TauChoice::Printed).tau
        );
        let explicit = parse_params("tau = 1e-3", true).unwrap();
        assert_eq!(explicit.tau, 1e-3);
        let periods = parse_params("tau = \"thirty-periods\"", true).unwrap();
        assert_eq!(periods.tau, table1_preset().tau);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let p = parse_params("p_in = 1e-5\ncentral_width = \"sum\"", true).unwrap();
        assert_eq!(p.p_in, 1e-5);
        assert_eq!(p.central_width, CentralWidth::Sum);
        let err = parse_params("p_in = -1.0", true).unwrap_err().to_string();
        assert!(err.contains("p_in"), "{err}");
    }

    #[test]
    fn full_config_without_preset() {
        let p = table1_preset();
        let text = format!(
            "mass = {}\nomega_m = {}\nq_factor = {}\ntemperature = {}\ntau = {}\n\
             cavity_length = {}\nwavelength = {}\ngamma0 = {}\ngamma0_plus = {}\n\
             gamma0_minus = {}\ngamma_e = {}\ngamma_e_plus = {}\ngamma_e_minus = {}\n\
             eps_plus = {}\neps_minus = {}\np_in = {}\n",
            p.mass,
            p.omega_m,
            p.q_factor,
            p.temperature,
            p.tau,
            p.cavity_length,
            p.wavelength,
            p.gamma0,
            p.gamma0_plus,
            p.gamma0_minus,
            p.gamma_e,
            p.gamma_e_plus,
            p.gamma_e_minus,
            p.eps_plus,
            p.eps_minus,
            p.p_in
        );
        assert_eq!(parse_params(&text, false).unwrap(), p);
    }
}
