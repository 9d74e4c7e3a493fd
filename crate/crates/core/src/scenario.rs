//! Named parameter variants.
//!
//! A scenario toggles at most three things on top of a base parameter set:
//! mode symmetry, optical loss and the pump multiplier. Everything else is
//! inherited unchanged.

use std::fmt;

use serde::Serialize;

use crate::params::PhysParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Sym,
    Nonsym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Lossy,
    Lossless,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub symmetry: Symmetry,
    pub loss: Loss,
    pub pump: f64,
}

impl Scenario {
    pub fn new(name: impl Into<String>, symmetry: Symmetry, loss: Loss, pump: f64) -> Self {
        Self {
            name: name.into(),
            symmetry,
            loss,
            pump,
        }
    }

    pub fn apply(&self, base: &PhysParams) -> PhysParams {
        let mut p = *base;
        if self.symmetry == Symmetry::Sym {
            p = p.symmetric();
        }
        if self.loss == Loss::Lossless {
            p = p.lossless();
        }
        p.with_pump_multiplier(self.pump)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.symmetry {
            Symmetry::Sym => "symmetric",
            Symmetry::Nonsym => "non-symmetric",
        };
        let loss = match self.loss {
            Loss::Lossy => "lossy",
            Loss::Lossless => "lossless",
        };
        write!(f, "{:<20} {sym}, {loss}, pump ×{}", self.name, self.pump)
    }
}

/// Every named preset, in listing order.
pub fn presets() -> Vec<Scenario> {
    use Loss::*;
    use Symmetry::*;
    vec![
        Scenario::new("fig2-sym", Sym, Lossless, 1.0),
        Scenario::new("fig2-nonsym", Nonsym, Lossless, 1.0),
        Scenario::new("fig2-nonsym-10P", Nonsym, Lossless, 10.0),
        Scenario::new("fig3-lossy-1P", Nonsym, Lossy, 1.0),
        Scenario::new("fig3-lossless-1P", Nonsym, Lossless, 1.0),
        Scenario::new("fig3-lossy-10P", Nonsym, Lossy, 10.0),
        Scenario::new("fig3-lossless-10P", Nonsym, Lossless, 10.0),
        Scenario::new("fig4-lossy-1P", Sym, Lossy, 1.0),
        Scenario::new("fig4-lossless-1P", Sym, Lossless, 1.0),
        Scenario::new("fig4-lossy-10P", Sym, Lossy, 10.0),
        Scenario::new("fig4-lossless-10P", Sym, Lossless, 10.0),
    ]
}

/// Group names that expand to several presets.
pub const GROUPS: [&str; 4] = ["fig2", "fig3", "fig4", "all"];

/// Resolves a preset, a group, or `custom:{sym|nonsym}:{lossy|lossless}:K`.
pub fn resolve(name: &str) -> Result<Vec<Scenario>> {
    let all = presets();
    if name == "all" {
        return Ok(all);
    }
    if GROUPS.contains(&name) {
        let prefix = format!("{name}-");
        return Ok(all
            .into_iter()
            .filter(|s| s.name.starts_with(&prefix))
            .collect());
    }
    if let Some(s) = all.iter().find(|s| s.name == name) {
        return Ok(vec![s.clone()]);
    }
    if let Some(rest) = name.strip_prefix("custom:") {
        return parse_custom(name, rest).map(|s| vec![s]);
    }
    Err(Error::Config(format!(
        "unknown scenario `{name}` (see the `presets` command)"
    )))
}

fn parse_custom(name: &str, rest: &str) -> Result<Scenario> {
    let bad = || {
        Error::Config(format!(
            "expected custom:{{sym|nonsym}}:{{lossy|lossless}}:K, got `{name}`"
        ))
    };
    let parts: Vec<&str> = rest.split(':').collect();
    let [sym, loss, pump] = parts[..] else {
        return Err(bad());
    };
    let symmetry = match sym {
        "sym" => Symmetry::Sym,
        "nonsym" => Symmetry::Nonsym,
        _ => return Err(bad()),
    };
    let loss = match loss {
        "lossy" => Loss::Lossy,
        "lossless" => Loss::Lossless,
        _ => return Err(bad()),
    };
    let pump: f64 = pump.parse().map_err(|_| bad())?;
    if !(pump > 0.0 && pump.is_finite()) {
        return Err(Error::Config(format!(
            "pump multiplier must be positive in `{name}`"
        )));
    }
    Ok(Scenario::new(name, symmetry, loss, pump))
}

/// Resolves several names, rejecting duplicates after expansion.
pub fn resolve_all<S: AsRef<str>>(names: &[S]) -> Result<Vec<Scenario>> {
    let mut out: Vec<Scenario> = Vec::new();
    for n in names {
        for s in resolve(n.as_ref())? {
            if out.iter().any(|o| o.name == s.name) {
                return Err(Error::Config(format!(
                    "scenario `{}` requested twice",
                    s.name
                )));
            }
            out.push(s);
        }
    }
    Ok(out)
}
