use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{build_periodic_spline, FieldError, PeriodicField};

/// Serializable description of a closed-form field, as used in config
/// files (`{kind = "cos2", offset = 0.1, amplitude = 1.0, phase = 0.0}`)
/// and in the inline form (`cos2:0.1,1,0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        value: f64,
    },
    Cos2 {
        offset: f64,
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Spline {
        control: [f64; 4],
    },
}

impl FieldSpec {
    pub fn build(&self) -> Result<PeriodicField<f64>, FieldError> {
        match *self {
            FieldSpec::Constant { value } => Ok(PeriodicField::constant(value)),
            FieldSpec::Cos2 { offset, amplitude, phase } => Ok(PeriodicField::cos2(offset, amplitude, phase)),
            FieldSpec::Spline { control } => build_periodic_spline(&control),
        }
    }

    /// Same field translated by `omega`.
    pub fn shifted(&self, omega: f64) -> Self {
        match *self {
            FieldSpec::Cos2 { offset, amplitude, phase } => FieldSpec::Cos2 {
                offset,
                amplitude,
                phase: phase + omega,
            },
            ref other => other.clone(),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Constant { value } => write!(f, "const:{value}"),
            FieldSpec::Cos2 { offset, amplitude, phase } => write!(f, "cos2:{offset},{amplitude},{phase}"),
            FieldSpec::Spline { control } => {
                write!(f, "spline:{},{},{},{}", control[0], control[1], control[2], control[3])
            }
        }
    }
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| FieldError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| err("expected `kind:args`, e.g. `cos2:0.1,1,0`"))?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| err(&e.to_string()))?;
        match (kind.trim(), nums.as_slice()) {
            ("const" | "constant", [v]) => Ok(FieldSpec::Constant { value: *v }),
            ("cos2", [o, a]) => Ok(FieldSpec::Cos2 {
                offset: *o,
                amplitude: *a,
                phase: 0.0,
            }),
            ("cos2", [o, a, p]) => Ok(FieldSpec::Cos2 {
                offset: *o,
                amplitude: *a,
                phase: *p,
            }),
            ("spline", [a, b, c, d]) => Ok(FieldSpec::Spline { control: [*a, *b, *c, *d] }),
            ("const" | "constant", _) => Err(err("const takes one value")),
            ("cos2", _) => Err(err("cos2 takes offset,amplitude[,phase]")),
            ("spline", _) => Err(err("spline takes four control values")),
            _ => Err(err("unknown kind (expected const, cos2 or spline)")),
        }
    }
}
