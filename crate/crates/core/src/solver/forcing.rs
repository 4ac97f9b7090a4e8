use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::library::FieldName;
use crate::scalar::Scalar;

/// Time-dependent forcing `f(t) = amplitude · s(t) · field`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Forcing<T> {
    #[default]
    None,
    Steady { field: FieldName, amplitude: T },
    /// `s(t) = t^exponent`.
    PowerLaw { field: FieldName, amplitude: T, exponent: T },
}

impl<T: Scalar> Forcing<T> {
    pub fn field(&self) -> Option<FieldName> {
        match *self {
            Forcing::None => None,
            Forcing::Steady { field, .. } | Forcing::PowerLaw { field, .. } => Some(field),
        }
    }

    pub fn amplitude(&self, t: T) -> T {
        match *self {
            Forcing::None => T::zero(),
            Forcing::Steady { amplitude, .. } => amplitude,
            Forcing::PowerLaw { amplitude, exponent, .. } => amplitude * t.powf(exponent),
        }
    }
}

impl<T: Scalar> fmt::Display for Forcing<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::None => f.write_str("none"),
            Forcing::Steady { field, amplitude } => write!(f, "steady:{field}:{amplitude}"),
            Forcing::PowerLaw { field, amplitude, exponent } => write!(f, "power-law:{field}:{amplitude}:{exponent}"),
        }
    }
}

/// `none`, `steady:<field>[:<amplitude>]` or `power-law:<field>:<amplitude>:<exponent>`.
impl<T: Scalar> FromStr for Forcing<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArguments(format!("unrecognized forcing: {s}"));
        let num = |v: &str| v.parse::<f64>().map(T::lit).map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["none"] => Ok(Forcing::None),
            ["steady", field] => Ok(Forcing::Steady { field: field.parse()?, amplitude: T::one() }),
            ["steady", field, a] => Ok(Forcing::Steady { field: field.parse()?, amplitude: num(a)? }),
            ["power-law", field, a, e] => {
                Ok(Forcing::PowerLaw { field: field.parse()?, amplitude: num(a)?, exponent: num(e)? })
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in ["none", "steady:killing:2", "power-law:harmonic-df:1:-0.25"] {
            let f: Forcing<f64> = s.parse().unwrap();
            assert_eq!(f.to_string().parse::<Forcing<f64>>().unwrap(), f);
        }
        assert!("gust".parse::<Forcing<f64>>().is_err());
        let f: Forcing<f64> = "power-law:harmonic-df:1:-0.25".parse().unwrap();
        assert!((f.amplitude(16.0) - 0.5).abs() < 1e-15);
    }
}
