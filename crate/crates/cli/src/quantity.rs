//! Unit-suffixed physical inputs such as `4.52 GHz` or `81.94 fF`.
//!
//! Config values and flags must name their unit; a bare number is
//! rejected so that a missing `M` cannot silently scale an input by 1e3.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const FREQUENCY_UNITS: [(&str, f64); 4] = [("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)];
const CAPACITANCE_UNITS: [(&str, f64); 6] =
    [("aF", 1e-18), ("fF", 1e-15), ("pF", 1e-12), ("nF", 1e-9), ("uF", 1e-6), ("F", 1.0)];

fn parse_with_units(text: &str, units: &[(&str, f64)]) -> Result<f64, String> {
    let t = text.trim();
    let names = || units.iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ");
    let (unit, scale) = units
        .iter()
        .find(|(u, _)| t.ends_with(u))
        .ok_or_else(|| format!("'{t}' needs a unit suffix (one of {})", names()))?;
    let number = t[..t.len() - unit.len()].trim();
    let value: f64 = number
        .parse()
        .map_err(|_| format!("'{t}': '{number}' is not a number"))?;
    if !value.is_finite() {
        return Err(format!("'{t}' is not finite"));
    }
    Ok(value * scale)
}

macro_rules! quantity {
    ($name:ident, $units:expr, $base:literal, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                parse_with_units(s, &$units).map($name)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $base)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = serde_json::Value::deserialize(d)?;
                match raw {
                    serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
                    other => Err(serde::de::Error::custom(format!(
                        "{other} needs a unit suffix, e.g. \"{}\"",
                        $units[0].0
                    ))),
                }
            }
        }
    };
}

quantity!(Frequency, FREQUENCY_UNITS, "Hz", "Cyclic frequency in Hz.");
quantity!(Capacitance, CAPACITANCE_UNITS, "F", "Capacitance in farads.");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suffixes() {
        assert_eq!("4.52 GHz".parse::<Frequency>().unwrap().0, 4.52e9);
        assert_eq!("-8.82MHz".parse::<Frequency>().unwrap().0, -8.82e6);
        assert_eq!("1e9 Hz".parse::<Frequency>().unwrap().0, 1e9);
        assert_eq!("81.94 fF".parse::<Capacitance>().unwrap().0, 81.94e-15);
        assert_eq!("2e-15 F".parse::<Capacitance>().unwrap().0, 2e-15);
    }

    #[test]
    fn rejects_bare_and_wrong_units() {
        assert!("4.52".parse::<Frequency>().is_err());
        assert!("4.52 fF".parse::<Frequency>().is_err());
        assert!("GHz".parse::<Frequency>().is_err());
        assert!("80 GHz".parse::<Capacitance>().is_err());
    }

    #[test]
    fn display_round_trips() {
        let f: Frequency = "5.1629 GHz".parse().unwrap();
        assert_eq!(f.to_string().parse::<Frequency>().unwrap(), f);
        let c: Capacitance = "0.216 fF".parse().unwrap();
        assert_eq!(c.to_string().parse::<Capacitance>().unwrap(), c);
    }
}
