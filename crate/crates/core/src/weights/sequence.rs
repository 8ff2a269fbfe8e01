use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive sequence indexed by the lattice state `m >= 1`.
///
/// JSON forms: a tag string (`"eq14"`, `"reciprocal"`, `"identity"`), a
/// number (constant), or an array (table, `table[m-1]`; the last entry is
/// reused beyond the end).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub enum Sequence {
    /// `m^{-(3 - (m mod 3))}`.
    PeriodicPower,
    /// `1/m`.
    Reciprocal,
    /// `m`.
    Identity,
    Constant(f64),
    Table(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Tag(String),
    Constant(f64),
    Table(Vec<f64>),
}

impl TryFrom<Repr> for Sequence {
    type Error = String;

    fn try_from(r: Repr) -> std::result::Result<Self, String> {
        match r {
            Repr::Tag(t) => match t.as_str() {
                "eq14" => Ok(Sequence::PeriodicPower),
                "reciprocal" => Ok(Sequence::Reciprocal),
                "identity" => Ok(Sequence::Identity),
                other => Err(format!("unknown sequence tag {other:?}")),
            },
            Repr::Constant(c) => Ok(Sequence::Constant(c)),
            Repr::Table(t) if t.is_empty() => Err("sequence table is empty".into()),
            Repr::Table(t) => Ok(Sequence::Table(t)),
        }
    }
}

impl From<Sequence> for Repr {
    fn from(s: Sequence) -> Self {
        match s {
            Sequence::PeriodicPower => Repr::Tag("eq14".into()),
            Sequence::Reciprocal => Repr::Tag("reciprocal".into()),
            Sequence::Identity => Repr::Tag("identity".into()),
            Sequence::Constant(c) => Repr::Constant(c),
            Sequence::Table(t) => Repr::Table(t),
        }
    }
}

impl Sequence {
    pub fn value(&self, m: i64) -> Result<f64> {
        if m < 1 {
            return Err(Error::InvalidInput(format!("sequence index must be >= 1, got {m}")));
        }
        let mf = m as f64;
        Ok(match self {
            Sequence::PeriodicPower => mf.powi(-(3 - (m % 3) as i32)),
            Sequence::Reciprocal => 1.0 / mf,
            Sequence::Identity => mf,
            Sequence::Constant(c) => *c,
            Sequence::Table(t) => {
                let i = ((m - 1) as usize).min(t.len() - 1);
                t[i]
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_power_values() {
        let s = Sequence::PeriodicPower;
        assert_eq!(s.value(1).unwrap(), 1.0);
        assert_eq!(s.value(2).unwrap(), 0.5);
        assert!((s.value(3).unwrap() - 1.0 / 27.0).abs() < 1e-16);
        assert!((s.value(4).unwrap() - 1.0 / 16.0).abs() < 1e-16);
        assert!((s.value(5).unwrap() - 0.2).abs() < 1e-16);
        assert!(s.value(0).is_err());
    }

    #[test]
    fn table_extends_with_last_entry() {
        let s = Sequence::Table(vec![0.5, 0.25]);
        assert_eq!(s.value(1).unwrap(), 0.5);
        assert_eq!(s.value(2).unwrap(), 0.25);
        assert_eq!(s.value(50).unwrap(), 0.25);
    }

    #[test]
    fn json_forms() {
        let s: Sequence = serde_json::from_str("\"reciprocal\"").unwrap();
        assert_eq!(s, Sequence::Reciprocal);
        let c: Sequence = serde_json::from_str("0.3").unwrap();
        assert_eq!(c, Sequence::Constant(0.3));
        assert!(serde_json::from_str::<Sequence>("\"bogus\"").is_err());
        assert!(serde_json::from_str::<Sequence>("[]").is_err());
        assert_eq!(serde_json::to_string(&Sequence::PeriodicPower).unwrap(), "\"eq14\"");
    }
}
