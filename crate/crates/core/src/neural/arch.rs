use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimensionality {
    #[serde(rename = "1D")]
    OneD,
    #[serde(rename = "2D")]
    TwoD,
}

impl fmt::Display for Dimensionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimensionality::OneD => "1D",
            Dimensionality::TwoD => "2D",
        })
    }
}

/// Width/depth of a residual network: filters of the first block, blocks
/// between channel doublings, and total block count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureVariant {
    pub name: String,
    pub dimensionality: Dimensionality,
    pub initial_filters: usize,
    pub n_double: usize,
    pub n_total: usize,
}

/// Published size of a named variant, for side-by-side reporting only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportedSize {
    pub parameters: f64,
    pub flops: f64,
}

struct Row {
    name: &'static str,
    dims: Dimensionality,
    initial: usize,
    n_double: usize,
    n_total: usize,
    params: f64,
    flops: f64,
}

const fn row(
    name: &'static str,
    dims: Dimensionality,
    initial: usize,
    n_double: usize,
    n_total: usize,
    params: f64,
    flops: f64,
) -> Row {
    Row {
        name,
        dims,
        initial,
        n_double,
        n_total,
        params,
        flops,
    }
}

use Dimensionality::{OneD, TwoD};

const TABLE: [Row; 10] = [
    row("1D-A", OneD, 32, 3, 12, 1.5e6, 3.0e8),
    row("1D-B", OneD, 16, 3, 9, 1.0e5, 2.0e7),
    row("1D-C", OneD, 16, 2, 6, 6.8e4, 1.3e7),
    row("1D-D", OneD, 16, 1, 3, 3.5e4, 6.9e6),
    row("1D-E", OneD, 8, 1, 3, 1.0e4, 2.1e6),
    row("2D-A", TwoD, 16, 3, 9, 2.7e5, 4.0e9),
    row("2D-B", TwoD, 16, 2, 6, 1.7e5, 2.6e9),
    row("2D-C", TwoD, 8, 2, 6, 4.4e4, 6.5e8),
    row("2D-D", TwoD, 8, 2, 4, 1.1e4, 1.6e8),
    row("2D-E", TwoD, 4, 2, 4, 2.9e3, 4.1e7),
];

impl ArchitectureVariant {
    pub fn custom(
        name: impl Into<String>,
        dimensionality: Dimensionality,
        initial_filters: usize,
        n_double: usize,
        n_total: usize,
    ) -> Result<Self> {
        let v = Self {
            name: name.into(),
            dimensionality,
            initial_filters,
            n_double,
            n_total,
        };
        v.validate()?;
        Ok(v)
    }

    /// One of the ten evaluated variants, `"1D-A"` .. `"2D-E"`.
    pub fn named(name: &str) -> Result<Self> {
        let upper = name.trim().to_ascii_uppercase();
        TABLE
            .iter()
            .find(|r| r.name == upper)
            .map(|r| Self {
                name: r.name.to_string(),
                dimensionality: r.dims,
                initial_filters: r.initial,
                n_double: r.n_double,
                n_total: r.n_total,
            })
            .ok_or_else(|| Error::InvalidVariant {
                name: name.to_string(),
                valid: Self::names().join(", "),
            })
    }

    pub fn names() -> Vec<&'static str> {
        TABLE.iter().map(|r| r.name).collect()
    }

    pub fn all() -> Vec<Self> {
        TABLE.iter().map(|r| Self::named(r.name).unwrap()).collect()
    }

    pub fn reported(&self) -> Option<ReportedSize> {
        TABLE.iter().find(|r| r.name == self.name).map(|r| ReportedSize {
            parameters: r.params,
            flops: r.flops,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total < 1 || self.n_double < 1 || self.initial_filters < 1 {
            return Err(Error::InvalidVariant {
                name: format!(
                    "{} (filters {}, n_double {}, n_total {})",
                    self.name, self.initial_filters, self.n_double, self.n_total
                ),
                valid: "n_total >= 1, n_double >= 1, initial_filters >= 1".into(),
            });
        }
        Ok(())
    }

    /// Output channels of each block: block `b` (1-based) has
    /// `initial · 2^floor((b-1) / n_double)` filters.
    pub fn channel_plan(&self) -> Vec<usize> {
        (0..self.n_total)
            .map(|b| self.initial_filters << (b / self.n_double))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_rule_examples() {
        assert_eq!(ArchitectureVariant::named("1D-E").unwrap().channel_plan(), vec![8, 16, 32]);
        assert_eq!(
            ArchitectureVariant::named("1D-B").unwrap().channel_plan(),
            vec![16, 16, 16, 32, 32, 32, 64, 64, 64]
        );
        let single = ArchitectureVariant::custom("x", OneD, 12, 2, 1).unwrap();
        assert_eq!(single.channel_plan(), vec![12]);
    }

    #[test]
    fn named_lookup() {
        assert_eq!(ArchitectureVariant::all().len(), 10);
        let v = ArchitectureVariant::named("2d-a").unwrap();
        assert_eq!((v.initial_filters, v.n_double, v.n_total), (16, 3, 9));
        assert_eq!(v.dimensionality, TwoD);
        let err = ArchitectureVariant::named("3D-A").unwrap_err().to_string();
        assert!(err.contains("1D-A") && err.contains("2D-E"), "{err}");
        assert!(ArchitectureVariant::custom("bad", OneD, 8, 0, 3).is_err());
    }
}
