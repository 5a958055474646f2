//! Extended-precision arithmetic: double-double scalars, a scalar trait
//! shared with `f64`, and an arbitrary-precision complex type.

pub mod dd;
pub mod mp;
pub mod real;

pub use dd::Dd;
pub use mp::{Mc, Mf};
pub use real::{c_dd, ComplexExt, Real};

/// Working precision of an offline computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Double,
    Extended,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Double => "double",
            Precision::Extended => "extended",
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!("unknown precision class `{other}`")),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
