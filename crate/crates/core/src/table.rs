//! Pole/residue tables: the persisted form of every kernel.

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::exact::ExactKernel;
use crate::precision::{c_dd, ComplexExt, Dd, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// Maps a signal at `r1` to `r2`.
    Teleport,
    /// Outer radiation boundary kernel at radius `r1`.
    Rbc,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Teleport => "teleport",
            KernelKind::Rbc => "rbc",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "teleport" => Ok(KernelKind::Teleport),
            "rbc" => Ok(KernelKind::Rbc),
            o => Err(format!("unknown kernel kind `{o}`")),
        }
    }
}

/// A kernel `sum_n gamma_n / (s - beta_n)` with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleTable {
    pub kind: KernelKind,
    pub ell: usize,
    pub r1: f64,
    /// `f64::INFINITY` for the far-field kernel; equal to `r1` for RBC kernels.
    pub r2: f64,
    pub epsilon_achieved: f64,
    pub precision: Precision,
    pub betas: Vec<Complex<Dd>>,
    pub gammas: Vec<Complex<Dd>>,
    /// Free-form `key = value` provenance lines.
    pub metadata: Vec<(String, String)>,
}

impl PoleTable {
    pub fn new(kind: KernelKind, ell: usize, r1: f64, r2: f64) -> Self {
        PoleTable {
            kind,
            ell,
            r1,
            r2,
            epsilon_achieved: 0.0,
            precision: Precision::Extended,
            betas: Vec::new(),
            gammas: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.betas.len()
    }

    pub fn betas_c64(&self) -> Vec<Complex64> {
        self.betas.iter().map(|b| b.to_c64()).collect()
    }

    pub fn gammas_c64(&self) -> Vec<Complex64> {
        self.gammas.iter().map(|b| b.to_c64()).collect()
    }

    pub fn max_gamma(&self) -> f64 {
        self.gammas
            .iter()
            .map(|g| g.to_c64().norm())
            .fold(0.0, f64::max)
    }

    pub fn min_gamma(&self) -> f64 {
        self.gammas
            .iter()
            .map(|g| g.to_c64().norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_real_beta(&self) -> f64 {
        self.betas
            .iter()
            .map(|b| b.re.to_f64())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let v = value.to_string();
        if let Some(e) = self.metadata.iter_mut().find(|(k, _)| k == key) {
            e.1 = v;
        } else {
            self.metadata.push((key.to_string(), v));
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// `sum_n gamma_n / (s - beta_n)` in double precision.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.betas
            .iter()
            .zip(&self.gammas)
            .map(|(b, g)| g.to_c64() / (s - b.to_c64()))
            .sum()
    }

    /// `sum_n gamma_n / (s - beta_n)` in double-double.
    pub fn eval_dd(&self, s: Complex<Dd>) -> Complex<Dd> {
        let mut acc = Complex::new(Dd::ZERO, Dd::ZERO);
        for (b, g) in self.betas.iter().zip(&self.gammas) {
            acc += g / (s - b);
        }
        acc
    }

    /// The sum of residues, i.e. the time-domain kernel at `t = 0`.
    pub fn residue_sum(&self) -> Complex64 {
        self.gammas.iter().map(|g| g.to_c64()).sum()
    }

    /// Rejects tables that are not closed under conjugation or that
    /// contain poles outside the open left half-plane.
    pub fn check_stable(&self) -> Result<()> {
        for b in &self.betas {
            if !(b.re.to_f64() < 0.0) {
                return Err(Error::UnstableKernel(format!("{}", b.to_c64())));
            }
        }
        Ok(())
    }

    pub fn is_conjugate_closed(&self) -> bool {
        let pairs: Vec<(Complex<Dd>, Complex<Dd>)> = self
            .betas
            .iter()
            .copied()
            .zip(self.gammas.iter().copied())
            .collect();
        pairs.iter().all(|(b, g)| {
            pairs
                .iter()
                .any(|(b2, g2)| *b2 == b.conj() && *g2 == g.conj())
        })
    }

    /// Rounds every entry to `f64`, as stored in double format.
    pub fn to_double(&self) -> PoleTable {
        let round = |z: &Complex<Dd>| c_dd(z.to_c64());
        PoleTable {
            precision: Precision::Double,
            betas: self.betas.iter().map(round).collect(),
            gammas: self.gammas.iter().map(round).collect(),
            ..self.clone()
        }
    }

    /// The same kernel for inner radius `new_r1` with `r2 / r1` fixed:
    /// poles and residues scale by `r1 / new_r1`.
    pub fn rescaled(&self, new_r1: f64) -> Result<PoleTable> {
        if !(new_r1 > 0.0 && new_r1.is_finite()) {
            return Err(Error::InvalidArgument(format!("new r1 = {new_r1}")));
        }
        if new_r1 == self.r1 {
            return Ok(self.clone());
        }
        let f = Dd::from_f64(self.r1) / Dd::from_f64(new_r1);
        let sc = |z: &Complex<Dd>| z.scale(f);
        Ok(PoleTable {
            r1: new_r1,
            r2: self.r2 / self.r1 * new_r1,
            betas: self.betas.iter().map(sc).collect(),
            gammas: self.gammas.iter().map(sc).collect(),
            ..self.clone()
        })
    }
}

impl From<&ExactKernel> for PoleTable {
    fn from(k: &ExactKernel) -> Self {
        let mut t = PoleTable::new(KernelKind::Teleport, k.ell, k.r1, k.r2);
        t.precision = k.precision;
        t.betas = k.poles.clone();
        t.gammas = k.residues.clone();
        t.set_meta("source", "exact");
        t
    }
}
