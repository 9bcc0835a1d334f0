//! One- and two-body integral tables over spin-orbitals and their text format.
//!
//! ```text
//! NORB 4
//! 1B 1 1 -1.2524635735716400e0
//! 2B 1 1 1 1 6.7449362079062200e-1
//! ```
//! Indices are 1-based; omitted entries are zero.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Hermiticity tolerance for `h1`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Real integral tables `h_ij` and `h_ijkl` for `n` spin-orbitals.
///
/// `h2(i, j, k, l)` multiplies `a†_i a†_j a_k a_l` with a factor 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralTable {
    n: usize,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

impl IntegralTable {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 || n > 30 {
            return Err(Error::SizeGuard(format!(
                "integral tables support 1..=30 orbitals, got {n}"
            )));
        }
        Ok(Self {
            n,
            h1: vec![0.0; n * n],
            h2: vec![0.0; n.pow(4)],
        })
    }

    pub fn n_orbitals(&self) -> usize {
        self.n
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        for &i in idx {
            if i == 0 || i > self.n {
                return Err(Error::IndexOutOfRange {
                    what: "orbital",
                    index: i,
                    max: self.n,
                });
            }
        }
        Ok(())
    }

    fn i1(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.n + (j - 1)
    }

    fn i2(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        (((i - 1) * self.n + (j - 1)) * self.n + (k - 1)) * self.n + (l - 1)
    }

    /// `h_ij`; indices must be in `1..=n`.
    pub fn h1(&self, i: usize, j: usize) -> f64 {
        self.h1[self.i1(i, j)]
    }

    /// `h_ijkl`; indices must be in `1..=n`.
    pub fn h2(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.h2[self.i2(i, j, k, l)]
    }

    pub fn set_h1(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        self.check(&[i, j])?;
        let idx = self.i1(i, j);
        self.h1[idx] = v;
        Ok(())
    }

    pub fn set_h2(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) -> Result<()> {
        self.check(&[i, j, k, l])?;
        let idx = self.i2(i, j, k, l);
        self.h2[idx] = v;
        Ok(())
    }

    pub fn h1_values(&self) -> &[f64] {
        &self.h1
    }

    pub fn h2_values(&self) -> &[f64] {
        &self.h2
    }

    /// Largest `|h_ij - h_ji|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..=self.n {
            for j in 1..=self.n {
                worst = worst.max((self.h1(i, j) - self.h1(j, i)).abs());
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        if self.h1.iter().chain(&self.h2).any(|v| !v.is_finite()) {
            return Err(Error::Validation("integral table has non-finite entries".into()));
        }
        let d = self.hermiticity_defect();
        if d > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "one-body table is not Hermitian (max defect {d:e})"
            )));
        }
        Ok(())
    }

    /// Serializes nonzero entries at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!("NORB {}\n", self.n);
        for i in 1..=self.n {
            for j in 1..=self.n {
                let v = self.h1(i, j);
                if v != 0.0 {
                    writeln!(s, "1B {i} {j} {v:.16e}").unwrap();
                }
            }
        }
        for i in 1..=self.n {
            for j in 1..=self.n {
                for k in 1..=self.n {
                    for l in 1..=self.n {
                        let v = self.h2(i, j, k, l);
                        if v != 0.0 {
                            writeln!(s, "2B {i} {j} {k} {l} {v:.16e}").unwrap();
                        }
                    }
                }
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table: Option<IntegralTable> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let perr = |message: String| Error::Parse { line, message };
            match fields[0] {
                "NORB" => {
                    if table.is_some() {
                        return Err(perr("duplicate NORB header".into()));
                    }
                    if fields.len() != 2 {
                        return Err(perr("expected `NORB <N>`".into()));
                    }
                    let n: usize = fields[1]
                        .parse()
                        .map_err(|_| perr(format!("invalid orbital count `{}`", fields[1])))?;
                    table = Some(IntegralTable::zeros(n).map_err(|e| perr(e.to_string()))?);
                }
                kind @ ("1B" | "2B") => {
                    let t = table
                        .as_mut()
                        .ok_or_else(|| perr("entry before NORB header".into()))?;
                    let arity = if kind == "1B" { 2 } else { 4 };
                    if fields.len() != arity + 2 {
                        return Err(perr(format!(
                            "expected {arity} indices and a value after `{kind}`"
                        )));
                    }
                    let mut idx = [0usize; 4];
                    for (a, f) in fields[1..=arity].iter().enumerate() {
                        idx[a] = f
                            .parse()
                            .map_err(|_| perr(format!("invalid index `{f}`")))?;
                    }
                    let v: f64 = fields[arity + 1]
                        .parse()
                        .map_err(|_| perr(format!("invalid value `{}`", fields[arity + 1])))?;
                    let res = if kind == "1B" {
                        t.set_h1(idx[0], idx[1], v)
                    } else {
                        t.set_h2(idx[0], idx[1], idx[2], idx[3], v)
                    };
                    res.map_err(|e| perr(e.to_string()))?;
                }
                other => return Err(perr(format!("unknown record `{other}`"))),
            }
        }
        table.ok_or(Error::Parse {
            line: 0,
            message: "missing NORB header".into(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
