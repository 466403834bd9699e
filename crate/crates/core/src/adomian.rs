//! Adomian polynomials `A_n` of a nonlinearity `f` for numeric components.
//!
//! `A_n` is the coefficient of `λ^n` in `f(Σ u_m λ^m)`. Two routes are
//! provided:
//!
//! * [`adomian_duan`] : Duan's triangular recurrence
//!   `C_n^1 = u_n`, `C_n^k = (1/n) Σ_{j=0}^{n−k} (j+1) u_{j+1} C_{n−1−j}^{k−1}`,
//!   then `A_n = Σ_{k=1}^{n} C_n^k f^(k)(u_0)`. Only additions and
//!   multiplications on top of the derivative values at `u_0`.
//! * [`adomian_oracle`] : the definition itself: lift `f` through the
//!   truncated λ-series of the components and read off the coefficients.
//!
//! When the components are the differential transforms `U(0), U(1), …` of a
//! function `u(x)`, `A_n` is the differential transform of `f(u(x))`. The
//! series solver uses this with the index offset of the ODE recurrence:
//! `U(k+1)` is built from `A_{k−1}`, so for instance `U(4) = A_2 / 20` in the
//! spherical case. `A_3` is identically zero there because every odd
//! transform vanishes; using it would give `U(4) = 0`.

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::powerseries::TruncatedSeries;

/// The lower-triangular table `C_n^k`, `1 ≤ k ≤ n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CTable {
    rows: Vec<Vec<f64>>,
}

impl CTable {
    /// `C_n^k` for `1 ≤ k ≤ n`.
    pub fn get(&self, n: usize, k: usize) -> f64 {
        assert!(k >= 1 && k <= n, "C_n^k needs 1 <= k <= n (n={n}, k={k})");
        self.rows[n][k - 1]
    }

    /// Row `n`, holding `C_n^1 ..= C_n^n`.
    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    /// Largest `n` covered by the table.
    pub fn max_n(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    fn push_row(&mut self, components: &[f64]) {
        let n = self.rows.len();
        if n == 0 {
            self.rows.push(Vec::new());
            return;
        }
        let mut row = Vec::with_capacity(n);
        row.push(components[n]);
        for k in 2..=n {
            let mut acc = 0.0;
            for j in 0..=n - k {
                acc += (j + 1) as f64 * components[j + 1] * self.rows[n - 1 - j][k - 2];
            }
            row.push(acc / n as f64);
        }
        self.rows.push(row);
    }
}

/// Components together with their table and polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct AdomianSequence {
    pub components: Vec<f64>,
    pub ctable: CTable,
    pub polys: Vec<f64>,
}

/// Incremental form of Duan's recurrence: components are appended one at a
/// time and each push yields the next polynomial. Row `n` of the table only
/// needs `u_1 ..= u_n`, so `A_n` is available as soon as `u_n` is known.
#[derive(Debug, Clone)]
pub struct DuanGenerator {
    derivs: Vec<f64>,
    components: Vec<f64>,
    table: CTable,
}

impl DuanGenerator {
    /// `derivs[k]` must hold `f^(k)(u0)`; its length bounds how many
    /// polynomials can be generated.
    pub fn new(u0: f64, derivs: Vec<f64>) -> Self {
        let mut table = CTable::default();
        table.push_row(&[u0]);
        Self {
            derivs,
            components: vec![u0],
            table,
        }
    }

    pub fn for_nonlinearity(f: &Nonlinearity, u0: f64, max_n: usize) -> Result<Self> {
        Ok(Self::new(u0, f.derivatives(u0, max_n)?))
    }

    /// `A_0 = f(u_0)`.
    pub fn first(&self) -> f64 {
        self.derivs[0]
    }

    /// Appends `u_n` and returns `A_n`.
    pub fn push(&mut self, u: f64) -> Result<f64> {
        let n = self.components.len();
        if n >= self.derivs.len() {
            return Err(Error::Usage(format!(
                "A_{n} needs f^({n})(u0) but only {} derivatives were supplied",
                self.derivs.len()
            )));
        }
        self.components.push(u);
        self.table.push_row(&self.components);
        let a = self
            .table
            .row(n)
            .iter()
            .zip(&self.derivs[1..])
            .fold(0.0, |acc, (c, d)| acc + c * d);
        Ok(a)
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn into_table(self) -> CTable {
        self.table
    }
}

/// Rows `0..=n` of the `C_n^k` table.
pub fn duan_ctable(components: &[f64], n: usize) -> Result<CTable> {
    check_len(components, n)?;
    let mut table = CTable::default();
    for m in 0..=n {
        table.push_row(&components[..=m]);
    }
    Ok(table)
}

/// `A_0 ..= A_n` from explicit derivative values `derivs[k] = f^(k)(u_0)`.
///
/// The map is linear in `derivs`, which is what makes `A_n(αf + βg) =
/// α A_n(f) + β A_n(g)` hold.
pub fn adomian_from_derivatives(components: &[f64], derivs: &[f64], n: usize) -> Result<Vec<f64>> {
    check_len(components, n)?;
    if derivs.len() < n + 1 {
        return Err(Error::Usage(format!(
            "need {} derivative values, got {}",
            n + 1,
            derivs.len()
        )));
    }
    let mut gen = DuanGenerator::new(components[0], derivs[..=n].to_vec());
    let mut polys = vec![gen.first()];
    for &u in &components[1..=n] {
        polys.push(gen.push(u)?);
    }
    Ok(polys)
}

/// Duan's recurrence: the production path.
pub fn adomian_duan(components: &[f64], f: &Nonlinearity, n: usize) -> Result<AdomianSequence> {
    check_len(components, n)?;
    let mut gen = DuanGenerator::for_nonlinearity(f, components[0], n)?;
    let mut polys = vec![gen.first()];
    for &u in &components[1..=n] {
        polys.push(gen.push(u)?);
    }
    Ok(AdomianSequence {
        components: components[..=n].to_vec(),
        ctable: gen.into_table(),
        polys,
    })
}

/// The definitional route: coefficients of `f(Σ u_m λ^m)` up to `λ^n`.
pub fn adomian_oracle(components: &[f64], f: &Nonlinearity, n: usize) -> Result<Vec<f64>> {
    check_len(components, n)?;
    let lambda_series = TruncatedSeries::new(components[..=n].to_vec())?;
    Ok(f.lift(&lambda_series)?.into_coeffs())
}

fn check_len(components: &[f64], n: usize) -> Result<()> {
    if components.len() < n + 1 {
        return Err(Error::Usage(format!(
            "A_{n} needs {} components, got {}",
            n + 1,
            components.len()
        )));
    }
    Ok(())
}

/// `|a − b| ≤ max(rel·max(|a|,|b|), abs)`: the comparison used between the
/// two routes, which tolerates polynomials that are zero up to rounding.
pub fn close_mixed(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= (rel * a.abs().max(b.abs())).max(abs)
}
