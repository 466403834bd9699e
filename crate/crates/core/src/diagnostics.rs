//! Error and residual measures for series solutions.
//!
//! * `E_N(x) = |u(x) − u_N(x)|` and its maximum `ME_N` over `[0, 1]`, for
//!   problems with a closed-form solution.
//! * The a-priori bound `TE_N = M/(N+1)! + max_k |c_k|` with
//!   `c_k = u^(k)(0)/k! − U(k)`.
//! * The ODE residual `ER_N(x) = |u_N'' + (α/x) u_N' − f(u_N)|` on `(0, 1]`
//!   and its maximum `MER_N`, usable for any problem.
//!
//! Max norms are taken on a uniform grid (1001 points by default).

use crate::error::{Error, Result};
use crate::powerseries::{derivative_coeffs, horner, TruncatedSeries};
use crate::solver::SeriesSolution;

pub const DEFAULT_GRID_POINTS: usize = 1001;

/// `points` equally spaced values from 0 to 1 inclusive.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least two points");
    let last = (points - 1) as f64;
    (0..points).map(|i| i as f64 / last).collect()
}

/// [`uniform_grid`] without the origin, where the residual is undefined.
pub fn open_grid(points: usize) -> Vec<f64> {
    uniform_grid(points).into_iter().skip(1).collect()
}

/// Problems with a known closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactSolution {
    /// `u = √(3/(3+x²))` for `u'' + (2/x)u' = −u⁵`, `u(1) = √3/2`.
    IsothermalGasSphere,
    /// `u = 2 ln((C+1)/(Cx²+1))`, `C = 3 − 2√2`, for `u'' + u'/x = −eᵘ`, `u(1) = 0`.
    ThermalExplosion,
}

impl ExactSolution {
    pub fn name(&self) -> &'static str {
        match self {
            Self::IsothermalGasSphere => "isothermal_gas_sphere",
            Self::ThermalExplosion => "thermal_explosion",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "isothermal_gas_sphere" => Some(Self::IsothermalGasSphere),
            "thermal_explosion" => Some(Self::ThermalExplosion),
            _ => None,
        }
    }

    fn explosion_constant() -> f64 {
        3.0 - 2.0 * 2f64.sqrt()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::IsothermalGasSphere => (3.0 / (3.0 + x * x)).sqrt(),
            Self::ThermalExplosion => {
                let c = Self::explosion_constant();
                2.0 * ((c + 1.0) / (c * x * x + 1.0)).ln()
            }
        }
    }

    /// Taylor coefficients at `x = 0` through `x^order`.
    pub fn taylor(&self, order: usize) -> Result<TruncatedSeries> {
        // Both are functions of t = x²; expand in t, then spread to even powers.
        let half = order / 2;
        let in_t = match self {
            Self::IsothermalGasSphere => {
                let mut base = TruncatedSeries::one(half).into_coeffs();
                if half >= 1 {
                    base[1] = 1.0 / 3.0;
                }
                TruncatedSeries::new(base)?.powf(-0.5)?
            }
            Self::ThermalExplosion => {
                let c = Self::explosion_constant();
                let mut base = TruncatedSeries::one(half).into_coeffs();
                if half >= 1 {
                    base[1] = c;
                }
                TruncatedSeries::new(base)?
                    .ln()?
                    .scale(-2.0)?
                    .offset(2.0 * (c + 1.0).ln())?
            }
        };
        Ok(in_t.substitute_square(order))
    }
}

/// How `M/(N+1)!` in the a-priori bound is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RemainderEstimate {
    /// The magnitude of the exact Taylor term at the truncation order,
    /// `max(|u^(N)(0)|/N!, |u^(N+1)(0)|/(N+1)!)`. This is the estimate that
    /// reproduces the published `TE_N` tables.
    #[default]
    TaylorTerm,
    /// `max_{[0,1]} |u^(N+1)(x)| / (N+1)!` from the guard-extended Taylor
    /// polynomial of the exact solution, differentiated termwise.
    DerivativeMax,
}

impl RemainderEstimate {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TaylorTerm => "taylor_term",
            Self::DerivativeMax => "derivative_max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Extra exact Taylor terms beyond `N + 1` for [`RemainderEstimate::DerivativeMax`].
    /// Doubled automatically while the tail has not settled.
    pub guard: usize,
    pub mode: RemainderEstimate,
    pub grid_points: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            guard: 30,
            mode: RemainderEstimate::default(),
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

const MAX_GUARD: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Bound {
    pub te: f64,
    pub c_max: f64,
    pub m_over_fact: f64,
    pub mode: RemainderEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub grid: Vec<f64>,
    pub errors: Vec<f64>,
    pub me: f64,
    pub bound: Option<Lemma1Bound>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTable {
    pub grid: Vec<f64>,
    /// `|ER(x)|`, or `+∞` where `f(u_N(x))` is undefined.
    pub values: Vec<f64>,
    /// Indices excluded from `mer` because `f` was undefined there.
    pub flagged: Vec<usize>,
    pub mer: f64,
}

/// `E_N` on `grid` and its maximum.
pub fn abs_error(s: &SeriesSolution, exact: ExactSolution, grid: &[f64]) -> ErrorTable {
    let errors: Vec<f64> = grid.iter().map(|&x| (exact.eval(x) - s.eval(x)).abs()).collect();
    let me = errors.iter().copied().fold(0.0, f64::max);
    ErrorTable {
        grid: grid.to_vec(),
        errors,
        me,
        bound: None,
    }
}

/// The a-priori bound `TE_N = M/(N+1)! + max |c_k|`.
pub fn lemma1_bound(s: &SeriesSolution, exact: ExactSolution, opts: &BoundOptions) -> Result<Lemma1Bound> {
    let n = s.order();
    let taylor = exact.taylor(n + 1)?;
    let c_max = s
        .coeffs()
        .coeffs()
        .iter()
        .zip(taylor.coeffs())
        .map(|(u, t)| (t - u).abs())
        .fold(0.0, f64::max);
    let m_over_fact = match opts.mode {
        RemainderEstimate::TaylorTerm => taylor[n].abs().max(taylor[n + 1].abs()),
        RemainderEstimate::DerivativeMax => derivative_max(exact, n, opts)?,
    };
    Ok(Lemma1Bound {
        te: m_over_fact + c_max,
        c_max,
        m_over_fact,
        mode: opts.mode,
    })
}

/// `max_{[0,1]} |u^(N+1)(x)| / (N+1)!`.
///
/// With `u = Σ a_k x^k`, the scaled derivative is
/// `Σ_j C(j+N+1, N+1) a_{j+N+1} x^j`. Its terms at `x = 1` must die out
/// within the guard, otherwise the guard is doubled; if the terms keep
/// growing the series does not converge on `[0, 1]` and no bound is given.
fn derivative_max(exact: ExactSolution, n: usize, opts: &BoundOptions) -> Result<f64> {
    let mut guard = opts.guard.max(8);
    loop {
        let top = n + 1 + guard;
        let t = exact.taylor(top)?;
        let mut binom = 1.0;
        let mut d = Vec::with_capacity(guard + 1);
        for j in 0..=guard {
            if j > 0 {
                binom *= (j + n + 1) as f64 / j as f64;
            }
            d.push(binom * t[j + n + 1]);
        }

        let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        let quarter = (guard / 4).max(2);
        let tail = mags[guard + 1 - quarter..].iter().copied().fold(0.0, f64::max);
        let before = mags[guard + 1 - 2 * quarter..guard + 1 - quarter]
            .iter()
            .copied()
            .fold(0.0, f64::max);
        let total: f64 = mags.iter().sum();
        let settled = tail <= 1e-12 * total || (tail < before && tail <= 1e-9 * total);
        if settled {
            let grid = uniform_grid(opts.grid_points);
            return Ok(grid.iter().map(|&x| horner(&d, x).abs()).fold(0.0, f64::max));
        }
        if guard >= MAX_GUARD {
            return Err(Error::BoundUnavailable(format!(
                "Taylor terms of {} do not decay on [0, 1] within {guard} guard terms",
                exact.name()
            )));
        }
        guard *= 2;
    }
}

/// `|u_N'' + (α/x) u_N' − f(u_N)|` on a grid excluding the origin.
pub fn residual(s: &SeriesSolution, grid: &[f64]) -> Result<ResidualTable> {
    if grid.iter().any(|&x| x <= 0.0) {
        return Err(Error::Usage("residual grid must exclude x <= 0".into()));
    }
    let alpha = s.problem().alpha();
    let f = s.problem().nonlinearity();
    let c = s.coeffs().coeffs();
    let d1 = derivative_coeffs(c);
    let d2 = derivative_coeffs(&d1);

    let mut values = Vec::with_capacity(grid.len());
    let mut flagged = Vec::new();
    for (i, &x) in grid.iter().enumerate() {
        let u = horner(c, x);
        match f.eval(u) {
            Ok(fu) => values.push((horner(&d2, x) + alpha / x * horner(&d1, x) - fu).abs()),
            Err(_) => {
                values.push(f64::INFINITY);
                flagged.push(i);
            }
        }
    }
    let mer = values
        .iter()
        .enumerate()
        .filter(|(i, _)| !flagged.contains(i))
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    Ok(ResidualTable {
        grid: grid.to_vec(),
        values,
        flagged,
        mer,
    })
}

/// Everything `solve` attaches to a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsBundle {
    pub boundary_residual: f64,
    pub residual: ResidualTable,
    pub error: Option<ErrorTable>,
}

pub fn diagnose(
    s: &SeriesSolution,
    grid_points: usize,
    exact: Option<ExactSolution>,
    bound: &BoundOptions,
) -> Result<DiagnosticsBundle> {
    if grid_points < 2 {
        return Err(Error::Usage(format!("grid needs at least 2 points, got {grid_points}")));
    }
    let residual = residual(s, &open_grid(grid_points))?;
    let error = exact.map(|e| {
        let mut table = abs_error(s, e, &uniform_grid(grid_points));
        table.bound = lemma1_bound(s, e, bound).ok();
        table
    });
    Ok(DiagnosticsBundle {
        boundary_residual: s.boundary_residual(),
        residual,
        error,
    })
}
