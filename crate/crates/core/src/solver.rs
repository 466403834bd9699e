//! Series solutions of `u'' + (α/x) u' = f(u)` on `(0, 1]` with
//! `u'(0) = 0` and `a·u(1) + b·u'(1) = c`.
//!
//! Multiplying the equation by `x` and transforming gives
//! `U(k+1) = A_{k−1} / ((k+1)(k+α))` for `k ≥ 1`, with `U(1) = 0` from the
//! condition at the origin and `U(0) = β` free. The Adomian polynomials
//! `A_m` of `f` over the components `U(0..=m)` stand in for the transform of
//! `f(u)`. Imposing the outer condition on the truncated series gives a scalar
//! equation `g(β) = 0`, solved by scanning and bisection. Among several roots
//! the one that stays put as `N` grows is the physical `u(0)`.

use rayon::prelude::*;

use crate::adomian::DuanGenerator;
use crate::diagnostics::{self, BoundOptions, DiagnosticsBundle, ExactSolution};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::powerseries::{horner, TruncatedSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbvpProblem {
    alpha: f64,
    f: Nonlinearity,
    a: f64,
    b: f64,
    c: f64,
}

impl SbvpProblem {
    pub fn new(alpha: f64, f: Nonlinearity, a: f64, b: f64, c: f64) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::Usage(format!("alpha must be finite and >= 1, got {alpha}")));
        }
        if ![a, b, c].iter().all(|v| v.is_finite()) {
            return Err(Error::Usage("boundary constants must be finite".into()));
        }
        if a == 0.0 && b == 0.0 {
            return Err(Error::Usage(
                "boundary condition a·u(1) + b·u'(1) = c needs (a, b) != (0, 0)".into(),
            ));
        }
        Ok(Self {
            alpha,
            f: f.validated()?,
            a,
            b,
            c,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.f
    }

    /// `(a, b, c)` of the outer boundary condition.
    pub fn boundary(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.f, self.a, self.b, self.c)
    }
}

/// The truncated series `u_N(x) = Σ U(k) x^k` for one value of `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    beta: f64,
    coeffs: TruncatedSeries,
    problem: SbvpProblem,
}

impl SeriesSolution {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn coeffs(&self) -> &TruncatedSeries {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.order()
    }

    pub fn problem(&self) -> &SbvpProblem {
        &self.problem
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.eval(x)
    }

    /// `(u_N(x), u_N'(x), u_N''(x))` from the exact polynomial derivatives.
    pub fn eval_with_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let c = self.coeffs.coeffs();
        let d1 = crate::powerseries::derivative_coeffs(c);
        let d2 = crate::powerseries::derivative_coeffs(&d1);
        (horner(c, x), horner(&d1, x), horner(&d2, x))
    }

    /// `g(β) = a·u_N(1) + b·u_N'(1) − c`.
    pub fn boundary_residual(&self) -> f64 {
        let (a, b, c) = self.problem.boundary();
        let u1 = self.coeffs.eval(1.0);
        let du1 = horner(&crate::powerseries::derivative_coeffs(self.coeffs.coeffs()), 1.0);
        a * u1 + b * du1 - c
    }

    /// Coefficients `0..=N−2` of the formal series `x·u'' + α·u' − x·f(u)`.
    /// For a series produced by [`build_series`] these vanish up to rounding.
    pub fn ode_defect(&self) -> Result<Vec<f64>> {
        let n = self.order();
        if n < 2 {
            return Err(Error::Usage("ODE defect needs order >= 2".into()));
        }
        let d1 = self.coeffs.derivative()?;
        let d2 = d1.derivative()?;
        let x_d2 = d2.shift_up();
        let alpha_d1 = d1.with_order(n - 2).scale(self.problem.alpha)?;
        let x_f = self
            .problem
            .f
            .lift(&self.coeffs)?
            .with_order(n - 1)
            .shift_up()
            .with_order(n - 2);
        Ok(x_d2.checked_add(&alpha_d1)?.checked_sub(&x_f)?.into_coeffs())
    }
}

/// Builds `U(0..=order)` for the given `β`.
pub fn build_series(p: &SbvpProblem, beta: f64, order: usize) -> Result<SeriesSolution> {
    if order < 2 {
        return Err(Error::Usage(format!("series order must be >= 2, got {order}")));
    }
    if !beta.is_finite() {
        return Err(Error::InadmissibleBeta {
            beta,
            reason: "not finite".into(),
        });
    }
    let inadmissible = |e: Error| match e {
        Error::Domain(reason) | Error::Range(reason) => Error::InadmissibleBeta { beta, reason },
        Error::Singular { .. } | Error::NonFinite { .. } => Error::InadmissibleBeta {
            beta,
            reason: e.to_string(),
        },
        e => e,
    };
    let mut gen = DuanGenerator::for_nonlinearity(&p.f, beta, order - 2).map_err(inadmissible)?;

    let mut u = Vec::with_capacity(order + 1);
    u.push(beta);
    u.push(0.0);
    for k in 1..order {
        // A_{k−1} needs U(0..=k−1), all of which are known at this point.
        let a = if k == 1 { gen.first() } else { gen.push(u[k - 1])? };
        let next = a / ((k + 1) as f64 * (k as f64 + p.alpha));
        if !next.is_finite() {
            return Err(Error::NumericalBlowup { index: k + 1 });
        }
        u.push(next);
    }
    Ok(SeriesSolution {
        beta,
        coeffs: TruncatedSeries::new(u).map_err(|_| Error::NumericalBlowup { index: order })?,
        problem: *p,
    })
}

/// Uniform grid of trial `β` values, `steps` points from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl ScanGrid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Usage(format!("scan needs lo < hi, got ({lo}, {hi})")));
        }
        if steps < 2 {
            return Err(Error::Usage(format!("scan needs at least 2 steps, got {steps}")));
        }
        Ok(Self { lo, hi, steps })
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let span = self.hi - self.lo;
        let last = (self.steps - 1) as f64;
        (0..self.steps).map(move |i| self.lo + span * i as f64 / last)
    }
}

impl Default for ScanGrid {
    /// `(0.1, 3.0, 291)`: brackets the physical roots of all the bundled presets.
    fn default() -> Self {
        Self {
            lo: 0.1,
            hi: 3.0,
            steps: 291,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub scan: ScanGrid,
    /// Bisection stops once the bracket is narrower than this.
    pub xtol: f64,
    /// Grid points with `|g| <= atol` are accepted as roots directly.
    pub atol: f64,
    /// Evaluate the scan grid with rayon. Results are identical either way.
    pub parallel: bool,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            scan: ScanGrid::default(),
            xtol: 1e-13,
            atol: 1e-14,
            parallel: false,
        }
    }
}

impl RootOptions {
    pub fn with_scan(scan: ScanGrid) -> Self {
        Self {
            scan,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCandidate {
    pub beta: f64,
    /// `|g(β)|` at the refined root.
    pub residual: f64,
}

fn residual_at(p: &SbvpProblem, order: usize, beta: f64) -> Result<f64> {
    Ok(build_series(p, beta, order)?.boundary_residual())
}

/// `g(β)`, or `None` where `β` is outside the domain of `f` or the series blows up.
fn admissible_residual(p: &SbvpProblem, order: usize, beta: f64) -> Result<Option<f64>> {
    match residual_at(p, order, beta) {
        Ok(g) if g.is_finite() => Ok(Some(g)),
        Ok(_) | Err(Error::InadmissibleBeta { .. }) | Err(Error::NumericalBlowup { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn bisect(
    p: &SbvpProblem,
    order: usize,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
    xtol: f64,
) -> Result<Option<RootCandidate>> {
    for _ in 0..200 {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let Some(g_mid) = admissible_residual(p, order, mid)? else {
            return Ok(None);
        };
        if g_mid == 0.0 {
            return Ok(Some(RootCandidate {
                beta: mid,
                residual: 0.0,
            }));
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    Ok(admissible_residual(p, order, beta)?.map(|g| RootCandidate {
        beta,
        residual: g.abs(),
    }))
}

/// All roots of `g` found on the scan grid, refined by bisection and sorted by `β`.
///
/// No sign change yields an empty list. A scan whose every point is
/// inadmissible is a domain error.
pub fn find_roots(p: &SbvpProblem, order: usize, opts: &RootOptions) -> Result<Vec<RootCandidate>> {
    if order < 2 {
        return Err(Error::Usage(format!("series order must be >= 2, got {order}")));
    }
    let grid: Vec<f64> = opts.scan.points().collect();
    let values: Vec<Option<f64>> = if opts.parallel {
        grid.par_iter()
            .map(|&beta| admissible_residual(p, order, beta))
            .collect::<Result<_>>()?
    } else {
        grid.iter()
            .map(|&beta| admissible_residual(p, order, beta))
            .collect::<Result<_>>()?
    };
    if values.iter().all(Option::is_none) {
        return Err(Error::Domain(format!(
            "every scan point in [{}, {}] is inadmissible for {}",
            opts.scan.lo, opts.scan.hi, p.f
        )));
    }

    let near_zero = |g: f64| g.abs() <= opts.atol;
    let mut roots = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if let Some(g) = *v {
            if near_zero(g) {
                roots.push(RootCandidate {
                    beta: grid[i],
                    residual: g.abs(),
                });
            }
        }
    }
    for i in 0..grid.len() - 1 {
        let (Some(g0), Some(g1)) = (values[i], values[i + 1]) else {
            continue;
        };
        if near_zero(g0) || near_zero(g1) || (g0 < 0.0) == (g1 < 0.0) {
            continue;
        }
        if let Some(root) = bisect(p, order, grid[i], grid[i + 1], g0, opts.xtol)? {
            roots.push(root);
        }
    }

    roots.sort_by(|x, y| x.beta.total_cmp(&y.beta));
    let mut merged: Vec<RootCandidate> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last_mut() {
            Some(last) if (r.beta - last.beta).abs() <= 1e-9 => {
                if r.residual < last.residual {
                    *last = r;
                }
            }
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOptions {
    /// Roots at neighbouring orders farther apart than this are not chained.
    pub radius: f64,
    /// A chain counts as converged when its largest step is at most this.
    pub tolerance: f64,
}

impl Default for LadderOptions {
    fn default() -> Self {
        Self {
            radius: 0.05,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    /// Roots of the largest-order residual.
    pub candidates: Vec<RootCandidate>,
    /// `(N, β_N)` along the selected chain, ascending in `N`.
    pub ladder: Vec<(usize, f64)>,
    pub selected: f64,
    pub converged: bool,
    /// Largest `|β_{N_i} − β_{N_{i+1}}|` along the chain.
    pub spread: f64,
}

/// `(N/2, 3N/4, N)` with the first two rounded to even orders (at least 2).
pub fn default_ladder(order: usize) -> Vec<usize> {
    let even = |x: f64| ((2.0 * (x / 2.0).round()) as usize).max(2);
    let mut ladder = vec![even(order as f64 / 2.0), even(order as f64 * 0.75), order];
    ladder.retain(|&n| n <= order);
    ladder.sort_unstable();
    ladder.dedup();
    ladder
}

fn chain_spread(chain: &[(usize, f64)]) -> f64 {
    chain
        .windows(2)
        .map(|w| (w[1].1 - w[0].1).abs())
        .fold(0.0, f64::max)
}

/// Picks the root of `g` that is stable across the orders in `ladder`.
///
/// Chains start at each root of the largest order and walk down the ladder,
/// attaching the nearest root within `radius` at each lower order. The chain
/// spanning the whole ladder with the smallest spread wins; if none spans it,
/// the longest partial chain is reported as not converged.
pub fn select_root(
    p: &SbvpProblem,
    ladder: &[usize],
    roots: &RootOptions,
    opts: &LadderOptions,
) -> Result<RootReport> {
    if ladder.len() < 2 {
        return Err(Error::Usage("root selection needs at least two orders".into()));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("ladder orders must be strictly increasing".into()));
    }
    let per_order: Vec<Vec<RootCandidate>> = ladder
        .iter()
        .map(|&n| find_roots(p, n, roots))
        .collect::<Result<_>>()?;
    let top = per_order.last().expect("ladder is non-empty");
    if top.is_empty() {
        return Err(Error::NoRoot);
    }

    let mut chains: Vec<Vec<(usize, f64)>> = Vec::new();
    for root in top {
        let mut chain = vec![(*ladder.last().unwrap(), root.beta)];
        for i in (0..ladder.len() - 1).rev() {
            let current = chain.last().unwrap().1;
            let nearest = per_order[i]
                .iter()
                .map(|r| r.beta)
                .filter(|b| (b - current).abs() <= opts.radius)
                .min_by(|x, y| (x - current).abs().total_cmp(&(y - current).abs()));
            match nearest {
                Some(b) => chain.push((ladder[i], b)),
                None => break,
            }
        }
        chain.reverse();
        chains.push(chain);
    }

    // Longest chain first, then smallest spread; ties keep the smaller β.
    let best = chains
        .into_iter()
        .min_by(|x, y| {
            y.len()
                .cmp(&x.len())
                .then(chain_spread(x).total_cmp(&chain_spread(y)))
        })
        .expect("at least one chain");
    let spread = chain_spread(&best);
    let full = best.len() == ladder.len();
    Ok(RootReport {
        candidates: top.clone(),
        selected: best.last().unwrap().1,
        converged: full && spread <= opts.tolerance,
        spread,
        ladder: best,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub roots: RootOptions,
    /// Orders used to pick the stable root. `None` means a single scan at the
    /// target order, falling back to [`default_ladder`] if it finds several roots.
    pub ladder: Option<Vec<usize>>,
    pub ladder_opts: LadderOptions,
    /// Points of the uniform `[0, 1]` grid used for the max-norm diagnostics.
    pub grid_points: usize,
    pub exact: Option<ExactSolution>,
    pub bound: BoundOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            roots: RootOptions::default(),
            ladder: None,
            ladder_opts: LadderOptions::default(),
            grid_points: diagnostics::DEFAULT_GRID_POINTS,
            exact: None,
            bound: BoundOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    pub solution: SeriesSolution,
    pub roots: RootReport,
    pub diagnostics: DiagnosticsBundle,
}

impl SolutionReport {
    pub fn converged(&self) -> bool {
        self.roots.converged
    }
}

/// Root selection, series construction at the selected `β`, and diagnostics.
pub fn solve(p: &SbvpProblem, order: usize, opts: &SolveOptions) -> Result<SolutionReport> {
    let roots = match &opts.ladder {
        Some(ladder) => {
            let mut ladder = ladder.clone();
            if ladder.iter().any(|&n| n > order) {
                return Err(Error::Usage(format!("ladder orders must not exceed the order {order}")));
            }
            ladder.push(order);
            ladder.sort_unstable();
            ladder.dedup();
            select_root(p, &ladder, &opts.roots, &opts.ladder_opts)?
        }
        None => {
            let candidates = find_roots(p, order, &opts.roots)?;
            match candidates.as_slice() {
                [] => return Err(Error::NoRoot),
                [only] => RootReport {
                    candidates: candidates.clone(),
                    ladder: vec![(order, only.beta)],
                    selected: only.beta,
                    converged: true,
                    spread: 0.0,
                },
                _ => {
                    let ladder = default_ladder(order);
                    if ladder.len() >= 2 {
                        select_root(p, &ladder, &opts.roots, &opts.ladder_opts)?
                    } else {
                        let best = candidates
                            .iter()
                            .min_by(|x, y| x.residual.total_cmp(&y.residual))
                            .unwrap();
                        RootReport {
                            candidates: candidates.clone(),
                            ladder: vec![(order, best.beta)],
                            selected: best.beta,
                            converged: false,
                            spread: f64::NAN,
                        }
                    }
                }
            }
        }
    };
    let solution = build_series(p, roots.selected, order)?;
    let diagnostics = diagnostics::diagnose(&solution, opts.grid_points, opts.exact, &opts.bound)?;
    Ok(SolutionReport {
        solution,
        roots,
        diagnostics,
    })
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// A solution with arbitrary stored coefficients, for exercising the
    /// diagnostics on polynomials the recurrence would not produce.
    pub(crate) fn with_coeffs(p: &SbvpProblem, coeffs: TruncatedSeries) -> SeriesSolution {
        SeriesSolution {
            beta: coeffs[0],
            coeffs,
            problem: *p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emden() -> SbvpProblem {
        SbvpProblem::new(2.0, Nonlinearity::power_law(5.0).unwrap(), 1.0, 0.0, 3f64.sqrt() / 2.0).unwrap()
    }

    #[test]
    fn problem_invariants() {
        let f = Nonlinearity::MembraneCap;
        assert!(SbvpProblem::new(0.5, f, 1.0, 0.0, 1.0).is_err());
        assert!(SbvpProblem::new(2.0, f, 0.0, 0.0, 1.0).is_err());
        assert!(SbvpProblem::new(f64::NAN, f, 1.0, 0.0, 1.0).is_err());
        assert!(SbvpProblem::new(1.0, f, 0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn emden_fowler_coefficients_at_unit_beta() {
        let s = build_series(&emden(), 1.0, 10).unwrap();
        let u = s.coeffs();
        assert_eq!(u[0], 1.0);
        assert_eq!(u[1], 0.0);
        let want = [
            (2, -1.0 / 6.0),
            (4, 1.0 / 24.0),
            (6, -5.0 / 432.0),
            (8, 35.0 / 10368.0),
            (10, -7.0 / 6912.0),
        ];
        for (k, v) in want {
            assert!((u[k] - v).abs() < 1e-15, "U({k}) = {} vs {v}", u[k]);
        }
        for k in (1..=10).step_by(2) {
            assert_eq!(u[k].to_bits(), 0);
        }
    }

    #[test]
    fn constant_solution_when_f_vanishes_at_beta() {
        let f = Nonlinearity::MembraneCap;
        let p = SbvpProblem::new(3.0, f, 1.0, 0.0, 0.5).unwrap();
        let s = build_series(&p, 0.5, 8).unwrap();
        assert!(s.coeffs().coeffs()[1..].iter().all(|c| *c == 0.0));
        assert_eq!(s.boundary_residual(), 0.0);
    }

    #[test]
    fn build_rejects_bad_input() {
        let p = SbvpProblem::new(3.0, Nonlinearity::MembraneCap, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(build_series(&p, 0.0, 6), Err(Error::InadmissibleBeta { .. })));
        assert!(matches!(build_series(&p, 1.0, 1), Err(Error::Usage(_))));
        let hot = SbvpProblem::new(1.0, Nonlinearity::thermal_explosion(1.0).unwrap(), 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(build_series(&hot, 800.0, 6), Err(Error::InadmissibleBeta { .. })));
    }

    #[test]
    fn linear_residual_root() {
        let p = SbvpProblem::new(2.0, Nonlinearity::thermal_explosion(0.0).unwrap(), 1.0, 0.0, 0.5).unwrap();
        let roots = find_roots(&p, 6, &RootOptions::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].beta - 0.5).abs() < 1e-13);
    }

    #[test]
    fn scan_reports_all_inadmissible() {
        let p = SbvpProblem::new(2.0, Nonlinearity::power_law(0.5).unwrap(), 1.0, 0.0, 1.0).unwrap();
        let opts = RootOptions::with_scan(ScanGrid::new(-2.0, -1.0, 11).unwrap());
        assert!(matches!(find_roots(&p, 6, &opts), Err(Error::Domain(_))));
    }

    #[test]
    fn scan_grid_validation() {
        assert!(ScanGrid::new(1.0, 1.0, 10).is_err());
        assert!(ScanGrid::new(0.0, 1.0, 1).is_err());
        let g = ScanGrid::new(0.0, 1.0, 3).unwrap();
        assert_eq!(g.points().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn ladder_defaults_and_validation() {
        assert_eq!(default_ladder(12), vec![6, 10, 12]);
        assert_eq!(default_ladder(10), vec![6, 8, 10]);
        assert_eq!(default_ladder(20), vec![10, 16, 20]);
        assert_eq!(default_ladder(2), vec![2]);
        let opts = RootOptions::default();
        let l = LadderOptions::default();
        assert!(matches!(select_root(&emden(), &[10], &opts, &l), Err(Error::Usage(_))));
        assert!(matches!(select_root(&emden(), &[10, 8], &opts, &l), Err(Error::Usage(_))));
    }

    #[test]
    fn parallel_scan_is_bit_identical() {
        let p = emden();
        let serial = find_roots(&p, 12, &RootOptions::default()).unwrap();
        let parallel = find_roots(
            &p,
            12,
            &RootOptions {
                parallel: true,
                ..RootOptions::default()
            },
        )
        .unwrap();
        assert_eq!(serial.len(), parallel.len());
        for (a, b) in serial.iter().zip(&parallel) {
            assert_eq!(a.beta.to_bits(), b.beta.to_bits());
            assert_eq!(a.residual.to_bits(), b.residual.to_bits());
        }
    }

    #[test]
    fn ode_defect_vanishes() {
        let s = build_series(&emden(), 1.0005, 14).unwrap();
        let defect = s.ode_defect().unwrap();
        assert_eq!(defect.len(), 13);
        let scale = s.coeffs().coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        assert!(defect.iter().all(|d| d.abs() <= 1e-10 * scale));
    }
}
