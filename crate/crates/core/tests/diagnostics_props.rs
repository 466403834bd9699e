use sbvp_idtm::cli::config::{preset, PRESET_NAMES};
use sbvp_idtm::diagnostics::{
    abs_error, lemma1_bound, open_grid, residual, uniform_grid, BoundOptions, ExactSolution, RemainderEstimate,
};
use sbvp_idtm::solver::{build_series, find_roots, RootOptions};
use sbvp_idtm::{solve, SbvpProblem, SeriesSolution, SolveOptions};

fn problem(name: &str) -> SbvpProblem {
    let p = preset(name).unwrap();
    SbvpProblem::new(p.alpha, p.family, p.a, p.b, p.c).unwrap()
}

fn series_near(p: &SbvpProblem, n: usize, near: f64) -> SeriesSolution {
    let beta = find_roots(p, n, &RootOptions::default())
        .unwrap()
        .into_iter()
        .map(|r| r.beta)
        .min_by(|a, b| (a - near).abs().total_cmp(&(b - near).abs()))
        .unwrap();
    build_series(p, beta, n).unwrap()
}

#[test]
fn bound_dominates_max_error() {
    let cases = [
        ("isothermal-gas-sphere", ExactSolution::IsothermalGasSphere, 1.0),
        ("thermal-explosion", ExactSolution::ThermalExplosion, 0.32),
    ];
    for (name, e, near) in cases {
        let p = problem(name);
        for n in [6, 8, 10, 12, 16, 20] {
            let s = series_near(&p, n, near);
            let me = abs_error(&s, e, &uniform_grid(1001)).me;
            for mode in [RemainderEstimate::TaylorTerm, RemainderEstimate::DerivativeMax] {
                let opts = BoundOptions {
                    mode,
                    ..BoundOptions::default()
                };
                let te = lemma1_bound(&s, e, &opts).unwrap().te;
                assert!(te >= me, "{name} N={n} {}: TE {te:e} < ME {me:e}", mode.name());
            }
        }
    }
}

#[test]
fn residual_shrinks_tenfold_per_four_orders() {
    let base = problem("oxygen-diffusion");
    for alpha in [1.0, 2.0, 3.0] {
        let p = base.with_alpha(alpha).unwrap();
        let mer = |n| residual(&series_near(&p, n, 0.83), &open_grid(1001)).unwrap().mer;
        for n in [4, 6, 8] {
            let (lo, hi) = (mer(n), mer(n + 4));
            assert!(hi * 10.0 <= lo, "alpha={alpha} N={n}: {lo:e} -> {hi:e}");
        }
    }
}

#[test]
fn grid_refinement_is_stable() {
    for name in PRESET_NAMES {
        let s = solve(&problem(name), 12, &SolveOptions::default()).unwrap().solution;
        let coarse = residual(&s, &open_grid(1001)).unwrap().mer;
        let fine = residual(&s, &open_grid(2001)).unwrap().mer;
        assert!(((fine - coarse) / coarse).abs() < 0.01, "{name}: {coarse:e} vs {fine:e}");
    }
    for (name, e) in [
        ("isothermal-gas-sphere", ExactSolution::IsothermalGasSphere),
        ("thermal-explosion", ExactSolution::ThermalExplosion),
    ] {
        let s = solve(&problem(name), 12, &SolveOptions::default()).unwrap().solution;
        let coarse = abs_error(&s, e, &uniform_grid(1001)).me;
        let fine = abs_error(&s, e, &uniform_grid(2001)).me;
        assert!(((fine - coarse) / coarse).abs() < 0.01, "{name}: {coarse:e} vs {fine:e}");
    }
}

#[test]
fn endpoint_error_is_the_boundary_residual() {
    for (name, e) in [
        ("isothermal-gas-sphere", ExactSolution::IsothermalGasSphere),
        ("thermal-explosion", ExactSolution::ThermalExplosion),
    ] {
        let p = problem(name);
        let (a, _, _) = p.boundary();
        for n in [6, 10, 12, 20] {
            let s = solve(&p, n, &SolveOptions::default()).unwrap().solution;
            let table = abs_error(&s, e, &uniform_grid(1001));
            let at_one = *table.errors.last().unwrap();
            let g = s.boundary_residual().abs();
            // u_N(1) is summed in a different order than g, so allow one rounding step
            assert!(at_one <= g / a.abs() + 4.0 * f64::EPSILON, "{name} N={n}: {at_one:e} > {g:e}");
        }
    }
}
