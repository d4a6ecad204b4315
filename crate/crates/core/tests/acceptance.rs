//! Acceptance suite. Every test prints one `PASS`/`FAIL` line and then
//! asserts the same condition.

use std::io::Write;
use std::time::Instant;

use bergman_core::carleson::{
    carleson_point_statistic, carleson_statistic, random_unit_polynomials, sobolev_rigidity_check, CarlesonVerdict,
    DiscreteMeasure, SobolevSettings,
};
use bergman_core::geometry::build_lattice;
use bergman_core::kernels::{
    bj_table, combination_sweep, default_gamma, kernel_norm_ratio, reproducing_norm_ratio, BoundaryQuadrature,
};
use bergman_core::norms::{ap_norm, ap_norm_extrapolated, littlewood_paley_norm};
use bergman_core::ode::{neumann_solve, taylor_ode_oracle, NeumannSettings, OdeProblem};
use bergman_core::operators::{
    adjoint_residuals, classical_volterra_criterion, empirical_operator_norm, hilbert_schmidt_check,
    volterra_bloch_criterion, volterra_integral_criterion, CompositionSumSpec, CriterionReport, EmpiricalSettings,
    composition_sum_rigidity, HsSettings, Operator, OperatorVerdict, RigiditySettings, StableIntegralSettings,
    VolterraSpec,
};
use bergman_core::profile::TailRule;
use bergman_core::quadrature::BOUNDARY_CUTS;
use bergman_core::{build_graded_rule, AnalyticFunction, GradedSpec, RingGrid, SelfMap, C64};

// Written to the raw stdout handle, which the test harness does not capture,
// so the table shows up in a plain `cargo test` run.
macro_rules! say {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*).unwrap()
    };
}

fn report(t0: Instant, id: u32, title: &str, pass: bool, detail: &str) -> bool {
    say!(
        "criterion {id:>2} {title}: {} ({detail}) [{:.1} s]",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
    pass
}

fn poly(c: &[f64]) -> AnalyticFunction {
    AnalyticFunction::polynomial(c)
}

fn monomial(k: usize) -> AnalyticFunction {
    let mut c = vec![0.0; k + 1];
    c[k] = 1.0;
    poly(&c)
}

fn boundary_power(s: f64) -> AnalyticFunction {
    AnalyticFunction::boundary_power(s).unwrap()
}

#[test]
fn criterion_01_monomial_norms() {
    let t0 = Instant::now();
    let spec = GradedSpec::default();
    let mut worst = 0.0f64;
    for &p in &[1.0, 2.0, 4.0] {
        for k in 0..=20 {
            let got = ap_norm_extrapolated(&monomial(k), p, &spec, BOUNDARY_CUTS).unwrap();
            let want = (2.0 / (k as f64 * p + 2.0)).powf(1.0 / p);
            worst = worst.max((got / want - 1.0).abs());
        }
    }
    let pass = worst <= 1e-6;
    assert!(report(t0, 1, "monomial norms", pass, &format!("max rel err {worst:.2e}, tol 1e-6")));
}

#[test]
fn criterion_02_littlewood_paley_window() {
    let t0 = Instant::now();
    // degree-10 polynomials need little angular resolution
    let rule = build_graded_rule(&GradedSpec {
        angular_cap: 256,
        ..GradedSpec::default()
    })
    .unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (idx, &p) in [1.0, 2.0, 4.0].iter().enumerate() {
        let family = random_unit_polynomials(200, 10, p, &rule, 100 + idx as u64).unwrap();
        for n in 1..=2 {
            for f in &family {
                let ratio = littlewood_paley_norm(f, p, n, &rule).unwrap() / ap_norm(f, p, &rule).unwrap();
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
    }
    let c = hi.max(1.0 / lo);
    let pass = c <= 10.0;
    assert!(report(
        t0,
        2,
        "Littlewood-Paley window",
        pass,
        &format!("ratios in [{lo:.4}, {hi:.4}], C = {c:.3}, limit 10")
    ));
}

#[test]
fn criterion_03_kernel_norm_window() {
    let t0 = Instant::now();
    let survey = BoundaryQuadrature::survey();
    let radii = [0.0, 0.5, 0.9, 0.99, 0.995];
    let dirs = [C64::new(1.0, 0.0), C64::from_polar(1.0, 2.0)];
    let mut worst_window = 0.0f64;
    for &p in &[1.0, 2.0, 4.0] {
        let gamma = default_gamma(p);
        for i in 0..=3 {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for &r in &radii {
                for &d in &dirs {
                    let v = kernel_norm_ratio(d * r, i, gamma, p, &survey).unwrap();
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            say!("  p={p} i={i}: ratio in [{lo:.5}, {hi:.5}], C/c = {:.3}", hi / lo);
            worst_window = worst_window.max(hi / lo);
        }
    }
    let precise = BoundaryQuadrature::precise();
    let mut repro = 0.0f64;
    for &r in &[0.0, 0.5, 0.9, 0.99] {
        let v = reproducing_norm_ratio(C64::from_polar(r, 0.7), 0, &precise).unwrap();
        repro = repro.max((v - 1.0).abs());
    }
    let pass = worst_window <= 50.0 && repro <= 1e-8;
    assert!(report(
        t0,
        3,
        "kernel norm estimate",
        pass,
        &format!("max C/c {worst_window:.3} (limit 50), reproducing kernel err {repro:.2e} (tol 1e-8)")
    ));
}

#[test]
fn criterion_04_alternating_identity() {
    let t0 = Instant::now();
    let rows = bj_table(&[0.5, 1.0, 2.5, 7.0], 6);
    let worst = rows.iter().map(|r| r.relative).fold(0.0, f64::max);
    let pass = worst <= 1e-10;
    assert!(report(
        t0,
        4,
        "b_j identity",
        pass,
        &format!("{} rows, max |b_j| relative {worst:.2e}, tol 1e-10", rows.len())
    ));
}

#[test]
fn criterion_05_combination_lower_bound() {
    let t0 = Instant::now();
    let rule = build_graded_rule(&GradedSpec::default()).unwrap();
    let mut grid = vec![C64::new(0.0, 0.0)];
    for &r in &[0.5, 0.9, 0.99] {
        for &theta in &[0.0, 2.5] {
            grid.push(C64::from_polar(r, theta));
        }
    }
    let rows = combination_sweep(&grid, 3, 50, 4.0, 2.0, &rule, 2024).unwrap();
    let worst = rows.iter().filter(|r| r.n >= 1).map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let pass = worst > 0.01;
    assert!(report(
        t0,
        5,
        "kernel combination lower bound",
        pass,
        &format!("min ratio {worst:.4} over {} (w, n) cells, limit 0.01", rows.len())
    ));
}

#[test]
fn criterion_06_carleson_thresholds() {
    let t0 = Instant::now();
    let tail = TailRule::default();
    let mut pass = true;
    let mut lines = Vec::new();
    for &r in &[1.0, 0.5] {
        let lattice = build_lattice(r, 0.999).unwrap();
        for &(t, want) in &[
            (0.0, CarlesonVerdict::Bounded),
            (0.5, CarlesonVerdict::Vanishing),
            (-0.5, CarlesonVerdict::Diverging),
        ] {
            let mu = DiscreteMeasure::radial_power(t).unwrap();
            let rep = carleson_statistic(&mu, 0, 2.0, 2.0, &lattice, &tail).unwrap();
            pass &= rep.verdict == want;
            lines.push(format!("r={r} t={t}: {:?}", rep.verdict));
        }
    }
    assert!(report(t0, 6, "Carleson thresholds (verdicts, r in {0.5, 1})", pass, &lines.join("; ")));
}

#[test]
fn criterion_06_divergence_growth_factor() {
    let t0 = Instant::now();
    let mu = DiscreteMeasure::radial_power(-0.5).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for &r in &[1.0, 0.5] {
        let inner = carleson_point_statistic(&mu, 0, 2.0, 2.0, r, C64::new(0.9, 0.0));
        let outer = carleson_point_statistic(&mu, 0, 2.0, 2.0, r, C64::new(0.999, 0.0));
        let growth = outer / inner;
        pass &= growth >= 10.0;
        lines.push(format!("r={r}: growth {growth:.3}"));
    }
    assert!(report(
        t0,
        6,
        "Carleson threshold (t = -0.5 growth >= 10x from |a| = 0.9 to 0.999)",
        pass,
        &lines.join("; ")
    ));
}

#[test]
fn criterion_07_sobolev_rigidity() {
    let t0 = Instant::now();
    let lattice = build_lattice(1.0, 0.99).unwrap();
    let settings = SobolevSettings::default();
    let gamma = default_gamma(2.0);
    let adversarial = || vec![poly(&[0.0, -1.0]), poly(&[1.0 / gamma, 0.0, -1.0 / gamma])];
    let plain = || vec![poly(&[1.0]), AnalyticFunction::zero()];
    let radial = |t: f64| DiscreteMeasure::radial_power(t).unwrap();
    let cases = vec![
        ("area, u=(1,0), p=q=2", radial(0.0), plain(), 2.0, 2.0, CarlesonVerdict::Bounded),
        ("t=0.5, u=(1,0), p=q=2", radial(0.5), plain(), 2.0, 2.0, CarlesonVerdict::Vanishing),
        ("area, cancelling u, p=q=2", radial(0.0), adversarial(), 2.0, 2.0, CarlesonVerdict::Diverging),
        (
            "point mass, u=(1,0), p=q=2",
            DiscreteMeasure::point_mass(C64::new(0.3, 0.1), 2.0).unwrap(),
            plain(),
            2.0,
            2.0,
            CarlesonVerdict::Vanishing,
        ),
        ("area, u=(1,0), p=2 q=1", radial(0.0), plain(), 2.0, 1.0, CarlesonVerdict::Bounded),
        ("t=1, cancelling u, p=2 q=1", radial(1.0), adversarial(), 2.0, 1.0, CarlesonVerdict::Bounded),
        ("t=-0.5, cancelling u, p=2 q=1", radial(-0.5), adversarial(), 2.0, 1.0, CarlesonVerdict::Diverging),
    ];
    let mut pass = true;
    for (name, mu, u, p, q, want) in cases {
        let rep = sobolev_rigidity_check(&mu, &u, p, q, &lattice, &settings).unwrap();
        let ok = rep.agree && rep.component_verdict == want;
        say!(
            "  {name}: combined {:?}, components {:?}, expected {want:?}",
            rep.combined_verdict, rep.component_verdict
        );
        pass &= ok;
    }
    assert!(report(t0, 7, "Sobolev rigidity", pass, "7 cases, both regimes"));
}

#[test]
fn criterion_07_pullback_rigidity() {
    let t0 = Instant::now();
    let lattice = build_lattice(1.0, 0.99).unwrap();
    let base = RigiditySettings::default();
    let mut doubled = base.clone();
    doubled.pullback.radial_n *= 2;
    doubled.pullback.angular_n *= 2;
    doubled.pullback.angular_cap *= 2;
    let half = SelfMap::checked(poly(&[0.0, 0.5])).unwrap();
    let cases = vec![
        ("u=(1,0), phi=id", vec![poly(&[1.0]), AnalyticFunction::zero()], SelfMap::identity(), CarlesonVerdict::Bounded),
        ("u=(0,1+z), phi=z/2", vec![AnalyticFunction::zero(), poly(&[1.0, 1.0])], half.clone(), CarlesonVerdict::Vanishing),
        ("u=(0,0), phi=z/2", vec![AnalyticFunction::zero(), AnalyticFunction::zero()], half, CarlesonVerdict::Vanishing),
    ];
    let mut pass = true;
    for (name, u, phi, want) in cases {
        let spec = CompositionSumSpec::new(u, phi).unwrap();
        let a = composition_sum_rigidity(&spec, 2.0, 2.0, &lattice, &base).unwrap();
        let b = composition_sum_rigidity(&spec, 2.0, 2.0, &lattice, &doubled).unwrap();
        let ok = a.agree && b.agree && a.carleson_verdict == want && b.carleson_verdict == want;
        say!(
            "  {name}: pull-back {:?} / doubled {:?}, expected {want:?}, empirical grows {}",
            a.carleson_verdict, b.carleson_verdict, a.empirical.grows
        );
        pass &= ok;
    }
    assert!(report(t0, 7, "composition-sum rigidity, doubled pull-back resolution", pass, "3 cases, p=q=2"));
}

fn consistent(name: &str, crit: &CriterionReport, want: OperatorVerdict, op: Operator<'_>, p: f64, q: f64) -> bool {
    let emp = empirical_operator_norm(op, p, q, &EmpiricalSettings::default()).unwrap();
    let fail = want == OperatorVerdict::Fail;
    let ok = crit.verdict == want && emp.grows == fail;
    let ratios: Vec<String> = emp.witnesses.iter().map(|w| format!("{:.3}", w.ratio)).collect();
    say!(
        "  {name}: criterion {:?} (expected {want:?}), witnesses grow {} [{}]",
        crit.verdict,
        emp.grows,
        ratios.join(", ")
    );
    ok
}

#[test]
fn criterion_08_criterion_empirical_consistency() {
    let t0 = Instant::now();
    let grid = RingGrid::default();
    let tail = TailRule::default();
    let mut pass = true;

    for (name, g, want) in [
        ("Bloch criterion, g=(1-z)^-1", boundary_power(1.0), OperatorVerdict::Bounded),
        ("Bloch criterion, g polynomial", poly(&[1.0, 2.0, -1.0]), OperatorVerdict::Compact),
        ("Bloch criterion, g=(1-z)^-1.5", boundary_power(1.5), OperatorVerdict::Fail),
    ] {
        let spec = VolterraSpec::new(vec![g]).unwrap();
        let crit = volterra_bloch_criterion(&spec, 2.0, 2.0, &grid, &tail).unwrap();
        pass &= consistent(name, &crit, want, Operator::Volterra(&spec), 2.0, 2.0);
    }

    for (name, g, want) in [
        ("integral criterion, g=1", poly(&[1.0]), OperatorVerdict::Bounded),
        ("integral criterion, g=(1-z)^-2", boundary_power(2.0), OperatorVerdict::Fail),
        ("integral criterion, g=0", AnalyticFunction::zero(), OperatorVerdict::Bounded),
    ] {
        let spec = VolterraSpec::new(vec![g]).unwrap();
        let crit = volterra_integral_criterion(&spec, 2.0, 1.0, &StableIntegralSettings::default()).unwrap();
        pass &= consistent(name, &crit, want, Operator::Volterra(&spec), 2.0, 1.0);
    }

    for (name, g, want) in [
        ("classical, g polynomial", poly(&[0.0, 1.0, 0.5]), OperatorVerdict::Compact),
        ("classical, g=log 1/(1-z)", AnalyticFunction::log_kernel(C64::new(1.0, 0.0)).unwrap(), OperatorVerdict::Bounded),
        ("classical, g=(1-z)^-0.5", boundary_power(0.5), OperatorVerdict::Fail),
    ] {
        let crit = classical_volterra_criterion(&g, 2.0, 2.0, &grid, &tail).unwrap();
        let spec = VolterraSpec::derivative_form(g, vec![C64::new(1.0, 0.0)]).unwrap();
        pass &= consistent(name, &crit, want, Operator::Volterra(&spec), 2.0, 2.0);
    }
    assert!(report(t0, 8, "criterion/empirical consistency", pass, "9 symbols, three families"));
}

#[test]
fn criterion_09_hilbert_schmidt() {
    let t0 = Instant::now();
    let settings = HsSettings::default();
    let mut pass = true;
    let mut lines = Vec::new();
    for &c in &[0.3, 0.5, 0.7] {
        let spec = CompositionSumSpec::new(vec![poly(&[1.0])], SelfMap::checked(poly(&[0.0, c])).unwrap()).unwrap();
        let rep = hilbert_schmidt_check(&spec, &settings).unwrap();
        let want = 1.0 / (1.0 - c * c);
        let basis = (rep.basis_sum / want - 1.0).abs();
        let integral = (rep.integrals[0].value / want - 1.0).abs();
        let adjoint = adjoint_residuals(&spec, &settings).unwrap();
        let adj = adjoint.iter().cloned().fold(0.0, f64::max);
        pass &= basis <= 1e-4 && integral <= 1e-4 && rep.hilbert_schmidt && adjoint.len() == 50 && adj <= 1e-8;
        lines.push(format!("c={c}: basis {basis:.1e}, integral {integral:.1e}, adjoint {adj:.1e}"));
    }
    assert!(report(t0, 9, "Hilbert-Schmidt exactness", pass, &lines.join("; ")));
}

#[test]
fn criterion_10_ode_solver() {
    let t0 = Instant::now();
    let settings = NeumannSettings::default();
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);

    let exp_case = OdeProblem::new(vec![poly(&[0.1])], AnalyticFunction::zero(), vec![one]).unwrap();
    let sol = neumann_solve(&exp_case, &settings).unwrap();
    let f = sol.solution.clone().expect("exp case converges");
    let oracle = taylor_ode_oracle(&exp_case, 30).unwrap();
    let mut oracle_err = 0.0f64;
    let mut exact_err = 0.0f64;
    let mut fact = 1.0;
    for k in 0..=30 {
        if k > 0 {
            fact *= k as f64;
        }
        let exact = C64::new((-0.1f64).powi(k as i32) / fact, 0.0);
        oracle_err = oracle_err.max((f.coeff(k) - oracle.coeff(k)).norm());
        exact_err = exact_err.max((f.coeff(k) - exact).norm());
    }
    let mut residuals = vec![sol.certificate.residual.unwrap()];

    let driven = OdeProblem::new(vec![AnalyticFunction::zero(), poly(&[0.2, -0.2])], poly(&[1.0]), vec![zero, zero]).unwrap();
    let sol2 = neumann_solve(&driven, &settings).unwrap();
    let converged2 = sol2.certificate.converged && !sol2.certificate.sustained_non_contraction;
    if let Some(r) = sol2.certificate.residual {
        residuals.push(r);
    }

    let trivial = OdeProblem::new(vec![AnalyticFunction::zero(); 2], poly(&[2.0]), vec![zero, zero]).unwrap();
    let sol3 = neumann_solve(&trivial, &settings).unwrap();
    let one_step = sol3.certificate.iterations == 1 && sol3.certificate.converged;
    residuals.push(sol3.certificate.residual.unwrap_or(f64::INFINITY));

    let worst_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let pass = oracle_err <= 1e-10
        && exact_err <= 1e-10
        && converged2
        && one_step
        && residuals.len() == 3
        && worst_residual <= 10.0 * settings.tol;
    assert!(report(
        t0,
        10,
        "ODE solver",
        pass,
        &format!(
            "oracle err {oracle_err:.1e}, exact err {exact_err:.1e}, max residual {worst_residual:.1e}, zero-symbol iterations {}",
            sol3.certificate.iterations
        )
    ));
}

#[test]
fn criterion_11_determinism() {
    let t0 = Instant::now();
    let run = || {
        let rule = build_graded_rule(&GradedSpec {
            angular_cap: 512,
            ..GradedSpec::default()
        })
        .unwrap();
        let grid = [C64::new(0.0, 0.0), C64::new(0.6, 0.3)];
        let sweep = combination_sweep(&grid, 2, 10, 4.0, 2.0, &rule, 9).unwrap();
        let spec = VolterraSpec::new(vec![boundary_power(1.0)]).unwrap();
        let emp = empirical_operator_norm(Operator::Volterra(&spec), 2.0, 2.0, &EmpiricalSettings::default()).unwrap();
        let lattice = build_lattice(1.0, 0.9).unwrap();
        let mu = DiscreteMeasure::radial_power(0.5).unwrap();
        let sob = sobolev_rigidity_check(
            &mu,
            &[poly(&[1.0]), poly(&[0.0, 0.5])],
            2.0,
            2.0,
            &lattice,
            &SobolevSettings::default(),
        )
        .unwrap();
        serde_json::to_string(&(sweep, emp, sob)).unwrap()
    };
    let first = run();
    let second = run();
    let pass = first == second;
    assert!(report(
        t0,
        11,
        "determinism",
        pass,
        &format!("{} bytes of seeded reports compared", first.len())
    ));
}
