//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pseudoboson::cli::config::{ConventionChoice, Format, Mode, ParamsSource, QuasiConfig, RunConfig, Tolerances};
use pseudoboson::cli::jobs;
use pseudoboson::eigensystem::{
    biorthonormality_matrix, build_family, build_family_with, number_operator_check, random_test_function,
    verify_ladder, NormalizationConvention,
};
use pseudoboson::gausspoly::{commutator_check, GaussPoly};
use pseudoboson::gbt::{constrained_family, normalizability, presets, swanson, GbtParams, SwansonParams};
use pseudoboson::norms::{asymptotics, norm_product_trend, NormCalculator, Trend};
use pseudoboson::oracle::{quad_norm_series, Probe, QuadratureSpec};
use pseudoboson::quasibasis::{partial_sums, verdict, DomainSpec, Evidence, Ordering, VerdictKind};
use pseudoboson::specialfns::{legendre_asymptotic, legendre_eval};

type Outcome = Result<String, String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn sw(theta: f64) -> GbtParams {
    swanson(SwansonParams::new(theta).unwrap())
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenarios() -> Outcome {
    let cases = [
        ("a", presets::scenario_a(), (true, false)),
        ("b", presets::scenario_b(), (false, true)),
        ("c", presets::scenario_c(), (false, false)),
        ("d", presets::scenario_d(), (true, true)),
    ];
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, p, expected) in cases {
        let r = normalizability(&p);
        let got = (r.phi0_in_h, r.psi0_in_h);
        ok &= got == expected;
        detail.push(format!("{name}=({},{})", got.0, got.1));
    }
    ensure(ok, detail.join(" "))
}

fn ladder_suite() -> Outcome {
    const N: usize = 50;
    const TOL: f64 = 1e-10;
    let start = Instant::now();
    let cases = [
        ("case_d", presets::scenario_d()),
        ("bosons", GbtParams::standard_bosons()),
        ("constrained(2,1)", constrained_family(2.0, 1.0).unwrap()),
        ("swanson(0.3)", sw(0.3)),
    ];
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, p) in cases {
        let family = build_family(&p, N).map_err(|e| format!("{name}: {e}"))?;
        let (a, b) = (p.a(), p.b());
        let mut probes: Vec<GaussPoly> = [0, 1, N / 2, N].iter().flat_map(|&n| [family.phi(n).clone(), family.psi(n).clone()]).collect();
        for _ in 0..3 {
            probes.push(random_test_function(&mut rng).unwrap());
        }
        for f in &probes {
            let lambda = commutator_check(&a, &b, f).map_err(|e| format!("{name}: commutator {e}"))?;
            worst = worst.max((lambda - 1.0).norm());
        }
        worst = worst.max(verify_ladder(&family).max_residual);
        let num = number_operator_check(&family, 11).map_err(|e| format!("{name}: {e}"))?;
        if !num.eigenvalues_distinct {
            return Err(format!("{name}: eigenvalues not distinct"));
        }
        worst = worst.max(num.max_residual_phi).max(num.max_residual_psi);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= TOL && secs < 5.0, format!("max residual {worst:.2e} (tol {TOL:.0e}), {secs:.2} s"))
}

fn gram() -> Outcome {
    let cases = [
        ("case_d", presets::scenario_d(), 1e-10),
        ("constrained(2,1)", constrained_family(2.0, 1.0).unwrap(), 1e-10),
        ("swanson(0.3)", sw(0.3), 1e-9),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, p, tol) in cases {
        let family = build_family(&p, 30).map_err(|e| e.to_string())?;
        let dev = biorthonormality_matrix(&family, 30).map_err(|e| e.to_string())?.identity_deviation();
        ok &= dev <= tol;
        detail.push(format!("{name} {dev:.2e} (tol {tol:.0e})"));
    }
    ensure(ok, detail.join(", "))
}

fn closed_vs_oracle() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, p) in [("case_d", presets::scenario_d()), ("constrained(2,1)", constrained_family(2.0, 1.0).unwrap())] {
        let conv = NormalizationConvention::default_for(&p);
        let calc = NormCalculator::calibrate(&p, conv, &spec).map_err(|e| e.to_string())?;
        let (cp, cs) = (calc.phi_calibration(), calc.psi_calibration());
        let cal = cp.rel_dev_derived.max(cs.rel_dev_derived);
        let closed = calc.series(60).map_err(|e| e.to_string())?;
        let family = build_family_with(&p, conv, 60).map_err(|e| e.to_string())?;
        let oracle = quad_norm_series(&family, 60, &spec).map_err(|e| e.to_string())?;
        let mut rel: f64 = 0.0;
        let mut log: f64 = 0.0;
        for n in 0..=60 {
            for (a, b) in [(closed.ln_phi(n), oracle.ln_phi(n)), (closed.ln_psi(n), oracle.ln_psi(n))] {
                if n <= 20 {
                    rel = rel.max((a - b).exp_m1().abs());
                }
                log = log.max((a - b).abs() / b.abs().max(1.0));
            }
        }
        ok &= cal <= 1e-8 && rel <= 1e-8 && log <= 1e-6;
        detail.push(format!(
            "{name}: calibration rel {cal:.1e} vs sqrt(pi)|N|^2 (halved constant off by {:.3}), n<=20 rel {rel:.1e}, n<=60 log {log:.1e}",
            cp.rel_dev_halved
        ));
    }
    ensure(ok, detail.join("; "))
}

fn three_case_table() -> Outcome {
    let cases = [
        ("(sqrt2,1)", 2f64.sqrt(), (Trend::Bounded, Trend::Bounded)),
        ("(1.2,1)", 1.2, (Trend::Diverges, Trend::Vanishes)),
        ("(2,1)", 2.0, (Trend::Vanishes, Trend::Diverges)),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, beta, expected) in cases {
        let p = constrained_family(beta, 1.0).unwrap();
        let a = asymptotics(&p, &NormalizationConvention::default_for(&p)).map_err(|e| e.to_string())?;
        let t = norm_product_trend(&p, 100).map_err(|e| e.to_string())?;
        let var = t.relative_variation.unwrap_or(f64::INFINITY);
        ok &= (a.phi_trend, a.psi_trend) == expected && var <= 1e-10;
        detail.push(format!("{name} {:?}/{:?} product var {var:.1e}", a.phi_trend, a.psi_trend));
    }
    ensure(ok, detail.join(", "))
}

fn anomalous_growth() -> Outcome {
    let p = presets::scenario_d();
    let conv = NormalizationConvention::default_for(&p);
    let a = asymptotics(&p, &conv).map_err(|e| e.to_string())?;
    let (dx, dy, dxy) = ((a.x - 2.0 / 3.0).abs(), (a.y - 2.1).abs(), (a.product_base - 1.4).abs());
    let t = norm_product_trend(&p, 200).map_err(|e| e.to_string())?;
    let slope = t.fitted_slope.unwrap_or(f64::NAN);
    let dslope = (slope - 1.4f64.ln()).abs();
    let calc = pseudoboson::norms::norm_sq_phi(&p, 200, &conv).map_err(|e| e.to_string())?;
    let per_n = calc.ln_abs() / 200.0;
    let dphi = (per_n - (2.0f64 / 3.0).ln()).abs();
    ensure(
        dx.max(dy).max(dxy) <= 1e-12 && t.fit_range == (50, 200) && dslope <= 1e-2 && dphi <= 1e-2,
        format!(
            "|dx|,|dy|,|dxy| <= {:.1e}; slope {slope:.5} vs ln1.4 {:.5} (diff {dslope:.1e}); ln||phi_200||^2/200 diff {dphi:.1e}",
            dx.max(dy).max(dxy),
            1.4f64.ln()
        ),
    )
}

fn legendre_asymptotics() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for x in [1.014185, 1.1, 2.0] {
        let errs: Vec<f64> = [100, 200, 300, 400]
            .iter()
            .map(|&n| {
                let exact = legendre_eval(n, x).unwrap().ln_abs();
                let approx = legendre_asymptotic(n, x).unwrap().ln_abs();
                (approx - exact).exp_m1().abs()
            })
            .collect();
        ok &= errs[0] <= 1e-2 && errs.windows(2).all(|w| w[1] < w[0]);
        detail.push(format!("x={x}: {:.1e}..{:.1e}", errs[0], errs[3]));
    }
    ensure(ok, detail.join(", "))
}

fn quasi_identity() -> Outcome {
    let spec = QuadratureSpec::default();
    let p = presets::scenario_d();
    let family = build_family(&p, 80).map_err(|e| e.to_string())?;
    let domain = DomainSpec::for_params(&p).map_err(|e| e.to_string())?;
    let fns = [
        GaussPoly::from_real_monomial(&[1.0], 0.25),
        GaussPoly::from_real_monomial(&[0.0, 1.0], 0.5),
        GaussPoly::from_real_monomial(&[1.0, 0.0, -0.5], 0.8),
        GaussPoly::from_monomial(&[c(0.3), Complex64::new(0.0, 1.0), c(0.0), c(0.2)], c(1.0)),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_order: f64 = 0.0;
    for f in &fns {
        for g in &fns {
            if !domain_ok(&domain, f) || !domain_ok(&domain, g) {
                return Err("test function outside the domain".into());
            }
            let (pf, pg) = (Probe::Gauss(f.clone()), Probe::Gauss(g.clone()));
            let a = partial_sums(&family, &pf, &pg, 60, Ordering::PhiFirst, &spec, 1e-6).map_err(|e| e.to_string())?;
            let b = partial_sums(&family, &pf, &pg, 60, Ordering::PsiFirst, &spec, 1e-6).map_err(|e| e.to_string())?;
            worst = worst.max(a.final_error).max(b.final_error);
            worst_order = worst_order.max((a.partial_sums[60] - b.partial_sums[60]).norm());
        }
    }

    let cp = constrained_family(2.0, 1.0).unwrap();
    let cfam = build_family(&cp, 80).map_err(|e| e.to_string())?;
    let lorentz = Probe::sampled(|x| c(1.0 / (1.0 + x * x)));
    let gauss = Probe::Gauss(GaussPoly::gaussian(c(1.0), c(1.0)));
    let adaptive = QuadratureSpec::adaptive();
    let mut weak: f64 = 0.0;
    for order in [Ordering::PhiFirst, Ordering::PsiFirst] {
        let r = partial_sums(&cfam, &lorentz, &gauss, 80, order, &adaptive, 1e-5).map_err(|e| e.to_string())?;
        weak = weak.max(r.final_error);
    }
    ensure(
        worst <= 1e-6 && worst_order <= 1e-8 && weak <= 1e-5,
        format!("case d |S_60 - <f,g>| {worst:.1e}, orderings {worst_order:.1e}; constrained Lorentzian at N=80 {weak:.1e}"),
    )
}

fn domain_ok(domain: &DomainSpec, f: &GaussPoly) -> bool {
    pseudoboson::quasibasis::domain_membership(f, domain)
}

fn proportionality() -> Outcome {
    const N: usize = 40;
    let p = constrained_family(2.0, 1.0).unwrap();
    let fam = build_family(&p, N).map_err(|e| e.to_string())?;
    let ratio = fam.convention().n_psi / fam.convention().n_phi;
    let w = p.beta() * p.beta() - p.delta() * p.delta();
    let constrained = (0..=N)
        .map(|n| fam.psi(n).coeff_residual(&fam.phi(n).scaled(w.powi(n as i32) * ratio)))
        .fold(0.0, f64::max);

    let theta = 0.3;
    let (sp, sm) = (sw(theta), sw(-theta));
    let fp = build_family(&sp, N).map_err(|e| e.to_string())?;
    let conv_m = NormalizationConvention::with_phi(&sm, fp.convention().n_phi);
    let fm = build_family_with(&sm, conv_m, N).map_err(|e| e.to_string())?;
    let ratio = fp.convention().n_psi / fp.convention().n_phi;
    let swan = (0..=N)
        .map(|n| fp.psi(n).coeff_residual(&fm.phi(n).scaled(ratio)))
        .fold(0.0, f64::max);
    ensure(
        constrained <= 1e-10 && swan <= 1e-10,
        format!("constrained(2,1) {constrained:.1e}, swanson(0.3) {swan:.1e}"),
    )
}

fn swanson_divergence() -> Outcome {
    let p = sw(0.3);
    let fam = build_family(&p, 40).map_err(|e| e.to_string())?;
    let s = quad_norm_series(&fam, 40, &QuadratureSpec::default()).map_err(|e| e.to_string())?;
    let inc = |v: &dyn Fn(usize) -> f64| (5..40).all(|n| v(n + 1) > v(n));
    let (phi, psi) = (inc(&|n| s.ln_phi(n)), inc(&|n| s.ln_psi(n)));
    ensure(
        phi && psi,
        format!(
            "phi increasing {phi}, psi increasing {psi}; ln||phi_40||^2 = {:.3}, ln||Psi_40||^2 = {:.3}",
            s.ln_phi(40),
            s.ln_psi(40)
        ),
    )
}

fn verdict_fuzz() -> Outcome {
    let cases = [
        ("case_d", ParamsSource::from_params(&presets::scenario_d()), VerdictKind::QuasiBasesOnly),
        ("constrained(1.2,1)", ParamsSource::Constrained { beta: 1.2, delta: 1.0 }, VerdictKind::BiorthogonalBasesNotRiesz),
        ("constrained(2,1)", ParamsSource::Constrained { beta: 2.0, delta: 1.0 }, VerdictKind::BiorthogonalBasesNotRiesz),
        (
            "constrained(sqrt2,1)",
            ParamsSource::Constrained { beta: 2f64.sqrt(), delta: 1.0 },
            VerdictKind::RieszLikeCollapse,
        ),
        ("a", ParamsSource::from_params(&presets::scenario_a()), VerdictKind::NotPseudoBosonic),
        ("b", ParamsSource::from_params(&presets::scenario_b()), VerdictKind::NotPseudoBosonic),
        ("c", ParamsSource::from_params(&presets::scenario_c()), VerdictKind::NotPseudoBosonic),
    ];
    let mut runs = 0;
    for (name, source, expected) in cases {
        let params = source.resolve().map_err(|e| e.to_string())?;
        let baseline = {
            let conv = NormalizationConvention::default_for(&params);
            let a = asymptotics(&params, &conv).ok();
            verdict(&params, &Evidence { normalizability: normalizability(&params), asymptotics: a, oracle: None })
        };
        if baseline.kind != expected {
            return Err(format!("{name}: {} instead of {}", baseline.kind.as_str(), expected.as_str()));
        }
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = |rng: &mut ChaCha8Rng| 10f64.powf(rng.gen_range(-12.0..-1.0));
            let cfg = RunConfig {
                mode: Mode::Classify,
                params: Some(source),
                n_max: rng.gen_range(1..=200),
                convention: if params.is_real_ordered() && rng.gen_bool(0.5) {
                    ConventionChoice::Symmetric
                } else {
                    ConventionChoice::Default
                },
                tolerances: Tolerances {
                    residual: scale(&mut rng),
                    gram: scale(&mut rng),
                    gram_complex: scale(&mut rng),
                    oracle_rel: scale(&mut rng),
                    oracle_log: scale(&mut rng),
                    product_rel: scale(&mut rng),
                    slope: scale(&mut rng),
                    quasi: scale(&mut rng),
                    ordering: scale(&mut rng),
                },
                seed: rng.gen(),
                quasi: QuasiConfig { n_max: rng.gen_range(1..=200), ..QuasiConfig::default() },
                sweep: None,
                out: rng.gen_bool(0.5).then(|| format!("/nonexistent/{}.json", rng.gen::<u32>()).into()),
                format: if rng.gen_bool(0.5) { Format::Json } else { Format::Csv },
            };
            let report = jobs::run(&cfg).map_err(|e| format!("{name} seed {seed}: {e}"))?;
            let v = report.verdict.ok_or_else(|| format!("{name} seed {seed}: no verdict"))?;
            if v != baseline {
                return Err(format!("{name} seed {seed}: {:?} differs from {:?}", v, baseline));
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} runs, all verdicts identical to the expected mapping"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("scenario reproduction", scenarios),
        ("commutator and ladder suite", ladder_suite),
        ("biorthonormality", gram),
        ("closed-form vs oracle norms", closed_vs_oracle),
        ("three-case table", three_case_table),
        ("anomalous growth", anomalous_growth),
        ("Legendre asymptotics", legendre_asymptotics),
        ("quasi-basis identity", quasi_identity),
        ("proportionality laws", proportionality),
        ("Swanson divergence", swanson_divergence),
        ("verdict engine", verdict_fuzz),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.2} s]", i + 1),
            Err(d) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
