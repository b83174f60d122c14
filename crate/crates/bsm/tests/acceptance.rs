//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them on success).

mod common;

use bsm::{
    aic, beta_log_pdf, beta_moments, bic, bsm_log_pdf, bsm_moments, bsm_sample, cached_rule,
    em_fit, expect_mixing, fit_mle, rank_models, run_sensitivity, BetaParams, BsmParams, Dataset,
    EmOptions, FitOptions, MixingKind, MixingSpec, ScenarioConfig,
};
use common::{
    beta_regression_data, data_dir, integrate_unit_density, read_csv_columns, tpb_regression_data,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {id:02} {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {id:02} {name} failed: {detail}");
}

fn skip(id: u32, name: &str, why: &str) {
    println!("acceptance {id:02} {name}: SKIP — {why}");
}

/// Per-family tail-weight grids used by the normalization and mean suites.
fn theta_grid(kind: MixingKind) -> Vec<MixingSpec> {
    match kind {
        MixingKind::TwoPoint => vec![
            MixingSpec::two_point(0.9, 1.5).unwrap(),
            MixingSpec::two_point(0.75, 2.0).unwrap(),
            MixingSpec::two_point(0.5, 3.0).unwrap(),
        ],
        MixingKind::Gamma => [0.05, 0.2, 0.5]
            .iter()
            .map(|&th| MixingSpec::gamma(th).unwrap())
            .collect(),
        MixingKind::LogNormal => [0.1, 0.5, 1.0]
            .iter()
            .map(|&th| MixingSpec::log_normal(th).unwrap())
            .collect(),
        MixingKind::InverseGaussian => [0.1, 0.5, 1.0]
            .iter()
            .map(|&th| MixingSpec::inverse_gaussian(th).unwrap())
            .collect(),
        MixingKind::Degenerate => vec![MixingSpec::Degenerate],
    }
}

fn mixture_families() -> [MixingKind; 4] {
    [
        MixingKind::TwoPoint,
        MixingKind::Gamma,
        MixingKind::LogNormal,
        MixingKind::InverseGaussian,
    ]
}

fn grid99() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

#[test]
fn criterion_01_information_criteria_golden() {
    let cases = [
        (aic(28.5806, 3), -51.1611),
        (bic(28.5806, 3, 104), -43.2280),
        (aic(38.4982, 4), -68.9963),
        (bic(38.4982, 4, 104), -58.4188),
    ];
    let worst = cases
        .iter()
        .map(|(got, want)| (got - want).abs())
        .fold(0.0f64, f64::max);
    report(
        1,
        "information-criteria golden values",
        worst < 5e-4,
        &format!("worst |error| = {worst:.2e} (tolerance 5e-4)"),
    );
}

#[test]
fn criterion_02_normalization() {
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    let mut cases = 0;
    for kind in mixture_families() {
        for spec in theta_grid(kind) {
            for mu in [0.1, 0.5, 0.9] {
                for phi in [0.1, 0.5, 1.0] {
                    cases += 1;
                    let p = BsmParams::new(BetaParams::new(mu, phi).unwrap(), spec.clone()).unwrap();
                    let q = BsmParams::new(BetaParams::new(1.0 - mu, phi).unwrap(), spec.clone())
                        .unwrap();
                    let total = integrate_unit_density(
                        &|y| bsm_log_pdf(y, &p).unwrap(),
                        &|u| bsm_log_pdf(u, &q).unwrap(),
                    );
                    let err = (total - 1.0).abs();
                    if err > worst {
                        worst = err;
                        worst_case = format!("{spec:?} mu={mu} phi={phi}");
                    }
                }
            }
        }
    }
    report(
        2,
        "density normalization",
        cases == 108 && worst < 1e-4,
        &format!("{cases} cases, worst |∫f − 1| = {worst:.2e} at {worst_case} (tolerance 1e-4)"),
    );
}

#[test]
fn criterion_03_mean_preservation() {
    let mut worst_quad = 0.0f64;
    let mut mc_fail = 0usize;
    let mut cases = 0;
    let mut seed = 9000u64;
    for kind in mixture_families() {
        for spec in theta_grid(kind) {
            for mu in [0.1, 0.5, 0.9] {
                for phi in [0.1, 0.5, 1.0] {
                    cases += 1;
                    seed += 1;
                    let p = BsmParams::new(BetaParams::new(mu, phi).unwrap(), spec.clone()).unwrap();
                    let m = bsm_moments(&p).unwrap();
                    worst_quad = worst_quad.max((m.mean - mu).abs());
                    let n = 100_000usize;
                    let draws =
                        bsm_sample(&p, &mut ChaCha12Rng::seed_from_u64(seed), n).unwrap();
                    let mean: f64 = draws.iter().sum::<f64>() / n as f64;
                    let se = (m.variance / n as f64).sqrt();
                    if (mean - mu).abs() > 4.0 * se {
                        mc_fail += 1;
                    }
                }
            }
        }
    }
    report(
        3,
        "mean preservation",
        cases == 108 && worst_quad < 1e-6 && mc_fail == 0,
        &format!(
            "{cases} cases, worst quadrature |mean − μ| = {worst_quad:.2e} (tolerance 1e-6), \
             {mc_fail} Monte-Carlo means outside 4 SE"
        ),
    );
}

#[test]
fn criterion_04_two_point_dual_path_identity() {
    let mut rng = ChaCha12Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mu = 0.05 + 0.9 * rng.random::<f64>();
        let phi = (rng.random::<f64>() * 3.7 - 3.0f64).exp();
        let t1 = 0.05 + 0.9 * rng.random::<f64>();
        let t2 = 1.0 + (rng.random::<f64>() * 2.2 - 1.0f64).exp();
        let base = BetaParams::new(mu, phi).unwrap();
        let p = BsmParams::new(base, MixingSpec::two_point(t1, t2).unwrap()).unwrap();
        let reference = base;
        let contaminant = BetaParams::new(mu, t2 * phi).unwrap();
        for y in grid99() {
            let quad = bsm_log_pdf(y, &p).unwrap();
            let f1 = beta_log_pdf(y, &reference).unwrap().exp();
            let f2 = beta_log_pdf(y, &contaminant).unwrap().exp();
            let closed = (t1 * f1 + (1.0 - t1) * f2).ln();
            let err = (quad - closed).abs() / quad.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    report(
        4,
        "two-point quadrature matches the closed-form mixture",
        worst < 1e-12,
        &format!("worst scaled log-density gap = {worst:.2e} over 20 draws × 99 points (tolerance 1e-12)"),
    );
}

#[test]
fn criterion_05_degenerate_limits() {
    let sup = |spec: MixingSpec, mu: f64, phi: f64, nodes: usize| -> f64 {
        let base = BetaParams::new(mu, phi).unwrap();
        let p = BsmParams::with_nodes(base, spec, nodes).unwrap();
        grid99()
            .iter()
            .map(|&y| {
                (bsm_log_pdf(y, &p).unwrap().exp() - beta_log_pdf(y, &base).unwrap().exp()).abs()
            })
            .fold(0.0f64, f64::max)
    };
    let mut detail = String::new();
    let mut pass = true;
    for (mu, phi) in [(0.5, 0.3), (0.2, 0.5)] {
        let g = sup(MixingSpec::gamma(1e-4).unwrap(), mu, phi, 64);
        let l = sup(MixingSpec::log_normal(1e-4).unwrap(), mu, phi, 64);
        pass &= g < 1e-3 && l < 1e-3;
        detail.push_str(&format!("GB({mu},{phi})={g:.1e} LNB={l:.1e} "));
    }
    let t = sup(
        MixingSpec::two_point(1.0 - 1e-9, 1.0 + 1e-9).unwrap(),
        0.5,
        0.3,
        64,
    );
    pass &= t < 1e-3;
    // the transformed Gauss-Legendre rule resolves the near-degenerate
    // inverse-Gaussian spike less sharply; its documented budget is 1e-2
    let ig = sup(MixingSpec::inverse_gaussian(1e-4).unwrap(), 0.5, 0.3, 64);
    pass &= ig < 1e-2;
    detail.push_str(&format!("TPB={t:.1e} IGB={ig:.1e}"));
    report(5, "degenerate-limit recovery", pass, &detail);
}

#[test]
fn criterion_06_em_ascent_and_agreement() {
    // 50 seeded fits: every observed log-likelihood path non-decreasing.
    let mut dips = 0usize;
    let mut non_converged = 0usize;
    for seed in 600..650u64 {
        let data = tpb_regression_data(seed, 1000, 0.5, 1.0, 0.1, 0.85, 8.0);
        let (_, trace) = em_fit(&data, &EmOptions::default()).unwrap();
        if !trace.converged {
            non_converged += 1;
        }
        for w in trace.loglik_path.windows(2) {
            if w[1] < w[0] - 1e-10 {
                dips += 1;
            }
        }
    }
    // 20 datasets: EM and direct maximization reach the same optimum.
    let mut worst_gap = 0.0f64;
    for seed in 700..720u64 {
        let data = tpb_regression_data(seed, 500, 0.5, 1.0, 0.1, 0.85, 8.0);
        let (em, _) = em_fit(&data, &EmOptions::default()).unwrap();
        let direct = fit_mle(&data, MixingKind::TwoPoint, &FitOptions::default()).unwrap();
        worst_gap = worst_gap.max((em.loglik - direct.loglik).abs());
    }
    report(
        6,
        "EM ascent and EM/direct agreement",
        dips == 0 && worst_gap < 1e-4,
        &format!(
            "{dips} path decreases beyond 1e-10 across 50 fits ({non_converged} non-converged), \
             worst |ll_EM − ll_direct| = {worst_gap:.2e} over 20 datasets (tolerance 1e-4)"
        ),
    );
}

#[test]
fn criterion_07_sensitivity_orderings() {
    let config = ScenarioConfig {
        replicates: 100,
        n: 500,
        beta0: 0.5,
        beta1: 1.0,
        phi_true: 0.25,
        contamination_rate: 0.05,
        families: MixingKind::all().to_vec(),
        seed: 7,
        tpb_via_em: false,
        nodes: 64,
    };
    let t = std::time::Instant::now();
    let rep = run_sensitivity(&config).unwrap();
    let bias_b = rep.cell(MixingKind::Degenerate, "beta1").unwrap().bias;
    let bias_tpb = rep.cell(MixingKind::TwoPoint, "beta1").unwrap().bias;
    let mse_b = rep.cell(MixingKind::Degenerate, "beta1").unwrap().mse;
    let mse_tpb = rep.cell(MixingKind::TwoPoint, "beta1").unwrap().mse;
    let pass = bias_b < 0.0 && bias_b.abs() > bias_tpb.abs() && mse_b > mse_tpb;
    report(
        7,
        "contamination sensitivity orderings",
        pass,
        &format!(
            "bias_B(β₁) = {bias_b:.4}, bias_TPB(β₁) = {bias_tpb:.4}, \
             MSE_B = {mse_b:.4}, MSE_TPB = {mse_tpb:.4}, elapsed {:.0?}",
            t.elapsed()
        ),
    );
}

#[test]
fn criterion_08_dataset_gated_golden_fits() {
    let dir = data_dir();
    let jurors = dir.join("mockjurors.csv");
    if !jurors.exists() {
        skip(
            8,
            "dataset-gated golden fits",
            &format!(
                "{} not present; export it as documented in the README to enable this check",
                jurors.display()
            ),
        );
    } else {
        let cols = read_csv_columns(&jurors, &["confidence", "verdict"]).unwrap();
        let data = Dataset::new(
            cols[0].clone(),
            vec![cols[1].clone()],
            vec!["verdict".into()],
        )
        .unwrap();
        let beta_fit = fit_mle(&data, MixingKind::Degenerate, &FitOptions::default()).unwrap();
        let se = beta_fit.standard_errors.clone().unwrap_or_default();
        let est_ok = (beta_fit.estimate("beta0").unwrap() - 0.8521).abs() < 1e-3
            && (beta_fit.estimate("beta1").unwrap() - 0.0859).abs() < 1e-3
            && (beta_fit.estimate("phi").unwrap() - 0.3854).abs() < 1e-3;
        let want_se = [0.1096, 0.1019, 0.3274];
        let se_ok = se.len() == 3
            && se
                .iter()
                .zip(want_se)
                .all(|((_, got), want)| (got - want).abs() < 5e-3);

        let mut fits = Vec::new();
        for kind in MixingKind::all() {
            let f = fit_mle(&data, kind, &FitOptions::default()).unwrap();
            fits.push((kind.label().to_string(), f.loglik, f.n_params));
        }
        let igb_ll = fits
            .iter()
            .find(|(l, _, _)| l == "IGB")
            .map(|&(_, ll, _)| ll)
            .unwrap();
        let table = rank_models(&fits, data.len()).unwrap();
        let (aic_rank, bic_rank) = table.rank_of("IGB").unwrap();
        let pass = est_ok && se_ok && (igb_ll - 38.4982).abs() < 0.1 && aic_rank == 1 && bic_rank == 1;
        report(
            8,
            "mock-jurors golden fits",
            pass,
            &format!(
                "beta fit ok = {est_ok}, SEs ok = {se_ok}, IGB loglik = {igb_ll:.4} \
                 (target 38.4982 ± 0.1), IGB ranks = ({aic_rank}, {bic_rank})"
            ),
        );
    }

    let sdac = dir.join("sdac.csv");
    if !sdac.exists() {
        skip(
            8,
            "dataset-gated golden fits (sdac)",
            &format!("{} not present", sdac.display()),
        );
        return;
    }
    let cols = read_csv_columns(&sdac, &["rcd", "ageadj", "chemo"]).unwrap();
    let data = Dataset::new(
        cols[0].clone(),
        vec![cols[1].clone(), cols[2].clone()],
        vec!["ageadj".into(), "chemo".into()],
    )
    .unwrap();
    let fit = fit_mle(&data, MixingKind::Degenerate, &FitOptions::default()).unwrap();
    let pass = (fit.estimate("beta0").unwrap() - 1.0422).abs() < 1e-3
        && (fit.estimate("beta1").unwrap() - 0.0143).abs() < 1e-3
        && (fit.estimate("beta2").unwrap() - 0.2143).abs() < 1e-3
        && (fit.estimate("phi").unwrap() - 0.0883).abs() < 1e-3;
    report(
        8,
        "sdac golden fit",
        pass,
        &format!(
            "beta0 = {:.4}, beta1 = {:.4}, beta2 = {:.4}, phi = {:.4}",
            fit.estimate("beta0").unwrap(),
            fit.estimate("beta1").unwrap(),
            fit.estimate("beta2").unwrap(),
            fit.estimate("phi").unwrap()
        ),
    );
}

#[test]
fn criterion_09_moment_cross_checks() {
    let mut rng = ChaCha12Rng::seed_from_u64(909);
    let mut worst_var = 0.0f64;
    for _ in 0..20 {
        let mu = 0.05 + 0.9 * rng.random::<f64>();
        let phi = (rng.random::<f64>() * 3.0 - 2.0f64).exp();
        let t1 = 0.05 + 0.9 * rng.random::<f64>();
        let t2 = 1.0 + (rng.random::<f64>() * 2.2 - 0.7f64).exp();
        let p = BsmParams::new(
            BetaParams::new(mu, phi).unwrap(),
            MixingSpec::two_point(t1, t2).unwrap(),
        )
        .unwrap();
        let m = bsm_moments(&p).unwrap();
        // brute-force two-atom evaluation of μ(1−μ)φ·E[1/(φ+W)]
        let display =
            mu * (1.0 - mu) * phi * (t1 / (phi + 1.0) + (1.0 - t1) / (phi + 1.0 / t2));
        worst_var = worst_var.max((m.variance - display).abs() / display.abs());
    }
    let mut worst_skew = 0.0f64;
    for kind in mixture_families() {
        for spec in theta_grid(kind) {
            let p = BsmParams::new(BetaParams::new(0.5, 0.25).unwrap(), spec).unwrap();
            worst_skew = worst_skew.max(bsm_moments(&p).unwrap().skewness.abs());
        }
    }
    report(
        9,
        "moment cross-checks",
        worst_var < 1e-12 && worst_skew < 1e-10,
        &format!(
            "worst relative variance gap = {worst_var:.2e} (tolerance 1e-12), \
             worst |skewness| at μ = ½ is {worst_skew:.2e} (tolerance 1e-10)"
        ),
    );
}

#[test]
fn criterion_10_kurtosis_expansion() {
    let base = BetaParams::new(0.5, 0.01).unwrap();
    let beta_k = beta_moments(&base).excess_kurtosis;
    let mut pass = true;
    let mut detail = format!("beta excess kurtosis = {beta_k:.4}; ");
    for kind in [
        MixingKind::Gamma,
        MixingKind::LogNormal,
        MixingKind::InverseGaussian,
    ] {
        let ks: Vec<f64> = [0.05, 0.1, 0.2, 0.4]
            .iter()
            .map(|&th| {
                let spec = match kind {
                    MixingKind::Gamma => MixingSpec::gamma(th).unwrap(),
                    MixingKind::LogNormal => MixingSpec::log_normal(th).unwrap(),
                    _ => MixingSpec::inverse_gaussian(th).unwrap(),
                };
                bsm_moments(&BsmParams::new(base, spec).unwrap())
                    .unwrap()
                    .excess_kurtosis
            })
            .collect();
        let monotone = ks.windows(2).all(|w| w[0] <= w[1] + 1e-12);
        let above = ks.iter().all(|&k| k > beta_k);
        pass &= monotone && above;
        detail.push_str(&format!("{} = {:.3?} ", kind.label(), ks));
    }
    let tpb: Vec<f64> = [2.0, 5.0, 10.0]
        .iter()
        .map(|&t2| {
            bsm_moments(
                &BsmParams::new(base, MixingSpec::two_point(0.75, t2).unwrap()).unwrap(),
            )
            .unwrap()
            .excess_kurtosis
        })
        .collect();
    pass &= tpb[0] < tpb[1] && tpb[1] < tpb[2];
    detail.push_str(&format!("TPB over θ₂ = {tpb:.3?}"));
    report(10, "kurtosis expansion", pass, &detail);
}

/// The quadrature weight-sum contract backs several criteria; assert it on
/// the exact grids the suite uses.
#[test]
fn quadrature_weight_sums_on_acceptance_grids() {
    let mut worst = 0.0f64;
    for kind in mixture_families() {
        for spec in theta_grid(kind) {
            for n in [8, 16, 32, 64, 128] {
                let rule = cached_rule(&spec, n).unwrap();
                let sum = expect_mixing(|_| 1.0, &rule).unwrap();
                worst = worst.max((sum - 1.0).abs());
            }
        }
    }
    assert!(worst < 1e-10, "worst weight-sum deviation {worst:.2e}");
}
