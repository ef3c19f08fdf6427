//! End-to-end acceptance checks. Each prints one `criterion N: PASS|FAIL`
//! line with the measured numbers; the run fails if any criterion does.

use nonrecip_core::gauge::{build_eta_i, pseudo_hermiticity_residual};
use nonrecip_core::gbz::{beta_pairing_check, discrete_levels_by_root_gap, gbz_points, theoretical_radius};
use nonrecip_core::lattice::{build_real_space, build_real_space_2d, Boundary, LatticeModel1D, LatticeModel2D, LongRangeHop};
use nonrecip_core::spectral::{
    biorthogonal_system, classify_spectrum, eig_full, hn_analytic_spectrum, localization_lengths, localization_lengths_2d, metric_signs,
    normalize_for_metric, reconstruct_eta, PAIRING_TOLERANCE,
};
use nonrecip_core::topology::{edge_state_prediction, ns_zak_for_model, parameter_set_invariance_check, reference_trimer, DEFAULT_SAMPLES};
use nonrecip_core::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Root-gap threshold separating boundary levels from the continuum.
const LEVEL_GAP: f64 = 5.0;

fn report(n: usize, pass: bool, detail: String) -> bool {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn amplitude(rng: &mut StdRng) -> f64 {
    loop {
        let t: f64 = rng.random_range(-2.0..=2.0);
        if t.abs() >= 0.05 {
            return t;
        }
    }
}

/// Real nearest-neighbour chains with 1–4 sublattices and 4–12 cells.
fn ensemble(count: usize, seed: u64) -> Vec<LatticeModel1D> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.random_range(1..=4);
            let n = rng.random_range(4..=12);
            let right: Vec<f64> = (0..m).map(|_| amplitude(&mut rng)).collect();
            let left: Vec<f64> = (0..m).map(|_| amplitude(&mut rng)).collect();
            LatticeModel1D::from_real(&right, &left, n, Boundary::Open).unwrap()
        })
        .collect()
}

fn energies(model: &LatticeModel1D) -> Vec<C64> {
    eig_full(&build_real_space(model).unwrap()).unwrap().values
}

fn criterion_1_pseudo_hermiticity() -> bool {
    let mut worst = 0.0f64;
    let mut errors = 0;
    for model in ensemble(200, 1) {
        let h = build_real_space(&model).unwrap();
        let eta = build_eta_i(&model).unwrap();
        let peak = eta.diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let unit: Vec<f64> = eta.diag.iter().map(|x| x / peak).collect();
        worst = worst.max(pseudo_hermiticity_residual(&h, &unit) / h.frobenius_norm());
        if classify_spectrum(&energies(&model), PAIRING_TOLERANCE).is_err() {
            errors += 1;
        }
    }
    report(1, worst <= 1e-12 && errors == 0, format!("max relative residual {worst:.3e}, classification errors {errors}"))
}

fn gbz_ok(model: &LatticeModel1D) -> Result<(f64, f64), String> {
    let curve = gbz_points(model, &energies(model)).map_err(|e| e.to_string())?;
    let want = theoretical_radius(model).unwrap();
    Ok(((curve.radius - want).abs() / want, curve.max_radial_deviation / want))
}

fn criterion_2_circular_gbz() -> bool {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    let mut counts = [0usize; 3];
    for (idx, base) in ensemble(200, 1).into_iter().enumerate() {
        let exact = {
            let mut m = base.clone();
            for z in m.right.iter_mut().chain(m.left.iter_mut()) {
                *z = C64::new(z.re.abs(), 0.0);
            }
            m
        };
        let broken = {
            let mut m = exact.clone();
            m.left[0] = -m.left[0];
            m
        };
        let complex = {
            let mut m = base.clone();
            for z in m.right.iter_mut().chain(m.left.iter_mut()) {
                *z *= C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            }
            m
        };
        for (kind, m) in [exact, broken, complex].iter().enumerate() {
            counts[kind] += 1;
            match gbz_ok(m) {
                Ok((r, d)) => {
                    worst = (worst.0.max(r), worst.1.max(d));
                    if r > 1e-6 || d > 1e-6 {
                        failures.push((idx, kind));
                    }
                }
                Err(e) => failures.push((idx, kind + 10 * e.len())),
            }
        }
    }
    report(
        2,
        failures.is_empty(),
        format!(
            "{} chains x (exact, broken, complex): max radius error {:.3e}, max deviation {:.3e}, failures {:?}",
            counts[0], worst.0, worst.1, failures
        ),
    )
}

fn third_neighbour(extra: f64) -> LatticeModel1D {
    let fwd = 0.1;
    let bwd = fwd * (0.25f64 / 0.35).powi(3) + extra;
    let hop = LongRangeHop { source: 0, target: 0, cells: 3, forward: C64::new(fwd, 0.0), backward: C64::new(bwd, 0.0) };
    LatticeModel1D::from_real(&[0.35], &[0.25], 40, Boundary::Open).unwrap().with_long_range(vec![hop]).unwrap()
}

fn criterion_3_long_range_chain() -> bool {
    let good = third_neighbour(0.0);
    let h = build_real_space(&good).unwrap();
    let sys = biorthogonal_system(&h).unwrap();
    let curve = gbz_points(&good, &sys.eigenvalues).unwrap();
    let discrete = discrete_levels_by_root_gap(&good, &sys.eigenvalues, LEVEL_GAP).unwrap();
    let fit = localization_lengths(&sys, &good).unwrap();
    let target = 1.4f64.sqrt().ln();
    let worst_kappa = fit
        .per_state_kappa
        .iter()
        .enumerate()
        .filter(|(i, _)| !discrete.contains(i))
        .map(|(_, k)| (k - target).abs() / target)
        .fold(0.0f64, f64::max);
    let bad = third_neighbour(0.014);
    let bad_curve = gbz_points(&bad, &energies(&bad)).unwrap();
    let pass = (curve.radius - 1.1832).abs() <= 1e-4
        && curve.is_circular(1e-6)
        && worst_kappa <= 0.02
        && bad_curve.max_radial_deviation > 1e-2 * bad_curve.radius;
    report(
        3,
        pass,
        format!(
            "radius {:.6}, deviation {:.2e}, worst kappa error {:.3}% over {} continuum states; shifted hop deviation/radius {:.3}",
            curve.radius,
            curve.max_radial_deviation,
            100.0 * worst_kappa,
            fit.per_state_kappa.len() - discrete.len(),
            bad_curve.max_radial_deviation / bad_curve.radius
        ),
    )
}

fn criterion_4_bulk_boundary() -> bool {
    let mut counts = Vec::new();
    let mut predictions = Vec::new();
    for i in 0..=90 {
        let t3 = 0.3 + 0.01 * i as f64;
        let model = reference_trimer(t3, 40);
        let e = energies(&model);
        counts.push(discrete_levels_by_root_gap(&model, &e, LEVEL_GAP).unwrap().len());
        predictions.push(edge_state_prediction(&model).ok());
    }
    let t3 = |i: usize| 0.3 + 0.01 * i as f64;
    let steps: Vec<(f64, usize, usize)> =
        (1..counts.len()).filter(|&i| counts[i] != counts[i - 1]).map(|i| (t3(i), counts[i - 1], counts[i])).collect();
    let near = |x: f64, c: f64| (x - c).abs() <= 0.01 + 1e-9;
    let first = steps.iter().any(|&(x, a, b)| a == 0 && b == 2 && near(x, 0.6));
    let second = steps.iter().any(|&(x, a, b)| a == 2 && b == 4 && near(x, 0.9));
    let only = steps.len() == 2;
    let mismatches: Vec<f64> = (0..counts.len())
        .filter(|&i| !(near(t3(i), 0.6) || near(t3(i), 0.9)))
        .filter(|&i| predictions[i] != Some(counts[i] as i64))
        .map(t3)
        .collect();
    report(
        4,
        first && second && only && mismatches.is_empty(),
        format!(
            "count steps {:?}; prediction/count mismatches at {} grid points ({:?})",
            steps.iter().map(|(x, a, b)| format!("{a}->{b}@{x:.2}")).collect::<Vec<_>>(),
            mismatches.len(),
            mismatches.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_5_square_lattice() -> bool {
    let (left, right, down, up, diag) = (0.4, 0.2, 0.65, 0.35, 0.5);
    let back = diag * (down * left) / (up * right);
    let model = LatticeModel2D::from_real(30, 40, right, left, up, down).unwrap().with_diagonal(C64::new(diag, 0.0), C64::new(back, 0.0));
    let h = build_real_space_2d(&model).unwrap();
    let sys = biorthogonal_system(&h).unwrap();
    let scale = sys.eigenvalues.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let max_im = sys.eigenvalues.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let fit = localization_lengths_2d(&sys, &model).unwrap();
    let (tx, ty) = (0.5 * 2f64.ln(), 0.5 * (7.0f64 / 13.0).ln().abs());
    let err = |ks: &[f64], t: f64| ks.iter().map(|k| (k.abs() - t).abs() / t).fold(0.0f64, f64::max);
    let (ex, ey) = (err(&fit.kappa_x, tx), err(&fit.kappa_y, ty));
    report(
        5,
        max_im <= 1e-9 * scale && ex <= 0.03 && ey <= 0.03,
        format!(
            "max |Im E| {max_im:.2e} (scale {scale:.3}); worst kappa_x error {:.3}%, kappa_y error {:.3}% over {} states",
            100.0 * ex,
            100.0 * ey,
            fit.kappa_x.len()
        ),
    )
}

fn criterion_6_closed_form_chain() -> bool {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst_spec = 0.0f64;
    let mut worst_eta = 0.0f64;
    let mut broken = 0;
    for draw in 0..50 {
        let (left, right) = loop {
            let (l, r) = (amplitude(&mut rng), amplitude(&mut rng));
            let (l, r) = if draw % 2 == 0 { (l.abs(), r.abs()) } else { (l.abs(), -r.abs()) };
            if (l * r).abs() > 0.01 {
                break if rng.random_bool(0.5) { (l, r) } else { (-l, -r) };
            }
        };
        if left * right < 0.0 {
            broken += 1;
        }
        let cells = rng.random_range(3..=12);
        let model = LatticeModel1D::from_real(&[right], &[left], cells, Boundary::Open).unwrap();
        let mut analytic = hn_analytic_spectrum(left, right, cells).unwrap().values;
        let h = build_real_space(&model).unwrap();
        for e in eig_full(&h).unwrap().values {
            let (k, d) =
                analytic
                    .iter()
                    .enumerate()
                    .map(|(k, z)| (k, (z - e).norm()))
                    .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            worst_spec = worst_spec.max(d);
            analytic.swap_remove(k);
        }
        let sys = biorthogonal_system(&h).unwrap();
        let phase = classify_spectrum(&sys.eigenvalues, PAIRING_TOLERANCE).unwrap();
        let sys = normalize_for_metric(&sys, &phase);
        let eta = reconstruct_eta(&sys, &phase, &metric_signs(&sys, &phase)).unwrap();
        let gauge = build_eta_i(&model).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..cells {
            for j in 0..cells {
                let want = if i == j { gauge.diag[i] / gauge.diag[0] } else { 0.0 };
                num += (eta[(i, j)] / eta[(0, 0)] - want).norm_sqr();
                den += want * want;
            }
        }
        worst_eta = worst_eta.max((num / den).sqrt());
    }
    report(
        6,
        worst_spec <= 1e-8 && worst_eta < 1e-8,
        format!("50 draws ({broken} with negative product): max eigenvalue gap {worst_spec:.2e}, max metric residual {worst_eta:.2e}"),
    )
}

fn criterion_7_root_pairing() -> bool {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut failed = 0;
    for model in ensemble(200, 1) {
        let mut es = energies(&model);
        es.extend((0..4).map(|_| C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))));
        let r = beta_pairing_check(&model, &es, 1e-8).unwrap();
        worst = worst.max(r.max_mismatch);
        if !r.passed {
            failed += 1;
        }
    }
    report(7, failed == 0, format!("max relative mismatch {worst:.2e}, failing chains {failed}"))
}

fn criterion_8_parameter_set_invariance() -> bool {
    let mut lines = Vec::new();
    let mut pass = true;
    for t3 in [0.5, 0.75, 1.0] {
        let model = reference_trimer(t3, 40);
        for alpha in [2.0, -1.0, 0.3] {
            let r = parameter_set_invariance_check(&model, alpha).unwrap();
            let mut scaled = model.clone();
            scaled.left[0] *= alpha;
            scaled.right[0] /= alpha;
            let zak = ns_zak_for_model(&scaled, DEFAULT_SAMPLES, 0).unwrap();
            let sides = zak.left_winding == zak.per_band_winding;
            pass &= r.passed && sides;
            lines.push(format!("t3={t3} a={alpha}: dE {:.1e} windings {:?}", r.spectrum_deviation, zak.per_band_winding));
        }
        let zak = ns_zak_for_model(&model, DEFAULT_SAMPLES, 0).unwrap();
        pass &= zak.left_winding == zak.per_band_winding;
    }
    report(8, pass, lines.join("; "))
}

fn main() {
    let checks: [(usize, fn() -> bool); 8] = [
        (1, criterion_1_pseudo_hermiticity),
        (2, criterion_2_circular_gbz),
        (3, criterion_3_long_range_chain),
        (4, criterion_4_bulk_boundary),
        (5, criterion_5_square_lattice),
        (6, criterion_6_closed_form_chain),
        (7, criterion_7_root_pairing),
        (8, criterion_8_parameter_set_invariance),
    ];
    let mut failed = Vec::new();
    for (n, check) in checks {
        match std::panic::catch_unwind(check) {
            Ok(true) => {}
            Ok(false) => failed.push(n),
            Err(_) => {
                println!("criterion {n}: FAIL panicked");
                failed.push(n);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", checks.len() - failed.len(), checks.len());
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
