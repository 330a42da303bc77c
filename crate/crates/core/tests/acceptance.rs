//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line.
//!
//! Convergence orders are measured as the least-squares slope of
//! `log₂(error)` against `log₂(h)` over three grids; thresholds and runtime
//! budgets are asserted at the end of each test so the printed line always
//! appears first.

use std::time::Instant;

use lorimm_core::alignment_norms::{align_hypersurface, align_manifold};
use lorimm_core::chart::GridChart;
use lorimm_core::fixtures::{
    boosted_flat_metric, default_chart, desitter_metric, hyperboloid_embedding,
    hyperboloid_forms, hyperplane_forms, rindler_metric, timelike_sheet_forms,
};
use lorimm_core::grid_calculus::flatness_residual;
use lorimm_core::hypersurface_immersion::{
    classical_gc_residual, fundamental_form_defect, gc_pfaff_equivalence_gap,
    immerse_hypersurface_forms, specialize_from_forms, RiggedOperators,
};
use lorimm_core::linalg::{minkowski, op_norm, Mat};
use lorimm_core::lorentz_algebra::{
    certify_lorentz, lipschitz_constant, lorentz_decompose, lorentz_decompose_anchored,
};
use lorimm_core::manifold_immersion::{
    immerse_manifold, isometry_residual, metric_connection_coeffs,
};
use lorimm_core::pfaff_solver::{
    pfaff_compatibility_residual, pfaff_integrate_path, StaircasePath,
};
use lorimm_core::sampling::{
    random_invertible, random_lorentz_matrix, random_mink_isometry, random_monotone_staircase,
    random_smooth_field, rng, symmetrize_comps,
};
use rand::Rng;

/// Least-squares slope of log₂(err) against log₂(h).
fn fitted_order(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.log2()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    num / den
}

fn report(criterion: u32, ok: bool, detail: &str) {
    println!(
        "acceptance criterion {criterion}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn eta_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = a[0] * b[0] * -1.0;
    for i in 1..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[test]
fn criterion_1_decomposition_suite() {
    let t0 = Instant::now();
    let combos = [(2, 0.5), (2, 0.1), (3, 0.5), (3, 0.1), (4, 0.5), (4, 0.1)];
    let mut certified = 0usize;
    let mut draws = 0u64;
    let mut worst_recon = 0.0f64;
    let mut worst_norm = 0.0f64;
    while certified < 1000 {
        let (d, eps) = combos[certified % combos.len()];
        let g = random_lorentz_matrix(&mut rng(1_000 + draws), d);
        draws += 1;
        let Ok(cert) = certify_lorentz(&g, eps) else {
            continue;
        };
        certified += 1;
        let f = lorentz_decompose(&cert).base_f().clone();
        let eta = minkowski(d);
        let recon = &(&f.t() * &eta) * &f;
        worst_recon = worst_recon.max(recon.max_abs_diff(&g));
        worst_norm = worst_norm.max((op_norm(&f) - cert.op_norm().sqrt()).abs());
    }
    let secs = t0.elapsed().as_secs_f64();
    let ok = worst_recon <= 1e-11 && worst_norm <= 1e-9 && secs < 5.0;
    report(
        1,
        ok,
        &format!(
            "1000 certified draws (d ∈ {{2,3,4}}, ε ∈ {{0.5,0.1}}), worst |FᵀηF−G| = {worst_recon:.2e} (≤ 1e-11), worst norm identity gap = {worst_norm:.2e} (≤ 1e-9), {secs:.2} s (< 5 s)"
        ),
    );
    assert!(ok, "criterion 1 failed: recon {worst_recon:.3e}, norm {worst_norm:.3e}, {secs:.2} s");
}

#[test]
fn criterion_2_anchored_lipschitz() {
    let t0 = Instant::now();
    let combos = [(2, 0.5), (2, 0.1), (3, 0.5), (3, 0.1), (4, 0.5), (4, 0.1)];
    // Operator-norm gaps as multiples of the 2ε^d branch threshold: well
    // inside, straddling from both sides, and well outside.
    let multipliers = [0.5, 0.9, 1.1, 2.0];
    let mut worst_quotient = 0.0f64;
    let mut pairs = 0usize;
    for (ci, &(d, eps)) in combos.iter().enumerate() {
        let bound = lipschitz_constant(eps, d - 1);
        for k in 0..200 {
            let mut r = rng(2_000 + (ci * 200 + k) as u64);
            let (cg, cgt) = lorimm_core::sampling::random_certified_pair(
                &mut r,
                d,
                eps,
                multipliers[k % multipliers.len()],
            );
            let anchor = lorentz_decompose(&cg);
            let ft = lorentz_decompose_anchored(&anchor, &cgt).unwrap();
            let lhs = op_norm(&(&ft - anchor.base_f()));
            let rhs = bound * op_norm(&(cgt.matrix() - cg.matrix()));
            if rhs > 0.0 {
                worst_quotient = worst_quotient.max(lhs / rhs);
            }
            pairs += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let ok = worst_quotient <= 1.0 && secs < 5.0;
    report(
        2,
        ok,
        &format!(
            "{pairs} anchored pairs incl. threshold-straddling gaps, worst |𝓕(G̃)−𝓕(G)| / (L(ε,n)·|G̃−G|) = {worst_quotient:.2e} (≤ 1), {secs:.2} s (< 5 s)"
        ),
    );
    assert!(ok, "criterion 2 failed: quotient {worst_quotient:.3e}, {secs:.2} s");
}

#[test]
fn criterion_3_flatness_iff_compatibility() {
    let t0 = Instant::now();
    let grids = [33usize, 65, 129];
    let mut hs = Vec::new();
    let mut flat_errs = Vec::new();
    let mut compat_errs = Vec::new();
    let mut desitter_vals = Vec::new();
    for &s in &grids {
        let chart = default_chart("rindler", s).unwrap();
        let g = rindler_metric(&chart).unwrap();
        hs.push(chart.spacing(0));
        flat_errs.push(flatness_residual(&g, 2.0).unwrap().max_abs);
        let coeffs = metric_connection_coeffs(&g).unwrap();
        compat_errs.push(pfaff_compatibility_residual(&coeffs, 2.0).unwrap().max_abs);

        let ds = desitter_metric(&GridChart::cube(2, 0.0, 1.0, s).unwrap()).unwrap();
        desitter_vals.push(flatness_residual(&ds, 2.0).unwrap().max_abs);
    }
    let flat_order = fitted_order(&hs, &flat_errs);
    let compat_order = fitted_order(&hs, &compat_errs);
    let desitter_min = desitter_vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let secs = t0.elapsed().as_secs_f64();
    let ok = flat_order >= 1.9 && compat_order >= 1.9 && desitter_min > 0.05 && secs < 10.0;
    report(
        3,
        ok,
        &format!(
            "Rindler 33²/65²/129²: flatness order {flat_order:.2} (≥ 1.9), connection-compatibility order {compat_order:.2} (≥ 1.9); de Sitter residual ≥ {desitter_min:.3} (> 0.05); {secs:.2} s (< 10 s)"
        ),
    );
    assert!(ok, "criterion 3 failed: orders {flat_order:.3}/{compat_order:.3}, de Sitter {desitter_min:.3}, {secs:.2} s");
}

#[test]
fn criterion_4_manifold_reconstruction() {
    let t0 = Instant::now();
    let grids = [33usize, 65, 129];
    let mut hs = Vec::new();
    let mut iso_errs = Vec::new();
    let mut embed_errs = Vec::new();
    for &s in &grids {
        let chart = default_chart("rindler", s).unwrap();
        let g = rindler_metric(&chart).unwrap();
        hs.push(chart.spacing(0));
        let r = immerse_manifold(&g, &chart.center_index(), 0.2).unwrap();
        let iso = isometry_residual(&r, &g, 2.0).unwrap();
        iso_errs.push(iso.equation("recomputed_df").unwrap());

        // Align against the analytic embedding (ρ sinh τ, ρ cosh τ) through
        // the frames at the base point, then take the max pointwise error.
        let base = chart.center_index();
        let bc = chart.coord(&base);
        let (tau, rho) = (bc[0], bc[1]);
        let exact_frame = Mat::from_rows(&[
            vec![rho * tau.cosh(), tau.sinh()],
            vec![rho * tau.sinh(), tau.cosh()],
        ]);
        let q = r.base_frame() * &exact_frame.inverse().unwrap();
        let y_star = [rho * tau.sinh(), rho * tau.cosh()];
        let qy = q.mul_vec(&y_star);
        let f_star = r.f().comps_at(chart.lin_index(&base));
        let v = [f_star[0] - qy[0], f_star[1] - qy[1]];
        let mut worst = 0.0f64;
        for lin in 0..chart.point_count() {
            let x = chart.coord_of_lin(lin);
            let y = [x[1] * x[0].sinh(), x[1] * x[0].cosh()];
            let moved = q.mul_vec(&y);
            let f = r.f().comps_at(lin);
            worst = worst.max((f[0] - moved[0] - v[0]).abs());
            worst = worst.max((f[1] - moved[1] - v[1]).abs());
        }
        embed_errs.push(worst);
    }
    let iso_order = fitted_order(&hs, &iso_errs);
    let embed_order = fitted_order(&hs, &embed_errs);

    // A flat metric with constant components is reproduced to rounding.
    let chart = GridChart::cube(2, 0.0, 1.0, 17).unwrap();
    let gb = boosted_flat_metric(&chart, 0.5, 2.0).unwrap();
    let rb = immerse_manifold(&gb, &chart.center_index(), 0.1).unwrap();
    let boost_defect = isometry_residual(&rb, &gb, 2.0).unwrap().max_abs;

    let secs = t0.elapsed().as_secs_f64();
    let ok = iso_order >= 1.9 && embed_order >= 1.9 && boost_defect <= 1e-10 && secs < 20.0;
    report(
        4,
        ok,
        &format!(
            "Rindler 33²/65²/129²: isometry-residual order {iso_order:.2} (≥ 1.9), aligned-embedding order {embed_order:.2} (≥ 1.9); constant-boost defect {boost_defect:.2e} (≤ 1e-10); {secs:.2} s (< 20 s)"
        ),
    );
    assert!(ok, "criterion 4 failed: orders {iso_order:.3}/{embed_order:.3}, boost {boost_defect:.3e}, {secs:.2} s");
}

#[test]
fn criterion_5_uniqueness_up_to_isometry() {
    let t0 = Instant::now();

    // Metric pipeline: rigid motion of a Rindler reconstruction.
    let chart = default_chart("rindler", 33).unwrap();
    let g = rindler_metric(&chart).unwrap();
    let r1 = immerse_manifold(&g, &chart.center_index(), 0.2).unwrap();
    let motion = random_mink_isometry(&mut rng(501), 2, true);
    let r2 = r1.transform(&motion);
    let gap_metric = align_manifold(&r1, &r2, &g, &g, 3.0)
        .unwrap()
        .aligned_gap_w2p;

    // Rigged pipeline: general affine image, affine alignment.
    let hchart = default_chart("hyperboloid_forms", 33).unwrap();
    let forms = hyperboloid_forms(&hchart).unwrap();
    let ops = specialize_from_forms(&forms).unwrap();
    let rh = immerse_hypersurface_forms(&forms, &hchart.center_index(), 0.5).unwrap();
    let mut ar = rng(502);
    let qa = random_invertible(&mut ar, 3);
    let va: Vec<f64> = (0..3).map(|_| ar.gen_range(-2.0..2.0)).collect();
    let rh_affine = rh.transform_affine(&qa, &va);
    let gap_affine = align_hypersurface(&rh, &rh_affine, &ops, &ops, 3.0, false)
        .unwrap()
        .aligned_gap_w2p;

    // Forms pipeline: proper rigid motion, proper alignment.
    let iso = random_mink_isometry(&mut rng(503), 3, true);
    let rh_rigid = rh.transform_affine(iso.q(), iso.v());
    let gap_proper = align_hypersurface(&rh, &rh_rigid, &ops, &ops, 3.0, true)
        .unwrap()
        .aligned_gap_w2p;

    let secs = t0.elapsed().as_secs_f64();
    let ok =
        gap_metric <= 1e-9 && gap_affine <= 1e-9 && gap_proper <= 1e-9 && secs < 10.0;
    report(
        5,
        ok,
        &format!(
            "aligned gaps after seeded transforms: metric {gap_metric:.2e}, rigged-affine {gap_affine:.2e}, forms-proper {gap_proper:.2e} (each ≤ 1e-9); {secs:.2} s (< 10 s)"
        ),
    );
    assert!(ok, "criterion 5 failed: gaps {gap_metric:.3e}/{gap_affine:.3e}/{gap_proper:.3e}, {secs:.2} s");
}

#[test]
fn criterion_6_generalized_gc_equivalence() {
    let t0 = Instant::now();
    let chart = GridChart::cube(3, 0.0, 1.0, 17).unwrap();
    let n = chart.dim();
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut r = rng(6_000 + seed);
        let gamma = symmetrize_comps(
            &random_smooth_field(&mut r, &chart, &[n, n, n], 0.8),
            1,
            2,
        );
        let k = symmetrize_comps(&random_smooth_field(&mut r, &chart, &[n, n], 0.8), 0, 1);
        let l = random_smooth_field(&mut r, &chart, &[n, n], 0.8);
        let m = random_smooth_field(&mut r, &chart, &[n], 0.8);
        let ops = RiggedOperators::new(gamma, k, l, m).unwrap();
        worst = worst.max(gc_pfaff_equivalence_gap(&ops).unwrap());
    }
    let secs = t0.elapsed().as_secs_f64();
    let ok = worst <= 1e-12 && secs < 10.0;
    report(
        6,
        ok,
        &format!(
            "50 seeded rigged-operator sets on 17³: worst pointwise gap between the structured equations and the frame-system compatibility residual = {worst:.2e} (≤ 1e-12); {secs:.2} s (< 10 s)"
        ),
    );
    assert!(ok, "criterion 6 failed: gap {worst:.3e}, {secs:.2} s");
}

#[test]
fn criterion_7_hypersurface_reconstruction() {
    let t0 = Instant::now();
    let grids = [33usize, 65, 129];
    let mut hs = Vec::new();
    let mut gc_errs = Vec::new();
    let mut first_errs = Vec::new();
    let mut second_errs = Vec::new();
    let mut quadric_errs = Vec::new();
    for &s in &grids {
        let chart = default_chart("hyperboloid_forms", s).unwrap();
        let forms = hyperboloid_forms(&chart).unwrap();
        hs.push(chart.spacing(0));
        gc_errs.push(classical_gc_residual(&forms, 2.0).unwrap().max_abs);

        let r = immerse_hypersurface_forms(&forms, &chart.center_index(), 0.5).unwrap();
        let defect = fundamental_form_defect(&r, &forms, 2.0).unwrap();
        first_errs.push(defect.equation("first_form").unwrap());
        second_errs.push(defect.equation("second_form").unwrap());

        // Carry the reconstruction back to the model gauge through the base
        // frames and measure how far the image drifts off {y·y = −1}.
        let base = chart.center_index();
        let bc = chart.coord(&base);
        let (r0, th0) = (bc[0], bc[1]);
        let exact_frame = Mat::from_rows(&[
            vec![r0.sinh(), 0.0, r0.cosh()],
            vec![r0.cosh() * th0.cos(), -r0.sinh() * th0.sin(), r0.sinh() * th0.cos()],
            vec![r0.cosh() * th0.sin(), r0.sinh() * th0.cos(), r0.sinh() * th0.sin()],
        ]);
        let q = r.base_frame() * &exact_frame.inverse().unwrap();
        let eta = minkowski(3);
        let q_inv = &(&eta * &q.t()) * &eta;
        let y_star = hyperboloid_embedding(&bc);
        let qy = q.mul_vec(&y_star);
        let f_star = r.f().comps_at(chart.lin_index(&base));
        let v: Vec<f64> = f_star.iter().zip(&qy).map(|(a, b)| a - b).collect();
        let mut worst = 0.0f64;
        for lin in 0..chart.point_count() {
            let f = r.f().comps_at(lin);
            let shifted: Vec<f64> = f.iter().zip(&v).map(|(a, b)| a - b).collect();
            let y = q_inv.mul_vec(&shifted);
            worst = worst.max((eta_dot(&y, &y) + 1.0).abs());
        }
        quadric_errs.push(worst);
    }
    let gc_order = fitted_order(&hs, &gc_errs);
    let first_order = fitted_order(&hs, &first_errs);
    let second_order = fitted_order(&hs, &second_errs);
    let quadric_order = fitted_order(&hs, &quadric_errs);

    // Totally geodesic fixtures come out exact to rounding.
    let plane_chart = GridChart::cube(2, 0.0, 1.0, 9).unwrap();
    let plane = hyperplane_forms(&plane_chart).unwrap();
    let rp = immerse_hypersurface_forms(&plane, &plane_chart.center_index(), 0.5).unwrap();
    let plane_defect = fundamental_form_defect(&rp, &plane, 2.0).unwrap().max_abs;
    let sheet = timelike_sheet_forms(&plane_chart).unwrap();
    let rs = immerse_hypersurface_forms(&sheet, &plane_chart.center_index(), 0.5).unwrap();
    let sheet_defect = fundamental_form_defect(&rs, &sheet, 2.0).unwrap().max_abs;

    let secs = t0.elapsed().as_secs_f64();
    let ok = gc_order >= 1.9
        && first_order >= 1.9
        && second_order >= 1.9
        && quadric_order >= 1.9
        && plane_defect <= 1e-10
        && sheet_defect <= 1e-10
        && secs < 30.0;
    report(
        7,
        ok,
        &format!(
            "hyperboloid 33²/65²/129²: structured-residual order {gc_order:.2}, form-defect orders {first_order:.2}/{second_order:.2}, quadric-distance order {quadric_order:.2} (each ≥ 1.9); hyperplane/timelike-sheet defects {plane_defect:.2e}/{sheet_defect:.2e} (≤ 1e-10); {secs:.2} s (< 30 s)"
        ),
    );
    assert!(
        ok,
        "criterion 7 failed: orders {gc_order:.3}/{first_order:.3}/{second_order:.3}/{quadric_order:.3}, exact fixtures {plane_defect:.3e}/{sheet_defect:.3e}, {secs:.2} s"
    );
}

#[test]
fn criterion_8_stability_ratios() {
    let t0 = Instant::now();
    let deltas = [1e-2, 1e-3, 1e-4];

    // Metric perturbations of Rindler: conformal scaling by a constant keeps
    // the metric exactly flat, so both reconstructions are genuine.
    let chart = default_chart("rindler", 33).unwrap();
    let g1 = rindler_metric(&chart).unwrap();
    let r1 = immerse_manifold(&g1, &chart.center_index(), 0.2).unwrap();
    let mut metric_ratios = Vec::new();
    for &delta in &deltas {
        let g2 = g1.map(|v| v * (1.0 + delta));
        let r2 = immerse_manifold(&g2, &chart.center_index(), 0.2).unwrap();
        let out = align_manifold(&r1, &r2, &g1, &g2, 3.0).unwrap();
        metric_ratios.push(out.aligned_gap_w2p / out.input_gap);
    }

    // Extrinsic-curvature perturbations of the hyperboloid.
    let hchart = default_chart("hyperboloid_forms", 33).unwrap();
    let forms = hyperboloid_forms(&hchart).unwrap();
    let ops1 = specialize_from_forms(&forms).unwrap();
    let rh1 = immerse_hypersurface_forms(&forms, &hchart.center_index(), 0.5).unwrap();
    let mut forms_ratios = Vec::new();
    for &delta in &deltas {
        let bent = lorimm_core::hypersurface_immersion::FundamentalForms::new(
            forms.g().clone(),
            forms.k().map(|v| v * (1.0 + delta)),
            forms.lambda(),
        )
        .unwrap();
        let ops2 = specialize_from_forms(&bent).unwrap();
        let rh2 = immerse_hypersurface_forms(&bent, &hchart.center_index(), 0.5).unwrap();
        let out = align_hypersurface(&rh1, &rh2, &ops1, &ops2, 3.0, true).unwrap();
        forms_ratios.push(out.aligned_gap_w2p / out.input_gap);
    }

    let spread = |ratios: &[f64]| -> f64 {
        let max = ratios.iter().fold(0.0f64, |a, &b| a.max(b));
        let min = ratios.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        max / min
    };
    let metric_spread = spread(&metric_ratios);
    let forms_spread = spread(&forms_ratios);
    let secs = t0.elapsed().as_secs_f64();
    let ok = metric_spread < 3.0 && forms_spread < 3.0 && secs < 30.0;
    report(
        8,
        ok,
        &format!(
            "gap/input ratios over δ ∈ {{1e-2,1e-3,1e-4}}: metric {metric_ratios:?} (spread {metric_spread:.2}), forms {forms_ratios:?} (spread {forms_spread:.2}); spreads < 3; {secs:.2} s (< 30 s)"
        ),
    );
    assert!(ok, "criterion 8 failed: spreads {metric_spread:.3}/{forms_spread:.3}, {secs:.2} s");
}

#[test]
fn criterion_9_pfaff_path_independence() {
    let t0 = Instant::now();

    // Five seeded staircase pairs on the coarsest grid, refined geometrically
    // (every unit step doubles), so each grid integrates the same loops.
    let scale_path = |p: &StaircasePath, factor: usize| StaircasePath {
        start: p.start.iter().map(|&s| s * factor).collect(),
        moves: p
            .moves
            .iter()
            .map(|&(axis, dir, steps)| (axis, dir, steps * factor))
            .collect(),
    };
    let base_pairs: Vec<(StaircasePath, StaircasePath)> = (0..5)
        .map(|k| {
            let mut r = rng(910 + k);
            let a = random_monotone_staircase(&mut r, &[0, 0], &[16, 16]);
            let b = random_monotone_staircase(&mut r, &[0, 0], &[16, 16]);
            (a, b)
        })
        .collect();

    let grids = [17usize, 33, 65];
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for (gi, &s) in grids.iter().enumerate() {
        let factor = 1 << gi;
        let chart = default_chart("rindler", s).unwrap();
        let g = rindler_metric(&chart).unwrap();
        let coeffs = metric_connection_coeffs(&g).unwrap();
        let cert = lorimm_core::lorentz_algebra::certify_lorentz_auto(&g.mat_at(0)).unwrap();
        let y0 = lorentz_decompose(&cert).base_f().clone();
        hs.push(chart.spacing(0));
        let mut worst = 0.0f64;
        for (a, b) in &base_pairs {
            let ya = pfaff_integrate_path(&coeffs, &scale_path(a, factor), &y0).unwrap();
            let yb = pfaff_integrate_path(&coeffs, &scale_path(b, factor), &y0).unwrap();
            worst = worst.max(ya.max_abs_diff(&yb));
        }
        errs.push(worst);
    }
    let order = fitted_order(&hs, &errs);

    // The curved negative control: endpoint gaps that refinement cannot kill.
    let ds_chart = GridChart::cube(2, 0.0, 1.0, 65).unwrap();
    let ds = desitter_metric(&ds_chart).unwrap();
    let ds_coeffs = metric_connection_coeffs(&ds).unwrap();
    let y0 = Mat::identity(2);
    let mut ds_gap = 0.0f64;
    for (a, b) in &base_pairs {
        let ya = pfaff_integrate_path(&ds_coeffs, &scale_path(a, 4), &y0).unwrap();
        let yb = pfaff_integrate_path(&ds_coeffs, &scale_path(b, 4), &y0).unwrap();
        ds_gap = ds_gap.max(ya.max_abs_diff(&yb));
    }

    let secs = t0.elapsed().as_secs_f64();
    let ok = order >= 1.9 && ds_gap > 1e-3 && secs < 10.0;
    report(
        9,
        ok,
        &format!(
            "five refined staircase pairs on Rindler: endpoint-gap order {order:.2} (≥ 1.9); de Sitter endpoint gap {ds_gap:.2e} at 65² (> 1e-3); {secs:.2} s (< 10 s)"
        ),
    );
    assert!(ok, "criterion 9 failed: order {order:.3}, de Sitter gap {ds_gap:.3e}, {secs:.2} s");
}
