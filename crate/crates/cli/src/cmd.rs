//! Subcommand drivers, generic over the arithmetic mode.
//!
//! Each driver prints human-readable check lines through [`Report`],
//! records artifacts it wrote, and leaves the exit-code decision to the
//! caller.  Tolerance policy: rational runs must produce exactly zero
//! residuals; float runs compare residuals against the configured
//! tolerance scaled by the magnitude of the coefficients being cancelled,
//! so a degree-12 identity on weight-3 systems is not failed for honest
//! rounding in its ~10^5-sized terms.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use kneading_core::cylinders::{
    census, chord_crossing_class, collect, log_derivative_residual, zeta_det_residual,
};
use kneading_core::kneading::{
    boundary_factor, branch_partition_sum, classical_determinants, cut_preimage_tables,
    kneading_matrix, m_bridge_residuals, main_identity_residuals, matching_matrix,
    reduced_matrix, SeriesMatrix,
};
use kneading_core::pressure::{pressure, PressureOptions};
use kneading_core::semiconj::{
    conjugacy_residual, critical_model, lap_series_census, lap_series_from_counts, model_map,
    HCrossCheck, Lambda, PhiMap,
};
use kneading_core::{Dir, Germ, GermInterval, Scalar, Series, System};
use rand_chacha::ChaCha20Rng;

use crate::config::RunConfig;
use crate::emit::{cell, Csv};
use crate::report::Report;
use crate::sample;

// ---------------------------------------------------------------------------
// Shared helpers.

fn max_abs_coeff<K: Scalar>(s: &Series<K>) -> f64 {
    s.coeffs().iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
}

fn matrix_scale<K: Scalar>(m: &SeriesMatrix<K>) -> f64 {
    let mut s = 0.0f64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            s = s.max(max_abs_coeff(m.get(i, j)));
        }
    }
    s
}

/// Tolerance for a residual whose terms have the given magnitude.
fn identity_tol<K: Scalar>(cfg: &RunConfig, scale: f64) -> f64 {
    if K::is_exact() {
        0.0
    } else {
        cfg.tolerance * scale.max(1.0)
    }
}

/// Largest depth `d ≤ want` whose full cylinder walk fits the budget.
fn capped_depth<K: Scalar>(sys: &System<K>, want: usize, cap: usize) -> usize {
    let nb = sys.num_branches() as u128;
    let mut depth = 1;
    let mut level = nb;
    let mut total = nb;
    while depth < want {
        level = level.saturating_mul(nb);
        total = total.saturating_add(level);
        if total > cap as u128 {
            break;
        }
        depth += 1;
    }
    depth
}

fn pressure_options(cfg: &RunConfig) -> PressureOptions {
    PressureOptions { cylinder_cap: cfg.cylinder_cap, ..PressureOptions::default() }
}

fn dir_cell(dir: Dir) -> String {
    match dir {
        Dir::Plus => "+".to_string(),
        Dir::Minus => "-".to_string(),
    }
}

/// Interior germs on a uniform grid plus both germs at every cut and the
/// two inward boundary germs — the sampling set for φ tables and
/// conjugacy sweeps.
fn germ_grid<K: Scalar>(sys: &System<K>, steps: i64) -> Vec<Germ<K>> {
    let span = sys.b().clone() - sys.a().clone();
    let mut germs = vec![sys.left_germ()];
    for k in 1..steps {
        let x = sys.a().clone() + span.clone() * K::from_ratio(k, steps);
        germs.push(Germ::minus(x.clone()));
        germs.push(Germ::plus(x));
    }
    for j in 1..=sys.ell() {
        for g in [Germ::minus(sys.cut(j).clone()), Germ::plus(sys.cut(j).clone())] {
            if !germs.contains(&g) {
                germs.push(g);
            }
        }
    }
    germs.push(sys.right_germ());
    germs
}

/// Cut germs first (both sides of every interior cut, then the inward
/// boundary germs), padded with seeded random germs up to `want`.
fn cut_and_random_germs<K: Scalar>(
    sys: &System<K>,
    rng: &mut ChaCha20Rng,
    want: usize,
) -> Vec<Germ<K>> {
    let mut germs = Vec::new();
    for j in 1..=sys.ell() {
        germs.push(Germ::plus(sys.cut(j).clone()));
        germs.push(Germ::minus(sys.cut(j).clone()));
    }
    germs.push(sys.left_germ());
    germs.push(sys.right_germ());
    while germs.len() < want {
        germs.push(sample::random_germ(rng, sys));
    }
    germs
}

fn word_cell(word: &[usize]) -> String {
    word.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
}

fn series_preview<K: Scalar>(s: &Series<K>, through: usize) -> String {
    (0..=through.min(s.degree()))
        .map(|m| cell(&s.coeff(m)))
        .collect::<Vec<_>>()
        .join(", ")
}

// ---------------------------------------------------------------------------
// validate

pub fn validate<K: Scalar>(sys: &System<K>, cfg: &RunConfig, rep: &mut Report) -> Result<()> {
    println!(
        "interval [{}, {}] with {} interior cut(s), {} branches",
        cell(sys.a()),
        cell(sys.b()),
        sys.ell(),
        sys.num_branches()
    );
    for i in 0..sys.num_branches() {
        let br = sys.branch(i);
        let y0 = br.eval(sys.cut(i));
        let y1 = br.eval(sys.cut(i + 1));
        let (ylo, yhi) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
        println!(
            "branch {i}: ]{}, {}[ -> [{}, {}], slope {}, weight {}, sign {:+}",
            cell(sys.cut(i)),
            cell(sys.cut(i + 1)),
            cell(&ylo),
            cell(&yhi),
            cell(&br.slope),
            cell(&br.weight),
            sys.sign(i)
        );
    }
    rep.datum("branches", sys.num_branches().into());
    rep.datum("cuts", sys.ell().into());
    rep.datum("truncation", cfg.truncation.into());
    rep.check_bool("system_well_formed", true);
    Ok(())
}

// ---------------------------------------------------------------------------
// kneading

pub fn kneading<K: Scalar>(
    sys: &System<K>,
    cfg: &RunConfig,
    out: &Path,
    rep: &mut Report,
) -> Result<()> {
    let n = cfg.truncation;
    let r = kneading_matrix(sys, n)?;
    let det = r.det();
    let reduced = reduced_matrix(&r);
    let rdet = reduced.det();
    let h = boundary_factor(sys, n);
    let scale = matrix_scale(&r).max(max_abs_coeff(&det));

    let preview = n.min(10);
    println!("determinant coefficients 0..={preview}: {}", series_preview(&det, preview));
    println!(
        "reduced determinant coefficients 0..={preview}: {}",
        series_preview(&rdet, preview)
    );
    println!("boundary factor: {}", series_preview(&h, 1));

    let mut id_res = 0.0f64;
    for i in 0..r.rows() {
        for j in 0..r.cols() {
            let d = if i == j { K::one() } else { K::zero() };
            id_res = id_res.max((r.get(i, j).coeff(0) - d).to_f64().abs());
        }
    }
    rep.check("matrix_at_zero_is_identity", id_res, identity_tol::<K>(cfg, 1.0));

    let split = &(&h * &det) - &rdet;
    rep.check(
        "boundary_factor_splits_determinant",
        max_abs_coeff(&split.truncate(n)),
        identity_tol::<K>(cfg, scale),
    );

    for j in 0..r.rows() {
        for k in 0..r.cols() {
            let mut csv = Csv::new(&format!("theta_{j}_{k}.csv"), "theta", &["m", "coeff"]);
            let s = r.get(j, k);
            for m in 0..=s.degree() {
                csv.row(&[m.to_string(), cell(&s.coeff(m))]);
            }
            rep.artifact(&csv.write(out)?);
        }
    }
    let mut csv = Csv::new("det.csv", "det", &["n", "coeff"]);
    for m in 0..=det.degree() {
        csv.row(&[m.to_string(), cell(&det.coeff(m))]);
    }
    rep.artifact(&csv.write(out)?);

    rep.datum("truncation", n.into());
    rep.datum("dimension", r.rows().into());
    Ok(())
}

// ---------------------------------------------------------------------------
// pressure

pub fn pressure_cmd<K: Scalar>(
    sys: &System<K>,
    cfg: &RunConfig,
    out: &Path,
    rep: &mut Report,
) -> Result<()> {
    let opts = pressure_options(cfg);
    let report = pressure(sys, cfg.truncation, &opts)?;

    println!(
        "scan cap: t_max {:.6} (sup radius bound {:.6})",
        report.t_max, report.sup_radius_bound
    );
    match (&report.t_star, report.rho1, report.pressure) {
        (Some(t), Some(rho), Some(p)) => {
            println!("smallest positive zero t* = {} (1/t* = {rho:.12})", cell(t));
            println!("pressure log(1/t*) = {p:.12}");
        }
        _ => println!("no determinant zero found in the scan range"),
    }
    if let Some(gap) = report.stability_gap {
        println!("truncation stability |t*(N) - t*(2N)| = {gap:.3e}");
    }
    if let Some(dip) = report.possible_even_order {
        println!("note: no sign change, but a dip below tolerance near t = {dip:.6}");
    }
    if report.reduced_zero_is_spurious {
        if let Some(z) = &report.reduced_first_zero {
            println!(
                "note: reduced determinant vanishes first at {} — a boundary-factor \
                 zero, not a pressure zero",
                cell(z)
            );
        }
    }

    let det = kneading_matrix(sys, cfg.truncation)?.det();
    let mut csv = Csv::new("scan.csv", "scan", &["t", "value"]);
    for i in 1..=opts.grid {
        let t = K::from_f64_approx(report.t_max) * K::from_ratio(i as i64, opts.grid as i64);
        csv.row(&[cell(&t), cell(&det.eval(&t))]);
    }
    rep.artifact(&csv.write(out)?);

    rep.datum("t_max", report.t_max.into());
    rep.datum("sup_radius_bound", report.sup_radius_bound.into());
    if let Some(t) = &report.t_star {
        rep.datum("t_star", t.to_f64().into());
    }
    if let Some(p) = report.pressure {
        rep.datum("pressure", p.into());
    }
    if let Some(gap) = report.stability_gap {
        rep.datum("stability_gap", gap.into());
    }
    rep.datum("reduced_zero_is_spurious", report.reduced_zero_is_spurious.into());

    rep.check_bool("zero_found", report.t_star.is_some());
    if report.t_star.is_some() {
        rep.check_bool("zero_stable_under_refinement", report.stable == Some(true));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// zeta

pub fn zeta_cmd<K: Scalar>(
    sys: &System<K>,
    cfg: &RunConfig,
    out: &Path,
    rep: &mut Report,
) -> Result<()> {
    // The census walk at depth d costs ~(#branches)^d cylinders, so the
    // working degree shrinks below identity_degree when the budget demands.
    let deg = capped_depth(sys, cfg.identity_degree + 1, cfg.cylinder_cap) - 1;
    if deg == 0 {
        bail!("cylinder budget too small for any zeta degree");
    }
    if deg < cfg.identity_degree {
        println!("cylinder budget caps the zeta degree at {deg}");
    }
    let c = census(sys, deg + 1, cfg.cylinder_cap)?;
    let det = kneading_matrix(sys, deg + 1)?.det();

    println!("weighted crossing counts:");
    for n in 1..=deg + 1 {
        println!("  N_{n} = {}", cell(&c.nn[n]));
    }

    let mut csv = Csv::new("nn.csv", "nn", &["n", "count"]);
    for n in 1..=deg + 1 {
        csv.row(&[n.to_string(), cell(&c.nn[n])]);
    }
    rep.artifact(&csv.write(out)?);

    let scale = c.nn.iter().map(|x| x.to_f64().abs()).fold(1.0, f64::max);
    let zres = zeta_det_residual(&c.nn, &det, deg + 1)?;
    rep.check(
        "zeta_inverts_determinant",
        max_abs_coeff(&zres),
        identity_tol::<K>(cfg, scale),
    );
    let lres = log_derivative_residual(&c.nn, &det, deg)?;
    rep.check(
        "determinant_log_derivative_counts",
        max_abs_coeff(&lres),
        identity_tol::<K>(cfg, scale),
    );
    rep.datum("degree", deg.into());
    Ok(())
}

// ---------------------------------------------------------------------------
// check

pub fn check_cmd<K: Scalar>(
    sys: &System<K>,
    cfg: &RunConfig,
    seed: u64,
    rep: &mut Report,
) -> Result<()> {
    let deg = cfg.identity_degree;
    let r = kneading_matrix(sys, deg)?;
    let tables = cut_preimage_tables(sys, deg)?;
    let det = r.det();
    let mut rng = sample::rng(seed);

    let cdeg = capped_depth(sys, deg + 1, cfg.cylinder_cap) - 1;
    let c = census(sys, cdeg + 1, cfg.cylinder_cap)?;
    let scale = matrix_scale(&r)
        .max(max_abs_coeff(&det))
        .max(c.nn.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max))
        .max(c.counts.iter().map(|&n| n as f64).fold(0.0, f64::max));
    let tol = identity_tol::<K>(cfg, scale);
    println!(
        "identity degree {deg}, census degree {cdeg}, residual scale {scale:.3e}, seed {seed}"
    );

    // The matrix is the identity at t = 0.
    let mut id_res = 0.0f64;
    for i in 0..r.rows() {
        for j in 0..r.cols() {
            let d = if i == j { K::one() } else { K::zero() };
            id_res = id_res.max((r.get(i, j).coeff(0) - d).to_f64().abs());
        }
    }
    rep.check("matrix_at_zero_is_identity", id_res, identity_tol::<K>(cfg, 1.0));

    // Row equations against preimage counts, over random germ intervals of
    // every closure kind.
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let j = sample::random_germ_interval(&mut rng, sys);
        for res in main_identity_residuals(sys, &tables, &r, &j, deg)? {
            worst = worst.max(max_abs_coeff(&res));
        }
    }
    rep.check("preimage_row_identity", worst, tol);

    // The bridge between one-germ counting series and the matrix rows.
    let germs = cut_and_random_germs(sys, &mut rng, 10);
    let mut worst = 0.0f64;
    for w in &germs {
        for res in m_bridge_residuals(sys, &tables, &r, w, deg)? {
            worst = worst.max(max_abs_coeff(&res));
        }
    }
    rep.check("counting_series_bridge", worst, tol);

    // The matching matrix differentiates: F·R = R'.
    let f = matching_matrix(sys, &tables, deg)?;
    let fr = f.mul(&r);
    rep.check(
        "matching_matrix_differentiates",
        fr.max_coeff_distance(&r.derivative(), deg - 1),
        tol,
    );

    // Branch indicator series sum to one at every germ.
    let mut worst = 0.0f64;
    for g in &germs {
        let s = branch_partition_sum(sys, g, deg)?;
        let res = &s - &Series::one(deg);
        worst = worst.max(max_abs_coeff(&res));
    }
    rep.check("branch_partition_of_unity", worst, tol);

    // All one-sided determinants agree with det R after normalization.
    let mut worst = 0.0f64;
    for dj in classical_determinants(sys, deg)? {
        worst = worst.max(max_abs_coeff(&(&dj - &det).truncate(deg)));
    }
    rep.check("one_sided_determinants_agree", worst, tol);

    // H(t)·det R = det B.
    let h = boundary_factor(sys, deg);
    let rdet = reduced_matrix(&r).det();
    let split = &(&h * &det) - &rdet;
    rep.check("boundary_factor_splits_determinant", max_abs_coeff(&split.truncate(deg)), tol);

    // exp(Σ N_n tⁿ/n) · det = 1, and det'/det = -Σ N_{n+1} tⁿ.
    let zres = zeta_det_residual(&c.nn, &det, cdeg.min(deg))?;
    rep.check("zeta_inverts_determinant", max_abs_coeff(&zres), tol);
    if deg > cdeg {
        let lres = log_derivative_residual(&c.nn, &det, cdeg)?;
        rep.check("determinant_log_derivative_counts", max_abs_coeff(&lres), tol);
    } else {
        let lres = log_derivative_residual(&c.nn, &kneading_matrix(sys, deg + 1)?.det(), deg)?;
        rep.check("determinant_log_derivative_counts", max_abs_coeff(&lres), tol);
    }

    // Tr F matches the weighted crossing counts term by term.
    let tr = f.trace();
    let mut worst = 0.0f64;
    for m in 0..=deg.min(cdeg) {
        worst = worst.max((tr.coeff(m) + c.nn[m + 1].clone()).to_f64().abs());
    }
    rep.check("matching_trace_counts_crossings", worst, tol);

    // Lap series: census route, preimage-count route and the cumulative
    // map must agree on intervals of every closure kind.
    let phi = PhiMap::new(sys, cdeg)?;
    let mut intervals = vec![
        GermInterval::open(sys.a().clone(), sys.b().clone()),
        GermInterval::closed(sys.a().clone(), sys.b().clone()),
        GermInterval::point(sys.cut(1).clone()),
        GermInterval::half_open_right(sys.a().clone(), sys.cut(1).clone()),
    ];
    for _ in 0..4 {
        intervals.push(sample::random_germ_interval(&mut rng, sys));
    }
    let mut worst = 0.0f64;
    for j in &intervals {
        let by_census = lap_series_census(sys, j, cdeg, cfg.cylinder_cap)?;
        let by_counts = lap_series_from_counts(sys, &tables, j, cdeg)?;
        let by_phi = phi.lap_interval(j)?;
        worst = worst.max(max_abs_coeff(&(&by_census - &by_counts)));
        worst = worst.max(max_abs_coeff(&(&by_census - &by_phi)));
    }
    rep.check("lap_series_routes_agree", worst, tol);

    // The recursive crossing class equals the chord count, cylinder by
    // cylinder.
    let depth = capped_depth(sys, 8.min(cfg.depth_cap), cfg.cylinder_cap);
    let mut mismatches = 0usize;
    let mut seen = 0usize;
    kneading_core::cylinders::walk(sys, depth, cfg.cylinder_cap, |view| {
        seen += 1;
        if view.pi != chord_crossing_class(view.lo, view.hi, view.image_lo, view.image_hi, view.sign)
        {
            mismatches += 1;
        }
    })?;
    println!("crossing classes compared on {seen} cylinders to depth {depth}");
    rep.check_bool("crossing_classes_agree", mismatches == 0);

    rep.datum("identity_degree", deg.into());
    rep.datum("census_degree", cdeg.into());
    rep.datum("seed", seed.into());
    Ok(())
}

// ---------------------------------------------------------------------------
// semiconj

pub fn semiconj_cmd<K: Scalar>(
    sys: &System<K>,
    cfg: &RunConfig,
    t: &K,
    out: &Path,
    rep: &mut Report,
) -> Result<()> {
    if t.to_f64() <= 0.0 {
        bail!("--t must be positive");
    }
    let phi = PhiMap::new(sys, cfg.truncation)?;
    let model = model_map(&phi, t, cfg.tail_tolerance)
        .context("straightening diverges at this t; pick a smaller (subcritical) value")?;

    let germs = germ_grid(sys, 256);
    let mut csv = Csv::new("phi.csv", "phi", &["x", "dir", "value"]);
    let mut skipped = 0usize;
    let mut worst_conj = 0.0f64;
    for g in &germs {
        match phi.phi_at(g, t, cfg.tail_tolerance) {
            Ok(v) => csv.row(&[cell(&g.base), dir_cell(g.dir), cell(&v)]),
            Err(_) => {
                skipped += 1;
                continue;
            }
        }
        if let Ok(res) = conjugacy_residual(&phi, &model, g, cfg.tail_tolerance) {
            worst_conj = worst_conj.max(res);
        }
    }
    rep.artifact(&csv.write(out)?);
    if skipped > 0 {
        println!("skipped {skipped} germ(s) whose orbit could not be resolved");
    }

    let mut csv = Csv::new("model.csv", "model", &["i", "lo", "hi", "slope", "intercept", "degenerate"]);
    for i in 0..model.slopes.len() {
        let (lo, hi) = &model.intervals[i];
        csv.row(&[
            i.to_string(),
            cell(lo),
            cell(hi),
            cell(&model.slopes[i]),
            cell(&model.intercepts[i]),
            model.degenerate[i].to_string(),
        ]);
    }
    rep.artifact(&csv.write(out)?);

    // The model slopes are forced: sign/(t·weight), branch by branch.
    let mut slopes_exact = true;
    for i in 0..sys.num_branches() {
        let expected = K::from_int(sys.sign(i)) / (t.clone() * sys.weight(i).clone());
        slopes_exact &= model.slopes[i] == expected;
    }
    rep.check_bool("model_slopes_are_forced_values", slopes_exact);
    rep.check_bool("model_intervals_disjoint", model.disjoint());
    rep.check("conjugacy_residual", worst_conj, cfg.tail_tolerance);

    // Cross-check φ against the independent interpolating-series solve.
    let h = HCrossCheck::new(sys, t, cfg.truncation)?;
    let mut worst_h = 0.0f64;
    for g in &germs {
        if let (Ok(a), Ok(b)) = (phi.phi_at(g, t, cfg.tail_tolerance), h.eval(g)) {
            worst_h = worst_h.max((a - b).to_f64().abs());
        }
    }
    rep.check("independent_solve_matches", worst_h, cfg.tail_tolerance);

    rep.datum("t", t.to_f64().into());
    let gaps: Vec<serde_json::Value> =
        model.gaps.iter().map(|g| g.to_f64().into()).collect();
    rep.datum("gaps", gaps.into());
    rep.datum("sampled_germs", (germs.len() - skipped).into());
    Ok(())
}

// ---------------------------------------------------------------------------
// model

pub fn model_cmd<K: Scalar>(
    sys: &System<K>,
    cfg: &RunConfig,
    t: Option<&K>,
    critical: bool,
    out: &Path,
    rep: &mut Report,
) -> Result<()> {
    if critical {
        let opts = pressure_options(cfg);
        let p = pressure(sys, cfg.truncation, &opts)?;
        let t_star = p.t_star.clone().ok_or_else(|| {
            anyhow!("no determinant zero in the scan range; there is no critical model")
        })?;
        let cm = critical_model(sys, &t_star)?;
        println!("critical parameter t* = {}", cell(&t_star));

        let mut csv =
            Csv::new("model.csv", "model", &["i", "lo", "hi", "slope", "intercept", "degenerate"]);
        for i in 0..sys.num_branches() {
            let kept = cm.kept.iter().position(|&k| k == i);
            let (slope, intercept) = match kept {
                Some(pidx) => {
                    let br = cm.system.branch(pidx);
                    (cell(&br.slope), cell(&br.intercept))
                }
                None => ("0".to_string(), "0".to_string()),
            };
            csv.row(&[
                i.to_string(),
                cell(&cm.cut_images[i]),
                cell(&cm.cut_images[i + 1]),
                slope,
                intercept,
                kept.is_none().to_string(),
            ]);
        }
        rep.artifact(&csv.write(out)?);

        let lambda = Lambda::new(sys, &t_star)?;
        let span = sys.b().clone() - sys.a().clone();
        let mut csv = Csv::new("lambda.csv", "lambda", &["x", "value"]);
        let mut skipped = 0usize;
        for k in 0..=256i64 {
            let x = sys.a().clone() + span.clone() * K::from_ratio(k, 256);
            match lambda.point(&x) {
                Ok(v) => csv.row(&[cell(&x), cell(&v)]),
                Err(_) => skipped += 1,
            }
        }
        rep.artifact(&csv.write(out)?);
        if skipped > 0 {
            println!("skipped {skipped} grid point(s) whose orbit could not be resolved");
        }

        // The collapsed model must carry the same pressure.
        let pm = pressure(&cm.system, cfg.truncation, &opts)?;
        let drift = match (p.pressure, pm.pressure) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        };
        rep.check("model_preserves_pressure", drift, cfg.critical_tolerance);
        rep.check_bool("degenerate_branches_dropped", cm.kept.len() == cm.system.num_branches());

        rep.datum("t_star", t_star.to_f64().into());
        let kept: Vec<serde_json::Value> = cm.kept.iter().map(|&k| k.into()).collect();
        rep.datum("kept_branches", kept.into());
    } else {
        let t = t.ok_or_else(|| anyhow!("model needs either --t <value> or --critical"))?;
        let phi = PhiMap::new(sys, cfg.truncation)?;
        let model = model_map(&phi, t, cfg.tail_tolerance)
            .context("straightening diverges at this t; pick a smaller (subcritical) value")?;
        let mut csv =
            Csv::new("model.csv", "model", &["i", "lo", "hi", "slope", "intercept", "degenerate"]);
        for i in 0..model.slopes.len() {
            let (lo, hi) = &model.intervals[i];
            csv.row(&[
                i.to_string(),
                cell(lo),
                cell(hi),
                cell(&model.slopes[i]),
                cell(&model.intercepts[i]),
                model.degenerate[i].to_string(),
            ]);
        }
        rep.artifact(&csv.write(out)?);
        rep.check_bool("model_intervals_disjoint", model.disjoint());
        rep.datum("t", t.to_f64().into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// cylinders

pub fn cylinders_cmd<K: Scalar>(
    sys: &System<K>,
    cfg: &RunConfig,
    depth: Option<usize>,
    out: &Path,
    rep: &mut Report,
) -> Result<()> {
    let want = depth.unwrap_or(8).min(cfg.depth_cap);
    let d = capped_depth(sys, want, cfg.cylinder_cap);
    if d < want {
        println!("cylinder budget caps the depth at {d}");
    }
    let records = collect(sys, d, cfg.cylinder_cap)?;

    let mut csv = Csv::new(
        "cylinders.csv",
        "cylinders",
        &["word", "u", "v", "sn", "gn", "pi", "omega"],
    );
    let mut counts = vec![0usize; d + 1];
    let mut mismatches = 0usize;
    for rec in &records {
        counts[rec.word.len()] += 1;
        if rec.pi
            != chord_crossing_class(&rec.lo, &rec.hi, &rec.image_lo, &rec.image_hi, rec.sign)
        {
            mismatches += 1;
        }
        csv.row(&[
            word_cell(&rec.word),
            cell(&rec.lo),
            cell(&rec.hi),
            rec.sign.to_string(),
            cell(&rec.weight),
            rec.pi.to_string(),
            cell(&rec.omega),
        ]);
    }
    rep.artifact(&csv.write(out)?);

    for (n, &k) in counts.iter().enumerate().skip(1) {
        println!("depth {n}: {k} cylinders");
    }
    rep.check_bool("crossing_classes_agree", mismatches == 0);
    rep.datum("depth", d.into());
    rep.datum("cylinders", records.len().into());
    Ok(())
}

// ---------------------------------------------------------------------------
// emit-plots

pub fn emit_plots_cmd<K: Scalar>(
    sys: &System<K>,
    cfg: &RunConfig,
    t: Option<&K>,
    out: &Path,
    rep: &mut Report,
) -> Result<()> {
    // The map graph itself, branch by branch.
    let mut csv = Csv::new("fgraph.csv", "fgraph", &["i", "x", "y"]);
    for i in 0..sys.num_branches() {
        let lo = sys.cut(i).clone();
        let hi = sys.cut(i + 1).clone();
        let width = hi.clone() - lo.clone();
        for k in 0..=64i64 {
            let x = lo.clone() + width.clone() * K::from_ratio(k, 64);
            csv.row(&[i.to_string(), cell(&x), cell(&sys.branch(i).eval(&x))]);
        }
    }
    rep.artifact(&csv.write(out)?);

    let opts = pressure_options(cfg);
    let p = pressure(sys, cfg.truncation, &opts)?;
    let t_star = p
        .t_star
        .clone()
        .ok_or_else(|| anyhow!("no determinant zero in the scan range; cannot place the plots"))?;
    let t_sub = match t {
        Some(t) => t.clone(),
        None => K::half() * t_star.clone(),
    };
    if t_sub.to_f64() <= 0.0 || t_sub.to_f64() >= t_star.to_f64() {
        bail!(
            "subcritical parameter {} must lie in ]0, t*[ = ]0, {}[",
            cell(&t_sub),
            cell(&t_star)
        );
    }
    println!("t* = {}, subcritical t = {}", cell(&t_star), cell(&t_sub));

    // Subcritical straightening and its model.
    let phi = PhiMap::new(sys, cfg.truncation)?;
    let mut csv = Csv::new("phi_sub.csv", "phi", &["x", "dir", "value"]);
    let mut skipped = 0usize;
    for g in germ_grid(sys, 256) {
        match phi.phi_at(&g, &t_sub, cfg.tail_tolerance) {
            Ok(v) => csv.row(&[cell(&g.base), dir_cell(g.dir), cell(&v)]),
            Err(_) => skipped += 1,
        }
    }
    rep.artifact(&csv.write(out)?);

    let model = model_map(&phi, &t_sub, cfg.tail_tolerance)?;
    let mut csv =
        Csv::new("model_sub.csv", "model", &["i", "lo", "hi", "slope", "intercept", "degenerate"]);
    for i in 0..model.slopes.len() {
        let (lo, hi) = &model.intervals[i];
        csv.row(&[
            i.to_string(),
            cell(lo),
            cell(hi),
            cell(&model.slopes[i]),
            cell(&model.intercepts[i]),
            model.degenerate[i].to_string(),
        ]);
    }
    rep.artifact(&csv.write(out)?);

    // Critical straightening (the distribution function of the limit
    // measure, sampled from the left) and the collapsed model.
    let lambda = Lambda::new(sys, &t_star)?;
    let span = sys.b().clone() - sys.a().clone();
    let mut csv = Csv::new("phi_crit.csv", "phi", &["x", "dir", "value"]);
    for k in 0..=256i64 {
        let x = sys.a().clone() + span.clone() * K::from_ratio(k, 256);
        match lambda.point(&x) {
            Ok(v) => csv.row(&[cell(&x), "-".to_string(), cell(&v)]),
            Err(_) => skipped += 1,
        }
    }
    rep.artifact(&csv.write(out)?);

    let cm = critical_model(sys, &t_star)?;
    let mut csv =
        Csv::new("model_crit.csv", "model", &["i", "lo", "hi", "slope", "intercept", "degenerate"]);
    for i in 0..sys.num_branches() {
        let kept = cm.kept.iter().position(|&k| k == i);
        let (slope, intercept) = match kept {
            Some(pidx) => {
                let br = cm.system.branch(pidx);
                (cell(&br.slope), cell(&br.intercept))
            }
            None => ("0".to_string(), "0".to_string()),
        };
        csv.row(&[
            i.to_string(),
            cell(&cm.cut_images[i]),
            cell(&cm.cut_images[i + 1]),
            slope,
            intercept,
            kept.is_none().to_string(),
        ]);
    }
    rep.artifact(&csv.write(out)?);

    if skipped > 0 {
        println!("skipped {skipped} sample(s) whose orbit could not be resolved");
    }
    rep.datum("t_star", t_star.to_f64().into());
    rep.datum("t_sub", t_sub.to_f64().into());
    rep.datum("skipped_samples", skipped.into());
    rep.check_bool("artifacts_written", true);
    Ok(())
}
