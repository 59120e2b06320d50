//! End-to-end pipelines behind the CLI subcommands: load a scenario, run the
//! design / placement / solve stages, and write plain CSV/JSON artifacts.
//!
//! Every artifact except the `*_summary.json` timing fields is a pure
//! function of (config, seed), so reruns are byte-identical.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use serde_json::json;

use refrac_core::continuum::{
    exterior_field, far_field, solve_ls, solve_u0, FarFieldPattern, SolveDiagnostics,
};
use refrac_core::design::{
    capacitance_mesh, icosphere, predicted_p, radius_for_target_count, recipe_general,
    recipe_soft, ParticleRecipe, SurfaceMesh,
};
use refrac_core::greens::{BackgroundGreen, PlaneWave};
use refrac_core::linalg::{DenseLu, DIRECT_SOLVE_MAX_UNKNOWNS};
use refrac_core::manybody::{
    check_smallness, evaluate_field, far_field_discrete, place_particles, relative_volume,
    solve_system, SmallnessReport,
};
use refrac_core::medium::{refraction_from_potential, validate_passivity};
use refrac_core::{io, verify, ComplexGridField, Error, ErrorClass, MediumSpec};

use crate::config::{ScenarioConfig, Schedule};

/// Residual contract for the dense two-stage verification solve, matching
/// the one-kernel solver's guarantee.
const TWO_STAGE_RESIDUAL_TOL: f64 = 1e-8;

/// A failed run: a message for stderr and the process exit code
/// (2 configuration, 3 physics/validation, 4 solver).
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: String) -> Self {
        Self { code: 2, message }
    }

    pub fn validation(message: String) -> Self {
        Self { code: 3, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Config => 2,
            ErrorClass::Physics => 3,
            ErrorClass::Solver => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Which kernel the continuum solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Free-space kernel with the full potential `q0 + p` (production path).
    FreeKernel,
    /// Background Green's function kernel with the perturbation `p` alone
    /// (dense verification path, small grids only).
    BackgroundGreen,
}

/// Global invocation context assembled from the command line.
pub struct Ctx {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub mode: Mode,
}

impl Ctx {
    fn load_config(&self) -> Result<ScenarioConfig, Failure> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Failure::config("this command needs --config <file>".into()))?;
        ScenarioConfig::load(path)
    }

    fn out_dir(&self, cfg: Option<&ScenarioConfig>) -> Result<PathBuf, Failure> {
        let dir = self
            .out
            .clone()
            .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&dir)
            .map_err(|e| Failure::config(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn seed(&self, cfg: &ScenarioConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }
}

/// Design a particle recipe for the configured target and write it out.
pub fn cmd_design(ctx: &Ctx) -> Result<(), Failure> {
    let cfg = ctx.load_config()?;
    let out = ctx.out_dir(Some(&cfg))?;
    let medium = cfg.medium()?;
    let p = cfg.required_target(&medium)?;
    gate_passivity(&p)?;
    let a = cfg
        .radius
        .ok_or_else(|| Failure::config("design needs \"radius\" in the config".into()))?;
    let recipe = recipe_for(&p, a)?;

    let expected_m = recipe.expected_count();
    let n_max = recipe.n_density().max();
    let cells_with = recipe
        .n_density()
        .values()
        .iter()
        .filter(|&&n| n > 0.0)
        .count();
    let delta_min = (n_max > 0.0).then(|| n_max.powf(-1.0 / 3.0));
    let n0ka = medium.n0().max_abs() * medium.k() * a;

    let recipe_path = out.join("recipe.json");
    io::save_recipe(&recipe_path, &recipe)?;
    write_json(
        &out.join("design_summary.json"),
        &json!({
            "a": a,
            "c0": recipe.c0(),
            "expected_m": expected_m,
            "cells_with_particles": cells_with,
            "nominal_spacing": delta_min,
            "spacing_over_radius": delta_min.map(|d| d / a),
            "n0_k_a": n0ka,
        }),
    )?;

    println!(
        "recipe: a = {a}, C0 = {:.6e}, expected M = {expected_m:.1} over {cells_with} cells",
        recipe.c0()
    );
    match delta_min {
        Some(d) => println!(
            "nominal spacing {d:.4e} ({:.1} radii), smallness n0·k·a = {n0ka:.3e}",
            d / a
        ),
        None => println!("empty recipe: the target equals the background everywhere"),
    }
    println!("wrote {}", recipe_path.display());
    Ok(())
}

/// Place (or import) one particle configuration, solve it, and export the
/// particles, the solution and the discrete far field.
pub fn cmd_simulate(
    ctx: &Ctx,
    m_target: Option<usize>,
    radius: Option<f64>,
    particles_csv: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = ctx.load_config()?;
    let out = ctx.out_dir(Some(&cfg))?;
    let medium = cfg.medium()?;
    let t0 = Instant::now();

    let particles = match particles_csv {
        Some(path) => {
            let a = radius.or(cfg.radius).ok_or_else(|| {
                Failure::config(
                    "importing particles needs --radius (or radius in the config)".into(),
                )
            })?;
            io::load_particles(path, medium.domain(), a)?
        }
        None => {
            let p = cfg.required_target(&medium)?;
            gate_passivity(&p)?;
            let a = match (m_target, radius.or(cfg.radius)) {
                (Some(m), _) => radius_for_target_count(&p, m)?,
                (None, Some(a)) => a,
                (None, None) => {
                    return Err(Failure::config(
                        "simulate needs --m, --radius, or radius in the config".into(),
                    ))
                }
            };
            let recipe = recipe_for(&p, a)?;
            place_particles(&recipe, medium.domain(), ctx.seed(&cfg))?
        }
    };

    let m = particles.num_particles();
    println!("{m} particles of radius {}", particles.radius());
    let small = check_smallness(&particles, &medium);
    if !small.ka_ok {
        log::warn!(
            "smallness assumption strained: max|n0|·k·a = {:.3e} > 0.1",
            small.n0ka
        );
    }
    if !small.spacing_ok {
        log::warn!(
            "separation assumption strained: d/a = {:.2} < 5",
            small.d_over_a
        );
    }

    let result = solve_system(&particles, &medium)?;
    let betas = cfg.betas()?;
    let pattern = far_field_discrete(&particles, &result, &betas)?;

    io::save_particles(out.join("particles.csv"), &particles)?;
    io::save_solution(out.join("solution.csv"), &particles, &result)?;
    io::save_far_field(out.join("farfield.csv"), &pattern)?;
    write_json(
        &out.join("simulate_summary.json"),
        &json!({
            "m": m,
            "a": particles.radius(),
            "d_min": particles.min_spacing(),
            "relative_volume": relative_volume(&particles, medium.domain()),
            "smallness": smallness_json(&small),
            "diagnostics": diagnostics_json(result.diagnostics()),
            "seconds": t0.elapsed().as_secs_f64(),
        }),
    )?;

    let d = result.diagnostics();
    println!(
        "solved by {} in {:.1}s, residual {:.2e}",
        d.method,
        t0.elapsed().as_secs_f64(),
        d.rel_residual
    );
    println!("wrote particles.csv, solution.csv, farfield.csv in {}", out.display());
    Ok(())
}

/// Solve the limiting volume integral equation and export the field and the
/// far-field pattern.
pub fn cmd_continuum(ctx: &Ctx) -> Result<(), Failure> {
    let cfg = ctx.load_config()?;
    let out = ctx.out_dir(Some(&cfg))?;
    let medium = cfg.medium()?;
    let betas = cfg.betas()?;
    let q0 = medium.q0();
    let p = cfg.target_p(&medium)?;
    if let Some(p) = &p {
        gate_passivity(p)?;
    }
    let t0 = Instant::now();

    let (u, pattern, diagnostics) = match ctx.mode {
        Mode::FreeKernel => {
            let q = match &p {
                Some(p) => q0.zip_map(p, |a, b| a + b)?,
                None => q0.clone(),
            };
            let sol = solve_ls(&q, &medium)?;
            let pattern = far_field(
                &sol.u,
                &q,
                &PlaneWave::new(medium.k()),
                None,
                &betas,
                medium.alpha(),
            )?;
            (sol.u, pattern, diagnostics_json(&sol.diagnostics))
        }
        Mode::BackgroundGreen => two_stage_solve(&medium, &q0, p.as_ref(), &betas)?,
    };

    io::save_field(out.join("u.csv"), &u)?;
    io::save_far_field(out.join("farfield.csv"), &pattern)?;
    write_json(
        &out.join("continuum_summary.json"),
        &json!({
            "mode": match ctx.mode { Mode::FreeKernel => "free-kernel", Mode::BackgroundGreen => "background-green" },
            "diagnostics": diagnostics,
            "seconds": t0.elapsed().as_secs_f64(),
        }),
    )?;
    println!(
        "continuum solve done in {:.1}s; wrote u.csv, farfield.csv in {}",
        t0.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}

/// Background solve plus a dense collocation system built from the
/// background Green's function — the verification route for small grids.
fn two_stage_solve(
    medium: &MediumSpec,
    q0: &ComplexGridField,
    p: Option<&ComplexGridField>,
    betas: &[refrac_core::vec3::Vec3],
) -> Result<(ComplexGridField, FarFieldPattern, serde_json::Value), Failure> {
    let (u0, a0) = solve_u0(q0, medium, betas)?;
    match p {
        None => Ok((u0.u, a0, diagnostics_json(&u0.diagnostics))),
        Some(p) if p.is_zero() => Ok((u0.u, a0, diagnostics_json(&u0.diagnostics))),
        Some(p) => {
            let n = medium.domain().num_cells();
            if n > DIRECT_SOLVE_MAX_UNKNOWNS {
                return Err(Failure::config(format!(
                    "--mode background-green assembles a dense {n}x{n} system; it is a \
                     verification mode for grids up to {DIRECT_SOLVE_MAX_UNKNOWNS} cells"
                )));
            }
            let bg = BackgroundGreen::new(q0, medium.k())?;
            let mut mat = Array2::<Complex64>::zeros((n, n));
            for j in 0..n {
                let w = bg.weight_column(j)?;
                let pj = p.values()[j];
                for i in 0..n {
                    mat[[i, j]] = w[i] * pj;
                }
                mat[[j, j]] += 1.0;
            }
            let lu = DenseLu::factorize(mat)?;
            let cond = lu.condition_estimate();
            let u = lu.solve(u0.u.values())?;

            // Matrix-free residual from the cached weight columns (the LU
            // consumed the matrix).
            let mut resid = u.clone();
            for j in 0..n {
                let w = bg.weight_column(j)?;
                let s = p.values()[j] * u[j];
                for (ri, wi) in resid.iter_mut().zip(&w) {
                    *ri += wi * s;
                }
            }
            let num: f64 = resid
                .iter()
                .zip(u0.u.values())
                .map(|(r, b)| (r - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let den: f64 = u0.u.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let rel_residual = num / den;
            if rel_residual > TWO_STAGE_RESIDUAL_TOL {
                return Err(Error::Solver(format!(
                    "two-stage solve residual {rel_residual:.3e} exceeds {TWO_STAGE_RESIDUAL_TOL:.0e}"
                ))
                .into());
            }

            let u_field = ComplexGridField::new(medium.domain().clone(), u)?;
            let pattern = far_field(&u_field, p, &bg, Some(&a0), betas, medium.alpha())?;
            Ok((
                u_field,
                pattern,
                json!({
                    "unknowns": n,
                    "method": "dense-lu-two-stage",
                    "iterations": null,
                    "rel_residual": rel_residual,
                    "condition_estimate": cond,
                }),
            ))
        }
    }
}

struct ConvergeRow {
    m: usize,
    a: f64,
    d_min: f64,
    relative_volume: f64,
    field_err_max: f64,
    field_err_l2: f64,
    farfield_err_l2: f64,
    seconds: f64,
}

/// The convergence study: one continuum reference, then a schedule of
/// particle counts solved discretely and compared at the probes and in the
/// far field.
pub fn cmd_converge(ctx: &Ctx) -> Result<(), Failure> {
    let cfg = ctx.load_config()?;
    let out = ctx.out_dir(Some(&cfg))?;
    let medium = cfg.medium()?;
    let p = cfg.required_target(&medium)?;
    gate_passivity(&p)?;

    let radii: Vec<f64> = match cfg.schedule.as_ref() {
        None => {
            return Err(Failure::config(
                "converge needs a schedule (m_targets or radii) in the config".into(),
            ))
        }
        Some(Schedule::MTargets { m_targets }) => {
            require_at_least_3(m_targets.len())?;
            m_targets
                .iter()
                .map(|&m| radius_for_target_count(&p, m))
                .collect::<refrac_core::Result<_>>()?
        }
        Some(Schedule::Radii { radii }) => {
            require_at_least_3(radii.len())?;
            radii.clone()
        }
    };

    let betas = cfg.betas()?;
    let probes = cfg.probes(medium.domain());
    if probes.is_empty() {
        return Err(Failure::config("converge needs at least one probe point".into()));
    }

    // Continuum reference, solved once.
    let t_cont = Instant::now();
    let q0 = medium.q0();
    let q = q0.zip_map(&p, |a, b| a + b)?;
    let sol = solve_ls(&q, &medium).map_err(|e| stage_err("continuum", e))?;
    let a_cont = far_field(
        &sol.u,
        &q,
        &PlaneWave::new(medium.k()),
        None,
        &betas,
        medium.alpha(),
    )
    .map_err(|e| stage_err("continuum", e))?;
    let u_cont: Vec<Complex64> = probes
        .iter()
        .map(|&x| exterior_field(&sol.u, &q, &medium, x))
        .collect::<refrac_core::Result<_>>()
        .map_err(|e| stage_err("continuum", e))?;
    // The discrete amplitude covers the particle contribution only; in a
    // non-vacuum background the background amplitude A0 completes the total.
    let a0 = if medium.is_vacuum() {
        None
    } else {
        Some(
            solve_u0(&q0, &medium, &betas)
                .map_err(|e| stage_err("continuum", e))?
                .1,
        )
    };
    let continuum_seconds = t_cont.elapsed().as_secs_f64();
    println!(
        "continuum reference: {} cells in {continuum_seconds:.1}s",
        medium.domain().num_cells()
    );

    let seed = ctx.seed(&cfg);
    let mut rows: Vec<ConvergeRow> = Vec::with_capacity(radii.len());
    for &a in &radii {
        let t = Instant::now();
        let recipe = recipe_for(&p, a).map_err(|e| stage_err("design", e))?;
        let particles =
            place_particles(&recipe, medium.domain(), seed).map_err(|e| stage_err("placement", e))?;
        let m = particles.num_particles();

        // Emit the configuration, then recompute the volume fraction from
        // the artifact itself so the report row describes the file on disk.
        let csv = out.join(format!("particles_m{m}.csv"));
        io::save_particles(&csv, &particles)?;
        let reread = io::load_particles(&csv, medium.domain(), a)?;
        let rel_vol = relative_volume(&reread, medium.domain());

        let result = solve_system(&particles, &medium).map_err(|e| stage_err("solve", e))?;

        let mut err_max: f64 = 0.0;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &x) in probes.iter().enumerate() {
            let u_m = evaluate_field(&particles, &result, x).map_err(|e| stage_err("field", e))?;
            let diff = (u_m - u_cont[i]).norm();
            err_max = err_max.max(diff / u_cont[i].norm());
            num += diff * diff;
            den += u_cont[i].norm_sqr();
        }
        let err_l2 = (num / den).sqrt();

        let mut a_m = far_field_discrete(&particles, &result, &betas)
            .map_err(|e| stage_err("far-field", e))?;
        if let Some(a0) = &a0 {
            for (amp, bg) in a_m.amplitudes.iter_mut().zip(&a0.amplitudes) {
                *amp += bg;
            }
        }
        let ff_l2 = a_m.rel_l2_diff(&a_cont);

        let seconds = t.elapsed().as_secs_f64();
        println!(
            "M = {m} (a = {a:.4e}): field err max {err_max:.3e}, L2 {err_l2:.3e}, \
             far field {ff_l2:.3e} in {seconds:.1}s"
        );
        rows.push(ConvergeRow {
            m,
            a,
            d_min: particles.min_spacing(),
            relative_volume: rel_vol,
            field_err_max: err_max,
            field_err_l2: err_l2,
            farfield_err_l2: ff_l2,
            seconds,
        });
    }

    let report = out.join("report.csv");
    let mut text = String::from("m,a,d_min,relative_volume,field_err_max,field_err_l2,farfield_err_l2\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.m, r.a, r.d_min, r.relative_volume, r.field_err_max, r.field_err_l2, r.farfield_err_l2
        ));
    }
    std::fs::write(&report, text).map_err(|e| Failure::config(format!("{}: {e}", report.display())))?;

    // The refraction coefficient the final recipe actually encodes.
    let last_recipe = recipe_for(&p, *radii.last().expect("nonempty"))?;
    let n_implied = refraction_from_potential(
        &q0.zip_map(&predicted_p(&last_recipe)?, |a, b| a + b)?,
        medium.k(),
    );
    let re: Vec<f64> = n_implied.values().iter().map(|v| v.re).collect();
    let im: Vec<f64> = n_implied.values().iter().map(|v| v.im).collect();

    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    write_json(
        &out.join("converge_summary.json"),
        &json!({
            "continuum_seconds": continuum_seconds,
            "slopes": {
                "relative_volume": loglog_slope(&ms, &rows.iter().map(|r| r.relative_volume).collect::<Vec<_>>()),
                "field_err_l2": loglog_slope(&ms, &rows.iter().map(|r| r.field_err_l2).collect::<Vec<_>>()),
                "farfield_err_l2": loglog_slope(&ms, &rows.iter().map(|r| r.farfield_err_l2).collect::<Vec<_>>()),
            },
            "n_implied": {
                "re_min": re.iter().cloned().fold(f64::INFINITY, f64::min),
                "re_max": re.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                "im_min": im.iter().cloned().fold(f64::INFINITY, f64::min),
                "im_max": im.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            },
            "rows": rows.iter().map(|r| json!({
                "m": r.m, "a": r.a, "seconds": r.seconds,
            })).collect::<Vec<_>>(),
        }),
    )?;
    println!("wrote {} and converge_summary.json", report.display());
    Ok(())
}

/// Capacitance of a surface mesh, or an icosphere refinement study against
/// the analytic ball value.
pub fn cmd_capacitance(
    ctx: &Ctx,
    mesh: Option<&Path>,
    levels: usize,
    radius: f64,
) -> Result<(), Failure> {
    let out = ctx.out_dir(None)?;
    let mut text = String::from("triangles,capacitance,rel_error_vs_ball\n");
    match mesh {
        Some(path) => {
            let mesh = SurfaceMesh::load(path)?;
            let c = capacitance_mesh(&mesh);
            println!(
                "{}: {} triangles, C = {c:.8e}",
                path.display(),
                mesh.num_triangles()
            );
            text.push_str(&format!("{},{},\n", mesh.num_triangles(), c));
        }
        None => {
            if levels == 0 {
                return Err(Failure::config("need --levels >= 1 or --mesh <file>".into()));
            }
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Failure::config(format!(
                    "radius must be positive, got {radius}"
                )));
            }
            let exact = 4.0 * std::f64::consts::PI * radius;
            for level in 1..=levels {
                let m = icosphere(radius, level)?;
                let c = capacitance_mesh(&m);
                let rel = (c - exact).abs() / exact;
                println!(
                    "level {level}: {} triangles, C = {c:.8e}, rel err {rel:.3e}",
                    m.num_triangles()
                );
                text.push_str(&format!("{},{},{}\n", m.num_triangles(), c, rel));
            }
            println!("analytic C = 4πa = {exact:.8e}");
        }
    }
    let path = out.join("capacitance.csv");
    std::fs::write(&path, text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Run the oracle/consistency battery on the scenario; nonzero exit when any
/// check fails.
pub fn cmd_validate(ctx: &Ctx, recipe: Option<&Path>) -> Result<(), Failure> {
    let cfg = ctx.load_config()?;
    let out = ctx.out_dir(Some(&cfg))?;
    let medium = cfg.medium()?;
    let p = cfg.target_p(&medium)?;
    let a = cfg.radius.unwrap_or(0.01);

    let checks = verify::standard_checks(&medium, p.as_ref(), a, recipe);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = verify::all_passed(&checks);
    write_json(
        &out.join("validate.json"),
        &json!({ "passed": passed, "checks": checks }),
    )?;

    if passed {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        let failed = checks.iter().filter(|c| !c.passed).count();
        Err(Failure::validation(format!(
            "{failed} of {} validation checks failed",
            checks.len()
        )))
    }
}

/// Soft recipe for real nonnegative targets, the general one otherwise.
fn recipe_for(p: &ComplexGridField, a: f64) -> refrac_core::Result<ParticleRecipe> {
    if p.values().iter().all(|v| v.im == 0.0 && v.re >= 0.0) {
        recipe_soft(p, a)
    } else {
        recipe_general(p, a)
    }
}

/// Reject targets with gain, listing the offending cells.
fn gate_passivity(p: &ComplexGridField) -> Result<(), Failure> {
    let report = validate_passivity(p);
    if !report.is_ok() {
        for v in report.violations.iter().take(8) {
            eprintln!("gain at cell {:?}: Im p = {:.3e} > 0", v.coords, v.im);
        }
        if report.violations.len() > 8 {
            eprintln!("... and {} more cells", report.violations.len() - 8);
        }
        report.into_result()?;
    }
    Ok(())
}

fn require_at_least_3(len: usize) -> Result<(), Failure> {
    if len < 3 {
        return Err(Failure::config(format!(
            "a convergence study needs at least 3 schedule points, got {len}"
        )));
    }
    Ok(())
}

fn stage_err(stage: &str, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("converge stage {stage}: {}", f.message);
    f
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json serialization cannot fail");
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn diagnostics_json(d: &SolveDiagnostics) -> serde_json::Value {
    json!({
        "unknowns": d.unknowns,
        "method": d.method,
        "iterations": d.iterations,
        "rel_residual": d.rel_residual,
        "condition_estimate": d.condition_estimate,
    })
}

fn smallness_json(s: &SmallnessReport) -> serde_json::Value {
    json!({
        "n0_k_a": s.n0ka,
        "d_over_a": s.d_over_a,
        "a_over_d": s.a_over_d,
        "ka_ok": s.ka_ok,
        "spacing_ok": s.spacing_ok,
    })
}

/// Fitted slope of `ln y` against `ln x`; `None` when a value is zero or
/// negative (e.g. an exactly reproduced field), where the log-log fit is
/// meaningless.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().any(|&v| !(v > 0.0)) || ys.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (var > 0.0).then(|| cov / var)
}
