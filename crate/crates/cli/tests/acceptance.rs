//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::Command as Process;
use std::time::Instant;

use magtor_cli::studies::{
    bump_family, linf_on_mesh, orders, quadratic_family, quadratic_geodesic_error, spread, Mesh,
    MESHES,
};
use magtor_cli::{run_gradcheck, Resolved};
use magtor_core::{
    cofactor_pairing, corollary_residual, energy_profile, geodesic_residual, hcma_residual,
    integrate, legendre, legendre_masked, ma_density, magnetic_residual, md, mixed_ma_density,
    solve_from_path, CouplingConfig, Grid, InitialPath, PotentialPath, ScalarField, SolverConfig,
    Support, SymMat, TimeAxis, ToricBackground, VelocityForm,
};

/// hcma L∞ of the linear path between the quadratic-family endpoints was
/// 0.0928 / 0.108 / 0.116 on the three meshes when first recorded.
const LINEAR_HCMA_FLOOR: f64 = 0.09;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn resolve(mesh: Mesh, schedule: &[f64]) -> Resolved {
    quadratic_family(1, mesh, schedule).resolve().unwrap()
}

fn h_tau(mesh: Mesh) -> f64 {
    let h = 1.0 / (mesh.points - 1) as f64;
    let tau = 1.0 / mesh.steps as f64;
    h * h + tau * tau
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn fmt_orders(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.2}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn criterion_1() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (mut worst_rel, mut worst_abs): (f64, f64) = (0.0, 0.0);
    let mut pass = true;
    let mut cases = 0;
    for (dim, mesh) in [
        (
            1,
            Mesh {
                points: 33,
                steps: 8,
            },
        ),
        (
            2,
            Mesh {
                points: 17,
                steps: 8,
            },
        ),
    ] {
        let mut s = quadratic_family(dim, mesh, &[0.0]);
        s.gradcheck.lambdas = Some(vec![0.0, 1.0]);
        let r = s.resolve().unwrap();
        let out = run_gradcheck(&r, dir.path()).unwrap();
        let report: magtor_cli::commands::GradCheckReport =
            serde_json::from_slice(&std::fs::read(&out.files[0]).unwrap()).unwrap();
        for c in &report.checks {
            cases += 1;
            pass &= c.passed && c.entries.len() >= 20;
            for e in &c.entries {
                worst_rel = worst_rel.max(e.rel_error);
                worst_abs = worst_abs.max(e.abs_error);
            }
        }
    }
    outcome(
        pass && cases == 8,
        format!("{cases} cases x 20 directions, worst relative error {worst_rel:.2e}, worst absolute error {worst_abs:.2e}"),
    )
}

struct Classical {
    oracle: Vec<PotentialPath>,
    solved: Vec<PotentialPath>,
    errors: Vec<f64>,
    converged: bool,
}

fn classical() -> Classical {
    let mut c = Classical {
        oracle: Vec::new(),
        solved: Vec::new(),
        errors: Vec::new(),
        converged: true,
    };
    for mesh in MESHES {
        let r = resolve(mesh, &[0.0]);
        let oracle = r.oracle().unwrap();
        assert!(oracle.fully_trusted());
        let cfg = SolverConfig {
            max_iterations: 100,
            ..r.solver.clone()
        };
        let res = solve_from_path(oracle.path.clone(), &cfg, InitialPath::Oracle).unwrap();
        c.converged &= res.converged;
        c.errors.push(quadratic_geodesic_error(&res.path));
        c.oracle.push(oracle.path);
        c.solved.push(res.path);
    }
    c
}

fn criterion_2(c: &Classical) -> Outcome {
    let ord = orders(&c.errors);
    let consts: Vec<f64> = c
        .errors
        .iter()
        .zip(MESHES)
        .map(|(e, m)| e / h_tau(m))
        .collect();
    outcome(
        c.converged && ord.iter().all(|&o| o >= 1.8),
        format!(
            "errors [{}], orders [{}], C = err/(h²+τ²) [{}]",
            fmt_list(&c.errors),
            fmt_orders(&ord),
            fmt_list(&consts)
        ),
    )
}

fn reduction_gap(path: &PotentialPath) -> f64 {
    let geo = geodesic_residual(path);
    let mut worst: f64 = 0.0;
    for form in [VelocityForm::Derived, VelocityForm::Literal] {
        let mag = magnetic_residual(path, &CouplingConfig::new(0.0, form).unwrap());
        for (a, b) in geo.knots().iter().zip(mag.knots()) {
            let scale = a.linf.max(f64::MIN_POSITIVE);
            let diff = a
                .field
                .values()
                .iter()
                .zip(b.field.values())
                .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
            worst = worst.max(diff / scale);
        }
    }
    worst
}

fn criterion_3(c: &Classical) -> Outcome {
    let mut paths: Vec<PotentialPath> = c.oracle.iter().chain(&c.solved).cloned().collect();
    for dim in [1, 2] {
        let mesh = if dim == 1 {
            MESHES[0]
        } else {
            Mesh {
                points: 17,
                steps: 8,
            }
        };
        let r = quadratic_family(dim, mesh, &[0.0]).resolve().unwrap();
        paths.push(PotentialPath::linear(&r.phi0, &r.phi1, r.time).unwrap());
    }
    let worst = paths.iter().map(reduction_gap).fold(0.0, f64::max);
    outcome(
        worst <= 1e-12,
        format!(
            "{} paths, both forms, worst relative gap {worst:.2e}",
            paths.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut derived = Vec::new();
    let mut literal = Vec::new();
    let mut converged = true;
    for mesh in MESHES {
        let r = resolve(mesh, &[0.0, 0.25, 0.5, 1.0]);
        let start = r.oracle().unwrap().path;
        let cfg = SolverConfig {
            max_iterations: 100,
            ..r.solver.clone()
        };
        let res = solve_from_path(start, &cfg, InitialPath::Oracle).unwrap();
        converged &= res.converged && res.stages.iter().all(|s| s.converged);
        derived.push(res.residuals.magnetic_derived.max_linf());
        literal.push(res.residuals.magnetic_literal.max_linf());
    }
    let decreasing = derived.windows(2).all(|w| w[1] < w[0]);
    let distinct = derived.iter().zip(&literal).all(|(a, b)| a != b);
    outcome(
        converged && decreasing && distinct,
        format!(
            "derived L∞ [{}] (orders [{}]), literal L∞ [{}]",
            fmt_list(&derived),
            fmt_orders(&orders(&derived)),
            fmt_list(&literal)
        ),
    )
}

fn criterion_5(c: &Classical) -> Outcome {
    let reports: Vec<_> = c.oracle.iter().map(hcma_residual).collect();
    let all_nodes: Vec<f64> = reports.iter().map(|r| r.max_linf()).collect();
    let oracle: Vec<f64> = reports.iter().map(|r| linf_on_mesh(r, MESHES[0])).collect();
    let linear: Vec<f64> = MESHES
        .iter()
        .map(|&m| {
            let r = resolve(m, &[0.0]);
            let p = PotentialPath::linear(&r.phi0, &r.phi1, r.time).unwrap();
            hcma_residual(&p).max_linf()
        })
        .collect();
    let ord = orders(&oracle);
    outcome(
        ord.iter().all(|&o| o >= 1.8) && linear.iter().all(|&v| v >= LINEAR_HCMA_FLOOR),
        format!(
            "oracle on coarse points [{}] orders [{}] (all nodes: orders [{}]); linear path [{}] vs floor {LINEAR_HCMA_FLOOR}",
            fmt_list(&oracle),
            fmt_orders(&ord),
            fmt_orders(&orders(&all_nodes)),
            fmt_list(&linear)
        ),
    )
}

fn wobble(i: usize, j: usize) -> f64 {
    (1.7 * i as f64 + 0.3 * j as f64).sin()
}

/// Smooth field vanishing, with its derivatives, outside `|x|∞ < 0.35`.
fn compact(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| {
            let s = v / 0.35;
            if s.abs() < 1.0 {
                (1.0 - s * s).powi(4) * (1.0 + 0.5 * v)
            } else {
                0.0
            }
        })
        .product()
}

fn ibp_error(grid: &Grid) -> f64 {
    let u = grid.sample(compact);
    let w = grid.sample(|x| {
        0.5 * x.iter().map(|v| v * v).sum::<f64>()
            + x[0].powi(4) / 12.0
            + 0.1 * x[0] * x[x.len() - 1]
    });
    let slots: Vec<&ScalarField> = (1..grid.dim()).map(|_| &w).collect();
    let pair = cofactor_pairing(&u, &u, &slots).unwrap();
    let mut mixed_slots = slots.clone();
    mixed_slots.push(&u);
    let second = mixed_ma_density(&mixed_slots).unwrap();
    let lhs = integrate(&pair, Support::Interior);
    let rhs = integrate(
        &u.zip_with(&second, |a, b| a * b).unwrap(),
        Support::Interior,
    );
    (lhs + rhs).abs() / lhs.abs()
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // polarization diagonal
    let mut pol: f64 = 0.0;
    for grid in [
        Grid::line(33, -1.0, 1.0).unwrap(),
        Grid::square(17, -1.0, 1.0).unwrap(),
    ] {
        let f = grid.sample(|x| {
            x.iter().map(|v| 0.5 * v * v + 0.1 * v.powi(4)).sum::<f64>()
                + 0.2 * x[0] * x[x.len() - 1]
        });
        let slots: Vec<&ScalarField> = (0..grid.dim()).map(|_| &f).collect();
        let a = mixed_ma_density(&slots).unwrap();
        let b = ma_density(&f);
        for (x, y) in a.values().iter().zip(b.values()) {
            pol = pol.max((x - y).abs() / y.abs().max(f64::MIN_POSITIVE));
        }
    }
    pass &= pol <= 1e-12;
    notes.push(format!("polarization {pol:.1e}"));

    // slot symmetry
    let mut symmetric = true;
    for i in 0..50 {
        let a = SymMat::new2(wobble(i, 0), wobble(i, 1), wobble(i, 2));
        let b = SymMat::new2(wobble(i, 3), wobble(i, 4), wobble(i, 5));
        symmetric &= md(&[a, b]).unwrap() == md(&[b, a]).unwrap();
    }
    let grid = Grid::square(9, -1.0, 1.0).unwrap();
    let u = grid.sample(|x| (x[0] + 2.0 * x[1]).sin());
    let v = grid.sample(|x| x[0] * x[0] * x[1] + x[1].powi(3));
    let w = grid.sample(|x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
    symmetric &= mixed_ma_density(&[&u, &v]).unwrap() == mixed_ma_density(&[&v, &u]).unwrap();
    symmetric &=
        cofactor_pairing(&u, &v, &[&w]).unwrap() == cofactor_pairing(&v, &u, &[&w]).unwrap();
    pass &= symmetric;
    notes.push(format!(
        "symmetry {}",
        if symmetric { "exact" } else { "broken" }
    ));

    // cofactor integration by parts
    for dim in [1, 2] {
        let sizes: [usize; 3] = if dim == 1 {
            [33, 65, 129]
        } else {
            [17, 33, 65]
        };
        let errs: Vec<f64> = sizes
            .iter()
            .map(|&n| {
                let g = if dim == 1 {
                    Grid::line(n, -0.5, 0.5)
                } else {
                    Grid::square(n, -0.5, 0.5)
                };
                ibp_error(&g.unwrap())
            })
            .collect();
        let ord = orders(&errs);
        pass &= ord.iter().all(|&o| o >= 1.8);
        notes.push(format!("ibp n={dim} orders [{}]", fmt_orders(&ord)));
    }

    // Legendre involution
    let mut inv = Vec::new();
    for n in [33, 65] {
        let g = Grid::line(n, -1.0, 1.0).unwrap();
        let f = g.sample(|x| 0.5 * x[0] * x[0] + x[0].powi(4) / 12.0);
        let slope = |x: f64| x + x.powi(3) / 3.0;
        let dual = Grid::line(n, slope(-0.8), slope(0.8)).unwrap();
        let fs = legendre(&f, &dual).unwrap();
        let (back, mask) = legendre_masked(&fs, &g).unwrap();
        let h = g.spacing()[0];
        let err = (0..g.len())
            .filter(|&i| mask[i] && g.is_interior(i))
            .map(|i| (back.values()[i] - f.values()[i]).abs())
            .fold(0.0, f64::max);
        pass &= err <= h;
        inv.push(err);
    }
    notes.push(format!("involution [{}]", fmt_list(&inv)));

    // constant-shift paths
    let mut zero = true;
    for grid in [
        Grid::line(17, -0.5, 0.5).unwrap(),
        Grid::square(9, -0.5, 0.5).unwrap(),
    ] {
        let bg = ToricBackground::new(grid.sample(|x| 0.5 * x.iter().map(|v| v * v).sum::<f64>()))
            .unwrap();
        let time = TimeAxis::new(4).unwrap();
        let slices = (0..=4)
            .map(|k| ScalarField::constant(&grid, 0.75 * time.knot(k)))
            .collect();
        let path = PotentialPath::from_slices(&bg, time, slices).unwrap();
        let cfg = CouplingConfig::new(1.0, VelocityForm::Derived).unwrap();
        for rep in [
            geodesic_residual(&path),
            magnetic_residual(&path, &cfg),
            magnetic_residual(
                &path,
                &CouplingConfig::new(1.0, VelocityForm::Literal).unwrap(),
            ),
            corollary_residual(&path, &cfg),
            hcma_residual(&path),
        ] {
            zero &= rep.max_linf() == 0.0;
        }
    }
    pass &= zero;
    notes.push(format!(
        "shift residuals {}",
        if zero { "exactly 0" } else { "nonzero" }
    ));
    outcome(pass, notes.join("; "))
}

fn criterion_7() -> Outcome {
    let mut spreads = Vec::new();
    for mesh in MESHES {
        let r = bump_family(mesh).resolve().unwrap();
        let oracle = r.oracle().unwrap();
        spreads.push(spread(&energy_profile(&oracle.path)));
    }
    let ord = orders(&spreads);
    let consts: Vec<f64> = spreads
        .iter()
        .zip(MESHES)
        .map(|(e, m)| e / h_tau(m))
        .collect();
    outcome(
        ord.iter().all(|&o| o >= 1.5),
        format!(
            "bump family spread [{}], orders [{}], C [{}]",
            fmt_list(&spreads),
            fmt_orders(&ord),
            fmt_list(&consts)
        ),
    )
}

fn run_binary(sub: &str, config: &Path, out: &Path) -> i32 {
    Process::new(env!("CARGO_BIN_EXE_magtor"))
        .args([
            sub,
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut s = quadratic_family(1, MESHES[0], &[0.0, 1.0]);
    s.solver.initial_path = InitialPath::Oracle;
    s.seed = 7;
    let config = dir.path().join("scenario.json");
    std::fs::write(&config, serde_json::to_string_pretty(&s).unwrap()).unwrap();
    let mut files = 0;
    let mut identical = true;
    for sub in ["gradcheck", "solve", "oracle-compare"] {
        let a = dir.path().join(format!("{sub}-a"));
        let b = dir.path().join(format!("{sub}-b"));
        identical &= run_binary(sub, &config, &a) == 0 && run_binary(sub, &config, &b) == 0;
        let mut names: Vec<_> = std::fs::read_dir(&a)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for name in names {
            files += 1;
            identical &=
                std::fs::read(a.join(&name)).unwrap() == std::fs::read(b.join(&name)).unwrap();
        }
    }
    outcome(
        identical && files >= 7,
        format!("{files} files from 3 subcommands compared byte by byte"),
    )
}

fn main() {
    let total = Instant::now();
    let mut lines = Vec::new();
    let mut record = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let line = format!(
            "criterion {id} {name}: {} ({:.1} s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
        println!("{line}");
        lines.push(o.pass);
    };
    record(1, "gradient consistency", &mut criterion_1);
    let t = Instant::now();
    let classical = classical();
    println!(
        "(classical solves on three meshes: {:.1} s)",
        t.elapsed().as_secs_f64()
    );
    record(2, "classical oracle equivalence", &mut || {
        criterion_2(&classical)
    });
    record(3, "residual reduction at zero coupling", &mut || {
        criterion_3(&classical)
    });
    record(4, "magnetic equation convergence", &mut criterion_4);
    record(5, "space-time degeneracy", &mut || criterion_5(&classical));
    record(6, "algebraic kernels", &mut criterion_6);
    record(7, "constant speed", &mut criterion_7);
    record(8, "reproducibility", &mut criterion_8);
    let passed = lines.iter().filter(|&&p| p).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.1} s",
        lines.len(),
        total.elapsed().as_secs_f64()
    );
    if passed != lines.len() {
        std::process::exit(1);
    }
}
