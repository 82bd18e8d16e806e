use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::certificates::{brouwer_degree, check_growth, check_signs};
use crate::function_space::{endpoint_0, endpoint_t, sup_norm, Grid, Sci17, Short, DEFAULT_NODES};
use crate::operators::{q_phi, OperatorError};
use crate::solver::{
    ode_residuals, phi_of_derivative, solve, BoundaryClass, ProblemSpec, SolveError, SolveReport,
};

use super::{load, require, CliError, ProblemFile};

fn print(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn write_file(dir: &Path, name: String, contents: &str) -> Result<PathBuf, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}

fn stem(file: &Path) -> String {
    file.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into())
}

fn spec_from(p: &ProblemFile, command: &'static str) -> Result<ProblemSpec, CliError> {
    let bc = *require(&p.problem, "problem", command)?;
    let phi = *require(&p.phi, "phi", command)?;
    let length = *require(&p.length, "T", command)?;
    let f = require(&p.f, "f", command)?.clone();
    let mut spec = ProblemSpec::new(bc, phi, f, length)?;
    spec.grid_n = p.grid_n.unwrap_or(DEFAULT_NODES);
    if let Some(step) = p.lambda_step {
        spec.lambda_step = step;
    }
    if let Some(tol) = p.tol {
        spec.tol_fp = tol;
    }
    spec.validate()?;
    Ok(spec)
}

/// `solve <file>`: fixed-point solution, CSV and report files.
pub fn cmd_solve(file: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = load(file)?;
    let spec = spec_from(&problem, "solve")?;
    let (report, failure) = match solve(&spec) {
        Ok(report) => (report, None),
        Err(SolveError::NonConvergence {
            lambda,
            best_residual,
            iterations,
            report,
        }) => (
            *report.clone(),
            Some(SolveError::NonConvergence {
                lambda,
                best_residual,
                iterations,
                report,
            }),
        ),
        Err(e) => return Err(e.into()),
    };

    let name = stem(file);
    let csv = solution_csv(&spec, &report)?;
    let csv_path = write_file(out_dir, format!("{name}.solution.csv"), &csv)?;
    let report_path = write_file(
        out_dir,
        format!("{name}.report.txt"),
        &report_text(&spec, &report),
    )?;

    let sol = &report.solution;
    print(
        out,
        &format!(
            "{}: {} after {} iterations; u(0) = {}, u(T) = {}, ode_residual = {:e}, bc_residual = {:e} ({}, {})\n",
            spec.bc,
            if report.converged { "converged" } else { "NOT converged" },
            report.iterations(),
            Short(endpoint_0(sol.u())),
            Short(endpoint_t(sol.u())),
            report.ode_residual,
            report.bc_residual,
            csv_path.display(),
            report_path.display(),
        ),
    )?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn solution_csv(spec: &ProblemSpec, report: &SolveReport) -> Result<String, CliError> {
    let sol = &report.solution;
    let flux = phi_of_derivative(spec, sol)?;
    let residuals = ode_residuals(spec, sol)?;
    let mut csv = String::from("t,u,du,phi_du,residual\n");
    for (i, t) in sol.grid().nodes().enumerate() {
        writeln!(
            csv,
            "{},{},{},{},{}",
            Sci17(t),
            Sci17(sol.u()[i]),
            Sci17(sol.du()[i]),
            Sci17(flux[i]),
            Sci17(residuals[i])
        )
        .expect("writing to a String");
    }
    Ok(csv)
}

fn report_text(spec: &ProblemSpec, report: &SolveReport) -> String {
    let sol = &report.solution;
    let norms = sol.norms();
    let mut s = String::new();
    let mut kv =
        |k: &str, v: &dyn std::fmt::Display| writeln!(s, "{k}={v}").expect("writing to a String");
    kv("problem", &spec.bc);
    kv("phi", &spec.phi);
    kv("T", &Short(spec.length));
    kv("f", &spec.f);
    kv("grid_n", &spec.grid_n);
    kv("tol", &Short(spec.tol_fp));
    kv("lambda_step", &Short(spec.lambda_step));
    kv("anderson_depth", &spec.anderson_depth);
    kv("converged", &report.converged);
    kv("iterations", &report.iterations());
    kv("fp_residual", &Short(report.fp_residual));
    kv("ode_residual", &Short(report.ode_residual));
    kv("bc_residual", &Short(report.bc_residual));
    kv("consistency_defect", &Short(report.consistency_defect));
    match report.omega_margin {
        Some(m) => kv("omega_margin", &Short(m)),
        None => kv("omega_margin", &"none"),
    }
    let path: Vec<String> = report
        .lambda_path
        .iter()
        .map(|st| format!("{}:{}", Short(st.lambda), st.iterations))
        .collect();
    kv("lambda_path", &path.join(","));
    kv("u_sup", &Short(norms.sup));
    kv("du_sup", &Short(sup_norm(sol.du())));
    kv("c1_norm", &Short(norms.c1));
    kv("u_0", &Short(endpoint_0(sol.u())));
    kv("u_T", &Short(endpoint_t(sol.u())));
    kv("du_0", &Short(endpoint_0(sol.du())));
    kv("du_T", &Short(endpoint_t(sol.du())));
    s
}

/// `check <file>`: hypothesis certificate for the problem's class.
pub fn cmd_check(file: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(file)?;
    let bc = *require(&p.problem, "problem", "check")?;
    let phi = *require(&p.phi, "phi", "check")?;
    let length = *require(&p.length, "T", "check")?;
    let f = require(&p.f, "f", "check")?;
    let name = format!("{}.certificate.txt", stem(file));

    match bc {
        BoundaryClass::DirichletBounded => {
            let h = require(&p.h, "h", "check")?;
            let n = require(&p.n, "n", "check")?;
            let dn = require(&p.dn, "dn", "check")?;
            let cert = check_growth(&phi, f, h, n, dn, length, None)?;
            let path = write_file(out_dir, name, &cert.to_key_value())?;
            print(out, &cert.to_key_value())?;
            if !cert.verdict.is_checked() {
                return Err(CliError::Hypothesis(cert.verdict.to_string()));
            }
            print(out, &format!("certificate written to {}\n", path.display()))
        }
        BoundaryClass::ThreePointClassic => {
            let m1 = *require(&p.m1, "m1", "check")?;
            let m2 = *require(&p.m2, "m2", "check")?;
            let c = require(&p.c, "c", "check")?;
            let cert = check_signs(&phi, f, m1, m2, c, length, None)?;
            let mut text = cert.to_key_value();
            let Some(rho_min) = cert.rho_min else {
                write_file(out_dir, name, &text)?;
                print(out, &text)?;
                return Err(CliError::Hypothesis(cert.verdict.to_string()));
            };
            let rho = p.rho.unwrap_or(0.0).max(rho_min);
            let degree = match brouwer_degree(f, length, rho) {
                Ok(d) => d,
                Err(e) => {
                    writeln!(text, "degree_error={e}").expect("writing to a String");
                    write_file(out_dir, name, &text)?;
                    print(out, &text)?;
                    return Err(e.into());
                }
            };
            text.push_str(&degree.to_key_value());
            let path = write_file(out_dir, name, &text)?;
            print(out, &text)?;
            if degree.winding == 0 {
                return Err(CliError::Hypothesis(format!(
                    "winding = 0 on the circle of radius {rho}"
                )));
            }
            print(out, &format!("certificate written to {}\n", path.display()))
        }
        BoundaryClass::ThreePointSingular => Err(CliError::Usage(
            "check applies to dirichlet and threepoint_classic problems".into(),
        )),
    }
}

/// `qphi <file>`: the shift `Q_φ(h)` for `h(t)`.
pub fn cmd_qphi(file: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(file)?;
    let phi = require(&p.phi, "phi", "qphi")?;
    let length = *require(&p.length, "T", "qphi")?;
    let h = require(&p.h, "h", "qphi")?;
    let grid = Grid::new(length, p.grid_n.unwrap_or(DEFAULT_NODES))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let values = grid
        .nodes()
        .enumerate()
        .map(|(index, t)| {
            h.eval(t, 0.0, 0.0)
                .map_err(|source| OperatorError::Eval { index, t, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let r = q_phi(phi, &grid, &values)?;
    print(
        out,
        &format!(
            "s={}\nresidual={}\niterations={}\n",
            Short(r.s),
            Short(r.residual),
            r.iterations
        ),
    )
}

/// `degree <file>`: winding of `G` on the circle of radius `rho`.
pub fn cmd_degree(file: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(file)?;
    let f = require(&p.f, "f", "degree")?;
    let length = *require(&p.length, "T", "degree")?;
    let rho = *require(&p.rho, "rho", "degree")?;
    let d = brouwer_degree(f, length, rho)?;
    print(out, &d.to_key_value())
}
