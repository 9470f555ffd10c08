//! Command-line front end: fundamental forms at a point, hyperbolicity
//! scans, asymptotic-line traces, return-map sweeps, translation numbers,
//! drift-coefficient extraction, variational defects, the verification
//! suite, and stereographic mesh / line export.

use anyhow::{anyhow, Context};
use asymptorus::acceptance::{run_all, Tolerances};
use asymptorus::{
    asymptotic_family, cross_validate, export_lines, export_mesh, first_form, hyperbolicity_scan,
    integrate_line, k_ext, perturbed_jet, perturbed_jet_unguarded, poincare1, poincare2,
    quad_coeff_extract, second_form, second_variation, translation_number, Branch, ChartPoint,
    FormPair, IntegratorOptions, SinSqDiagonal, VariationSettings, EPS_GUARD,
};
use clap::{Args, Parser, Subcommand};
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "asymptorus",
    version,
    about = "Asymptotic lines, return maps and drift coefficients of deformed Clifford tori"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Args)]
struct FlowArgs {
    /// Integrator tolerance (sets both the absolute and relative bound).
    #[arg(long)]
    tol: Option<f64>,
}

impl FlowArgs {
    fn options(&self) -> IntegratorOptions {
        let mut opts = IntegratorOptions::default();
        if let Some(tol) = self.tol {
            opts.rtol = tol;
            opts.atol = tol;
        }
        opts
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print both fundamental forms and the extrinsic curvature at a point.
    Forms {
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        u: f64,
        #[arg(long, default_value_t = 0.0)]
        v: f64,
        /// Evaluate jets beyond the immersion guard |eps| <= 0.25.
        #[arg(long)]
        override_eps_guard: bool,
    },
    /// Scan the hyperbolicity discriminant f^2 - eg on a uniform grid.
    Scan {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Integrate one asymptotic line and write it as CSV (t, w).
    Trace {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        u: f64,
        #[arg(long, default_value_t = 0.0)]
        v: f64,
        /// Foliation: 1 (graph over u) or 2 (graph over v).
        #[arg(long, default_value_t = 1)]
        branch: u8,
        /// Integration span in radians.
        #[arg(long, default_value_t = TAU)]
        span: f64,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Return-map displacement sweep over section points.
    Poincare {
        #[arg(long)]
        eps: f64,
        /// Single section point; sweeps a grid when omitted.
        #[arg(long)]
        v0: Option<f64>,
        /// Sweep grid size.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        /// Foliation: 1 (section u = 0) or 2 (section v = 0).
        #[arg(long, default_value_t = 1)]
        branch: u8,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Translation-number estimate of the lifted return map.
    Rotation {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        branch: u8,
        #[arg(long, default_value_t = 50)]
        iters: usize,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Richardson extraction of the eps^2 drift coefficient.
    Coeff {
        /// Comma-separated ladder of deformation sizes.
        #[arg(long, default_value = "0.02,0.01,0.005")]
        ladder: String,
        /// Section-point grid size.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Variational period defects, with an optional trace CSV.
    Variation {
        #[arg(long, default_value_t = 0.0)]
        v0: f64,
        /// Trace grid cells over one period.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Ladder for the flow-versus-variation residual report.
        #[arg(long)]
        ladder: Option<String>,
        /// Emit the summary as JSON instead of text.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Run the verification suite; exits 0 only if every check passes.
    Verify {
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Scale every tolerance by this factor.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Write stereographic geometry to disk.
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Subcommand)]
enum ExportCmd {
    /// Projected quad mesh of the deformed torus (OBJ).
    Mesh {
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        /// Allow display deformations beyond |eps| <= 0.25.
        #[arg(long)]
        override_eps_guard: bool,
    },
    /// Integrated asymptotic lines (CSV plus an OBJ polyline variant).
    Lines {
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        branch: u8,
        #[arg(long, default_value_t = TAU)]
        span: f64,
        /// Comma-separated section coordinates of the start points;
        /// defaults to four equispaced values.
        #[arg(long)]
        starts: Option<String>,
        /// Output base path; `.csv` and `.obj` are written next to it.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flow: FlowArgs,
    },
}

/// Round to 6 significant digits for human-readable summaries.
fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let dec = (5 - mag).max(0) as usize;
        let s = format!("{x:.dec$}");
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        if trimmed == "-0" {
            "0".into()
        } else {
            trimmed.to_string()
        }
    } else {
        format!("{x:.5e}")
    }
}

/// Snap float noise below 5e-13 to zero for display only.
fn snap(x: f64) -> f64 {
    if x.abs() < 5e-13 {
        0.0
    } else {
        x
    }
}

fn parse_branch(b: u8) -> anyhow::Result<Branch> {
    Branch::from_index(b).ok_or_else(|| anyhow!("branch must be 1 or 2, got {b}"))
}

fn parse_ladder(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad ladder entry {t:?}"))
        })
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let field = SinSqDiagonal;
    match cli.cmd {
        Cmd::Forms {
            eps,
            u,
            v,
            override_eps_guard,
        } => {
            let q = ChartPoint::new(u, v);
            let jet = if override_eps_guard {
                perturbed_jet_unguarded(q, eps, &field)?
            } else {
                perturbed_jet(q, eps, &field)?
            };
            #[allow(non_snake_case)]
            let (E, F, G) = first_form(&jet);
            let (e, f, g) = second_form(&jet)?;
            let fp = FormPair { E, F, G, e, f, g };
            println!(
                "E={} F={} G={} e={} f={} g={} K={}",
                sig6(snap(E)),
                sig6(snap(F)),
                sig6(snap(G)),
                sig6(snap(e)),
                sig6(snap(f)),
                sig6(snap(g)),
                sig6(snap(k_ext(&fp)))
            );
            Ok(0)
        }
        Cmd::Scan { eps, grid } => {
            if grid < 2 {
                return Err(anyhow!("scan grid must be at least 2"));
            }
            let report = hyperbolicity_scan(eps, &field, grid);
            println!("{report}");
            Ok(0)
        }
        Cmd::Trace {
            eps,
            u,
            v,
            branch,
            span,
            out,
            flow,
        } => {
            let curve = integrate_line(
                ChartPoint::new(u, v),
                parse_branch(branch)?,
                eps,
                &field,
                span,
                &flow.options(),
            )?;
            match out {
                Some(path) => {
                    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                    curve.write_csv(&mut file)?;
                    eprintln!(
                        "wrote {} samples to {}",
                        curve.samples().len(),
                        path.display()
                    );
                }
                None => curve.write_csv(&mut std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Cmd::Poincare {
            eps,
            v0,
            grid,
            branch,
            flow,
        } => {
            let opts = flow.options();
            let br = parse_branch(branch)?;
            let v0s: Vec<f64> = match v0 {
                Some(x) => vec![x],
                None => (0..grid.max(1))
                    .map(|k| k as f64 * TAU / grid.max(1) as f64)
                    .collect(),
            };
            let mut sum = 0.0;
            for &x in &v0s {
                let mapped = match br {
                    Branch::First => poincare1(x, eps, &field, &opts)?,
                    Branch::Second => poincare2(x, eps, &field, &opts)?,
                };
                let d = mapped - x;
                sum += d;
                println!("v0={} displacement={}", sig6(x), sig6(d));
            }
            println!(
                "mean={} drift_law={}",
                sig6(sum / v0s.len() as f64),
                sig6(-12.0 * std::f64::consts::PI * eps * eps)
            );
            Ok(0)
        }
        Cmd::Rotation {
            eps,
            branch,
            iters,
            flow,
        } => {
            let est =
                translation_number(parse_branch(branch)?, eps, &field, iters, &flow.options())?;
            println!(
                "branch={} eps={} iterations={} translation={} error_bar={}",
                branch,
                sig6(eps),
                iters,
                sig6(est.value),
                sig6(est.error_bar)
            );
            for (k, t) in est.per_start.iter().enumerate() {
                println!("start_{k}={}", sig6(*t));
            }
            Ok(0)
        }
        Cmd::Coeff { ladder, grid, flow } => {
            let eps_list = parse_ladder(&ladder)?;
            let v0s: Vec<f64> = (0..grid.max(1))
                .map(|k| k as f64 * TAU / grid.max(1) as f64)
                .collect();
            let report = quad_coeff_extract(&eps_list, &v0s, &field, &flow.options())?;
            println!(
                "quad_coeff={} target={} residual={}",
                sig6(report.quad_coeff),
                sig6(-12.0 * std::f64::consts::PI),
                sig6(report.quad_coeff_err)
            );
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(0)
        }
        Cmd::Variation {
            v0,
            grid,
            ladder,
            json,
            out,
            flow,
        } => {
            let fam = asymptotic_family(&field);
            let settings = VariationSettings {
                cells: grid.max(8),
                tol: 1e-12,
            };
            let trace = second_variation(&fam, v0, TAU, &settings)?;
            let defect2 = trace.second_defect().expect("second variation present");
            let cv = match ladder {
                Some(entries) => Some(cross_validate(
                    &parse_ladder(&entries)?,
                    v0,
                    &field,
                    &flow.options(),
                    &settings,
                )?),
                None => None,
            };
            if json {
                let summary = serde_json::json!({
                    "v0": v0,
                    "defect1": trace.first_defect(),
                    "defect2": defect2,
                    "defect2_target": -24.0 * std::f64::consts::PI,
                    "slope": cv.as_ref().and_then(|c| c.slope),
                    "residuals": cv.as_ref().map(|c| {
                        c.rungs.iter().map(|r| r.residual).collect::<Vec<_>>()
                    }),
                });
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                println!(
                    "v0={} defect1={} defect2={} target2={}",
                    sig6(v0),
                    sig6(snap(trace.first_defect())),
                    sig6(defect2),
                    sig6(-24.0 * std::f64::consts::PI)
                );
                if let Some(cv) = &cv {
                    for r in &cv.rungs {
                        println!(
                            "eps={} flow={} predicted={} residual={}",
                            sig6(r.eps),
                            sig6(r.flow),
                            sig6(r.predicted),
                            sig6(r.residual)
                        );
                    }
                    if let Some(slope) = cv.slope {
                        println!("residual_slope={}", sig6(slope));
                    }
                }
            }
            if let Some(path) = out {
                let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                trace.write_csv(&mut file)?;
                eprintln!("wrote variation trace to {}", path.display());
            }
            Ok(0)
        }
        Cmd::Verify { json, tol } => {
            let tolerances = match tol {
                Some(scale) => Tolerances::scaled(scale),
                None => Tolerances::default(),
            };
            let report = run_all(&tolerances);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render_text());
            }
            Ok(if report.pass { 0 } else { 1 })
        }
        Cmd::Export(what) => match what {
            ExportCmd::Mesh {
                eps,
                grid,
                out,
                override_eps_guard,
            } => {
                if eps.abs() > EPS_GUARD && !override_eps_guard {
                    return Err(anyhow!(
                        "eps = {eps} exceeds the immersion guard {EPS_GUARD}; pass --override-eps-guard for display meshes"
                    ));
                }
                export_mesh(eps, &field, grid, &out)?;
                eprintln!("wrote {}x{grid} mesh to {}", grid, out.display());
                Ok(0)
            }
            ExportCmd::Lines {
                eps,
                branch,
                span,
                starts,
                out,
                flow,
            } => {
                let br = parse_branch(branch)?;
                let coords: Vec<f64> = match starts {
                    Some(s) => parse_ladder(&s)?,
                    None => (0..4).map(|k| 0.8 + k as f64 * TAU / 4.0).collect(),
                };
                let points: Vec<ChartPoint> = coords
                    .iter()
                    .map(|&w0| match br {
                        Branch::First => ChartPoint::new(0.0, w0),
                        Branch::Second => ChartPoint::new(w0, 0.0),
                    })
                    .collect();
                export_lines(eps, &field, br, &points, span, &flow.options(), &out)?;
                eprintln!(
                    "wrote {} lines to {} and {}",
                    points.len(),
                    out.with_extension("csv").display(),
                    out.with_extension("obj").display()
                );
                Ok(0)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
