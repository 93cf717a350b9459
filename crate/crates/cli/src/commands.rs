use std::io::Write;
use std::path::{Path, PathBuf};

use kruskal_cmc::foliation::{leaf, locate, mo_linear_family, params_from_c, LeafBranch};
use kruskal_cmc::slice::{
    branch_roots, build_slice_ivp, build_slice_quadrature, cylinder_slice, quadrature_r_grid, Branch,
};
use kruskal_cmc::verify::{run_suite, VerifyConfig, MO_H};
use kruskal_cmc::{Hypersurface, SliceParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::{FoliationArgs, GeneratorArg, LocateArgs, PlotArgs, SliceArgs, VerifyArgs};
use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::io::{
    self, CurveMeta, FailedLeaf, Index, IndexEntry, PartialManifest, INDEX_FILE, PARTIAL_MANIFEST_FILE,
};
use crate::svg::{render, PlotLeaf, View};

pub const DEFAULT_FOLIATION_DIR: &str = "foliation";
pub const DEFAULT_REPORT_FILE: &str = "verification.json";

/// Writes to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => io::write_bytes(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

/// The configured format, unless the output name says otherwise and no
/// format flag was given.
fn slice_format(cfg: &RunConfig, flag: Option<Format>) -> Format {
    if flag.is_some() {
        return cfg.output.format;
    }
    match cfg.output.path.as_deref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        _ => cfg.output.format,
    }
}

pub fn slice(cfg: &RunConfig, args: &SliceArgs, format_flag: Option<Format>) -> Result<u8> {
    let opts = cfg.slice_options()?;
    let s = match (args.h, args.c) {
        (Some(h), Some(c)) => explicit_slice(cfg, h, c, args)?,
        (None, Some(c)) => {
            if args.branch.is_some() || args.generator != GeneratorArg::Ivp {
                return Err(CliError::Invalid("--branch and --generator need --H".into()));
            }
            leaf(c, &cfg.curve()?, &opts)?
        }
        (Some(_), None) => return Err(CliError::Invalid("--H needs --c".into())),
        (None, None) => return Err(CliError::Invalid("slice needs --c, optionally with --H".into())),
    };
    let bytes = io::encode_slice(&s, slice_format(cfg, format_flag))?;
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn explicit_slice(cfg: &RunConfig, h: f64, c: f64, args: &SliceArgs) -> Result<Hypersurface> {
    let opts = cfg.slice_options()?;
    let p = SliceParams::new(cfg.m, h, c)?;
    let branch = match args.branch {
        Some(b) => Branch::from(b),
        None => {
            if h <= 0.0 && branch_roots(&p, opts.tol.tol_root).is_ok_and(|r| r.is_cylinder()) {
                return Ok(cylinder_slice(h, cfg.m, &opts)?);
            }
            Branch::Minus
        }
    };
    Ok(match args.generator {
        GeneratorArg::Ivp => build_slice_ivp(&p, branch, &opts)?,
        GeneratorArg::Quadrature => {
            let grid = quadrature_r_grid(&p, branch, opts.samples_per_side, &opts)?;
            build_slice_quadrature(&p, branch, &grid, &opts)?
        }
    })
}

pub fn foliation(cfg: &RunConfig, args: &FoliationArgs) -> Result<u8> {
    let dir = io::create_dir(cfg.output.path.as_deref().unwrap_or(Path::new(DEFAULT_FOLIATION_DIR)))?;
    let opts = cfg.slice_options()?;
    let format = cfg.output.format;

    if args.mo_family {
        let hs = args.h_list.clone().unwrap_or_else(|| MO_H.to_vec());
        let mut family = mo_linear_family(&hs, cfg.m, &opts)?;
        family.sort_by(|a, b| a.params.c.total_cmp(&b.params.c));
        let mut leaves = Vec::with_capacity(family.len());
        for (i, s) in family.iter().enumerate() {
            let file = io::leaf_file_name(i, format);
            io::write_bytes(&dir.join(&file), &io::encode_slice(s, format)?)?;
            leaves.push(IndexEntry {
                c: s.params.c,
                h: s.params.h,
                r: 2.0 * cfg.m,
                branch: if s.params.h == 0.0 { LeafBranch::Maximal } else { LeafBranch::Minus },
                t_intercept: s.t_intercept,
                file,
            });
        }
        io::write_json(&dir.join(INDEX_FILE), &Index { m: cfg.m, curve: None, leaves })?;
        return Ok(EXIT_OK);
    }

    let fc = cfg.curve()?;
    let curve = Some(CurveMeta::from(&fc));
    let grid = cfg.c_grid();
    let results: Vec<_> = grid
        .par_iter()
        .map(|&c| Ok((params_from_c(c, &fc, opts.tol.tol_root)?, leaf(c, &fc, &opts)?)))
        .collect::<Vec<kruskal_cmc::Result<_>>>();

    let mut leaves = Vec::with_capacity(grid.len());
    for (i, (c, res)) in grid.iter().zip(results).enumerate() {
        match res {
            Ok((lp, s)) => {
                let file = io::leaf_file_name(i, format);
                io::write_bytes(&dir.join(&file), &io::encode_slice(&s, format)?)?;
                leaves.push(IndexEntry {
                    c: lp.c,
                    h: lp.h,
                    r: lp.r,
                    branch: lp.branch,
                    t_intercept: s.t_intercept,
                    file,
                });
            }
            Err(source) => {
                let manifest = dir.join(PARTIAL_MANIFEST_FILE);
                io::write_json(
                    &manifest,
                    &PartialManifest {
                        m: cfg.m,
                        curve,
                        completed: leaves,
                        failed: FailedLeaf {
                            c: *c,
                            error: source.to_string(),
                        },
                    },
                )?;
                return Err(CliError::Partial { c: *c, source, manifest });
            }
        }
    }
    io::write_json(&dir.join(INDEX_FILE), &Index { m: cfg.m, curve, leaves })?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct LocateOutput {
    c: f64,
    #[serde(rename = "H")]
    h: f64,
    r: f64,
    branch: LeafBranch,
    #[serde(rename = "residual_T")]
    residual_t: f64,
}

pub fn locate_point(cfg: &RunConfig, args: &LocateArgs) -> Result<u8> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(CliError::Invalid(format!("--tol must be positive, got {}", args.tol)));
    }
    let l = locate(args.t, args.x, &cfg.curve()?, args.tol, &cfg.slice_options()?)?;
    let out = LocateOutput {
        c: l.c,
        h: l.h,
        r: l.r,
        branch: l.branch,
        residual_t: l.residual_t,
    };
    let mut bytes = serde_json::to_vec(&out).expect("locate output serializes");
    bytes.push(b'\n');
    emit(None, &bytes)?;
    Ok(EXIT_OK)
}

pub fn verify(cfg: &RunConfig, args: &VerifyArgs) -> Result<u8> {
    let mut vc = VerifyConfig::new(cfg.curve()?);
    vc.slice = cfg.slice_options()?;
    vc.c_grid = cfg.c_grid();
    if let Some(seed) = args.seed {
        vc.seed = seed;
    }
    if let Some(n) = args.points {
        vc.coverage_points = n;
    }
    let report = run_suite(args.suite, &vc)?;
    for check in &report.checks {
        println!("{check}");
    }
    let failed = report.failures().count();
    println!(
        "suite {}: {} of {} checks pass",
        report.suite,
        report.checks.len() - failed,
        report.checks.len()
    );
    let path = cfg.output.path.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_REPORT_FILE));
    io::write_json(&path, &report)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Leaves from every input, in argument order; index files expand in index
/// order.
pub fn load_plot_leaves(inputs: &[PathBuf]) -> Result<(Option<f64>, Vec<PlotLeaf>)> {
    let mut m = None;
    let mut leaves = Vec::new();
    for path in inputs {
        let is_index = path.extension().is_some_and(|e| e == "json")
            && serde_json::from_str::<serde_json::Value>(&io::read_text(path)?)
                .ok()
                .is_some_and(|v| v.get("leaves").is_some());
        if is_index {
            let index = io::read_index(path)?;
            m = m.or(Some(index.m));
            let base = path.parent().unwrap_or(Path::new("."));
            for entry in &index.leaves {
                let s = io::read_slice(&base.join(&entry.file))?;
                leaves.push(PlotLeaf {
                    c: entry.c,
                    h: entry.h,
                    samples: s.samples,
                });
            }
        } else {
            let s = io::read_slice(path)?;
            m = m.or(s.m);
            leaves.push(PlotLeaf {
                c: s.c,
                h: s.h,
                samples: s.samples,
            });
        }
    }
    Ok((m, leaves))
}

pub fn plot(cfg: &RunConfig, args: &PlotArgs, m_flag: Option<f64>) -> Result<u8> {
    let (file_m, leaves) = load_plot_leaves(&args.input)?;
    let m = m_flag.or(file_m).unwrap_or(cfg.m);
    let view = View::new(m, cfg.grids.x_max.unwrap_or(3.0 * m));
    emit(cfg.output.path.as_deref(), render(&view, &leaves).as_bytes())?;
    Ok(EXIT_OK)
}
