use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use num_complex::Complex64;
use wco_core::dynamics::{uci_certify_with, UciOptions};
use wco_core::eigen::{eigenfunction_series, lift_eigenpair, one_minus_z_power, DEFAULT_TERMS};
use wco_core::hardy::{wco_matrix, DEFAULT_DEGREE};
use wco_core::normality::hyponormal_probe;
use wco_core::reproduce::{fingerprint, run_criteria, table, CriterionRow, DEFAULT_SEED};
use wco_core::spectra::{dense_spectrum, predict, pseudospectrum, SpectrumKind};
use wco_core::symbol::{classify_with, ClassifyOptions};

use crate::config::{check_degree, check_positive, symbol, RunConfig};
use crate::output::OutDir;
use crate::syntax::{parse_grid, GridArg};

/// Raised for results that are computed but reject the hypothesis under test.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Rejected(pub String);

#[derive(Args, Debug, Default)]
pub struct Common {
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn out_dir(global: &Path, cfg: &RunConfig) -> Result<OutDir> {
    OutDir::create(cfg.out.as_deref().unwrap_or(global))
}

fn degree(flag: Option<usize>, cfg: &RunConfig, default: usize) -> Result<usize> {
    check_degree(flag.or(cfg.degree).unwrap_or(default))
}

fn report(out: &OutDir) {
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub class_tolerance: Option<f64>,
}

pub fn classify(args: &ClassifyArgs) -> Result<String> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let phi = symbol(args.phi.as_deref(), cfg.phi.as_ref(), "phi")?;
    let d = ClassifyOptions::default();
    let opts = ClassifyOptions {
        max_iter: args.max_iter.or(cfg.max_iter).unwrap_or(d.max_iter),
        tolerance: check_positive("tolerance", args.tolerance.or(cfg.tolerance).unwrap_or(d.tolerance))?,
        class_tolerance: check_positive(
            "class-tolerance",
            args.class_tolerance.or(cfg.class_tolerance).unwrap_or(d.class_tolerance),
        )?,
    };
    let r = classify_with(&phi, &opts)?;
    Ok(serde_json::to_string_pretty(&r)?)
}

#[derive(Args, Debug)]
pub struct UciArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Rows in the empirical sup table.
    #[arg(long)]
    pub nmax: Option<usize>,
}

pub fn uci(args: &UciArgs, out_root: &Path) -> Result<String> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let phi = symbol(args.phi.as_deref(), cfg.phi.as_ref(), "phi")?;
    let n_max = args.nmax.or(cfg.n_max).unwrap_or(UciOptions::default().n_max);
    if n_max == 0 {
        bail!("--nmax must be at least 1");
    }
    let cert = uci_certify_with(&phi, &UciOptions { n_max, ..UciOptions::default() })?;
    let mut out = out_dir(out_root, &cfg)?;
    out.text("uci_certificate.json", &cert.to_json())?;
    out.with("uci_sups.csv", |w| Ok(cert.write_csv(w)?))?;
    report(&out);
    Ok(format!("{:?} via {:?}: {}", cert.verdict, cert.mechanism, cert.rate_formula))
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// circle:<factor>[,count] | box:re0,re1,im0,im1,nx,ny | points:z1;z2;...
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Also write the dense matrix in binary form.
    #[arg(long)]
    pub matrix: bool,
}

pub fn spectrum(args: &SpectrumArgs, out_root: &Path) -> Result<String> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let psi = symbol(args.psi.as_deref(), cfg.psi.as_ref(), "psi")?;
    let phi = symbol(args.phi.as_deref(), cfg.phi.as_ref(), "phi")?;
    let n = degree(args.degree, &cfg, DEFAULT_DEGREE)?;
    let grid = parse_grid(args.grid.as_deref().or(cfg.grid.as_deref()).unwrap_or("circle:1.2"))?;
    let model = predict(&psi, &phi)?;
    let m = wco_matrix(&psi, &phi, n)?;
    let dense = dense_spectrum(&m.entries)?;
    let radius = match (model.kind, model.radius) {
        (SpectrumKind::ScaledDisk, Some(r)) => r * model.scale.norm(),
        (SpectrumKind::Segment, _) => model.scale.norm(),
        _ => dense.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
    };
    if matches!(grid, GridArg::Circle { .. }) && !(radius > 0.0) {
        bail!("circle grid needs a positive reference radius");
    }
    let ps = pseudospectrum(&psi, &phi, &grid.points(radius), n)?;
    let mut out = out_dir(out_root, &cfg)?;
    out.text("spectrum_model.json", &model.to_json())?;
    out.text("pseudospectrum.json", &serde_json::to_string_pretty(&ps)?)?;
    out.with("pseudospectrum.csv", |w| Ok(ps.write_csv(w)?))?;
    out.with("matrix_eigenvalues.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["re", "im", "backward_error"])?;
        for (v, e) in dense.values.iter().zip(&dense.backward_errors) {
            wr.write_record([v.re.to_string(), v.im.to_string(), e.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    if args.matrix {
        out.with("wco_matrix.bin", |w| Ok(m.write_binary(w)?))?;
    }
    report(&out);
    let smin = ps.s_min().into_iter().fold(f64::INFINITY, f64::min);
    Ok(format!("{:?} spectrum, reference radius {radius:.6}, grid min s_min {smin:.3e}", model.kind))
}

#[derive(Args, Debug)]
pub struct EigenArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// Series truncation M.
    #[arg(long)]
    pub terms: Option<usize>,
    /// Powers k for which (1-z)^k lifts the eigenpair.
    #[arg(long, value_delimiter = ',')]
    pub lift: Vec<usize>,
}

pub fn eigen(args: &EigenArgs, out_root: &Path) -> Result<String> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let psi = symbol(args.psi.as_deref(), cfg.psi.as_ref(), "psi")?;
    let phi = symbol(args.phi.as_deref(), cfg.phi.as_ref(), "phi")?;
    let n = degree(args.degree, &cfg, DEFAULT_DEGREE)?;
    let terms = args.terms.or(cfg.terms).unwrap_or(DEFAULT_TERMS);
    let lifts = if args.lift.is_empty() { cfg.lift.clone().unwrap_or_default() } else { args.lift.clone() };
    let cert = eigenfunction_series(&psi, &phi, terms, n)?;
    let mut out = out_dir(out_root, &cfg)?;
    out.text("eigen_certificate.json", &cert.to_json())?;
    out.with("eigen_coefficients.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "re", "im"])?;
        for (k, v) in cert.coefficients.coeffs.iter().enumerate() {
            wr.write_record([k.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    let mut lines = vec![format!("eigenvalue {:.12} residual {:.3e}", cert.eigenvalue, cert.residual)];
    if cert.accepted {
        let s = cert.multiplier;
        for &k in &lifts {
            let lam = Complex64::new(s.powi(k as i32), 0.0);
            let lifted = lift_eigenpair(&cert, &one_minus_z_power(k), lam, &psi, &phi, n)?;
            out.text(&format!("eigen_lift_{k}.json"), &lifted.to_json())?;
            lines.push(format!("lift k={k}: eigenvalue {:.12} residual {:.3e}", lifted.eigenvalue, lifted.residual));
        }
    }
    report(&out);
    if !cert.accepted {
        return Err(Rejected(format!("residual {:.3e} above tolerance {:.1e}", cert.residual, cert.tolerance)).into());
    }
    Ok(lines.join("\n"))
}

#[derive(Args, Debug)]
pub struct NormalityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long)]
    pub degree: Option<usize>,
}

pub fn normality(args: &NormalityArgs, out_root: &Path) -> Result<String> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let psi = symbol(args.psi.as_deref(), cfg.psi.as_ref(), "psi")?;
    let phi = symbol(args.phi.as_deref(), cfg.phi.as_ref(), "phi")?;
    let n = degree(args.degree, &cfg, 64)?;
    let r = hyponormal_probe(&psi, &phi, n)?;
    let mut out = out_dir(out_root, &cfg)?;
    out.text("normality_report.json", &r.to_json())?;
    if let Some(g) = &r.orthogonality_table {
        out.with("normality_gram.csv", |w| Ok(g.write_csv(w)?))?;
    }
    if let Some(t) = &r.inprod_table {
        out.with("normality_inprod.csv", |w| Ok(t.write_csv(w)?))?;
    }
    report(&out);
    Ok(format!("{:?}: commutator min eigenvalue {:.4e}, delta {:.4e}", r.verdict, r.commutator_min_eig, r.delta))
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Seed for the random-matrix criterion.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn reproduce(args: &ReproduceArgs, out_root: &Path) -> Result<String> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let seed = args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let first = run_criteria(seed);
    let second = run_criteria(seed);
    let same = fingerprint(&first) == fingerprint(&second);
    let mut rows: Vec<CriterionRow> = first.iter().map(|o| o.row.clone()).collect();
    rows.push(CriterionRow {
        id: 12,
        name: "determinism".into(),
        pass: same,
        detail: format!("two in-process runs with seed {seed} serialize identically: {same}"),
    });
    let text = table(&rows);
    let mut out = out_dir(out_root, &cfg)?;
    for o in &first {
        for (name, bytes) in &o.artifacts {
            out.bytes(name, bytes).with_context(|| format!("writing {name}"))?;
        }
    }
    out.text("reproduce.json", &serde_json::to_string_pretty(&rows)?)?;
    out.text("reproduce_table.txt", &text)?;
    report(&out);
    Ok(text.trim_end().to_string())
}
