//! `frcot`: command-line front end for the fractional eigenvalue toolkit.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use frcot::capacity::{capacity, CapacityOptions, ChordBound};
use frcot::config::Config;
use frcot::fatness::{fatness_certificate, fatness_certificate_with};
use frcot::gagliardo::{FractionalOrder, GridOperator};
use frcot::geometry::{inradius, topology_order};
use frcot::{ConstantsTable, Point, RasterDomain};
use frcot::pipeline::{
    build_family, lower_bound_certificate, s_half_sweep, verify_main_theorem, CertificateOptions,
    FamilyKind, FamilySpec, SHalfOptions, Verdict, VerifyOptions,
};
use frcot::report::{svg_plot, Series, Table};
use frcot::spectral::{bbm_sweep, domain_eigenvalue, k_sweep, EigOptions};

#[derive(Parser)]
#[command(name = "frcot", version, about = "Fractional Dirichlet eigenvalues, capacities and lower-bound certificates")]
struct Cli {
    /// `key=value` settings (A_dir, M_pw, phi22, radius_ratio, capacity_path, chord, eig_tol, ...).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write SVG plots of sweep tables.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect raster domains.
    #[command(subcommand)]
    Domain(DomainCmd),
    /// First Dirichlet eigenvalue of a raster domain.
    Eig(EigArgs),
    /// Capacity of a node set relative to the domain.
    Cap(CapArgs),
    /// Fatness certificate of one tile.
    Fatness(FatnessArgs),
    /// Lower-bound certificate.
    Bound(BoundArgs),
    /// Lower bound against the discrete eigenvalue and trial upper bounds.
    Verify(VerifyArgs),
    /// Parameter sweeps.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Table of explicit and estimated constants.
    Constants(ConstantsArgs),
}

#[derive(Subcommand)]
enum DomainCmd {
    /// Rasterise a named family member into an frgeo file.
    Build(BuildArgs),
    /// Size, inradius and topological order.
    Info(DomainArg),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Disk,
    Square,
    Annulus,
    ShellSlug,
    Comb,
    Random,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Node spacing.
    #[arg(long)]
    h: f64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    #[arg(long, default_value_t = 0.5)]
    inner: f64,
    #[arg(long, default_value_t = 1.0)]
    outer: f64,
    #[arg(long, default_value_t = 8.0)]
    half_width: f64,
    #[arg(long)]
    half_height: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    count: usize,
    /// Output file name inside `--out` (default `<family>.frgeo`).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct DomainArg {
    /// frgeo file.
    #[arg(long)]
    domain: PathBuf,
}

#[derive(Args)]
struct EigArgs {
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Remove the puncture nodes from the unknowns.
    #[arg(long)]
    remove_punctures: bool,
}

#[derive(Args)]
struct CapArgs {
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long)]
    s: f64,
    /// Closed rectangle `x0,x1,y0,y1`; inside nodes in it form Σ.
    #[arg(long, value_delimiter = ',', required = true)]
    sigma: Vec<f64>,
}

#[derive(Args)]
struct FatnessArgs {
    #[command(flatten)]
    domain: DomainArg,
    /// Tile centre `x,y` (default: the origin).
    #[arg(long, value_delimiter = ',')]
    center: Option<Vec<f64>>,
    /// Override the measured order.
    #[arg(long)]
    k: Option<usize>,
    /// Override the measured inradius.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long)]
    s: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    domain: DomainArg,
    /// Orders to check.
    #[arg(long, value_delimiter = ',', required = true)]
    s: Vec<f64>,
}

#[derive(Subcommand)]
enum SweepCmd {
    /// `k^s λ` over the shell-and-slug family.
    K {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 5, 10, 17, 26])]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 0.75)]
        s: f64,
        #[arg(long, default_value_t = 0.125)]
        h: f64,
    },
    /// Funnel upper bounds on the punctured comb as `s → 1/2`.
    S {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.55, 0.6, 0.65])]
        s: Vec<f64>,
        /// Skip the discrete eigenvalues of the window.
        #[arg(long)]
        no_discrete: bool,
    },
    /// `(1 - s) λ` on the unit square as `s → 1`.
    Bbm {
        /// Nodes per unit length.
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.9, 0.95])]
        s: Vec<f64>,
        /// Richardson extrapolation against the grid of half the resolution.
        #[arg(long)]
        richardson: bool,
    },
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.55, 0.6, 0.75, 0.9, 0.95])]
    s: Vec<f64>,
    /// Skip corpus estimation of the inexplicit constants.
    #[arg(long)]
    explicit_only: bool,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

struct Ctx {
    cfg: Config,
    out: PathBuf,
    format: Format,
    plot: bool,
}

impl Ctx {
    fn write(&self, name: &str, body: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let p = self.out.join(name);
        std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    /// Writes `table` as `<stem>.csv` or `<stem>.json` and echoes it.
    fn emit(&self, stem: &str, table: &Table) -> Result<()> {
        let (name, body) = match self.format {
            Format::Csv => (format!("{stem}.csv"), table.to_csv()),
            Format::Json => (format!("{stem}.json"), serde_json::to_string_pretty(&table.to_json())?),
        };
        say(&body);
        if self.format == Format::Json {
            say("\n");
        }
        let p = self.write(&name, &body)?;
        eprintln!("wrote {}", p.display());
        Ok(())
    }

    fn emit_json(&self, name: &str, value: &impl serde::Serialize) -> Result<()> {
        let body = serde_json::to_string_pretty(value)?;
        say(&body);
        say("\n");
        let p = self.write(name, &body)?;
        eprintln!("wrote {}", p.display());
        Ok(())
    }

    fn plot(&self, name: &str, title: &str, xl: &str, yl: &str, series: &[Series]) -> Result<()> {
        if self.plot {
            let p = self.write(name, &svg_plot(title, xl, yl, series))?;
            eprintln!("wrote {}", p.display());
        }
        Ok(())
    }

    fn eig_options(&self) -> Result<EigOptions> {
        let d = EigOptions::default();
        Ok(EigOptions {
            tol: self.cfg.get_or("eig_tol", d.tol)?,
            max_outer: self.cfg.get_or("eig_max_outer", d.max_outer)?,
            max_cg: self.cfg.get_or("eig_max_cg", d.max_cg)?,
            dense_limit: self.cfg.get_or("dense_limit", d.dense_limit)?,
        })
    }

    fn capacity_options(&self) -> Result<CapacityOptions> {
        let d = CapacityOptions::default();
        Ok(CapacityOptions { tol: self.cfg.get_or("capacity_tol", d.tol)?, ..d })
    }

    fn certificate_options(&self) -> Result<CertificateOptions> {
        let d = CertificateOptions::default();
        let chord = match self.cfg.get("chord") {
            None => d.chord,
            Some("stated") => ChordBound::Stated,
            Some("diameter") => ChordBound::Diameter,
            Some(o) => bail!("chord: expected `stated` or `diameter`, got `{o}`"),
        };
        Ok(CertificateOptions {
            path: self.cfg.get_or("capacity_path", d.path)?,
            chord,
            radius_ratio: self.cfg.get_or("radius_ratio", d.radius_ratio)?,
            capacity: self.capacity_options()?,
            qp_max_unknowns: self.cfg.get_or("qp_max_unknowns", d.qp_max_unknowns)?,
        })
    }

    fn constants(&self, s_list: &[f64]) -> Result<ConstantsTable> {
        let tol = self.cfg.get_or("constants_tol", 1e-10)?;
        Ok(ConstantsTable::standard(s_list, tol, self.cfg.entries())?)
    }
}

fn load(path: &Path) -> Result<RasterDomain> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let dom = RasterDomain::from_text(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(dom)
}

/// Prints to stdout; a closed pipe is not an error.
fn say(body: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(body.as_bytes()).and_then(|_| out.flush());
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn domain_build(ctx: &Ctx, a: &BuildArgs) -> Result<()> {
    let need_k = || a.k.context("--k is required for this family");
    let (kind, stem) = match a.family {
        Family::Disk => (FamilyKind::Disk { radius: a.radius }, "disk".to_string()),
        Family::Square => (FamilyKind::Square { side: a.side }, "square".to_string()),
        Family::Annulus => (FamilyKind::Annulus { inner: a.inner, outer: a.outer }, "annulus".to_string()),
        Family::ShellSlug => {
            let k = need_k()?;
            (FamilyKind::ShellSlug { k }, format!("shell_slug_{k}"))
        }
        Family::Comb => {
            let k = need_k()?;
            (FamilyKind::CombWindow { k, half_width: a.half_width, half_height: a.half_height }, format!("comb_{k}"))
        }
        Family::Random => {
            (FamilyKind::RandomPerforated { seed: a.seed, count: a.count, side: a.side }, format!("random_{}", a.seed))
        }
    };
    let dom = build_family::<f64>(&FamilySpec::new(kind, a.h))?;
    let name = a.name.clone().unwrap_or_else(|| format!("{stem}.frgeo"));
    let p = ctx.write(&name, &dom.to_text())?;
    say(&format!("{}\n", p.display()));
    Ok(())
}

fn domain_info(ctx: &Ctx, a: &DomainArg) -> Result<()> {
    let dom = load(&a.domain)?;
    let topo = topology_order(&dom);
    let r = inradius(&dom)?;
    let mut t = Table::new(["label", "nx", "ny", "h", "inside", "punctures", "k", "inradius"]);
    t.push([
        dom.label.clone(),
        dom.nx.to_string(),
        dom.ny.to_string(),
        fmt(dom.h),
        dom.count_inside().to_string(),
        dom.punctures.len().to_string(),
        topo.k.to_string(),
        fmt(r),
    ]);
    ctx.emit("domain_info", &t)
}

fn eig(ctx: &Ctx, a: &EigArgs) -> Result<()> {
    let dom = load(&a.domain.domain)?;
    let opts = EigOptions { tol: a.tol, ..ctx.eig_options()? };
    let res = domain_eigenvalue(&dom, FractionalOrder::new(a.s)?, a.remove_punctures, &opts)?;
    let mut t = Table::new(["s", "lambda", "residual", "iterations", "unknowns"]);
    t.push([fmt(a.s), fmt(res.lambda), fmt(res.residual), res.iterations.to_string(), res.unknowns.to_string()]);
    ctx.emit("eig", &t)
}

fn cap(ctx: &Ctx, a: &CapArgs) -> Result<()> {
    let dom = load(&a.domain.domain)?;
    let [x0, x1, y0, y1] = a.sigma[..] else { bail!("--sigma needs x0,x1,y0,y1") };
    let omega = dom.active_mask(false);
    let mut sigma = vec![false; omega.len()];
    for (idx, &inside) in omega.iter().enumerate() {
        let (i, j) = dom.coords(idx);
        let p = dom.node_point(i, j);
        sigma[idx] = inside && p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
    if !sigma.iter().any(|&b| b) {
        bail!("Σ contains no inside node");
    }
    let op = GridOperator::for_domain(&dom, FractionalOrder::new(a.s)?);
    let res = capacity(op, &sigma, &omega, &ctx.capacity_options()?)?;
    let v = serde_json::json!({
        "s": a.s,
        "value": res.value,
        "kkt_residual": res.kkt_residual,
        "active_set_size": res.active_set.len(),
        "sigma_nodes": sigma.iter().filter(|&&b| b).count(),
        "iterations": res.iterations,
    });
    ctx.emit_json("cap.json", &v)
}

fn fatness(ctx: &Ctx, a: &FatnessArgs) -> Result<()> {
    let dom = load(&a.domain.domain)?;
    let c = match a.center.as_deref() {
        None => Point::new(0.0, 0.0),
        Some(&[x, y]) => Point::new(x, y),
        Some(_) => bail!("--center needs x,y"),
    };
    let cert = match (a.k, a.r) {
        (None, None) => fatness_certificate(&dom, c)?,
        (k, r) => {
            let k = match k {
                Some(k) => k,
                None => topology_order(&dom).k,
            };
            let r = match r {
                Some(r) => r,
                None => inradius(&dom)?,
            };
            fatness_certificate_with(&dom, c, k, r)?
        }
    };
    let body = cert.to_json()?;
    say(&body);
    say("\n");
    let p = ctx.write("fatness.json", &body)?;
    eprintln!("wrote {}", p.display());
    let p = ctx.write("fatness.svg", &cert.to_svg(&dom))?;
    eprintln!("wrote {}", p.display());
    if !cert.holds() {
        eprintln!("projection bound missed on this raster");
    }
    Ok(())
}

fn bound(ctx: &Ctx, a: &BoundArgs) -> Result<()> {
    let dom = load(&a.domain.domain)?;
    let table = ctx.constants(&[a.s])?;
    let cert = lower_bound_certificate(&dom, a.s, &table, &ctx.certificate_options()?)?.without_fatness();
    if cert.heuristic {
        eprintln!("HEURISTIC: some constants are corpus estimates, not proven values");
    }
    ctx.emit_json("bound.json", &cert)
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> Result<bool> {
    let dom = load(&a.domain.domain)?;
    let table = ctx.constants(&a.s)?;
    let opts = VerifyOptions {
        eig: ctx.eig_options()?,
        certificate: ctx.certificate_options()?,
        ..VerifyOptions::default()
    };
    let mut t = Table::new([
        "label", "s", "k", "r_omega", "lower_pipeline", "lower_closed_form", "eig", "upper", "eig_le_upper", "heuristic",
        "verdict",
    ]);
    let mut pass = true;
    for &s in &a.s {
        let r = verify_main_theorem(&dom, s, &table, &opts)?;
        pass &= r.verdict == Verdict::Pass;
        t.push([
            r.label.clone(),
            fmt(s),
            r.k.to_string(),
            fmt(r.r_omega),
            fmt(r.lower_pipeline),
            fmt(r.lower_closed_form),
            fmt(r.eig),
            opt(r.upper),
            r.eig_le_upper.to_string(),
            r.heuristic.to_string(),
            if r.verdict == Verdict::Pass { "PASS" } else { "FAIL" }.to_string(),
        ]);
    }
    if table.heuristic() {
        eprintln!("HEURISTIC: some constants are corpus estimates, not proven values");
    }
    ctx.emit("verify", &t)?;
    Ok(pass)
}

fn sweep(ctx: &Ctx, cmd: &SweepCmd) -> Result<()> {
    let eig = ctx.eig_options()?;
    match cmd {
        SweepCmd::K { ks, s, h } => {
            let sw = k_sweep(|k| build_family::<f64>(&FamilySpec::new(FamilyKind::ShellSlug { k }, *h)), ks, *s, &eig)?;
            let mut t = Table::new(["k", "lambda", "k_s_lambda", "unknowns"]);
            for r in &sw.rows {
                t.push([r.k.to_string(), fmt(r.lambda), fmt(r.scaled), r.unknowns.to_string()]);
            }
            eprintln!("spread (max/min of k^s lambda): {:.4}", sw.spread);
            ctx.emit("sweep_k", &t)?;
            let pts = sw.rows.iter().map(|r| (r.k as f64, r.scaled)).collect();
            ctx.plot("sweep_k.svg", "k^s λ over the shell-and-slug family", "k", "k^s λ", &[Series { name: format!("s = {s}"), points: pts }])
        }
        SweepCmd::S { k, s, no_discrete } => {
            let opts = SHalfOptions { discrete: !no_discrete, eig, ..SHalfOptions::default() };
            let sw = s_half_sweep::<f64>(*k, s, &opts)?;
            let mut t = Table::new(["s", "eps", "n", "upper", "ratio", "window_half_height", "eig", "eig_ratio"]);
            for r in &sw.rows {
                if let Some(w) = &r.warning {
                    eprintln!("warning: s = {}: {w}", r.s);
                }
                t.push([
                    fmt(r.s),
                    fmt(r.eps),
                    r.n.to_string(),
                    fmt(r.upper),
                    fmt(r.ratio),
                    fmt(r.window_half_height),
                    opt(r.eig),
                    opt(r.eig_ratio),
                ]);
            }
            eprintln!("spread (max/min of upper/(2s-1)): {:.4}, max {:.6e}", sw.spread, sw.max_ratio);
            ctx.emit("sweep_s", &t)?;
            let mut series = vec![Series { name: "upper/(2s-1)".into(), points: sw.rows.iter().map(|r| (r.s, r.ratio)).collect() }];
            if !no_discrete {
                series.push(Series {
                    name: "eig/(2s-1)".into(),
                    points: sw.rows.iter().filter_map(|r| r.eig_ratio.map(|v| (r.s, v))).collect(),
                });
            }
            ctx.plot("sweep_s.svg", "punctured comb as s → 1/2", "s", "λ/(2s-1)", &series)
        }
        SweepCmd::Bbm { n, s, richardson } => {
            let square = |n: usize| build_family::<f64>(&FamilySpec::new(FamilyKind::Square { side: 1.0 }, 1.0 / n as f64));
            let fine = square(*n)?;
            let coarse = if *richardson { Some(square(n / 2)?) } else { None };
            let rows = bbm_sweep(&fine, coarse.as_ref(), s, 1.0, &eig)?;
            let pi2 = std::f64::consts::PI.powi(2);
            let mut t = Table::new(["s", "lambda", "one_minus_s_lambda", "extrapolated", "over_pi2"]);
            for r in &rows {
                let best = r.extrapolated.unwrap_or(r.scaled);
                t.push([fmt(r.s), fmt(r.lambda), fmt(r.scaled), opt(r.extrapolated), fmt(best / pi2)]);
            }
            ctx.emit("sweep_bbm", &t)?;
            let pts = rows.iter().map(|r| (r.s, r.extrapolated.unwrap_or(r.scaled) / pi2)).collect();
            ctx.plot("sweep_bbm.svg", "(1-s)λ on the unit square", "s", "(1-s)λ / π²", &[Series { name: format!("n = {n}"), points: pts }])
        }
    }
}

fn constants(ctx: &Ctx, a: &ConstantsArgs) -> Result<()> {
    let table = if a.explicit_only {
        let mut t = ConstantsTable::explicit(&a.s, a.tol)?;
        t.apply_config(ctx.cfg.entries())?;
        t
    } else {
        let mut cfg = ctx.cfg.clone();
        cfg.set("constants_tol", a.tol);
        Ctx { cfg, out: ctx.out.clone(), format: ctx.format, plot: ctx.plot }.constants(&a.s)?
    };
    match ctx.format {
        Format::Csv => {
            let body = table.to_csv();
            say(&body);
            let p = ctx.write("constants.csv", &body)?;
            eprintln!("wrote {}", p.display());
        }
        Format::Json => ctx.emit_json("constants.json", &table)?,
    }
    if table.heuristic() {
        eprintln!("HEURISTIC: some constants are corpus estimates, not proven values");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(p) => Config::from_file(p).with_context(|| format!("reading config {}", p.display()))?,
        None => Config::default(),
    };
    let ctx = Ctx { cfg, out: cli.out, format: cli.format, plot: cli.plot };
    match &cli.cmd {
        Command::Domain(DomainCmd::Build(a)) => domain_build(&ctx, a)?,
        Command::Domain(DomainCmd::Info(a)) => domain_info(&ctx, a)?,
        Command::Eig(a) => eig(&ctx, a)?,
        Command::Cap(a) => cap(&ctx, a)?,
        Command::Fatness(a) => fatness(&ctx, a)?,
        Command::Bound(a) => bound(&ctx, a)?,
        Command::Verify(a) => return verify(&ctx, a),
        Command::Sweep(c) => sweep(&ctx, c)?,
        Command::Constants(a) => constants(&ctx, a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
