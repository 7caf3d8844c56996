use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stadium_core::eigensolve::{bouncing_ball_window, lowest, solve_window, SpectralWindow};
use stadium_core::fields::{CutoffSpec, FieldKind, VectorFieldSpec};
use stadium_core::observables::{observe, ObservableReport, ObserveParams, TraceMethod};
use stadium_core::quasimode::{explicit_quasimode, ModeField, Profile, QuasimodeSpec};
use stadium_core::verify::{rellich_residual, RellichReport};
use stadium_core::Domain;
use stadium_lab::acceptance::{acceptance, AcceptConfig, Status};
use stadium_lab::config::{output_override, StudyConfig, OUT_ENV};
use stadium_lab::records::{load_mode, read_record, save_mode, MeshSpec, ModeRecord};
use stadium_lab::study::{run_study, summary};

#[derive(Parser)]
#[command(name = "stadium-lab", version, about = "Eigenfunction and quasimode experiments on the stadium billiard")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainKind {
    Stadium,
    Rectangle,
    Disk,
}

#[derive(Args, Clone)]
struct MeshArgs {
    /// JSON study config; its domain, h and refinements are the defaults
    /// for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    domain: Option<DomainKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    refinements: Option<u32>,
    /// Output directory (overridden by the environment variable).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl MeshArgs {
    fn base(&self) -> anyhow::Result<StudyConfig> {
        match &self.config {
            Some(p) => StudyConfig::load(p),
            None => Ok(StudyConfig::default()),
        }
    }

    fn spec(&self) -> anyhow::Result<MeshSpec> {
        let base = self.base()?;
        let alpha = self.alpha.unwrap_or(base.domain.alpha());
        let beta = self.beta.unwrap_or(base.domain.beta());
        let domain = match self.domain {
            None => match base.domain {
                Domain::Stadium { .. } => Domain::Stadium { alpha, beta },
                Domain::Rectangle { .. } => Domain::Rectangle { alpha, beta },
                Domain::Disk { .. } => Domain::Disk { beta },
            },
            Some(DomainKind::Stadium) => Domain::Stadium { alpha, beta },
            Some(DomainKind::Rectangle) => Domain::Rectangle { alpha, beta },
            Some(DomainKind::Disk) => Domain::Disk { beta },
        };
        Ok(MeshSpec {
            domain,
            h: self.h.unwrap_or(base.h),
            refinements: self.refinements.unwrap_or(base.refinements),
        })
    }

    fn out_dir(&self, default: &str) -> anyhow::Result<PathBuf> {
        if let Some(p) = output_override() {
            return Ok(p);
        }
        if let Some(p) = &self.out {
            return Ok(p.clone());
        }
        if self.config.is_some() {
            return Ok(self.base()?.output_dir);
        }
        Ok(PathBuf::from(default))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a mesh and write it in the plain-text format.
    Mesh {
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Solve for eigenpairs in a spectral window, or the lowest few.
    Solve {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, requires = "window_halfwidth", conflicts_with = "bouncing_ball")]
        window_center: Option<f64>,
        #[arg(long)]
        window_halfwidth: Option<f64>,
        /// Window centred on ((n + 1/2)π/β)²; needs --window-halfwidth.
        #[arg(long, requires = "window_halfwidth")]
        bouncing_ball: Option<u32>,
        /// Maximum number of eigenpairs (the lowest ones when no window is given).
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Build the explicit quasimode φ(x)cos((n + 1/2)πy/β).
    Quasimode {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        n: u32,
        /// Support [γ, δ] of the profile.
        #[arg(long, num_args = 2, value_names = ["GAMMA", "DELTA"], allow_negative_numbers = true)]
        support: Option<Vec<f64>>,
        #[arg(long, default_value = "sin4")]
        profile: String,
    },
    /// Observables for mode records, as CSV.
    Observe {
        #[arg(long = "mode", required = true)]
        modes: Vec<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Strip [γ₁, γ₂]; defaults to [-α/2, α/2].
        #[arg(long, num_args = 2, value_names = ["GAMMA1", "GAMMA2"], allow_negative_numbers = true)]
        strip: Option<Vec<f64>>,
        #[arg(long)]
        raw_trace: bool,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rellich identity terms for mode records, as CSV.
    VerifyIdentity {
        #[arg(long, value_parser = parse_field)]
        field: Vec<FieldKind>,
        #[arg(long = "mode", required = true)]
        modes: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a study: solve, observe and verify every window of a config.
    Study {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        refinements: Option<u32>,
        #[arg(long, num_args = 2, value_names = ["N_MIN", "N_MAX"])]
        n_range: Option<Vec<u32>>,
        #[arg(long)]
        halfwidth: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the resolved config and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Run the acceptance criteria and write a JSON manifest.
    Accept {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Criterion ids to run (all by default).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
        #[arg(long)]
        stadium_mesh: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_field(s: &str) -> Result<FieldKind, String> {
    FieldKind::from_name(s).ok_or_else(|| format!("unknown field {s:?}; expected xdx, radial, cutoffx or wingy"))
}

fn write_or_print(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_mesh(args: &MeshArgs) -> anyhow::Result<()> {
    let spec = args.spec()?;
    let mesh = stadium_core::TriMesh::build_refined(spec.domain, spec.h, spec.refinements)?;
    let dir = args.out_dir("out")?;
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("mesh.txt");
    std::fs::write(&path, mesh.to_text()).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{} vertices, {} triangles, {} boundary edges, h = {:e}, min angle {:.1}° -> {}",
        mesh.num_vertices(),
        mesh.triangles.len(),
        mesh.boundary_edges.len(),
        mesh.h,
        mesh.min_angle_deg(),
        path.display()
    );
    Ok(())
}

fn cmd_solve(
    args: &MeshArgs,
    center: Option<f64>,
    halfwidth: Option<f64>,
    bouncing_ball: Option<u32>,
    count: usize,
) -> anyhow::Result<()> {
    let spec = args.spec()?;
    let (_, op) = spec.build()?;
    let window = match (center, bouncing_ball, halfwidth) {
        (Some(c), None, Some(hw)) => Some(SpectralWindow::new(c, hw)?),
        (None, Some(n), Some(hw)) => Some(bouncing_ball_window(n, spec.domain.beta(), hw)?),
        (None, None, _) => None,
        _ => bail!("give either --window-center or --bouncing-ball, each with --window-halfwidth"),
    };
    let pairs = match window {
        Some(w) => solve_window(&op, w, count)?,
        None => lowest(&op, count)?,
    };
    let dir = args.out_dir("out/solve")?;
    for (i, p) in pairs.iter().enumerate() {
        let mode = ModeField::from_eigenpair(&op, p)?;
        let stem = format!("mode_{i:03}");
        let rec = ModeRecord::from_mode(spec, &mode, format!("{stem}.vec")).with_eigenpair(p);
        let path = save_mode(&dir, &stem, &rec, &mode)?;
        println!("{:e} {:e} {:e} {}", p.lambda, p.lambdasq, p.residual_bound, path.display());
    }
    eprintln!("{} eigenpairs written to {}", pairs.len(), dir.display());
    Ok(())
}

fn cmd_quasimode(args: &MeshArgs, n: u32, support: Option<Vec<f64>>, profile: &str) -> anyhow::Result<()> {
    let spec = args.spec()?;
    let alpha = spec.domain.alpha();
    let (gamma, delta) = match support.as_deref() {
        Some([g, d]) => (*g, *d),
        Some(_) => bail!("--support takes two values"),
        None => (-0.5 * alpha, 0.5 * alpha),
    };
    let profile = Profile::from_name(profile).with_context(|| format!("unknown profile {profile:?}"))?;
    let q = QuasimodeSpec::new(n, gamma, delta, profile);
    let (mesh, op) = spec.build()?;
    let mode = explicit_quasimode(&q, &mesh, &op)?;
    let dir = args.out_dir("out/quasimode")?;
    let stem = format!("quasimode_n{n}");
    let mut rec = ModeRecord::from_mode(spec, &mode, format!("{stem}.vec"));
    rec.quasimode = Some(q);
    let path = save_mode(&dir, &stem, &rec, &mode)?;
    println!(
        "lambda {:e}, |f|/|u| discrete {:e}, analytic {:e} -> {}",
        mode.lambda,
        mode.f_norm,
        q.analytic_ratio(),
        path.display()
    );
    Ok(())
}

/// Groups records by mesh so each mesh is built once.
fn for_each_mode(
    paths: &[PathBuf],
    mut f: impl FnMut(&stadium_core::TriMesh, &stadium_core::operators::OperatorPair, &ModeField) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    let mut cached: Option<(MeshSpec, stadium_core::TriMesh, stadium_core::operators::OperatorPair)> = None;
    for p in paths {
        let rec = read_record(p)?;
        if cached.as_ref().map(|c| c.0) != Some(rec.mesh) {
            let (mesh, op) = rec.mesh.build()?;
            cached = Some((rec.mesh, mesh, op));
        }
        let (_, mesh, op) = cached.as_ref().unwrap();
        let (_, mode) = load_mode(p, op)?;
        f(mesh, op, &mode)?;
    }
    Ok(())
}

fn cmd_observe(paths: &[PathBuf], delta: f64, strip: Option<Vec<f64>>, raw: bool, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = ObservableReport::csv_header() + "\n";
    for_each_mode(paths, |mesh, op, mode| {
        let mut params = ObserveParams::for_alpha(mesh.domain.alpha());
        params.delta = delta;
        if let Some([g1, g2]) = strip.as_deref() {
            params.gamma1 = *g1;
            params.gamma2 = *g2;
        }
        if raw {
            params.trace = TraceMethod::Raw;
        }
        text.push_str(&observe(mesh, op, mode, &params)?.csv_row());
        text.push('\n');
        Ok(())
    })?;
    write_or_print(out, &text)
}

fn cmd_verify(fields: &[FieldKind], paths: &[PathBuf], out: Option<&Path>) -> anyhow::Result<()> {
    let fields = if fields.is_empty() { FieldKind::ALL.to_vec() } else { fields.to_vec() };
    let mut text = format!("mode,{}\n", RellichReport::CSV_HEADER);
    let mut i = 0;
    for_each_mode(paths, |mesh, op, mode| {
        for kind in &fields {
            let field = VectorFieldSpec::new(*kind, mesh.domain.alpha(), mesh.domain.beta(), mode.lambda)
                .with_cutoffs(CutoffSpec::default());
            let r = rellich_residual(mesh, op, mode, &field)?;
            text.push_str(&format!("{},{}\n", paths[i].display(), r.csv_row()));
        }
        i += 1;
        Ok(())
    })?;
    write_or_print(out, &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_study(
    config: Option<&Path>,
    h: Option<f64>,
    refinements: Option<u32>,
    n_range: Option<Vec<u32>>,
    halfwidth: Option<f64>,
    delta: Option<f64>,
    out: Option<PathBuf>,
    print_config: bool,
) -> anyhow::Result<()> {
    let mut cfg = match config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::default(),
    };
    if let Some(h) = h {
        cfg.h = h;
    }
    if let Some(r) = refinements {
        cfg.refinements = r;
    }
    if let Some(bb) = cfg.bouncing_ball.as_mut() {
        if let Some([lo, hi]) = n_range.as_deref() {
            bb.n_min = *lo;
            bb.n_max = *hi;
        }
        if let Some(hw) = halfwidth {
            bb.halfwidth = hw;
        }
    }
    if let Some(d) = delta {
        cfg.delta = d;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    cfg.validate()?;
    if print_config {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    let out = run_study(&cfg)?;
    println!("{}", summary(&out));
    Ok(())
}

fn cmd_accept(config: Option<&Path>, criteria: Vec<u32>, stadium_mesh: Option<PathBuf>, out: Option<PathBuf>) -> anyhow::Result<()> {
    let mut cfg = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<AcceptConfig>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => AcceptConfig::default(),
    };
    if !criteria.is_empty() {
        cfg.criteria = criteria;
    }
    if stadium_mesh.is_some() {
        cfg.stadium_mesh = stadium_mesh;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    let (manifest, path) = acceptance(&cfg)?;
    for c in &manifest.criteria {
        println!("{}", c.line());
    }
    let failed = manifest.criteria.iter().filter(|c| c.status == Status::Fail).count();
    println!("{} passed, {failed} failed, {} not run -> {}", manifest.passed, manifest.not_run, path.display());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Mesh { mesh } => cmd_mesh(&mesh),
        Command::Solve { mesh, window_center, window_halfwidth, bouncing_ball, count } => {
            cmd_solve(&mesh, window_center, window_halfwidth, bouncing_ball, count)
        }
        Command::Quasimode { mesh, n, support, profile } => cmd_quasimode(&mesh, n, support, &profile),
        Command::Observe { modes, delta, strip, raw_trace, out } => cmd_observe(&modes, delta, strip, raw_trace, out.as_deref()),
        Command::VerifyIdentity { field, modes, out } => cmd_verify(&field, &modes, out.as_deref()),
        Command::Study { config, h, refinements, n_range, halfwidth, delta, out, print_config } => {
            cmd_study(config.as_deref(), h, refinements, n_range, halfwidth, delta, out, print_config)
        }
        Command::Accept { config, criteria, stadium_mesh, out } => cmd_accept(config.as_deref(), criteria, stadium_mesh, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if output_override().is_some() {
                eprintln!("(output directory taken from {OUT_ENV})");
            }
            ExitCode::FAILURE
        }
    }
}
