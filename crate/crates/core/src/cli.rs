//! Command-line front end. `run` parses arguments, executes one subcommand and
//! returns the process exit code: 0 on success, 1 on computation errors (with a
//! JSON error line on stderr), 2 on argument errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::{builtin_model, parse_model, PeriodicField, BUILTIN_MODELS};
use crate::foliation::{energy_interval, foliation_mesh, Direction, IntervalKind, Label, SurfaceAnalysis};
use crate::homology::all_cycle_bases;
use crate::mesh::{export_mesh, extract_isosurface, split_components, validate_mesh};
use crate::planar::{self, PlaneEmbedding, TraceOptions};
use crate::scan::{self, CellRule, DirectionGrid, ImageFormat};

#[derive(Parser, Debug)]
#[command(name = "qptopo", version, about = "Topology of level sets of quasiperiodic functions with three quasiperiods")]
struct Cli {
    /// Worker threads for scans (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect built-in models and model files.
    Model {
        #[command(subcommand)]
        action: ModelCmd,
    },
    /// Extract and report periodic level surfaces.
    Mesh {
        #[command(subcommand)]
        action: MeshCmd,
    },
    /// Homology of the level surface components.
    Homology {
        #[command(subcommand)]
        action: HomologyCmd,
    },
    /// Topological label of a rational direction.
    Label(LabelArgs),
    /// Level range with open sections for a rational direction.
    Interval(IntervalArgs),
    /// Trace one level curve in a plane.
    Trace(TraceArgs),
    /// Stability map over a window of the B_z = 1 chart.
    Scan(ScanArgs),
    /// Box dimension of the boundary set of a stored map.
    Dim(DimArgs),
    /// Render a stored map.
    Render(RenderArgs),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum ModelCmd {
    /// List built-in model names.
    List,
    /// Print the terms of a built-in model or model file.
    Show { model: String },
    /// Parse a model file and report its dimension and term count.
    Check { file: PathBuf },
}

#[derive(Args, Debug, Clone)]
struct SurfaceArgs {
    /// Built-in model name or path to a model file.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    level: f64,
    #[arg(long, default_value_t = 64)]
    res: usize,
}

#[derive(Subcommand, Debug)]
enum MeshCmd {
    /// Write the surface as OBJ.
    Extract {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        out: PathBuf,
        /// Unrolled copies of the cell along each axis, `a,b,c`.
        #[arg(long, default_value = "1,1,1")]
        copies: String,
    },
    /// Per-component Euler characteristic, genus and rank as CSV.
    Report {
        #[command(flatten)]
        surface: SurfaceArgs,
    },
}

#[derive(Subcommand, Debug)]
enum HomologyCmd {
    /// Canonical pairing and push-forward matrices per component, as CSV.
    Basis {
        #[command(flatten)]
        surface: SurfaceArgs,
    },
}

#[derive(Args, Debug)]
struct LabelArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Integer direction `a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    dir: String,
}

#[derive(Args, Debug)]
struct IntervalArgs {
    #[arg(long)]
    model: String,
    #[arg(long, allow_hyphen_values = true)]
    dir: String,
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long)]
    model: String,
    /// Plane normal `a,b,c` (3 quasiperiods).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["u", "v"])]
    normal: Option<String>,
    /// Explicit plane basis vectors, for 3 or 4 quasiperiods.
    #[arg(long, allow_hyphen_values = true, requires = "v")]
    u: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "u")]
    v: Option<String>,
    /// Plane offset (the sibling parameter).
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    level: f64,
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    start: String,
    #[arg(long, default_value_t = planar::DEFAULT_MAX_ARC)]
    max_arc: f64,
    #[arg(long, default_value_t = planar::MAX_STEP)]
    max_step: f64,
    #[arg(long)]
    reverse: bool,
    /// Orbit polyline as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Orbit drawing as SVG.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Cells per unit of the chart; the default window is the unit square.
    #[arg(long, default_value_t = 40)]
    grid: u64,
    /// Sub-window `i0,j0,nx,ny` in cell units.
    #[arg(long)]
    window: Option<String>,
    #[arg(long, default_value = "common_denominator")]
    rule: String,
    /// Reduced map: closed wherever the level carries no open section.
    #[arg(long)]
    reduced: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    png: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Pixels per cell in images.
    #[arg(long, default_value_t = 8)]
    scale: usize,
}

#[derive(Args, Debug)]
struct DimArgs {
    #[arg(long)]
    map: PathBuf,
    /// Number of dyadic box sizes, starting at the cell size.
    #[arg(long, default_value_t = 5)]
    scales: usize,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long)]
    map: PathBuf,
    /// Output image; `.svg` gives SVG, anything else binary PPM.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    scale: usize,
}

/// Provenance written beside every output file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub inputs: Vec<InputDigest>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

struct Session<'a> {
    args: Vec<String>,
    command: String,
    inputs: Vec<InputDigest>,
    out: &'a mut dyn Write,
}

impl Session<'_> {
    fn print(&mut self, text: &str) -> Result<()> {
        self.out.write_all(text.as_bytes())?;
        Ok(())
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let s = serde_json::to_string_pretty(value).map_err(|e| Error::Computation(e.to_string()))?;
        self.print(&s)?;
        self.print("\n")
    }

    fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex_digest(&bytes) });
        String::from_utf8(bytes).map_err(|_| Error::argument(format!("{} is not UTF-8 text", path.display())))
    }

    /// Writes `bytes` and the manifest beside it.
    fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        std::fs::write(path, bytes)?;
        let manifest = RunManifest {
            command: self.command.clone(),
            args: self.args.clone(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            inputs: self.inputs.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Computation(e.to_string()))?;
        std::fs::write(manifest_path(path), text + "\n")?;
        Ok(())
    }

    fn model(&mut self, spec: &str) -> Result<PeriodicField> {
        let path = Path::new(spec);
        if path.is_file() {
            let text = self.read_input(path)?;
            let field = parse_model(&text)?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            // Unnamed files take their file stem.
            Ok(if field.name() == "user" && !name.is_empty() { field.with_name(name) } else { field })
        } else {
            builtin_model(spec)
        }
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_list(text: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::argument(format!("{what} '{text}' is not a list of numbers")))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::argument(format!("{what} '{text}' must have {n} finite components")));
    }
    Ok(v)
}

fn parse_ints(text: &str, n: usize, what: &str) -> Result<Vec<i64>> {
    let v: Vec<i64> = text
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::argument(format!("{what} '{text}' is not a list of integers")))?;
    if v.len() != n {
        return Err(Error::argument(format!("{what} '{text}' must have {n} components")));
    }
    Ok(v)
}

fn rational_dir(text: &str) -> Result<[i64; 3]> {
    match Direction::parse(text)? {
        Direction::Rational(b) => Ok(b),
        Direction::Real(_) => Err(Error::argument("the mesh pipeline needs an integer direction")),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Parse { .. } | Error::UnknownModel { .. } => 2,
        _ => 1,
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    // Output is buffered so the work can move onto a dedicated pool.
    let mut buf = Vec::new();
    let result = match cli.threads {
        Some(0) => Err(Error::argument("--threads must be at least 1")),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, recorded, &mut buf)),
            Err(e) => Err(Error::Computation(e.to_string())),
        },
        None => dispatch(cli.command, recorded, &mut buf),
    };
    let _ = out.write_all(&buf);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let line = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            let _ = writeln!(err, "{line}");
            if code == 2 {
                let _ = writeln!(err, "Try 'qptopo --help' for usage.");
            }
            code
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Model { .. } => "model",
        Command::Mesh { .. } => "mesh",
        Command::Homology { .. } => "homology",
        Command::Label(_) => "label",
        Command::Interval(_) => "interval",
        Command::Trace(_) => "trace",
        Command::Scan(_) => "scan",
        Command::Dim(_) => "dim",
        Command::Render(_) => "render",
        Command::Replay { .. } => "replay",
    }
}

fn dispatch(command: Command, args: Vec<String>, out: &mut dyn Write) -> Result<()> {
    let mut s = Session { args, command: command_name(&command).into(), inputs: Vec::new(), out };
    match command {
        Command::Model { action } => model_cmd(&mut s, action),
        Command::Mesh { action } => mesh_cmd(&mut s, action),
        Command::Homology { action: HomologyCmd::Basis { surface } } => homology_basis(&mut s, &surface),
        Command::Label(a) => label_cmd(&mut s, &a),
        Command::Interval(a) => interval_cmd(&mut s, &a),
        Command::Trace(a) => trace_cmd(&mut s, &a),
        Command::Scan(a) => scan_cmd(&mut s, &a),
        Command::Dim(a) => dim_cmd(&mut s, &a),
        Command::Render(a) => render_cmd(&mut s, &a),
        Command::Replay { manifest } => {
            let text = std::fs::read_to_string(&manifest)?;
            let m: RunManifest = serde_json::from_str(&text)
                .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
            if m.command == "replay" {
                return Err(Error::argument("a manifest cannot replay a replay"));
            }
            let mut argv = vec!["qptopo".to_string()];
            argv.extend(m.args);
            let cli = Cli::try_parse_from(&argv).map_err(|e| Error::argument(e.to_string()))?;
            let recorded = argv[1..].to_vec();
            dispatch(cli.command, recorded, s.out)
        }
    }
}

fn model_cmd(s: &mut Session, action: ModelCmd) -> Result<()> {
    match action {
        ModelCmd::List => {
            for name in BUILTIN_MODELS {
                s.print(&format!("{name}\n"))?;
            }
            Ok(())
        }
        ModelCmd::Show { model } => {
            let f = s.model(&model)?;
            s.print(&f.to_model_text())
        }
        ModelCmd::Check { file } => {
            let text = s.read_input(&file)?;
            let f = parse_model(&text)?;
            s.json(&serde_json::json!({
                "file": file.display().to_string(),
                "dim": f.dim(),
                "terms": f.terms().len(),
                "amplitude_sum": f.amplitude_sum(),
            }))
        }
    }
}

fn mesh_cmd(s: &mut Session, action: MeshCmd) -> Result<()> {
    match action {
        MeshCmd::Extract { surface, out, copies } => {
            let f = s.model(&surface.model)?;
            let c = parse_ints(&copies, 3, "copies")?;
            if c.iter().any(|&x| x < 1) {
                return Err(Error::argument("copies must be positive"));
            }
            let mesh = extract_isosurface(&f, surface.level, surface.res)?;
            let obj = export_mesh(&mesh, [c[0] as usize, c[1] as usize, c[2] as usize])?;
            s.write_output(&out, obj.as_bytes())?;
            s.json(&serde_json::json!({
                "out": out.display().to_string(),
                "vertices": mesh.vertices.len(),
                "triangles": mesh.triangles.len(),
                "level": mesh.level,
            }))
        }
        MeshCmd::Report { surface } => {
            let f = s.model(&surface.model)?;
            let mesh = extract_isosurface(&f, surface.level, surface.res)?;
            let report = validate_mesh(&mesh);
            let mut text = format!("# {}\n", report.summary());
            text.push_str("component,triangles,vertices,edges,euler,genus,rank\n");
            for c in split_components(&mesh) {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    c.index,
                    c.triangles.len(),
                    c.vertices.len(),
                    c.edges,
                    c.euler_characteristic,
                    c.genus,
                    c.rank
                ));
            }
            s.print(&text)
        }
    }
}

fn homology_basis(s: &mut Session, surface: &SurfaceArgs) -> Result<()> {
    let f = s.model(&surface.model)?;
    let mesh = extract_isosurface(&f, surface.level, surface.res)?;
    let comps = split_components(&mesh);
    let bases = all_cycle_bases(&mesh, &comps)?;
    let mut text = String::new();
    for (c, b) in comps.iter().zip(&bases) {
        text.push_str(&format!("# component {} genus {} rank {}\n", c.index, c.genus, c.rank));
        if let Some(b) = b {
            text.push_str("# pairing\n");
            text.push_str(&b.pairing.to_string());
            text.push_str("# push_forward\n");
            text.push_str(&b.push_forward.to_string());
        }
    }
    s.print(&text)
}

#[derive(Serialize)]
struct LabelReport {
    model: String,
    level: f64,
    resolution: usize,
    direction: [i64; 3],
    label: Label,
    status: String,
    saddles: usize,
    extrema: usize,
    simple: bool,
    components: Vec<ComponentSummary>,
    cylinders: usize,
    open_components: usize,
    open_loops: usize,
    symplectic_label: Option<[i64; 3]>,
    capped_label: Option<[i64; 3]>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct ComponentSummary {
    index: usize,
    genus: i64,
    rank: usize,
}

fn label_cmd(s: &mut Session, a: &LabelArgs) -> Result<()> {
    let f = s.model(&a.surface.model)?;
    let b = rational_dir(&a.dir)?;
    let mesh = foliation_mesh(&f, a.surface.level, a.surface.res)?;
    let mut report = LabelReport {
        model: f.name().to_string(),
        level: a.surface.level,
        resolution: a.surface.res,
        direction: b,
        label: Label::AllClosed,
        status: String::new(),
        saddles: 0,
        extrema: 0,
        simple: true,
        components: Vec::new(),
        cylinders: 0,
        open_components: 0,
        open_loops: 0,
        symplectic_label: None,
        capped_label: None,
        notes: Vec::new(),
    };
    if !mesh.is_empty() {
        match SurfaceAnalysis::new(&mesh, true) {
            Err(e) => report.label = Label::Undetermined(e.to_string()),
            Ok(an) => {
                report.components = an
                    .components
                    .iter()
                    .map(|c| ComponentSummary { index: c.index, genus: c.genus, rank: c.rank })
                    .collect();
                match an.decompose(b) {
                    Err(e) => report.label = Label::Undetermined(e.to_string()),
                    Ok(d) => {
                        report.saddles = d.critical.saddle_count();
                        report.extrema = d.critical.extremum_count();
                        report.simple = d.is_simple(&an.components);
                        report.cylinders = d.cylinders.len();
                        report.open_components = d.open_components.len();
                        report.open_loops = d.open_loop_count();
                        report.symplectic_label = d.symplectic_label;
                        report.capped_label = d.capped_label;
                        report.notes = d.notes.clone();
                        report.direction = d.direction;
                        report.label = d.label;
                    }
                }
            }
        }
    }
    report.status = report.label.status();
    s.json(&report)
}

fn interval_cmd(s: &mut Session, a: &IntervalArgs) -> Result<()> {
    let f = s.model(&a.model)?;
    let b = rational_dir(&a.dir)?;
    let iv = energy_interval(&f, &Direction::Rational(b), a.res, a.tol)?;
    let num = |x: f64| if x.is_finite() { serde_json::json!(x) } else { serde_json::Value::Null };
    s.json(&serde_json::json!({
        "model": f.name(),
        "direction": b,
        "resolution": a.res,
        "low": num(iv.low),
        "upp": num(iv.upp),
        "tolerance": iv.tolerance,
        "kind": match iv.kind {
            IntervalKind::Interval => "interval",
            IntervalKind::Point => "point",
            IntervalKind::Empty => "empty",
        },
    }))
}

fn trace_cmd(s: &mut Session, a: &TraceArgs) -> Result<()> {
    let f = s.model(&a.model)?;
    let n = f.dim();
    let offset = match &a.offset {
        Some(t) => parse_list(t, n, "offset")?,
        None => vec![0.0; n],
    };
    let psi = match (&a.normal, &a.u, &a.v) {
        (Some(normal), None, None) => {
            if n != 3 {
                return Err(Error::argument("--normal needs a field on T^3; use --u/--v"));
            }
            let v = parse_list(normal, 3, "normal")?;
            PlaneEmbedding::from_normal([v[0], v[1], v[2]], [offset[0], offset[1], offset[2]])?
        }
        (None, Some(u), Some(v)) => PlaneEmbedding::new(parse_list(u, n, "u")?, parse_list(v, n, "v")?, offset)?,
        _ => return Err(Error::argument("give either --normal or both --u and --v")),
    };
    let q = planar::restrict(&f, &psi)?;
    let st = parse_list(&a.start, 2, "start")?;
    let opts = TraceOptions { max_arc: a.max_arc, max_step: a.max_step, reverse: a.reverse, ..Default::default() };
    if !(a.max_step >= opts.min_step) {
        return Err(Error::argument(format!("--max-step must be at least {}", opts.min_step)));
    }
    let orbit = planar::trace_orbit(&q, a.level, [st[0], st[1]], &opts)?;
    if let Some(p) = &a.out {
        s.write_output(p, orbit.to_csv().as_bytes())?;
    }
    if let Some(p) = &a.plot {
        s.write_output(p, planar::render_orbit_svg(&orbit, 800).as_bytes())?;
    }
    s.json(&serde_json::json!({
        "model": f.name(),
        "level": a.level,
        "plane": psi,
        "verdict": orbit.verdict,
        "points": orbit.points.len(),
        "arc_length": orbit.arc_length(),
        "residual": orbit.residual,
        "fitted_direction": orbit.fitted_direction,
        "strip_width": planar::strip_width(&orbit.points),
    }))
}

fn scan_cmd(s: &mut Session, a: &ScanArgs) -> Result<()> {
    let f = s.model(&a.surface.model)?;
    let rule = CellRule::parse(&a.rule)?;
    let grid = match &a.window {
        None => DirectionGrid::window(a.grid, 0, 0, a.grid as usize, a.grid as usize, rule)?,
        Some(w) => {
            let v = parse_ints(w, 4, "window")?;
            if v[2] < 1 || v[3] < 1 {
                return Err(Error::argument("window sizes must be positive"));
            }
            DirectionGrid::window(a.grid, v[0], v[1], v[2] as usize, v[3] as usize, rule)?
        }
    };
    let map = if a.reduced {
        scan::scan_reduced(&f, a.surface.level, &grid, a.surface.res)?
    } else {
        scan::scan_full(&f, a.surface.level, &grid, a.surface.res)?
    };
    if let Some(p) = &a.out {
        s.write_output(p, scan::map_to_csv(&map).as_bytes())?;
    }
    if let Some(p) = &a.png {
        s.write_output(p, &scan::render_map(&map, ImageFormat::Ppm, a.scale))?;
    }
    if let Some(p) = &a.svg {
        s.write_output(p, &scan::render_map(&map, ImageFormat::Svg, a.scale))?;
    }
    let zones = scan::zones(&map);
    let top: Vec<serde_json::Value> = zones
        .iter()
        .take(10)
        .map(|z| serde_json::json!({ "label": z.label, "cells": z.cells.len(), "area_fraction": z.area_fraction }))
        .collect();
    let mut census: Vec<(String, usize)> = scan::census(&map).into_iter().collect();
    census.sort();
    let open = map.count(|l| l.is_open());
    s.json(&serde_json::json!({
        "model": f.name(),
        "mode": map.metadata.mode,
        "level": a.surface.level,
        "resolution": a.surface.res,
        "cells": map.entries.len(),
        "open": open,
        "closed": map.count(|l| *l == Label::AllClosed),
        "undetermined": map.count(|l| l.is_undetermined()),
        "distinct_labels": map.distinct_labels().len(),
        "zones": zones.len(),
        "top_zones": top,
        "mirror": scan::mirror_check(&map),
    }))
}

fn dim_cmd(s: &mut Session, a: &DimArgs) -> Result<()> {
    let text = s.read_input(&a.map)?;
    let map = scan::map_from_csv(&text)?;
    let pts = scan::boundary_points(&map);
    if pts.is_empty() {
        return Err(Error::DegenerateFit("the map has no boundary or undetermined cells".into()));
    }
    let est = scan::box_dimension(&pts, &scan::dyadic_scales(map.grid.cell_size(), a.scales))?;
    s.json(&serde_json::json!({
        "map": a.map.display().to_string(),
        "points": pts.len(),
        "dimension": est.dimension,
        "counts": est.counts,
    }))
}

fn render_cmd(s: &mut Session, a: &RenderArgs) -> Result<()> {
    let text = s.read_input(&a.map)?;
    let map = scan::map_from_csv(&text)?;
    let svg = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg"));
    let bytes = scan::render_map(&map, if svg { ImageFormat::Svg } else { ImageFormat::Ppm }, a.scale);
    s.write_output(&a.out, &bytes)?;
    s.json(&serde_json::json!({ "out": a.out.display().to_string(), "bytes": bytes.len() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["qptopo"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn model_show_lists_three_terms() {
        let (code, out, _) = call(&["model", "show", "c3"]);
        assert_eq!(code, 0);
        let terms = out.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#') && !l.contains('=')).count();
        assert_eq!(terms, 3, "{out}");
    }

    #[test]
    fn argument_errors_exit_2() {
        assert_eq!(call(&["label", "--model", "nosuch", "--dir", "0,0,1"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["label", "--model", "c3", "--dir", "0.5,0,1"]).0, 2);
        let (code, _, err) = call(&["label", "--model", "c3", "--dir", "0,0,0"]);
        assert_eq!(code, 2);
        assert!(err.contains("\"kind\":\"argument\""));
    }

    #[test]
    fn version_and_help() {
        let (code, out, _) = call(&["--version"]);
        assert_eq!(code, 0);
        assert!(out.contains(env!("CARGO_PKG_VERSION")));
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn label_vertical_direction() {
        let (code, out, err) = call(&["label", "--model", "c3", "--level", "0", "--dir", "0,0,1", "--res", "32"]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["label"]["kind"], "AllClosed");
        assert_eq!(v["status"], "closed");
    }
}
