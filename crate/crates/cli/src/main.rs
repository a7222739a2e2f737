//! `rastermap` command line: map generators, conversions, the three
//! rasterization paths and a map/image diff tool.
//!
//! Exit codes: 0 success, 2 validation error, 3 I/O error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rastermap::io::{self, IoError, MapFile};
use rastermap::map_gen::{self, FovAxis, LensParams, UniversalParams};
use rastermap::maps::{MapError, PerspectiveMap, STMap};
use rastermap::render::{render_scene, RectCamera, RenderMode, RenderSettings};
use rastermap::rmaa::{RasterOptions, StepVariant};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rastermap", version, about = "Curvilinear rasterizer and rasterization-map toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate rasterization maps.
    #[command(subcommand)]
    Genmap(Genmap),
    /// Convert between map kinds.
    #[command(subcommand)]
    Convert(Convert),
    /// Invert a distort STMap into an undistort STMap.
    Invert(InvertArgs),
    /// Render a scene through one of the rasterization paths.
    Rasterize(RasterizeArgs),
    /// Print per-channel max/mean error between two maps or images.
    Diff(DiffArgs),
}

#[derive(Subcommand)]
enum Genmap {
    /// Universal Perspective STMap or Perspective Map.
    Universal(UniversalArgs),
    /// Lens-distortion STMap.
    Lens(LensArgs),
}

#[derive(Subcommand)]
enum Convert {
    /// Perspective Map to planar STMap.
    Pm2st(Pm2StArgs),
}

#[derive(Args)]
struct UniversalArgs {
    /// Map resolution, e.g. 512x512 (even on both axes).
    #[arg(long, value_parser = parse_size)]
    size: (u32, u32),
    /// Angle of view: axis symbol plus degrees, e.g. h90, v60, d140, 4x3h75.
    #[arg(long, default_value = "h90", value_parser = parse_fov)]
    fov: (FovAxis, f64),
    /// Perspective type: 1 rectilinear, 1/2 stereographic, 0 equidistant,
    /// -1/2 equisolid, -1 orthographic.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    k: f64,
    /// Cylindrical (0) to spherical (1) factor.
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    /// Anamorphic correction.
    #[arg(long, default_value_t = 0.98)]
    s: f64,
    /// Output a Perspective Map (unit sphere directions) instead of an
    /// STMap; required for views of 180° and beyond.
    #[arg(long)]
    pmap: bool,
    /// Add a natural-vignetting channel (Perspective Map only).
    #[arg(long)]
    vignette: bool,
    /// Output path (.exr or .rmap).
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct LensArgs {
    #[arg(long, value_parser = parse_size)]
    size: (u32, u32),
    /// AOV normalization axis: h, v, d or 4x3h.
    #[arg(long, default_value = "d", value_parser = parse_axis)]
    aov: FovAxis,
    /// Radial coefficients.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    k1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    k2: f64,
    #[arg(long, allow_hyphen_values = true)]
    k3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k4: Option<f64>,
    /// Thin-prism coefficients.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    p1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    p2: f64,
    /// Decentering coefficients.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    q1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    q2: f64,
    /// Cardinal offset.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c2: f64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct Pm2StArgs {
    /// Input Perspective Map.
    #[arg(short, long)]
    input: PathBuf,
    /// Target angle of view (below 180°).
    #[arg(long, default_value = "h90", value_parser = parse_fov)]
    fov: (FovAxis, f64),
    /// Near-clip plane in (0, 1).
    #[arg(long, default_value_t = 0.01)]
    zn: f64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvertArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Rect,
    Stmap,
    Pmap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    /// Gradient length (variant I).
    Length,
    /// |ddx| + |ddy| (variant II).
    Fwidth,
    /// Twice the gradient length (variant III).
    TwiceLength,
}

impl From<Variant> for StepVariant {
    fn from(v: Variant) -> StepVariant {
        match v {
            Variant::Length => StepVariant::Length,
            Variant::Fwidth => StepVariant::Fwidth,
            Variant::TwiceLength => StepVariant::TwiceLength,
        }
    }
}

#[derive(Args)]
struct RasterizeArgs {
    /// Rasterization path.
    #[arg(long, value_enum)]
    mode: Mode,
    /// Scene file.
    #[arg(long)]
    scene: PathBuf,
    /// Output resolution (rect mode; map modes use the map resolution).
    #[arg(long, value_parser = parse_size, default_value = "512x512")]
    size: (u32, u32),
    /// Camera angle of view for rect/stmap modes. For stmap mode the map's
    /// own metadata wins when present.
    #[arg(long, default_value = "h90", value_parser = parse_fov)]
    fov: (FovAxis, f64),
    /// Lookup map (stmap/pmap modes).
    #[arg(long)]
    map: Option<PathBuf>,
    /// Disable anti-aliasing: binary coverage with depth-tested merging.
    #[arg(long)]
    no_aa: bool,
    /// Edge-slope variant for the pixel-step function.
    #[arg(long, value_enum, default_value_t = Variant::Length)]
    variant: Variant,
    /// Multiply the composite by the map's vignette channel (pmap mode).
    #[arg(long)]
    apply_vignette: bool,
    /// Use fragment color alpha as an alpha-to-coverage mask.
    #[arg(long)]
    alpha_blend: bool,
    /// Encoding gamma.
    #[arg(long, default_value_t = 2.2)]
    gamma: f64,
    /// Output PNG path.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiffArgs {
    a: PathBuf,
    b: PathBuf,
}

enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match &e {
            IoError::Io(_) | IoError::Exr(_) | IoError::Image(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<rastermap::render::RenderError> for CliError {
    fn from(e: rastermap::render::RenderError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn parse_size(text: &str) -> Result<(u32, u32), String> {
    let (w, h) = text
        .split_once(['x', 'X'])
        .ok_or("size must look like 512x512")?;
    let parse = |s: &str| s.parse::<u32>().map_err(|_| format!("invalid size {s:?}"));
    Ok((parse(w)?, parse(h)?))
}

fn parse_axis(text: &str) -> Result<FovAxis, String> {
    match text {
        "h" => Ok(FovAxis::Horizontal),
        "v" => Ok(FovAxis::Vertical),
        "d" => Ok(FovAxis::Diagonal),
        "4x3h" => Ok(FovAxis::Horizontal4x3),
        "16x9h" => Err("16x9h names are recognized but have no generator mapping".into()),
        other => Err(format!("unknown FOV axis {other:?} (use h, v, d or 4x3h)")),
    }
}

fn parse_fov(text: &str) -> Result<(FovAxis, f64), String> {
    // Axis symbols that themselves contain digits come first.
    for prefix in ["16x9h", "4x3h"] {
        if let Some(rest) = text.strip_prefix(prefix) {
            return Ok((parse_axis(prefix)?, parse_degrees(rest)?));
        }
    }
    let split = text
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(|| format!("expected <axis><degrees>, got {text:?}"))?;
    let (symbol, degrees) = text.split_at(split);
    Ok((parse_axis(symbol)?, parse_degrees(degrees)?))
}

fn parse_degrees(text: &str) -> Result<f64, String> {
    let degrees: f64 = text
        .parse()
        .map_err(|_| format!("invalid FOV degrees {text:?}"))?;
    if !(degrees > 0.0 && degrees <= 360.0) {
        return Err(format!("FOV degrees {degrees} out of (0, 360]"));
    }
    Ok(degrees)
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Genmap(Genmap::Universal(args)) => genmap_universal(args),
        Command::Genmap(Genmap::Lens(args)) => genmap_lens(args),
        Command::Convert(Convert::Pm2st(args)) => convert_pm2st(args),
        Command::Invert(args) => invert(args),
        Command::Rasterize(args) => rasterize(args),
        Command::Diff(args) => diff(args),
    }
}

fn genmap_universal(args: UniversalArgs) -> Result<(), CliError> {
    let (fov_axis, degrees) = args.fov;
    let params = UniversalParams {
        fov: degrees.to_radians(),
        fov_axis,
        k: args.k,
        l: args.l,
        s: args.s,
    };
    print_warnings(&params.warnings());
    let (width, height) = args.size;
    if args.vignette && !args.pmap {
        return Err(CliError::Validation(
            "--vignette requires --pmap (STMap files carry no vignette channel)".into(),
        ));
    }
    let file = if args.pmap {
        let pm = map_gen::universal_perspective_map(&params, width, height, args.vignette)?;
        io::map_file_from_pmap(&pm)
    } else {
        let st = map_gen::universal_stmap(&params, width, height)?;
        io::map_file_from_stmap(&st)
    };
    io::write_map_file(&args.out, &file)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn genmap_lens(args: LensArgs) -> Result<(), CliError> {
    let mut radial = vec![args.k1, args.k2];
    radial.extend(args.k3);
    radial.extend(args.k4);
    let params = LensParams {
        radial,
        thin_prism: [args.p1, args.p2],
        decentering: [args.q1, args.q2],
        cardinal: [args.c1, args.c2],
        fov_axis: args.aov,
    };
    print_warnings(&params.warnings());
    let (width, height) = args.size;
    let map = map_gen::lens_distort_stmap(&params, width, height)?;
    io::write_map_file(&args.out, &io::map_file_from_stmap(&map))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn load_stmap(path: &Path) -> Result<STMap, CliError> {
    Ok(io::stmap_from_map_file(&io::read_map_file(path)?)?)
}

fn load_pmap(path: &Path) -> Result<PerspectiveMap, CliError> {
    Ok(io::pmap_from_map_file(&io::read_map_file(path)?)?)
}

fn convert_pm2st(args: Pm2StArgs) -> Result<(), CliError> {
    let pm = load_pmap(&args.input)?;
    let (axis, degrees) = args.fov;
    let st = map_gen::perspective_map_to_stmap(&pm, degrees.to_radians(), axis, args.zn)?;
    io::write_map_file(&args.out, &io::map_file_from_stmap(&st))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn invert(args: InvertArgs) -> Result<(), CliError> {
    let map = load_stmap(&args.input)?;
    let inverse = map_gen::invert_stmap(&map)?;
    io::write_map_file(&args.out, &io::map_file_from_stmap(&inverse))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn rasterize(args: RasterizeArgs) -> Result<(), CliError> {
    let scene = io::load_scene(&args.scene)?;
    let settings = RenderSettings {
        raster: RasterOptions {
            variant: args.variant.into(),
            anti_alias: !args.no_aa,
        },
        alpha_blend: args.alpha_blend,
        apply_vignette: args.apply_vignette,
    };
    let (fov_axis, degrees) = args.fov;
    let camera = RectCamera { fov: degrees.to_radians(), fov_axis };

    let need_map = || -> Result<PathBuf, CliError> {
        args.map
            .clone()
            .ok_or_else(|| CliError::Validation("this mode needs --map".into()))
    };

    let (fb, stats) = match args.mode {
        Mode::Rect => {
            let (w, h) = args.size;
            render_scene(&scene, w, h, &RenderMode::Rectilinear(camera), &settings)?
        }
        Mode::Stmap => {
            let map = load_stmap(&need_map()?)?;
            // A map generated here knows its own camera.
            let camera = match map_gen::universal_params_from_metadata(&map.metadata) {
                Some(p) if p.fov < std::f64::consts::PI => {
                    RectCamera { fov: p.fov, fov_axis: p.fov_axis }
                }
                _ => camera,
            };
            render_scene(
                &scene,
                map.width(),
                map.height(),
                &RenderMode::StMap { map: &map, camera },
                &settings,
            )?
        }
        Mode::Pmap => {
            let map = load_pmap(&need_map()?)?;
            render_scene(
                &scene,
                map.width(),
                map.height(),
                &RenderMode::PerspectiveMap { map: &map },
                &settings,
            )?
        }
    };
    if stats.degenerate > 0 {
        eprintln!("warning: {} degenerate primitive(s) skipped", stats.degenerate);
    }
    if stats.behind_eye > 0 {
        eprintln!("warning: {} primitive(s) behind the eye skipped", stats.behind_eye);
    }
    io::write_image(&fb, &args.out, args.gamma)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn is_image(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("png" | "jpg" | "jpeg")
    )
}

fn diff(args: DiffArgs) -> Result<(), CliError> {
    if is_image(&args.a) != is_image(&args.b) {
        return Err(CliError::Validation(
            "cannot diff an image against a map".into(),
        ));
    }
    if is_image(&args.a) {
        diff_images(&args.a, &args.b)
    } else {
        diff_maps(&args.a, &args.b)
    }
}

fn diff_images(a: &Path, b: &Path) -> Result<(), CliError> {
    let a = io::read_image(a)?;
    let b = io::read_image(b)?;
    if a.dimensions() != b.dimensions() {
        return Err(CliError::Validation(format!(
            "image sizes differ: {:?} vs {:?}",
            a.dimensions(),
            b.dimensions()
        )));
    }
    for (c, name) in ["R", "G", "B", "A"].iter().enumerate() {
        let mut max = 0.0f64;
        let mut sum = 0.0f64;
        for (pa, pb) in a.pixels().zip(b.pixels()) {
            let d = (pa.0[c] as f64 - pb.0[c] as f64).abs() / 255.0;
            max = max.max(d);
            sum += d;
        }
        let mean = sum / (a.width() * a.height()) as f64;
        println!("{name}: max {max:.8} mean {mean:.8}");
    }
    Ok(())
}

fn diff_maps(a: &Path, b: &Path) -> Result<(), CliError> {
    let a: MapFile = io::read_map_file(a)?;
    let b: MapFile = io::read_map_file(b)?;
    if (a.width, a.height) != (b.width, b.height) {
        return Err(CliError::Validation(format!(
            "map sizes differ: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    for la in &a.layers {
        let Some(lb) = b.layers.iter().find(|l| l.kind == la.kind) else {
            return Err(CliError::Validation(format!(
                "layer {} missing from second map",
                la.kind.symbol()
            )));
        };
        let channels = la.kind.channels();
        for c in 0..channels {
            let mut max = 0.0f64;
            let mut sum = 0.0f64;
            let mut count = 0usize;
            for (va, vb) in la
                .samples
                .iter()
                .skip(c)
                .step_by(channels)
                .zip(lb.samples.iter().skip(c).step_by(channels))
            {
                let d = (*va as f64 - *vb as f64).abs();
                max = max.max(d);
                sum += d;
                count += 1;
            }
            println!(
                "{}.{}: max {max:.8} mean {:.8}",
                la.kind.symbol(),
                ["R", "G", "B", "A"][c],
                sum / count as f64
            );
        }
    }
    Ok(())
}
