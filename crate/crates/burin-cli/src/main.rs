//! `burin`: engraving-style stylisation of portrait images.
//!
//! Subcommands mirror the pipeline stages: `matrix` exports the dither
//! matrix, `engrave` renders the monochrome engraving, `colour` the colour
//! variants, and `shade` just the shading field. Exit codes: 0 on success,
//! 2 for input or schema errors, 3 for internal invariant violations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use burin::pipeline::{
    build_matrices, build_raw_matrix, colour_engrave, engrave_image, shading_only, Artifacts,
    ColourMode, EngravingConfig, Geometry,
};
use burin::raster::{load_image, save_image, to_gray, Raster};
use burin::{Error, LandmarkSet, Result};

#[derive(Parser)]
#[command(
    name = "burin",
    version,
    about = "Engraving-style stylisation of portrait images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export the dither matrix as a PGM image.
    Matrix(MatrixArgs),
    /// Render a monochrome engraving.
    Engrave(EngraveArgs),
    /// Render a colour engraving.
    Colour(ColourArgs),
    /// Export the shading field derived from landmarks or a depth map.
    Shade(ShadeArgs),
}

/// Flags shared by every subcommand; unset flags fall back to the config
/// file (when given) and then to the built-in defaults.
#[derive(Args)]
struct CommonOpts {
    /// Cross-hatch strength S in [0, 0.5].
    #[arg(long = "scale-s", value_name = "S")]
    scale_s: Option<f64>,
    /// Dither matrix period in pixels.
    #[arg(long)]
    period: Option<u32>,
    /// Fraction of matrix rows carrying white cross-hatch.
    #[arg(long = "white-band")]
    white_band: Option<f64>,
    /// Supersampling factor k.
    #[arg(long)]
    supersample: Option<u32>,
    /// Warp amplitude in pixels (defaults to one period).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Upward mask extension as a fraction of the brow-to-chin height.
    #[arg(long)]
    extend: Option<f64>,
    /// Ambient weight of the shading model.
    #[arg(long)]
    alpha: Option<f32>,
    /// Shading blur strength multiplier.
    #[arg(long = "blur-strength")]
    blur_strength: Option<f64>,
    /// Rotate the face upright before dithering and back afterwards.
    #[arg(long = "rotate-align")]
    rotate_align: bool,
    /// Intensity scale for the darkened mask mode.
    #[arg(long)]
    darken: Option<f64>,
    /// Saturation boost for the darkened mask mode.
    #[arg(long = "sat-boost")]
    sat_boost: Option<f64>,
    /// Per-channel matrix shifts for the shifted separation mode, as
    /// "r,g,b" fractions of the period.
    #[arg(long, value_parser = parse_shifts)]
    shifts: Option<Shifts>,
    /// Colour-image blur sigma used by the mask modes.
    #[arg(long = "colour-blur")]
    colour_blur: Option<f64>,
    /// TOML config file supplying defaults for all of the above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct Shifts([f64; 3]);

fn parse_shifts(s: &str) -> std::result::Result<Shifts, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated fractions, e.g. 0,0.333,0.667".into());
    }
    let mut out = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("bad shift '{p}': {e}"))?;
    }
    Ok(Shifts(out))
}

impl CommonOpts {
    fn build_config(&self) -> Result<EngravingConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => EngravingConfig::default(),
        };
        if let Some(v) = self.scale_s {
            cfg.scale_s = v;
        }
        if let Some(v) = self.period {
            cfg.period = v;
        }
        if let Some(v) = self.white_band {
            cfg.white_band = v;
        }
        if let Some(v) = self.supersample {
            cfg.supersample = v;
        }
        if let Some(v) = self.amplitude {
            cfg.amplitude = Some(v);
        }
        if let Some(v) = self.extend {
            cfg.extend = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.blur_strength {
            cfg.blur_strength = v;
        }
        if self.rotate_align {
            cfg.rotate_align = true;
        }
        if let Some(v) = self.darken {
            cfg.darken = v;
        }
        if let Some(v) = self.sat_boost {
            cfg.sat_boost = v;
        }
        if let Some(Shifts(v)) = self.shifts {
            cfg.shifts = v;
        }
        if let Some(v) = self.colour_blur {
            cfg.colour_blur_sigma = Some(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_config(path: &Path) -> Result<EngravingConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    toml::from_str(&text)
        .map_err(|e| Error::InvalidParam(format!("config file {}: {e}", path.display())))
}

#[derive(Args)]
struct MatrixArgs {
    /// Output PGM path.
    #[arg(short, long)]
    output: PathBuf,
    /// Export the full-resolution combined matrix before equalisation and
    /// resampling.
    #[arg(long)]
    raw: bool,
    #[command(flatten)]
    opts: CommonOpts,
}

#[derive(Args)]
struct EngraveArgs {
    /// Input image (PNG, PGM or PPM).
    input: PathBuf,
    /// Output image path.
    #[arg(short, long)]
    output: PathBuf,
    /// Landmark JSON file enabling the face-warped path.
    #[arg(long, conflicts_with = "depth")]
    landmarks: Option<PathBuf>,
    /// Depth map (larger = nearer) as an alternative geometry source.
    #[arg(long)]
    depth: Option<PathBuf>,
    /// Directory receiving mask/theta/shading/offset/matrix exports.
    #[arg(long = "debug-dir")]
    debug_dir: Option<PathBuf>,
    #[command(flatten)]
    opts: CommonOpts,
}

#[derive(Args)]
struct ColourArgs {
    /// Input image (PNG, PGM or PPM); grayscale inputs are replicated to
    /// three channels.
    input: PathBuf,
    /// Output image path.
    #[arg(short, long)]
    output: PathBuf,
    /// Colour engraving mode.
    #[arg(long)]
    mode: ModeArg,
    /// Landmark JSON file enabling the face-warped path.
    #[arg(long, conflicts_with = "depth")]
    landmarks: Option<PathBuf>,
    /// Depth map as an alternative geometry source.
    #[arg(long)]
    depth: Option<PathBuf>,
    #[command(flatten)]
    opts: CommonOpts,
}

#[derive(Args)]
struct ShadeArgs {
    /// Input image; only its dimensions matter for the landmark path.
    input: PathBuf,
    /// Output PGM/PNG path for the shading field.
    #[arg(short, long)]
    output: PathBuf,
    /// Landmark JSON file.
    #[arg(long, conflicts_with = "depth")]
    landmarks: Option<PathBuf>,
    /// Depth map.
    #[arg(long)]
    depth: Option<PathBuf>,
    #[command(flatten)]
    opts: CommonOpts,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// OR the engraving with a blurred colour image.
    Mask,
    /// Mask mode over a darkened input with a saturation boost.
    MaskDarkened,
    /// One dither matrix applied to all three channels.
    SepSame,
    /// Vertically shifted matrices per channel.
    SepShifted,
}

impl From<ModeArg> for ColourMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mask => ColourMode::Mask,
            ModeArg::MaskDarkened => ColourMode::MaskDarkened,
            ModeArg::SepSame => ColourMode::SeparationSame,
            ModeArg::SepShifted => ColourMode::SeparationShifted,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("burin: {e}");
            match e {
                Error::Internal(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Matrix(args) => cmd_matrix(args),
        Command::Engrave(args) => cmd_engrave(args),
        Command::Colour(args) => cmd_colour(args),
        Command::Shade(args) => cmd_shade(args),
    }
}

fn cmd_matrix(args: MatrixArgs) -> Result<()> {
    let cfg = args.opts.build_config()?;
    let raster = if args.raw {
        build_raw_matrix(&cfg)?.to_raster()
    } else {
        build_matrices(&cfg)?.working.to_raster()
    };
    save_image(&raster, &args.output)
}

/// Load geometry inputs shared by engrave/colour/shade.
fn load_geometry(
    landmarks: &Option<PathBuf>,
    depth: &Option<PathBuf>,
    dims: (usize, usize),
) -> Result<(Option<LandmarkSet>, Option<Raster<u8>>)> {
    let lm = match landmarks {
        Some(path) => Some(LandmarkSet::from_json_file(path, dims)?),
        None => None,
    };
    let depth = match depth {
        Some(path) => {
            let img = load_image(path)?;
            let img = if img.channels() == 3 {
                to_gray(&img)?
            } else {
                img
            };
            Some(img)
        }
        None => None,
    };
    Ok((lm, depth))
}

fn as_geometry<'a>(
    lm: &'a Option<LandmarkSet>,
    depth: &'a Option<Raster<u8>>,
) -> Geometry<'a> {
    match (lm, depth) {
        (Some(lm), _) => Geometry::Landmarks(lm),
        (None, Some(d)) => Geometry::Depth(d),
        (None, None) => Geometry::None,
    }
}

fn cmd_engrave(args: EngraveArgs) -> Result<()> {
    let cfg = args.opts.build_config()?;
    let image = load_image(&args.input)?;
    let gray = if image.channels() == 3 {
        to_gray(&image)?
    } else {
        image
    };
    let (lm, depth) = load_geometry(&args.landmarks, &args.depth, gray.dims())?;
    let engraving = engrave_image(&gray, as_geometry(&lm, &depth), &cfg)?;
    if let Some(dir) = &args.debug_dir {
        export_debug(dir, &cfg, &engraving.artifacts)?;
    }
    save_image(&engraving.image, &args.output)
}

fn cmd_colour(args: ColourArgs) -> Result<()> {
    let cfg = args.opts.build_config()?;
    let image = load_image(&args.input)?;
    let colour = if image.channels() == 1 {
        Raster::from_fn(image.width(), image.height(), 3, |x, y, _| image.get(x, y, 0))?
    } else {
        image
    };
    let (lm, depth) = load_geometry(&args.landmarks, &args.depth, colour.dims())?;
    let out = colour_engrave(&colour, as_geometry(&lm, &depth), args.mode.into(), &cfg)?;
    save_image(&out, &args.output)
}

fn cmd_shade(args: ShadeArgs) -> Result<()> {
    let cfg = args.opts.build_config()?;
    let image = load_image(&args.input)?;
    let (lm, depth) = load_geometry(&args.landmarks, &args.depth, image.dims())?;
    let shading = shading_only(image.dims(), as_geometry(&lm, &depth), &cfg)?;
    save_image(&shading.field().quantize_u8(), &args.output)
}

fn export_debug(dir: &Path, cfg: &EngravingConfig, artifacts: &Artifacts) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let matrices = build_matrices(cfg)?;
    save_image(&matrices.working.to_raster(), dir.join("matrix.pgm"))?;
    save_image(&matrices.hi.to_raster(), dir.join("matrix_hi.pgm"))?;
    if let Some(mask) = &artifacts.mask {
        save_image(mask, dir.join("mask.pgm"))?;
    }
    if let Some(theta) = &artifacts.theta {
        // Scale [0, pi/2] onto gray.
        let scaled = theta.map(|v| v / std::f32::consts::FRAC_PI_2);
        save_image(&scaled.quantize_u8(), dir.join("theta.pgm"))?;
    }
    if let Some(shading) = &artifacts.shading {
        save_image(&shading.quantize_u8(), dir.join("shading.pgm"))?;
    }
    if let Some(offsets) = &artifacts.offsets {
        let amplitude = cfg.amplitude().max(1e-9) as f32;
        let scaled = Raster::from_samples(
            offsets.dims().0,
            offsets.dims().1,
            1,
            offsets.samples().iter().map(|&v| v / amplitude).collect(),
        )?;
        save_image(&scaled.quantize_u8(), dir.join("offsets.pgm"))?;
    }
    Ok(())
}
