use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "omaf", version, about = "Omnidirectional media toolkit")]
pub struct Cli {
    /// Print machine-readable JSON on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Prefix diagnostics with wall-clock timestamps.
    #[arg(long, global = true)]
    pub timestamps: bool,
    /// TOML configuration file (default: $OMAF_TOOLKIT_CONFIG).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Omb,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the box tree and contents of an OMB file.
    Inspect { file: PathBuf },
    /// Validate an OMB file or JSON manifest; exits 1 when errors are found.
    Validate { file: PathBuf },
    /// Convert between the JSON manifest and OMB.
    Convert {
        input: PathBuf,
        /// Output file (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Output format (default: the other one).
        #[arg(long, value_enum)]
        to: Option<Format>,
    },
    /// Match tracks against the media profile tables.
    Conformance {
        /// Presentation (JSON or OMB) or a JSON array of track descriptors.
        manifest: PathBuf,
        /// Also match video tracks against the 3GPP operation points.
        #[arg(long = "3gpp")]
        three_gpp: bool,
        /// Add the VR Industry Forum recommendation report.
        #[arg(long)]
        vrif: bool,
    },
    /// Generate or parse DASH MPDs.
    Mpd {
        #[command(subcommand)]
        action: MpdCommand,
    },
    /// Blend overlay layers over a background picture.
    Compose {
        /// Background picture (binary PPM).
        background: PathBuf,
        /// Alpha plane for the background (binary PGM).
        #[arg(long, value_name = "PGM")]
        background_alpha: Option<PathBuf>,
        /// Layer as FILE.ppm[,alpha=FILE.pgm][,at=X:Y:W:H][,opacity=F];
        /// repeat for more layers, drawn in order.
        #[arg(long = "layer", value_name = "SPEC")]
        layers: Vec<String>,
        /// Output PPM (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the composed alpha plane as PGM.
        #[arg(long, value_name = "PGM")]
        alpha_output: Option<PathBuf>,
    },
    /// Simulate viewport-dependent tile streaming for an orientation trace.
    Simulate {
        /// Orientation trace CSV: time_ms,azimuth,elevation,tilt.
        #[arg(long)]
        trace: PathBuf,
        /// Tile group JSON, or a presentation holding one.
        #[arg(long)]
        grid: PathBuf,
        /// Variant CSV: track_id,quality_rank,bitrate_bps,col,row.
        #[arg(long)]
        variants: PathBuf,
        /// Budget in bit/s, or a comma-separated list with one per segment.
        #[arg(long)]
        budget: String,
        /// Segment duration in milliseconds
        #[arg(long, default_value_t = 1000)]
        segment_ms: u64,
        /// Tile group to use when the grid file is a presentation.
        #[arg(long)]
        group_id: Option<u32>,
        /// ERP region value grid (JSON) used to weight cells.
        #[arg(long)]
        heatmap: Option<PathBuf>,
        /// Horizontal field of view in degrees
        #[arg(long)]
        hfov: Option<f64>,
        /// Vertical field of view in degrees
        #[arg(long)]
        vfov: Option<f64>,
        /// Overlap sampling steps per axis.
        #[arg(long)]
        sampling: Option<u32>,
        /// Output file (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pick the viewpoint nearest to a device position.
    GpsSelect {
        /// Presentation (JSON or OMB).
        presentation: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum MpdCommand {
    /// Write the MPD for a presentation.
    Gen {
        presentation: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Read an MPD and list its descriptors.
    Parse { mpd: PathBuf },
}
