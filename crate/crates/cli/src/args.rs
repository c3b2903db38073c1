//! Command-line flags and the matching sections of the TOML configuration.
//!
//! Every subcommand option is optional on both sides so that a flag can
//! override the file and the command can supply its own default.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Deserialize;

macro_rules! section {
    ($(#[$m:meta])* $name:ident { $( $(#[$fm:meta])* $field:ident : $ty:ty ),* $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Debug, Default, clap::Args, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $( $(#[$fm])* pub $field: Option<$ty>, )*
        }

        impl $name {
            /// Flags win over values from the configuration file.
            pub fn overlay(self, file: Option<Self>) -> Self {
                let file = file.unwrap_or_default();
                $name { $( $field: self.$field.or(file.$field), )* }
            }
        }
    };
}

section!(
    /// Lie-type Cauchy solve on a rectangle of lightcone coordinates.
    SolveCauchyArgs {
        /// Named data set (example41, example42).
        #[arg(long)]
        example: String,
        /// u along the diagonal, as an expression in x.
        #[arg(long, allow_hyphen_values = true)]
        phi1: String,
        /// v along the diagonal.
        #[arg(long, allow_hyphen_values = true)]
        phi2: String,
        /// Normal derivative of u along the diagonal.
        #[arg(long, allow_hyphen_values = true)]
        psi1: String,
        /// Normal derivative of v along the diagonal.
        #[arg(long, allow_hyphen_values = true)]
        psi2: String,
        /// x0,x1,y0,y1
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rect: Vec<f64>,
        /// nx,ny (or a single n for both)
        #[arg(long, value_delimiter = ',')]
        grid: Vec<usize>,
    }
);

section!(
    /// First loss of regularity along lines of constant ξ.
    BlowupScanArgs {
        #[arg(long)]
        example: String,
        #[arg(long, allow_hyphen_values = true)]
        phi1: String,
        #[arg(long, allow_hyphen_values = true)]
        phi2: String,
        #[arg(long, allow_hyphen_values = true)]
        psi1: String,
        #[arg(long, allow_hyphen_values = true)]
        psi2: String,
        /// ξ values to scan.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Vec<f64>,
        #[arg(long)]
        tau_max: f64,
        #[arg(long)]
        d_tau: f64,
    }
);

section!(
    /// Solutions generated from four monotone functions k(s), h(s), m(t), f(t).
    WeierstrassArgs {
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long, allow_hyphen_values = true)]
        m: String,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s_range: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t_range: Vec<f64>,
        /// Grid points per axis.
        #[arg(long)]
        n: usize,
    }
);

section!(
    /// Superpose two random characteristic curves and sample the result.
    SuperposeArgs {
        /// Grid points per axis on [0, 1].
        #[arg(long)]
        n: usize,
        /// Random draws tried before giving up.
        #[arg(long)]
        attempts: usize,
    }
);

section!(
    /// Integrate the geodesic equations of a catalogue metric.
    GeodesicsArgs {
        #[arg(long)]
        metric: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        position: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        velocity: Vec<f64>,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        samples: usize,
    }
);

section!(
    /// Gauss curvature and the Cartan invariant on a grid.
    CurvatureArgs {
        #[arg(long)]
        metric: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x_range: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y_range: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        grid: Vec<usize>,
    }
);

section!(
    /// Derived flag, Cauchy characteristics and the Goursat normal-form check.
    GoursatTableArgs {
        /// H1hat, H2hat, C011 or J1.
        #[arg(long)]
        frame: String,
        /// Random probe points (at least 3).
        #[arg(long)]
        probes: usize,
    }
);

section!(
    /// Leapfrog run of a string initial-boundary value problem.
    SimulateArgs {
        #[arg(long)]
        metric: String,
        /// Initial profile u1,u2 as expressions in xi.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        position: Vec<String>,
        /// Initial velocity as expressions in xi.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        velocity: Vec<String>,
        /// Left end as expressions in tau.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        left: Vec<String>,
        /// Right end as expressions in tau.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        right: Vec<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        domain: Vec<f64>,
        #[arg(long)]
        duration: f64,
        /// Wave speed.
        #[arg(long)]
        c: f64,
        /// christoffel or lambda-direct.
        #[arg(long)]
        flux: String,
        #[arg(long)]
        d_xi: f64,
        #[arg(long)]
        cfl: f64,
        /// Frames written to CSV and SVG.
        #[arg(long)]
        snapshots: usize,
    }
);

section!(
    /// The clamped-string scenarios drawn as a sequence of frames.
    FigureArgs {
        /// euclidean or lambda.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        d_xi: f64,
        #[arg(long)]
        cfl: f64,
        #[arg(long)]
        snapshots: usize,
    }
);

section!(
    /// Run the acceptance suite and write report.json.
    VerifyAllArgs {
        /// Subset of criteria to run (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    }
);

#[derive(Debug, Parser)]
#[command(
    name = "wavemap",
    version,
    about = "Wave maps into Lorentzian surfaces: solvers, diagnostics and verification"
)]
pub struct Cli {
    /// TOML file with top-level defaults and one table per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Acceptance tolerance for commands that verify their output.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    SolveCauchy(SolveCauchyArgs),
    BlowupScan(BlowupScanArgs),
    Weierstrass(WeierstrassArgs),
    Superpose(SuperposeArgs),
    Geodesics(GeodesicsArgs),
    Curvature(CurvatureArgs),
    GoursatTable(GoursatTableArgs),
    Simulate(SimulateArgs),
    Figure(FigureArgs),
    VerifyAll(VerifyAllArgs),
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub solve_cauchy: Option<SolveCauchyArgs>,
    pub blowup_scan: Option<BlowupScanArgs>,
    pub weierstrass: Option<WeierstrassArgs>,
    pub superpose: Option<SuperposeArgs>,
    pub geodesics: Option<GeodesicsArgs>,
    pub curvature: Option<CurvatureArgs>,
    pub goursat_table: Option<GoursatTableArgs>,
    pub simulate: Option<SimulateArgs>,
    pub figure: Option<FigureArgs>,
    pub verify_all: Option<VerifyAllArgs>,
}
