use std::path::PathBuf;

use bergman_core::profile::TailRule;
use bergman_core::GradedSpec;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bergman",
    version,
    about = "Norms, Carleson measures and Volterra-type operators on weighted Bergman spaces"
)]
pub struct Cli {
    /// Directory for the JSON report and CSV profiles. The report is always
    /// printed to stdout as well.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// A^p, Littlewood-Paley or Bloch-type norm of a function.
    Norm(NormArgs),
    /// Greedy r-lattice in the Bergman metric.
    Lattice(LatticeArgs),
    /// Carleson statistics of a measure.
    #[command(subcommand)]
    Carleson(CarlesonCommand),
    /// Generalized Volterra operators.
    #[command(subcommand)]
    Volterra(VolterraCommand),
    /// Sums of weighted differentiation composition operators.
    #[command(subcommand)]
    Compsum(CompsumCommand),
    /// Linear differential equations with analytic coefficients.
    #[command(subcommand)]
    Ode(OdeCommand),
    /// Kernel estimates and the alternating product identity.
    #[command(subcommand)]
    Kernelcheck(KernelCommand),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct QuadArgs {
    /// Gauss points per radial panel.
    #[arg(long, default_value_t = 12)]
    pub radial_n: usize,
    /// Angular count of interior panels.
    #[arg(long, default_value_t = 32)]
    pub angular_n: usize,
    /// Upper bound on the angular count of a panel.
    #[arg(long, default_value_t = 8192)]
    pub angular_cap: usize,
    #[arg(long, default_value_t = 0.9999)]
    pub r_cut: f64,
}

impl QuadArgs {
    pub fn spec(&self) -> GradedSpec {
        GradedSpec {
            radial_n: self.radial_n,
            angular_n: self.angular_n,
            angular_cap: self.angular_cap,
            r_cut: self.r_cut,
            ..GradedSpec::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct TailArgs {
    /// Decay when the two outermost bands fall below this fraction of the sup.
    #[arg(long, default_value_t = 0.05)]
    pub tail_fraction: f64,
    /// Outermost bands used in the exponent fit.
    #[arg(long, default_value_t = 4)]
    pub fit_bands: usize,
    /// Fitted exponent at or above which a profile decays.
    #[arg(long, default_value_t = 0.1)]
    pub decay_exponent: f64,
    /// Fitted exponent at or below minus this value means growth.
    #[arg(long, default_value_t = 0.1)]
    pub growth_exponent: f64,
}

impl TailArgs {
    pub fn rule(&self) -> TailRule {
        TailRule {
            tail_fraction: self.tail_fraction,
            fit_bands: self.fit_bands,
            decay_exponent: self.decay_exponent,
            growth_exponent: self.growth_exponent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    Ap,
    LittlewoodPaley,
    Bloch,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long, value_enum, default_value_t = NormKind::Ap)]
    pub kind: NormKind,
    /// Function file.
    #[arg(long = "fn", value_name = "FILE")]
    pub function: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Derivative order of the Littlewood-Paley norm.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Derivative order of the Bloch-type norm.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    /// Weight exponent of the Bloch-type norm.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub tail: TailArgs,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Bergman radius.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Covered region `|z| <= r_max`.
    #[arg(long, default_value_t = 0.99)]
    pub r_max: f64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct MeasureArgs {
    /// Atom file with columns z_re, z_im, weight.
    #[arg(long, value_name = "FILE")]
    pub measure: Option<PathBuf>,
    /// Use the density `(1 - |z|^2)^t dA`.
    #[arg(long, value_name = "T", allow_hyphen_values = true)]
    pub density_t: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum CarlesonCommand {
    /// Sup statistic over a lattice, for `p <= q`.
    Geometric {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.999)]
        r_max: f64,
        #[command(flatten)]
        tail: TailArgs,
    },
    /// Integral statistic at two truncation radii, for `q < p`.
    Integral {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.999)]
        cut_inner: f64,
        #[arg(long, default_value_t = 0.9999)]
        cut_outer: f64,
        /// Relative change between cuts tolerated for a bounded verdict.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Combined test-family statistic against per-symbol verdicts.
    Sobolev {
        #[command(flatten)]
        measure: MeasureArgs,
        /// JSON array of symbol functions `u_0, ..., u_n`.
        #[arg(long, value_name = "FILE")]
        symbols: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.99)]
        r_max: f64,
        /// Seed of the random polynomial test family.
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        random_count: usize,
        #[arg(long, default_value_t = 10)]
        random_degree: usize,
        #[command(flatten)]
        tail: TailArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum VolterraCommand {
    /// Apply the operator to a function by series arithmetic.
    Apply {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        #[arg(long = "fn", value_name = "FILE")]
        function: PathBuf,
        /// Working series degree.
        #[arg(long, default_value_t = 256)]
        degree: usize,
    },
    /// Symbol criteria for the given exponents, with empirical norms.
    Criteria {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Seed of the random polynomial test family.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        tail: TailArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum CompsumCommand {
    /// Evaluate the operator applied to a function at given points.
    Apply {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        #[arg(long = "fn", value_name = "FILE")]
        function: PathBuf,
        /// Point file with columns z_re, z_im.
        #[arg(long, value_name = "FILE")]
        points: PathBuf,
    },
    /// Pull-back Carleson verdicts against empirical norms.
    Rigidity {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.99)]
        r_max: f64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        tail: TailArgs,
    },
    /// Hilbert-Schmidt basis sum, integral statistics and adjoint identity.
    Hs {
        #[arg(long, value_name = "FILE")]
        op: PathBuf,
        #[arg(long, default_value_t = 64)]
        basis_size: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum OdeCommand {
    /// Neumann-series solution with a convergence certificate.
    Solve {
        #[arg(long, value_name = "FILE")]
        problem: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Taylor coefficients from the coefficient recurrence.
    Oracle {
        #[arg(long, value_name = "FILE")]
        problem: PathBuf,
        #[arg(long, default_value_t = 30)]
        degree: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum KernelCommand {
    /// Normalized kernel norms over a radius sweep.
    KernelNorm {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 3)]
        i_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,0.9,0.99,0.995")]
        radii: Vec<f64>,
        /// Kernel exponent; defaults to the standard choice for `p`.
        #[arg(long)]
        gamma: Option<f64>,
        /// Four-cut extrapolation on a finer rule.
        #[arg(long)]
        precise: bool,
    },
    /// Lower ratio of kernel combinations over random coefficients.
    Combination {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 4.0)]
        gamma: f64,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 50)]
        draws: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,0.9,0.99")]
        radii: Vec<f64>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Residuals of the alternating product identity `b_j = 0`.
    Bj {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "2.5")]
        beta: Vec<f64>,
    },
}
