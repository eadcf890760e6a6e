use clap::{Args, Parser, Subcommand, ValueEnum};
use lmi_iis_core::iis::BlockNorm;
use lmi_iis_core::sdpsolve::{Algorithm, SolverSettings};

#[derive(Debug, Parser)]
#[command(name = "lmi-iis", version, about = "Infeasibility analysis for block-diagonal linear matrix inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Primal and dual feasibility tolerance of the conic solver.
    #[arg(long, global = true)]
    pub tol_feas: Option<f64>,
    /// Relative eigenvalue threshold for ranks and faces.
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Solver iteration cap.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// IIS method for `iis`.
    #[arg(long, global = true, value_enum, default_value_t = IisMethod::Greedy)]
    pub method: IisMethod,
    #[arg(long, global = true, value_enum, default_value_t = Solver::Ipm)]
    pub solver: Solver,
}

impl GlobalArgs {
    pub fn settings(&self) -> SolverSettings {
        let mut s = SolverSettings { seed: self.seed, max_iter: self.max_iter, ..SolverSettings::default() };
        if let Some(t) = self.tol_feas {
            s.tol_primal = t;
            s.tol_dual = t;
        }
        if let Some(t) = self.tol_rank {
            s.rank_tol = t;
        }
        s.algorithm = match self.solver {
            Solver::Ipm => Algorithm::InteriorPoint,
            Solver::Admm => Algorithm::Admm,
        };
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IisMethod {
    Greedy,
    L21,
    Brute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Ipm,
    Admm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Frobenius,
    Operator,
}

impl From<NormArg> for BlockNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Frobenius => BlockNorm::Frobenius,
            NormArg::Operator => BlockNorm::Operator,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Blocklinear,
    Blocksdp,
    Uniquelp,
    Uniquesdp,
    DiscHalfplanes,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify weak feasibility and print a certificate or witnesses.
    Check { file: String },
    /// Compute an irreducible infeasible block subsystem.
    Iis {
        file: String,
        /// Block norm for `--method l21`.
        #[arg(long, value_enum, default_value_t = NormArg::Frobenius)]
        norm: NormArg,
    },
    /// Extreme point of the alternative set supported on the given blocks.
    Extreme {
        file: String,
        /// 0-based block indices, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        blocks: Vec<usize>,
    },
    /// Block-sparse uniqueness over all `m + 1` matrices as constraints.
    Unique {
        file: String,
        /// Sparsity level for the sign-count condition.
        #[arg(long, conflicts_with = "x0", required_unless_present = "x0")]
        t: Option<usize>,
        /// Matrix file with the candidate solution.
        #[arg(long)]
        x0: Option<String>,
        /// Random objectives tried with `--x0`.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Print a fixture problem file.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        /// Coupling in the last block for `blocksdp`.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        eps: f64,
        /// Number of variables for `uniquelp` and `uniquesdp`.
        #[arg(long)]
        n: Option<usize>,
        /// Disc radius.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Disc center.
        #[arg(long, num_args = 2, value_names = ["C1", "C2"], allow_negative_numbers = true, default_values_t = [0.0, 0.0])]
        c: Vec<f64>,
        /// Halfplane `α y₁ + β y₂ + γ ≥ 0` given as `α,β,γ`; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        halfplane: Vec<String>,
    },
}
