use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A cutoff of zero photons in some mode.
    InvalidCutoff { n1_max: usize, n2_max: usize },
    /// Operands live on different truncated bases.
    Dimension { left: (usize, usize), right: (usize, usize) },
    /// A state whose norm deviates from one.
    Normalization { norm: f64 },
    /// An iterative method ran out of budget.
    Convergence { what: &'static str, residual: f64 },
    /// Parameters violate a canonical constraint.
    Constraint { what: &'static str, residual: f64 },
    /// Parameters are not on the branch an operation needs.
    Branch(String),
    /// Only the quadratic nonlinearity has closed-form tables.
    UnsupportedOrder(u32),
    /// `μ' − ν''` or `μ'' − ν'` vanishes.
    Singular,
    /// Exponent too large to evaluate.
    Range { exponent: f64 },
    /// The PND grid does not hold enough probability.
    Truncation { mass: f64 },
    /// Joint eigenstate is not unique.
    NonUnique { ratio: f64 },
    /// Eigen-residual too large for the truncated basis.
    CutoffTooSmall { residual: f64 },
    /// Two construction routes disagree.
    ConventionMismatch { fidelity: f64 },
    /// Mode frequencies obey a small integer relation.
    Commensurate { q1: u32, q2: u32 },
    /// A pump design needs a non-positive frequency sum.
    Infeasible(String),
    /// Target monomials not produced by any process term.
    Coverage(alloc::vec::Vec<(u32, u32, u32, u32)>),
    /// Missing data needed by an operation.
    Incomplete(String),
    /// Argument outside its documented range.
    OutOfRange(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidCutoff { n1_max, n2_max } =>
                write!(f, "invalid cutoff ({n1_max}, {n2_max}): both modes need at least one photon"),
            Error::Dimension { left, right } =>
                write!(f, "cutoff mismatch: {left:?} vs {right:?}"),
            Error::Normalization { norm } =>
                write!(f, "state is not normalized (norm {norm:.3e})"),
            Error::Convergence { what, residual } =>
                write!(f, "{what} did not converge (residual estimate {residual:.3e})"),
            Error::Constraint { what, residual } =>
                write!(f, "canonical constraint violated: {what} residual {residual:.3e}"),
            Error::Branch(msg) => write!(f, "wrong parameter branch: {msg}"),
            Error::UnsupportedOrder(n) =>
                write!(f, "nonlinearity order {n} has no closed-form coefficient table"),
            Error::Singular => write!(f, "singular transformation: vanishing denominator"),
            Error::Range { exponent } =>
                write!(f, "exponent {exponent:.3e} out of range"),
            Error::Truncation { mass } =>
                write!(f, "PND holds mass {mass:.6e}; raise n_max"),
            Error::NonUnique { ratio } =>
                write!(f, "joint eigenstate not unique (singular value ratio {ratio:.3e})"),
            Error::CutoffTooSmall { residual } =>
                write!(f, "eigen-residual {residual:.3e} too large; raise the cutoff"),
            Error::ConventionMismatch { fidelity } =>
                write!(f, "unitary route disagrees with eigen route (fidelity {fidelity:.9})"),
            Error::Commensurate { q1, q2 } =>
                write!(f, "mode frequencies are commensurate: {q1}·ω1 = {q2}·ω2"),
            Error::Infeasible(msg) => write!(f, "infeasible pump design: {msg}"),
            Error::Coverage(missing) => {
                write!(f, "no process term covers")?;
                for (j, s, l, m) in missing {
                    write!(f, " ({j},{s},{l},{m})")?;
                }
                Ok(())
            }
            Error::Incomplete(msg) => write!(f, "incomplete input: {msg}"),
            Error::OutOfRange(msg) => write!(f, "out of range: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
