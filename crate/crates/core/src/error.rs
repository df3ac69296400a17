use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Most variants are contract violations: the caller asked for something the
/// model does not define (a radius for an unpulled arm, a selection after the
/// game halted, a report that breaks debt-free reporting).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("confidence radius is undefined for an arm with zero pulls")]
    UndefinedRadius,

    #[error("round {round} is out of range 1..={max}")]
    RoundOutOfRange { round: usize, max: usize },

    #[error("arm index {arm} is out of range for {num_arms} arms")]
    ArmOutOfRange { arm: usize, num_arms: usize },

    #[error("no arm can be selected: the game has halted")]
    Halted,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate reported-mean gap {gap} in the suboptimal bonus")]
    DegenerateGap { gap: f64 },

    #[error("enumeration needs {required} policies but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
