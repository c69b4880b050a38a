use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("gate at step {step} on qubit(s) {qubits:?} is not unitary (deviation {deviation:.3e})")]
    NonUnitary { step: usize, qubits: Vec<usize>, deviation: f64 },
    #[error("value out of domain: {0}")]
    Domain(String),
    #[error("basis of {0} states exceeds the 2^31 limit")]
    BasisTooLarge(u128),
    #[error("empty sector: {0}")]
    EmptySector(String),
    #[error("step {step} is outside the window of qubit {qubit}")]
    Window { qubit: usize, step: usize },
    #[error("eigensolver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("graph: {0}")]
    Graph(String),
    #[error("path construction: {0}")]
    Path(String),
    #[error("norm drift {0:.3e} exceeds budget; use more steps")]
    NormDrift(f64),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
