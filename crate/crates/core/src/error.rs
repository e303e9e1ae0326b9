/// Errors surfaced by tree construction, file parsing, and the solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("edge list contains a cycle")]
    CycleDetected,

    #[error("edge list is not connected")]
    Disconnected,

    #[error("non-positive or non-finite length {len}")]
    NonpositiveLength { edge: Option<usize>, len: f64 },

    #[error("root {0} is a pendant vertex; pick an internal vertex")]
    RootIsPendant(usize),

    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(usize),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("unknown edge {0}")]
    UnknownEdge(usize),

    #[error("vertex {0} is not a pendant vertex")]
    NotPendant(usize),

    #[error("edge {0} is not a boundary edge of the current tree")]
    NotBoundaryEdge(usize),

    #[error("cannot peel the last remaining edge")]
    PeelSingleEdge,

    #[error("potential vector has {got} entries, tree has {want} edges")]
    PotentialCount { got: usize, want: usize },

    #[error("sample grid must start at 0, end at the edge length, and be strictly increasing")]
    BadSampleGrid,

    #[error("coordinate {x} outside edge domain [0, {len}]")]
    OutsideDomain { x: f64, len: f64 },

    #[error("step control stalled: local error {achieved:e} above target {wanted:e}")]
    IntegratorStalled { achieved: f64, wanted: f64 },

    #[error("psi_D({rho}) = {value:e} too close to zero for the mean-potential estimate")]
    PsiDSmall { value: f64, rho: f64 },

    #[error("window [{lo}, {hi}] too coarse: counted {found} eigenvalues but the length-based count disagrees")]
    WindowTooCoarse { found: usize, lo: f64, hi: f64 },

    #[error("no zero of psi_N within distance {dist:e} of mu = {mu}")]
    NoZeroNearMu { mu: f64, dist: f64 },

    #[error("length ratios must lie in (0, 1) and sum to 1")]
    BadAlphas,

    #[error(
        "resolution n = {n} needs {needed} scan points, budget is {budget}; largest feasible n is {feasible}"
    )]
    BudgetExceeded { budget: u64, n: u32, needed: u64, feasible: u32 },

    #[error("edge {edge} resolved by only {nodes} mesh nodes; refine the mesh")]
    MeshTooCoarse { edge: usize, nodes: usize },

    #[error("eigenvalue solver failed: {0}")]
    Eigensolver(String),

    #[error("empty or inverted window [{lo}, {hi}]")]
    BadWindow { lo: f64, hi: f64 },

    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
