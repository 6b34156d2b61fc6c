use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not self-adjoint")]
    NotSelfAdjoint,
    #[error("eigenvalue clustering is ambiguous at the given tolerance: {0}")]
    DegenerateAmbiguity(String),
    #[error("matrix is not pseudo-orthogonal")]
    NotPseudoOrthogonal,
    #[error("value outside the coordinate ranges: {0}")]
    RangeViolation(String),
    #[error("triple has coincident entries")]
    DegenerateTriple,
    #[error("spectrum is not real")]
    ComplexSpectrum,
    #[error("spectrum has a repeated eigenvalue")]
    DegenerateSpectrum,
    #[error("subspace is degenerate")]
    DegenerateSubspace,
    #[error("point lies outside the geodesic factor")]
    OutsideGeodesicFactor,
    #[error("tensor is irreducible")]
    NotReducible,
    #[error("canonical-form conditions for the base point are inconsistent")]
    NoCanonicalPoint,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("point outside the chart region")]
    OutsideRegion,
    #[error("numerical iteration did not converge")]
    NumericalNonConvergence,
    #[error("pole encountered in {0}")]
    PoleEncountered(&'static str),
    #[error("elliptic modulus out of range")]
    ModulusOutOfRange,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown web {0}")]
    UnknownWeb(usize),
    #[error("unknown chart {1} of web {0}")]
    UnknownChart(usize, usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
