//! Corpus generation and numerical certification of the inequalities of the
//! theory: both sides are evaluated over a deterministic corpus at several
//! resolutions and summarized as ratios, empirical constants and verdicts.

mod convergence;
mod corpus;
mod hardy_check;
mod operator_norm;
mod registry;
mod report;

pub use convergence::{convergence_study, convergence_study_with, ConvergenceJob, ConvergenceRow, ConvergenceTable};
pub use corpus::{build_corpus, Corpus, CorpusConfig, CorpusEntry, DEFAULT_CORPUS_SEED};
pub use hardy_check::{
    hardy_dual_bound, hardy_dual_weighted_check, standard_radial_corpus, HardyDualReport, HardyDualRow, RadialProbe,
    HARDY_DUAL_STABILITY,
};
pub use operator_norm::{
    apply_operator, estimate_operator_norm, NormSpace, OperatorName, OperatorNormReport, OperatorOptions,
};
pub use registry::{certify_inequality, default_resolutions, registry_hypotheses, REGISTRY};
pub use report::{
    AuxCheck, Bracket, CertifyParams, HypothesisCheck, InequalityReport, ReportRow, Verdict, REPORT_SCHEMA_VERSION,
};
