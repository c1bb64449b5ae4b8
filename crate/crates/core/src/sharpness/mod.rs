//! Twin characters, twisting pairs, valuation cases and the coset-product checks.
pub mod cases;
pub mod config;
pub mod construct;
pub mod cosets;
pub mod pairs;
pub mod search;
pub mod verify;

pub use cases::{a_exponent, a_value, case_scan, classify_case, CaseInfo, CaseLabel, ScanReport};
pub use config::SharpnessConfig;
pub use construct::{build_phi_pair, build_phi_pair_on, PairChecks, PhiPair, BASE};
pub use cosets::{ambient_shape, double_cosets, Ambient, CosetDatum};
pub use pairs::{enumerate_tame_pairs, pairs_at, tame_extensions, AdmissiblePair, LField, LShape};
pub use search::{search_distinguisher, SearchOutcome};
pub use verify::{verify_equ6, verify_equ6_family, verify_r1_gamma, Equ6Context, ExactValue, Verdict, VerificationReport};
