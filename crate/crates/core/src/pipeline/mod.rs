//! Lower-bound certificates, benchmark domain families and the end-to-end
//! verification of the eigenvalue inequality.

pub mod certificate;
pub mod families;
pub mod sweep;
pub mod verify;

pub use certificate::{lower_bound_certificate, CapacityPath, CertificateOptions, LowerBoundCertificate, TileRecord};
pub use families::{build_family, shell_slug_sizes, FamilyKind, FamilySpec};
pub use sweep::{s_half_sweep, SHalfOptions, SHalfRow, SHalfSweep};
pub use verify::{default_trials, inscribed_rectangle, verify_main_theorem, Rect, Verdict, VerifyOptions, VerifyReport};
