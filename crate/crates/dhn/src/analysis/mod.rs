//! Measurements of constructed and arbitrary networks.

mod bounds;
mod digits;
mod pieces;
mod shatter;
mod sup;
mod taylor;

pub use bounds::{
    approx_lower_bound, bound_report, piece_bound, rect_arch, vc_upper_bound, BoundReport, VcUpper,
};
pub use digits::{binary_digits, mixed_radix_digits, DigitVector};
pub use pieces::{exact_pieces, sampled_pieces, SegmentPartition, ROOT_TOL};
pub use shatter::{shatter_verify, shatter_verify_sampled, ShatterCertificate, MAX_EXHAUSTIVE_POINTS};
pub use sup::{default_per_axis, sup_error, GridSpec, SupError};
pub use taylor::taylor_reference;
