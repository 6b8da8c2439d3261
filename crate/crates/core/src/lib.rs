//! Exact channel laws, genie-aided information decompositions and bound
//! algebra for i.i.d. deletion and deletion/substitution channels.
//!
//! All logarithms are base 2 and `0 log 0 = 0`.

pub mod bits;
pub mod bounds;
pub mod capacity;
pub mod channel;
pub mod combinatorics;
pub mod curve_io;
pub mod error;
pub mod exact;
pub mod genie;
pub mod info;
pub mod montecarlo;

pub use bits::{embedding_count, BitString};
pub use bounds::{
    asymptotic_coefficient, certified_bound_at, convexify_curve, convexify_detailed, multiway_bound,
    scale_bound, theorem1_bound, Anchor, BoundCurve, ConvexPoint, Rule,
};
pub use capacity::{finite_n_max_info, lower_bound_from_finite_n, sanity_check, OptimizationResult};
pub use channel::{ChannelParams, ConcatenationSpec};
pub use combinatorics::{binomial_entropy, i3_bound_per_symbol, log_binomial, MixtureCounts};
pub use error::{Error, Result};
pub use exact::{deletion_law, delsub_law, mutual_information, verify_lemma1, FiniteLaw, InputDistribution};
pub use genie::{chain_links, genie_joint_law, info_decomposition, GenieJointLaw, InfoDecomposition};
