pub mod hull;
pub mod model;
pub mod q2;
pub mod rank1;
pub mod union;

pub use hull::{
    build_hull_formulation, build_hull_formulation_with_limit, enumerate_pieces, recession_nontrivial, AffineConvexSpec,
    PieceDescriptor, DEFAULT_PIECE_LIMIT,
};
pub use model::*;
pub use q2::{build_q2_hull, q2_affine_spec};
pub use rank1::{build_conic_quadratic, build_rank1_compact, build_rank1_nonneg_compact};
pub use union::{build_union_hull, subset_label, PieceBody, UnionPiece, UnionSpec};
