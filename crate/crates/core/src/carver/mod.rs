//! Optimal-seam search, seam edits and provenance tracking.

mod dp;
mod edit;
mod provenance;
mod session;

pub use dp::{cumulative_matrix, optimal_seam, CumulativeMatrix, EnergyMode, Orientation, Seam};
pub use edit::{insert_seam, merge_seam, remove_seam, transpose_for_horizontal, RemovedPixel};
pub use provenance::{Origin, ProvenanceGrid, SynthesisKind, SynthesisRecord};
pub use session::{insert_k_seams, remove_k_seams, CarveSession, EditEvent, EnergyStats, SeamBias, Variant};
