//! LP assembly: the integrated operations/expansion model, its ablation and
//! fixed-capacity variants, and the block-based conventional model.

pub mod conventional;
pub mod costs;
pub mod iso_gep;
pub mod keys;
pub mod ldc;
pub mod lp;


use thiserror::Error;

use crate::types::{IndexSets, ModelFamily, ModelVariant, ParameterSet, TechKind};

pub use conventional::{build_conventional, conventional_blocks, BlockData};
pub use iso_gep::{
    build_iso_gep, closed_form_size, depreciated_capacity_coeff, depreciated_capacity_coeffs, installed_capacity,
    IsoGep, SizeReport,
};
pub use keys::{Block, ColKey, ColKind, Index, KeyError, RowKey, RowTag};
pub use ldc::{load_duration_blocks, LdcBlock};
pub use lp::{Column, LPModel, Row, Sense, StructureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("variant family {0:?} does not match the requested builder")]
    WrongFamily(ModelFamily),
    #[error("parameter set does not fit the index sets: {0}")]
    Shape(String),
    #[error("fixed capacity for ({0}, t{1}) is outside the index sets")]
    FixedOutsideSets(TechKind, usize),
}

/// Builds whichever family `variant` selects.
pub fn build_model(params: &ParameterSet, sets: &IndexSets, variant: &ModelVariant) -> Result<LPModel, ModelError> {
    match variant.family {
        ModelFamily::IsoGep => build_iso_gep(params, sets, variant),
        ModelFamily::Conventional => build_conventional(params, sets, variant),
    }
}
