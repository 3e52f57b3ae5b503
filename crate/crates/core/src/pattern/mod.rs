//! Excitation matching, far-field evaluation, masks and pattern metrics.

pub mod element;
pub mod field;
pub mod mask;
pub mod metrics;
pub mod scan;
pub mod weights;

pub use element::{ElementPattern, ElementTable};
pub use field::{array_factor, element_array_factor, power_pattern, space_factor, Aperture, PatternGrid};
pub use mask::{db_to_linear, linear_to_db, Mask, MaskRegion, RegionShape};
pub use metrics::{gamma, pattern_metrics, sidelobe_level, GammaGrid, PatternMetrics};
pub use scan::{scan_sll_map, ScanMap, ScanSpec};
pub use weights::{cluster_excitations, matching_residual, steering_phases, ClusterWeights, PhaseMean, WeightSet};
