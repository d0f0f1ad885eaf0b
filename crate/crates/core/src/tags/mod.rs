//! Time-tag ingestion and the measurement pipeline built on it.

mod demux;
mod g2;
mod hom;
mod record;
mod spectrum;
mod summary;

pub use demux::{demux_polarization, DemuxConfig, DemuxResult, PulseTag, PulseTags};
pub use g2::{g2_peak_ratio, peak_areas, G2Estimate};
pub use hom::{hom_analysis, BackgroundRun, HomAnalysis, HomScanPoint, SinglesRates};
pub use record::{flags, header_path, StreamHeader, TagRecord, TagStream, RECORD_BYTES};
pub use spectrum::{
    coincident_subset, joint_spectrum, singles_spectrum, Bins, Histogram2D, JointSpectrum, Mapped, SinglesSpectrum,
    WavelengthMap, DEFAULT_ALIAS_LIMIT_NM,
};
pub use summary::{coincident_pulses, count_summary, CountSummary};
