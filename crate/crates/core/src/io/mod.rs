//! Configuration documents, binary click streams and tabular exports.

mod config;
mod ertt;
mod tables;

pub use config::{
    parse_config, serialize_config_document, CavitySection, ConfigDocument, DetectorSection,
    EmitterSection, LaserSection, ScanSection, SeedSection, SequenceSection, SourceName,
    SourceSection,
};
pub use ertt::{decode, encode, read_clickstream, write_clickstream, HEADER_LEN, MAGIC, RECORD_LEN, VERSION};
pub use tables::{
    read_correlation_csv, read_fit_csv, read_histogram_csv, read_spectra_csv, write_correlation_csv,
    write_fit_csv, write_histogram_csv, write_scans_csv, write_spectrum_csv, CorrelationRow, Summary,
};
