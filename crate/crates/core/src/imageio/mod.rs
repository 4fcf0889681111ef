//! Grayscale images, masks, diagnostics and stability CSV, run configuration.

mod config;
mod csv;
mod pgm;

pub use config::{IcSource, RunConfig, KEYS as CONFIG_KEYS};
pub use csv::{
    read_diagnostics, read_diagnostics_csv, read_stability, read_stability_csv, write_diagnostics,
    write_diagnostics_csv, write_stability, write_stability_csv, DIAG_HEADER, STABILITY_HEADER,
};
pub use pgm::{
    decode_pgm, encode_pgm, load_mask, load_pgm, parse_pgm, quantize, save_pgm, Graymap,
};

/// Float text that parses back to the same bits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
