//! Reading and writing matrices, synthetic data, and the static exports:
//! per-node split views and the dendrogram SVG.

mod svg;
mod synth;
mod table;
mod views;

pub use svg::{linkage_from_svg, render_dendrogram_svg, validate_linkage, SvgOptions, PALETTE};
pub use synth::{add_uniform_outliers, make_blobs, make_rings, BlobSpec, Blobs};
pub use table::{format_matrix, load_matrix, parse_matrix, save_matrix, write_atomic, Delimiter, LoadOptions};
pub use views::{export_split_views, node_view, views_to_json, SplitView, ViewsDocument, VIEWS_FORMAT_VERSION};
