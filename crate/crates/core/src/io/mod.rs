//! On-disk artifacts: embedding containers, grid metadata, caption corpora,
//! region lists and masks.

mod captions;
mod container;
mod meta;
mod pnm;
mod regions;

pub use captions::{parse_captions, read_captions, write_captions, CaptionRecord};
pub use container::{
    read_container, write_container, EmbeddingContainer, DTYPE_F32, HEADER_LEN, MAGIC,
    UNIT_NORM_TOL, VERSION,
};
pub use meta::{
    load_grid, read_grid_meta, read_json, sidecar_path, write_grid_meta, write_json, GridMeta,
};
pub use pnm::{
    decode_pgm, decode_ppm, encode_pgm, encode_ppm, read_mask, read_pgm, write_mask, write_pgm,
    write_ppm, BinaryMask, GrayImage, RgbImage,
};
pub use regions::{
    read_regions, regions_to_jsonl, validate_regions, write_regions, Region, Strategy,
};
