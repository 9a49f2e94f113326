//! On-disk formats: depth maps (16-bit PNG, PFM), embedding stores,
//! checkpoints, manifests and structured captions.

mod binary;
pub mod caption;
pub mod checkpoint;
pub mod embeddings;
pub mod manifest;
pub mod pfm;
pub mod png16;

pub use caption::{render_structured_caption, shuffled_captions, InstanceList};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use embeddings::{embedding_store_read, embedding_store_write, EmbeddingStore};
pub use manifest::{
    load_dataset, load_depth, load_record, load_training_set, DatasetManifest, EmbeddingRef, LoadedSample,
    SampleRecord, StoreCache,
};
pub use pfm::{read_pfm, write_pfm};
pub use png16::{read_depth_png16, write_depth_png16, KITTI_DIVISOR, NYU_DIVISOR};
