//! Static word embeddings and PCA reduction.

mod pca;
mod table;

pub use pca::{pca_fit, PcaModel};
pub use table::{
    load_embeddings, read_embeddings, write_text_vec, write_word2vec_bin, EmbeddingFormat,
    EmbeddingTable, OovPolicy,
};
