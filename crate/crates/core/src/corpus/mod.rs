//! Dataset construction: VerbNet frame inventories, {verb, preposition} pair
//! datasets, full-sentence variants mined from parsed corpora, and human
//! judgment normalization.

mod dataset;
mod extract;
mod fullsent;
mod judgments;
mod ptb;
mod tsv;
mod types;
mod verbnet;

pub use dataset::{balance_subsample, generate_pair_dataset, stratified_split, SplitRatios};
pub use extract::{extract_vp_constructions, Lemmatizer, VpConstruction};
pub use fullsent::{build_fullsentence_dataset, BuildStats, FullSentenceMode};
pub use judgments::{normalize_judgments, read_judgments_csv, subject_z_scores};
pub use ptb::{parse_ptb_tree, ParseTree};
pub use tsv::{
    read_gradient_items, read_pairs_tsv, read_sentences_tsv, write_pairs_tsv,
    write_sentences_tsv, GradientItem,
};
pub use types::{
    ArgLabel, DatasetSplit, FeaturalPrepMap, FrameInventory, GradientExample, JudgmentMatrix,
    Labeled, LabeledPair, Preposition, SentenceExample, VerbLemma,
};
pub use verbnet::{parse_verbnet, read_verbnet_dir, VerbNetOptions};
