//! Seed resolution, candidate generation and the three feature tables the
//! learners consume: candidate rows, chaptering pairs and ordering pairs.

mod candidate;
mod candidates;
mod pairs;
mod profile;
mod seeds;
mod table;

pub use candidate::{build_candidate_dataset, CANDIDATE_FEATURES, CANDIDATE_FEATURE_COUNT};
pub use candidates::find_candidates;
pub use pairs::{
    build_pair_dataset_chapter, build_pair_dataset_order, GroupCount, CHAPTER_FEATURES, CHAPTER_FEATURE_COUNT,
    CHAPTER_RELATIVE_FEATURES, ORDER_FEATURES, ORDER_FEATURE_COUNT,
};
pub use profile::{
    impute_column_means, jaccard, relative, ArticleProfile, ArticleProfiles, Relative, MIN_CORRELATION_POINTS,
};
pub use seeds::{seed_concepts_from_query, SeedSet, STOP_WORDS};
pub use table::{CandidateDataset, Dataset, PairDataset, RowKey, LABEL_COLUMN};
