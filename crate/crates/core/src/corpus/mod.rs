//! Ingestion of transcripts, match rows and commentary; question extraction,
//! entity masking and tokenization.

mod differential;
mod ingest;
mod lexicon;
mod merge;
mod names;
pub mod porter;
mod records;
mod text;

pub use differential::{word_usage_differential, WordSkew, WordUsageDifferential};
pub use ingest::{
    balance_by_gender, read_commentary, read_matches, read_transcripts, CommentaryDoc, Gender,
    MatchRecord, Tour, TranscriptRecord,
};
pub use lexicon::WordList;
pub use merge::{count_question_segments, merge_transcripts, Interview, MergeOutput, MergeReport, Outcome};
pub use names::canonical_name;
pub use records::{read_questions, write_questions, QuestionRecord};
pub use text::{mask_entities, split_questions, tokenize, Question, TextProcessor, Token, MASK_TOKEN};
