//! Synthetic corpora with a planted difference in game-relatedness.
//!
//! Two fixed first-order Markov sources produce text: a commentary source
//! over tennis vocabulary and a distractor source over off-court vocabulary,
//! sharing function words. Commentary lines come from the commentary source.
//! Questions to male players are drawn from the distractor source with
//! probability `male_mix`, questions to female players with probability
//! `gap`; the rest come from the commentary source. `gap = male_mix` gives
//! null data.

use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CommentaryDoc, Gender, MatchRecord, Tour, TranscriptRecord};
use crate::error::{Error, Result};

const SHARED: &[&str] = &[
    "the", "a", "your", "you", "it", "was", "is", "to", "in", "of", "and", "on", "with", "for", "that", "this",
    "today", "there", "so", "very", "again", "now", "after", "before", "then", "just", "really", "at",
];

const TENNIS: &[&str] = &[
    "serve", "ace", "fault", "double", "break", "point", "game", "set", "match", "forehand", "backhand", "volley",
    "net", "baseline", "rally", "return", "deuce", "advantage", "love", "lob", "smash", "slice", "topspin",
    "winner", "error", "hold", "court", "line", "drop", "shot", "first", "second", "tiebreak", "lead", "saves",
    "wide", "body", "angle", "pace", "deep", "short", "fires", "hits", "misses", "chases", "serving", "racket",
    "opponent", "clay", "grass", "hard", "umpire", "challenge", "crowd", "score", "games", "sets", "points",
];

const DISTRACTOR: &[&str] = &[
    "family", "dress", "fashion", "designer", "movie", "dinner", "holiday", "wedding", "music", "shopping",
    "birthday", "clothes", "hair", "makeup", "magazine", "restaurant", "vacation", "friends", "party",
    "chocolate", "photo", "book", "city", "weekend", "jewelry", "baby", "coffee", "song", "dance", "garden",
    "puppy", "mother", "father", "sister", "brother", "boyfriend", "husband", "school", "painting", "beach",
    "shoes", "perfume", "cooking", "television", "concert", "museum", "horse", "flowers", "poetry", "singer",
];

const QUESTION_STARTS: &[&str] = &["how", "what", "did", "do", "was", "is", "can", "when", "why", "where"];

/// Fixed seeds for the two sources; only sampling depends on the run seed.
const COMMENTARY_SOURCE_SEED: u64 = 0x5EED_0001;
const DISTRACTOR_SOURCE_SEED: u64 = 0x5EED_0002;

const MIN_WORDS: usize = 3;
const MAX_WORDS: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    /// Questions per gender.
    pub n_per_group: usize,
    /// Share of female questions drawn from the distractor source.
    pub gap: f64,
    /// Share of male questions drawn from the distractor source.
    pub male_mix: f64,
    pub commentary_lines: usize,
    pub players_per_gender: usize,
    pub first_season: i32,
    pub seasons: u32,
    /// Chance that a player's rank is missing from a match row.
    pub missing_rank_rate: f64,
    /// Chance that a question mentions a (masked) name.
    pub name_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_per_group: 2000,
            gap: 0.0,
            male_mix: 0.0,
            commentary_lines: 2000,
            players_per_gender: 20,
            first_season: 2012,
            seasons: 4,
            missing_rank_rate: 0.05,
            name_rate: 0.1,
        }
    }
}

impl SynthConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gap", self.gap),
            ("male_mix", self.male_mix),
            ("missing_rank_rate", self.missing_rank_rate),
            ("name_rate", self.name_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.n_per_group == 0 || self.commentary_lines == 0 || self.players_per_gender == 0 || self.seasons == 0 {
            return Err(Error::Config(
                "n_per_group, commentary_lines, players_per_gender and seasons must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which source produced a question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Commentary,
    Distractor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedQuestion {
    pub transcript_id: String,
    pub gender: Gender,
    pub text: String,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub commentary: Vec<CommentaryDoc>,
    pub transcripts: Vec<TranscriptRecord>,
    pub matches: Vec<MatchRecord>,
    pub truth: Vec<PlantedQuestion>,
}

struct MarkovSource {
    words: Vec<&'static str>,
    starts: Vec<usize>,
    /// Successor table per word; index `words.len()` means end of sentence.
    next: Vec<(Vec<usize>, WeightedIndex<f64>)>,
}

impl MarkovSource {
    fn new(own: &[&'static str], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words: Vec<&'static str> = SHARED.iter().chain(own).copied().collect();
        let end = words.len();
        let next = (0..words.len())
            .map(|_| {
                let mut succ: Vec<usize> = rand::seq::index::sample(&mut rng, words.len(), 8).into_vec();
                succ.push(end);
                let weights: Vec<f64> = succ.iter().map(|_| rng.gen_range(0.2..1.0)).collect();
                (succ, WeightedIndex::new(weights).expect("positive weights"))
            })
            .collect();
        let starts = (0..words.len()).filter(|&i| i >= SHARED.len() || i % 3 == 0).collect();
        MarkovSource { words, starts, next }
    }

    fn sentence_from(&self, first: &str, rng: &mut impl Rng) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        let mut cur = match self.words.iter().position(|w| *w == first) {
            Some(i) => i,
            None => {
                out.push(QUESTION_STARTS.iter().find(|w| **w == first).copied().unwrap_or("so"));
                self.starts[rng.gen_range(0..self.starts.len())]
            }
        };
        loop {
            out.push(self.words[cur]);
            if out.len() >= MAX_WORDS {
                return out;
            }
            let (succ, dist) = &self.next[cur];
            let mut pick = succ[dist.sample(rng)];
            while pick == self.words.len() && out.len() < MIN_WORDS {
                pick = succ[dist.sample(rng)];
            }
            if pick == self.words.len() {
                return out;
            }
            cur = pick;
        }
    }

    fn sentence(&self, rng: &mut impl Rng) -> Vec<&'static str> {
        let first = self.words[self.starts[rng.gen_range(0..self.starts.len())]];
        self.sentence_from(first, rng)
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn player_name(gender: Gender, i: usize) -> String {
    let family = ["Abbott", "Brandt", "Castell", "Dorval", "Esposo", "Fairley", "Galvan", "Haller"];
    let g = match gender {
        Gender::Male => "Marco",
        Gender::Female => "Maria",
    };
    format!("{g} {}{i}", family[i % family.len()])
}

struct Sources {
    commentary: MarkovSource,
    distractor: MarkovSource,
}

impl Sources {
    fn new() -> Self {
        Sources {
            commentary: MarkovSource::new(TENNIS, COMMENTARY_SOURCE_SEED),
            distractor: MarkovSource::new(DISTRACTOR, DISTRACTOR_SOURCE_SEED),
        }
    }

    fn question(&self, source: Source, name: Option<&str>, rng: &mut impl Rng) -> String {
        let src = match source {
            Source::Commentary => &self.commentary,
            Source::Distractor => &self.distractor,
        };
        let start = QUESTION_STARTS[rng.gen_range(0..QUESTION_STARTS.len())];
        let words = src.sentence_from(start, rng);
        let mut s = capitalize(&words.join(" "));
        if let Some(n) = name {
            s.push_str(", ");
            s.push_str(n);
        }
        s.push('?');
        s
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let sources = Sources::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let commentary = (0..cfg.commentary_lines)
        .map(|i| {
            let n = rng.gen_range(1..=3);
            let mut text = (0..n)
                .map(|_| capitalize(&sources.commentary.sentence(&mut rng).join(" ")) + ".")
                .collect::<Vec<_>>()
                .join(" ");
            if rng.gen_bool(cfg.name_rate) {
                let g = if rng.gen_bool(0.5) { Gender::Male } else { Gender::Female };
                text = format!("{} {text}", player_name(g, rng.gen_range(0..cfg.players_per_gender)));
            }
            CommentaryDoc {
                id: (i + 1).to_string(),
                text,
                gender_tag: Some(if i % 2 == 0 { Gender::Male } else { Gender::Female }),
                match_date: None,
            }
        })
        .collect();

    let mut transcripts = Vec::new();
    let mut matches = Vec::new();
    let mut truth = Vec::new();
    for gender in Gender::ALL {
        let mix = match gender {
            Gender::Male => cfg.male_mix,
            Gender::Female => cfg.gap,
        };
        let n_distractor = (mix * cfg.n_per_group as f64).round() as usize;
        let mut sources_for: Vec<Source> = (0..cfg.n_per_group)
            .map(|i| if i < n_distractor { Source::Distractor } else { Source::Commentary })
            .collect();
        sources_for.shuffle(&mut rng);

        // centred on the top-10 cut so most players have interviews on both sides
        let base_rank: Vec<u32> = (0..cfg.players_per_gender).map(|i| 2 + (3 * i as u32) % 24).collect();
        // interviews given per player and season, for unique dates
        let mut given = vec![vec![0u64; cfg.seasons as usize]; cfg.players_per_gender];
        let tag = match gender {
            Gender::Male => 'm',
            Gender::Female => 'f',
        };
        let mut q = 0;
        while q < cfg.n_per_group {
            let player = rng.gen_range(0..cfg.players_per_gender);
            let season = rng.gen_range(0..cfg.seasons as usize);
            let day = given[player][season];
            if day >= 365 {
                return Err(Error::Config("more than 365 interviews in one player-season; add players or seasons".into()));
            }
            given[player][season] += 1;
            let date = NaiveDate::from_ymd_opt(cfg.first_season + season as i32, 1, 1)
                .expect("valid season")
                .checked_add_days(Days::new(day))
                .expect("date in range");
            let name = player_name(gender, player);
            let id = format!("{tag}{:05}", transcripts.len());
            let n_q = rng.gen_range(2..=6).min(cfg.n_per_group - q);
            let mut snippets = Vec::new();
            let mut left = n_q;
            while left > 0 {
                let k = rng.gen_range(1..=3).min(left);
                let mut parts = Vec::new();
                if rng.gen_bool(0.3) {
                    parts.push("Congratulations.".to_string());
                }
                for _ in 0..k {
                    let source = sources_for[q];
                    let mention = rng.gen_bool(cfg.name_rate).then(|| {
                        player_name(gender, rng.gen_range(0..cfg.players_per_gender))
                    });
                    let text = sources.question(source, mention.as_deref(), &mut rng);
                    truth.push(PlantedQuestion {
                        transcript_id: id.clone(),
                        gender,
                        text: text.clone(),
                        source,
                    });
                    parts.push(text);
                    q += 1;
                }
                left -= k;
                snippets.push(parts.join(" "));
            }

            let won = rng.gen_bool(0.5);
            let jitter: i64 = rng.gen_range(-8..=8);
            let rank = (base_rank[player] as i64 + jitter).max(1) as u32;
            let opp_rank = rng.gen_range(1..=200);
            let player_rank = (!rng.gen_bool(cfg.missing_rank_rate)).then_some(rank);
            let opponent = format!("Rival {}{:05}", tag.to_ascii_uppercase(), matches.len());
            let (winner, loser, wr, lr) = if won {
                (name.clone(), opponent, player_rank, Some(opp_rank))
            } else {
                (opponent, name.clone(), Some(opp_rank), player_rank)
            };
            matches.push(MatchRecord {
                match_date: date,
                winner_name: winner,
                loser_name: loser,
                winner_rank: wr,
                loser_rank: lr,
                tour: match gender {
                    Gender::Male => Tour::Atp,
                    Gender::Female => Tour::Wta,
                },
            });
            transcripts.push(TranscriptRecord {
                transcript_id: id,
                player_name: name,
                interview_date: date,
                snippets,
            });
        }
    }
    Ok(SynthCorpus {
        commentary,
        transcripts,
        matches,
        truth,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

/// Write the corpus as pipeline inputs plus a ready-to-run `pipeline.toml`.
/// Returns the written paths.
pub fn write_corpus(corpus: &SynthCorpus, cfg: &SynthConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let p = dir.join("commentary.txt");
    let text: String = corpus.commentary.iter().map(|d| d.text.clone() + "\n").collect();
    std::fs::write(&p, text).map_err(io_err(&p))?;
    written.push(p);

    let p = dir.join("commentary_genders.csv");
    let mut tags = String::from("id,gender\n");
    for d in &corpus.commentary {
        if let Some(g) = d.gender_tag {
            tags.push_str(&format!("{},{}\n", d.id, g.as_str()));
        }
    }
    std::fs::write(&p, tags).map_err(io_err(&p))?;
    written.push(p);

    let p = dir.join("transcripts.jsonl");
    let mut lines = String::new();
    for t in &corpus.transcripts {
        lines.push_str(&serde_json::to_string(t).expect("serializable"));
        lines.push('\n');
    }
    std::fs::write(&p, lines).map_err(io_err(&p))?;
    written.push(p);

    let p = dir.join("matches.csv");
    crate::analysis::write_csv(&p, &corpus.matches)?;
    written.push(p);

    let p = dir.join("truth.csv");
    crate::analysis::write_csv(&p, &corpus.truth)?;
    written.push(p);

    let p = dir.join("pipeline.toml");
    let toml = format!(
        "seed = {}\n\n[paths]\ntranscripts = \"transcripts.jsonl\"\nmatches = \"matches.csv\"\n\
         commentary = \"commentary.txt\"\ncommentary_genders = \"commentary_genders.csv\"\noutput_dir = \"out\"\n",
        cfg.seed
    );
    std::fs::write(&p, toml).map_err(io_err(&p))?;
    written.push(p);
    Ok(written)
}
