mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;

use qbias::analysis::{pair_by_outcome, ScoredQuestion};
use qbias::corpus::{Gender, Outcome, TextProcessor};
use qbias::ngram_lm::{count_ngrams, deserialize_model, estimate_kn, serialize_model};
use qbias::stats::{mann_whitney_u, midranks, wilcoxon_signed_rank, PairedSample, Sample, Sidedness};
use qbias::typicality::fit_idf;

use common::KnOracle;

fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
    let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]).prop_map(str::to_string);
    prop::collection::vec(prop::collection::vec(word, 1..6), 1..6)
}

fn values(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0i32..8).prop_map(f64::from), 1..max)
}

proptest! {
    #[test]
    fn kn_normalizes_and_matches_oracle(c in corpus()) {
        let model = estimate_kn(&count_ngrams(&c));
        let oracle = KnOracle::new(&c, 0.5);
        for u in &oracle.vocab {
            let total: f64 = oracle.predicted().map(|w| model.prob(u, w)).sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "context {u}: {total}");
            for w in oracle.predicted() {
                assert_relative_eq!(model.prob(u, w), oracle.prob(u, w), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn perplexity_at_least_one(c in corpus(), q in prop::collection::vec("[a-h]", 1..10)) {
        let model = estimate_kn(&count_ngrams(&c));
        let (pp, n) = model.sequence_perplexity(&q).unwrap();
        prop_assert!(pp >= 1.0);
        prop_assert_eq!(n, q.len() + 1);
    }

    #[test]
    fn model_bytes_round_trip(c in corpus()) {
        let model = estimate_kn(&count_ngrams(&c));
        let bytes = serialize_model(&model);
        let back = deserialize_model(&bytes).unwrap();
        prop_assert_eq!(serialize_model(&back), bytes);
    }

    #[test]
    fn mann_whitney_statistics_complement(a in values(15), b in values(15)) {
        let sa = Sample::new("a", a.clone());
        let sb = Sample::new("b", b.clone());
        if let (Ok(ab), Ok(ba)) = (
            mann_whitney_u(&sa, &sb, Sidedness::TwoSided),
            mann_whitney_u(&sb, &sa, Sidedness::TwoSided),
        ) {
            prop_assert_eq!(ab.statistic + ba.statistic, (a.len() * b.len()) as f64);
            assert_relative_eq!(ab.p_value, ba.p_value, max_relative = 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
        }
    }

    #[test]
    fn wilcoxon_swap_is_symmetric(pairs in prop::collection::vec(((0i32..6), (0i32..6)), 1..25)) {
        let pairs: Vec<(f64, f64)> = pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let p = PairedSample::new("p", pairs);
        if let Ok(r) = wilcoxon_signed_rank(&p, Sidedness::TwoSided) {
            let s = wilcoxon_signed_rank(&p.swapped(), Sidedness::TwoSided).unwrap();
            let m = r.n2 as f64;
            prop_assert_eq!(r.statistic + s.statistic, m * (m + 1.0) / 2.0);
            assert_relative_eq!(r.p_value, s.p_value, max_relative = 1e-12);
        }
    }

    #[test]
    fn midranks_sum(v in values(40)) {
        let n = v.len() as f64;
        prop_assert_eq!(midranks(&v).iter().sum::<f64>(), n * (n + 1.0) / 2.0);
    }

    #[test]
    fn typicality_ignores_repeated_words(reps in 1usize..5) {
        let text = TextProcessor::default();
        let qs: Vec<_> = ["How was the serve today?", "How was the haircut?", "Serve and volley today?"]
            .iter()
            .enumerate()
            .flat_map(|(i, s)| text.extract_questions(s, "t", i))
            .collect();
        let model = fit_idf(&qs, &text.stopwords);
        let repeated = format!("{}today?", "serve volley ".repeat(reps));
        let once = text.extract_questions("Serve volley today?", "o", 0);
        let many = text.extract_questions(&repeated, "m", 0);
        prop_assert_eq!(model.score(&once[0]), model.score(&many[0]));
    }

    #[test]
    fn pairing_ignores_input_order(
        qs in prop::collection::vec((0u8..3, any::<bool>(), 1u32..1000), 2..40),
        seed in any::<u64>(),
        rotate in 0usize..40,
    ) {
        let scored: Vec<ScoredQuestion> = qs
            .iter()
            .enumerate()
            .map(|(i, &(player, won, pp))| ScoredQuestion {
                question_id: format!("q{i:03}"),
                player_id: format!("p{player}"),
                gender: if player == 0 { Gender::Female } else { Gender::Male },
                season: 2015,
                outcome: if won { Outcome::Won } else { Outcome::Lost },
                rank: Some(5),
                perplexity: pp as f64,
                n_scored_tokens: 3,
                atypicality: None,
                typicality: None,
            })
            .collect();
        let mut shuffled = scored.clone();
        shuffled.reverse();
        let k = rotate % shuffled.len();
        shuffled.rotate_left(k);
        match (pair_by_outcome(&scored, seed), pair_by_outcome(&shuffled, seed)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}
