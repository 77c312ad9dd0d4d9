use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treefrag::conllu::{self, Treebank};
use treefrag::eval;
use treefrag::miner::{mine, mine_iterative, MiningConfig};
use treefrag::reattach::{reattach, ParsedReduced};
use treefrag::reduce::{reduce_gold, reduce_input};
use treefrag::synthetic::random_projective_treebank;
use treefrag::tree;

fn treebank(seed: u64, tags: usize) -> Treebank {
    random_projective_treebank(&mut ChaCha8Rng::seed_from_u64(seed), 20, 12, tags)
}

fn thresholds() -> impl Strategy<Value = MiningConfig> {
    (50.0..=100.0f64, 50.0..=100.0f64, any::<bool>()).prop_map(|(h, l, tri)| MiningConfig {
        use_trigrams: tri,
        ..MiningConfig::with_thresholds(h, l)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn conllu_text_is_stable(seed in any::<u64>()) {
        let text = conllu::to_string(&treebank(seed, 6));
        prop_assert_eq!(conllu::to_string(&conllu::from_str(&text).unwrap()), text);
    }

    #[test]
    fn reduced_gold_stays_a_tree(seed in any::<u64>(), tags in 2usize..7, config in thresholds()) {
        let tb = treebank(seed, tags);
        let store = mine(&tb, &config).unwrap();
        let reduced = reduce_gold(&tb, &store).unwrap();
        prop_assert_eq!(reduced.original_words, tb.word_count());
        prop_assert_eq!(reduced.removed_words + reduced.treebank.word_count(), tb.word_count());
        for s in &reduced.treebank.sentences {
            prop_assert!(tree::is_tree(&s.heads().unwrap()));
        }
    }

    #[test]
    fn reattachment_errors_only_on_removed_words(seed in any::<u64>(), tags in 2usize..7, config in thresholds()) {
        let tb = treebank(seed, tags);
        let store = mine(&tb, &config).unwrap();
        let reduced = reduce_gold(&tb, &store).unwrap();
        let out = reattach(ParsedReduced { treebank: &reduced.treebank, records: &reduced.records }).unwrap();
        prop_assert!(out.malformed.is_empty());
        for ((restored, gold), record) in out.treebank.sentences.iter().zip(&tb.sentences).zip(&reduced.records) {
            prop_assert_eq!(restored.len(), gold.len());
            for (r, g) in restored.tokens.iter().zip(&gold.tokens) {
                prop_assert_eq!(&r.form, &g.form);
                let kept = |id: usize| record.inverse.binary_search(&id).is_ok();
                if kept(r.id) && (r.head != g.head || r.deprel != g.deprel) {
                    // only a kept word whose gold head was removed may move
                    let h = g.head.unwrap();
                    prop_assert!(h != 0 && !kept(h), "kept word {} changed", r.id);
                }
            }
        }
    }

    #[test]
    fn input_reduction_matches_gold_reduction(seed in any::<u64>(), config in thresholds()) {
        let tb = treebank(seed, 4);
        let store = mine(&tb, &config).unwrap();
        let blind = reduce_input(&tb.strip_annotations(), &store).unwrap();
        let gold = reduce_gold(&tb, &store).unwrap();
        prop_assert_eq!(blind.removed_words, gold.removed_words);
        for (b, g) in blind.records.iter().zip(&gold.records) {
            prop_assert_eq!(&b.matches, &g.matches);
            prop_assert_eq!(&b.inverse, &g.inverse);
        }
    }

    #[test]
    fn las_never_exceeds_uas(seed in any::<u64>(), other in any::<u64>()) {
        let gold = treebank(seed, 4);
        // same shapes with different trees: reuse gold lengths
        let mut rng = ChaCha8Rng::seed_from_u64(other);
        let system = Treebank::new(gold.sentences.iter().map(|s| {
            let mut guess = treefrag::synthetic::random_projective_sentence(&mut rng, s.len(), 4);
            for (g, t) in guess.tokens.iter_mut().zip(&s.tokens) {
                g.form = t.form.clone();
            }
            guess
        }).collect());
        let r = eval::score(&system, &gold).unwrap();
        prop_assert!(r.las <= r.uas && r.uas <= 100.0 && r.las >= 0.0);
        let ident = eval::score(&gold, &gold).unwrap();
        prop_assert_eq!((ident.uas, ident.las), (100.0, 100.0));
    }

    #[test]
    fn iterative_stores_reduce_to_trees(seed in any::<u64>()) {
        let tb = treebank(seed, 3);
        let config = MiningConfig { max_iterations: 20, ..MiningConfig::with_thresholds(90.0, 90.0) };
        let store = mine_iterative(&tb, &config).unwrap();
        prop_assert!(store.templates.iter().enumerate().all(|(i, t)| t.rank == Some(i)));
        let reduced = reduce_gold(&tb, &store).unwrap();
        for s in &reduced.treebank.sentences {
            prop_assert!(tree::is_tree(&s.heads().unwrap()));
        }
        let out = reattach(ParsedReduced { treebank: &reduced.treebank, records: &reduced.records }).unwrap();
        prop_assert!(out.malformed.is_empty());
    }
}
