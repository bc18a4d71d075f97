mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use common::*;
use tero::eval::{evaluate, rank_query, FilterSet, Side};
use tero::model::{ModelParams, Norm};

/// Copies `params` into a model with one extra entity whose embedding is
/// pushed far away, so every candidate built from it scores worse than any
/// real fact.
fn with_distant_entity(params: &ModelParams<f64>) -> ModelParams<f64> {
    let shape = *params.shape();
    let k = shape.dim;
    let flat = params.to_flat();
    let split = 2 * shape.n_entities * k;
    let mut grown = flat[..split].to_vec();
    grown.extend(std::iter::repeat_n(1e6, 2 * k));
    grown.extend_from_slice(&flat[split..]);
    let mut out = ModelParams::init(
        tero::model::Shape {
            n_entities: shape.n_entities + 1,
            ..shape
        },
        0,
    )
    .unwrap();
    out.assign_flat(&grown).unwrap();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn worse_entity_leaves_ranks_unchanged(seed in 0u64..1000, norm in prop_oneof![Just(Norm::L1), Just(Norm::L2)]) {
        let facts = random_kg(12, 2, 4, 40, seed);
        let binning = yearly_binning(&facts);
        let filter = FilterSet::build(&facts, &binning).unwrap();
        let params = random_params(tiny_shape(12, 2, binning.n_steps(), 4, norm), seed);
        let grown = with_distant_entity(&params);
        for q in &facts {
            for side in [Side::Subject, Side::Object] {
                prop_assert_eq!(
                    rank_query(&params, q, side, &filter, &binning).unwrap(),
                    rank_query(&grown, q, side, &filter, &binning).unwrap()
                );
            }
        }
    }

    #[test]
    fn time_wise_ranks_dominate_triple_filtered_ranks(seed in 0u64..1000) {
        let facts = random_kg(10, 2, 5, 60, seed);
        let fine = yearly_binning(&facts);
        let fine_filter = FilterSet::build(&facts, &fine).unwrap();
        let params = random_params(tiny_shape(10, 2, fine.n_steps(), 4, Norm::L1), seed);
        // Triple-level filtering: every fact is also true at every step.
        let mut every_step = Vec::new();
        let mut seen = HashSet::new();
        for q in &facts {
            if seen.insert((q.subject, q.relation, q.object)) {
                for t in 0..fine.n_steps() {
                    every_step.push(point(q.subject, q.relation, q.object, t));
                }
            }
        }
        let triple_filter = FilterSet::build(&every_step, &fine).unwrap();
        for q in &facts {
            for side in [Side::Subject, Side::Object] {
                let time_wise = rank_query(&params, q, side, &fine_filter, &fine).unwrap();
                let triple = rank_query(&params, q, side, &triple_filter, &fine).unwrap();
                prop_assert!(time_wise >= triple);
            }
        }
    }

    #[test]
    fn report_bounds(seed in 0u64..1000) {
        let facts = random_kg(15, 3, 4, 50, seed);
        let binning = yearly_binning(&facts);
        let filter = FilterSet::build(&facts, &binning).unwrap();
        let params = random_params(tiny_shape(15, 3, binning.n_steps(), 4, Norm::L1), seed);
        let r = evaluate(&params, &facts, &filter, &binning).unwrap();
        prop_assert!(r.hits1 <= r.hits3 && r.hits3 <= r.hits10);
        prop_assert!(r.mrr >= r.hits1 && r.mrr <= 1.0 && r.mrr > 0.0);
        prop_assert_eq!(r.ranks.len(), 2 * facts.len());
    }
}

#[test]
fn evaluation_is_thread_count_independent() {
    let facts = random_kg(30, 3, 6, 200, 4);
    let binning = yearly_binning(&facts);
    let filter = FilterSet::build(&facts, &binning).unwrap();
    let params = random_params(tiny_shape(30, 3, binning.n_steps(), 6, Norm::L1), 4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evaluate(&params, &facts, &filter, &binning).unwrap())
    };
    assert_eq!(run(1), run(4));
}
