mod common;

use common::{audit, battery, micro_network, micro_stream};
use pess_core::oracle::{exact_embed, OracleConfig};
use pess_core::{embedding_cost, pess_plan, CostParams, NetworkState, PessOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn guards_track_brute_force_under_churn(seed in 0u64..10_000, order in proptest::collection::vec(any::<u16>(), 12)) {
        let p = CostParams::default();
        let net = micro_network(seed);
        let stream = micro_stream(&net, seed, 12);
        let fresh = NetworkState::new(&net);
        let mut state = fresh.clone();
        let mut live = Vec::new();
        for (a, pick) in stream.arrivals.iter().zip(&order) {
            if let Ok(plan) = pess_plan(&state, &net, &a.request, &p, &PessOptions::default()) {
                state.register(&net, &a.request, &plan.candidate.embedding, p.delta).unwrap();
                live.push(a.request.id);
            }
            prop_assert_eq!(state.brute_force_guards(), state.guards().to_vec());
            if pick % 3 == 0 && !live.is_empty() {
                let id = live.remove(*pick as usize % live.len());
                state.release(&net, id).unwrap();
                prop_assert_eq!(state.brute_force_guards(), state.guards().to_vec());
            }
        }
        let rebuilt = state.rebuild(&net, p.delta).unwrap();
        prop_assert_eq!(rebuilt.residual_gamma_all(), state.residual_gamma_all());
        prop_assert_eq!(rebuilt.residual_beta_all(), state.residual_beta_all());
        for id in live {
            state.release(&net, id).unwrap();
        }
        prop_assert_eq!(state.residual_gamma_all(), fresh.residual_gamma_all());
        prop_assert_eq!(state.residual_beta_all(), fresh.residual_beta_all());
        prop_assert!(state.guards().iter().all(Option::is_none));
    }

    #[test]
    fn accepted_embeddings_pass_every_check(seed in 0u64..10_000) {
        let p = CostParams::default();
        let net = micro_network(seed);
        let mut state = NetworkState::new(&net);
        for a in &micro_stream(&net, seed, 10).arrivals {
            if let Ok(plan) = pess_plan(&state, &net, &a.request, &p, &PessOptions::default()) {
                let emb = &plan.candidate.embedding;
                prop_assert_eq!(battery(&state, &net, &a.request, emb, p.delta), Vec::<&str>::new());
                prop_assert_eq!(audit(&state, &net, &a.request, emb, p.delta), Vec::<String>::new());
                state.register(&net, &a.request, emb, p.delta).unwrap();
            }
        }
    }

    #[test]
    fn cost_grows_as_residuals_shrink(seed in 0u64..10_000) {
        let p = CostParams::default();
        let net = micro_network(seed);
        let stream = micro_stream(&net, seed, 8);
        let empty = NetworkState::new(&net);
        let mut loaded = empty.clone();
        for a in &stream.arrivals {
            let Ok(plan) = pess_plan(&loaded, &net, &a.request, &p, &PessOptions::default()) else {
                continue;
            };
            let emb = &plan.candidate.embedding;
            let before = embedding_cost(&empty, &net, emb, &a.request, &p);
            let now = embedding_cost(&loaded, &net, emb, &a.request, &p);
            prop_assert!(now >= before, "{} < {}", now, before);
            prop_assert_eq!(now, plan.candidate.cost);
            loaded.register(&net, &a.request, emb, p.delta).unwrap();
        }
    }

    #[test]
    fn oracle_never_loses_to_heuristic(seed in 0u64..10_000) {
        let p = CostParams::default();
        let net = micro_network(seed);
        let state = NetworkState::new(&net);
        let req = &micro_stream(&net, seed, 1).arrivals[0].request;
        let heuristic = pess_plan(&state, &net, req, &p, &PessOptions::default());
        let oracle = exact_embed(&state, &net, req, &OracleConfig::default(), &p);
        if let Ok(plan) = heuristic {
            let sol = oracle.expect("oracle must find what the heuristic found");
            prop_assert!(sol.cost <= plan.candidate.cost * (1.0 + 1e-9));
        }
    }
}
