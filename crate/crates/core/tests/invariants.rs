use eema_core::eema::{build_hierarchy, elect_cluster_heads, elect_super_cluster_heads, layer_range, EemaParams};
use eema_core::radio::tx_energy;
use eema_core::sim::{run_simulation, Protocol, SimOptions};
use eema_core::{deploy, Hop, NodeId, Position, RadioParams, ScenarioConfig, Topology};
use proptest::prelude::*;

fn scenarios() -> [ScenarioConfig; 2] {
    [ScenarioConfig::scenario1(), ScenarioConfig::scenario2()]
}

fn small_field(n: u32) -> ScenarioConfig {
    ScenarioConfig { n_nodes: n, field_size_m: 400.0, bs_position: Position::new(200.0, 200.0), ..ScenarioConfig::scenario1() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn neighbor_relation_is_symmetric(seed in any::<u64>(), n in 2u32..120, r in 10.0f64..150.0) {
        let t = deploy(&small_field(n), seed).unwrap();
        let table = t.neighbor_table(r);
        for i in t.alive_ids() {
            for &j in table.of(i) {
                prop_assert!(j != i);
                prop_assert!(t.dist(i, j) <= r);
                prop_assert!(table.of(j).contains(&i));
            }
        }
    }

    #[test]
    fn transmit_cost_grows_with_distance(a in 0.0f64..500.0, b in 0.0f64..500.0, bits in 1u64..10_000) {
        let radio = RadioParams::table_one().with_derived_crossover();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(tx_energy(&radio, bits, lo).unwrap() <= tx_energy(&radio, bits, hi).unwrap());
    }

    #[test]
    fn transmit_cost_grows_within_each_regime(a in 0.0f64..500.0, b in 0.0f64..500.0) {
        // With the tabulated crossover the cost dips slightly at d0, so only
        // compare distances on the same side of it.
        let radio = RadioParams::table_one();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assume!((lo <= radio.d0) == (hi <= radio.d0));
        prop_assert!(tx_energy(&radio, 4000, lo).unwrap() <= tx_energy(&radio, 4000, hi).unwrap());
    }

    #[test]
    fn cluster_heads_separated_and_covering(seed in any::<u64>(), n in 1u32..200) {
        let t = deploy(&small_field(n), seed).unwrap();
        let (heads, _) = elect_cluster_heads(&t, 50.0, false).unwrap();
        check_cluster_heads(&t, &heads, 50.0);
    }

    #[test]
    fn hierarchy_is_a_tree_rooted_at_the_base_station(seed in any::<u64>(), n in 1u32..200) {
        let cfg = small_field(n);
        let t = deploy(&cfg, seed).unwrap();
        let (tree, _) = build_hierarchy(&t, &cfg, &EemaParams::default()).unwrap();
        for i in t.alive_ids() {
            let path = tree.path_to_bs(i);
            prop_assert!(path.is_some(), "node {:?} never reaches the base station", i);
            let path = path.unwrap();
            prop_assert_eq!(path.last(), Some(&Hop::BaseStation));
            let mut seen: Vec<Hop> = path.clone();
            seen.sort_by_key(|h| match h { Hop::Node(n) => n.0 as i64, Hop::BaseStation => -1 });
            seen.dedup();
            prop_assert_eq!(seen.len(), path.len());
        }
    }
}

fn check_cluster_heads(t: &Topology, heads: &[NodeId], r_c: f64) {
    for (k, &a) in heads.iter().enumerate() {
        for &b in &heads[k + 1..] {
            assert!(t.dist(a, b) > r_c, "heads {a:?} and {b:?} are {} m apart", t.dist(a, b));
        }
    }
    for i in t.alive_ids() {
        assert!(
            heads.iter().any(|&h| h == i || t.dist(i, h) <= r_c),
            "node {i:?} is not covered"
        );
    }
}

#[test]
fn election_invariants_hold_on_both_scenarios() {
    for cfg in scenarios() {
        for seed in 0..20 {
            let t = deploy(&cfg, seed).unwrap();
            let (tree, _) = build_hierarchy(&t, &cfg, &EemaParams::default()).unwrap();
            check_cluster_heads(&t, tree.cluster_heads(), cfg.r_c);
            for i in t.alive_ids() {
                let path = tree.path_to_bs(i).expect("reaches the base station");
                assert!(path.len() <= t.len() + 1);
            }
        }
    }
}

#[test]
fn super_cluster_heads_do_not_depend_on_alpha() {
    for cfg in scenarios() {
        for seed in 0..20 {
            let t = deploy(&cfg, seed).unwrap();
            let (chs, _) = elect_cluster_heads(&t, cfg.r_c, false).unwrap();
            let mut is_head = vec![false; t.len()];
            for h in &chs {
                is_head[h.index()] = true;
            }
            let r_s = layer_range(3, cfg.r_c, cfg.r_t);
            let reference = elect_super_cluster_heads(&t, &chs, &is_head, r_s, 1.0).0;
            for alpha in [0.5, 2.0] {
                let other = elect_super_cluster_heads(&t, &chs, &is_head, r_s, alpha).0;
                assert_eq!(other, reference, "seed {seed}, alpha {alpha}");
            }
        }
    }
}

#[test]
fn head_phase_message_count_matches_the_closed_form() {
    let cfg = ScenarioConfig::scenario1();
    let opts = SimOptions { round_cap: 30, ..SimOptions::default() };
    for seed in 0..20 {
        let report = run_simulation(&cfg, Protocol::Eema(EemaParams::default()), seed, &opts).unwrap();
        for m in &report.per_round {
            let expected = 2 * u64::from(m.k_s) + u64::from(m.k_c) - u64::from(m.k_l);
            assert_eq!(m.control_messages.sch_phase(), expected, "seed {seed} round {}", m.round);
            assert!(m.control_messages.ch_phase() <= 4 * u64::from(cfg.n_nodes));
        }
    }
}
