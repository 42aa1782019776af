mod common;

use common::{all_graphs, all_subsets, brute_pair, brute_universal, random, random_config};
use pfilter::check::{check_language_inclusion, check_output_compat_general, check_output_simulation, check_sso};
use pfilter::filter::validate;
use pfilter::reduce::{outputcompat_instance, random_filter, universality_instance, AsfNfa, GeneratorConfig};

#[test]
fn universality_on_all_two_state_automata() {
    let mut universal = 0;
    for n in 1..=2 {
        for g in all_graphs(n, &["a", "b"], &all_subsets(n)) {
            let nfa = AsfNfa::new(g.clone());
            let (f, f2) = universality_instance(&nfa).unwrap();
            assert_eq!(f.state_count(), 1);
            assert_eq!(f2.state_count(), g.state_count());
            let holds = check_output_simulation(&f, &f2, false).holds;
            assert_eq!(holds, brute_universal(&g), "{g:?}");
            universal += holds as usize;
        }
    }
    assert!(universal > 0);
}

#[test]
fn outputcompat_tracks_inclusion_on_random_pairs() {
    for seed in 0..300u64 {
        let a = random(&random_config(seed, 4, 2, 1));
        let b = random(&GeneratorConfig {
            alphabet_size: a.alphabet().len(),
            edge_density: 0.5,
            ..random_config(seed + 10_000, 4, 2, 1)
        });
        let (f, f2) = outputcompat_instance(&a, &b);
        let compat = check_output_compat_general(&f, &f2).holds;
        assert_eq!(compat, check_language_inclusion(&a, &b).holds, "seed {seed}");
        let oracle = brute_pair(&a, &b, a.state_count() << b.state_count());
        assert_eq!(compat, oracle.inclusion.is_none(), "seed {seed}");
    }
}

#[test]
fn generated_filters_are_valid_and_pruned() {
    for seed in 0..200u64 {
        for cfg in [
            random_config(seed, 8, 3, 4),
            GeneratorConfig {
                force_deterministic: true,
                ..random_config(seed, 8, 3, 4)
            },
            GeneratorConfig {
                force_sso: true,
                ..random_config(seed, 5, 2, 3)
            },
        ] {
            let f = random_filter(&cfg).unwrap();
            assert!(validate(&f).is_empty());
            assert!(f.reachable().iter().all(|&r| r));
            assert_eq!(f, random_filter(&cfg).unwrap());
            if cfg.force_deterministic {
                assert!(f.is_tracing_deterministic());
            }
            if cfg.force_sso {
                assert!(check_sso(&f).holds);
            }
        }
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let bad = GeneratorConfig {
        edge_density: 1.5,
        ..GeneratorConfig::default()
    };
    assert!(random_filter(&bad).is_err());
    let empty = GeneratorConfig {
        state_count: 0,
        ..GeneratorConfig::default()
    };
    assert!(random_filter(&empty).is_err());
}
