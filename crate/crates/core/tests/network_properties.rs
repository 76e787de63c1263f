//! Properties of network simulation: determinism, edge alternation, cycle
//! soundness and time reversal at a reflector.

use std::sync::Arc;

use gadgetnet::compiler::{compile_abstract, compile_planar};
use gadgetnet::gadgets::{make_library_gadget, GadgetKind, GadgetTemplate};
use gadgetnet::network::{edge_usage, simulate, Link, Network, NetworkBuilder, Outcome, SimConfig, StopReason};
use gadgetnet::qbf::enumerate_formulas;
use gadgetnet::PortRef;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Catalog gizmos in several starting states.
fn gizmo_pool() -> Vec<Arc<GadgetTemplate>> {
    let make = |kind, h: &[(&str, &str)]| make_library_gadget(kind, None, h).unwrap();
    vec![
        make(GadgetKind::Switch, &[]),
        make(GadgetKind::Switch, &[("Set", "Out")]),
        make(GadgetKind::Switch, &[("Test", "F-Out")]),
        make(GadgetKind::ReversibleFanIn, &[]),
        make(GadgetKind::ReversibleFanIn, &[("b", "c")]),
        make(GadgetKind::AbaCrossover, &[]),
        make(GadgetKind::AbaCrossover, &[("B", "b")]),
    ]
}

/// Up to `max` random gadgets with random pairings. When `reflector` is set,
/// one port is self-paired; the start and target ports are left open.
fn random_network(seed: u64, max: usize, pool: &[Arc<GadgetTemplate>], reflector: bool) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetworkBuilder::new();
    let n = rng.gen_range(1..=max);
    for i in 0..n {
        b.add(format!("g{i}"), pool.choose(&mut rng).unwrap().clone()).unwrap();
    }
    let mut ports: Vec<PortRef> =
        (0..n).flat_map(|i| (0..b.instance(i).template.num_ports()).map(move |p| PortRef::new(i, p))).collect();
    ports.shuffle(&mut rng);
    b.set_start(ports[0]);
    b.set_target(ports[1]);
    let mut rest = &ports[2..];
    if reflector {
        b.reflect(rest[0]).unwrap();
        rest = &rest[1..];
    }
    for pair in rest.chunks(2) {
        match pair {
            [p, q] => b.connect(*p, *q).unwrap(),
            [p] => b.reflect(*p).unwrap(),
            _ => unreachable!(),
        }
    }
    b.build().unwrap()
}

fn fsm_pool() -> Vec<Arc<GadgetTemplate>> {
    [GadgetKind::Spinner3, GadgetKind::Locking2Toggle, GadgetKind::RotateCw, GadgetKind::RotateCcw]
        .into_iter()
        .map(|k| make_library_gadget(k, None, &[]).unwrap())
        .chain(gizmo_pool())
        .collect()
}

proptest! {
    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let net = random_network(seed, 8, &fsm_pool(), false);
        let config = SimConfig::default();
        prop_assert_eq!(simulate(&net, &config), simulate(&net, &config));
    }

    #[test]
    fn gizmo_networks_alternate_along_edges(seed in any::<u64>()) {
        let net = random_network(seed, 8, &gizmo_pool(), true);
        let out = simulate(&net, &SimConfig::default());
        let usage = edge_usage(out.trace(), &net).unwrap();
        prop_assert!(usage.alternates(), "{:?}", out.trace().moves());
    }

    #[test]
    fn cycles_stay_cycles_with_more_steps(seed in any::<u64>()) {
        let net = random_network(seed, 6, &fsm_pool(), false);
        let out = simulate(&net, &SimConfig::default());
        if let Outcome::Cycled { first_repeat, period, .. } = out {
            let steps = first_repeat + period;
            for max_steps in [steps, 2 * steps, 4 * steps + 16] {
                let again = simulate(&net, &SimConfig { max_steps, ..SimConfig::default() });
                prop_assert!(!again.is_reached());
            }
            let longer = simulate(&net, &SimConfig { max_steps: 2 * SimConfig::default().max_steps, ..SimConfig::default() });
            let same = matches!(longer, Outcome::Cycled { first_repeat: f, period: p, .. } if f == first_repeat && p == period);
            prop_assert!(same);
        }
    }

    #[test]
    fn reflection_reverses_the_trace(seed in any::<u64>()) {
        let net = random_network(seed, 6, &gizmo_pool(), true);
        let out = simulate(&net, &SimConfig::default());
        let events = &out.trace().events;
        if let Some(k) = events.iter().position(|e| net.link(PortRef::new(e.instance, e.exit)) == Link::Reflect) {
            let pre: Vec<_> = events[..=k].iter().map(|e| (e.instance, e.entry, e.exit)).collect();
            let post: Vec<_> = events[k + 1..].iter().map(|e| (e.instance, e.exit, e.entry)).collect();
            let mut reversed = pre.clone();
            reversed.reverse();
            // the return trip ends at the start unless a limit intervenes
            prop_assert_eq!(&post, &reversed);
            let ended_at_start = matches!(
                &out,
                Outcome::Unspecified { reason: StopReason::OpenPort, instance, port, .. }
                    if PortRef::new(*instance, *port) == net.start()
            );
            prop_assert!(ended_at_start, "{}", out.label());
        }
    }
}

#[test]
fn compiled_networks_alternate_along_edges() {
    for f in (1..=2).flat_map(|n| enumerate_formulas(n, 2)) {
        for compiled in [compile_abstract(&f).unwrap(), compile_planar(&f).unwrap()] {
            let out = simulate(&compiled.network, &SimConfig::default());
            let usage = edge_usage(out.trace(), &compiled.network).unwrap();
            assert!(usage.alternates(), "{f} ({:?})", compiled.mode);
        }
    }
}

#[test]
fn compiled_cycles_survive_doubled_limits() {
    for f in enumerate_formulas(2, 1).into_iter().filter(|f| !f.evaluate()) {
        let net = compile_abstract(&f).unwrap().network;
        let Outcome::Cycled { first_repeat, period, .. } = simulate(&net, &SimConfig::default()) else {
            panic!("{f} did not cycle")
        };
        let doubled = SimConfig { max_steps: 2 * (first_repeat + period), ..SimConfig::default() };
        assert!(!simulate(&net, &doubled).is_reached(), "{f}");
    }
}

#[test]
fn no_cycle_memory_reports_step_limit() {
    let f = enumerate_formulas(2, 1).into_iter().find(|f| !f.evaluate()).unwrap();
    let net = compile_abstract(&f).unwrap().network;
    let out = simulate(&net, &SimConfig { max_steps: 10_000, cycle_memory: 0, record_trace: false });
    assert!(matches!(out, Outcome::StepLimit { .. }), "{}", out.label());
}
