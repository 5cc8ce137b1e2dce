use garden_hose::bits::index_to_bits;
use garden_hose::bp::{parse_bp, threshold_pbp, write_bp};
use garden_hose::compile::{
    compile_formula, normalize_single_spill, parse_formula, FormulaNode, GateOp,
};
use garden_hose::constructions::{
    equality_block, equality_serial, pointer_jumping_protocol, PJInstance,
};
use garden_hose::model::{
    check_certificate, evaluate, parse_instance, transcript_protocol, write_instance,
    CertificateSet, CertificateVerdict, Instance, Matching, Protocol, Side,
};
use garden_hose::oracle::FunctionTable;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matching(ends: Vec<usize>, tap: bool, pairs: usize) -> Matching {
    let mut ends = ends;
    let mut m = Matching::new();
    if tap && !ends.is_empty() {
        m = Matching::with_tap(ends.pop().unwrap());
    }
    for c in ends.chunks(2).take(pairs) {
        if c.len() == 2 {
            m.pair(c[0], c[1]);
        }
    }
    m
}

fn instance() -> impl Strategy<Value = Instance> {
    (0usize..18).prop_flat_map(|s| {
        let pipes: Vec<usize> = (1..=s).collect();
        (
            Just(pipes.clone()).prop_shuffle(),
            Just(pipes).prop_shuffle(),
            any::<bool>(),
            0..=s / 2,
            0..=s / 2,
        )
            .prop_map(move |(a, b, tap, pa, pb)| Instance {
                pipe_count: s,
                alice: matching(a, tap, pa),
                bob: matching(b, false, pb),
            })
    })
}

fn formula() -> impl Strategy<Value = FormulaNode> {
    let leaf = prop_oneof![
        (1usize..=3).prop_map(|i| FormulaNode::Leaf(Side::Alice, i)),
        (1usize..=3).prop_map(|i| FormulaNode::Leaf(Side::Bob, i)),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        (
            prop_oneof![
                Just(GateOp::And),
                Just(GateOp::Or),
                Just(GateOp::Xor),
                Just(GateOp::Maj)
            ],
            prop::collection::vec(inner, 1..=3),
        )
            .prop_map(|(op, children)| FormulaNode::Gate(op, children))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn output_is_path_parity(inst in instance()) {
        let t = evaluate(&Protocol::constant(inst), &[], &[]).unwrap();
        prop_assert_eq!(t.wet_count, t.path.len());
        prop_assert_eq!(t.output, t.wet_count % 2 == 1);
        prop_assert_eq!(t.spill_side == Side::Bob, t.output);
    }

    #[test]
    fn path_visits_each_pipe_once(inst in instance()) {
        let t = evaluate(&Protocol::constant(inst), &[], &[]).unwrap();
        let mut seen = t.path.clone();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), t.path.len());
    }

    #[test]
    fn instance_text_round_trips(inst in instance()) {
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(write_instance(&back), text);
        let (a, b) = (Protocol::constant(inst), Protocol::constant(back));
        prop_assert_eq!(evaluate(&a, &[], &[]).unwrap().path, evaluate(&b, &[], &[]).unwrap().path);
    }

    #[test]
    fn wet_pipes_certify_the_output(inst in instance()) {
        let t = evaluate(&Protocol::constant(inst.clone()), &[], &[]).unwrap();
        let set = CertificateSet::new(t.path.iter().copied());
        prop_assert_eq!(check_certificate(&inst, &set), CertificateVerdict::ConsistentParity(t.output));
    }

    #[test]
    fn normalization_keeps_outputs(inst in instance()) {
        let p = Protocol::constant(inst);
        let n = normalize_single_spill(&p);
        prop_assert_eq!(n.protocol.pipe_count(), 3 * p.pipe_count() + 1);
        let base = evaluate(&p, &[], &[]).unwrap();
        let norm = evaluate(&n.protocol, &[], &[]).unwrap();
        prop_assert_eq!(base.output, norm.output);
        let end = if norm.output { Some(n.spill1()) } else { n.spill0(&[]).unwrap() };
        prop_assert_eq!(norm.path.last().copied(), end);
    }

    #[test]
    fn formula_display_round_trips(f in formula()) {
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn compiled_formula_matches_direct_evaluation(f in formula()) {
        let p = compile_formula(&f).unwrap();
        let (nx, ny) = f.input_lens();
        for i in 0..1u64 << (nx + ny) {
            let (x, y) = (index_to_bits(i >> ny, nx), index_to_bits(i & ((1 << ny) - 1), ny));
            prop_assert_eq!(evaluate(&p, &x, &y).unwrap().output, f.evaluate(&x, &y));
        }
    }

    #[test]
    fn transcript_tracks_the_water(n in 1usize..=8, x in any::<u8>(), y in any::<u8>(), block in any::<bool>()) {
        let p = if block { equality_block(n, n.min(2)).unwrap() } else { equality_serial(n) };
        let (x, y) = (index_to_bits(x as u64 % (1 << n), n), index_to_bits(y as u64 % (1 << n), n));
        let t = evaluate(&p, &x, &y).unwrap();
        let tr = transcript_protocol(&p, &x, &y).unwrap();
        prop_assert_eq!(tr.messages.len(), t.wet_count);
        prop_assert_eq!(tr.output, t.output);
    }

    #[test]
    fn equality_serial_agrees(n in 1usize..=32, seed in any::<u64>(), equal in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<bool> = (0..n).map(|_| rand::Rng::gen(&mut rng)).collect();
        let y = if equal { x.clone() } else { (0..n).map(|_| rand::Rng::gen(&mut rng)).collect() };
        let t = evaluate(&equality_serial(n), &x, &y).unwrap();
        prop_assert_eq!(t.output, x == y);
        prop_assert!(t.wet_count <= 2 * n);
    }

    #[test]
    fn pointer_jumping_time_is_at_most_k(n in 2usize..=10, k in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = PJInstance::random(n, k, &mut rng);
        let p = pointer_jumping_protocol(n, k).unwrap();
        let t = evaluate(&p, &inst.alice_input(), &inst.bob_input()).unwrap();
        prop_assert!(t.wet_count <= k);
    }

    #[test]
    fn table_text_round_trips(ab in 0usize..=3, bb in 0usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = FunctionTable::random(ab, bb, &mut rng).unwrap();
        prop_assert_eq!(FunctionTable::parse(&f.to_text()).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn threshold_program_text_round_trips(n in 1usize..=40, frac in 0.0f64..=1.0) {
        let theta = ((n as f64) * frac).round() as usize;
        let (bp, _) = threshold_pbp(n, theta.max(1)).unwrap();
        let text = write_bp(&bp);
        prop_assert_eq!(write_bp(&parse_bp(&text).unwrap()), text);
    }
}
