//! Property-based checks over randomly generated gapped systems: the
//! structural invariants that should hold for every valid input, not
//! only the curated examples.

mod common;

use std::sync::Arc;

use common::big;
use proptest::prelude::*;
use staircase::{
    cylinders, gaps, level_set, pi, Address, ContractionMap, ContractionSystem,
    ProbabilityVector, Scalar, SolutionPhi, Tail,
};

/// Images are placed on a grid of this many ticks; distinct sorted ticks
/// make every gap strict, so generated systems are always valid and
/// unambiguous.
const SCALE: i64 = 64;

#[derive(Clone, Debug)]
struct SystemData {
    count: usize,
    ticks: Vec<i64>,
    weights: Vec<i64>,
}

fn arb_data() -> impl Strategy<Value = SystemData> {
    (2usize..=4).prop_flat_map(|count| {
        (
            proptest::collection::btree_set(0i64..=SCALE, 2 * count),
            proptest::collection::vec(1i64..=9, count),
        )
            .prop_map(move |(ticks, weights)| SystemData {
                count,
                ticks: ticks.into_iter().collect(),
                weights,
            })
    })
}

fn build(data: &SystemData) -> (Arc<ContractionSystem>, ProbabilityVector) {
    let maps = (0..data.count)
        .map(|n| {
            let a = data.ticks[2 * n];
            let b = data.ticks[2 * n + 1];
            ContractionMap::affine_exact(big(b - a, SCALE), big(a, SCALE)).unwrap()
        })
        .collect();
    let system = Arc::new(ContractionSystem::new(maps).unwrap());
    let total: i64 = data.weights.iter().sum();
    let p = ProbabilityVector::from_rationals(
        data.weights.iter().map(|&w| big(w, total)).collect(),
    )
    .unwrap();
    (system, p)
}

fn reduce_digits(raw: &[u8], count: usize) -> Vec<u8> {
    raw.iter().map(|d| d % count as u8).collect()
}

fn lex_compare(a: &Address, b: &Address, top: u8) -> std::cmp::Ordering {
    let span = a.prefix().len().max(b.prefix().len()) + 2;
    for i in 0..span {
        let da = a.digit_at(i, top).expect("exact tail");
        let db = b.digit_at(i, top).expect("exact tail");
        match da.cmp(&db) {
            std::cmp::Ordering::Equal => {}
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cylinder_diameter_contracts(data in arb_data(), raw in proptest::collection::vec(any::<u8>(), 0..8)) {
        let (system, _) = build(&data);
        let digits = reduce_digits(&raw, system.len());
        let lo = system.apply_digits(&digits, &Scalar::zero()).unwrap();
        let hi = system.apply_digits(&digits, &Scalar::one()).unwrap();
        let length = (&hi - &lo).to_f64();
        prop_assert!(length <= system.lipschitz().powi(digits.len() as i32) + 1e-12);
    }

    #[test]
    fn invert_round_trips_exactly(data in arb_data(), num in 0i64..=1000) {
        let (system, _) = build(&data);
        let x = Scalar::ratio(num, 1000);
        for n in 0..system.len() {
            let map = system.map(n);
            let y = map.apply(&x);
            let back = map.invert(&y, system.tolerances().inv).unwrap();
            prop_assert_eq!(&back, &x);
        }
    }

    #[test]
    fn level_sets_nest(data in arb_data()) {
        let (system, _) = build(&data);
        let mut prev = level_set(&system, 0).unwrap();
        for k in 1..=3 {
            let next = level_set(&system, k).unwrap();
            prop_assert!(next.is_subset_of(&prev), "level {} leaks out of level {}", k, k - 1);
            prop_assert!(next.total_length() < prev.total_length());
            prev = next;
        }
    }

    #[test]
    fn flanks_gaps_and_hulls_partition_the_interval(data in arb_data()) {
        let (system, _) = build(&data);
        const DEPTH: usize = 3;
        let decomposition = gaps(&system, DEPTH).unwrap();
        let mut total = &(&decomposition.left_flank.1 - &decomposition.left_flank.0)
            + &(&decomposition.right_flank.1 - &decomposition.right_flank.0);
        for gap in &decomposition.gaps {
            total = &total + &gap.length();
        }
        let count = system.len();
        let words = count.pow(DEPTH as u32);
        for index in 0..words {
            let mut digits = Vec::with_capacity(DEPTH);
            let mut rest = index;
            for _ in 0..DEPTH {
                digits.push((rest % count) as u8);
                rest /= count;
            }
            let lo = system.apply_digits(&digits, system.zero_hat()).unwrap();
            let hi = system.apply_digits(&digits, system.one_hat()).unwrap();
            total = &total + &(&hi - &lo);
        }
        prop_assert_eq!(total, Scalar::one());
    }

    #[test]
    fn evaluation_is_monotone(data in arb_data(), grid in proptest::collection::vec(0i64..=400, 2)) {
        let (system, p) = build(&data);
        let phi = SolutionPhi::new(system, p).unwrap();
        let a = grid[0].min(grid[1]);
        let b = grid[0].max(grid[1]);
        let va = phi.eval_scalar(&Scalar::ratio(a, 400)).unwrap();
        let vb = phi.eval_scalar(&Scalar::ratio(b, 400)).unwrap();
        prop_assert!(
            vb.value.to_f64() >= va.value.to_f64() - 2.0 * phi.tol_phi(),
            "phi({}/400) = {} > phi({}/400) = {}",
            a, va.value.to_f64(), b, vb.value.to_f64()
        );
    }

    #[test]
    fn cylinder_masses_sum_to_one(data in arb_data(), depth in 1usize..=5) {
        let (system, p) = build(&data);
        let total = cylinders(&system, depth)
            .unwrap()
            .iter()
            .map(|c| c.mass(&p).unwrap())
            .fold(Scalar::zero(), |acc, m| &acc + &m);
        prop_assert_eq!(total, Scalar::one());
    }

    #[test]
    fn coding_respects_address_order(
        data in arb_data(),
        raw_a in proptest::collection::vec(any::<u8>(), 0..8),
        first_a in any::<bool>(),
        raw_b in proptest::collection::vec(any::<u8>(), 0..8),
        first_b in any::<bool>(),
    ) {
        let (system, _) = build(&data);
        let top = system.top_digit();
        let tail = |first: bool| if first { Tail::Constant0 } else { Tail::ConstantN };
        let a = Address::new(reduce_digits(&raw_a, system.len()), tail(first_a)).normalized(top);
        let b = Address::new(reduce_digits(&raw_b, system.len()), tail(first_b)).normalized(top);
        let pa = pi(&system, &a).unwrap().value;
        let pb = pi(&system, &b).unwrap().value;
        match lex_compare(&a, &b, top) {
            std::cmp::Ordering::Less => prop_assert!(pa < pb, "{} < {} but points reversed", a, b),
            std::cmp::Ordering::Greater => prop_assert!(pa > pb, "{} > {} but points reversed", a, b),
            std::cmp::Ordering::Equal => {
                prop_assert_eq!(&a, &b);
                prop_assert_eq!(pa, pb);
            }
        }
    }

    #[test]
    fn plateau_matches_evaluation_in_the_gap(
        data in arb_data(),
        depth in 1usize..=3,
        pick in any::<prop::sample::Index>(),
    ) {
        let (system, p) = build(&data);
        let decomposition = gaps(&system, depth).unwrap();
        let gap = &decomposition.gaps[pick.index(decomposition.gaps.len())];
        let phi = SolutionPhi::new(system, p).unwrap();
        let direct = phi.eval_scalar(&gap.midpoint()).unwrap();
        let plateau = phi.plateau(&gap.digits).unwrap();
        prop_assert_eq!(direct.error, 0.0);
        prop_assert_eq!(direct.value, plateau.value);
    }
}
