use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use skewforms::testing;
use skewforms::{Form, Verdict, ZeroTest};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let chart = testing::chart(n);
        let p = r.gen_range_usize(n.saturating_sub(1));
        let a = testing::form(&mut r, &chart, p, 3);
        prop_assert!(a.d().d().is_zero());
    }

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let chart = testing::chart(n);
        let p = r.gen_range_usize(n.min(3));
        let q = r.gen_range_usize(n.min(3));
        let a = testing::form(&mut r, &chart, p, 3);
        let b = testing::form(&mut r, &chart, q, 3);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        prop_assert_eq!(ab, if (p * q) % 2 == 1 { ba.neg() } else { ba });
    }

    #[test]
    fn wedge_is_associative(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let chart = testing::chart(n);
        let forms: Vec<Form> = (0..3).map(|_| {
            let p = r.gen_range_usize(n.min(2));
            testing::form(&mut r, &chart, p, 2)
        }).collect();
        let left = forms[0].wedge(&forms[1]).unwrap().wedge(&forms[2]).unwrap();
        let right = forms[0].wedge(&forms[1].wedge(&forms[2]).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn leibniz_rule(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let chart = testing::chart(n);
        let p = r.gen_range_usize(n.min(3));
        let q = r.gen_range_usize(n.min(3));
        let a = testing::form(&mut r, &chart, p, 3);
        let b = testing::form(&mut r, &chart, q, 3);
        let lhs = a.wedge(&b).unwrap().d();
        let second = a.wedge(&b.d()).unwrap();
        let rhs = a.d().wedge(&b).unwrap().add(&if p % 2 == 1 { second.neg() } else { second }).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn flat_commutator_is_differential(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let chart = testing::chart(n);
        let a = testing::form(&mut r, &chart, 1, 3);
        let k = a.commutator(None, &ZeroTest::default()).unwrap();
        let d = a.d();
        for e in &k.entries {
            prop_assert_eq!(&e.total, &d.coefficient(&[e.alpha, e.beta]));
            prop_assert!(e.connection_part.is_zero());
        }
    }

    #[test]
    fn exact_forms_are_identical(seed in any::<u64>(), n in 1usize..=4) {
        use skewforms::relations::{analyze, Classification, EvolutionaryRelation};
        let mut r = rng(seed);
        let chart = testing::chart(n);
        let p = r.gen_range_usize(n);
        let psi = testing::form(&mut r, &chart, p, 3);
        let rel = EvolutionaryRelation::new(psi.d());
        prop_assert_eq!(analyze(&rel, &ZeroTest::default()).unwrap().classification, Classification::Identical);
    }

    #[test]
    fn verdicts_are_scale_invariant(seed in any::<u64>(), n in 2usize..=4, num in -7i64..=7, den in 1i64..=5) {
        use skewforms::relations::{analyze, EvolutionaryRelation};
        prop_assume!(num != 0);
        let mut r = rng(seed);
        let chart = testing::chart(n);
        let w = testing::form(&mut r, &chart, 1, 3);
        let zt = ZeroTest::default();
        let scaled = w.scale(&skewforms::Expr::frac(num, den));
        let a = analyze(&EvolutionaryRelation::new(w), &zt).unwrap().classification;
        let b = analyze(&EvolutionaryRelation::new(scaled), &zt).unwrap().classification;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn torsion_and_curvature_symmetries(seed in any::<u64>(), n in 2usize..=3) {
        let mut r = rng(seed);
        let chart = testing::chart(n);
        let c = testing::connection(&mut r, &chart, false);
        let t = c.torsion();
        let curv = c.curvature();
        let half = skewforms::Expr::frac(1, 2);
        for rho in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    prop_assert!((&t[rho][mu][nu] + &t[rho][nu][mu]).is_zero());
                    let sym = &(&c.gamma(rho, mu, nu) + &c.gamma(rho, nu, mu)) * &half;
                    prop_assert_eq!(&sym + &(&t[rho][mu][nu] * &half), c.gamma(rho, mu, nu));
                    for (s, r) in curv[rho][mu].iter().enumerate() {
                        prop_assert!((&curv[rho][mu][nu][s] + &r[nu]).is_zero());
                    }
                }
            }
        }
        let sym = testing::connection(&mut r, &chart, true);
        prop_assert_eq!(sym.classify(&ZeroTest::default()).torsion, Verdict::Zero);
    }
}

trait RangeExt {
    fn gen_range_usize(&mut self, hi_inclusive: usize) -> usize;
}

impl RangeExt for ChaCha8Rng {
    fn gen_range_usize(&mut self, hi_inclusive: usize) -> usize {
        rand::Rng::gen_range(self, 0..=hi_inclusive)
    }
}
