//! Property tests for the exact-arithmetic layer.

use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;

use tentmorph::numerics::{Enclosure, Rational};

fn rational() -> impl Strategy<Value = Rational> {
    (-1_000_000_000i64..=1_000_000_000, 1i64..=1_000_000_000)
        .prop_map(|(p, q)| Rational::new(p, q))
}

fn unit() -> impl Strategy<Value = Rational> {
    (0i64..=1_000_000).prop_map(|p| Rational::new(p, 1_000_000))
}

fn canonical(value: &Rational) -> bool {
    value.denominator() > &BigInt::from(0)
        && value.numerator().gcd(value.denominator()) == BigInt::from(1)
}

proptest! {
    #[test]
    fn arithmetic_keeps_canonical_form(a in rational(), b in rational()) {
        prop_assert!(canonical(&a));
        for value in [&a + &b, &a - &b, &a * &b] {
            prop_assert!(canonical(&value), "non-canonical result {value}");
        }
        if !b.is_zero() {
            prop_assert!(canonical(&(&a / &b)));
        }
    }

    #[test]
    fn add_then_subtract_is_identity(a in rational(), b in rational()) {
        prop_assert_eq!(&(&(&a + &b) - &b), &a);
    }

    #[test]
    fn multiply_then_divide_is_identity(a in rational(), b in rational()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!(&(&(&a * &b) / &b), &a);
    }

    #[test]
    fn order_is_total_and_transitive(a in rational(), b in rational(), c in rational()) {
        prop_assert_ne!(a <= b, b < a);
        if a <= b && b <= c {
            prop_assert!(a <= c);
        }
    }

    #[test]
    fn display_parse_round_trip(a in rational()) {
        let text = a.to_string();
        let back: Rational = text.parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn decimal_rendering_is_within_half_ulp(a in rational(), digits in 0usize..=6) {
        let rendered = a.to_decimal(digits);
        let back: Rational = rendered.parse().unwrap();
        let half_ulp = Rational::new(1, 2) * Rational::new(1, 10i64.pow(digits as u32));
        prop_assert!((&back - &a).abs() <= half_ulp, "{a} rendered as {rendered}");
    }

    #[test]
    fn enclosure_images_contain_point_images(
        a in unit(), b in unit(), c in unit(), d in unit(), t in unit(), k in rational()
    ) {
        let e = Enclosure::new(a.clone().min(b.clone()), a.max(b)).unwrap();
        let f = Enclosure::new(c.clone().min(d.clone()), c.max(d)).unwrap();
        // p and q range over e and f as t does over [0, 1].
        let p = &e.lo + &(&e.width() * &t);
        let q = &f.lo + &(&f.width() * &t);

        prop_assert!(e.add(&f).contains(&(&p + &q)));
        prop_assert!(e.sub(&f).contains(&(&p - &q)));
        prop_assert!(e.neg().contains(&(-&p)));
        prop_assert!(e.scale(&k).contains(&(&p * &k)));
        prop_assert!(e.one_minus().contains(&(Rational::one() - &p)));
        prop_assert!(e.widen(&t).unwrap().contains(&p));
        prop_assert!(e.outward_dyadic(16).contains(&p));
    }

    #[test]
    fn widen_rejects_negative_radii(a in unit(), r in 1i64..=1_000_000) {
        let e = Enclosure::point(a);
        prop_assert!(e.widen(&Rational::new(-r, 1_000_000)).is_err());
    }

    #[test]
    fn strictly_below_matches_interval_order(a in unit(), b in unit(), c in unit(), d in unit()) {
        let e = Enclosure::new(a.clone().min(b.clone()), a.max(b)).unwrap();
        let f = Enclosure::new(c.clone().min(d.clone()), c.max(d)).unwrap();
        match e.strictly_below(&f) {
            tentmorph::numerics::Tristate::Yes => prop_assert!(e.hi < f.lo),
            tentmorph::numerics::Tristate::No => prop_assert!(f.hi < e.lo),
            tentmorph::numerics::Tristate::Unknown => {
                prop_assert!(e.hi >= f.lo && f.hi >= e.lo);
            }
        }
    }
}
