use std::sync::OnceLock;

use proptest::prelude::*;

use clines_core::classes::{
    bruen_drudge, decompose, derive, meet_counts_incidence, verify_cl, DerivationPair, LineClass,
    OrbitDecomposition,
};
use clines_core::geometry::klein_relation;
use clines_core::klein::KleinTable;
use clines_core::spectra::{plane_spectrum, star_spectrum};
use clines_core::symmetry::{act_on_line, act_on_point, gamma_generators};
use clines_core::{Field, Geometry, IdSet, LineId, PointId, QuadraticCharacter};

struct Fixture {
    g: Geometry,
    dec: OrbitDecomposition,
    table: KleinTable,
}

fn fixture(q: u32) -> &'static Fixture {
    static F7: OnceLock<Fixture> = OnceLock::new();
    static F9: OnceLock<Fixture> = OnceLock::new();
    let cell = match q {
        7 => &F7,
        9 => &F9,
        _ => unreachable!(),
    };
    cell.get_or_init(|| {
        let g = Geometry::build(Field::with_order(q).unwrap()).unwrap();
        let dec = decompose(&g).unwrap();
        let table = KleinTable::new(&g);
        Fixture { g, dec, table }
    })
}

fn chi(c: QuadraticCharacter) -> i32 {
    match c {
        QuadraticCharacter::Zero => 0,
        QuadraticCharacter::Square => 1,
        QuadraticCharacter::NonSquare => -1,
    }
}

fn field_order() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![3u32, 5, 7, 9, 11, 25, 27, 49])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_laws(q in field_order(), a in 0u32..49, b in 0u32..49, c in 0u32..49) {
        let f = Field::with_order(q).unwrap();
        let [a, b, c] = [a, b, c].map(|x| f.element(x % q).unwrap());
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), f.from_int(0));
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.from_int(1));
        }
        let ab = chi(f.quadratic_character(f.mul(a, b)));
        prop_assert_eq!(ab, chi(f.quadratic_character(a)) * chi(f.quadratic_character(b)));
        prop_assert_eq!(f.pow(a, q as u64), a);
    }

    #[test]
    fn line_through_two_points(q in prop::sample::select(vec![7u32, 9]), a in any::<u32>(), b in any::<u32>()) {
        let g = &fixture(q).g;
        let n = g.num_points() as u32;
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let l = g.line_through(a, b).unwrap();
        prop_assert!(g.point_on_line(a, l) && g.point_on_line(b, l));
        prop_assert!(klein_relation(g.field(), g.plucker(l)).is_zero());
        prop_assert_eq!(g.line_points(l).len(), q as usize + 1);
        for &plane in g.line_planes(l) {
            prop_assert!(g.incident(a, plane) && g.incident(b, plane));
        }
    }

    #[test]
    fn klein_form_matches_point_incidence(q in prop::sample::select(vec![7u32, 9]), a in any::<u32>(), b in any::<u32>()) {
        let fx = fixture(q);
        let n = fx.g.num_lines() as u32;
        let (a, b) = (a % n, b % n);
        let share = fx.g.line_points(a).iter().any(|p| fx.g.line_points(b).contains(p));
        prop_assert_eq!(fx.table.meets(a, b), share);
    }

    #[test]
    fn gamma_preserves_incidence(q in prop::sample::select(vec![7u32, 9]), k in any::<prop::sample::Index>(), p in any::<u32>(), l in any::<u32>()) {
        let g = &fixture(q).g;
        let gens = gamma_generators(g.field(), g.omega());
        let m = &gens[k.index(gens.len())];
        let p = p % g.num_points() as PointId;
        let l = l % g.num_lines() as LineId;
        prop_assert_eq!(
            g.point_on_line(p, l),
            g.point_on_line(act_on_point(g, m, p), act_on_line(g, m, l))
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Any single derivation of the Bruen-Drudge class passes both checkers,
    /// and its complement has complementary spectra.
    #[test]
    fn derived_classes_verify_and_complement(q in prop::sample::select(vec![7u32, 9]), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let fx = fixture(q);
        let (g, f) = (&fx.g, fx.g.field());
        let squares = f.nonzero_squares();
        let nonsquares = f.nonsquares();
        let pair = DerivationPair::new(f, squares[i.index(squares.len())], nonsquares[j.index(nonsquares.len())]).unwrap();
        let d = derive(g, &fx.dec, &bruen_drudge(&fx.dec), pair).unwrap();
        prop_assert!(verify_cl(g, &d).unwrap().pass);
        prop_assert_eq!(fx.table.perp_counts(&d.lines), meet_counts_incidence(g, &d.lines));

        let rest = IdSet::full(g.num_lines()).difference(&d.lines);
        let comp = LineClass { q, lines: rest, parameter: q * q + 1 - d.parameter, provenance: Vec::new() };
        prop_assert!(verify_cl(g, &comp).unwrap().pass);
        prop_assert_eq!(plane_spectrum(g, &comp.lines), plane_spectrum(g, &d.lines).complement(q));
        prop_assert_eq!(star_spectrum(g, &comp.lines), star_spectrum(g, &d.lines).complement(q));
    }
}
