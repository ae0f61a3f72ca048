//! Property tests for the geometry invariants: serialization round-trips,
//! the distance/inradius bound, and cap-measure additivity over random
//! configurations.

use fraceig::geometry::Domain;
use fraceig::grid::Grid;
use proptest::prelude::*;

/// Random connected mask: a lattice random walk unioned into a blob.
fn arb_mask_domain() -> impl Strategy<Value = Domain> {
    (2usize..20, proptest::collection::vec(0u8..4, 10..200), 0.05f64..0.5).prop_filter_map(
        "walk must produce a valid domain",
        |(n, steps, h)| {
            let grid = Grid::new(2, h, [0.0, 0.0, 0.0], &[n, n]);
            let mut mask = vec![false; grid.len()];
            let mut pos = [n / 2, n / 2, 0usize];
            mask[grid.index(pos)] = true;
            for s in steps {
                let (axis, dir) = ((s / 2) as usize % 2, if s % 2 == 0 { 1i64 } else { -1 });
                let v = pos[axis] as i64 + dir;
                if v >= 0 && (v as usize) < n {
                    pos[axis] = v as usize;
                    mask[grid.index(pos)] = true;
                }
            }
            Domain::from_mask(grid, mask).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mask_serialization_roundtrips(dom in arb_mask_domain()) {
        let json = dom.to_json();
        let back = Domain::from_json(&json).unwrap();
        prop_assert_eq!(back.mask(), dom.mask());
        prop_assert_eq!(back.grid(), dom.grid());
    }

    #[test]
    fn dist_to_boundary_never_exceeds_inradius(dom in arb_mask_domain()) {
        let inradius = dom.inradius().unwrap();
        let mut attained: f64 = 0.0;
        for r in 0..dom.interior_count() {
            let d = dom.dist_to_boundary(dom.interior_point(r)).unwrap();
            prop_assert!(d <= inradius + 1e-12);
            attained = attained.max(d);
        }
        prop_assert!((attained - inradius).abs() <= 1e-12, "max not attained");
    }

    #[test]
    fn cap_plus_interior_part_is_the_ball_measure(
        dom in arb_mask_domain(),
        rank_seed in any::<u32>(),
        r_frac in 0.1f64..3.0,
    ) {
        let rank = rank_seed as usize % dom.interior_count();
        let x0 = dom.interior_point(rank);
        let r = r_frac * dom.diameter();
        let cap = dom.cap_exterior_measure(x0, r);
        let ball = dom.ball_measure(x0, r);
        prop_assert!(cap >= 0.0 && cap <= ball + 1e-12);
        // Interior part by direct counting over interior cells.
        let mut inside = 0usize;
        for k in 0..dom.interior_count() {
            let p = dom.interior_point(k);
            let dx = p[0] - x0[0];
            let dy = p[1] - x0[1];
            if (dx * dx + dy * dy).sqrt() < r {
                inside += 1;
            }
        }
        let interior_part = inside as f64 * dom.grid().cell_volume();
        prop_assert!((cap + interior_part - ball).abs() < 1e-9);
    }

    #[test]
    fn refinement_keeps_the_inradius_within_two_cells(dom in arb_mask_domain()) {
        let fine = dom.refined().unwrap();
        let a = dom.inradius().unwrap();
        let b = fine.inradius().unwrap();
        prop_assert!((a - b).abs() <= 2.0 * dom.h(), "{a} vs {b} at h = {}", dom.h());
    }
}
