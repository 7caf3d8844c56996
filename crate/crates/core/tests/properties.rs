use std::f64::consts::PI;

use proptest::prelude::*;
use stadium_core::observables::{region_mass, Region};
use stadium_core::operators::OperatorPair;
use stadium_core::{Domain, StadiumGeometry, TriMesh};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_is_bounded_by_w_on_the_arcs(alpha in 0.1f64..4.0, beta in 0.1f64..4.0, t in -PI / 2.0..PI / 2.0, plus: bool) {
        let g = StadiumGeometry::new(alpha, beta).unwrap();
        let theta = if plus { t } else { t + PI };
        let p = g.arc_point(plus, theta);
        let n = g.boundary_normal(p).unwrap();
        let w = g.weight_w(p).unwrap();
        let q = p[0] * n[0];
        // q/w = (α + β cos θ)/β on the arcs
        prop_assert!(q.abs() <= (alpha / beta + 1.0) * w * (1.0 + 1e-12) + 1e-15);
        if alpha <= 3.0 * beta {
            prop_assert!(q.abs() <= 4.0 * w + 1e-15);
        }
    }

    #[test]
    fn weight_vanishes_in_rectangle(alpha in 0.1f64..4.0, beta in 0.1f64..4.0, sx in -1.0f64..1.0, sy in -1.0f64..1.0) {
        let g = StadiumGeometry::new(alpha, beta).unwrap();
        prop_assert_eq!(g.weight_w([sx * alpha, sy * beta]).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn meshes_are_mirror_symmetric(alpha in 0.3f64..2.0, beta in 0.5f64..1.5, frac in 0.3f64..1.0) {
        let h = frac * beta / 4.0;
        let mesh = TriMesh::build(Domain::Stadium { alpha, beta }, h).unwrap();
        let maps = mesh.mirror_maps();
        prop_assert!(maps.is_some());
        let area = Domain::Stadium { alpha, beta }.area();
        // inscribed polygon: area deficit is O(h²)
        prop_assert!(mesh.area() <= area && area - mesh.area() <= h * h * beta);
        prop_assert!(mesh.min_angle_deg() > 20.0);
    }

    #[test]
    fn region_masses_partition(c in prop::array::uniform4(-1.0f64..1.0), lambda in 2.0f64..30.0) {
        let mesh = TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.1).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        let u = op.interpolate(&mesh, |p| c[0] + c[1] * p[0] + c[2] * p[1] * p[1] + c[3] * (3.0 * p[0]).sin());
        let m = |r: Region| region_mass(&mesh, &op, &u, &r).unwrap();
        let total = m(Region::All);
        let tol = 1e-12 * total.max(1e-300);
        prop_assert!((m(Region::Rectangle) + m(Region::Wings) - total).abs() <= tol);
        prop_assert!((m(Region::WingPlus) + m(Region::WingMinus) - m(Region::Wings)).abs() <= tol);
        let zones = m(Region::ZoneI { lambda, delta: 1.0 }) + m(Region::ZoneII { lambda, delta: 1.0 }) + m(Region::ZoneIII { lambda, delta: 1.0 });
        prop_assert!((zones - m(Region::Wings)).abs() <= tol);
        prop_assert!((total - op.m_inner(&u.0, &u.0)).abs() <= tol);
    }

    #[test]
    fn stiffness_is_symmetric_and_nonnegative(c in prop::array::uniform3(-1.0f64..1.0), k in 1.0f64..8.0) {
        let mesh = TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.125).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        let u = op.interpolate(&mesh, |p| c[0] * (k * p[0]).cos() + c[1] * p[1]);
        let v = op.interpolate(&mesh, |p| c[2] * (k * p[1]).sin() + p[0] * p[0]);
        let kuv = op.stiffness.form(&u.0, &v.0);
        let kvu = op.stiffness.form(&v.0, &u.0);
        prop_assert!((kuv - kvu).abs() <= 1e-12 * (1.0 + kuv.abs()));
        prop_assert!(op.energy(&u.0) >= 0.0);
    }
}
