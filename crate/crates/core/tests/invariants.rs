use nalgebra::Matrix3;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use sl3scatter::atlas::{bdf_from_eigen, log_blowup, log_blowup_inverse, ralpha_transition};
use sl3scatter::flat::spectral::{sqrt_branch, SpectralParam, SPECTRUM_BOTTOM};
use sl3scatter::geometry::{
    dist_to_base, eigen_coords, group_act, polar_point, w_to_z, z_to_w, FlatVector, PointM,
    WeylElement,
};
use sl3scatter::product::dissipative::inequality_excess;
use sl3scatter::product::distance::{
    product_distance, smoothed_distance, triple_ratio, ProductPoint,
};
use sl3scatter::product::kernels::resolvent_1d_kernel;
use sl3scatter::spherical::two_body_fit;

fn unimodular() -> impl Strategy<Value = Matrix3<f64>> {
    prop::array::uniform9(-2.0f64..2.0).prop_filter_map("near singular", |e| {
        let mut m = Matrix3::from_row_slice(&e);
        let d = m.determinant();
        if d.abs() < 0.05 {
            return None;
        }
        if d < 0.0 {
            m.row_mut(0).neg_mut();
        }
        Some(m / d.abs().cbrt())
    })
}

fn rotation() -> impl Strategy<Value = Matrix3<f64>> {
    (prop::array::uniform3(-1.0f64..1.0), 0.0f64..3.0).prop_map(|(a, t)| {
        let v = nalgebra::Vector3::from(a);
        let axis = if v.norm() > 1e-3 {
            v.normalize()
        } else {
            nalgebra::Vector3::z()
        };
        *nalgebra::Rotation3::from_scaled_axis(axis * t).matrix()
    })
}

fn flat() -> impl Strategy<Value = FlatVector> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| FlatVector::new([a, b, -a - b]).unwrap())
}

/// Moderate points: composing actions squares condition numbers, and the
/// unit-determinant check is absolute.
fn moderate_flat() -> impl Strategy<Value = FlatVector> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| FlatVector::new([a, b, -a - b]).unwrap())
}

fn product_point() -> impl Strategy<Value = ProductPoint> {
    (-4.0f64..4.0, 0.0f64..6.0, 0.0f64..6.3).prop_map(|(l, d, t)| ProductPoint::new(l, d, t))
}

proptest! {
    #[test]
    fn polar_part_is_a_point(a in unimodular()) {
        let v = polar_point(&a).unwrap();
        let m = v.matrix();
        prop_assert!((m - m.transpose()).norm() < 1e-12 * m.norm());
        prop_assert!((m.determinant() - 1.0).abs() < 1e-10 * m.norm().powi(3));
        prop_assert!(eigen_coords(&v).lambda[0] > 0.0);
    }

    #[test]
    fn group_action_composes(a in unimodular(), b in unimodular(), w in moderate_flat()) {
        let v = PointM::from_flat(&w);
        let one = group_act(&a, &group_act(&b, &v).unwrap()).unwrap();
        let two = group_act(&(a * b), &v).unwrap();
        prop_assert!((one.matrix() - two.matrix()).norm() < 1e-8 * two.matrix().norm());
        prop_assert!((two.matrix().determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn distance_is_weyl_and_rotation_invariant(w in flat(), o in rotation(), k in 0usize..6) {
        let v = PointM::from_flat(&w);
        let d = dist_to_base(&v);
        let s = WeylElement::all()[k];
        prop_assert!((dist_to_base(&PointM::from_flat(&s.act(&w))) - d).abs() < 1e-10);
        let conj = PointM::new(o * v.matrix() * o.transpose()).unwrap();
        prop_assert!((dist_to_base(&conj) - d).abs() < 1e-10 * d.max(1.0));
    }

    #[test]
    fn eigen_coordinates_reconstruct(w in flat(), o in rotation()) {
        let v = PointM::new(o * PointM::from_flat(&w).matrix() * o.transpose()).unwrap();
        let e = eigen_coords(&v);
        let back = PointM::from_eigen(e.lambda, &e.rotation).unwrap();
        prop_assert!((back.matrix() - v.matrix()).norm() < 1e-10 * v.matrix().norm());
    }

    #[test]
    fn flat_coordinates(w in flat()) {
        prop_assert!(w.w.iter().sum::<f64>().abs() < 1e-12);
        let back = z_to_w(w_to_z(w.w));
        prop_assert!(back.iter().zip(&w.w).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn weyl_group_closes(a in 0usize..6, b in 0usize..6) {
        let all = WeylElement::all();
        prop_assert!(all.contains(&all[a].compose(&all[b])));
        prop_assert_eq!(all[a].compose(&all[a].inverse()), WeylElement::new([0, 1, 2]).unwrap());
    }

    #[test]
    fn boundary_functions_are_consistent(a in -3.0f64..0.0, b in -3.0f64..0.0) {
        // Ascending eigenvalues from two non-positive gaps.
        let w1 = (2.0 * a + b) / 3.0;
        let w = [w1, w1 - a, w1 - a - b];
        let l = w.map(f64::exp);
        let bd = bdf_from_eigen(l).unwrap();
        prop_assert!(bd.mu > 0.0 && bd.mu <= 1.0 && bd.nu > 0.0 && bd.nu <= 1.0);
        prop_assert!((bd.s - bd.mu.sqrt() * bd.nu).abs() < 1e-12 * bd.s.max(1e-300));
    }

    #[test]
    fn corner_blowup(mu_exp in -8.0f64..-0.01, nu_exp in -8.0f64..-0.01) {
        let (mu, nu) = (10f64.powf(mu_exp), 10f64.powf(nu_exp));
        let (r, alpha) = log_blowup(mu, nu).unwrap();
        prop_assert!(r > 0.0 && (-1.0..=1.0).contains(&alpha));
        let (m2, n2) = log_blowup_inverse(r, alpha).unwrap();
        prop_assert!(((m2 - mu) / mu).abs() < 1e-10 && ((n2 - nu) / nu).abs() < 1e-10);
    }

    #[test]
    fn ralpha_maps_into_the_unit_interval(r in 0.0f64..5.0, a in -1.0f64..1.0, da in 0.0f64..0.5) {
        let (rp, ap) = ralpha_transition(r, a);
        prop_assert!(rp >= 0.0 && (0.0..=1.0).contains(&ap));
        let b = (a + da).min(1.0);
        prop_assert!(ralpha_transition(r, b).1 >= ap);
    }

    #[test]
    fn branch_of_the_square_root(re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let lambda = C::new(re, im);
        prop_assume!(!(im.abs() < 1e-9 && re >= SPECTRUM_BOTTOM));
        let p = SpectralParam::new(lambda).unwrap();
        prop_assert!(p.kappa() > 0.0);
        let k = sqrt_branch(lambda - SPECTRUM_BOTTOM);
        prop_assert!(k.im < 0.0);
        prop_assert!((k * k - (lambda - SPECTRUM_BOTTOM)).norm() < 1e-14 * (1.0 + lambda.norm()));
    }

    #[test]
    fn smoothed_distance_bounds(a in product_point(), b in product_point(), c in product_point()) {
        let d = product_distance(&a, &b);
        let s = smoothed_distance(&a, &b);
        prop_assert!(s >= 1.0 && d <= s && s <= d + 2.0);
        if d >= 3.0 {
            prop_assert_eq!(s, d);
        }
        prop_assert!(triple_ratio(&a, &b, &c) <= 4.0);
    }

    #[test]
    fn dissipative_inequality(phi in 0.0f64..6.3, sep_t in 0.0f64..1.0, r in 0.0f64..10.0, rp in 0.0f64..10.0,
                              theta in 0.05f64..1.5, theta0 in 0.0f64..3.14) {
        let sep = theta + sep_t * (std::f64::consts::PI - theta);
        let w = [r * phi.cos(), r * phi.sin()];
        let wp = [rp * (phi + sep).cos(), rp * (phi + sep).sin()];
        prop_assert!(inequality_excess(w, wp, theta, theta0) <= 1e-12 * (1.0 + r + rp));
    }

    #[test]
    fn line_kernel_is_symmetric(re in -4.0f64..4.0, im in 0.01f64..3.0, w in -5.0f64..5.0, wp in -5.0f64..5.0) {
        let sigma = C::new(re, -im);
        let a = resolvent_1d_kernel(sigma, w, wp).unwrap();
        prop_assert_eq!(a, resolvent_1d_kernel(sigma, wp, w).unwrap());
    }

    #[test]
    fn line_kernel_is_positive_below_the_spectrum(s in -4.0f64..-0.01, w in -5.0f64..5.0, wp in -5.0f64..5.0) {
        let k = resolvent_1d_kernel(C::new(s, 0.0), w, wp).unwrap();
        prop_assert!(k.re > 0.0 && k.im.abs() < 1e-12 * k.re);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_body_reciprocity(re in -2.0f64..2.0, im in 0.05f64..1.3) {
        // The ratio of the regular solution's two behaviours flips under nu -> -nu.
        let nu = C::new(re, im);
        let a = two_body_fit(nu, 3.0).unwrap().ratio();
        let b = two_body_fit(-nu, 3.0).unwrap().ratio();
        prop_assert!((a * b - 1.0).norm() < 1e-6);
    }
}
