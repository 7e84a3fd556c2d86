use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use crb_core::spectral::{cumulative_quadrature, max_abs, GridSpec, Spectral, C64};
use proptest::prelude::*;

fn grid(l: f64, n: usize) -> GridSpec {
    GridSpec::new(l, n).unwrap()
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(GridSpec::new(1.0, 7).is_err());
    assert!(GridSpec::new(1.0, 0).is_err());
    assert!(GridSpec::new(-1.0, 8).is_err());
    assert!(GridSpec::new(f64::NAN, 8).is_err());
    assert!(GridSpec::from_spacing(1.0, 0.0).is_err());
}

#[test]
fn grid_from_spacing_and_scale() {
    let g = GridSpec::from_spacing(40.0, 0.1).unwrap();
    assert_eq!(g.n_points(), 800);
    assert_abs_diff_eq!(g.scale() * g.half_length(), PI, epsilon = 1e-15);
    assert_abs_diff_eq!(g.node(0), -40.0);
    assert_eq!(g.wavenumber(399), 399);
    assert_eq!(g.wavenumber(400), -400);
    assert_eq!(g.nyquist_index(), 400);
}

#[test]
fn constant_field_has_only_the_mean_mode() {
    let g = grid(5.0, 32);
    let sp = Spectral::new(g);
    let c = sp.forward(&vec![2.0; 32]);
    // With the N^{-1/2} normalisation the mean mode carries 2·√N.
    assert_abs_diff_eq!(c[0].re, 2.0 * 32f64.sqrt(), epsilon = 1e-12);
    assert!(c.iter().skip(1).all(|z| z.norm() < 1e-12));
}

#[test]
fn value_at_left_end_is_coefficient_sum() {
    // The basis exp(ik(sx + π)) equals 1 at x = −L for every k.
    let g = grid(3.0, 16);
    let sp = Spectral::new(g);
    let f = g.sample(|x| (0.7 * x).sin() + (x / 3.0).cos().powi(3));
    let c = sp.forward(&f);
    let s: C64 = c.iter().sum();
    assert_abs_diff_eq!(s.re / 4.0, f[0], epsilon = 1e-12);
}

#[test]
fn derivative_of_trigonometric_field_is_exact() {
    let l = 2.0;
    let g = grid(l, 64);
    let sp = Spectral::new(g);
    let s = PI / l;
    let f = g.sample(|x| (3.0 * s * x).sin() + 0.5 * (5.0 * s * x).cos());
    let d1 = sp.differentiate(&f, 1);
    let d3 = sp.differentiate(&f, 3);
    for (j, x) in g.nodes().into_iter().enumerate() {
        let e1 = 3.0 * s * (3.0 * s * x).cos() - 2.5 * s * (5.0 * s * x).sin();
        let e3 = -27.0 * s.powi(3) * (3.0 * s * x).cos() + 62.5 * s.powi(3) * (5.0 * s * x).sin();
        assert_abs_diff_eq!(d1[j], e1, epsilon = 1e-11);
        assert_abs_diff_eq!(d3[j], e3, epsilon = 1e-9);
    }
}

#[test]
fn gaussian_derivative_matches_analytic() {
    let g = grid(20.0, 256);
    let sp = Spectral::new(g);
    let f = g.sample(|x| (-x * x).exp());
    let d = sp.differentiate(&f, 2);
    for (j, x) in g.nodes().into_iter().enumerate() {
        let e = (4.0 * x * x - 2.0) * (-x * x).exp();
        assert_abs_diff_eq!(d[j], e, epsilon = 1e-10);
    }
}

#[test]
fn phase_shift_evaluates_translate() {
    let l = 10.0;
    let g = grid(l, 128);
    let sp = Spectral::new(g);
    let s = PI / l;
    let f = |x: f64| (s * x).sin() + 0.3 * (4.0 * s * x).cos();
    for a in [0.37, -2.5, 7.0, 2.0 * g.dx()] {
        let shifted = sp.shift_field(&g.sample(f), a);
        for (j, x) in g.nodes().into_iter().enumerate() {
            assert_abs_diff_eq!(shifted[j], f(x + a), epsilon = 1e-12);
        }
    }
}

#[test]
fn grid_multiple_shift_permutes_samples() {
    let g = grid(4.0, 32);
    let sp = Spectral::new(g);
    let f: Vec<f64> = (0..32).map(|j| ((j * 7919) % 13) as f64 - 6.0).collect();
    let shifted = sp.shift_field(&f, 3.0 * g.dx());
    for j in 0..32 {
        assert_abs_diff_eq!(shifted[j], f[(j + 3) % 32], epsilon = 1e-12);
    }
}

#[test]
fn antiderivative_zero_at_left_oracle() {
    let l = 3.0;
    let g = grid(l, 64);
    let sp = Spectral::new(g);
    let s = PI / l;
    let f = g.sample(|x| (2.0 * s * x).cos());
    let a = sp.antiderivative_zero_at_left(&sp.forward(&f)).unwrap();
    for (j, x) in g.nodes().into_iter().enumerate() {
        let e = ((2.0 * s * x).sin() - (2.0 * s * -l).sin()) / (2.0 * s);
        assert_abs_diff_eq!(a[j], e, epsilon = 1e-13);
    }
    assert_eq!(a[0], 0.0);
}

#[test]
fn antiderivative_rejects_nonzero_mean() {
    let g = grid(3.0, 16);
    let sp = Spectral::new(g);
    let c = sp.forward(&[1.0; 16]);
    assert!(sp.antiderivative_coeffs(&c).is_err());
    assert!(sp.antiderivative_zero_at_left(&c).is_err());
}

#[test]
fn cumulative_quadrature_is_exact_for_linear_data() {
    let g = grid(2.0, 10);
    let f = g.sample(|x| 3.0 * x + 1.0);
    let q = cumulative_quadrature(&g, &f);
    for (j, x) in g.nodes().into_iter().enumerate() {
        let e = 1.5 * (x * x - 4.0) + (x + 2.0);
        assert_abs_diff_eq!(q[j], e, epsilon = 1e-12);
    }
}

#[test]
fn pair_transforms_match_single_transforms() {
    let g = grid(3.0, 16);
    let sp = Spectral::new(g);
    let a = g.sample(|x| (x * 1.3).sin() + 0.2);
    let b = g.sample(|x| (-x * x).exp());
    let (mut ca, mut cb) = (vec![C64::default(); 16], vec![C64::default(); 16]);
    let mut sc = sp.scratch();
    sp.forward_pair_into(&a, &b, &mut ca, &mut cb, &mut sc);
    let (ra, rb) = (sp.forward(&a), sp.forward(&b));
    for i in 0..16 {
        assert!((ca[i] - ra[i]).norm() < 1e-13);
        assert!((cb[i] - rb[i]).norm() < 1e-13);
    }
    let (mut xa, mut xb) = (vec![0.0; 16], vec![0.0; 16]);
    sp.inverse_pair_into(&ra, &rb, &mut xa, &mut xb, &mut sc);
    for i in 0..16 {
        assert_abs_diff_eq!(xa[i], a[i], epsilon = 1e-13);
        assert_abs_diff_eq!(xb[i], b[i], epsilon = 1e-13);
    }
}

#[test]
fn checked_inverse_rejects_non_hermitian_spectra() {
    let g = grid(1.0, 8);
    let sp = Spectral::new(g);
    let mut c = vec![C64::default(); 8];
    c[1] = C64::new(1.0, 0.0);
    assert!(sp.inverse(&c).is_err());
    c[7] = C64::new(1.0, 0.0);
    assert!(sp.inverse(&c).is_ok());
}

#[test]
fn dealiasing_truncates_upper_third() {
    let g = grid(1.0, 12);
    let sp = Spectral::new(g).with_dealiasing(true);
    let mut c = vec![C64::new(1.0, 0.0); 12];
    sp.dealias_in_place(&mut c);
    for i in 0..12 {
        let keep = g.wavenumber(i).abs() <= 4;
        assert_eq!(c[i].norm() > 0.0, keep, "index {i}");
    }
    let off = Spectral::new(g);
    let mut d = vec![C64::new(1.0, 0.0); 12];
    off.dealias_in_place(&mut d);
    assert!(d.iter().all(|z| z.re == 1.0));
}

#[test]
fn remove_mean_and_max_abs() {
    let g = grid(1.0, 4);
    let sp = Spectral::new(g);
    let mut f = vec![1.0, 2.0, 3.0, 6.0];
    assert_abs_diff_eq!(sp.remove_mean(&mut f), 3.0);
    assert_abs_diff_eq!(max_abs(&f), 3.0);
}

#[test]
fn single_mean_coefficient_gives_unit_field() {
    let g = grid(2.0, 16);
    let sp = Spectral::new(g);
    let mut c = vec![C64::default(); 16];
    assert!(sp.inverse(&c).unwrap().iter().all(|&v| v == 0.0));
    c[0] = C64::new(4.0, 0.0);
    for v in sp.inverse(&c).unwrap() {
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
    }
}

#[test]
fn sine_coefficients_evaluate_at_nodes() {
    // sin(2sx) = (e^{2isx} − e^{−2isx})/(2i); with the basis e^{ik(sx+π)} the
    // k = ±2 coefficients pick up e^{∓2iπ} = 1.
    let l = 3.0;
    let g = grid(l, 32);
    let sp = Spectral::new(g);
    let s = PI / l;
    let mut c = vec![C64::default(); 32];
    let amp = 32f64.sqrt() / 2.0;
    c[2] = C64::new(0.0, -amp);
    c[30] = C64::new(0.0, amp);
    let f = sp.inverse(&c).unwrap();
    for (j, x) in g.nodes().into_iter().enumerate() {
        assert_abs_diff_eq!(f[j], (2.0 * s * x).sin(), epsilon = 1e-12);
    }
}

#[test]
fn third_derivative_matches_finite_differences() {
    let g = grid(15.0, 512);
    let sp = Spectral::new(g);
    let f = |x: f64| (-0.5 * x * x).exp();
    let d3 = sp.differentiate(&g.sample(f), 3);
    let fd = |x: f64, h: f64| (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
    // Richardson extrapolation removes the O(h²) term of the stencil.
    let h = 4e-3;
    let want = g.sample(|x| (4.0 * fd(x, 0.5 * h) - fd(x, h)) / 3.0);
    let err = d3.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-6 * max_abs(&want), "{err:e}");
}

#[test]
fn second_derivative_is_repeated_first() {
    let g = grid(5.0, 64);
    let sp = Spectral::new(g);
    let c = sp.forward(&g.sample(|x| (-(x * x)).exp() * x));
    let direct = sp.derivative(&c, 2);
    let twice = sp.derivative(&sp.derivative(&c, 1), 1);
    for i in 0..64 {
        if i != g.nyquist_index() {
            assert!((direct[i] - twice[i]).norm() < 1e-12 * direct[i].norm().max(1.0));
        }
    }
    assert!(sp.differentiate(&vec![3.0; 64], 1).iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn full_period_and_zero_shifts_are_identity() {
    let g = grid(5.0, 64);
    let sp = Spectral::new(g);
    let c = sp.forward(&g.sample(|x| (0.9 * x).sin().powi(3) + 0.1));
    assert_eq!(sp.phase_shift(&c, 0.0), c);
    let full = sp.phase_shift(&c, 10.0);
    for i in 0..64 {
        assert!((full[i] - c[i]).norm() < 1e-12);
    }
}

#[test]
fn sub_grid_shift_of_localised_pulse() {
    let g = grid(30.0, 600);
    let sp = Spectral::new(g);
    let a = 0.3 * g.dx();
    let f = |x: f64| 1.0 / (0.5 * x).cosh().powi(2);
    let shifted = sp.shift_field(&g.sample(f), a);
    let want = g.sample(|x| f(x + a));
    let err = shifted
        .iter()
        .zip(&want)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-8, "{err:e}");
}

#[test]
fn antiderivative_of_two_harmonics() {
    let l = 2.0;
    let g = grid(l, 64);
    let sp = Spectral::new(g);
    let s = PI / l;
    let f = g.sample(|x| s * (s * x).cos() + 3.0 * s * (3.0 * s * x).sin());
    let a = sp.antiderivative_zero_at_left(&sp.forward(&f)).unwrap();
    let prim = |x: f64| (s * x).sin() - (3.0 * s * x).cos();
    for (j, x) in g.nodes().into_iter().enumerate() {
        assert_abs_diff_eq!(a[j], prim(x) - prim(-l), epsilon = 1e-12);
    }
    assert!(sp
        .antiderivative_zero_at_left(&vec![C64::default(); 64])
        .unwrap()
        .iter()
        .all(|&v| v == 0.0));
}

#[test]
fn cumulative_quadrature_constant_and_double_integral() {
    let l = 40.0;
    let g = grid(l, 800);
    let q = cumulative_quadrature(&g, &vec![1.0; 800]);
    for (j, x) in g.nodes().into_iter().enumerate() {
        assert_abs_diff_eq!(q[j], x + l, epsilon = 1e-10);
    }
    // ∫∫ cos(sx) with the inner integral taken spectrally and the outer by
    // trapezoid: −(cos(sx) − cos(−π))/s².
    let sp = Spectral::new(g);
    let s = PI / l;
    let inner = sp
        .antiderivative_zero_at_left(&sp.forward(&g.sample(|x| (s * x).cos())))
        .unwrap();
    let outer = cumulative_quadrature(&g, &inner);
    for (j, x) in g.nodes().into_iter().enumerate() {
        let want = -((s * x).cos() - (-PI).cos()) / (s * s);
        assert_abs_diff_eq!(outer[j], want, epsilon = 1e-6 * want.abs().max(1.0) * 10.0);
    }
}

fn field_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 32)
}

proptest! {
    #[test]
    fn round_trip_is_identity(f in field_strategy()) {
        let sp = Spectral::new(grid(7.0, 32));
        let back = sp.inverse(&sp.forward(&f)).unwrap();
        for (a, b) in f.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_is_unitary(f in field_strategy()) {
        let sp = Spectral::new(grid(7.0, 32));
        let c = sp.forward(&f);
        let e_x: f64 = f.iter().map(|v| v * v).sum();
        let e_k: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((e_x - e_k).abs() <= 1e-12 * e_x.max(1.0));
    }

    #[test]
    fn derivative_is_linear(f in field_strategy(), g in field_strategy(), a in -3.0f64..3.0) {
        let sp = Spectral::new(grid(2.0, 32));
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + y).collect();
        let lhs = sp.differentiate(&combo, 1);
        let (df, dg) = (sp.differentiate(&f, 1), sp.differentiate(&g, 1));
        for i in 0..32 {
            prop_assert!((lhs[i] - (a * df[i] + dg[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn shifts_compose(f in field_strategy(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let sp = Spectral::new(grid(3.0, 32));
        let c = sp.forward(&f);
        let ab = sp.phase_shift(&sp.phase_shift(&c, a), b);
        let direct = sp.phase_shift(&c, a + b);
        let ny = sp.grid().nyquist_index();
        for i in 0..32 {
            if i != ny {
                prop_assert!((ab[i] - direct[i]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn antiderivative_inverts_derivative(f in field_strategy()) {
        let sp = Spectral::new(grid(4.0, 32));
        let c = sp.forward(&f);
        let back = sp.antiderivative_coeffs_unchecked(&sp.derivative(&c, 1));
        let ny = sp.grid().nyquist_index();
        for i in 1..32 {
            if i != ny {
                prop_assert!((back[i] - c[i]).norm() < 1e-11);
            }
        }
    }
}
