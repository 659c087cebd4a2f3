use renorm_lab::renorm::{build_tower, detect_renormalization, renormalize, Orientation, RenormalizedMap};
use renorm_lab::roots::find_periodic_point;
use renorm_lab::tune::tune_parameter;
use renorm_lab::{Error, Factor, MapDescriptor, Tolerances, Unimodal, UnimodalMap};

const C_STAR: f64 = 0.7849728402613959;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn golden() -> f64 {
    // positive root of c² + c - 1
    (-1.0 + 5f64.sqrt()) / 2.0
}

#[test]
fn affine_family_values() {
    let t = tol();
    let f = UnimodalMap::affine(2.0, 1.0).unwrap();
    assert_eq!(f.eval(0.0, &t).unwrap(), 1.0);
    assert_eq!(f.eval(1.0, &t).unwrap(), -1.0);
    assert_eq!(f.eval(-1.0, &t).unwrap(), -1.0);

    let f = UnimodalMap::affine(2.0, 0.5).unwrap();
    assert_eq!(f.eval(0.5, &t).unwrap(), 0.125);

    let f = UnimodalMap::affine(4.0, 0.8).unwrap();
    assert_eq!(f.eval(0.0, &t).unwrap(), 0.8);
    assert_eq!(f.eval(0.3, &t).unwrap(), f.eval(-0.3, &t).unwrap());
}

#[test]
fn affine_family_rejects_bad_parameters() {
    for (t, c) in [(2.0, 0.0), (2.0, 1.5), (2.0, -0.2), (1.0, 0.5), (0.5, 0.5)] {
        assert!(matches!(UnimodalMap::affine(t, c), Err(Error::ParameterOutOfRange(_))), "{t} {c}");
    }
}

#[test]
fn derivatives_of_affine_quadratic() {
    let t = tol();
    let c = 0.7;
    let f = UnimodalMap::affine(2.0, c).unwrap();
    for x in [0.1, 0.4, 0.9] {
        assert!((f.deriv(x, &t).unwrap() + 2.0 * (1.0 + c) * x).abs() < 1e-14);
    }
    for exponent in [1.5, 2.0, 3.3, 4.0] {
        let g = UnimodalMap::affine(exponent, c).unwrap();
        assert_eq!(g.deriv(0.0, &t).unwrap(), 0.0);
    }
    assert!(matches!(f.eval(1.1, &t), Err(Error::Domain { .. })));
}

#[test]
fn orbit_examples() {
    let t = tol();
    let f = UnimodalMap::affine(2.0, 1.0).unwrap();
    assert_eq!(f.orbit(0.0, 3, &t).unwrap(), vec![0.0, 1.0, -1.0, -1.0]);
    assert_eq!(f.orbit(0.37, 0, &t).unwrap(), vec![0.37]);

    let c = golden();
    let g = UnimodalMap::affine(2.0, c).unwrap();
    let o = g.orbit(0.0, 2, &t).unwrap();
    assert!((o[1] - 0.6180339887).abs() < 1e-10);
    assert!(o[2].abs() < 1e-15);
}

#[test]
fn factor_nonlinearity_examples() {
    let t = tol();
    // exponential factor: N(h) = a
    let a = 1.7;
    let f = UnimodalMap::new(2.0, Factor::Exponential { critical_value: 0.6, rate: a }).unwrap();
    for y in [-0.9, -0.5, -0.1] {
        assert!((f.factor_nonlinearity_exact(y, &t).unwrap() - a).abs() < 1e-12);
    }
    // quadratic factor h = h0 + h1 y + h2 y² with h(-1) = -1
    let (h1, h2) = (1.4, 0.3);
    let h0 = -1.0 + h1 - h2;
    let q = UnimodalMap::new(2.0, Factor::from_power_coeffs(&[h0, h1, h2]).unwrap()).unwrap();
    let y = -0.5;
    let expected = 2.0 * h2 / (h1 + 2.0 * h2 * y);
    let n = q.factor_nonlinearity_exact(y, &t).unwrap();
    assert!((n - expected).abs() <= 1e-12 * expected.abs());
    // finite-difference oracle on log h'
    let dh = |y: f64| h1 + 2.0 * h2 * y;
    let step = 1e-6;
    let fd = ((dh(y + step)).ln() - (dh(y - step)).ln()) / (2.0 * step);
    assert!((n - fd).abs() <= 1e-6 * fd.abs());
}

#[test]
fn periodic_point_examples() {
    let t = tol();
    let c = 0.6180339887;
    let f = UnimodalMap::affine(2.0, c).unwrap();
    let q = find_periodic_point(&f, 1, (0.0, 1.0), &t).unwrap();
    assert!((q - 0.3819660113).abs() < 1e-10);

    let f = UnimodalMap::affine(2.0, 1.0).unwrap();
    assert_eq!(find_periodic_point(&f, 1, (-1.0, -0.9), &t).unwrap(), -1.0);

    // period-two point of f_{c*}: bracket located by a sign scan on a 1e-4 grid
    let f = UnimodalMap::affine(2.0, C_STAR).unwrap();
    let q = C_STAR / (1.0 + C_STAR);
    let g = |x: f64| f.iterate(f.iterate(x, 1), 1) - x;
    let mut bracket = None;
    let mut x = q + 1e-4;
    while x + 1e-4 < C_STAR {
        if g(x).signum() != g(x + 1e-4).signum() {
            bracket = Some((x, x + 1e-4));
            break;
        }
        x += 1e-4;
    }
    let b = find_periodic_point(&f, 2, bracket.expect("sign change"), &t).unwrap();
    assert!(g(b).abs() <= 1e-12);
    assert!((b - q).abs() > 1e-3);
}

#[test]
fn detection_examples() {
    let t = tol();
    let f = UnimodalMap::affine(2.0, 1.0).unwrap();
    assert_eq!(detect_renormalization(&f, 8, &t).unwrap(), None);

    let f = UnimodalMap::affine(2.0, 0.3).unwrap();
    assert_eq!(detect_renormalization(&f, 8, &t).unwrap(), None);

    let f = UnimodalMap::affine(2.0, golden()).unwrap();
    let r = detect_renormalization(&f, 8, &t).unwrap().unwrap();
    assert_eq!(r.return_time, 2);
    assert!((r.endpoint - 0.3819660113).abs() < 1e-10);
    assert_eq!(r.orientation, Orientation::MinimumAtZero);
}

#[test]
fn superstable_period_two_collapses() {
    let t = tol();
    let f: RenormalizedMap = UnimodalMap::affine(2.0, golden()).unwrap().into();
    let r = detect_renormalization(&f, 8, &t).unwrap().unwrap();
    assert!(matches!(renormalize(&f, &r, &t), Err(Error::NormalizationFailure { boundary: true, .. })));
}

#[test]
fn renormalization_of_doubling_map() {
    let t = tol();
    let f: RenormalizedMap = UnimodalMap::affine(2.0, C_STAR).unwrap().into();
    let r = detect_renormalization(&f, 8, &t).unwrap().unwrap();
    let next = renormalize(&f, &r, &t).unwrap();
    assert!(next.critical_value > 0.0 && next.critical_value < 1.0);
    assert!((next.map.value(-1.0) + 1.0).abs() < t.renorm);
    assert!((next.map.value(1.0) + 1.0).abs() < t.renorm);
    let again = detect_renormalization(&next.map, 8, &t).unwrap().unwrap();
    assert_eq!(again.return_time, 2);
}

#[test]
fn tower_examples() {
    let t = tol();
    let f = UnimodalMap::affine(2.0, C_STAR).unwrap();
    let tower = build_tower(&f, 6, 2, &t).unwrap();
    assert_eq!(tower.return_times(), vec![2; 6]);
    let mut m = 1;
    for k in 1..=6 {
        m *= 2;
        assert_eq!(tower.period(k), m);
        let (outer, inner) = (tower.nested(k - 1), tower.nested(k));
        assert!(inner.len() < outer.len());
        assert!(inner.lo > outer.lo + t.renorm && inner.hi < outer.hi - t.renorm);
        assert!(tower.periodic_residual(k) <= 1e-8);
        let c1 = tower.level(k).critical_value;
        assert!(c1 > 0.0 && c1 <= 1.0);
        assert!((tower.level(k).alpha_slope.abs() - 2.0 / tower.level(k).restricted.len()).abs() < 1e-9);
    }

    let f = UnimodalMap::affine(2.0, 1.0).unwrap();
    assert_eq!(build_tower(&f, 1, 8, &t).unwrap_err(), Error::NotRenormalizable { level: 1 });
    assert_eq!(Error::NotRenormalizable { level: 1 }.to_string(), "not-renormalizable-at-level 1");
}

#[test]
fn tuning_examples() {
    let t = tol();
    let c = tune_parameter(2.0, &[2], &t).unwrap();
    assert!((c - golden()).abs() < 1e-10);

    let c = tune_parameter(2.0, &[3], &t).unwrap();
    assert!(c > 0.85 && c < 1.0);
    let f = UnimodalMap::affine(2.0, c).unwrap();
    assert!(f.iterate(0.0, 3).abs() <= 1e-10);

    let c = tune_parameter(2.0, &[2; 6], &t).unwrap();
    assert!((c - 0.7849733).abs() < 1e-5);
    assert!((c * (1.0 + c) - 1.4011552).abs() < 1e-5);
}

#[test]
fn descriptor_round_trip() {
    let d: MapDescriptor = serde_json::from_str(r#"{"t": 2, "c": 0.75, "label": "x"}"#).unwrap();
    let f = d.build().unwrap();
    assert_eq!(f.label(), Some("x"));
    let back: MapDescriptor = serde_json::from_str(&serde_json::to_string(&f.descriptor()).unwrap()).unwrap();
    assert_eq!(back, d);
    let d: MapDescriptor = serde_json::from_str(r#"{"t": 3, "h_coeffs": [0.5, 1.8, 0.3]}"#).unwrap();
    let g = d.build().unwrap();
    assert!((g.critical_value() - 0.5).abs() < 1e-15);
}
