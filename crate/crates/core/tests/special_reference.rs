//! Special functions against values computed independently at 40 digits
//! and against `statrs`.

// Reference values keep every digit the high-precision evaluation printed.
#![allow(clippy::excessive_precision)]

use eas_sphere::special::{beta_reg, log_bessel_i};
use eas_sphere::sphere::{cap_mass, cap_radius};

/// `(nu, kappa, ln I_nu(kappa))`, 40-digit reference values.
const LOG_BESSEL: &[(f64, f64, f64)] = &[
    (0.0, 1e-06, 0.00000000000024999999999998435237),
    (0.0, 0.01, 0.000024999843751736089773),
    (0.0, 1.0, 0.23591435850717864869),
    (0.0, 5.0, 3.3046817758225334338),
    (0.0, 10.0, 7.9429720831186955545),
    (0.0, 49.0, 46.137728940745919249),
    (0.0, 80.0, 76.891620544785599163),
    (0.0, 100.0, 96.779732689942583717),
    (0.0, 500.0, 495.97400766810669646),
    (0.0, 2000.0, 1995.2806727526574305),
    (0.5, 1e-06, -7.1335466316266978404),
    (0.5, 0.01, -2.5283597790276616421),
    (0.5, 1.0, -0.064351991073531798753),
    (0.5, 5.0, 3.2762971096179065817),
    (0.5, 10.0, 7.9297689182371507916),
    (0.5, 49.0, 46.135151317740013953),
    (0.5, 80.0, 76.890048149458386452),
    (0.5, 100.0, 96.778476373801281574),
    (0.5, 500.0, 495.97375741758423139),
    (0.5, 2000.0, 1995.2806102370242861),
    (1.0, 1e-06, -14.508657738524094459),
    (1.0, 0.01, -5.2983048665740782148),
    (1.0, 1.0, -0.57064798749083128142),
    (1.0, 5.0, 3.1919420305456754634),
    (1.0, 10.0, 7.8902038341042122935),
    (1.0, 49.0, 46.127418731577472696),
    (1.0, 80.0, 76.885331026882449018),
    (1.0, 100.0, 96.774707457591448463),
    (1.0, 500.0, 495.97300666626834446),
    (1.0, 2000.0, 1995.2804226901287651),
    (1.5, 1e-06, -22.047669478259148348),
    (1.5, 0.01, -8.2321489203092598165),
    (1.5, 1.0, -1.2257913526447274324),
    (1.5, 5.0, 3.0532670568400184851),
    (1.5, 10.0, 7.8244084071596658726),
    (1.5, 49.0, 46.114532030537278272),
    (1.5, 80.0, 76.877469367251526334),
    (1.5, 100.0, 96.768426037947780133),
    (1.5, 500.0, 495.97175541491355831),
    (1.5, 2000.0, 1995.2801101119826038),
    (2.5, 1e-06, -37.472617948657551443),
    (2.5, 0.01, -14.446759875865691934),
    (2.5, 1.0, -2.8629702657767536389),
    (2.5, 5.0, 2.6222658628966749347),
    (2.5, 10.0, 7.61505817170335168),
    (2.5, 49.0, 46.073302498336296426),
    (2.5, 80.0, 76.852313831072866373),
    (2.5, 100.0, 96.748326396850398301),
    (2.5, 500.0, 495.96775141762040476),
    (2.5, 2000.0, 1995.2791098620244269),
    (4.0, 1e-06, -61.212684784444773455),
    (4.0, 0.01, -24.371318296542175578),
    (4.0, 1.0, -5.9008489255013715159),
    (4.0, 5.0, 1.630853897106895752),
    (4.0, 10.0, 7.1119121488375506102),
    (4.0, 49.0, 45.972855915691985287),
    (4.0, 80.0, 76.791008532475684443),
    (4.0, 100.0, 96.699339275774869096),
    (4.0, 500.0, 495.95799171917418797),
    (4.0, 2000.0, 1995.2766717534506604),
    (5.0, 1e-06, -77.330780435403101621),
    (5.0, 0.01, -31.279074408856802689),
    (5.0, 1.0, -8.2116841332982911445),
    (5.0, 5.0, 0.76917007219852105445),
    (5.0, 10.0, 6.6556826458550453579),
    (5.0, 49.0, 45.880199242714121253),
    (5.0, 80.0, 76.734433260193646554),
    (5.0, 100.0, 96.654127632580081447),
    (5.0, 500.0, 495.94898282334851625),
    (5.0, 2000.0, 1995.274421192570484),
    (10.0, 1e-06, -160.19098995831768716),
    (10.0, 0.01, -68.087583965828824355),
    (10.0, 1.0, -22.013178577973041788),
    (10.0, 5.0, -5.3860465823930188463),
    (10.0, 10.0, 3.0861078511069688698),
    (10.0, 49.0, 45.110392390855938963),
    (10.0, 80.0, 76.263501637569176038),
    (10.0, 100.0, 96.277633365653938182),
    (10.0, 500.0, 495.87391080378078925),
    (10.0, 2000.0, 1995.2556665514304554),
    (49.0, 1e-06, -855.48997313403163449),
    (49.0, 0.01, -404.18329440719868464),
    (49.0, 1.0, -178.52495603884882814),
    (49.0, 5.0, -99.54265078197251713),
    (49.0, 10.0, -65.205706341222685775),
    (49.0, 49.0, 23.071314080661355689),
    (49.0, 80.0, 62.228591771636001681),
    (49.0, 100.0, 84.944980103953903133),
    (49.0, 500.0, 493.5725290587564291),
    (49.0, 2000.0, 1994.680302673492048),
    (99.0, 1e-06, -1795.4913214834731227),
    (99.0, 0.01, -883.66762440783102809),
    (99.0, 1.0, -427.75327627594956738),
    (99.0, 5.0, -268.35894223612440636),
    (99.0, 10.0, -199.55016043799546431),
    (99.0, 49.0, -36.628795816649996114),
    (99.0, 80.0, 21.00470738836725462),
    (99.0, 100.0, 50.769672352234311442),
    (99.0, 500.0, 486.19502339502821814),
    (99.0, 2000.0, 1992.830310551461725),
];

#[test]
fn log_bessel_matches_high_precision_reference() {
    for &(nu, kappa, want) in LOG_BESSEL {
        let got = log_bessel_i(nu, kappa).unwrap();
        // |d ln I| bounds the relative error of I itself
        assert!(
            (got - want).abs() <= 1e-10 * want.abs().max(1.0),
            "nu={nu} kappa={kappa}: got {got}, want {want}"
        );
    }
}

#[test]
fn log_bessel_is_continuous_across_regime_switches() {
    for nu in [0.0, 0.5, 1.5, 4.9, 5.0, 12.0, 100.0] {
        let edge = 50.0 * f64::max(1.0, f64::sqrt(nu));
        let below = log_bessel_i(nu, edge * (1.0 - 1e-12)).unwrap();
        let above = log_bessel_i(nu, edge * (1.0 + 1e-12)).unwrap();
        assert!((below - above).abs() < 1e-9 * below.abs().max(1.0), "nu={nu}");
    }
}

#[test]
fn beta_reg_matches_statrs() {
    for &a in &[0.5, 1.0, 1.5, 3.5, 10.0, 49.5] {
        for &b in &[0.5, 1.0, 2.0, 7.5] {
            for i in 0..=40 {
                let x = i as f64 / 40.0;
                let want = statrs::function::beta::beta_reg(a, b, x);
                let got = beta_reg(a, b, x).unwrap();
                assert!((got - want).abs() < 1e-12, "a={a} b={b} x={x}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn cap_mass_matches_beta_tail() {
    for d in [2, 3, 4, 5, 8, 20, 64] {
        for i in 1..=40 {
            let r = 2.0 * i as f64 / 41.0;
            let t = 1.0 - r * r / 2.0;
            let half = 0.5 * statrs::function::beta::beta_reg((d as f64 - 1.0) / 2.0, 0.5, 1.0 - t * t);
            let want = if t >= 0.0 { half } else { 1.0 - half };
            let got = cap_mass(d, r).unwrap();
            assert!((got - want).abs() < 1e-11, "d={d} r={r}: {got} vs {want}");
        }
    }
}

#[test]
fn cap_radius_inverts_cap_mass() {
    for d in [2, 3, 6, 17] {
        for i in 1..20 {
            let p = i as f64 / 20.0;
            let r = cap_radius(d, p).unwrap();
            assert!((cap_mass(d, r).unwrap() - p).abs() < 1e-10, "d={d} p={p}");
        }
    }
}
