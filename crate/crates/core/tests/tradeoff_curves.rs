use num_rational::Ratio;
use stia_core::analysis::{
    baseline_zf_mat, baseline_zf_tdma, emit_tradeoff_table, fit_slope, mat_dof_k3, tradeoff_general, tradeoff_k3,
    TradeoffScheme,
};
use stia_core::Fraction;

fn frac(n: i64, d: i64) -> Fraction {
    Ratio::new(n, d)
}

/// Independent statement of the three-user curve: the minimum of the three
/// supporting lines.
fn oracle(g: Fraction) -> Fraction {
    let a = frac(2, 1);
    let b = frac(9, 4) - frac(3, 4) * g;
    let c = frac(3, 2);
    a.min(b.max(c))
}

fn grid(den: i64, upto: i64) -> impl Iterator<Item = Fraction> {
    (0..=upto).map(move |i| frac(i, den))
}

#[test]
fn curve_matches_supporting_lines() {
    for g in grid(720, 1440) {
        assert_eq!(tradeoff_k3(g).unwrap(), oracle(g), "gamma {g}");
    }
}

#[test]
fn curve_is_nonincreasing_with_breakpoints_at_third_and_one() {
    let pts: Vec<Fraction> = grid(720, 1440).collect();
    let vals: Vec<Fraction> = pts.iter().map(|&g| tradeoff_k3(g).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    // Second differences vanish except around the breakpoints.
    for i in 1..pts.len() - 1 {
        let kink = vals[i - 1] - vals[i] * 2 + vals[i + 1] != frac(0, 1);
        assert_eq!(kink, pts[i] == frac(1, 3) || pts[i] == frac(1, 1), "gamma {}", pts[i]);
    }
}

#[test]
fn stia_dominates_baselines_on_unit_interval() {
    for g in grid(960, 960) {
        let stia = tradeoff_k3(g).unwrap();
        let zf_mat = baseline_zf_mat(g).unwrap();
        let zf_tdma = baseline_zf_tdma(g).unwrap();
        assert!(stia >= zf_mat && zf_mat >= zf_tdma, "gamma {g}");
        if g > frac(0, 1) && g < frac(1, 1) {
            assert!(stia > zf_mat && zf_mat > zf_tdma, "gamma {g}");
        }
    }
}

#[test]
fn gaps_at_one_third() {
    let g = frac(1, 3);
    assert_eq!(tradeoff_k3(g).unwrap() - baseline_zf_tdma(g).unwrap(), frac(1, 3));
    assert_eq!(tradeoff_k3(g).unwrap() - baseline_zf_mat(g).unwrap(), frac(1, 6));
    assert_eq!(baseline_zf_tdma(frac(0, 1)).unwrap(), frac(2, 1));
    assert_eq!(baseline_zf_mat(frac(0, 1)).unwrap(), frac(2, 1));
}

#[test]
fn domain_errors() {
    assert!(tradeoff_k3(frac(-1, 3)).is_err());
    assert!(baseline_zf_tdma(frac(4, 3)).is_err());
    assert!(baseline_zf_mat(frac(-1, 2)).is_err());
    assert!(emit_tradeoff_table(&[]).is_err());
}

#[test]
fn table_has_every_scheme_at_every_gamma() {
    let gammas: Vec<Fraction> = grid(24, 36).collect();
    let rows = emit_tradeoff_table(&gammas).unwrap();
    assert_eq!(rows.len(), gammas.len() * TradeoffScheme::ALL.len());
    for r in &rows {
        match r.scheme {
            TradeoffScheme::Mat => assert_eq!(r.dof, mat_dof_k3()),
            TradeoffScheme::Tdma => assert_eq!(r.dof, frac(1, 1)),
            TradeoffScheme::Stia => assert_eq!(r.dof, oracle(r.gamma)),
            TradeoffScheme::ZfTdma => assert_eq!(r.dof, frac(2, 1) - r.gamma.min(frac(1, 1))),
            TradeoffScheme::ZfMat => assert_eq!(r.dof, frac(2, 1) - r.gamma.min(frac(1, 1)) / 2),
        }
    }
}

#[test]
fn general_curve_plateau_and_tail() {
    for g in grid(24, 48) {
        assert_eq!(tradeoff_general(3, g).unwrap(), tradeoff_k3(g).unwrap());
    }
    for k in 4..=8i64 {
        let users = k as usize;
        assert_eq!(tradeoff_general(users, frac(0, 1)).unwrap(), frac(k - 1, 1));
        assert_eq!(tradeoff_general(users, frac(1, k)).unwrap(), frac(k - 1, 1));
        assert_eq!(tradeoff_general(users, frac(1, 1)).unwrap(), frac(1, 1));
        assert_eq!(tradeoff_general(users, frac(5, 2)).unwrap(), frac(1, 1));
        let mut prev = frac(k, 1);
        for g in grid(120, 240) {
            let d = tradeoff_general(users, g).unwrap();
            assert!(d <= prev);
            prev = d;
        }
    }
}

#[test]
fn regression_recovers_injected_slope() {
    let xs: Vec<f64> = [40.0f64, 50.0, 60.0].iter().map(|db| (10f64.powf(db / 10.0)).log2()).collect();
    for d in [1.0, 5.0 / 3.0, 2.0, 3.0] {
        let ys: Vec<f64> = xs.iter().map(|x| d * x + 0.37).collect();
        assert!((fit_slope(&xs, &ys) - d).abs() <= 1e-12);
    }
}
