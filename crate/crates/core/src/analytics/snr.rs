use super::{check_grid, exp_integral, Axis, SystemParams, TradeoffCurve};
use crate::error::{domain, Result};

/// Fraction of parameters lost to sub-channel cutoff: `1 - exp(-g_th)`.
pub fn truncation_ratio(g_th: f64) -> Result<f64> {
    if !(g_th >= 0.0) {
        return Err(domain(format!("g_th must be non-negative, got {g_th}")));
    }
    Ok(-(-g_th).exp_m1())
}

/// Cutoff threshold that produces truncation ratio `zeta`: `-ln(1 - zeta)`.
pub fn threshold_for_ratio(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(domain(format!("truncation ratio must lie in (0, 1), got {zeta}")));
    }
    Ok(-(-zeta).ln_1p())
}

/// Aligned receive power `P0 / (M r_max^alpha E1(g_th))` in watts.
///
/// Returns 0 with a warning when `g_th = 0`, where the inversion cost diverges.
pub fn aligned_power(params: &SystemParams, r_max: f64) -> Result<f64> {
    if !(r_max > 0.0) {
        return Err(domain(format!("r_max must be positive, got {r_max}")));
    }
    if params.g_th == 0.0 {
        log::warn!("g_th = 0: full channel inversion has unbounded power cost, aligned power is 0");
        return Ok(0.0);
    }
    let ei = exp_integral(params.g_th)?;
    Ok(params.p0 / (params.m as f64 * r_max.powf(params.alpha) * ei))
}

/// Linear receive SNR of the aligned signal when the furthest active device is at `r_max`.
pub fn receive_snr(params: &SystemParams, r_max: f64) -> Result<f64> {
    Ok(aligned_power(params, r_max)? / params.n0)
}

/// Receive SNR as a function of the truncation ratio, at fixed `r_max`.
pub fn snr_truncation_curve(params: &SystemParams, r_max: f64, zeta_grid: &[f64]) -> Result<TradeoffCurve> {
    if !(r_max > 0.0) {
        return Err(domain(format!("r_max must be positive, got {r_max}")));
    }
    check_grid(zeta_grid, "truncation ratio")?;
    let scale = params.p0 / (params.m as f64 * r_max.powf(params.alpha) * params.n0);
    let points = zeta_grid
        .iter()
        .map(|&zeta| {
            let g = threshold_for_ratio(zeta)?;
            Ok((zeta, scale / exp_integral(g)?))
        })
        .collect::<Result<Vec<_>>>()?;
    TradeoffCurve::new(Axis::TruncationRatio, Axis::SnrLinear, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> SystemParams {
        SystemParams { alpha: 3.0, ..SystemParams::reference() }
    }

    #[test]
    fn truncation_ratio_examples() {
        assert_eq!(truncation_ratio(0.0).unwrap(), 0.0);
        assert!((truncation_ratio(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert!((truncation_ratio(1.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-12);
        assert!(truncation_ratio(-0.5).is_err());
    }

    #[test]
    fn threshold_round_trip() {
        for i in 1..1000 {
            let zeta = i as f64 / 1000.0;
            let back = truncation_ratio(threshold_for_ratio(zeta).unwrap()).unwrap();
            assert!((back - zeta).abs() < 1e-12);
        }
    }

    #[test]
    fn snr_monotone_and_linear_in_power() {
        let p = fig3();
        assert!(receive_snr(&p, 100.0).unwrap() < receive_snr(&p, 50.0).unwrap());
        let doubled = SystemParams { p0: 2.0 * p.p0, ..p };
        let ratio = receive_snr(&doubled, 70.0).unwrap() / receive_snr(&p, 70.0).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_threshold_gives_zero_snr() {
        let p = SystemParams { g_th: 0.0, ..fig3() };
        assert_eq!(receive_snr(&p, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn curve_reproduces_receive_snr() {
        let p = fig3();
        for g in [0.05, 0.3, 1.0, 2.5] {
            let zeta = truncation_ratio(g).unwrap();
            let curve = snr_truncation_curve(&p, 100.0, &[zeta]).unwrap();
            let direct = receive_snr(&SystemParams { g_th: g, ..p }, 100.0).unwrap();
            assert!((curve.points()[0].1 / direct - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fig3_curve_increasing_and_unbounded() {
        let p = fig3();
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let curve = snr_truncation_curve(&p, 100.0, &grid).unwrap();
        assert_eq!(curve.len(), 9);
        assert!(curve.is_strictly_increasing());
        // P0 / (M r^3 N0) = 0.1 / (1e3 * 1e6 * 1e-11) = 10; at zeta = 0.5, g = ln 2.
        let want = 10.0 / exp_integral(2f64.ln()).unwrap();
        assert!((curve.points()[4].1 / want - 1.0).abs() < 1e-9);
        let near_one = snr_truncation_curve(&p, 100.0, &[0.9, 0.999, 0.999_999]).unwrap();
        let ys: Vec<f64> = near_one.points().iter().map(|p| p.1).collect();
        assert!(ys[2] > 1e3 * ys[0]);
    }

    #[test]
    fn curve_rejects_boundary_ratios() {
        let p = fig3();
        assert!(snr_truncation_curve(&p, 100.0, &[0.0, 0.5]).is_err());
        assert!(snr_truncation_curve(&p, 100.0, &[0.5, 1.0]).is_err());
    }
}
