use super::{binomial_pmf, check_grid, exp_integral, Axis, ScenarioParams, SystemParams, TradeoffCurve};
use crate::error::{domain, Error, Result};

/// Expected fraction of devices inside radius `r_in`: `(r_in / r_cell)^2`.
pub fn fraction_exploited(r_in: f64, r_cell: f64) -> Result<f64> {
    if !(r_cell > 0.0) {
        return Err(domain(format!("r_cell must be positive, got {r_cell}")));
    }
    if !(r_in > 0.0 && r_in <= r_cell) {
        return Err(domain(format!("r_in must lie in (0, {r_cell}], got {r_in}")));
    }
    let ratio = r_in / r_cell;
    Ok(ratio * ratio)
}

/// `Pr(K_in = k)` for K devices uniform on the disk.
pub fn k_in_pmf(k_devices: usize, r_in: f64, r_cell: f64, k: usize) -> Result<f64> {
    if k > k_devices {
        return Err(domain(format!("k = {k} exceeds device count {k_devices}")));
    }
    let p = fraction_exploited(r_in, r_cell)?;
    Ok(binomial_pmf(k_devices, p, k))
}

/// The full `K_in` PMF over `0..=K`.
pub fn k_in_distribution(k_devices: usize, r_in: f64, r_cell: f64) -> Result<Vec<f64>> {
    let p = fraction_exploited(r_in, r_cell)?;
    Ok((0..=k_devices).map(|k| binomial_pmf(k_devices, p, k)).collect())
}

/// Distribution of the largest of K device distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxDistance {
    pub k_devices: usize,
    pub r_cell: f64,
}

impl MaxDistance {
    /// `f(r) = 2K r^{2K-1} / R^{2K}` on `[0, R]`.
    pub fn pdf(&self, r: f64) -> f64 {
        if !(0.0..=self.r_cell).contains(&r) {
            return 0.0;
        }
        let two_k = 2.0 * self.k_devices as f64;
        two_k / self.r_cell * (r / self.r_cell).powf(two_k - 1.0)
    }

    pub fn cdf(&self, r: f64) -> f64 {
        (r.clamp(0.0, self.r_cell) / self.r_cell).powi(2 * self.k_devices as i32)
    }

    /// `E[r_max] = 2K / (2K + 1) R`.
    pub fn mean(&self) -> f64 {
        let two_k = 2.0 * self.k_devices as f64;
        two_k / (two_k + 1.0) * self.r_cell
    }
}

pub fn max_distance_moments(k_devices: usize, r_cell: f64) -> Result<MaxDistance> {
    if k_devices == 0 {
        return Err(domain("need at least one device"));
    }
    if !(r_cell > 0.0) {
        return Err(domain(format!("r_cell must be positive, got {r_cell}")));
    }
    Ok(MaxDistance { k_devices, r_cell })
}

/// Base SNR `P0 / (M r^alpha E1(g_th) N0)` at radius `r`.
fn base_snr(params: &SystemParams, r: f64) -> Result<f64> {
    if !(params.g_th > 0.0) {
        return Err(domain("expected SNR needs g_th > 0"));
    }
    Ok(params.p0 / (params.m as f64 * r.powf(params.alpha) * exp_integral(params.g_th)? * params.n0))
}

/// Expected receive SNR under all-inclusive scheduling,
/// `2K / (2K - alpha) * P0 / (M R^alpha E1(g_th))`, over N0.
pub fn expected_snr_all_inclusive(params: &SystemParams, k_devices: usize) -> Result<f64> {
    let two_k = 2.0 * k_devices as f64;
    if two_k - params.alpha - 1.0 < 0.0 {
        return Err(Error::Convergence { k: k_devices, alpha: params.alpha });
    }
    Ok(two_k / (two_k - params.alpha) * base_snr(params, params.r_cell)?)
}

/// Scaling factor `c(R_in) = sum_{k>=2} 2k/(2k - alpha) Pr(K_in = k)`.
///
/// Terms with `2k <= alpha` have an infinite conditional mean and are left
/// out together with k = 0 and k = 1, so for alpha < 4 the sum starts at 2.
pub fn interior_c_factor(k_devices: usize, alpha: f64, r_in: f64, r_cell: f64) -> Result<f64> {
    if k_devices < 2 {
        return Err(domain(format!("cell-interior expectation needs K >= 2, got {k_devices}")));
    }
    let p = fraction_exploited(r_in, r_cell)?;
    let first = 2usize.max((alpha / 2.0).floor() as usize + 1);
    Ok((first..=k_devices)
        .map(|k| {
            let two_k = 2.0 * k as f64;
            two_k / (two_k - alpha) * binomial_pmf(k_devices, p, k)
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellInteriorSnr {
    /// Expected linear receive SNR.
    pub snr: f64,
    pub c_factor: f64,
    /// `Some(1 <= c <= 4)` when alpha = 3, the only case the bound is claimed for.
    pub within_bound: Option<bool>,
}

/// Expected receive SNR under cell-interior scheduling,
/// `c(R_in) P0 / (M R_in^alpha E1(g_th))`, over N0.
pub fn expected_snr_cell_interior(params: &SystemParams, scenario: &ScenarioParams) -> Result<CellInteriorSnr> {
    scenario.validate(params.r_cell)?;
    let c = interior_c_factor(scenario.k_devices, params.alpha, scenario.r_in, params.r_cell)?;
    let within_bound = (params.alpha == 3.0).then(|| (1.0..=4.0).contains(&c));
    if within_bound == Some(false) {
        log::warn!(
            "c(R_in) = {c:.4} outside [1, 4] at K = {}, R_in/R = {:.3}",
            scenario.k_devices,
            scenario.r_in / params.r_cell
        );
    }
    Ok(CellInteriorSnr {
        snr: c * base_snr(params, scenario.r_in)?,
        c_factor: c,
        within_bound,
    })
}

/// SNR gain of cell-interior over all-inclusive scheduling, `a (R / R_in)^alpha`
/// with `a = (2K - alpha) / (2K) c(R_in)`.
pub fn snr_gain(params: &SystemParams, scenario: &ScenarioParams) -> Result<f64> {
    scenario.validate(params.r_cell)?;
    let k_devices = scenario.k_devices;
    let two_big_k = 2.0 * k_devices as f64;
    if two_big_k - params.alpha - 1.0 < 0.0 {
        return Err(Error::Convergence { k: k_devices, alpha: params.alpha });
    }
    if k_devices < 2 {
        return Err(domain(format!("cell-interior expectation needs K >= 2, got {k_devices}")));
    }
    let p = fraction_exploited(scenario.r_in, params.r_cell)?;
    let alpha = params.alpha;
    let first = 2usize.max((alpha / 2.0).floor() as usize + 1);
    // a accumulated termwise so that R_in = R gives exactly 1.
    let a: f64 = (first..=k_devices)
        .map(|k| {
            let two_k = 2.0 * k as f64;
            (two_big_k - alpha) * two_k / (two_big_k * (two_k - alpha)) * binomial_pmf(k_devices, p, k)
        })
        .sum();
    Ok(a * (params.r_cell / scenario.r_in).powf(alpha))
}

/// SNR gain against the fraction of exploited data, `a (1 / F_DAT)^{alpha/2}`.
pub fn reliability_quantity_curve(params: &SystemParams, k_devices: usize, f_dat_grid: &[f64]) -> Result<TradeoffCurve> {
    check_grid(f_dat_grid, "data fraction")?;
    let points = f_dat_grid
        .iter()
        .map(|&f| {
            if !(f > 0.0 && f <= 1.0) {
                return Err(domain(format!("F_DAT must lie in (0, 1], got {f}")));
            }
            let scenario = ScenarioParams {
                k_devices,
                r_in: params.r_cell * f.sqrt(),
                n_cr: 1,
                q_dim: 1,
            };
            Ok((f, snr_gain(params, &scenario)?))
        })
        .collect::<Result<Vec<_>>>()?;
    TradeoffCurve::new(Axis::DataFraction, Axis::Gain, points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PAllExploited {
    pub exact: f64,
    /// `1 - K (1 - p_in)^{N_CR}`, accurate once that correction is small.
    pub approx: f64,
}

/// Probability that every device is interior in at least one of `n_cr`
/// i.i.d. rounds: `(1 - (1 - p_in)^{N_CR})^K`.
pub fn p_all_exploited(k_devices: usize, n_cr: usize, p_in: f64) -> Result<PAllExploited> {
    if !(0.0..=1.0).contains(&p_in) {
        return Err(domain(format!("p_in must lie in [0, 1], got {p_in}")));
    }
    if n_cr == 0 {
        return Err(domain("n_cr must be at least 1"));
    }
    let miss = (1.0 - p_in).powi(n_cr as i32);
    let exact = if miss >= 1.0 { 0.0 } else { (k_devices as f64 * (-miss).ln_1p()).exp() };
    Ok(PAllExploited {
        exact,
        approx: 1.0 - k_devices as f64 * miss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::reference()
    }

    fn scen(k: usize, ratio: f64) -> ScenarioParams {
        ScenarioParams { k_devices: k, r_in: 100.0 * ratio, n_cr: 1, q_dim: 1 }
    }

    #[test]
    fn fraction_examples() {
        assert_eq!(fraction_exploited(100.0, 100.0).unwrap(), 1.0);
        assert!((fraction_exploited(50.0, 100.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(fraction_exploited(101.0, 100.0).is_err());
    }

    #[test]
    fn pmf_examples_and_mean_identity() {
        assert_eq!(k_in_pmf(7, 100.0, 100.0, 7).unwrap(), 1.0);
        assert!((k_in_pmf(2, 50.0 * 2f64.sqrt(), 100.0, 1).unwrap() - 0.5).abs() < 1e-12);
        // ratio^2 = 0.25 with r_in/R = 0.5
        assert!((k_in_pmf(2, 50.0, 100.0, 1).unwrap() - 0.375).abs() < 1e-15);
        assert!(k_in_pmf(2, 50.0, 100.0, 3).is_err());
        for (k, ratio) in [(5usize, 0.3), (20, 0.5), (200, 0.8)] {
            let pmf = k_in_distribution(k, 100.0 * ratio, 100.0).unwrap();
            let total: f64 = pmf.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let mean: f64 = pmf.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
            let f = fraction_exploited(100.0 * ratio, 100.0).unwrap();
            assert!((mean / k as f64 - f).abs() < 1e-12);
        }
    }

    #[test]
    fn max_distance_density() {
        let d = max_distance_moments(1, 100.0).unwrap();
        assert!((d.mean() - 200.0 / 3.0).abs() < 1e-12);
        for k in [1usize, 3, 10, 50] {
            let d = max_distance_moments(k, 100.0).unwrap();
            assert!((d.pdf(100.0) - 2.0 * k as f64 / 100.0).abs() < 1e-12);
            // composite Simpson
            let n = 20_000;
            let h = 100.0 / n as f64;
            let simpson = |f: &dyn Fn(f64) -> f64| -> f64 {
                let inner: f64 = (1..n).map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
                h / 3.0 * (f(0.0) + inner + f(100.0))
            };
            let total = simpson(&|r| d.pdf(r));
            assert!((total - 1.0).abs() < 1e-10, "k={k} total={total}");
            let mean = simpson(&|r| r * d.pdf(r));
            assert!((mean - d.mean()).abs() < 1e-6);
        }
        assert!(max_distance_moments(0, 100.0).is_err());
    }

    #[test]
    fn all_inclusive_prefactor() {
        let p = params();
        let base = base_snr(&p, p.r_cell).unwrap();
        let v = expected_snr_all_inclusive(&p, 200).unwrap();
        assert!((v / base - 400.0 / 397.0).abs() < 1e-12);
        let tiny = SystemParams { alpha: 1e-12, ..p };
        let v = expected_snr_all_inclusive(&tiny, 5).unwrap();
        let r_free = SystemParams { r_cell: 1.0, ..tiny };
        assert!((v / base_snr(&tiny, tiny.r_cell).unwrap() - 1.0).abs() < 1e-9);
        assert!((v / expected_snr_all_inclusive(&r_free, 5).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_inclusive_convergence_error() {
        let p = SystemParams { alpha: 3.0, ..params() };
        assert!(matches!(expected_snr_all_inclusive(&p, 1), Err(Error::Convergence { .. })));
        assert!(expected_snr_all_inclusive(&p, 2).is_ok());
    }

    #[test]
    fn c_factor_degenerate_at_full_radius() {
        for k in [5usize, 20, 200] {
            let r = expected_snr_cell_interior(&params(), &scen(k, 1.0)).unwrap();
            let want = 2.0 * k as f64 / (2.0 * k as f64 - 3.0);
            assert!((r.c_factor - want).abs() < 1e-12);
            assert_eq!(r.within_bound, Some(true));
        }
        assert!(expected_snr_cell_interior(&params(), &scen(1, 0.5)).is_err());
    }

    #[test]
    fn c_factor_upper_bound_holds_but_lower_bound_needs_interior_mass() {
        // The dropped k = 0, 1 mass pulls c below 1 when few devices are interior.
        let low = expected_snr_cell_interior(&params(), &scen(20, 0.1)).unwrap();
        assert!(low.c_factor < 1.0);
        assert_eq!(low.within_bound, Some(false));
        for k in [5usize, 20, 200] {
            for i in 1..=10 {
                let c = expected_snr_cell_interior(&params(), &scen(k, i as f64 / 10.0)).unwrap().c_factor;
                assert!(c <= 4.0);
            }
        }
    }

    #[test]
    fn gain_identities() {
        let p = params();
        assert_eq!(snr_gain(&p, &scen(20, 1.0)).unwrap(), 1.0);
        let mut last = 1.0;
        for i in (3..10).rev() {
            let g = snr_gain(&p, &scen(20, i as f64 / 10.0)).unwrap();
            assert!(g > last);
            last = g;
        }
        let s = scen(20, 0.5);
        let ratio = expected_snr_cell_interior(&p, &s).unwrap().snr / expected_snr_all_inclusive(&p, 20).unwrap();
        assert!((snr_gain(&p, &s).unwrap() / ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reliability_curve_properties() {
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let p3 = params();
        let p4 = SystemParams { alpha: 4.0, ..p3 };
        let c3 = reliability_quantity_curve(&p3, 20, &grid).unwrap();
        let c4 = reliability_quantity_curve(&p4, 20, &grid).unwrap();
        assert_eq!(c3.points()[9].1, 1.0);
        assert_eq!(c4.points()[9].1, 1.0);
        for (a, b) in c3.points()[..9].iter().zip(&c4.points()[..9]) {
            assert!(b.1 > a.1);
        }
        for &(f, g) in c3.points() {
            let direct = snr_gain(&p3, &scen(20, f.sqrt())).unwrap();
            assert!((g - direct).abs() < 1e-9 * direct.max(1.0));
        }
        assert!(reliability_quantity_curve(&p3, 20, &[0.0, 0.5]).is_err());
    }

    #[test]
    fn p_all_examples() {
        assert_eq!(p_all_exploited(200, 3, 1.0).unwrap().exact, 1.0);
        assert!((p_all_exploited(1, 1, 0.3).unwrap().exact - 0.3).abs() < 1e-15);
        let r = p_all_exploited(200, 31, 0.25).unwrap();
        assert!(200.0 * 0.75f64.powi(31) < 0.03);
        assert!((r.exact - r.approx).abs() < 1e-3);
        let mut last = 0.0;
        for n in 1..60 {
            let v = p_all_exploited(20, n, 0.25).unwrap().exact;
            assert!(v >= last);
            last = v;
        }
    }
}
