//! The mean functionals the sequence classes are built on: prefix means,
//! strong Cesàro deviations, lacunary block means `t_r`, statistical
//! exceedance densities, shifted-window means, and Abel power-series values.
//!
//! All accumulations are compensated and run in ascending index order; a
//! single pass over the sequence feeds every checkpoint. The block/prefix
//! identity `h_r * t_r = S_{k_r} - S_{k_{r-1}}` (with `S_n` the prefix sum of
//! deviations) is the main cross-check and holds to 1e-9 relative at
//! million-term scale.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::sequences::{LacunarySchedule, RealSequence};

/// What a profile's values measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `(1/n) sum a_k` at each checkpoint n.
    PrefixMean,
    /// `(1/n) sum |a_k - center|` at each checkpoint n.
    StrongCesaro,
    /// Block means `t_r = (1/h_r) sum_{k in I_r} |a_k - center|`.
    NthetaBlock,
    /// `|{k <= n : |a_k - center| >= eps}| / n`.
    StatDensity,
    /// Largest shifted-window mean magnitude per checkpoint.
    AlmostSpread,
    /// `|abel(x) - center|` on a grid of x values.
    AbelGrid,
    /// Max of `|a_k - center|` over each checkpoint partition block.
    SupWindow,
    /// Windowed sup of `|a_m - a_n|` with the checkpoint as base index.
    CauchyWindow,
    /// Max oscillation `M(lambda)` per lambda of the slow-oscillation grid.
    SlowOscillation,
}

/// An indexed series of computed mean values. `index` holds checkpoint
/// numbers, block indices, shifts, or grid abscissas depending on `kind`;
/// absolute-deviation kinds have non-negative values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanProfile {
    pub kind: ProfileKind,
    pub index: Vec<f64>,
    pub values: Vec<f64>,
    /// The reference value the deviations are measured against.
    pub center: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule_tag: Option<String>,
    /// Max-minus-min across shifts, recorded by the window-spread functional.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
}

impl MeanProfile {
    fn new(kind: ProfileKind, index: Vec<f64>, values: Vec<f64>, center: f64) -> Self {
        debug_assert_eq!(index.len(), values.len());
        MeanProfile {
            kind,
            index,
            values,
            center,
            schedule_tag: None,
            spread: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `index,value` lines with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.index.iter().zip(&self.values) {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }
}

fn validate_checkpoints(checkpoints: &[u64], n_max: u64) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(Error::parameter("checkpoints", "must not be empty"));
    }
    if !checkpoints.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::parameter(
            "checkpoints",
            "must be strictly increasing",
        ));
    }
    if checkpoints[0] == 0 {
        return Err(Error::parameter("checkpoints", "must start at 1 or later"));
    }
    let last = *checkpoints.last().unwrap();
    if last > n_max {
        return Err(Error::parameter(
            "checkpoints",
            format!("checkpoint {last} exceeds n_max {n_max}"),
        ));
    }
    Ok(())
}

/// Prefix means `(1/n) sum_{k<=n} a_k` captured at the checkpoints.
pub fn prefix_mean(a: &RealSequence, checkpoints: &[u64]) -> Result<MeanProfile> {
    validate_checkpoints(checkpoints, a.n_max())?;
    let mut acc = KahanSum::new();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for k in 1..=*checkpoints.last().unwrap() {
        acc.add(a.value(k)?);
        if k == checkpoints[next] {
            values.push(acc.value() / k as f64);
            next += 1;
        }
    }
    Ok(MeanProfile::new(
        ProfileKind::PrefixMean,
        checkpoints.iter().map(|&c| c as f64).collect(),
        values,
        0.0,
    ))
}

/// Strong Cesàro deviations `(1/n) sum_{i<=n} |a_i - center|`. Applied to a
/// forward-difference sequence with `center = 0` this is the consecutive-
/// difference Cesàro functional.
pub fn strong_cesaro_deviation(
    a: &RealSequence,
    center: f64,
    checkpoints: &[u64],
) -> Result<MeanProfile> {
    validate_checkpoints(checkpoints, a.n_max())?;
    let mut acc = KahanSum::new();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for k in 1..=*checkpoints.last().unwrap() {
        acc.add((a.value(k)? - center).abs());
        if k == checkpoints[next] {
            values.push(acc.value() / k as f64);
            next += 1;
        }
    }
    Ok(MeanProfile::new(
        ProfileKind::StrongCesaro,
        checkpoints.iter().map(|&c| c as f64).collect(),
        values,
        center,
    ))
}

/// Block means `t_r = (1/h_r) sum_{k in I_r} |a_k - center|` for
/// `r = 1..=r_count`. Each block gets its own compensated accumulator, so a
/// per-block recomputation reproduces the single pass bit-for-bit.
pub fn ntheta_block_means(
    a: &RealSequence,
    center: f64,
    theta: &LacunarySchedule,
    r_count: u32,
) -> Result<MeanProfile> {
    if r_count < 1 || r_count > theta.r_max() {
        return Err(Error::parameter(
            "r_count",
            format!("must be in 1..={}", theta.r_max()),
        ));
    }
    let needed = theta.breakpoint(r_count);
    if needed > a.n_max() {
        return Err(Error::IndexRange {
            label: a.label().to_string(),
            index: needed,
            len: a.n_max(),
        });
    }
    let mut values = Vec::with_capacity(r_count as usize);
    for r in 1..=r_count {
        let mut acc = KahanSum::new();
        for k in theta.block(r) {
            acc.add((a.value(k)? - center).abs());
        }
        values.push(acc.value() / theta.block_len(r) as f64);
    }
    let mut profile = MeanProfile::new(
        ProfileKind::NthetaBlock,
        (1..=r_count).map(|r| r as f64).collect(),
        values,
        center,
    );
    profile.schedule_tag = Some(theta.label().to_string());
    Ok(profile)
}

/// Exceedance densities `|{k <= n : |a_k - center| >= eps}| / n` with exact
/// integer counting.
pub fn statistical_exceed_density(
    a: &RealSequence,
    center: f64,
    eps: f64,
    checkpoints: &[u64],
) -> Result<MeanProfile> {
    if !(eps > 0.0) {
        return Err(Error::parameter("eps", "must be positive"));
    }
    validate_checkpoints(checkpoints, a.n_max())?;
    let mut count = 0u64;
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for k in 1..=*checkpoints.last().unwrap() {
        if (a.value(k)? - center).abs() >= eps {
            count += 1;
        }
        if k == checkpoints[next] {
            values.push(count as f64 / k as f64);
            next += 1;
        }
    }
    Ok(MeanProfile::new(
        ProfileKind::StatDensity,
        checkpoints.iter().map(|&c| c as f64).collect(),
        values,
        center,
    ))
}

/// Shifted-window means `(1/n) sum_{k<=n} a_{k+j}` for `j = 0..=j_max`,
/// plus the spread `max_j - min_j`. The profile index is the shift `j`;
/// values may be signed.
pub fn almost_window_spread(a: &RealSequence, n: u64, j_max: u32) -> Result<MeanProfile> {
    if n == 0 {
        return Err(Error::parameter("n", "window length must be at least 1"));
    }
    if n + j_max as u64 + 1 > a.n_max() {
        return Err(Error::IndexRange {
            label: a.label().to_string(),
            index: n + j_max as u64 + 1,
            len: a.n_max(),
        });
    }
    // prefix sums up to n + j_max; each window mean is then one subtraction
    let top = n + j_max as u64;
    let mut prefix = Vec::with_capacity(top as usize + 1);
    prefix.push(0.0);
    let mut acc = KahanSum::new();
    for k in 1..=top {
        acc.add(a.value(k)?);
        prefix.push(acc.value());
    }
    let mut values = Vec::with_capacity(j_max as usize + 1);
    for j in 0..=j_max as u64 {
        values.push((prefix[(n + j) as usize] - prefix[j as usize]) / n as f64);
    }
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut profile = MeanProfile::new(
        ProfileKind::AlmostSpread,
        (0..=j_max).map(|j| j as f64).collect(),
        values,
        0.0,
    );
    profile.spread = Some(spread);
    Ok(profile)
}

/// Abel power-series value `(1 - x) * sum_k a_{k+1} x^k` (library index 1 is
/// series index 0). The series is truncated once the analytic tail bound
/// `(1-x) * C * sum_{k>K} (k+1)^g x^k` drops below `tail_tolerance`, with
/// `C` estimated from the first 10^4 terms plus 10% headroom. Exhausting the
/// sequence before the bound is met is a truncation error carrying the bound
/// that was achieved.
pub fn abel_value(a: &RealSequence, x: f64, tail_tolerance: f64) -> Result<f64> {
    if !x.is_finite() || !(0.0..1.0).contains(&x) {
        return Err(Error::parameter("x", "must satisfy 0 <= x < 1"));
    }
    if !(tail_tolerance > 0.0) {
        return Err(Error::parameter("tail_tolerance", "must be positive"));
    }
    let g = a.growth_bound().max(0.0);
    let probe = a.n_max().min(10_000);
    let mut c_est = 0.0f64;
    for k in 1..=probe {
        c_est = c_est.max(a.value(k)?.abs() / (k as f64).powf(g));
    }
    c_est *= 1.1;

    let one_minus = 1.0 - x;
    let mut acc = KahanSum::new();
    let mut xpow = 1.0f64;
    let mut j = 0u64;
    loop {
        acc.add(a.value(j + 1)? * xpow);
        // bound on the tail past series index j
        let next_term = c_est * ((j + 2) as f64).powf(g) * xpow * x;
        let rho = x * (((j + 3) as f64) / ((j + 2) as f64)).powf(g);
        let bound = if rho < 1.0 {
            one_minus * next_term / (1.0 - rho)
        } else {
            f64::INFINITY
        };
        if bound <= tail_tolerance {
            break;
        }
        if j + 2 > a.n_max() {
            return Err(Error::Truncation {
                label: a.label().to_string(),
                terms: j + 1,
                achieved: bound,
                requested: tail_tolerance,
            });
        }
        j += 1;
        xpow *= x;
    }
    Ok(one_minus * acc.value())
}

/// Deviations `|abel_value(a, x) - center|` over a grid of x values.
pub fn abel_deviation_profile(
    a: &RealSequence,
    center: f64,
    grid: &[f64],
    tail_tolerance: f64,
) -> Result<MeanProfile> {
    if grid.is_empty() {
        return Err(Error::parameter("grid", "must not be empty"));
    }
    let mut values = Vec::with_capacity(grid.len());
    for &x in grid {
        values.push((abel_value(a, x, tail_tolerance)? - center).abs());
    }
    Ok(MeanProfile::new(
        ProfileKind::AbelGrid,
        grid.to_vec(),
        values,
        center,
    ))
}

/// Per-block maxima of `|a_k - center|` over the partition induced by the
/// checkpoints: value `i` is the max over `(c_{i-1}, c_i]`. This is the
/// pointwise-vanishing surrogate used for the plain and second-difference
/// quasi-Cauchy classes.
pub fn sup_window_profile(
    a: &RealSequence,
    center: f64,
    checkpoints: &[u64],
) -> Result<MeanProfile> {
    validate_checkpoints(checkpoints, a.n_max())?;
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut lo = 1u64;
    for &c in checkpoints {
        let mut m = 0.0f64;
        for k in lo..=c {
            m = m.max((a.value(k)? - center).abs());
        }
        values.push(m);
        lo = c + 1;
    }
    Ok(MeanProfile::new(
        ProfileKind::SupWindow,
        checkpoints.iter().map(|&c| c as f64).collect(),
        values,
        center,
    ))
}

/// Windowed Cauchy surrogate: for each checkpoint `n`, the sup of
/// `|a_m - a_n|` over `m` in `(n, min(n + ceil(span_factor * n), n_max)]`.
/// Checkpoints whose window would be empty are dropped.
pub fn cauchy_window_profile(
    a: &RealSequence,
    checkpoints: &[u64],
    span_factor: f64,
) -> Result<MeanProfile> {
    if !(span_factor > 0.0) {
        return Err(Error::parameter("span_factor", "must be positive"));
    }
    validate_checkpoints(checkpoints, a.n_max())?;
    let mut index = Vec::new();
    let mut values = Vec::new();
    for &n in checkpoints {
        let hi = ((n as f64 * span_factor).ceil() as u64)
            .saturating_add(n)
            .min(a.n_max());
        if hi <= n {
            continue;
        }
        let base = a.value(n)?;
        let mut m = 0.0f64;
        for k in (n + 1)..=hi {
            m = m.max((a.value(k)? - base).abs());
        }
        index.push(n as f64);
        values.push(m);
    }
    if values.is_empty() {
        return Err(Error::parameter(
            "checkpoints",
            "no checkpoint leaves room for a comparison window",
        ));
    }
    Ok(MeanProfile::new(
        ProfileKind::CauchyWindow,
        index,
        values,
        0.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{make_catalog_sequence, LacunarySchedule};
    use crate::transforms::{apply_pointwise, forward_difference, PointFunction};

    #[test]
    fn prefix_mean_spot_values() {
        let alt = make_catalog_sequence("alternating", &[], 100).unwrap();
        let p = prefix_mean(&alt, &[4]).unwrap();
        assert_eq!(p.values[0], 0.0);

        let c = make_catalog_sequence("constant", &[2.5], 100).unwrap();
        let p = prefix_mean(&c, &[1, 10, 100]).unwrap();
        assert!(p.values.iter().all(|&v| (v - 2.5).abs() < 1e-14));

        let sqrt = make_catalog_sequence("sqrt", &[], 100).unwrap();
        let p = prefix_mean(&sqrt, &[4]).unwrap();
        assert!((p.values[0] - 1.5365660924854931).abs() < 1e-14);
    }

    #[test]
    fn strong_cesaro_spot_values() {
        let c = make_catalog_sequence("constant", &[3.0], 64).unwrap();
        let p = strong_cesaro_deviation(&c, 3.0, &[8, 64]).unwrap();
        assert_eq!(p.values, vec![0.0, 0.0]);

        let alt = make_catalog_sequence("alternating", &[], 64).unwrap();
        let p = strong_cesaro_deviation(&alt, 0.0, &[8, 64]).unwrap();
        assert_eq!(p.values, vec![1.0, 1.0]);

        let sqrt = make_catalog_sequence("sqrt", &[], 1025).unwrap();
        let d = forward_difference(&sqrt).unwrap();
        let p = strong_cesaro_deviation(&d, 0.0, &[1024]).unwrap();
        // telescoping closed form (sqrt(1025) - 1) / 1024
        assert!((p.values[0] - 0.03028869256559008).abs() < 1e-12);
    }

    #[test]
    fn block_means_telescope_for_sqrt_differences() {
        let sqrt = make_catalog_sequence("sqrt", &[], 1 << 11).unwrap();
        let d = forward_difference(&sqrt).unwrap();
        let theta = LacunarySchedule::geometric(2.0, 10).unwrap();
        let p = ntheta_block_means(&d, 0.0, &theta, 10).unwrap();
        assert!((p.values[9] - 0.01829319898701561).abs() < 1e-12);
        assert_eq!(p.schedule_tag.as_deref(), Some("geometric:2:10"));
    }

    #[test]
    fn block_means_of_unit_differences_are_exactly_one() {
        let sqrt = make_catalog_sequence("sqrt", &[], 1 << 11).unwrap();
        let image = apply_pointwise(&PointFunction::Square, &sqrt);
        let d = forward_difference(&image).unwrap();
        let theta = LacunarySchedule::geometric(2.0, 10).unwrap();
        let p = ntheta_block_means(&d, 0.0, &theta, 10).unwrap();
        for (r, v) in p.values.iter().enumerate() {
            assert!(
                (v - 1.0).abs() <= 1e-12,
                "t_{} = {v} should be 1 to 1e-12",
                r + 1
            );
        }
    }

    #[test]
    fn block_means_constant_center_zero() {
        let c = make_catalog_sequence("constant", &[7.0], 100).unwrap();
        let theta = LacunarySchedule::power(2, 10).unwrap();
        let p = ntheta_block_means(&c, 7.0, &theta, 10).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn block_means_reject_overlong_schedule() {
        let c = make_catalog_sequence("constant", &[7.0], 10).unwrap();
        let theta = LacunarySchedule::geometric(2.0, 10).unwrap();
        assert!(matches!(
            ntheta_block_means(&c, 7.0, &theta, 10),
            Err(Error::IndexRange { .. })
        ));
    }

    #[test]
    fn density_counts_squares_exactly() {
        let sq = make_catalog_sequence("square_indicator", &[], 1000).unwrap();
        let p = statistical_exceed_density(&sq, 0.0, 0.5, &[100, 1000]).unwrap();
        assert_eq!(p.values[0], 0.10);
        // 31 squares up to 1000 (31^2 = 961)
        assert_eq!(p.values[1], 0.031);

        let c = make_catalog_sequence("constant", &[5.0], 100).unwrap();
        let p = statistical_exceed_density(&c, 5.0, 0.25, &[100]).unwrap();
        assert_eq!(p.values[0], 0.0);

        let alt = make_catalog_sequence("alternating", &[], 1000).unwrap();
        let p = statistical_exceed_density(&alt, 0.0, 0.5, &[1000]).unwrap();
        assert_eq!(p.values[0], 1.0);

        assert!(matches!(
            statistical_exceed_density(&alt, 0.0, 0.0, &[10]),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn window_means_spot_values() {
        let c = make_catalog_sequence("constant", &[2.0], 200).unwrap();
        let p = almost_window_spread(&c, 100, 50).unwrap();
        assert!(p.values.iter().all(|&v| (v - 2.0).abs() < 1e-13));
        assert!(p.spread.unwrap() < 1e-13);

        let alt = make_catalog_sequence("alternating", &[], 200).unwrap();
        let p = almost_window_spread(&alt, 100, 50).unwrap();
        assert!(p.values.iter().all(|&v| v.abs() <= 0.01));

        let nat = RealSequence::from_fn("nat", 20, 1.0, |k| k as f64);
        let p = almost_window_spread(&nat, 10, 5).unwrap();
        assert!((p.values[5] - 10.5).abs() < 1e-13);

        assert!(matches!(
            almost_window_spread(&nat, 10, 10),
            Err(Error::IndexRange { .. })
        ));
    }

    #[test]
    fn window_means_match_telescoped_form_on_differences() {
        // printed almost-quasi-Cauchy form: the inner sum telescopes to
        // (a_{1+j} - a_{n+j+1}) / n
        let sqrt = make_catalog_sequence("sqrt", &[], 4096).unwrap();
        let d = forward_difference(&sqrt).unwrap();
        let neg = apply_pointwise(&PointFunction::Affine { a: -1.0, b: 0.0 }, &d);
        let n = 512u64;
        let p = almost_window_spread(&neg, n, 32).unwrap();
        for (j, &v) in p.values.iter().enumerate() {
            let j = j as u64;
            let expect =
                (sqrt.value(1 + j).unwrap() - sqrt.value(n + j + 1).unwrap()) / n as f64;
            assert!((v - expect).abs() < 1e-12, "shift {j}: {v} vs {expect}");
        }
    }

    #[test]
    fn abel_value_geometric_closed_form() {
        // alternating maps to series terms (-1)^{j+1} from j = 0, so the
        // closed form is -(1-x)/(1+x)
        let alt = make_catalog_sequence("alternating", &[], 1 << 20).unwrap();
        let v = abel_value(&alt, 0.5, 1e-9).unwrap();
        assert!((v - (-1.0 / 3.0)).abs() < 1e-8);
        let v = abel_value(&alt, 0.99, 1e-9).unwrap();
        assert!((v - (-0.005025125628140703)).abs() < 1e-8);
    }

    #[test]
    fn abel_value_constant_recovers_constant() {
        let c = make_catalog_sequence("constant", &[4.0], 1 << 16).unwrap();
        for x in [0.0, 0.5, 0.9, 0.999] {
            let v = abel_value(&c, x, 1e-9).unwrap();
            assert!((v - 4.0).abs() <= 1e-9, "x={x}: {v}");
        }
    }

    #[test]
    fn abel_value_rejects_bad_x_and_reports_truncation() {
        let c = make_catalog_sequence("constant", &[1.0], 64).unwrap();
        assert!(matches!(
            abel_value(&c, 1.0, 1e-9),
            Err(Error::Parameter { .. })
        ));
        assert!(matches!(
            abel_value(&c, -0.1, 1e-9),
            Err(Error::Parameter { .. })
        ));
        match abel_value(&c, 0.9999, 1e-12) {
            Err(Error::Truncation { achieved, .. }) => assert!(achieved > 1e-12),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn sup_window_tracks_partition_maxima() {
        let alt = make_catalog_sequence("alternating", &[], 100).unwrap();
        let p = sup_window_profile(&alt, 0.0, &[10, 100]).unwrap();
        assert_eq!(p.values, vec![1.0, 1.0]);

        let sqrt = make_catalog_sequence("sqrt", &[], 100).unwrap();
        let d = forward_difference(&sqrt).unwrap();
        let p = sup_window_profile(&d, 0.0, &[10, 99]).unwrap();
        // differences decrease, so each block max sits at its left edge
        assert_eq!(p.values[0], d.value(1).unwrap());
        assert_eq!(p.values[1], d.value(11).unwrap());
    }

    #[test]
    fn cauchy_window_flags_divergence_scale() {
        let log10 = make_catalog_sequence("log10", &[], 4096).unwrap();
        let p = cauchy_window_profile(&log10, &[64, 512, 2048], 1.0).unwrap();
        // |log10(2n) - log10(n)| = log10(2) at the window edge
        for v in &p.values {
            assert!((v - 2f64.log10()).abs() < 1e-12);
        }
        // last checkpoint at n_max leaves no window and is dropped
        let p = cauchy_window_profile(&log10, &[64, 4096], 1.0).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn checkpoint_validation() {
        let c = make_catalog_sequence("constant", &[1.0], 10).unwrap();
        assert!(matches!(
            prefix_mean(&c, &[]),
            Err(Error::Parameter { .. })
        ));
        assert!(matches!(
            prefix_mean(&c, &[5, 5]),
            Err(Error::Parameter { .. })
        ));
        assert!(matches!(
            prefix_mean(&c, &[5, 11]),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn profile_csv_shape() {
        let c = make_catalog_sequence("constant", &[1.5], 10).unwrap();
        let p = prefix_mean(&c, &[2, 4]).unwrap();
        assert_eq!(p.to_csv(), "index,value\n2,1.5\n4,1.5\n");
    }
}
