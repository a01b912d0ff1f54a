//! Tri-state verdicts over mean profiles, class membership checks, the
//! slow-oscillation criterion, and the inclusion/continuity reports.
//!
//! Finite data can refute a limit but never prove one, so `NullConfirmed` is
//! an explicit policy statement: the profile tail is small *and* still
//! decaying under the configured thresholds. `BoundedAway` takes precedence,
//! and anything else is `Inconclusive`. Every verdict carries the profile it
//! judged and the thresholds travel with the report, so a verdict is always
//! reproducible from its config snapshot.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::means::{
    abel_deviation_profile, almost_window_spread, cauchy_window_profile, ntheta_block_means,
    prefix_mean, statistical_exceed_density, strong_cesaro_deviation, sup_window_profile,
    MeanProfile, ProfileKind,
};
use crate::sequences::{LacunarySchedule, RealSequence, ScheduleDiagnostics, ScheduleStats};
use crate::transforms::{
    apply_pointwise, forward_difference, second_difference, FunctionFamily, PointFunction,
};

/// Thresholds and probe sizes for every verdict-producing operation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceConfig {
    /// A profile tail wholly below this can be called null.
    pub eps_null: f64,
    /// A profile tail wholly above this is bounded away from zero.
    pub delta_away: f64,
    /// Number of trailing profile points the verdict looks at.
    pub tail_window: usize,
    /// Required ratio of first to last tail point for a null call.
    pub decay_factor: f64,
    /// Analysis scale: checkpoints and schedules are fitted below this.
    pub n_max: u64,
    /// Default block count when a schedule spec omits one.
    pub r_max: u32,
    /// Slow-oscillation ratios, each > 1.
    pub lambda_grid: Vec<f64>,
    /// Exceedance thresholds for the statistical classes.
    pub eps_grid: Vec<f64>,
    /// Prefix checkpoints for mean profiles.
    pub checkpoints: Vec<u64>,
    /// `liminf q > 1` is read as `tail inf q >= 1 + margin`.
    pub liminf_margin: f64,
    /// Ratio-tail window for schedule statistics.
    pub stats_window: usize,
    /// Last-quarter mean block length must exceed the first-quarter mean by
    /// this factor for the growth diagnostic to pass.
    pub h_growth_factor: f64,
    /// Use |differences| inside the shifted-window means instead of the
    /// signed (telescoping) form.
    pub almost_abs: bool,
    /// Largest shift probed by the shifted-window functional.
    pub almost_shift_max: u32,
    /// Abel grid is `x = 1 - 2^-m` for these exponents.
    pub abel_grid_exponents: Vec<u32>,
    pub abel_tail_tolerance: f64,
    /// Cauchy-surrogate window is `(n, n + ceil(factor * n)]`.
    pub cauchy_span_factor: f64,
    /// Member indices for the uniform-limit probe.
    pub uniform_indices: Vec<u32>,
    /// Cap on base points scanned by the sampling probes.
    pub probe_budget: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eps_null: 1e-2,
            delta_away: 1e-1,
            tail_window: 4,
            decay_factor: 1.5,
            n_max: 1 << 20,
            r_max: 20,
            lambda_grid: vec![1.01, 1.02, 1.05, 1.1],
            eps_grid: vec![0.5, 0.1, 0.05],
            checkpoints: vec![1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18, 1 << 20],
            liminf_margin: 0.1,
            stats_window: 8,
            h_growth_factor: 4.0,
            almost_abs: false,
            almost_shift_max: 32,
            abel_grid_exponents: (4..=12).collect(),
            abel_tail_tolerance: 1e-8,
            cauchy_span_factor: 1.0,
            uniform_indices: (1..=8).collect(),
            probe_budget: 10_000,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_null > 0.0) || !(self.delta_away > 0.0) || self.eps_null >= self.delta_away {
            return Err(Error::parameter(
                "eps_null/delta_away",
                "need 0 < eps_null < delta_away",
            ));
        }
        if self.tail_window < 2 {
            return Err(Error::parameter("tail_window", "must be at least 2"));
        }
        if !(self.decay_factor > 0.0) {
            return Err(Error::parameter("decay_factor", "must be positive"));
        }
        if self.n_max == 0 {
            return Err(Error::parameter("n_max", "must be at least 1"));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|&l| !(l > 1.0)) {
            return Err(Error::parameter("lambda_grid", "all values must exceed 1"));
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::parameter("eps_grid", "all values must be positive"));
        }
        if self.checkpoints.is_empty()
            || self.checkpoints[0] == 0
            || !self.checkpoints.windows(2).all(|w| w[0] < w[1])
        {
            return Err(Error::parameter(
                "checkpoints",
                "must be strictly increasing and start at 1 or later",
            ));
        }
        if self.abel_grid_exponents.is_empty() {
            return Err(Error::parameter("abel_grid_exponents", "must not be empty"));
        }
        if self.uniform_indices.is_empty() || self.uniform_indices.contains(&0) {
            return Err(Error::parameter("uniform_indices", "must be positive"));
        }
        if self.probe_budget == 0 {
            return Err(Error::parameter("probe_budget", "must be positive"));
        }
        Ok(())
    }

    /// The Abel abscissas `1 - 2^-m`.
    pub fn abel_grid(&self) -> Vec<f64> {
        self.abel_grid_exponents
            .iter()
            .map(|&m| 1.0 - 0.5f64.powi(m as i32))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictState {
    /// Tail below `eps_null` and still decaying: treated as vanishing.
    NullConfirmed,
    /// Tail wholly above `delta_away`.
    BoundedAway,
    Inconclusive,
}

impl std::fmt::Display for VerdictState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictState::NullConfirmed => "NullConfirmed",
            VerdictState::BoundedAway => "BoundedAway",
            VerdictState::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// What the verdict saw: tail extremes of `|value|`, the first-to-last tail
/// ratio (infinite when the tail ends at exactly zero), an optional witness
/// index pair, and the judged profile itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub tail_max: f64,
    pub tail_min: f64,
    pub decay_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(u64, u64)>,
    pub profile: MeanProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub state: VerdictState,
    pub evidence: Evidence,
}

/// Applies the tail policy to a profile: `BoundedAway` when the whole tail
/// magnitude sits at or above `delta_away`; otherwise `NullConfirmed` when
/// the tail magnitude stays within `eps_null` and has decayed by
/// `decay_factor` across the tail; otherwise `Inconclusive`.
pub fn null_verdict(profile: &MeanProfile, cfg: &ToleranceConfig) -> Result<Verdict> {
    cfg.validate()?;
    if profile.len() < cfg.tail_window {
        return Err(Error::parameter(
            "profile",
            format!(
                "profile has {} points, tail window needs {}",
                profile.len(),
                cfg.tail_window
            ),
        ));
    }
    let tail: Vec<f64> = profile.values[profile.len() - cfg.tail_window..]
        .iter()
        .map(|v| v.abs())
        .collect();
    let tail_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail_min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let last = *tail.last().unwrap();
    let decay_ratio = if last == 0.0 {
        f64::INFINITY
    } else {
        tail[0] / last
    };
    let state = if tail_min >= cfg.delta_away {
        VerdictState::BoundedAway
    } else if tail_max <= cfg.eps_null && decay_ratio >= cfg.decay_factor {
        VerdictState::NullConfirmed
    } else {
        VerdictState::Inconclusive
    };
    Ok(Verdict {
        state,
        evidence: Evidence {
            tail_max,
            tail_min,
            decay_ratio,
            witness: None,
            profile: profile.clone(),
        },
    })
}

/// The sequence classes the classifier knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassTag {
    /// Consecutive differences vanish (pointwise sup surrogate).
    QuasiCauchy,
    /// Second differences vanish.
    DeltaQuasiCauchy,
    /// Differences vanish in exceedance density.
    StatisticalQC,
    /// Differences vanish in Cesàro mean.
    StrongCesaroQC,
    /// Differences vanish in lacunary block mean.
    NthetaQC,
    /// Block means of `|a_k - l|` vanish.
    NthetaConvergent,
    /// Cesàro means of `|a_k - l|` vanish.
    StrongCesaroSummable,
    /// Abel values approach `l` along the grid.
    AbelConvergent,
    /// Shifted-window means of differences vanish uniformly in the shift.
    AlmostQC,
    SlowlyOscillating,
    /// Windowed Cauchy surrogate.
    Cauchy,
}

impl ClassTag {
    pub const ALL: &'static [ClassTag] = &[
        ClassTag::QuasiCauchy,
        ClassTag::DeltaQuasiCauchy,
        ClassTag::StatisticalQC,
        ClassTag::StrongCesaroQC,
        ClassTag::NthetaQC,
        ClassTag::NthetaConvergent,
        ClassTag::StrongCesaroSummable,
        ClassTag::AbelConvergent,
        ClassTag::AlmostQC,
        ClassTag::SlowlyOscillating,
        ClassTag::Cauchy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClassTag::QuasiCauchy => "qc",
            ClassTag::DeltaQuasiCauchy => "delta-qc",
            ClassTag::StatisticalQC => "stat-qc",
            ClassTag::StrongCesaroQC => "cesaro-qc",
            ClassTag::NthetaQC => "ntheta-qc",
            ClassTag::NthetaConvergent => "ntheta-conv",
            ClassTag::StrongCesaroSummable => "cesaro-sum",
            ClassTag::AbelConvergent => "abel",
            ClassTag::AlmostQC => "almost-qc",
            ClassTag::SlowlyOscillating => "slow-osc",
            ClassTag::Cauchy => "cauchy",
        }
    }

    pub fn parse(s: &str) -> Result<ClassTag> {
        ClassTag::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownIdentifier(s.to_string()))
    }

    /// Classes built on a lacunary schedule.
    pub fn needs_schedule(&self) -> bool {
        matches!(self, ClassTag::NthetaQC | ClassTag::NthetaConvergent)
    }

    /// Convergence-type classes that compare against a candidate limit.
    pub fn needs_center(&self) -> bool {
        matches!(
            self,
            ClassTag::NthetaConvergent | ClassTag::StrongCesaroSummable | ClassTag::AbelConvergent
        )
    }
}

impl std::fmt::Display for ClassTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn fit_checkpoints(cfg: &ToleranceConfig, len: u64) -> Result<Vec<u64>> {
    let cps: Vec<u64> = cfg
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c <= len)
        .collect();
    if cps.len() < cfg.tail_window {
        return Err(Error::parameter(
            "checkpoints",
            format!(
                "only {} checkpoints fit a sequence of length {len}, tail window needs {}",
                cps.len(),
                cfg.tail_window
            ),
        ));
    }
    Ok(cps)
}

/// Candidate limit when the caller does not pin one: the final prefix mean.
pub fn estimate_limit(a: &RealSequence, cfg: &ToleranceConfig) -> Result<f64> {
    let cap = a.n_max().min(*cfg.checkpoints.last().unwrap()).max(1);
    Ok(prefix_mean(a, &[cap])?.values[0])
}

/// Classifies `a` against one of the sequence classes by building the
/// matching mean profile and judging it with [`null_verdict`]. Lacunary
/// classes need `theta`; convergence-type classes use `center` or fall back
/// to the final prefix mean.
pub fn classify_membership(
    a: &RealSequence,
    class: ClassTag,
    theta: Option<&LacunarySchedule>,
    center: Option<f64>,
    cfg: &ToleranceConfig,
) -> Result<Verdict> {
    cfg.validate()?;
    if class.needs_schedule() && theta.is_none() {
        return Err(Error::parameter(
            "theta",
            format!("class `{class}` needs a lacunary schedule"),
        ));
    }
    match class {
        ClassTag::QuasiCauchy => {
            let d = forward_difference(a)?;
            let cps = fit_checkpoints(cfg, d.n_max())?;
            null_verdict(&sup_window_profile(&d, 0.0, &cps)?, cfg)
        }
        ClassTag::DeltaQuasiCauchy => {
            let d2 = second_difference(a)?;
            let cps = fit_checkpoints(cfg, d2.n_max())?;
            null_verdict(&sup_window_profile(&d2, 0.0, &cps)?, cfg)
        }
        ClassTag::StatisticalQC => {
            let d = forward_difference(a)?;
            let cps = fit_checkpoints(cfg, d.n_max())?;
            let mut eps_sorted = cfg.eps_grid.clone();
            eps_sorted.sort_by(f64::total_cmp);
            let mut verdicts = Vec::new();
            for &eps in &eps_sorted {
                let p = statistical_exceed_density(&d, 0.0, eps, &cps)?;
                verdicts.push(null_verdict(&p, cfg)?);
            }
            // membership demands vanishing density at every threshold
            if let Some(v) = verdicts
                .iter()
                .find(|v| v.state == VerdictState::BoundedAway)
            {
                return Ok(v.clone());
            }
            let binding = verdicts.remove(0);
            if binding.state == VerdictState::NullConfirmed
                && verdicts.iter().all(|v| v.state == VerdictState::NullConfirmed)
            {
                return Ok(binding);
            }
            Ok(Verdict {
                state: VerdictState::Inconclusive,
                evidence: binding.evidence,
            })
        }
        ClassTag::StrongCesaroQC => {
            let d = forward_difference(a)?;
            let cps = fit_checkpoints(cfg, d.n_max())?;
            null_verdict(&strong_cesaro_deviation(&d, 0.0, &cps)?, cfg)
        }
        ClassTag::NthetaQC => {
            let d = forward_difference(a)?;
            let theta = theta.unwrap();
            let r = fit_blocks_for(theta, d.n_max(), cfg)?;
            null_verdict(&ntheta_block_means(&d, 0.0, theta, r)?, cfg)
        }
        ClassTag::NthetaConvergent => {
            let theta = theta.unwrap();
            let l = match center {
                Some(l) => l,
                None => estimate_limit(a, cfg)?,
            };
            let r = fit_blocks_for(theta, a.n_max(), cfg)?;
            null_verdict(&ntheta_block_means(a, l, theta, r)?, cfg)
        }
        ClassTag::StrongCesaroSummable => {
            let l = match center {
                Some(l) => l,
                None => estimate_limit(a, cfg)?,
            };
            let cps = fit_checkpoints(cfg, a.n_max())?;
            null_verdict(&strong_cesaro_deviation(a, l, &cps)?, cfg)
        }
        ClassTag::AbelConvergent => {
            let l = match center {
                Some(l) => l,
                None => estimate_limit(a, cfg)?,
            };
            let grid = cfg.abel_grid();
            if grid.len() < cfg.tail_window {
                return Err(Error::parameter(
                    "abel_grid_exponents",
                    format!("grid of {} points is shorter than the tail window", grid.len()),
                ));
            }
            null_verdict(
                &abel_deviation_profile(a, l, &grid, cfg.abel_tail_tolerance)?,
                cfg,
            )
        }
        ClassTag::AlmostQC => {
            let d = forward_difference(a)?;
            let probe = if cfg.almost_abs {
                apply_pointwise(&PointFunction::Abs, &d)
            } else {
                // the definition sums a_{k+j} - a_{k+j+1}, the negated difference
                apply_pointwise(&PointFunction::Affine { a: -1.0, b: 0.0 }, &d)
            };
            let j_max = cfg.almost_shift_max;
            let limit = probe.n_max().saturating_sub(j_max as u64 + 1);
            let cps = fit_checkpoints(cfg, limit)?;
            let mut values = Vec::with_capacity(cps.len());
            for &n in &cps {
                let w = almost_window_spread(&probe, n, j_max)?;
                values.push(w.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            }
            let profile = MeanProfile {
                kind: ProfileKind::AlmostSpread,
                index: cps.iter().map(|&c| c as f64).collect(),
                values,
                center: 0.0,
                schedule_tag: None,
                spread: None,
            };
            null_verdict(&profile, cfg)
        }
        ClassTag::SlowlyOscillating => slow_oscillation_profile(a, cfg),
        ClassTag::Cauchy => {
            let cps = fit_checkpoints(cfg, a.n_max())?;
            let p = cauchy_window_profile(a, &cps, cfg.cauchy_span_factor)?;
            if p.len() < cfg.tail_window {
                return Err(Error::parameter(
                    "checkpoints",
                    "too few windowed checkpoints for the tail policy",
                ));
            }
            null_verdict(&p, cfg)
        }
    }
}

fn fit_blocks_for(theta: &LacunarySchedule, len: u64, cfg: &ToleranceConfig) -> Result<u32> {
    let r = theta.fit_blocks(len).ok_or_else(|| {
        Error::parameter(
            "theta",
            format!("first block already exceeds the sequence length {len}"),
        )
    })?;
    if (r as usize) < cfg.tail_window {
        return Err(Error::parameter(
            "theta",
            format!("only {r} blocks fit, tail window needs {}", cfg.tail_window),
        ));
    }
    Ok(r)
}

/// Slow-oscillation criterion. For each ratio `lambda` of the grid this
/// computes `M(lambda) = max_n max_{n < k <= floor(lambda n)} |a_k - a_n|`
/// over a strided base range in the tail of the sequence (the inner max is
/// exact). The verdict judges `M` at the smallest ratio; a `BoundedAway`
/// verdict carries the witness pair that realizes it.
pub fn slow_oscillation_profile(a: &RealSequence, cfg: &ToleranceConfig) -> Result<Verdict> {
    cfg.validate()?;
    let mut lambdas = cfg.lambda_grid.clone();
    lambdas.sort_by(f64::total_cmp);
    let l_min = lambdas[0];
    let l_max = *lambdas.last().unwrap();

    let base_hi = (a.n_max() as f64 / l_max).floor() as u64;
    let base_lo = (a.n_max() / 4).max(1);
    let need = (1.0 / (l_min - 1.0)).ceil() as u64 + 1;
    if base_lo < need || base_lo >= base_hi {
        return Err(Error::parameter(
            "n_max",
            format!(
                "sequence length {} is too small for the lambda grid (base range {}..{})",
                a.n_max(),
                base_lo,
                base_hi
            ),
        ));
    }
    let stride = ((base_hi - base_lo) / cfg.probe_budget).max(1);

    let mut m = vec![0.0f64; lambdas.len()];
    let mut witness: Option<(u64, u64)> = None;
    let mut n = base_lo;
    while n <= base_hi {
        let base = a.value(n)?;
        let cuts: Vec<u64> = lambdas
            .iter()
            .map(|&l| ((l * n as f64).floor() as u64).min(a.n_max()))
            .collect();
        let mut ci = 0;
        while ci < cuts.len() && cuts[ci] <= n {
            ci += 1;
        }
        if ci < cuts.len() {
            let mut running = 0.0f64;
            let mut best_k = n;
            for k in (n + 1)..=cuts[cuts.len() - 1] {
                let dv = (a.value(k)? - base).abs();
                if dv > running {
                    running = dv;
                    best_k = k;
                }
                while ci < cuts.len() && k == cuts[ci] {
                    if running > m[ci] {
                        m[ci] = running;
                        if ci == 0 {
                            witness = Some((n, best_k));
                        }
                    }
                    ci += 1;
                }
                if ci >= cuts.len() {
                    break;
                }
            }
        }
        n += stride;
    }

    let m_min = m[0];
    let m_last = *m.last().unwrap();
    let state = if m_min >= cfg.delta_away {
        VerdictState::BoundedAway
    } else if m_min <= cfg.eps_null {
        VerdictState::NullConfirmed
    } else {
        VerdictState::Inconclusive
    };
    let profile = MeanProfile {
        kind: ProfileKind::SlowOscillation,
        index: lambdas,
        values: m,
        center: 0.0,
        schedule_tag: None,
        spread: None,
    };
    Ok(Verdict {
        state,
        evidence: Evidence {
            tail_max: m_min,
            tail_min: m_min,
            decay_ratio: if m_min == 0.0 {
                f64::INFINITY
            } else {
                m_last / m_min
            },
            witness,
            profile,
        },
    })
}

/// One row of the inclusion table: consecutive-difference verdicts under the
/// Cesàro and block-mean functionals, the convergence-type counterparts, and
/// a flag for any combination that contradicts the inclusion direction the
/// schedule's ratio tail implies.
#[derive(Debug, Clone, Serialize)]
pub struct InclusionRow {
    pub sequence: String,
    pub cesaro_qc: Option<Verdict>,
    pub ntheta_qc: Option<Verdict>,
    pub cesaro_sum: Option<Verdict>,
    pub ntheta_conv: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InclusionReport {
    pub diagnostics: ScheduleDiagnostics,
    pub stats: ScheduleStats,
    pub rows: Vec<InclusionRow>,
}

/// Classifies every sequence of `families` against the Cesàro and block-mean
/// classes (difference and convergence forms) over `theta`, and marks rows
/// that violate the inclusion direction implied by the schedule's ratio
/// tail: with the ratio tail above 1 the Cesàro difference class must sit
/// inside the block-mean class, and with a bounded ratio tail the reverse
/// inclusion must hold. Per-row failures are recorded without aborting the
/// table.
pub fn inclusion_report(
    families: &[RealSequence],
    theta: &LacunarySchedule,
    cfg: &ToleranceConfig,
) -> Result<InclusionReport> {
    cfg.validate()?;
    if families.is_empty() {
        return Err(Error::parameter("families", "must not be empty"));
    }
    let diagnostics = theta.validate(cfg.stats_window, cfg.h_growth_factor, cfg.liminf_margin);
    let stats = theta.stats(cfg.stats_window.min(theta.r_max() as usize - 1).max(1))?;

    let mut rows = Vec::with_capacity(families.len());
    for seq in families {
        let mut errors: Vec<String> = Vec::new();
        let mut run = |class: ClassTag| -> Option<Verdict> {
            match classify_membership(seq, class, Some(theta), None, cfg) {
                Ok(v) => Some(v),
                Err(e) => {
                    errors.push(format!("{class}: {e}"));
                    None
                }
            }
        };
        let cesaro_qc = run(ClassTag::StrongCesaroQC);
        let ntheta_qc = run(ClassTag::NthetaQC);
        let cesaro_sum = run(ClassTag::StrongCesaroSummable);
        let ntheta_conv = run(ClassTag::NthetaConvergent);

        let mut violations: Vec<&str> = Vec::new();
        let state = |v: &Option<Verdict>| v.as_ref().map(|v| v.state);
        if diagnostics.liminf_exceeds_one
            && state(&cesaro_qc) == Some(VerdictState::NullConfirmed)
            && state(&ntheta_qc) == Some(VerdictState::BoundedAway)
        {
            violations.push("cesaro-qc-null-but-ntheta-qc-away");
        }
        if diagnostics.limsup_bounded
            && state(&ntheta_qc) == Some(VerdictState::NullConfirmed)
            && state(&cesaro_qc) == Some(VerdictState::BoundedAway)
        {
            violations.push("ntheta-qc-null-but-cesaro-qc-away");
        }
        if diagnostics.liminf_exceeds_one
            && diagnostics.limsup_bounded
            && state(&cesaro_sum) == Some(VerdictState::NullConfirmed)
            && state(&ntheta_conv) == Some(VerdictState::BoundedAway)
        {
            violations.push("cesaro-sum-null-but-ntheta-conv-away");
        }
        if diagnostics.liminf_exceeds_one
            && diagnostics.limsup_bounded
            && state(&ntheta_conv) == Some(VerdictState::NullConfirmed)
            && state(&cesaro_sum) == Some(VerdictState::BoundedAway)
        {
            violations.push("ntheta-conv-null-but-cesaro-sum-away");
        }

        rows.push(InclusionRow {
            sequence: seq.label().to_string(),
            cesaro_qc,
            ntheta_qc,
            cesaro_sum,
            ntheta_conv,
            violation: if violations.is_empty() {
                None
            } else {
                Some(violations.join(";"))
            },
            error: if errors.is_empty() {
                None
            } else {
                Some(errors.join("; "))
            },
        });
    }
    Ok(InclusionReport {
        diagnostics,
        stats,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WardRow {
    pub sequence: String,
    pub input: Option<Verdict>,
    pub image: Option<Verdict>,
    /// Input judged null but the image bounded away: the function failed to
    /// preserve the class.
    pub violation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WardReport {
    pub function: String,
    pub rows: Vec<WardRow>,
    pub violations: usize,
}

/// Checks whether `f` preserves the block-mean difference class: classifies
/// each input sequence and its image under `f` and records a violation when
/// a null input maps to a bounded-away image.
pub fn ward_continuity_probe(
    f: &PointFunction,
    families: &[RealSequence],
    theta: &LacunarySchedule,
    cfg: &ToleranceConfig,
) -> Result<WardReport> {
    cfg.validate()?;
    if families.is_empty() {
        return Err(Error::parameter("families", "must not be empty"));
    }
    let mut rows = Vec::with_capacity(families.len());
    let mut violations = 0usize;
    for seq in families {
        let mut error = None;
        let input = match classify_membership(seq, ClassTag::NthetaQC, Some(theta), None, cfg) {
            Ok(v) => Some(v),
            Err(e) => {
                error = Some(format!("input: {e}"));
                None
            }
        };
        let image_seq = apply_pointwise(f, seq);
        let image =
            match classify_membership(&image_seq, ClassTag::NthetaQC, Some(theta), None, cfg) {
                Ok(v) => Some(v),
                Err(e) => {
                    error.get_or_insert_with(String::new);
                    if let Some(msg) = error.as_mut() {
                        if !msg.is_empty() {
                            msg.push_str("; ");
                        }
                        msg.push_str(&format!("image: {e}"));
                    }
                    None
                }
            };
        let violation = matches!(
            (
                input.as_ref().map(|v| v.state),
                image.as_ref().map(|v| v.state)
            ),
            (
                Some(VerdictState::NullConfirmed),
                Some(VerdictState::BoundedAway)
            )
        );
        if violation {
            violations += 1;
        }
        rows.push(WardRow {
            sequence: seq.label().to_string(),
            input,
            image,
            violation,
            error,
        });
    }
    Ok(WardReport {
        function: f.label(),
        rows,
        violations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformMemberRow {
    /// `n=<index>` for family members, `limit` for the limit function.
    pub member: String,
    pub gap: f64,
    pub image: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformReport {
    pub family: String,
    pub rows: Vec<UniformMemberRow>,
    /// Every member preserved the null verdict but the limit did not — at
    /// finite scale that contradicts uniform-limit preservation.
    pub flagged: bool,
}

/// Probes uniform-limit preservation: reports the uniform gap
/// `sup |f_n - f|` over the sampled range of `a` and the block-mean
/// difference verdict of the image under each member and under the limit.
pub fn uniform_limit_probe(
    family: &FunctionFamily,
    limit: &PointFunction,
    a: &RealSequence,
    theta: &LacunarySchedule,
    cfg: &ToleranceConfig,
) -> Result<UniformReport> {
    cfg.validate()?;
    let stride = (a.n_max() / cfg.probe_budget).max(1);

    let mut rows = Vec::new();
    let mut all_members_null = true;
    for &n in &cfg.uniform_indices {
        let mut gap = 0.0f64;
        let mut k = 1u64;
        while k <= a.n_max() {
            let x = a.value(k)?;
            gap = gap.max((family.member_value(n, x) - limit.apply(x)).abs());
            k += stride;
        }
        let image_seq = family.member_sequence(n, a);
        let (image, error) =
            match classify_membership(&image_seq, ClassTag::NthetaQC, Some(theta), None, cfg) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
        if image.as_ref().map(|v| v.state) != Some(VerdictState::NullConfirmed) {
            all_members_null = false;
        }
        rows.push(UniformMemberRow {
            member: format!("n={n}"),
            gap,
            image,
            error,
        });
    }

    let limit_seq = apply_pointwise(limit, a);
    let (limit_verdict, limit_error) =
        match classify_membership(&limit_seq, ClassTag::NthetaQC, Some(theta), None, cfg) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let flagged = all_members_null
        && limit_verdict.as_ref().map(|v| v.state) == Some(VerdictState::BoundedAway);
    rows.push(UniformMemberRow {
        member: "limit".to_string(),
        gap: 0.0,
        image: limit_verdict,
        error: limit_error,
    });

    Ok(UniformReport {
        family: family.label(),
        rows,
        flagged,
    })
}
