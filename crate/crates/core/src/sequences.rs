//! Deterministic real sequences and lacunary block schedules.
//!
//! A [`RealSequence`] is a pure evaluator from a 1-based index to an `f64`:
//! evaluating the same index twice yields bit-identical values, which is what
//! lets downstream identity checks run at 1e-12 tolerances. Sequences carry a
//! declared polynomial growth exponent `g` (with `|a_k| <= C * k^g`) used by
//! the Abel evaluator to pick its truncation point.
//!
//! A [`LacunarySchedule`] is a strictly increasing list of integer
//! breakpoints `k[0]=0 < k[1] < ...`; block `r` is the index interval
//! `(k[r-1], k[r]]` of length `h_r`, and `q_r = k_r / k_{r-1}` (defined for
//! `r >= 2` only, since `k[0] = 0`).

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use serde::Serialize;

type EvalFn = dyn Fn(u64) -> f64 + Send + Sync;

/// A deterministic real sequence defined on indices `1..=n_max`.
#[derive(Clone)]
pub struct RealSequence {
    label: String,
    n_max: u64,
    growth_bound: f64,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for RealSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealSequence")
            .field("label", &self.label)
            .field("n_max", &self.n_max)
            .field("growth_bound", &self.growth_bound)
            .finish()
    }
}

impl RealSequence {
    /// Wraps a pure evaluator. The closure must be deterministic; everything
    /// downstream (verdict reproducibility, byte-identical reports) relies on
    /// that.
    pub fn from_fn<F>(label: impl Into<String>, n_max: u64, growth_bound: f64, eval: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        RealSequence {
            label: label.into(),
            n_max,
            growth_bound,
            eval: Arc::new(eval),
        }
    }

    /// Backs a sequence with an explicit value buffer (index `k` reads
    /// `values[k-1]`).
    pub fn from_values(label: impl Into<String>, values: Vec<f64>, growth_bound: f64) -> Self {
        let n_max = values.len() as u64;
        let buf: Arc<[f64]> = values.into();
        RealSequence {
            label: label.into(),
            n_max,
            growth_bound,
            eval: Arc::new(move |k| buf[(k - 1) as usize]),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Declared exponent `g` of the growth envelope `|a_k| <= C * k^g`.
    pub fn growth_bound(&self) -> f64 {
        self.growth_bound
    }

    /// Evaluates index `k`, checking the range and that the value is finite.
    pub fn value(&self, k: u64) -> Result<f64> {
        if k == 0 || k > self.n_max {
            return Err(Error::IndexRange {
                label: self.label.clone(),
                index: k,
                len: self.n_max,
            });
        }
        let v = (self.eval)(k);
        if !v.is_finite() {
            return Err(Error::Domain {
                label: self.label.clone(),
                index: k,
                value: v,
            });
        }
        Ok(v)
    }

    /// Unchecked evaluation for internal loops that have already validated
    /// their index range. May return non-finite values.
    pub(crate) fn raw(&self, k: u64) -> f64 {
        (self.eval)(k)
    }
}

const CATALOG_NAMES: &[&str] = &[
    "sqrt",
    "log10",
    "ln",
    "ln_ln",
    "harmonic",
    "double_harmonic",
    "cos_6log",
    "cos_pi_sqrt",
    "alternating",
    "square_indicator",
    "constant",
    "affine",
];

/// Names accepted by [`make_catalog_sequence`].
pub fn catalog_names() -> &'static [&'static str] {
    CATALOG_NAMES
}

/// Builds a member of the sequence catalog.
///
/// Closed forms, 1-based:
/// - `sqrt`: sqrt(k)
/// - `log10`: log10(k)
/// - `ln`: ln(k)
/// - `ln_ln`: ln(ln(k+1)) — shifted by one so index 1 is defined
/// - `harmonic`: H_k = sum_{i<=k} 1/i
/// - `double_harmonic`: sum_{i<=k} H_i / i
/// - `cos_6log`: cos(6 ln(k+1))
/// - `cos_pi_sqrt`: cos(pi sqrt(k))
/// - `alternating`: (-1)^k
/// - `square_indicator`: 1 at perfect squares, 0 elsewhere
/// - `constant` (params: `c`), `affine` (params: `a`, `b` giving `a*k + b`)
///
/// The cumulative families (`harmonic`, `double_harmonic`) are materialized
/// once at construction with compensated summation, so re-evaluation stays
/// bit-identical. Note that consecutive-difference behavior differs across
/// the catalog on purpose: `sqrt` has vanishing differences but no limit,
/// `cos_pi_sqrt` has vanishing differences yet oscillates too fast to be
/// slowly oscillating, and `log10` is slowly oscillating but unbounded.
pub fn make_catalog_sequence(name: &str, params: &[f64], n_max: u64) -> Result<RealSequence> {
    if n_max == 0 {
        return Err(Error::parameter("n_max", "must be at least 1"));
    }
    let expect_params = |n: usize| -> Result<()> {
        if params.len() != n {
            return Err(Error::parameter(
                "params",
                format!("`{name}` takes {n} parameter(s), got {}", params.len()),
            ));
        }
        Ok(())
    };
    for &p in params {
        if !p.is_finite() {
            return Err(Error::parameter("params", format!("non-finite value {p}")));
        }
    }

    let seq = match name {
        "sqrt" => {
            expect_params(0)?;
            RealSequence::from_fn("sqrt", n_max, 0.5, |k| (k as f64).sqrt())
        }
        "log10" => {
            expect_params(0)?;
            RealSequence::from_fn("log10", n_max, 0.5, |k| (k as f64).log10())
        }
        "ln" => {
            expect_params(0)?;
            RealSequence::from_fn("ln", n_max, 0.5, |k| (k as f64).ln())
        }
        "ln_ln" => {
            expect_params(0)?;
            RealSequence::from_fn("ln_ln", n_max, 0.5, |k| ((k + 1) as f64).ln().ln())
        }
        "harmonic" => {
            expect_params(0)?;
            let values = cumulative(n_max, |k| 1.0 / k as f64);
            RealSequence::from_values("harmonic", values, 0.5)
        }
        "double_harmonic" => {
            expect_params(0)?;
            let mut inner = KahanSum::new();
            let mut outer = KahanSum::new();
            let mut values = Vec::with_capacity(n_max as usize);
            for k in 1..=n_max {
                inner.add(1.0 / k as f64);
                outer.add(inner.value() / k as f64);
                values.push(outer.value());
            }
            RealSequence::from_values("double_harmonic", values, 0.5)
        }
        "cos_6log" => {
            expect_params(0)?;
            RealSequence::from_fn("cos_6log", n_max, 0.0, |k| {
                (6.0 * ((k + 1) as f64).ln()).cos()
            })
        }
        "cos_pi_sqrt" => {
            expect_params(0)?;
            RealSequence::from_fn("cos_pi_sqrt", n_max, 0.0, |k| {
                (std::f64::consts::PI * (k as f64).sqrt()).cos()
            })
        }
        "alternating" => {
            expect_params(0)?;
            RealSequence::from_fn("alternating", n_max, 0.0, |k| {
                if k % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
        }
        "square_indicator" => {
            expect_params(0)?;
            RealSequence::from_fn("square_indicator", n_max, 0.0, |k| {
                let r = k.isqrt();
                if r * r == k {
                    1.0
                } else {
                    0.0
                }
            })
        }
        "constant" => {
            expect_params(1)?;
            let c = params[0];
            RealSequence::from_fn(format!("constant:{c}"), n_max, 0.0, move |_| c)
        }
        "affine" => {
            expect_params(2)?;
            let (a, b) = (params[0], params[1]);
            RealSequence::from_fn(format!("affine:{a}:{b}"), n_max, 1.0, move |k| {
                a * k as f64 + b
            })
        }
        _ => return Err(Error::UnknownIdentifier(name.to_string())),
    };
    Ok(seq)
}

fn cumulative(n_max: u64, term: impl Fn(u64) -> f64) -> Vec<f64> {
    let mut acc = KahanSum::new();
    let mut values = Vec::with_capacity(n_max as usize);
    for k in 1..=n_max {
        acc.add(term(k));
        values.push(acc.value());
    }
    values
}

/// A sequence loaded from disk together with any loader warnings.
#[derive(Debug, Clone)]
pub struct LoadedSequence {
    pub sequence: RealSequence,
    pub warnings: Vec<String>,
}

/// Reads the plain-text sequence format: one decimal value per line, with an
/// optional first line `# n_max=<int> growth=<float>`. A missing `growth`
/// entry defaults to 1.0 and produces a warning, since the Abel evaluator
/// then has to assume linear growth.
pub fn read_sequence_file(path: &Path) -> Result<LoadedSequence> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut warnings = Vec::new();
    let mut declared_n_max: Option<u64> = None;
    let mut growth: Option<f64> = None;
    let mut values: Vec<f64> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if line_no == 1 {
                for token in rest.split_whitespace() {
                    let bad = || Error::FileFormat {
                        path: path.to_path_buf(),
                        line: line_no,
                        reason: format!("malformed header token `{token}`"),
                    };
                    let (key, value) = token.split_once('=').ok_or_else(bad)?;
                    match key {
                        "n_max" => declared_n_max = Some(value.parse().map_err(|_| bad())?),
                        "growth" => growth = Some(value.parse().map_err(|_| bad())?),
                        _ => return Err(bad()),
                    }
                }
            }
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| Error::FileFormat {
            path: path.to_path_buf(),
            line: line_no,
            reason: format!("expected a decimal value, got `{trimmed}`"),
        })?;
        if !v.is_finite() {
            return Err(Error::FileFormat {
                path: path.to_path_buf(),
                line: line_no,
                reason: format!("non-finite value {v}"),
            });
        }
        values.push(v);
    }

    if values.is_empty() {
        return Err(Error::FileFormat {
            path: path.to_path_buf(),
            line: 1,
            reason: "file contains no values".to_string(),
        });
    }
    if let Some(n) = declared_n_max {
        if n as usize > values.len() {
            return Err(Error::FileFormat {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("header declares n_max={n} but only {} values", values.len()),
            });
        }
        values.truncate(n as usize);
    }
    let growth = match growth {
        Some(g) => g,
        None => {
            warnings.push(format!(
                "{}: no growth bound declared, assuming g=1",
                path.display()
            ));
            1.0
        }
    };
    let label = format!("file:{}", path.display());
    Ok(LoadedSequence {
        sequence: RealSequence::from_values(label, values, growth),
        warnings,
    })
}

/// Writes a sequence in the file format read by [`read_sequence_file`],
/// header included.
pub fn write_sequence_file(path: &Path, seq: &RealSequence) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    writeln!(w, "# n_max={} growth={}", seq.n_max(), seq.growth_bound()).map_err(io_err)?;
    for k in 1..=seq.n_max() {
        writeln!(w, "{}", seq.value(k)?).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Integer breakpoints `k[0]=0 < k[1] < ... < k[R]` partitioning `1..=k[R]`
/// into blocks `I_r = (k[r-1], k[r]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LacunarySchedule {
    label: String,
    k: Vec<u64>,
}

impl LacunarySchedule {
    /// `k[r] = ceil(rho^r)` for `r >= 1`. Requires `rho >= 2`, which also
    /// guarantees strict monotonicity of the ceilings.
    pub fn geometric(rho: f64, r_max: u32) -> Result<Self> {
        if !rho.is_finite() || rho < 2.0 {
            return Err(Error::parameter("rho", "geometric ratio must be >= 2"));
        }
        check_r_max(r_max)?;
        let label = format!("geometric:{rho}:{r_max}");
        let mut k = vec![0u64];
        if rho.fract() == 0.0 && rho <= u64::MAX as f64 {
            // integer ratio: exact breakpoints, so q_r == rho exactly
            let rho_int = rho as u64;
            let mut cur = 1u64;
            for r in 1..=r_max {
                cur = cur
                    .checked_mul(rho_int)
                    .ok_or(Error::BreakpointOverflow { label: label.clone(), r })?;
                k.push(cur);
            }
        } else {
            for r in 1..=r_max {
                let v = rho.powi(r as i32).ceil();
                if v > u64::MAX as f64 {
                    return Err(Error::BreakpointOverflow { label, r });
                }
                k.push(v as u64);
            }
        }
        Ok(LacunarySchedule { label, k })
    }

    /// `k[r] = r^p` with `p >= 2`.
    pub fn power(p: u32, r_max: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::parameter("p", "power exponent must be >= 2"));
        }
        check_r_max(r_max)?;
        let label = format!("power:{p}:{r_max}");
        let mut k = vec![0u64];
        for r in 1..=r_max {
            let v = (r as u64)
                .checked_pow(p)
                .ok_or(Error::BreakpointOverflow { label: label.clone(), r })?;
            k.push(v);
        }
        Ok(LacunarySchedule { label, k })
    }

    /// `k[r] = r!`. Overflows u64 past `r = 20`.
    pub fn factorial(r_max: u32) -> Result<Self> {
        check_r_max(r_max)?;
        let label = format!("factorial:{r_max}");
        let mut k = vec![0u64];
        let mut cur = 1u64;
        for r in 1..=r_max {
            cur = cur
                .checked_mul(r as u64)
                .ok_or(Error::BreakpointOverflow { label: label.clone(), r })?;
            k.push(cur);
        }
        Ok(LacunarySchedule { label, k })
    }

    /// Takes breakpoints verbatim, including the leading 0.
    pub fn explicit(k: Vec<u64>) -> Result<Self> {
        if k.len() < 3 {
            return Err(Error::Validation(
                "explicit schedule needs k[0]=0 and at least two breakpoints".to_string(),
            ));
        }
        if k[0] != 0 {
            return Err(Error::Validation(format!(
                "explicit schedule must start at 0, got {}",
                k[0]
            )));
        }
        for r in 1..k.len() {
            if k[r] <= k[r - 1] {
                return Err(Error::Validation(format!(
                    "breakpoints must be strictly increasing: k[{}]={} <= k[{}]={}",
                    r,
                    k[r],
                    r - 1,
                    k[r - 1]
                )));
            }
        }
        let body: Vec<String> = k.iter().map(|v| v.to_string()).collect();
        Ok(LacunarySchedule {
            label: format!("explicit:{}", body.join(",")),
            k,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of blocks `R`.
    pub fn r_max(&self) -> u32 {
        (self.k.len() - 1) as u32
    }

    pub fn breakpoints(&self) -> &[u64] {
        &self.k
    }

    /// `k[r]`, `r` in `0..=R`.
    pub fn breakpoint(&self, r: u32) -> u64 {
        self.k[r as usize]
    }

    /// Block length `h_r = k[r] - k[r-1]`, `r` in `1..=R`.
    pub fn block_len(&self, r: u32) -> u64 {
        self.k[r as usize] - self.k[r as usize - 1]
    }

    /// Ratio `q_r = k[r] / k[r-1]`, defined for `r >= 2` only (`k[0] = 0`).
    pub fn ratio(&self, r: u32) -> f64 {
        debug_assert!(r >= 2);
        self.k[r as usize] as f64 / self.k[r as usize - 1] as f64
    }

    /// The index block `I_r = (k[r-1], k[r]]`.
    pub fn block(&self, r: u32) -> std::ops::RangeInclusive<u64> {
        (self.k[r as usize - 1] + 1)..=self.k[r as usize]
    }

    /// Largest `r <= R` with `k[r] <= limit`, or `None` if even the first
    /// block overruns.
    pub fn fit_blocks(&self, limit: u64) -> Option<u32> {
        let mut r = 0u32;
        while (r as usize) < self.k.len() - 1 && self.k[r as usize + 1] <= limit {
            r += 1;
        }
        (r >= 1).then_some(r)
    }

    /// Tail statistics of the ratio sequence over the last `window` ratios.
    pub fn stats(&self, window: usize) -> Result<ScheduleStats> {
        if window < 1 {
            return Err(Error::parameter("window", "must be at least 1"));
        }
        let h: Vec<u64> = (1..=self.r_max()).map(|r| self.block_len(r)).collect();
        let q: Vec<f64> = (2..=self.r_max()).map(|r| self.ratio(r)).collect();
        if window > q.len() {
            return Err(Error::parameter(
                "window",
                format!("window {window} exceeds the {} available ratios", q.len()),
            ));
        }
        let tail = &q[q.len() - window..];
        let tail_inf_q = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let tail_sup_q = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(ScheduleStats {
            h,
            q,
            tail_inf_q,
            tail_sup_q,
            window,
        })
    }

    /// Structural and trend diagnostics. These are finite-scale surrogates:
    /// `h_grows` compares the mean block length of the last quarter against
    /// the first quarter, `liminf_exceeds_one` tests the ratio tail against
    /// `1 + liminf_margin`, and `limsup_bounded` tests whether the ratio tail
    /// sup has stopped growing relative to the window before it.
    pub fn validate(
        &self,
        window: usize,
        h_growth_factor: f64,
        liminf_margin: f64,
    ) -> ScheduleDiagnostics {
        let r = self.r_max() as usize;
        let h: Vec<f64> = (1..=self.r_max())
            .map(|r| self.block_len(r) as f64)
            .collect();
        let quarter = (r / 4).max(1);
        let first_mean = h[..quarter].iter().sum::<f64>() / quarter as f64;
        let last_mean = h[r - quarter..].iter().sum::<f64>() / quarter as f64;
        let h_grows = last_mean >= h_growth_factor * first_mean;

        let q: Vec<f64> = (2..=self.r_max()).map(|r| self.ratio(r)).collect();
        let w = window.min(q.len()).max(1);
        let tail = &q[q.len() - w..];
        let tail_inf_q = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let tail_sup_q = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let liminf_exceeds_one = tail_inf_q >= 1.0 + liminf_margin;
        // sup trend: growing tail sup reads as "unbounded" at finite scale
        let w2 = w.min(q.len() / 2);
        let limsup_bounded = if w2 == 0 {
            true
        } else {
            let prev = &q[q.len() - 2 * w2..q.len() - w2];
            let prev_sup = prev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let last_sup = q[q.len() - w2..]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            last_sup <= prev_sup * 1.05
        };

        ScheduleDiagnostics {
            label: self.label.clone(),
            r_max: self.r_max(),
            starts_at_zero: self.k[0] == 0,
            strictly_increasing: self.k.windows(2).all(|w| w[0] < w[1]),
            h_grows,
            h_first_quarter_mean: first_mean,
            h_last_quarter_mean: last_mean,
            liminf_exceeds_one,
            limsup_bounded,
            tail_inf_q,
            tail_sup_q,
        }
    }
}

fn check_r_max(r_max: u32) -> Result<()> {
    if r_max < 2 {
        return Err(Error::parameter("r_max", "schedule needs at least 2 blocks"));
    }
    Ok(())
}

/// Block lengths, ratios, and ratio-tail extremes of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleStats {
    /// `h_r` for `r = 1..=R`.
    pub h: Vec<u64>,
    /// `q_r` for `r = 2..=R`.
    pub q: Vec<f64>,
    pub tail_inf_q: f64,
    pub tail_sup_q: f64,
    pub window: usize,
}

/// Result of [`LacunarySchedule::validate`]; diagnostics, never errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleDiagnostics {
    pub label: String,
    pub r_max: u32,
    pub starts_at_zero: bool,
    pub strictly_increasing: bool,
    pub h_grows: bool,
    pub h_first_quarter_mean: f64,
    pub h_last_quarter_mean: f64,
    pub liminf_exceeds_one: bool,
    pub limsup_bounded: bool,
    pub tail_inf_q: f64,
    pub tail_sup_q: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_spot_values() {
        let sqrt = make_catalog_sequence("sqrt", &[], 100).unwrap();
        assert_eq!(sqrt.value(4).unwrap(), 2.0);
        let affine = make_catalog_sequence("affine", &[3.0, 5.0], 100).unwrap();
        assert_eq!(affine.value(7).unwrap(), 26.0);
        let alt = make_catalog_sequence("alternating", &[], 100).unwrap();
        assert_eq!(alt.value(3).unwrap(), -1.0);
        assert_eq!(alt.value(4).unwrap(), 1.0);
        let sq = make_catalog_sequence("square_indicator", &[], 100).unwrap();
        assert_eq!(sq.value(16).unwrap(), 1.0);
        assert_eq!(sq.value(17).unwrap(), 0.0);
    }

    #[test]
    fn catalog_rejects_unknown_and_bad_params() {
        assert!(matches!(
            make_catalog_sequence("nosuch", &[], 10),
            Err(Error::UnknownIdentifier(_))
        ));
        assert!(matches!(
            make_catalog_sequence("affine", &[1.0], 10),
            Err(Error::Parameter { .. })
        ));
        assert!(matches!(
            make_catalog_sequence("sqrt", &[1.0], 10),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn harmonic_matches_naive_partial_sums() {
        let h = make_catalog_sequence("harmonic", &[], 50).unwrap();
        let mut naive = 0.0;
        for k in 1..=50u64 {
            naive += 1.0 / k as f64;
            assert!((h.value(k).unwrap() - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn double_harmonic_matches_definition() {
        let dh = make_catalog_sequence("double_harmonic", &[], 20).unwrap();
        let mut expect = 0.0;
        for k in 1..=20u64 {
            let hk: f64 = (1..=k).map(|i| 1.0 / i as f64).sum();
            expect += hk / k as f64;
            assert!((dh.value(k).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn ln_ln_defined_from_index_one() {
        let s = make_catalog_sequence("ln_ln", &[], 10).unwrap();
        let v = s.value(1).unwrap();
        assert!((v - 2.0f64.ln().ln()).abs() < 1e-15);
    }

    #[test]
    fn index_range_is_enforced() {
        let s = make_catalog_sequence("sqrt", &[], 10).unwrap();
        assert!(matches!(s.value(0), Err(Error::IndexRange { .. })));
        assert!(matches!(s.value(11), Err(Error::IndexRange { .. })));
    }

    #[test]
    fn geometric_breakpoints_are_exact_powers() {
        let g = LacunarySchedule::geometric(2.0, 4).unwrap();
        assert_eq!(g.breakpoints(), &[0, 2, 4, 8, 16]);
        let stats = g.stats(2).unwrap();
        assert!(stats.q.iter().all(|&q| q == 2.0));
    }

    #[test]
    fn power_and_factorial_breakpoints() {
        let p = LacunarySchedule::power(2, 4).unwrap();
        assert_eq!(p.breakpoints(), &[0, 1, 4, 9, 16]);
        let f = LacunarySchedule::factorial(8).unwrap();
        assert_eq!(f.breakpoint(8), 40320);
        let stats = f.stats(3).unwrap();
        assert_eq!(stats.q, vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(stats.tail_sup_q, 8.0);
    }

    #[test]
    fn explicit_rejects_non_increasing() {
        assert!(matches!(
            LacunarySchedule::explicit(vec![0, 1, 3, 2]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            LacunarySchedule::explicit(vec![1, 2, 3]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn power_tail_inf_matches_closed_form() {
        let p = LacunarySchedule::power(2, 100).unwrap();
        let stats = p.stats(10).unwrap();
        let expect = (100.0f64 / 99.0).powi(2);
        assert!((stats.tail_inf_q - expect).abs() < 1e-12);
    }

    #[test]
    fn factorial_overflows_past_twenty() {
        assert!(LacunarySchedule::factorial(20).is_ok());
        assert!(matches!(
            LacunarySchedule::factorial(21),
            Err(Error::BreakpointOverflow { .. })
        ));
    }

    #[test]
    fn diagnostics_flags() {
        let g = LacunarySchedule::geometric(2.0, 20).unwrap();
        let d = g.validate(8, 4.0, 0.1);
        assert!(d.starts_at_zero && d.strictly_increasing && d.h_grows);
        assert!(d.liminf_exceeds_one);
        assert!(d.limsup_bounded);
        assert_eq!(d.tail_inf_q, 2.0);

        let p = LacunarySchedule::power(2, 200).unwrap();
        let d = p.validate(8, 4.0, 0.1);
        assert!(d.h_grows);
        assert!(!d.liminf_exceeds_one, "ratio tail collapses toward 1");
        assert!(d.limsup_bounded);

        let e = LacunarySchedule::explicit(vec![0, 5, 6, 7]).unwrap();
        let d = e.validate(2, 4.0, 0.1);
        assert!(!d.h_grows, "constant unit blocks after the first");

        let f = LacunarySchedule::factorial(8).unwrap();
        let d = f.validate(3, 4.0, 0.1);
        assert!(d.liminf_exceeds_one);
        assert!(!d.limsup_bounded, "ratio tail keeps growing");
    }

    #[test]
    fn blocks_partition_the_prefix() {
        for sched in [
            LacunarySchedule::geometric(2.0, 10).unwrap(),
            LacunarySchedule::power(3, 7).unwrap(),
            LacunarySchedule::factorial(7).unwrap(),
            LacunarySchedule::explicit(vec![0, 1, 5, 6, 20]).unwrap(),
        ] {
            let mut count = 0u64;
            for r in 1..=sched.r_max() {
                let block = sched.block(r);
                assert_eq!(
                    block.end() - block.start() + 1,
                    sched.block_len(r),
                    "h_r must match the block width"
                );
                assert_eq!(*block.start(), sched.breakpoint(r - 1) + 1);
                count += sched.block_len(r);
            }
            assert_eq!(count, sched.breakpoint(sched.r_max()));
        }
    }

    #[test]
    fn sequence_file_round_trip() {
        let dir = std::env::temp_dir().join("lacunary-seqfile-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.seq");
        let orig = make_catalog_sequence("sqrt", &[], 25).unwrap();
        write_sequence_file(&path, &orig).unwrap();
        let loaded = read_sequence_file(&path).unwrap();
        assert!(loaded.warnings.is_empty());
        assert_eq!(loaded.sequence.n_max(), 25);
        assert_eq!(loaded.sequence.growth_bound(), 0.5);
        for k in 1..=25 {
            assert_eq!(
                loaded.sequence.value(k).unwrap().to_bits(),
                orig.value(k).unwrap().to_bits(),
                "shortest round-trip formatting must reproduce bits"
            );
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn sequence_file_missing_growth_warns() {
        let dir = std::env::temp_dir().join("lacunary-seqfile-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("nogrowth.seq");
        std::fs::write(&path, "1.5\n2.5\n3.5\n").unwrap();
        let loaded = read_sequence_file(&path).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.sequence.growth_bound(), 1.0);
        assert_eq!(loaded.sequence.n_max(), 3);
        std::fs::remove_file(&path).ok();
    }
}
