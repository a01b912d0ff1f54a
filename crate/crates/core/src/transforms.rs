//! Sequence-to-sequence operators: forward differences, interleavings,
//! pointwise function application, and summability-matrix transforms.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::sequences::RealSequence;

/// Consecutive differences: index `k` of the result is `a_{k+1} - a_k`.
/// The result is one index shorter than its parent.
pub fn forward_difference(a: &RealSequence) -> Result<RealSequence> {
    if a.n_max() < 2 {
        return Err(Error::parameter(
            "sequence",
            "forward difference needs at least two terms",
        ));
    }
    let parent = a.clone();
    Ok(RealSequence::from_fn(
        format!("delta({})", a.label()),
        a.n_max() - 1,
        a.growth_bound(),
        move |k| parent.raw(k + 1) - parent.raw(k),
    ))
}

/// Second differences `a_{k+2} - 2 a_{k+1} + a_k`, computed as the iterated
/// forward difference so the two routes agree bit-for-bit.
pub fn second_difference(a: &RealSequence) -> Result<RealSequence> {
    if a.n_max() < 3 {
        return Err(Error::parameter(
            "sequence",
            "second difference needs at least three terms",
        ));
    }
    forward_difference(&forward_difference(a)?)
}

/// Alternates the two inputs: odd output index `2k-1` reads `a_k`, even
/// output index `2k` reads `b_k`. With `b` constant this is the classic
/// "splice a limit point between the terms" construction.
pub fn interleave_pair(a: &RealSequence, b: &RealSequence) -> RealSequence {
    let half = a.n_max().min(b.n_max());
    let (a, b) = (a.clone(), b.clone());
    let label = format!("interleave({},{})", a.label(), b.label());
    let growth = a.growth_bound().max(b.growth_bound());
    RealSequence::from_fn(label, 2 * half, growth, move |k| {
        if k % 2 == 1 {
            a.raw(k / 2 + 1)
        } else {
            b.raw(k / 2)
        }
    })
}

/// A piecewise-linear table on strictly increasing nodes. Outside the node
/// range the table is undefined (callers see a domain error), so user
/// functions stay total on exactly the range they declared.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl LinearTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::parameter(
                "table",
                "needs at least two (x, y) nodes of equal count",
            ));
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::parameter("table", "x nodes must be strictly increasing"));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::parameter("table", "nodes must be finite"));
        }
        Ok(LinearTable { xs, ys })
    }

    /// `node_x node_y` per line, ascending x.
    pub fn from_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.and_then(|t| t.parse().ok()).ok_or(Error::FileFormat {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    reason: format!("expected `x y`, got `{trimmed}`"),
                })
            };
            xs.push(parse(it.next())?);
            ys.push(parse(it.next())?);
        }
        LinearTable::new(xs, ys)
    }

    fn eval(&self, x: f64) -> f64 {
        if x < self.xs[0] || x > *self.xs.last().unwrap() {
            return f64::NAN;
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.ys[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// The closed function catalog for pointwise application. No arbitrary code
/// enters through configuration; user functions come in as tables.
#[derive(Clone)]
pub enum PointFunction {
    Square,
    Identity,
    Abs,
    Affine { a: f64, b: f64 },
    /// `x -> 1 / (x + shift)`; undefined where the denominator vanishes.
    RecipShift { shift: f64 },
    Table(Arc<LinearTable>),
}

impl fmt::Debug for PointFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl PointFunction {
    pub fn label(&self) -> String {
        match self {
            PointFunction::Square => "square".to_string(),
            PointFunction::Identity => "identity".to_string(),
            PointFunction::Abs => "abs".to_string(),
            PointFunction::Affine { a, b } => format!("affine:{a}:{b}"),
            PointFunction::RecipShift { shift } => format!("recip_shift:{shift}"),
            PointFunction::Table(_) => "table".to_string(),
        }
    }

    /// Evaluates the function; NaN marks "outside the domain" and surfaces as
    /// a domain error when the image sequence is read.
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            PointFunction::Square => x * x,
            PointFunction::Identity => x,
            PointFunction::Abs => x.abs(),
            PointFunction::Affine { a, b } => a * x + b,
            PointFunction::RecipShift { shift } => 1.0 / (x + shift),
            PointFunction::Table(t) => t.eval(x),
        }
    }

    /// Growth exponent of the image given the argument's exponent.
    fn image_growth(&self, g: f64) -> f64 {
        match self {
            PointFunction::Square => 2.0 * g,
            PointFunction::Identity | PointFunction::Abs | PointFunction::Affine { .. } => g,
            // no general envelope for a reciprocal; keep the parent's and let
            // the empirical constant estimate absorb the rest
            PointFunction::RecipShift { .. } => g,
            PointFunction::Table(_) => 0.0,
        }
    }
}

/// Applies `f` to every term. Domain failures are reported lazily, at the
/// index where the image is read.
pub fn apply_pointwise(f: &PointFunction, a: &RealSequence) -> RealSequence {
    let parent = a.clone();
    let func = f.clone();
    RealSequence::from_fn(
        format!("{}({})", f.label(), a.label()),
        a.n_max(),
        f.image_growth(a.growth_bound()),
        move |k| func.apply(parent.raw(k)),
    )
}

/// An indexed family `f_n` converging (or not) to a limit function; the
/// uniform-limit probe walks these.
#[derive(Debug, Clone)]
pub struct FunctionFamily {
    pub base: PointFunction,
    pub mode: FamilyMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMode {
    /// `f_n(x) = base(x) + 1/n`: uniform gap exactly `1/n`.
    AddInverse,
    /// `f_n(x) = base(x) * n / (n + 1)`: gap scales with `|base|`.
    ScaleRatio,
    /// `f_n = base` for every `n`.
    Constant,
}

impl FunctionFamily {
    pub fn member_value(&self, n: u32, x: f64) -> f64 {
        let base = self.base.apply(x);
        match self.mode {
            FamilyMode::AddInverse => base + 1.0 / n as f64,
            FamilyMode::ScaleRatio => base * n as f64 / (n as f64 + 1.0),
            FamilyMode::Constant => base,
        }
    }

    /// Image of `a` under the n-th member.
    pub fn member_sequence(&self, n: u32, a: &RealSequence) -> RealSequence {
        let parent = a.clone();
        let fam = self.clone();
        RealSequence::from_fn(
            format!("{}[n={n}]({})", self.label(), a.label()),
            a.n_max(),
            self.base.image_growth(a.growth_bound()),
            move |k| fam.member_value(n, parent.raw(k)),
        )
    }

    pub fn label(&self) -> String {
        let mode = match self.mode {
            FamilyMode::AddInverse => "shift",
            FamilyMode::ScaleRatio => "scale",
            FamilyMode::Constant => "const",
        };
        format!("{mode}:{}", self.base.label())
    }
}

/// A summability matrix presented row by row: row `n` is a finite list of
/// `(column, weight)` pairs with strictly increasing columns.
#[derive(Clone)]
pub struct MatrixMethod {
    label: String,
    rows: RowGen,
}

#[derive(Clone)]
enum RowGen {
    Identity,
    Cesaro,
    Explicit(Arc<BTreeMap<u64, Vec<(u64, f64)>>>),
}

impl fmt::Debug for MatrixMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixMethod({})", self.label)
    }
}

impl MatrixMethod {
    /// Row `n` is `[(n, 1)]`.
    pub fn identity() -> Self {
        MatrixMethod {
            label: "identity".to_string(),
            rows: RowGen::Identity,
        }
    }

    /// Row `n` puts weight `1/n` on columns `1..=n` (the C1 prefix-average
    /// method).
    pub fn cesaro() -> Self {
        MatrixMethod {
            label: "cesaro".to_string(),
            rows: RowGen::Cesaro,
        }
    }

    pub fn from_rows(label: impl Into<String>, rows: BTreeMap<u64, Vec<(u64, f64)>>) -> Result<Self> {
        for (n, row) in &rows {
            if row.is_empty() {
                return Err(Error::Validation(format!("row {n} is empty")));
            }
            if !row.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(Error::Validation(format!(
                    "row {n} columns must be strictly increasing"
                )));
            }
            if row.iter().any(|(k, w)| *k == 0 || !w.is_finite()) {
                return Err(Error::Validation(format!(
                    "row {n} has a zero column or non-finite weight"
                )));
            }
        }
        Ok(MatrixMethod {
            label: label.into(),
            rows: RowGen::Explicit(Arc::new(rows)),
        })
    }

    /// Loads `n k a_nk` triples, whitespace-separated, ascending `n` then `k`.
    pub fn from_row_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rows: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
        let mut last: Option<(u64, u64)> = None;
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let bad = |reason: String| Error::FileFormat {
                path: path.to_path_buf(),
                line: idx + 1,
                reason,
            };
            let mut it = trimmed.split_whitespace();
            let n: u64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(format!("expected `n k a_nk`, got `{trimmed}`")))?;
            let k: u64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(format!("expected `n k a_nk`, got `{trimmed}`")))?;
            let w: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(format!("expected `n k a_nk`, got `{trimmed}`")))?;
            if let Some((pn, pk)) = last {
                if n < pn || (n == pn && k <= pk) {
                    return Err(bad(format!(
                        "entries must ascend by n then k; ({n},{k}) follows ({pn},{pk})"
                    )));
                }
            }
            last = Some((n, k));
            rows.entry(n).or_default().push((k, w));
        }
        let label = format!("matrix-file:{}", path.display());
        MatrixMethod::from_rows(label, rows)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The finite row for index `n`.
    pub fn row(&self, n: u64) -> Vec<(u64, f64)> {
        match &self.rows {
            RowGen::Identity => vec![(n, 1.0)],
            RowGen::Cesaro => {
                let w = 1.0 / n as f64;
                (1..=n).map(|k| (k, w)).collect()
            }
            RowGen::Explicit(rows) => rows.get(&n).cloned().unwrap_or_default(),
        }
    }
}

/// First `n` entries of the transformed sequence, each row accumulated with
/// compensated summation in ascending column order.
pub fn apply_matrix(method: &MatrixMethod, a: &RealSequence, n: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::parameter("n", "must be at least 1"));
    }
    let mut out = Vec::with_capacity(n as usize);
    for row_idx in 1..=n {
        let mut acc = KahanSum::new();
        for (col, weight) in method.row(row_idx) {
            acc.add(weight * a.value(col)?);
        }
        out.push(acc.value());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::make_catalog_sequence;

    #[test]
    fn forward_difference_spot_values() {
        let sqrt = make_catalog_sequence("sqrt", &[], 100).unwrap();
        let d = forward_difference(&sqrt).unwrap();
        assert_eq!(d.n_max(), 99);
        assert!((d.value(1).unwrap() - 0.41421356237309515).abs() < 1e-15);

        let affine = make_catalog_sequence("affine", &[3.0, 5.0], 100).unwrap();
        let d = forward_difference(&affine).unwrap();
        for k in [1u64, 17, 99] {
            assert_eq!(d.value(k).unwrap(), 3.0);
        }

        let c = make_catalog_sequence("constant", &[4.25], 10).unwrap();
        let d = forward_difference(&c).unwrap();
        assert_eq!(d.value(5).unwrap(), 0.0);
    }

    #[test]
    fn second_difference_spot_values() {
        let affine = make_catalog_sequence("affine", &[2.0, -1.0], 50).unwrap();
        let d2 = second_difference(&affine).unwrap();
        for k in 1..=48 {
            assert_eq!(d2.value(k).unwrap(), 0.0);
        }
        let squares = RealSequence::from_fn("squares", 50, 2.0, |k| (k * k) as f64);
        let d2 = second_difference(&squares).unwrap();
        for k in 1..=48 {
            assert_eq!(d2.value(k).unwrap(), 2.0);
        }
        let sqrt = make_catalog_sequence("sqrt", &[], 50).unwrap();
        let d2 = second_difference(&sqrt).unwrap();
        assert!((d2.value(1).unwrap() - -0.0963763171773131).abs() < 1e-15);
    }

    #[test]
    fn interleave_shape_and_differences() {
        let nat = RealSequence::from_fn("nat", 10, 1.0, |k| k as f64);
        let zero = make_catalog_sequence("constant", &[0.0], 10).unwrap();
        let mix = interleave_pair(&nat, &zero);
        let head: Vec<f64> = (1..=6).map(|k| mix.value(k).unwrap()).collect();
        assert_eq!(head, vec![1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);

        // interleaving a sequence with itself zeroes the odd differences
        let sqrt = make_catalog_sequence("sqrt", &[], 10).unwrap();
        let self_mix = interleave_pair(&sqrt, &sqrt);
        let d = forward_difference(&self_mix).unwrap();
        for k in 1..=9u64 {
            if k % 2 == 1 {
                assert_eq!(d.value(k).unwrap(), 0.0);
            }
        }

        let five = make_catalog_sequence("constant", &[5.0], 10).unwrap();
        let cc = interleave_pair(&five, &five);
        assert!((1..=20).all(|k| cc.value(k).unwrap() == 5.0));
    }

    #[test]
    fn pointwise_square_on_sqrt_recovers_index() {
        let sqrt = make_catalog_sequence("sqrt", &[], 1 << 12).unwrap();
        let image = apply_pointwise(&PointFunction::Square, &sqrt);
        assert_eq!(image.growth_bound(), 1.0);
        for k in [1u64, 4, 9, 16, 1024, 4095] {
            let v = image.value(k).unwrap();
            // exact at perfect squares, within rounding elsewhere
            assert!((v - k as f64).abs() <= 4.0 * f64::EPSILON * k as f64);
        }
        assert_eq!(image.value(16).unwrap(), 16.0);
    }

    #[test]
    fn pointwise_identity_and_affine() {
        let c3 = make_catalog_sequence("constant", &[3.0], 10).unwrap();
        let id = apply_pointwise(&PointFunction::Identity, &c3);
        assert_eq!(id.value(7).unwrap(), 3.0);
        let aff = apply_pointwise(&PointFunction::Affine { a: 2.0, b: 1.0 }, &c3);
        assert_eq!(aff.value(7).unwrap(), 7.0);
    }

    #[test]
    fn recip_shift_domain_error_names_the_index() {
        let nat = RealSequence::from_fn("nat", 10, 1.0, |k| k as f64);
        let img = apply_pointwise(&PointFunction::RecipShift { shift: -4.0 }, &nat);
        assert!((img.value(2).unwrap() - -0.5).abs() < 1e-15);
        match img.value(4) {
            Err(Error::Domain { index, .. }) => assert_eq!(index, 4),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn table_interpolates_and_bounds_domain() {
        let t = LinearTable::new(vec![0.0, 1.0, 2.0], vec![0.0, 10.0, 0.0]).unwrap();
        let f = PointFunction::Table(Arc::new(t));
        assert_eq!(f.apply(0.5), 5.0);
        assert_eq!(f.apply(1.0), 10.0);
        assert!(f.apply(3.0).is_nan());
        assert!(LinearTable::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn identity_matrix_reproduces_terms() {
        let sqrt = make_catalog_sequence("sqrt", &[], 10).unwrap();
        let out = apply_matrix(&MatrixMethod::identity(), &sqrt, 3).unwrap();
        assert_eq!(out, vec![1.0, 2f64.sqrt(), 3f64.sqrt()]);
    }

    #[test]
    fn cesaro_matrix_on_alternating() {
        let alt = make_catalog_sequence("alternating", &[], 10).unwrap();
        let out = apply_matrix(&MatrixMethod::cesaro(), &alt, 4).unwrap();
        assert_eq!(out[0], -1.0);
        assert_eq!(out[1], 0.0);
        assert!((out[2] - (-1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(out[3], 0.0);
    }

    #[test]
    fn cesaro_matrix_on_constant_is_constant() {
        let c = make_catalog_sequence("constant", &[2.5], 64).unwrap();
        let out = apply_matrix(&MatrixMethod::cesaro(), &c, 64).unwrap();
        for v in out {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_column_out_of_range() {
        let sqrt = make_catalog_sequence("sqrt", &[], 5).unwrap();
        assert!(matches!(
            apply_matrix(&MatrixMethod::identity(), &sqrt, 6),
            Err(Error::IndexRange { .. })
        ));
    }

    #[test]
    fn row_file_rejects_disorder() {
        let dir = std::env::temp_dir().join("lacunary-matrix-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.rows");
        std::fs::write(&path, "1 1 1.0\n1 1 2.0\n").unwrap();
        assert!(matches!(
            MatrixMethod::from_row_file(&path),
            Err(Error::FileFormat { .. })
        ));
        std::fs::write(&path, "1 1 1.0\n2 1 0.5\n2 2 0.5\n").unwrap();
        let m = MatrixMethod::from_row_file(&path).unwrap();
        assert_eq!(m.row(2), vec![(1, 0.5), (2, 0.5)]);
        std::fs::remove_file(&path).ok();
    }
}
