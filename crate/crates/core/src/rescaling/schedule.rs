//! Scaling sequences and the lattice bounds of a finite family of them.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type IndexFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Generator {
    Geometric { base: f64, ratio: f64 },
    Polynomial { coefficient: f64, exponent: f64 },
    Explicit(Arc<Vec<f64>>),
    Function(IndexFn),
    Upper(Arc<Vec<ScaleSequence>>),
    Lower(Arc<Vec<ScaleSequence>>),
}

/// Lazily evaluated positive sequence `d_1, d_2, …` standing in for a
/// scaling sequence, with an optional divergence certificate (a lower bound
/// the values must respect wherever they are evaluated).
#[derive(Clone)]
pub struct ScaleSequence {
    generator: Generator,
    certificate: Option<IndexFn>,
}

impl fmt::Debug for ScaleSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.generator {
            Generator::Geometric { base, ratio } => format!("geometric({base}, {ratio})"),
            Generator::Polynomial { coefficient, exponent } => format!("polynomial({coefficient}, {exponent})"),
            Generator::Explicit(v) => format!("explicit(len {})", v.len()),
            Generator::Function(_) => "function".into(),
            Generator::Upper(s) => format!("upper({})", s.len()),
            Generator::Lower(s) => format!("lower({})", s.len()),
        };
        write!(f, "ScaleSequence({kind}, certified: {})", self.certificate.is_some())
    }
}

impl ScaleSequence {
    /// `d_n = base · ratio^(n-1)`.
    pub fn geometric(base: f64, ratio: f64) -> Result<Self> {
        if !(base > 0.0 && base.is_finite()) {
            return Err(Error::param("base", format!("{base} must be positive")));
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::param("ratio", format!("{ratio} must exceed 1 for divergence")));
        }
        Ok(Self::bare(Generator::Geometric { base, ratio }))
    }

    /// `d_n = coefficient · n^exponent`.
    pub fn polynomial(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient.is_finite()) {
            return Err(Error::param("coefficient", format!("{coefficient} must be positive")));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::param("exponent", format!("{exponent} must be positive for divergence")));
        }
        Ok(Self::bare(Generator::Polynomial { coefficient, exponent }))
    }

    /// Finite list of values; indices past the end are out of range.
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if let Some(i) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidSchedule(i));
        }
        Ok(Self::bare(Generator::Explicit(Arc::new(values))))
    }

    pub fn from_fn(f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self::bare(Generator::Function(Arc::new(f)))
    }

    fn bare(generator: Generator) -> Self {
        ScaleSequence { generator, certificate: None }
    }

    /// Attaches a lower bound `n ↦ b_n` that the sequence claims to respect.
    pub fn with_certificate(mut self, bound: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        self.certificate = Some(Arc::new(bound));
        self
    }

    /// Number of available terms, if finite.
    pub fn term_count(&self) -> Option<u64> {
        match &self.generator {
            Generator::Explicit(v) => Some(v.len() as u64),
            Generator::Upper(s) | Generator::Lower(s) => s.iter().filter_map(ScaleSequence::term_count).min(),
            _ => None,
        }
    }

    /// `d_n` for `n >= 1`, checked for positivity and against the certificate.
    pub fn get(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::IndexOutOfRange(0));
        }
        let value = match &self.generator {
            Generator::Geometric { base, ratio } => base * ratio.powf((n - 1) as f64),
            Generator::Polynomial { coefficient, exponent } => coefficient * (n as f64).powf(*exponent),
            Generator::Explicit(v) => *v.get((n - 1) as usize).ok_or(Error::IndexOutOfRange(n))?,
            Generator::Function(f) => f(n),
            Generator::Upper(seqs) => upper_value(seqs, n)?,
            Generator::Lower(seqs) => lower_value(seqs, n)?,
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidSchedule((n - 1) as usize));
        }
        if let Some(bound) = &self.certificate {
            let b = bound(n);
            if value < b {
                return Err(Error::CertificateViolated { index: n, value, bound: b });
            }
        }
        Ok(value)
    }

    /// `d_1, …, d_len`, evaluated in parallel.
    pub fn prefix(&self, len: u64) -> Result<Vec<f64>> {
        (1..=len).into_par_iter().map(|n| self.get(n)).collect()
    }

    /// Like [`ScaleSequence::prefix`] but also requires the values to be
    /// strictly increasing, as schedules must be.
    pub fn schedule(&self, len: u64) -> Result<Vec<f64>> {
        let values = self.prefix(len)?;
        validate_schedule(&values)?;
        Ok(values)
    }
}

/// Checks that a schedule is nonempty, positive, finite and strictly
/// increasing.
pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    for (i, &v) in schedule.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) || (i > 0 && v <= schedule[i - 1]) {
            return Err(Error::InvalidSchedule(i));
        }
    }
    Ok(())
}

/// Schedule descriptor as written in scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Geometric {
        #[serde(default = "one")]
        base: f64,
        ratio: f64,
        len: u64,
    },
    Polynomial {
        #[serde(default = "one")]
        coefficient: f64,
        exponent: f64,
        len: u64,
    },
    Explicit {
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl ScheduleSpec {
    pub fn sequence(&self) -> Result<ScaleSequence> {
        match self {
            ScheduleSpec::Geometric { base, ratio, .. } => ScaleSequence::geometric(*base, *ratio),
            ScheduleSpec::Polynomial { coefficient, exponent, .. } => {
                ScaleSequence::polynomial(*coefficient, *exponent)
            }
            ScheduleSpec::Explicit { values } => ScaleSequence::explicit(values.clone()),
        }
    }

    /// The evaluated, validated schedule.
    pub fn values(&self) -> Result<Vec<f64>> {
        let len = match self {
            ScheduleSpec::Geometric { len, .. } | ScheduleSpec::Polynomial { len, .. } => *len,
            ScheduleSpec::Explicit { values } => values.len() as u64,
        };
        self.sequence()?.schedule(len)
    }
}

fn family_size(seqs: &[ScaleSequence], n: u64) -> usize {
    seqs.len().min(usize::try_from(n).unwrap_or(usize::MAX))
}

fn upper_value(seqs: &[ScaleSequence], n: u64) -> Result<f64> {
    let k = family_size(seqs, n);
    seqs[..k].iter().try_fold(0.0f64, |acc, s| Ok(acc.max(s.get(n)?)))
}

/// Largest `i` with `n ∈ A_i`, where `A_i = {n : d_n^j > i - 1 for all
/// j <= min(i, K)}` for a family of `K` sequences. Beyond `i = K` the
/// condition no longer changes its index set, so the answer is closed-form.
pub fn lattice_level(seqs: &[ScaleSequence], n: u64) -> Result<u64> {
    let values: Vec<f64> = seqs.iter().map(|s| s.get(n)).collect::<Result<_>>()?;
    lattice_level_of(&values)
}

fn lattice_level_of(values: &[f64]) -> Result<u64> {
    let k = values.len();
    let mut running_min = f64::INFINITY;
    for i in 1..=k {
        running_min = running_min.min(values[i - 1]);
        if !(running_min > (i - 1) as f64) {
            return Ok((i - 1) as u64);
        }
    }
    // n ∈ A_i for i >= K iff i - 1 < m, i.e. i <= ceil(m + 1) - 1
    let closed = ((running_min + 1.0).ceil() - 1.0).max(k as f64);
    if closed >= u64::MAX as f64 {
        return Err(Error::param("sequences", "lattice level overflows"));
    }
    Ok(closed as u64)
}

fn lower_value(seqs: &[ScaleSequence], n: u64) -> Result<f64> {
    let values: Vec<f64> = seqs.iter().map(|s| s.get(n)).collect::<Result<_>>()?;
    let level = lattice_level_of(&values)?;
    let j = usize::try_from(level).unwrap_or(usize::MAX).min(values.len()).max(1);
    Ok(values[..j].iter().copied().fold(f64::INFINITY, f64::min))
}

/// Upper and lower bounds of a finite family of scaling sequences:
/// `upper_n = max{d_n^i : i <= min(n, K)}` and, for `n ∈ A_i ∖ A_{i+1}`,
/// `lower_n = min{d_n^j : j <= min(i, K)}`.
///
/// Every member's certificate is checked on the first `prefix_len` terms
/// before the bounds are formed.
pub fn scale_lattice_bounds(sequences: &[ScaleSequence], prefix_len: u64) -> Result<(ScaleSequence, ScaleSequence)> {
    if sequences.is_empty() {
        return Err(Error::param("sequences", "need at least one sequence"));
    }
    sequences.par_iter().try_for_each(|s| s.prefix(prefix_len).map(drop))?;
    let seqs = Arc::new(sequences.to_vec());
    Ok((ScaleSequence::bare(Generator::Upper(seqs.clone())), ScaleSequence::bare(Generator::Lower(seqs))))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatticeAudit {
    pub checks: u64,
    pub upper_violations: u64,
    pub lower_violations: u64,
    pub witness_violations: u64,
    /// Largest value of `lower` on the prefix.
    pub lower_max: f64,
}

impl LatticeAudit {
    pub fn holds(&self) -> bool {
        self.upper_violations == 0 && self.lower_violations == 0 && self.witness_violations == 0
    }
}

/// Checks the lattice contract on `1..=prefix_len`: `upper_n >= d_n^i` for
/// `i <= n`, and for `n ∈ A_i` both `lower_n <= d_n^i` (when `i <= K`) and
/// `lower_n > i - 1`.
pub fn audit_lattice(
    sequences: &[ScaleSequence],
    upper: &ScaleSequence,
    lower: &ScaleSequence,
    prefix_len: u64,
) -> Result<LatticeAudit> {
    let k = sequences.len();
    let parts = (1..=prefix_len)
        .into_par_iter()
        .map(|n| -> Result<LatticeAudit> {
            let d: Vec<f64> = sequences.iter().map(|s| s.get(n)).collect::<Result<_>>()?;
            let (u, l) = (upper.get(n)?, lower.get(n)?);
            let mut a = LatticeAudit { lower_max: l, ..Default::default() };
            for &di in d.iter().take(family_size(sequences, n)) {
                a.checks += 1;
                a.upper_violations += u64::from(u < di);
            }
            let level = lattice_level_of(&d)?;
            for i in 1..=level.min(k as u64) {
                a.checks += 2;
                a.lower_violations += u64::from(l > d[(i - 1) as usize]);
                a.witness_violations += u64::from(!(l > (i - 1) as f64));
            }
            if level > k as u64 {
                a.checks += 1;
                a.witness_violations += u64::from(!(l > (level - 1) as f64));
            }
            Ok(a)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(LatticeAudit::default(), |acc, a| LatticeAudit {
        checks: acc.checks + a.checks,
        upper_violations: acc.upper_violations + a.upper_violations,
        lower_violations: acc.lower_violations + a.lower_violations,
        witness_violations: acc.witness_violations + a.witness_violations,
        lower_max: acc.lower_max.max(a.lower_max),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators() {
        let g = ScaleSequence::geometric(2.0, 3.0).unwrap();
        assert_eq!(g.prefix(3).unwrap(), vec![2.0, 6.0, 18.0]);
        let p = ScaleSequence::polynomial(1.0, 2.0).unwrap();
        assert_eq!(p.get(4).unwrap(), 16.0);
        let e = ScaleSequence::explicit(vec![1.0, 5.0]).unwrap();
        assert!(matches!(e.get(3), Err(Error::IndexOutOfRange(3))));
        assert!(ScaleSequence::geometric(1.0, 1.0).is_err());
        assert!(matches!(e.get(0), Err(Error::IndexOutOfRange(0))));
    }

    #[test]
    fn certificate_violation_is_loud() {
        let s = ScaleSequence::from_fn(|n| if n == 7 { 1.0 } else { n as f64 }).with_certificate(|n| n as f64 - 0.5);
        assert!(s.prefix(6).is_ok());
        assert!(matches!(s.prefix(10), Err(Error::CertificateViolated { index: 7, .. })));
        assert!(scale_lattice_bounds(&[s], 10).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert_eq!(validate_schedule(&[]), Err(Error::EmptySchedule));
        assert_eq!(validate_schedule(&[1.0, 1.0]), Err(Error::InvalidSchedule(1)));
        assert_eq!(validate_schedule(&[-1.0]), Err(Error::InvalidSchedule(0)));
        assert!(validate_schedule(&[1.0, 2.0]).is_ok());
    }

    #[test]
    fn spec_json_forms() {
        let s: ScheduleSpec = serde_json::from_str(r#"{"kind":"geometric","base":1,"ratio":2,"len":4}"#).unwrap();
        assert_eq!(s.values().unwrap(), vec![1.0, 2.0, 4.0, 8.0]);
        let s: ScheduleSpec = serde_json::from_str(r#"{"kind":"polynomial","exponent":1,"len":3}"#).unwrap();
        assert_eq!(s.values().unwrap(), vec![1.0, 2.0, 3.0]);
        let s: ScheduleSpec = serde_json::from_str(r#"{"kind":"explicit","values":[3,1]}"#).unwrap();
        assert!(s.values().is_err());
    }

    #[test]
    fn linear_and_square() {
        let n = ScaleSequence::polynomial(1.0, 1.0).unwrap();
        let n2 = ScaleSequence::polynomial(1.0, 2.0).unwrap();
        let (upper, lower) = scale_lattice_bounds(&[n.clone(), n2.clone()], 100).unwrap();
        for k in 1..=100u64 {
            assert_eq!(upper.get(k).unwrap(), if k == 1 { 1.0 } else { (k * k) as f64 });
            assert!(lower.get(k).unwrap() <= k as f64);
        }
        assert!(lower.get(10_000).unwrap() > 9_000.0);
        let audit = audit_lattice(&[n, n2], &upper, &lower, 1000).unwrap();
        assert!(audit.holds(), "{audit:?}");
    }

    #[test]
    fn single_sequence_is_its_own_bound() {
        let s = ScaleSequence::geometric(0.5, 1.1).unwrap();
        let (upper, lower) = scale_lattice_bounds(std::slice::from_ref(&s), 50).unwrap();
        for k in 1..=50 {
            assert_eq!(upper.get(k).unwrap(), s.get(k).unwrap());
            assert_eq!(lower.get(k).unwrap(), s.get(k).unwrap());
        }
    }

    #[test]
    fn level_closed_form() {
        assert_eq!(lattice_level_of(&[3.5]).unwrap(), 4);
        assert_eq!(lattice_level_of(&[3.0]).unwrap(), 3);
        assert_eq!(lattice_level_of(&[0.5, 9.0]).unwrap(), 1);
        assert_eq!(lattice_level_of(&[5.0, 1.5]).unwrap(), 2);
    }
}
