//! Distribution literals used on the command line and in config files.
//!
//! ```text
//! 0:9/10,1:1/10      explicit atoms, weights as fractions or decimals
//! uniform01          uniform on {0, 1}
//! uniform-1,0,1      uniform on the listed values
//! bernoulli(1/10)    1 with probability a, else 0
//! point(3)           point mass
//! ```

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use latsurj_core::ensembles::{Distribution, Fraction};
use latsurj_core::fq::{Elem, FieldTable, FqDistribution};

/// `"3/8"`, `"0.375"` or `"1"`.
pub fn parse_fraction(s: &str) -> Result<Fraction> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: u64 = a.trim().parse().with_context(|| format!("bad numerator in {s:?}"))?;
        let b: u64 = b.trim().parse().with_context(|| format!("bad denominator in {s:?}"))?;
        if b == 0 {
            bail!("zero denominator in {s:?}");
        }
        return Ok(Fraction::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|c| c.is_ascii_digit()) {
            bail!("bad decimal {s:?}");
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().with_context(|| format!("bad decimal {s:?}"))? };
        let scale = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse()?;
        let num = int.checked_mul(scale).and_then(|x| x.checked_add(frac)).ok_or_else(|| anyhow!("decimal {s:?} too large"))?;
        return Ok(Fraction::new(num, scale));
    }
    Ok(Fraction::from_integer(s.parse().with_context(|| format!("bad weight {s:?}"))?))
}

fn parse_list(s: &str) -> Result<Vec<i64>> {
    let s = s.trim().trim_start_matches(['{', '(', '[']).trim_end_matches(['}', ')', ']']);
    s.split(',').map(|v| v.trim().parse::<i64>().with_context(|| format!("bad value {v:?}"))).collect()
}

fn parenthesized<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')
}

/// Atoms of a literal before validation as a probability law.
fn parse_atoms(s: &str) -> Result<Vec<(i64, Fraction)>> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("uniform") {
        let values = if rest == "01" { vec![0, 1] } else { parse_list(rest)? };
        if values.is_empty() {
            bail!("uniform needs at least one value");
        }
        let w = Fraction::new(1, values.len() as u64);
        let mut atoms: Vec<(i64, Fraction)> = Vec::new();
        for v in values {
            match atoms.iter_mut().find(|(x, _)| *x == v) {
                Some((_, acc)) => *acc += w,
                None => atoms.push((v, w)),
            }
        }
        return Ok(atoms);
    }
    if let Some(a) = parenthesized(s, "bernoulli") {
        let a = parse_fraction(a)?;
        return Ok(vec![(0, Fraction::from_integer(1) - a), (1, a)]);
    }
    if let Some(v) = parenthesized(s, "point") {
        return Ok(vec![(v.trim().parse().with_context(|| format!("bad value in {s:?}"))?, Fraction::from_integer(1))]);
    }
    s.split(',')
        .map(|atom| {
            let (v, w) = atom.split_once(':').ok_or_else(|| anyhow!("expected value:weight, got {atom:?}"))?;
            Ok((v.trim().parse().with_context(|| format!("bad value {v:?}"))?, parse_fraction(w)?))
        })
        .collect()
}

/// Integer-valued law from a literal.
pub fn parse_distribution(s: &str) -> Result<Distribution> {
    if let Some(a) = parenthesized(s.trim(), "bernoulli") {
        return Distribution::sparse_bernoulli(parse_fraction(a)?).map_err(|e| anyhow!("{s:?}: {e}"));
    }
    let atoms: Vec<(i64, Fraction)> = parse_atoms(s)?.into_iter().filter(|(_, w)| *w.numer() > 0).collect();
    Distribution::new(&atoms).map_err(|e| anyhow!("{s:?}: {e}"))
}

/// Canonical `value:weight` literal.
pub fn format_distribution(d: &Distribution) -> String {
    d.atoms().map(|(v, w)| format!("{v}:{w}")).collect::<Vec<_>>().join(",")
}

/// Law on `F_q` from a literal whose values are element codes in `[0, q)`;
/// `uniform` alone means the whole field.
pub fn parse_fq_distribution(field: Arc<FieldTable>, s: &str) -> Result<FqDistribution> {
    if s.trim() == "uniform" {
        return Ok(FqDistribution::uniform(field));
    }
    let mut weights = Vec::new();
    for (v, w) in parse_atoms(s)? {
        let x = Elem::try_from(v).ok().filter(|&x| x < field.order());
        let x = x.ok_or_else(|| anyhow!("{v} is not an element code of F_{}", field.order()))?;
        weights.push((x, w));
    }
    FqDistribution::from_weights(field, &weights).map_err(|e| anyhow!("{s:?}: {e}"))
}

/// Comma-separated element codes, e.g. `"1,1,2"`.
pub fn parse_elements(field: &FieldTable, s: &str) -> Result<Vec<Elem>> {
    parse_list(s)?
        .into_iter()
        .map(|v| {
            Elem::try_from(v).ok().filter(|&x| x < field.order()).ok_or_else(|| anyhow!("{v} is not an element of F_{}", field.order()))
        })
        .collect()
}

/// Comma-separated unsigned integers.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse().with_context(|| format!("bad integer {t:?}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(parse_fraction("3/8").unwrap(), Fraction::new(3, 8));
        assert_eq!(parse_fraction("0.375").unwrap(), Fraction::new(3, 8));
        assert_eq!(parse_fraction(".5").unwrap(), Fraction::new(1, 2));
        assert_eq!(parse_fraction("1").unwrap(), Fraction::from_integer(1));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("x").is_err());
    }

    #[test]
    fn literals() {
        let d = parse_distribution("0:9/10,1:1/10").unwrap();
        assert_eq!(d.weight(1), Fraction::new(1, 10));
        assert_eq!(parse_distribution("uniform01").unwrap(), Distribution::uniform(&[0, 1]).unwrap());
        assert_eq!(parse_distribution("uniform-1,0,1").unwrap(), Distribution::uniform(&[-1, 0, 1]).unwrap());
        assert_eq!(
            parse_distribution("bernoulli(1/10)").unwrap(),
            Distribution::sparse_bernoulli(Fraction::new(1, 10)).unwrap()
        );
        assert_eq!(parse_distribution("bernoulli(0.1)").unwrap(), parse_distribution("0:0.9,1:0.1").unwrap());
        assert_eq!(parse_distribution("point(3)").unwrap(), Distribution::point_mass(3));
        assert!(parse_distribution("0:1/2,1:1/3").is_err());
        assert!(parse_distribution("bernoulli(1)").is_err());
        assert!(parse_distribution("nonsense").is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        for s in ["uniform-2,5,7", "0:1/3,4:2/3", "bernoulli(1/7)"] {
            let d = parse_distribution(s).unwrap();
            assert_eq!(parse_distribution(&format_distribution(&d)).unwrap(), d);
        }
    }

    #[test]
    fn field_literals() {
        let k = Arc::new(FieldTable::of_order(4).unwrap());
        let u = parse_fq_distribution(k.clone(), "uniform").unwrap();
        assert_eq!(u, FqDistribution::uniform(k.clone()));
        let mu = parse_fq_distribution(k.clone(), "uniform01").unwrap();
        assert_eq!(mu.support(), [0, 1]);
        assert!(parse_fq_distribution(k.clone(), "4:1").is_err());
        assert_eq!(parse_elements(&k, "1,3,0").unwrap(), [1, 3, 0]);
        assert!(parse_elements(&k, "1,4").is_err());
    }
}
