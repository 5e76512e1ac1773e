//! Matrix text format and JSON renderings of certificates and Smith forms.
//!
//! A matrix file holds `rows cols` on the first line followed by the rows as
//! whitespace-separated decimal integers. Lines starting with `#` are
//! ignored.

use anyhow::{bail, Context, Result};
use latsurj_core::certifier::{Certificate, Method, Verdict, Witness};
use latsurj_core::linalg::{CokernelStructure, SnfDecomposition};
use latsurj_core::IntMatrix;
use num_bigint::BigInt;
use serde_json::{json, Value};

pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let mut tokens = text.lines().filter(|l| !l.trim_start().starts_with('#')).flat_map(str::split_whitespace);
    let mut dim = |what: &str| -> Result<usize> {
        tokens.next().with_context(|| format!("missing {what} count"))?.parse().with_context(|| format!("bad {what} count"))
    };
    let (rows, cols) = (dim("row")?, dim("column")?);
    let entries: Vec<BigInt> =
        tokens.map(|t| t.parse::<BigInt>().with_context(|| format!("bad matrix entry {t:?}"))).collect::<Result<_>>()?;
    if entries.len() != rows * cols {
        bail!("expected {} entries for a {rows}x{cols} matrix, found {}", rows * cols, entries.len());
    }
    Ok(IntMatrix::new(rows, cols, entries)?)
}

pub fn write_matrix(m: &IntMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(ToString::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn ints(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn rows(m: &IntMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| ints(r)).collect()
}

/// Integers are written as decimal strings so that arbitrarily large values
/// survive JSON readers with 64-bit numbers.
pub fn certificate_json(c: &Certificate, timing_ms: Option<f64>) -> Value {
    let verdict = match c.verdict {
        Verdict::Surjective => "surjective",
        Verdict::NotSurjective => "not_surjective",
    };
    let method = match c.method {
        Method::PrimeReduction => "prime_reduction",
        Method::SnfFallback => "snf_fallback",
    };
    let witness = match &c.witness {
        Witness::Minors { minors, gcd, factorization, prime_checks } => json!({
            "kind": "minors",
            "minors": minors.iter().map(|m| json!({"columns": m.columns, "det": m.det.to_string()})).collect::<Vec<_>>(),
            "gcd": gcd.to_string(),
            "factorization": factorization.iter().map(|(p, e)| json!({"prime": p.to_string(), "exponent": e})).collect::<Vec<_>>(),
            "prime_checks": prime_checks.iter().map(|pc| json!({"prime": pc.prime.to_string(), "columns": pc.columns})).collect::<Vec<_>>(),
        }),
        Witness::RightInverse { inverse } => json!({"kind": "right_inverse", "inverse": rows(inverse)}),
        Witness::Annihilator { modulus, vector } => {
            json!({"kind": "annihilator", "modulus": modulus.to_string(), "vector": ints(vector)})
        }
        Witness::RationalKernel { vector } => json!({"kind": "rational_kernel", "vector": ints(vector)}),
    };
    let mut out = json!({"verdict": verdict, "method": method, "witness": witness});
    if let Some(t) = timing_ms {
        out["timing_ms"] = json!(t);
    }
    out
}

pub fn snf_json(s: &SnfDecomposition, c: &CokernelStructure) -> Value {
    json!({
        "diagonal": ints(&s.diagonal()),
        "left": rows(&s.left),
        "right": rows(&s.right),
        "cokernel": {
            "invariant_factors": ints(&c.invariant_factors),
            "free_rank": c.free_rank,
            "trivial": c.is_trivial(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use latsurj_core::certifier::is_surjective;

    #[test]
    fn matrix_round_trip() {
        let m = IntMatrix::from_rows(&[[1, -2, 3], [40, 5, -600]]).unwrap();
        let text = write_matrix(&m);
        assert_eq!(text, "2 3\n1 -2 3\n40 5 -600\n");
        assert_eq!(parse_matrix(&text).unwrap(), m);
        assert_eq!(parse_matrix("# comment\n2 2\n1 0\n0 1\n").unwrap(), IntMatrix::identity(2));
        let big = parse_matrix("1 1\n123456789012345678901234567890\n").unwrap();
        assert_eq!(big.get(0, 0).to_string(), "123456789012345678901234567890");
    }

    #[test]
    fn malformed_matrices() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2 2\n1 2 3\n").is_err());
        assert!(parse_matrix("1 2\n1 x\n").is_err());
        assert!(parse_matrix("0 0\n").is_err());
    }

    #[test]
    fn certificate_rendering() {
        let c = is_surjective(&IntMatrix::from_rows(&[[1, 0, 3], [0, 2, 4]]).unwrap());
        let v = certificate_json(&c, None);
        assert_eq!(v["verdict"], "not_surjective");
        assert!(v.get("timing_ms").is_none());
        assert!(certificate_json(&c, Some(1.5)).get("timing_ms").is_some());
    }
}
