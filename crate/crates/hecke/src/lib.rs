//! Exact-arithmetic computations with modules over the pro-p Iwahori-Hecke
//! algebra of GL_n over a p-adic field: the Hecke action on the first
//! cohomology of mod-p principal series, its height filtration, parabolic
//! induction and both adjoints, supersingularity tests, and a truncated
//! p-adic oracle validating the coefficient formulas.

pub mod charfield;
pub mod chevalley;
pub mod cohomology;
pub mod field;
pub mod filtration;
pub mod heckemod;
pub mod linalg;
pub mod monomial;
pub mod oracle;
pub mod report;
pub mod weyl;

pub use charfield::{FieldParams, SmoothCharacter};
pub use cohomology::Ctx;

/// Parse a character in the CLI grammar
/// `exps:[a1,...,an];uvals:[g^k1,...,g^kn]` (uvals entries `1` or `g^k`).
pub fn parse_character(
    fld: &field::Field,
    n: usize,
    s: &str,
) -> Result<SmoothCharacter, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let parts: Vec<&str> = s.split(';').collect();
    if parts.len() != 2 {
        return Err("expected `exps:[...];uvals:[...]`".into());
    }
    let exps_part = parts[0]
        .strip_prefix("exps:[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or("bad exps block")?;
    let uvals_part = parts[1]
        .strip_prefix("uvals:[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or("bad uvals block")?;
    let exps: Vec<i64> = if exps_part.is_empty() {
        vec![]
    } else {
        exps_part
            .split(',')
            .map(|t| t.parse::<i64>().map_err(|e| format!("bad exponent: {e}")))
            .collect::<Result<_, _>>()?
    };
    let uvals: Vec<field::FElem> = if uvals_part.is_empty() {
        vec![]
    } else {
        uvals_part
            .split(',')
            .map(|t| -> Result<field::FElem, String> {
                if t == "1" {
                    Ok(fld.one())
                } else if let Some(k) = t.strip_prefix("g^") {
                    let k: u64 = k.parse().map_err(|e| format!("bad power: {e}"))?;
                    Ok(fld.pow(&fld.gen, k))
                } else if t == "g" {
                    Ok(fld.gen.clone())
                } else {
                    Err(format!("bad uniformizer value `{t}` (use 1 or g^k)"))
                }
            })
            .collect::<Result<_, _>>()?
    };
    if exps.len() != n || uvals.len() != n {
        return Err(format!("character needs {n} slots"));
    }
    Ok(SmoothCharacter { exps, uvals })
}

/// A deterministic generic character: slot exponents 1, 2, 4, 8, ... with
/// pairwise distinct differences, and distinct uniformizer values.
pub fn generic_character(fld: &field::Field, n: usize) -> SmoothCharacter {
    let exps = (0..n as i64).map(|i| (1 << i) as i64).collect();
    let uvals = (0..n).map(|i| fld.pow(&fld.gen, i as u64 + 1)).collect();
    SmoothCharacter { exps, uvals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn character_grammar() {
        let params = FieldParams::new(5, 1, 1, false, Some(2)).unwrap();
        let fld = params.field();
        let chi = parse_character(&fld, 3, "exps:[0,1,2];uvals:[1,g^2,g^0]").unwrap();
        assert_eq!(chi.exps, vec![0, 1, 2]);
        assert_eq!(chi.uvals[0], fld.one());
        assert_eq!(chi.uvals[1], fld.pow(&fld.gen, 2));
        assert_eq!(chi.uvals[2], fld.one());
        assert!(parse_character(&fld, 3, "exps:[0];uvals:[1]").is_err());
        assert!(parse_character(&fld, 2, "exps:[0,0];uvals:[q,1]").is_err());
    }
}
