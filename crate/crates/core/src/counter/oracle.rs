//! Brute-force enumeration oracle: the ground truth the search engine is
//! verified against. Intentionally naive apart from per-clause bitmasks.

use num_bigint::BigUint;

use super::{CounterError, ModelCount};
use crate::fol::CnfInstance;

/// Enumeration is bounded to keep the oracle's runtime trivially safe.
pub const ORACLE_MAX_VARS: u32 = 24;

/// Counts by checking every assignment. Errors above [`ORACLE_MAX_VARS`]
/// variables.
pub fn oracle_count(c: &CnfInstance) -> Result<ModelCount, CounterError> {
    if c.var_count > ORACLE_MAX_VARS {
        return Err(CounterError::OracleTooLarge(c.var_count));
    }
    // A clause is satisfied by `m` iff it has a positive literal set in `m`
    // or a negative literal clear in `m`.
    let masks: Vec<(u32, u32)> = c
        .clauses
        .iter()
        .map(|clause| {
            let mut pos = 0u32;
            let mut neg = 0u32;
            for &l in clause {
                let bit = 1u32 << (l.unsigned_abs() - 1);
                if l > 0 {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            (pos, neg)
        })
        .collect();
    let mut count = 0u64;
    for m in 0..1u64 << c.var_count {
        let m = m as u32;
        if masks.iter().all(|&(pos, neg)| m & pos != 0 || !m & neg != 0) {
            count += 1;
        }
    }
    Ok(ModelCount(BigUint::from(count)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_small_instances() {
        let c = CnfInstance::from_clauses(3, vec![vec![-1, -2], vec![-1, 2, -3]]).unwrap();
        assert_eq!(oracle_count(&c).unwrap(), ModelCount::from(5));
        let unit = CnfInstance::from_clauses(1, vec![vec![1]]).unwrap();
        assert_eq!(oracle_count(&unit).unwrap(), ModelCount::one());
        assert_eq!(
            oracle_count(&CnfInstance::tautology(8)).unwrap(),
            ModelCount::pow2(8)
        );
        assert_eq!(
            oracle_count(&CnfInstance::contradiction(2)).unwrap(),
            ModelCount::zero()
        );
    }

    #[test]
    fn refuses_large_instances() {
        let too_big = CnfInstance::tautology(ORACLE_MAX_VARS + 1);
        assert!(matches!(
            oracle_count(&too_big),
            Err(CounterError::OracleTooLarge(_))
        ));
    }
}
