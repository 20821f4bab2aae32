//! Divide-and-conquer extraction of one minimal conflict set.
//!
//! Candidates are given least important first. The recursion splits the
//! candidate list at `floor(len / 2)`, searches the upper half against the
//! background extended by the lower half, then the lower half against the
//! background extended by what was found. The result is the conflict that
//! avoids important requirements as far as possible.

use crate::consistency::{check, guard_check, CheckStats, RequirementOracle};
use crate::error::DiagnosisError;
use crate::model::{ConflictSet, ReqSet};

/// Finds a minimal conflict among `candidates` relative to `background`.
///
/// Returns `Ok(None)` when `background ∪ candidates` is consistent. The two
/// precondition checks are metered as guard checks.
pub fn min_conflict<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    background: &ReqSet,
    candidates: &[usize],
    stats: &mut CheckStats,
) -> Result<Option<ConflictSet>, DiagnosisError> {
    if !guard_check(oracle, background, stats) {
        return Err(DiagnosisError::InconsistentBackground);
    }
    if candidates.is_empty() {
        return Ok(None);
    }
    let all = background.union(&candidates.iter().copied().collect());
    if guard_check(oracle, &all, stats) {
        return Ok(None);
    }
    Ok(Some(quick_xplain(oracle, background, candidates, stats)))
}

/// The recursion proper. The caller guarantees that `background` is
/// consistent and `background ∪ candidates` is not.
pub fn quick_xplain<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    background: &ReqSet,
    candidates: &[usize],
    stats: &mut CheckStats,
) -> ConflictSet {
    debug_assert!(!candidates.is_empty());
    qx(oracle, background, false, candidates, stats)
}

fn qx<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    background: &ReqSet,
    added: bool,
    candidates: &[usize],
    stats: &mut CheckStats,
) -> ReqSet {
    if added && !check(oracle, background, stats) {
        return ReqSet::new();
    }
    if candidates.len() == 1 {
        return ReqSet::from_iter([candidates[0]]);
    }
    let k = candidates.len() / 2;
    let (lower, upper) = candidates.split_at(k);
    let with_lower = background.union(&lower.iter().copied().collect());
    let upper_part = qx(oracle, &with_lower, true, upper, stats);
    let with_upper = background.union(&upper_part);
    let lower_part = qx(oracle, &with_upper, !upper_part.is_empty(), lower, stats);
    lower_part.union(&upper_part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ConflictFamilyOracle;
    use crate::car;
    use crate::consistency::ProblemOracle;

    fn set(v: &[usize]) -> ReqSet {
        v.iter().copied().collect()
    }

    #[test]
    fn car_first_conflict() {
        let p = car::problem();
        let mut o = ProblemOracle::new(&p);
        let mut stats = CheckStats::default();
        let cs = min_conflict(&mut o, &ReqSet::new(), &[0, 1, 2], &mut stats).unwrap();
        assert_eq!(cs, Some(set(&[0, 1])));
        assert_eq!(stats.guard_checks, 2);
    }

    #[test]
    fn car_conflict_without_c5() {
        let p = car::problem();
        let mut o = ProblemOracle::new(&p);
        let mut stats = CheckStats::default();
        let cs = min_conflict(&mut o, &ReqSet::new(), &[1, 2], &mut stats).unwrap();
        assert_eq!(cs, Some(set(&[1, 2])));
    }

    #[test]
    fn no_candidates() {
        let p = car::problem();
        let mut o = ProblemOracle::new(&p);
        let mut stats = CheckStats::default();
        assert_eq!(
            min_conflict(&mut o, &ReqSet::new(), &[], &mut stats).unwrap(),
            None
        );
    }

    #[test]
    fn consistent_candidates() {
        let mut o = ConflictFamilyOracle::new(4, vec![set(&[0, 3])]);
        let mut stats = CheckStats::default();
        assert_eq!(
            min_conflict(&mut o, &ReqSet::new(), &[0, 1, 2], &mut stats).unwrap(),
            None
        );
    }

    #[test]
    fn inconsistent_background_is_an_error() {
        let mut o = ConflictFamilyOracle::new(3, vec![set(&[0])]);
        let mut stats = CheckStats::default();
        assert_eq!(
            min_conflict(&mut o, &set(&[0]), &[1, 2], &mut stats),
            Err(DiagnosisError::InconsistentBackground)
        );
    }

    #[test]
    fn background_participates_in_conflicts() {
        // {0, 2} conflicts; with 0 in the background only 2 is blamed.
        let mut o = ConflictFamilyOracle::new(4, vec![set(&[0, 2]), set(&[1, 3])]);
        let mut stats = CheckStats::default();
        let cs = min_conflict(&mut o, &set(&[0]), &[1, 2, 3], &mut stats).unwrap();
        assert_eq!(cs, Some(set(&[2])));
    }

    #[test]
    fn prefers_conflicts_of_unimportant_requirements() {
        let mut o = ConflictFamilyOracle::new(6, vec![set(&[4, 5]), set(&[0, 1])]);
        let mut stats = CheckStats::default();
        let cs = min_conflict(&mut o, &ReqSet::new(), &[0, 1, 2, 3, 4, 5], &mut stats).unwrap();
        assert_eq!(cs, Some(set(&[0, 1])));
    }
}
