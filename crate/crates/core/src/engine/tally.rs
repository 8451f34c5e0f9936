use super::types::{PlayerId, Status, TallyOutcome, VoteChoice};

/// Final-vote tally.
///
/// With `A` active players, a player is jailed when at least `ceil(A/2)`
/// active players' final rows target them and nobody else reaches the same
/// count. Abstentions count toward `A` only. Ties and empty candidate sets
/// jail no one.
pub fn tally_votes(ledger: &[VoteChoice], statuses: &[Status]) -> TallyOutcome {
    let n = ledger.len();
    let active = statuses.iter().filter(|s| **s == Status::Active).count();
    if active == 0 {
        return TallyOutcome::NoOne;
    }
    let threshold = active.div_ceil(2);
    let mut votes = vec![0usize; n];
    for (row, status) in ledger.iter().zip(statuses) {
        if let (VoteChoice::Target(t), Status::Active) = (row, status) {
            if let Some(v) = votes.get_mut(*t as usize) {
                *v += 1;
            }
        }
    }
    let best = votes.iter().copied().max().unwrap_or(0);
    if best < threshold {
        return TallyOutcome::NoOne;
    }
    let mut leaders = votes.iter().enumerate().filter(|(_, v)| **v == best);
    match (leaders.next(), leaders.next()) {
        (Some((p, _)), None) => TallyOutcome::Jailed(p as PlayerId),
        _ => TallyOutcome::NoOne,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use VoteChoice::*;

    fn all_active(n: usize) -> Vec<Status> {
        vec![Status::Active; n]
    }

    #[test]
    fn majority_of_five_jails() {
        let ledger = [Target(2), Target(2), Target(2), Abstain, Abstain];
        assert_eq!(tally_votes(&ledger, &all_active(5)), TallyOutcome::Jailed(2));
    }

    #[test]
    fn all_abstain_is_no_one() {
        assert_eq!(tally_votes(&[Abstain; 5], &all_active(5)), TallyOutcome::NoOne);
    }

    #[test]
    fn two_two_tie_is_no_one() {
        let ledger = [Target(1), Target(1), Target(2), Target(2), Inactive];
        let mut st = all_active(5);
        st[4] = Status::Frozen;
        assert_eq!(tally_votes(&ledger, &st), TallyOutcome::NoOne);
    }

    #[test]
    fn half_of_four_is_enough() {
        let ledger = [Target(3), Target(3), Abstain, Abstain, Inactive];
        let mut st = all_active(5);
        st[4] = Status::Jailed;
        assert_eq!(tally_votes(&ledger, &st), TallyOutcome::Jailed(3));
    }

    #[test]
    fn inactive_rows_never_count() {
        // Stale targets on inactive rows must not be counted.
        let ledger = [Target(0), Target(0), Target(0), Abstain, Abstain];
        let st = [Status::Active, Status::Frozen, Status::Frozen, Status::Active, Status::Active];
        assert_eq!(tally_votes(&ledger, &st), TallyOutcome::NoOne);
    }
}
