use super::*;
use crate::config::GameConfig;
use crate::engine::{Phase, Seat, VotingTrigger};
use crate::geometry::{Cell, Direction};
use crate::observation::{observe, RenderMode};

fn seated(seats: &[Seat]) -> WorldState {
    WorldState::from_seats(GameConfig::default(), GameMap::canonical(), seats, 3).unwrap()
}

/// A floor cell with two more floor cells north of it, away from everything
/// else on the map.
fn open_column(nav: &Navigator) -> Cell {
    nav.standable_cells()
        .find(|c| {
            (0..=2).all(|k| nav.class(c.offset(0, -k)) == nav::TileClass::Floor)
                && (-1..=1).all(|dx| nav.walkable(c.offset(dx, -1)) && nav.walkable(c.offset(dx, -2)))
        })
        .expect("the map has open floor")
}

fn far_crew() -> [Seat; 3] {
    [
        Seat::crew(35, 3, Direction::N),
        Seat::crew(35, 27, Direction::N),
        Seat::crew(2, 28, Direction::N),
    ]
}

#[test]
fn idle_only_noops() {
    let s = WorldState::reset(GameConfig::default(), 1).unwrap();
    let mut p = PolicySpec::new(PolicyKind::Idle).build(PolicyContext::from_state(&s, 0, None), 0);
    for _ in 0..10 {
        assert_eq!(p.act(&observe(&s, 0, RenderMode::Sprites)), PlayerAction::Noop);
    }
}

#[test]
fn random_votes_are_uniform_over_players_and_abstain() {
    let mut s = WorldState::reset(GameConfig::default(), 2).unwrap();
    s.begin_voting(VotingTrigger::Timer);
    let obs = observe(&s, 1, RenderMode::Sprites);
    let mut p = RandomPolicy::new(PolicyContext::from_state(&s, 1, None), 99);
    let mut counts = [0u32; 6];
    let n = 12_000;
    for _ in 0..n {
        match p.act(&obs) {
            PlayerAction::VoteFor(t) => counts[t as usize] += 1,
            PlayerAction::VoteAbstain => counts[5] += 1,
            other => panic!("{other:?} during voting"),
        }
    }
    // Chi-square with 5 degrees of freedom; 20.5 is the 0.999 quantile.
    let expected = f64::from(n) / 6.0;
    let chi: f64 = counts.iter().map(|&c| (f64::from(c) - expected).powi(2) / expected).sum();
    assert!(chi < 20.5, "{counts:?} chi {chi}");
}

#[test]
fn random_crew_never_fires_but_impostor_does() {
    let s = WorldState::reset(GameConfig::default(), 4).unwrap();
    let impostor = s.roles().iter().position(|r| *r == Role::Impostor).unwrap();
    let crew = (impostor + 1) % 5;
    let mut fired = [0u32; 2];
    for (k, id) in [crew, impostor].into_iter().enumerate() {
        let mut p = RandomPolicy::new(PolicyContext::from_state(&s, id, None), 5);
        let obs = observe(&s, id, RenderMode::Sprites);
        for _ in 0..4000 {
            let a = p.act(&obs);
            assert!(!a.is_vote());
            fired[k] += u32::from(a == PlayerAction::Fire);
        }
    }
    assert_eq!(fired[0], 0);
    assert!(fired[1] > 300, "{fired:?}");
}

#[test]
fn every_preset_only_emits_legal_actions() {
    let cfg = GameConfig::default();
    for name in PRESETS {
        let roster = Roster::preset(name).unwrap();
        let mut total = 0;
        for seed in 0.. {
            if total >= 10_000 {
                break;
            }
            let mut s = WorldState::reset(cfg.clone(), seed).unwrap();
            let mut policies = roster.instantiate(&s, seed).unwrap();
            while !s.is_terminal() {
                let acts: Vec<PlayerAction> = policies
                    .iter_mut()
                    .enumerate()
                    .map(|(p, pol)| pol.act(&observe(&s, p, RenderMode::Sprites)))
                    .collect();
                for (p, a) in acts.iter().enumerate() {
                    let role = s.player(p).role;
                    match s.phase() {
                        Phase::Situation => {
                            assert!(!a.is_vote(), "{name}: vote outside voting by {p} {:?} {:?}", s.player(p).status, s.player(p).position);
                            if role == Role::Crewmate {
                                assert_ne!(*a, PlayerAction::Fire, "{name}: crew fired");
                            }
                        }
                        Phase::Voting => {
                            if name != "collectors-vs-idle" && name != "idle-vs-chaser" && s.player(p).is_active() {
                                assert!(
                                    a.is_vote() || *a == PlayerAction::Noop,
                                    "{name}: {a:?} while voting"
                                );
                            }
                            if let PlayerAction::VoteFor(t) = a {
                                assert!((*t as usize) < 5);
                            }
                        }
                    }
                }
                s.step(&acts).unwrap();
                total += 1;
            }
        }
    }
}

#[test]
fn policies_are_deterministic_given_their_seed() {
    let cfg = GameConfig::default();
    let roster = Roster::mixed();
    let play = || {
        let mut s = WorldState::reset(cfg.clone(), 17).unwrap();
        let mut policies = roster.instantiate(&s, 17).unwrap();
        let mut log = Vec::new();
        for _ in 0..400 {
            if s.is_terminal() {
                break;
            }
            let acts: Vec<PlayerAction> = policies
                .iter_mut()
                .enumerate()
                .map(|(p, pol)| pol.act(&observe(&s, p, RenderMode::Sprites)))
                .collect();
            s.step(&acts).unwrap();
            log.push(acts);
        }
        (log, s.digest())
    };
    assert_eq!(play(), play());
}

#[test]
fn seeds_differ_between_agents_and_episodes() {
    let s = WorldState::reset(GameConfig::default(), 0).unwrap();
    let roster = Roster::preset("random").unwrap();
    let trace = |episode_seed: u64| {
        let mut pols = roster.instantiate(&s, episode_seed).unwrap();
        (0..5)
            .map(|p| {
                let obs = observe(&s, p, RenderMode::Sprites);
                (0..30).map(|_| pols[p].act(&obs)).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    let a = trace(0);
    assert_ne!(a[1], a[2]);
    assert_ne!(a, trace(1));
}

#[test]
fn collector_closes_in_on_fuel() {
    let s0 = seated(&[
        Seat::impostor(5, 15, Direction::N),
        Seat::crew(20, 25, Direction::N),
        Seat::crew(35, 3, Direction::N),
        Seat::crew(35, 27, Direction::N),
        Seat::crew(2, 28, Direction::N),
    ]);
    let nav = Navigator::for_map(&s0.shared_map());
    let pads = s0.map().pads().to_vec();
    let mut s = s0.clone();
    let mut p = Collector::new(PolicyContext::from_state(&s, 1, None), PolicyParams::default(), 1);
    let start = nav.distance_to_any(s.player(1).position, &pads);
    let mut last = start;
    for _ in 0..60 {
        let a = p.act(&observe(&s, 1, RenderMode::Sprites));
        let mut acts = vec![PlayerAction::Noop; 5];
        acts[1] = a;
        s.step(&acts).unwrap();
        if s.player(1).inventory > 0 {
            return;
        }
        let d = nav.distance_to_any(s.player(1).position, &pads);
        if a.move_direction().is_some() {
            assert_eq!(d + 1, last, "{a:?} did not shorten the path");
        } else {
            assert_eq!(d, last);
        }
        last = d;
    }
    panic!("no pickup within 60 steps, distance {start} -> {last}");
}

#[test]
fn chaser_fires_at_a_target_two_ahead() {
    let map = GameMap::canonical();
    let nav = Navigator::for_map(&map);
    let c = open_column(&nav);
    let [a, b, _] = far_crew();
    let mut seats = vec![Seat::impostor(c.x, c.y, Direction::N), Seat::crew(c.x, c.y - 2, Direction::S)];
    seats.extend([a, b, Seat::crew(2, 28, Direction::N)]);
    let s = seated(&seats);
    let spec = PolicySpec::new(PolicyKind::ChaserImpostor);
    let mut p = spec.build(PolicyContext::from_state(&s, 0, None), 1);
    assert_eq!(p.act(&observe(&s, 0, RenderMode::Sprites)), PlayerAction::Fire);
}

#[test]
fn chaser_holds_fire_during_cooldown() {
    let map = GameMap::canonical();
    let nav = Navigator::for_map(&map);
    let c = open_column(&nav);
    let [a, b, d] = far_crew();
    let mut s = seated(&[
        Seat::impostor(c.x, c.y, Direction::N),
        Seat::crew(c.x, c.y - 1, Direction::S),
        a,
        b,
        d,
    ]);
    let mut p = Chaser::new(PolicyContext::from_state(&s, 0, None), PolicyParams::default(), None, 1);
    let mut acts = vec![PlayerAction::Noop; 5];
    acts[0] = p.act(&observe(&s, 0, RenderMode::Sprites));
    assert_eq!(acts[0], PlayerAction::Fire);
    s.step(&acts).unwrap();
    // The witness-free freeze leaves the game in the situation phase.
    if s.phase() == Phase::Situation {
        for _ in 0..10 {
            assert_ne!(p.act(&observe(&s, 0, RenderMode::Sprites)), PlayerAction::Fire);
        }
    }
}

#[test]
fn chaser_abstains_first_then_follows_the_published_majority() {
    let mut s = WorldState::reset(GameConfig::default(), 8).unwrap();
    let imp = s.roles().iter().position(|r| *r == Role::Impostor).unwrap();
    let crew: Vec<usize> = (0..5).filter(|&p| p != imp).collect();
    let mut p = Chaser::new(PolicyContext::from_state(&s, imp, None), PolicyParams::default(), None, 1);
    p.act(&observe(&s, imp, RenderMode::Sprites));
    s.begin_voting(VotingTrigger::Timer);
    assert_eq!(p.act(&observe(&s, imp, RenderMode::Sprites)), PlayerAction::VoteAbstain);
    let mut acts = vec![PlayerAction::VoteAbstain; 5];
    acts[crew[0]] = PlayerAction::VoteFor(crew[3] as u8);
    acts[crew[1]] = PlayerAction::VoteFor(crew[3] as u8);
    acts[crew[2]] = PlayerAction::VoteFor(imp as u8);
    s.step(&acts).unwrap();
    assert_eq!(p.act(&observe(&s, imp, RenderMode::Sprites)), PlayerAction::VoteFor(crew[3] as u8));
}

#[test]
fn paired_collector_echoes_its_partner_without_suspicion() {
    let mut s = WorldState::reset(GameConfig::default(), 9).unwrap();
    let imp = s.roles().iter().position(|r| *r == Role::Impostor).unwrap();
    let crew: Vec<usize> = (0..5).filter(|&p| p != imp).collect();
    let me = crew[0];
    let partner = crew[1];
    let mut p = Collector::new(PolicyContext::from_state(&s, me, Some(partner)), PolicyParams::default(), 1);
    p.act(&observe(&s, me, RenderMode::Sprites));
    s.begin_voting(VotingTrigger::Timer);
    assert_eq!(p.act(&observe(&s, me, RenderMode::Sprites)), PlayerAction::VoteAbstain);
    let mut acts = vec![PlayerAction::VoteAbstain; 5];
    acts[partner] = PlayerAction::VoteFor(crew[2] as u8);
    s.step(&acts).unwrap();
    assert_eq!(p.act(&observe(&s, me, RenderMode::Sprites)), PlayerAction::VoteFor(crew[2] as u8));
}

#[test]
fn presets_round_trip_through_toml() {
    for name in PRESETS {
        let r = Roster::preset(name).unwrap();
        let text = r.to_toml_string();
        assert_eq!(Roster::from_toml_str(&text).unwrap(), r, "{name}\n{text}");
        r.validate(5, 1).unwrap();
    }
}

#[test]
fn roster_toml_reads_kinds_and_params() {
    let text = r#"
        [[agent]]
        kind = "chaser_impostor"
        trigger_rate = 0.5

        [[agent]]
        kind = "paired_collector_crew"
        partner = 2

        [[agent]]
        kind = "paired_collector_crew"
        partner = 1
        seed = 9

        [[agent]]
        kind = "collector_crew"

        [[agent]]
        kind = "idle"
    "#;
    let r = Roster::from_toml_str(text).unwrap();
    assert_eq!(r.agents[0].params.trigger_rate, 0.5);
    assert_eq!(r.agents[2].seed, 9);
    assert_eq!(r.agents[1].params.partner, Some(2));
    r.validate(5, 1).unwrap();
    assert!(matches!(
        Roster::from_toml_str("[[agent]]\nkind = \"idle\"\nspeed = 3\n"),
        Err(RosterError::Parse(_))
    ));
}

#[test]
fn roster_validation_errors() {
    let s = PolicySpec::new;
    let crew = || s(PolicyKind::CollectorCrew);
    let short = Roster::new(vec![s(PolicyKind::Idle)]);
    assert_eq!(short.validate(5, 1), Err(RosterError::Size { expected: 5, got: 1 }));
    let swapped = Roster::new(vec![crew(), crew(), crew(), crew(), crew()]);
    assert_eq!(
        swapped.validate(5, 1),
        Err(RosterError::RoleMismatch {
            agent: 0,
            kind: PolicyKind::CollectorCrew,
            role: Role::Impostor
        })
    );
    let chaser_crew = Roster::new(vec![s(PolicyKind::Idle), s(PolicyKind::ChaserImpostor), crew(), crew(), crew()]);
    assert!(matches!(chaser_crew.validate(5, 1), Err(RosterError::RoleMismatch { agent: 1, .. })));
    for bad in [0, 1, 5] {
        let r = Roster::new(vec![
            s(PolicyKind::Idle),
            crew().with(|p| p.partner = Some(bad)),
            crew(),
            crew(),
            crew(),
        ]);
        assert_eq!(r.validate(5, 1), Err(RosterError::BadPartner { agent: 1, partner: bad }));
    }
    assert!(matches!(Roster::preset("nope"), Err(RosterError::UnknownPreset(_))));
    assert!(matches!(Roster::resolve("/no/such/roster.toml"), Err(RosterError::Io { .. })));
}

#[test]
fn roster_assigns_impostor_agents_first() {
    let r = Roster::mixed();
    let roles = [Role::Crewmate, Role::Crewmate, Role::Impostor, Role::Crewmate, Role::Crewmate];
    assert_eq!(r.assign(&roles), vec![2, 0, 1, 3, 4]);
    for seed in 0..20 {
        let s = WorldState::reset(GameConfig::default(), seed).unwrap();
        let map = r.assign(&s.roles());
        assert_eq!(s.player(map[0]).role, Role::Impostor);
        assert!(map[1..].iter().all(|&p| s.player(p).role == Role::Crewmate));
    }
}

#[test]
fn resolve_reads_files_and_presets() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.toml");
    std::fs::write(&path, Roster::preset("camper").unwrap().to_toml_string()).unwrap();
    assert_eq!(Roster::resolve(path.to_str().unwrap()).unwrap(), Roster::preset("camper").unwrap());
    assert_eq!(Roster::resolve("paired").unwrap(), Roster::preset("paired").unwrap());
}

#[test]
fn context_exposes_only_public_facts() {
    let s = WorldState::reset(GameConfig::default(), 12).unwrap();
    let imp = s.roles().iter().position(|r| *r == Role::Impostor).unwrap();
    let crew = (imp + 1) % 5;
    let c = PolicyContext::from_state(&s, crew, None);
    assert_eq!(c.role, Role::Crewmate);
    assert!(c.teammates.is_empty());
    assert_eq!(c.seat_colors, s.colors());
    assert_eq!(c.rules.num_players, 5);
    let i = PolicyContext::from_state(&s, imp, None);
    assert!(i.teammates.is_empty());
}
