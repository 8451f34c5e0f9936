use super::*;
use crate::config::GameConfig;
use crate::engine::{PlayerAction, Seat, VotingTrigger};
use crate::map::GameMap;
use std::sync::Arc;
use Direction::*;

fn spread() -> WorldState {
    let seats = [
        Seat::impostor(5, 15, N),
        Seat::crew(35, 3, N),
        Seat::crew(35, 27, E),
        Seat::crew(2, 28, N),
        Seat::crew(20, 25, S),
    ];
    WorldState::from_seats(GameConfig::default(), GameMap::canonical(), &seats, 1).unwrap()
}

#[test]
fn bundle_shapes() {
    let s = WorldState::reset(GameConfig::default(), 5).unwrap();
    for mode in [RenderMode::Sprites, RenderMode::Rgb] {
        for obs in observe_all(&s, mode) {
            assert_eq!(obs.rgb().len(), 88 * 88 * 3);
            assert_eq!(obs.rgb_shape(), (88, 88, 3));
            assert_eq!(obs.vote_matrix.len(), 5);
            assert_eq!(obs.vote_matrix[0].len(), 7);
            assert_eq!(obs.inventory_fraction, 0.0);
            assert_eq!(obs.progress_fraction, 0.0);
        }
    }
}

#[test]
fn both_modes_agree() {
    let s = WorldState::reset(GameConfig::default(), 9).unwrap();
    for p in 0..5 {
        let a = observe(&s, p, RenderMode::Sprites);
        let b = observe(&s, p, RenderMode::Rgb);
        assert_eq!(a.rgb(), b.rgb());
        assert_eq!(a.sprites().unwrap(), b.sprites().unwrap());
    }
}

#[test]
fn observer_is_drawn_facing_up() {
    let s = spread();
    for p in 0..5 {
        let grid = sprite_grid(&s, p);
        let me = grid.observer().player.unwrap();
        assert_eq!(me.facing, RelFacing::Up);
        assert_eq!(me.color, s.player(p).color);
        assert!(!me.frozen);
    }
}

#[test]
fn island_observer_sees_only_itself() {
    let map = GameMap::parse_lenient("island", "5~~~~~~~~~~~67012JJJ\n").unwrap();
    let mut cfg = GameConfig::default();
    cfg.num_players = 3;
    let seats = [
        Seat::impostor(0, 0, N),
        Seat::crew(12, 0, N),
        Seat::crew(13, 0, N),
    ];
    let s = WorldState::from_seats(cfg, Arc::new(map), &seats, 0).unwrap();
    let rgb = render_rgb(&s, 0);
    let stride = RGB_SIZE * 3;
    for row in 0..VIEW_SIZE {
        for col in 0..VIEW_SIZE {
            let lit = (0..SPRITE_SIZE).any(|y| {
                let o = (row * SPRITE_SIZE + y) * stride + col * SPRITE_SIZE * 3;
                rgb[o..o + SPRITE_SIZE * 3].iter().any(|b| *b != 0)
            });
            assert_eq!(lit, (row, col) == (OBSERVER_ROW, OBSERVER_COL), "block {row},{col}");
        }
    }
}

#[test]
fn others_are_drawn_relative_to_viewer() {
    let seats = [
        Seat::impostor(5, 15, E),
        Seat::crew(5, 13, S),
        Seat::crew(35, 27, E),
        Seat::crew(2, 28, N),
        Seat::crew(20, 25, S),
    ];
    let s = WorldState::from_seats(GameConfig::default(), GameMap::canonical(), &seats, 1).unwrap();
    let grid = sprite_grid(&s, 0);
    // Facing east, a player two cells north is two cells to the left.
    let other = grid.at_offset(0, -2).unwrap().player.unwrap();
    assert_eq!(other.color, 1);
    assert_eq!(other.facing, RelFacing::Right);
    let back = sprite_grid(&s, 1);
    let seen = back.at_offset(2, 0).unwrap().player.unwrap();
    assert_eq!(seen.color, 0);
    assert_eq!(seen.facing, RelFacing::Left);
}

#[test]
fn pads_walls_and_beams_render() {
    let seats = [
        Seat::impostor(3, 6, N),
        Seat::crew(3, 4, S),
        Seat::crew(35, 27, E),
        Seat::crew(2, 28, N),
        Seat::crew(20, 25, S),
    ];
    let mut s = WorldState::from_seats(GameConfig::default(), GameMap::canonical(), &seats, 1).unwrap();
    let mut a = vec![PlayerAction::Noop; 5];
    a[0] = PlayerAction::Fire;
    s.step(&a).unwrap();
    let grid = sprite_grid(&s, 0);
    assert_eq!(grid.at_offset(3, 0).unwrap().tile, Tile::PadFull);
    assert_eq!(grid.at_offset(0, -3).unwrap().tile, Tile::Wall);
    let victim = grid.at_offset(2, 0).unwrap();
    assert!(victim.beam);
    assert!(victim.player.unwrap().frozen);
    assert!(grid.at_offset(1, 1).unwrap().beam);
    assert!(!grid.at_offset(3, 0).unwrap().beam);
    // The overlay lasts one step.
    s.step(&[PlayerAction::Noop; 5]).unwrap();
    assert!(!sprite_grid(&s, 0).cells().iter().any(|c| c.beam));

    s.set_pose(3, Cell::new(3, 2), N).unwrap();
    s.step(&[PlayerAction::Noop; 5]).unwrap();
    s.set_pose(3, Cell::new(2, 2), N).unwrap();
    s.step(&[PlayerAction::Noop; 5]).unwrap();
}

#[test]
fn empty_pad_renders_empty() {
    let seats = [
        Seat::impostor(5, 15, N),
        Seat::crew(3, 4, N),
        Seat::crew(35, 27, E),
        Seat::crew(2, 28, N),
        Seat::crew(20, 25, S),
    ];
    let mut s = WorldState::from_seats(GameConfig::default(), GameMap::canonical(), &seats, 1).unwrap();
    let mut a = vec![PlayerAction::Noop; 5];
    a[1] = PlayerAction::MoveN;
    s.step(&a).unwrap();
    s.step(&[PlayerAction::Noop; 5]).unwrap();
    a[1] = PlayerAction::MoveS;
    s.step(&a).unwrap();
    let grid = sprite_grid(&s, 1);
    assert_eq!(grid.at_offset(1, 0).unwrap().tile, Tile::PadEmpty);
    assert_eq!(observe(&s, 1, RenderMode::Sprites).inventory_fraction, 0.5);
}

#[test]
fn vote_matrix_rows() {
    let mut s = spread();
    let m = vote_matrix(&s);
    for row in m {
        assert_eq!(row.iter().map(|v| *v as u32).sum::<u32>(), 1);
        assert_eq!(row[ABSTAIN_COL], 1);
    }
    s.begin_voting(VotingTrigger::Timer);
    let mut a = vec![PlayerAction::Noop; 5];
    a[2] = PlayerAction::VoteFor(4);
    s.step(&a).unwrap();
    let m = vote_matrix(&s);
    assert_eq!(m[2][4], 1);
    a[2] = PlayerAction::VoteFor(1);
    s.step(&a).unwrap();
    assert_eq!(vote_matrix(&s)[2][1], 1);
    assert_eq!(vote_matrix(&s)[2][4], 0);
}

#[test]
fn frozen_rows_read_inactive() {
    let seats = [
        Seat::impostor(5, 27, N),
        Seat::crew(35, 3, N),
        Seat::crew(35, 27, E),
        Seat::crew(5, 26, N),
        Seat::crew(20, 25, S),
    ];
    let mut s = WorldState::from_seats(GameConfig::default(), GameMap::canonical(), &seats, 1).unwrap();
    let mut a = vec![PlayerAction::Noop; 5];
    a[0] = PlayerAction::Fire;
    s.step(&a).unwrap();
    assert_eq!(vote_matrix(&s)[3][INACTIVE_COL], 1);
    assert!(sprite_grid(&s, 3).observer().player.unwrap().frozen);
}

#[test]
fn unused_seats_read_inactive() {
    let map = GameMap::parse_lenient("island", "5~~~~~~~~~~~67012JJJ\n").unwrap();
    let mut cfg = GameConfig::default();
    cfg.num_players = 3;
    let seats = [Seat::impostor(0, 0, N), Seat::crew(12, 0, N), Seat::crew(13, 0, N)];
    let s = WorldState::from_seats(cfg, Arc::new(map), &seats, 0).unwrap();
    let m = vote_matrix(&s);
    assert_eq!(m[3][INACTIVE_COL], 1);
    assert_eq!(m[4][INACTIVE_COL], 1);
    assert_eq!(m[2][ABSTAIN_COL], 1);
}

#[test]
fn privileged_identity_and_distance() {
    let seats = [
        Seat::crew(1, 1, N),
        Seat::crew(4, 5, N),
        Seat::impostor(35, 27, E),
        Seat::crew(2, 28, N),
        Seat::crew(20, 25, S),
    ];
    let s = WorldState::from_seats(GameConfig::default(), GameMap::canonical(), &seats, 1).unwrap();
    let info = privileged_info(&s, 0);
    assert_eq!(info.identity, vec![0, 0, 1, 0, 0]);
    assert_eq!(info.distances[0], 0.0);
    assert_eq!(info.distances[1], 5.0);
    assert!(info.distances.iter().all(|d| *d >= 0.0));
}

#[test]
fn spectator_frame_shape() {
    let s = spread();
    let f = spectator_frame(&s);
    assert_eq!((f.height, f.width), (248, 320));
    assert_eq!(f.rgb().len(), 248 * 320 * 3);
    assert_eq!(f.overlay.players.len(), 5);
    assert_eq!(f.overlay.progress_fraction, 0.0);
}

#[test]
fn png_round_trip() {
    let s = spread();
    let rgb = render_rgb(&s, 2);
    let png = encode_png(&rgb, 88, 88).unwrap();
    let (w, h, back) = decode_png(&png).unwrap();
    assert_eq!((w, h), (88, 88));
    assert_eq!(back, rgb);
}

#[test]
fn voting_room_detection() {
    let mut s = spread();
    assert!(!observe(&s, 0, RenderMode::Sprites).in_voting_room().unwrap());
    s.begin_voting(VotingTrigger::Timer);
    for p in 0..5 {
        assert!(observe(&s, p, RenderMode::Rgb).in_voting_room().unwrap());
    }
}

#[test]
fn garbage_rgb_is_rejected() {
    assert_eq!(SpriteGrid::decode(&[0; 10]), Err(ObservationError::BadLength(10)));
    assert_eq!(SpriteGrid::decode(&vec![7; RGB_BYTES]), Err(ObservationError::Undecodable));
}
