//! A scripted player that follows each level's instructions. It drives the
//! level-3 winnability check and produces reference playthrough scripts.

use crate::geom::Direction;
use crate::gradient::{junction_options, Level2Layout};
use crate::level::LevelSpec;
use crate::model::InputCommand;
use crate::state::{LevelState, SessionState};
use crate::supervised::Phase;

/// The command a careful player issues next, or `None` once the level is
/// completed and its outcome acknowledged.
pub fn next_command(state: &SessionState) -> Option<InputCommand> {
    if state.modal.is_some() {
        return Some(InputCommand::Acknowledge);
    }
    if state.is_completed() {
        return None;
    }
    let pos = state.player().pos;
    let dir = match (state.spec.as_ref(), &state.level_state) {
        (LevelSpec::Supervised(s), LevelState::Supervised(st)) => match st.phase {
            Phase::Training => {
                let path = &s.overworld.red_path;
                path.get(st.recorded.len() + 1).and_then(|next| pos.direction_to(*next))
            }
            Phase::Inference => st.recorded.get(st.replay_index).copied(),
            Phase::Completed => None,
        },
        (LevelSpec::Gradient(s), LevelState::Gradient(_)) => {
            let layout = Level2Layout::new(s);
            match junction_options(s, &layout, pos) {
                Ok(opts) => opts.iter().max_by(|a, b| a.slope.total_cmp(&b.slope)).map(|o| o.direction),
                Err(_) => layout.edge_at(pos).and_then(|e| {
                    let tiles = layout.edge_tiles(e)?;
                    let i = tiles.iter().position(|t| *t == pos)?;
                    pos.direction_to(tiles[i + 1])
                }),
            }
        }
        (LevelSpec::Knn(s), LevelState::Knn(st)) => {
            let zone = s.arrival_zone(st.active_bob as usize);
            let dist = s.town.distances_to_set(&zone);
            match dist.get(pos) {
                Some(0) | None => s
                    .town
                    .open_neighbors(pos)
                    .find(|(_, p)| dist.get(*p) == Some(0))
                    .or_else(|| s.town.open_neighbors(pos).next())
                    .map(|(d, _)| d),
                Some(here) => s.town.open_neighbors(pos).find(|(_, p)| dist.get(*p) == Some(here - 1)).map(|(d, _)| d),
            }
        }
        _ => None,
    };
    // A level the bot cannot read still gets a command so callers make progress.
    Some(InputCommand::Move(dir.unwrap_or(Direction::North)))
}
