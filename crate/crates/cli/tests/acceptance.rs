//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mlquest_core::autoplay::next_command;
use mlquest_core::event::{EventKind, RestartReason, WarningReason};
use mlquest_core::geom::{Direction, GridPos, TileGrid};
use mlquest_core::gradient::Level2Spec;
use mlquest_core::knn::{VoteTally, DEFAULT_K, ENEMY_VOTES, PLAYER_VOTES};
use mlquest_core::levelgen::{generate_campaign, generate_level1, generate_level2, GenConfig};
use mlquest_core::model::{InputCommand, ModalKind, Side};
use mlquest_core::session::{replay, Campaign};
use mlquest_core::supervised::Level1Spec;
use mlquest_core::testkit::broken_specs;
use mlquest_core::{GameEvent, LevelFile, LevelSpec, Rng, SessionState};
use mlquest_survey::stats::{pearson, SdKind};
use mlquest_survey::report::round_to;
use mlquest_survey::{demographics, item_stats, report, Factor, Participant, ReportOptions, SurveyDataset, SurveyInstrument};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

const MOVES: [Direction; 4] = [Direction::North, Direction::South, Direction::East, Direction::West];

// 1. Majority vote over every arrival order.
fn knn_orders() -> Check {
    let start = Instant::now();
    let agents = [(0u32, Side::Player, PLAYER_VOTES), (1, Side::RedMen, ENEMY_VOTES), (2, Side::RedMen, ENEMY_VOTES)];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in perms {
        let mut tally = VoteTally::new(DEFAULT_K).map_err(|e| e.to_string())?;
        let mut winner = None;
        for &i in &p {
            let (id, side, votes) = agents[i];
            if let Some(w) = tally.register(id, side, votes).map_err(|e| e.to_string())? {
                winner = Some(w);
                break;
            }
        }
        let player_pos = p.iter().position(|i| *i == 0).expect("player in order");
        let second_enemy = p.iter().enumerate().filter(|(_, i)| **i != 0).nth(1).expect("two enemies").0;
        let expect = if player_pos < second_enemy { Side::Player } else { Side::RedMen };
        ensure(winner == Some(expect), || format!("order {p:?}: got {winner:?}, want {expect:?}"))?;
    }
    within(start, Duration::from_secs(1))?;
    Ok("6/6 orders".into())
}

fn training_then(spec: &Level1Spec, script: &[Direction]) -> (SessionState, Vec<GameEvent>) {
    let mut st = SessionState::new(Arc::new(LevelSpec::Supervised(spec.clone())), 0, 0).expect("level 1 session");
    for d in &spec.canonical_sequence {
        st.tick(InputCommand::Move(*d)).expect("training follows the red path");
    }
    let mark = st.log.len();
    for d in script {
        let _ = st.tick(InputCommand::Move(*d));
    }
    let tail = st.log[mark..].to_vec();
    (st, tail)
}

fn maze_with_moves(pred: impl Fn(usize) -> bool, from_seed: u64, w: u32, h: u32) -> Option<(u64, Level1Spec)> {
    (from_seed..from_seed + 5000).find_map(|seed| {
        let cfg = GenConfig { width: w, height: h, diamonds: 1, ..GenConfig::with_seed(seed) };
        let spec = generate_level1(&cfg).ok()?;
        pred(spec.canonical_sequence.len()).then_some((seed, spec))
    })
}

// 2. Replaying the recorded moves is the only way through.
fn level1_replay() -> Check {
    let start = Instant::now();
    let (_, spec) = maze_with_moves(|n| n == 3, 0, 5, 5).ok_or("no 3-move maze")?;
    let mut completions = 0;
    let mut restarts = 0;
    for code in 0..64usize {
        let script = [MOVES[code & 3], MOVES[(code >> 2) & 3], MOVES[code >> 4]];
        let (st, tail) = training_then(&spec, &script);
        if st.is_completed() {
            completions += 1;
            ensure(script == spec.canonical_sequence[..], || format!("script {script:?} completed"))?;
        }
        let warned = tail.iter().any(|e| e.kind == EventKind::Warning { reason: WarningReason::WrongPath });
        let restarted = tail.iter().any(|e| e.kind == EventKind::Restart { reason: RestartReason::Deviation });
        if warned && restarted {
            restarts += 1;
        }
    }
    ensure(completions == 1 && restarts == 63, || format!("{completions} completions, {restarts} warning+restart logs"))?;

    let mut rng = Rng::seed_from_u64(2024);
    let mut mazes = 0;
    let mut seed = 0;
    while mazes < 20 {
        let (s, spec) = maze_with_moves(|n| n <= 6, seed, 7, 7).ok_or("no short maze")?;
        seed = s + 1;
        mazes += 1;
        for _ in 0..200 {
            let mut script = spec.canonical_sequence.clone();
            let i = rng.index(script.len());
            let others: Vec<Direction> = MOVES.into_iter().filter(|d| *d != script[i]).collect();
            script[i] = others[rng.index(3)];
            for later in script.iter_mut().skip(i + 1) {
                *later = MOVES[rng.index(4)];
            }
            let (st, _) = training_then(&spec, &script);
            ensure(!st.is_completed(), || format!("deviating script {script:?} completed maze seed {s}"))?;
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok("1 completion, 63 restarts; 20 mazes x 200 deviations never complete".into())
}

/// Simple tile paths from `a` to `b`, counted up to `cap`.
fn tile_paths(grid: &TileGrid, a: GridPos, b: GridPos, cap: usize) -> usize {
    fn go(g: &TileGrid, at: GridPos, b: GridPos, seen: &mut BTreeSet<GridPos>, n: &mut usize, cap: usize) {
        if *n >= cap {
            return;
        }
        if at == b {
            *n += 1;
            return;
        }
        for d in MOVES {
            if let Some(p) = at.step(d).filter(|p| g.is_open(*p)) {
                if seen.insert(p) {
                    go(g, p, b, seen, n, cap);
                    seen.remove(&p);
                }
            }
        }
    }
    let mut seen = BTreeSet::from([a]);
    let mut n = 0;
    go(grid, a, b, &mut seen, &mut n, cap);
    n
}

fn greedy_reaches_goal(s: &Level2Spec) -> Result<(), String> {
    let mut at = s.start;
    for _ in 0..=s.junctions.len() {
        if at == s.goal {
            return Ok(());
        }
        let best = s.edges.iter().filter(|e| e.from == at).max_by(|a, b| a.slope.total_cmp(&b.slope)).ok_or(format!("dead end at {at}"))?;
        at = best.to;
    }
    Err("greedy walk loops".into())
}

// 3. Steepest descent is the one route down.
fn level2_descent() -> Check {
    let start = Instant::now();
    for seed in 0..100 {
        let s = generate_level2(&GenConfig::with_seed(seed)).map_err(|e| e.to_string())?;
        ensure(s.junctions.len() <= 50, || format!("seed {seed}: {} junctions", s.junctions.len()))?;
        greedy_reaches_goal(&s).map_err(|e| format!("seed {seed}: {e}"))?;
        let routes = tile_paths(&s.maze, s.start_pos(), s.goal_pos(), 2);
        ensure(routes == 1, || format!("seed {seed}: {routes} goal routes"))?;
        for e in &s.edges {
            let (a, b) = (s.junctions[e.from as usize].elevation, s.junctions[e.to as usize].elevation);
            let err = (e.slope - (a - b) / f64::from(e.length)).abs();
            ensure(err <= 1e-9, || format!("seed {seed} edge {}: slope off by {err}", e.id))?;
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok("100 specs".into())
}

const NOISE: [InputCommand; 7] = [
    InputCommand::Move(Direction::North),
    InputCommand::Move(Direction::South),
    InputCommand::Move(Direction::East),
    InputCommand::Move(Direction::West),
    InputCommand::Acknowledge,
    InputCommand::Restart,
    InputCommand::Next,
];

fn fuzz_script(levels: &[LevelSpec], seed: u64, rng: &mut Rng) -> Vec<InputCommand> {
    let mut c = Campaign::new(levels.to_vec(), seed).expect("generated campaign");
    let len = 50 + rng.index(700);
    (0..len)
        .map(|_| {
            let cmd = if rng.below(100) < 15 { NOISE[rng.index(NOISE.len())] } else { next_command(&c.current).unwrap_or(InputCommand::Next) };
            let _ = c.apply(cmd);
            cmd
        })
        .collect()
}

// 4. Same inputs, same log; saving mid-run changes nothing.
fn determinism() -> Check {
    let mut rng = Rng::seed_from_u64(77);
    for _ in 0..50 {
        let seed = rng.below(1_000_000);
        let levels = generate_campaign(seed).map_err(|e| e.to_string())?.to_vec();
        let script = fuzz_script(&levels, seed, &mut rng);
        let a = replay(levels.clone(), seed, &script).map_err(|e| e.to_string())?;
        let b = replay(levels.clone(), seed, &script).map_err(|e| e.to_string())?;
        ensure(a.log_hash == b.log_hash, || format!("seed {seed}: hashes differ"))?;

        let cut = rng.index(script.len() + 1);
        let mut first = Campaign::new(levels, seed).map_err(|e| e.to_string())?;
        for cmd in &script[..cut] {
            let _ = first.apply(*cmd);
        }
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let path = dir.path().join("save.json");
        first.save(&path).map_err(|e| e.to_string())?;
        let mut second = Campaign::load(&path).map_err(|e| e.to_string())?;
        for cmd in &script[cut..] {
            let _ = second.apply(*cmd);
        }
        ensure(second.log_hash() == a.log_hash, || format!("seed {seed}: split at {cut} diverges"))?;
    }
    Ok("50 runs, identical hashes and split replays".into())
}

// 5. Levels open only after the previous outcome was read.
fn gating() -> Check {
    let mut rng = Rng::seed_from_u64(5);
    let mut reached_later = 0;
    for _ in 0..50 {
        let seed = rng.below(1_000_000);
        let levels = generate_campaign(seed).map_err(|e| e.to_string())?.to_vec();
        let script = fuzz_script(&levels, seed, &mut rng);
        let mut c = Campaign::new(levels, seed).map_err(|e| e.to_string())?;
        for cmd in script {
            let _ = c.apply(cmd);
            if !c.current.is_completed() {
                let snap = c.snapshot();
                let text = serde_json::to_string(&snap).map_err(|e| e.to_string())?;
                let outcome = c.current.spec.outcome();
                ensure(snap.modal.as_ref().is_none_or(|m| m.outcome.is_none()), || format!("seed {seed}: outcome modal before completion"))?;
                ensure(!text.contains(&outcome.definition) && !text.contains(&outcome.concept_name), || {
                    format!("seed {seed}: outcome text leaked at tick {}", c.current.tick)
                })?;
            }
        }
        let log = c.log();
        let mut cleared = 0u8;
        let mut shown = false;
        for e in &log {
            ensure(e.level <= cleared + 1, || format!("seed {seed}: level {} event before level {} was cleared", e.level, cleared + 1))?;
            match e.kind {
                EventKind::OutcomeDisplayed { level } if level == e.level => shown = true,
                EventKind::ModalAcknowledged { modal: ModalKind::Outcome } if shown => {
                    cleared = e.level;
                    shown = false;
                }
                _ => {}
            }
        }
        if c.level() > 1 {
            reached_later += 1;
        }
    }
    ensure(reached_later > 0, || "no fuzzed run left level 1".into())?;
    Ok(format!("50 fuzzed logs, {reached_later} reached later levels"))
}

fn direct_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

// 6. Survey statistics and the reconstructed fixture.
fn survey() -> Check {
    const CODES: [&str; 8] = ["EU1", "EU2", "U1", "U2", "U3", "I1", "I2", "C1"];
    let inst = SurveyInstrument::default();
    let mut rng = Rng::seed_from_u64(1000);
    for round in 0..1000 {
        let n = 2 + rng.index(60);
        let data = SurveyDataset {
            participants: (0..n)
                .map(|_| Participant {
                    likert: CODES.iter().map(|c| (c.to_string(), Some(1 + rng.below(5) as u8))).collect(),
                    demographics: Default::default(),
                })
                .collect(),
        };
        let cols: Vec<Vec<f64>> = CODES.iter().map(|c| data.responses(c).map(|v| v.into_iter().map(f64::from).collect())).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        for (code, xs) in CODES.iter().zip(&cols) {
            let s = item_stats::<f64>(&data, &inst, code, SdKind::Sample).map_err(|e| e.to_string())?;
            let m = xs.iter().sum::<f64>() / n as f64;
            let sd = ((xs.iter().map(|x| x * x).sum::<f64>() - n as f64 * m * m) / (n as f64 - 1.0)).max(0.0).sqrt();
            ensure((s.mean - m).abs() < 1e-9 && (s.sd - sd).abs() < 1e-9, || format!("round {round} {code}"))?;
        }
        if let Ok(r) = pearson(&cols[0], &cols[2]) {
            ensure((r - direct_pearson(&cols[0], &cols[2])).abs() < 1e-9, || format!("round {round}: pearson"))?;
            let a = 0.5 + rng.below(1000) as f64 / 10.0;
            let b = rng.below(2000) as f64 / 10.0 - 100.0;
            let xt: Vec<f64> = cols[0].iter().map(|x| a * x + b).collect();
            let moved = pearson(&xt, &cols[2]).map_err(|e| e.to_string())?;
            ensure((moved - r).abs() < 1e-9, || format!("round {round}: not affine invariant"))?;
        }
    }

    let csv = include_str!("../../survey/data/reconstructed_responses.csv");
    let data = SurveyDataset::from_csv(csv.as_bytes(), &inst).map_err(|e| e.to_string())?;
    let r = report(&data, &inst, ReportOptions::default()).map_err(|e| e.to_string())?;
    let i2 = r.items.iter().find(|i| i.code == "I2").ok_or("no I2")?;
    ensure(round_to(i2.mean, 2) == 3.87 && round_to(i2.sd, 2) == 0.69, || format!("I2 {:.4}/{:.4}", i2.mean, i2.sd))?;
    let published = [3.52, 3.70, 3.91, 3.78, 3.65, 3.43, 3.87, 3.65];
    for (row, m) in r.items.iter().zip(published) {
        ensure(round_to(row.mean, 2) == m, || format!("{} mean {:.4}", row.code, row.mean))?;
    }
    let demo = demographics(&data, &inst);
    let platform: Vec<f64> = demo[2].options.iter().map(|o| round_to(o.percent, 1)).collect();
    ensure(platform == [69.6, 47.8] && platform.iter().sum::<f64>() > 100.0, || format!("platform {platform:?}"))?;
    let m = &r.correlations;
    ensure(m.factors == [Factor::U, Factor::EU, Factor::I], || "matrix factors".into())?;
    for (i, row) in m.rows.iter().enumerate() {
        ensure(row.len() == i + 1 && row[i] == 1.0, || format!("row {i} not lower-triangular with unit diagonal"))?;
    }
    Ok("1000 datasets; fixture items, shares and matrix shape".into())
}

fn ml_quest(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ml-quest")).args(args).output().expect("binary runs")
}

// 7. Generated levels validate through the CLI; broken ones name their fault.
fn cli() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |f: &Path| f.to_str().expect("utf-8 temp path").to_owned();
    for level in 1..=3 {
        for seed in 0..100 {
            let f = dir.path().join(format!("l{level}_{seed}.json"));
            let g = ml_quest(&["gen", "--level", &level.to_string(), "--seed", &seed.to_string(), "--out", &p(&f)]);
            ensure(g.status.code() == Some(0), || format!("gen L{level} seed {seed}"))?;
            let v = ml_quest(&["validate", &p(&f)]);
            ensure(v.status.code() == Some(0), || format!("validate L{level} seed {seed}: {}", String::from_utf8_lossy(&v.stdout)))?;
        }
    }
    let broken = broken_specs();
    for (i, b) in broken.iter().enumerate() {
        let f = dir.path().join(format!("broken{i}.json"));
        std::fs::write(&f, LevelFile::new(b.spec.clone()).to_json()).map_err(|e| e.to_string())?;
        let v = ml_quest(&["validate", &p(&f)]);
        let out = String::from_utf8_lossy(&v.stdout);
        ensure(v.status.code() == Some(1) && out.contains(&format!("{}:", b.invariant)), || format!("{}: exit {:?}\n{out}", b.invariant, v.status.code()))?;
    }
    Ok(format!("300 round trips, {} broken specs", broken.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("knn-arrival-orders", knn_orders),
        ("level1-replay-oracle", level1_replay),
        ("level2-greedy-descent", level2_descent),
        ("determinism-and-save-split", determinism),
        ("scaffolding-gating", gating),
        ("survey-statistics", survey),
        ("cli-gen-validate", cli),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{}] {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

