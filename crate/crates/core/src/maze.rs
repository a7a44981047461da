//! Tabular Q-learning on a walled grid.
//!
//! Rewards: −1 for bumping into a wall or the border (the agent stays put),
//! +1 for a move that shortens the wall-aware distance to the target, and 0
//! for any other move. Distances come from a breadth-first search outward
//! from the target when the maze is loaded.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The 9×9 layout shipped with the crate, source in the top-left corner.
pub const SHIPPED_LAYOUT: &str = include_str!("../data/maze9x9.txt");

/// Length units per cell when reporting coordinates.
pub const DEFAULT_CELL_SIZE: f64 = 40.0;

#[derive(Debug, thiserror::Error)]
pub enum MazeError {
    #[error("failed to read maze file: {0}")]
    Io(#[from] std::io::Error),
    #[error("maze is empty")]
    Empty,
    #[error("line {line}: expected {expected} cells, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {col}: unexpected character {ch:?}")]
    BadChar { line: usize, col: usize, ch: char },
    #[error("maze needs exactly one {what}, found {count}")]
    Marker { what: &'static str, count: usize },
    #[error("target is unreachable from the source")]
    Unreachable,
    #[error("cell {0} is outside the maze or inside a wall")]
    InvalidCell(Cell),
    #[error("invalid hyperparameter: {0}")]
    Hyperparams(String),
    #[error("greedy policy revisits {at} before reaching the target after {} cells", .partial.len())]
    NoConvergence { at: Cell, partial: Vec<Cell> },
}

/// Grid position; row 0 is the top line of the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[r{}, c{}]", self.row, self.col)
    }
}

/// Moves in Q-table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Up,
    Down,
    Right,
    Left,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Right, Action::Left];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Up => "Up",
            Action::Down => "Down",
            Action::Right => "Right",
            Action::Left => "Left",
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
            Action::Right => (0, 1),
            Action::Left => (0, -1),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one attempted move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub reward: f64,
    pub next: Cell,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maze {
    width: usize,
    height: usize,
    cell_size: f64,
    walls: Vec<bool>,
    source: Cell,
    target: Cell,
    /// Steps to the target, `None` for walls and cut-off cells.
    distance: Vec<Option<u32>>,
}

impl Maze {
    pub fn shipped() -> Maze {
        SHIPPED_LAYOUT.parse().expect("shipped maze is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Maze, MazeError> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn with_cell_size(mut self, cell_size: f64) -> Maze {
        self.cell_size = cell_size;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn source(&self) -> Cell {
        self.source
    }

    pub fn target(&self) -> Cell {
        self.target
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    fn idx(&self, c: Cell) -> usize {
        c.row * self.width + c.col
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.row < self.height && c.col < self.width
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.walls[self.idx(c)]
    }

    pub fn is_open(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.is_wall(c)
    }

    /// Row-major list of every open cell.
    pub fn open_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height)
            .flat_map(move |r| (0..self.width).map(move |c| Cell::new(r, c)))
            .filter(move |&c| !self.is_wall(c))
    }

    /// Neighbour in direction `a`, if it lies inside the grid.
    pub fn neighbour(&self, c: Cell, a: Action) -> Option<Cell> {
        let (dr, dc) = a.delta();
        let row = c.row.checked_add_signed(dr)?;
        let col = c.col.checked_add_signed(dc)?;
        let n = Cell::new(row, col);
        self.in_bounds(n).then_some(n)
    }

    /// Wall-aware number of moves from `c` to the target.
    pub fn distance_to_target(&self, c: Cell) -> Option<u32> {
        if !self.in_bounds(c) {
            return None;
        }
        self.distance[self.idx(c)]
    }

    /// `(x, y)` in length units; x grows with the column, y with the row.
    pub fn coords(&self, c: Cell) -> (f64, f64) {
        (c.col as f64 * self.cell_size, c.row as f64 * self.cell_size)
    }

    pub fn format_coords(&self, c: Cell) -> String {
        let (x, y) = self.coords(c);
        format!("({x:.1}, {y:.1})")
    }

    /// Applies action `a` in cell `s`.
    pub fn reward(&self, s: Cell, a: Action) -> Result<Transition, MazeError> {
        if !self.is_open(s) {
            return Err(MazeError::InvalidCell(s));
        }
        let Some(next) = self.neighbour(s, a).filter(|&n| !self.is_wall(n)) else {
            return Ok(Transition {
                reward: -1.0,
                next: s,
                terminal: false,
            });
        };
        let terminal = next == self.target;
        let closer = matches!(
            (self.distance_to_target(s), self.distance_to_target(next)),
            (Some(d0), Some(d1)) if d1 < d0
        );
        Ok(Transition {
            reward: if closer || terminal { 1.0 } else { 0.0 },
            next,
            terminal,
        })
    }

    fn compute_distances(&mut self) {
        let mut dist = vec![None; self.cell_count()];
        let mut queue = VecDeque::new();
        dist[self.idx(self.target)] = Some(0);
        queue.push_back(self.target);
        while let Some(c) = queue.pop_front() {
            let d = dist[self.idx(c)].expect("queued cells have a distance");
            for a in Action::ALL {
                if let Some(n) = self.neighbour(c, a) {
                    let i = self.idx(n);
                    if !self.walls[i] && dist[i].is_none() {
                        dist[i] = Some(d + 1);
                        queue.push_back(n);
                    }
                }
            }
        }
        self.distance = dist;
    }
}

impl FromStr for Maze {
    type Err = MazeError;

    /// `.` open, `#` wall, `S` source, `T` target; one line per row.
    fn from_str(text: &str) -> Result<Maze, MazeError> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        if lines.is_empty() {
            return Err(MazeError::Empty);
        }
        let width = lines[0].chars().count();
        let height = lines.len();
        let mut walls = Vec::with_capacity(width * height);
        let mut sources = Vec::new();
        let mut targets = Vec::new();
        for (r, line) in lines.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(MazeError::Ragged {
                    line: r + 1,
                    expected: width,
                    found,
                });
            }
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '.' => {}
                    '#' => {}
                    'S' => sources.push(Cell::new(r, c)),
                    'T' => targets.push(Cell::new(r, c)),
                    _ => {
                        return Err(MazeError::BadChar {
                            line: r + 1,
                            col: c + 1,
                            ch,
                        })
                    }
                }
                walls.push(ch == '#');
            }
        }
        if sources.len() != 1 {
            return Err(MazeError::Marker {
                what: "source 'S'",
                count: sources.len(),
            });
        }
        if targets.len() != 1 {
            return Err(MazeError::Marker {
                what: "target 'T'",
                count: targets.len(),
            });
        }
        let mut maze = Maze {
            width,
            height,
            cell_size: DEFAULT_CELL_SIZE,
            walls,
            source: sources[0],
            target: targets[0],
            distance: Vec::new(),
        };
        maze.compute_distances();
        if maze.distance_to_target(maze.source).is_none() {
            return Err(MazeError::Unreachable);
        }
        Ok(maze)
    }
}

/// Action values for every cell of a maze, zero-initialised.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    width: usize,
    values: Vec<[f64; 4]>,
}

impl QTable {
    pub fn new(maze: &Maze) -> QTable {
        QTable {
            width: maze.width(),
            values: vec![[0.0; 4]; maze.cell_count()],
        }
    }

    fn idx(&self, c: Cell) -> usize {
        c.row * self.width + c.col
    }

    pub fn get(&self, s: Cell, a: Action) -> f64 {
        self.values[self.idx(s)][a.index()]
    }

    pub fn set(&mut self, s: Cell, a: Action, v: f64) {
        let i = self.idx(s);
        self.values[i][a.index()] = v;
    }

    pub fn row(&self, s: Cell) -> [f64; 4] {
        self.values[self.idx(s)]
    }

    pub fn max_value(&self, s: Cell) -> f64 {
        self.row(s).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Highest-valued action; ties go to the earliest of Up, Down, Right,
    /// Left.
    pub fn best_action(&self, s: Cell) -> Action {
        let row = self.row(s);
        let mut best = Action::Up;
        for a in Action::ALL {
            if row[a.index()] > row[best.index()] {
                best = a;
            }
        }
        best
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    /// Exploration rate of the first episode.
    pub epsilon: f64,
    /// Exploration rate of the last episode; linear decay in between.
    pub epsilon_min: f64,
    pub episodes: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 0.1,
            // Closer/farther oscillation is worth 1/(1-γ²); reaching the
            // target from one step away is worth 1. The shortest route is
            // optimal only while γ + γ² < 1.
            gamma: 0.5,
            epsilon: 0.1,
            epsilon_min: 0.01,
            episodes: 500,
            max_steps: 500,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), MazeError> {
        let bad = |m: String| Err(MazeError::Hyperparams(m));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha {} not in (0, 1]", self.alpha));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma {} not in [0, 1)", self.gamma));
        }
        for (name, v) in [("epsilon", self.epsilon), ("epsilon_min", self.epsilon_min)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} not in [0, 1]"));
            }
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        Ok(())
    }

    /// Exploration rate used in episode `k` (zero-based).
    pub fn epsilon_at(&self, k: usize) -> f64 {
        if self.episodes <= 1 {
            return self.epsilon;
        }
        let t = k as f64 / (self.episodes - 1) as f64;
        self.epsilon + (self.epsilon_min - self.epsilon) * t
    }
}

/// One temporal-difference update of `Q(s, a)`:
/// `Q(s,a) + α·(r + γ·max_a' Q(s', a') − Q(s,a))`.
pub fn q_update(q: &mut QTable, s: Cell, a: Action, r: f64, s_next: Cell, h: &Hyperparams) {
    let old = q.get(s, a);
    let target = r + h.gamma * q.max_value(s_next);
    q.set(s, a, old + h.alpha * (target - old));
}

/// Per-episode statistics; `cost` is the summed reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    pub steps: usize,
    pub cost: f64,
    pub reached_target: bool,
}

/// Epsilon-greedy Q-learning from the source until the target or
/// `max_steps`.
pub fn train(maze: &Maze, h: &Hyperparams) -> Result<(QTable, Vec<EpisodeStats>), MazeError> {
    h.validate()?;
    let mut q = QTable::new(maze);
    let mut rng = ChaCha8Rng::seed_from_u64(h.seed);
    let mut stats = Vec::with_capacity(h.episodes);
    for k in 0..h.episodes {
        let eps = h.epsilon_at(k);
        let mut s = maze.source();
        let mut steps = 0;
        let mut cost = 0.0;
        let mut reached = false;
        while steps < h.max_steps {
            let a = if rng.random::<f64>() < eps {
                Action::ALL[rng.random_range(0..4)]
            } else {
                greedy_with_random_ties(&q, s, &mut rng)
            };
            let t = maze.reward(s, a)?;
            q_update(&mut q, s, a, t.reward, t.next, h);
            steps += 1;
            cost += t.reward;
            s = t.next;
            if t.terminal {
                reached = true;
                break;
            }
        }
        stats.push(EpisodeStats {
            episode: k + 1,
            steps,
            cost,
            reached_target: reached,
        });
    }
    Ok((q, stats))
}

fn greedy_with_random_ties(q: &QTable, s: Cell, rng: &mut impl Rng) -> Action {
    let row = q.row(s);
    let best = q.max_value(s);
    let ties: Vec<Action> = Action::ALL
        .into_iter()
        .filter(|a| row[a.index()] == best)
        .collect();
    ties[rng.random_range(0..ties.len())]
}

/// Follows the highest-valued action from the source.
///
/// Returns the visited cells, source first and target last. Revisiting a
/// cell (including bumping into a wall) means the policy loops, reported as
/// [`MazeError::NoConvergence`] with the cells visited so far.
pub fn greedy_path(q: &QTable, maze: &Maze) -> Result<Vec<Cell>, MazeError> {
    let mut path = vec![maze.source()];
    let mut seen = vec![false; maze.cell_count()];
    seen[maze.idx(maze.source())] = true;
    let mut s = maze.source();
    while s != maze.target() {
        let t = maze.reward(s, q.best_action(s))?;
        if seen[maze.idx(t.next)] {
            return Err(MazeError::NoConvergence {
                at: t.next,
                partial: path,
            });
        }
        seen[maze.idx(t.next)] = true;
        path.push(t.next);
        s = t.next;
    }
    Ok(path)
}

/// Q-table rows along `path` in the `Coordinates,Up,Down,Right,Left` layout
/// plus the flagged best action.
///
/// The target cell, where no action is taken, is left out.
pub fn export_qtable(q: &QTable, path: &[Cell], maze: &Maze) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["Coordinates", "Up", "Down", "Right", "Left", "best_action"])
        .expect("in-memory write");
    for &c in path.iter().filter(|&&c| c != maze.target()) {
        let mut rec = vec![maze.format_coords(c)];
        rec.extend(q.row(c).iter().map(|v| format!("{v:.6e}")));
        rec.push(q.best_action(c).to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// `step,x,y` rows for a path.
pub fn path_csv(path: &[Cell], maze: &Maze) -> String {
    let mut out = String::from("step,x,y\n");
    for (i, &c) in path.iter().enumerate() {
        let (x, y) = maze.coords(c);
        out.push_str(&format!("{i},{x:.1},{y:.1}\n"));
    }
    out
}

/// `episode,steps,cost` rows.
pub fn stats_csv(stats: &[EpisodeStats]) -> String {
    let mut out = String::from("episode,steps,cost\n");
    for s in stats {
        out.push_str(&format!("{},{},{}\n", s.episode, s.steps, s.cost));
    }
    out
}

/// Median of per-episode step counts; `None` for an empty slice.
pub fn median_steps(stats: &[EpisodeStats]) -> Option<f64> {
    if stats.is_empty() {
        return None;
    }
    let mut v: Vec<usize> = stats.iter().map(|s| s.steps).collect();
    v.sort_unstable();
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    })
}
