//! The foraging grid: terrain, food, and world generation.
//!
//! Coordinates put the origin at the top-left corner, `x` grows rightward
//! and `y` grows downward. The outermost five rings of cells are always
//! barrier.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

pub const BORDER: usize = 5;
pub const MIN_SIDE: usize = 12;
pub const DEFAULT_WIDTH: usize = 110;
pub const DEFAULT_HEIGHT: usize = 90;
pub const FOOD_PROBABILITY: f64 = 0.75;

const BLOB_COUNT: usize = 6;
const BLOB_MIN_AXIS: i64 = 4;
const BLOB_MAX_AXIS: i64 = 9;
const BLOB_ATTEMPTS: usize = 1000;
const CORRIDOR: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Terrain {
    Open,
    Barrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorldType {
    Open,
    RoundedBarrier1,
    Maze,
}

impl WorldType {
    pub const ALL: [WorldType; 3] = [WorldType::Open, WorldType::RoundedBarrier1, WorldType::Maze];

    pub fn name(self) -> &'static str {
        match self {
            WorldType::Open => "Open",
            WorldType::RoundedBarrier1 => "RoundedBarrier1",
            WorldType::Maze => "Maze",
        }
    }
}

impl fmt::Display for WorldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorldType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(WorldType::Open),
            "roundedbarrier1" | "rounded" => Ok(WorldType::RoundedBarrier1),
            "maze" => Ok(WorldType::Maze),
            _ => Err(Error::InvalidParam(format!("unknown world type `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    pub fn new(x: usize, y: usize) -> Self {
        Position { x, y }
    }
}

/// A grid world. Terrain is shared between clones; food is private.
#[derive(Debug, Clone)]
pub struct World {
    width: usize,
    height: usize,
    world_type: WorldType,
    terrain: Arc<Vec<Terrain>>,
    food: Vec<u8>,
    food_count: usize,
}

impl PartialEq for World {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.world_type == other.world_type
            && self.terrain == other.terrain
            && self.food == other.food
    }
}

fn in_border(x: usize, y: usize, width: usize, height: usize) -> bool {
    x < BORDER || y < BORDER || x >= width - BORDER || y >= height - BORDER
}

impl World {
    fn from_terrain(width: usize, height: usize, world_type: WorldType, terrain: Vec<Terrain>) -> Self {
        World {
            width,
            height,
            world_type,
            terrain: Arc::new(terrain),
            food: vec![0; width * height],
            food_count: 0,
        }
    }

    /// Builds the terrain for `world_type`. Deterministic in all arguments;
    /// no food is placed.
    pub fn generate(world_type: WorldType, width: usize, height: usize, layout_seed: u64) -> Result<World> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(Error::WorldTooSmall { width, height });
        }
        let mut terrain = vec![Terrain::Open; width * height];
        for y in 0..height {
            for x in 0..width {
                if in_border(x, y, width, height) {
                    terrain[y * width + x] = Terrain::Barrier;
                }
            }
        }
        let mut rng = crate::rng::seeded(layout_seed);
        match world_type {
            WorldType::Open => {}
            WorldType::RoundedBarrier1 => place_blobs(&mut terrain, width, height, &mut rng),
            WorldType::Maze => carve_maze(&mut terrain, width, height, &mut rng),
        }
        Ok(World::from_terrain(width, height, world_type, terrain))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn world_type(&self) -> WorldType {
        self.world_type
    }

    pub fn terrain(&self, pos: Position) -> Terrain {
        self.terrain[self.index(pos)]
    }

    /// Terrain lookup for signed coordinates; anything off-grid is barrier.
    pub fn terrain_at(&self, x: i64, y: i64) -> Terrain {
        match self.checked(x, y) {
            Some(p) => self.terrain(p),
            None => Terrain::Barrier,
        }
    }

    pub fn food_at(&self, x: i64, y: i64) -> u8 {
        match self.checked(x, y) {
            Some(p) => self.food[self.index(p)],
            None => 0,
        }
    }

    pub fn is_open(&self, pos: Position) -> bool {
        self.terrain(pos) == Terrain::Open
    }

    pub fn checked(&self, x: i64, y: i64) -> Option<Position> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(Position::new(x as usize, y as usize))
        }
    }

    fn index(&self, pos: Position) -> usize {
        pos.y * self.width + pos.x
    }

    pub fn open_cells(&self) -> Vec<Position> {
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| Position::new(x, y)))
            .filter(|&p| self.is_open(p))
            .collect()
    }

    pub fn open_count(&self) -> usize {
        self.terrain.iter().filter(|&&t| t == Terrain::Open).count()
    }

    /// True when all open cells form one 4-connected component.
    pub fn is_connected(&self) -> bool {
        open_connected(&self.terrain, self.width, self.height)
    }

    /// Clears food and drops one unit on each open cell with probability 0.75.
    pub fn scatter_food<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.food_count = 0;
        for (cell, terrain) in self.food.iter_mut().zip(self.terrain.iter()) {
            *cell = 0;
            if *terrain == Terrain::Open && rng.random_bool(FOOD_PROBABILITY) {
                *cell = 1;
                self.food_count += 1;
            }
        }
    }

    /// Takes the food at `pos`, returning what was there (0 or 1).
    pub fn consume_food(&mut self, pos: Position) -> u8 {
        let i = self.index(pos);
        let collected = self.food[i];
        self.food[i] = 0;
        self.food_count -= collected as usize;
        collected
    }

    pub fn remaining_food(&self) -> usize {
        self.food_count
    }

    pub fn clear_food(&mut self) {
        self.food.iter_mut().for_each(|c| *c = 0);
        self.food_count = 0;
    }

    /// Places one unit of food on an open cell. Used to set up scenes by hand.
    pub fn put_food(&mut self, pos: Position) {
        let i = self.index(pos);
        if self.terrain[i] == Terrain::Open && self.food[i] == 0 {
            self.food[i] = 1;
            self.food_count += 1;
        }
    }

    /// Replaces the terrain of one cell. Border cells stay barrier.
    pub fn set_terrain(&mut self, pos: Position, terrain: Terrain) {
        if in_border(pos.x, pos.y, self.width, self.height) {
            return;
        }
        let i = self.index(pos);
        Arc::make_mut(&mut self.terrain)[i] = terrain;
        if terrain == Terrain::Barrier && self.food[i] == 1 {
            self.food[i] = 0;
            self.food_count -= 1;
        }
    }

    /// Serializes the terrain in the world file format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * (self.height + 1) + 32);
        out.push_str(&format!("{} {} {}\n", self.width, self.height, self.world_type));
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(match self.terrain[y * self.width + x] {
                    Terrain::Open => '.',
                    Terrain::Barrier => '#',
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<World> {
        let mut lines = text.split('\n');
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 3 {
            return Err(Error::parse(1, "header must be `width height world_type`"));
        }
        let width: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad width `{}`", fields[0])))?;
        let height: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(1, format!("bad height `{}`", fields[1])))?;
        let world_type: WorldType = fields[2].parse().map_err(|e: Error| Error::parse(1, e.to_string()))?;
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(Error::parse(1, format!("world too small: {width}x{height}")));
        }

        let mut terrain = Vec::with_capacity(width * height);
        for y in 0..height {
            let line_no = y + 2;
            let row = lines
                .next()
                .ok_or_else(|| Error::parse(line_no, format!("expected {height} rows, found {y}")))?;
            if row.chars().count() != width {
                return Err(Error::parse(
                    line_no,
                    format!("row has {} cells, expected {width}", row.chars().count()),
                ));
            }
            for (x, c) in row.chars().enumerate() {
                let t = match c {
                    '#' => Terrain::Barrier,
                    '.' => Terrain::Open,
                    other => return Err(Error::parse(line_no, format!("unknown character `{other}`"))),
                };
                if t == Terrain::Open && in_border(x, y, width, height) {
                    return Err(Error::parse(
                        line_no,
                        format!("open cell at x={x} inside the barrier ring"),
                    ));
                }
                terrain.push(t);
            }
        }
        for (i, rest) in lines.enumerate() {
            if !rest.is_empty() {
                return Err(Error::parse(height + 2 + i, "unexpected content after grid"));
            }
        }
        Ok(World::from_terrain(width, height, world_type, terrain))
    }
}

fn open_connected(terrain: &[Terrain], width: usize, height: usize) -> bool {
    let total = terrain.iter().filter(|&&t| t == Terrain::Open).count();
    let Some(start) = terrain.iter().position(|&t| t == Terrain::Open) else {
        return false;
    };
    let mut seen = vec![false; terrain.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut reached = 0;
    while let Some(i) = queue.pop_front() {
        reached += 1;
        let (x, y) = (i % width, i / width);
        let mut visit = |j: usize| {
            if !seen[j] && terrain[j] == Terrain::Open {
                seen[j] = true;
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < width {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - width);
        }
        if y + 1 < height {
            visit(i + width);
        }
    }
    reached == total
}

fn place_blobs<R: Rng>(terrain: &mut [Terrain], width: usize, height: usize, rng: &mut R) {
    let (x0, x1) = (BORDER as i64, (width - BORDER) as i64);
    let (y0, y1) = (BORDER as i64, (height - BORDER) as i64);
    for _ in 0..BLOB_COUNT {
        for _ in 0..BLOB_ATTEMPTS {
            let ax = rng.random_range(BLOB_MIN_AXIS..=BLOB_MAX_AXIS);
            let ay = rng.random_range(BLOB_MIN_AXIS..=BLOB_MAX_AXIS);
            let cx = rng.random_range(x0..x1);
            let cy = rng.random_range(y0..y1);
            let mut changed = Vec::new();
            for y in (cy - ay).max(y0)..(cy + ay + 1).min(y1) {
                for x in (cx - ax).max(x0)..(cx + ax + 1).min(x1) {
                    let dx = (x - cx) as f64 / ax as f64;
                    let dy = (y - cy) as f64 / ay as f64;
                    let i = y as usize * width + x as usize;
                    if dx * dx + dy * dy <= 1.0 && terrain[i] == Terrain::Open {
                        terrain[i] = Terrain::Barrier;
                        changed.push(i);
                    }
                }
            }
            if !changed.is_empty() && open_connected(terrain, width, height) {
                break;
            }
            for i in changed {
                terrain[i] = Terrain::Open;
            }
        }
    }
}

/// Recursive division over a lattice of 3x3 chambers separated by
/// one-cell walls. Columns or rows left over past the last chamber are
/// filled with barrier.
fn carve_maze<R: Rng>(terrain: &mut [Terrain], width: usize, height: usize, rng: &mut R) {
    let pitch = CORRIDOR + 1;
    let chambers_x = (width - 2 * BORDER + 1) / pitch;
    let chambers_y = (height - 2 * BORDER + 1) / pitch;
    if chambers_x == 0 || chambers_y == 0 {
        return;
    }
    let used_w = chambers_x * pitch - 1;
    let used_h = chambers_y * pitch - 1;
    for y in BORDER..height - BORDER {
        for x in BORDER..width - BORDER {
            if x - BORDER >= used_w || y - BORDER >= used_h {
                terrain[y * width + x] = Terrain::Barrier;
            }
        }
    }
    let mut grid = MazeGrid { terrain, width };
    grid.divide(0, chambers_x, 0, chambers_y, rng);
}

struct MazeGrid<'a> {
    terrain: &'a mut [Terrain],
    width: usize,
}

impl MazeGrid<'_> {
    fn set(&mut self, x: usize, y: usize, t: Terrain) {
        self.terrain[y * self.width + x] = t;
    }

    fn origin(c: usize) -> usize {
        BORDER + c * (CORRIDOR + 1)
    }

    fn divide<R: Rng>(&mut self, cx0: usize, cx1: usize, cy0: usize, cy1: usize, rng: &mut R) {
        let (w, h) = (cx1 - cx0, cy1 - cy0);
        if w < 2 && h < 2 {
            return;
        }
        let vertical = if w < 2 {
            false
        } else if h < 2 {
            true
        } else if w != h {
            w > h
        } else {
            rng.random_bool(0.5)
        };
        if vertical {
            // wall sits just right of chamber column `c`
            let c = rng.random_range(cx0..cx1 - 1);
            let gap = rng.random_range(cy0..cy1);
            let wx = Self::origin(c) + CORRIDOR;
            for y in Self::origin(cy0)..Self::origin(cy1) - 1 {
                self.set(wx, y, Terrain::Barrier);
            }
            for y in Self::origin(gap)..Self::origin(gap) + CORRIDOR {
                self.set(wx, y, Terrain::Open);
            }
            self.divide(cx0, c + 1, cy0, cy1, rng);
            self.divide(c + 1, cx1, cy0, cy1, rng);
        } else {
            let r = rng.random_range(cy0..cy1 - 1);
            let gap = rng.random_range(cx0..cx1);
            let wy = Self::origin(r) + CORRIDOR;
            for x in Self::origin(cx0)..Self::origin(cx1) - 1 {
                self.set(x, wy, Terrain::Barrier);
            }
            for x in Self::origin(gap)..Self::origin(gap) + CORRIDOR {
                self.set(x, wy, Terrain::Open);
            }
            self.divide(cx0, cx1, cy0, r + 1, rng);
            self.divide(cx0, cx1, r + 1, cy1, rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_is_barrier(w: &World) -> bool {
        (0..w.height())
            .all(|y| (0..w.width()).all(|x| !in_border(x, y, w.width(), w.height()) || !w.is_open(Position::new(x, y))))
    }

    #[test]
    fn open_world_interior_is_all_open() {
        let w = World::generate(WorldType::Open, 110, 90, 123).unwrap();
        assert_eq!(w.open_count(), 100 * 80);
        for y in 5..85 {
            for x in 5..105 {
                assert!(w.is_open(Position::new(x, y)));
            }
        }
        assert!(ring_is_barrier(&w));
    }

    #[test]
    fn generation_is_deterministic() {
        for t in WorldType::ALL {
            let a = World::generate(t, 110, 90, 99).unwrap();
            let b = World::generate(t, 110, 90, 99).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rounded_world_has_blobs_and_stays_connected() {
        for seed in 0..20 {
            let w = World::generate(WorldType::RoundedBarrier1, 110, 90, seed).unwrap();
            assert!(w.open_count() < 8000, "seed {seed} has no interior barrier");
            assert!(w.is_connected(), "seed {seed} disconnected");
            assert!(ring_is_barrier(&w));
        }
    }

    #[test]
    fn maze_is_connected_with_narrow_corridors() {
        for seed in 0..20 {
            let w = World::generate(WorldType::Maze, 110, 90, seed).unwrap();
            assert!(w.is_connected(), "seed {seed} disconnected");
            assert!(ring_is_barrier(&w));
            // 25x20 chambers of 9 cells plus 499 three-cell passages
            assert_eq!(w.open_count(), 25 * 20 * 9 + (25 * 20 - 1) * 3);
        }
    }

    #[test]
    fn small_worlds() {
        assert!(matches!(
            World::generate(WorldType::Open, 11, 90, 0),
            Err(Error::WorldTooSmall { .. })
        ));
        for t in WorldType::ALL {
            let w = World::generate(t, 12, 12, 5).unwrap();
            assert!(ring_is_barrier(&w));
        }
    }

    #[test]
    fn all_barrier_file_is_valid() {
        let mut text = String::from("12 12 Open\n");
        for _ in 0..12 {
            text.push_str(&"#".repeat(12));
            text.push('\n');
        }
        let w = World::parse(&text).unwrap();
        assert_eq!(w.open_count(), 0);
        assert!(w.open_cells().is_empty());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let good = World::generate(WorldType::Open, 12, 12, 0).unwrap().to_text();
        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[4] = "#".repeat(11);
        let err = World::parse(&lines.join("\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");

        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[7] = "#####x######".into();
        let err = World::parse(&lines.join("\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 8, .. }), "{err}");

        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[2] = ".###########".into();
        let err = World::parse(&lines.join("\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        assert!(World::parse("12 12 Swamp\n").is_err());
    }

    #[test]
    fn round_trip_preserves_terrain_not_food() {
        for t in WorldType::ALL {
            let mut w = World::generate(t, 110, 90, 4).unwrap();
            w.scatter_food(&mut crate::rng::seeded(1));
            let back = World::parse(&w.to_text()).unwrap();
            assert_eq!(back.terrain, w.terrain);
            assert_eq!(back.world_type(), t);
            assert_eq!(back.remaining_food(), 0);
        }
    }

    #[test]
    fn scatter_and_consume() {
        let mut w = World::generate(WorldType::Open, 110, 90, 0).unwrap();
        let mut again = w.clone();
        w.scatter_food(&mut crate::rng::seeded(42));
        again.scatter_food(&mut crate::rng::seeded(42));
        assert_eq!(w.food, again.food);
        let before = w.remaining_food();
        assert_eq!(before, w.food.iter().map(|&f| f as usize).sum::<usize>());

        let cell = w
            .open_cells()
            .into_iter()
            .find(|&p| w.food_at(p.x as i64, p.y as i64) == 1)
            .unwrap();
        assert_eq!(w.consume_food(cell), 1);
        assert_eq!(w.remaining_food(), before - 1);
        assert_eq!(w.consume_food(cell), 0);
        assert_eq!(w.remaining_food(), before - 1);
        assert_eq!(w.consume_food(Position::new(0, 0)), 0);

        let mut walls = World::parse(&format!("12 12 Open\n{}", "############\n".repeat(12))).unwrap();
        walls.scatter_food(&mut crate::rng::seeded(3));
        assert_eq!(walls.remaining_food(), 0);
    }

    #[test]
    fn barrier_cells_never_get_food() {
        let mut w = World::generate(WorldType::Maze, 110, 90, 8).unwrap();
        w.scatter_food(&mut crate::rng::seeded(8));
        for (f, t) in w.food.iter().zip(w.terrain.iter()) {
            assert!(*f == 0 || *t == Terrain::Open);
        }
    }

    #[test]
    fn scatter_count_within_binomial_bounds() {
        // Binomial(8000, 0.75): mean 6000, sd ~38.7; [5700, 6300] is far beyond 4 sd.
        let base = World::generate(WorldType::Open, 110, 90, 0).unwrap();
        for seed in 0..200 {
            let mut w = base.clone();
            w.scatter_food(&mut crate::rng::seeded(seed));
            let n = w.remaining_food();
            assert!((5700..=6300).contains(&n), "seed {seed}: {n}");
        }
    }
}
