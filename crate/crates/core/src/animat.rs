//! Animat embodiment: sensing, output decoding, movement and the life loop.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hebbnet::{Network, Stage, INPUTS, OUTPUTS};
use crate::world::{Position, Terrain, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    /// Unit step in grid coordinates (y grows downward).
    pub fn forward(self) -> (i64, i64) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    /// Unit step toward the animat's right-hand side.
    pub fn right(self) -> (i64, i64) {
        self.turn_right().forward()
    }

    pub fn turn_left(self) -> Heading {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    pub fn turn_right(self) -> Heading {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pose {
    pub position: Position,
    pub heading: Heading,
}

pub type SensorVector = [u8; INPUTS];
pub type OutputRegister = [u8; OUTPUTS];

/// Sensed cells as (distance ahead, lateral offset), negative offsets to
/// the left. Near rows come first, each row left to right.
pub const SENSOR_CELLS: [(i64, i64); 13] = [
    (1, -1),
    (1, 0),
    (1, 1),
    (2, -2),
    (2, -1),
    (2, 0),
    (2, 1),
    (2, 2),
    (3, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (3, 2),
];

/// Encodes the 13 cells in front of the animat as `(is_barrier, has_food)`
/// bit pairs. Off-grid cells read as barrier without food.
pub fn sense(world: &World, pose: Pose) -> SensorVector {
    let (fx, fy) = pose.heading.forward();
    let (rx, ry) = pose.heading.right();
    let (x0, y0) = (pose.position.x as i64, pose.position.y as i64);
    let mut bits = [0u8; INPUTS];
    for (i, &(ahead, side)) in SENSOR_CELLS.iter().enumerate() {
        let x = x0 + ahead * fx + side * rx;
        let y = y0 + ahead * fy + side * ry;
        bits[2 * i] = u8::from(world.terrain_at(x, y) == Terrain::Barrier);
        bits[2 * i + 1] = world.food_at(x, y);
    }
    bits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Turn {
    Left,
    Right,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Forward,
    Backward,
    Stay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub turn: Turn,
    pub movement: Move,
}

/// Bits 0..3 flag (Left, Right, None), bits 3..6 flag (Backward, Forward,
/// Stay). Within a triple the highest set bit wins; an empty triple means
/// no turn / no move.
pub fn decode_output(register: &OutputRegister) -> Action {
    let turn = if register[2] == 1 {
        Turn::None
    } else if register[1] == 1 {
        Turn::Right
    } else if register[0] == 1 {
        Turn::Left
    } else {
        Turn::None
    };
    let movement = if register[5] == 1 {
        Move::Stay
    } else if register[4] == 1 {
        Move::Forward
    } else if register[3] == 1 {
        Move::Backward
    } else {
        Move::Stay
    };
    Action { turn, movement }
}

/// Turns first, then moves along the new heading unless the target cell is
/// barrier. Returns the new pose and the food collected on arrival.
pub fn apply_action(world: &mut World, pose: Pose, action: Action) -> (Pose, u8) {
    let heading = match action.turn {
        Turn::Left => pose.heading.turn_left(),
        Turn::Right => pose.heading.turn_right(),
        Turn::None => pose.heading,
    };
    let step = match action.movement {
        Move::Forward => 1,
        Move::Backward => -1,
        Move::Stay => 0,
    };
    let mut position = pose.position;
    let mut collected = 0;
    if step != 0 {
        let (fx, fy) = heading.forward();
        let x = position.x as i64 + step * fx;
        let y = position.y as i64 + step * fy;
        if let Some(target) = world.checked(x, y).filter(|&p| world.is_open(p)) {
            position = target;
            collected = world.consume_food(target);
        }
    }
    (Pose { position, heading }, collected)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LifeParams {
    pub life_span: u32,
    pub starvation_limit: u32,
    pub infancy_span: u32,
    pub end_on_empty: bool,
}

impl Default for LifeParams {
    fn default() -> Self {
        LifeParams {
            life_span: 8000,
            starvation_limit: 256,
            infancy_span: 800,
            end_on_empty: true,
        }
    }
}

impl LifeParams {
    pub fn validate(&self) -> Result<()> {
        if self.starvation_limit > self.life_span || self.infancy_span > self.life_span {
            return Err(Error::InvalidParam(
                "starvation_limit and infancy_span must not exceed life_span".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeathCause {
    LifeSpan,
    Starved,
    WorldEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LifeResult {
    pub fitness: u32,
    pub clicks_lived: u32,
    pub death_cause: DeathCause,
}

/// Anything that can choose an output register each click.
pub trait Controller {
    fn step(&mut self, sensor: &SensorVector, stage: Stage) -> OutputRegister;
}

impl Controller for Network {
    fn step(&mut self, sensor: &SensorVector, stage: Stage) -> OutputRegister {
        let out = self.fire(sensor);
        self.learn(stage);
        out
    }
}

/// Draws every register bit uniformly at random.
pub struct RandomController<R> {
    rng: R,
}

impl<R: Rng> RandomController<R> {
    pub fn new(rng: R) -> Self {
        RandomController { rng }
    }
}

impl<R: Rng> Controller for RandomController<R> {
    fn step(&mut self, _sensor: &SensorVector, _stage: Stage) -> OutputRegister {
        let bits: u8 = self.rng.random_range(0..64);
        std::array::from_fn(|i| (bits >> i) & 1)
    }
}

/// Scatters food, then spawns at a uniformly drawn open cell with a
/// uniformly drawn heading.
pub fn prepare_life<F: Rng + ?Sized, S: Rng + ?Sized>(
    template: &World,
    food_rng: &mut F,
    spawn_rng: &mut S,
) -> Result<(World, Pose)> {
    let open = template.open_cells();
    if open.is_empty() {
        return Err(Error::NoSpawnCell);
    }
    let mut world = template.clone();
    world.scatter_food(food_rng);
    let position = open[spawn_rng.random_range(0..open.len())];
    let heading = Heading::ALL[spawn_rng.random_range(0..4)];
    Ok((world, Pose { position, heading }))
}

/// Runs one life from a prepared world and pose.
pub fn run_life<C: Controller + ?Sized>(
    world: &mut World,
    mut pose: Pose,
    controller: &mut C,
    params: &LifeParams,
) -> LifeResult {
    let mut fitness = 0;
    let mut hungry = 0;
    let mut click = 0;
    let death_cause = loop {
        if click >= params.life_span {
            break DeathCause::LifeSpan;
        }
        let stage = if click < params.infancy_span {
            Stage::Infancy
        } else {
            Stage::Adult
        };
        let register = controller.step(&sense(world, pose), stage);
        let (next, collected) = apply_action(world, pose, decode_output(&register));
        pose = next;
        click += 1;
        if collected > 0 {
            fitness += collected as u32;
            hungry = 0;
        } else {
            hungry += 1;
        }
        if params.end_on_empty && world.remaining_food() == 0 {
            break DeathCause::WorldEmpty;
        }
        if hungry >= params.starvation_limit {
            break DeathCause::Starved;
        }
    };
    LifeResult {
        fitness,
        clicks_lived: click,
        death_cause,
    }
}

/// A full network-controlled life.
pub fn live<F: Rng + ?Sized, S: Rng + ?Sized>(
    template: &World,
    network: &mut Network,
    params: &LifeParams,
    food_rng: &mut F,
    spawn_rng: &mut S,
) -> Result<LifeResult> {
    let (mut world, pose) = prepare_life(template, food_rng, spawn_rng)?;
    network.reset();
    Ok(run_life(&mut world, pose, network, params))
}

/// A life driven by uniformly random output registers. The spawn stream
/// also drives the action choices.
pub fn random_policy_life<F: Rng + ?Sized, S: Rng>(
    template: &World,
    params: &LifeParams,
    food_rng: &mut F,
    mut spawn_rng: S,
) -> Result<LifeResult> {
    let (mut world, pose) = prepare_life(template, food_rng, &mut spawn_rng)?;
    let mut controller = RandomController::new(spawn_rng);
    Ok(run_life(&mut world, pose, &mut controller, params))
}
