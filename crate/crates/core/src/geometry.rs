//! Lattice geometry: dimensions, coordinate ranges and basis indexing.
//!
//! A walk lives on a finite patch of the 1D or 2D integer lattice. The
//! nominal lattice spans `[-t_max, t_max]` per axis; when a walker starts on
//! a boundary, the allocated range is widened along that axis by the number
//! of steps so that no amplitude can ever reach an array edge (see
//! [`Extent::for_walk`]).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Lattice dimensionality. Only 1D and 2D walks exist here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    /// Number of spatial axes.
    pub fn axes(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    /// Size of the coin space: two coin values per axis.
    pub fn coin_states(self) -> usize {
        1 << self.axes()
    }

    pub fn from_u8(d: u8) -> Result<Dim> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            other => Err(Error::InvalidConfig(format!(
                "dimension must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Dim {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        Dim::from_u8(v).map_err(D::Error::custom)
    }
}

/// One of the two coin values, `+1` (step up the axis) or `-1` (step down).
///
/// No other value is representable; constructors take `±1` integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoinValue {
    Plus,
    Minus,
}

impl CoinValue {
    /// The signed step this coin value produces.
    pub fn value(self) -> i32 {
        match self {
            CoinValue::Plus => 1,
            CoinValue::Minus => -1,
        }
    }

    /// Basis index: `+1 → 0`, `-1 → 1` (the ordering under which the
    /// Hadamard coin takes its textbook matrix form).
    pub fn index(self) -> usize {
        match self {
            CoinValue::Plus => 0,
            CoinValue::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> CoinValue {
        if i == 0 {
            CoinValue::Plus
        } else {
            CoinValue::Minus
        }
    }

    pub fn from_i32(v: i32) -> Result<CoinValue> {
        match v {
            1 => Ok(CoinValue::Plus),
            -1 => Ok(CoinValue::Minus),
            other => Err(Error::InvalidConfig(format!(
                "coin value must be +1 or -1, got {other}"
            ))),
        }
    }

    pub fn flipped(self) -> CoinValue {
        match self {
            CoinValue::Plus => CoinValue::Minus,
            CoinValue::Minus => CoinValue::Plus,
        }
    }
}

impl Serialize for CoinValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i32(self.value())
    }
}

impl<'de> Deserialize<'de> for CoinValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i32::deserialize(d)?;
        CoinValue::from_i32(v).map_err(D::Error::custom)
    }
}

/// A pair of coin values, one per axis. The second entry is ignored in 1D.
pub type CoinPair = [CoinValue; 2];

/// Lattice site. `y` is fixed to zero for 1D walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

impl Position {
    pub fn new(x: i32, y: i32) -> Position {
        Position { x, y }
    }

    pub fn origin() -> Position {
        Position { x: 0, y: 0 }
    }

    pub fn axis(&self, k: usize) -> i32 {
        if k == 0 {
            self.x
        } else {
            self.y
        }
    }
}

/// Inclusive coordinate range along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lo: i32,
    pub hi: i32,
}

impl AxisRange {
    pub fn new(lo: i32, hi: i32) -> AxisRange {
        AxisRange { lo, hi }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, v: i32) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Allocated state space of a walk: dimensionality, the nominal lattice
/// half-width `t_max`, and the (possibly widened) per-axis ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extent {
    dim: Dim,
    t_max: u32,
    axes: [AxisRange; 2],
}

impl Extent {
    /// The nominal lattice `[-t_max, t_max]` per axis (no boundary margin).
    pub fn nominal(dim: Dim, t_max: u32) -> Extent {
        let t = t_max as i32;
        let x = AxisRange::new(-t, t);
        let y = match dim {
            Dim::One => AxisRange::new(0, 0),
            Dim::Two => x,
        };
        Extent {
            dim,
            t_max,
            axes: [x, y],
        }
    }

    /// Assemble an extent from already-validated parts (lattice decoding).
    pub(crate) fn from_parts(dim: Dim, t_max: u32, axes: [AxisRange; 2]) -> Extent {
        Extent { dim, t_max, axes }
    }

    /// Allocate the state space for a walk of `steps` steps starting at `x0`.
    ///
    /// Any axis whose start coordinate sits on the nominal boundary is
    /// widened outward by `steps`, so a walker launched from the edge can
    /// never run off the array. Errors if the light cone `x0 ± steps` still
    /// falls outside the allocation (e.g. an origin start with
    /// `steps > t_max`).
    pub fn for_walk(dim: Dim, t_max: u32, x0: Position, steps: u32) -> Result<Extent> {
        if t_max == 0 {
            return Err(Error::InvalidConfig("t_max must be at least 1".into()));
        }
        if dim == Dim::One && x0.y != 0 {
            return Err(Error::InvalidConfig(format!(
                "1D start position must have y = 0, got y = {}",
                x0.y
            )));
        }
        let mut ext = Extent::nominal(dim, t_max);
        let t = t_max as i32;
        let s = steps as i32;
        for k in 0..dim.axes() {
            let c = x0.axis(k);
            if !ext.axes[k].contains(c) {
                return Err(Error::InvalidConfig(format!(
                    "start coordinate {c} outside the lattice [-{t}, {t}]"
                )));
            }
            if c == -t {
                ext.axes[k].lo = -t - s;
            }
            if c == t {
                ext.axes[k].hi = t + s;
            }
            if c - s < ext.axes[k].lo || c + s > ext.axes[k].hi {
                return Err(Error::InvalidConfig(format!(
                    "{steps} steps from start coordinate {c} would leave the \
                     allocated lattice [{}, {}]",
                    ext.axes[k].lo, ext.axes[k].hi
                )));
            }
        }
        Ok(ext)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    /// Range of axis `k` (`0 = x`, `1 = y`).
    pub fn axis(&self, k: usize) -> AxisRange {
        self.axes[k]
    }

    pub fn n_sites(&self) -> usize {
        self.axes[0].len() * self.axes[1].len()
    }

    pub fn coin_states(&self) -> usize {
        self.dim.coin_states()
    }

    /// Total basis dimension: sites × coin states.
    pub fn basis_len(&self) -> usize {
        self.n_sites() * self.coin_states()
    }

    pub fn contains(&self, pos: Position) -> bool {
        self.axes[0].contains(pos.x) && self.axes[1].contains(pos.y)
    }

    /// Site index in row-major order: `y` outer, `x` inner (x contiguous).
    pub fn site_index(&self, pos: Position) -> Option<usize> {
        if !self.contains(pos) {
            return None;
        }
        let wx = self.axes[0].len();
        let ox = (pos.x - self.axes[0].lo) as usize;
        let oy = (pos.y - self.axes[1].lo) as usize;
        Some(oy * wx + ox)
    }

    pub fn position_of(&self, site: usize) -> Position {
        let wx = self.axes[0].len();
        let ox = (site % wx) as i32;
        let oy = (site / wx) as i32;
        Position::new(self.axes[0].lo + ox, self.axes[1].lo + oy)
    }

    /// Sites in index order (row-major, x fastest).
    pub fn sites(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.n_sites()).map(move |i| self.position_of(i))
    }

    /// Flat basis index of `(site, coin)`; coin index is
    /// `cx.index()` in 1D and `cx.index() * 2 + cy.index()` in 2D.
    pub fn basis_index(&self, pos: Position, coins: CoinPair) -> Option<usize> {
        let site = self.site_index(pos)?;
        let c = match self.dim {
            Dim::One => coins[0].index(),
            Dim::Two => coins[0].index() * 2 + coins[1].index(),
        };
        Some(site * self.coin_states() + c)
    }

    /// Decode a coin index back into per-axis coin values.
    pub fn coins_of(&self, coin_index: usize) -> CoinPair {
        match self.dim {
            Dim::One => [CoinValue::from_index(coin_index), CoinValue::Plus],
            Dim::Two => [
                CoinValue::from_index(coin_index / 2),
                CoinValue::from_index(coin_index % 2),
            ],
        }
    }

    /// Check that `self` and `other` describe the identical state space.
    pub fn ensure_matches(&self, other: &Extent, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::ExtentMismatch(format!(
                "{what}: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

/// Starting configuration of a walk: a site and one coin value per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialState {
    pub x0: Position,
    pub c0: CoinPair,
}

impl InitialState {
    pub fn new_1d(x0: i32, c0: CoinValue) -> InitialState {
        InitialState {
            x0: Position::new(x0, 0),
            c0: [c0, CoinValue::Plus],
        }
    }

    pub fn new_2d(x0: i32, y0: i32, cx: CoinValue, cy: CoinValue) -> InitialState {
        InitialState {
            x0: Position::new(x0, y0),
            c0: [cx, cy],
        }
    }

    /// Parse the flag form `"x,c"` (1D) or `"x,y,cx,cy"` (2D), coins `±1`.
    pub fn parse(dim: Dim, text: &str) -> Result<InitialState> {
        let fields: Vec<i32> = text
            .split(',')
            .map(|f| f.trim().parse::<i32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(format!("bad initial state {text:?}: {e}")))?;
        match (dim, fields.len()) {
            (Dim::One, 2) => Ok(InitialState::new_1d(
                fields[0],
                CoinValue::from_i32(fields[1])?,
            )),
            (Dim::Two, 4) => Ok(InitialState::new_2d(
                fields[0],
                fields[1],
                CoinValue::from_i32(fields[2])?,
                CoinValue::from_i32(fields[3])?,
            )),
            (Dim::One, n) => Err(Error::InvalidConfig(format!(
                "a 1D initial state is \"x,c\", got {n} fields"
            ))),
            (Dim::Two, n) => Err(Error::InvalidConfig(format!(
                "a 2D initial state is \"x,y,cx,cy\", got {n} fields"
            ))),
        }
    }

    /// Render back into the flag form accepted by [`InitialState::parse`].
    pub fn to_flag_string(&self, dim: Dim) -> String {
        match dim {
            Dim::One => format!("{},{}", self.x0.x, self.c0[0].value()),
            Dim::Two => format!(
                "{},{},{},{}",
                self.x0.x,
                self.x0.y,
                self.c0[0].value(),
                self.c0[1].value()
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_extent_covers_the_lattice() {
        let e = Extent::nominal(Dim::Two, 3);
        assert_eq!(e.n_sites(), 49);
        assert_eq!(e.coin_states(), 4);
        assert_eq!(e.basis_len(), 196);
        assert!(e.contains(Position::new(-3, 3)));
        assert!(!e.contains(Position::new(-4, 0)));
    }

    #[test]
    fn edge_start_widens_the_axis() {
        let e = Extent::for_walk(Dim::Two, 15, Position::new(-15, 0), 15).unwrap();
        assert_eq!(e.axis(0), AxisRange::new(-30, 15));
        assert_eq!(e.axis(1), AxisRange::new(-15, 15));
    }

    #[test]
    fn origin_start_rejects_steps_beyond_t_max() {
        let err = Extent::for_walk(Dim::One, 10, Position::origin(), 11).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        assert!(Extent::for_walk(Dim::One, 10, Position::origin(), 10).is_ok());
    }

    #[test]
    fn site_indexing_round_trips() {
        let e = Extent::for_walk(Dim::Two, 2, Position::new(-2, 0), 2).unwrap();
        for i in 0..e.n_sites() {
            assert_eq!(e.site_index(e.position_of(i)), Some(i));
        }
    }

    #[test]
    fn coin_indexing_round_trips() {
        let e = Extent::nominal(Dim::Two, 1);
        for c in 0..4 {
            let coins = e.coins_of(c);
            let idx = e.basis_index(Position::origin(), coins).unwrap() % e.coin_states();
            assert_eq!(idx, c);
        }
    }
}
