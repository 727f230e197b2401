//! Congested lattices: a coin operator per site, with defects placed i.i.d.
//!
//! A site holds either the Hadamard coin (open) or the bit-flip coin
//! (defect). A walker entering a defect has both coin axes reversed and
//! backs out to its previous site on the next step. Defects are static for
//! the lifetime of a trajectory; ensembles average over freshly sampled
//! lattices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CoinPair, Dim, Extent, InitialState, Position};
use crate::rng::RandomStream;
use crate::walk::WalkState;

/// Hard limit on decoded lattice size; protects the JSON decoder from
/// hostile extents. In-memory generation is bounded by walk configs instead.
const MAX_DECODED_SITES: u64 = 1 << 24;

/// The two coin operators a site can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoinKind {
    /// Open site: `H` in 1D, `H⊗H` in 2D.
    Hadamard,
    /// Defect: `X` in 1D, `X⊗X` in 2D; reverses the walker.
    BitFlip,
}

/// Per-site coin assignment over an allocated extent.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinLattice {
    extent: Extent,
    p: f64,
    seed: Option<u64>,
    kinds: Vec<CoinKind>,
}

impl CoinLattice {
    /// Sample a lattice: every non-protected site is independently a defect
    /// with probability `1 - p`; protected sites are always open.
    ///
    /// Draw order is pinned for reproducibility: one uniform `f64` per site
    /// in row-major order (`y` outer, `x` inner), drawn for protected sites
    /// too so the stream position does not depend on the protected set.
    pub fn generate(
        extent: Extent,
        p: f64,
        protected: &[Position],
        rng: &mut RandomStream,
    ) -> Result<CoinLattice> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!(
                "site-open probability must lie in [0, 1], got {p}"
            )));
        }
        for site in protected {
            if !extent.contains(*site) {
                return Err(Error::InvalidConfig(format!(
                    "protected site ({}, {}) outside the lattice extent",
                    site.x, site.y
                )));
            }
        }
        let mut kinds: Vec<CoinKind> = (0..extent.n_sites())
            .map(|_| {
                if rng.random::<f64>() < p {
                    CoinKind::Hadamard
                } else {
                    CoinKind::BitFlip
                }
            })
            .collect();
        for site in protected {
            kinds[extent.site_index(*site).unwrap()] = CoinKind::Hadamard;
        }
        Ok(CoinLattice {
            extent,
            p,
            seed: None,
            kinds,
        })
    }

    /// [`CoinLattice::generate`] from a fresh stream of `seed`, recording the
    /// seed for serialization.
    pub fn generate_seeded(
        extent: Extent,
        p: f64,
        protected: &[Position],
        seed: u64,
    ) -> Result<CoinLattice> {
        let mut rng = crate::rng::trial_stream(seed, 0);
        let mut lattice = CoinLattice::generate(extent, p, protected, &mut rng)?;
        lattice.seed = Some(seed);
        Ok(lattice)
    }

    /// Defect-free lattice (the `p = 1` special case, no draws consumed).
    pub fn all_hadamard(extent: Extent) -> CoinLattice {
        CoinLattice {
            extent,
            p: 1.0,
            seed: None,
            kinds: vec![CoinKind::Hadamard; extent.n_sites()],
        }
    }

    /// Build directly from per-site kinds (row-major order).
    pub fn from_kinds(extent: Extent, p: f64, kinds: Vec<CoinKind>) -> Result<CoinLattice> {
        if kinds.len() != extent.n_sites() {
            return Err(Error::ExtentMismatch(format!(
                "{} kinds for {} sites",
                kinds.len(),
                extent.n_sites()
            )));
        }
        Ok(CoinLattice {
            extent,
            p,
            seed: None,
            kinds,
        })
    }

    pub fn extent(&self) -> &Extent {
        &self.extent
    }

    /// Site-open probability this lattice was sampled at.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn kinds(&self) -> &[CoinKind] {
        &self.kinds
    }

    pub fn kind_at(&self, pos: Position) -> Option<CoinKind> {
        self.extent.site_index(pos).map(|i| self.kinds[i])
    }

    pub fn defect_fraction(&self) -> f64 {
        let defects = self
            .kinds
            .iter()
            .filter(|k| **k == CoinKind::BitFlip)
            .count();
        defects as f64 / self.kinds.len() as f64
    }

    /// Serialize to the interchange JSON form (kinds run-length encoded).
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&LatticeFile::from(self)).expect("lattice serialization")
    }

    /// Decode the interchange JSON form, validating geometry and run lengths.
    pub fn from_json_str(text: &str) -> Result<CoinLattice> {
        let file: LatticeFile =
            serde_json::from_str(text).map_err(|e| Error::LatticeDecode(e.to_string()))?;
        file.try_into()
    }
}

/// Where a walker sitting on defect `x` with incoming coin `c` lands after
/// one more step: the coin reverses per axis, so the answer must be
/// `x - c`. Exposed as a checkable statement of the defect semantics.
pub fn defect_reversal_check(
    lattice: &CoinLattice,
    x: Position,
    incoming: CoinPair,
) -> Result<Position> {
    match lattice.kind_at(x) {
        None => {
            return Err(Error::InvalidConfig(format!(
                "site ({}, {}) outside the lattice extent",
                x.x, x.y
            )))
        }
        Some(CoinKind::Hadamard) => return Err(Error::NotADefect { x: x.x, y: x.y }),
        Some(CoinKind::BitFlip) => {}
    }
    let mut state = WalkState::new(
        *lattice.extent(),
        &InitialState {
            x0: x,
            c0: incoming,
        },
    )?;
    state.apply_coin(lattice)?;
    state.apply_step()?;
    let dist = state.distribution();
    let (pos, _) = dist
        .iter()
        .find(|(_, p)| *p > 0.5)
        .expect("a point state stays a point state under X and the shift");
    Ok(pos)
}

/// Interchange form: `{dim, t_max, extent, p, seed, kinds}` with kinds as
/// `[count, "H" | "X"]` runs in row-major site order.
#[derive(Serialize, Deserialize)]
struct LatticeFile {
    dim: u8,
    t_max: u32,
    extent: [RawRange; 2],
    p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    kinds: Vec<(u64, String)>,
}

#[derive(Serialize, Deserialize)]
struct RawRange {
    lo: i32,
    hi: i32,
}

impl From<&CoinLattice> for LatticeFile {
    fn from(lattice: &CoinLattice) -> LatticeFile {
        let mut runs: Vec<(u64, String)> = Vec::new();
        for kind in &lattice.kinds {
            let sym = match kind {
                CoinKind::Hadamard => "H",
                CoinKind::BitFlip => "X",
            };
            match runs.last_mut() {
                Some((n, s)) if s == sym => *n += 1,
                _ => runs.push((1, sym.to_string())),
            }
        }
        let ext = lattice.extent;
        LatticeFile {
            dim: ext.dim().as_u8(),
            t_max: ext.t_max(),
            extent: [
                RawRange {
                    lo: ext.axis(0).lo,
                    hi: ext.axis(0).hi,
                },
                RawRange {
                    lo: ext.axis(1).lo,
                    hi: ext.axis(1).hi,
                },
            ],
            p: lattice.p,
            seed: lattice.seed,
            kinds: runs,
        }
    }
}

impl TryFrom<LatticeFile> for CoinLattice {
    type Error = Error;

    fn try_from(file: LatticeFile) -> Result<CoinLattice> {
        let dim = Dim::from_u8(file.dim).map_err(|_| {
            Error::LatticeDecode(format!("dimension must be 1 or 2, got {}", file.dim))
        })?;
        if file.t_max == 0 || file.t_max > 1 << 20 {
            return Err(Error::LatticeDecode(format!(
                "t_max out of range: {}",
                file.t_max
            )));
        }
        if !(0.0..=1.0).contains(&file.p) {
            return Err(Error::LatticeDecode(format!(
                "probability out of range: {}",
                file.p
            )));
        }
        let mut n_sites: u64 = 1;
        for (k, r) in file.extent.iter().enumerate() {
            let len = r.hi as i64 - r.lo as i64 + 1;
            if len < 1 {
                return Err(Error::LatticeDecode(format!(
                    "axis {k} range [{}, {}] is empty",
                    r.lo, r.hi
                )));
            }
            if k >= dim.axes() && (r.lo != 0 || r.hi != 0) {
                return Err(Error::LatticeDecode(
                    "1D lattices must carry the trivial y range [0, 0]".into(),
                ));
            }
            n_sites = n_sites.saturating_mul(len as u64);
        }
        if n_sites > MAX_DECODED_SITES {
            return Err(Error::LatticeDecode(format!(
                "{n_sites} sites exceed the decode limit of {MAX_DECODED_SITES}"
            )));
        }
        let mut kinds = Vec::with_capacity(n_sites as usize);
        for (count, sym) in &file.kinds {
            let kind = match sym.as_str() {
                "H" => CoinKind::Hadamard,
                "X" => CoinKind::BitFlip,
                other => {
                    return Err(Error::LatticeDecode(format!(
                        "unknown coin symbol {other:?}"
                    )))
                }
            };
            if *count == 0 || *count > n_sites - kinds.len() as u64 {
                return Err(Error::LatticeDecode(format!(
                    "run length {count} does not fit the {n_sites}-site lattice"
                )));
            }
            kinds.extend(std::iter::repeat_n(kind, *count as usize));
        }
        if kinds.len() as u64 != n_sites {
            return Err(Error::LatticeDecode(format!(
                "runs cover {} of {} sites",
                kinds.len(),
                n_sites
            )));
        }
        let extent = Extent::from_parts(
            dim,
            file.t_max,
            [
                crate::geometry::AxisRange::new(file.extent[0].lo, file.extent[0].hi),
                crate::geometry::AxisRange::new(file.extent[1].lo, file.extent[1].hi),
            ],
        );
        let mut lattice = CoinLattice::from_kinds(extent, file.p, kinds)?;
        lattice.seed = file.seed;
        Ok(lattice)
    }
}

impl Serialize for CoinLattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoinLattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = LatticeFile::deserialize(d)?;
        CoinLattice::try_from(file).map_err(D::Error::custom)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::CoinValue::{Minus, Plus};
    use crate::rng::trial_stream;

    pub(crate) fn all_hadamard(extent: Extent) -> CoinLattice {
        CoinLattice::all_hadamard(extent)
    }

    pub(crate) fn with_bitflips(extent: Extent, defects: &[Position]) -> CoinLattice {
        let mut kinds = vec![CoinKind::Hadamard; extent.n_sites()];
        for d in defects {
            kinds[extent.site_index(*d).unwrap()] = CoinKind::BitFlip;
        }
        CoinLattice::from_kinds(extent, 1.0, kinds).unwrap()
    }

    #[test]
    fn p_one_is_defect_free() {
        let ext = Extent::nominal(Dim::Two, 5);
        let lat = CoinLattice::generate(ext, 1.0, &[], &mut trial_stream(1, 0)).unwrap();
        assert_eq!(lat.defect_fraction(), 0.0);
    }

    #[test]
    fn p_zero_defects_everywhere_except_protected() {
        let ext = Extent::nominal(Dim::One, 4);
        let start = Position::origin();
        let lat = CoinLattice::generate(ext, 0.0, &[start], &mut trial_stream(1, 0)).unwrap();
        for pos in ext.sites() {
            let expect = if pos == start {
                CoinKind::Hadamard
            } else {
                CoinKind::BitFlip
            };
            assert_eq!(lat.kind_at(pos), Some(expect));
        }
    }

    #[test]
    fn defect_fraction_matches_binomial_statistics() {
        // 1000 lattices of 21×21 sites at p = 0.7: the mean defect fraction
        // estimates 0.3 with σ = √(0.3·0.7/441)/√1000.
        let ext = Extent::nominal(Dim::Two, 10);
        let n_lattices = 1000;
        let mut sum = 0.0;
        for k in 0..n_lattices {
            let lat = CoinLattice::generate(ext, 0.7, &[], &mut trial_stream(2024, k)).unwrap();
            sum += lat.defect_fraction();
        }
        let mean = sum / n_lattices as f64;
        let sigma = (0.3_f64 * 0.7 / 441.0).sqrt() / (n_lattices as f64).sqrt();
        assert!(
            (mean - 0.3).abs() < 3.0 * sigma,
            "mean defect fraction {mean} vs 0.3 ± {:.2e}",
            3.0 * sigma
        );
    }

    #[test]
    fn same_seed_same_lattice() {
        let ext = Extent::nominal(Dim::Two, 6);
        let a = CoinLattice::generate_seeded(ext, 0.5, &[Position::origin()], 99).unwrap();
        let b = CoinLattice::generate_seeded(ext, 0.5, &[Position::origin()], 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn protected_site_outside_extent_is_rejected() {
        let ext = Extent::nominal(Dim::One, 3);
        let err = CoinLattice::generate(ext, 0.5, &[Position::new(4, 0)], &mut trial_stream(0, 0))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn defect_reverses_the_walker_in_1d() {
        let ext = Extent::nominal(Dim::One, 5);
        let lat = with_bitflips(ext, &[Position::new(3, 0), Position::new(-1, 0)]);
        let back = defect_reversal_check(&lat, Position::new(3, 0), [Plus, Plus]).unwrap();
        assert_eq!(back, Position::new(2, 0));
        let back = defect_reversal_check(&lat, Position::new(-1, 0), [Minus, Plus]).unwrap();
        assert_eq!(back, Position::new(0, 0));
    }

    #[test]
    fn defect_reverses_both_axes_in_2d() {
        let ext = Extent::nominal(Dim::Two, 4);
        let lat = with_bitflips(ext, &[Position::new(2, 2)]);
        let back = defect_reversal_check(&lat, Position::new(2, 2), [Plus, Minus]).unwrap();
        assert_eq!(back, Position::new(1, 3));
    }

    #[test]
    fn reversal_check_rejects_open_sites() {
        let ext = Extent::nominal(Dim::One, 3);
        let lat = all_hadamard(ext);
        let err = defect_reversal_check(&lat, Position::origin(), [Plus, Plus]).unwrap_err();
        assert!(matches!(err, Error::NotADefect { .. }));
    }

    #[test]
    fn json_round_trip_preserves_the_lattice() {
        let ext = Extent::for_walk(Dim::Two, 4, Position::new(-4, 0), 4).unwrap();
        let lat = CoinLattice::generate_seeded(ext, 0.6, &[Position::new(-4, 0)], 11).unwrap();
        let text = lat.to_json_string();
        let back = CoinLattice::from_json_str(&text).unwrap();
        assert_eq!(lat, back);
    }

    #[test]
    fn decoder_rejects_bad_run_lengths() {
        let ext = Extent::nominal(Dim::One, 2);
        let lat = CoinLattice::all_hadamard(ext);
        let text = lat.to_json_string();
        let truncated = text.replace("[5,\"H\"]", "[4,\"H\"]");
        assert!(matches!(
            CoinLattice::from_json_str(&truncated),
            Err(Error::LatticeDecode(_))
        ));
        let overlong = text.replace("[5,\"H\"]", "[6,\"H\"]");
        assert!(matches!(
            CoinLattice::from_json_str(&overlong),
            Err(Error::LatticeDecode(_))
        ));
    }
}
