//! Finite lattice windows and passage-time fields.
//!
//! A field attaches a weight to every oriented edge of a rectangular window.
//! Open edges weigh exactly 1; closed edges weigh `1 + excess` with a
//! strictly positive excess drawn from the configured distribution. A second,
//! independent stream supplies one uniform per site for randomized
//! tie-breaking.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::streams::{StreamKey, STREAM_UNIFORMS, STREAM_WEIGHTS};
use crate::{Error, Result};

/// A lattice point, written `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x: i32,
    pub t: i32,
}

impl Site {
    pub const fn new(x: i32, t: i32) -> Self {
        Site { x, t }
    }

    /// L1 distance to another site.
    pub fn l1(self, other: Site) -> u64 {
        (self.x as i64 - other.x as i64).unsigned_abs()
            + (self.t as i64 - other.t as i64).unsigned_abs()
    }

    /// Argument of the site seen as a vector, `atan2(t, x)`.
    pub fn arg(self) -> f64 {
        libm::atan2(self.t as f64, self.x as f64)
    }

    /// Anti-diagonal coordinate `x + t`.
    pub fn diag(self) -> i64 {
        self.x as i64 + self.t as i64
    }

    pub fn offset(self, dx: i32, dt: i32) -> Site {
        Site::new(self.x + dx, self.t + dt)
    }
}

/// Integer displacement between two sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Displacement {
    pub dx: i32,
    pub dt: i32,
}

impl Displacement {
    pub fn between(from: Site, to: Site) -> Self {
        Displacement { dx: to.x - from.x, dt: to.t - from.t }
    }

    pub fn l1(self) -> u64 {
        self.dx.unsigned_abs() as u64 + self.dt.unsigned_abs() as u64
    }
}

/// The two oriented edge directions stored per site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Edge towards `(x + 1, t)`.
    Right,
    /// Edge towards `(x, t + 1)`.
    Up,
}

/// Path orientation: `Forward` steps are `(+1,0)/(0,+1)`, `Anti` steps are
/// `(-1,0)/(0,-1)` over the same stored edge set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Forward,
    Anti,
}

impl Orientation {
    /// Displacement of a step along `axis` under this orientation.
    pub fn step(self, axis: Axis) -> (i32, i32) {
        match (self, axis) {
            (Orientation::Forward, Axis::Right) => (1, 0),
            (Orientation::Forward, Axis::Up) => (0, 1),
            (Orientation::Anti, Axis::Right) => (-1, 0),
            (Orientation::Anti, Axis::Up) => (0, -1),
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Anti,
            Orientation::Anti => Orientation::Forward,
        }
    }
}

/// Axis-aligned rectangle of lattice sites, both bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub x_min: i32,
    pub x_max: i32,
    pub t_min: i32,
    pub t_max: i32,
}

impl Window {
    pub fn new(x_min: i32, x_max: i32, t_min: i32, t_max: i32) -> Result<Self> {
        if x_min > x_max || t_min > t_max {
            return Err(Error::Config("window bounds must satisfy min <= max"));
        }
        let w = Window { x_min, x_max, t_min, t_max };
        if w.len() > (1usize << 31) {
            return Err(Error::Config("window exceeds 2^31 sites"));
        }
        Ok(w)
    }

    /// Square window `[lo, hi] x [lo, hi]`.
    pub fn square(lo: i32, hi: i32) -> Result<Self> {
        Window::new(lo, hi, lo, hi)
    }

    pub fn width(&self) -> usize {
        (self.x_max as i64 - self.x_min as i64 + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.t_max as i64 - self.t_min as i64 + 1) as usize
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: Site) -> bool {
        s.x >= self.x_min && s.x <= self.x_max && s.t >= self.t_min && s.t <= self.t_max
    }

    /// Row-major index of an in-window site.
    #[inline]
    pub fn index(&self, s: Site) -> usize {
        debug_assert!(self.contains(s));
        (s.t - self.t_min) as usize * self.width() + (s.x - self.x_min) as usize
    }

    pub fn site_at(&self, index: usize) -> Site {
        let w = self.width();
        Site::new(
            self.x_min + (index % w) as i32,
            self.t_min + (index / w) as i32,
        )
    }

    /// L1 distance to the far boundary of the given orientation: the
    /// `x_max`/`t_max` sides for `Forward`, the `x_min`/`t_min` sides for
    /// `Anti`.
    pub fn far_distance(&self, s: Site, orientation: Orientation) -> u32 {
        match orientation {
            Orientation::Forward => {
                ((self.x_max - s.x).min(self.t_max - s.t)).max(0) as u32
            }
            Orientation::Anti => ((s.x - self.x_min).min(s.t - self.t_min)).max(0) as u32,
        }
    }

    /// L1 distance to the nearest of the four window sides.
    pub fn boundary_distance(&self, s: Site) -> u32 {
        self.far_distance(s, Orientation::Forward)
            .min(self.far_distance(s, Orientation::Anti))
    }

    /// Iterates sites in row-major order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        let w = *self;
        (0..w.len()).map(move |i| w.site_at(i))
    }
}

/// Law of the excess `weight - 1` of a closed edge. Every variant produces a
/// strictly positive excess, so the weight atom at 1 is isolated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExcessDistribution {
    /// Closed edges all weigh `value`.
    Atom { value: f64 },
    /// Weight `1 + Exp(rate)`.
    ShiftedExponential { rate: f64 },
    /// Weight uniform on `[lo, hi]` with `1 < lo < hi`.
    ShiftedUniform { lo: f64, hi: f64 },
}

/// Smallest representable excess; keeps closed weights strictly above 1 even
/// when the inverse CDF underflows.
const EXCESS_FLOOR: f64 = 1e-12;

impl ExcessDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExcessDistribution::Atom { value } => {
                if value.is_nan() || value <= 1.0 || !value.is_finite() {
                    return Err(Error::Config("atom weight must be finite and > 1"));
                }
            }
            ExcessDistribution::ShiftedExponential { rate } => {
                if rate.is_nan() || rate <= 0.0 || !rate.is_finite() {
                    return Err(Error::Config("exponential rate must be finite and > 0"));
                }
            }
            ExcessDistribution::ShiftedUniform { lo, hi } => {
                if !(1.0 < lo && lo < hi) || !hi.is_finite() {
                    return Err(Error::Config("uniform bounds must satisfy 1 < lo < hi"));
                }
            }
        }
        Ok(())
    }

    /// Weight of a closed edge given a unit uniform.
    pub fn weight_from_unit(&self, u: f64) -> f64 {
        let excess = match *self {
            ExcessDistribution::Atom { value } => value - 1.0,
            ExcessDistribution::ShiftedExponential { rate } => -libm::log(1.0 - u) / rate,
            ExcessDistribution::ShiftedUniform { lo, hi } => (lo - 1.0) + u * (hi - lo),
        };
        1.0 + excess.max(EXCESS_FLOOR)
    }

    /// Lower bound on the gap between 1 and any closed weight.
    pub fn min_gap(&self) -> f64 {
        match *self {
            ExcessDistribution::Atom { value } => value - 1.0,
            ExcessDistribution::ShiftedExponential { .. } => EXCESS_FLOOR,
            ExcessDistribution::ShiftedUniform { lo, .. } => lo - 1.0,
        }
    }
}

/// Compact bitset, one bit per site.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits {
    words: Box<[u64]>,
}

impl Bits {
    fn zeros(len: usize) -> Self {
        Bits { words: vec![0u64; len.div_ceil(64)].into_boxed_slice() }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Passage times on the oriented edges of a window, plus per-site uniforms.
///
/// Openness bits are materialized; weights of closed edges and the uniforms
/// are evaluated on demand from the counter-based streams, so a field costs
/// two bits per site regardless of window size.
#[derive(Debug, Clone)]
pub struct PassageField {
    window: Window,
    p: f64,
    excess: ExcessDistribution,
    seed: u64,
    open_right: Bits,
    open_up: Bits,
    weights_key: StreamKey,
    uniforms_key: StreamKey,
    /// Explicit uniforms for pattern-built fields; seeded fields use the
    /// uniform stream directly.
    uniform_override: Option<Box<[f64]>>,
}

// weight-stream slots per site
const SLOT_OPEN_RIGHT: u64 = 0;
const SLOT_EXCESS_RIGHT: u64 = 1;
const SLOT_OPEN_UP: u64 = 2;
const SLOT_EXCESS_UP: u64 = 3;

impl PassageField {
    /// Samples a field: each oriented edge is open (weight 1) with
    /// probability `p`, otherwise closed with weight drawn from `excess`.
    /// Fully deterministic given `seed`.
    pub fn sample(
        window: Window,
        p: f64,
        excess: ExcessDistribution,
        seed: u64,
    ) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config("p must lie in (0, 1]"));
        }
        excess.validate()?;
        let weights_key = StreamKey::new(seed, STREAM_WEIGHTS);
        let len = window.len();
        let mut open_right = Bits::zeros(len);
        let mut open_up = Bits::zeros(len);
        let mut idx = 0usize;
        for t in window.t_min..=window.t_max {
            for x in window.x_min..=window.x_max {
                if weights_key.unit(x, t, SLOT_OPEN_RIGHT) < p {
                    open_right.set(idx, true);
                }
                if weights_key.unit(x, t, SLOT_OPEN_UP) < p {
                    open_up.set(idx, true);
                }
                idx += 1;
            }
        }
        Ok(PassageField {
            window,
            p,
            excess,
            seed,
            open_right,
            open_up,
            weights_key,
            uniforms_key: StreamKey::new(seed, STREAM_UNIFORMS),
            uniform_override: None,
        })
    }

    /// Builds a field with explicit openness and uniforms. Closed-edge
    /// weights still come from the seed's weight stream.
    pub fn from_pattern(
        window: Window,
        p: f64,
        excess: ExcessDistribution,
        seed: u64,
        open: impl Fn(Site, Axis) -> bool,
        uniform: impl Fn(Site) -> f64,
    ) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config("p must lie in (0, 1]"));
        }
        excess.validate()?;
        let len = window.len();
        let mut open_right = Bits::zeros(len);
        let mut open_up = Bits::zeros(len);
        let mut uniforms = Vec::with_capacity(len);
        for (i, s) in window.sites().enumerate() {
            open_right.set(i, open(s, Axis::Right));
            open_up.set(i, open(s, Axis::Up));
            let u = uniform(s);
            debug_assert!((0.0..1.0).contains(&u));
            uniforms.push(u);
        }
        Ok(PassageField {
            window,
            p,
            excess,
            seed,
            open_right,
            open_up,
            weights_key: StreamKey::new(seed, STREAM_WEIGHTS),
            uniforms_key: StreamKey::new(seed, STREAM_UNIFORMS),
            uniform_override: Some(uniforms.into_boxed_slice()),
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn excess(&self) -> ExcessDistribution {
        self.excess
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn edge_endpoints(&self, from: Site, axis: Axis) -> Result<Site> {
        let (dx, dt) = Orientation::Forward.step(axis);
        let to = from.offset(dx, dt);
        if !self.window.contains(from) || !self.window.contains(to) {
            return Err(Error::OutOfWindow);
        }
        Ok(to)
    }

    /// True iff the stored weight of the oriented edge is exactly 1.
    pub fn is_open(&self, from: Site, axis: Axis) -> Result<bool> {
        self.edge_endpoints(from, axis)?;
        Ok(self.open_unchecked(from, axis))
    }

    #[inline]
    pub(crate) fn open_unchecked(&self, from: Site, axis: Axis) -> bool {
        self.open_at_index(self.window.index(from), axis)
    }

    /// Raw-index openness lookup for the table DP hot loop.
    #[inline]
    pub(crate) fn open_at_index(&self, idx: usize, axis: Axis) -> bool {
        match axis {
            Axis::Right => self.open_right.get(idx),
            Axis::Up => self.open_up.get(idx),
        }
    }

    /// Weight of the oriented edge starting at `from`.
    pub fn weight(&self, from: Site, axis: Axis) -> Result<f64> {
        self.edge_endpoints(from, axis)?;
        Ok(self.weight_unchecked(from, axis))
    }

    #[inline]
    pub(crate) fn weight_unchecked(&self, from: Site, axis: Axis) -> f64 {
        if self.open_unchecked(from, axis) {
            1.0
        } else {
            let slot = match axis {
                Axis::Right => SLOT_EXCESS_RIGHT,
                Axis::Up => SLOT_EXCESS_UP,
            };
            self.excess
                .weight_from_unit(self.weights_key.unit(from.x, from.t, slot))
        }
    }

    /// The tie-breaking uniform attached to a site.
    pub fn uniform(&self, site: Site) -> Result<f64> {
        if !self.window.contains(site) {
            return Err(Error::OutOfWindow);
        }
        Ok(self.uniform_unchecked(site))
    }

    #[inline]
    pub(crate) fn uniform_unchecked(&self, site: Site) -> f64 {
        match &self.uniform_override {
            Some(us) => us[self.window.index(site)],
            None => self.uniforms_key.unit(site.x, site.t, 0),
        }
    }

    /// Openness of the step taken from `site` along `axis` under the given
    /// orientation; `None` when the step leaves the window. Anti steps
    /// traverse the stored edge of the neighbouring site.
    #[inline]
    pub fn step_open(&self, site: Site, orientation: Orientation, axis: Axis) -> Option<bool> {
        let (dx, dt) = orientation.step(axis);
        let to = site.offset(dx, dt);
        if !self.window.contains(to) || !self.window.contains(site) {
            return None;
        }
        let base = match orientation {
            Orientation::Forward => site,
            Orientation::Anti => to,
        };
        Some(self.open_unchecked(base, axis))
    }

    /// Fraction of in-window oriented edges that are open.
    pub fn open_fraction(&self) -> f64 {
        // exclude the stored bits of edges that would leave the window
        let mut total = 0u64;
        let mut open = self.open_right.count_ones() + self.open_up.count_ones();
        for t in self.window.t_min..=self.window.t_max {
            let idx = self.window.index(Site::new(self.window.x_max, t));
            if self.open_right.get(idx) {
                open -= 1;
            }
        }
        for x in self.window.x_min..=self.window.x_max {
            let idx = self.window.index(Site::new(x, self.window.t_max));
            if self.open_up.get(idx) {
                open -= 1;
            }
        }
        total += (self.window.width() as u64 - 1) * self.window.height() as u64;
        total += self.window.width() as u64 * (self.window.height() as u64 - 1);
        open as f64 / total as f64
    }

    /// Bit-level equality of openness patterns; used by reproducibility
    /// checks.
    pub fn same_openness(&self, other: &PassageField) -> bool {
        self.window == other.window
            && self.open_right == other.open_right
            && self.open_up == other.open_up
    }
}
