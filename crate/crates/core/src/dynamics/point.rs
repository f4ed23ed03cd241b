use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Letter, Word, MAX_RANK};

/// An eventually periodic boundary point `u·v^∞`, kept in normal form: `v` is
/// cyclically reduced and not a proper power, `u·v` is reduced, and `u` is as
/// short as possible. Two points are equal iff their normal forms are.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalBoundaryPoint {
    head: Word,
    period: Word,
}

impl RationalBoundaryPoint {
    pub fn new(head: &Word, period: &Word) -> Result<RationalBoundaryPoint> {
        if period.is_identity() {
            return Err(Error::InvalidArgument("period reduces to the identity".into()));
        }
        // v = c·p·c⁻¹ gives u·v^∞ = (u·c)·p^∞
        let (conj, core) = period.cyclic_decomposition();
        let mut head = head.multiply(&conj);
        let mut period = core.primitive_root();
        while let (Some(h), Some(p)) = (head.last(), period.first()) {
            if h == p.inverse() {
                head.pop();
                period = period.rotate_left(1);
            } else if h == period.last().unwrap() {
                head.pop();
                period = period.rotate_left(period.len() - 1);
            } else {
                break;
            }
        }
        Ok(RationalBoundaryPoint { head, period })
    }

    /// `t^∞`, the attracting fixed point of `t`.
    pub fn attracting(t: &Word) -> Result<RationalBoundaryPoint> {
        Self::new(&Word::identity(), t)
    }

    /// `t^{−∞}`, the repelling fixed point of `t`.
    pub fn repelling(t: &Word) -> Result<RationalBoundaryPoint> {
        Self::new(&Word::identity(), &t.inverse())
    }

    pub fn head(&self) -> &Word {
        &self.head
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn min_rank(&self) -> usize {
        self.head.min_rank().max(self.period.min_rank())
    }

    /// The first `n` letters, i.e. the point `γ(n)` of the geodesic ray from
    /// the identity.
    pub fn prefix(&self, n: usize) -> Word {
        if n <= self.head.len() {
            return self.head.prefix(n);
        }
        let mut letters = self.head.letters().to_vec();
        letters.extend(self.period.letters().iter().cycle().take(n - self.head.len()));
        Word::from_reduced(letters)
    }

    /// The point `g·x`.
    pub fn act(&self, g: &Word) -> RationalBoundaryPoint {
        Self::new(&g.multiply(&self.head), &self.period).expect("period is nontrivial")
    }

    /// `γ(n)⁻¹·x`: the ray seen from its `n`-th vertex.
    pub fn shift(&self, n: usize) -> RationalBoundaryPoint {
        self.act(&self.prefix(n).inverse())
    }

    /// Gromov product `(x | y)_1`, the length of the common prefix.
    pub fn gromov_product(&self, other: &RationalBoundaryPoint) -> Option<usize> {
        if self == other {
            return None;
        }
        let bound = self.head.len().max(other.head.len()) + self.period.len() * other.period.len() + 1;
        let (a, b) = (self.prefix(bound), other.prefix(bound));
        Some(a.common_prefix_len(&b))
    }

    /// A random point with head length at most `max_head` and period length
    /// in `1..=max_period`.
    pub fn random<R: Rng>(rng: &mut R, rank: usize, max_head: usize, max_period: usize) -> Self {
        fn word<R: Rng>(rng: &mut R, rank: usize, len: usize) -> Word {
            let mut w = Word::identity();
            while w.len() < len {
                w.push(Letter::from_code(rng.gen_range(0..2 * rank)));
            }
            w
        }
        let head_len = rng.gen_range(0..=max_head);
        let head = word(rng, rank, head_len);
        loop {
            let period_len = rng.gen_range(1..=max_period.max(1));
            let period = word(rng, rank, period_len);
            if let Ok(p) = Self::new(&head, &period) {
                return p;
            }
        }
    }
}

/// `g·x`.
pub fn act_on_point(g: &Word, x: &RationalBoundaryPoint) -> RationalBoundaryPoint {
    x.act(g)
}

impl fmt::Display for RationalBoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.head.is_identity() {
            write!(f, "{}", self.head)?;
        }
        write!(f, "({})", self.period)
    }
}

impl FromStr for RationalBoundaryPoint {
    type Err = Error;

    /// Parses `u(v)`, e.g. `b(a)` or `(ab)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("expected u(v), got {s:?}"));
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let head = match &s[..open] {
            "" => Word::identity(),
            h => Word::parse(h, MAX_RANK)?,
        };
        Self::new(&head, &Word::parse(inner, MAX_RANK)?)
    }
}

impl Serialize for RationalBoundaryPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RationalBoundaryPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Image of a cylinder under a group element: again a cylinder, or the
/// complement of one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CylinderImage {
    Cylinder(Word),
    Complement(Word),
}

impl CylinderImage {
    /// `g·[w]` for nonempty `w`.
    pub fn of(g: &Word, w: &Word) -> CylinderImage {
        assert!(!w.is_identity(), "the empty cylinder is the whole boundary");
        let gw = g.multiply(w);
        if gw.len() + w.len() > g.len() {
            CylinderImage::Cylinder(gw)
        } else {
            // g = g₁·w⁻¹, so [w] goes onto ∂G ∖ g₁[c] with c = w_last⁻¹
            let mut y = gw;
            y.push(w.last().unwrap().inverse());
            CylinderImage::Complement(y)
        }
    }

    /// Whether the image meets the cylinder `[z]`.
    pub fn meets(&self, z: &Word) -> bool {
        match self {
            CylinderImage::Cylinder(x) => x.is_prefix_of(z) || z.is_prefix_of(x),
            CylinderImage::Complement(y) => !y.is_prefix_of(z),
        }
    }

    /// Whether the image lies inside `[z]`.
    pub fn inside(&self, z: &Word) -> bool {
        match self {
            CylinderImage::Cylinder(x) => z.is_prefix_of(x),
            CylinderImage::Complement(_) => z.is_identity(),
        }
    }
}
