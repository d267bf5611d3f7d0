//! Dempster-Shafer primitives over small frames.
//!
//! Focal sets are bit sets: element `k` of the frame (1-based) is bit `k - 1`.
//! All operations are pure.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Absolute tolerance used when checking that masses sum to one.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Masses below this value after normalization are dropped by [`combine`].
pub const MASS_FLOOR: f64 = 1e-15;

/// A frame of discernment `{1, ..., size}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    size: u8,
}

impl Frame {
    pub const MAX_SIZE: usize = 64;

    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > Self::MAX_SIZE {
            return Err(Error::InvalidFrame(size));
        }
        Ok(Self { size: size as u8 })
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    /// Bit mask of every element in the frame.
    pub fn mask(&self) -> u64 {
        if self.size() == 64 {
            u64::MAX
        } else {
            (1u64 << self.size()) - 1
        }
    }

    /// The whole frame, Θ.
    pub fn full(&self) -> FocalSet {
        FocalSet(self.mask())
    }

    pub fn contains(&self, set: FocalSet) -> bool {
        set.0 & !self.mask() == 0
    }

    fn check(&self, other: &Frame) -> Result<()> {
        if self != other {
            return Err(Error::FrameMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(())
    }
}

/// A subset of a frame encoded as a 64-bit set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FocalSet(u64);

impl FocalSet {
    pub const EMPTY: FocalSet = FocalSet(0);

    pub fn from_bits(bits: u64) -> Self {
        Self(bits)
    }

    /// Builds a set from 1-based element labels, checking them against `frame`.
    pub fn from_elements(frame: Frame, elements: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &element in elements {
            if element == 0 || element > frame.size() {
                return Err(Error::ElementOutOfFrame {
                    element,
                    frame_size: frame.size(),
                });
            }
            bits |= 1u64 << (element - 1);
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> u64 {
        self.0
    }

    /// 1-based element labels in ascending order.
    pub fn elements(&self) -> Vec<usize> {
        (0..64)
            .filter(|b| self.0 & (1u64 << b) != 0)
            .map(|b| b + 1)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn intersection(&self, other: &FocalSet) -> FocalSet {
        FocalSet(self.0 & other.0)
    }

    pub fn is_disjoint(&self, other: &FocalSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(&self, other: &FocalSet) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Debug for FocalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements()).finish()
    }
}

/// Evidence committing `support` to one focal set and the rest to the frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimpleSupport {
    frame: Frame,
    focal: FocalSet,
    support: f64,
}

impl SimpleSupport {
    pub fn new(frame: Frame, focal: FocalSet, support: f64) -> Result<Self> {
        if focal.is_empty() {
            return Err(Error::EmptyFocalSet);
        }
        if !frame.contains(focal) {
            let element = focal
                .elements()
                .into_iter()
                .find(|&e| e > frame.size())
                .unwrap_or(0);
            return Err(Error::ElementOutOfFrame {
                element,
                frame_size: frame.size(),
            });
        }
        if !(0.0..=1.0).contains(&support) {
            return Err(Error::InvalidSupport(support));
        }
        Ok(Self {
            frame,
            focal,
            support,
        })
    }

    /// Shorthand for `new` with 1-based element labels.
    pub fn from_elements(frame: Frame, elements: &[usize], support: f64) -> Result<Self> {
        Self::new(frame, FocalSet::from_elements(frame, elements)?, support)
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn focal(&self) -> FocalSet {
        self.focal
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    /// `m(A) = s`, `m(Θ) = 1 - s`; zero masses are omitted.
    pub fn to_mass_function(&self) -> MassFunction {
        let mut masses = BTreeMap::new();
        let full = self.frame.full();
        if self.focal == full {
            masses.insert(full, 1.0);
        } else {
            if self.support > 0.0 {
                masses.insert(self.focal, self.support);
            }
            if self.support < 1.0 {
                masses.insert(full, 1.0 - self.support);
            }
        }
        MassFunction {
            frame: self.frame,
            masses,
        }
    }
}

/// A basic probability assignment over a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    masses: BTreeMap<FocalSet, f64>,
}

impl MassFunction {
    pub fn new(frame: Frame, assignments: impl IntoIterator<Item = (FocalSet, f64)>) -> Result<Self> {
        let mut masses = BTreeMap::new();
        for (set, mass) in assignments {
            if set.is_empty() {
                return Err(Error::InvalidMass("mass assigned to the empty set".into()));
            }
            if !frame.contains(set) {
                return Err(Error::InvalidMass(format!("{set:?} is not a subset of the frame")));
            }
            if !(mass > 0.0 && mass <= 1.0) {
                return Err(Error::InvalidMass(format!("mass {mass} outside (0, 1]")));
            }
            *masses.entry(set).or_insert(0.0) += mass;
        }
        let total: f64 = masses.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMass(format!("masses sum to {total}")));
        }
        Ok(Self { frame, masses })
    }

    /// All mass on the frame.
    pub fn vacuous(frame: Frame) -> Self {
        Self {
            frame,
            masses: BTreeMap::from([(frame.full(), 1.0)]),
        }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn mass(&self, set: FocalSet) -> f64 {
        self.masses.get(&set).copied().unwrap_or(0.0)
    }

    pub fn focal_elements(&self) -> impl Iterator<Item = (FocalSet, f64)> + '_ {
        self.masses.iter().map(|(s, m)| (*s, *m))
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }
}

/// Dempster's rule. Returns the normalized combination and the conflict `κ`.
pub fn combine(m1: &MassFunction, m2: &MassFunction) -> Result<(MassFunction, f64)> {
    m1.frame.check(&m2.frame)?;
    let mut joint: BTreeMap<FocalSet, f64> = BTreeMap::new();
    let mut kappa = 0.0;
    for (a, ma) in m1.focal_elements() {
        for (b, mb) in m2.focal_elements() {
            let product = ma * mb;
            let meet = a.intersection(&b);
            if meet.is_empty() {
                kappa += product;
            } else {
                *joint.entry(meet).or_insert(0.0) += product;
            }
        }
    }
    let agreement: f64 = joint.values().sum();
    if joint.is_empty() || agreement <= 0.0 {
        return Err(Error::TotalConflict);
    }
    for mass in joint.values_mut() {
        *mass /= agreement;
    }
    let before = joint.len();
    joint.retain(|_, m| *m >= MASS_FLOOR);
    if joint.len() != before {
        let total: f64 = joint.values().sum();
        for mass in joint.values_mut() {
            *mass /= total;
        }
    }
    Ok((
        MassFunction {
            frame: m1.frame,
            masses: joint,
        },
        kappa,
    ))
}

/// `Bel(A)`: total mass of the subsets of `a`.
pub fn belief(m: &MassFunction, a: FocalSet) -> Result<f64> {
    check_query(m, a)?;
    Ok(m.focal_elements()
        .filter(|(b, _)| b.is_subset_of(&a))
        .map(|(_, mass)| mass)
        .sum())
}

/// `Pls(A)`: total mass of the focal sets meeting `a`.
pub fn plausibility(m: &MassFunction, a: FocalSet) -> Result<f64> {
    check_query(m, a)?;
    Ok(m.focal_elements()
        .filter(|(b, _)| !b.is_disjoint(&a))
        .map(|(_, mass)| mass)
        .sum())
}

fn check_query(m: &MassFunction, a: FocalSet) -> Result<()> {
    if !m.frame.contains(a) {
        let element = a.elements().into_iter().find(|&e| e > m.frame.size()).unwrap_or(0);
        return Err(Error::FrameMismatch {
            left: m.frame.size(),
            right: element,
        });
    }
    Ok(())
}

/// Weight of conflict `-ln(1 - s1 s2)` between two simple support functions
/// with disjoint focal sets, zero otherwise.
///
/// Two certain pieces of evidence on disjoint sets give `f64::INFINITY`.
pub fn pairwise_conflict(s1: &SimpleSupport, s2: &SimpleSupport) -> Result<f64> {
    s1.frame.check(&s2.frame)?;
    if !s1.focal.is_disjoint(&s2.focal) {
        return Ok(0.0);
    }
    let product = s1.support * s2.support;
    if product >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(-product).ln_1p())
}

/// Conflict of combining every member of `cluster` by Dempster's rule, in
/// input order.
///
/// Weights of conflict add along the chain, so the total is
/// `1 - Π(1 - κ_step)`. A total conflict anywhere yields 1. An empty cluster
/// has no conflict.
pub fn cluster_conflict(cluster: &[SimpleSupport]) -> Result<f64> {
    let Some((first, rest)) = cluster.split_first() else {
        return Ok(0.0);
    };
    let mut combined = first.to_mass_function();
    let mut agreement = 1.0;
    for piece in rest {
        match combine(&combined, &piece.to_mass_function()) {
            Ok((next, kappa)) => {
                agreement *= 1.0 - kappa;
                combined = next;
            }
            Err(Error::TotalConflict) => return Ok(1.0),
            Err(e) => return Err(e),
        }
    }
    Ok((1.0 - agreement).clamp(0.0, 1.0))
}

/// Metaconflict `1 - Π_i (1 - c_i)` of a partition of `evidence`.
pub fn metaconflict(evidence: &[SimpleSupport], partition: &Partition) -> Result<f64> {
    if partition.len() != evidence.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} pieces, evidence has {}",
            partition.len(),
            evidence.len()
        )));
    }
    let mut agreement = 1.0;
    for members in partition.clusters() {
        let cluster: Vec<SimpleSupport> = members.iter().map(|&i| evidence[i]).collect();
        agreement *= 1.0 - cluster_conflict(&cluster)?;
    }
    Ok((1.0 - agreement).clamp(0.0, 1.0))
}

/// Linearized conflict: the sum of pairwise weights of conflict over
/// unordered pairs of `cluster`, scaled by `1 / lambda`.
pub fn linearized_conflict(cluster: &[SimpleSupport], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let mut total = 0.0;
    for (i, a) in cluster.iter().enumerate() {
        for b in &cluster[i + 1..] {
            total += pairwise_conflict(a, b)?;
        }
    }
    Ok(total / lambda)
}
