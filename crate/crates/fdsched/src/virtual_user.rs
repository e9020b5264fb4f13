//! Virtual users: the joint uplink/downlink activation unit of a slot.
//!
//! A virtual user pairs one uplink user with one downlink user; either side
//! may be idle (half-duplex operation), but not both, and a half-duplex user
//! cannot transmit and receive at once, so the two sides must differ.

/// One candidate activation: `ul` transmits to the base station while the
/// base station transmits to `dl`. User indices are 0-based; `None` is idle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VirtualUser {
    /// Uplink user, or `None` if the uplink is idle this slot.
    pub ul: Option<usize>,
    /// Downlink user, or `None` if the downlink is idle this slot.
    pub dl: Option<usize>,
}

impl VirtualUser {
    /// Builds a virtual user, checking the structural invariants.
    pub fn new(ul: Option<usize>, dl: Option<usize>) -> VirtualUser {
        assert!(ul.is_some() || dl.is_some(), "virtual user cannot be idle in both directions");
        if let (Some(i), Some(j)) = (ul, dl) {
            assert_ne!(i, j, "a half-duplex user cannot be scheduled in both directions");
        }
        VirtualUser { ul, dl }
    }

    /// Half-duplex uplink activation of user `i`.
    pub fn hd_ul(i: usize) -> VirtualUser {
        VirtualUser { ul: Some(i), dl: None }
    }

    /// Half-duplex downlink activation of user `j`.
    pub fn hd_dl(j: usize) -> VirtualUser {
        VirtualUser { ul: None, dl: Some(j) }
    }

    /// Full-duplex pairing of uplink user `i` with downlink user `j`.
    pub fn fd(i: usize, j: usize) -> VirtualUser {
        VirtualUser::new(Some(i), Some(j))
    }

    /// True when both directions are active.
    pub fn is_fd(&self) -> bool {
        self.ul.is_some() && self.dl.is_some()
    }

    /// Grid coordinates over the `(n+1) x (n+1)` activation table, where
    /// index 0 is the idle direction and user `k` maps to `k + 1`.
    pub fn grid(&self) -> (usize, usize) {
        (self.ul.map_or(0, |i| i + 1), self.dl.map_or(0, |j| j + 1))
    }

    /// Inverse of [`VirtualUser::grid`]; `(0, 0)` is not a virtual user.
    pub fn from_grid(i: usize, j: usize) -> VirtualUser {
        VirtualUser::new(i.checked_sub(1), j.checked_sub(1))
    }
}

impl std::fmt::Display for VirtualUser {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (i, j) = self.grid();
        write!(f, "v({i},{j})")
    }
}

/// A subset of the virtual users of an `n`-user cell, iterated in the fixed
/// lexicographic `(i, j)` grid order used for deterministic tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualUserSet {
    n: usize,
    flags: Vec<bool>,
}

impl VirtualUserSet {
    /// Empty set for an `n`-user cell.
    pub fn empty(n: usize) -> VirtualUserSet {
        VirtualUserSet { n, flags: vec![false; (n + 1) * (n + 1)] }
    }

    /// Every virtual user: all half-duplex and all full-duplex pairings.
    pub fn full(n: usize) -> VirtualUserSet {
        let mut s = VirtualUserSet::empty(n);
        for v in all_virtual_users(n) {
            s.insert(v);
        }
        s
    }

    /// Only the half-duplex virtual users (single-direction activations).
    pub fn hd_only(n: usize) -> VirtualUserSet {
        let mut s = VirtualUserSet::empty(n);
        for u in 0..n {
            s.insert(VirtualUser::hd_ul(u));
            s.insert(VirtualUser::hd_dl(u));
        }
        s
    }

    /// Number of users of the underlying cell.
    pub fn n_users(&self) -> usize {
        self.n
    }

    fn idx(&self, v: VirtualUser) -> usize {
        let (i, j) = v.grid();
        assert!(i <= self.n && j <= self.n, "virtual user out of range for this set");
        i * (self.n + 1) + j
    }

    /// Adds `v` to the set.
    pub fn insert(&mut self, v: VirtualUser) {
        let idx = self.idx(v);
        self.flags[idx] = true;
    }

    /// Removes `v` from the set.
    pub fn remove(&mut self, v: VirtualUser) {
        let idx = self.idx(v);
        self.flags[idx] = false;
    }

    /// Membership test.
    pub fn contains(&self, v: VirtualUser) -> bool {
        self.flags[self.idx(v)]
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// True when no virtual user is included.
    pub fn is_empty(&self) -> bool {
        !self.flags.iter().any(|&f| f)
    }

    /// Iterates members in lexicographic grid order.
    pub fn iter(&self) -> impl Iterator<Item = VirtualUser> + '_ {
        let n = self.n;
        (0..=n).flat_map(move |i| (0..=n).map(move |j| (i, j))).filter_map(move |(i, j)| {
            if i != j && self.flags[i * (n + 1) + j] {
                Some(VirtualUser::from_grid(i, j))
            } else {
                None
            }
        })
    }
}

/// All virtual users of an `n`-user cell in lexicographic grid order.
pub fn all_virtual_users(n: usize) -> impl Iterator<Item = VirtualUser> {
    (0..=n)
        .flat_map(move |i| (0..=n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .map(|(i, j)| VirtualUser::from_grid(i, j))
}
