//! Lie strings, bounded-order channels and their suffix channels.
//!
//! A channel of order `k` over the alphabet `T = {0, .., t-1}` is a finite,
//! duplicate-free set of lie strings of length at most `k`, with at least one
//! string of length exactly `k`. Every search-space element is tracked by the
//! suffix channel of the lie string it has accumulated so far, so the family
//! of suffix channels doubles as the state alphabet of the game.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::Variant;

/// A single lie `(a, b)`: the truthful letter `a` answered as `b != a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lie {
    truth: u8,
    response: u8,
}

impl Lie {
    pub fn new(truth: u8, response: u8) -> Result<Self> {
        if truth == response {
            return Err(Error::InvalidChannel(format!(
                "lie ({truth},{response}) has equal truth and response"
            )));
        }
        Ok(Lie { truth, response })
    }

    pub fn truth(self) -> u8 {
        self.truth
    }

    pub fn response(self) -> u8 {
        self.response
    }

    /// The lie read backwards, `(b, a)`.
    pub fn swapped(self) -> Lie {
        Lie {
            truth: self.response,
            response: self.truth,
        }
    }

    /// Dense index in `0 .. t(t-1)`.
    pub fn index(self, t: u8) -> usize {
        let r = if self.response > self.truth {
            self.response - 1
        } else {
            self.response
        };
        self.truth as usize * (t as usize - 1) + r as usize
    }

    /// All `t(t-1)` lies, ordered by [`Lie::index`].
    pub fn all(t: u8) -> impl Iterator<Item = Lie> {
        (0..t).flat_map(move |a| {
            (0..t)
                .filter(move |&b| b != a)
                .map(move |b| Lie { truth: a, response: b })
        })
    }
}

impl fmt::Display for Lie {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.truth, self.response)
    }
}

/// An ordered list of lies. The empty string is `ε`.
///
/// Ordering is by length first, then lexicographic on `(a, b)` pairs; this is
/// the canonical order in which channels store their strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LieString(Vec<Lie>);

impl LieString {
    pub fn new(lies: Vec<Lie>) -> Self {
        LieString(lies)
    }

    pub fn empty() -> Self {
        LieString(Vec::new())
    }

    pub fn from_pairs(pairs: &[(u8, u8)]) -> Result<Self> {
        pairs
            .iter()
            .map(|&(a, b)| Lie::new(a, b))
            .collect::<Result<Vec<_>>>()
            .map(LieString)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lies(&self) -> &[Lie] {
        &self.0
    }

    pub fn push(&mut self, lie: Lie) {
        self.0.push(lie);
    }

    pub fn concat(&self, other: &LieString) -> LieString {
        let mut lies = self.0.clone();
        lies.extend_from_slice(&other.0);
        LieString(lies)
    }

    pub fn prefix(&self, len: usize) -> LieString {
        LieString(self.0[..len].to_vec())
    }

    /// `Some(v)` when `self = u v`.
    pub fn strip_prefix(&self, u: &LieString) -> Option<LieString> {
        self.0.strip_prefix(u.0.as_slice()).map(|v| LieString(v.to_vec()))
    }

    /// `(b_1,a_1)...(b_j,a_j)`: applying it forwards undoes `self`.
    pub fn swapped(&self) -> LieString {
        LieString(self.0.iter().map(|l| l.swapped()).collect())
    }

    pub fn max_letter(&self) -> Option<u8> {
        self.0.iter().map(|l| l.truth.max(l.response)).max()
    }

    pub fn permuted(&self, perm: &[u8]) -> LieString {
        LieString(
            self.0
                .iter()
                .map(|l| Lie {
                    truth: perm[l.truth as usize],
                    response: perm[l.response as usize],
                })
                .collect(),
        )
    }
}

impl PartialOrd for LieString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LieString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for LieString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for lie in &self.0 {
            write!(f, "{lie}")?;
        }
        Ok(())
    }
}

impl Serialize for LieString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[u8; 2]> = self.0.iter().map(|l| [l.truth, l.response]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LieString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[u8; 2]>::deserialize(d)?;
        pairs
            .into_iter()
            .map(|[a, b]| Lie::new(a, b))
            .collect::<Result<Vec<_>>>()
            .map(LieString)
            .map_err(serde::de::Error::custom)
    }
}

/// A `t`-ary channel: a nonempty, duplicate-free, canonically sorted set of
/// lie strings. Equal sets compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    t: u8,
    strings: Vec<LieString>,
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    t: u8,
    strings: Vec<LieString>,
}

impl Channel {
    /// Builds a channel, rejecting duplicates, foreign letters and the empty set.
    pub fn new(t: u8, strings: impl IntoIterator<Item = LieString>) -> Result<Self> {
        if t < 2 {
            return Err(Error::InvalidChannel(format!("alphabet size {t} < 2")));
        }
        let mut strings: Vec<LieString> = strings.into_iter().collect();
        if strings.is_empty() {
            return Err(Error::InvalidChannel("channel has no lie strings".into()));
        }
        for s in &strings {
            if let Some(m) = s.max_letter() {
                if m >= t {
                    return Err(Error::InvalidChannel(format!(
                        "lie string {s} uses letter {m} outside alphabet of size {t}"
                    )));
                }
            }
        }
        strings.sort();
        if let Some(w) = strings.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidChannel(format!("duplicate lie string {}", w[0])));
        }
        Ok(Channel { t, strings })
    }

    pub fn from_pairs(t: u8, strings: &[&[(u8, u8)]]) -> Result<Self> {
        let strings = strings
            .iter()
            .map(|p| LieString::from_pairs(p))
            .collect::<Result<Vec<_>>>()?;
        Channel::new(t, strings)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        Channel::new(file.t, file.strings)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ChannelFile {
            t: self.t,
            strings: self.strings.clone(),
        })
        .expect("channel serializes")
    }

    pub fn t(&self) -> u8 {
        self.t
    }

    pub fn strings(&self) -> &[LieString] {
        &self.strings
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    /// `o(C)`, the length of the longest string.
    pub fn order(&self) -> usize {
        self.strings.last().map_or(0, LieString::len)
    }

    /// Length of the shortest string; an element needs at least this many
    /// remaining rounds to survive.
    pub fn min_len(&self) -> usize {
        self.strings.first().map_or(0, LieString::len)
    }

    pub fn contains(&self, u: &LieString) -> bool {
        self.strings.binary_search(u).is_ok()
    }

    pub fn contains_empty(&self) -> bool {
        self.strings.first().is_some_and(LieString::is_empty)
    }

    fn check_alphabet(&self, u: &LieString) -> Result<()> {
        match u.max_letter() {
            Some(m) if m >= self.t => Err(Error::AlphabetMismatch {
                expected: self.t,
                found: m + 1,
            }),
            _ => Ok(()),
        }
    }

    /// `S_C(u) = {v : uv ∈ C}`; `None` is the empty (disqualified) channel.
    pub fn suffix(&self, u: &LieString) -> Result<Option<Channel>> {
        self.check_alphabet(u)?;
        let rest: Vec<LieString> = self
            .strings
            .iter()
            .filter_map(|s| s.strip_prefix(u))
            .collect();
        if rest.is_empty() {
            Ok(None)
        } else {
            Ok(Some(Channel::new(self.t, rest)?))
        }
    }

    /// All distinct prefixes of strings in the channel.
    pub fn prefixes(&self) -> BTreeSet<LieString> {
        self.strings
            .iter()
            .flat_map(|s| (0..=s.len()).map(move |j| s.prefix(j)))
            .collect()
    }

    pub fn stats(&self) -> ChannelStats {
        let k = self.order();
        let mut e = vec![0u64; k + 1];
        for s in &self.strings {
            e[s.len()] += 1;
        }
        let mut p: Vec<Vec<u64>> = (0..=k).map(|i| vec![0; k - i + 1]).collect();
        for u in self.prefixes() {
            let suffix = self.suffix(&u).expect("prefix uses channel letters");
            let order = suffix.expect("prefix of a member has a suffix").order();
            p[order][u.len()] += 1;
        }
        let p_totals = p.iter().map(|row| row.iter().sum()).collect();
        ChannelStats { e, p, p_totals }
    }

    /// Whether the trivial strategies of the given variant are ruled out.
    pub fn is_nondegenerate(&self, variant: Variant) -> bool {
        if self.contains_empty() {
            return true;
        }
        (0..self.t).all(|c| self.has_constant_string(variant, c))
    }

    /// Original: some `(c,b_1)...(c,b_j)` in C. Pathological: some `(a_1,c)...(a_j,c)`.
    pub(crate) fn has_constant_string(&self, variant: Variant, c: u8) -> bool {
        self.constant_strings(variant, c).next().is_some()
    }

    pub(crate) fn constant_strings(
        &self,
        variant: Variant,
        c: u8,
    ) -> impl Iterator<Item = &LieString> + '_ {
        self.strings.iter().filter(move |s| {
            s.lies().iter().all(|l| match variant {
                Variant::Original => l.truth() == c,
                Variant::Pathological => l.response() == c,
            })
        })
    }

    /// Image of the channel under a letter permutation.
    pub fn permuted(&self, perm: &[u8]) -> Channel {
        Channel::new(self.t, self.strings.iter().map(|s| s.permuted(perm)))
            .expect("permutation preserves validity")
    }

    pub fn family(&self) -> SuffixFamily {
        SuffixFamily::new(self)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.strings.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// Counts `E_j(C)` and the prefix statistics `p_i^(j)(C)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelStats {
    /// `e[j]` = number of strings of length `j`.
    pub e: Vec<u64>,
    /// `p[i][j]` = number of prefixes `u` with `|u| = j` and `o(S_C(u)) = i`.
    pub p: Vec<Vec<u64>>,
    /// `p_totals[i]` = `p_i(C)`.
    pub p_totals: Vec<u64>,
}

impl ChannelStats {
    pub fn order(&self) -> usize {
        self.e.len() - 1
    }

    /// `p_i^(j)`, zero outside the stored triangle.
    pub fn p(&self, i: usize, j: usize) -> u64 {
        self.p.get(i).and_then(|row| row.get(j)).copied().unwrap_or(0)
    }

    pub fn e(&self, j: usize) -> u64 {
        self.e.get(j).copied().unwrap_or(0)
    }
}

/// Index of a nonempty suffix channel within a [`SuffixFamily`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub usize);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The finite family `S(C)` of suffix channels with its transition table.
///
/// Live classes are numbered canonically (descending order, then by content),
/// so the root channel is always `ClassId(0)`. The empty channel has no id;
/// transitions into it return `None`.
#[derive(Debug, Clone)]
pub struct SuffixFamily {
    t: u8,
    classes: Vec<Channel>,
    next: Vec<Vec<Option<ClassId>>>,
}

impl SuffixFamily {
    pub fn new(channel: &Channel) -> Self {
        let t = channel.t;
        let lies: Vec<Lie> = Lie::all(t).collect();
        let mut seen: BTreeSet<Channel> = BTreeSet::new();
        let mut queue = VecDeque::from([channel.clone()]);
        seen.insert(channel.clone());
        while let Some(c) = queue.pop_front() {
            for &lie in &lies {
                if let Some(s) = c.suffix(&LieString(vec![lie])).expect("same alphabet") {
                    if seen.insert(s.clone()) {
                        queue.push_back(s);
                    }
                }
            }
        }
        let mut classes: Vec<Channel> = seen.into_iter().collect();
        classes.sort_by(|a, b| b.order().cmp(&a.order()).then_with(|| a.cmp(b)));
        let ids: BTreeMap<&Channel, ClassId> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c, ClassId(i)))
            .collect();
        let next = classes
            .iter()
            .map(|c| {
                lies.iter()
                    .map(|&lie| {
                        c.suffix(&LieString(vec![lie]))
                            .expect("same alphabet")
                            .map(|s| ids[&s])
                    })
                    .collect()
            })
            .collect();
        SuffixFamily { t, classes, next }
    }

    pub fn t(&self) -> u8 {
        self.t
    }

    pub fn root(&self) -> ClassId {
        ClassId(0)
    }

    pub fn root_channel(&self) -> &Channel {
        &self.classes[0]
    }

    /// Number of nonempty suffix channels.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Size of `S(C)` counting the empty channel.
    pub fn len_with_empty(&self) -> usize {
        self.classes.len() + 1
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> {
        (0..self.classes.len()).map(ClassId)
    }

    pub fn class(&self, id: ClassId) -> &Channel {
        &self.classes[id.0]
    }

    pub fn classes(&self) -> &[Channel] {
        &self.classes
    }

    pub fn order(&self, id: ClassId) -> usize {
        self.classes[id.0].order()
    }

    pub fn min_len(&self, id: ClassId) -> usize {
        self.classes[id.0].min_len()
    }

    pub fn contains_empty(&self, id: ClassId) -> bool {
        self.classes[id.0].contains_empty()
    }

    pub fn id_of(&self, channel: &Channel) -> Option<ClassId> {
        self.classes.iter().position(|c| c == channel).map(ClassId)
    }

    pub fn step(&self, id: ClassId, lie: Lie) -> Option<ClassId> {
        self.next[id.0][lie.index(self.t)]
    }

    /// Class reached from `id` after the truthful letter `truth` is answered
    /// as `response`.
    pub fn answer(&self, id: ClassId, truth: u8, response: u8) -> Option<ClassId> {
        if truth == response {
            Some(id)
        } else {
            self.step(id, Lie { truth, response })
        }
    }

    pub fn walk(&self, id: ClassId, u: &LieString) -> Option<ClassId> {
        u.lies()
            .iter()
            .try_fold(id, |cur, &lie| self.step(cur, lie))
    }

    /// Class reached from `id` when `truth` is answered as `response`,
    /// letter by letter.
    pub fn read(&self, id: ClassId, truth: &[u8], response: &[u8]) -> Option<ClassId> {
        truth
            .iter()
            .zip(response)
            .try_fold(id, |cur, (&a, &b)| self.answer(cur, a, b))
    }

    /// Letter permutations (as images of `0..t`) mapping every class to itself.
    pub fn stabilizer(&self, classes: &[ClassId]) -> Vec<Vec<u8>> {
        permutations(self.t)
            .into_iter()
            .filter(|perm| {
                classes
                    .iter()
                    .all(|&c| self.classes[c.0].permuted(perm) == self.classes[c.0])
            })
            .collect()
    }
}

pub(crate) fn permutations(t: u8) -> Vec<Vec<u8>> {
    fn rec(cur: &mut Vec<u8>, used: &mut Vec<bool>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i as u8);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; t as usize], &mut out);
    out
}

/// Named channels used throughout the tests and the CLI.
pub mod presets {
    use super::*;

    /// All lie strings of length at most `k`.
    pub fn symmetric(t: u8, k: usize) -> Channel {
        let lies: Vec<Lie> = Lie::all(t).collect();
        let mut layer = vec![LieString::empty()];
        let mut all = layer.clone();
        for _ in 0..k {
            layer = layer
                .iter()
                .flat_map(|s| {
                    lies.iter().map(move |&l| {
                        let mut s = s.clone();
                        s.push(l);
                        s
                    })
                })
                .collect();
            all.extend(layer.iter().cloned());
        }
        Channel::new(t, all).expect("symmetric channel is valid")
    }

    fn repeated(lie: (u8, u8), j: usize) -> LieString {
        LieString::from_pairs(&vec![lie; j]).expect("valid lie")
    }

    /// Binary Z-channel: only `(0,1)` lies, up to `k` of them.
    pub fn z_channel(k: usize) -> Channel {
        Channel::new(2, (0..=k).map(|j| repeated((0, 1), j))).expect("valid")
    }

    /// Binary companion Z-channel: only `(1,0)` lies.
    pub fn reverse_z(k: usize) -> Channel {
        Channel::new(2, (0..=k).map(|j| repeated((1, 0), j))).expect("valid")
    }

    /// Binary unidirectional channel: up to `k` lies, all of one type.
    pub fn unidirectional(k: usize) -> Channel {
        let strings = std::iter::once(LieString::empty()).chain(
            (1..=k).flat_map(|j| [repeated((0, 1), j), repeated((1, 0), j)]),
        );
        Channel::new(2, strings).expect("valid")
    }

    /// `{(0,1)}`: Carole must lie exactly once, from 0 to 1.
    pub fn forced_lie() -> Channel {
        Channel::from_pairs(2, &[&[(0, 1)]]).expect("valid")
    }

    pub fn by_name(name: &str) -> Option<Channel> {
        Some(match name {
            "sym1" => symmetric(2, 1),
            "sym2" => symmetric(2, 2),
            "sym1-t3" => symmetric(3, 1),
            "z1" => z_channel(1),
            "z2" => z_channel(2),
            "rz1" => reverse_z(1),
            "unidir2" => unidirectional(2),
            "forced" => forced_lie(),
            _ => return None,
        })
    }

    pub const NAMES: &[&str] = &["sym1", "sym2", "sym1-t3", "z1", "z2", "rz1", "unidir2", "forced"];
}
