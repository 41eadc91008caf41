//! Event alphabets, bitmask event sets, and transition labels.
//!
//! Observable event names are interned once per model; everything downstream
//! works with dense [`EventId`] indices and [`EventSet`] bitmasks.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Upper bound on observable events, so every watch set fits in a `u32`.
pub const MAX_EVENTS: usize = 30;

/// Reserved spelling of the silent label in model files.
pub const EPS_TOKEN: &str = "_eps";
/// Reserved spelling of the fault label in model files.
pub const FAULT_TOKEN: &str = "_fault";

/// Index of an observable event within its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u8);

/// Transition label: an observable event, the silent step, or the fault.
///
/// The derived order (events first, then silent, then fault) fixes the
/// canonical sort order of transitions everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Event(EventId),
    Epsilon,
    Fault,
}

impl Label {
    pub fn event(self) -> Option<EventId> {
        match self {
            Label::Event(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_observable(self) -> bool {
        matches!(self, Label::Event(_))
    }
}

/// A set of observable events, encoded as a bitmask over [`EventId`].
///
/// The derived `Ord` is plain bitmask order, which is also the order in which
/// subsets are enumerated internally. Selector logic that needs the
/// sorted-event-list order uses [`EventSet::lex_cmp`] instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EventSet(u32);

impl EventSet {
    pub const EMPTY: EventSet = EventSet(0);

    pub fn singleton(e: EventId) -> EventSet {
        EventSet(1 << e.0)
    }

    /// All events of an alphabet with `n` events.
    pub fn full(n: usize) -> EventSet {
        debug_assert!(n <= MAX_EVENTS);
        EventSet(((1u64 << n) - 1) as u32)
    }

    pub fn from_bits(bits: u32) -> EventSet {
        EventSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, e: EventId) -> bool {
        self.0 & (1 << e.0) != 0
    }

    #[must_use]
    pub fn with(self, e: EventId) -> EventSet {
        EventSet(self.0 | (1 << e.0))
    }

    #[must_use]
    pub fn union(self, other: EventSet) -> EventSet {
        EventSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersect(self, other: EventSet) -> EventSet {
        EventSet(self.0 & other.0)
    }

    #[must_use]
    pub fn minus(self, other: EventSet) -> EventSet {
        EventSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: EventSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Events in ascending id order.
    pub fn iter(self) -> impl Iterator<Item = EventId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as u8;
                bits &= bits - 1;
                Some(EventId(e))
            }
        })
    }

    /// Lexicographic order on the sorted event lists,
    /// e.g. {} < {a} < {a,b} < {b}. This is what "lexicographically least
    /// watch set" means for selectors.
    pub fn lex_cmp(self, other: EventSet) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl FromIterator<EventId> for EventSet {
    fn from_iter<I: IntoIterator<Item = EventId>>(iter: I) -> EventSet {
        let mut s = EventSet::EMPTY;
        for e in iter {
            s = s.with(e);
        }
        s
    }
}

pub(crate) fn valid_token(s: &str) -> bool {
    !s.is_empty() && !s.contains(char::is_whitespace) && !s.contains('#')
}

pub(crate) fn check_name(s: &str) -> Result<()> {
    if s == EPS_TOKEN || s == FAULT_TOKEN {
        return Err(Error::ReservedName(s.to_string()));
    }
    if !valid_token(s) {
        return Err(Error::BadName(s.to_string()));
    }
    Ok(())
}

/// Ordered set of observable event names; the order is canonical everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: BTreeMap<String, EventId>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Alphabet>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_EVENTS {
            return Err(Error::TooManyEvents(names.len()));
        }
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            check_name(n)?;
            if index.insert(n.clone(), EventId(i as u8)).is_some() {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        Ok(Alphabet { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, e: EventId) -> &str {
        &self.names[e.0 as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> {
        (0..self.names.len() as u8).map(EventId)
    }

    pub fn full_set(&self) -> EventSet {
        EventSet::full(self.len())
    }

    pub fn contains_set(&self, set: EventSet) -> bool {
        set.is_subset_of(self.full_set())
    }

    pub fn set_from_names<'a, I>(&self, names: I) -> Result<EventSet>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut s = EventSet::EMPTY;
        for n in names {
            let e = self
                .id(n)
                .ok_or_else(|| Error::UnknownEvent(n.to_string()))?;
            s = s.with(e);
        }
        Ok(s)
    }

    /// Render a set as `{a,b}` (empty set: `{}`).
    pub fn fmt_set(&self, set: EventSet) -> String {
        let mut out = String::from("{");
        for (i, e) in set.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(self.name(e));
        }
        out.push('}');
        out
    }

    /// Render a label for display: event name, `ε`, or `f`.
    pub fn fmt_label(&self, l: Label) -> String {
        match l {
            Label::Event(e) => self.name(e).to_string(),
            Label::Epsilon => "ε".to_string(),
            Label::Fault => "f".to_string(),
        }
    }

    /// Erase everything outside `sub` from a label word; the fault is erased
    /// too (it is never observable).
    pub fn project(&self, word: &[Label], sub: EventSet) -> Result<Vec<EventId>> {
        debug_assert!(self.contains_set(sub));
        let mut out = Vec::new();
        for &l in word {
            if let Label::Event(e) = l {
                if e.0 as usize >= self.len() {
                    return Err(Error::EventOutOfRange(e.0));
                }
                if sub.contains(e) {
                    out.push(e);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    #[test]
    fn interning_and_lookup() {
        let al = ab();
        assert_eq!(al.len(), 2);
        assert_eq!(al.id("a"), Some(EventId(0)));
        assert_eq!(al.id("b"), Some(EventId(1)));
        assert_eq!(al.id("c"), None);
        assert_eq!(al.name(EventId(1)), "b");
    }

    #[test]
    fn rejects_bad_alphabets() {
        assert!(matches!(
            Alphabet::new(["a", "a"]),
            Err(Error::DuplicateName(_))
        ));
        assert!(matches!(
            Alphabet::new(["_eps"]),
            Err(Error::ReservedName(_))
        ));
        assert!(matches!(
            Alphabet::new(["_fault"]),
            Err(Error::ReservedName(_))
        ));
        assert!(matches!(Alphabet::new(["x y"]), Err(Error::BadName(_))));
        assert!(matches!(Alphabet::new([""]), Err(Error::BadName(_))));
        let too_many: Vec<String> = (0..31).map(|i| format!("e{i}")).collect();
        assert!(matches!(
            Alphabet::new(too_many),
            Err(Error::TooManyEvents(31))
        ));
        let max: Vec<String> = (0..30).map(|i| format!("e{i}")).collect();
        assert!(Alphabet::new(max).is_ok());
    }

    #[test]
    fn set_ops() {
        let al = ab();
        let a = EventSet::singleton(EventId(0));
        let b = EventSet::singleton(EventId(1));
        let both = a.union(b);
        assert_eq!(both, al.full_set());
        assert_eq!(both.len(), 2);
        assert!(a.is_subset_of(both));
        assert!(!both.is_subset_of(a));
        assert_eq!(both.minus(a), b);
        assert_eq!(both.intersect(a), a);
        assert_eq!(al.fmt_set(both), "{a,b}");
        assert_eq!(al.fmt_set(EventSet::EMPTY), "{}");
        assert_eq!(
            both.iter().collect::<Vec<_>>(),
            vec![EventId(0), EventId(1)]
        );
    }

    #[test]
    fn lex_order_differs_from_bitmask_order() {
        let e = EventSet::EMPTY;
        let a = EventSet::singleton(EventId(0));
        let b = EventSet::singleton(EventId(1));
        let ab = a.union(b);
        // bitmask order: {} < {a} < {b} < {a,b}
        let mut by_bits = [ab, b, a, e];
        by_bits.sort();
        assert_eq!(by_bits, [e, a, b, ab]);
        // lexicographic-list order: {} < {a} < {a,b} < {b}
        let mut by_lex = [ab, b, a, e];
        by_lex.sort_by(|x, y| x.lex_cmp(*y));
        assert_eq!(by_lex, [e, a, ab, b]);
    }

    #[test]
    fn projection_erases_silent_fault_and_unwatched() {
        let al = ab();
        let (a, b) = (EventId(0), EventId(1));
        let word = vec![
            Label::Fault,
            Label::Event(a),
            Label::Epsilon,
            Label::Event(b),
            Label::Event(a),
        ];
        assert_eq!(al.project(&word, al.full_set()).unwrap(), vec![a, b, a]);
        assert_eq!(al.project(&word, EventSet::singleton(b)).unwrap(), vec![b]);
        assert_eq!(
            al.project(&word, EventSet::EMPTY).unwrap(),
            Vec::<EventId>::new()
        );
    }
}
