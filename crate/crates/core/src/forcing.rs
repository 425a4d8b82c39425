//! The forcing order on simple orbits and simple pairs.
//!
//! A simple pair `r v s` forces every simple orbit whose rotation number lies
//! in the closed interval between `r` and `s`, and every simple pair whose two
//! endpoints lie there. A lone simple orbit forces nothing but itself. The
//! relation is taken reflexively so that it is a partial order.

use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{rationals_between, FareyPair, Rational};

/// Maximum depth accepted by [`mediant_tree`].
pub const MAX_TREE_DEPTH: u32 = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum ForcingElement {
    Orbit(Rational),
    Pair(FareyPair),
}

impl ForcingElement {
    /// Parses either `q/p` or `q1/p1 v q2/p2`.
    pub fn parse(s: &str) -> Result<Self> {
        if s.contains('v') {
            Ok(ForcingElement::Pair(s.parse()?))
        } else {
            Ok(ForcingElement::Orbit(s.parse()?))
        }
    }
}

impl fmt::Display for ForcingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingElement::Orbit(r) => r.fmt(f),
            ForcingElement::Pair(p) => p.fmt(f),
        }
    }
}

impl Serialize for ForcingElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        match self {
            ForcingElement::Orbit(r) => {
                map.serialize_entry("kind", "orbit")?;
                map.serialize_entry("value", r)?;
            }
            ForcingElement::Pair(p) => {
                map.serialize_entry("kind", "pair")?;
                map.serialize_entry("endpoints", p)?;
            }
        }
        map.end()
    }
}

/// Whether `a` forces `b`.
pub fn forces(a: &ForcingElement, b: &ForcingElement) -> bool {
    use ForcingElement::*;
    match (a, b) {
        (Pair(p), Orbit(t)) => p.contains(*t),
        (Pair(p), Pair(s)) => p.contains(s.long()) && p.contains(s.short()),
        (Orbit(r), Orbit(t)) => r == t,
        (Orbit(_), Pair(_)) => false,
    }
}

/// Everything forced by `pair` with denominators up to `max_den`.
///
/// The true forced set is infinite; this is its truncation. `pair` and its two
/// endpoint orbits are always included, whatever their denominators.
pub fn forced_set(pair: &FareyPair, max_den: u64) -> BTreeSet<ForcingElement> {
    let (lo, hi) = (pair.lower(), pair.upper());
    let mut orbits: Vec<Rational> = Vec::new();
    if lo.den() <= max_den {
        orbits.push(lo);
    }
    orbits.extend(rationals_between(lo, hi, max_den));
    if hi.den() <= max_den {
        orbits.push(hi);
    }

    let mut out: BTreeSet<ForcingElement> =
        orbits.iter().map(|&r| ForcingElement::Orbit(r)).collect();
    out.insert(ForcingElement::Orbit(lo));
    out.insert(ForcingElement::Orbit(hi));
    out.insert(ForcingElement::Pair(*pair));

    // Upper Farey neighbours of `a` with denominator d solve d*a.num + 1 = num*a.den.
    for a in &orbits {
        for d in 1..=max_den {
            let scaled = d as u128 * a.num() as u128 + 1;
            if !scaled.is_multiple_of(a.den() as u128) {
                continue;
            }
            let num = (scaled / a.den() as u128) as i64;
            if num as u64 >= d {
                continue;
            }
            let b = Rational::new(num, d as i64).expect("positive denominator");
            if b <= hi {
                if let Ok(p) = FareyPair::new(*a, b) {
                    out.insert(ForcingElement::Pair(p));
                }
            }
        }
    }
    out
}

/// A node of the Farey subdivision tree below a simple pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MediantTree {
    pub pair: FareyPair,
    /// Mediant of `pair`; the orbit whose existence splits the node.
    pub mediant: Rational,
    /// Lower then upper subpair, `None` at a leaf.
    pub children: Option<Box<[MediantTree; 2]>>,
}

impl MediantTree {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    /// Pairs in pre-order.
    pub fn pairs(&self) -> Vec<FareyPair> {
        let mut out = Vec::new();
        self.walk(&mut |node, _| out.push(node.pair));
        out
    }

    /// Mediants of the nodes at `level` that have children, left to right.
    pub fn mediants_at(&self, level: usize) -> Vec<Rational> {
        let mut out = Vec::new();
        self.walk(&mut |node, l| {
            if l == level && !node.is_leaf() {
                out.push(node.mediant);
            }
        });
        out
    }

    fn walk<F: FnMut(&MediantTree, usize)>(&self, f: &mut F) {
        fn go<F: FnMut(&MediantTree, usize)>(node: &MediantTree, level: usize, f: &mut F) {
            f(node, level);
            if let Some(children) = &node.children {
                for c in children.iter() {
                    go(c, level + 1, f);
                }
            }
        }
        go(self, 0, f)
    }

    /// Indented text rendering, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.walk(&mut |node, level| {
            let indent = "  ".repeat(level);
            if node.is_leaf() {
                out.push_str(&format!("{indent}{}\n", node.pair));
            } else {
                out.push_str(&format!("{indent}{} -> {}\n", node.pair, node.mediant));
            }
        });
        out
    }
}

/// Splits the pair `lower v upper` at `c` into its two Farey subpairs.
fn split(pair: &FareyPair, c: Rational) -> [FareyPair; 2] {
    let left = FareyPair::new(pair.lower(), c).expect("mediant is a Farey neighbour");
    let right = FareyPair::new(c, pair.upper()).expect("mediant is a Farey neighbour");
    [left, right]
}

pub fn mediant_tree(pair: &FareyPair, depth: u32) -> Result<MediantTree> {
    if depth > MAX_TREE_DEPTH {
        return Err(Error::DepthTooLarge(depth, MAX_TREE_DEPTH));
    }
    fn build(pair: FareyPair, depth: u32) -> MediantTree {
        let mediant = pair.mediant();
        let children = (depth > 0).then(|| {
            let [l, r] = split(&pair, mediant);
            Box::new([build(l, depth - 1), build(r, depth - 1)])
        });
        MediantTree {
            pair,
            mediant,
            children,
        }
    }
    Ok(build(*pair, depth))
}

/// Path down the mediant tree from `pair` to the node whose mediant is `target`.
pub fn forcing_chain(pair: &FareyPair, target: Rational) -> Result<Vec<FareyPair>> {
    if !pair.contains_strictly(target) {
        return Err(Error::TargetOutsideInterval {
            target: target.to_string(),
            lo: pair.lower().to_string(),
            hi: pair.upper().to_string(),
        });
    }
    let mut chain = vec![*pair];
    let mut current = *pair;
    loop {
        let c = current.mediant();
        if c == target {
            return Ok(chain);
        }
        let [l, r] = split(&current, c);
        current = if target < c { l } else { r };
        chain.push(current);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ForcingElement::{Orbit, Pair};

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn pr(s: &str) -> FareyPair {
        s.parse().unwrap()
    }

    #[test]
    fn forces_examples() {
        let root = Pair(pr("1/3 v 1/2"));
        assert!(forces(&root, &Orbit(r("2/5"))));
        assert!(forces(&root, &Pair(pr("2/5 v 1/2"))));
        assert!(!forces(&Orbit(r("1/2")), &Orbit(r("1/3"))));
        assert!(forces(&root, &Orbit(r("1/3"))));
        assert!(!forces(&root, &Orbit(r("3/5"))));
        assert!(!forces(&Orbit(r("2/5")), &root));
        assert!(!forces(&Pair(pr("2/5 v 1/2")), &root));
    }

    #[test]
    fn forced_set_examples() {
        let set = forced_set(&pr("1/3 v 1/2"), 5);
        let want: BTreeSet<_> = [
            Orbit(r("1/3")),
            Orbit(r("2/5")),
            Orbit(r("1/2")),
            Pair(pr("1/3 v 1/2")),
            Pair(pr("1/3 v 2/5")),
            Pair(pr("2/5 v 1/2")),
        ]
        .into();
        assert_eq!(set, want);

        let set = forced_set(&pr("1/3 v 1/2"), 3);
        let want: BTreeSet<_> = [Orbit(r("1/3")), Orbit(r("1/2")), Pair(pr("1/3 v 1/2"))].into();
        assert_eq!(set, want);

        let set = forced_set(&pr("0/1 v 1/2"), 4);
        let want: BTreeSet<_> = [
            Orbit(r("0/1")),
            Orbit(r("1/4")),
            Orbit(r("1/3")),
            Orbit(r("1/2")),
            Pair(pr("0/1 v 1/2")),
            Pair(pr("0/1 v 1/4")),
            Pair(pr("0/1 v 1/3")),
            Pair(pr("1/4 v 1/3")),
            Pair(pr("1/3 v 1/2")),
        ]
        .into();
        assert_eq!(set, want);
    }

    #[test]
    fn forced_set_keeps_endpoints_below_their_denominator() {
        let set = forced_set(&pr("2/5 v 1/2"), 2);
        let want: BTreeSet<_> = [Orbit(r("2/5")), Orbit(r("1/2")), Pair(pr("2/5 v 1/2"))].into();
        assert_eq!(set, want);
    }

    #[test]
    fn mediant_tree_examples() {
        let p = pr("1/3 v 1/2");
        assert!(mediant_tree(&p, 0).unwrap().is_leaf());

        let t = mediant_tree(&p, 1).unwrap();
        assert_eq!(t.mediant, r("2/5"));
        let children = t.children.as_ref().unwrap();
        assert_eq!(children[0].pair, pr("1/3 v 2/5"));
        assert_eq!(children[1].pair, pr("2/5 v 1/2"));
        assert!(children.iter().all(MediantTree::is_leaf));

        let t = mediant_tree(&p, 2).unwrap();
        assert_eq!(t.mediants_at(1), vec![r("3/8"), r("3/7")]);
        assert_eq!(t.pairs().len(), 7);

        assert!(matches!(
            mediant_tree(&p, 33),
            Err(Error::DepthTooLarge(33, 32))
        ));
    }

    #[test]
    fn mediant_tree_renders() {
        let t = mediant_tree(&pr("1/3 v 1/2"), 1).unwrap();
        assert_eq!(t.render(), "1/3 v 1/2 -> 2/5\n  2/5 v 1/3\n  2/5 v 1/2\n");
    }

    #[test]
    fn forcing_chain_examples() {
        let p = pr("1/3 v 1/2");
        assert_eq!(forcing_chain(&p, r("2/5")).unwrap(), vec![p]);
        assert_eq!(
            forcing_chain(&p, r("3/8")).unwrap(),
            vec![p, pr("1/3 v 2/5")]
        );
        assert!(matches!(
            forcing_chain(&p, r("1/3")),
            Err(Error::TargetOutsideInterval { .. })
        ));
        assert!(forcing_chain(&p, r("3/5")).is_err());
    }

    #[test]
    fn forcing_chain_is_descending() {
        let p = pr("0/1 v 1/2");
        let target = r("5/17");
        let chain = forcing_chain(&p, target).unwrap();
        for w in chain.windows(2) {
            assert!(forces(&Pair(w[0]), &Pair(w[1])));
            assert_ne!(w[0], w[1]);
        }
        assert_eq!(chain.last().unwrap().mediant(), target);
    }

    #[test]
    fn json_shape() {
        let set = forced_set(&pr("1/3 v 1/2"), 3);
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(
            json,
            r#"[{"kind":"orbit","value":"1/3"},{"kind":"orbit","value":"1/2"},{"kind":"pair","endpoints":["1/3","1/2"]}]"#
        );
    }
}
