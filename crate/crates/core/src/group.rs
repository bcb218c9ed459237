//! Generic finite-group machinery: BFS element enumeration with dense
//! indexing, subgroup closures, conjugacy classes, and bit-vector element
//! sets with exact set products.
//!
//! Elements live in a flat byte arena (one codec per group, see
//! [`ElementKind`]); the index map is an open-addressing table over arena
//! slices. Enumeration is breadth-first by generator index, so element
//! indices are deterministic and stable across runs, which every downstream
//! report relies on.

use std::sync::{Arc, Mutex, OnceLock};

use std::collections::HashMap;

use crate::autos::AutoSpec;
use crate::element::{Element, ElementKind};
use crate::error::{Error, Result};

pub const DEFAULT_CAP: u64 = 20_000_000;

/// Budget guard for elementwise set products (pairs of member indices).
const ELEMENTWISE_BUDGET: u64 = 400_000_000;

#[inline]
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Open-addressing index over the element arena. Values are element indices;
/// keys are the arena slices themselves, so elements are stored exactly once.
struct ByteIndex {
    mask: usize,
    slots: Vec<u32>,
    len: usize,
}

const EMPTY: u32 = u32::MAX;

impl ByteIndex {
    fn new() -> ByteIndex {
        ByteIndex { mask: 1023, slots: vec![EMPTY; 1024], len: 0 }
    }

    fn lookup(&self, arena: &[u8], stride: usize, key: &[u8]) -> Option<u32> {
        let mut pos = (fnv1a(key) as usize) & self.mask;
        loop {
            let slot = self.slots[pos];
            if slot == EMPTY {
                return None;
            }
            let at = slot as usize * stride;
            if &arena[at..at + stride] == key {
                return Some(slot);
            }
            pos = (pos + 1) & self.mask;
        }
    }

    /// Inserts index `idx` whose bytes are already in the arena.
    fn insert(&mut self, arena: &[u8], stride: usize, idx: u32) {
        if (self.len + 1) * 2 > self.slots.len() {
            self.grow(arena, stride);
        }
        let at = idx as usize * stride;
        let key = &arena[at..at + stride];
        let mut pos = (fnv1a(key) as usize) & self.mask;
        while self.slots[pos] != EMPTY {
            pos = (pos + 1) & self.mask;
        }
        self.slots[pos] = idx;
        self.len += 1;
    }

    fn grow(&mut self, arena: &[u8], stride: usize) {
        let new_size = self.slots.len() * 2;
        let mut slots = vec![EMPTY; new_size];
        let mask = new_size - 1;
        for &slot in &self.slots {
            if slot == EMPTY {
                continue;
            }
            let at = slot as usize * stride;
            let key = &arena[at..at + stride];
            let mut pos = (fnv1a(key) as usize) & mask;
            while slots[pos] != EMPTY {
                pos = (pos + 1) & mask;
            }
            slots[pos] = slot;
        }
        self.slots = slots;
        self.mask = mask;
    }
}

struct Enumerated {
    arena: Vec<u8>,
    index: ByteIndex,
    order: u64,
    inv: OnceLock<Vec<u32>>,
    classes: OnceLock<ClassData>,
    class_products: Mutex<HashMap<(u32, u32), Arc<Vec<u64>>>>,
}

/// A finite group given by generators, with a lazily built, capped element
/// table. Immutable after enumeration; queries are pure and thread-safe.
pub struct GroupHandle {
    pub label: String,
    pub kind: ElementKind,
    gens: Vec<Vec<u8>>,
    cap: u64,
    expected_order: Option<u64>,
    state: OnceLock<std::result::Result<Enumerated, Error>>,
}

impl std::fmt::Debug for GroupHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupHandle({}, {:?})", self.label, self.kind)
    }
}

impl GroupHandle {
    pub fn new(
        label: impl Into<String>,
        kind: ElementKind,
        gens: Vec<Element>,
        cap: u64,
    ) -> Result<Arc<GroupHandle>> {
        let mut raw = Vec::new();
        for g in gens {
            if g.kind != kind {
                return Err(Error::InvalidInput("generator kind mismatch".into()));
            }
            let mut data = g.data;
            kind.canon(&mut data);
            kind.validate(&data)?;
            if kind.is_identity(&data) || raw.contains(&data) {
                continue;
            }
            raw.push(data);
        }
        Ok(Arc::new(GroupHandle {
            label: label.into(),
            kind,
            gens: raw,
            cap,
            expected_order: None,
            state: OnceLock::new(),
        }))
    }

    /// Like [`GroupHandle::new`], but enumeration verifies the group order
    /// against `expected` and fails loudly on mismatch.
    pub fn with_expected_order(
        label: impl Into<String>,
        kind: ElementKind,
        gens: Vec<Element>,
        cap: u64,
        expected: u64,
    ) -> Result<Arc<GroupHandle>> {
        let h = GroupHandle::new(label, kind, gens, cap)?;
        // Arc has a single owner here, safe to tweak.
        let mut h = Arc::try_unwrap(h).ok().expect("fresh handle");
        h.expected_order = Some(expected);
        Ok(Arc::new(h))
    }

    pub fn generators(&self) -> Vec<Element> {
        self.gens
            .iter()
            .map(|d| Element { kind: self.kind, data: d.clone() })
            .collect()
    }

    fn enumerated(&self) -> Result<&Enumerated> {
        let state = self.state.get_or_init(|| self.run_bfs());
        match state {
            Ok(e) => Ok(e),
            Err(err) => Err(Error::InvalidInput(format!(
                "group {} failed to enumerate: {err}",
                self.label
            ))),
        }
    }

    fn run_bfs(&self) -> std::result::Result<Enumerated, Error> {
        let stride = self.kind.stride();
        let mut arena: Vec<u8> = Vec::with_capacity(1024 * stride);
        let mut index = ByteIndex::new();
        arena.extend_from_slice(&self.kind.identity());
        index.insert(&arena, stride, 0);

        let mut scratch = vec![0u8; stride];
        let mut head: usize = 0;
        let mut count: u64 = 1;
        while head < count as usize {
            let base = head * stride;
            for g in &self.gens {
                // borrow juggling: copy current element out of the arena
                let x: Vec<u8> = arena[base..base + stride].to_vec();
                self.kind.mul(&x, g, &mut scratch);
                if index.lookup(&arena, stride, &scratch).is_none() {
                    if count >= self.cap {
                        return Err(Error::CapExceeded { reached: count, cap: self.cap });
                    }
                    arena.extend_from_slice(&scratch);
                    index.insert(&arena, stride, count as u32);
                    count += 1;
                }
            }
            head += 1;
        }
        if let Some(exp) = self.expected_order {
            if exp != count {
                return Err(Error::InvalidInput(format!(
                    "group {}: enumerated order {count}, expected {exp}",
                    self.label
                )));
            }
        }
        Ok(Enumerated {
            arena,
            index,
            order: count,
            inv: OnceLock::new(),
            classes: OnceLock::new(),
            class_products: Mutex::new(HashMap::new()),
        })
    }

    /// Enumerates (if needed) and returns the group order.
    pub fn order(&self) -> Result<u64> {
        Ok(self.enumerated()?.order)
    }

    pub fn is_enumerated(&self) -> bool {
        matches!(self.state.get(), Some(Ok(_)))
    }

    pub fn identity_index(&self) -> u32 {
        0
    }

    pub fn bytes_of(&self, idx: u32) -> &[u8] {
        let e = self.enumerated().expect("group enumerated");
        let stride = self.kind.stride();
        let at = idx as usize * stride;
        &e.arena[at..at + stride]
    }

    pub fn element(&self, idx: u32) -> Element {
        Element { kind: self.kind, data: self.bytes_of(idx).to_vec() }
    }

    pub fn index_of(&self, el: &Element) -> Result<Option<u32>> {
        if el.kind != self.kind {
            return Err(Error::InvalidInput("element kind mismatch".into()));
        }
        let mut data = el.data.clone();
        self.kind.canon(&mut data);
        let e = self.enumerated()?;
        Ok(e.index.lookup(&e.arena, self.kind.stride(), &data))
    }

    pub fn index_of_bytes(&self, key: &[u8]) -> Option<u32> {
        let e = self.enumerated().expect("group enumerated");
        e.index.lookup(&e.arena, self.kind.stride(), key)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let e = self.enumerated().expect("group enumerated");
        let stride = self.kind.stride();
        let mut scratch = [0u8; 160];
        let scratch = &mut scratch[..stride];
        let pa = a as usize * stride;
        let pb = b as usize * stride;
        self.kind
            .mul(&e.arena[pa..pa + stride], &e.arena[pb..pb + stride], scratch);
        e.index
            .lookup(&e.arena, stride, scratch)
            .expect("product of table elements stays in table")
    }

    pub fn inv(&self, a: u32) -> u32 {
        let e = self.enumerated().expect("group enumerated");
        let table = e.inv.get_or_init(|| {
            let stride = self.kind.stride();
            let mut out = vec![0u32; e.order as usize];
            let mut scratch = vec![0u8; stride];
            for i in 0..e.order as usize {
                let at = i * stride;
                self.kind.inv(&e.arena[at..at + stride], &mut scratch);
                out[i] = e
                    .index
                    .lookup(&e.arena, stride, &scratch)
                    .expect("inverse of table element stays in table");
            }
            out
        });
        table[a as usize]
    }

    /// x^g = g^-1 x g.
    #[inline]
    pub fn conj(&self, x: u32, g: u32) -> u32 {
        self.mul(self.mul(self.inv(g), x), g)
    }

    /// [x, g] = x^-1 g^-1 x g.
    #[inline]
    pub fn comm(&self, x: u32, g: u32) -> u32 {
        self.mul(self.inv(x), self.conj(x, g))
    }

    pub fn gen_indices(&self) -> Result<Vec<u32>> {
        let e = self.enumerated()?;
        let stride = self.kind.stride();
        Ok(self
            .gens
            .iter()
            .map(|g| e.index.lookup(&e.arena, stride, g).expect("generator in table"))
            .collect())
    }

    pub fn all_indices(&self) -> impl Iterator<Item = u32> {
        0..self.order().expect("enumerated") as u32
    }

    // ---- sets -------------------------------------------------------------

    pub fn empty_set(self: &Arc<Self>) -> ElementSet {
        let n = self.order().expect("enumerated") as usize;
        ElementSet { group: Arc::clone(self), words: vec![0; n.div_ceil(64)], count: 0 }
    }

    pub fn full_set(self: &Arc<Self>) -> ElementSet {
        let n = self.order().expect("enumerated") as usize;
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if n % 64 != 0 {
            *words.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        ElementSet { group: Arc::clone(self), words, count: n as u64 }
    }

    pub fn set_from_indices(self: &Arc<Self>, idxs: impl IntoIterator<Item = u32>) -> ElementSet {
        let mut s = self.empty_set();
        for i in idxs {
            s.insert(i);
        }
        s
    }

    /// Subgroup generated by the given elements (closure under products).
    pub fn subgroup_closure(self: &Arc<Self>, seeds: &[u32]) -> ElementSet {
        let mut set = self.empty_set();
        set.insert(0);
        let mut queue: Vec<u32> = vec![0];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &s in seeds {
                let y = self.mul(x, s);
                if !set.contains(y) {
                    set.insert(y);
                    queue.push(y);
                }
            }
        }
        set
    }

    /// A small generating sequence for the subgroup spanned by `members`,
    /// chosen greedily in index order (deterministic).
    pub fn greedy_generators(self: &Arc<Self>, members: &ElementSet) -> Vec<u32> {
        let mut gens: Vec<u32> = Vec::new();
        let mut closure = self.set_from_indices([0u32]);
        for m in members.iter() {
            if !closure.contains(m) {
                gens.push(m);
                closure = self.subgroup_closure(&gens);
                if closure.count() >= members.count() && members.is_subset_of(&closure) {
                    break;
                }
            }
        }
        gens
    }

    /// Is the set closed under products and inverses (and nonempty)?
    pub fn is_subgroup(self: &Arc<Self>, set: &ElementSet) -> bool {
        if set.count() == 0 || !set.contains(0) {
            return false;
        }
        let gens = self.greedy_generators(set);
        let closure = self.subgroup_closure(&gens);
        closure == *set
    }

    pub fn is_normal(self: &Arc<Self>, set: &ElementSet) -> Result<bool> {
        let gens = self.gen_indices()?;
        for m in set.iter() {
            for &g in &gens {
                if !set.contains(self.conj(m, g)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Smallest normal subgroup containing the seeds.
    pub fn normal_closure(self: &Arc<Self>, seeds: &[u32]) -> Result<ElementSet> {
        let gens = self.gen_indices()?;
        // conjugation orbit of the seeds
        let mut orbit = self.empty_set();
        let mut queue: Vec<u32> = Vec::new();
        for &s in seeds {
            if !orbit.contains(s) {
                orbit.insert(s);
                queue.push(s);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &g in &gens {
                let y = self.conj(x, g);
                if !orbit.contains(y) {
                    orbit.insert(y);
                    queue.push(y);
                }
            }
        }
        // subgroup generated by a conjugation-invariant set is normal
        let sub_gens = self.greedy_generators(&orbit);
        let closure = self.subgroup_closure(&sub_gens);
        debug_assert!(orbit.is_subset_of(&closure));
        Ok(closure)
    }

    /// True iff the subgroup generated by `extra` together with the closed
    /// subgroup `m` is the whole group.
    pub fn is_generating_mod(self: &Arc<Self>, extra: &[u32], m: &ElementSet) -> Result<bool> {
        if !self.is_subgroup(m) {
            return Err(Error::NotSubgroup("modulus set is not a closed subgroup".into()));
        }
        let mut gens = self.greedy_generators(m);
        gens.extend_from_slice(extra);
        let closure = self.subgroup_closure(&gens);
        Ok(closure.count() == self.order()?)
    }

    /// Subgroup generated by all commutators [h, g], h in `h_set`, g in G.
    /// Requires `h_set` to be a normal subgroup.
    pub fn commutator_subgroup(self: &Arc<Self>, h_set: &ElementSet) -> Result<ElementSet> {
        if !self.is_subgroup(h_set) {
            return Err(Error::NotSubgroup("H is not a subgroup".into()));
        }
        if !self.is_normal(h_set)? {
            return Err(Error::NotNormal("H is not normal in G".into()));
        }
        let h_gens = self.greedy_generators(h_set);
        let g_gens = self.gen_indices()?;
        let mut seeds = Vec::new();
        for &h in &h_gens {
            for &g in &g_gens {
                seeds.push(self.comm(h, g));
            }
        }
        self.normal_closure(&seeds)
    }

    // ---- conjugacy classes -------------------------------------------------

    pub fn classes(&self) -> Result<&ClassData> {
        let e = self.enumerated()?;
        let gens = self.gen_indices()?;
        Ok(e.classes.get_or_init(|| {
            let n = e.order as usize;
            let mut class_of = vec![u32::MAX; n];
            let mut members: Vec<Vec<u32>> = Vec::new();
            let mut queue: Vec<u32> = Vec::new();
            for start in 0..n as u32 {
                if class_of[start as usize] != u32::MAX {
                    continue;
                }
                let id = members.len() as u32;
                class_of[start as usize] = id;
                queue.clear();
                queue.push(start);
                let mut mem = vec![start];
                let mut head = 0;
                while head < queue.len() {
                    let x = queue[head];
                    head += 1;
                    for &g in &gens {
                        let y = self.conj(x, g);
                        if class_of[y as usize] == u32::MAX {
                            class_of[y as usize] = id;
                            queue.push(y);
                            mem.push(y);
                        }
                    }
                }
                mem.sort_unstable();
                members.push(mem);
            }
            ClassData { class_of, members }
        }))
    }

    /// Union of classes in the product of two single classes, cached.
    /// For conjugation-invariant sets A, B the product AB is again a union
    /// of classes, determined by one representative row.
    fn class_pair_product(&self, i: u32, j: u32) -> Result<Arc<Vec<u64>>> {
        let e = self.enumerated()?;
        let key = (i.min(j), i.max(j));
        if let Some(hit) = e.class_products.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let classes = self.classes()?;
        let (small, large) = if classes.members[i as usize].len() <= classes.members[j as usize].len()
        {
            (i, j)
        } else {
            (j, i)
        };
        // AB = union of classes meeting (small class) * rep(large) when small
        // is on the left; since AB = BA for normal sets, one row suffices.
        let rep_large = classes.members[large as usize][0];
        let nclasses = classes.members.len();
        let mut bits = vec![0u64; nclasses.div_ceil(64)];
        if small == i {
            for &x in &classes.members[small as usize] {
                let p = self.mul(x, rep_large);
                let c = classes.class_of[p as usize];
                bits[(c / 64) as usize] |= 1u64 << (c % 64);
            }
        } else {
            for &x in &classes.members[small as usize] {
                let p = self.mul(rep_large, x);
                let c = classes.class_of[p as usize];
                bits[(c / 64) as usize] |= 1u64 << (c % 64);
            }
        }
        let arc = Arc::new(bits);
        e.class_products
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&arc));
        Ok(arc)
    }

    /// Exact product of two conjugation-invariant sets, computed in class
    /// space. Both inputs must be unions of full classes.
    pub fn normal_set_product(
        self: &Arc<Self>,
        a: &ElementSet,
        b: &ElementSet,
    ) -> Result<ElementSet> {
        let classes = self.classes()?;
        let ca = a.class_ids().ok_or_else(|| {
            Error::InvalidInput("left factor is not conjugation-invariant".into())
        })?;
        let cb = b.class_ids().ok_or_else(|| {
            Error::InvalidInput("right factor is not conjugation-invariant".into())
        })?;
        let nclasses = classes.members.len();
        let mut bits = vec![0u64; nclasses.div_ceil(64)];
        for &i in &ca {
            for &j in &cb {
                let pair = self.class_pair_product(i, j)?;
                for (w, p) in bits.iter_mut().zip(pair.iter()) {
                    *w |= p;
                }
            }
        }
        let mut out = self.empty_set();
        for c in 0..nclasses as u32 {
            if bits[(c / 64) as usize] >> (c % 64) & 1 == 1 {
                for &m in &classes.members[c as usize] {
                    out.insert(m);
                }
            }
        }
        Ok(out)
    }

    /// Exact set product A*B with automatic strategy: class space when both
    /// factors are conjugation-invariant, elementwise otherwise.
    pub fn set_product(self: &Arc<Self>, a: &ElementSet, b: &ElementSet) -> Result<ElementSet> {
        if a.count() == 0 || b.count() == 0 {
            return Ok(self.empty_set());
        }
        if a.is_class_closed()? && b.is_class_closed()? {
            return self.normal_set_product(a, b);
        }
        let pairs = a.count() * b.count();
        if pairs > ELEMENTWISE_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "elementwise product of {} x {} members",
                a.count(),
                b.count()
            )));
        }
        let mut out = self.empty_set();
        for x in a.iter() {
            for y in b.iter() {
                out.insert(self.mul(x, y));
            }
        }
        Ok(out)
    }

    // ---- automorphisms ------------------------------------------------------

    /// Realizes an automorphism as a permutation of element indices.
    /// Fails if the map does not preserve the element table setwise.
    pub fn auto_perm(self: &Arc<Self>, auto: &AutoSpec) -> Result<AutPerm> {
        let n = self.order()? as usize;
        let stride = self.kind.stride();
        let mut out = vec![0u32; n];
        let mut scratch = vec![0u8; stride];
        for i in 0..n as u32 {
            auto.apply(self.kind, self.bytes_of(i), &mut scratch)?;
            match self.index_of_bytes(&scratch) {
                Some(j) => out[i as usize] = j,
                None => {
                    return Err(Error::BadAutomorphism(format!(
                        "image of element {i} leaves the group {}",
                        self.label
                    )))
                }
            }
        }
        // injectivity on a finite set implies bijectivity; verify cheaply
        let mut seen = vec![false; n];
        for &j in &out {
            if seen[j as usize] {
                return Err(Error::BadAutomorphism("map is not injective".into()));
            }
            seen[j as usize] = true;
        }
        Ok(AutPerm { images: out })
    }

    /// Cheap validity check: generator images stay inside the group.
    pub fn auto_preserves(self: &Arc<Self>, auto: &AutoSpec) -> Result<bool> {
        let stride = self.kind.stride();
        let mut scratch = vec![0u8; stride];
        self.order()?;
        for g in &self.gens {
            auto.apply(self.kind, g, &mut scratch)?;
            if self.index_of_bytes(&scratch).is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// An automorphism realized as a permutation of element indices.
#[derive(Clone, Debug)]
pub struct AutPerm {
    pub images: Vec<u32>,
}

impl AutPerm {
    #[inline]
    pub fn apply(&self, i: u32) -> u32 {
        self.images[i as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    pub fn inverse(&self) -> AutPerm {
        let mut out = vec![0u32; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            out[j as usize] = i as u32;
        }
        AutPerm { images: out }
    }

    /// Fixed points = centralizer of the automorphism.
    pub fn fixed_count(&self) -> u64 {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, &j)| *i as u32 == j)
            .count() as u64
    }
}

/// Conjugacy class table: class id per element plus sorted member lists.
pub struct ClassData {
    pub class_of: Vec<u32>,
    pub members: Vec<Vec<u32>>,
}

impl ClassData {
    pub fn count(&self) -> usize {
        self.members.len()
    }
    pub fn rep(&self, class: u32) -> u32 {
        self.members[class as usize][0]
    }
    pub fn size(&self, class: u32) -> u64 {
        self.members[class as usize].len() as u64
    }
}

/// Dense bit-vector subset of a group's element table.
#[derive(Clone)]
pub struct ElementSet {
    pub group: Arc<GroupHandle>,
    words: Vec<u64>,
    count: u64,
}

impl PartialEq for ElementSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.group, &other.group) && self.words == other.words
    }
}
impl Eq for ElementSet {}

impl std::fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ElementSet({} of {})", self.count, self.group.label)
    }
}

impl ElementSet {
    #[inline]
    pub fn contains(&self, i: u32) -> bool {
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: u32) {
        let w = &mut self.words[(i / 64) as usize];
        let bit = 1u64 << (i % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.count += 1;
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(wi as u32 * 64 + b)
            })
        })
    }

    pub fn union_with(&mut self, other: &ElementSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        self.recount();
    }

    pub fn intersect_with(&mut self, other: &ElementSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        self.recount();
    }

    fn recount(&mut self) {
        self.count = self.words.iter().map(|w| w.count_ones() as u64).sum();
    }

    pub fn is_subset_of(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Inverse-closed image {x^-1 : x in self}.
    pub fn inverses(&self) -> ElementSet {
        let mut out = self.group.empty_set();
        for i in self.iter() {
            out.insert(self.group.inv(i));
        }
        out
    }

    /// Class ids covered, if the set is a union of full classes.
    pub fn class_ids(&self) -> Option<Vec<u32>> {
        let classes = self.group.classes().ok()?;
        let mut per_class: Vec<u64> = vec![0; classes.count()];
        for i in self.iter() {
            per_class[classes.class_of[i as usize] as usize] += 1;
        }
        let mut ids = Vec::new();
        for (c, &n) in per_class.iter().enumerate() {
            if n == 0 {
                continue;
            }
            if n != classes.size(c as u32) {
                return None;
            }
            ids.push(c as u32);
        }
        Some(ids)
    }

    pub fn is_class_closed(&self) -> Result<bool> {
        Ok(self.class_ids().is_some())
    }

    /// Sorted index list; the canonical serialization of subgroups.
    pub fn sorted_indices(&self) -> Vec<u32> {
        self.iter().collect()
    }

    /// Stable content fingerprint, for cycle detection in product chains.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64 ^ self.count;
        for &w in &self.words {
            h ^= w;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Element;

    fn alt5() -> Arc<GroupHandle> {
        let a = Element::perm_from_cycles(5, &[&[0, 1, 2]]).unwrap();
        let b = Element::perm_from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap();
        GroupHandle::new("alt:5", ElementKind::perm(5).unwrap(), vec![a, b], DEFAULT_CAP).unwrap()
    }

    fn sym4() -> Arc<GroupHandle> {
        let a = Element::perm_from_cycles(4, &[&[0, 1]]).unwrap();
        let b = Element::perm_from_cycles(4, &[&[0, 1, 2, 3]]).unwrap();
        GroupHandle::new("sym:4", ElementKind::perm(4).unwrap(), vec![a, b], DEFAULT_CAP).unwrap()
    }

    #[test]
    fn alt5_enumerates_to_60() {
        assert_eq!(alt5().order().unwrap(), 60);
    }

    #[test]
    fn trivial_group_has_order_one() {
        let g = GroupHandle::new("1", ElementKind::perm(3).unwrap(), vec![], DEFAULT_CAP).unwrap();
        assert_eq!(g.order().unwrap(), 1);
    }

    #[test]
    fn enumeration_is_deterministic() {
        let g1 = alt5();
        let g2 = alt5();
        g1.order().unwrap();
        g2.order().unwrap();
        for i in 0..60u32 {
            assert_eq!(g1.bytes_of(i), g2.bytes_of(i));
        }
    }

    #[test]
    fn cap_exceeded_reports_partial() {
        let a = Element::perm_from_cycles(5, &[&[0, 1, 2]]).unwrap();
        let b = Element::perm_from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap();
        let g = GroupHandle::new("alt:5", ElementKind::perm(5).unwrap(), vec![a, b], 10).unwrap();
        assert!(g.order().is_err());
    }

    #[test]
    fn table_closed_under_inverse_and_products() {
        let g = alt5();
        let n = g.order().unwrap() as u32;
        for i in 0..n {
            let inv = g.inv(i);
            assert_eq!(g.mul(i, inv), 0);
        }
        let gens = g.gen_indices().unwrap();
        for i in 0..n {
            for &s in &gens {
                let _ = g.mul(i, s); // panics if not closed
            }
        }
    }

    #[test]
    fn closure_generates_expected_subgroups() {
        let g = sym4();
        g.order().unwrap();
        let a = g
            .index_of(&Element::perm_from_cycles(4, &[&[0, 1], &[2, 3]]).unwrap())
            .unwrap()
            .unwrap();
        let b = g
            .index_of(&Element::perm_from_cycles(4, &[&[0, 2], &[1, 3]]).unwrap())
            .unwrap()
            .unwrap();
        let v4 = g.subgroup_closure(&[a, b]);
        assert_eq!(v4.count(), 4);
        assert!(g.is_subgroup(&v4));
        assert!(g.is_normal(&v4).unwrap());
    }

    #[test]
    fn generating_mod_examples() {
        let g = alt5();
        g.order().unwrap();
        let five = g
            .index_of(&Element::perm_from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap())
            .unwrap()
            .unwrap();
        let double = g
            .index_of(&Element::perm_from_cycles(5, &[&[0, 1], &[2, 3]]).unwrap())
            .unwrap()
            .unwrap();
        let trivial = g.set_from_indices([0u32]);
        assert!(g.is_generating_mod(&[five, double], &trivial).unwrap());
        assert!(!g.is_generating_mod(&[double], &trivial).unwrap());
        let full = g.full_set();
        assert!(g.is_generating_mod(&[], &full).unwrap());
    }

    #[test]
    fn commutator_subgroup_of_perfect_group() {
        let g = alt5();
        let full = g.full_set();
        let derived = g.commutator_subgroup(&full).unwrap();
        assert_eq!(derived.count(), 60);
    }

    #[test]
    fn commutator_subgroup_of_v4_in_sym4() {
        let g = sym4();
        g.order().unwrap();
        let a = g
            .index_of(&Element::perm_from_cycles(4, &[&[0, 1], &[2, 3]]).unwrap())
            .unwrap()
            .unwrap();
        let b = g
            .index_of(&Element::perm_from_cycles(4, &[&[0, 2], &[1, 3]]).unwrap())
            .unwrap()
            .unwrap();
        let v4 = g.subgroup_closure(&[a, b]);
        let comm = g.commutator_subgroup(&v4).unwrap();
        assert_eq!(comm.count(), 4); // [V4, S4] = V4
    }

    #[test]
    fn classes_partition_the_group() {
        let g = sym4();
        g.order().unwrap();
        let classes = g.classes().unwrap();
        assert_eq!(classes.count(), 5);
        let total: usize = classes.members.iter().map(|m| m.len()).sum();
        assert_eq!(total, 24);
        assert_eq!(classes.class_of[0], 0); // identity first
    }

    #[test]
    fn class_space_product_matches_elementwise() {
        let g = alt5();
        g.order().unwrap();
        let classes = g.classes().unwrap();
        // take the union of the identity class and the 5-cycles class
        let mut set = g.empty_set();
        for c in [0u32, classes.class_of[1] ] {
            for &m in &classes.members[c as usize] {
                set.insert(m);
            }
        }
        let by_class = g.normal_set_product(&set, &set).unwrap();
        let mut naive = g.empty_set();
        for x in set.iter() {
            for y in set.iter() {
                naive.insert(g.mul(x, y));
            }
        }
        assert_eq!(by_class, naive);
    }

    #[test]
    fn normal_closure_of_transposition_pair_in_sym4() {
        let g = sym4();
        g.order().unwrap();
        let t = g
            .index_of(&Element::perm_from_cycles(4, &[&[0, 1], &[2, 3]]).unwrap())
            .unwrap()
            .unwrap();
        let nc = g.normal_closure(&[t]).unwrap();
        assert_eq!(nc.count(), 4); // V4
    }
}
