//! Finite Kripke models, event models and the model-level operations:
//! valuation override, relativisation, product update and generated
//! submodels.
//!
//! Worlds and events are addressed by their position; names are kept for
//! display and file formats. Relativisation and product update may produce
//! models with no worlds. Only constructors used for external input insist
//! on a non-empty domain.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::bitset::{BitSet, WorldSet};
use crate::semantics::{self, EvalBudget, EvalError};
use crate::syntax::{Formula, PropName};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a model needs at least one world")]
    EmptyDomain,
    #[error("an event model needs at least one event")]
    EmptyEventSet,
    #[error("relation mentions unknown world `{0}`")]
    UnknownWorldInRelation(String),
    #[error("valuation mentions unknown world `{0}`")]
    UnknownWorldInValuation(String),
    #[error("relation mentions unknown event `{0}`")]
    UnknownEventInRelation(String),
    #[error("world `{0}` is listed twice")]
    DuplicateWorld(String),
    #[error("event `{0}` is listed twice")]
    DuplicateEvent(String),
    #[error("no precondition given for event `{0}`")]
    MissingPrecondition(String),
    #[error("precondition of `{event}` is outside the static base language ({found})")]
    PreconditionNotBaseMso { event: String, found: String },
    #[error("world index {0} is outside the model")]
    WorldOutOfModel(usize),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("proposition name `{0}` is reserved")]
    ReservedName(String),
}

/// A finite relational model `(worlds, relation, valuation)`.
///
/// The valuation never stores empty extensions, so two models that agree
/// on every proposition compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    worlds: Vec<String>,
    succ: Vec<WorldSet>,
    valuation: BTreeMap<PropName, WorldSet>,
}

impl KripkeModel {
    /// A model with no worlds; only arises from internal constructions.
    pub fn empty() -> KripkeModel {
        KripkeModel {
            worlds: Vec::new(),
            succ: Vec::new(),
            valuation: BTreeMap::new(),
        }
    }

    /// Builds a model from world names, an edge list and a valuation, all by index.
    pub fn new(
        worlds: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        valuation: impl IntoIterator<Item = (PropName, WorldSet)>,
    ) -> Result<KripkeModel, ModelError> {
        let n = worlds.len();
        for (i, w) in worlds.iter().enumerate() {
            if worlds[..i].contains(w) {
                return Err(ModelError::DuplicateWorld(w.clone()));
            }
        }
        let mut succ = alloc::vec![BitSet::empty(n); n];
        for (a, b) in edges {
            if a >= n {
                return Err(ModelError::WorldOutOfModel(a));
            }
            if b >= n {
                return Err(ModelError::WorldOutOfModel(b));
            }
            succ[a].insert(b);
        }
        let mut m = KripkeModel {
            worlds,
            succ,
            valuation: BTreeMap::new(),
        };
        for (p, x) in valuation {
            if x.universe() != n {
                return Err(ModelError::WorldOutOfModel(x.universe()));
            }
            m.set_prop(p, x);
        }
        Ok(m)
    }

    /// Builds a non-empty model from names, as read from input files.
    pub fn from_names<S: AsRef<str>>(
        worlds: &[S],
        rel: &[(S, S)],
        val: &[(S, Vec<S>)],
    ) -> Result<KripkeModel, ModelError> {
        if worlds.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        let names: Vec<String> = worlds.iter().map(|w| w.as_ref().to_string()).collect();
        let index = |w: &str| names.iter().position(|x| x == w);
        let mut edges = Vec::new();
        for (a, b) in rel {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = index(a).ok_or_else(|| ModelError::UnknownWorldInRelation(a.to_string()))?;
            let ib = index(b).ok_or_else(|| ModelError::UnknownWorldInRelation(b.to_string()))?;
            edges.push((ia, ib));
        }
        let mut valuation = Vec::new();
        for (p, ws) in val {
            let p = p.as_ref();
            if crate::syntax::is_reserved_name(p) {
                return Err(ModelError::ReservedName(p.to_string()));
            }
            let mut set = BitSet::empty(names.len());
            for w in ws {
                let w = w.as_ref();
                set.insert(index(w).ok_or_else(|| ModelError::UnknownWorldInValuation(w.to_string()))?);
            }
            valuation.push((p.to_string(), set));
        }
        KripkeModel::new(names, edges, valuation)
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world_names(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_name(&self, w: usize) -> &str {
        &self.worlds[w]
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn all(&self) -> WorldSet {
        BitSet::full(self.len())
    }

    pub fn no_worlds(&self) -> WorldSet {
        BitSet::empty(self.len())
    }

    pub fn successors(&self, w: usize) -> &WorldSet {
        &self.succ[w]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.succ[a].contains(b)
    }

    /// Edges in lexicographic order of indices.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |b| (a, b)))
    }

    /// Extension of `p`; empty when `p` is not mentioned.
    pub fn valuation(&self, p: &str) -> WorldSet {
        self.valuation
            .get(p)
            .cloned()
            .unwrap_or_else(|| self.no_worlds())
    }

    /// Propositions with a non-empty extension, in name order.
    pub fn props(&self) -> impl Iterator<Item = (&PropName, &WorldSet)> {
        self.valuation.iter()
    }

    fn set_prop(&mut self, p: PropName, x: WorldSet) {
        if x.is_empty() {
            self.valuation.remove(&p);
        } else {
            self.valuation.insert(p, x);
        }
    }

    /// In-place override used by the evaluator while enumerating subsets.
    pub(crate) fn override_prop(&mut self, p: &str, x: WorldSet) -> Option<WorldSet> {
        if let Some(slot) = self.valuation.get_mut(p) {
            Some(core::mem::replace(slot, x))
        } else {
            self.valuation.insert(p.to_string(), x);
            None
        }
    }

    pub(crate) fn restore_prop(&mut self, p: &str, old: Option<WorldSet>) {
        match old {
            Some(x) if !x.is_empty() => {
                self.valuation.insert(p.to_string(), x);
            }
            _ => {
                self.valuation.remove(p);
            }
        }
    }

    /// `M[p -> x]`: the same model with the extension of `p` replaced by `x`.
    pub fn with_valuation(&self, p: &str, x: &WorldSet) -> Result<KripkeModel, ModelError> {
        if x.universe() != self.len() {
            return Err(ModelError::WorldOutOfModel(x.universe()));
        }
        let mut m = self.clone();
        m.set_prop(p.to_string(), x.clone());
        Ok(m)
    }

    /// Restriction to the worlds in `a`: the relation becomes `R ∩ (a × a)`
    /// and each extension is intersected with `a`. World order is preserved.
    pub fn relativise(&self, a: &WorldSet) -> Result<KripkeModel, ModelError> {
        if a.universe() != self.len() {
            return Err(ModelError::WorldOutOfModel(a.universe()));
        }
        Ok(self.restrict(&a.to_vec()))
    }

    /// Restriction to `keep` (ascending old indices); new index `i` is old `keep[i]`.
    pub(crate) fn restrict(&self, keep: &[usize]) -> KripkeModel {
        let n = keep.len();
        let mut new_index = alloc::vec![usize::MAX; self.len()];
        for (i, &w) in keep.iter().enumerate() {
            new_index[w] = i;
        }
        let remap = |s: &WorldSet| {
            BitSet::from_indices(n, s.iter().filter(|&w| new_index[w] != usize::MAX).map(|w| new_index[w]))
        };
        let mut out = KripkeModel {
            worlds: keep.iter().map(|&w| self.worlds[w].clone()).collect(),
            succ: keep.iter().map(|&w| remap(&self.succ[w])).collect(),
            valuation: BTreeMap::new(),
        };
        for (p, x) in &self.valuation {
            out.set_prop(p.clone(), remap(x));
        }
        out
    }

    /// The submodel on worlds reachable from `w` in at most `k` steps,
    /// keeping every edge of `R` between them. At `k = 0` that is `{w}`
    /// with no edges, even if `w` has a loop.
    pub fn generated_submodel_k(&self, w: usize, k: usize) -> Result<PointedModel, ModelError> {
        if w >= self.len() {
            return Err(ModelError::WorldOutOfModel(w));
        }
        let mut dist = alloc::vec![usize::MAX; self.len()];
        dist[w] = 0;
        let mut queue = VecDeque::from([w]);
        while let Some(u) = queue.pop_front() {
            if dist[u] == k {
                continue;
            }
            for v in self.succ[u].iter() {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&u| dist[u] != usize::MAX).collect();
        let mut model = self.restrict(&keep);
        if k == 0 {
            model.succ = alloc::vec![BitSet::empty(1); 1];
        }
        let point = keep.iter().position(|&u| u == w).expect("root is kept");
        Ok(PointedModel { model, point })
    }

    /// Adds a copy of world `w` named `name`: same valuation, same
    /// successors, and every predecessor of `w` also points at the copy.
    /// A loop on `w` becomes edges among both copies.
    pub fn duplicate_world(&self, w: usize, name: &str) -> KripkeModel {
        let n = self.len();
        let grow = |s: &WorldSet| {
            let mut t = BitSet::from_indices(n + 1, s.iter());
            if s.contains(w) {
                t.insert(n);
            }
            t
        };
        let mut succ: Vec<WorldSet> = self.succ.iter().map(grow).collect();
        succ.push(succ[w].clone());
        let mut worlds = self.worlds.clone();
        worlds.push(name.to_string());
        let mut valuation = BTreeMap::new();
        for (p, x) in &self.valuation {
            let mut y = BitSet::from_indices(n + 1, x.iter());
            if x.contains(w) {
                y.insert(n);
            }
            valuation.insert(p.clone(), y);
        }
        KripkeModel {
            worlds,
            succ,
            valuation,
        }
    }
}

/// A model with a distinguished world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    pub model: KripkeModel,
    pub point: usize,
}

/// A finite event model: events, an accessibility relation on events and
/// one precondition per event. Event order fixes nominal numbering: the
/// nominal `j_i` refers to the i-th event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventModel {
    events: Vec<String>,
    succ: Vec<BitSet>,
    pre: Vec<Formula>,
}

impl EventModel {
    /// Preconditions must be static (`BaseMso` or `MuFragment`).
    pub fn new(
        events: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        pre: Vec<Formula>,
    ) -> Result<EventModel, ModelError> {
        let n = events.len();
        if n == 0 {
            return Err(ModelError::EmptyEventSet);
        }
        for (i, e) in events.iter().enumerate() {
            if events[..i].contains(e) {
                return Err(ModelError::DuplicateEvent(e.clone()));
            }
        }
        if pre.len() != n {
            return Err(ModelError::MissingPrecondition(
                events.get(pre.len()).cloned().unwrap_or_default(),
            ));
        }
        for (e, f) in events.iter().zip(&pre) {
            match f.classify() {
                Ok(tag) if tag.is_static() => {}
                Ok(tag) => {
                    return Err(ModelError::PreconditionNotBaseMso {
                        event: e.clone(),
                        found: tag.name().to_string(),
                    })
                }
                Err(err) => {
                    return Err(ModelError::PreconditionNotBaseMso {
                        event: e.clone(),
                        found: err.to_string(),
                    })
                }
            }
        }
        let mut succ = alloc::vec![BitSet::empty(n); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(ModelError::UnknownEventInRelation(format!("#{}", a.max(b))));
            }
            succ[a].insert(b);
        }
        Ok(EventModel { events, succ, pre })
    }

    /// Builds an event model from names.
    pub fn from_names<S: AsRef<str>>(
        events: &[S],
        rel: &[(S, S)],
        pre: &[(S, Formula)],
    ) -> Result<EventModel, ModelError> {
        if events.is_empty() {
            return Err(ModelError::EmptyEventSet);
        }
        let names: Vec<String> = events.iter().map(|e| e.as_ref().to_string()).collect();
        let index = |e: &str| names.iter().position(|x| x == e);
        let mut edges = Vec::new();
        for (a, b) in rel {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = index(a).ok_or_else(|| ModelError::UnknownEventInRelation(a.to_string()))?;
            let ib = index(b).ok_or_else(|| ModelError::UnknownEventInRelation(b.to_string()))?;
            edges.push((ia, ib));
        }
        let mut pres: Vec<Option<Formula>> = alloc::vec![None; names.len()];
        for (e, f) in pre {
            let e = e.as_ref();
            let i = index(e).ok_or_else(|| ModelError::UnknownEvent(e.to_string()))?;
            pres[i] = Some(f.clone());
        }
        let pre = pres
            .into_iter()
            .zip(&names)
            .map(|(f, e)| f.ok_or_else(|| ModelError::MissingPrecondition(e.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        EventModel::new(names, edges, pre)
    }

    /// One event `a0` with a loop and precondition `true`.
    pub fn skip() -> EventModel {
        EventModel {
            events: alloc::vec!["a0".to_string()],
            succ: alloc::vec![BitSet::full(1)],
            pre: alloc::vec![Formula::Top],
        }
    }

    /// One event `a0` with a loop and precondition `announced`: product
    /// update with this model is relativisation to the extension of `announced`.
    pub fn announcement(announced: Formula) -> Result<EventModel, ModelError> {
        EventModel::new(alloc::vec!["a0".to_string()], [(0, 0)], alloc::vec![announced])
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn event_names(&self) -> &[String] {
        &self.events
    }

    pub fn event_name(&self, e: usize) -> &str {
        &self.events[e]
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e == name)
    }

    pub fn pre(&self, e: usize) -> &Formula {
        &self.pre[e]
    }

    pub fn preconditions(&self) -> &[Formula] {
        &self.pre
    }

    pub fn successors(&self, e: usize) -> &BitSet {
        &self.succ[e]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |b| (a, b)))
    }

    /// Every proposition mentioned by some precondition.
    pub fn precondition_props(&self) -> alloc::collections::BTreeSet<PropName> {
        self.pre.iter().flat_map(|f| f.all_props()).collect()
    }
}

/// A model together with the event each world was produced by, when it is
/// the result of a product update. Nominals are evaluated against the tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedModel {
    pub model: KripkeModel,
    pub tags: Option<Vec<usize>>,
}

impl TaggedModel {
    pub fn untagged(model: KripkeModel) -> TaggedModel {
        TaggedModel { model, tags: None }
    }

    pub fn tag(&self, w: usize) -> Option<usize> {
        self.tags.as_ref().map(|t| t[w])
    }

    pub(crate) fn restrict(&self, keep: &[usize]) -> TaggedModel {
        TaggedModel {
            model: self.model.restrict(keep),
            tags: self.tags.as_ref().map(|t| keep.iter().map(|&w| t[w]).collect()),
        }
    }
}

impl From<KripkeModel> for TaggedModel {
    fn from(model: KripkeModel) -> TaggedModel {
        TaggedModel::untagged(model)
    }
}

/// Product of a model with an event model, with the `(world, event)` pair
/// behind each product world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product {
    pub tagged: TaggedModel,
    pub pairs: Vec<(usize, usize)>,
}

impl Product {
    pub fn index_of(&self, world: usize, event: usize) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (world, event))
    }
}

/// Product construction given the extension of every precondition.
/// Worlds are ordered world-major then event, and named `(w,a)`.
pub(crate) fn build_product(m: &KripkeModel, a: &EventModel, pre_ext: &[WorldSet]) -> Product {
    let mut pairs = Vec::new();
    for w in 0..m.len() {
        for (e, ext) in pre_ext.iter().enumerate() {
            if ext.contains(w) {
                pairs.push((w, e));
            }
        }
    }
    let n = pairs.len();
    let mut succ = alloc::vec![BitSet::empty(n); n];
    for (i, &(w, e)) in pairs.iter().enumerate() {
        for (j, &(v, f)) in pairs.iter().enumerate() {
            if m.has_edge(w, v) && a.successors(e).contains(f) {
                succ[i].insert(j);
            }
        }
    }
    let mut valuation = BTreeMap::new();
    for (p, x) in m.valuation.iter() {
        let lifted = BitSet::from_indices(n, (0..n).filter(|&i| x.contains(pairs[i].0)));
        if !lifted.is_empty() {
            valuation.insert(p.clone(), lifted);
        }
    }
    let worlds = pairs
        .iter()
        .map(|&(w, e)| format!("({},{})", m.world_name(w), a.event_name(e)))
        .collect();
    let model = KripkeModel {
        worlds,
        succ,
        valuation,
    };
    let tags = pairs.iter().map(|&(_, e)| e).collect();
    Product {
        tagged: TaggedModel {
            model,
            tags: Some(tags),
        },
        pairs,
    }
}

/// `M ⊗ A`: pairs `(w, a)` with `w` satisfying the precondition of `a`,
/// related when both components are, valuation taken from the world.
pub fn product_update(m: &KripkeModel, a: &EventModel) -> Result<TaggedModel, EvalError> {
    Ok(product_with_pairs(m, a, &EvalBudget::default())?.tagged)
}

pub fn product_with_pairs(m: &KripkeModel, a: &EventModel, budget: &EvalBudget) -> Result<Product, EvalError> {
    let base = TaggedModel::untagged(m.clone());
    let pre_ext = a
        .preconditions()
        .iter()
        .map(|f| semantics::extension(&base, f, None, budget))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(build_product(m, a, &pre_ext))
}

/// Event model whose single event has precondition `announced`.
pub fn announcement_event_model(announced: &Formula) -> Result<EventModel, ModelError> {
    EventModel::announcement(announced.clone())
}
