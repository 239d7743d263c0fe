use std::collections::{BTreeMap, HashMap};

use crate::syntax::{Formula, Signature, SyntaxError, Term, Var};

/// Index of a compiled subformula. Structurally equal subformulas share one id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

pub(crate) type Slot = u16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum CTerm {
    Var(Slot),
    App(usize, Vec<CTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Atom(usize, Vec<CTerm>),
    Eq(CTerm, CTerm),
    Not(NodeId),
    And(NodeId, NodeId),
    Exists(Slot, NodeId),
    Pref(usize, NodeId, NodeId),
}

/// A set of formulas compiled against one signature.
///
/// Variables are mapped to dense slots shared by every formula added, and
/// identical subformulas are stored once, so evaluating `φ`, `□φ` and `◇φ`
/// together computes `φ` a single time.
#[derive(Debug, Clone)]
pub struct Compiled {
    signature: Signature,
    pub(crate) nodes: Vec<Node>,
    /// Sorted free slots of each node.
    pub(crate) free: Vec<Vec<Slot>>,
    /// Modal depth of each node.
    pub(crate) depth: Vec<u32>,
    interned: HashMap<Node, NodeId>,
    slots: BTreeMap<Var, Slot>,
    slot_vars: Vec<Var>,
}

impl Compiled {
    pub fn new(signature: &Signature) -> Self {
        Compiled {
            signature: signature.clone(),
            nodes: Vec::new(),
            free: Vec::new(),
            depth: Vec::new(),
            interned: HashMap::new(),
            slots: BTreeMap::new(),
            slot_vars: Vec::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn slot_count(&self) -> usize {
        self.slot_vars.len()
    }

    pub fn slot_var(&self, slot: usize) -> Var {
        self.slot_vars[slot]
    }

    pub fn free_variables(&self, id: NodeId) -> Vec<Var> {
        self.free[id.0 as usize]
            .iter()
            .map(|&s| self.slot_vars[s as usize])
            .collect()
    }

    pub fn modal_depth(&self, id: NodeId) -> usize {
        self.depth[id.0 as usize] as usize
    }

    pub fn add(&mut self, f: &Formula) -> Result<NodeId, SyntaxError> {
        self.signature.check(f)?;
        Ok(self.node(f))
    }

    fn slot(&mut self, v: Var) -> Slot {
        if let Some(&s) = self.slots.get(&v) {
            return s;
        }
        let s = self.slot_vars.len() as Slot;
        self.slots.insert(v, s);
        self.slot_vars.push(v);
        s
    }

    fn term(&mut self, t: &Term) -> CTerm {
        match t {
            Term::Var(v) => CTerm::Var(self.slot(*v)),
            Term::App(name, args) => {
                let id = self
                    .signature
                    .functions()
                    .keys()
                    .position(|n| n == name)
                    .expect("checked");
                CTerm::App(id, args.iter().map(|a| self.term(a)).collect())
            }
        }
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.interned.get(&node) {
            return id;
        }
        let mut free: Vec<Slot> = Vec::new();
        let mut depth = 0;
        fn term_slots(t: &CTerm, out: &mut Vec<Slot>) {
            match t {
                CTerm::Var(s) => out.push(*s),
                CTerm::App(_, args) => args.iter().for_each(|a| term_slots(a, out)),
            }
        }
        match &node {
            Node::Atom(_, args) => args.iter().for_each(|a| term_slots(a, &mut free)),
            Node::Eq(s, t) => {
                term_slots(s, &mut free);
                term_slots(t, &mut free);
            }
            Node::Not(a) => {
                free.extend(&self.free[a.0 as usize]);
                depth = self.depth[a.0 as usize];
            }
            Node::And(a, b) | Node::Pref(_, a, b) => {
                free.extend(&self.free[a.0 as usize]);
                free.extend(&self.free[b.0 as usize]);
                depth = self.depth[a.0 as usize].max(self.depth[b.0 as usize]);
                if matches!(node, Node::Pref(..)) {
                    depth += 1;
                }
            }
            Node::Exists(v, a) => {
                free.extend(self.free[a.0 as usize].iter().filter(|s| *s != v));
                depth = self.depth[a.0 as usize];
            }
        }
        free.sort_unstable();
        free.dedup();
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.free.push(free);
        self.depth.push(depth);
        self.interned.insert(node, id);
        id
    }

    fn node(&mut self, f: &Formula) -> NodeId {
        let node = match f {
            Formula::Atom(p, args) => {
                let id = self
                    .signature
                    .predicates()
                    .keys()
                    .position(|n| n == p)
                    .expect("checked");
                Node::Atom(id, args.iter().map(|a| self.term(a)).collect())
            }
            Formula::Equals(s, t) => {
                let s = self.term(s);
                let t = self.term(t);
                Node::Eq(s, t)
            }
            Formula::Not(a) => Node::Not(self.node(a)),
            Formula::And(a, b) => {
                let a = self.node(a);
                let b = self.node(b);
                Node::And(a, b)
            }
            Formula::Exists(v, a) => {
                let s = self.slot(*v);
                Node::Exists(s, self.node(a))
            }
            Formula::Succeq(x, a, b) => {
                let k = self.signature.index_position(x).expect("checked");
                let a = self.node(a);
                let b = self.node(b);
                Node::Pref(k, a, b)
            }
        };
        self.intern(node)
    }
}
