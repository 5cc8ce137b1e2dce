//! Deterministic protocol trees and their garden-hose simulation.
//!
//! Text format, one s-expression per tree:
//!
//! ```text
//! (A ("0" (B ("0" (ACCEPT)) ("1" (REJECT))))
//!    ("1" (B ("0" (REJECT)) ("1" (ACCEPT)))))
//! ```
//!
//! An inner node names its owner (`A` or `B`) followed by branches. A branch
//! label is a pattern over the owner's whole input, most significant bit
//! first, with `*` matching either bit; the first matching branch is taken.

use std::sync::Arc;

use crate::bits::{bits_to_index, index_to_bits};
use crate::error::{Error, Result};
use crate::model::{End, Matching, PipeId, Protocol, ProtocolMeta, Side};

const MAX_OWNER_BITS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(bool),
    Inner {
        owner: Side,
        /// Child index for every input of the owner.
        branch: Vec<u32>,
        children: Vec<TreeNode>,
    },
}

impl TreeNode {
    fn edges(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Inner { children, .. } => {
                children.len() + children.iter().map(TreeNode::edges).sum::<usize>()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolTree {
    pub alice_bits: usize,
    pub bob_bits: usize,
    pub root: TreeNode,
}

impl ProtocolTree {
    /// Check branch tables against the input lengths.
    pub fn new(alice_bits: usize, bob_bits: usize, root: TreeNode) -> Result<Self> {
        fn check(node: &TreeNode, bits: [usize; 2]) -> Result<()> {
            if let TreeNode::Inner {
                owner,
                branch,
                children,
            } = node
            {
                let b = bits[*owner as usize];
                if children.is_empty() {
                    return Err(Error::MalformedTree("inner node without children".into()));
                }
                if branch.len() != 1 << b {
                    return Err(Error::MalformedTree(format!(
                        "branch table has {} entries, owner has {b} bits",
                        branch.len()
                    )));
                }
                if branch.iter().any(|&c| c as usize >= children.len()) {
                    return Err(Error::MalformedTree(
                        "branch selects a missing child".into(),
                    ));
                }
                children.iter().try_for_each(|c| check(c, bits))?;
            }
            Ok(())
        }
        if alice_bits.max(bob_bits) > MAX_OWNER_BITS {
            return Err(Error::CapExceeded {
                what: "owner input bits",
                value: alice_bits.max(bob_bits),
                cap: MAX_OWNER_BITS,
            });
        }
        check(&root, [alice_bits, bob_bits])?;
        Ok(ProtocolTree {
            alice_bits,
            bob_bits,
            root,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.root.edges()
    }

    pub fn evaluate(&self, x: &[bool], y: &[bool]) -> bool {
        let (xi, yi) = (bits_to_index(x) as usize, bits_to_index(y) as usize);
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(v) => return *v,
                TreeNode::Inner {
                    owner,
                    branch,
                    children,
                } => {
                    let input = match owner {
                        Side::Alice => xi,
                        Side::Bob => yi,
                    };
                    node = &children[branch[input] as usize];
                }
            }
        }
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Open(usize),
    Close(usize),
    Str(usize, String),
    Atom(usize, String),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((at, c)) = chars.next() {
        match c {
            '(' => out.push(Token::Open(at)),
            ')' => out.push(Token::Close(at)),
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, c)) => s.push(c),
                        None => {
                            return Err(Error::MalformedTree(format!(
                                "unterminated string at offset {at}"
                            )))
                        }
                    }
                }
                out.push(Token::Str(at, s));
            }
            c if c.is_whitespace() => {}
            _ => {
                let mut s = String::from(c);
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push(Token::Atom(at, s));
            }
        }
    }
    Ok(out)
}

/// Tree as parsed, before pattern resolution.
enum RawNode {
    Leaf(bool),
    Inner(Side, Vec<(String, RawNode)>),
}

struct TreeParser {
    tokens: Vec<Token>,
    pos: usize,
}

impl TreeParser {
    fn err(&self, what: &str) -> Error {
        let at = match self.tokens.get(self.pos) {
            Some(Token::Open(a) | Token::Close(a) | Token::Str(a, _) | Token::Atom(a, _)) => {
                format!("offset {a}")
            }
            None => "end of input".into(),
        };
        Error::MalformedTree(format!("{what} at {at}"))
    }

    fn expect_open(&mut self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some(Token::Open(_)) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err("expected '('")),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some(Token::Close(_)) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err("expected ')'")),
        }
    }

    fn node(&mut self) -> Result<RawNode> {
        self.expect_open()?;
        let head = match self.tokens.get(self.pos) {
            Some(Token::Atom(_, a)) => a.clone(),
            _ => return Err(self.err("expected ACCEPT, REJECT, A or B")),
        };
        self.pos += 1;
        let node = match head.as_str() {
            "ACCEPT" => RawNode::Leaf(true),
            "REJECT" => RawNode::Leaf(false),
            "A" | "B" => {
                let owner = if head == "A" { Side::Alice } else { Side::Bob };
                let mut branches = Vec::new();
                while let Some(Token::Open(_)) = self.tokens.get(self.pos) {
                    self.pos += 1;
                    let label = match self.tokens.get(self.pos) {
                        Some(Token::Str(_, s)) => s.clone(),
                        _ => return Err(self.err("expected a quoted branch label")),
                    };
                    self.pos += 1;
                    let child = self.node()?;
                    self.expect_close()?;
                    branches.push((label, child));
                }
                if branches.is_empty() {
                    return Err(self.err("inner node without branches"));
                }
                RawNode::Inner(owner, branches)
            }
            _ => return Err(self.err(&format!("unknown node {head:?}"))),
        };
        self.expect_close()?;
        Ok(node)
    }
}

fn pattern_lengths(node: &RawNode, lens: &mut [Option<usize>; 2]) -> Result<()> {
    if let RawNode::Inner(owner, branches) = node {
        for (label, child) in branches {
            if let Some(c) = label.chars().find(|c| !matches!(c, '0' | '1' | '*')) {
                return Err(Error::MalformedTree(format!(
                    "label {label:?} has character {c:?}"
                )));
            }
            let slot = &mut lens[*owner as usize];
            match *slot {
                Some(l) if l != label.len() => {
                    return Err(Error::MalformedTree(format!(
                        "label {label:?} has length {}, other {owner:?} labels have length {l}",
                        label.len()
                    )))
                }
                _ => *slot = Some(label.len()),
            }
            pattern_lengths(child, lens)?;
        }
    }
    Ok(())
}

fn resolve(node: RawNode, bits: [usize; 2]) -> Result<TreeNode> {
    match node {
        RawNode::Leaf(v) => Ok(TreeNode::Leaf(v)),
        RawNode::Inner(owner, branches) => {
            let b = bits[owner as usize];
            let mut branch = Vec::with_capacity(1 << b);
            for input in 0..1u64 << b {
                let value = index_to_bits(input, b);
                let hit = branches.iter().position(|(label, _)| {
                    label
                        .chars()
                        .zip(&value)
                        .all(|(c, &v)| c == '*' || (c == '1') == v)
                });
                match hit {
                    Some(i) => branch.push(i as u32),
                    None => {
                        return Err(Error::MalformedTree(format!(
                            "{owner:?} input {} selects no branch",
                            crate::bits::bits_to_string(&value)
                        )))
                    }
                }
            }
            let children = branches
                .into_iter()
                .map(|(_, c)| resolve(c, bits))
                .collect::<Result<Vec<_>>>()?;
            Ok(TreeNode::Inner {
                owner,
                branch,
                children,
            })
        }
    }
}

pub fn parse_protocol_tree(text: &str) -> Result<ProtocolTree> {
    let mut parser = TreeParser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let raw = parser.node()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.err("trailing input"));
    }
    let mut lens = [None, None];
    pattern_lengths(&raw, &mut lens)?;
    let bits = [lens[0].unwrap_or(0), lens[1].unwrap_or(0)];
    if bits[0].max(bits[1]) > MAX_OWNER_BITS {
        return Err(Error::CapExceeded {
            what: "owner input bits",
            value: bits[0].max(bits[1]),
            cap: MAX_OWNER_BITS,
        });
    }
    let root = resolve(raw, bits)?;
    ProtocolTree::new(bits[0], bits[1], root)
}

/// Flattened tree with one pipe per edge that makes the water cross sides.
struct Plan {
    owner: Vec<Option<Side>>,
    leaf: Vec<bool>,
    branch: Vec<Vec<u32>>,
    children: Vec<Vec<usize>>,
    /// Pipe of edge `(node, child slot)`, 0 when the edge needs none.
    pipe: Vec<Vec<u32>>,
    /// `(entry end, node)` per player: where the water can arrive at a
    /// node the player owns from the other side.
    entries: [Vec<(End, usize)>; 2],
}

impl Plan {
    fn new(tree: &ProtocolTree) -> (Plan, usize) {
        let mut plan = Plan {
            owner: Vec::new(),
            leaf: Vec::new(),
            branch: Vec::new(),
            children: Vec::new(),
            pipe: Vec::new(),
            entries: [Vec::new(), Vec::new()],
        };
        fn flatten(plan: &mut Plan, node: &TreeNode) -> usize {
            let id = plan.owner.len();
            plan.owner.push(None);
            plan.leaf.push(false);
            plan.branch.push(Vec::new());
            plan.children.push(Vec::new());
            plan.pipe.push(Vec::new());
            match node {
                TreeNode::Leaf(v) => plan.leaf[id] = *v,
                TreeNode::Inner {
                    owner,
                    branch,
                    children,
                } => {
                    plan.owner[id] = Some(*owner);
                    plan.branch[id] = branch.clone();
                    let kids = children.iter().map(|c| flatten(plan, c)).collect();
                    plan.children[id] = kids;
                }
            }
            id
        }
        flatten(&mut plan, &tree.root);
        let mut next = 0u32;
        let mut alloc = || {
            next += 1;
            next
        };
        match plan.owner[0] {
            Some(Side::Alice) => plan.entries[0].push((End::Tap, 0)),
            Some(Side::Bob) => {
                let root = alloc();
                plan.entries[1].push((End::Pipe(PipeId::new(root)), 0));
            }
            None => {
                if plan.leaf[0] {
                    alloc();
                }
            }
        }
        for u in 0..plan.owner.len() {
            let Some(owner) = plan.owner[u] else { continue };
            let mut pipes = Vec::with_capacity(plan.children[u].len());
            for &c in &plan.children[u] {
                let crossing = match plan.owner[c] {
                    Some(o) => o != owner,
                    None => plan.leaf[c] == (owner == Side::Alice),
                };
                if crossing {
                    let p = alloc();
                    pipes.push(p);
                    if let Some(o) = plan.owner[c] {
                        plan.entries[o as usize].push((End::Pipe(PipeId::new(p)), c));
                    }
                } else {
                    pipes.push(0);
                }
            }
            plan.pipe[u] = pipes;
        }
        (plan, next as usize)
    }

    fn matching(&self, side: Side, input: &[bool]) -> Matching {
        let index = bits_to_index(input) as usize;
        let mut m = Matching::new();
        let tap_to_first = match self.owner[0] {
            Some(Side::Bob) => true,
            Some(Side::Alice) => false,
            None => self.leaf[0],
        };
        if side == Side::Alice && tap_to_first {
            m.set_tap(Some(PipeId::new(1)));
        }
        for &(entry, start) in &self.entries[side as usize] {
            let mut v = start;
            loop {
                let slot = self.branch[v][index] as usize;
                let c = self.children[v][slot];
                if self.owner[c] == Some(side) {
                    v = c;
                    continue;
                }
                let p = self.pipe[v][slot];
                if p != 0 {
                    m.connect(entry, End::Pipe(PipeId::new(p)));
                }
                break;
            }
        }
        m
    }
}

/// One pipe per edge that crosses sides: an edge into a node of the other
/// player, an Alice edge into an accepting leaf or a Bob edge into a
/// rejecting leaf. A tree whose root belongs to Bob needs one more pipe to
/// carry the water from the tap to him.
pub fn compile_protocol_tree(tree: &ProtocolTree) -> Result<Protocol> {
    let tree = ProtocolTree::new(tree.alice_bits, tree.bob_bits, tree.root.clone())?;
    let (plan, pipes) = Plan::new(&tree);
    let plan = Arc::new(plan);
    let bob_plan = plan.clone();
    let meta = ProtocolMeta::named("protocol-tree")
        .bound("size", pipes as u64)
        .bound("edges", tree.edge_count() as u64);
    Ok(Protocol::from_fns(
        pipes,
        tree.alice_bits,
        tree.bob_bits,
        move |x| plan.matching(Side::Alice, x),
        move |y| bob_plan.matching(Side::Bob, y),
        meta,
    ))
}
