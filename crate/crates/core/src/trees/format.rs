use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::{BinaryTree, NodeId, Side};

const EMPTY: char = '·';
const UNLABELED: char = '*';

pub(super) fn write_tree(t: &BinaryTree) -> String {
    enum Step {
        Tree(Option<NodeId>),
        Label(NodeId),
        Text(&'static str),
    }
    let mut out = String::with_capacity(t.len() * 8 + 2);
    let mut stack = vec![Step::Tree(t.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Tree(None) => out.push(EMPTY),
            Step::Tree(Some(id)) => {
                stack.push(Step::Text(")"));
                stack.push(Step::Tree(t.right(id)));
                stack.push(Step::Text("("));
                stack.push(Step::Label(id));
                stack.push(Step::Text(")"));
                stack.push(Step::Tree(t.left(id)));
                out.push('(');
            }
            Step::Label(id) => match t.label(id) {
                Some(l) => write!(out, "{l}").expect("writing to a String cannot fail"),
                None => out.push(UNLABELED),
            },
            Step::Text(s) => out.push_str(s),
        }
    }
    out
}

/// Parses the `(left)label(right)` form written by
/// [`BinaryTree::to_paren_string`].
pub fn parse_tree(text: &str) -> Result<BinaryTree> {
    let chars: Vec<char> = text.trim().chars().collect();
    let mut pos = 0usize;
    let err = |pos: usize, msg: &str| Error::Parse {
        pos,
        msg: msg.to_string(),
    };
    let mut tree = BinaryTree::new();
    // Open nodes and whether their left subtree is done.
    let mut stack: Vec<(NodeId, bool)> = Vec::new();
    let mut slot: Option<(NodeId, Side)> = None;
    loop {
        // Parse one subtree into `slot`.
        match chars.get(pos) {
            Some(&EMPTY) => pos += 1,
            Some('(') => {
                pos += 1;
                let id = match slot {
                    None => tree.add_root(None),
                    Some((p, side)) => tree.add_child(p, side, None),
                };
                stack.push((id, false));
                slot = Some((id, Side::Left));
                continue;
            }
            _ => return Err(err(pos, "expected `(` or `·`")),
        }
        // Close finished subtrees.
        loop {
            let Some((id, left_done)) = stack.pop() else {
                if pos != chars.len() {
                    return Err(err(pos, "trailing input"));
                }
                return Ok(tree);
            };
            if chars.get(pos) != Some(&')') {
                return Err(err(pos, "expected `)`"));
            }
            pos += 1;
            if left_done {
                continue;
            }
            let start = pos;
            while pos < chars.len() && chars[pos] != '(' {
                pos += 1;
            }
            let raw: String = chars[start..pos].iter().collect();
            let label = match raw.as_str() {
                "*" => None,
                s => Some(s.parse::<i64>().map_err(|_| err(start, "bad label"))?),
            };
            tree.set_label(id, label);
            if chars.get(pos) != Some(&'(') {
                return Err(err(pos, "expected `(`"));
            }
            pos += 1;
            stack.push((id, true));
            slot = Some((id, Side::Right));
            break;
        }
    }
}
