//! Arena-backed splay tree with bottom-up splaying.

const NIL: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Node<K, V> {
    key: K,
    value: V,
    left: usize,
    right: usize,
    parent: usize,
}

#[derive(Clone, Debug)]
pub struct SplayTree<K, V> {
    nodes: Vec<Node<K, V>>,
    root: usize,
}

impl<K: Ord, V> Default for SplayTree<K, V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord, V> SplayTree<K, V> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            root: NIL,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root_key(&self) -> Option<&K> {
        self.nodes.get(self.root).map(|n| &n.key)
    }

    /// Walks toward `key`; returns the matching node or the last node touched.
    fn descend(&self, key: &K) -> (usize, std::cmp::Ordering) {
        let mut at = self.root;
        loop {
            let node = &self.nodes[at];
            let ord = key.cmp(&node.key);
            let next = match ord {
                std::cmp::Ordering::Less => node.left,
                std::cmp::Ordering::Greater => node.right,
                std::cmp::Ordering::Equal => return (at, ord),
            };
            if next == NIL {
                return (at, ord);
            }
            at = next;
        }
    }

    /// Finds `key` and splays it to the root; on a miss the last node touched is splayed.
    pub fn get_mut(&mut self, key: &K) -> Option<&mut V> {
        if self.root == NIL {
            return None;
        }
        let (at, ord) = self.descend(key);
        self.splay(at);
        if ord == std::cmp::Ordering::Equal {
            Some(&mut self.nodes[at].value)
        } else {
            None
        }
    }

    /// Finds or inserts `key`, splaying its node to the root.
    ///
    /// The flag is true when the node was created by this call.
    pub fn entry(&mut self, key: K, make: impl FnOnce() -> V) -> (&mut V, bool) {
        if self.root == NIL {
            self.nodes.push(Node {
                key,
                value: make(),
                left: NIL,
                right: NIL,
                parent: NIL,
            });
            self.root = 0;
            return (&mut self.nodes[0].value, true);
        }
        let (at, ord) = self.descend(&key);
        let (target, fresh) = match ord {
            std::cmp::Ordering::Equal => (at, false),
            _ => {
                let id = self.nodes.len();
                self.nodes.push(Node {
                    key,
                    value: make(),
                    left: NIL,
                    right: NIL,
                    parent: at,
                });
                if ord == std::cmp::Ordering::Less {
                    self.nodes[at].left = id;
                } else {
                    self.nodes[at].right = id;
                }
                (id, true)
            }
        };
        self.splay(target);
        (&mut self.nodes[target].value, fresh)
    }

    fn rotate(&mut self, x: usize) {
        let p = self.nodes[x].parent;
        let g = self.nodes[p].parent;
        if self.nodes[p].left == x {
            let b = self.nodes[x].right;
            self.nodes[p].left = b;
            if b != NIL {
                self.nodes[b].parent = p;
            }
            self.nodes[x].right = p;
        } else {
            let b = self.nodes[x].left;
            self.nodes[p].right = b;
            if b != NIL {
                self.nodes[b].parent = p;
            }
            self.nodes[x].left = p;
        }
        self.nodes[p].parent = x;
        self.nodes[x].parent = g;
        if g == NIL {
            self.root = x;
        } else if self.nodes[g].left == p {
            self.nodes[g].left = x;
        } else {
            self.nodes[g].right = x;
        }
    }

    fn splay(&mut self, x: usize) {
        while self.nodes[x].parent != NIL {
            let p = self.nodes[x].parent;
            let g = self.nodes[p].parent;
            if g != NIL {
                let zig_zig = (self.nodes[g].left == p) == (self.nodes[p].left == x);
                if zig_zig {
                    self.rotate(p);
                } else {
                    self.rotate(x);
                }
            }
            self.rotate(x);
        }
    }

    /// In-order traversal without splaying.
    pub fn iter(&self) -> impl Iterator<Item = (&K, &V)> + '_ {
        let mut stack = Vec::new();
        let mut at = self.root;
        std::iter::from_fn(move || {
            while at != NIL {
                stack.push(at);
                at = self.nodes[at].left;
            }
            let id = stack.pop()?;
            at = self.nodes[id].right;
            Some((&self.nodes[id].key, &self.nodes[id].value))
        })
    }

    /// Consumes the tree, yielding entries in key order.
    pub fn into_sorted(self) -> Vec<(K, V)> {
        let order: Vec<usize> = {
            let mut ids = Vec::with_capacity(self.nodes.len());
            let mut stack = Vec::new();
            let mut at = self.root;
            loop {
                while at != NIL {
                    stack.push(at);
                    at = self.nodes[at].left;
                }
                match stack.pop() {
                    Some(id) => {
                        ids.push(id);
                        at = self.nodes[id].right;
                    }
                    None => break,
                }
            }
            ids
        };
        let mut slots: Vec<Option<(K, V)>> =
            self.nodes.into_iter().map(|n| Some((n.key, n.value))).collect();
        order.into_iter().map(|id| slots[id].take().unwrap()).collect()
    }

    /// Checks parent links and key order; returns the height.
    pub fn check_invariants(&self) -> Result<usize, String> {
        if self.root == NIL {
            return if self.nodes.is_empty() {
                Ok(0)
            } else {
                Err("nodes unreachable from an empty root".into())
            };
        }
        if self.nodes[self.root].parent != NIL {
            return Err("root has a parent".into());
        }
        let mut seen = 0usize;
        let mut height = 0usize;
        let mut stack = vec![(self.root, 1usize)];
        while let Some((id, depth)) = stack.pop() {
            seen += 1;
            height = height.max(depth);
            let node = &self.nodes[id];
            for (child, is_left) in [(node.left, true), (node.right, false)] {
                if child == NIL {
                    continue;
                }
                if self.nodes[child].parent != id {
                    return Err("broken parent link".into());
                }
                let ok = if is_left {
                    self.nodes[child].key < node.key
                } else {
                    self.nodes[child].key > node.key
                };
                if !ok {
                    return Err("child on the wrong side".into());
                }
                stack.push((child, depth + 1));
            }
        }
        if seen != self.nodes.len() {
            return Err("unreachable nodes".into());
        }
        let keys: Vec<&K> = self.iter().map(|(k, _)| k).collect();
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err("in-order keys not increasing".into());
        }
        Ok(height)
    }
}
