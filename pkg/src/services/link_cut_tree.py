"""
Link-cut tree over a fixed vertex set.

Splay-tree based, with lazy path reversal so any vertex can be made the
root. link/cut/connected/path queries run in amortized O(log n); path
extraction adds the path length. Node fields live in parallel lists.
"""
from typing import List

NIL = -1


class LinkCutTree:
    """Forest of rooted trees supporting reroot, link, cut and path queries"""

    def __init__(self, n: int):
        self.left: List[int] = [NIL] * n
        self.right: List[int] = [NIL] * n
        self.parent: List[int] = [NIL] * n
        self.rev: List[bool] = [False] * n

    def copy(self) -> 'LinkCutTree':
        clone = LinkCutTree(0)
        clone.left = list(self.left)
        clone.right = list(self.right)
        clone.parent = list(self.parent)
        clone.rev = list(self.rev)
        return clone

    def _is_root(self, x: int) -> bool:
        """True if x is the root of its splay tree (not of the represented tree)"""
        p = self.parent[x]
        return p == NIL or (self.left[p] != x and self.right[p] != x)

    def _push(self, x: int) -> None:
        if self.rev[x]:
            self.rev[x] = False
            l, r = self.left[x], self.right[x]
            self.left[x], self.right[x] = r, l
            if l != NIL:
                self.rev[l] = not self.rev[l]
            if r != NIL:
                self.rev[r] = not self.rev[r]

    def _rotate(self, x: int) -> None:
        left, right, parent = self.left, self.right, self.parent
        p = parent[x]
        g = parent[p]
        if not self._is_root(p):
            if left[g] == p:
                left[g] = x
            else:
                right[g] = x
        parent[x] = g
        if left[p] == x:
            child = right[x]
            left[p] = child
            right[x] = p
        else:
            child = left[x]
            right[p] = child
            left[x] = p
        if child != NIL:
            parent[child] = p
        parent[p] = x

    def _splay(self, x: int) -> None:
        # Push pending reversals top-down along the splay path first
        stack = [x]
        y = x
        while not self._is_root(y):
            y = self.parent[y]
            stack.append(y)
        for y in reversed(stack):
            self._push(y)

        while not self._is_root(x):
            p = self.parent[x]
            if not self._is_root(p):
                g = self.parent[p]
                if (self.left[g] == p) == (self.left[p] == x):
                    self._rotate(p)
                else:
                    self._rotate(x)
            self._rotate(x)

    def access(self, x: int) -> None:
        """Make the root-to-x path preferred; x ends as root of its splay tree"""
        last = NIL
        y = x
        while y != NIL:
            self._splay(y)
            self.right[y] = last
            last = y
            y = self.parent[y]
        self._splay(x)

    def make_root(self, x: int) -> None:
        self.access(x)
        self.rev[x] = not self.rev[x]
        self._push(x)

    def find_root(self, x: int) -> int:
        self.access(x)
        y = x
        self._push(y)
        while self.left[y] != NIL:
            y = self.left[y]
            self._push(y)
        self._splay(y)
        return y

    def connected(self, u: int, v: int) -> bool:
        return u == v or self.find_root(u) == self.find_root(v)

    def link(self, u: int, v: int) -> None:
        """Join the trees of u and v by edge {u, v}; caller guarantees they differ"""
        self.make_root(u)
        self.parent[u] = v

    def cut(self, u: int, v: int) -> None:
        """Remove tree edge {u, v}; caller guarantees it exists"""
        self.make_root(u)
        self.access(v)
        # u is now v's left child and has no right subtree
        self.left[v] = NIL
        self.parent[u] = NIL

    def path(self, u: int, v: int) -> List[int]:
        """Vertices on the tree path from u to v, in order"""
        self.make_root(u)
        self.access(v)
        order: List[int] = []
        stack: List[int] = []
        x = v
        while stack or x != NIL:
            while x != NIL:
                self._push(x)
                stack.append(x)
                x = self.left[x]
            x = stack.pop()
            order.append(x)
            x = self.right[x]
        return order
