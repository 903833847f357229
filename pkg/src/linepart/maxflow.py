"""Dinic maximum flow on small dense-ish networks with float capacities.

Used for the two-terminal minimum cuts inside boundary windows. Capacities
are real-valued; residual arcs below a scale-relative epsilon count as
saturated so float drift cannot stall termination. The number of BFS phases
is bounded by the node count regardless of capacity values.
"""

from __future__ import annotations

from collections import deque

import numpy as np

__all__ = ["FlowNetwork"]


class FlowNetwork:
    def __init__(self, n: int):
        self.n = n
        self.to: list[int] = []
        self.cap: list[float] = []
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self._max_cap = 0.0

    def add_edge(self, u: int, v: int, cap: float, cap_rev: float = 0.0) -> None:
        """Arc u->v with capacity cap and reverse capacity cap_rev."""
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(float(cap))
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(float(cap_rev))
        self._max_cap = max(self._max_cap, cap, cap_rev)

    @property
    def eps(self) -> float:
        return 1e-12 * max(1.0, self._max_cap)

    def max_flow(
        self, s: int, t: int, max_augmentations: int | None = None
    ) -> tuple[float, bool]:
        """Returns (flow value, budget_exceeded)."""
        eps = self.eps
        flow = 0.0
        augmentations = 0
        level = [0] * self.n
        it = [0] * self.n
        while self._bfs(s, t, level, eps):
            it[:] = [0] * self.n
            while True:
                pushed = self._dfs(s, t, level, it, eps)
                if pushed <= 0.0:
                    break
                flow += pushed
                augmentations += 1
                if max_augmentations is not None and augmentations >= max_augmentations:
                    return flow, True
        return flow, False

    def _bfs(self, s: int, t: int, level: list[int], eps: float) -> bool:
        for i in range(self.n):
            level[i] = -1
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for a in self.adj[u]:
                v = self.to[a]
                if level[v] < 0 and self.cap[a] > eps:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level[t] >= 0

    def _dfs(self, s: int, t: int, level: list[int], it: list[int], eps: float) -> float:
        """One augmenting path along the level graph, iteratively."""
        path: list[int] = []  # arc indices from s toward t
        u = s
        while True:
            if u == t:
                pushed = min(self.cap[a] for a in path)
                for a in path:
                    self.cap[a] -= pushed
                    self.cap[a ^ 1] += pushed
                return pushed
            advanced = False
            while it[u] < len(self.adj[u]):
                a = self.adj[u][it[u]]
                v = self.to[a]
                if self.cap[a] > eps and level[v] == level[u] + 1:
                    path.append(a)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                if u == s:
                    return 0.0
                level[u] = -1  # dead end; prune
                last = path.pop()
                u = self.to[last ^ 1]  # back to the tail of the last arc

    def source_side(self, s: int) -> np.ndarray:
        """Residual-reachable set from s: the canonical minimal source side."""
        eps = self.eps
        seen = np.zeros(self.n, dtype=bool)
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for a in self.adj[u]:
                v = self.to[a]
                if not seen[v] and self.cap[a] > eps:
                    seen[v] = True
                    queue.append(v)
        return seen
