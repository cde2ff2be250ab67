"""Seeded, splittable random streams.

Every randomized routine in the package takes an RngStream (or a Generator
derived from one) as an explicit argument; nothing touches global numpy state.
Streams form a tree: a child is addressed by the path of integers from the
root, so two workers that derive their streams by path get identical draws no
matter which order they run in.
"""

import hashlib

import numpy as np


class RngStream:
    """A node in a tree of independent Philox generators.

    Philox is counter-based, so (seed, path) fully determines the stream and
    children are statistically independent of each other and of the parent.
    """

    def __init__(self, seed, path=()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if any(p < 0 for p in self.path):
            raise ValueError("path entries must be non-negative")
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self.gen = np.random.Generator(np.random.Philox(ss))

    def child(self, *indices):
        """Stream at path + indices.  Does not consume this node's draws."""
        return RngStream(self.seed, self.path + tuple(indices))

    def child_keyed(self, label):
        """Child addressed by a string label (stable across runs/platforms)."""
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        a = int.from_bytes(digest[:4], "little")
        b = int.from_bytes(digest[4:8], "little")
        return self.child(a, b)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path})"
