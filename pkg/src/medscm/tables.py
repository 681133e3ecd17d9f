"""Exact probability tables over named finite axes.

A JointTable is the currency between modules: counterfactual joints,
observational laws, and empirical distributions are all instances.  Cells
are float64 probabilities over the cross product of the axis supports;
every emitted table sums to one within 1e-9.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

EPS_NUM = 1e-9


class PositivityError(ValueError):
    """A conditioning event required by a formula has probability zero."""

    def __init__(self, cell: Mapping):
        self.cell = dict(cell)
        desc = ", ".join(f"{k}={v}" for k, v in self.cell.items())
        super().__init__(f"positivity violation at ({desc})")


class JointTable:
    """Probability table with named axes and ordered finite supports."""

    def __init__(self, labels: Sequence[str], supports: Sequence[tuple], probs: np.ndarray):
        if len(set(labels)) != len(labels):
            raise ValueError(f"axis names must be unique, got {labels}")
        self.labels = tuple(labels)
        self.supports = tuple(tuple(s) for s in supports)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._value_index = [
            {v: i for i, v in enumerate(s)} for s in self.supports
        ]
        self.probs = np.asarray(probs, dtype=float)
        expected = tuple(len(s) for s in self.supports)
        if self.probs.shape != expected:
            raise ValueError(f"probs shape {self.probs.shape} != {expected}")

    # -- construction --------------------------------------------------------

    @classmethod
    def zeros(cls, labels, supports) -> "JointTable":
        shape = tuple(len(s) for s in supports)
        return cls(labels, supports, np.zeros(shape))

    def add(self, values: tuple, p: float) -> None:
        idx = tuple(self._value_index[i][v] for i, v in enumerate(values))
        self.probs[idx] += p

    def freeze(self) -> None:
        total = float(self.probs.sum())
        if abs(total - 1.0) > EPS_NUM:
            raise ValueError(f"table sums to {total:.12g}, not 1")
        self.probs.setflags(write=False)

    # -- queries --------------------------------------------------------------

    def total(self) -> float:
        return float(self.probs.sum())

    def axis(self, label: str) -> int:
        if label not in self._index:
            raise KeyError(f"no axis {label!r} in table {self.labels}")
        return self._index[label]

    def prob(self, assignment: Mapping) -> float:
        """P(assignment), marginalizing axes not mentioned."""
        sub = self.probs
        keep = []
        for i, lab in enumerate(self.labels):
            if lab in assignment:
                keep.append((i, self._value_index[i][assignment[lab]]))
        axes_to_sum = tuple(
            i for i in range(len(self.labels)) if i not in {k for k, _ in keep}
        )
        if axes_to_sum:
            sub = sub.sum(axis=axes_to_sum)
        remaining = [k for k, _ in keep]
        order = np.argsort(remaining)
        idx = tuple(keep[j][1] for j in order)
        return float(sub[idx]) if idx else float(sub)

    def marginal(self, labels: Sequence[str]) -> "JointTable":
        keep = [self.axis(lab) for lab in labels]
        drop = tuple(i for i in range(len(self.labels)) if i not in keep)
        probs = self.probs.sum(axis=drop) if drop else self.probs.copy()
        # reorder to the requested label order
        order = np.argsort(np.argsort(keep))
        current = [self.labels[i] for i in sorted(keep)]
        perm = [current.index(lab) for lab in labels]
        probs = np.transpose(probs, axes=perm)
        return JointTable(
            list(labels), [self.supports[self.axis(lab)] for lab in labels], probs
        )

    def condition(self, given: Mapping) -> "JointTable":
        """Exact Bayes conditioning on a partial assignment."""
        mass = self.prob(given)
        if mass <= 0.0:
            raise PositivityError(given)
        sub = self.probs
        slicer = [slice(None)] * len(self.labels)
        for lab, v in given.items():
            i = self.axis(lab)
            slicer[i] = self._value_index[i][v]
        sub = sub[tuple(slicer)]
        remaining = [lab for lab in self.labels if lab not in given]
        return JointTable(
            remaining,
            [self.supports[self.axis(lab)] for lab in remaining],
            sub / mass,
        )

    def expectation(self, label: str) -> float:
        """E[axis value]; requires a numeric support."""
        i = self.axis(label)
        try:
            values = np.asarray(self.supports[i], dtype=float)
        except (TypeError, ValueError):
            raise TypeError(f"axis {label!r} has a non-numeric support")
        marg = self.marginal([label])
        return float(np.dot(values, marg.probs))

    def cells(self):
        """Iterate (value-tuple, probability) in axis order."""
        for idx in np.ndindex(self.probs.shape):
            values = tuple(self.supports[i][j] for i, j in enumerate(idx))
            yield values, float(self.probs[idx])

    def allclose(self, other: "JointTable", tol: float = EPS_NUM) -> bool:
        return (
            self.labels == other.labels
            and self.supports == other.supports
            and bool(np.all(np.abs(self.probs - other.probs) <= tol))
        )

    def __repr__(self):
        return f"JointTable(axes={self.labels}, cells={self.probs.size})"
