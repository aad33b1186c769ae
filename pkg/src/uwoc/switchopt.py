"""Alternating hyperparameter optimization with classifier switching.

For each candidate recurrent classifier the tunable pair (hidden units,
epochs) is optimized by coordinate sweeps: fix the epoch count, grid-search
hidden units on cross-validated accuracy; then fix the winner and
grid-search epochs; repeat until the accuracy gain falls below epsilon or
the alternation budget runs out.  The final classifier is the candidate
with the highest converged accuracy, ties resolved by candidate order.

Evaluations are cached per (kind, hidden, epochs), which both avoids
retraining revisited grid points and makes the incumbent accuracy
non-decreasing across half-steps.
"""

from dataclasses import dataclass, field
import json

import numpy as np

from .errors import ContractError
from .mlcore import ClassifierSpec, evaluate
from .mlcore.rnn import RNN_KINDS


@dataclass(frozen=True)
class SwitchOptParams:
    """Search space and stopping rule for the alternating optimization.

    Grids are deliberately desk-scale so a full run stays CPU-friendly;
    widen them for survey-scale studies.
    """

    candidates: tuple = ("lstm", "bilstm", "gru")
    grid_hidden: tuple = (32, 64, 128)
    grid_epochs: tuple = (3, 6, 9, 12, 15)
    initial_epochs: int = 6
    epsilon: float = 0.005
    max_alternations: int = 5
    task: str = "six_class"
    k_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if not self.candidates:
            raise ContractError("need at least one candidate classifier")
        for kind in self.candidates:
            if kind not in RNN_KINDS:
                raise ContractError(f"candidate {kind!r} is not an RNN kind")
        if not self.grid_hidden or not self.grid_epochs:
            raise ContractError("grids must be nonempty")
        if list(self.grid_hidden) != sorted(self.grid_hidden) or \
                list(self.grid_epochs) != sorted(self.grid_epochs):
            raise ContractError("grids must be ascending")
        if self.initial_epochs not in self.grid_epochs:
            raise ContractError("initial_epochs must be a grid_epochs value")
        if self.epsilon <= 0:
            raise ContractError("epsilon must be positive")
        if self.max_alternations < 1:
            raise ContractError("max_alternations must be >= 1")


@dataclass
class SwitchOptResult:
    u_opt: str
    n_h_opt: int
    n_p_opt: int
    omega: float
    report: object
    trace: list
    candidate_finals: list      # (kind, n_h, n_p, omega) per candidate

    def to_json(self) -> str:
        payload = {
            "u_opt": self.u_opt,
            "n_h_opt": self.n_h_opt,
            "n_p_opt": self.n_p_opt,
            "omega": self.omega,
            "metrics": self.report.as_dict() if self.report is not None else None,
            "candidate_finals": [
                {"kind": k, "n_h": h, "n_p": p, "omega": o}
                for (k, h, p, o) in self.candidate_finals],
            "trace": self.trace,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


class _Evaluator:
    """Caching bridge to mlcore.evaluate keyed by (kind, hidden, epochs)."""

    def __init__(self, samples, params):
        self.samples = samples
        self.params = params
        self.cache = {}

    def __call__(self, kind, n_hidden, n_epochs):
        key = (kind, n_hidden, n_epochs)
        if key not in self.cache:
            spec = ClassifierSpec(kind=kind, n_hidden=n_hidden,
                                  n_epochs=n_epochs, seed=self.params.seed)
            self.cache[key] = evaluate(spec, self.samples, self.params.task,
                                       k=self.params.k_folds,
                                       seed=self.params.seed)
        return self.cache[key]


def _half_step(evaluator, kind, iteration, grid, fixed_name, fixed_value,
               searched_name, trace):
    """Sweep one grid with the other parameter fixed; returns the winner."""
    best_value, best_omega = None, -np.inf
    for value in grid:
        n_h = value if searched_name == "n_hidden" else fixed_value
        n_p = value if searched_name == "n_epochs" else fixed_value
        report = evaluator(kind, n_h, n_p)
        omega = getattr(report, "accuracy", None)
        if omega is None:
            omega = float(report)
        trace.append({
            "candidate": kind, "iteration": iteration,
            "half_step": searched_name,
            "fixed": {fixed_name: fixed_value},
            "searched": {searched_name: value},
            "omega": omega,
        })
        if omega > best_omega:
            best_value, best_omega = value, omega
    return best_value, best_omega


def alternate_optimize(kind: str, samples, params: SwitchOptParams,
                       evaluator=None, trace=None):
    """Coordinate-alternating search of (hidden units, epochs) for one kind.

    Returns (n_h_opt, n_p_opt, omega, report_or_None).  The loop stops once
    an alternation improves the incumbent accuracy by less than epsilon.
    """
    evaluator = evaluator or _Evaluator(samples, params)
    trace = trace if trace is not None else []
    n_p = params.initial_epochs
    n_h = None
    prev_omega = None
    omega = -np.inf
    for iteration in range(1, params.max_alternations + 1):
        n_h, _ = _half_step(evaluator, kind, iteration, params.grid_hidden,
                            "n_epochs", n_p, "n_hidden", trace)
        n_p, omega = _half_step(evaluator, kind, iteration,
                                params.grid_epochs, "n_hidden", n_h,
                                "n_epochs", trace)
        if np.isinf(params.epsilon):
            break       # an infinite threshold stops after one alternation
        if prev_omega is not None and abs(omega - prev_omega) < params.epsilon:
            break
        prev_omega = omega
    report = None
    if isinstance(evaluator, _Evaluator):
        report = evaluator.cache.get((kind, n_h, n_p))
    return n_h, n_p, omega, report


def run_switchopt(samples, params: SwitchOptParams,
                  evaluator=None) -> SwitchOptResult:
    """Optimize every candidate and switch to the accuracy argmax.

    Ties resolve toward the earlier candidate in ``params.candidates``
    (the documented LSTM < Bi-LSTM < GRU order for the default tuple).
    """
    evaluator = evaluator or _Evaluator(samples, params)
    trace = []
    finals = []
    for kind in params.candidates:
        n_h, n_p, omega, report = alternate_optimize(
            kind, samples, params, evaluator=evaluator, trace=trace)
        finals.append((kind, n_h, n_p, omega, report))
    best = max(range(len(finals)), key=lambda i: finals[i][3])
    kind, n_h, n_p, omega, report = finals[best]
    return SwitchOptResult(
        u_opt=kind, n_h_opt=n_h, n_p_opt=n_p, omega=omega, report=report,
        trace=trace,
        candidate_finals=[(k, h, p, o) for (k, h, p, o, _) in finals])
