"""Property suites: randomized instance batteries with exact checking.

Each suite returns a JSON-ready dict with counts, margins, and an overall
ok flag; the CLI and the acceptance tests drive these directly.
"""

from __future__ import annotations

import numpy as np

from .bp import validate_affine
from .distributions import check_fourier_closeness
from .generators import (
    greedy_recorder_program,
    learner_program_with_labels,
    random_hypothesis_mixture,
    random_mixture,
    random_program,
    selective_recorder_program,
)
from .gf2 import is_subset
from .learners import gaussian_learner
from .lowerbound import trim_to_min_dimension
from .partition import build_partition, group_count_bound
from .reduction import ReductionParams, reduce_to_affine

SLACK = 1e-12


def _derived_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def fourier_suite(count: int, seed: int,
                  ns: tuple[int, ...] = (3, 4, 5, 6),
                  r_fracs: tuple[float, ...] = (0.5, 0.75, 1.0)) -> dict:
    """Random hypothesis-satisfying mixtures: the mixture law must sit
    strictly inside 2^{-(r - n/2)} of uniform every single time."""
    rng = _derived_rng(seed, 1)
    cases = []
    failures = []
    min_margin = float("inf")
    for i in range(count):
        n = ns[i % len(ns)]
        r = r_fracs[(i // len(ns)) % len(r_fracs)] * n
        mix = random_hypothesis_mixture(n, r, rng)
        check = check_fourier_closeness(mix, r)
        margin = check.bound - check.distance
        min_margin = min(min_margin, margin)
        ok = check.hypothesis_holds and check.distance < check.bound + SLACK
        cases.append(ok)
        if not ok:
            failures.append({"n": n, "r": r, "distance": check.distance,
                             "bound": check.bound,
                             "hypothesis_holds": check.hypothesis_holds})
    return {
        "suite": "fourier",
        "count": count,
        "passed": sum(cases),
        "min_margin": min_margin,
        "failures": failures,
        "ok": not failures,
    }


def partition_suite(count: int, seed: int,
                    ns: tuple[int, ...] = (2, 3, 4, 5),
                    r_fracs: tuple[float, ...] = (0.5, 0.75, 1.0)) -> dict:
    """Random mixtures: all four grouping properties, checked exactly."""
    rng = _derived_rng(seed, 2)
    failures = []
    worst_residual = 0.0
    min_group_margin = float("inf")
    for i in range(count):
        n = ns[i % len(ns)]
        r = r_fracs[(i // len(ns)) % len(r_fracs)] * n
        mix = random_mixture(n, rng)
        part = build_partition(mix, r)
        problems = []
        if part.residual_mass > 2.0 ** (-2 * n) + SLACK:
            problems.append("residual")
        worst_residual = max(worst_residual, part.residual_mass)
        step_bound = 2.0 ** (-(r - n / 2))
        reps = [g.representative for g in part.groups]
        if len(set(reps)) != len(reps):
            problems.append("duplicate representatives")
        for g in part.groups:
            if not all(is_subset(w, g.representative) for w in g.members):
                problems.append("containment")
            dist = g.l1_to_uniform()
            min_group_margin = min(min_group_margin, step_bound - dist)
            if not dist < step_bound + SLACK:
                problems.append("group distance")
        for k in range(n + 1):
            if part.representatives_with_dim_at_least(k) > group_count_bound(n, r, k) + SLACK:
                problems.append(f"count k={k}")
        if problems:
            failures.append({"n": n, "r": r, "problems": problems})
    return {
        "suite": "partition",
        "count": count,
        "passed": count - len(failures),
        "worst_residual": worst_residual,
        "min_group_margin": min_group_margin,
        "failures": failures,
        "ok": not failures,
    }


def reduction_suite(count: int, seed: int,
                    ns: tuple[int, ...] = (2, 3, 4),
                    m_max: int = 3, width_max: int = 8) -> dict:
    """Random programs through the affine simulation, fully re-verified."""
    rng = _derived_rng(seed, 3)
    failures = []
    for i in range(count):
        n = int(ns[i % len(ns)])
        m = int(rng.integers(1, m_max + 1))
        width = int(rng.integers(2, width_max + 1))
        r = float(n) if i % 2 == 0 else n / 2 + 1.0
        bp = random_program(n, m, width, rng)
        red = reduce_to_affine(bp, ReductionParams(r))
        if not red.report.all_ok:
            failures.append({"n": n, "m": m, "width": width, "r": r,
                             "report": red.report.to_dict()})
    return {
        "suite": "reduction",
        "count": count,
        "passed": count - len(failures),
        "failures": failures,
        "ok": not failures,
    }


def _reach_bound_corpus(ns: tuple[int, ...]):
    for n in ns:
        for k in range(0, n):
            yield greedy_recorder_program(n, min(n, 3), k), k
        yield selective_recorder_program(n, 2, 1), n - 1
        bp, labels = learner_program_with_labels(gaussian_learner(n), 2)
        yield (bp, labels), None


def reach_bound_suite(seed: int, ns: tuple[int, ...] = (2, 3, 4)) -> dict:
    """Constructed affine programs: every vertex at the minimum label
    dimension obeys the reach-probability cap.

    One validation and one forward sweep per program; per-vertex reach
    probabilities are then direct table lookups.
    """
    from .bp import forward_tables
    from .lowerbound import reach_probability_bound

    count = 0
    failures = []
    min_margin = float("inf")
    for (bp, labels), k_hint in _reach_bound_corpus(ns):
        dims = [labels.get(t, v).dim
                for t in range(bp.m + 1) for v in range(bp.layer_sizes[t])]
        k = min(dims) if k_hint is None else k_hint
        if k >= bp.n:
            continue
        trimmed, tlabels = trim_to_min_dimension(bp, labels, k)
        if not validate_affine(trimmed, tlabels).ok:
            failures.append({"n": bp.n, "k": k, "problem": "not affine"})
            continue
        tables = forward_tables(trimmed)
        bound = reach_probability_bound(trimmed.n, trimmed.m, k)
        for t in range(trimmed.m + 1):
            for v in range(trimmed.layer_sizes[t]):
                if tlabels.get(t, v).dim != k:
                    continue
                exact = float(tables[t][v].sum())
                count += 1
                min_margin = min(min_margin, bound - exact)
                if not exact <= bound + SLACK:
                    failures.append({"n": trimmed.n, "k": k, "vertex": [t, v],
                                     "exact": exact, "bound": bound})
    return {
        "suite": "reach_bound",
        "count": count,
        "passed": count - len(failures),
        "min_margin": min_margin,
        "failures": failures,
        "ok": count > 0 and not failures,
    }


def run_all_suites(seed: int, trials: int,
                   ns: tuple[int, ...] | None = None) -> dict:
    reports = {
        "fourier": fourier_suite(trials, seed, ns=ns or (3, 4, 5, 6)),
        "partition": partition_suite(trials, seed, ns=ns or (2, 3, 4, 5)),
        "reduction": reduction_suite(max(4, trials // 8), seed, ns=ns or (2, 3, 4)),
        "reach_bound": reach_bound_suite(seed, ns=ns or (2, 3, 4)),
    }
    return {
        "seed": seed,
        "trials": trials,
        "suites": reports,
        "ok": all(rep["ok"] for rep in reports.values()),
    }
