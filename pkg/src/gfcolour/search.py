"""Backtracking beam search over canonized Moser-lattice graphs.

The driver follows the published pseudocode step by step: expand the
current beam by children (direction +1) or parents (direction -1), drop
graphs already seen at that size, score the rest by chi_gf, and decide the
next direction from whether the size's best value was matched.  The loop
in the pseudocode never ends; here it stops on a target value, an
iteration budget, per-size target values, a size ceiling or a wall-clock
limit.  A children-only mode (no backtracking) is available as well.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
import random
import time
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable

from . import lp
from .canon import Canon, canonize, children, parents
from .field import MoserPoint, is_unit_distance
from .udgraph import build_graph, format_points, parse_points

log = logging.getLogger(__name__)

NUM_VERTICES_MIN = 7


@dataclass
class SearchConfig:
    beam_width: int | None = 100  # None means unbounded
    target: float | None = None
    size_targets: dict[int, float] | None = None  # stop once every listed size is reached
    max_iterations: int | None = None
    max_size: int | None = None
    time_limit: float | None = None
    tolerance: float = lp.VALUE_TOL
    tie_tol: float = 0.0  # slack below the beam threshold; 0 is the plain >= comparison
    mode: str = "numeric"
    workers: int = 1
    children_only: bool = False  # forward beam without backtracking


class Scorer:
    """chi_gf by canonical form, memoised.  Failed solves score ``None``."""

    def __init__(self, mode: str = "numeric", workers: int = 1) -> None:
        self.mode = mode
        self.workers = workers
        self.cache: dict[Canon, float | None] = {}
        self.failures: list[tuple[Canon, str]] = []

    def __call__(self, X: Canon) -> float | None:
        if X not in self.cache:
            self.cache[X] = self._score(X)
        return self.cache[X]

    def _score(self, X: Canon) -> float | None:
        value, err = score_graph(X, self.mode)
        if err:
            log.warning("dropping candidate (%d vertices): %s", len(X), err)
            self.failures.append((X, err))
        return value

    def score_many(self, graphs: Iterable[Canon]) -> dict[Canon, float | None]:
        todo = sorted(g for g in set(graphs) if g not in self.cache)
        if self.workers > 1 and len(todo) > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(self.workers) as pool:
                results = list(pool.map(score_graph, todo, itertools.repeat(self.mode),
                                        chunksize=max(1, len(todo) // (4 * self.workers))))
            for g, (value, err) in zip(todo, results):
                if err:
                    self.failures.append((g, err))
                self.cache[g] = value
        else:
            for g in todo:
                self(g)
        return {g: self.cache[g] for g in graphs}


def score_graph(X: Canon, mode: str = "numeric") -> tuple[float | None, str | None]:
    try:
        sol = lp.chi_gf(build_graph(X), mode=mode)
    except Exception as exc:  # candidate is dropped, the run goes on
        return None, f"{type(exc).__name__}: {exc}"
    if sol.status != "optimal":
        return None, f"LP status {sol.status}"
    return float(sol.objective), None


def get_beam(graphs: Iterable[Canon], score: Callable[[Canon], float],
             beam_width: int | None, tie_tol: float = 0.0) -> set[Canon]:
    """Everything scoring at least the beam_width-th best value (ties kept)."""
    graphs = set(graphs)
    if beam_width is None or len(graphs) <= beam_width:
        return graphs
    ranked = sorted(graphs, key=lambda g: (-score(g), g))
    threshold = score(ranked[beam_width - 1])
    return {g for g in graphs if score(g) >= threshold - tie_tol}


@dataclass
class LogRow:
    iteration: int
    size: int
    direction: int
    candidates: int
    best_value: float


@dataclass
class SearchState:
    seen: dict[int, set[Canon]] = field(default_factory=lambda: defaultdict(set))
    best: dict[int, float] = field(default_factory=dict)
    forward: dict[int, set[Canon]] = field(default_factory=lambda: defaultdict(set))
    current: set[Canon] = field(default_factory=set)
    direction: int = 1
    i: int = NUM_VERTICES_MIN + 1
    iteration: int = 0
    champions: dict[int, Canon] = field(default_factory=dict)
    log: list[LogRow] = field(default_factory=list)
    stop_reason: str | None = None


@dataclass
class SearchResult:
    state: SearchState
    scores: dict[Canon, float | None]

    @property
    def best(self) -> dict[int, float]:
        return dict(sorted(self.state.best.items()))

    @property
    def champions(self) -> dict[int, Canon]:
        return dict(sorted(self.state.champions.items()))


def initial_state(start: Iterable, scorer: Scorer) -> SearchState:
    X0 = canonize(start)
    n0 = len(X0)
    st = SearchState(i=n0 + 1)
    value = scorer(X0)
    if value is None:
        raise RuntimeError("cannot score the start graph")
    st.seen[n0] = {X0}
    st.best[n0] = value
    st.champions[n0] = X0
    st.current = {X0}
    return st


def beam_search(start: Iterable, config: SearchConfig | None = None,
                scorer: Scorer | None = None, state: SearchState | None = None,
                on_iteration: Callable[[SearchState], None] | None = None) -> SearchResult:
    """Run the backtracking beam search from ``start`` (or resume ``state``)."""
    cfg = config or SearchConfig()
    scorer = scorer or Scorer(cfg.mode, cfg.workers)
    st = state or initial_state(start, scorer)
    n_min = min(st.seen) if st.seen else NUM_VERTICES_MIN
    tol = cfg.tolerance
    t0 = time.monotonic()

    def score(g: Canon) -> float:
        v = scorer(g)
        return -math.inf if v is None else v

    def beam(graphs: Iterable[Canon]) -> set[Canon]:
        return get_beam(graphs, score, cfg.beam_width, cfg.tie_tol)

    while True:
        if cfg.target is not None and max(st.best.values()) >= cfg.target - tol:
            st.stop_reason = "target"
            break
        if cfg.size_targets and all(st.best.get(n, -math.inf) >= v - tol
                                    for n, v in cfg.size_targets.items()):
            st.stop_reason = "size_targets"
            break
        if cfg.max_iterations is not None and st.iteration >= cfg.max_iterations:
            st.stop_reason = "max_iterations"
            break
        if cfg.time_limit is not None and time.monotonic() - t0 >= cfg.time_limit:
            st.stop_reason = "time_limit"
            break
        if cfg.max_size is not None and st.i > cfg.max_size:
            st.stop_reason = "max_size"
            break
        st.iteration += 1
        i = st.i
        step = children if st.direction == 1 else parents
        X: set[Canon] = set()
        for g in sorted(st.current):
            X |= step(g)
        X -= st.seen[i]

        if cfg.children_only:
            if not X:
                st.stop_reason = "exhausted"
                break
            scores = scorer.score_many(X)
            X = {g for g in X if scores[g] is not None}
            st.seen[i] |= X
            if X:
                champion = min(X, key=lambda g: (-score(g), g))
                st.best[i] = score(champion)
                st.champions[i] = champion
            st.current = beam(X)
            st.log.append(LogRow(st.iteration, i, 1, len(scores), st.best.get(i, 0.0)))
            st.i = i + 1
            if on_iteration is not None:
                on_iteration(st)
            continue

        if not X:
            # nothing new at this size: restart upward from the largest size reached
            st.direction = 1
            top = max(k for k, v in st.seen.items() if v)
            st.i = top + 1
            st.current = beam(st.seen[top])
            st.log.append(LogRow(st.iteration, i, 0, 0, st.best.get(i, 0.0)))
            continue

        scores = scorer.score_many(X)
        X = {g for g in X if scores[g] is not None}
        st.seen[i] |= X
        if not X:
            st.log.append(LogRow(st.iteration, i, st.direction, 0, st.best.get(i, 0.0)))
            st.direction = 1
            st.current = beam(st.forward[i])
            st.forward[i] = set()
            st.i = i + 1
            continue
        champion = min(X, key=lambda g: (-score(g), g))
        new_best = score(champion)
        generated_by = st.direction
        if i not in st.best or new_best > st.best[i]:
            st.champions[i] = champion
        if new_best >= st.best.get(i, 0.0) - tol and i > n_min:
            st.best[i] = max(st.best.get(i, 0.0), new_best)
            st.direction = -1
            X = beam(X)
            st.forward[i] = beam(st.forward[i] | X)
        else:
            if i not in st.best or new_best > st.best[i]:
                st.best[i] = new_best
            st.direction = 1
            X = beam(st.forward[i] | X)
            st.forward[i] = set()
        st.current = X
        st.log.append(LogRow(st.iteration, i, generated_by, len(scores), st.best[i]))
        log.info("iter %d size %d dir %+d candidates %d best %.9f",
                 st.iteration, i, generated_by, len(scores), st.best[i])
        st.i = i + st.direction
        if on_iteration is not None:
            on_iteration(st)
    return SearchResult(st, scorer.cache)


# -- greedy endgame -------------------------------------------------------------------

@dataclass
class GreedyStep:
    step: int
    size: int
    value: float
    children_scored: int


def greedy_search(start: Iterable, improvement_threshold: float = 0.004,
                  max_steps: int | None = None, target: float | None = None,
                  scorer: Scorer | None = None, tolerance: float = lp.VALUE_TOL
                  ) -> tuple[Canon, list[GreedyStep]]:
    """Beam width one over children only.

    Each step scores every child and moves to the best one (canonical form
    breaks ties) if it beats the current value by at least the threshold.
    """
    scorer = scorer or Scorer()
    current = canonize(start)
    value = scorer(current)
    if value is None:
        raise RuntimeError("cannot score the start graph")
    steps = [GreedyStep(0, len(current), value, 0)]
    while max_steps is None or len(steps) <= max_steps:
        if target is not None and value >= target - tolerance:
            break
        kids = children(current)
        scores = scorer.score_many(kids)
        ranked = sorted((g for g in kids if scores[g] is not None),
                        key=lambda g: (-scores[g], g))
        if not ranked or scores[ranked[0]] < value + improvement_threshold:
            break
        current, value = ranked[0], scores[ranked[0]]
        steps.append(GreedyStep(len(steps), len(current), value, len(kids)))
    return current, steps


# -- descendant checks ----------------------------------------------------------------------

@lru_cache(maxsize=1)
def lattice_unit_vectors() -> tuple[MoserPoint, ...]:
    """All unit-length lattice vectors (a finite set; the box below contains them all)."""
    origin = (0, 0, 0, 0)
    return tuple(MoserPoint(*p) for p in itertools.product(range(-3, 4), repeat=4)
                 if is_unit_distance(p, origin))


def two_neighbour_children(X: Iterable) -> set[Canon]:
    """Children obtained by adding a lattice point at unit distance from >= 2 vertices."""
    pts = [MoserPoint(*p) for p in X]
    present = set(pts)
    count: dict[MoserPoint, int] = defaultdict(int)
    for p in pts:
        for u in lattice_unit_vectors():
            q = p + u
            if q not in present:
                count[q] += 1
    return {canonize(pts + [q]) for q, c in count.items() if c >= 2}


@dataclass
class DescendantReport:
    checked: dict[str, dict[Canon, float | None]]

    def minimum(self) -> float:
        vals = [v for group in self.checked.values() for v in group.values() if v is not None]
        return min(vals) if vals else math.nan


def descendants(start: Iterable, grandchildren: int = 0, seed: int = 0,
                scorer: Scorer | None = None) -> DescendantReport:
    """Score two-neighbour children, all children, and a sample of grandchildren."""
    scorer = scorer or Scorer()
    X = canonize(start)
    kids = children(X)
    report = {
        "two_neighbour_children": scorer.score_many(two_neighbour_children(X)),
        "children": scorer.score_many(kids),
    }
    if grandchildren:
        rng = random.Random(seed)
        pool: set[Canon] = set()
        for k in sorted(kids):
            pool |= children(k)
        sample = rng.sample(sorted(pool), min(grandchildren, len(pool)))
        report["grandchildren"] = scorer.score_many(sample)
    return DescendantReport(report)


# -- exhaustive oracle ------------------------------------------------------------------------

def exhaustive_best(start: Iterable, max_size: int, scorer: Scorer) -> dict[int, float]:
    """Best chi_gf per size over all iterated children of ``start`` up to ``max_size``."""
    level = {canonize(start)}
    n = len(next(iter(level)))
    out = {n: max(v for v in scorer.score_many(level).values() if v is not None)}
    while n < max_size:
        nxt: set[Canon] = set()
        for g in sorted(level):
            nxt |= children(g)
        n += 1
        vals = [v for v in scorer.score_many(nxt).values() if v is not None]
        out[n] = max(vals)
        level = nxt
    return out


# -- files ------------------------------------------------------------------------------------

def write_log_csv(rows: Iterable[LogRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "size", "direction", "candidates", "best_value"])
        for r in rows:
            w.writerow([r.iteration, r.size, r.direction, r.candidates, f"{r.best_value:.12f}"])


def write_figure2_csv(best: dict[int, float], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "best_chi_gf"])
        for n in sorted(best):
            w.writerow([n, f"{best[n]:.12f}"])


def _graph_block(g: Canon, value: float | None) -> str:
    return f"graph {'nan' if value is None else repr(value)}\n" + format_points(g)


def write_checkpoint(result: SearchResult, path) -> None:
    """Plain-text state dump; graphs are written in the vertex file format."""
    st = result.state
    score = result.scores
    out = ["# gfcolour search checkpoint\n",
           f"iteration {st.iteration}\n", f"i {st.i}\n", f"direction {st.direction}\n"]
    out += [f"best {n} {v!r}\n" for n, v in sorted(st.best.items())]
    for name, table in (("seen", st.seen), ("forward", st.forward)):
        for n in sorted(table):
            if table[n]:
                out.append(f"[{name} {n}]\n")
                out += [_graph_block(g, score.get(g)) for g in sorted(table[n])]
    out.append("[current]\n")
    out += [_graph_block(g, score.get(g)) for g in sorted(st.current)]
    out.append("[champions]\n")
    out += [_graph_block(g, score.get(g)) for _, g in sorted(st.champions.items())]
    Path(path).write_text("".join(out), encoding="utf-8")


def read_checkpoint(path, mode: str = "numeric") -> tuple[SearchState, Scorer]:
    st = SearchState()
    st.seen = defaultdict(set)
    st.forward = defaultdict(set)
    scorer = Scorer(mode)
    section: tuple[str, int | None] | None = None
    graph_lines: list[str] = []
    graph_value: float | None = None

    def flush() -> None:
        nonlocal graph_lines
        if section is None or not graph_lines:
            graph_lines = []
            return
        g = tuple(sorted(parse_points("\n".join(graph_lines))))
        scorer.cache[g] = graph_value
        kind, n = section
        if kind == "seen":
            st.seen[n].add(g)
        elif kind == "forward":
            st.forward[n].add(g)
        elif kind == "current":
            st.current.add(g)
        elif kind == "champions":
            st.champions[len(g)] = g
        graph_lines = []

    for line in Path(path).read_text(encoding="utf-8").splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if s.startswith("["):
            flush()
            parts = s.strip("[]").split()
            section = (parts[0], int(parts[1]) if len(parts) > 1 else None)
        elif s.startswith("graph"):
            flush()
            v = s.split()[1]
            graph_value = None if v == "nan" else float(v)
        elif section is None:
            key, *vals = s.split()
            if key == "iteration":
                st.iteration = int(vals[0])
            elif key == "i":
                st.i = int(vals[0])
            elif key == "direction":
                st.direction = int(vals[0])
            elif key == "best":
                st.best[int(vals[0])] = float(vals[1])
        else:
            graph_lines.append(s)
    flush()
    return st, scorer
