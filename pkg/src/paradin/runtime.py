"""Row-partitioned worker pool for building and solving the decoupled levels.

Each worker owns a contiguous batch of matrix rows.  For every level l the
coordinator broadcasts the state, each worker assembles its rows of A_l
(plus the halo rows its product needs), forms its rows of P_l = P_{l-1} A_l
and of the transformed right-hand side, and sends them to the level's
owner, worker ``(l - 1) mod W``.  The owner stacks the batches and keeps the
level for the solve phase.  Phases are separated by barriers: the
coordinator waits for an acknowledgement from every addressed worker.

Workers are threads with a queue inbox each.  Because every output entry is
summed in the same order as in the serial product, the pool reproduces the
serial decoupled system bit for bit.
"""

from __future__ import annotations

import os
import queue
import threading
import time
from dataclasses import asdict, dataclass

import numpy as np

from .banded import PIVOT_FLOOR, assemble_row_blocks, band_matmul_rows, band_matvec_rows
from .decoupled import DecoupledSystem, build_decoupled, make_level, solve_decoupled, solve_level
from .errors import ParadinError, TooManyWorkers, WorkerFailure

WORKERS_ENV = "PARADIN_WORKERS"


@dataclass(frozen=True)
class RowPartition:
    n: int
    batches: tuple[tuple[int, int], ...]

    @property
    def worker_count(self) -> int:
        return len(self.batches)


def partition_rows(ns: int, worker_count: int) -> RowPartition:
    """Contiguous batches of ``ns // W`` rows, the first ``ns % W`` one row longer."""
    if worker_count < 1:
        raise ValueError("need at least one worker")
    if worker_count > ns:
        raise TooManyWorkers(f"{worker_count} workers for {ns} rows")
    base, extra = divmod(ns, worker_count)
    batches, lo = [], 0
    for w in range(worker_count):
        hi = lo + base + (1 if w < extra else 0)
        batches.append((lo, hi))
        lo = hi
    return RowPartition(ns, tuple(batches))


def level_owner(level: int, worker_count: int) -> int:
    """Worker that stores and solves level ``level`` (1-based)."""
    return (level - 1) % worker_count


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


@dataclass
class TimingReport:
    """Wall-clock seconds per phase of one all-at-once run."""

    executor: str = "serial"
    workers: int = 1
    initial_guess: float = 0.0
    jacobian_assembly: float = 0.0
    product_build: float = 0.0
    rhs_build: float = 0.0
    level_solve: float = 0.0
    communication: float = 0.0
    total: float = 0.0
    iterations: int = 0

    PHASES = ("initial_guess", "jacobian_assembly", "product_build", "rhs_build", "level_solve", "communication")

    def phase_sum(self) -> float:
        return sum(getattr(self, p) for p in self.PHASES)

    def as_dict(self) -> dict:
        return asdict(self)


class _Worker:
    def __init__(self, index: int, lo: int, hi: int, pool: "WorkerPool"):
        self.index, self.lo, self.hi = index, lo, hi
        self.pool = pool
        self.inbox: queue.Queue = queue.Queue()
        self.mail: queue.Queue = queue.Queue()
        self.thread = threading.Thread(target=self._loop, name=f"paradin-worker-{index}", daemon=True)
        self.reset()

    def reset(self):
        self.provider = None
        self.u_prev = self.u_cur = None
        self.level = 0
        self.a_halo = None
        self.r_halo = None
        self.p_offsets = self.p_rows = None
        self.rt_rows = None
        self.owned: dict[int, object] = {}

    def _loop(self):
        while True:
            cmd, args = self.inbox.get()
            if cmd == "stop":
                return
            try:
                result = getattr(self, "do_" + cmd)(*args)
                self.pool.acks.put((self.index, None, result))
            except BaseException as exc:  # reported to the coordinator
                self.pool.acks.put((self.index, exc, None))

    # commands ---------------------------------------------------------------

    def do_begin(self, provider):
        self.reset()
        self.provider = provider

    def do_state(self, level, u, p_offsets):
        self.u_prev, self.u_cur, self.level = self.u_cur, u, level
        if p_offsets is not None and not np.array_equal(p_offsets, self.p_offsets):
            # the owner pruned P_{l-1}; dropped diagonals are zero on every row
            keep = np.isin(self.p_offsets, p_offsets)
            self.p_offsets, self.p_rows = self.p_offsets[keep], self.p_rows[keep]

    def _halo(self):
        if self.level == 1:
            return self.lo, self.hi
        n = self.provider.n
        return max(0, self.lo + int(self.p_offsets[0])), min(n, self.hi + int(self.p_offsets[-1]))

    def do_assemble(self):
        h_lo, h_hi = self._halo()
        self.a_halo = self.provider.jacobian_rows(self.level, self.u_cur, h_lo, h_hi)
        r = np.zeros(self.provider.n)
        r[h_lo:h_hi] = self.provider.residual_rows(self.level, self.u_cur, self.u_prev, h_lo, h_hi)
        self.r_halo = r

    def do_product(self):
        lo, hi = self.lo, self.hi
        if self.level == 1:
            self.next_offsets = self.a_halo.offsets.copy()
            self.next_rows = self.a_halo.data[:, lo:hi].copy()
        else:
            self.next_offsets, self.next_rows = band_matmul_rows(self.p_rows, self.p_offsets, self.a_halo, lo, hi)

    def do_rhs(self):
        lo, hi = self.lo, self.hi
        if self.level == 1:
            self.rt_rows = self.r_halo[lo:hi].copy()
        else:
            self.rt_rows = band_matvec_rows(self.p_rows, self.p_offsets, self.r_halo, lo, hi) + self.rt_rows
        self.p_offsets, self.p_rows = self.next_offsets, self.next_rows
        self.a_halo = self.r_halo = None

    def do_send(self, owner):
        self.pool.workers[owner].mail.put((self.lo, self.hi, self.p_offsets, self.p_rows, self.rt_rows))

    def do_collect(self, level, pivot_floor):
        n = self.provider.n
        parts = [self.mail.get() for _ in range(self.pool.partition.worker_count)]
        P = assemble_row_blocks(n, [(lo, hi, offs, block) for lo, hi, offs, block, _ in parts])
        rhs = np.empty(n)
        for lo, hi, _, _, rt in parts:
            rhs[lo:hi] = rt
        entry = make_level(P, rhs, level, pivot_floor)
        self.owned[level] = entry
        return entry

    def do_solve(self, levels, preconditioning, pivot_floor, entries):
        out = {}
        for l in levels:
            entry = entries.get(l) if entries is not None else self.owned[l]
            out[l] = solve_level(entry, l, preconditioning, pivot_floor)
        return out


class WorkerPool:
    """Fixed set of row-owning worker threads.  Use as a context manager."""

    def __init__(self, ns: int, worker_count: int):
        self.partition = partition_rows(ns, worker_count)
        self.acks: queue.Queue = queue.Queue()
        self.workers = [_Worker(w, lo, hi, self) for w, (lo, hi) in enumerate(self.partition.batches)]
        for w in self.workers:
            w.thread.start()
        self._closed = False

    @property
    def worker_count(self) -> int:
        return self.partition.worker_count

    def close(self):
        if not self._closed:
            for w in self.workers:
                w.inbox.put(("stop", ()))
            for w in self.workers:
                w.thread.join()
            self._closed = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _round(self, cmd: str, args=(), targets=None) -> dict:
        """Send one command and wait until every target has acknowledged it."""
        targets = range(self.worker_count) if targets is None else list(targets)
        for w in targets:
            self.workers[w].inbox.put((cmd, args))
        results, failure = {}, None
        for _ in targets:
            w, exc, res = self.acks.get()
            if exc is not None and failure is None:
                failure = (w, exc)
            results[w] = res
        if failure is not None:
            w, exc = failure
            if isinstance(exc, ParadinError):
                raise exc
            raise WorkerFailure(w, exc) from exc
        return results

    def build_decoupled(self, provider, pivot_floor: float = PIVOT_FLOOR, timing: TimingReport | None = None):
        """Row-parallel version of :func:`build_decoupled` for ``provider``."""
        if provider.n != self.partition.n:
            raise ValueError("provider size does not match the row partition")
        clock = _PhaseClock(timing)
        with clock("communication"):
            self._round("begin", (provider,))
            self._round("state", (0, provider.state(0), None))
        levels = []
        p_offsets = None
        for l in range(1, provider.n_levels + 1):
            owner = level_owner(l, self.worker_count)
            with clock("communication"):
                self._round("state", (l, provider.state(l), p_offsets))
            with clock("jacobian_assembly"):
                self._round("assemble")
            with clock("product_build"):
                self._round("product")
            with clock("rhs_build"):
                self._round("rhs")
            with clock("communication"):
                self._round("send", (owner,))
                entry = self._round("collect", (l, pivot_floor), [owner])[owner]
            p_offsets = entry.P.offsets
            levels.append(entry)
        return DecoupledSystem(levels)

    def solve_levels(
        self,
        sys: DecoupledSystem,
        preconditioning: bool = True,
        pivot_floor: float = PIVOT_FLOOR,
        resident: bool = True,
    ) -> np.ndarray:
        """Solve each level on its owner.  With ``resident`` the owners use the
        levels they stored while building ``sys``; otherwise the entries are
        handed over."""
        W = self.worker_count
        plan: dict[int, list[int]] = {}
        for l in range(1, len(sys) + 1):
            plan.setdefault(level_owner(l, W), []).append(l)
        for w, ls in plan.items():
            entries = None if resident else {l: sys.levels[l - 1] for l in ls}
            self.workers[w].inbox.put(("solve", (ls, preconditioning, pivot_floor, entries)))
        out = np.empty((len(sys), sys.levels[0].P.n))
        failure = None
        for _ in plan:
            w, exc, res = self.acks.get()
            if exc is not None:
                failure = failure or (w, exc)
                continue
            for l, du in res.items():
                out[l - 1] = du
        if failure is not None:
            w, exc = failure
            if isinstance(exc, ParadinError):
                raise exc
            raise WorkerFailure(w, exc) from exc
        return out


class _PhaseClock:
    def __init__(self, timing):
        self.timing = timing

    def __call__(self, phase):
        return _Phase(self.timing, phase)


class _Phase:
    def __init__(self, timing, phase):
        self.timing, self.phase = timing, phase

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        if self.timing is not None:
            setattr(self.timing, self.phase, getattr(self.timing, self.phase) + time.perf_counter() - self.t0)


def parallel_build_decoupled(provider, worker_count: int, pivot_floor: float = PIVOT_FLOOR) -> DecoupledSystem:
    """Build the decoupled system with ``worker_count`` row-owning workers.

    One worker takes the serial code path.
    """
    if worker_count == 1:
        return build_decoupled(provider.jacobians(), provider.residuals(), pivot_floor)
    with WorkerPool(provider.n, worker_count) as pool:
        return pool.build_decoupled(provider, pivot_floor)


def parallel_solve_levels(
    sys: DecoupledSystem, worker_count: int, preconditioning: bool = True, pivot_floor: float = PIVOT_FLOOR
) -> np.ndarray:
    n = sys.levels[0].P.n
    # only levels are distributed, so extra workers would sit idle
    workers = min(worker_count, len(sys), n)
    if workers == 1:
        return solve_decoupled(sys, preconditioning, pivot_floor)
    with WorkerPool(n, workers) as pool:
        return pool.solve_levels(sys, preconditioning, pivot_floor, resident=False)


def measure_run(grid, model, cfg) -> TimingReport:
    """Run the all-at-once solver and return its phase timings."""
    from .solver import run_paradin

    _, stats = run_paradin(grid, model, cfg)
    return stats.timing


__all__ = [
    "RowPartition",
    "TimingReport",
    "WorkerPool",
    "default_workers",
    "level_owner",
    "measure_run",
    "parallel_build_decoupled",
    "parallel_solve_levels",
    "partition_rows",
]
