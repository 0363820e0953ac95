"""Round-synchronous AMPC simulator.

A computation is a sequence of rounds. Round ``i`` reads the frozen store
``D[i-1]`` and writes ``D[i]``; writes become visible only after the round
barrier. Each simulated machine has a communication quota of
``quota_slack * S`` queries and ``quota_slack * S`` writes per round.

Two execution styles share the same accounting:

* :meth:`Runtime.run_round` calls a Python ``machine_body`` once per machine
  with a :class:`MachineContext`; every lookup goes through
  :func:`lookup` and is charged individually.
* :meth:`Runtime.bulk_round` books a round whose per-item work was done by a
  vectorised or compiled kernel that reports its own per-item query and write
  counts (kernels implement the same cache semantics internally).
"""
from __future__ import annotations

import json
import logging
import math
import struct
import threading
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import ranks
from .errors import ConfigError, QuotaExceeded, StoreFrozen

log = logging.getLogger(__name__)

WORD = 8  # bytes per machine word
MAX_PAIR_WORDS = 64  # bound on key + value size of a single pair


# ----------------------------------------------------------------------
# keys and sizes


def encode_key(namespace: int, *parts) -> bytes:
    """``namespace tag | u32 length | payload``; integer parts are 8-byte big-endian."""
    payload = b"".join(
        p if isinstance(p, (bytes, bytearray)) else struct.pack(">q", int(p)) for p in parts
    )
    return struct.pack(">BI", namespace & 0xFF, len(payload)) + payload


def decode_key(key: bytes):
    ns, length = struct.unpack_from(">BI", key)
    return ns, key[5:5 + length]


def sizeof(value) -> int:
    if isinstance(value, (bytes, bytearray, str)):
        return len(value)
    if isinstance(value, (int, float, np.integer, np.floating)):
        return WORD
    if isinstance(value, np.ndarray):
        return int(value.size) * WORD
    if isinstance(value, (tuple, list)):
        return sum(sizeof(v) for v in value)
    if value is None:
        return 0
    return WORD


# ----------------------------------------------------------------------
# metrics and configuration


@dataclass
class RunMetrics:
    rounds: int = 0
    shuffles: int = 0
    total_queries: int = 0
    total_writes: int = 0
    max_machine_comm_per_round: int = 0
    bytes_shuffled: int = 0
    bytes_kv: int = 0

    def to_json(self) -> dict:
        return {
            "rounds": self.rounds,
            "shuffles": self.shuffles,
            "total_queries": self.total_queries,
            "total_writes": self.total_writes,
            "max_machine_comm": self.max_machine_comm_per_round,
            "bytes_shuffled": self.bytes_shuffled,
            "bytes_kv": self.bytes_kv,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunMetrics":
        return cls(
            rounds=data["rounds"],
            shuffles=data["shuffles"],
            total_queries=data["total_queries"],
            total_writes=data["total_writes"],
            max_machine_comm_per_round=data["max_machine_comm"],
            bytes_shuffled=data["bytes_shuffled"],
            bytes_kv=data["bytes_kv"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def copy(self) -> "RunMetrics":
        return replace(self)

    def minus(self, earlier: "RunMetrics") -> "RunMetrics":
        a, b = asdict(self), asdict(earlier)
        out = {k: a[k] - b[k] for k in a}
        out["max_machine_comm_per_round"] = self.max_machine_comm_per_round
        return RunMetrics(**out)


@dataclass
class RuntimeConfig:
    eps: float = 0.5
    space: int | None = None  # S; defaults to ceil(n ** eps)
    quota_slack: int = 8
    seed: int = 0
    caching: bool = True
    machines: int | None = None  # fixed P for every round; None sizes rounds by work
    small_threshold: int = 50_000  # edges handled in memory on one machine
    prim_truncation: str = "vertices"  # or "queries"
    hop_budget: int | None = None  # pointer-chasing hops per round; None means S
    threads: int = 1

    def validate(self):
        if not 0 < self.eps < 1:
            raise ConfigError(f"eps must lie in (0, 1), got {self.eps}")
        if self.space is not None and self.space < 2:
            raise ConfigError("space S must be >= 2")
        if self.quota_slack < 1:
            raise ConfigError("quota_slack must be >= 1")
        if self.machines is not None and self.machines < 1:
            raise ConfigError("machine count must be positive")
        if self.prim_truncation not in ("vertices", "queries"):
            raise ConfigError("prim_truncation must be 'vertices' or 'queries'")


# ----------------------------------------------------------------------
# stores


class ArrayTable:
    """Array-backed namespace: key ``k`` in ``0..len-1`` maps to rows ``offsets[k]:offsets[k+1]``.

    Logically identical to storing every row entry as a separate value under
    key ``k``; kernels read the columns directly.
    """

    def __init__(self, offsets, words_per_value: int = 1, **columns):
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self.columns = {k: np.ascontiguousarray(v) for k, v in columns.items()}
        self.words_per_value = words_per_value

    @classmethod
    def scalar(cls, words_per_value: int = 1, **columns):
        k = len(next(iter(columns.values())))
        return cls(np.arange(k + 1, dtype=np.int64), words_per_value, **columns)

    def __len__(self):
        return len(self.offsets) - 1

    @property
    def num_pairs(self) -> int:
        return int(self.offsets[-1])

    def row(self, key: int) -> dict:
        a, b = self.offsets[key], self.offsets[key + 1]
        return {name: col[a:b] for name, col in self.columns.items()}

    def row_bytes(self, key: int) -> int:
        return int(self.offsets[key + 1] - self.offsets[key]) * self.words_per_value * WORD + WORD

    def nbytes(self) -> int:
        return self.num_pairs * self.words_per_value * WORD + len(self) * WORD


class DhtStore:
    """One distributed hash table ``D_i``: a multimap plus array-backed namespaces."""

    def __init__(self, round_index: int):
        self.round_index = round_index
        self.entries: dict = defaultdict(list)
        self.tables: dict[str, ArrayTable] = {}
        self.frozen = False

    def freeze(self):
        self.entries = dict(self.entries)
        self.frozen = True

    def get(self, key) -> list:
        """All values for ``key`` without accounting."""
        return list(self.entries.get(key, ()))

    def table(self, name: str) -> ArrayTable:
        return self.tables[name]

    def num_pairs(self) -> int:
        return sum(len(v) for v in self.entries.values()) + sum(
            t.num_pairs for t in self.tables.values()
        )


class ReadHandle:
    __slots__ = ("store",)

    def __init__(self, store: DhtStore):
        if not store.frozen:
            raise StoreFrozen("reads are only allowed from a frozen store")
        self.store = store

    @property
    def round_index(self):
        return self.store.round_index


class WriteHandle:
    """Per-machine write buffer; merged into the next store at the barrier."""

    def __init__(self, ctx: "MachineContext"):
        self._ctx = ctx
        self.buffer: list = []
        self.tables: dict[str, ArrayTable] = {}

    def write(self, key, value):
        size = sizeof(key) + sizeof(value)
        if size > MAX_PAIR_WORDS * WORD:
            raise ValueError(f"key-value pair of {size} bytes exceeds the pair bound")
        self._ctx._charge_writes(1)
        self.buffer.append((key, value))

    def put_table(self, name: str, table: ArrayTable):
        """Write a whole array namespace; charged one write per stored pair."""
        self._ctx._charge_writes(table.num_pairs)
        self.tables[name] = table


class MachineContext:
    def __init__(self, runtime: "Runtime", machine_id: int, round_index: int, items):
        self.runtime = runtime
        self.machine_id = machine_id
        self.round_index = round_index
        self.space_quota = runtime.S
        self.limit = runtime.quota_limit
        self.items = items
        self.queries_used = 0
        self.writes_used = 0
        self.cache: dict = {}
        self.bytes_read = 0
        self.rng = np.random.default_rng([runtime.config.seed & 0xFFFFFFFF, round_index, machine_id])
        self.read: ReadHandle | None = None

    def lookup(self, key) -> list:
        return lookup(self, self.read, key)

    def fetch_row(self, table: str, key: int) -> dict:
        """Lookup on an array namespace of the readable store, with caching."""
        ck = (table, key)
        if self.runtime.config.caching and ck in self.cache:
            return self.cache[ck]
        t = self.read.store.table(table)
        self._charge_queries(1, t.row_bytes(key))
        row = t.row(key)
        if self.runtime.config.caching:
            self.cache[ck] = row
        return row

    def _charge_queries(self, k: int, nbytes: int):
        self.queries_used += k
        self.bytes_read += nbytes
        self.runtime._tally(k)
        if self.queries_used > self.limit:
            raise QuotaExceeded(self.machine_id, self.queries_used, self.limit, "queries",
                                self.round_index)

    def _charge_writes(self, k: int):
        self.writes_used += k
        if self.writes_used > self.limit:
            raise QuotaExceeded(self.machine_id, self.writes_used, self.limit, "writes",
                                self.round_index)


def lookup(ctx: MachineContext, store: ReadHandle, key) -> list:
    """All values stored under ``key`` in the readable store.

    Charged one query unless the answer is already in the machine's cache.
    """
    if store is None or not store.store.frozen:
        raise StoreFrozen("lookup needs a frozen store")
    caching = ctx.runtime.config.caching
    if caching and key in ctx.cache:
        return ctx.cache[key]
    answer = store.store.get(key)
    ctx._charge_queries(1, sum(sizeof(v) for v in answer))
    if caching:
        ctx.cache[key] = answer
    return answer


# ----------------------------------------------------------------------
# round plans


@dataclass
class RoundPlan:
    machine_count: int
    salt: int = 0
    seed: int = 0
    assignment: object = None  # optional callable(item ids) -> machine ids

    def assign(self, items) -> np.ndarray:
        """Machine of every item.

        Items are ordered by a seeded hash and dealt out in contiguous blocks,
        so the assignment is stable for a given item set and machine loads
        differ by at most one item.
        """
        items = np.asarray(items, dtype=np.int64)
        if self.assignment is not None:
            out = np.asarray(self.assignment(items), dtype=np.int64)
        elif self.machine_count == 1 or not len(items):
            out = np.zeros(len(items), dtype=np.int64)
        else:
            h = ranks.hash64(self.seed, ranks.MACHINE, items, salt=self.salt)
            order = np.lexsort((items, h))
            pos = np.empty(len(items), dtype=np.int64)
            pos[order] = np.arange(len(items), dtype=np.int64)
            out = pos * self.machine_count // len(items)
        if len(out) and (out.min() < 0 or out.max() >= self.machine_count):
            raise ValueError("assignment produced an out-of-range machine id")
        return out

    def arrange(self, items, order_key=None):
        """Items grouped by machine; inside a machine sorted by ``order_key`` (default: id).

        Returns ``(items_sorted, machine_of_each, starts)`` where machine ``j``
        processes ``items_sorted[starts[j]:starts[j+1]]``.
        """
        items = np.asarray(items, dtype=np.int64)
        mach = self.assign(items)
        key = items if order_key is None else np.asarray(order_key)
        order = np.lexsort((items, key, mach))
        counts = np.bincount(mach, minlength=self.machine_count)
        starts = np.zeros(self.machine_count + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        return items[order], mach[order], starts


@dataclass
class RoundRecord:
    index: int
    name: str
    kind: str  # "shuffle" | "query"
    machines: int
    queries: int
    writes: int
    max_comm: int
    extra: dict = field(default_factory=dict)


class Runtime:
    """Holds the store sequence, configuration and metrics for one execution."""

    def __init__(self, n: int = 1, config: RuntimeConfig | None = None, **overrides):
        config = replace(config or RuntimeConfig(), **overrides)
        config.validate()
        self.config = config
        self.n = max(int(n), 1)
        self.S = int(config.space) if config.space is not None else max(
            2, math.ceil(self.n ** config.eps))
        self.quota_limit = config.quota_slack * self.S
        self.metrics = RunMetrics()
        self.log: list[RoundRecord] = []
        d0 = DhtStore(0)
        d0.freeze()
        self.stores = [d0]
        self._tally_lock = threading.Lock()
        self._global_queries = 0
        self.quota_events = 0

    # -- helpers -------------------------------------------------------
    @property
    def current(self) -> DhtStore:
        return self.stores[-1]

    @property
    def round_index(self) -> int:
        return self.current.round_index

    @property
    def hop_budget(self) -> int:
        return self.config.hop_budget or self.S

    def _tally(self, k: int):
        with self._tally_lock:
            self._global_queries += k

    def tally_matches(self) -> bool:
        return self._global_queries == self.metrics.total_queries

    def plan(self, n_items: int, cost_per_item: float = 1.0, carry_pairs: int = 0) -> RoundPlan:
        """Plan sized so the expected per-machine load is about S.

        ``carry_pairs`` counts store entries the round copies forward; they are
        charged as writes and spread evenly over the machines.
        """
        if self.config.machines is not None:
            p = self.config.machines
        else:
            load = n_items * max(cost_per_item, 1e-9) + carry_pairs
            p = max(1, math.ceil(load / self.S))
        return RoundPlan(p, salt=self.round_index + 1, seed=self.config.seed)

    def _finish_round(self, nxt: DhtStore, record: RoundRecord):
        nxt.freeze()
        self.stores.append(nxt)
        # earlier stores are unreachable by the model; keep memory bounded
        if len(self.stores) > 3:
            self.stores[-4] = None
        self.log.append(record)
        m = self.metrics
        m.rounds += 1
        m.total_queries += record.queries
        m.total_writes += record.writes
        m.max_machine_comm_per_round = max(m.max_machine_comm_per_round, record.max_comm)

    def _carry(self, nxt: DhtStore, carry, per_machine_writes: np.ndarray, plan: RoundPlan):
        prev = self.current
        for name in carry:
            table = prev.tables[name]
            nxt.tables[name] = table
            if table.num_pairs:
                keys = np.repeat(np.arange(len(table)), np.diff(table.offsets))
                per_machine_writes += np.bincount(plan.assign(keys), minlength=plan.machine_count)

    # -- execution -----------------------------------------------------
    def run_round(self, plan: RoundPlan, machine_body, items=None, name: str = "", carry=()):
        """Execute ``machine_body(ctx, read, write)`` once per machine and seal the round."""
        prev = self.current
        read = ReadHandle(prev)
        nxt = DhtStore(prev.round_index + 1)
        if items is None:
            groups = [[] for _ in range(plan.machine_count)]
        else:
            sorted_items, _, starts = plan.arrange(items)
            groups = [sorted_items[starts[j]:starts[j + 1]].tolist()
                      for j in range(plan.machine_count)]

        def run_one(j):
            ctx = MachineContext(self, j, nxt.round_index, groups[j])
            ctx.read = read
            out = WriteHandle(ctx)
            machine_body(ctx, read, out)
            return ctx, out

        try:
            if self.config.threads > 1 and plan.machine_count > 1:
                with ThreadPoolExecutor(self.config.threads) as pool:
                    results = list(pool.map(run_one, range(plan.machine_count)))
            else:
                results = [run_one(j) for j in range(plan.machine_count)]
        except QuotaExceeded:
            self.quota_events += 1
            raise

        carry_writes = np.zeros(plan.machine_count, dtype=np.int64)
        self._carry(nxt, carry, carry_writes, plan)
        queries = writes = max_comm = 0
        for (ctx, out), cw in zip(results, carry_writes):
            for key, value in out.buffer:
                nxt.entries[key].append(value)
            for tname, table in out.tables.items():
                nxt.tables[tname] = table
            ctx.writes_used += int(cw)
            if ctx.writes_used > self.quota_limit:
                self.quota_events += 1
                raise QuotaExceeded(ctx.machine_id, ctx.writes_used, self.quota_limit,
                                    "writes", nxt.round_index)
            queries += ctx.queries_used
            writes += ctx.writes_used
            max_comm = max(max_comm, ctx.queries_used + ctx.writes_used)
            self.metrics.bytes_kv += ctx.bytes_read
        self._finish_round(nxt, RoundRecord(nxt.round_index, name, "query", plan.machine_count,
                                            queries, writes, max_comm))
        return nxt

    def bulk_round(self, name: str, plan: RoundPlan, machine_of_item, item_queries=None,
                   item_writes=None, bytes_kv: int = 0, tables=None, entries=None, carry=(),
                   extra=None, carry_count: int = 0):
        """Book a round whose per-item work was computed by a kernel.

        ``machine_of_item[i]`` is the machine that processed item ``i``; query
        and write counts are per item and summed per machine for the quota check.
        """
        prev = self.current
        nxt = DhtStore(prev.round_index + 1)
        mach = np.asarray(machine_of_item, dtype=np.int64)
        P = plan.machine_count
        q = np.zeros(P, dtype=np.int64)
        w = np.zeros(P, dtype=np.int64)
        if item_queries is not None and len(mach):
            q = np.bincount(mach, weights=item_queries, minlength=P).astype(np.int64)
        if item_writes is not None and len(mach):
            w = np.bincount(mach, weights=item_writes, minlength=P).astype(np.int64)
        self._carry(nxt, carry, w, plan)
        if carry_count:
            w += carry_count // P
            w[: carry_count % P] += 1
        for tname, table in (tables or {}).items():
            nxt.tables[tname] = table
        for key, values in (entries or {}).items():
            nxt.entries[key].extend(values)
        total_q = int(q.sum())
        self._tally(int(np.sum(item_queries)) if item_queries is not None else 0)
        worst_q = int(q.max()) if P else 0
        worst_w = int(w.max()) if P else 0
        if worst_q > self.quota_limit or worst_w > self.quota_limit:
            self.quota_events += 1
            j = int(np.argmax(q)) if worst_q > self.quota_limit else int(np.argmax(w))
            kind = "queries" if worst_q > self.quota_limit else "writes"
            used = worst_q if kind == "queries" else worst_w
            raise QuotaExceeded(j, used, self.quota_limit, kind, nxt.round_index)
        self.metrics.bytes_kv += int(bytes_kv)
        rec = RoundRecord(nxt.round_index, name, "query", P, total_q, int(w.sum()),
                          int((q + w).max()) if P else 0, extra or {})
        self._finish_round(nxt, rec)
        return nxt

    def shuffle(self, items, name: str = "shuffle") -> dict:
        """Group ``(key, value)`` pairs by key; values ordered by their byte encoding."""
        grouped: dict = defaultdict(list)
        nbytes = 0
        count = 0
        for key, value in items:
            grouped[key].append(value)
            nbytes += sizeof(key) + sizeof(value)
            count += 1
        out = {}
        for key in sorted(grouped, key=_sort_key):
            out[key] = sorted(grouped[key], key=_sort_key)
        self.record_shuffle(nbytes, count, name)
        return out

    def record_shuffle(self, nbytes: int, pairs: int, name: str = "shuffle", tables=None,
                       entries=None, carry=()):
        """Book an MPC shuffle round (grouping by key), optionally writing its output to the DHT."""
        prev = self.current
        nxt = DhtStore(prev.round_index + 1)
        for tname in carry:
            nxt.tables[tname] = prev.tables[tname]
        written = 0
        for tname, table in (tables or {}).items():
            nxt.tables[tname] = table
            written += table.num_pairs
        for key, values in (entries or {}).items():
            nxt.entries[key].extend(values)
            written += len(values)
        P = max(1, math.ceil(max(pairs, written) / self.S))
        self.metrics.shuffles += 1
        self.metrics.bytes_shuffled += int(nbytes)
        per = math.ceil(max(pairs, written) / P) if P else 0
        self._finish_round(nxt, RoundRecord(nxt.round_index, name, "shuffle", P, 0, written, per))
        return nxt

    def summary(self) -> dict:
        return {
            "S": self.S,
            "quota": self.quota_limit,
            "metrics": self.metrics.to_json(),
            "rounds": [asdict(r) for r in self.log],
        }


def _sort_key(x):
    if isinstance(x, (bytes, bytearray)):
        return bytes(x)
    if isinstance(x, (int, np.integer)):
        return struct.pack(">q", int(x))
    if isinstance(x, str):
        return x.encode()
    if isinstance(x, tuple):
        return b"".join(_sort_key(v) for v in x)
    return repr(x).encode()


def shuffle(runtime: Runtime, items) -> dict:
    return runtime.shuffle(items)


def run_round(runtime: Runtime, plan: RoundPlan, prev: DhtStore, machine_body, items=None,
              name: str = ""):
    if prev is not runtime.current:
        raise StoreFrozen("rounds must read the most recent store")
    return runtime.run_round(plan, machine_body, items=items, name=name)


def new_runtime(n: int, **kw) -> Runtime:
    return Runtime(n, RuntimeConfig(**kw))


