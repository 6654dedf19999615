"""Mixed-type record distances and exhaustive nearest-neighbor scans.

Two modes:

* ``enhanced_gower`` -- weighted mean of per-column distances on raw values:
  categorical columns contribute a 0/1 equality indicator, numeric columns a
  bounded wave-hedges ratio (two branches depending on the sign of the smaller
  value), and missing numerics contribute 1 when exactly one side is missing
  and 0 when both are.  Bounded in [0, 1].
* ``hamming_binned`` -- the number of differing columns on binned views, where
  every column (including discretized numerics) is categorical and a missing
  cell is its own level.

Scans are exact and exhaustive.  Large Hamming scans run as one-hot float32
matrix products (match counts are small integers, hence exact), so results are
bit-identical to the naive loop and independent of chunking or thread count.
Ties are always broken toward the lowest candidate index.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .binning import bin_views, same_binning
from .data import Dataset, Record
from .errors import BinningMismatch, EmptyTarget, SchemaMismatch

_MATMUL_MIN_WORK = 10**8      # pair-cells below this use plain broadcasting
_MATMUL_MAX_WIDTH = 4096      # one-hot width guard
_CHUNK_ROWS = 512


@dataclass(frozen=True)
class DistanceConfig:
    mode: str = "hamming_binned"            # or "enhanced_gower"
    weights: tuple | None = None            # per schema column, default all 1
    binning: tuple | None = None            # (query_view, target_view)
    n_bins: int = 10

    def __post_init__(self):
        if self.mode not in ("hamming_binned", "enhanced_gower"):
            raise ValueError(f"unknown distance mode {self.mode!r}")
        if self.binning is not None:
            qv, tv = self.binning
            if not same_binning(qv, tv):
                raise BinningMismatch("binned views do not share edges and levels")


@dataclass(frozen=True)
class NeighborResult:
    query_index: int
    neighbor_index: int
    distance: float


GOWER = DistanceConfig(mode="enhanced_gower")


def _numeric_pair(a, b):
    if a is None and b is None:
        return 0.0
    if a is None or b is None:
        return 1.0
    lo, hi = (a, b) if a <= b else (b, a)
    if lo >= 0.0:
        return 1.0 - (1.0 + lo) / (1.0 + hi)
    return 1.0 - 1.0 / (1.0 + hi - lo)


def gower_distance(a: Record, b: Record, config: DistanceConfig = GOWER) -> float:
    """Distance between two records (possibly from different datasets)."""
    if not a.dataset.schema.compatible_with(b.dataset.schema):
        raise SchemaMismatch("records do not share a schema")
    schema = a.dataset.schema
    weights = config.weights if config.weights is not None else schema.weight_vector()
    if len(weights) != len(schema) or not any(w > 0 for w in weights):
        raise SchemaMismatch("weights must cover the schema with some w > 0")
    num = 0.0
    den = 0.0
    for spec, w in zip(schema.columns, weights):
        va = a.dataset.cell(spec.name, a.index)
        vb = b.dataset.cell(spec.name, b.index)
        if spec.is_numeric:
            d = _numeric_pair(va, vb)
        else:
            d = 0.0 if va == vb else 1.0   # None == None: missing is a level
        num += w * d
        den += w
    return num / den


def hamming_distance(a, b, config: DistanceConfig | None = None) -> int:
    """Number of differing columns between two binned records.

    ``a`` and ``b`` are (BinnedView, row_index) pairs; the views must share
    edges and level dictionaries.
    """
    (va, ia), (vb, ib) = a, b
    if not same_binning(va, vb):
        raise BinningMismatch("records are binned with different edges or levels")
    names = va.source.schema.names
    return int(sum(1 for n in names if va.codes[n][ia] != vb.codes[n][ib]))


def _resolve_views(queries: Dataset, target: Dataset, config: DistanceConfig):
    if config.binning is not None:
        qv, tv = config.binning
        if qv.source is not queries or tv.source is not target:
            raise BinningMismatch("config.binning views do not match the datasets")
        return qv, tv
    if queries is target:
        view = bin_views([queries], n_bins=config.n_bins)[0]
        return view, view
    return bin_views([queries, target], n_bins=config.n_bins, fit_on=(0,))


def _one_hot(codes: np.ndarray, arities) -> np.ndarray:
    n, c = codes.shape
    widths = np.asarray(arities) + 1          # slot 0 is the missing level
    offsets = np.concatenate([[0], np.cumsum(widths)])
    out = np.zeros((n, int(offsets[-1])), dtype=np.float32)
    cols = offsets[:-1][None, :] + codes + 1
    out[np.arange(n)[:, None], cols] = 1.0
    return out


def _scan_chunks(n_queries, jobs, work):
    """Run work(start, stop) over query chunks, optionally threaded."""
    chunks = [
        (s, min(s + _CHUNK_ROWS, n_queries))
        for s in range(0, n_queries, _CHUNK_ROWS)
    ]
    if jobs and jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda c: work(*c), chunks))
    else:
        for c in chunks:
            work(*c)


def _hamming_scan(qcodes, tcodes, arities, self_mode, exclude_index, jobs, progress):
    n_q, n_cols = qcodes.shape
    n_t = tcodes.shape[0]
    best_idx = np.empty(n_q, dtype=np.int64)
    best_dist = np.empty(n_q, dtype=np.int64)
    use_matmul = (
        n_q * n_t * n_cols >= _MATMUL_MIN_WORK
        and int(np.sum(np.asarray(arities) + 1)) <= _MATMUL_MAX_WIDTH
    )
    t_hot = _one_hot(tcodes, arities) if use_matmul else None

    def work(start, stop):
        if use_matmul:
            q_hot = _one_hot(qcodes[start:stop], arities)
            matches = q_hot @ t_hot.T
            if self_mode:
                matches[np.arange(stop - start), np.arange(start, stop)] = -1.0
            elif exclude_index is not None:
                matches[:, exclude_index] = -1.0
            idx = np.argmax(matches, axis=1)
            dist = n_cols - matches[np.arange(stop - start), idx]
            best_idx[start:stop] = idx
            best_dist[start:stop] = dist.astype(np.int64)
        else:
            mism = np.zeros((stop - start, n_t), dtype=np.int32)
            for c in range(n_cols):
                mism += qcodes[start:stop, c][:, None] != tcodes[:, c][None, :]
            if self_mode:
                mism[np.arange(stop - start), np.arange(start, stop)] = n_cols + 1
            elif exclude_index is not None:
                mism[:, exclude_index] = n_cols + 1
            idx = np.argmin(mism, axis=1)
            best_idx[start:stop] = idx
            best_dist[start:stop] = mism[np.arange(stop - start), idx]
        if progress is not None:
            progress(stop, n_q)

    _scan_chunks(n_q, jobs, work)
    return best_idx, best_dist


def _gower_columns(queries: Dataset, target: Dataset):
    """Per-column (kind, q_array, t_array) with categorical codes aligned."""
    prepared = []
    for spec in queries.schema.columns:
        cq, ct = queries.columns[spec.name], target.columns[spec.name]
        if spec.is_numeric:
            prepared.append(("num", cq.values, ct.values))
        elif queries is target or cq.levels == ct.levels:
            prepared.append(("cat", cq.codes, ct.codes))
        else:
            union = list(cq.levels)
            lookup = {lv: i for i, lv in enumerate(union)}
            for lv in ct.levels:
                if lv not in lookup:
                    lookup[lv] = len(union)
                    union.append(lv)
            remap = np.array([lookup[lv] for lv in ct.levels], dtype=np.int32)
            tcodes = np.where(ct.codes >= 0, remap[np.maximum(ct.codes, 0)], -1)
            prepared.append(("cat", cq.codes, tcodes.astype(np.int32)))
    return prepared


def _gower_scan(columns, weights, n_q, n_t, self_mode, exclude_index, jobs, progress):
    weights = np.asarray(weights, dtype=np.float64)
    total_w = float(np.sum(weights))
    best_idx = np.empty(n_q, dtype=np.int64)
    best_dist = np.empty(n_q, dtype=np.float64)

    def work(start, stop):
        acc = np.zeros((stop - start, n_t), dtype=np.float64)
        for (kind, qa, ta), w in zip(columns, weights):
            if w == 0.0:
                continue
            if kind == "cat":
                acc += w * (qa[start:stop, None] != ta[None, :])
            else:
                q = qa[start:stop, None]
                t = ta[None, :]
                qm = np.isnan(q)
                tm = np.isnan(t)
                lo = np.minimum(q, t)
                hi = np.maximum(q, t)
                with np.errstate(invalid="ignore"):
                    d = np.where(
                        lo >= 0.0,
                        1.0 - (1.0 + lo) / (1.0 + hi),
                        1.0 - 1.0 / (1.0 + hi - lo),
                    )
                d = np.where(qm ^ tm, 1.0, d)
                d = np.where(qm & tm, 0.0, d)
                acc += w * d
        acc /= total_w
        if self_mode:
            acc[np.arange(stop - start), np.arange(start, stop)] = np.inf
        elif exclude_index is not None:
            acc[:, exclude_index] = np.inf
        idx = np.argmin(acc, axis=1)
        best_idx[start:stop] = idx
        best_dist[start:stop] = acc[np.arange(stop - start), idx]
        if progress is not None:
            progress(stop, n_q)

    _scan_chunks(n_q, jobs, work)
    return best_idx, best_dist


def all_nearest(queries: Dataset, target: Dataset,
                config: DistanceConfig | None = None, self_mode: bool = False,
                jobs: int = 1, progress=None, _exclude_index=None):
    """Nearest target record for every query record (exhaustive scan).

    ``self_mode`` requires queries and target to be the same dataset and skips
    each record's comparison with itself.  Results are deterministic and
    independent of ``jobs``.
    """
    config = config or DistanceConfig()
    if not queries.schema.compatible_with(target.schema):
        raise SchemaMismatch("queries and target do not share a schema")
    if self_mode and queries is not target:
        raise ValueError("self_mode requires queries and target to be identical")
    min_rows = 2 if (self_mode or _exclude_index is not None) else 1
    if target.row_count < min_rows:
        raise EmptyTarget(f"target must have at least {min_rows} records")

    if config.mode == "hamming_binned":
        qv, tv = _resolve_views(queries, target, config)
        names = queries.schema.names
        qcodes = qv.code_matrix(names)
        tcodes = qcodes if queries is target else tv.code_matrix(names)
        arities = [qv.arity[n] for n in names]
        idx, dist = _hamming_scan(
            qcodes, tcodes, arities, self_mode, _exclude_index, jobs, progress
        )
    else:
        weights = config.weights if config.weights is not None \
            else queries.schema.weight_vector()
        columns = _gower_columns(queries, target)
        idx, dist = _gower_scan(
            columns, weights, queries.row_count, target.row_count,
            self_mode, _exclude_index, jobs, progress,
        )
    return [
        NeighborResult(query_index=i, neighbor_index=int(idx[i]), distance=float(dist[i]))
        for i in range(queries.row_count)
    ]


def nearest_record(query: Record, target: Dataset,
                   config: DistanceConfig | None = None,
                   exclude_index: int | None = None) -> NeighborResult:
    """Closest target record to one query record; ties go to the lowest index."""
    from .data import take_rows

    single = take_rows(query.dataset, [query.index])
    config = config or DistanceConfig()
    if config.mode == "hamming_binned" and config.binning is None:
        # bin edges come from the target table so single queries are stable
        qview, tview = bin_views([single, target], n_bins=config.n_bins, fit_on=(1,))
        config = DistanceConfig(mode=config.mode, weights=config.weights,
                                binning=(qview, tview), n_bins=config.n_bins)
    results = all_nearest(single, target, config, _exclude_index=exclude_index)
    r = results[0]
    return NeighborResult(query_index=query.index, neighbor_index=r.neighbor_index,
                          distance=r.distance)
