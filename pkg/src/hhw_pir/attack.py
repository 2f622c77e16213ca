"""Index recovery from the public query matrix alone.

Deleting the query's row block j leaves (m-1)*delta rows.  If j is the
target block, the deleted rows are the only ones carrying the W layer, so
what remains lives in the span of the codeword and mask layers, whose
subfield dimension is at most k*s + v*(n-k) = s*n - delta.  Deleting any
other block keeps the full-rank selector rows and pushes the subfield
rank delta above that threshold unless the surviving codeword and mask
rows conspire to a large rank drop, which happens with probability
vanishing in q.  Scanning all m deletions therefore reveals the target as
the unique block whose deletion stays at or below the threshold.

The scan needs no knowledge of the secret code, information set or basis
split: subfield rank is invariant under the basis used to expand entries.

Cost: m eliminations on ((m-1)*delta) x (n*s) subfield matrices, i.e.
O(m^2 * (s*n)^3) subfield operations overall.

TODO: echelonize the m-1 shared blocks once per pair of deletions instead
of from scratch for every j; the profile is unchanged, only cheaper.
"""

from __future__ import annotations

import json
import time

import numpy as np

from dataclasses import dataclass

from .errors import DimensionMismatch
from .fields import FieldTower
from .linalg import ExtMatrix, rank_fq
from .params import SchemeParams
from .scheme import Query


@dataclass
class AttackReport:
    """Outcome of one rank scan over a query matrix.

    recovered_index is set only when exactly one block falls at or below
    the threshold; otherwise failure_reason says whether the scan saw
    none ("no_candidate") or several ("ambiguous").
    """

    recovered_index: int | None
    rank_profile: list[int]
    threshold: int
    below_threshold: list[int]
    elapsed: float
    fallback_used: bool = False

    @property
    def failure_reason(self) -> str | None:
        if self.recovered_index is not None:
            return None
        return "no_candidate" if not self.below_threshold else "ambiguous"

    def to_dict(self) -> dict:
        return {
            "recovered_index": self.recovered_index,
            "rank_profile": list(self.rank_profile),
            "threshold": self.threshold,
            "candidates": list(self.below_threshold),
            "elapsed_ms": round(self.elapsed * 1000.0, 3),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _query_matrix(query: Query | ExtMatrix) -> ExtMatrix:
    return query.matrix if isinstance(query, Query) else query


def drop_block(query: Query | ExtMatrix, block: int, delta: int) -> ExtMatrix:
    """The query matrix with row block ``block`` (1-based) deleted."""
    qm = _query_matrix(query)
    m, rem = divmod(qm.rows, delta)
    if rem:
        raise DimensionMismatch(f"{qm.rows} rows do not split into blocks of {delta}")
    if not 1 <= block <= m:
        raise DimensionMismatch(f"block must be in [1, {m}], got {block}")
    lo = (block - 1) * delta
    return ExtMatrix(qm.tower, np.delete(qm.data, slice(lo, lo + delta), axis=0))


def rank_profile(query: Query | ExtMatrix, params: SchemeParams, tower: FieldTower) -> list[int]:
    """Subfield rank of every block-deleted submatrix, in block order."""
    qm = _query_matrix(query)
    if qm.shape != (params.block_rows, params.n):
        raise DimensionMismatch(f"query is {qm.shape}, expected ({params.block_rows}, {params.n})")
    if not tower.same_field(qm.tower):
        raise DimensionMismatch("query tower does not match the supplied tower")
    return [rank_fq(drop_block(qm, j, params.delta)) for j in range(1, params.m + 1)]


def recover_index(
    query: Query | ExtMatrix,
    params: SchemeParams,
    tower: FieldTower,
    fallback_argmin: bool = False,
) -> AttackReport:
    """Scan all block deletions and name the target if it is unambiguous.

    Only public information goes in: the query matrix and the parameters.
    With ``fallback_argmin`` an ambiguous or empty threshold scan falls
    back to the block of smallest deleted rank (lowest block index on
    ties), the natural heuristic for experiments, with no guarantee.
    """
    start = time.perf_counter()
    profile = rank_profile(query, params, tower)
    threshold = params.rank_threshold
    candidates = [j + 1 for j, r in enumerate(profile) if r <= threshold]
    recovered = candidates[0] if len(candidates) == 1 else None
    fallback_used = False
    if recovered is None and fallback_argmin:
        recovered = int(np.argmin(profile)) + 1
        fallback_used = True
    return AttackReport(
        recovered_index=recovered,
        rank_profile=profile,
        threshold=threshold,
        below_threshold=candidates,
        elapsed=time.perf_counter() - start,
        fallback_used=fallback_used,
    )
