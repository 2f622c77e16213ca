"""Scheme parameter tuples and the constants derived from them."""

from __future__ import annotations

from dataclasses import dataclass, asdict

from .errors import InvalidParams
from .fields import is_prime


@dataclass(frozen=True)
class SchemeParams:
    """Parameters of one protocol instance.

    p, e, s fix the field tower (q = p^e), v the split of the secret basis,
    (n, k) the code, m the number of database files and L the number of
    rows per file.  Each file then has delta = (s - v) * (n - k) columns
    over F_q, queries are (m * delta) x n matrices over F_q^s, and the
    rank threshold separating the target block from the others is
    rank_threshold = k*s + v*(n - k) = s*n - delta.
    """

    p: int
    e: int
    s: int
    v: int
    n: int
    k: int
    m: int
    L: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise InvalidParams(f"p = {self.p} is not prime")
        if self.e < 1:
            raise InvalidParams("e must be at least 1")
        if self.s < 2:
            raise InvalidParams("s must be at least 2")
        if not 0 < self.v < self.s:
            raise InvalidParams(f"v must lie strictly between 0 and s = {self.s}")
        if not 0 < self.k < self.n:
            raise InvalidParams(f"k must lie strictly between 0 and n = {self.n}")
        if self.m < 1:
            raise InvalidParams("m must be at least 1")
        if self.L < 1:
            raise InvalidParams("L must be at least 1")
        if self.delta < 1:
            raise InvalidParams("delta = (s-v)(n-k) must be at least 1")
        # the two printed forms of the threshold must coincide
        assert self.k * self.s + self.v * (self.n - self.k) == self.s * self.n - self.delta

    @property
    def q(self) -> int:
        return self.p**self.e

    @property
    def delta(self) -> int:
        """Columns per file over F_q; also the height of one query row block."""
        return (self.s - self.v) * (self.n - self.k)

    @property
    def rank_threshold(self) -> int:
        """Subfield rank of a query with its target block deleted stays at or below this."""
        return self.k * self.s + self.v * (self.n - self.k)

    @property
    def block_rows(self) -> int:
        """Total number of query rows, m * delta."""
        return self.m * self.delta

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SchemeParams":
        data = dict(data)
        if "q" in data:
            q = int(data.pop("q"))
            p, e = _factor_prime_power(q)
            for key, val in (("p", p), ("e", e)):
                if key in data and int(data[key]) != val:
                    raise InvalidParams(f"q = {q} conflicts with {key} = {data[key]}")
                data[key] = val
        missing = [f for f in ("p", "e", "s", "v", "n", "k", "m", "L") if f not in data]
        if missing:
            raise InvalidParams(f"missing parameter fields: {', '.join(missing)}")
        extra = [f for f in data if f not in ("p", "e", "s", "v", "n", "k", "m", "L")]
        if extra:
            raise InvalidParams(f"unknown parameter fields: {', '.join(extra)}")
        return cls(**{f: int(data[f]) for f in ("p", "e", "s", "v", "n", "k", "m", "L")})


def _factor_prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise InvalidParams(f"q = {q} is not a prime power")
    p = 2
    while p * p <= q:
        if q % p == 0:
            break
        p += 1
    else:
        return q, 1
    e = 0
    rest = q
    while rest % p == 0:
        rest //= p
        e += 1
    if rest != 1:
        raise InvalidParams(f"q = {q} is not a prime power")
    return p, e


# The default instance used by the command line tools and the demo scripts.
DEFAULT_PARAMS = SchemeParams(p=2, e=1, s=4, v=2, n=8, k=4, m=8, L=16)
