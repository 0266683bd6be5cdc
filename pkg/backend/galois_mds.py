"""
Finite-field arithmetic and a systematic [n, k] MDS code with erasure decoding.
Field arithmetic and linear algebra come from the `galois` package.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Any, Optional, Sequence, Tuple

import galois
import numpy as np

from gss_config import active_config
from gss_errors import (
    InvalidParamsError, LengthExceedsFieldError, LengthMismatchError,
    SingularMatrixError, TooManyErasuresError,
)

logger = logging.getLogger(__name__)

# Primitive polynomials per field width (bit masks)
DEFAULT_PRIMITIVE_POLYS = {
    8: 0x11D,
    16: 0x1100B,
}


@lru_cache(maxsize=None)
def _field_class(order: int, primitive_poly: int):
    return galois.GF(order, irreducible_poly=primitive_poly)


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^w) described by its order and primitive polynomial."""
    order: int = 256
    primitive_poly: int = DEFAULT_PRIMITIVE_POLYS[8]

    def __post_init__(self):
        bits = self.order.bit_length() - 1
        if self.order != 2 ** bits or bits not in DEFAULT_PRIMITIVE_POLYS:
            raise InvalidParamsError(f"field order must be 2^8 or 2^16, got {self.order}")
        if self.primitive_poly.bit_length() - 1 != bits:
            raise InvalidParamsError(
                f"primitive polynomial {self.primitive_poly:#x} has degree {self.primitive_poly.bit_length() - 1}, "
                f"GF({self.order}) needs degree {bits}"
            )

    @property
    def bits(self) -> int:
        return self.order.bit_length() - 1

    @property
    def symbol_bytes(self) -> int:
        return self.bits // 8

    @property
    def gf(self):
        """The galois FieldArray class for this field."""
        return _field_class(self.order, self.primitive_poly)

    @classmethod
    def for_bits(cls, bits: int) -> 'FieldSpec':
        if bits not in DEFAULT_PRIMITIVE_POLYS:
            raise InvalidParamsError(f"unsupported field width {bits}")
        return cls(order=2 ** bits, primitive_poly=DEFAULT_PRIMITIVE_POLYS[bits])

    @classmethod
    def default(cls) -> 'FieldSpec':
        return cls.for_bits(active_config.FIELD_BITS)


@dataclass(frozen=True, eq=False)
class MdsCodeSpec:
    """Systematic [n, k] MDS code; generator is [I | P]."""
    n: int
    k: int
    field: FieldSpec
    generator: Any  # k x n FieldArray

    @property
    def redundancy(self) -> int:
        return self.n - self.k

    def to_dict(self) -> Dict[str, int]:
        # Generators are rebuilt deterministically, never serialized
        return {
            'n': self.n,
            'k': self.k,
            'field_order': self.field.order,
            'primitive_poly': self.field.primitive_poly,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, int]) -> 'MdsCodeSpec':
        field = FieldSpec(order=int(data['field_order']), primitive_poly=int(data['primitive_poly']))
        return mds_build(int(data['n']), int(data['k']), field)


@lru_cache(maxsize=256)
def _build_generator(n: int, k: int, field: FieldSpec):
    GF = field.gf
    points = GF(np.arange(n))
    rows = [GF(np.ones(n, dtype=int))]
    for _ in range(1, k):
        rows.append(rows[-1] * points)
    vander = GF(np.vstack(rows))
    # Row-reduce to systematic form: G = V_k^{-1} V
    try:
        generator = np.linalg.inv(vander[:, :k]) @ vander
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"evaluation matrix not invertible for n={n}, k={k}: {e}")
    generator.setflags(write=False)
    return generator


def mds_build(n: int, k: int, field: FieldSpec = None) -> MdsCodeSpec:
    """Systematic MDS generator from evaluation points 0, 1, ..., n-1."""
    field = field or FieldSpec.default()
    if not 1 <= k <= n:
        raise InvalidParamsError(f"need 1 <= k <= n, got n={n}, k={k}")
    if n > field.order:
        raise LengthExceedsFieldError(f"code length {n} exceeds field order {field.order}")

    generator = _build_generator(n, k, field)
    logger.debug(f"Built [{n},{k}] MDS code over GF({field.order})")
    return MdsCodeSpec(n=n, k=k, field=field, generator=generator)


def mds_encode(spec: MdsCodeSpec, message: Sequence[int]):
    """Codeword = message x generator; the first k symbols repeat the message."""
    if len(message) != spec.k:
        raise LengthMismatchError(f"message has {len(message)} symbols, code expects k={spec.k}")
    GF = spec.field.gf
    return GF(np.asarray(message, dtype=int)) @ spec.generator


@lru_cache(maxsize=4096)
def _decoding_inverse(spec: MdsCodeSpec, rows: Tuple[int, ...], columns: Tuple[int, ...]):
    # keyed on spec identity; MdsCodeSpec is frozen with eq=False
    try:
        inverse = np.linalg.inv(spec.generator[list(rows)][:, list(columns)])
    except np.linalg.LinAlgError as e:
        logger.error(f"Singular submatrix rows {list(rows)} x columns {list(columns)}: generator is not MDS")
        raise SingularMatrixError(f"submatrix rows {list(rows)} x columns {list(columns)} is singular: {e}")
    inverse.setflags(write=False)
    return inverse


def decode_known(spec: MdsCodeSpec, symbols: Sequence[int], known: Sequence[bool]):
    """
    Recover the message from the symbols flagged as known.

    symbols holds n slots; values in unknown slots are ignored.
    """
    known = np.asarray(known, dtype=bool)
    if known.shape[0] != spec.n or len(symbols) != spec.n:
        raise LengthMismatchError(f"received {len(symbols)} slots, code expects n={spec.n}")

    erased = spec.n - int(known.sum())
    if erased > spec.redundancy:
        raise TooManyErasuresError(f"{erased} erasures exceed n-k = {spec.redundancy}")

    GF = spec.field.gf
    values = np.asarray(symbols, dtype=int)
    if known[:spec.k].all():
        return GF(values[:spec.k])

    # erased message symbols against an equal number of surviving parity columns
    missing = tuple(int(i) for i in np.flatnonzero(~known[:spec.k]))
    parity = tuple(int(j) + spec.k for j in np.flatnonzero(known[spec.k:])[:len(missing)])
    message = GF(np.where(known[:spec.k], values[:spec.k], 0))
    residual = GF(values[list(parity)]) - message @ spec.generator[:, list(parity)]
    message[list(missing)] = residual @ _decoding_inverse(spec, missing, parity)
    return message


def mds_erasure_decode(spec: MdsCodeSpec, received: Sequence[Optional[int]]):
    """Decode a received word where erased slots are None."""
    if len(received) != spec.n:
        raise LengthMismatchError(f"received {len(received)} slots, code expects n={spec.n}")
    known = [value is not None for value in received]
    symbols = [0 if value is None else int(value) for value in received]
    return decode_known(spec, symbols, known)


def verify_mds(spec: MdsCodeSpec, exhaustive_max_n: int = 12, samples: int = 500, seed: int = None) -> bool:
    """
    Check that every k x k submatrix of the generator is invertible.

    Exhaustive for n <= exhaustive_max_n, randomly sampled above.
    """
    if spec.n <= exhaustive_max_n:
        subsets = itertools.combinations(range(spec.n), spec.k)
    else:
        rng = np.random.default_rng(active_config.SEED if seed is None else seed)
        subsets = (sorted(rng.choice(spec.n, size=spec.k, replace=False).tolist()) for _ in range(samples))

    for columns in subsets:
        if np.linalg.det(spec.generator[:, list(columns)]) == 0:
            logger.error(f"[{spec.n},{spec.k}] generator fails MDS at columns {columns}")
            return False
    return True


def minimum_distance(spec: MdsCodeSpec, alphabet: Sequence[int] = (0, 1, 2)) -> int:
    """Smallest nonzero codeword weight over messages drawn from a sample alphabet."""
    best = spec.n
    for message in itertools.product(alphabet, repeat=spec.k):
        if not any(message):
            continue
        weight = int(np.count_nonzero(mds_encode(spec, list(message))))
        best = min(best, weight)
    return best


def table_field_size(n: int) -> int:
    """Field size n - 1 as reported in the published comparison table."""
    return n - 1


def random_message(spec: MdsCodeSpec, rng: np.random.Generator) -> List[int]:
    return rng.integers(0, spec.field.order, size=spec.k).tolist()
