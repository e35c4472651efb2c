"""tlspin: exact Temperley-Lieb decomposition of spin chains.

The package constructs the primitive central idempotents that split the
n-site spin-1/2 chain into standard modules of the Temperley-Lieb algebra,
working in exact arithmetic over Q(q^(1/2)).  At roots of unity the generic
family degenerates; the root limits (projectors onto indecomposable blocks
plus square-zero off-diagonal maps) are computed exactly over cyclotomic
fields.
"""

from .qnum import (
    CapError,
    CycloNumber,
    LaurentPoly,
    PoleError,
    RatFunc,
    RootSpec,
    eval_at_root,
    order_at_root,
    q_binomial,
    q_factorial,
    q_int,
)

__all__ = [
    "CapError",
    "CycloNumber",
    "LaurentPoly",
    "PoleError",
    "RatFunc",
    "RootSpec",
    "eval_at_root",
    "order_at_root",
    "q_binomial",
    "q_factorial",
    "q_int",
]

__version__ = "0.1.0"
