"""Semigroup calculus on weighted graphs: heat semigroups, BMO and Carleson
norms, paraproducts and T(1) checks."""

from ._core import (
    Model,
    SgcalcError,
    Space,
    cycle,
    doubling,
    grid2d,
    path,
    read_edge_list,
    run,
)

__all__ = [
    "Model",
    "SgcalcError",
    "Space",
    "cycle",
    "doubling",
    "grid2d",
    "path",
    "read_edge_list",
    "run",
]
