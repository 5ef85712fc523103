from tunav.engine.prover import (
    EngineFact,
    Limits,
    Origin,
    Outcome,
    ProverState,
    make_fact,
    prove,
)
from tunav.engine.finite import eval_finite

__all__ = [
    "EngineFact",
    "Limits",
    "Origin",
    "Outcome",
    "ProverState",
    "eval_finite",
    "make_fact",
    "prove",
]
