"""HTTP service around the package: pydantic schemas, shared ops, FastAPI app."""

from .app import create_app
from .ops import (baseline_op, flops_op, oracle_op, pretrain_op, random_op,
                  report_op, search_op)

__all__ = [
    "baseline_op", "create_app", "flops_op", "oracle_op", "pretrain_op",
    "random_op", "report_op", "search_op",
]
