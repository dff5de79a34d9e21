"""Saturation procedures and their shared machinery."""

from .log import SAT, UNKNOWN, UNSAT, Budget, BudgetExceeded, ClosureViolation, DerivationLog, Result

__all__ = ["SAT", "UNSAT", "UNKNOWN", "Budget", "BudgetExceeded", "ClosureViolation", "DerivationLog", "Result"]
