"""Runtime budget configuration.

``SRLAB_BUDGET`` caps the number of orbit-point evaluations a single
enumeration may perform (symbols times codes).
"""
import os

from .errors import BudgetExceeded

DEFAULT_BUDGET = 1 << 26


def budget():
    raw = os.environ.get("SRLAB_BUDGET")
    if raw is None or raw.strip() == "":
        return DEFAULT_BUDGET
    try:
        value = int(float(raw))
    except ValueError:
        raise BudgetExceeded(f"SRLAB_BUDGET is not a number: {raw!r}")
    if value <= 0:
        raise BudgetExceeded("SRLAB_BUDGET must be positive")
    return value


def check_budget(n_codes, period, what="enumeration"):
    cost = int(n_codes) * int(period)
    cap = budget()
    if cost > cap:
        raise BudgetExceeded(
            f"{what} needs {cost} orbit evaluations, budget is {cap} (set SRLAB_BUDGET)")
    return cost


_threads = 1


def set_threads(n):
    """Worker count for batch location; results are merged in input order."""
    global _threads
    if int(n) != n or n < 1:
        raise ValueError("thread count must be a positive integer")
    _threads = int(n)


def threads():
    return _threads
