"""Counterfactual evaluation and fairness auditing for risk assessment models.

The heavy lifting lives in the compiled extension; this package re-exports it
and adds a couple of conveniences that are nicer to write in python.
"""

import json as _json

from cfeval._core import *  # noqa: F401,F403
from cfeval import _core as _core

__version__ = _core.__version__


def group_metrics(dataset, nuisances, scores, labels, with_oracle=True, clip=0.01,
                  policy="winsorize"):
    """Per-group metric table as a list of dicts (see group_metrics_json)."""
    return _json.loads(
        _core.group_metrics_json(dataset, nuisances, scores, labels, with_oracle, clip, policy)
    )
