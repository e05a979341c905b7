"""dpspec: exact verification of differential-privacy specifications for finite mechanisms.

The main entry points are :func:`satisfies` and :func:`tightest_epsilon`,
which check a :class:`Mechanism` against a :class:`DpSpecification` built from
a dataset domain, a multiverse, an input premetric, an output divergence and
a per-universe budget.
"""

from dpspec.accountant import *  # noqa: F401,F403
from dpspec.core import *  # noqa: F401,F403
from dpspec.divergences import *  # noqa: F401,F403
from dpspec.errors import *  # noqa: F401,F403
from dpspec.exact import *  # noqa: F401,F403
from dpspec.five_safes import *  # noqa: F401,F403
from dpspec.invariants import *  # noqa: F401,F403
from dpspec.mechanisms import *  # noqa: F401,F403
from dpspec.verifier import *  # noqa: F401,F403

__version__ = "0.1.0"
