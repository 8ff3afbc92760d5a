"""relbox - causal-box simulation of relativistic two-party cryptography.

Parties, resources, protocol converters and simulators are causal boxes exchanging stamped
messages in Minkowski spacetime. Constructions are checked by computing the distinguishing
advantage between the real and the ideal system, exactly by enumerating every random draw
or by seeded Monte Carlo estimation.

Example:
    >>> import relbox as rb
    >>>
    >>> # The three security conditions of OT from one randomized OT
    >>> cases = rb.get_cases("pi1")
    >>> best, inputs = cases[0].best_deterministic()
    >>> best.value
    0.0
    >>>
    >>> # Rabin OT from k = 1 block of three erasure channels aborts with probability 1/8
    >>> honest = rb.get_case("pi4.honest", k=1)
    >>> report = rb.evaluate_case(honest, honest.distinguishers["abort-out"]())
    >>> report.fraction
    Fraction(1, 8)
    >>>
    >>> # Chaining two one-sided simulators for ROT is caught with probability 1/4
    >>> chain = rb.build_chain(rb.make_rot(), rb.strategy_library("rot")[0])
    >>> rb.exact_advantage(rb.d_rot(), chain.system, chain.ideal).fraction
    Fraction(1, 4)

"""

import logging
from importlib.metadata import version as _get_version

from .attacks import (
    build_chain,
    d_and,
    d_delivery,
    d_or,
    d_ot,
    d_rabin,
    d_rot,
    impossibility_bound,
    parse_attack_label,
    run_attack,
    strategy_library,
    threshold,
)
from .engine import (
    BOTTOM,
    Box,
    Channel,
    Distinguisher,
    Kind,
    Port,
    Side,
    Symbol,
    absorb,
    attach,
    compose,
    parallel,
    run,
)
from .errors import (
    CausalityViolation,
    EnumerationSizeError,
    InputError,
    ProtocolOrderError,
    RelboxError,
    UnknownTargetError,
    WiringError,
)
from .primitives import make_bc, make_mpc, make_ot, make_rabin, make_rot
from .protocols import case_labels, evaluate_case, get_case, get_cases
from .settings import ExperimentConfig, Settings, get_settings
from .stats import estimate_advantage, exact_advantage

logger = logging.getLogger(__name__)

# Configure logging to output to console by default
if not logger.handlers:
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO)
    formatter = logging.Formatter("%(levelname)s: %(message)s")
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)
    logger.setLevel(logging.INFO)

__version__ = _get_version("relbox")

__all__ = [  # noqa: RUF022
    # Configuration
    "Settings",
    "ExperimentConfig",
    "get_settings",
    # Engine
    "BOTTOM",
    "Box",
    "Channel",
    "Distinguisher",
    "Kind",
    "Port",
    "Side",
    "Symbol",
    "absorb",
    "attach",
    "compose",
    "parallel",
    "run",
    # Primitives
    "make_bc",
    "make_mpc",
    "make_ot",
    "make_rabin",
    "make_rot",
    # Constructions
    "case_labels",
    "evaluate_case",
    "get_case",
    "get_cases",
    # Attacks
    "build_chain",
    "d_and",
    "d_delivery",
    "d_or",
    "d_ot",
    "d_rabin",
    "d_rot",
    "impossibility_bound",
    "parse_attack_label",
    "run_attack",
    "strategy_library",
    "threshold",
    # Statistics
    "estimate_advantage",
    "exact_advantage",
    # Errors
    "RelboxError",
    "InputError",
    "WiringError",
    "CausalityViolation",
    "EnumerationSizeError",
    "ProtocolOrderError",
    "UnknownTargetError",
    # Metadata
    "__version__",
]
