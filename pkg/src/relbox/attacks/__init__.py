"""Impossibility experiments: chained simulators, their distinguishers and the attack bounds."""

from .bounds import THEOREMS, constructible, impossibility_bound, threshold
from .chain import ChainSystem, build_chain, strategy_ports
from .distinguishers import DISTINGUISHERS, d_and, d_delivery, d_or, d_ot, d_rabin, d_rot
from .runner import (
    AttackTarget,
    StrategyResult,
    attack_labels,
    make_target,
    measure,
    parse_attack_label,
    run_attack,
    sweep_rot,
)
from .strategies import SimulatorStrategy, StrategyBox, deterministic_rot_strategies, strategy_library

__all__ = [
    "DISTINGUISHERS",
    "THEOREMS",
    "AttackTarget",
    "ChainSystem",
    "SimulatorStrategy",
    "StrategyBox",
    "StrategyResult",
    "attack_labels",
    "build_chain",
    "constructible",
    "d_and",
    "d_delivery",
    "d_or",
    "d_ot",
    "d_rabin",
    "d_rot",
    "deterministic_rot_strategies",
    "impossibility_bound",
    "make_target",
    "measure",
    "parse_attack_label",
    "run_attack",
    "strategy_ports",
    "strategy_library",
    "sweep_rot",
    "threshold",
]
