"""Simulation settings with runtime validation.

This module defines the configuration shared by the engine, the estimators and the CLI.
Settings use Pydantic for runtime validation; every field carries a description that the
documentation renders as the default-settings table.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator


class Settings(BaseModel):
    """Engine and estimator configuration with runtime validation.

    Values are validated at creation and on assignment.

    Example:
        settings = Settings(bob_location=(2.0, 0.0, 0.0), emission_delay=2.0)
        settings.save_to_file("geometry.json")

    """

    # =========================================================================
    # GEOMETRY SETTINGS
    # =========================================================================

    speed_of_light: float = Field(
        default=1.0,
        gt=0,
        description="""Speed of light c used by every causal-order test.

        Units are arbitrary; with the default c = 1 distances and times share one unit.
        """,
    )

    alice_location: tuple[float, float, float] = Field(
        default=(0.0, 0.0, 0.0),
        description="""Spatial location of every Alice-side port.

        Messages delivered to or emitted from an Alice-side port are stamped here unless a
        box overrides its placement (the attack chain places its middle boxes between the parties).
        """,
    )

    bob_location: tuple[float, float, float] = Field(
        default=(1.0, 0.0, 0.0),
        description="""Spatial location of every Bob-side port.

        Must be reachable from alice_location within one emission_delay, otherwise a resource
        answering one party on behalf of the other could not respect causality.
        """,
    )

    # =========================================================================
    # ENGINE SETTINGS
    # =========================================================================

    emission_delay: float = Field(
        default=1.0,
        gt=0,
        description="""Default gap between consuming a message and emitting the answer.

        Boxes may request a different delay per emission (the reveal of b* in the
        OT-to-Rabin reduction uses two units so that it lands after the OT output).
        """,
    )

    event_budget: int = Field(
        default=1_000_000,
        ge=1,
        description="""Maximum number of processed messages per run.

        A run that has not reached quiescence after this many events raises RunawayError.
        """,
    )

    enumeration_limit: int = Field(
        default=2**24,
        ge=1,
        description="""Maximum number of probability-tree leaves visited by exact enumeration.

        Exceeding it raises EnumerationSizeError; the CLI then falls back to Monte Carlo.
        """,
    )

    poset_limit: int = Field(
        default=12,
        ge=1,
        le=20,
        description="""Largest finite poset accepted by the cut and causality-function checks.

        Cut enumeration is exponential in the number of elements.
        """,
    )

    # =========================================================================
    # ESTIMATION SETTINGS
    # =========================================================================

    confidence: float = Field(
        default=0.99,
        gt=0,
        lt=1,
        description="""Confidence level of Monte Carlo intervals (1 - alpha).""",
    )

    interval: Literal["hoeffding", "wilson"] = Field(
        default="hoeffding",
        description="""Confidence interval used for each Monte Carlo proportion.

        - hoeffding: distribution-free, conservative
        - wilson: score interval, tighter near 0 and 1
        """,
    )

    workers: int = Field(
        default=1,
        ge=1,
        description="""Number of worker processes for Monte Carlo estimation.

        Trials are split into disjoint contiguous seed ranges and counts are merged exactly,
        so results do not depend on the number of workers.
        """,
    )

    # =========================================================================
    # PYDANTIC CONFIGURATION
    # =========================================================================

    model_config = {
        "validate_assignment": True,  # Validate on attribute changes
        "extra": "forbid",  # Reject unknown fields
    }

    # =========================================================================
    # VALIDATORS
    # =========================================================================

    @field_validator("alice_location", "bob_location")
    @classmethod
    def validate_location(cls, v: tuple[float, float, float]) -> tuple[float, float, float]:
        """Reject non-finite coordinates."""
        if not all(math.isfinite(x) for x in v):
            raise ValueError(f"Locations must have finite coordinates, got {v}")
        return v

    @model_validator(mode="after")
    def validate_geometry(self) -> Settings:
        """Ensure a single emission delay covers the distance between the parties."""
        distance = math.dist(self.alice_location, self.bob_location)
        reach = self.speed_of_light * self.emission_delay
        if distance > reach * (1 + 1e-12):
            raise ValueError(
                f"Parties are {distance} apart but one emission_delay only reaches {reach}. "
                "Increase emission_delay or speed_of_light, or move the parties closer."
            )
        return self

    def location(self, side: str) -> tuple[float, float, float]:
        """Return the default location of ``"alice"`` or ``"bob"``."""
        return self.alice_location if side == "alice" else self.bob_location

    @property
    def midpoint(self) -> tuple[float, float, float]:
        """Point halfway between the two parties."""
        a, b = self.alice_location, self.bob_location
        return tuple((x + y) / 2 for x, y in zip(a, b, strict=True))

    # =========================================================================
    # SERIALIZATION METHODS
    # =========================================================================

    def save_to_file(self, path: str | Path) -> None:
        """Save settings to a JSON file.

        Args:
            path: File path (will be created/overwritten)

        """
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")

    @classmethod
    def load_from_file(cls, path: str | Path) -> Settings:
        """Load settings from a JSON file.

        Args:
            path: File path to load from

        Returns:
            Settings instance with validated values

        """
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def to_dict(self) -> dict:
        """Convert settings to a dictionary."""
        return self.model_dump()

    @classmethod
    def from_dict(cls, data: dict) -> Settings:
        """Create Settings from a dictionary with validation."""
        return cls.model_validate(data)


_default_settings: Settings | None = None


def get_settings() -> Settings:
    """Return the process-wide default settings, creating them on first use."""
    global _default_settings  # noqa: PLW0603
    if _default_settings is None:
        _default_settings = Settings()
    return _default_settings


class ExperimentConfig(BaseModel):
    """One CLI invocation, validated before any run starts.

    Values given on the command line override values loaded from the ``config`` JSON file.
    """

    command: Literal["construct", "attack", "bounds", "trace", "list"] = Field(
        description="CLI sub-command being executed.",
    )
    target: str | None = Field(
        default=None,
        description="Construction (pi1..pi6), attack kind (rot, ot, rabin, and, or) or trace label.",
    )
    mode: Literal["exact", "montecarlo"] = Field(
        default="exact",
        description="Exact enumeration or seeded Monte Carlo estimation.",
    )
    trials: int = Field(default=10_000, ge=1, description="Monte Carlo trials per system.")
    seed: int = Field(default=0, ge=0, description="Master seed of the counter-based random streams.")
    k: int = Field(
        default=4, ge=1, description="Security parameter of the OT-from-Rabin protocol and the OT-to-BC protocol."
    )
    n: int = Field(default=12, ge=2, description="Number of BB84 states in the quantum OT protocol.")
    p: list[float] = Field(default_factory=lambda: [0.5], description="Erasure probabilities of Rabin OT.")
    s: list[float] = Field(default_factory=lambda: [1], description="String lengths (inf allowed for limits).")
    out: Path = Field(default=Path("reports"), description="Directory receiving reports and transcripts.")
    format: Literal["json", "csv"] = Field(default="json", description="Report format.")
    config: Path | None = Field(default=None, description="Optional JSON file with Settings overrides.")

    model_config = {"extra": "forbid"}

    @field_validator("p")
    @classmethod
    def validate_p(cls, v: list[float]) -> list[float]:
        """Erasure probabilities must lie in [0, 1]."""
        if not all(0 <= x <= 1 for x in v):
            raise ValueError(f"p must lie in [0, 1], got {v}")
        return v

    @field_validator("s")
    @classmethod
    def validate_s(cls, v: list[float]) -> list[float]:
        """String lengths are positive integers or infinity."""
        for x in v:
            if not (math.isinf(x) or (x >= 1 and float(x).is_integer())):
                raise ValueError(f"s must be a positive integer or inf, got {x}")
        return v

    @model_validator(mode="after")
    def validate_target(self) -> ExperimentConfig:
        """Check target-specific preconditions (n even, k/3 integral for the quantum protocol)."""
        if self.command == "construct" and self.target == "pi5":
            if self.n % 2:
                raise ValueError(f"pi5 requires even n, got n={self.n}")
            if (self.n // 2) % 3:
                raise ValueError(f"pi5 requires k = n/2 divisible by 3, got n={self.n}")
        return self

    def load_settings(self) -> Settings:
        """Return the Settings named by ``config``, or the defaults."""
        if self.config is None:
            return Settings()
        return Settings.load_from_file(self.config)
