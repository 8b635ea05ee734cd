"""Configuration management for halo-slopes."""

import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

from .modules.padic_arith import is_prime

OUTPUT_FORMATS = ("csv", "text")


class RunConfig(BaseModel):
    """Every tunable parameter of one run."""

    # Arithmetic
    p: int = Field(default=3, description="Odd prime p")
    prec: int = Field(default=20, description="p-adic precision N")
    xprec: int = Field(default=12, description="Truncation degree Mx in the weight variable X")
    moments: int = Field(default=24, description="Moment truncation M")

    # Inputs
    dataset: Optional[str] = Field(None, description="Path to a coset dataset")
    k: Optional[int] = Field(None, description="Weight k at v")
    w: Optional[int] = Field(None, description="Central weight w")
    eps: Optional[str] = Field(None, description="Character pair 'm:tame:wild,m:tame:wild'")
    z: Optional[str] = Field(None, description="z samples 'cyc:L[:pow]' or 'rad:e[:pow]', comma separated")
    seed: Optional[int] = Field(None, description="Seed for synthetic datasets")

    # Output
    output: Optional[str] = Field(None, description="Output path, stdout when missing")
    format: str = Field(default="csv", description="Output format")
    approx: bool = Field(default=False, description="Add a non-authoritative decimal column")

    # Resources and sweeps
    threads: int = Field(default=1, description="Worker threads")
    max_dim: int = Field(default=4096, description="Cap on matrix dimension")
    step: int = Field(default=4, description="Moment increment for the stability check")
    k_max: Optional[int] = Field(None, description="Largest weight in the halo report")
    scan_levels: int = Field(default=3, description="Conductor levels tried by the small-slope scan")

    @field_validator("p")
    @classmethod
    def validate_p(cls, v):
        """p must be an odd prime."""
        if v < 3 or not is_prime(v):
            raise ValueError(f"p must be an odd prime, got {v}")
        return v

    @field_validator("prec", "xprec", "moments", "max_dim", "step", "scan_levels")
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError(f"must be positive, got {v}")
        return v

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v):
        if v < 1:
            raise ValueError(f"threads must be at least 1, got {v}")
        return v

    @field_validator("format")
    @classmethod
    def validate_format(cls, v):
        if v not in OUTPUT_FORMATS:
            raise ValueError(f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {v!r}")
        return v

    @model_validator(mode="after")
    def validate_weight(self):
        """k and w must agree mod 2, and k >= 2."""
        if self.k is not None:
            if self.k < 2:
                raise ValueError(f"k must be at least 2, got {self.k}")
            if self.w is not None and (self.k - self.w) % 2:
                raise ValueError(f"k={self.k} and w={self.w} must have the same parity")
        return self

    def header_dict(self) -> Dict[str, Any]:
        """Deterministic echo of the run parameters for output headers."""
        return {key: value for key, value in self.model_dump().items() if key != "output"}


def load_config(config_file: Optional[str] = None, **overrides: Any) -> RunConfig:
    """Load defaults from the environment (and a dotenv file), then apply CLI overrides."""
    if config_file:
        load_dotenv(config_file)
    else:
        load_dotenv()  # Load from .env file if it exists

    values: Dict[str, Any] = {
        "p": int(os.getenv("HALO_P", "3")),
        "prec": int(os.getenv("HALO_PREC", "20")),
        "xprec": int(os.getenv("HALO_XPREC", "12")),
        "moments": int(os.getenv("HALO_MOMENTS", "24")),
        "threads": int(os.getenv("HALO_THREADS", "1")),
        "max_dim": int(os.getenv("HALO_MAX_DIM", "4096")),
        "scan_levels": int(os.getenv("HALO_SCAN_LEVELS", "3")),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    return RunConfig(**values)
