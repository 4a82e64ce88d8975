"""Availability simulation of reconfigurable networked software."""

from ._core import (
    EndOfHorizonError,
    Error,
    GenerationError,
    IoError,
    LookupError,
    Model,
    ParamError,
    ParseError,
    RuleMissingError,
    ShapeError,
    SizeError,
    Trace,
    UndefinedMetricError,
    UnsupportedConfigError,
    ValidationError,
    brute_force_availability,
    compare,
    exact_availability,
    from_json,
    generate,
    load,
    operational_availability,
    oracle_check,
    run,
    save,
    to_json,
)

__all__ = [name for name in dir() if not name.startswith("_")]
