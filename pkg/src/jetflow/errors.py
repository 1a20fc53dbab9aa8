"""Exception types.

Every error carries a short machine-readable ``code``; the CLI reports it
verbatim, so the set of codes is closed and listed in ``ERROR_CODES``.
"""


class JetflowError(Exception):
    code = "jetflow_error"


class IdenticallyZero(JetflowError, ValueError):
    code = "identically_zero_polynomial"


class TooFewSamples(JetflowError, ValueError):
    code = "too_few_samples"


class BadEnergyLevel(JetflowError, ValueError):
    code = "bad_energy_level"


class IntegrationError(JetflowError, RuntimeError):
    code = "integration_failed"


class MaxStepsExceeded(IntegrationError):
    code = "max_steps_exceeded"


class NoHillInterval(JetflowError, ValueError):
    code = "no_hill_interval"


class ConstantAboveOne(NoHillInterval):
    code = "constant_above_one"


class CriticalEndpoint(JetflowError, ValueError):
    code = "infinite_period_critical_pair"


class UnboundedInterval(JetflowError, ValueError):
    code = "unbounded_interval"


class DeflationError(JetflowError, ArithmeticError):
    code = "deflation_failed"


class NotPositiveDefinite(JetflowError, ArithmeticError):
    code = "not_positive_definite"


class SpanTooShort(JetflowError, ValueError):
    code = "span_too_short"


class InvalidSpec(JetflowError, ValueError):
    code = "invalid_spec"


class OutsideHillInterval(InvalidSpec):
    code = "x_init_outside_hill_interval"


class MalformedTrajectory(JetflowError, ValueError):
    code = "malformed_trajectory"


ERROR_CODES = frozenset(
    cls.code
    for cls in (
        IdenticallyZero, TooFewSamples, BadEnergyLevel, IntegrationError,
        MaxStepsExceeded, NoHillInterval, ConstantAboveOne, CriticalEndpoint,
        UnboundedInterval, DeflationError, NotPositiveDefinite, SpanTooShort,
        InvalidSpec, OutsideHillInterval, MalformedTrajectory,
    )
) | {"io_error", "usage_error"}
