"""Exception types shared across the package."""


class RangeError(ValueError):
    """Input outside the representable or admissible range.

    Raised for negative or non-finite squeezing/intensity parameters and
    when an intermediate (``cosh 2r``, an exponent) overflows double
    precision.
    """


class TruncationError(RuntimeError):
    """The photon-number cutoff is too small for the requested tolerance."""


def check_squeezing(r, hyperbolic_factor=1.0):
    """Validate a squeezing parameter and return it as a float.

    ``hyperbolic_factor`` is the multiple of ``r`` that ends up inside a
    ``cosh``/``exp`` downstream; it is used to reject values that would
    overflow there.
    """
    try:
        r = float(r)
    except (TypeError, ValueError) as exc:
        raise RangeError(f"squeezing parameter must be a real number, got {r!r}") from exc
    if r != r or r in (float("inf"), float("-inf")):
        raise RangeError(f"squeezing parameter must be finite, got {r}")
    if r < 0:
        raise RangeError(f"squeezing parameter must be non-negative, got {r}")
    # exp(709.78) is the largest finite double
    if hyperbolic_factor * r > 709.78:
        raise RangeError(f"cosh({hyperbolic_factor:g}*r) overflows for r={r}")
    return r
