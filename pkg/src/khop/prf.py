"""Counter-based pseudorandom draws.

Every random decision in the sampling engine is a pure function of
(seed, sample_id, step, slot, bound).  That keeps executor output
independent of scheduling order and worker count: any thread can compute
any slot's draw without shared RNG state.

The draw mixes the four counters with a splitmix64-style finalizer and
maps the 64-bit hash onto [0, bound) by fixed-point scaling,
floor(hash * bound / 2**64).  The function is frozen for the life of
FORMAT_VERSION; artifacts produced under one version must not be read
back under another.
"""

_MASK = (1 << 64) - 1
_INIT = 0xD1B54A32D192ED03
_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

# Bump when the mixing or scaling arithmetic changes.
FORMAT_VERSION = 1

# Largest supported bound (fixed-point scaling needs bound < 2**63).
MAX_BOUND = (1 << 63) - 1


def _mix64(x):
    x ^= x >> 30
    x = (x * _MUL1) & _MASK
    x ^= x >> 27
    x = (x * _MUL2) & _MASK
    return x ^ (x >> 31)


def prf_draw(seed, sample_id, step, slot, bound):
    """Deterministic draw in [0, bound) keyed by the four counters.

    Pure: the same five arguments always give the same value.  Raises
    ValueError when bound is not in [1, MAX_BOUND].
    """
    if bound < 1:
        raise ValueError(f"draw bound must be >= 1, got {bound}")
    if bound > MAX_BOUND:
        raise ValueError(f"draw bound {bound} exceeds {MAX_BOUND}")
    h = _mix64((seed ^ _INIT) & _MASK)
    h = _mix64((h + _GOLDEN + sample_id) & _MASK)
    h = _mix64((h + _GOLDEN + step) & _MASK)
    h = _mix64((h + _GOLDEN + slot) & _MASK)
    return (h * bound) >> 64


def derive_stream(seed, tag):
    """Fold a stream tag into a seed so helper draws (root picks, shuffles)
    never collide with the engine's per-slot keying."""
    return _mix64((seed ^ (tag & _MASK)) & _MASK)


# Stream tags for auxiliary draw streams.
STREAM_ROOTS = 0xA0761D6478BD642F
STREAM_SHUFFLE = 0xE7037ED1A0B428DB
STREAM_WEIGHTS = 0x8EBC6AF09C88C6E3
STREAM_FEATURES = 0x589965CC75374CC3
