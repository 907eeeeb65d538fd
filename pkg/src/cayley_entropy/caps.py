import os

ENV_VAR = "CAYLEY_ENTROPY_CAP"

ENUMERATE_BLOCKS_CAP = 10**7
REDUCED_SYSTEMS_CAP = 10**6
SPECTRUM_CAP = 10**7
DIGIT_BUDGET = 10**6


def resolve_cap(cap, default):
    """Explicit ``cap`` wins, then the environment override, then ``default``."""
    if cap is not None:
        return int(cap)
    env = os.environ.get(ENV_VAR)
    if env:
        return int(env)
    return default
