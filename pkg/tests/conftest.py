import random

import pytest

from rankone.construction import ConstructionParams


def random_bounded_params(rng, depth=None, max_cut=4, max_spacer=3):
    """Random bounded construction prefix (cuts and spacers uniformly small)."""
    depth = depth or rng.randint(4, 8)
    cuts = tuple(rng.randint(2, max_cut) for _ in range(depth))
    spacers = tuple(
        tuple(rng.randint(0, max_spacer) for _ in range(p)) for p in cuts
    )
    return ConstructionParams(cuts, spacers)


def random_params_with_width_cap(rng, width_cap, depth_extra=2, max_cut=4, max_spacer=3):
    """Params plus the deepest stage n whose tower width q_n stays under the cap."""
    cuts = []
    q = 1
    while True:
        p = rng.randint(2, max_cut)
        if q * p > width_cap:
            break
        q *= p
        cuts.append(p)
    n = len(cuts)
    if n == 0:
        cuts, n = [2], 1
    for _ in range(depth_extra):
        cuts.append(rng.randint(2, max_cut))
    spacers = tuple(
        tuple(rng.randint(0, max_spacer) for _ in range(p)) for p in cuts
    )
    return ConstructionParams(tuple(cuts), spacers), n


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
