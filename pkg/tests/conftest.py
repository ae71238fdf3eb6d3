import numpy as np
import pytest

from lamina.lamination import Figela, sample_point


def build_random_figela(n_chords: int, seed: int) -> Figela:
    """Figela grown by splitting a mass-biased random fragment with two uniform boundary points."""
    gen = np.random.default_rng(seed)
    f = Figela()
    for k in range(n_chords):
        frags = list(f.fragments.values())
        w = np.array([fr.mass for fr in frags])
        fr = frags[gen.choice(len(frags), p=w / w.sum())]
        a, b = sample_point(fr, gen), sample_point(fr, gen)
        if a != b:
            f.insert_chord(fr.id, a, b, float(k), rng=gen)
    return f


@pytest.fixture
def random_figela():
    return build_random_figela
