import numpy as np


def cgauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def mixed_random_matrices(count, seed, n_max=10, kinds=None):
    from epfactor.fixtures import KINDS, generate, random_spec

    rng = np.random.default_rng(seed)
    for _ in range(count):
        spec = random_spec(rng, n_max, kinds or KINDS)
        yield spec, generate(spec)
