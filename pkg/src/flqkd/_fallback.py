"""Pure-numpy twin of the compiled photocount sampler in ``_kernel.pyx``."""

import numpy as np

INV_SQRT2 = 0.70710678118654752440


def sample_block(bit_generator, n, M, sb, cr, ci, s, q):
    rng = np.random.Generator(bit_generator)
    g = rng.standard_normal((n, M, 4))
    x1r = g[:, :, 0] * INV_SQRT2
    x1i = g[:, :, 1] * INV_SQRT2
    x2r = g[:, :, 2] * INV_SQRT2
    x2i = g[:, :, 3] * INV_SQRT2
    br = sb * x1r
    bi = sb * x1i
    rr = (cr * x1r - ci * x1i) + s * x2r
    ri = (cr * x1i + ci * x1r) + s * x2i
    terms = (
        (br + rr) ** 2 + (bi + ri) ** 2,
        (br - rr) ** 2 + (bi - ri) ** 2,
        (br - ri) ** 2 + (bi + rr) ** 2,
        (br + ri) ** 2 + (bi - rr) ** 2,
    )
    lam = np.empty((n, 4))
    for d, term in enumerate(terms):
        # sequential accumulation over modes, as in the compiled loop
        acc = np.zeros(n)
        for m in range(M):
            acc = acc + term[:, m]
        lam[:, d] = q * acc
    counts = rng.poisson(lam)
    return counts[:, 0] - counts[:, 1], counts[:, 2] - counts[:, 3]
