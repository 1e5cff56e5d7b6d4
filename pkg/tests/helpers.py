import numpy as np


def random_even_trace(g, rng, n_modes=12, scale=1.0, decay=0.5):
    """Smooth random even trace built from low cosine modes."""
    coeffs = scale * rng.standard_normal(n_modes) * decay ** np.arange(n_modes)
    t = np.zeros(g.n_points)
    for n, c in enumerate(coeffs):
        t += c * np.cos(g.wavenumbers[n] * g.x)
    return t
