"""Independent oracle for the reduced self-consistency problem.

Uses adaptive quadrature (scipy.integrate.quad) and plain damped iteration,
sharing no code with the C++ solver. Prints frozen values used by the tests.
"""
import numpy as np
from scipy.integrate import quad


def moments(m1, m2, sigma, wells=2):
    expo = lambda x: -(np.cos(wells * x) - m1 * np.sin(x) - m2 * np.cos(x)) / sigma
    shift = max(expo(x) for x in np.linspace(0, 2 * np.pi, 2001))
    w = lambda x: np.exp(expo(x) - shift)
    opts = dict(limit=400, epsabs=1e-14, epsrel=1e-13)
    z = quad(w, 0, 2 * np.pi, **opts)[0]
    s = quad(lambda x: w(x) * np.sin(x), 0, 2 * np.pi, **opts)[0] / z
    c = quad(lambda x: w(x) * np.cos(x), 0, 2 * np.pi, **opts)[0] / z
    return s, c


def iterate(m, sigma, wells=2, damping=0.5, iters=4000, tol=1e-13):
    m = np.array(m, float)
    for _ in range(iters):
        t = np.array(moments(m[0], m[1], sigma, wells))
        nxt = (1 - damping) * m + damping * t
        if np.max(np.abs(nxt - m)) < tol:
            return nxt
        m = nxt
    return m


if __name__ == "__main__":
    for sigma in (0.2, 0.4, 0.6, 1.0):
        print("double_well sigma", sigma, "from (0.9,0):", repr(iterate([0.9, 0.0], sigma).tolist()))
        print("double_well sigma", sigma, "from (0,0.5):", repr(iterate([0.0, 0.5], sigma).tolist()))
    print("sigma=1 self_map(0,0):", moments(0, 0, 1.0))
    # four-well landscape: damped iteration from a ring of starts
    for sigma in (0.4,):
        found = []
        for th in np.linspace(0, 2 * np.pi, 16, endpoint=False):
            r = iterate([0.9 * np.sin(th), 0.9 * np.cos(th)], sigma, wells=4)
            if not any(np.allclose(r, f, atol=1e-8) for f in found):
                found.append(r)
        print("four_well sigma", sigma, "attracting roots:", [x.tolist() for x in found])
