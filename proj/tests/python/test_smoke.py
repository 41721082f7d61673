import math

import _phi4 as phi4


def test_toy():
    r = phi4.run_toy(0.01, 80)
    assert abs(r.z_quad - 1.7597) < 1e-4
    assert abs(r.terms[0] - math.sqrt(math.pi)) < 1e-12
    assert abs(r.terms[1] + 0.0133) < 5e-4


def test_green_delta():
    lat = phi4.TorusLattice(8.0, 1.0, 1.0)
    g = lat.green()
    assert lat.wick_constant() == g[0]
    # apply_green of the scaled delta reproduces the kernel
    delta = [0.0] * len(g)
    delta[0] = 1.0  # eps = 1 so eps^{-2} 1_0 is the unit spike
    img = phi4.apply_green(lat, delta)
    assert max(abs(a - b) for a, b in zip(img, g)) < 1e-12


def test_expand_counts():
    e = phi4.expand(2, 2)
    assert e.n_terms(0) == 1
    assert e.n_terms(1) == 0
    assert e.n_terms(2) == 1
    assert "coeff=6" in e.serialize()


def test_besov_zero():
    lat = phi4.TorusLattice(8.0, 1.0, 1.0)
    z = [0.0] * (lat.n * lat.n)
    assert phi4.besov_norm(lat, z, 0.5, phi4.inf, phi4.inf) == 0.0


def test_free_chain_matches_green():
    lat = phi4.TorusLattice(4.0, 1.0, 1.0)
    s2, err = phi4.run_free_chain(lat, 0.0, n_samples=4000, burn_in=500, seed=7)
    g = lat.green()
    bad = sum(1 for a, b, e in zip(s2, g, err) if abs(a - b) > 4 * e)
    assert bad == 0
