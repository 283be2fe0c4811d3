#!/usr/bin/env python3
"""Reference values for the kernel families.

Checks, at high precision, that the closed-form spectral densities are the
exact Fourier transforms of the kernels under the convention
F(g)(w) = (2pi)^{-D/2} Int g(x) e^{-iwx} dx, then prints frozen test values.
"""
import mpmath as mp

mp.mp.dps = 30


def matern_profile(m0, phi, D, r):
    nu = m0 - mp.mpf(D) / 2
    c = 2 * phi * mp.sqrt(nu)
    z = c * r
    if z == 0:
        return mp.mpf(1)
    return 2 ** (1 - nu) / mp.gamma(nu) * z**nu * mp.besselk(nu, z)


def matern_spectral_1d(m0, phi, w):
    """Self-consistent transform: 2^{1/2} G(m0)/G(nu) c2^nu (c2+w^2)^{-m0}."""
    nu = m0 - mp.mpf(1) / 2
    c2 = 4 * phi**2 * nu
    return (
        mp.sqrt(2)
        * mp.gamma(m0)
        / mp.gamma(nu)
        * c2**nu
        * (c2 + w**2) ** (-m0)
    )


def check_fourier_1d():
    print("// Fourier self-consistency (numerical FT vs closed form):")
    for m0, phi in [(1.0, 1.0), (1.5, 0.7), (5.5, 1.3)]:
        for w in [0.0, 0.9, 3.0]:
            ft = (
                2
                / mp.sqrt(2 * mp.pi)
                * mp.quad(
                    lambda x: matern_profile(m0, phi, 1, x) * mp.cos(w * x),
                    [0, 1, 5, 20, 80, mp.inf],
                )
            )
            closed = matern_spectral_1d(m0, phi, w)
            rel = abs(ft - closed) / closed
            print(f"//   matern m0={m0} phi={phi} w={w}: rel = {mp.nstr(rel, 3)}")
    # Gaussian: K = exp(-x^2/(4 s^2)), F = sqrt(2) s exp(-s^2 w^2)
    s = mp.mpf("0.6")
    for w in [0.0, 1.7]:
        ft = (
            2
            / mp.sqrt(2 * mp.pi)
            * mp.quad(lambda x: mp.exp(-(x**2) / (4 * s**2)) * mp.cos(w * x), [0, mp.inf])
        )
        closed = mp.sqrt(2) * s * mp.exp(-(s**2) * w**2)
        print(f"//   gaussian s={s} w={w}: rel = {mp.nstr(abs(ft - closed) / closed, 3)}")


def wendland_profile(kappa, mu, phi, r):
    a = phi * r
    if a >= 1:
        return mp.mpf(0)
    integral = mp.quad(
        lambda u: u * (u**2 - a**2) ** (kappa - 1) * (1 - u) ** mu, [a, 1]
    )
    return integral / mp.beta(2 * kappa, mu + 1)


def main():
    check_fourier_1d()
    print()
    print("// matern_eval: {m0, phi, D, r, value}")
    rows = [
        (1.0, 1.0, 1, 0.7),
        (1.5, 0.7, 1, 1.3),
        (5.5, 1.0, 1, 0.25),
        (2.0, 1.3, 2, 0.6),
        (6.5, 0.9, 3, 1.1),
        (5.5, 1.0 / mp.sqrt(2), 1, 0.4),  # classical nu=5, rho=1
    ]
    for m0, phi, D, r in rows:
        v = matern_profile(mp.mpf(m0), mp.mpf(phi), D, mp.mpf(r))
        print(f"    {{{m0}, {phi if isinstance(phi, float) else mp.nstr(phi, 17)}, {D}, {r}, {mp.nstr(v, 17)}}},")
    print()
    print("// matern_spectral 1-D: {m0, phi, w, value}")
    for m0, phi, w in [(1.5, 1.0, 0.0), (1.5, 1.0, 2.0), (5.5, 0.7, 1.1)]:
        v = matern_spectral_1d(mp.mpf(m0), mp.mpf(phi), mp.mpf(w))
        print(f"    {{{m0}, {phi}, {w}, {mp.nstr(v, 17)}}},")
    print()
    print("// wendland_eval: {kappa, mu, phi, r, value}")
    for kappa, mu, phi, r in [
        (1.0, 2.0, 1.0, 0.4),
        (0.5, 1.5, 1.0, 0.25),
        (1.5, 3.0, 2.0, 0.2),
        (2.0, 4.5, 1.0, 0.8),
    ]:
        v = wendland_profile(mp.mpf(kappa), mp.mpf(mu), mp.mpf(phi), mp.mpf(r))
        print(f"    {{{kappa}, {mu}, {phi}, {r}, {mp.nstr(v, 17)}}},")


if __name__ == "__main__":
    main()
