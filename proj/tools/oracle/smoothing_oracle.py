"""Reference values for the expected smoothing kernel.

Two independent routes are compared before any value is frozen:
  spectral : Ktil(d) = 2/sqrt(2 pi) * Int_0^inf F(w) phi(w)^2 cos(w d) dw
  mixture  : for the Gaussian base kernel, condition on the Gamma mixing
             variables of the generalized Laplace noise; the inner Gaussian
             convolution is closed-form, leaving one Gamma integral.
Matern spectral densities were validated against numerical Fourier
transforms in kernels_oracle.py, so the spectral route is trusted for
Matern once it is confirmed on the Gaussian kernel here.
"""
import mpmath as mp

mp.mp.dps = 40


def f_gauss(sigma, w):
    return mp.sqrt(2) * sigma * mp.e**(-(sigma * w)**2)


def f_matern(m0, phi, w):
    nu = m0 - mp.mpf(1) / 2
    c2 = 4 * phi**2 * nu
    amp = 2**mp.mpf("0.5") * mp.gamma(m0) / mp.gamma(nu) * c2**nu
    return amp * (c2 + w**2)**(-m0)


def cf_gauss(sn, w):
    return mp.e**(-(sn * w)**2 / 2)


def cf_gl(sn, m, w):
    return (1 + (sn * w)**2 / 2)**(-m)


def spectral(fdens, cf, d, W=mp.inf):
    g = lambda w: fdens(w) * cf(w)**2 * mp.cos(w * d)
    val = mp.quad(g, [0, 1, 10, 100, 1000, 10000, 100000])
    return 2 / mp.sqrt(2 * mp.pi) * val


def gauss_smoothed_gauss(sigma, d, s2):
    # E exp(-(d+z)^2/(4 sigma^2)), z ~ N(0, s2)
    return mp.sqrt(2 * sigma**2 / (2 * sigma**2 + s2)) * \
        mp.e**(-d**2 / (2 * (2 * sigma**2 + s2)))


def mixture_gauss_gl(sigma, sn, m, d):
    # G1+G2 ~ Gamma(2m, 1); eps - eps' | g ~ N(0, sn^2 g)
    dens = lambda g: g**(2 * m - 1) * mp.e**(-g) / mp.gamma(2 * m)
    return mp.quad(lambda g: gauss_smoothed_gauss(sigma, d, sn**2 * g) * dens(g),
                   [0, 1, 5, 20, 100, mp.inf])


def closed_gauss_gauss(sigma, sn, D, dnorm2):
    t2 = sigma**2 + sn**2
    return (sigma**2 / t2)**(mp.mpf(D) / 2) * mp.e**(-dnorm2 / (4 * t2))


print("== route cross-validation: gaussian kernel ==")
sigma, sn = mp.mpf("0.5"), mp.mpf("0.3")
for d in ["0", "0.5", "1.3"]:
    d = mp.mpf(d)
    a = closed_gauss_gauss(sigma, sn, 1, d**2)
    b = spectral(lambda w: f_gauss(sigma, w), lambda w: cf_gauss(sn, w), d)
    print(f"  G+G d={d}: closed={mp.nstr(a, 20)} spec-closed={mp.nstr(a - b, 5)}")

sn, m = mp.mpf("0.4"), mp.mpf("1.5")
for d in ["0", "0.7"]:
    d = mp.mpf(d)
    a = mixture_gauss_gl(sigma, sn, m, d)
    b = spectral(lambda w: f_gauss(sigma, w), lambda w: cf_gl(sn, m, w), d)
    print(f"  G+GL d={d}: mixture={mp.nstr(a, 20)} spec-mixture={mp.nstr(a - b, 5)}")
    print(f"    freeze {{0.5, 0.4, 1.5, {d}, {mp.nstr(b, 18)}}}")

print("== frozen: matern kernel, D = 1 ==")
phi = 1 / mp.sqrt(2)
for m0 in ["1.5", "2.5"]:
    m0 = mp.mpf(m0)
    for law, cf in [("GL sn=0.2 m=2", lambda w: cf_gl(mp.mpf("0.2"), 2, w)),
                    ("Gauss sn=0.25", lambda w: cf_gauss(mp.mpf("0.25"), w))]:
        for d in ["0", "0.4", "1.0"]:
            d = mp.mpf(d)
            v = spectral(lambda w: f_matern(m0, phi, w), cf, d)
            print(f"  m0={m0} {law} d={d}: {mp.nstr(v, 18)}")
