"""Frozen reference values for the hyperparameter schedule displays.

Computes each regime's outputs with mpmath at 40 digits so the C++
double-precision results can be pinned to 1e-12 relative tolerance.
"""

import mpmath as mp

mp.mp.dps = 40


def poly(n, D, d, m0, mf, c=1, a=0):
    ln = mp.log(n)
    me = 2 / mp.mpf(d) * (2 * D * max(m0, mf) + m0 * d) * ln - m0
    delta = (2 * mf + d) * a / mp.mpf(d) if a > 0 else 1 / ln
    if D > d:
        num = 2 * (2 * m0 + 2 * me) * D - (2 * m0 + 2 * me - D) * d
        den = (2 * mf + d) * (4 * me * D - (2 * m0 + 2 * (1 - delta) * me - D) * d)
        nu = -num / den
    else:
        nu = mp.mpf(0)
    log_sigma = mp.log(c) + nu * ln
    log_t = mp.log(c) + 2 * (m0 + me) / (2 * mf + d) * ln + 2 * me * log_sigma
    log_alpha = mp.log(c) - (1 + 2 * (m0 + me) / (2 * mf + d)) * ln - 2 * me * log_sigma
    return dict(m_eps=me, nu=nu, sigma=mp.exp(log_sigma),
                t_raw=mp.exp(log_t), alpha=mp.exp(log_alpha),
                rate=-2 * mf / (2 * mf + d) + (a if a > 0 else 0))


def gaussian(n, D, d, m0, mf, c=1):
    ln = mp.log(n)
    nu = mp.mpf(-1) / (2 * mf + d)
    log_sigma = mp.log(c) + nu * ln
    log_t = mp.log(c) + (2 * m0 + 2 * mf) / (2 * mf + d) * ln
    log_alpha = mp.log(c) - (1 + 2 * (m0 + mf) / (2 * mf + d)) * ln
    return dict(m_eps=mp.mpf(mf), nu=nu, sigma=mp.exp(log_sigma),
                t_raw=mp.exp(log_t), alpha=mp.exp(log_alpha),
                rate=-2 * mf / (2 * mf + d))


def tensor(n, D, d, m0, mf, c=1):
    ln = mp.log(n)
    me = max(mf - m0, mp.mpf(1))
    p = (2 * (D - 1) * (m0 + me) + 1) / (2 * mf + 1)
    log_t = mp.log(c) + 2 * (m0 + me) / (2 * mf + 1) * ln + p * mp.log(ln)
    log_alpha = mp.log(c) - (1 + 2 * (m0 + me) / (2 * mf + d)) * ln + p * mp.log(ln)
    return dict(m_eps=me, nu=mp.mpf(0), sigma=mp.mpf(c),
                t_raw=mp.exp(log_t), alpha=mp.exp(log_alpha),
                rate=-2 * mf / (2 * mf + 1))


def show(tag, r):
    t_star = max(1, mp.nint(r["t_raw"]))
    print(f"--- {tag}")
    for k in ("m_eps", "nu", "sigma", "t_raw", "alpha", "rate"):
        print(f"  {k:7s} = {mp.nstr(r[k], 20)}")
    print(f"  t_star  = {mp.nstr(t_star, 25)}")
    print(f"  lambda  = {mp.nstr(1 / t_star, 20)}")
    # weight-decay iteration floor with C2 = 1 (denominator -log1p(-alpha))
    return r


show("gaussian n=100 D=1 d=1 m0=1.5 mf=2", gaussian(100, 1, 1, mp.mpf("1.5"), 2))
show("gaussian n=50 D=3 d=2 m0=2.5 mf=3 c=0.7",
     gaussian(50, 3, 2, mp.mpf("2.5"), 3, c=mp.mpf("0.7")))
show("poly n=100 D=2 d=1 m0=1.5 mf=2", poly(100, 2, 1, mp.mpf("1.5"), 2))
show("poly n=100 D=2 d=1 m0=1.5 mf=2 a=0.1",
     poly(100, 2, 1, mp.mpf("1.5"), 2, a=mp.mpf("0.1")))
show("poly n=200 D=1 d=1 m0=1.5 mf=2 (D=d)", poly(200, 1, 1, mp.mpf("1.5"), 2))
show("tensor n=100 D=2 d=1 m0=1.5 mf=2", tensor(100, 2, 1, mp.mpf("1.5"), 2))
show("tensor n=400 D=3 d=2 m0=2.0 mf=3 c=2",
     tensor(400, 3, 2, 2, 3, c=2))
