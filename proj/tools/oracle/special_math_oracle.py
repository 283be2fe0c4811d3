#!/usr/bin/env python3
"""Arbitrary-precision reference values for the scalar special functions.

Run offline; paste the printed tables into tests/test_special_math.cpp.
"""
import mpmath as mp

mp.mp.dps = 40


def emit(name, rows, fmt):
    print(f"// {name}")
    for r in rows:
        print(fmt(*r))
    print()


def main():
    gamma_args = ["1e-3", "0.5", "2.75", "5.5", "33.7", "170"]
    emit(
        "gamma: {x, Gamma(x)}",
        [(a, mp.gamma(mp.mpf(a))) for a in gamma_args],
        lambda a, v: f"    {{{a}, {mp.nstr(v, 17)}}},",
    )

    beta_args = [("2.5", "3.5"), ("0.5", "0.5"), ("7", "0.001"), ("2", "3"), ("4.0", "31.0")]
    emit(
        "beta: {a, b, Beta(a,b)}",
        [(a, b, mp.beta(mp.mpf(a), mp.mpf(b))) for a, b in beta_args],
        lambda a, b, v: f"    {{{a}, {b}, {mp.nstr(v, 17)}}},",
    )

    besselk_args = [
        ("0.5", "1.0"), ("1.5", "2.0"), ("2.75", "0.3"),
        ("0.5", "2.0"), ("1.5", "0.7"), ("2.5", "1.3"), ("5.5", "3.77"), ("10.5", "25.0"),
        ("0.0", "0.1"), ("0.0", "1.0"), ("0.0", "100.0"), ("1.0", "0.5"), ("2.0", "5.0"),
        ("5.0", "1.0"), ("5.0", "20.0"), ("5.0", "0.003"),
        ("0.3", "1e-6"), ("0.25", "1e-8"), ("3.7", "0.002"), ("0.9", "2.1"),
        ("7.3", "45.0"), ("12.2", "100.0"), ("33.5", "2.0"), ("46.1", "80.0"),
        ("60.0", "30.0"), ("60.0", "90.0"), ("60.0", "100.0"), ("4.999", "8.0"),
    ]
    emit(
        "besselk: {nu, x, K_nu(x)}",
        [(n, x, mp.besselk(mp.mpf(n), mp.mpf(x))) for n, x in besselk_args],
        lambda n, x, v: f"    {{{n}, {x}, {mp.nstr(v, 17)}}},",
    )


if __name__ == "__main__":
    main()
