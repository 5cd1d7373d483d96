"""Regenerates tests/data/rounding_cases.txt.

Each line is: alpha mu r_hat L r kind n exact
where exact is the n-term partial sum of the PDF or CDF series computed in
150-digit arithmetic from the same binary64 inputs. The Rust side checks that
its rounding estimate covers |computed - exact|.
"""
import random

from mpmath import mp, mpf, gamma

from gen_frozen import deltas

mp.dps = 150


def partial_sum(a, m, rh, L, r, cdf, n):
    a, m, rh, r = mpf(a), mpf(m), mpf(rh), mpf(r)
    d = deltas(a, m, rh, L, n)
    pre = (a * m ** m * gamma(a * m) / (gamma(m) * rh ** (a * m))) ** L
    e = 1 if cdf else 0
    return pre * sum(d[i] * r ** (a * i + a * m * L - 1 + e) / gamma(a * i + a * m * L + e) for i in range(n))


def mean_sum(a, m, rh, L):
    return L * float(mpf(rh) * gamma(m + 1 / mpf(a)) / (mpf(m) ** (1 / mpf(a)) * gamma(m)))


if __name__ == "__main__":
    rng = random.Random(20240611)
    with open("rounding_cases.txt", "w") as out:
        for _ in range(120):
            a = rng.uniform(0.3, 4.0)
            m = rng.uniform(0.1, 5.0)
            rh = rng.uniform(0.5, 10.0)
            L = rng.choice([1, 2, 3, 5, 8, 13, 25, 50])
            r = mean_sum(a, m, rh, L) * rng.uniform(0.05, 3.0)
            cdf = rng.random() < 0.5
            n = rng.randrange(5, 150)
            v = partial_sum(a, m, rh, L, r, cdf, n)
            kind = "cdf" if cdf else "pdf"
            out.write(f"{a!r} {m!r} {rh!r} {L} {r!r} {kind} {n} {mp.nstr(v, 20)}\n")
