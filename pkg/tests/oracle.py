"""High-precision reference values computed straight from the formulas with mpmath.

Shares no code with the package; used to freeze golden values and to cross-check
closed forms in the tests.
"""
import mpmath as mp

mp.mp.dps = 50


def density(n, r, area):
    return mp.mpf(n) * mp.pi * mp.mpf(r) ** 2 / mp.mpf(area)


def connectivity(lam, n):
    lam = mp.mpf(lam)
    return (1 - mp.e ** (-lam)) ** n


def p_r(r, side):
    return mp.pi * mp.mpf(r) ** 2 / mp.mpf(side) ** 2


def binomial(n, n_nodes, pr):
    pr = mp.mpf(pr)
    m = n_nodes - 1
    return mp.binomial(m, n) * pr**n * (1 - pr) ** (m - n)


def poisson(n, lam):
    lam = mp.mpf(lam)
    if lam == 0:
        return mp.mpf(1) if n == 0 else mp.mpf(0)
    return mp.e ** (-lam) * lam**n / mp.factorial(n)


def stopping_n(target, r=7, area=10000, cap=10000):
    for n in range(1, cap):
        if connectivity(density(n, r, area), n) >= target:
            return n
    raise RuntimeError("no solution")


def tv(a, b):
    size = max(len(a), len(b))
    a = list(a) + [0] * (size - len(a))
    b = list(b) + [0] * (size - len(b))
    return sum(abs(x - y) for x, y in zip(a, b)) / 2


if __name__ == "__main__":
    print("density 100:", density(100, 7, 10000))
    print("density 500:", density(500, 7, 10000))
    print("conn 100:", connectivity(density(100, 7, 10000), 100))
    print("conn 500:", connectivity(density(500, 7, 10000), 500))
    print("p_r:", p_r(7, 100))
    pr = p_r(7, 100)
    print("binom N=1000 n=15:", binomial(15, 1000, pr))
    print("shaping 500:", 1 - mp.e ** (-(499 * pr)))
    print("shaping 700:", 1 - mp.e ** (-(699 * pr)))
    print("N* literal 0.1:", stopping_n(mp.mpf("0.1")))
    print("N* complement 0.1:", stopping_n(1 - mp.mpf("0.1")))
    lam_s = 999 * pr
    print("lam_s:", lam_s)
    for big_n in (50, 200, 1000):
        q = lam_s / (big_n - 1)
        a = [binomial(k, big_n, q) for k in range(big_n)]
        b = [poisson(k, lam_s) for k in range(big_n + 200)]
        print("tv", big_n, tv(a, b))
    print("cap", 10 * 10000 / (mp.pi * 49))
