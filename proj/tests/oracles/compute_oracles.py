"""Independent high-precision reference values frozen into the C++ tests.

Run: python3 tests/oracles/compute_oracles.py
"""
import mpmath as mp

mp.mp.dps = 120


def alpha_by_pgf(h, n_max=150):
    # plain g_n iteration; 120 digits absorbs the cancellation in g_n - g_{n-1}
    m = sum(k * hk for k, hk in enumerate(h))
    f = lambda s: sum(hk * s**k for k, hk in enumerate(h))
    g = mp.mpf(h[0])
    prev = None
    vals = []
    for n in range(1, n_max + 1):
        g_next = f(g)
        vals.append((g_next - g) / m**n)
        g = g_next
    return vals[-1], m


def chi_uniform(a, b, m):
    mom = lambda c: (mp.mpf(b)**(c + 1) - mp.mpf(a)**(c + 1)) / ((c + 1) * (b - a))
    return mp.findroot(lambda c: mom(c) - 1 / m, 1.5)


def chi_by_quad(a, b, m):
    mom = lambda c: mp.quad(lambda y: y**c, [a, b]) / (b - a)
    return mp.findroot(lambda c: mom(c) - 1 / m, 1.5)


def log_moment_uniform(a, b, c):
    return mp.quad(lambda y: y**c * mp.log(y), [a, b]) / (b - a)


def kappa_uniform(a, b, p):
    mgf = lambda k: mp.quad(lambda x: mp.e**(k * x), [a, b]) / (b - a)
    return mp.findroot(lambda k: mgf(k) - 1 / mp.mpf(p), 1.0)


def main():
    h = [mp.mpf('0.6'), mp.mpf('0.3'), mp.mpf('0.1')]
    a, m = alpha_by_pgf(h)
    print('alpha(0.6,0.3,0.1) =', mp.nstr(a, 20), ' m =', m)

    print('chi U[1.2,2] m=1/2 closed =', mp.nstr(chi_uniform(mp.mpf('1.2'), mp.mpf(2), mp.mpf('0.5')), 20))
    print('chi U[1.2,2] m=1/2 quad   =', mp.nstr(chi_by_quad(mp.mpf('1.2'), mp.mpf(2), mp.mpf('0.5')), 20))

    p = mp.mpf('0.5')
    k = kappa_uniform(mp.mpf('0.5'), mp.mpf(1), p)
    exk = mp.quad(lambda x: x * mp.e**(k * x), [0.5, 1]) / mp.mpf('0.5')
    c2 = (1 - p) / (k * p * exk)
    print('kappa U[0.5,1] p=1/2 =', mp.nstr(k, 20), ' E(Xe^kX) =', mp.nstr(exk, 20), ' c2 =', mp.nstr(c2, 20))

    # reference config: h_k ∝ (2/3)(1/3)^k, k = 0..12
    raw = [mp.mpf(2) / 3 * (mp.mpf(1) / 3)**kk for kk in range(13)]
    z = sum(raw)
    href = [r / z for r in raw]
    aref, mref = alpha_by_pgf(href)
    chiref = chi_uniform(mp.mpf('1.2'), mp.mpf(2), mref)
    lm = log_moment_uniform(mp.mpf('1.2'), mp.mpf(2), chiref)
    d2 = aref / (chiref * mref * lm)
    print('reference: m_h =', mp.nstr(mref, 20), ' alpha =', mp.nstr(aref, 20), ' chi =', mp.nstr(chiref, 20))
    print('reference: int y^chi log y =', mp.nstr(lm, 20), ' d2 =', mp.nstr(d2, 20))
    c1sum = sum(href[kk] * mp.mpf(kk)**(1 - chiref) for kk in range(1, 13))
    print('reference: sum_{k>=1} h_k k^(1-chi) =', mp.nstr(c1sum, 20))
    print('reference: E|V(T)| = 1/(1-m) =', mp.nstr(1 / (1 - mref), 20))


if __name__ == '__main__':
    main()
