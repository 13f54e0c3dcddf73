"""Regenerate every high-precision constant frozen into the test suite.

Pure mpmath, no package imports: the whole point is an independent route
to the same numbers.  Output is ``name = value`` lines whose names match
the constants in tests/.  The kernel series needs a few hundred moment
integrals at high precision, so a full run takes a couple of minutes;
``--depth`` trades tail accuracy for speed when eyeballing.
"""

import argparse

import mpmath as mp

SPLIT = [0, mp.mpf("0.5"), mp.mpf("0.9"), mp.mpf("0.99"), 1]


def phi(r, b=1, a=1):
    return mp.mpf(b) / 2 / (1 - r * r) ** a


def phi_prime(r, b=1, a=1):
    return mp.mpf(b) * a * r / (1 - r * r) ** (a + 1)


def laplacian(r, b=1, a=1):
    return 2 * b * a * (1 + a * r * r) / (1 - r * r) ** (a + 2)


def tau(r, b=1, a=1):
    return 1 / mp.sqrt(laplacian(r, b, a))


def moment(n):
    """c_n = 2 int_0^1 r^(2n+1) omega(r) dr for the (1,1) weight."""
    return 2 * mp.quad(lambda r: r ** (2 * n + 1) * mp.exp(-2 * phi(r)), SPLIT)


def class_constants():
    best_r, best = mp.mpf(0), mp.mpf(0)
    for i in range(2001):
        r = mp.mpf(i) / 2001 * mp.mpf("0.9995")
        v = tau(r) / (1 - r)
        if v > best:
            best, best_r = v, r
    r1 = mp.findroot(lambda r: mp.diff(lambda s: tau(s) / (1 - s), r), best_r)
    c1 = tau(r1) / (1 - r1)

    tau_p = lambda r: mp.diff(tau, r)
    best_r, best = mp.mpf(0), mp.mpf(0)
    for i in range(2001):
        r = mp.mpf(i) / 2001 * mp.mpf("0.9995")
        v = abs(tau_p(r))
        if v > best:
            best, best_r = v, r
    r2 = mp.findroot(lambda r: mp.diff(tau_p, r), best_r)
    c2 = abs(tau_p(r2))
    return c1, c2, min(1, 1 / c1, 1 / c2) / 4


def emit(name, value, digits=17):
    print(f"{name} = {mp.nstr(value, digits)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--dps", type=int, default=40,
                    help="mpmath working precision (decimal digits)")
    ap.add_argument("--depth", type=int, default=400,
                    help="kernel series truncation depth")
    args = ap.parse_args()
    mp.mp.dps = args.dps

    c1, c2, m_tau = class_constants()
    emit("c1", c1)
    emit("c2", c2)
    emit("m_tau", m_tau)

    for n in (0, 1, 2, 5, 50, 500):
        emit(f"c_{n}", moment(n))

    # Littlewood-Paley pairing norms d_n^2 and the constant-symbol quasi-norm
    for n in (1, 2, 3, 10):
        v = n * n * 2 * mp.quad(
            lambda r: r ** (2 * n - 1) * mp.exp(-2 * phi(r))
            / (1 + phi_prime(r)) ** 2, SPLIT)
        emit(f"d2_{n}", v)
    emit("sp_1_2", 2 * mp.quad(
        lambda r: r * mp.exp(-2 * phi(r)) / (1 + phi_prime(r)) ** 2, SPLIT))

    for p in (1, 2, 4):
        emit(f"apP_z_{p}", 2 * mp.quad(
            lambda r: r ** (p + 1) * mp.exp(-p * phi(r)), SPLIT))

    for r0 in (mp.mpf("0.3"), mp.mpf("0.5"), mp.mpf("0.8")):
        v = mp.exp(2 * phi(r0)) * mp.quad(
            lambda u: mp.exp(-2 * phi(u)), [r0, 1 - (1 - r0) / 2, 1])
        emit(f"dist_{mp.nstr(r0, 2)}", v)

    cs = [moment(n) for n in range(args.depth)]

    def K(z, zeta):
        w = z * mp.conj(zeta)
        return sum(w ** n / cn for n, cn in enumerate(cs))

    # series convention: K(z, zeta) = sum (z conj(zeta))^n / c_n
    for z, zeta in ((mp.mpf("0.5"), mp.mpf("0.5")),
                    (mp.mpf("0.5"), mp.mpf("0.3")),
                    (mp.mpc("0.4", "0.2"), mp.mpf("0.35"))):
        emit(f"K({mp.nstr(z, 5)}, {mp.nstr(zeta, 5)})", K(z, zeta))
    for r in (mp.mpf(0), mp.mpf("0.3"), mp.mpf("0.6"), mp.mpf("0.8")):
        emit(f"Kdiag({mp.nstr(r, 3)})", K(r, r))

    # kernel-moment statistics at z = 0.4 for psi = xi/2, g = z, p = q = 2:
    # the angular mean of |K(z, s e^{it}/2)|^2 collapses by Parseval to
    # sum (|z| s / 2)^(2n) / c_n^2
    z0 = mp.mpf("0.4")
    K44 = sum((z0 * z0) ** n / cs[n] for n in range(args.depth))

    def S(s):
        x = (z0 * s / 2) ** 2
        return sum(x ** n / cs[n] ** 2 for n in range(args.depth))

    common = lambda s: S(s) * (s * s / 16) / (1 + phi_prime(s)) ** 2 \
        * mp.exp(-2 * phi(s)) * s
    m0 = 2 * mp.quad(common, [0, mp.mpf("0.5"), mp.mpf("0.9"), 1]) / K44
    emit("log_M0", mp.log(m0))
    m1 = 2 * mp.quad(lambda s: common(s) * (1 + phi_prime(s / 2)) ** 2,
                     [0, mp.mpf("0.5"), mp.mpf("0.9"), 1]) / K44
    emit("log_M1", mp.log(m1))
    emit("log_GV", mp.log(m0) + mp.log(16))
    emit("log_G2_atom", mp.log((1 / cs[0]) ** 2 / K44 * mp.exp(-2 * phi(0))))


if __name__ == "__main__":
    main()
