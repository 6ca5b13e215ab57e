#!/usr/bin/env python3
"""Generate high-precision reference values frozen into the C++ unit tests.

Everything here is computed from first-principles definitions (quadrature of the
defining integrals, root finding on the defining optimality condition) rather than
from the closed forms the library implements, so agreement is meaningful.

Run: python3 scripts/make_oracles.py
"""

import mpmath as mp

mp.mp.dps = 40

# ---- f-divergence generators, straight from their defining formulas ----------
# Each standardized generator satisfies f(1) = 0, f'(1) = 1, f''(1) = 1.


def f_reverse_kl(u):
    return u * mp.log(u)


def f_forward_kl(u):
    return 2 * (u - 1) - mp.log(u)


def f_pearson(u):
    return (u - 1) ** 2 / 2 + (u - 1)


def f_neyman(u):
    return (u - 1) ** 2 / (2 * u) + (u - 1)


def f_hellinger(u):
    return 2 * (mp.sqrt(u) - 1) ** 2 + (u - 1)


def f_tv(u):
    return abs(u - 1)


def f1_jsd(u):
    return 2 * mp.log(2 * u / (u + 1)) + 1


def f_jsd(u):
    # by quadrature from the stated derivative, f(1) = 0
    return mp.quad(f1_jsd, [1, u])


def f_alpha(a):
    def f(u):
        return (u**a - u) / (a * (a - 1)) + ((a - 1) / a) * (u - 1)

    return f


def d1(f, u):
    return mp.diff(f, u)


def d2(f, u):
    return mp.diff(f, u, 2)


def fmt(x):
    return mp.nstr(x, 20)


print("== generator values (f, f', f'') ==")
cases = [
    ("reverse_kl", f_reverse_kl, [mp.e, 2]),
    ("forward_kl", f_forward_kl, [2, 3]),
    ("pearson", f_pearson, [3, 0.5]),
    ("neyman", f_neyman, [2, 0.5]),
    ("hellinger", f_hellinger, [4, 0.25]),
    ("jsd", f_jsd, [3, 0.5]),
    ("alpha(0.75)", f_alpha(mp.mpf("0.75")), [2, 0.5]),
    ("alpha(1.2)", f_alpha(mp.mpf("1.2")), [2, 0.5]),
    ("alpha(2)", f_alpha(mp.mpf(2)), [3]),
    ("alpha(-0.5)", f_alpha(mp.mpf("-0.5")), [2]),
]
for name, f, us in cases:
    for u in us:
        u = mp.mpf(u)
        print(f"  {name:12s} u={fmt(u):24s} f={fmt(f(u))}  f1={fmt(d1(f, u))}  f2={fmt(d2(f, u))}")

# ---- backward generators: h(u) = int_1^u (2 - f'(1/t)) dt --------------------
print("\n== backward generator values (h, h') ==")
gens = {
    "reverse_kl": f_reverse_kl,
    "forward_kl": f_forward_kl,
    "pearson": f_pearson,
    "neyman": f_neyman,
    "hellinger": f_hellinger,
    "jsd": None,  # use f1_jsd directly
    "alpha(0.75)": f_alpha(mp.mpf("0.75")),
    "alpha(1.2)": f_alpha(mp.mpf("1.2")),
    "alpha(2)": f_alpha(mp.mpf(2)),
    "alpha(3)": f_alpha(mp.mpf(3)),
}
for name, f in gens.items():
    f1 = f1_jsd if f is None else (lambda t, f=f: d1(f, t))

    def h(u, f1=f1):
        return mp.quad(lambda t: 2 - f1(1 / t), [1, u])

    for u in [mp.mpf(2), mp.mpf(4), mp.mpf("0.5"), mp.e]:
        print(f"  {name:12s} u={fmt(u):24s} h={fmt(h(u))}  h1={fmt(2 - f1(1 / u))}")

# ---- surrogate losses: L(d) = int_0^d (f'(e^t) - f'(1)) dt -------------------
print("\n== loss values ==")
deltas = [mp.mpf(x) for x in ["-5", "-2", "-0.5", "0.5", "1", "2", "5"]]
for name, f in gens.items():
    if name == "alpha(3)":
        continue
    f1 = f1_jsd if f is None else (lambda t, f=f: d1(f, t))
    c = f1(mp.mpf(1))

    def L(d, f1=f1, c=c):
        return mp.quad(lambda t: f1(mp.e**t) - c, [0, d])

    vals = "  ".join(fmt(L(d)) for d in deltas)
    print(f"  {name:12s} {vals}")
# tv: L(d) = |d| exactly, no oracle needed

# ---- log-normalizer estimates: argmin_C mean L(delta_i + C) ------------------
print("\n== log_z estimates (by direct minimization of the batch loss) ==")
batch = [mp.mpf(x) for x in ["-1", "0.5", "2"]]
batch4 = [mp.mpf(x) for x in ["-2", "-0.3", "0.7", "1.4"]]
for name, f in gens.items():
    if name in ("alpha(2)", "alpha(3)"):
        continue
    f1 = f1_jsd if f is None else (lambda t, f=f: d1(f, t))
    c = f1(mp.mpf(1))

    def dmean(C, b, f1=f1, c=c):
        return mp.fsum(f1(mp.e ** (d + C)) - c for d in b) / len(b)

    for b in (batch, batch4):
        root = mp.findroot(lambda C: dmean(C, b), mp.mpf(0))
        print(f"  {name:12s} B={len(b)} log_z={fmt(root)}")

# TV: minimizer of mean |d_i + C| is C = -median
print("  tv           B=3 log_z=", fmt(-sorted(batch)[1]))

print("\n== devgrad batch loss at the optimum (same batches) ==")
for name, f in gens.items():
    if name in ("alpha(2)", "alpha(3)"):
        continue
    f1 = f1_jsd if f is None else (lambda t, f=f: d1(f, t))
    c = f1(mp.mpf(1))

    def L(d, f1=f1, c=c):
        return mp.quad(lambda t: f1(mp.e**t) - c, [0, d])

    def dmean(C, b, f1=f1, c=c):
        return mp.fsum(f1(mp.e ** (d + C)) - c for d in b) / len(b)

    for b in (batch, batch4):
        root = mp.findroot(lambda C: dmean(C, b), mp.mpf(0))
        loss = mp.fsum(L(d + root) for d in b) / len(b)
        ws = ", ".join(fmt(f1(mp.e ** (d + root)) - c) for d in b)
        print(f"  {name:12s} B={len(b)} loss={fmt(loss)}  w=[{ws}]")

# ---- inverse mapping sanity: squared loss should recover u*log(u) ------------
print("\n== inverse of the squared loss at u = e ==")
lam1 = 1  # 1/l''(0) for l(x) = x^2/2
lam2 = 1  # 1 - l'(0)/l''(0)
val = lam1 * mp.quad(lambda t: mp.log(t), [1, mp.e]) + lam2 * (mp.e - 1)
print("  f(e) =", fmt(val), " (u*log u at e =", fmt(mp.e), ")")

# ---- useful constants ---------------------------------------------------------
print("\n== constants ==")
print("  exp(-2)        =", fmt(mp.e**-2))
print("  log(4/3)       =", fmt(mp.log(mp.mpf(4) / 3)))
print("  log(2.004)     =", fmt(mp.log(mp.mpf("2.004"))))
print("  log(2)         =", fmt(mp.log(2)))
print("  log(0.75)      =", fmt(mp.log(mp.mpf("0.75"))))
print("  6ln3-8ln2+2    =", fmt(6 * mp.log(3) - 8 * mp.log(2) + 2))
