"""Brute-force reference computations in sympy.

These share no code with the engine: gluings, Jacobians and inverses are
written out by hand here and all linear algebra goes through sympy.
"""

import sympy as sp

z, u1, u2, xi, v1, v2 = sp.symbols("z u1 u2 xi v1 v2")
LIFT = 60  # power of xi used to clear denominators


def _terms(expr, gens):
    """Dict exponent-tuple -> coefficient of a polynomial expression."""
    if expr == 0:
        return {}
    return sp.Poly(sp.expand(expr), *gens).as_dict()


def h0_formal(M, u_of_v, n, z_max):
    """dim of sections of the bundle with s_V = M s_U on the n-th formal neighborhood.

    ``u_of_v`` maps (z, u1, u2) to expressions in (xi, v1, v2).  Unknowns are
    all e_c z^m u1^i u2^s with m <= z_max and i + s <= n.
    """
    rank = M.shape[0]
    unknowns, cols = [], []
    for c in range(rank):
        for m in range(z_max + 1):
            for i in range(n + 1):
                for s in range(n + 1 - i):
                    unknowns.append((c, m, i, s))
    rows = {}
    for idx, (c, m, i, s) in enumerate(unknowns):
        vec = M[:, c] * (z**m * u1**i * u2**s)
        for r in range(rank):
            expr = vec[r].subs(u_of_v, simultaneous=True) * xi**LIFT
            for (e, a, b), coef in _terms(sp.together(expr), (xi, v1, v2)).items():
                if e < LIFT and a + b <= n:
                    rows.setdefault((r, e, a, b), {})[idx] = coef
    mat = sp.zeros(len(rows), len(unknowns))
    for ri, row in enumerate(rows.values()):
        for ci, coef in row.items():
            mat[ri, ci] = coef
    return len(unknowns) - (mat.rank() if rows else 0)


def h0_on_line(M, z_max=12):
    """dim H^0 over the projective line of a Laurent matrix in z alone."""
    return h0_formal(M, {z: 1 / xi}, 0, z_max)


def splitting_by_counts(M, span=8):
    """Splitting degrees (a >= b) of a rank 2 bundle on the line from h^0 of twists."""
    counts = {}
    for t in range(-span, span + 1):
        counts[t] = h0_on_line(M * z**-t, z_max=2 * span + 4)
    for a in range(-span + 1, span):
        for b in range(-span + 1, a + 1):
            if all(counts[t] == max(0, a + t + 1) + max(0, b + t + 1) for t in counts):
                return a, b
    raise ValueError(f"no splitting type fits {counts}")


def h1_w2y(y, deg, z_min):
    """dim of tangent H^1 of the deformed W_2 with v1 = z^2 u1 + z u2^y, up to fiber degree deg."""
    fwd = sp.Matrix([1 / z, z**2 * u1 + z * u2**y, u2])
    J = fwd.jacobian(sp.Matrix([z, u1, u2]))
    Jinv = sp.simplify(J.inv())
    cands = [
        (c, l, i, s)
        for c in range(3)
        for l in range(z_min, 0)
        for i in range(deg + 1)
        for s in range(deg + 1 - i)
    ]
    index = {k: n for n, k in enumerate(cands)}
    outside = {}
    images = []
    for c in range(3):
        for m in range(0, -z_min + 2 * deg + 8):
            for a in range(deg + 1):
                for b in range(deg + 1 - a):
                    vec = Jinv[:, c] * (fwd[0] ** m * fwd[1] ** a * fwd[2] ** b)
                    img = {}
                    for r in range(3):
                        expr = sp.expand(vec[r] * z**LIFT)
                        for (e, i, s), coef in _terms(expr, (z, u1, u2)).items():
                            l = e - LIFT
                            if l >= 0 or i + s > deg:
                                continue
                            key = (r, l, i, s)
                            if key not in index:
                                key = outside.setdefault(key, len(cands) + len(outside))
                            else:
                                key = index[key]
                            img[key] = coef
                    if img:
                        images.append(img)
    width = len(cands) + len(outside)
    full = sp.zeros(len(images), width)
    for ri, img in enumerate(images):
        for ci, coef in img.items():
            full[ri, ci] = coef
    # coboundaries landing inside the window: rank(all) - rank(outside part)
    inside = full.rank() - full[:, len(cands):].rank()
    return len(cands) - inside
