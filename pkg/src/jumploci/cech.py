"""A two-chart section counter for presentations on the projective line.

This is a deliberately separate code path used only to cross-validate the
graded/Serre-dual profile computations: sections are counted as pairs of
chart vectors glued over the punctured overlap modulo relations, with all
Laurent tails truncated at a window whose stability is verified.  Nothing
here shares logic with the main cohomology models.
"""

from __future__ import annotations

from .algebra.matrix import scalar_rank_kernel
from .sheafkit import COKER, P1, Presentation, SheafError


class CechError(ValueError):
    pass


def _entry_chart_coeffs(field, entry, degree):
    """Binary-form coefficients on each chart: (by t-power, by s-power)."""
    u_coeffs = [field.zero] * (degree + 1)
    w_coeffs = [field.zero] * (degree + 1)
    for (es, et), c in entry.coeffs.items():
        u_coeffs[et] = c
        w_coeffs[es] = c
    return u_coeffs, w_coeffs


def cech_h0(pres: Presentation, k: int, trunc: int | None = None) -> int:
    """h^0 of a two-term presentation on P^1 at twist k, by chart gluing."""
    if pres.ambient != P1 or pres.kind != COKER:
        raise CechError("the chart oracle handles two-term presentations on P1")
    n1 = _cech_h0_at(pres, k, trunc)
    n2 = _cech_h0_at(pres, k, (trunc or _default_trunc(pres, k)) + 2)
    if n1 != n2:
        raise CechError(f"chart truncation did not stabilize: {n1} vs {n2}")
    return n1


def _default_trunc(pres, k):
    f1, f0 = pres.terms
    spread = max(
        [abs(d + k) for d in f0.degrees] + [abs(d + k) for d in f1.degrees] + [1]
    )
    return spread + 4


def _cech_h0_at(pres, k, trunc):
    field = pres.field
    f1, f0 = pres.terms
    m = pres.maps[0]
    n0, n1 = len(f0), len(f1)
    b = [d + k for d in f0.degrees]
    a = [d + k for d in f1.degrees]
    n = trunc if trunc is not None else _default_trunc(pres, k)
    dmax = max([b[i] - a[j] for i in range(n0) for j in range(n1)], default=0)
    w = n + max([abs(x) for x in b] + [0]) + max(dmax, 0) + 2

    entries = [
        [_entry_chart_coeffs(field, m[i][j], b[i] - a[j]) for j in range(n1)]
        for i in range(n0)
    ]

    # unknown layout: v0 (n0 blocks of n+1), v1 (n0 blocks of n+1),
    # lambda (n1 blocks of exponents -w..w)
    v0_off = [i * (n + 1) for i in range(n0)]
    base_v1 = n0 * (n + 1)
    v1_off = [base_v1 + i * (n + 1) for i in range(n0)]
    base_l = 2 * n0 * (n + 1)
    lam_off = [base_l + j * (2 * w + 1) for j in range(n1)]
    total = base_l + n1 * (2 * w + 1)

    lo = min([0] + [bi - n for bi in b] + [-w])
    hi = max([n] + [bi for bi in b] + [w + max(dmax, 0)])

    rows = []
    for i in range(n0):
        for expo in range(lo, hi + 1):
            row = [field.zero] * total
            touched = False
            if 0 <= expo <= n:
                row[v0_off[i] + expo] = field.one
                touched = True
            # - u^{b_i} v1_i(1/u): coefficient of u^expo is -v1_i[b_i - expo]
            j1 = b[i] - expo
            if 0 <= j1 <= n:
                row[v1_off[i] + j1] = field.neg(field.one)
                touched = True
            for j in range(n1):
                u_coeffs, _ = entries[i][j]
                for d, c in enumerate(u_coeffs):
                    if field.is_zero(c):
                        continue
                    lam_exp = expo - d
                    if -w <= lam_exp <= w:
                        row[lam_off[j] + lam_exp + w] = field.sub(
                            row[lam_off[j] + lam_exp + w], c
                        )
                        touched = True
            if touched:
                rows.append(row)
    nrows = len(rows)
    rank, _ = scalar_rank_kernel(field, rows)
    dim_kernel = total - rank

    # solutions with vanishing section part force lambda in the exact Laurent
    # kernel of an injective map, which is zero; verify that.
    lam_rows = [r[base_l:] for r in rows]
    lam_rank, _ = scalar_rank_kernel(field, lam_rows)
    if lam_rank != n1 * (2 * w + 1):
        raise CechError("relation columns are degenerate over the overlap")

    gauge = _gauge_dim(field, entries, b, a, n0, n1, n, dmax)
    return dim_kernel - gauge


def _gauge_dim(field, entries, b, a, n0, n1, n, dmax):
    """Dimension of the pairs of chart vectors representing the zero section."""
    if n1 == 0:
        return 0
    pad = max(dmax, 0)
    out_len = n + pad + 1
    mu_len = n + 1

    def build(chart):
        rows_g, rows_high = [], []
        cols = 2 * n1 * mu_len
        # columns: mu0 blocks then mu1 blocks
        full = []
        for i in range(n0):
            for expo in range(out_len):
                row = [field.zero] * cols
                for j in range(n1):
                    cs = entries[i][j][chart]
                    for d, c in enumerate(cs):
                        if field.is_zero(c):
                            continue
                        mu_exp = expo - d
                        if 0 <= mu_exp < mu_len:
                            off = (chart * n1 + j) * mu_len
                            row[off + mu_exp] = field.add(row[off + mu_exp], c)
                full.append((i, expo, row))
        for i, expo, row in full:
            rows_g.append(row)
            if expo > n:
                rows_high.append(row)
        return rows_g, rows_high

    rows0, high0 = build(0)
    rows1, high1 = build(1)
    rows_g = rows0 + rows1
    rows_high = high0 + high1
    rank_g, _ = scalar_rank_kernel(field, rows_g)
    if rows_high:
        rank_high, _ = scalar_rank_kernel(field, rows_high)
    else:
        rank_high = 0
    return rank_g - rank_high
