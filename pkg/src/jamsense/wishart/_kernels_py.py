"""Pure-Python twin of ``_kernels.pyx``; same algorithm and call signatures."""

from __future__ import annotations

import math

XGK = (0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
       0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
       0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
       0.207784955007898467600689403773245, 0.000000000000000000000000000000000)
WGK = (0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
       0.204432940075298892414161999234649, 0.209482141084727828012999174891714)
WG = (0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327)
LIMIT = 200


def log_density(lam, inv_zeta, N):
    lam = [float(x) for x in lam]
    iz = [float(x) for x in inv_zeta]
    K = len(lam)
    if len(iz) != K:
        raise ValueError("dimension mismatch")
    colscale = 0.0
    A = [[0.0] * K for _ in range(K)]
    for j in range(K):
        if lam[j] <= 0.0 and N > K:
            return -math.inf
        colscale -= lam[j] * iz[0]
        for i in range(K):
            A[i][j] = math.exp(-lam[j] * (iz[i] - iz[0]))
    logdet = 0.0
    for j in range(K):
        p = max(range(j, K), key=lambda r: abs(A[r][j]))
        piv = abs(A[p][j])
        if piv == 0.0:
            return -math.inf
        if p != j:
            A[j], A[p] = A[p], A[j]
        logdet += math.log(piv)
        for r in range(j + 1, K):
            f = A[r][j] / A[j][j]
            row_r, row_j = A[r], A[j]
            for i in range(j + 1, K):
                row_r[i] -= f * row_j[i]
    logdet += colscale
    for i in range(K):
        for j in range(i + 1, K):
            d = abs(lam[i] - lam[j])
            if d == 0.0:
                return -math.inf
            logdet += math.log(d)
        if N > K:
            logdet += (N - K) * math.log(lam[i])
    return logdet


class _Nest:
    def __init__(self, inv_zeta, N, shift, var, lo_ref, hi_ref, lam_max, abs_tol, rel_tol):
        self.iz = [float(x) for x in inv_zeta]
        self.K = len(self.iz)
        self.N = int(N)
        self.shift = shift
        self.var = [int(v) for v in var]
        self.lo = [int(v) for v in lo_ref]
        self.hi = [int(v) for v in hi_ref]
        self.depth = len(self.var)
        self.lam = [0.0] * self.K
        self.lam_max = lam_max
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        self.n_eval = 0
        self.failed = 0

    def integrand(self, depth, x):
        self.lam[self.var[depth]] = x
        if depth == self.depth - 1:
            self.n_eval += 1
            return math.exp(log_density(self.lam, self.iz, self.N) - self.shift)
        d = depth + 1
        a = 0.0 if self.lo[d] < 0 else self.lam[self.lo[d]]
        b = self.lam_max if self.hi[d] < 0 else self.lam[self.hi[d]]
        if b <= a:
            return 0.0
        return self.adapt(d, a, b)

    def gk15(self, depth, a, b):
        c = 0.5 * (a + b)
        h = 0.5 * (b - a)
        fc = self.integrand(depth, c)
        resk = fc * WGK[7]
        resg = fc * WG[3]
        fv1, fv2 = [], []
        for j in range(7):
            f1 = self.integrand(depth, c - h * XGK[j])
            f2 = self.integrand(depth, c + h * XGK[j])
            fv1.append(f1)
            fv2.append(f2)
            resk += WGK[j] * (f1 + f2)
            if j % 2 == 1:
                resg += WG[j // 2] * (f1 + f2)
        mean = 0.5 * resk
        resasc = WGK[7] * abs(fc - mean)
        for j in range(7):
            resasc += WGK[j] * (abs(fv1[j] - mean) + abs(fv2[j] - mean))
        e = abs((resk - resg) * h)
        resasc *= abs(h)
        if resasc != 0.0 and e != 0.0:
            e = resasc * min(1.0, (200.0 * e / resasc) ** 1.5)
        return resk * h, e

    def adapt(self, depth, a, b):
        r, e = self.gk15(depth, a, b)
        ivals = [[a, b, r, e]]
        total, toterr = r, e
        while True:
            tol = max(self.abs_tol, self.rel_tol * abs(total))
            if toterr <= tol:
                break
            if len(ivals) >= LIMIT:
                self.failed += 1
                break
            worst = max(range(len(ivals)), key=lambda k: ivals[k][3])
            lo, hi, rw, ew = ivals[worst]
            m = 0.5 * (lo + hi)
            r1, e1 = self.gk15(depth, lo, m)
            r2, e2 = self.gk15(depth, m, hi)
            total += r1 + r2 - rw
            toterr += e1 + e2 - ew
            ivals[worst] = [lo, m, r1, e1]
            ivals.append([m, hi, r2, e2])
        return total


def nested_integral(inv_zeta, N, shift, var, lo_ref, hi_ref, a, b, lam_max, abs_tol, rel_tol):
    if len(var) != len(inv_zeta):
        raise ValueError("unsupported dimension")
    if b <= a:
        return 0.0, 0, 0
    ctx = _Nest(inv_zeta, N, shift, var, lo_ref, hi_ref, lam_max, abs_tol, rel_tol)
    value = ctx.adapt(0, a, b)
    return value, ctx.n_eval, ctx.failed
