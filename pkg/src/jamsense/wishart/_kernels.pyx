# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the ordered-eigenvalue density of a correlated
complex Wishart matrix and its nested adaptive Gauss-Kronrod integration.

Region encoding (shared with ``_kernels_py``): depth ``d`` integrates
eigenvalue ``var[d]`` between ``lo_ref[d]`` and ``hi_ref[d]``, where a
reference ``>= 0`` is the index of an eigenvalue fixed at an outer depth,
``-1`` means 0 (lower) or ``lam_max`` (upper). The outermost bounds are
passed explicitly.
"""

from libc.math cimport exp, log, fabs, pow, sqrt, INFINITY

DEF MAXK = 8
DEF MAXDEPTH = 8
DEF LIMIT = 200

cdef double XGK[8]
cdef double WGK[8]
cdef double WG[4]
XGK[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
          0.207784955007898467600689403773245, 0.000000000000000000000000000000000]
WGK[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
          0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
WG[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327]


cdef struct Nest:
    int K
    int N
    int depth
    double inv_zeta[MAXK]
    double shift
    double lam[MAXK]
    int var[MAXDEPTH]
    int lo_ref[MAXDEPTH]
    int hi_ref[MAXDEPTH]
    double lam_max
    double abs_tol
    double rel_tol
    long n_eval
    int failed


cdef double c_log_density(const double* lam, const double* inv_zeta, int K, int N) nogil:
    """log(|E| |V| prod lam^(N-K)); -inf where the density vanishes."""
    cdef double A[MAXK * MAXK]
    cdef int i, j, r, p
    cdef double logdet = 0.0, colscale = 0.0, v, piv, f, d
    for j in range(K):
        if lam[j] <= 0.0 and N > K:
            return -INFINITY
        colscale -= lam[j] * inv_zeta[0]
        for i in range(K):
            A[i * K + j] = exp(-lam[j] * (inv_zeta[i] - inv_zeta[0]))
    # partial-pivot LU for |det E| on the column-scaled matrix
    for j in range(K):
        p = j
        piv = fabs(A[j * K + j])
        for r in range(j + 1, K):
            if fabs(A[r * K + j]) > piv:
                piv = fabs(A[r * K + j])
                p = r
        if piv == 0.0:
            return -INFINITY
        if p != j:
            for i in range(K):
                v = A[j * K + i]
                A[j * K + i] = A[p * K + i]
                A[p * K + i] = v
        logdet += log(piv)
        for r in range(j + 1, K):
            f = A[r * K + j] / A[j * K + j]
            for i in range(j + 1, K):
                A[r * K + i] -= f * A[j * K + i]
    logdet += colscale
    for i in range(K):
        for j in range(i + 1, K):
            d = fabs(lam[i] - lam[j])
            if d == 0.0:
                return -INFINITY
            logdet += log(d)
        if N > K:
            logdet += (N - K) * log(lam[i])
    return logdet


cdef double integrand(Nest* ctx, int depth, double x) nogil:
    cdef double a, b
    cdef int d
    ctx.lam[ctx.var[depth]] = x
    if depth == ctx.depth - 1:
        ctx.n_eval += 1
        return exp(c_log_density(ctx.lam, ctx.inv_zeta, ctx.K, ctx.N) - ctx.shift)
    d = depth + 1
    a = 0.0 if ctx.lo_ref[d] < 0 else ctx.lam[ctx.lo_ref[d]]
    b = ctx.lam_max if ctx.hi_ref[d] < 0 else ctx.lam[ctx.hi_ref[d]]
    if b <= a:
        return 0.0
    return adapt(ctx, d, a, b)


cdef void gk15(Nest* ctx, int depth, double a, double b, double* result, double* err) nogil:
    cdef double c = 0.5 * (a + b), h = 0.5 * (b - a)
    cdef double fc = integrand(ctx, depth, c)
    cdef double resk = fc * WGK[7], resg = fc * WG[3], resabs = fabs(resk)
    cdef double fv1[7]
    cdef double fv2[7]
    cdef double f1, f2, mean, resasc, e
    cdef int j
    for j in range(7):
        f1 = integrand(ctx, depth, c - h * XGK[j])
        f2 = integrand(ctx, depth, c + h * XGK[j])
        fv1[j] = f1
        fv2[j] = f2
        resk += WGK[j] * (f1 + f2)
        resabs += WGK[j] * (fabs(f1) + fabs(f2))
        if j % 2 == 1:
            resg += WG[j // 2] * (f1 + f2)
    mean = 0.5 * resk
    resasc = WGK[7] * fabs(fc - mean)
    for j in range(7):
        resasc += WGK[j] * (fabs(fv1[j] - mean) + fabs(fv2[j] - mean))
    e = fabs((resk - resg) * h)
    resasc *= fabs(h)
    if resasc != 0.0 and e != 0.0:
        e = resasc * min(1.0, pow(200.0 * e / resasc, 1.5))
    result[0] = resk * h
    err[0] = e


cdef double adapt(Nest* ctx, int depth, double a, double b) nogil:
    """Globally adaptive bisection on the interval with the largest error."""
    cdef double ia[LIMIT]
    cdef double ib[LIMIT]
    cdef double iv[LIMIT]
    cdef double ie[LIMIT]
    cdef int n = 1, k, worst
    cdef double total, toterr, m, r1, e1, r2, e2, tol
    gk15(ctx, depth, a, b, &iv[0], &ie[0])
    ia[0] = a
    ib[0] = b
    total = iv[0]
    toterr = ie[0]
    while True:
        tol = ctx.rel_tol * fabs(total)
        if ctx.abs_tol > tol:
            tol = ctx.abs_tol
        if toterr <= tol:
            break
        if n >= LIMIT:
            ctx.failed += 1
            break
        worst = 0
        for k in range(1, n):
            if ie[k] > ie[worst]:
                worst = k
        m = 0.5 * (ia[worst] + ib[worst])
        gk15(ctx, depth, ia[worst], m, &r1, &e1)
        gk15(ctx, depth, m, ib[worst], &r2, &e2)
        total += r1 + r2 - iv[worst]
        toterr += e1 + e2 - ie[worst]
        ia[n] = m
        ib[n] = ib[worst]
        iv[n] = r2
        ie[n] = e2
        ib[worst] = m
        iv[worst] = r1
        ie[worst] = e1
        n += 1
    return total


def log_density(double[::1] lam, double[::1] inv_zeta, int N):
    """Unnormalised log density at one ordered eigenvalue vector."""
    cdef int K = lam.shape[0]
    if K > MAXK or inv_zeta.shape[0] != K:
        raise ValueError("dimension mismatch or K too large")
    return c_log_density(&lam[0], &inv_zeta[0], K, N)


def nested_integral(double[::1] inv_zeta, int N, double shift, int[::1] var, int[::1] lo_ref,
                    int[::1] hi_ref, double a, double b, double lam_max, double abs_tol,
                    double rel_tol):
    """Integrate ``exp(log_density - shift)`` over the encoded region.

    Returns ``(value, n_evaluations, n_unconverged_levels)``.
    """
    cdef Nest ctx
    cdef double value
    cdef int K = inv_zeta.shape[0], depth = var.shape[0], i
    if K > MAXK or depth > MAXDEPTH or depth != K:
        raise ValueError("unsupported dimension")
    ctx.K = K
    ctx.N = N
    ctx.depth = depth
    ctx.shift = shift
    ctx.lam_max = lam_max
    ctx.abs_tol = abs_tol
    ctx.rel_tol = rel_tol
    ctx.n_eval = 0
    ctx.failed = 0
    for i in range(K):
        ctx.inv_zeta[i] = inv_zeta[i]
        ctx.lam[i] = 0.0
        ctx.var[i] = var[i]
        ctx.lo_ref[i] = lo_ref[i]
        ctx.hi_ref[i] = hi_ref[i]
    if b <= a:
        return 0.0, 0, 0
    with nogil:
        value = adapt(&ctx, 0, a, b)
    return value, ctx.n_eval, ctx.failed
