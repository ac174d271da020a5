# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Semantics are defined by ``_fallback.py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs, ceil, INFINITY, NAN
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef signed char i8

cdef double ABSORB_HI = 1e50
cdef double ABSORB_LO = 1e-50
# scaling denominators below this are treated as underflow
cdef double TINY = 1e-200

OK = 0
UNDERFLOW = 1


cdef void _rebuild(double[:, ::1] K, double[:, ::1] KD, const double[:, ::1] D,
                   double[::1] f, double[::1] g, double lam, Py_ssize_t m,
                   Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(m):
        for j in range(n):
            K[i, j] = exp((f[i] + g[j] - D[i, j]) / lam)
            KD[i, j] = K[i, j] * D[i, j]


cdef void _exact_f(double[::1] f, const double[:, ::1] D, double[::1] g,
                   const double[::1] p, double lam, Py_ssize_t m,
                   Py_ssize_t n) noexcept nogil:
    # f_i = lam log p_i - lam LSE_j((g_j - D_ij) / lam)
    cdef Py_ssize_t i, j
    cdef double mx, s, x
    for i in range(m):
        mx = -INFINITY
        for j in range(n):
            x = (g[j] - D[i, j]) / lam
            if x > mx:
                mx = x
        s = 0.0
        for j in range(n):
            s += exp((g[j] - D[i, j]) / lam - mx)
        f[i] = lam * log(p[i]) - lam * (mx + log(s))


cdef void _exact_g(double[::1] g, const double[:, ::1] D, double[::1] f,
                   const double[::1] q, double lam, Py_ssize_t m,
                   Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double x
    cdef double* mx = <double*> malloc(n * sizeof(double))
    cdef double* s = <double*> malloc(n * sizeof(double))
    for j in range(n):
        mx[j] = -INFINITY
        s[j] = 0.0
    for i in range(m):
        for j in range(n):
            x = (f[i] - D[i, j]) / lam
            if x > mx[j]:
                mx[j] = x
    for i in range(m):
        for j in range(n):
            s[j] += exp((f[i] - D[i, j]) / lam - mx[j])
    for j in range(n):
        g[j] = lam * log(q[j]) - lam * (mx[j] + log(s[j]))
    free(mx)
    free(s)


def sinkhorn_kernel(p_in, q_in, D_in, double lam, long max_iter, double tol,
                    double marginal_tol, bint log_domain, g_init=None):
    cdef const double[::1] p = np.ascontiguousarray(p_in, dtype=np.float64)
    cdef const double[::1] q = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef const double[:, ::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cdef Py_ssize_t m = D.shape[0], n = D.shape[1], i, j
    K_arr = np.empty((m, n))
    KD_arr = np.empty((m, n))
    cdef double[:, ::1] K = K_arr
    cdef double[:, ::1] KD = KD_arr
    cdef double[::1] f = np.zeros(m)
    cdef double[::1] g = (np.zeros(n) if g_init is None or not log_domain
                          else np.array(g_init, dtype=np.float64))
    cdef double[::1] u = np.ones(m)
    cdef double[::1] v = np.ones(n)
    cdef double[::1] Kv = np.empty(m)
    cdef double[::1] KTu = np.empty(n)
    cdef double d = 0.0, prev = NAN, col_err, s, sd, umax, umin, vmax, vmin
    cdef long it = 0
    cdef bint converged = False, bad, absorb
    cdef int status = 0

    with nogil:
        if log_domain:
            _exact_f(f, D, g, p, lam, m, n)
        _rebuild(K, KD, D, f, g, lam, m, n)
        while it < max_iter:
            it += 1
            bad = False
            for i in range(m):
                s = 0.0
                for j in range(n):
                    s += K[i, j] * v[j]
                Kv[i] = s
                if not (s > TINY):
                    bad = True
            if bad:
                if not log_domain:
                    status = 1
                    break
                for j in range(n):
                    g[j] += lam * log(v[j])
                    v[j] = 1.0
                _exact_f(f, D, g, p, lam, m, n)
                _rebuild(K, KD, D, f, g, lam, m, n)
                for i in range(m):
                    s = 0.0
                    for j in range(n):
                        s += K[i, j] * v[j]
                    Kv[i] = s
            d = 0.0
            for i in range(m):
                u[i] = p[i] / Kv[i]
                sd = 0.0
                for j in range(n):
                    sd += KD[i, j] * v[j]
                d += u[i] * sd
            for j in range(n):
                KTu[j] = 0.0
            for i in range(m):
                for j in range(n):
                    KTu[j] += K[i, j] * u[i]
            col_err = 0.0
            for j in range(n):
                s = fabs(v[j] * KTu[j] - q[j])
                if s > col_err:
                    col_err = s
            if it > 1 and fabs(d - prev) <= tol * fabs(d) and col_err <= marginal_tol:
                converged = True
                break
            prev = d
            bad = False
            for j in range(n):
                if not (KTu[j] > TINY):
                    bad = True
            if bad:
                if not log_domain:
                    status = 1
                    break
                for i in range(m):
                    f[i] += lam * log(u[i])
                    u[i] = 1.0
                _exact_g(g, D, f, q, lam, m, n)
                for j in range(n):
                    v[j] = 1.0
                _rebuild(K, KD, D, f, g, lam, m, n)
                continue
            for j in range(n):
                v[j] = q[j] / KTu[j]
            if log_domain:
                umax = u[0]
                umin = u[0]
                for i in range(m):
                    if u[i] > umax:
                        umax = u[i]
                    if u[i] < umin:
                        umin = u[i]
                vmax = v[0]
                vmin = v[0]
                for j in range(n):
                    if v[j] > vmax:
                        vmax = v[j]
                    if v[j] < vmin:
                        vmin = v[j]
                if umax > ABSORB_HI or umin < ABSORB_LO or vmax > ABSORB_HI or vmin < ABSORB_LO:
                    for i in range(m):
                        f[i] += lam * log(u[i])
                        u[i] = 1.0
                    for j in range(n):
                        g[j] += lam * log(v[j])
                        v[j] = 1.0
                    _rebuild(K, KD, D, f, g, lam, m, n)

    if status == 1:
        return None, 0.0, it, False, None, 0.0, 0.0, UNDERFLOW, None

    plan = np.empty((m, n))
    cdef double[:, ::1] P = plan
    alpha = np.empty(m)
    cdef double[::1] al = alpha
    beta = np.empty(n)
    cdef double[::1] be = beta
    cdef double dist = 0.0, row_err = 0.0, rs
    with nogil:
        for i in range(m):
            rs = 0.0
            for j in range(n):
                P[i, j] = u[i] * K[i, j] * v[j]
                rs += P[i, j]
                dist += P[i, j] * D[i, j]
            if fabs(rs - p[i]) > row_err:
                row_err = fabs(rs - p[i])
            al[i] = -(f[i] + lam * log(u[i]))
        col_err = 0.0
        for j in range(n):
            be[j] = g[j] + lam * log(v[j])
            rs = 0.0
            for i in range(m):
                rs += P[i, j]
            if fabs(rs - q[j]) > col_err:
                col_err = fabs(rs - q[j])
    return plan, dist, it, converged, alpha, row_err, col_err, OK, beta


def complete_linkage(D_in):
    Dc = np.array(D_in, dtype=np.float64, order="C")
    cdef double[:, ::1] D = Dc
    cdef Py_ssize_t n = D.shape[0], step, i, j, k, bi, bj
    cdef long a, b, ba, bb
    cdef double best, dv, dk
    out = np.zeros((max(n - 1, 0), 4))
    cdef double[:, ::1] o = out
    cdef long* ids = <long*> malloc(max(n, 1) * sizeof(long))
    cdef char* active = <char*> malloc(max(n, 1) * sizeof(char))
    with nogil:
        for i in range(n):
            ids[i] = i
            active[i] = 1
        for step in range(n - 1):
            best = INFINITY
            ba = 2 * n
            bb = 2 * n
            bi = -1
            bj = -1
            for i in range(n):
                if not active[i]:
                    continue
                for j in range(i + 1, n):
                    if not active[j]:
                        continue
                    dv = D[i, j]
                    a = ids[i]
                    b = ids[j]
                    if a > b:
                        a, b = b, a
                    if dv < best or (dv == best and (a < ba or (a == ba and b < bb))):
                        best = dv
                        ba = a
                        bb = b
                        bi = i
                        bj = j
            o[step, 0] = ba
            o[step, 1] = bb
            o[step, 2] = best
            o[step, 3] = n + step
            for k in range(n):
                if active[k] and k != bi and k != bj:
                    dk = D[bi, k] if D[bi, k] > D[bj, k] else D[bj, k]
                    D[bi, k] = dk
                    D[k, bi] = dk
            ids[bi] = n + step
            active[bj] = 0
    free(ids)
    free(active)
    return out


# ---------------------------------------------------------------------------
# call-center day

cdef enum:
    ARRIVE = 0
    ABANDON = 1
    DONE_BASIC = 2
    DONE_PREMIUM = 3
    DONE_TECH = 4

cdef struct Event:
    double t
    long seq
    int kind
    long c


cdef struct Heap:
    Event* data
    long size


cdef inline bint _less(Event* a, Event* b) noexcept nogil:
    return a.t < b.t or (a.t == b.t and a.seq < b.seq)


cdef void _push(Heap* h, double t, long seq, int kind, long c) noexcept nogil:
    cdef long i = h.size, parent
    cdef Event e
    e.t = t
    e.seq = seq
    e.kind = kind
    e.c = c
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(&e, &h.data[parent]):
            h.data[i] = h.data[parent]
            i = parent
        else:
            break
    h.data[i] = e


cdef Event _pop(Heap* h) noexcept nogil:
    cdef Event top = h.data[0]
    cdef Event last
    cdef long i = 0, child, n
    h.size -= 1
    n = h.size
    if n > 0:
        last = h.data[n]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and _less(&h.data[child + 1], &h.data[child]):
                child += 1
            if _less(&h.data[child], &last):
                h.data[i] = h.data[child]
                i = child
            else:
                break
        h.data[i] = last
    return top


cdef struct Fifo:
    long* buf
    long head
    long tail


cdef struct Day:
    # shared mutable state for the helpers below
    double close
    double hour
    long n_hours
    double mean_basic
    double mean_premium
    double mean_tech
    long seq
    double* hourly      # n_hours x 5, row-major
    double overwork[3]
    long free_ops[3]
    long live[4]
    double soj[2]
    long done[2]
    i8* status
    double* tech_enter


cdef void _busy(Day* s, double a, double e) noexcept nogil:
    cdef long h = <long>(a / s.hour)
    cdef double lo, hi
    while h < s.n_hours and h * s.hour < e:
        lo = a if a > h * s.hour else h * s.hour
        hi = e if e < (h + 1) * s.hour else (h + 1) * s.hour
        if hi > lo:
            s.hourly[h * 5] += hi - lo
        h += 1


cdef void _start_initial(Day* s, Heap* hp, long c, int op, double t,
                         const double* u_init) noexcept nogil:
    cdef double mean = s.mean_basic if op == 0 else s.mean_premium
    cdef double end, after
    s.status[c] = 1
    end = t + (-mean * log(1.0 - u_init[c]))
    _push(hp, end, s.seq, DONE_BASIC if op == 0 else DONE_PREMIUM, c)
    s.seq += 1
    _busy(s, t, end)
    after = end - (t if t > s.close else s.close)
    if after > 0.0:
        s.overwork[op] += after


cdef void _start_tech(Day* s, Heap* hp, long c, double t, const double* u_tech,
                      const i8* premium) noexcept nogil:
    cdef double end, after, w
    cdef long h
    cdef int col
    s.status[c] = 4
    end = t + (-s.mean_tech * log(1.0 - u_tech[c]))
    _push(hp, end, s.seq, DONE_TECH, c)
    s.seq += 1
    _busy(s, t, end)
    after = end - (t if t > s.close else s.close)
    if after > 0.0:
        s.overwork[2] += after
    h = <long>(t / s.hour)
    if h < s.n_hours:
        w = t - s.tech_enter[c]
        col = 2 if premium[c] else 1
        if w > s.hourly[h * 5 + col]:
            s.hourly[h * 5 + col] = w


cdef void _complete(Day* s, long c, double t, const double* arrival,
                    const i8* premium) noexcept nogil:
    cdef int k = 1 if premium[c] else 0
    s.status[c] = 5
    s.soj[k] += t - arrival[c]
    s.done[k] += 1


cdef long _pop_live(Day* s, Fifo* qu, int idx) noexcept nogil:
    cdef long c
    while qu.head < qu.tail:
        c = qu.buf[qu.head]
        qu.head += 1
        if s.status[c] == 0:
            s.live[idx] -= 1
            return c
    return -1


def simulate_day(arrival_in, premium_in, impatient_in, patience_in, tech_in,
                 u_init_in, u_tech_in, long n_basic, long n_premium, long n_tech,
                 double mean_basic, double mean_premium, double mean_tech,
                 double close, double hour, double snap_interval, log=None):
    if log is not None:
        raise NotImplementedError("audit log requires the pure-Python backend")
    cdef const double[::1] arrival = np.ascontiguousarray(arrival_in, dtype=np.float64)
    cdef const i8[::1] premium = np.ascontiguousarray(premium_in, dtype=np.int8)
    cdef const i8[::1] impatient = np.ascontiguousarray(impatient_in, dtype=np.int8)
    cdef const double[::1] patience = np.ascontiguousarray(patience_in, dtype=np.float64)
    cdef const i8[::1] tech = np.ascontiguousarray(tech_in, dtype=np.int8)
    cdef const double[::1] u_init = np.ascontiguousarray(u_init_in, dtype=np.float64)
    cdef const double[::1] u_tech = np.ascontiguousarray(u_tech_in, dtype=np.float64)
    cdef long n = arrival.shape[0]
    cdef long n_hours = <long>ceil(close / hour)
    cdef long n_snap = <long>ceil(close / snap_interval)
    states = np.zeros((n_snap, 4), dtype=np.int64)
    hourly = np.zeros((n_hours, 5))
    cdef cnp.int64_t[:, ::1] st = states
    cdef double[:, ::1] hr = hourly
    status_arr = np.zeros(max(n, 1), dtype=np.int8)
    tech_enter_arr = np.zeros(max(n, 1))
    cdef i8[::1] status_v = status_arr
    cdef double[::1] tech_enter_v = tech_enter_arr
    qbuf = np.empty((4, max(n, 1)), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] qb = qbuf

    cdef Day s
    cdef Heap hp
    cdef Fifo fq[4]
    cdef long nxt = 0, snap = 0, n_ab = 0, n_imp = 0, c, c2, h, k
    cdef double t
    cdef int kind
    cdef bint queued, take_arrival
    cdef Event ev

    s.close = close
    s.hour = hour
    s.n_hours = n_hours
    s.mean_basic = mean_basic
    s.mean_premium = mean_premium
    s.mean_tech = mean_tech
    s.seq = n
    s.hourly = &hr[0, 0]
    for k in range(3):
        s.overwork[k] = 0.0
    s.free_ops[0] = n_basic
    s.free_ops[1] = n_premium
    s.free_ops[2] = n_tech
    for k in range(4):
        s.live[k] = 0
        fq[k].buf = <long*> &qb[k, 0]
        fq[k].head = 0
        fq[k].tail = 0
    s.soj[0] = 0.0
    s.soj[1] = 0.0
    s.done[0] = 0
    s.done[1] = 0
    s.status = &status_v[0]
    s.tech_enter = &tech_enter_v[0]
    # each customer schedules at most three events at a time
    hp.data = <Event*> malloc((3 * n + 8) * sizeof(Event))
    hp.size = 0

    with nogil:
        while True:
            if nxt < n and (hp.size == 0 or arrival[nxt] < hp.data[0].t
                            or (arrival[nxt] == hp.data[0].t and nxt < hp.data[0].seq)):
                t = arrival[nxt]
                kind = ARRIVE
                c = nxt
                nxt += 1
            elif hp.size > 0:
                ev = _pop(&hp)
                t = ev.t
                kind = ev.kind
                c = ev.c
            else:
                break
            while snap < n_snap and snap * snap_interval <= t:
                for k in range(4):
                    st[snap, k] = s.live[k]
                snap += 1

            if kind == ARRIVE:
                h = <long>(t / hour)
                if h < n_hours:
                    hr[h, 4] += 1
                if impatient[c]:
                    n_imp += 1
                queued = False
                if premium[c]:
                    if s.free_ops[1] > 0:
                        s.free_ops[1] -= 1
                        _start_initial(&s, &hp, c, 1, t, &u_init[0])
                    else:
                        fq[1].buf[fq[1].tail] = c
                        fq[1].tail += 1
                        s.live[1] += 1
                        queued = True
                else:
                    if s.free_ops[0] > 0:
                        s.free_ops[0] -= 1
                        _start_initial(&s, &hp, c, 0, t, &u_init[0])
                    elif s.free_ops[1] > 0:
                        s.free_ops[1] -= 1
                        _start_initial(&s, &hp, c, 1, t, &u_init[0])
                    else:
                        fq[0].buf[fq[0].tail] = c
                        fq[0].tail += 1
                        s.live[0] += 1
                        queued = True
                if queued and impatient[c]:
                    _push(&hp, t + patience[c], s.seq, ABANDON, c)
                    s.seq += 1
            elif kind == ABANDON:
                if s.status[c] == 0:
                    s.status[c] = 2
                    n_ab += 1
                    s.live[1 if premium[c] else 0] -= 1
                    h = <long>(t / hour)
                    if h < n_hours:
                        hr[h, 3] += 1
            elif kind == DONE_BASIC or kind == DONE_PREMIUM:
                # finish initial service
                if tech[c]:
                    s.tech_enter[c] = t
                    if s.free_ops[2] > 0:
                        s.free_ops[2] -= 1
                        _start_tech(&s, &hp, c, t, &u_tech[0], &premium[0])
                    else:
                        s.status[c] = 3
                        k = 3 if premium[c] else 2
                        fq[k].buf[fq[k].tail] = c
                        fq[k].tail += 1
                        s.live[k] += 1
                else:
                    _complete(&s, c, t, &arrival[0], &premium[0])
                if kind == DONE_BASIC:
                    c2 = _pop_live(&s, &fq[0], 0)
                    if c2 >= 0:
                        _start_initial(&s, &hp, c2, 0, t, &u_init[0])
                    else:
                        s.free_ops[0] += 1
                else:
                    c2 = _pop_live(&s, &fq[1], 1)
                    if c2 < 0:
                        c2 = _pop_live(&s, &fq[0], 0)
                    if c2 >= 0:
                        _start_initial(&s, &hp, c2, 1, t, &u_init[0])
                    else:
                        s.free_ops[1] += 1
            else:
                _complete(&s, c, t, &arrival[0], &premium[0])
                if fq[3].head < fq[3].tail:
                    c2 = fq[3].buf[fq[3].head]
                    fq[3].head += 1
                    s.live[3] -= 1
                elif fq[2].head < fq[2].tail:
                    c2 = fq[2].buf[fq[2].head]
                    fq[2].head += 1
                    s.live[2] -= 1
                else:
                    c2 = -1
                if c2 >= 0:
                    _start_tech(&s, &hp, c2, t, &u_tech[0], &premium[0])
                else:
                    s.free_ops[2] += 1

        while snap < n_snap:
            for k in range(4):
                st[snap, k] = s.live[k]
            snap += 1

    free(hp.data)
    kpis = np.array([
        s.soj[0] / s.done[0] if s.done[0] else 0.0,
        s.soj[1] / s.done[1] if s.done[1] else 0.0,
        s.overwork[0] / n_basic,
        s.overwork[1] / n_premium,
        s.overwork[2] / n_tech,
    ])
    counts = np.array([n, s.done[0] + s.done[1], n_ab, n_imp], dtype=np.int64)
    return kpis, counts, states, hourly
