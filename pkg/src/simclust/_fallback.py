"""Pure-Python implementations of the hot kernels.

These are the reference semantics for ``_kernels.pyx``. Both backends take the
same arguments and return the same tuples; the call-center kernel is
bit-identical across backends, the Sinkhorn kernel agrees to rounding.
"""

import heapq
import math
from collections import deque

import numpy as np

# Sinkhorn status codes
OK = 0
UNDERFLOW = 1

# rescale thresholds for the stabilized (log-domain) iteration
_ABSORB_HI = 1e50
_ABSORB_LO = 1e-50
# scaling denominators below this are treated as underflow
_TINY = 1e-200


def _lse_rows(x):
    m = x.max(axis=1)
    return m + np.log(np.exp(x - m[:, None]).sum(axis=1))


def _lse_cols(x):
    m = x.max(axis=0)
    return m + np.log(np.exp(x - m[None, :]).sum(axis=0))


def sinkhorn_kernel(p, q, D, lam, max_iter, tol, marginal_tol, log_domain, g_init=None):
    """Alternating scaling on ``Q = exp(-D / lam)``.

    Returns ``(plan, distance, iterations, converged, alpha, row_err, col_err,
    status, beta)``. ``alpha = -lam * log(u)`` and ``beta = lam * log(v)``,
    absorbed potentials included.
    The returned plan is ``diag(u) Q diag(v)`` for the last ``u`` and the
    ``v`` it was computed from, so its row marginals are exact. Marginal
    errors are max-abs deviations. ``g_init`` warm-starts the column
    potential (log domain only).
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    m, n = D.shape
    f = np.zeros(m)
    g = np.zeros(n) if g_init is None or not log_domain else np.array(g_init, dtype=np.float64)
    if log_domain:
        f = lam * np.log(p) - lam * _lse_rows((g[None, :] - D) / lam)
        K = np.exp((f[:, None] + g[None, :] - D) / lam)
    else:
        K = np.exp(-D / lam)
    KD = K * D
    v = np.ones(n)
    u = np.ones(m)
    prev = math.nan
    d = 0.0
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        Kv = K @ v
        if not np.all(Kv > _TINY):
            if not log_domain:
                return None, 0.0, it, False, None, 0.0, 0.0, UNDERFLOW, None
            # exact log-domain row update, then continue scaling
            g = g + lam * np.log(v)
            f = lam * np.log(p) - lam * _lse_rows((g[None, :] - D) / lam)
            v = np.ones(n)
            K = np.exp((f[:, None] + g[None, :] - D) / lam)
            KD = K * D
            Kv = K @ v
        u = p / Kv
        d = float(u @ (KD @ v))
        KTu = K.T @ u
        col_err = float(np.abs(v * KTu - q).max())
        if it > 1 and abs(d - prev) <= tol * abs(d) and col_err <= marginal_tol:
            converged = True
            break
        prev = d
        if not np.all(KTu > _TINY):
            if not log_domain:
                return None, 0.0, it, False, None, 0.0, 0.0, UNDERFLOW, None
            f = f + lam * np.log(u)
            g = lam * np.log(q) - lam * _lse_cols((f[:, None] - D) / lam)
            u = np.ones(m)
            v = np.ones(n)
            K = np.exp((f[:, None] + g[None, :] - D) / lam)
            KD = K * D
            continue
        v = q / KTu
        if log_domain and (
            u.max() > _ABSORB_HI or u.min() < _ABSORB_LO
            or v.max() > _ABSORB_HI or v.min() < _ABSORB_LO
        ):
            f = f + lam * np.log(u)
            g = g + lam * np.log(v)
            u = np.ones(m)
            v = np.ones(n)
            K = np.exp((f[:, None] + g[None, :] - D) / lam)
            KD = K * D
            # the plan is unchanged by absorption, so keep ``prev``
    plan = u[:, None] * K * v[None, :]
    alpha = -(f + lam * np.log(u))
    beta = g + lam * np.log(v)
    row_err = float(np.abs(plan.sum(axis=1) - p).max())
    col_err = float(np.abs(plan.sum(axis=0) - q).max())
    return plan, float((plan * D).sum()), it, converged, alpha, row_err, col_err, OK, beta


def complete_linkage(D):
    """Complete-linkage merges via the Lance-Williams max update.

    Returns an ``(N-1, 4)`` float array of ``(left_id, right_id, height,
    new_id)`` rows. Among minimizers the lowest ``(left_id, right_id)`` pair
    wins; ``left_id < right_id`` always.
    """
    D = np.array(D, dtype=np.float64)
    n = D.shape[0]
    ids = list(range(n))
    active = [True] * n
    out = np.zeros((max(n - 1, 0), 4))
    for step in range(n - 1):
        best = math.inf
        ba = bb = n * 2
        bi = bj = -1
        for i in range(n):
            if not active[i]:
                continue
            row = D[i]
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                dv = row[j]
                a, b = ids[i], ids[j]
                if a > b:
                    a, b = b, a
                if dv < best or (dv == best and (a < ba or (a == ba and b < bb))):
                    best, ba, bb, bi, bj = dv, a, b, i, j
        new_id = n + step
        out[step] = (ba, bb, best, new_id)
        for k in range(n):
            if active[k] and k != bi and k != bj:
                dk = max(D[bi, k], D[bj, k])
                D[bi, k] = dk
                D[k, bi] = dk
        ids[bi] = new_id
        active[bj] = False
    return out


# call-center event codes
ARRIVE, ABANDON, DONE_BASIC, DONE_PREMIUM, DONE_TECH = 0, 1, 2, 3, 4
BASIC, PREMIUM, TECH = 0, 1, 2


def simulate_day(arrival, premium, impatient, patience, tech, u_init, u_tech,
                 n_basic, n_premium, n_tech, mean_basic, mean_premium, mean_tech,
                 close, hour, snap_interval, log=None):
    """Event loop for one day of the two-class call center.

    Returns ``(kpis, counts, states, hourly)``:
    kpis   -- Y1..Y5 (minutes)
    counts -- arrivals, completions, abandonments, impatient arrivals
    states -- queue lengths at each snapshot epoch, shape ``(n_snap, 4)``
    hourly -- per hour: busy operator-minutes, max regular tech wait,
              max premium tech wait, abandonments, arrivals
    If ``log`` is a list, one audit record per processed event is appended.
    """
    n = len(arrival)
    n_hours = int(math.ceil(close / hour))
    n_snap = int(math.ceil(close / snap_interval))
    states = np.zeros((n_snap, 4), dtype=np.int64)
    hourly = np.zeros((n_hours, 5))
    means = (mean_basic, mean_premium)

    free = [n_basic, n_premium, n_tech]
    overwork = [0.0, 0.0, 0.0]
    q_reg, q_prem, t_reg, t_prem = deque(), deque(), deque(), deque()
    live = [0, 0, 0, 0]
    # 0 waiting initial, 1 in initial service, 2 abandoned, 3 waiting tech,
    # 4 in tech, 5 done
    status = [0] * n
    tech_enter = [0.0] * n

    soj = [0.0, 0.0]
    done = [0, 0]
    n_ab = 0
    n_imp = 0
    heap = []
    seq = n
    nxt = 0
    snap = 0

    def busy(s, e):
        h = int(s / hour)
        while h < n_hours and h * hour < e:
            lo = s if s > h * hour else h * hour
            hi = e if e < (h + 1) * hour else (h + 1) * hour
            if hi > lo:
                hourly[h, 0] += hi - lo
            h += 1

    def start_initial(c, op, t):
        nonlocal seq
        status[c] = 1
        end = t + (-means[op] * math.log(1.0 - u_init[c]))
        heapq.heappush(heap, (end, seq, DONE_BASIC if op == BASIC else DONE_PREMIUM, c))
        seq += 1
        busy(t, end)
        after = end - (t if t > close else close)
        if after > 0.0:
            overwork[op] += after

    def start_tech(c, t):
        nonlocal seq
        status[c] = 4
        end = t + (-mean_tech * math.log(1.0 - u_tech[c]))
        heapq.heappush(heap, (end, seq, DONE_TECH, c))
        seq += 1
        busy(t, end)
        after = end - (t if t > close else close)
        if after > 0.0:
            overwork[TECH] += after
        h = int(t / hour)
        if h < n_hours:
            w = t - tech_enter[c]
            col = 2 if premium[c] else 1
            if w > hourly[h, col]:
                hourly[h, col] = w

    def complete(c, t):
        status[c] = 5
        k = 1 if premium[c] else 0
        soj[k] += t - arrival[c]
        done[k] += 1

    def pop_live(qu, idx):
        while qu:
            c = qu.popleft()
            if status[c] == 0:
                live[idx] -= 1
                return c
        return -1

    def finish_initial(c, t):
        if tech[c]:
            tech_enter[c] = t
            if free[TECH] > 0:
                free[TECH] -= 1
                start_tech(c, t)
            else:
                status[c] = 3
                if premium[c]:
                    t_prem.append(c)
                    live[3] += 1
                else:
                    t_reg.append(c)
                    live[2] += 1
        else:
            complete(c, t)

    while True:
        if nxt < n and (not heap or (arrival[nxt], nxt) < heap[0][:2]):
            t, kind, c = arrival[nxt], ARRIVE, nxt
            nxt += 1
        elif heap:
            t, _, kind, c = heapq.heappop(heap)
        else:
            break
        while snap < n_snap and snap * snap_interval <= t:
            states[snap] = live
            snap += 1

        if kind == ARRIVE:
            h = int(t / hour)
            if h < n_hours:
                hourly[h, 4] += 1
            if impatient[c]:
                n_imp += 1
            queued = False
            if premium[c]:
                if free[PREMIUM] > 0:
                    free[PREMIUM] -= 1
                    start_initial(c, PREMIUM, t)
                else:
                    q_prem.append(c)
                    live[1] += 1
                    queued = True
            else:
                if free[BASIC] > 0:
                    free[BASIC] -= 1
                    start_initial(c, BASIC, t)
                elif free[PREMIUM] > 0:
                    free[PREMIUM] -= 1
                    start_initial(c, PREMIUM, t)
                else:
                    q_reg.append(c)
                    live[0] += 1
                    queued = True
            if queued and impatient[c]:
                heapq.heappush(heap, (t + patience[c], seq, ABANDON, c))
                seq += 1
        elif kind == ABANDON:
            if status[c] == 0:
                status[c] = 2
                n_ab += 1
                live[1 if premium[c] else 0] -= 1
                h = int(t / hour)
                if h < n_hours:
                    hourly[h, 3] += 1
        elif kind == DONE_BASIC:
            finish_initial(c, t)
            c2 = pop_live(q_reg, 0)
            if c2 >= 0:
                start_initial(c2, BASIC, t)
            else:
                free[BASIC] += 1
        elif kind == DONE_PREMIUM:
            finish_initial(c, t)
            c2 = pop_live(q_prem, 1)
            if c2 < 0:
                c2 = pop_live(q_reg, 0)
            if c2 >= 0:
                start_initial(c2, PREMIUM, t)
            else:
                free[PREMIUM] += 1
        else:
            complete(c, t)
            if t_prem:
                c2 = t_prem.popleft()
                live[3] -= 1
            elif t_reg:
                c2 = t_reg.popleft()
                live[2] -= 1
            else:
                c2 = -1
            if c2 >= 0:
                start_tech(c2, t)
            else:
                free[TECH] += 1

        if log is not None:
            log.append((t, kind, c, tuple(free), tuple(live)))

    while snap < n_snap:
        states[snap] = live
        snap += 1

    kpis = np.array([
        soj[0] / done[0] if done[0] else 0.0,
        soj[1] / done[1] if done[1] else 0.0,
        overwork[BASIC] / n_basic,
        overwork[PREMIUM] / n_premium,
        overwork[TECH] / n_tech,
    ])
    counts = np.array([n, done[0] + done[1], n_ab, n_imp], dtype=np.int64)
    return kpis, counts, states, hourly
