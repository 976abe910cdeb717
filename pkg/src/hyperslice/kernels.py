"""Inner loops of the local searches, in numba and numpy flavours.

Search state lives in preallocated arrays so a chunk of iterations can run
inside one compiled call and then hand control back to Python for the clock
check.  The numba and numpy kernels take the same arguments, consume the same
uniform draws and produce bit-identical state.

Scalar state is packed into the int64 vector ``st`` (see the ``ST_*`` indices).
Fitness is compared in the integer-scaled form

    PSI = k^2 * S - (k * sum(pc^2) - sum(pc)^2)  ==  k^2 * psi

where ``S`` is the weighted sliced sum and ``pc`` the per-plane reduced
slice counts, so the variance penalty never goes through floating point.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

ST_S = 0  # weighted sum over covered edges
ST_PHI = 1  # number of covered reduced edges
ST_WC = 2  # multiplicity-weighted covered count
ST_T = 3
ST_TW = 4
ST_SUMPC = 5
ST_SUMPC2 = 6
ST_BEST_PHI = 7
ST_BEST_WC = 8
ST_ITERS = 9
ST_FULL = 10
ST_WBUMPS = 11
ST_SIZE = 12

UNIFORMS_PER_STEP = 6


def scaled_psi(k: int, S: int, sum_pc: int, sum_pc2: int, variance_penalty: bool = True) -> int:
    if k == 0:
        return 0
    if not variance_penalty:
        return k * k * S
    return k * k * S - (k * sum_pc2 - sum_pc * sum_pc)


# ---------------------------------------------------------------------------
# move decoding (shared arithmetic, duplicated for numba)


def _valid_delta_py(c, u, C, d):
    lo = max(-d, -C - c)
    hi = min(d, C - c)
    count = hi - lo  # zero is excluded and always lies in [lo, hi]
    r = min(int(u * count), count - 1)
    delta = lo + r
    if delta >= 0:
        delta += 1
    return delta


_valid_delta = njit(_valid_delta_py)


def decode_move(u, k, free, coeffs, C, d):
    """``(plane, j1, delta1, j2, delta2)`` for one row of uniforms; ``j2 = -1`` when one coordinate moves."""
    f = len(free)
    p = min(int(u[0] * k), k - 1)
    m = 1 + min(int(u[1] * 2), 1) if f >= 2 else 1
    i1 = min(int(u[2] * f), f - 1)
    j1 = int(free[i1])
    d1 = _valid_delta_py(int(coeffs[p, j1]), float(u[4]), C, d)
    j2, d2 = -1, 0
    if m == 2:
        i2 = min(int(u[3] * (f - 1)), f - 2)
        if i2 >= i1:
            i2 += 1
        j2 = int(free[i2])
        d2 = _valid_delta_py(int(coeffs[p, j2]), float(u[5]), C, d)
    return p, j1, d1, j2, d2


# ---------------------------------------------------------------------------
# adaptive edge-weighted hill climbing


@njit
def _hc_chunk_numba(coords, elo, ehi, mult, weighted, penalty, bias_p, bias_q,
                    coeffs, dots, side, cut, cnt, pc, weights, st, best_coeffs,
                    free, C, d, max_iter, weight_period, weight_limit, uniforms,
                    tr_acc, tr_old, tr_new, tr_phi, tr_wmin, tr_wmax, vptr, vedges):
    k = coeffs.shape[0]
    V = coords.shape[0]
    E = elo.shape[0]
    f = free.shape[0]
    nd = np.empty(V, np.int64)
    ns = np.empty(V, np.int8)
    touched = np.empty(E, np.int64)  # edges incident to a vertex whose side changed
    tnew = np.empty(E, np.bool_)
    stamp = np.zeros(E, np.int64)
    tracing = tr_acc.shape[0] > 0
    kk = k * k
    used = 0
    for it in range(uniforms.shape[0]):
        if st[ST_T] >= max_iter or st[ST_FULL] != 0:
            break
        used += 1
        p = min(int(uniforms[it, 0] * k), k - 1)
        m = 1
        if f >= 2:
            m = 1 + min(int(uniforms[it, 1] * 2), 1)
        i1 = min(int(uniforms[it, 2] * f), f - 1)
        j1 = free[i1]
        d1 = _valid_delta(coeffs[p, j1], uniforms[it, 4], C, d)
        j2 = -1
        d2 = 0
        if m == 2:
            i2 = min(int(uniforms[it, 3] * (f - 1)), f - 2)
            if i2 >= i1:
                i2 += 1
            j2 = free[i2]
            d2 = _valid_delta(coeffs[p, j2], uniforms[it, 5], C, d)

        nt = 0
        for v in range(V):
            x = dots[p, v] + d1 * coords[v, j1]
            if j2 >= 0:
                x += d2 * coords[v, j2]
            nd[v] = x
            y = x * bias_q - bias_p
            sv = 1 if y > 0 else (-1 if y < 0 else 0)
            ns[v] = sv
            if sv != side[p, v]:
                for q in range(vptr[v], vptr[v + 1]):
                    e = vedges[q]
                    if stamp[e] != it + 1:
                        stamp[e] = it + 1
                        touched[nt] = e
                        nt += 1

        dS = 0
        dphi = 0
        dwc = 0
        dpc = 0
        for q in range(nt):
            e = touched[q]
            a = ns[elo[e]]
            b = ns[ehi[e]]
            now = a != 0 and b != 0 and a != b
            tnew[q] = now
            if now != cut[p, e]:
                contrib = weights[e] * mult[e] if weighted else weights[e]
                if now:
                    dpc += 1
                    if cnt[e] == 0:
                        dS += contrib
                        dphi += 1
                        dwc += mult[e]
                else:
                    dpc -= 1
                    if cnt[e] == 1:
                        dS -= contrib
                        dphi -= 1
                        dwc -= mult[e]

        old_pc = pc[p]
        newpc = old_pc + dpc
        s1 = st[ST_SUMPC] - old_pc + newpc
        s2 = st[ST_SUMPC2] - old_pc * old_pc + newpc * newpc
        if penalty:
            psi_old = kk * st[ST_S] - (k * st[ST_SUMPC2] - st[ST_SUMPC] * st[ST_SUMPC])
            psi_new = kk * (st[ST_S] + dS) - (k * s2 - s1 * s1)
        else:
            psi_old = kk * st[ST_S]
            psi_new = kk * (st[ST_S] + dS)

        accepted = psi_new >= psi_old
        if accepted:
            if psi_new > psi_old:
                st[ST_TW] = 0
            if dphi > 0:
                st[ST_T] = 0
            coeffs[p, j1] += d1
            if j2 >= 0:
                coeffs[p, j2] += d2
            for v in range(V):
                dots[p, v] = nd[v]
                side[p, v] = ns[v]
            for q in range(nt):
                e = touched[q]
                if tnew[q] != cut[p, e]:
                    if tnew[q]:
                        cnt[e] += 1
                    else:
                        cnt[e] -= 1
                    cut[p, e] = tnew[q]
            pc[p] = newpc
            st[ST_S] += dS
            st[ST_PHI] += dphi
            st[ST_WC] += dwc
            st[ST_SUMPC] = s1
            st[ST_SUMPC2] = s2
            if st[ST_PHI] > st[ST_BEST_PHI] or (st[ST_PHI] == st[ST_BEST_PHI] and st[ST_WC] > st[ST_BEST_WC]):
                st[ST_BEST_PHI] = st[ST_PHI]
                st[ST_BEST_WC] = st[ST_WC]
                for i in range(k):
                    for j in range(coeffs.shape[1]):
                        best_coeffs[i, j] = coeffs[i, j]
            if st[ST_PHI] == E:
                st[ST_FULL] = 1

        if st[ST_TW] > weight_period:
            for e in range(E):
                if cnt[e] == 0 and weights[e] < weight_limit:
                    weights[e] += 1
            st[ST_TW] = 0
            st[ST_WBUMPS] += 1

        st[ST_TW] += 1
        st[ST_T] += 1
        st[ST_ITERS] += 1

        if tracing:
            tr_acc[it] = accepted
            tr_old[it] = psi_old
            tr_new[it] = psi_new
            tr_phi[it] = st[ST_PHI]
            wmin = weights[0] if E > 0 else 1
            wmax = wmin
            for e in range(E):
                if weights[e] < wmin:
                    wmin = weights[e]
                if weights[e] > wmax:
                    wmax = weights[e]
            tr_wmin[it] = wmin
            tr_wmax[it] = wmax
    return used


def _hc_chunk_numpy(coords, elo, ehi, mult, weighted, penalty, bias_p, bias_q,
                    coeffs, dots, side, cut, cnt, pc, weights, st, best_coeffs,
                    free, C, d, max_iter, weight_period, weight_limit, uniforms,
                    tr_acc, tr_old, tr_new, tr_phi, tr_wmin, tr_wmax, vptr=None, vedges=None):
    k = coeffs.shape[0]
    E = elo.shape[0]
    tracing = tr_acc.shape[0] > 0
    kk = k * k
    used = 0
    contrib_base = weights  # aliased; weights mutate in place
    for it in range(uniforms.shape[0]):
        if st[ST_T] >= max_iter or st[ST_FULL] != 0:
            break
        used += 1
        p, j1, d1, j2, d2 = decode_move(uniforms[it], k, free, coeffs, C, d)
        nd = dots[p] + d1 * coords[:, j1]
        if j2 >= 0:
            nd = nd + d2 * coords[:, j2]
        ns = np.sign(nd * bias_q - bias_p).astype(np.int8)
        a = ns[elo]
        b = ns[ehi]
        nc = (a != 0) & (b != 0) & (a != b)
        old = cut[p]
        gained = nc & ~old & (cnt == 0)
        lost = ~nc & old & (cnt == 1)
        contrib = contrib_base * mult if weighted else contrib_base
        dS = int(contrib[gained].sum() - contrib[lost].sum())
        dphi = int(gained.sum() - lost.sum())
        dwc = int(mult[gained].sum() - mult[lost].sum())
        newpc = int(nc.sum())

        old_pc = int(pc[p])
        s1 = int(st[ST_SUMPC]) - old_pc + newpc
        s2 = int(st[ST_SUMPC2]) - old_pc * old_pc + newpc * newpc
        S = int(st[ST_S])
        if penalty:
            psi_old = kk * S - (k * int(st[ST_SUMPC2]) - int(st[ST_SUMPC]) ** 2)
            psi_new = kk * (S + dS) - (k * s2 - s1 * s1)
        else:
            psi_old = kk * S
            psi_new = kk * (S + dS)

        accepted = psi_new >= psi_old
        if accepted:
            if psi_new > psi_old:
                st[ST_TW] = 0
            if dphi > 0:
                st[ST_T] = 0
            coeffs[p, j1] += d1
            if j2 >= 0:
                coeffs[p, j2] += d2
            dots[p] = nd
            side[p] = ns
            cnt += nc.astype(cnt.dtype) - old.astype(cnt.dtype)
            cut[p] = nc
            pc[p] = newpc
            st[ST_S] += dS
            st[ST_PHI] += dphi
            st[ST_WC] += dwc
            st[ST_SUMPC] = s1
            st[ST_SUMPC2] = s2
            if st[ST_PHI] > st[ST_BEST_PHI] or (st[ST_PHI] == st[ST_BEST_PHI] and st[ST_WC] > st[ST_BEST_WC]):
                st[ST_BEST_PHI] = st[ST_PHI]
                st[ST_BEST_WC] = st[ST_WC]
                best_coeffs[:] = coeffs
            if st[ST_PHI] == E:
                st[ST_FULL] = 1

        if st[ST_TW] > weight_period:
            bump = cnt == 0
            weights[bump] = np.minimum(weights[bump] + 1, weight_limit)
            st[ST_TW] = 0
            st[ST_WBUMPS] += 1

        st[ST_TW] += 1
        st[ST_T] += 1
        st[ST_ITERS] += 1

        if tracing:
            tr_acc[it] = accepted
            tr_old[it] = psi_old
            tr_new[it] = psi_new
            tr_phi[it] = st[ST_PHI]
            tr_wmin[it] = weights.min() if E else 1
            tr_wmax[it] = weights.max() if E else 1
    return used


def vertex_edge_csr(n_vertices: int, elo: np.ndarray, ehi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Incident edges of every vertex as ``(offsets, edge ids)``."""
    ends = np.concatenate([elo, ehi])
    ids = np.concatenate([np.arange(elo.size), np.arange(ehi.size)]).astype(np.int64)
    order = np.argsort(ends, kind="stable")
    counts = np.bincount(ends, minlength=n_vertices)
    vptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=vptr[1:])
    return vptr, ids[order]


def hill_climb_chunk(*args, use_numba: bool | None = None) -> int:
    """Run up to ``len(uniforms)`` iterations; returns how many were consumed.

    Positional arguments follow the kernel signature, ending with the CSR
    vertex-to-edge adjacency from :func:`vertex_edge_csr`.
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    return (_hc_chunk_numba if use_numba else _hc_chunk_numpy)(*args)


# ---------------------------------------------------------------------------
# incidence hashing

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_GOLD = 0x9E3779B97F4A7C15
ROW_SEED_A = 0x243F6A8885A308D3
ROW_SEED_B = 0x13198A2E03707344
MAT_SEED_A = 0xA4093822299F31D0
MAT_SEED_B = 0x082EFA98EC4E6C89
_MASK = (1 << 64) - 1


def _mix_py(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


@njit
def _mix_nb(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def row_hash_py(bits: np.ndarray, seed: int) -> int:
    """64-bit digest of one boolean row (bit ``e`` goes to word ``e // 64``, position ``e % 64``)."""
    E = bits.shape[0]
    h = _mix_py(seed ^ E)
    padded = np.zeros(((E + 63) // 64) * 64, dtype=np.uint64)
    padded[:E] = bits
    words = (padded.reshape(-1, 64) << np.arange(64, dtype=np.uint64)).sum(axis=1, dtype=np.uint64)
    for w in words.tolist():
        h = _mix_py(h ^ w)
        h = (h + _GOLD) & _MASK
    return _mix_py(h)


@njit
def _row_hash_nb(bits, seed):
    E = bits.shape[0]
    h = _mix_nb(np.uint64(seed) ^ np.uint64(E))
    nwords = (E + 63) // 64
    for wi in range(nwords):
        w = np.uint64(0)
        for b in range(64):
            e = wi * 64 + b
            if e < E and bits[e]:
                w |= np.uint64(1) << np.uint64(b)
        h = _mix_nb(h ^ w)
        h = h + np.uint64(_GOLD)
    return _mix_nb(h)


def matrix_digest_py(row_a, row_b, k: int, E: int) -> tuple[int, int]:
    """Fold per-row digests, in row order, into a 128-bit matrix digest."""
    da = _mix_py(MAT_SEED_A ^ (k << 32) ^ E)
    db = _mix_py(MAT_SEED_B ^ (k << 32) ^ E)
    for a, b in zip(row_a, row_b):
        da = (_mix_py(da ^ int(a)) + _GOLD) & _MASK
        db = (_mix_py(db ^ int(b)) + _GOLD) & _MASK
    return _mix_py(da), _mix_py(db)


@njit
def _matrix_digest_nb(row_a, row_b, E):
    k = row_a.shape[0]
    da = _mix_nb(np.uint64(MAT_SEED_A) ^ (np.uint64(k) << np.uint64(32)) ^ np.uint64(E))
    db = _mix_nb(np.uint64(MAT_SEED_B) ^ (np.uint64(k) << np.uint64(32)) ^ np.uint64(E))
    for i in range(k):
        da = _mix_nb(da ^ row_a[i]) + np.uint64(_GOLD)
        db = _mix_nb(db ^ row_b[i]) + np.uint64(_GOLD)
    return _mix_nb(da), _mix_nb(db)


def incidence_digest(inc: np.ndarray) -> tuple[int, int]:
    """128-bit digest (as two 64-bit ints) of a ``(k, E)`` boolean incidence matrix."""
    inc = np.asarray(inc, dtype=bool)
    k, E = inc.shape
    ra = [row_hash_py(inc[i], ROW_SEED_A) for i in range(k)]
    rb = [row_hash_py(inc[i], ROW_SEED_B) for i in range(k)]
    return matrix_digest_py(ra, rb, k, E)


# ---------------------------------------------------------------------------
# tabu neighbourhood expansion


@njit
def _expand_numba(coords, elo, ehi, mult, bias_p, bias_q, dots, cut, cnt, row_a, row_b, moves,
                  out_phi, out_wc, out_ha, out_hb):
    V = coords.shape[0]
    E = elo.shape[0]
    ns = np.empty(V, np.int8)
    nc = np.empty(E, np.bool_)
    ra = row_a.copy()
    rb = row_b.copy()
    base_phi = 0
    base_wc = 0
    for e in range(E):
        if cnt[e] > 0:
            base_phi += 1
            base_wc += mult[e]
    for m in range(moves.shape[0]):
        p = moves[m, 0]
        j = moves[m, 1]
        delta = moves[m, 2]
        for v in range(V):
            y = (dots[p, v] + delta * coords[v, j]) * bias_q - bias_p
            ns[v] = 1 if y > 0 else (-1 if y < 0 else 0)
        phi = base_phi
        wc = base_wc
        for e in range(E):
            a = ns[elo[e]]
            b = ns[ehi[e]]
            now = a != 0 and b != 0 and a != b
            nc[e] = now
            if now != cut[p, e]:
                if now and cnt[e] == 0:
                    phi += 1
                    wc += mult[e]
                elif (not now) and cnt[e] == 1:
                    phi -= 1
                    wc -= mult[e]
        out_phi[m] = phi
        out_wc[m] = wc
        ra[p] = _row_hash_nb(nc, ROW_SEED_A)
        rb[p] = _row_hash_nb(nc, ROW_SEED_B)
        ha, hb = _matrix_digest_nb(ra, rb, E)
        out_ha[m] = ha
        out_hb[m] = hb
        ra[p] = row_a[p]
        rb[p] = row_b[p]


def _expand_numpy(coords, elo, ehi, mult, bias_p, bias_q, dots, cut, cnt, row_a, row_b, moves,
                  out_phi, out_wc, out_ha, out_hb):
    covered = cnt > 0
    base_phi = int(covered.sum())
    base_wc = int(mult[covered].sum())
    E = elo.shape[0]
    ra = [int(x) for x in row_a]
    rb = [int(x) for x in row_b]
    for m, (p, j, delta) in enumerate(moves.tolist()):
        ns = np.sign((dots[p] + delta * coords[:, j]) * bias_q - bias_p)
        a = ns[elo]
        b = ns[ehi]
        nc = (a != 0) & (b != 0) & (a != b)
        old = cut[p]
        gained = nc & ~old & (cnt == 0)
        lost = ~nc & old & (cnt == 1)
        out_phi[m] = base_phi + int(gained.sum()) - int(lost.sum())
        out_wc[m] = base_wc + int(mult[gained].sum()) - int(mult[lost].sum())
        sa, sb = ra[p], rb[p]
        ra[p] = row_hash_py(nc, ROW_SEED_A)
        rb[p] = row_hash_py(nc, ROW_SEED_B)
        ha, hb = matrix_digest_py(ra, rb, len(ra), E)
        out_ha[m] = ha
        out_hb[m] = hb
        ra[p], rb[p] = sa, sb


def expand_neighbours(coords, elo, ehi, mult, bias_p, bias_q, dots, cut, cnt, row_a, row_b, moves,
                      use_numba: bool | None = None):
    """Evaluate every move: returns ``(phi, weighted_count, digest_a, digest_b)`` arrays."""
    if use_numba is None:
        use_numba = USE_NUMBA
    M = moves.shape[0]
    out_phi = np.empty(M, np.int64)
    out_wc = np.empty(M, np.int64)
    out_ha = np.empty(M, np.uint64)
    out_hb = np.empty(M, np.uint64)
    fn = _expand_numba if use_numba else _expand_numpy
    fn(coords, elo, ehi, mult, bias_p, bias_q, dots, cut, cnt, row_a, row_b, moves,
       out_phi, out_wc, out_ha, out_hb)
    return out_phi, out_wc, out_ha, out_hb


def row_hashes(cut: np.ndarray, use_numba: bool | None = None) -> tuple[np.ndarray, np.ndarray]:
    if use_numba is None:
        use_numba = USE_NUMBA
    k = cut.shape[0]
    ra = np.empty(k, np.uint64)
    rb = np.empty(k, np.uint64)
    for i in range(k):
        if use_numba:
            ra[i] = _row_hash_nb(cut[i], ROW_SEED_A)
            rb[i] = _row_hash_nb(cut[i], ROW_SEED_B)
        else:
            ra[i] = row_hash_py(cut[i], ROW_SEED_A)
            rb[i] = row_hash_py(cut[i], ROW_SEED_B)
    return ra, rb
