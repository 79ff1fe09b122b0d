"""Compiled inner loops for the reactive structure and the Dijkstra baseline.

All hierarchy nodes share flat arrays. For hierarchy node ``h`` with ``k``
nodes and ``m`` separators, ``toff[h]`` is the offset of its ``k * m``
block in:

* ``dist`` / ``dist_to``: row-major ``[local, sep]`` distance tables;
* ``order``: row-major ``[local, rank]`` separator indices by distance;
* ``heap`` / ``hkey``: ``[slot, sep]`` binary heaps of local site ids and
  their keys, one queue per separator (column);
* ``pos``: ``[local, sep]`` heap slot of each site, -1 when absent.

Every queue of a hierarchy node holds the same sites, so an update touches
one contiguous row of ``heap``, ``hkey``, ``pos`` and ``dist`` per node and
query reads all queue tops from row 0.

Within a hierarchy node local ids are sorted by global id, so comparing
local ids breaks key ties by smallest global id.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True)
def _sift_up(heap, hkey, pos, t, nsep, s, i):
    j = t + i * nsep + s
    x = heap[j]
    kx = hkey[j]
    while i > 0:
        p = (i - 1) >> 1
        jp = t + p * nsep + s
        y = heap[jp]
        ky = hkey[jp]
        if kx < ky or (kx == ky and x < y):
            heap[j] = y
            hkey[j] = ky
            pos[t + y * nsep + s] = i
            i = p
            j = jp
        else:
            break
    heap[j] = x
    hkey[j] = kx
    pos[t + x * nsep + s] = i


@njit(cache=True)
def _sift_down(heap, hkey, pos, t, nsep, s, i, m):
    j = t + i * nsep + s
    x = heap[j]
    kx = hkey[j]
    while True:
        c = 2 * i + 1
        if c >= m:
            break
        jc = t + c * nsep + s
        y = heap[jc]
        ky = hkey[jc]
        if c + 1 < m:
            jz = jc + nsep
            z = heap[jz]
            kz = hkey[jz]
            if kz < ky or (kz == ky and z < y):
                c += 1
                jc = jz
                y = z
                ky = kz
        if ky < kx or (ky == kx and y < x):
            heap[j] = y
            hkey[j] = ky
            pos[t + y * nsep + s] = i
            i = c
            j = jc
        else:
            break
    heap[j] = x
    hkey[j] = kx
    pos[t + x * nsep + s] = i


@njit(cache=True)
def enable_site(p, chain_ptr, chain_h, chain_loc, h_base, h_nsep, toff,
                dist, heap, hkey, pos, count, enabled):
    if enabled[p]:
        return False
    for c in range(chain_ptr[p], chain_ptr[p + 1]):
        h = chain_h[c]
        nsep = h_nsep[h]
        if h_base[h] or nsep == 0:
            continue
        l = chain_loc[c]
        t = toff[h]
        m = count[h]
        row = t + m * nsep
        drow = t + l * nsep
        for s in range(nsep):
            heap[row + s] = l
            hkey[row + s] = dist[drow + s]
            _sift_up(heap, hkey, pos, t, nsep, s, m)
        count[h] = m + 1
    enabled[p] = 1
    return True


@njit(cache=True)
def disable_site(p, chain_ptr, chain_h, chain_loc, h_base, h_nsep, toff,
                 dist, heap, hkey, pos, count, enabled):
    if not enabled[p]:
        return False
    for c in range(chain_ptr[p], chain_ptr[p + 1]):
        h = chain_h[c]
        nsep = h_nsep[h]
        if h_base[h] or nsep == 0:
            continue
        l = chain_loc[c]
        t = toff[h]
        m = count[h] - 1
        last_row = t + m * nsep
        for s in range(nsep):
            i = pos[t + l * nsep + s]
            pos[t + l * nsep + s] = -1
            if i == m:
                continue
            last = heap[last_row + s]
            klast = hkey[last_row + s]
            j = t + i * nsep + s
            heap[j] = last
            hkey[j] = klast
            pos[t + last * nsep + s] = i
            if i > 0:
                jp = t + ((i - 1) >> 1) * nsep + s
                kp = hkey[jp]
                if klast < kp or (klast == kp and last < heap[jp]):
                    _sift_up(heap, hkey, pos, t, nsep, s, i)
                    continue
            _sift_down(heap, hkey, pos, t, nsep, s, i, m)
        count[h] = m
    enabled[p] = 0
    return True


@njit(cache=True)
def _hpush(hd, hu, n, d, u):
    i = n
    while i > 0:
        p = (i - 1) >> 1
        if d < hd[p] or (d == hd[p] and u < hu[p]):
            hd[i] = hd[p]
            hu[i] = hu[p]
            i = p
        else:
            break
    hd[i] = d
    hu[i] = u
    return n + 1


@njit(cache=True)
def _hpop(hd, hu, n):
    n -= 1
    d = hd[n]
    u = hu[n]
    i = 0
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and (hd[c + 1] < hd[c] or (hd[c + 1] == hd[c] and hu[c + 1] < hu[c])):
            c += 1
        if hd[c] < d or (hd[c] == d and hu[c] < u):
            hd[i] = hd[c]
            hu[i] = hu[c]
            i = c
        else:
            break
    if n > 0:
        hd[i] = d
        hu[i] = u
    return n


@njit(cache=True)
def dijkstra_nearest(start, slot0, ptr, nbr, wts, gids, enabled, dist, done, touched, hd, hu):
    """Nearest enabled node from local ``start`` in a CSR block.

    Local node ``u`` has arcs ``ptr[slot0 + u] : ptr[slot0 + u + 1]`` into
    local ids and global id ``gids[slot0 + u]``. ``dist`` must be all inf and
    ``done`` all zero on entry; both are restored before returning.
    Returns ``(global site, distance)`` or ``(-1, inf)``.
    """
    nt = 0
    dist[start] = 0.0
    touched[nt] = start
    nt += 1
    hn = _hpush(hd, hu, 0, 0.0, start)
    found = -1
    found_d = INF
    while hn > 0:
        d = hd[0]
        u = hu[0]
        if d > found_d:
            break
        hn = _hpop(hd, hu, hn)
        if done[u]:
            continue
        done[u] = 1
        g = gids[slot0 + u]
        if enabled[g] and (found < 0 or g < found):
            found = g
            found_d = d
        for e in range(ptr[slot0 + u], ptr[slot0 + u + 1]):
            v = nbr[e]
            nd = d + wts[e]
            if nd < dist[v]:
                if dist[v] == INF:
                    touched[nt] = v
                    nt += 1
                dist[v] = nd
                hn = _hpush(hd, hu, hn, nd, v)
    for i in range(nt):
        dist[touched[i]] = INF
        done[touched[i]] = 0
    return found, found_d


@njit(cache=True)
def nearest_site(q, optimized, chain_ptr, chain_h, chain_loc, h_base, h_size, h_nsep,
                 toff, noff, nodes, dist_q, order, heap, hkey, count, enabled,
                 leaf_ptr, leaf_nbr, leaf_w):
    best = -1
    best_d = INF
    c0 = chain_ptr[q]
    c1 = chain_ptr[q + 1]
    h = chain_h[c1 - 1]
    if h_base[h]:
        k = h_size[h]
        arcs = leaf_ptr[noff[h] + k] - leaf_ptr[noff[h]]
        ld = np.full(k, INF)
        done = np.zeros(k, np.uint8)
        touched = np.empty(k, np.int64)
        hd = np.empty(arcs + 1, np.float64)
        hu = np.empty(arcs + 1, np.int64)
        best, best_d = dijkstra_nearest(chain_loc[c1 - 1], noff[h], leaf_ptr, leaf_nbr, leaf_w,
                                        nodes, enabled, ld, done, touched, hd, hu)
    for c in range(c1 - 1, c0 - 1, -1):
        h = chain_h[c]
        nsep = h_nsep[h]
        if h_base[h] or nsep == 0 or count[h] == 0:
            continue
        l = chain_loc[c]
        t = toff[h]
        row = t + l * nsep
        for r in range(nsep):
            if optimized:
                s = order[row + r]
                dq = dist_q[row + s]
                if dq > best_d or dq == INF:
                    break
            else:
                s = r
                dq = dist_q[row + s]
            tot = dq + hkey[t + s]
            if tot == INF:
                continue
            g = nodes[noff[h] + heap[t + s]]
            if tot < best_d or (tot == best_d and g < best):
                best = g
                best_d = tot
    return best, best_d


@njit(cache=True)
def run_separator_ops(codes, targets, optimized, chain_ptr, chain_h, chain_loc, h_base, h_size,
                      h_nsep, toff, noff, nodes, dist, dist_q, order, heap, hkey, pos, count,
                      enabled, leaf_ptr, leaf_nbr, leaf_w, out_site, out_dist):
    """Apply an operation list (0 query, 1 enable, 2 disable); returns the query count."""
    nq = 0
    for i in range(len(codes)):
        v = targets[i]
        if codes[i] == 0:
            s, d = nearest_site(v, optimized, chain_ptr, chain_h, chain_loc, h_base, h_size,
                                h_nsep, toff, noff, nodes, dist_q, order, heap, hkey, count,
                                enabled, leaf_ptr, leaf_nbr, leaf_w)
            out_site[nq] = s
            out_dist[nq] = d
            nq += 1
        elif codes[i] == 1:
            enable_site(v, chain_ptr, chain_h, chain_loc, h_base, h_nsep, toff,
                        dist, heap, hkey, pos, count, enabled)
        else:
            disable_site(v, chain_ptr, chain_h, chain_loc, h_base, h_nsep, toff,
                         dist, heap, hkey, pos, count, enabled)
    return nq


@njit(cache=True)
def run_dijkstra_ops(codes, targets, ptr, nbr, wts, gids, enabled, dist, done, touched, hd, hu,
                     out_site, out_dist):
    nq = 0
    for i in range(len(codes)):
        v = targets[i]
        if codes[i] == 0:
            s, d = dijkstra_nearest(v, 0, ptr, nbr, wts, gids, enabled, dist, done, touched, hd, hu)
            out_site[nq] = s
            out_dist[nq] = d
            nq += 1
        elif codes[i] == 1:
            enabled[v] = 1
        else:
            enabled[v] = 0
    return nq
