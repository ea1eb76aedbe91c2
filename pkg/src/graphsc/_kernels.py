"""Jump-chain simulation kernels (numba-compiled).

Each replica runs an independent splitmix64 stream seeded from the master
seed, writes its outcome into its own slot, and is therefore bit-reproducible
regardless of thread scheduling.  Outcome codes: 0 alive at the horizon,
1 killed, 2 exploded (declared via the pace rule below), 3 censored (jump cap
or table edge reached with the time budget still open).

Explosion declaration on infinite families: once even the full remaining jump
allowance, spent at ``safety`` times the largest holding time seen over the
last two bookkeeping blocks, could not consume the remaining time budget, the
path is committed to hitting the cap with time left over; it is declared
exploded at the current clock.  Holding times on explosive paths shrink
polynomially, so this fires long before the cap while staying impossible on
bounded-rate graphs.
"""

import math

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco

    prange = range

CODE_ALIVE = 0
CODE_KILLED = 1
CODE_EXPLODED = 2
CODE_CENSORED = 3

_INV53 = 1.0 / 9007199254740992.0  # 2^-53


@njit(inline="always")
def _mix(s):
    s = s + np.uint64(0x9E3779B97F4A7C15)
    z = s
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return s, z


@njit(inline="always")
def _u01(s):
    s, z = _mix(s)
    return s, (z >> np.uint64(11)) * _INV53


@njit(cache=True, parallel=True)
def sim_line(
    bedge, cvec, mvec, start, lo_open,
    horizon, cap, allow_explode, safety, block,
    seeds, out_code, out_time, out_pos, out_jumps,
):
    """Birth-death chain on a table of ``extent`` positions.

    ``bedge[i]`` is the conductance between positions i and i+1; position 0
    is a genuine endpoint when ``lo_open`` is false, otherwise hitting either
    table edge censors the path.
    """
    extent = bedge.size + 1
    n = seeds.size
    for r in prange(n):
        s = seeds[r]
        x = start
        t = 0.0
        comp = 0.0
        jumps = 0
        code = CODE_ALIVE
        blkmax = 0.0
        prevmax = 1.0e300
        while True:
            left = bedge[x - 1] if x > 0 else 0.0
            right = bedge[x] if x < extent - 1 else 0.0
            c = cvec[x]
            tot = left + right + c
            if tot <= 0.0:
                t = horizon
                code = CODE_ALIVE
                break
            rate = tot / mvec[x]
            s, u = _u01(s)
            dt = -math.log1p(-u) / rate
            y = dt - comp
            tt = t + y
            comp = (tt - t) - y
            t = tt
            if t >= horizon:
                t = horizon
                code = CODE_ALIVE
                break
            jumps += 1
            if dt > blkmax:
                blkmax = dt
            if jumps % block == 0:
                hbar = blkmax if blkmax > prevmax else prevmax
                if allow_explode and (cap - jumps) * hbar * safety < (horizon - t):
                    code = CODE_EXPLODED
                    break
                prevmax = blkmax
                blkmax = 0.0
            if jumps >= cap:
                code = CODE_CENSORED
                break
            s, u2 = _u01(s)
            z = u2 * tot
            if z < c:
                code = CODE_KILLED
                break
            if z < c + right:
                x += 1
                if x >= extent - 1:
                    code = CODE_CENSORED
                    break
            else:
                x -= 1
                if x <= 0 and lo_open:
                    code = CODE_CENSORED
                    break
        out_code[r] = code
        out_time[r] = t
        out_pos[r] = x
        out_jumps[r] = jumps


@njit(cache=True, parallel=True)
def sim_table(
    indptr, nbr, cum, cvec, mvec, escape, start,
    horizon, cap, seeds, out_code, out_time, out_pos, out_jumps,
):
    """General jump chain over precomputed per-vertex cumulative tables.

    ``cum`` holds, per vertex row, the running sums of neighbor weights;
    ``escape[x]`` is extra weight leading out of the table (section
    deficiency) whose drawing censors the path.  No explosion declaration:
    on a finite table explosion is impossible.
    """
    n = seeds.size
    for r in prange(n):
        s = seeds[r]
        x = start
        t = 0.0
        comp = 0.0
        jumps = 0
        code = CODE_ALIVE
        while True:
            lo = indptr[x]
            hi = indptr[x + 1]
            row_w = cum[hi - 1] if hi > lo else 0.0
            c = cvec[x]
            esc = escape[x]
            tot = row_w + c + esc
            if tot <= 0.0:
                t = horizon
                code = CODE_ALIVE
                break
            rate = tot / mvec[x]
            s, u = _u01(s)
            dt = -math.log1p(-u) / rate
            y = dt - comp
            tt = t + y
            comp = (tt - t) - y
            t = tt
            if t >= horizon:
                t = horizon
                code = CODE_ALIVE
                break
            jumps += 1
            if jumps >= cap:
                code = CODE_CENSORED
                break
            s, u2 = _u01(s)
            z = u2 * tot
            if z < c:
                code = CODE_KILLED
                break
            if z < c + esc:
                code = CODE_CENSORED
                break
            zz = z - c - esc
            a = lo
            b = hi
            while a < b:
                mid = (a + b) // 2
                if cum[mid] <= zz:
                    a = mid + 1
                else:
                    b = mid
            x = nbr[a]
        out_code[r] = code
        out_time[r] = t
        out_pos[r] = x
        out_jumps[r] = jumps
