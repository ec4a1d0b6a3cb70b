import numba


@numba.jit(
    numba.float64(
        numba.float64[:, ::1],
        numba.float64[:, ::1],
    ),
    nopython=True,
    nogil=True,
)
def minmax_jit(units, directions):
    k = units.shape[0]
    n = units.shape[1]
    s = directions.shape[1]
    best = 1e300

    for i in range(k):
        row_max = -1e300
        for j in range(s):
            acc = 0.0
            for t in range(n):
                acc += units[i, t] * directions[t, j]
            if acc > row_max:
                row_max = acc
        if row_max < best:
            best = row_max
    return best
