"""Independent oracles shared by the test modules."""

import numpy as np


def brute_force_min_region(masses, weights, level, chunk_bits=18):
    """Minimal-measure subset of grid points carrying mass >= level.

    Enumerates all 2^n subsets. Among subsets of minimal measure the one with
    the largest mass wins. Returns a boolean mask.
    """
    masses = np.asarray(masses, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n = masses.size
    best = (np.inf, -np.inf, None)
    chunk = 1 << min(chunk_bits, n)
    bit = (1 << np.arange(n, dtype=np.int64))
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, start + chunk, dtype=np.int64)
        bits = ((codes[:, None] & bit[None, :]) != 0).astype(float)
        m = bits @ masses
        w = bits @ weights
        ok = m >= level - 1e-12
        if not ok.any():
            continue
        w_ok = np.where(ok, w, np.inf)
        wmin = w_ok.min()
        cand = np.flatnonzero(np.isclose(w_ok, wmin, rtol=0, atol=1e-12))
        i = cand[np.argmax(m[cand])]
        if wmin < best[0] - 1e-12 or (abs(wmin - best[0]) <= 1e-12 and m[i] > best[1]):
            best = (wmin, m[i], codes[i])
    code = best[2]
    return np.array([(int(code) >> k) & 1 for k in range(n)], dtype=bool)
