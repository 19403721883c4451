"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def pava(y, w):
    vals, wts, cnt = [], [], []
    for yi, wi in zip(y.tolist(), w.tolist()):
        vals.append(yi)
        wts.append(wi)
        cnt.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v, ww, c = vals.pop(), wts.pop(), cnt.pop()
            tot = wts[-1] + ww
            vals[-1] = (wts[-1] * vals[-1] + ww * v) / tot
            wts[-1] = tot
            cnt[-1] += c
    return np.repeat(np.asarray(vals, dtype=np.float64), cnt)
