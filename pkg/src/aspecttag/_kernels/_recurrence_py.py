"""Pure numpy recurrence kernels (fallback when the compiled module is absent).

The input projection ``Zx = X @ W.T + b`` is computed by the caller, so these
routines only run the sequential part of the cell: the recurrent matvec, the
gate nonlinearities and, on the way back, backpropagation through time.

Gate layout for the LSTM is ``[input, forget, output, candidate]``.
"""

import numpy as np
from scipy.special import expit as _sigmoid


def _order(n, reverse):
    return range(n - 1, -1, -1) if reverse else range(n)


def elman_forward(Zx, U, reverse):
    n, hidden = Zx.shape
    H = np.zeros((n, hidden))
    h_prev = np.zeros(hidden)
    for t in _order(n, reverse):
        h_prev = H[t] = _sigmoid(Zx[t] + U @ h_prev)
    return H


def elman_backward(U, H, dH, reverse):
    n, hidden = H.shape
    dZ = np.zeros((n, hidden))
    dU = np.zeros_like(U)
    dh_next = np.zeros(hidden)
    zero = np.zeros(hidden)
    steps = list(_order(n, reverse))
    for k in range(n - 1, -1, -1):
        t = steps[k]
        h_prev = H[steps[k - 1]] if k > 0 else zero
        dh = dH[t] + dh_next
        dz = dh * H[t] * (1.0 - H[t])
        dZ[t] = dz
        dU += np.outer(dz, h_prev)
        dh_next = U.T @ dz
    return dZ, dU


def lstm_forward(Zx, U, reverse):
    n = Zx.shape[0]
    hidden = U.shape[1]
    H = np.zeros((n, hidden))
    C = np.zeros((n, hidden))
    G = np.zeros((n, 4 * hidden))
    h_prev = np.zeros(hidden)
    c_prev = np.zeros(hidden)
    for t in _order(n, reverse):
        z = Zx[t] + U @ h_prev
        gates = G[t]
        gates[: 3 * hidden] = _sigmoid(z[: 3 * hidden])
        gates[3 * hidden:] = np.tanh(z[3 * hidden:])
        i = gates[:hidden]
        f = gates[hidden: 2 * hidden]
        o = gates[2 * hidden: 3 * hidden]
        g = gates[3 * hidden:]
        c_prev = C[t] = f * c_prev + i * g
        h_prev = H[t] = o * np.tanh(c_prev)
    return H, C, G


def lstm_backward(U, H, C, G, dH, reverse):
    n, hidden = H.shape
    dZ = np.zeros((n, 4 * hidden))
    dU = np.zeros_like(U)
    dh_next = np.zeros(hidden)
    dc_next = np.zeros(hidden)
    zero = np.zeros(hidden)
    steps = list(_order(n, reverse))
    for k in range(n - 1, -1, -1):
        t = steps[k]
        if k > 0:
            h_prev, c_prev = H[steps[k - 1]], C[steps[k - 1]]
        else:
            h_prev = c_prev = zero
        i = G[t, :hidden]
        f = G[t, hidden: 2 * hidden]
        o = G[t, 2 * hidden: 3 * hidden]
        g = G[t, 3 * hidden:]
        tc = np.tanh(C[t])
        dh = dH[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = dZ[t]
        dz[:hidden] = dc * g * i * (1.0 - i)
        dz[hidden: 2 * hidden] = dc * c_prev * f * (1.0 - f)
        dz[2 * hidden: 3 * hidden] = dh * tc * o * (1.0 - o)
        dz[3 * hidden:] = dc * i * (1.0 - g * g)
        dc_next = dc * f
        dU += np.outer(dz, h_prev)
        dh_next = U.T @ dz
    return dZ, dU
