"""Pure-Python coordinate-ascent sweep over surface elements.

One sweep visits every element in ascending index order and, with all other
coefficients and the transmit covariance held fixed, replaces the element's
coefficient by the best candidate:

* passive element: the codebook phase maximizing the spectral efficiency;
* amplitude-free element: each codebook phase paired with an amplitude grid
  on [0, alpha_max] plus golden-section refinement, where alpha_max is set by
  the residual output-power budget left by the other amplitude-free elements.

The incumbent coefficient is always a candidate and ties keep it, so the
objective is non-decreasing.  The compiled Cython kernel in ``_sweep_cy``
implements the identical procedure; this module is the importable fallback
and the reference for parity tests.

State convention shared by both implementations:
    uT      (N, Nr) complex  hop-2 columns, transposed
    rows    (N, r)  complex  h1 @ F where q = F F^H
    s       (N,)    float    incident signal powers diag(h1 q h1^H)
    alphas  (N,)    float    in/out amplitudes (exactly 1.0 on passive)
    thetas  (N,)    float    in/out phases (codebook members)
    amp_free(N,)    uint8    1 where the amplitude is optimized (active)
"""

from __future__ import annotations

import math

import numpy as np

LN2 = math.log(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _logdet_h(a: np.ndarray) -> float:
    sign, val = np.linalg.slogdet(a)
    return val


def _noise_weight(alpha: float, s_n: float, sigma_r2: float, sigma_si2: float) -> float:
    a2 = alpha * alpha
    return a2 * (sigma_r2 + a2 * sigma_si2 * s_n) / (1.0 - a2 * sigma_si2)


def _out_power(alpha: float, s_n: float, sigma_r2: float, sigma_si2: float) -> float:
    a2 = alpha * alpha
    return a2 * (s_n + sigma_r2) / (1.0 - a2 * sigma_si2)


def sweep_impl(
    uT: np.ndarray,
    rows: np.ndarray,
    s: np.ndarray,
    alphas: np.ndarray,
    thetas: np.ndarray,
    amp_free: np.ndarray,
    codebook: np.ndarray,
    sigma2: float,
    sigma_r2: float,
    sigma_si2: float,
    budget: float,
    amp_grid: int,
    golden_iters: int = 32,
) -> float:
    """Run one coordinate sweep in place; returns the SE (bits/s/Hz) after it."""
    n_el, nr = uT.shape
    eye = np.eye(nr, dtype=complex)

    coeffs = alphas * np.exp(1j * thetas)
    weights = np.zeros(n_el)
    powers = np.zeros(n_el)
    for n in range(n_el):
        if amp_free[n]:
            weights[n] = _noise_weight(alphas[n], s[n], sigma_r2, sigma_si2)
            powers[n] = _out_power(alphas[n], s[n], sigma_r2, sigma_si2)

    # G @ F and the noise covariance, rebuilt fresh each sweep to kill drift.
    t_mat = (uT * coeffs[:, None]).T @ rows
    c_mat = sigma2 * eye + (uT.T * weights) @ uT.conj()
    total = powers.sum()

    for n in range(n_el):
        un = uT[n]
        rn = rows[n]
        outer_tr = np.outer(un, rn)  # rank-one channel contribution times F
        outer_uu = np.outer(un, un.conj())

        t_base = t_mat - coeffs[n] * outer_tr
        c_base = c_mat - weights[n] * outer_uu
        total -= powers[n]

        def cand_se(alpha: float, theta: float, free: bool) -> float:
            if free:
                w = _noise_weight(alpha, s[n], sigma_r2, sigma_si2)
            else:
                w = 0.0
            cc = c_base + w * outer_uu
            tt = t_base + (alpha * complex(math.cos(theta), math.sin(theta))) * outer_tr
            return (_logdet_h(cc + tt @ tt.conj().T) - _logdet_h(cc)) / LN2

        free = bool(amp_free[n])
        best_alpha = float(alphas[n])
        best_theta = float(thetas[n])
        best_se = cand_se(best_alpha, best_theta, free)

        if not free:
            # Batched evaluation over the codebook; argmax picks the first
            # maximum, matching a sequential strict-improvement scan.
            cand = np.exp(1j * codebook)
            tt = t_base[None, :, :] + cand[:, None, None] * outer_tr[None, :, :]
            full = c_base[None, :, :] + tt @ np.conj(np.swapaxes(tt, 1, 2))
            ses = (np.linalg.slogdet(full)[1] - _logdet_h(c_base)) / LN2
            k = int(np.argmax(ses))
            if ses[k] > best_se:
                best_se = float(ses[k])
                best_alpha = 1.0
                best_theta = float(codebook[k])
        else:
            residual = budget - total
            if residual < 0.0:
                residual = 0.0
            denom = s[n] + sigma_r2 + residual * sigma_si2
            a_max = math.sqrt(residual / denom) if denom > 0.0 else 0.0
            grid = np.linspace(0.0, a_max, amp_grid)
            for theta in codebook:
                theta = float(theta)
                ses = np.array([cand_se(a, theta, True) for a in grid])
                k = int(np.argmax(ses))
                if ses[k] > best_se:
                    best_se = float(ses[k])
                    best_alpha = float(grid[k])
                    best_theta = theta
                # Golden-section refinement around the best grid point.
                lo = grid[max(k - 1, 0)]
                hi = grid[min(k + 1, amp_grid - 1)]
                a, b = lo, hi
                x1 = b - GOLDEN * (b - a)
                x2 = a + GOLDEN * (b - a)
                f1 = cand_se(x1, theta, True)
                f2 = cand_se(x2, theta, True)
                for _ in range(golden_iters):
                    if f1 >= f2:
                        b, x2, f2 = x2, x1, f1
                        x1 = b - GOLDEN * (b - a)
                        f1 = cand_se(x1, theta, True)
                    else:
                        a, x1, f1 = x1, x2, f2
                        x2 = a + GOLDEN * (b - a)
                        f2 = cand_se(x2, theta, True)
                for x, f in ((x1, f1), (x2, f2)):
                    if f > best_se:
                        best_se = float(f)
                        best_alpha = float(x)
                        best_theta = theta

        alphas[n] = best_alpha
        thetas[n] = best_theta
        coeffs[n] = best_alpha * complex(math.cos(best_theta), math.sin(best_theta))
        if free:
            weights[n] = _noise_weight(best_alpha, s[n], sigma_r2, sigma_si2)
            powers[n] = _out_power(best_alpha, s[n], sigma_r2, sigma_si2)
        t_mat = t_base + coeffs[n] * outer_tr
        c_mat = c_base + weights[n] * outer_uu
        total += powers[n]

    return (_logdet_h(c_mat + t_mat @ t_mat.conj().T) - _logdet_h(c_mat)) / LN2
