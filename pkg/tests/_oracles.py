"""Independent reference computations used by the tests.

Everything here is written without calling into the package's numerics, so
agreement with the package is evidence rather than tautology. The
high-precision routines use mpmath at 50 significant digits, far finer than
any tolerance the tests apply, and plain Python loops.
"""

import mpmath as mp
import numpy as np

mp.mp.dps = 50


def mp_residuals(V, u, T):
    """r_k = -log sum_s u_s exp(v_s . t_k), summed term by term."""
    W, N = V.shape
    K = T.shape[1]
    out = []
    for k in range(K):
        total = mp.mpf(0)
        for s in range(W):
            dot = mp.fsum(mp.mpf(V[s, n]) * mp.mpf(T[n, k]) for n in range(N))
            total += mp.mpf(u[s]) * mp.exp(dot)
        out.append(-mp.log(total))
    return out


def mp_scores(tokens, V, T, r):
    N, K = T.shape
    rows = []
    for w in tokens:
        rows.append([mp.fsum(mp.mpf(V[w, n]) * mp.mpf(T[n, k]) for n in range(N)) + r[k]
                     for k in range(K)])
    return rows


def mp_estep(tokens, V, T, r, alpha, n_alternations=200):
    """Alternate the closed-form pi and theta updates in 50-digit arithmetic.

    Starts from theta = alpha + L/K and returns theta as floats.
    """
    K = T.shape[1]
    L = len(tokens)
    alpha = [mp.mpf(a) for a in alpha]
    theta = [a + mp.mpf(L) / K for a in alpha]
    scores = mp_scores(tokens, V, T, r)
    for _ in range(n_alternations):
        psi = [mp.digamma(t) for t in theta]
        colsum = [mp.mpf(0)] * K
        for row in scores:
            ex = [mp.exp(psi[k] + row[k]) for k in range(K)]
            z = mp.fsum(ex)
            for k in range(K):
                colsum[k] += ex[k] / z
        theta = [alpha[k] + colsum[k] for k in range(K)]
    return np.array([float(t) for t in theta])


def mp_doc_elbo(tokens, pi, theta, V, T, r, alpha):
    """Per-document lower bound, one term at a time.

    Expected log prior and likelihood terms plus the entropy of the
    Dirichlet-times-categorical variational family, with 0 log 0 = 0.
    """
    K = T.shape[1]
    th = [mp.mpf(x) for x in theta]
    th0 = mp.fsum(th)
    scores = mp_scores(tokens, V, T, r)
    total = mp.mpf(0)
    for k in range(K):
        mbar = mp.fsum(mp.mpf(pi[j, k]) for j in range(len(tokens)))
        total += (mbar + mp.mpf(alpha[k]) - 1) * (mp.digamma(th[k]) - mp.digamma(th0))
    for j in range(len(tokens)):
        for k in range(K):
            total += mp.mpf(pi[j, k]) * scores[j][k]
    # entropy of q
    total += mp.fsum(mp.loggamma(t) for t in th) - mp.loggamma(th0)
    total -= mp.fsum((t - 1) * mp.digamma(t) for t in th)
    total += (th0 - K) * mp.digamma(th0)
    for j in range(len(tokens)):
        for k in range(K):
            p = mp.mpf(pi[j, k])
            if p > 0:
                total -= p * mp.log(p)
    return total


def greedy_cosine_matching(learned, planted):
    """Pair columns by repeatedly taking the most similar remaining pair.

    Returns ``(pairs, cosines)`` where `pairs` is a list of (learned index,
    planted index).
    """
    def unit(M):
        n = np.linalg.norm(M, axis=0)
        n[n == 0] = 1.0
        return M / n

    C = unit(learned).T @ unit(planted)
    pairs, cosines = [], []
    free_l, free_p = set(range(C.shape[0])), set(range(C.shape[1]))
    while free_l and free_p:
        best = max(((i, j) for i in free_l for j in free_p), key=lambda ij: C[ij])
        pairs.append(best)
        cosines.append(C[best])
        free_l.discard(best[0])
        free_p.discard(best[1])
    return pairs, cosines
