"""Compiled numeric primitives shared by the Python API and the fast episode loop.

Channel weights are carried as logarithms. Renormalizing by the maximum
channel weight becomes subtracting the maximum log-weight, and strategy
probabilities are a softmax over summed log-weights, so nothing underflows
to an exact zero over tens of thousands of batches.

Variant codes: 1..4. Adversary kind codes: see ``adversary.KIND_CODES``.
"""

import numpy as np
from numba import njit

FIXED, UNIFORM, NORMAL, ADAPTIVE = 0, 1, 2, 3


@njit(cache=True)
def strategy_probs(log_h, members, variant, gamma, cover, C):
    S, l = members.shape
    logw = np.empty(S)
    for s in range(S):
        acc = 0.0
        for i in range(l):
            acc += log_h[members[s, i]]
        logw[s] = acc
    w = np.exp(logw - logw.max())
    base = w / w.sum()
    if variant == 2:
        return base
    if variant == 1:
        return (1.0 - gamma) * base + gamma / S
    p = (1.0 - gamma) * base
    for s in range(S):
        if cover[s]:
            p[s] += gamma / C
    return p


@njit(cache=True)
def channel_probs(p, members, K):
    q = np.zeros(K)
    S, l = members.shape
    for s in range(S):
        for i in range(l):
            q[members[s, i]] += p[s]
    return q


@njit(cache=True)
def sample(p, u):
    """Inverse-CDF draw; float shortfall goes to the last positive entry."""
    acc = 0.0
    last = -1
    for s in range(p.shape[0]):
        if p[s] > 0.0:
            last = s
        acc += p[s]
        if u < acc and p[s] > 0.0:
            return s
    return last


@njit(cache=True)
def exponents(variant, fbar, monitored, q, l, gamma, eta, beta, S):
    """Per-channel increment of the log channel weight for one batch.

    ``fbar`` holds batch-average rewards (zero on unmonitored channels).
    """
    K = fbar.shape[0]
    e = np.zeros(K)
    for k in range(K):
        if variant == 1:
            if monitored[k]:
                e[k] = gamma * (fbar[k] / q[k]) / S
        elif variant == 2:
            if monitored[k]:
                e[k] = -eta * ((1.0 / l - fbar[k]) / q[k])
        elif variant == 3:
            e[k] = eta * ((fbar[k] + beta) / q[k])
        else:
            e[k] = -eta * (((1.0 / l - fbar[k]) - beta) / q[k])
    return e


@njit(cache=True)
def apply_update(log_h, e):
    out = log_h + e
    return out - out.max()


@njit(cache=True)
def overlap(members, a, b):
    l = members.shape[1]
    n = 0
    for i in range(l):
        for j in range(l):
            if members[a, i] == members[b, j]:
                n += 1
    return n


@njit(cache=True)
def mu_select(log_hm, mu_members, gamma, u):
    """Single-channel exponential-weights learner: probabilities and a draw."""
    K = log_hm.shape[0]
    dummy = np.zeros(K, dtype=np.bool_)
    p = strategy_probs(log_hm, mu_members, 1, gamma, dummy, 1)
    return sample(p, u), p


@njit(cache=True)
def mu_update(log_hm, p, channel, fbar_value, gamma):
    K = log_hm.shape[0]
    fbar = np.zeros(K)
    monitored = np.zeros(K, dtype=np.bool_)
    fbar[channel] = fbar_value
    monitored[channel] = True
    # With one radio the channel probability is the strategy probability.
    e = exponents(1, fbar, monitored, p, 1, gamma, 0.0, 0.0, K)
    return apply_update(log_hm, e)


@njit(cache=True)
def episode(
    variant, gamma, eta, beta, tau, members, cover, C, log_h0,
    c0, unit_cost, u_monitor, det, r,
    kind, attacks, adv_gamma, adv_tau, u_adv,
):
    T, K = det.shape
    S, l = members.shape
    M = attacks.shape[1]
    J = (T + tau - 1) // tau

    chosen = np.empty(J, dtype=np.int32)
    costs = np.empty(J)
    slot_reward = np.zeros(T)
    matrix = np.zeros((T, K))
    log_h = log_h0.copy()

    mu_members = np.arange(K).astype(np.int32).reshape(K, 1)
    log_hm = np.zeros((M, K))
    p_mu = np.zeros((M, K))
    cur = attacks[0].copy() if T > 0 else np.zeros(M, dtype=np.int32)
    mu_acc = np.zeros(M)
    mu_start = 0
    mu_batch = 0

    prev = -1
    monitored = np.zeros(K, dtype=np.bool_)
    n_att = np.zeros(K, dtype=np.int32)
    for j in range(J):
        p = strategy_probs(log_h, members, variant, gamma, cover, C)
        z = sample(p, u_monitor[j])
        chosen[j] = z
        if j == 0:
            costs[j] = c0
        else:
            costs[j] = unit_cost * (l - overlap(members, prev, z))
        prev = z
        monitored[:] = False
        for i in range(l):
            monitored[members[z, i]] = True

        start = j * tau
        stop = min(start + tau, T)
        sums = np.zeros(K)
        for t in range(start, stop):
            if kind == ADAPTIVE:
                if t == mu_start:
                    for m in range(M):
                        c, pm = mu_select(log_hm[m], mu_members, adv_gamma, u_adv[mu_batch, m])
                        cur[m] = c
                        p_mu[m] = pm
                    mu_acc[:] = 0.0
            else:
                cur = attacks[t]

            n_att[:] = 0
            for m in range(M):
                if cur[m] >= 0:
                    n_att[cur[m]] += 1
            for k in range(K):
                if n_att[k] > 0 and det[t, k]:
                    matrix[t, k] = r
            g = 0.0
            for i in range(l):
                k = members[z, i]
                g += matrix[t, k]
                sums[k] += matrix[t, k]
            slot_reward[t] = g

            if kind == ADAPTIVE:
                for m in range(M):
                    c = cur[m]
                    if not (monitored[c] and det[t, c]):
                        mu_acc[m] += r
                mu_end = min(mu_start + adv_tau, T)
                if t + 1 == mu_end:
                    n = mu_end - mu_start
                    for m in range(M):
                        log_hm[m] = mu_update(log_hm[m], p_mu[m], cur[m], mu_acc[m] / n, adv_gamma)
                    mu_start = mu_end
                    mu_batch += 1

        fbar = sums / (stop - start)
        q = channel_probs(p, members, K)
        e = exponents(variant, fbar, monitored, q, l, gamma, eta, beta, S)
        log_h = apply_update(log_h, e)

    return chosen, costs, slot_reward, matrix, log_h
