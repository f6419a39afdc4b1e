"""Three exact gradient engines for the recurrent model, plus oracles.

All engines differentiate a many-to-one loss L(yhat(tau)) with respect to
the packed parameter vectors theta (input-to-hidden) and phi
(hidden-to-output) and agree with each other to floating-point rounding:

* ``trrl_gradients``   backward sweep that merges the repeated subtrees of
                       the unrolled network by accumulating one total
                       gradient vector per step offset; linear in tau.
* ``rtrl_gradients``   forward propagation of the output Jacobians
                       d yhat / d theta and d yhat / d phi; linear in tau
                       with a y^2 factor, Jacobian storage instead of a
                       stored trace.
* ``bptt_gradients``   literal depth-first recursion over the unrolled
                       tree; exponential in tau for two or more lags, kept
                       behind a guard and used as a reference and for
                       macronode accounting.

The returned ``OpCounter`` tallies the multiply-accumulates of the
gradient computation itself.  The forward sweep is identical for every
engine and is excluded, so counters compare the algorithms like for like.
``loss`` arguments are callables ``yhat -> (loss_value, d_loss_d_yhat)``.

Engines are pure functions of (params, xs): parameters are never
mutated, every call owns its counter and workspace, and concurrent calls
against shared parameters are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .base import NumericError, RnnpError
from .linalg import Matrix, OpCounter, matvec, matvec_t
from .model import (
    FlatParams,
    ModelParams,
    RnnSpec,
    forward_sequence,
    pack,
    phi_offsets,
    theta_offsets,
    unpack,
)

U128_MAX = (1 << 128) - 1

DEFAULT_BPTT_GUARD = 25


class BpttInfeasibleError(RnnpError):
    """Sequence too long for the unrolled-tree recursion.

    The macronode count grows like a generalized Fibonacci partial sum,
    so past the guard the recursion is rejected instead of left to run
    for an astronomically long time.
    """


@dataclass
class GradientPair:
    """Common output contract of all engines: packed gradients."""

    d_theta: list
    d_phi: list

    def validate(self, spec: RnnSpec) -> None:
        if len(self.d_theta) != spec.theta_size or len(self.d_phi) != spec.phi_size:
            raise ValueError("gradient lengths do not match the spec")
        for v in self.d_theta:
            if not math.isfinite(v):
                raise NumericError("non-finite theta gradient")
        for v in self.d_phi:
            if not math.isfinite(v):
                raise NumericError("non-finite phi gradient")


def _check_finite(vec: list, what: str, step: int) -> None:
    for v in vec:
        if not math.isfinite(v):
            raise NumericError(f"non-finite {what} at step {step}")


def _scatter_theta(
    dest: list,
    q: list,
    x_t: list,
    feedbacks: list,
    spec: RnnSpec,
    counter: OpCounter,
) -> None:
    """dest += (da/dtheta)^T q, exploiting one nonzero per theta column.

    Counts y*h + ... precisely h*x + p*h*y multiplies; the bias columns
    are pure additions.
    """
    h, x, y = spec.hidden_dim, spec.x_dim, spec.y_dim
    _, w_offs, b_off = theta_offsets(spec)
    for r in range(h):
        qr = q[r]
        base = r * x
        for cidx in range(x):
            dest[base + cidx] += qr * x_t[cidx]
        for w_off, fb in zip(w_offs, feedbacks):
            wbase = w_off + r * y
            for k in range(y):
                dest[wbase + k] += qr * fb[k]
        dest[b_off + r] += qr
    counter.add_macs(h * x + spec.p * h * y)


def _scatter_phi(
    dest: list, g: list, h_t: list, spec: RnnSpec, counter: OpCounter
) -> None:
    """dest += (dyhat/dphi)^T g; counts y*h multiplies (c columns add)."""
    h, y = spec.hidden_dim, spec.y_dim
    v_off, c_off = phi_offsets(spec)
    for k in range(y):
        gk = g[k]
        base = v_off + k * h
        for j in range(h):
            dest[base + j] += gk * h_t[j]
        dest[c_off + k] += gk
    counter.add_macs(y * h)


def _fold_through_node(
    V: Matrix, h_t: list, g: list, counter: OpCounter
) -> list:
    """(V diag(h'))^T g for the sigmoid derivative h' = h (1 - h)."""
    vt = matvec_t(V, g, counter)
    n = len(h_t)
    out = [0.0] * n
    for j in range(n):
        hj = h_t[j]
        out[j] = vt[j] * (hj * (1.0 - hj))
    counter.add_macs(2 * n)  # derivative values plus the diagonal product
    return out


def trrl_gradients(
    params: ModelParams, spec: RnnSpec, xs: list, loss
) -> tuple:
    """Tree-recombined backward sweep, linear in sequence length.

    Walks offsets i = 0..tau-1 from the final step backwards, keeping one
    accumulated gradient vector g_i per live offset.  Each g_i is folded
    through its node once and pushed to offsets i + lag, which is exactly
    the recombination of the identical subtrees the unrolled network would
    otherwise replicate.  Works for any lag set, contiguous or not.
    """
    tau = len(xs)
    if tau < 1:
        raise ValueError("empty input sequence")
    params.validate(spec)
    counter = OpCounter()
    trace = forward_sequence(params, spec, xs)
    # Stored trace (a, h, yhat per step plus the inputs) is what the
    # backward sweep consumes.
    trace_floats = tau * (spec.x_dim + 2 * spec.hidden_dim + spec.y_dim)
    counter.grad_floats_alloc(trace_floats)

    _, g0 = loss(trace.y_final)
    if len(g0) != spec.y_dim:
        raise ValueError("loss gradient has wrong dimension")
    y = spec.y_dim
    d_theta = [0.0] * spec.theta_size
    d_phi = [0.0] * spec.phi_size

    g_store = {0: list(g0)}
    counter.grad_floats_alloc(y)
    for i in range(tau):
        t = tau - i
        gi = g_store.pop(i, None)
        if gi is None:
            # No contribution flows through this offset (possible when the
            # lag set skips it near the window end).
            continue
        h_t = trace.h_steps[t - 1]
        _scatter_phi(d_phi, gi, h_t, spec, counter)
        q = _fold_through_node(params.V, h_t, gi, counter)
        _check_finite(q, "folded gradient", t)
        feedbacks = [trace.y_at(t - lag) for lag in spec.lag_set]
        _scatter_theta(d_theta, q, xs[t - 1], feedbacks, spec, counter)
        for W_l, lag in zip(params.W, spec.lag_set):
            if i + lag < tau:
                push = matvec_t(W_l, q, counter)
                target = g_store.get(i + lag)
                if target is None:
                    g_store[i + lag] = push
                    counter.grad_floats_alloc(y)
                else:
                    for k in range(y):
                        target[k] += push[k]
        counter.grad_floats_free(y)
    counter.grad_floats_free(trace_floats)

    grads = GradientPair(d_theta=d_theta, d_phi=d_phi)
    grads.validate(spec)
    return grads, counter


def rtrl_gradients(
    params: ModelParams, spec: RnnSpec, xs: list, loss
) -> tuple:
    """Forward Jacobian propagation; no stored trace, Jacobian ring instead.

    Maintains d yhat(s) / d theta and d yhat(s) / d phi for the most recent
    ``max(lag_set)`` steps (null for s <= 0) and advances them with the
    recurrences folded into y-by-y matrices, so the per-step cost is
    O(p y^2 w) and the dense h-by-|theta| intermediate never exists.  For a
    contiguous lag set the ring holds exactly p Jacobian pairs, matching the
    p*y*w storage estimate; a gapped lag set needs max(lag) pairs because a
    Jacobian stays live until its most distant consumer.
    """
    tau = len(xs)
    if tau < 1:
        raise ValueError("empty input sequence")
    params.validate(spec)
    counter = OpCounter()
    h, x, y = spec.hidden_dim, spec.x_dim, spec.y_dim
    tsize, psize = spec.theta_size, spec.phi_size
    max_lag = spec.max_lag
    _, w_offs, b_off = theta_offsets(spec)
    v_off, c_off = phi_offsets(spec)
    U, W, b, V, c = params.U, params.W, params.b, params.V, params.c

    pair_floats = y * (tsize + psize)
    ring: dict = {}
    for s in range(1 - max_lag, 1):
        ring[s] = (
            [[0.0] * tsize for _ in range(y)],
            [[0.0] * psize for _ in range(y)],
        )
        counter.grad_floats_alloc(pair_floats)
    y_ring: dict = {s: [0.0] * y for s in range(1 - max_lag, 1)}
    zero_y = [0.0] * y

    h_t: list = []
    for t in range(1, tau + 1):
        x_t = xs[t - 1]
        if len(x_t) != x:
            raise ValueError(f"input has length {len(x_t)}, expected {x}")
        # Forward step (shared by every engine, not counted).
        a_t = matvec(U, x_t)
        for r in range(h):
            a_t[r] += b[r]
        for W_l, lag in zip(W, spec.lag_set):
            fb = y_ring.get(t - lag, zero_y)
            wf = matvec(W_l, fb)
            for r in range(h):
                a_t[r] += wf[r]
        _check_finite(a_t, "pre-activation", t)
        h_t = [_sigmoid(v) for v in a_t]
        yhat = matvec(V, h_t)
        for k in range(y):
            yhat[k] += c[k]
        _check_finite(yhat, "output", t)

        # B = V diag(h'), y x h.
        b_rows = []
        vdata = V.data
        for k in range(y):
            base = k * h
            b_rows.append(
                [vdata[base + j] * (h_t[j] * (1.0 - h_t[j])) for j in range(h)]
            )
        counter.add_macs(2 * y * h)

        # C_l = B W_l, y x y, one per lag.
        c_mats = []
        for W_l in W:
            wdata = W_l.data
            cm = []
            for k in range(y):
                bk = b_rows[k]
                crow = [0.0] * y
                for j in range(h):
                    bkj = bk[j]
                    wbase = j * y
                    for m in range(y):
                        crow[m] += bkj * wdata[wbase + m]
                cm.append(crow)
            c_mats.append(cm)
        counter.add_macs(spec.p * y * y * h)

        # New Jacobian pair: sum_l C_l J(t - l) + the sparse local terms.
        # The oldest ring entry (lag = max_lag, always in the lag set) is
        # consumed by its own term, so its buffers are transformed in place
        # and recycled: the ring never holds more than max_lag pairs.
        new_jth, new_jph = ring.pop(t - max_lag)
        c_last = c_mats[-1]
        for dest, size in ((new_jth, tsize), (new_jph, psize)):
            for j in range(size):
                col = [dest[m][j] for m in range(y)]
                for k in range(y):
                    acc = 0.0
                    ck = c_last[k]
                    for m in range(y):
                        acc += ck[m] * col[m]
                    dest[k][j] = acc
        for cm, lag in zip(c_mats[:-1], spec.lag_set[:-1]):
            jth_old, jph_old = ring[t - lag]
            for k in range(y):
                ck = cm[k]
                acc_t = new_jth[k]
                acc_p = new_jph[k]
                for m in range(y):
                    ckm = ck[m]
                    row = jth_old[m]
                    for j in range(tsize):
                        acc_t[j] += ckm * row[j]
                    row = jph_old[m]
                    for j in range(psize):
                        acc_p[j] += ckm * row[j]
        counter.add_macs(spec.p * y * y * (tsize + psize))

        feedbacks = [y_ring.get(t - lag, zero_y) for lag in spec.lag_set]
        for k in range(y):
            bk = b_rows[k]
            acc_t = new_jth[k]
            for r in range(h):
                bkr = bk[r]
                base = r * x
                for cidx in range(x):
                    acc_t[base + cidx] += bkr * x_t[cidx]
                for w_off, fb in zip(w_offs, feedbacks):
                    wbase = w_off + r * y
                    for m in range(y):
                        acc_t[wbase + m] += bkr * fb[m]
                acc_t[b_off + r] += bkr
        counter.add_macs(y * (h * x + spec.p * h * y))

        for k in range(y):
            acc_p = new_jph[k]
            base = v_off + k * h
            for j in range(h):
                acc_p[base + j] += h_t[j]
            acc_p[c_off + k] += 1.0

        ring[t] = (new_jth, new_jph)
        y_ring[t] = yhat
        y_ring.pop(t - max_lag, None)

    yhat_final = y_ring[tau]
    _, g_final = loss(yhat_final)
    if len(g_final) != y:
        raise ValueError("loss gradient has wrong dimension")
    jth_final, jph_final = ring[tau]
    d_theta = [0.0] * tsize
    d_phi = [0.0] * psize
    for k in range(y):
        gk = g_final[k]
        row = jth_final[k]
        for j in range(tsize):
            d_theta[j] += gk * row[j]
        row = jph_final[k]
        for j in range(psize):
            d_phi[j] += gk * row[j]
    counter.add_macs(y * (tsize + psize))

    grads = GradientPair(d_theta=d_theta, d_phi=d_phi)
    grads.validate(spec)
    return grads, counter


def bptt_gradients(
    params: ModelParams,
    spec: RnnSpec,
    xs: list,
    loss,
    max_tau_guard: int = DEFAULT_BPTT_GUARD,
) -> tuple:
    """Literal depth-first backpropagation over the unrolled tree.

    Every node (a(t), yhat(t)) reached from the root spawns one recursive
    visit per feedback edge with t - lag >= 1, so identical subtrees are
    recomputed as many times as they appear.  Returns the exact number of
    macronodes visited alongside the gradients.
    """
    tau = len(xs)
    if tau < 1:
        raise ValueError("empty input sequence")
    if tau > max_tau_guard:
        raise BpttInfeasibleError(
            f"tau={tau} exceeds the guard ({max_tau_guard}): the unrolled "
            f"tree would hold {macronode_count(tau, spec.lag_set)} macronodes"
        )
    params.validate(spec)
    counter = OpCounter()
    trace = forward_sequence(params, spec, xs)
    trace_floats = tau * (spec.x_dim + 2 * spec.hidden_dim + spec.y_dim)
    counter.grad_floats_alloc(trace_floats)

    _, g0 = loss(trace.y_final)
    if len(g0) != spec.y_dim:
        raise ValueError("loss gradient has wrong dimension")
    d_theta = [0.0] * spec.theta_size
    d_phi = [0.0] * spec.phi_size
    level_floats = spec.y_dim + spec.hidden_dim
    visited = 0

    def visit(t: int, r_vec: list) -> None:
        nonlocal visited
        visited += 1
        counter.grad_floats_alloc(level_floats)
        h_t = trace.h_steps[t - 1]
        _scatter_phi(d_phi, r_vec, h_t, spec, counter)
        q = _fold_through_node(params.V, h_t, r_vec, counter)
        feedbacks = [trace.y_at(t - lag) for lag in spec.lag_set]
        _scatter_theta(d_theta, q, xs[t - 1], feedbacks, spec, counter)
        for W_l, lag in zip(params.W, spec.lag_set):
            if t - lag >= 1:
                visit(t - lag, matvec_t(W_l, q, counter))
        counter.grad_floats_free(level_floats)

    visit(tau, list(g0))
    counter.grad_floats_free(trace_floats)

    grads = GradientPair(d_theta=d_theta, d_phi=d_phi)
    grads.validate(spec)
    return grads, counter, visited


def finite_difference_gradients(
    params: ModelParams,
    spec: RnnSpec,
    xs: list,
    loss,
    step: float = 1e-5,
) -> GradientPair:
    """Central-difference gradient oracle over every packed parameter."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    flat = pack(params, spec)
    theta = list(flat.theta)
    phi = list(flat.phi)

    def loss_at() -> float:
        p = unpack(FlatParams(theta=theta, phi=phi), spec)
        value, _ = loss(forward_sequence(p, spec, xs).y_final)
        if not math.isfinite(value):
            raise NumericError("non-finite loss during finite differencing")
        return value

    def sweep(vec: list) -> list:
        out = []
        for i in range(len(vec)):
            orig = vec[i]
            vec[i] = orig + step
            lp = loss_at()
            vec[i] = orig - step
            lm = loss_at()
            vec[i] = orig
            out.append((lp - lm) / (2.0 * step))
        return out

    return GradientPair(d_theta=sweep(theta), d_phi=sweep(phi))


def macronode_count(tau: int, lag_set) -> int:
    """Macronodes of the unrolled tree, by dynamic programming.

    N(t) = 1 + sum over lags l with t - l >= 1 of N(t - l); the result is
    N(tau).  For the lag set {1, .., p} this equals the partial sum of a
    p-bonacci sequence.  Raises ``OverflowError`` past 128 unsigned bits
    rather than returning a silently huge-but-wrong figure.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    lags = sorted(set(int(l) for l in lag_set))
    if not lags or lags[0] < 1:
        raise ValueError(f"invalid lag set {lag_set!r}")
    counts = [0] * (tau + 1)
    for t in range(1, tau + 1):
        n = 1
        for l in lags:
            if t - l >= 1:
                n += counts[t - l]
        if n > U128_MAX:
            raise OverflowError(
                f"macronode count exceeds 128 bits at tau={t}"
            )
        counts[t] = n
    return counts[tau]


def rtrl_space_floats(spec: RnnSpec) -> int:
    """Float count p * y * (|theta| + |phi|) of the forward Jacobian store.

    This is the storage estimate for a contiguous lag set, where it equals
    the ring's measured peak exactly; a gapped lag set keeps max(lag)
    Jacobian pairs alive instead (see ``rtrl_gradients``).
    """
    return spec.p * spec.y_dim * spec.weight_count


def max_abs_diff(a: list, b: list) -> float:
    return max((abs(x - y) for x, y in zip(a, b)), default=0.0)


def max_rel_diff(a: list, b: list, floor: float = 1e-12) -> float:
    """Max per-coordinate |a-b| / max(|a|, |b|, floor)."""
    worst = 0.0
    for x, y in zip(a, b):
        d = abs(x - y) / max(abs(x), abs(y), floor)
        if d > worst:
            worst = d
    return worst


def _sigmoid(a: float) -> float:
    if a >= 0.0:
        return 1.0 / (1.0 + math.exp(-a))
    e = math.exp(a)
    return e / (1.0 + e)
