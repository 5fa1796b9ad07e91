import random
from fractions import Fraction

import pytest

from liecurrent.errors import DepthExceeded, ObstructionNonzero
from liecurrent.trace_ext import TraceExtension, normalize_automorphism, pair, trace, verify_perp


def random_alpha(rng, n):
    alpha = [Fraction(rng.randint(-7, 7), rng.randint(1, 4)) for _ in range(6)]
    if n == 2:
        alpha[0] = Fraction(0)
    return alpha


def _mul(a, b, N):
    out = [Fraction(0)] * (N + 1)
    for i, ai in enumerate(a[: N + 1]):
        if ai:
            for j, bj in enumerate(b[: N + 1 - i]):
                out[i + j] += ai * bj
    return out


def _inv(a, N):
    out = [Fraction(1) / a[0]]
    for k in range(1, N + 1):
        out.append(-sum((a[i] * out[k - i] for i in range(1, k + 1) if i < len(a)), Fraction(0)) / a[0])
    return out


def reverted_trace(ext, eta, k):
    """t(y^-k) with x = y (1 + sum eta_i y^i), by fixed-point reversion on coefficient lists."""
    N = k + 4
    # y = x * w(x);  w = 1 - sum eta_i x^i w^{i+1}, iterated until stable to order N
    w = [Fraction(1)] + [Fraction(0)] * N
    for _ in range(N + 1):
        acc = [Fraction(1)] + [Fraction(0)] * N
        pw = w
        for i, e in enumerate(eta[:N], 1):
            pw = _mul(pw, w, N)
            xi_pw = [Fraction(0)] * i + pw[: N + 1 - i]
            acc = [a - e * b for a, b in zip(acc, xi_pw)]
        w = acc
    wk = [Fraction(1)] + [Fraction(0)] * N
    winv = _inv(w, N)
    for _ in range(k):
        wk = _mul(wk, winv, N)
    return sum((wk[j] * ext.tau(j - k) for j in range(N + 1)), Fraction(0))


@pytest.mark.parametrize("n,order", [(0, 6), (1, 6), (2, 5)])
@pytest.mark.parametrize("seed", range(3))
def test_normalization_kills_required_traces(n, order, seed):
    rng = random.Random(seed * 10 + n)
    ext = TraceExtension.finite(n, random_alpha(rng, n), depth=6)
    res = normalize_automorphism(ext, order)
    assert res.ok
    for k in res.checked:
        assert reverted_trace(ext, res.eta, k) == 0


def test_oracle_sees_a_wrong_substitution():
    ext = TraceExtension.finite(1, random_alpha(random.Random(7), 1), depth=6)
    res = normalize_automorphism(ext, 6)
    bad = list(res.eta)
    bad[0] += 1
    assert any(reverted_trace(ext, bad, k) != 0 for k in res.checked)


def test_n2_obstruction():
    ext = TraceExtension.finite(2, [1, 0, 0, 0, 0, 0])
    with pytest.raises(ObstructionNonzero):
        normalize_automorphism(ext, 3)


def test_depth_guard():
    with pytest.raises(DepthExceeded):
        normalize_automorphism(TraceExtension.finite(1, [1, 2]), 6)


def test_trace_values_and_pairing():
    ext = TraceExtension.finite(2, [Fraction(3), Fraction(5)])
    assert trace(ext.x_e(1)) == 1
    assert trace(ext.x_e(0)) == 3
    assert trace(ext.x_f(1)) == -1
    assert trace(ext.one()) == 0
    u, v = ext.x_e(-1), ext.x_power(1)
    assert pair(u, v) == pair(v, u)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_pairing_nondegenerate_on_window(n):
    ext = TraceExtension.finite(n, [0, 1, 0, 2, 0, 0, 0, 0, 0, 0], depth=10)
    assert verify_perp(ext, 4).passed


def test_zero_trace_control_is_degenerate():
    ext = TraceExtension.finite(1, [1, 1, 1, 1, 1, 1, 1, 1])
    assert not verify_perp(ext, 3, trace_fn=lambda u: Fraction(0)).passed


def test_json_round_trip():
    ext = TraceExtension.finite(2, [0, Fraction(1, 3)])
    assert TraceExtension.from_json(ext.to_json()) == ext
