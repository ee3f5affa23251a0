import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primenc.nets import (NetSpec, compile_forward, format_params, forward,
                          init_params, param_count, parse_params, tanh_approx)
from primenc.rng import ParkMillerRng

# Printed parameter counts this implementation must reproduce exactly:
# (arch, layer sizes, trailing-gain flag) -> count
PARAM_COUNT_TABLE = [
    ("FSCN", (4, 1, 2), True, 26),
    ("FSCN", (4, 2, 2), True, 39),
    ("FSCN", (4, 4, 2), True, 65),
    ("SCN", (4, 1, 2), True, 20),
    ("SCN", (4, 2, 2), True, 27),
    ("SCN", (4, 4, 2), True, 41),
    ("MLP", (4, 1, 2), True, 10),
    ("MLP", (4, 2, 2), True, 17),
    ("MLP", (4, 4, 2), True, 31),
    ("FSCN", (5, 1, 2), True, 30),
    ("FSCN", (5, 1, 2), False, 29),
    ("FSCN", (6, 1, 2), True, 34),
    ("FSCN", (6, 1, 2), False, 33),
    ("FSCN", (7, 1, 2), True, 38),
    ("FSCN", (7, 1, 2), False, 37),
    ("FSCN", (4, 8, 8, 2), True, 301),
    ("FSCN", (4, 4, 4, 4, 2), True, 201),
]


@pytest.mark.parametrize("arch,sizes,vvc,expected", PARAM_COUNT_TABLE)
def test_param_count_table(arch, sizes, vvc, expected):
    assert param_count(NetSpec(arch, sizes, vvc)) == expected


def test_param_count_matches_layout_length():
    for arch, sizes, vvc, expected in PARAM_COUNT_TABLE:
        spec = NetSpec(arch, sizes, vvc)
        theta = init_params(spec, ParkMillerRng(5))
        assert len(theta) == expected
        forward(spec, theta, [0.1] * spec.n_inputs)  # layout must consume all


def test_bad_specs_rejected():
    with pytest.raises(ValueError):
        NetSpec("CNN", (4, 1, 2))
    with pytest.raises(ValueError):
        NetSpec("MLP", (4,))
    with pytest.raises(ValueError):
        NetSpec("MLP", (4, 0, 2))


def test_tanh_zero_and_clamp():
    assert tanh_approx(0.0) == 0.0
    assert tanh_approx(30.0) == 1.0
    assert tanh_approx(-30.0) == -1.0
    assert tanh_approx(8.0) == 1.0


def test_tanh_reference_accuracy():
    worst = 0.0
    for i in range(-5000, 5001, 3):
        x = i / 1000.0
        worst = max(worst, abs(tanh_approx(x) - math.tanh(x)))
    assert worst <= 1e-6
    assert abs(tanh_approx(1.0) - 0.761594) < 1e-6


def test_tanh_odd_and_monotone():
    xs = [-25.0 + 50.0 * i / 9999 for i in range(10000)]
    prev = -1.1
    for x in xs:
        v = tanh_approx(x)
        assert -1.0 <= v <= 1.0
        assert tanh_approx(-x) == -v
        assert v >= prev
        prev = v


def test_init_params_scale_and_determinism():
    spec = NetSpec("FSCN", (7, 8, 8, 2), True)
    n = param_count(spec)
    rng = ParkMillerRng(77)
    theta = []
    while len(theta) < 10**5:
        theta.extend(init_params(spec, rng))
    sd = (sum(v * v for v in theta) / len(theta)) ** 0.5
    assert abs(sd - 0.001) < 0.0001
    assert init_params(spec, ParkMillerRng(3)) == init_params(spec, ParkMillerRng(3))
    assert len(init_params(spec, ParkMillerRng(3))) == n


def test_mlp_output_strictly_inside_unit_box():
    spec = NetSpec("MLP", (4, 4, 2), True)
    rng = ParkMillerRng(9)
    for _ in range(50):
        theta = [500.0 * g for g in rng.fill_gaussian(param_count(spec))]
        s = rng.fill_gaussian(4)
        out = forward(spec, theta, s)
        assert all(-1.0 <= v <= 1.0 for v in out)


def test_zero_params_give_zero_output():
    for arch in ("MLP", "SCN", "FSCN"):
        spec = NetSpec(arch, (4, 3, 2), True)
        theta = [0.0] * param_count(spec)
        assert forward(spec, theta, [0.4, -0.2, 0.9, 0.1]) == (0.0, 0.0)


def test_scn_pure_linear_path():
    # zero nonlinear weights, bypass = identity on the first two inputs
    spec = NetSpec("SCN", (4, 1, 2), False)
    theta = [0.0] * param_count(spec)
    # bypass matrix K (4x2 row-major) sits after the MLP block (9 entries)
    theta[9] = 1.0   # K[0][0]
    theta[12] = 1.0  # K[1][1]
    s = [0.3, 0.7, -0.5, 0.2]
    assert forward(spec, theta, s) == (0.3, 0.7)


def test_skip_zeroed_fscn_and_scn_equal_mlp():
    mlp = NetSpec("MLP", (5, 3, 2), False)
    theta_mlp = init_params(mlp, ParkMillerRng(21))
    rng = ParkMillerRng(444)
    for arch in ("SCN", "FSCN"):
        spec = NetSpec(arch, (5, 3, 2), False)
        theta = theta_mlp + [0.0] * (param_count(spec) - len(theta_mlp))
        for _ in range(20):
            s = rng.fill_gaussian(5)
            assert forward(spec, theta, s) == forward(mlp, theta_mlp, s)


def _np_reference_forward(spec, theta, s):
    """Independent matrix-chain evaluation of the three wirings (numpy)."""
    sizes = spec.layer_sizes
    nl = len(sizes) - 1
    pos = 0

    def take(rows, cols):
        nonlocal pos
        m = np.array(theta[pos:pos + rows * cols]).reshape(rows, cols)
        pos += rows * cols
        return m

    ws, bs = [], []
    for l in range(nl):
        ws.append(take(sizes[l], sizes[l + 1]))
        bs.append(np.array(theta[pos:pos + sizes[l + 1]]))
        pos += sizes[l + 1]
    hidden_k = {}
    out_k = []
    c = None
    if spec.arch == "SCN":
        out_k = [take(sizes[0], sizes[-1])]
        c = np.array(theta[pos:pos + sizes[-1]])
        pos += sizes[-1]
    elif spec.arch == "FSCN":
        for l in range(1, nl):
            for j in range(l):
                hidden_k[(j, l)] = take(sizes[j], sizes[l])
        for j in range(nl):
            out_k.append(take(sizes[j], sizes[-1]))
        c = np.array(theta[pos:pos + sizes[-1]])
        pos += sizes[-1]

    vtanh = np.vectorize(tanh_approx)
    s_ins = [np.array(s, dtype=float)]
    out = None
    for l in range(nl):
        if l == 0:
            cur = s_ins[0]
        elif spec.arch == "FSCN":
            cur = out + sum(s_ins[j] @ hidden_k[(j, l)] for j in range(l))
            s_ins.append(cur)
        else:
            cur = out
            s_ins.append(cur)
        out = vtanh(cur @ ws[l] + bs[l])
    if spec.arch == "SCN":
        out = out + s_ins[0] @ out_k[0] + c
    elif spec.arch == "FSCN":
        out = out + sum(s_ins[j] @ out_k[j] for j in range(nl)) + c
    return out


def test_forward_against_numpy_reference():
    rng = ParkMillerRng(31415)
    shapes = [(4, 1, 2), (4, 2, 2), (4, 4, 2), (6, 1, 2), (5, 3, 2),
              (7, 4, 3, 2), (4, 8, 8, 2)]
    cases = 0
    while cases < 100:
        for arch in ("MLP", "SCN", "FSCN"):
            for sizes in shapes:
                spec = NetSpec(arch, sizes, cases % 2 == 0)
                n = param_count(spec)
                theta = [20.0 * g for g in rng.fill_gaussian(n)]
                s = rng.fill_gaussian(sizes[0])
                got = forward(spec, theta, s)
                want = _np_reference_forward(spec, theta, s)
                for g, w in zip(got, want):
                    assert g == pytest.approx(w, rel=1e-12, abs=1e-300)
                cases += 1


def test_forward_dimension_mismatch():
    spec = NetSpec("MLP", (4, 1, 2), False)
    theta = init_params(spec, ParkMillerRng(2))
    with pytest.raises(ValueError):
        forward(spec, theta, [0.0] * 5)
    with pytest.raises(ValueError):
        compile_forward(spec, theta + [1.0])


@given(st.sampled_from(["MLP", "SCN", "FSCN"]),
       st.integers(min_value=1, max_value=400))
@settings(max_examples=40, deadline=None)
def test_serialization_roundtrip_bitwise(arch, seed):
    spec = NetSpec(arch, (5, 2, 2), arch != "MLP")
    rng = ParkMillerRng(seed)
    theta = [1000.0 * g for g in rng.fill_gaussian(param_count(spec))]
    spec2, theta2, key = parse_params(format_params(spec, theta))
    assert spec2 == spec and key is None
    assert theta2 == theta
    spec3, theta3, key3 = parse_params(format_params(spec, theta, key=12.5))
    assert key3 == 12.5 and theta3 == theta


def test_parse_params_validation():
    with pytest.raises(ValueError):
        parse_params("")
    with pytest.raises(ValueError):
        parse_params("MLP 4,1,2 vvc=1\n0.5\n")  # too few values
    with pytest.raises(ValueError):
        parse_params("MLP 4,1,2 wat=1\n" + "0.0\n" * 10)
