"""Tiny feedforward controllers kept as flat parameter vectors.

Three wirings share one evaluation core:

  MLP   stacked tanh layers, output is the last tanh layer.
  SCN   MLP plus one linear bypass from the input to the output.
  FSCN  MLP plus learned linear skip matrices from every earlier layer
        input to every later layer input and to the output.

All learnable values live in one flat vector theta with a frozen packing
order (see _layout), so a candidate can be rebuilt from a scalar seed and
serialized losslessly as decimal text.  When a controller is trained on the
dynamic vehicle model with the velocity-constraint filter, theta carries
one extra trailing scalar: the filter gain.

The activation is a library-free rational approximation of tanh
(Lambert-style continued fraction), saturating to exactly +-1 for large
arguments.
"""

import math
from dataclasses import dataclass

from .rng import ParkMillerRng

ARCH_MLP = "MLP"
ARCH_SCN = "SCN"
ARCH_FSCN = "FSCN"
_ARCHS = (ARCH_MLP, ARCH_SCN, ARCH_FSCN)

# Continued-fraction depth (partial denominators 1, 3, ..., 23) and the
# saturation point.  Depth 12 keeps the error below 6e-11 on [-5, 5] and is
# strictly increasing up to the saturation point, beyond which the truncated
# fraction would turn over, so the output is pinned to +-1 there.
_CF_SAT = 8.0


def tanh_approx(x: float) -> float:
    """Odd, monotone, [-1, 1]-bounded tanh approximation; +-1 for |x| >= 8."""
    neg = x < 0.0
    ax = -x if neg else x
    if ax >= _CF_SAT:
        return -1.0 if neg else 1.0
    x2 = ax * ax
    acc = 23.0
    acc = 21.0 + x2 / acc
    acc = 19.0 + x2 / acc
    acc = 17.0 + x2 / acc
    acc = 15.0 + x2 / acc
    acc = 13.0 + x2 / acc
    acc = 11.0 + x2 / acc
    acc = 9.0 + x2 / acc
    acc = 7.0 + x2 / acc
    acc = 5.0 + x2 / acc
    acc = 3.0 + x2 / acc
    acc = 1.0 + x2 / acc
    t = ax / acc
    return -t if neg else t


@dataclass(frozen=True)
class NetSpec:
    """Architecture descriptor: wiring kind, layer widths, trailing-gain flag.

    layer_sizes runs from the feature dimension to the control dimension,
    e.g. (4, 1, 2) is one hidden unit between 4 inputs and 2 outputs.
    """

    arch: str
    layer_sizes: tuple[int, ...]
    with_vvc_param: bool = False

    def __post_init__(self):
        if self.arch not in _ARCHS:
            raise ValueError(f"unknown arch {self.arch!r}, expected one of {_ARCHS}")
        sizes = tuple(int(n) for n in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(n < 1 for n in sizes):
            raise ValueError(f"layer_sizes must be >= 2 entries of >= 1, got {sizes}")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1


def param_count(spec: NetSpec) -> int:
    """Exact flat-vector length for a spec (matches the packing order)."""
    sizes = spec.layer_sizes
    nl = spec.n_layers
    n_out = sizes[-1]
    count = sum(sizes[l] * sizes[l + 1] + sizes[l + 1] for l in range(nl))
    if spec.arch == ARCH_SCN:
        count += sizes[0] * n_out + n_out
    elif spec.arch == ARCH_FSCN:
        for l in range(1, nl):
            for j in range(l):
                count += sizes[j] * sizes[l]
        for j in range(nl):
            count += sizes[j] * n_out
        count += n_out
    if spec.with_vvc_param:
        count += 1
    return count


def _take_matrix(theta, pos, rows, cols):
    """Cut a row-major (rows x cols) block out of theta as column tuples."""
    block = theta[pos:pos + rows * cols]
    columns = tuple(tuple(block[r * cols + c] for r in range(rows))
                    for c in range(cols))
    return columns, pos + rows * cols


def _layout(spec: NetSpec, theta):
    """Unpack theta in the frozen order: per-layer W then b, skips in
    (target ascending, source ascending) order, output skips, output bias,
    trailing filter gain last."""
    sizes = spec.layer_sizes
    nl = spec.n_layers
    n_out = sizes[-1]
    pos = 0
    layers = []
    for l in range(nl):
        w_cols, pos = _take_matrix(theta, pos, sizes[l], sizes[l + 1])
        b = tuple(theta[pos:pos + sizes[l + 1]])
        pos += sizes[l + 1]
        layers.append((w_cols, b))
    hidden_skips = {}
    out_skips = None
    out_bias = None
    if spec.arch == ARCH_SCN:
        k_cols, pos = _take_matrix(theta, pos, sizes[0], n_out)
        out_skips = (k_cols,)
        out_bias = tuple(theta[pos:pos + n_out])
        pos += n_out
    elif spec.arch == ARCH_FSCN:
        for l in range(1, nl):
            for j in range(l):
                k_cols, pos = _take_matrix(theta, pos, sizes[j], sizes[l])
                hidden_skips[(j, l)] = k_cols
        outs = []
        for j in range(nl):
            k_cols, pos = _take_matrix(theta, pos, sizes[j], n_out)
            outs.append(k_cols)
        out_skips = tuple(outs)
        out_bias = tuple(theta[pos:pos + n_out])
        pos += n_out
    if spec.with_vvc_param:
        pos += 1
    if pos != len(theta):
        raise ValueError(
            f"theta has {len(theta)} entries, spec needs {param_count(spec)}")
    return layers, hidden_skips, out_skips, out_bias


# Unrolled inner products for the tiny dimensions these nets use; the
# generic fallback handles anything wider.
_DOTS = {
    1: lambda s, c: s[0] * c[0],
    2: lambda s, c: s[0] * c[0] + s[1] * c[1],
    3: lambda s, c: s[0] * c[0] + s[1] * c[1] + s[2] * c[2],
    4: lambda s, c: s[0] * c[0] + s[1] * c[1] + s[2] * c[2] + s[3] * c[3],
    5: lambda s, c: (s[0] * c[0] + s[1] * c[1] + s[2] * c[2] + s[3] * c[3]
                     + s[4] * c[4]),
    6: lambda s, c: (s[0] * c[0] + s[1] * c[1] + s[2] * c[2] + s[3] * c[3]
                     + s[4] * c[4] + s[5] * c[5]),
    7: lambda s, c: (s[0] * c[0] + s[1] * c[1] + s[2] * c[2] + s[3] * c[3]
                     + s[4] * c[4] + s[5] * c[5] + s[6] * c[6]),
    8: lambda s, c: (s[0] * c[0] + s[1] * c[1] + s[2] * c[2] + s[3] * c[3]
                     + s[4] * c[4] + s[5] * c[5] + s[6] * c[6] + s[7] * c[7]),
}


def _dot_for(n: int):
    return _DOTS.get(n) or (lambda s, c: sum(v * w for v, w in zip(s, c)))


def compile_forward(spec: NetSpec, theta):
    """Pre-slice theta once and return a fast s -> (a0, ..., a_{n-1}) closure."""
    layers, hidden_skips, out_skips, out_bias = _layout(spec, theta)
    arch = spec.arch
    sizes = spec.layer_sizes
    nl = spec.n_layers
    tanh = tanh_approx
    dots = [_dot_for(sizes[l]) for l in range(nl + 1)]

    if arch == ARCH_MLP and nl == 2:
        # The common tiny shapes get fully unrolled hot paths.
        (w0, b0), (w1, b1) = layers
        dot0 = dots[0]
        dot1 = dots[1]
        if sizes[1] == 1 and sizes[2] == 2:
            wh = w0[0]
            bh = b0[0]
            u0 = w1[0][0]
            u1 = w1[1][0]
            c0 = b1[0]
            c1 = b1[1]

            def forward(s):
                h = tanh(dot0(s, wh) + bh)
                return (tanh(h * u0 + c0), tanh(h * u1 + c1))

            return forward

        def forward(s):
            hid = tuple(tanh(dot0(s, col) + bc) for col, bc in zip(w0, b0))
            return tuple(tanh(dot1(hid, col) + bc) for col, bc in zip(w1, b1))

        return forward

    def forward(s):
        s_ins = [s]
        cur = s
        out = None
        for l, (w_cols, b) in enumerate(layers):
            if l > 0:
                if arch == ARCH_FSCN:
                    acc = list(out)
                    for j in range(l):
                        k_cols = hidden_skips[(j, l)]
                        sj = s_ins[j]
                        dot = dots[j]
                        for c, col in enumerate(k_cols):
                            acc[c] += dot(sj, col)
                    cur = acc
                else:
                    cur = out
                s_ins.append(cur)
            dot = dots[l]
            out = [tanh(dot(cur, col) + bc) for col, bc in zip(w_cols, b)]
        if arch == ARCH_SCN:
            dot = dots[0]
            out = [o + dot(s, col) + c
                   for o, col, c in zip(out, out_skips[0], out_bias)]
        elif arch == ARCH_FSCN:
            acc = list(out)
            for j in range(nl):
                sj = s_ins[j]
                dot = dots[j]
                for c, col in enumerate(out_skips[j]):
                    acc[c] += dot(sj, col)
            out = [a + c for a, c in zip(acc, out_bias)]
        return tuple(out)

    return forward


def forward(spec: NetSpec, theta, s):
    """One forward pass.  Raw output is not clamped: the bypass/skip terms of
    SCN/FSCN may leave [-1, 1]; actuator limiting clamps downstream."""
    if len(s) != spec.n_inputs:
        raise ValueError(f"feature vector has {len(s)} entries, spec wants {spec.n_inputs}")
    return compile_forward(spec, theta)(s)


def init_params(spec: NetSpec, rng: ParkMillerRng) -> list[float]:
    """Fresh theta: every entry (trailing gain included) is 0.001 * N(0,1)."""
    return [0.001 * g for g in rng.fill_gaussian(param_count(spec))]


def theta_vvc_of(spec: NetSpec, theta) -> float:
    """Trailing filter gain, or 0.0 when the spec carries none."""
    return theta[-1] if spec.with_vvc_param else 0.0


def format_params(spec: NetSpec, theta, key: float | None = None) -> str:
    """Serialize as text: one header line, then one shortest-round-trip
    decimal per parameter.  Round-trips bitwise through parse_params."""
    head = f"{spec.arch} {','.join(str(n) for n in spec.layer_sizes)} vvc={int(spec.with_vvc_param)}"
    if key is not None:
        head += f" key={key!r}"
    lines = [head]
    lines.extend(repr(float(v)) for v in theta)
    return "\n".join(lines) + "\n"


def parse_params(text: str) -> tuple[NetSpec, list[float], float | None]:
    """Inverse of format_params; returns (spec, theta, key-or-None)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty parameter text")
    fields = lines[0].split()
    if len(fields) < 3:
        raise ValueError(f"bad parameter header: {lines[0]!r}")
    arch = fields[0]
    sizes = tuple(int(n) for n in fields[1].split(","))
    vvc = None
    key = None
    for f in fields[2:]:
        name, _, val = f.partition("=")
        if name == "vvc":
            vvc = bool(int(val))
        elif name == "key":
            key = float(val)
        else:
            raise ValueError(f"unknown header field {f!r}")
    if vvc is None:
        raise ValueError("header missing vvc flag")
    spec = NetSpec(arch, sizes, vvc)
    theta = [float(ln) for ln in lines[1:]]
    n = param_count(spec)
    if len(theta) != n:
        raise ValueError(f"expected {n} parameters, file has {len(theta)}")
    return spec, theta, key


def save_params(path, spec: NetSpec, theta, key: float | None = None) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(format_params(spec, theta, key))


def load_params(path) -> tuple[NetSpec, list[float], float | None]:
    with open(path, encoding="ascii") as f:
        return parse_params(f.read())
