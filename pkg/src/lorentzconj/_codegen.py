"""Turn a symbolic metric into compiled geometric kernels.

The metric is given as a sympy matrix in chart coordinates. From it we derive
closed-form Christoffel symbols and their first derivatives, print them as
plain ``math`` code and compile with numba. The resulting kernels drive the
geodesic and Jacobi (variational) right-hand sides used by the integrator.

Each kernel set is written out as a small module (integrator included, with
the right-hand side substituted in) so numba can cache the machine code on
disk. The module name hashes the metric and the generator sources, so stale
caches are never picked up. ``LORENTZCONJ_CACHE`` overrides the location.
"""

import hashlib
import importlib.util
import inspect
import os
import re
import sys
import tempfile
from pathlib import Path

import sympy as sp
from sympy.printing.pycode import pycode

from . import _integrate

__all__ = ["Kernels", "build_kernels", "christoffel_symbols", "kernel_cache_dir"]

ENV_CACHE = "LORENTZCONJ_CACHE"


def christoffel_symbols(coords, g):
    """Return Gamma[a][b][c] = Γ^a_bc as nested lists of sympy expressions."""
    n = len(coords)
    ginv = sp.simplify(g.inv())
    dg = [[[sp.diff(g[b, c], coords[d]) for d in range(n)] for c in range(n)] for b in range(n)]
    gamma = [[[0] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(b, n):
                expr = 0
                for d in range(n):
                    expr += ginv[a, d] * (dg[d][b][c] + dg[d][c][b] - dg[b][c][d])
                expr = sp.simplify(expr / 2)
                gamma[a][b][c] = expr
                gamma[a][c][b] = expr
    return gamma


def _assignments(coords, targets):
    """Emit cse'd python source lines assigning ``targets`` (name, expr) pairs."""
    names = [t[0] for t in targets]
    exprs = [sp.sympify(t[1]) for t in targets]
    reps, reduced = sp.cse(exprs, symbols=sp.numbered_symbols("_c"))
    lines = []
    for i, s in enumerate(coords):
        lines.append(f"    {s} = x[{i}]")
    for sym, e in reps:
        lines.append(f"    {sym} = {pycode(e, fully_qualified_modules=True)}")
    for name, e in zip(names, reduced):
        lines.append(f"    {name} = {pycode(e, fully_qualified_modules=True)}")
    return lines


class Kernels:
    """Compiled per-spacetime kernels.

    Attributes are numba dispatchers: ``metric(x, out)``, ``christoffel(x, out)``,
    ``dchristoffel(x, out)``, ``rhs_geo(y, out)``, ``rhs_var(y, out)`` and the
    integrators ``integrate_geo`` / ``integrate_var`` with the signature of
    ``_integrate.dopri5`` minus its first argument.
    """

    def __init__(self, n, module):
        self.n = n
        self.module = module
        for name in ("metric", "christoffel", "dchristoffel", "rhs_geo", "rhs_var", "integrate_geo", "integrate_var"):
            setattr(self, name, getattr(module, name))


_RHS = """
NN = {n}


@numba.njit(cache=True)
def rhs_geo(y, out):
    G = np.empty((NN, NN, NN))
    christoffel(y[:NN], G)
    for a in range(NN):
        out[a] = y[NN + a]
        acc = 0.0
        for b in range(NN):
            for c in range(NN):
                acc += G[a, b, c] * y[NN + b] * y[NN + c]
        out[NN + a] = -acc


@numba.njit(cache=True)
def rhs_var(y, out):
    # geodesic plus the variational system A' = B, B' = -(dGamma A v v + 2 Gamma v B)
    G = np.empty((NN, NN, NN))
    dG = np.empty((NN, NN, NN, NN))
    christoffel(y[:NN], G)
    dchristoffel(y[:NN], dG)
    v = y[NN:2 * NN]
    base_x = 2 * NN
    base_v = 2 * NN + NN * NN
    for a in range(NN):
        out[a] = v[a]
        acc = 0.0
        for b in range(NN):
            for c in range(NN):
                acc += G[a, b, c] * v[b] * v[c]
        out[NN + a] = -acc
    for a in range(NN):
        for k in range(NN):
            out[base_x + a * NN + k] = y[base_v + a * NN + k]
            acc = 0.0
            for b in range(NN):
                for c in range(NN):
                    vv = v[b] * v[c]
                    for d in range(NN):
                        acc += dG[a, b, c, d] * y[base_x + d * NN + k] * vv
                    acc += 2.0 * G[a, b, c] * v[b] * y[base_v + c * NN + k]
            out[base_v + a * NN + k] = -acc
"""


def _integrator_source(rhs_name, new_name):
    src = inspect.getsource(_integrate.dopri5.py_func)
    lines = [ln for ln in src.splitlines() if not ln.startswith("@")]
    src = "\n".join(lines)
    src = src.replace("def dopri5(rhs, ", f"def {new_name}(", 1)
    src = re.sub(r"\brhs\(", f"{rhs_name}(", src)
    return "@numba.njit(cache=True)\n" + src + "\n"


def _kernel_source(coords, g):
    n = len(coords)
    safe = sp.symbols(" ".join(f"_x{i}" for i in range(n)))
    if n == 1:
        safe = (safe,)
    g = sp.Matrix(g).subs(dict(zip(coords, safe)))
    coords = list(safe)
    gamma = christoffel_symbols(coords, g)

    src = ["def metric(x, out):"]
    src += _assignments(coords, [(f"out[{a}, {b}]", g[a, b]) for a in range(n) for b in range(n)])
    src += ["", "", "def christoffel(x, out):"]
    src += _assignments(
        coords, [(f"out[{a}, {b}, {c}]", gamma[a][b][c]) for a in range(n) for b in range(n) for c in range(n)]
    )
    src += ["", "", "def dchristoffel(x, out):"]
    targets = []
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    targets.append((f"out[{a}, {b}, {c}, {d}]", sp.diff(gamma[a][b][c], coords[d])))
    src += _assignments(coords, targets)
    kern = "\n".join(src)
    kern = re.sub(r"^def ", "@numba.njit(cache=True)\ndef ", kern, flags=re.M)

    geo = _integrator_source("rhs_geo", "integrate_geo")
    var = _integrator_source("rhs_var", "integrate_var")
    consts = sorted(set(re.findall(r"\b(?:_[ABCE]\d+|STATUS_[A-Z]+)\b", geo)))
    head = [
        "# generated by lorentzconj._codegen; safe to delete",
        "import math",
        "",
        "import numba",
        "import numpy as np",
        "",
        f"from lorentzconj._integrate import _in_box, {', '.join(consts)}",
        "",
        "",
    ]
    return "\n".join(head) + kern + "\n\n" + _RHS.format(n=n) + "\n\n" + geo + "\n\n" + var


def kernel_cache_dir():
    """Directory for generated kernel modules (created on demand)."""
    env = os.environ.get(ENV_CACHE)
    base = Path(env) if env else Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "lorentzconj"
    try:
        base.mkdir(parents=True, exist_ok=True)
        probe = base / ".probe"
        probe.write_text("")
        probe.unlink()
        return base
    except OSError:
        return Path(tempfile.mkdtemp(prefix="lorentzconj-"))


_GENERATOR_HASH = hashlib.sha256(
    Path(__file__).read_bytes() + Path(_integrate.__file__).read_bytes()
).hexdigest()[:16]


def build_kernels(coords, g):
    """Compile (or load cached) kernels for the metric ``g`` (sympy Matrix) in ``coords``."""
    coords = list(coords)
    g = sp.Matrix(g)
    key = hashlib.sha256(
        (_GENERATOR_HASH + repr([str(c) for c in coords]) + sp.srepr(g)).encode()
    ).hexdigest()[:24]
    name = f"lorentzconj_kernels_{key}"
    if name in sys.modules:
        return Kernels(len(coords), sys.modules[name])
    path = kernel_cache_dir() / f"{name}.py"
    if not path.exists():
        text = _kernel_source(coords, g)
        tmp = path.with_suffix(f".{os.getpid()}.tmp")
        tmp.write_text(text)
        os.replace(tmp, path)
    spec = importlib.util.spec_from_file_location(name, path)
    module = importlib.util.module_from_spec(spec)
    sys.modules[name] = module
    spec.loader.exec_module(module)
    return Kernels(len(coords), module)
