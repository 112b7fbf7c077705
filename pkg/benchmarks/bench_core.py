"""Compiled kernels against the numpy fallback.

Times local-matrix assembly and a full state solve on channel meshes of
increasing resolution with each backend, and checks that both backends
produce bit-identical matrices.

    python3 benchmarks/bench_core.py [--repeat 5] [--h 0.0625 0.03125]
"""
import argparse
import time
import warnings

import numpy as np

from coolshape import forms
from coolshape.config import load_config
from coolshape.fem import geometry, use_backend
from coolshape.state import solve_state
from coolshape.transform import pullback


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench(h, repeat):
    setup = load_config(None, [f"geometry.h_target={h}"]).build()
    mesh = setup.mesh
    th = forms.taylor_hood(mesh)
    pb = pullback(mesh)
    U = setup.state()
    w = U.u_total.cell_values(geometry(mesh, pb.degree))
    prm = setup.params
    rows = {}
    mats = {}
    for name in ("python", "compiled"):
        if use_backend(name) != name:
            print(f"  {name} backend unavailable")
            continue
        t_s, A = best_of(lambda: forms.stokes_matrix(th, prm.mu, pb), repeat)
        t_t, C = best_of(lambda: forms.temperature_matrix(th, prm.kappa, prm.rho_cp, prm.alpha, w, pb), repeat)
        t_solve, _ = best_of(lambda: solve_state(mesh, prm, setup.data, lifts=setup.lifts), max(1, repeat // 2))
        rows[name] = (t_s, t_t, t_solve)
        mats[name] = (A, C)
    use_backend("auto")
    print(f"h = {h}: {mesh.n_cells} cells")
    for name, (a, b, c) in rows.items():
        print(f"  {name:9s} stokes {a * 1e3:8.1f} ms  temperature {b * 1e3:8.1f} ms  state solve {c * 1e3:8.1f} ms")
    if len(rows) == 2:
        sp = [rows["python"][k] / rows["compiled"][k] for k in range(3)]
        same = all((x != y).nnz == 0 for x, y in zip(mats["python"], mats["compiled"]))
        print(f"  speed-up   stokes {sp[0]:.2f}x  temperature {sp[1]:.2f}x  state solve {sp[2]:.2f}x  "
              f"bit-identical: {same}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--h", type=float, nargs="+", default=[0.0625, 0.03125])
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    for h in args.h:
        bench(h, args.repeat)


if __name__ == "__main__":
    main()
