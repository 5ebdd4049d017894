"""Smoke test for the sisqo extension module.

Build and install first, e.g. `maturin develop --release -m crates/python/Cargo.toml`.
"""

import math
import sys

import sisqo


def check(cond, msg):
    if not cond:
        print(f"FAIL {msg}")
        sys.exit(1)
    print(f"ok   {msg}")


def main():
    circle = sisqo.Problem.circle()
    cfg = sisqo.SolverConfig.general()
    rec = sisqo.solve(circle, cfg, seed=0)
    x = rec["x_final"]
    check(rec["status"] == "converged", f"circle converged in {rec['outer_iters']} iterations")
    check(max(abs(x[0] + 1.0), abs(x[1])) < 1e-6, f"circle solution {x}")

    qp = sisqo.Problem.synthetic(30, 10, seed=4)
    xs, ys = qp.known_solution()
    feas, stat, _ = qp.kkt_metrics(xs)
    check(feas < 1e-10 and stat < 1e-10, "synthetic known solution is a KKT point")
    jac = qp.jacobian(qp.initial_point())
    check(len(jac) == 10 and len(jac[0]) == 30, "dense Jacobian shape")
    rec = sisqo.solve(qp, cfg, oracle="gaussian", eps_n=0.01, seed=1)
    check(rec["feasibility_error"] < 1e-4, f"noisy synthetic run: feasibility {rec['feasibility_error']:.2e}")

    poisson = sisqo.Problem.control("poisson_distributed", 6, 0.01)
    pair = sisqo.compare(poisson, sisqo.SolverConfig.control(), oracle="finite_sum", seed=2)
    inexact, exact = pair["inexact"], pair["exact"]
    check(exact["minres_iters"] >= pair["budget"] == inexact["minres_iters"], "comparison is budget matched")
    check(inexact["strategy"] == sisqo.STRATEGY_INEXACT and exact["strategy"] == sisqo.STRATEGY_EXACT, "strategy labels")

    toml_text = """
[problem]
kind = "synthetic"
n = 12
m = 4

[oracle]
kind = "gaussian"

[harness]
seeds = [0, 1]
eps_n_values = [0.0, 0.01]
"""
    out = sisqo.run_experiment(toml_text, ["algorithm.kappa=0.05"])
    check(len(out["records"]) == 4 and len(out["summary"]) == 2, "sweep covers seeds and noise levels")
    resolved = sisqo.load_config(toml_text, ["algorithm.kappa=0.05"])
    check(resolved["config_hash"] == out["config_hash"], "config hash matches")
    check(resolved["algorithm"]["kappa"] == 0.05, "override applied")

    check(sisqo.select_iterate([(1e-3, 1.0), (1e-8, 0.5), (1e-9, 0.7)], 1e-6) == 1, "iterate selection")
    v = sisqo.reference_function_value(1, 1, 1, 0.0, 0.5, 0.5)
    check(math.isfinite(v), f"reference function value {v:.6f}")

    try:
        sisqo.Problem.synthetic(4, 6)
    except ValueError:
        check(True, "invalid problem raises ValueError")
    else:
        check(False, "invalid problem raises ValueError")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
