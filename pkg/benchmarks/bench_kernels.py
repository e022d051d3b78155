"""Compare the compiled and pure-Python tableau kernels.

Records the pivot sequence of a real feasibility solve, then replays it
on the captured initial tableau with each kernel; also times whole
solves with each kernel patched in.  Both kernels must produce
identical tableaus; the compiled one exists for speed alone.
"""

from __future__ import annotations

import argparse
import time

from ctxcheck import _kernels_py
from ctxcheck import kernels
from ctxcheck import linprog
from ctxcheck.quantum import builtin_example
from ctxcheck.sheaf import check_contextuality, global_section_system


def available_kernels() -> list[tuple[str, object]]:
    impls: list[tuple[str, object]] = [("python", _kernels_py.pivot)]
    if kernels.BACKEND == "compiled":
        from ctxcheck import _kernels_c

        impls.append(("compiled", _kernels_c.pivot))
    else:
        print("compiled kernel not built; timing the fallback only")
    return impls


def record_solve(name: str):
    """Snapshot the first tableau a solve touches and its pivot sequence."""
    example = builtin_example(name)
    system = global_section_system(example.theory)
    snapshot: list | None = None
    steps: list[tuple[int, int]] = []
    original = linprog.pivot

    def recorder(rows, pr, pc):
        nonlocal snapshot
        if snapshot is None:
            snapshot = [list(row) for row in rows]
        steps.append((pr, pc))
        original(rows, pr, pc)

    linprog.pivot = recorder
    try:
        linprog.solve_feasibility(system)
    finally:
        linprog.pivot = original
    return snapshot, steps


def replay(name: str, repeats: int) -> None:
    snapshot, steps = record_solve(name)
    if snapshot is None:
        print(f"the {name!r} solve needed no pivots; nothing to replay")
        return
    print(
        f"replaying {len(steps)} pivots on a {len(snapshot)}x{len(snapshot[0])} "
        f"tableau from the {name!r} solve, x{repeats}"
    )
    results = {}
    for impl_name, pivot in available_kernels():
        best = float("inf")
        final = None
        for _ in range(repeats):
            work = [list(row) for row in snapshot]
            start = time.perf_counter()
            for pr, pc in steps:
                pivot(work, pr, pc)
            best = min(best, time.perf_counter() - start)
            final = work
        results[impl_name] = (best, final)
        print(f"  {impl_name:>8}: {best * 1000:.1f}ms")
    if len(results) == 2:
        assert results["python"][1] == results["compiled"][1], "kernels disagree"
        ratio = results["python"][0] / max(results["compiled"][0], 1e-12)
        print(f"  speedup: {ratio:.2f}x (identical tableaus)")


def end_to_end(name: str, repeats: int) -> None:
    example = builtin_example(name)
    print(f"whole feasibility solve on {name!r}, x{repeats}")
    original = linprog.pivot
    timings = {}
    try:
        for impl_name, pivot in available_kernels():
            linprog.pivot = pivot
            best = float("inf")
            for _ in range(repeats):
                start = time.perf_counter()
                verdict = check_contextuality(example.theory)
                best = min(best, time.perf_counter() - start)
            timings[impl_name] = best
            print(
                f"  {impl_name:>8}: {best * 1000:.1f}ms "
                f"({verdict.variable_count} variables, contextual={verdict.contextual})"
            )
    finally:
        linprog.pivot = original
    if len(timings) == 2:
        ratio = timings["python"] / max(timings["compiled"], 1e-12)
        print(f"  speedup: {ratio:.2f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--example", default="spekkens-preparation")
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    print(f"active backend: {kernels.BACKEND}")
    replay(args.example, args.repeats)
    end_to_end(args.example, args.repeats)


if __name__ == "__main__":
    main()
