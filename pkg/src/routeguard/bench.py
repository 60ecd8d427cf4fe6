"""Call-overhead benchmark: direct call vs routed call with and without the dispatch cache."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import router
from .canon import SourceFile
from .cryptobox import seeded_source
from .minilang import Interpreter, parse
from .protector import protect

MODES = ("direct", "routed+cache", "routed-nocache")
WARMUP = 10_000
REPETITIONS = 5

_UTIL = "fn bump(x: Int) -> Int { return x + 1; }\n"
_MAIN = "fn main() { let x: Int = 41; print(Util.bump(x)); }\n"


@dataclass(frozen=True)
class ModeTiming:
    mode: str
    calls: int
    total_s: float
    mean_us: float  # total time / calls
    min_us: float  # fastest repetition, per call


@dataclass
class BenchReport:
    calls: int
    timings: dict[str, ModeTiming] = field(default_factory=dict)

    def ratio(self, num: str, den: str) -> float:
        return self.timings[num].mean_us / self.timings[den].mean_us

    def format(self) -> str:
        if not self.timings:
            return f"calls: {self.calls}\n(no calls measured)\n"
        lines = [f"calls: {self.calls}", f"{'mode':<16}{'mean_us':>10}{'min_us':>10}{'total_s':>10}"]
        for t in self.timings.values():
            lines.append(f"{t.mode:<16}{t.mean_us:>10.3f}{t.min_us:>10.3f}{t.total_s:>10.3f}")
        if "direct" in self.timings and "routed+cache" in self.timings:
            lines.append(f"ratio routed/direct: {self.ratio('routed+cache', 'direct'):.2f}")
        if "routed+cache" in self.timings and "routed-nocache" in self.timings:
            lines.append(f"ratio nocache/cached: {self.ratio('routed-nocache', 'routed+cache'):.2f}")
        return "\n".join(lines) + "\n"


def _fixture():
    files = [SourceFile("main", "main.ml", _MAIN), SourceFile("util", "util.ml", _UTIL)]
    protected = protect(parse(files, "main.main"), rng=seeded_source(0))
    program = parse(protected.files, "main.main")
    envelope = program.forward_calls[0][1].envelope
    return protected, program, envelope


def _callers(modes, protected, program, envelope):
    target = program.function("util", "bump", 1)
    out = {}
    for mode in modes:
        if mode == "direct":
            interp = Interpreter(program)

            def fn(f, a, _call=interp.call_function):
                return _call(f, a)

            args = (target, [41])
        elif mode in ("routed+cache", "routed-nocache"):
            state = router.init(protected.config, protected.files, cache=(mode == "routed+cache"))
            interp = Interpreter(program, state)

            def fn(env, a, _fc=state.forward_call, _t=interp):
                return _fc(env, a, None, caller="main", target=_t)

            args = (envelope, [41])
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if fn(*args) != 42:
            raise AssertionError(f"{mode}: fixture returned the wrong value")
        out[mode] = (fn, args)
    return out


def run_bench(
    calls: int,
    modes=MODES,
    *,
    warmup: int = WARMUP,
    reps: int = REPETITIONS,
) -> BenchReport:
    """Time ``calls`` invocations of one fixture function per mode.

    After ``warmup`` untimed calls per mode, each mode's calls are split into
    ``reps`` repetitions. Repetitions run one at a time, round-robin over the
    modes, so a burst of machine noise lands on every mode alike. ``mean_us``
    is total time over all calls, ``min_us`` the per-call time of the fastest
    repetition.
    """
    report = BenchReport(calls)
    if calls <= 0:
        return report
    runners = _callers(modes, *_fixture())
    for fn, args in runners.values():
        for _ in range(min(warmup, calls)):
            fn(*args)
    sizes = [calls // reps + (1 if i < calls % reps else 0) for i in range(reps)]
    total = dict.fromkeys(runners, 0.0)
    best = dict.fromkeys(runners, float("inf"))
    clock = time.perf_counter
    for size in sizes:
        if not size:
            continue
        for mode, (fn, args) in runners.items():
            t0 = clock()
            for _ in range(size):
                fn(*args)
            dt = clock() - t0
            total[mode] += dt
            best[mode] = min(best[mode], dt / size)
    for mode in runners:
        report.timings[mode] = ModeTiming(mode, calls, total[mode], total[mode] / calls * 1e6, best[mode] * 1e6)
    return report
