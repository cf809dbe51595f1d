"""Config files for the command line tools.

The format is a small INI dialect:

* ``[section]`` headers, ``key = value`` lines, blank lines and full-line
  comments starting with ``#`` or ``;``.
* Sections: ``[problem]`` (m, p, N), ``[density]`` (family, alpha, r0, k,
  k1, k2, k0, rho1, rho2), ``[barrier]`` (regime, C, a, T, beta, b, eps),
  ``[solver]`` (R, cells, t_end, cfl_safety, blowup_threshold, boundary,
  reaction, output_times), ``[harness]`` (initial_data, scale_factor,
  seed).
* ``R = auto`` and ``output_times = auto`` defer to regime-specific rules;
  ``initial_data`` is one of ``equals_barrier``, ``scaled_barrier``,
  ``constant:<value>``, ``csv:<path>``.

Parsing is done by hand rather than with :mod:`configparser` so that every
diagnostic carries a line number and all problems in a file are reported
together.  Omitted barrier parameters are filled by the feasibility search;
``[barrier]`` may be left out entirely for plain simulation runs, in which
case R, t_end and output_times must be explicit and the initial data cannot
reference a barrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .barrier import BlowupSubsolution, GE1Barrier, GE2Barrier
from .density import (
    FAMILIES,
    DensityParams,
    ProblemConstants,
)
from .feasibility import (
    REGIME_BLOWUP,
    REGIME_GE1A,
    REGIME_GE1B,
    REGIME_GE2,
    REGIMES,
    FeasibilityReport,
    SearchConfig,
    _ge1_shape_defaults,
    find_params,
)
from .harness import (
    INIT_CONSTANT,
    INIT_CSV,
    INIT_EQUALS_BARRIER,
    INIT_SCALED_BARRIER,
    Barrier,
    InitialData,
    Scenario,
    barrier_from_params,
)
from .solver import BOUNDARIES, BOUNDARY_DIRICHLET, SolverConfig

_SECTIONS = ("problem", "density", "barrier", "solver", "harness")
_IGNORED = object()  # sentinel section for keys under an unknown header


@dataclass(frozen=True)
class ConfigIssue:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class ConfigError(ValueError):
    """Carries every problem found in a config file."""

    def __init__(self, issues: List[ConfigIssue]):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


_REQUIRED = object()


class _Section:
    """Typed access to one parsed section, accumulating issues."""

    def __init__(self, name, table, header_line, issues, defaults):
        self.name = name
        self.table = table if table is not None else {}
        self.present = table is not None
        self.header_line = header_line
        self.issues = issues
        self.defaults = defaults
        self.seen = set()

    def _fail(self, line: int, message: str) -> None:
        self.issues.append(ConfigIssue(line, f"[{self.name}] {message}"))

    def _fetch(self, key, default):
        self.seen.add(key)
        if key in self.table:
            return self.table[key]
        if default is _REQUIRED:
            self._fail(self.header_line, f"missing required key '{key}'")
            return None
        if default is not None:
            self.defaults.append(f"[{self.name}] {key} = {default} (default)")
        return (None, default)

    def get_float(self, key, default=_REQUIRED):
        got = self._fetch(key, default)
        if got is None:
            return None
        raw_s, line_or_val = got
        if raw_s is None:
            return line_or_val
        try:
            val = float(raw_s)
        except ValueError:
            self._fail(line_or_val, f"{key}: expected a number, got {raw_s!r}")
            return None
        if not math.isfinite(val):
            self._fail(line_or_val, f"{key}: value must be finite, got {raw_s!r}")
            return None
        return val

    def get_int(self, key, default=_REQUIRED):
        got = self._fetch(key, default)
        if got is None:
            return None
        raw_s, line_or_val = got
        if raw_s is None:
            return line_or_val
        try:
            return int(raw_s)
        except ValueError:
            self._fail(line_or_val, f"{key}: expected an integer, got {raw_s!r}")
            return None

    def get_bool(self, key, default=_REQUIRED):
        got = self._fetch(key, default)
        if got is None:
            return None
        raw_s, line_or_val = got
        if raw_s is None:
            return line_or_val
        low = raw_s.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        self._fail(line_or_val, f"{key}: expected true/false, got {raw_s!r}")
        return None

    def get_choice(self, key, choices, default=_REQUIRED):
        """Case-insensitive match against canonical spellings."""
        got = self._fetch(key, default)
        if got is None:
            return None
        raw_s, line_or_val = got
        if raw_s is None:
            return line_or_val
        for c in choices:
            if raw_s.lower() == c.lower():
                return c
        self._fail(line_or_val, f"{key}: expected one of {', '.join(choices)}, got {raw_s!r}")
        return None

    def get_str(self, key, default=_REQUIRED):
        got = self._fetch(key, default)
        if got is None:
            return None
        raw_s, line_or_val = got
        if raw_s is None:
            return line_or_val
        return raw_s

    def get_float_list_or_auto(self, key, default=_REQUIRED):
        got = self._fetch(key, default)
        if got is None:
            return None
        raw_s, line_or_val = got
        if raw_s is None:
            return line_or_val
        if raw_s.lower() == "auto":
            return "auto"
        vals = []
        for part in raw_s.split(","):
            part = part.strip()
            try:
                vals.append(float(part))
            except ValueError:
                self._fail(line_or_val, f"{key}: expected numbers or 'auto', got {part!r}")
                return None
        return tuple(vals)

    def get_float_or_auto(self, key, default=_REQUIRED):
        got = self._fetch(key, default)
        if got is None:
            return None
        raw_s, line_or_val = got
        if raw_s is None:
            return line_or_val
        if raw_s.lower() == "auto":
            return "auto"
        try:
            val = float(raw_s)
        except ValueError:
            self._fail(line_or_val, f"{key}: expected a number or 'auto', got {raw_s!r}")
            return None
        return val

    def has(self, key) -> bool:
        return key in self.table

    def finish(self) -> None:
        for key, (_, line) in self.table.items():
            if key not in self.seen:
                self._fail(line, f"unknown key '{key}'")


def _parse_sections(text: str):
    sections: Dict[str, Dict[str, Tuple[str, int]]] = {}
    header_lines: Dict[str, int] = {}
    issues: List[ConfigIssue] = []
    current: Union[str, None, object] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                issues.append(ConfigIssue(lineno, f"unterminated section header {line!r}"))
                current = _IGNORED
                continue
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                issues.append(
                    ConfigIssue(lineno, f"unknown section [{name}]; expected one of {_SECTIONS}")
                )
                current = _IGNORED
                continue
            if name in sections:
                issues.append(ConfigIssue(lineno, f"duplicate section [{name}]"))
            else:
                sections[name] = {}
                header_lines[name] = lineno
            current = name
            continue
        if "=" not in line:
            issues.append(ConfigIssue(lineno, f"expected 'key = value' or '[section]', got {line!r}"))
            continue
        if current is _IGNORED:
            continue
        if current is None:
            issues.append(ConfigIssue(lineno, "key before any section header"))
            continue
        key, _, val = line.partition("=")
        key = key.strip().lower()
        val = val.strip()
        if not key:
            issues.append(ConfigIssue(lineno, "empty key"))
            continue
        if key in sections[current]:
            issues.append(ConfigIssue(lineno, f"[{current}] duplicate key '{key}'"))
            continue
        sections[current][key] = (val, lineno)
    return sections, header_lines, issues


@dataclass
class LoadedConfig:
    constants: ProblemConstants
    density: DensityParams
    regime: Optional[str]
    barrier_given: Dict[str, float]
    solver_R: Union[float, str]  # number or "auto"
    solver_cells: int
    solver_t_end: Optional[float]  # None means 10 T
    solver_kwargs: Dict[str, object]
    output_times: Union[Tuple[float, ...], str]  # tuple or "auto"
    initial: InitialData
    seed: int
    defaults_used: List[str] = field(default_factory=list)


def loads(text: str) -> LoadedConfig:
    """Parse and validate config text; raises :class:`ConfigError` with all
    problems found."""
    tables, header_lines, issues = _parse_sections(text)
    defaults: List[str] = []

    def section(name: str) -> _Section:
        if name not in tables and name in ("problem", "density"):
            issues.append(ConfigIssue(0, f"missing required section [{name}]"))
        return _Section(name, tables.get(name), header_lines.get(name, 0), issues, defaults)

    prob = section("problem")
    m = prob.get_float("m")
    p = prob.get_float("p")
    N = prob.get_int("n")
    prob.finish()

    dens_s = section("density")
    family = dens_s.get_choice("family", FAMILIES)
    alpha = dens_s.get_float("alpha")
    r0 = dens_s.get_float("r0")
    k = dens_s.get_float("k", 1.0)
    k1 = dens_s.get_float("k1", 1.0)
    k2 = dens_s.get_float("k2", 1.0)
    k0 = dens_s.get_float("k0", None)
    rho1 = dens_s.get_float("rho1", None)
    rho2 = dens_s.get_float("rho2", None)
    dens_s.finish()

    bar_s = section("barrier")
    regime = None
    barrier_given: Dict[str, float] = {}
    if bar_s.present:
        regime = bar_s.get_choice("regime", REGIMES)
        for key in ("c", "a", "t", "beta", "b", "eps"):
            if bar_s.has(key):
                val = bar_s.get_float(key)
                if val is not None:
                    barrier_given[key] = val
            else:
                bar_s.seen.add(key)
    bar_s.finish()

    solver_s = section("solver")
    R = solver_s.get_float_or_auto("r", "auto")
    cells = solver_s.get_int("cells", 256)
    t_end = solver_s.get_float("t_end", None)
    cfl_safety = solver_s.get_float("cfl_safety", 0.45)
    blowup_threshold = solver_s.get_float("blowup_threshold", 1.0e6)
    boundary = solver_s.get_choice("boundary", BOUNDARIES, BOUNDARY_DIRICHLET)
    reaction = solver_s.get_bool("reaction", True)
    output_times = solver_s.get_float_list_or_auto("output_times", "auto")
    solver_s.finish()

    har_s = section("harness")
    init_raw = har_s.get_str("initial_data", INIT_EQUALS_BARRIER)
    scale_factor = har_s.get_float("scale_factor", 1.0)
    seed = har_s.get_int("seed", 0)
    har_s.finish()

    initial = None
    if init_raw is not None and scale_factor is not None:
        init_line = har_s.table.get("initial_data", ("", har_s.header_line))[1]
        try:
            initial = _parse_initial(init_raw, scale_factor)
        except ValueError as exc:
            issues.append(ConfigIssue(init_line, f"[harness] initial_data: {exc}"))

    constants = density = None
    if None not in (m, p, N):
        try:
            constants = ProblemConstants(m=m, p=p, N=N)
        except ValueError as exc:
            issues.append(ConfigIssue(header_lines.get("problem", 0), f"[problem] {exc}"))
    if None not in (family, alpha, r0, k, k1, k2):
        try:
            density = DensityParams(
                family=family, alpha=alpha, r0=r0, k=k, k1=k1, k2=k2, k0=k0, rho1=rho1, rho2=rho2
            )
        except ValueError as exc:
            issues.append(ConfigIssue(header_lines.get("density", 0), f"[density] {exc}"))

    if issues:
        raise ConfigError(sorted(issues, key=lambda i: i.line))

    return LoadedConfig(
        constants=constants,
        density=density,
        regime=regime,
        barrier_given=barrier_given,
        solver_R=R,
        solver_cells=cells,
        solver_t_end=t_end,
        solver_kwargs={
            "cfl_safety": cfl_safety,
            "blowup_threshold": blowup_threshold,
            "boundary": boundary,
            "reaction": reaction,
        },
        output_times=output_times,
        initial=initial,
        seed=seed,
        defaults_used=defaults,
    )


def load(path: str) -> LoadedConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def _parse_initial(raw: str, factor: float) -> InitialData:
    low = raw.strip()
    if low == INIT_EQUALS_BARRIER:
        return InitialData(kind=INIT_EQUALS_BARRIER)
    if low == INIT_SCALED_BARRIER:
        return InitialData(kind=INIT_SCALED_BARRIER, factor=factor)
    if low.startswith("constant:"):
        return InitialData(kind=INIT_CONSTANT, value=float(low.partition(":")[2]))
    if low.startswith("csv:"):
        return InitialData(kind=INIT_CSV, path=low.partition(":")[2].strip())
    raise ValueError(
        "expected equals_barrier, scaled_barrier, constant:<value> or csv:<path>, "
        f"got {raw!r}"
    )


# ---------------------------------------------------------------------------
# resolution: config -> runnable objects


@dataclass
class Resolved:
    constants: ProblemConstants
    density: DensityParams
    regime: Optional[str]
    barrier: Optional[Barrier]
    report: Optional[FeasibilityReport]
    solver: SolverConfig
    initial: InitialData
    seed: int
    defaults_used: List[str]

    def scenario(self) -> Scenario:
        if self.barrier is None or self.regime is None:
            raise ValueError("config has no barrier regime; only plain simulation is possible")
        return Scenario(
            constants=self.constants,
            density=self.density,
            regime=self.regime,
            barrier=self.barrier,
            solver=self.solver,
            initial=self.initial,
            seed=self.seed,
        )


def _build_explicit_barrier(loaded: LoadedConfig, defaults: List[str]) -> Barrier:
    cc, dens, regime = loaded.constants, loaded.density, loaded.regime
    given = loaded.barrier_given
    if regime in (REGIME_GE1A, REGIME_GE1B):
        T_default = 2.0 if regime == REGIME_GE1A else 1.0
        beta_default = 0.05 if regime == REGIME_GE1A else 0.0
        T = given.get("t", T_default)
        beta = given.get("beta", beta_default)
        search = SearchConfig(b=given.get("b"), eps=given.get("eps"))
        b, eps = _ge1_shape_defaults(cc, dens, search)
        for key, val in (("T", T), ("beta", beta), ("b", b), ("eps", eps)):
            if key.lower() not in given:
                defaults.append(f"[barrier] {key} = {val:g} (default)")
        return GE1Barrier(cc, C=given["c"], T=T, b=b, eps=eps, r0=dens.r0, beta=beta)
    T = given.get("t", 1.0)
    if "t" not in given:
        defaults.append("[barrier] T = 1 (default)")
    if regime == REGIME_GE2:
        return GE2Barrier(cc, C=given["c"], a=given["a"], T=T, bbar=dens.alpha + 2.0, r0=dens.r0)
    return BlowupSubsolution(cc, C=given["c"], a=given["a"], T=T, bunder=dens.alpha + 1.0)


def resolve(loaded: LoadedConfig) -> Resolved:
    """Fill search-derived barrier parameters and regime-dependent solver
    defaults; raises ``ValueError``/``FeasibilitySearchError`` on
    inconsistent requests."""
    defaults = list(loaded.defaults_used)
    cc, dens = loaded.constants, loaded.density
    barrier: Optional[Barrier] = None
    report: Optional[FeasibilityReport] = None

    if loaded.regime is not None:
        given = loaded.barrier_given
        if loaded.regime in (REGIME_GE2, REGIME_BLOWUP) and ("c" in given) != ("a" in given):
            raise ValueError(
                f"regime {loaded.regime} needs both C and a (or neither, to search)"
            )
        if "c" in given:
            barrier = _build_explicit_barrier(loaded, defaults)
        else:
            search = SearchConfig(
                b=given.get("b"), eps=given.get("eps"), beta=given.get("beta")
            )
            barrier, report = find_params(cc, dens, loaded.regime, T=given.get("t"), search=search)
            defaults.append(f"[barrier] C = {report.params['C']:.6g} (search)")

    if loaded.solver_t_end is not None:
        t_end = loaded.solver_t_end
    else:
        if barrier is None:
            raise ValueError("[solver] t_end is required when no barrier regime is set")
        t_end = 10.0 * barrier.T
        defaults.append(f"[solver] t_end = {t_end:g} (10 T)")

    if loaded.solver_R == "auto":
        if barrier is None:
            raise ValueError("[solver] R must be a number when no barrier regime is set")
        if loaded.regime == REGIME_GE2:
            R = 2.0 * barrier.support_radius(t_end)
        elif loaded.regime == REGIME_BLOWUP:
            R = 2.0 * barrier.support_radius(0.0)
        else:
            R = 2.0 * dens.r0
        defaults.append(f"[solver] R = {R:.6g} (auto)")
    else:
        R = float(loaded.solver_R)

    if loaded.output_times == "auto":
        if barrier is None:
            raise ValueError("[solver] output_times must be explicit when no barrier regime is set")
        output_times = tuple(float(t) for t in np.linspace(0.0, t_end, 21))
        defaults.append("[solver] output_times = 21 evenly spaced (auto)")
    else:
        output_times = tuple(loaded.output_times)

    if barrier is None and loaded.initial.kind in (INIT_EQUALS_BARRIER, INIT_SCALED_BARRIER):
        raise ValueError(
            f"[harness] initial_data = {loaded.initial.kind} needs a barrier regime"
        )

    solver = SolverConfig(
        t_end=t_end,
        R=R,
        cells=loaded.solver_cells,
        output_times=output_times,
        **loaded.solver_kwargs,
    )
    return Resolved(
        constants=cc,
        density=dens,
        regime=loaded.regime,
        barrier=barrier,
        report=report,
        solver=solver,
        initial=loaded.initial,
        seed=loaded.seed,
        defaults_used=defaults,
    )
