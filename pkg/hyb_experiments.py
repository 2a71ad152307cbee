"""
HYB - Experiment Registry

Each experiment is a pure kernel evaluated at one parameter point:

    kernel(point, ctx) -> PointResult(rows, summary)

`point` holds the resolved [params] values merged with the current sweep
coordinates (angular units). Trajectory experiments return one row per
time sample; scalar experiments return one row (coupling-map returns one
row per coupling, long format).

Parameter resolution for the electromechanical inputs:
    Delta_a : delta_a | delta_a_over_omega_m * omega_m | mean-field solve
              (model.meanfield) | omega_a - omega_d
    G       : G | G_over_omega_m * omega_m | G_over_Gc * G_c
              | G_c - Gc_minus_G_over_omega_m * omega_m | from omega_minus
              | from omega_minus_over_delta_a * Delta_a | mean-field g sqrt(N)
    lambda  : lam | geometry estimate (model.lambda_from_geometry) | default
"""
import logging
import math
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Set, Tuple

from hyb_dispersive import (
    DispersiveParams, dispersive_error_check, exact_stark_shift, stark_shift,
)
from hyb_dynamics import GateParams, RabiParams, full_dissipative_experiment, rabi_experiment
from hyb_errors import ConfigError, CouplingRangeError, NumericalError, SimulationError
from hyb_meanfield import (
    MeanFields, SystemParams, cavity_linewidth, coupling_estimate, drive_for_photon_number, solve_mean_fields,
    spin_drive_for_cancellation, spin_transition_frequency, thermal_occupation,
)
from hyb_polariton import (
    coupling_for_omega_minus, critical_coupling, mixing_angle, polariton_frequencies,
    spin_polariton_couplings,
)

logger = logging.getLogger("SIM")

IDENTITY_TOL = 1e-9
SYSTEM_FIELDS = {f.name for f in fields(SystemParams)} - {'constants'}
DEFAULTS = SystemParams()


@dataclass
class RunContext:
    model: Mapping = field(default_factory=dict)
    numerics: Mapping = field(default_factory=dict)

    def flag(self, key: str, default: bool = False) -> bool:
        return bool(self.model.get(key, default))

    def num(self, key: str, default=None):
        return self.numerics.get(key, default)

    def integer(self, key: str, default: int) -> int:
        return int(self.numerics.get(key, default))

    @property
    def labeling(self) -> str:
        return str(self.model.get('labeling', 'printed'))

    @property
    def epsilon(self) -> float:
        return float(self.model.get('epsilon', 0.0))


@dataclass
class PointResult:
    rows: List[Dict[str, object]]
    summary: Dict[str, float] = field(default_factory=dict)


Kernel = Callable[[Dict[str, float], RunContext], PointResult]


@dataclass(frozen=True)
class Experiment:
    name: str
    kernel: Kernel
    description: str
    default_axes: Tuple[Tuple[str, str], ...] = ()
    trajectory: bool = False


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------

EXCLUSIVE_GROUPS = (
    frozenset({'delta_a', 'delta_a_over_omega_m'}),
    frozenset({'G', 'G_over_omega_m', 'G_over_Gc', 'Gc_minus_G_over_omega_m', 'omega_minus',
               'omega_minus_over_delta_a'}),
    frozenset({'delta', 'delta1', 'zeta'}),
)


def merge_point(base: Mapping[str, float], coords: Mapping[str, float]) -> Dict[str, float]:
    """Sweep coordinates replace base values that set the same quantity another way"""
    point = dict(base)
    for group in EXCLUSIVE_GROUPS:
        if group & coords.keys():
            for key in group - coords.keys():
                point.pop(key, None)
    point.update(coords)
    return point


def system_params(point: Mapping[str, float], ctx: RunContext) -> SystemParams:
    values = {k: v for k, v in point.items() if k in SYSTEM_FIELDS}
    p = SystemParams(**values)
    if ctx.flag('kappa_from_Q') and 'kappa' not in point:
        p = p.replace(kappa=cavity_linewidth(p.omega_a, p.Q))
    if 'B_ex' in point and 'omega_NV' not in point:
        p = p.replace(omega_NV=spin_transition_frequency(point['B_ex'], p.constants))
    if 'N' in point and 'Omega_d' not in point:
        p = p.replace(Omega_d=drive_for_photon_number(p, point['N']))
    return p


def resolve_lambda(point: Mapping[str, float], ctx: RunContext) -> float:
    if 'lam' in point:
        return point['lam']
    if ctx.flag('lambda_from_geometry'):
        p = system_params(point, ctx)
        return coupling_estimate(p.d, p.omega_a, p.L_a, p.constants)
    return DEFAULTS.lam


def _meanfield_solver(point: Mapping[str, float], ctx: RunContext) -> Callable[[], MeanFields]:
    """Lazy, cached mean-field solve for one point"""
    cache: List[MeanFields] = []

    def solve() -> MeanFields:
        if not cache:
            cache.append(solve_mean_fields(system_params(point, ctx), tol=float(ctx.num('tol', 1e-12))))
        return cache[0]

    return solve


def resolve_detuning(point: Mapping[str, float], ctx: RunContext,
                     meanfield: Optional[Callable[[], MeanFields]] = None) -> Tuple[float, float]:
    """(Delta_a, omega_m) for one point"""
    omega_m = point.get('omega_m', DEFAULTS.omega_m)
    if 'delta_a' in point:
        delta_a = point['delta_a']
    elif 'delta_a_over_omega_m' in point:
        delta_a = point['delta_a_over_omega_m'] * omega_m
    elif ctx.flag('meanfield'):
        delta_a = (meanfield or _meanfield_solver(point, ctx))().delta_a
    else:
        delta_a = system_params(point, ctx).delta_a0
    return delta_a, omega_m


def resolve_coupling(point: Mapping[str, float], ctx: RunContext, delta_a: float, omega_m: float,
                     meanfield: Optional[Callable[[], MeanFields]] = None) -> float:
    """Linearized coupling G for one point at the given Delta_a, omega_m"""
    if 'G' in point:
        return point['G']
    if 'G_over_omega_m' in point:
        return point['G_over_omega_m'] * omega_m
    if 'G_over_Gc' in point:
        return point['G_over_Gc'] * critical_coupling(delta_a, omega_m)
    if 'Gc_minus_G_over_omega_m' in point:
        G = critical_coupling(delta_a, omega_m) - point['Gc_minus_G_over_omega_m'] * omega_m
        if G < 0:
            raise CouplingRangeError(
                f"[SIM] (G_c - G)/omega_m = {point['Gc_minus_G_over_omega_m']:.6g} gives negative G"
            )
        return G
    if 'omega_minus' in point:
        return coupling_for_omega_minus(delta_a, omega_m, point['omega_minus'])
    if 'omega_minus_over_delta_a' in point:
        return coupling_for_omega_minus(delta_a, omega_m, point['omega_minus_over_delta_a'] * delta_a)
    if ctx.flag('meanfield'):
        return (meanfield or _meanfield_solver(point, ctx))().G
    raise ConfigError("[SIM] No linearized coupling given (G, G_over_omega_m, G_over_Gc, "
                      "Gc_minus_G_over_omega_m, omega_minus, omega_minus_over_delta_a or model.meanfield)")


def resolve_electromechanics(point: Mapping[str, float], ctx: RunContext) -> Tuple[float, float, float]:
    """(Delta_a, omega_m, G) for one point"""
    meanfield = _meanfield_solver(point, ctx)
    delta_a, omega_m = resolve_detuning(point, ctx, meanfield)
    return delta_a, omega_m, resolve_coupling(point, ctx, delta_a, omega_m, meanfield)


DETUNING_INPUTS = frozenset({'delta_a', 'delta_a_over_omega_m', 'omega_m', 'omega_a', 'omega_d'})
MEANFIELD_INPUTS = frozenset({'g', 'kappa', 'gamma_m', 'Omega_d', 'N', 'Q'})
GEOMETRY_INPUTS = frozenset({'d', 'L_a', 'omega_a'})
POLARITON_QUANTITIES = ('G', 'omega_plus', 'omega_minus', 'theta')
COUPLING_QUANTITIES = ('lam_plus', 'lam_minus', 'eta_plus', 'eta_minus')


def _per_point(swept: Set[str], ctx: RunContext) -> Tuple[List[str], bool, bool, bool]:
    """(names varying along the sweep, detuning varies, G varies, lambda varies)"""
    detuning_inputs = DETUNING_INPUTS | (MEANFIELD_INPUTS if ctx.flag('meanfield') else frozenset())
    varies_detuning = bool(swept & detuning_inputs)
    varies_coupling = varies_detuning or bool(swept & EXCLUSIVE_GROUPS[1])
    varies_lam = 'lam' in swept or (ctx.flag('lambda_from_geometry') and bool(swept & GEOMETRY_INPUTS))

    names: List[str] = []
    if varies_detuning:
        names += ['delta_a', 'G_c'] + (['omega_m'] if 'omega_m' in swept else [])
    if varies_coupling:
        names += list(POLARITON_QUANTITIES)
    if varies_lam:
        names.append('lam')
    if varies_coupling or varies_lam:
        names += list(COUPLING_QUANTITIES)
    return names, varies_detuning, varies_coupling, varies_lam


def base_metadata(point: Mapping[str, float], ctx: RunContext,
                  swept: Iterable[str] = ()) -> Dict[str, object]:
    """
    Derived electromechanical quantities at the base point

    Values that change along a swept axis are left out and named in
    `per_point` (the rows carry them). A base point without a coupling G
    still gets its G-independent values (Delta_a, omega_m, G_c, lambda).
    `lam_plus_source` says whether lambda_+ is given or derived from the
    electromechanical model. The trace and determinant identities of the
    polariton frequencies are re-checked here; a violation is a numerical
    failure.
    """
    swept = set(swept)
    names, varies_detuning, varies_coupling, varies_lam = _per_point(swept, ctx)
    out: Dict[str, object] = {}
    if names:
        out['per_point'] = ",".join(names)

    given = [k for k in ('lam_plus1', 'lam_plus') if k in point or k in swept]
    if given:
        out['lam_plus_source'] = 'given'
        if given[0] in point and given[0] not in swept:
            out['lam_plus_given'] = point[given[0]]
    if not varies_lam:
        out['lam'] = resolve_lambda(point, ctx)
    if varies_detuning:
        return out

    meanfield = _meanfield_solver(point, ctx)
    try:
        delta_a, omega_m = resolve_detuning(point, ctx, meanfield)
        out.update({'delta_a': delta_a, 'omega_m': omega_m, 'G_c': critical_coupling(delta_a, omega_m)})
    except SimulationError as e:
        out['base_status'] = e.status
        return out
    if varies_coupling:
        return out

    try:
        G = resolve_coupling(point, ctx, delta_a, omega_m, meanfield)
    except ConfigError:
        return out
    except SimulationError as e:
        out['base_status'] = e.status
        return out
    out['G'] = G
    out.setdefault('lam_plus_source', 'model')
    try:
        w_plus, w_minus = polariton_frequencies(delta_a, omega_m, G)
    except SimulationError as e:
        out['base_status'] = e.status
        return out
    out.update({'omega_plus': w_plus, 'omega_minus': w_minus,
                'theta': mixing_angle(delta_a, omega_m, G)})

    s = delta_a ** 2 + omega_m ** 2
    trace_res = abs(w_plus ** 2 + w_minus ** 2 - s) / s
    det_ref = delta_a * omega_m * (delta_a * omega_m - 4.0 * G ** 2)
    det_res = abs(w_plus ** 2 * w_minus ** 2 - det_ref) / (delta_a * omega_m) ** 2
    if trace_res > IDENTITY_TOL or det_res > IDENTITY_TOL:
        raise NumericalError(
            f"[SIM] Polariton identities violated: trace {trace_res:.2e}, determinant {det_res:.2e}"
        )
    out['identity_trace_residual'] = trace_res
    out['identity_det_residual'] = det_res

    if w_minus > 0 and not varies_lam:
        lp, lm, ep, em = spin_polariton_couplings(out['lam'], delta_a, omega_m, G, labeling=ctx.labeling)
        out.update({'lam_plus': lp, 'lam_minus': lm, 'eta_plus': ep, 'eta_minus': em})
    return out


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def spectrum_kernel(point: Dict[str, float], ctx: RunContext) -> PointResult:
    delta_a, omega_m, G = resolve_electromechanics(point, ctx)
    G_c = critical_coupling(delta_a, omega_m)
    w_plus, w_minus = polariton_frequencies(delta_a, omega_m, G)
    return PointResult([{
        'G': G, 'G_c': G_c, 'G_over_Gc': G / G_c, 'delta_a': delta_a, 'omega_m': omega_m,
        'omega_plus': w_plus, 'omega_minus': w_minus, 'theta': mixing_angle(delta_a, omega_m, G),
    }])


def coupling_map_kernel(point: Dict[str, float], ctx: RunContext) -> PointResult:
    """Couplings relative to lambda, one row per coupling"""
    delta_a, omega_m, G = resolve_electromechanics(point, ctx)
    G_c = critical_coupling(delta_a, omega_m)
    _, w_minus = polariton_frequencies(delta_a, omega_m, G)
    values = spin_polariton_couplings(1.0, delta_a, omega_m, G, labeling=ctx.labeling, epsilon=ctx.epsilon)
    base = {
        'delta_a_over_omega_m': delta_a / omega_m,
        'G': G,
        'omega_minus': w_minus,
        'omega_minus_over_delta_a': w_minus / delta_a,
        'Gc_minus_G_over_omega_m': (G_c - G) / omega_m,
    }
    rows = []
    for name, value in zip(COUPLING_QUANTITIES, values):
        row = dict(base)
        row['quantity'] = name
        row['ratio_to_lambda'] = value
        rows.append(row)
    return PointResult(rows)


def _low_polariton_from_model(point: Mapping[str, float], ctx: RunContext) -> Tuple[float, float]:
    """(lambda_+, omega_minus) of the resolved electromechanical point"""
    delta_a, omega_m, G = resolve_electromechanics(point, ctx)
    lam = resolve_lambda(point, ctx)
    lam_plus = spin_polariton_couplings(lam, delta_a, omega_m, G, labeling=ctx.labeling, epsilon=ctx.epsilon)[0]
    return lam_plus, polariton_frequencies(delta_a, omega_m, G)[1]


def _trajectory_rows(traj) -> List[Dict[str, object]]:
    names = list(traj.observables)
    rows = []
    for i, t in enumerate(traj.times):
        row = {'t': float(t)}
        for name in names:
            row[name] = float(traj.observables[name][i])
        rows.append(row)
    return rows


def rabi_kernel(point: Dict[str, float], ctx: RunContext) -> PointResult:
    defaults = RabiParams()
    omega_minus = point.get('omega_minus')
    if 'lam_plus' in point:
        lam_plus = point['lam_plus']
    else:
        lam_plus, model_omega_minus = _low_polariton_from_model(point, ctx)
        omega_minus = model_omega_minus if omega_minus is None else omega_minus
    omega_minus = defaults.omega_minus if omega_minus is None else omega_minus
    params = RabiParams(
        lam_plus=lam_plus,
        omega_minus=omega_minus,
        delta_nv=point.get('delta_nv'),
        kappa=point.get('kappa', defaults.kappa),
        gamma_perp=point.get('gamma_perp', defaults.gamma_perp),
        gamma_par=point.get('gamma_par', defaults.gamma_par),
        n_max=ctx.integer('n_max', defaults.n_max),
        periods=float(ctx.num('periods', defaults.periods)),
        t_final=ctx.num('t_final'),
        dt=ctx.num('dt'),
    )
    traj = rabi_experiment(params)
    summary = {k: float(v) for k, v in traj.metadata.items()}
    summary['lam_plus'] = lam_plus
    summary['omega_minus'] = omega_minus
    return PointResult(_trajectory_rows(traj), summary)


def _gate_params(point: Mapping[str, float], ctx: RunContext) -> GateParams:
    defaults = GateParams()
    lam1 = point.get('lam_plus1', point.get('lam_plus'))
    omega_minus = point.get('omega_minus')
    if lam1 is None:
        lam1, model_omega_minus = _low_polariton_from_model(point, ctx)
        omega_minus = model_omega_minus if omega_minus is None else omega_minus

    n_a_th = point.get('n_a_th')
    n_m_th = point.get('n_m_th')
    if ctx.flag('thermal_from_T'):
        p = system_params(point, ctx)
        n_a_th = thermal_occupation(p.omega_a, p.T) if n_a_th is None else n_a_th
        n_m_th = thermal_occupation(p.omega_m, p.T) if n_m_th is None else n_m_th

    return GateParams(
        lam_plus1=lam1,
        lam_plus2=point.get('lam_plus2'),
        delta1=point.get('delta1', point.get('delta')),
        delta2=point.get('delta2'),
        delta_ratio=point.get('delta_ratio', defaults.delta_ratio),
        omega_minus=defaults.omega_minus if omega_minus is None else omega_minus,
        N_pl=point.get('N_pl', defaults.N_pl),
        kappa=point.get('kappa', defaults.kappa),
        gamma_m=point.get('gamma_m', defaults.gamma_m),
        n_a_th=defaults.n_a_th if n_a_th is None else n_a_th,
        n_m_th=defaults.n_m_th if n_m_th is None else n_m_th,
        gamma_perp=point.get('gamma_perp', defaults.gamma_perp),
        gamma_par=point.get('gamma_par', defaults.gamma_par),
        n_a=ctx.integer('n_a', defaults.n_a),
        n_b=ctx.integer('n_b', defaults.n_b),
        gate_periods=float(ctx.num('gate_periods', defaults.gate_periods)),
        t_final=ctx.num('t_final'),
        dt=ctx.num('dt'),
        enforce_resonance=ctx.flag('enforce_resonance', True),
    )


def iswap_kernel(point: Dict[str, float], ctx: RunContext) -> PointResult:
    params = _gate_params(point, ctx)
    traj = full_dissipative_experiment(params)
    summary = {k: float(v) for k, v in traj.metadata.items()}
    return PointResult(_trajectory_rows(traj), summary)


def stark_kernel(point: Dict[str, float], ctx: RunContext) -> PointResult:
    lam_plus = point.get('lam_plus', 2.0 * math.pi * 3.5e6)
    delta = point.get('delta', 2.0 * math.pi * 35e6)
    N_pl = point.get('N_pl', 1.0)
    zero_point, shift = stark_shift(lam_plus, delta, N_pl)
    row = {
        'lam_plus': lam_plus, 'delta': delta, 'N_pl': N_pl, 'zeta': abs(lam_plus / delta),
        'zero_point': zero_point, 'shift': shift, 'shift_hz': shift / (2.0 * math.pi),
        'exact_shift': None, 'exact_relative_error': None,
    }
    if float(N_pl).is_integer() and N_pl > 0:
        exact = exact_stark_shift(lam_plus, delta, int(N_pl))
        row['exact_shift'] = exact
        row['exact_relative_error'] = abs(exact - shift) / abs(shift)
    return PointResult([row])


def meanfield_kernel(point: Dict[str, float], ctx: RunContext) -> PointResult:
    p = system_params(point, ctx)
    mf = solve_mean_fields(p, tol=float(ctx.num('tol', 1e-12)))
    cancel = spin_drive_for_cancellation(resolve_lambda(point, ctx), mf.a_mean)
    row = {
        'Omega_d': abs(p.Omega_d), 'N': mf.N, 'delta_a': mf.delta_a, 'G': mf.G,
        'a_re': mf.a_mean.real, 'a_im': mf.a_mean.imag,
        'b_re': mf.b_mean.real, 'b_im': mf.b_mean.imag,
        'residual': mf.residual, 'fallback': int(mf.used_fallback),
        'G_c': None, 'G_over_Gc': None,
        'Omega_NV_re': cancel.real, 'Omega_NV_im': cancel.imag,
        'lam_geometry': coupling_estimate(p.d, p.omega_a, p.L_a, p.constants),
        'n_a_th': thermal_occupation(p.omega_a, p.T) if p.omega_a > 0 else None,
        'n_m_th': thermal_occupation(p.omega_m, p.T),
    }
    if mf.delta_a > 0:
        row['G_c'] = critical_coupling(mf.delta_a, p.omega_m)
        row['G_over_Gc'] = mf.G / row['G_c']
    return PointResult([row])


def dispersive_check_kernel(point: Dict[str, float], ctx: RunContext) -> PointResult:
    lam1 = point.get('lam_plus1', point.get('lam_plus', 2.0 * math.pi * 3.5e6))
    lam2 = point.get('lam_plus2', lam1)
    if 'zeta' in point:
        if point['zeta'] <= 0:
            raise CouplingRangeError(f"[SIM] zeta must be > 0, got {point['zeta']!r}")
        delta1, delta2 = lam1 / point['zeta'], lam2 / point['zeta']
    else:
        delta1 = point.get('delta1', point.get('delta', 10.0 * lam1))
        delta2 = point.get('delta2', delta1)
    dp = DispersiveParams((lam1, lam2), (delta1, delta2))
    metric = dispersive_error_check(
        (lam1, lam2), (delta1, delta2),
        n_max=ctx.integer('n_max', 4),
        t_final=ctx.num('t_final'),
        n_times=ctx.integer('n_times', 201),
    )
    return PointResult([{
        'zeta': max(dp.zeta), 'delta1': delta1, 'delta2': delta2,
        'g_eff': dp.g_eff, 'g_eff_hz': dp.g_eff_hz, 'max_distance': metric,
    }])


REGISTRY: Dict[str, Experiment] = {
    e.name: e for e in (
        Experiment("spectrum", spectrum_kernel, "Polariton frequencies versus linearized coupling",
                   (("G_over_omega_m", "0:0.5:51"),)),
        Experiment("coupling-map", coupling_map_kernel, "Spin-polariton couplings near the critical point",
                   (("delta_a_over_omega_m", "1, 10"), ("Gc_minus_G_over_omega_m", "1e-4:0.4:40:log"))),
        Experiment("rabi", rabi_kernel, "Spin / low-polariton Rabi oscillations", trajectory=True),
        Experiment("iswap", iswap_kernel, "iSWAP fidelity under thermal dissipation", trajectory=True),
        Experiment("stark", stark_kernel, "ac Stark shift per polariton", (("N_pl", "0, 1, 2, 3"),)),
        Experiment("meanfield", meanfield_kernel, "Driven steady state and derived coupling"),
        Experiment("dispersive-check", dispersive_check_kernel,
                   "Full versus effective two-spin dynamics", (("zeta", "0.2, 0.1, 0.05"),)),
    )
}


def get_experiment(name: str) -> Experiment:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(f"[SIM] Unknown experiment '{name}'; choose from {sorted(REGISTRY)}")


__all__ = [
    'RunContext', 'PointResult', 'merge_point', 'Experiment', 'REGISTRY', 'get_experiment', 'system_params',
    'resolve_lambda', 'resolve_detuning', 'resolve_coupling', 'resolve_electromechanics', 'base_metadata',
    'COUPLING_QUANTITIES',
]
