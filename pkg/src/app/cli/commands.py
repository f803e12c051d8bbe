"""
Command handlers for the hoforms command line.

Each subcommand registers its parser here and owns one handler that turns a
RunConfig into report entries. Handlers never print: they fill the Report,
and `run` renders it, compares it against a golden file when asked and maps
the outcome to the exit status (0 all residuals within tolerance, 1 any
failure or error, 2 usage error).
"""
import argparse
import random
import re
import sys
import time
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import mpmath

from app.cli.run_config import OUTPUT_FORMATS, RunConfig, build_run_config
from app.exceptions import HoformsError, InputError
from app.groups.affine_universe import AffineUniverse
from app.groups.matrix_universe import MatrixUniverse, diag
from app.groups.permutation_universe import (
    PermutationUniverse, alternating_generators, from_cycles, symmetric_generators,
)
from app.services import conv_service, forms_service, ft_series_service, hecke_service, invariants_service, lfun_service
from app.services.data_service import import_csv, load_ft, load_module, read_json, save_qexp
from app.services.forms_service import QExpansion, fricke_dual
from app.services.ft_series_service import FTSeries, from_qexpansion
from app.services.report_service import Report, compare_golden, render_json, render_table, write_report
from app.services.service_registry import registry
from config.settings import Config
from utils import console
from utils.exact_linalg import ExactScalar, matrix

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

VERBS: Dict[str, Sequence[str]] = {
    'invariants': ('solve', 'filtration', 'stabilize', 'lower', 'unitary-check', 'perfect'),
    'hecke': ('welldef', 'adjoint', 'norm', 'unimodular', 'nonunimodular', 'convolve'),
    'ft': ('delta', 'solve-delta', 'eval', 'product', 'interpolate'),
    'lfun': ('eval', 'check-fe', 'decompose', 'entire'),
    'conv': ('series', 'lambda2', 'entire', 'onevar', 'check-prop', 'check-fe'),
    'forms': ('generate', 'import-csv', 'petersson', 'check-bound'),
}

EXAMPLE_MODULES = ('a5-permutation', 'a5-regular', 's4-permutation', 'jordan3')
ACCEPTANCE_GRID = ('4+3i', '6', '7.5', '2-i')


# ---------------------------
# argument parsing helpers
# ---------------------------

def parse_complex(text: Any) -> mpmath.mpc:
    """Parse "4+3i", "2-i", "6" or "7.5" (j is accepted for i)."""
    if isinstance(text, (int, float, complex)):
        return mpmath.mpc(text)
    cleaned = str(text).replace(' ', '').replace('j', 'i')
    cleaned = re.sub(r'(^|[+-])i$', r'\g<1>1i', cleaned)
    try:
        return mpmath.mpc(complex(cleaned.replace('i', 'j')))
    except ValueError as exc:
        raise InputError(f"not a complex number: {text!r}") from exc


def parse_points(text: Any) -> List[mpmath.mpc]:
    if isinstance(text, (list, tuple)):
        return [parse_complex(x) for x in text]
    return [parse_complex(part) for part in str(text).split(',') if part.strip()]


def parse_rationals(text: Any) -> List[Fraction]:
    parts = text if isinstance(text, (list, tuple)) else str(text).split(',')
    try:
        return [Fraction(str(p).strip()) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a list of rationals: {text!r}") from exc


def _shared_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument('--config', help="YAML run file (flags override it)")
    shared.add_argument('--tolerance', type=float, help="residual tolerance")
    shared.add_argument('--seed', type=int, help="seed for randomized checks")
    shared.add_argument('--output', choices=OUTPUT_FORMATS, help="report format on stdout")
    shared.add_argument('--report', help="also write the JSON report to this file")
    shared.add_argument('--golden', help="compare the report against a stored golden report")
    shared.add_argument('--timing', action='store_true', default=None, help="add the wall time to the report")
    shared.add_argument('--quiet', action='store_true', default=None, help="no info lines on stderr")
    return shared


def register_commands(parser: argparse.ArgumentParser) -> Tuple[str, ...]:
    """Add the six subcommands with their verbs and options; returns their names."""
    shared = _shared_parser()
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('invariants', parents=[shared], help="higher invariants of matrix modules")
    p.add_argument('verb', nargs='?', choices=VERBS['invariants'])
    p.add_argument('--module', help="MatrixModule JSON file")
    p.add_argument('--example', choices=EXAMPLE_MODULES, help="built-in module")
    p.add_argument('--q', type=int, help="order q")
    p.add_argument('--vector', help="comma-separated rational entries")

    p = sub.add_parser('hecke', parents=[shared], help="Hecke pairs and operators")
    p.add_argument('--check', dest='verb', choices=VERBS['hecke'])
    p.add_argument('--p', type=int, help="prime for diag(1,p) and the p-adic example")
    p.add_argument('--g', help="group element: a,b,c,d for SL2 pairs or x,y for affine pairs")
    p.add_argument('--sigma-level', dest='sigma_level', type=int, help="Sigma = Gamma(N)")
    p.add_argument('--q', type=int, help="order of the Hecke class")
    p.add_argument('--trials', type=int, help="representative re-choices for welldef")

    p = sub.add_parser('ft', parents=[shared], help="Fourier-Taylor series")
    p.add_argument('verb', nargs='?', choices=VERBS['ft'])
    p.add_argument('--f', help="FTSeries or q-expansion JSON file")
    p.add_argument('--g', help="second series for product")
    p.add_argument('--z', help="evaluation point, e.g. 0.1+0.5i")
    p.add_argument('--q', type=int, help="order of a random series when --f is omitted")
    p.add_argument('--n-max', dest='n_max', type=int, help="frequency range of a random series")
    p.add_argument('--analytic', action='store_true', default=None, help="divide product terms by 2 pi i")

    p = sub.add_parser('lfun', parents=[shared], help="completed L-functions")
    p.add_argument('verb', nargs='?', choices=VERBS['lfun'])
    p.add_argument('--f', help="form file (q-expansion or FTSeries JSON)")
    p.add_argument('--fhat', help="dual form file")
    p.add_argument('--weight', type=int)
    p.add_argument('--width', help="cusp width w (rational)")
    p.add_argument('--s', help="comma-separated points")
    p.add_argument('--grid', choices=('critical', 'strip', 'acceptance'))
    p.add_argument('--truncation', type=int)
    p.add_argument('--method', choices=(lfun_service.INCOMPLETE_GAMMA, lfun_service.QUADRATURE))

    p = sub.add_parser('conv', parents=[shared], help="convolution L-functions")
    p.add_argument('verb', nargs='?', choices=VERBS['conv'])
    p.add_argument('--f', help="form f (weight k)")
    p.add_argument('--g', help="form g (weight l); defaults to f")
    p.add_argument('--fhat')
    p.add_argument('--ghat')
    p.add_argument('--width')
    p.add_argument('--s', help="comma-separated points")
    p.add_argument('--t', help="second variable")
    p.add_argument('--n-cut', dest='n_cut', type=int, help="outer truncation N of the double series")
    p.add_argument('--truncation', type=int)
    p.add_argument('--method', choices=(conv_service.SERIES, conv_service.CONTINUED))

    p = sub.add_parser('forms', parents=[shared], help="modular form data")
    p.add_argument('verb', nargs='?', choices=VERBS['forms'])
    p.add_argument('--form', choices=('delta', 'eisenstein', 'level11'))
    p.add_argument('--k', type=int, help="Eisenstein weight")
    p.add_argument('--n-max', dest='n_max', type=int)
    p.add_argument('--out', help="output q-expansion file")
    p.add_argument('--csv', help="two-column CSV to import")
    p.add_argument('--f', help="q-expansion file")
    p.add_argument('--weight', type=int)
    p.add_argument('--level', type=int)
    p.add_argument('--terms', type=int, help="q-expansion terms in the Petersson integrand")
    return tuple(sub.choices)


# ---------------------------
# shared input helpers
# ---------------------------

def _load_form(path: Optional[str], default: str = 'delta', n_max: int = 60) -> QExpansion:
    if path:
        return registry.load_form(path)
    return registry.builtin_form(default, n_max)


def _series_from_file(path: str) -> FTSeries:
    """FTSeries file (has "q") or a q-expansion file."""
    data = read_json(path)
    if isinstance(data, dict) and 'q' in data:
        return load_ft(path)
    return from_qexpansion(registry.load_form(path))


def _dual_form(form: QExpansion, path: Optional[str]) -> Optional[QExpansion]:
    if path:
        return fricke_dual(form, registry.load_form(path))
    if form.level == 1:
        return fricke_dual(form)
    eigenvalue = form.metadata.get('fricke_eigenvalue')
    if eigenvalue in (1, -1):
        return fricke_dual(form, eigenvalue)
    return None


def _width(cfg: RunConfig, form: QExpansion) -> Fraction:
    raw = cfg.option('width')
    return Fraction(str(raw)) if raw is not None else Fraction(form.level)


# ---------------------------
# handlers
# ---------------------------

def _example_module(name: str) -> invariants_service.MatrixModule:
    if name == 'a5-permutation':
        gens = alternating_generators(5)
        return invariants_service.permutation_module(5, {f"c{i}": p for i, p in enumerate(gens)}, "A5 on 5 points")
    if name == 'a5-regular':
        gens = [from_cycles(5, (0, 1, 2, 3, 4)), from_cycles(5, (0, 1, 2))]
        return invariants_service.regular_module({'a': gens[0], 'b': gens[1]}, "A5 regular")
    if name == 's4-permutation':
        gens = symmetric_generators(4)
        return invariants_service.permutation_module(4, {'r': gens[0], 't': gens[1]}, "S4 on 4 points")
    return invariants_service.MatrixModule(3, {'u': matrix([[1, 1, 0], [0, 1, 1], [0, 0, 1]])},
                                           invariants_service.FG_INFINITE, None, "Z by a Jordan block")


def run_invariants(cfg: RunConfig, report: Report, settings: type[Config]) -> None:
    if cfg.option('module'):
        module = load_module(cfg.option('module'))
    else:
        module = _example_module(cfg.option('example', 'a5-permutation'))
    q = cfg.option('q', 1)
    report.metadata['module'] = {'label': module.label, 'dim': module.dim, 'group_kind': module.group_kind,
                                'group_order': module.group_order}
    if cfg.verb == 'solve':
        space = invariants_service.higher_invariants(module, q, settings)
        report.value('dimension', space.dimension)
        report.value('basis', space.to_json())
        if module.is_finite:
            oracle = invariants_service.ideal_power_annihilator(module, q, settings)
            report.check('oracle_agreement', oracle == space)
    elif cfg.verb == 'filtration':
        chain = invariants_service.invariant_filtration(module, q, settings)
        report.value('dimensions', [h.dimension for h in chain])
        report.check('increasing', all(a.is_subspace_of(b) for a, b in zip(chain, chain[1:])))
    elif cfg.verb == 'stabilize':
        report.value('stabilization_index', invariants_service.stabilization_index(module, cfg.option('q'), settings))
    elif cfg.verb == 'lower':
        if not cfg.option('vector'):
            raise InputError("lower needs --vector")
        v = [ExactScalar(x) for x in parse_rationals(cfg.option('vector'))]
        lowering = invariants_service.order_lowering(v, module, q, settings)
        report.value('images', {name: [x.to_json() for x in lowering.image(name)] for name in lowering.images})
        report.value('is_zero', lowering.is_zero())
        names = list(module.generators)
        if names:
            a = module.generators[names[0]]
            b = module.generators[names[-1]]
            defect = invariants_service.lowering_homomorphism_defect(v, module, q, a, b, settings)
            report.check('homomorphism', all(not x for x in defect))
    elif cfg.verb == 'unitary-check':
        report.check('no_higher_invariants', invariants_service.no_higher_invariants_unitary_check(module, settings))
    elif cfg.verb == 'perfect':
        perfect = invariants_service.is_perfect(module)
        report.value('perfect', perfect)
        if perfect:
            chain = invariants_service.invariant_filtration(module, min(3, settings.Q_MAX), settings)
            report.check('degenerate_filtration', all(h == chain[0] for h in chain[1:]))


def _dihedral_pair() -> hecke_service.HeckePair:
    """D4 in S4 with the Klein four-group as Sigma."""
    d4 = [from_cycles(4, (0, 1, 2, 3)), from_cycles(4, (0, 2))]
    v4 = [from_cycles(4, (0, 1), (2, 3)), from_cycles(4, (0, 2), (1, 3))]
    return hecke_service.finite_pair(4, d4, v4, "D4", "V4")


def _hecke_element(cfg: RunConfig, default: Any, affine_kind: bool = False) -> Any:
    raw = cfg.option('g')
    if raw is None:
        return default
    values = parse_rationals(raw)
    if affine_kind:
        return AffineUniverse().from_json(values)
    if len(values) == 4:
        return MatrixUniverse().from_json([values[:2], values[2:]])
    if len(values) == 2:
        return diag(*values)
    raise InputError("matrix elements need --g a,b,c,d or --g x,y for diag(x,y)")


def _permutation_element(cfg: RunConfig, rng: random.Random, pair: hecke_service.HeckePair) -> Any:
    universe = PermutationUniverse(4)
    raw = cfg.option('g')
    if raw is not None:
        return universe.from_json(str(raw).split(','))
    outside = [x for x in universe.all_elements() if not pair.gamma_contains(x)]
    return rng.choice(outside)


def run_hecke(cfg: RunConfig, report: Report, settings: type[Config]) -> None:
    p = cfg.option('p', 2)
    # the finite D4 > V4 model has H_q = H_0, so only q = 0 gives a nonzero quotient
    q = cfg.option('q', 0)
    rng = random.Random(cfg.seed)
    if cfg.verb == 'unimodular':
        pair = hecke_service.sl2z_pair(1)
        g = _hecke_element(cfg, diag(1, p))
        left, right = hecke_service.unimodular_counts(pair, g, settings)
        report.value('left_count', left)
        report.value('right_count', right)
        report.check('unimodular', left == right)
        level = cfg.option('sigma_level', 1)
        if level > 1:
            fine = hecke_service.sl2z_pair(level)
            sigma_cosets = len(hecke_service.enumerate_cosets(fine, g, hecke_service.LEFT, "sigma", settings))
            report.value('sigma_left_count', sigma_cosets)
            report.check('sigma_count_consistent', sigma_cosets == left * fine.sigma_index)
    elif cfg.verb == 'nonunimodular':
        g = _hecke_element(cfg, None, affine_kind=True)
        left, right = hecke_service.nonunimodular_example(p, g, settings)
        report.value('left_count', left)
        report.value('right_count', right)
        report.metadata['pair'] = f"Z_{p} x| Z_{p}^x in Q_{p} x| Q_{p}^x"
    elif cfg.verb in ('welldef', 'adjoint', 'norm'):
        pair = _dihedral_pair()
        action = hecke_service.permutation_action(4)
        g = _permutation_element(cfg, rng, pair)
        report.metadata['pair'] = f"{pair.label} > {pair.sigma_label} in S4"
        report.inputs['g'] = list(g)
        if cfg.verb == 'welldef':
            module = action.module(pair.sigma_generators, pair.sigma_label)
            basis = invariants_service.higher_invariants(module, q, settings).basis
            cls = hecke_service.hecke_class(pair, action, basis[0], q, settings)
            outcome = hecke_service.welldefinedness_check(pair, action, cls, g, cfg.option('trials', 100), rng,
                                                          settings=settings)
            report.value('image', outcome['image'])
            report.value('trials', outcome['trials'])
            report.check('well_defined', outcome['failures'] == 0)
        else:
            checks = hecke_service.unitary_model_checks(pair, action, g, q, settings)
            report.value('quotient_dim', checks['quotient_dim'])
            report.check('nonzero_quotient', not checks['degenerate'])
            report.value('norm', checks['norm'])
            report.value('bound', checks['bound'])
            report.value('adjoint_constant', checks['adjoint_constant'])
            report.metadata['symmetric_double_coset'] = checks['symmetric_double_coset']
            if cfg.verb == 'norm':
                report.residual('norm_excess', max(0.0, checks['norm'] - checks['bound']), settings.UNITARY_TOLERANCE)
            else:
                report.residual('adjoint_residual', checks['adjoint_residual'], settings.UNITARY_TOLERANCE)
                if checks['self_adjoint'] is not None:
                    report.check('self_adjoint', checks['self_adjoint'])
    elif cfg.verb == 'convolve':
        pair = hecke_service.sl2z_pair(1)
        g = _hecke_element(cfg, diag(1, p))
        element = hecke_service.HeckeAlgebraElement.basis(pair, g)
        product = hecke_service.hecke_convolve(element, element, pair, settings)
        keys = sorted(product.terms, key=str)
        report.value('terms', {str(key): product.terms[key] for key in keys})
        report.value('representatives', {str(key): [str(x) for x in product.reps[key]] for key in keys})


def _ft_input(cfg: RunConfig, name: str, rng: random.Random) -> FTSeries:
    path = cfg.option(name)
    if path:
        return _series_from_file(path)
    order = cfg.option('q', 1) if name == 'f' else 0
    return ft_series_service.random_series(rng, order, 1, cfg.option('n_max', 10))


def _max_difference(a: FTSeries, b: FTSeries) -> float:
    worst = 0.0
    for n in range(min(a.n_min, b.n_min), max(a.n_max, b.n_max) + 1):
        for j in range(max(a.order, b.order) + 1):
            worst = max(worst, abs(complex(a.coefficient(n, j) - b.coefficient(n, j))))
    return worst


def run_ft(cfg: RunConfig, report: Report, settings: type[Config]) -> None:
    rng = random.Random(cfg.seed)
    f = _ft_input(cfg, 'f', rng)
    report.inputs['f_shape'] = {'q': f.order, 'n_min': f.n_min, 'n_max': f.n_max}
    if cfg.verb == 'delta':
        report.value('delta', ft_series_service.delta(f).to_dict())
    elif cfg.verb == 'solve-delta':
        g = ft_series_service.solve_delta(f)
        report.value('solution', g.to_dict())
        report.residual('round_trip', _max_difference(ft_series_service.delta(g), f))
    elif cfg.verb == 'eval':
        z = parse_complex(cfg.option('z', '0.1+0.5i'))
        result = ft_series_service.evaluate(f, z, settings)
        report.value('value', result.value)
        report.tail('value', result.tail_bound)
    elif cfg.verb == 'product':
        if f.order:
            raise InputError("product takes order-0 series; pass --q 0 or an order-0 file")
        g = _ft_input(cfg, 'g', rng)
        product = ft_series_service.second_order_product(f, g, bool(cfg.option('analytic', False)))
        report.value('product', product.to_dict())
    elif cfg.verb == 'interpolate':
        outcome = ft_series_service.interpolation_check(f.truncated(f.n_min + 5), settings=settings)
        report.value('condition', outcome['condition'])
        report.residual('coefficient_error', outcome['max_coefficient_error'], max(cfg.tolerance, 1e-6))


def _form_length(cfg: RunConfig, default: int) -> int:
    """Generated forms are as long as the requested truncation."""
    return cfg.option('truncation', default)


def _lfun_job(cfg: RunConfig) -> lfun_service.LFunctionJob:
    path = cfg.option('f')
    document = read_json(path) if path else None
    if isinstance(document, dict) and 'q' in document:
        f = load_ft(path)
        f_hat = load_ft(cfg.option('fhat')) if cfg.option('fhat') else None
        weight = cfg.option('weight', f.weight)
        width = Fraction(str(cfg.option('width', 1)))
        label = f.label or 'series'
    else:
        form = _load_form(path, n_max=_form_length(cfg, 60))
        dual = _dual_form(form, cfg.option('fhat'))
        f = from_qexpansion(form)
        f_hat = from_qexpansion(dual) if dual is not None else None
        weight = cfg.option('weight', form.weight)
        width = _width(cfg, form)
        label = form.label
    if weight is None:
        raise InputError("the weight is unknown; pass --weight")
    return lfun_service.LFunctionJob(f, f_hat, int(weight), width, cfg.option('truncation'), label)


def _grid(cfg: RunConfig, k: int, default: str) -> List[mpmath.mpc]:
    if cfg.option('s'):
        return parse_points(cfg.option('s'))
    name = cfg.option('grid', default)
    if name == 'critical':
        return lfun_service.critical_grid(k)
    if name == 'strip':
        return lfun_service.strip_grid(k)
    return parse_points(ACCEPTANCE_GRID)


def run_lfun(cfg: RunConfig, report: Report, settings: type[Config]) -> None:
    job = _lfun_job(cfg)
    report.metadata['functional_equation'] = 'Lambda(f,s) = i^k w^(k/2-s) Lambda(f_hat,k-s)'
    report.metadata['job'] = {'label': job.label, 'k': job.k, 'w': str(job.w), 'dual': job.f_hat is not None}
    method = cfg.option('method', lfun_service.INCOMPLETE_GAMMA)
    if cfg.verb == 'eval':
        for s in _grid(cfg, job.k, 'critical'):
            value = lfun_service.completed_lambda(job, s, method, settings)
            key = mpmath.nstr(s, 8)
            report.value(key, value.value)
            report.tail(key, value.tail_bound)
    elif cfg.verb == 'check-fe':
        worst = 0.0
        for s in _grid(cfg, job.k, 'critical'):
            worst = max(worst, lfun_service.fe_residual(job, s, settings))
        report.residual('functional_equation', worst)
    elif cfg.verb == 'decompose':
        points = parse_points(cfg.option('s', '20'))
        worst = max(lfun_service.lambda_nu_decomposition_residual(job, s, settings) for s in points)
        report.residual('decomposition', worst)
    elif cfg.verb == 'entire':
        values = lfun_service.entirety_scan(job, _grid(cfg, job.k, 'strip') if cfg.option('s') else None, settings)
        report.value('values', {mpmath.nstr(v.s, 8): v.value for v in values})
        report.check('finite', all(mpmath.isfinite(v.value) for v in values))


def _conv_job(cfg: RunConfig) -> conv_service.ConvolutionJob:
    n_max = _form_length(cfg, 40)
    f_form = _load_form(cfg.option('f'), n_max=n_max)
    g_form = _load_form(cfg.option('g'), n_max=n_max) if cfg.option('g') else f_form
    f_dual = _dual_form(f_form, cfg.option('fhat'))
    g_dual = _dual_form(g_form, cfg.option('ghat'))
    if f_dual is None or g_dual is None:
        raise InputError("convolution jobs need dual forms; pass --fhat/--ghat or use Fricke eigenforms")
    width = _width(cfg, f_form)
    return conv_service.ConvolutionJob(from_qexpansion(f_form), from_qexpansion(f_dual), from_qexpansion(g_form),
                                       from_qexpansion(g_dual), f_form.weight, g_form.weight, width,
                                       cfg.option('truncation'), f"{f_form.label}#{g_form.label}")


def _conv_value(report: Report, key: str, value: conv_service.ConvValue) -> None:
    report.value(key, value.to_dict())
    if value.tail_bound:
        report.tail(key, value.tail_bound)


def run_conv(cfg: RunConfig, report: Report, settings: type[Config]) -> None:
    job = _conv_job(cfg)
    report.metadata['job'] = {'label': job.label, 'k': job.k, 'l': job.l, 'w': str(job.w)}
    report.metadata['resolved_constants'] = conv_service.resolve_prop_constants(job.l)
    t = parse_complex(cfg.option('t', job.l - 1))
    if cfg.verb == 'series':
        for s in parse_points(cfg.option('s', '12')):
            _conv_value(report, mpmath.nstr(s, 8), conv_service.conv_series(job, s, t, cfg.option('n_cut'), settings))
    elif cfg.verb == 'lambda2':
        for s in parse_points(cfg.option('s', '12')):
            _conv_value(report, mpmath.nstr(s, 8), conv_service.lambda2(job, s, t, cfg.option('method'), settings))
    elif cfg.verb == 'entire':
        for s in parse_points(cfg.option('s', '8')):
            value = conv_service.conv_entire(job, s, t, True, cfg.tolerance, settings)
            _conv_value(report, mpmath.nstr(s, 8), value)
            if 'limit_gap' in value.extras:
                report.residual(f"limit_gap@{mpmath.nstr(s, 8)}", value.extras['limit_gap'],
                                cfg.tolerance * max(1.0, float(abs(value.value))))
    elif cfg.verb == 'onevar':
        for s in parse_points(cfg.option('s', '6')):
            _conv_value(report, mpmath.nstr(s, 8), conv_service.lambda_onevar(job, s, settings=settings))
    elif cfg.verb == 'check-prop':
        for s in parse_points(cfg.option('s', '4,6,8')):
            report.residual(f"prop_identity@{mpmath.nstr(s, 8)}", conv_service.prop_identity_residual(job, s, settings))
    elif cfg.verb == 'check-fe':
        for s in parse_points(cfg.option('s', '5,6+i')):
            report.residual(f"onevar_fe@{mpmath.nstr(s, 8)}", conv_service.fe_onevar_residual(job, s, settings))


def run_forms(cfg: RunConfig, report: Report, settings: type[Config]) -> None:
    if cfg.verb == 'generate':
        name = cfg.option('form', 'delta')
        n_max = cfg.option('n_max', 12)
        if name == 'delta':
            form = forms_service.delta_qexp(n_max)
            check = forms_service.eta_product_qexp({1: 24}, min(n_max, 50), 12, 1)
            report.check('eta_cross_check', all(form.coefficient(n) == check.coefficient(n)
                                                for n in range(1, min(n_max, 50) + 1)))
        elif name == 'eisenstein':
            form = forms_service.eisenstein_qexp(cfg.option('k', 4), n_max)
        else:
            form = forms_service.level11_qexp(n_max)
        report.value('label', form.label)
        report.value('coefficients', {str(n): form.coefficient(n) for n in range(0, min(n_max, 12) + 1)})
        if cfg.option('out'):
            save_qexp(form, cfg.option('out'))
            report.metadata['written'] = str(cfg.option('out'))
    elif cfg.verb == 'import-csv':
        if not cfg.option('csv'):
            raise InputError("import-csv needs --csv")
        form = import_csv(cfg.option('csv'), cfg.option('weight', 12), cfg.option('level', 1))
        report.value('label', form.label)
        report.value('n_max', form.n_max)
        if cfg.option('out'):
            save_qexp(form, cfg.option('out'))
            report.metadata['written'] = str(cfg.option('out'))
    elif cfg.verb == 'petersson':
        form = _load_form(cfg.option('f'), n_max=cfg.option('n_max', 20))
        result = forms_service.petersson_numeric(form, form, form.weight, cfg.option('terms'), settings)
        report.value('petersson', result.to_dict())
        report.check('positive', float(mpmath.re(result.value)) > 0)
    elif cfg.verb == 'check-bound':
        form = _load_form(cfg.option('f'), n_max=cfg.option('n_max', 50))
        outcome = forms_service.ramanujan_bound_check(form)
        report.value('worst_ratio', outcome['worst_ratio'])
        report.check('ramanujan_bound', outcome['holds'])


HANDLERS: Dict[str, Callable[[RunConfig, Report, type[Config]], None]] = {
    'invariants': run_invariants,
    'hecke': run_hecke,
    'ft': run_ft,
    'lfun': run_lfun,
    'conv': run_conv,
    'forms': run_forms,
}


# ---------------------------
# run
# ---------------------------

def execute(cfg: RunConfig, settings: type[Config] = Config) -> Report:
    """Run one configured command; HoformsErrors end up in the report."""
    report = Report(cfg.command, cfg.verb, cfg.seed, cfg.tolerance, cfg.inputs())
    started = time.perf_counter()
    console.info(f"{cfg.command} {cfg.verb} (seed {cfg.seed})", icon="🚀")
    try:
        with mpmath.workdps(settings.MP_DPS):
            HANDLERS[cfg.command](cfg, report, settings)
    except HoformsError as exc:
        console.error(f"{exc.kind} error: {exc.message}")
        report.error(exc)
    if cfg.timing:
        report.wall_time = time.perf_counter() - started
    if report.status == 'ok':
        console.success(f"{cfg.command} {cfg.verb} passed")
    return report


def run(cfg: RunConfig, settings: type[Config] = Config, stream: Any = None) -> int:
    """
    Execute, render and judge one run.

    Returns:
        0 when every residual is within tolerance and no golden drift was found, 1 otherwise
    """
    stream = stream if stream is not None else sys.stdout
    if cfg.verb not in VERBS[cfg.command]:
        console.error(f"unknown verb {cfg.verb!r} for {cfg.command}; choose from {', '.join(VERBS[cfg.command])}")
        return EXIT_USAGE
    console.set_verbose(not cfg.quiet)
    report = execute(cfg, settings)
    drift: List[str] = []
    if cfg.golden:
        try:
            drift = compare_golden(report, cfg.golden, cfg.tolerance)
        except HoformsError as exc:
            console.error(exc.message)
            drift = ['golden']
    text = render_json(report) if cfg.output == 'json' else render_table(report)
    stream.write(text)
    if cfg.report:
        write_report(report, cfg.report)
    return EXIT_OK if report.status == 'ok' and not drift else EXIT_FAILURE


def dispatch(args: argparse.Namespace, settings: type[Config] = Config, stream: Any = None) -> int:
    """Merge the parsed flags into a RunConfig and run it."""
    try:
        cfg = build_run_config(args, settings)
    except HoformsError as exc:
        console.error(exc.message)
        return EXIT_USAGE if isinstance(exc, InputError) else EXIT_FAILURE
    return run(cfg, settings, stream)
