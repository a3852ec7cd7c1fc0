"""
Модуль эталонной семантики LSEM

Сэмплирование точных рациональных параметров (Lambda, Omega), вычисление
ковариации Sigma = (I - Lambda)^-T Omega (I - Lambda)^-1, идентификация
Lambda по семейству HTC, значения рациональных ограничений и батареи
проверок обращения ограничений в ноль.
"""
import hashlib
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from config import DEFAULT_CONFIG, ToolkitConfig
from constraint import CovarianceMatrix, GraphicalConstraint, build_matrix, satisfies
from errors import AlgconError, FamilyError, IdentificationUndefinedError, SamplingBudgetError
from graph import MixedGraph
from htc import IdentifyingFamily, validate_family
from linalg import (
    det_bareiss,
    det_mod,
    identity,
    inverse,
    inverse_mod,
    matmul,
    matmul_mod,
    rank_mod,
    solve,
    subtract,
    transpose,
    zeros,
)
from poly import Var, sigma

logger = logging.getLogger(__name__)

Matrix = List[List[Fraction]]


def derive_seed(seed: int, *parts) -> int:
    """Детерминированный seed для (seed, испытание, ...) независимо от порядка запуска"""
    text = ":".join(str(x) for x in (seed,) + parts)
    return int.from_bytes(hashlib.blake2b(text.encode('utf-8'), digest_size=8).digest(), 'big')


def _draw(rng: random.Random, config: ToolkitConfig) -> Fraction:
    k = 0
    while k == 0:
        k = rng.randint(-config.rational_grid, config.rational_grid)
    return Fraction(k, config.rational_denominator)


@dataclass(frozen=True)
class Parameters:
    """Параметры LSEM: Lambda с носителем на D, Omega с носителем на диагонали и B"""

    nodes: Tuple[str, ...]
    lam: Tuple[Tuple[Fraction, ...], ...]
    omega: Tuple[Tuple[Fraction, ...], ...]

    def lambda_matrix(self) -> Matrix:
        return [list(row) for row in self.lam]

    def omega_matrix(self) -> Matrix:
        return [list(row) for row in self.omega]


def sample_parameters(g: MixedGraph, seed: int = 0, config: ToolkitConfig = DEFAULT_CONFIG) -> Parameters:
    """
    Случайные рациональные параметры k/8, k из [-16, 16] без нуля

    Omega строго диагонально доминирует (диагональ = 1 + сумма модулей
    внедиагональных элементов строки), поэтому положительно определена.

    Raises:
        SamplingBudgetError: I - Lambda вырождена во всех попытках
    """
    n = len(g.nodes)
    idx = g.index
    for attempt in range(config.resample_budget):
        rng = random.Random(f"params:{seed}:{attempt}")
        lam = zeros(n)
        for tail, head in sorted(g.directed):
            lam[idx[tail]][idx[head]] = _draw(rng, config)

        omega = zeros(n)
        for a, b in sorted(g.bidirected):
            value = _draw(rng, config)
            omega[idx[a]][idx[b]] = value
            omega[idx[b]][idx[a]] = value
        for i in range(n):
            omega[i][i] = 1 + sum(abs(x) for j, x in enumerate(omega[i]) if j != i)

        if det_bareiss(subtract(identity(n), lam)) != 0:
            return Parameters(g.nodes, tuple(map(tuple, lam)), tuple(map(tuple, omega)))
        logger.debug("I - Lambda singular for seed %s attempt %d, resampling", seed, attempt)

    raise SamplingBudgetError(
        f"no invertible I - Lambda after {config.resample_budget} attempts (seed {seed})"
    )


def covariance(params: Parameters) -> CovarianceMatrix:
    """Sigma = (I - Lambda)^-T Omega (I - Lambda)^-1 в точной арифметике"""
    n = len(params.nodes)
    inv = inverse(subtract(identity(n), params.lambda_matrix()))
    if inv is None:
        raise AlgconError("I - Lambda is singular")
    sigma_rows = matmul(matmul(transpose(inv), params.omega_matrix()), inv)
    return CovarianceMatrix(params.nodes, tuple(map(tuple, sigma_rows)))


def _as_matrix(sigma_matrix: CovarianceMatrix, nodes: Sequence[str]) -> Matrix:
    return [[sigma_matrix[v, w] for w in nodes] for v in nodes]


def identify_lambda(g: MixedGraph, fam: IdentifyingFamily, sigma_matrix: CovarianceMatrix) -> Matrix:
    """
    Идентификация Lambda решением систем A^(v) lambda = b^(v)

    Строки y из Y_v, лежащие в htr(v), берутся из (I - Lambda)^T Sigma;
    нужные для них столбцы Lambda уже найдены благодаря порядку fam.order.

    Returns:
        Матрица Lambda в порядке g.nodes

    Raises:
        IdentificationUndefinedError: A^(v) вырождена в этой точке
    """
    if not validate_family(g, fam):
        raise FamilyError("family is not HTC-identifying for this graph")

    nodes = list(g.nodes)
    idx = g.index
    s = _as_matrix(sigma_matrix, nodes)
    lam = zeros(len(nodes))

    def row(y: str, u: str, htr_row: bool) -> Fraction:
        value = s[idx[y]][idx[u]]
        if htr_row:
            value -= sum((lam[k][idx[y]] * s[k][idx[u]] for k in range(len(nodes))), Fraction(0))
        return value

    for v in fam.order:
        parents = sorted(g.parents(v))
        if not parents:
            continue
        htr = g.half_trek_reachable(v)
        ys = sorted(fam.sets[v])
        a = [[row(y, p, y in htr) for p in parents] for y in ys]
        b = [row(y, v, y in htr) for y in ys]
        column = solve(a, b)
        if column is None:
            raise IdentificationUndefinedError(v)
        for p, value in zip(parents, column):
            lam[idx[p]][idx[v]] = value

    return lam


def omega_from_sigma(lam: Matrix, sigma_matrix: CovarianceMatrix,
                     nodes: Optional[Sequence[str]] = None) -> Matrix:
    """(I - Lambda)^T Sigma (I - Lambda) - на модели совпадает с Omega"""
    nodes = sorted(sigma_matrix.nodes) if nodes is None else nodes
    m = subtract(identity(len(lam)), lam)
    return matmul(matmul(transpose(m), _as_matrix(sigma_matrix, nodes)), m)


def rational_constraint_value(g: MixedGraph, fam: IdentifyingFamily, sigma_matrix: CovarianceMatrix,
                              pair: Tuple[str, str]) -> Fraction:
    """Элемент [(I - Lambda)^T Sigma (I - Lambda)]_{v,w} для пары {v, w}"""
    v, w = pair
    lam = identify_lambda(g, fam, sigma_matrix)
    full = omega_from_sigma(lam, sigma_matrix, g.nodes)
    return full[g.index[v]][g.index[w]]


def sample_offmodel_covariance(nodes: Sequence[str], seed: int = 0,
                               config: ToolkitConfig = DEFAULT_CONFIG) -> CovarianceMatrix:
    """Sigma = R^T R + I для случайной рациональной R: положительно определена и в общем положении"""
    n = len(nodes)
    rng = random.Random(f"offmodel:{seed}")
    r = [[_draw(rng, config) for _ in range(n)] for _ in range(n)]
    rows = matmul(transpose(r), r)
    for i in range(n):
        rows[i][i] += 1
    return CovarianceMatrix(tuple(nodes), tuple(map(tuple, rows)))


# --- сэмплы над полем вычетов ----------------------------------------------

def _random_parameters_mod_p(g: MixedGraph, rng: random.Random, prime: int):
    n = len(g.nodes)
    idx = g.index
    lam = [[0] * n for _ in range(n)]
    omega = [[0] * n for _ in range(n)]
    for tail, head in sorted(g.directed):
        lam[idx[tail]][idx[head]] = rng.randrange(1, prime)
    for a, b in sorted(g.bidirected):
        value = rng.randrange(1, prime)
        omega[idx[a]][idx[b]] = omega[idx[b]][idx[a]] = value
    for i in range(n):
        omega[i][i] = rng.randrange(1, prime)
    return lam, omega


def _i_minus(lam, prime: int):
    n = len(lam)
    return [[(int(i == j) - lam[i][j]) % prime for j in range(n)] for i in range(n)]


def sample_covariance_mod_p(g: MixedGraph, seed: int = 0,
                            config: ToolkitConfig = DEFAULT_CONFIG) -> Dict[Var, int]:
    """Точка модели над полем вычетов: {sigma_vw: значение}"""
    prime = config.prime
    for attempt in range(config.resample_budget):
        rng = random.Random(f"modp:{seed}:{attempt}")
        lam, omega = _random_parameters_mod_p(g, rng, prime)
        inv = inverse_mod(_i_minus(lam, prime), prime)
        if inv is None:
            continue
        s = matmul_mod(matmul_mod(transpose(inv), omega, prime), inv, prime)
        nodes = g.nodes
        return {sigma(v, w): s[i][j] for i, v in enumerate(nodes) for j, w in enumerate(nodes) if i <= j}
    raise SamplingBudgetError(f"no invertible I - Lambda mod p after {config.resample_budget} attempts")


def vanishes_mod_p(gc: GraphicalConstraint, point: Dict[Var, int], prime: int) -> bool:
    m = build_matrix(gc)
    return det_mod(m.numeric(point), prime) == 0


def model_dimension(g: MixedGraph, seed: int = 0, config: ToolkitConfig = DEFAULT_CONFIG) -> int:
    """
    Размерность модели: ранг якобиана параметризации (Lambda, Omega) -> Sigma
    в случайной точке над полем вычетов
    """
    prime = config.prime
    n = len(g.nodes)
    idx = g.index
    rng = random.Random(f"jacobian:{seed}")
    for _ in range(config.resample_budget):
        lam, omega = _random_parameters_mod_p(g, rng, prime)
        inv = inverse_mod(_i_minus(lam, prime), prime)
        if inv is not None:
            break
    else:
        raise SamplingBudgetError("no invertible I - Lambda mod p for the Jacobian")

    inv_t = transpose(inv)
    upper = [(i, j) for i in range(n) for j in range(i, n)]

    def flatten(m):
        return [m[i][j] % prime for i, j in upper]

    def unit(i, j):
        e = [[0] * n for _ in range(n)]
        e[i][j] = 1
        return e

    rows = []
    # dSigma/dlambda_ij = dM^T Omega M + M^T Omega dM, dM = M E_ij M
    for tail, head in sorted(g.directed):
        dm = matmul_mod(matmul_mod(inv, unit(idx[tail], idx[head]), prime), inv, prime)
        first = matmul_mod(matmul_mod(transpose(dm), omega, prime), inv, prime)
        second = matmul_mod(matmul_mod(inv_t, omega, prime), dm, prime)
        rows.append(flatten([[first[i][j] + second[i][j] for j in range(n)] for i in range(n)]))
    omega_support = [(i, i) for i in range(n)] + [tuple(sorted((idx[a], idx[b]))) for a, b in sorted(g.bidirected)]
    for i, j in omega_support:
        e = unit(i, j)
        if i != j:
            e[j][i] = 1
        rows.append(flatten(matmul_mod(matmul_mod(inv_t, e, prime), inv, prime)))

    return rank_mod(rows, prime)


def expected_constraint_count(g: MixedGraph, seed: int = 0, config: ToolkitConfig = DEFAULT_CONFIG) -> int:
    """Коразмерность модели: n(n+1)/2 - размерность"""
    n = len(g.nodes)
    return n * (n + 1) // 2 - model_dimension(g, seed, config)


def vanishing_battery(gc: GraphicalConstraint, g: MixedGraph, trials: Optional[int] = None,
                      seed: int = 0, config: ToolkitConfig = DEFAULT_CONFIG) -> Dict[str, object]:
    """
    Батарея проверок ограничения

    Returns:
        Словарь: trials, model_pass (модельные Sigma, удовлетворяющие
        ограничению), offmodel_reject (общие Sigma, не удовлетворяющие),
        номера испытаний-исключений
    """
    trials = config.trials if trials is None else trials
    model_failures = []
    offmodel_accepts = []

    for trial in range(trials):
        params = sample_parameters(g, derive_seed(seed, 'model', trial), config)
        if not satisfies(gc, covariance(params)):
            model_failures.append(trial)
        offmodel = sample_offmodel_covariance(g.nodes, derive_seed(seed, 'offmodel', trial), config)
        if satisfies(gc, offmodel):
            offmodel_accepts.append(trial)

    if model_failures:
        logger.warning("constraint fails on %d model samples of %s", len(model_failures), g)
    if offmodel_accepts:
        logger.warning("constraint vanishes on %d off-model samples", len(offmodel_accepts))

    return {
        'trials': trials,
        'seed': seed,
        'model_pass': trials - len(model_failures),
        'offmodel_reject': trials - len(offmodel_accepts),
        'model_failures': model_failures,
        'offmodel_accepts': offmodel_accepts,
    }
