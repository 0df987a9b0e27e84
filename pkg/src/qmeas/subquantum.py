"""Hidden-variable models and Bell/CHSH analysis for dichotomic settings.

Setting labels are arranged as ``(a1, b1, a2, b2)``: two alternative
settings on wing 1 and two on wing 2.  Tables always list the four pairs
in the order ``(a1, a2), (a1, b2), (b1, a2), (b1, b2)``.  Outcome index 0
means +1 and index 1 means -1.

Two model families are supported:

* :class:`HVModel` - one instantaneous hidden state ``lambda`` with a fixed
  distribution, shared by every setting.  Its tables admit a quadrivariate
  joint distribution and can never violate CHSH.
* :class:`TrajectoryModel` - each measurement context draws its own hidden
  state from a context-dependent distribution, so no common joint
  distribution needs to exist.
"""
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, NamedTuple

import numpy as np

from . import _rng
from .epr import EPRScenario, joint_probability
from .errors import TableError
from .observables import spin_pvm

PAIRS = ((0, 2), (0, 3), (1, 2), (1, 3))
PAIR_NAMES = ("A1A2", "A1B2", "B1A2", "B1B2")
SIGNS = np.array([1.0, -1.0])
# minus sign placed on each of the four correlators in turn
CHSH_VARIANTS = np.array([
    [1, 1, 1, -1],
    [1, 1, -1, 1],
    [1, -1, 1, 1],
    [-1, 1, 1, 1],
], dtype=float)
LOCAL_BOUND = 2.0
_CORR = np.outer(SIGNS, SIGNS)


class MCEstimate(NamedTuple):
    value: np.ndarray
    stderr: np.ndarray


@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """Four bivariate outcome grids, one per setting pair.

    ``stderr`` (per pair correlator) and ``chsh_stderr`` (per CHSH variant)
    are present for Monte Carlo tables; ``quadrivariate`` only for tables
    built from a single shared hidden state.
    """

    grids: np.ndarray
    settings: tuple = ("a1", "b1", "a2", "b2")
    stderr: np.ndarray = None
    chsh_stderr: np.ndarray = None
    quadrivariate: np.ndarray = None

    def __post_init__(self):
        g = np.asarray(self.grids, dtype=float)
        if g.shape != (4, 2, 2):
            raise TableError(f"need four 2x2 grids of dichotomic outcomes, got shape {g.shape}")
        if g.min() < -1e-12 or np.abs(g.sum(axis=(1, 2)) - 1).max() > 1e-9:
            raise TableError("each grid must be a probability distribution")
        g = np.clip(g, 0.0, None)
        g.setflags(write=False)
        object.__setattr__(self, "grids", g)
        object.__setattr__(self, "settings", tuple(self.settings))

    @property
    def pairs(self):
        s = self.settings
        return [(s[i], s[j]) for i, j in PAIRS]

    def correlators(self):
        """``E = sum_ij (i j) p_ij`` for each pair."""
        return np.einsum("kij,ij->k", self.grids, _CORR)


def chsh_variants(table):
    return CHSH_VARIANTS @ table.correlators()


def chsh_value(table):
    """Largest ``|S|`` over the four placements of the minus sign."""
    if not isinstance(table, CorrelationTable):
        table = CorrelationTable(table)
    return float(np.abs(chsh_variants(table)).max())


def chsh_sigma(table):
    """Monte Carlo standard error of the maximizing CHSH variant (0 if exact)."""
    k = int(np.argmax(np.abs(chsh_variants(table))))
    if table.chsh_stderr is not None:
        return float(table.chsh_stderr[k])
    if table.stderr is not None:
        return float(np.sqrt(np.sum(np.asarray(table.stderr) ** 2)))
    return 0.0


# -- models -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HVModel:
    """Instantaneous hidden-variable model.

    ``sampler(rng, n)`` draws ``n`` hidden states; ``responses[label](lam)``
    returns an ``(n, k)`` array of outcome probabilities for that setting.
    """

    sampler: Callable
    responses: Mapping[str, Callable]


@dataclass(frozen=True, eq=False)
class TrajectoryModel:
    """Contextual model: one hidden-state sampler per setting pair.

    Contexts that share the same sampler object also share the random
    stream, so a model whose samplers are all identical degenerates exactly
    to an :class:`HVModel`.
    """

    context_samplers: Mapping[tuple, Callable]
    responses: Mapping[str, Callable]
    single_samplers: Mapping[str, Callable] = field(default_factory=dict)


def _respond(model, label, lam):
    try:
        fn = model.responses[label]
    except KeyError:
        raise KeyError(f"unknown observable {label!r}") from None
    p = np.asarray(fn(lam), dtype=float)
    # nonnegative rows summing to one are automatically bounded by one
    low = p.min() if p.ndim == 2 else -1.0
    if low < -1e-12 or np.abs(p @ np.ones(p.shape[1]) - 1).max() > 1e-9:
        raise ValueError(f"response for {label!r} is not a probability vector per sample")
    return np.clip(p, 0.0, 1.0) if low < 0 else p


def hv_single_probability(model, observable, n_samples, seed):
    """Monte Carlo estimate of ``p_i = E_lambda[p_A(a_i | lambda)]``."""
    if observable not in model.responses:
        raise KeyError(f"unknown observable {observable!r}")
    if isinstance(model, TrajectoryModel):
        sampler = model.single_samplers.get(observable)
        if sampler is None:
            raise KeyError(f"no single-setting context for {observable!r}")
    else:
        sampler = model.sampler

    def stats(rng, size):
        p = _respond(model, observable, sampler(rng, size))
        return p / p.sum(axis=1, keepdims=True)

    mean, err = _rng.mc_mean(stats, n_samples, seed, f"subquantum.single.{observable}")
    return MCEstimate(mean / mean.sum(), err)


def hv_correlation_table(model, settings, n_samples, seed):
    """Correlation table of an instantaneous model, one shared ``lambda`` per trial.

    Per trial the four response vectors are multiplied into a
    quadrivariate distribution; its average is returned alongside the four
    bivariate marginals.
    """
    settings = tuple(settings)
    if len(settings) != 4:
        raise ValueError("settings must be (a1, b1, a2, b2)")
    for label in settings:
        if label not in model.responses:
            raise KeyError(f"unknown setting {label!r}")

    def stats(rng, size):
        lam = model.sampler(rng, size)
        r = [_respond(model, label, lam) for label in settings]
        left = np.einsum("ni,nj->nij", r[0], r[1]).reshape(size, 4)
        right = np.einsum("nk,nl->nkl", r[2], r[3]).reshape(size, 4)
        s = [ri @ SIGNS for ri in r]
        e = np.stack([s[i] * s[j] for i, j in PAIRS], axis=1)
        return (left.T @ right).reshape(-1), *_rng.moments(np.hstack([e, e @ CHSH_VARIANTS.T]))

    quad_sum, total, total_sq = _rng.reduce_chunks(stats, n_samples, seed, "subquantum.hv")
    _, err = _rng.mean_stderr(total, total_sq, n_samples)
    quad = np.clip(quad_sum.reshape(2, 2, 2, 2), 0.0, None)
    quad /= quad.sum()
    return CorrelationTable(_quad_marginals(quad), settings, err[:4], err[4:], quad)


def trajectory_correlation(model, settings, n_samples, seed):
    """Correlation table of a contextual model; no quadrivariate is formed."""
    settings = tuple(settings)
    if len(settings) != 4:
        raise ValueError("settings must be (a1, b1, a2, b2)")
    samplers = []
    for i, j in PAIRS:
        key = (settings[i], settings[j])
        if key not in model.context_samplers:
            raise KeyError(f"missing context sampler for {key}")
        samplers.append(model.context_samplers[key])

    grids, errs = [], []
    for k, (i, j) in enumerate(PAIRS):
        stream = next(n for n, s in enumerate(samplers) if s is samplers[k])

        def stats(rng, size, sampler=samplers[k], x=settings[i], y=settings[j]):
            lam = sampler(rng, size)
            r1, r2 = _respond(model, x, lam), _respond(model, y, lam)
            cells = np.einsum("ni,nj->nij", r1, r2).reshape(size, 4)
            return np.hstack([cells, ((r1 @ SIGNS) * (r2 @ SIGNS))[:, None]])

        mean, err = _rng.mc_mean(stats, n_samples, seed, f"subquantum.context.{stream}")
        grid = np.clip(mean[:4].reshape(2, 2), 0.0, None)
        grids.append(grid / grid.sum())
        errs.append(err[4])
    errs = np.array(errs)
    # contexts sharing a stream are correlated; sum of stderrs bounds the spread
    shared = len({id(s) for s in samplers}) < 4
    variant_err = np.full(4, errs.sum()) if shared else np.full(4, np.sqrt((errs ** 2).sum()))
    return CorrelationTable(np.array(grids), settings, errs, variant_err)


def quantum_correlation_table(state, settings, labels=("a1", "b1", "a2", "b2")):
    """Exact table ``p_ij = <psi|P_i (x) Q_j|psi>`` for four dichotomic PVMs.

    ``settings`` is ``(a1, b1, a2, b2)``: PVMs for wing 1 then wing 2.
    """
    settings = tuple(settings)
    if len(settings) != 4:
        raise ValueError("settings must hold four PVMs (a1, b1, a2, b2)")
    grids = []
    for i, j in PAIRS:
        p, q = settings[i], settings[j]
        if len(p) != 2 or len(q) != 2:
            raise TableError("CHSH analysis needs dichotomic PVMs")
        grids.append(joint_probability(EPRScenario(state, p, q)))
    return CorrelationTable(np.array(grids), labels)


# -- joint distribution oracle ---------------------------------------------

def _quad_marginals(quad):
    quad = np.asarray(quad).reshape(2, 2, 2, 2)
    out = []
    for i, j in PAIRS:
        axes = tuple(a for a in range(4) if a not in (i, j))
        out.append(quad.sum(axis=axes))
    return np.array(out)


@lru_cache(maxsize=1)
def _marginal_system():
    """Marginal map, its independent rows and every invertible 9-column basis."""
    M = np.zeros((16, 16))
    for col in range(16):
        e = np.zeros(16)
        e[col] = 1
        M[:, col] = _quad_marginals(e).reshape(-1)
    rows = []
    for r in range(16):
        if np.linalg.matrix_rank(M[rows + [r]]) > len(rows):
            rows.append(r)
    Mr = M[rows]
    rank = len(rows)
    subsets = np.array(list(itertools.combinations(range(16), rank)))
    blocks = Mr[:, subsets].transpose(1, 0, 2)
    dets = np.linalg.det(blocks)
    ok = np.abs(dets) > 0.5          # integer matrices: det is an integer
    inverses = np.linalg.inv(blocks[ok])
    return M, np.array(rows), subsets[ok], inverses


class LocalityResult(NamedTuple):
    feasible: bool
    witness: np.ndarray = None
    violated_variant: int = None
    violation: float = None
    consistent_marginals: bool = True

    def __bool__(self):
        return self.feasible


def joint_distribution_exists(table, tol=1e-10):
    """Decide whether a quadrivariate distribution reproduces the four grids.

    Exhaustive enumeration of the basic solutions of ``M p = t`` (``M`` the
    marginal map, rank 9): the polytope ``{p >= 0, M p = t}`` is non-empty
    iff one of its vertices is, and every vertex is a basic solution.
    Returns the first nonnegative basic solution as a witness, or the most
    violated CHSH variant as the certificate.
    """
    if not isinstance(table, CorrelationTable):
        table = CorrelationTable(table)
    M, rows, subsets, inverses = _marginal_system()
    t = table.grids.reshape(-1)
    variants = chsh_variants(table)
    k = int(np.argmax(np.abs(variants)))
    p0 = np.linalg.lstsq(M, t, rcond=None)[0]
    if np.linalg.norm(M @ p0 - t) > 1e-9:
        return LocalityResult(False, None, k, float(abs(variants[k])), False)
    basic = inverses @ t[rows]
    good = np.flatnonzero(basic.min(axis=1) >= -tol)
    if good.size == 0:
        return LocalityResult(False, None, k, float(abs(variants[k])), True)
    p = np.zeros(16)
    p[subsets[good[0]]] = np.clip(basic[good[0]], 0.0, None)
    p /= p.sum()
    return LocalityResult(True, p.reshape(2, 2, 2, 2))


# -- reference models --------------------------------------------------------

def direction(theta):
    """Unit vector at polar angle ``theta`` in the x-z plane."""
    return np.array([np.sin(theta), 0.0, np.cos(theta)])


def _uniform_sphere(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _sign_response(vec, flip=False):
    def respond(lam):
        plus = (lam @ vec) >= 0
        if flip:
            plus = ~plus
        return np.stack([plus, ~plus], axis=1).astype(float)
    return respond


def _labels(angles):
    if isinstance(angles, Mapping):
        return tuple(angles), tuple(angles.values())
    return ("a1", "b1", "a2", "b2"), tuple(angles)


def noncontextual_sphere_model(angles):
    """``lambda`` uniform on S^2; wing 1 gives sign(a.lambda), wing 2 -sign(b.lambda).

    Correlation ``E(a, b) = -1 + 2 theta_ab / pi``.
    """
    labels, values = _labels(angles)
    responses = {
        label: _sign_response(direction(theta), flip=k >= 2)
        for k, (label, theta) in enumerate(zip(labels, values))
    }
    return HVModel(_uniform_sphere, responses)


def _weighted_sphere(axis):
    """Sampler with density proportional to ``|axis . lambda|`` on S^2."""
    axis = np.asarray(axis, float)
    helper = np.array([1.0, 0, 0]) if abs(axis[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)

    def sampler(rng, n):
        u = np.sqrt(rng.random(n)) * np.where(rng.random(n) < 0.5, 1.0, -1.0)
        phi = rng.uniform(0, 2 * np.pi, n)
        r = np.sqrt(np.clip(1 - u * u, 0, None))
        return (u[:, None] * axis + (r * np.cos(phi))[:, None] * e1
                + (r * np.sin(phi))[:, None] * e2)
    return sampler


def contextual_reference_model(angles):
    """Context-weighted spin model reproducing the singlet correlation.

    In context ``(a, b)`` the hidden unit vector has density proportional
    to ``|a . lambda|``; wing 1 answers sign(a.lambda) and wing 2
    -sign(b.lambda), giving ``E(a, b) = -a.b`` exactly in expectation.
    """
    labels, values = _labels(angles)
    vecs = {label: direction(theta) for label, theta in zip(labels, values)}
    responses = {
        label: _sign_response(vecs[label], flip=k >= 2) for k, label in enumerate(labels)
    }
    samplers = {}
    for i, j in PAIRS:
        samplers[(labels[i], labels[j])] = _weighted_sphere(vecs[labels[i]])
    singles = {label: _uniform_sphere for label in labels}
    return TrajectoryModel(samplers, responses, singles)


def degenerate_trajectory_model(model, settings):
    """Wrap an HVModel as a TrajectoryModel with one shared sampler."""
    samplers = {(settings[i], settings[j]): model.sampler for i, j in PAIRS}
    singles = {label: model.sampler for label in settings}
    return TrajectoryModel(samplers, model.responses, singles)


def random_hv_model(rng, labels=("a1", "b1", "a2", "b2")):
    """Random instantaneous model: ``lambda`` in ``R^k`` and logistic responses.

    Steepness is drawn over several decades, so the collection mixes
    nearly deterministic and very noisy responses.
    """
    k = int(rng.integers(1, 5))
    kind = int(rng.integers(0, 3))
    if kind == 0:
        sampler = lambda r, n: r.random((n, k))  # noqa: E731
    elif kind == 1:
        sampler = lambda r, n: r.standard_normal((n, k))  # noqa: E731
    else:
        sampler = lambda r, n: _uniform_sphere(r, n)[:, :k] if k <= 3 else r.random((n, k))  # noqa: E731
    responses = {}
    for label in labels:
        w = rng.standard_normal(k) * 10 ** rng.uniform(-1, 2)
        b = rng.standard_normal() * 0.5
        freq = rng.uniform(0, 3)

        def respond(lam, w=w, b=b, freq=freq):
            z = lam[:, : len(w)] @ w + b + np.sin(freq * lam[:, 0])
            p = 0.5 * (1 + np.tanh(z / 2))
            return np.stack([p, 1 - p], axis=1)
        responses[label] = respond
    return HVModel(sampler, responses)


def chsh_settings(angles=(0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)):
    """Spin PVMs in the x-z plane for ``(a1, b1, a2, b2)``."""
    return tuple(spin_pvm(theta) for theta in angles)


def random_nosignaling_table(rng, pr_weight=None):
    """Random no-signalling box: mixture of local deterministic and PR boxes."""
    vertices = []
    for bits in itertools.product((0, 1), repeat=4):
        quad = np.zeros(16)
        quad[np.ravel_multi_index(bits, (2, 2, 2, 2))] = 1
        vertices.append(_quad_marginals(quad))
    for s in range(8):
        flip_pair, relabel = s % 4, s // 4
        box = []
        for k in range(4):
            anti = (k == flip_pair) ^ bool(relabel)
            g = np.array([[0, 0.5], [0.5, 0]]) if anti else np.array([[0.5, 0], [0, 0.5]])
            box.append(g)
        vertices.append(np.array(box))
    vertices = np.array(vertices)
    w = rng.dirichlet(np.full(len(vertices), 0.3))
    if pr_weight is not None:
        w[16:] *= pr_weight / max(w[16:].sum(), 1e-300)
        w[:16] *= (1 - pr_weight) / w[:16].sum()
    return CorrelationTable(np.einsum("v,vkij->kij", w, vertices))
