"""End-to-end runs of the corpus documents; slow, run with `pytest -m slow`."""
from pathlib import Path
import numpy as np
import pytest
from scipy import sparse
from scipy.sparse.linalg import expm_multiply
from scipy.stats import binom, poisson
from models.document import RefinementOptions
from models.geometry import MacroState
from services.bayes_service import smooth
from services.bridge_service import occupation_time, rare_event_bound, refine
from services.dsl_service import load_model

pytestmark = [pytest.mark.slow, pytest.mark.acceptance]

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
BOTH_ABOVE_64 = poisson.sf(63, 20) ** 2


def with_options(document, **updates):
    options = RefinementOptions(**{**document.options.model_dump(), **updates})
    return document.model_copy(update={"options": options})


@pytest.fixture(scope="module")
def rare_bounds():
    document = load_model(CORPUS / "parallel_poisson.mjp")
    return {
        delta: rare_event_bound(with_options(document, delta=delta))
        for delta in (1e-2, 1e-3, 1e-4, 1e-5)
    }


@pytest.fixture(scope="module")
def toggle_bridge():
    return refine(load_model(CORPUS / "toggle_switch.mjp"))


def seir_posterior_by_enumeration(population, infect, onset, removal, horizon, sensitivity, fpr, observed):
    """Posterior of (S, E, I) at the horizon from the full state space and exact likelihoods."""
    s, e, i = np.meshgrid(*(np.arange(population + 1),) * 3, indexing="ij")
    inside = s + e + i <= population
    s, e, i = s[inside], e[inside], i[inside]
    index = np.full((population + 1,) * 3, -1)
    index[s, e, i] = np.arange(len(s))

    rows, cols, rates = [], [], []
    for ok, target, rate in (
        ((s > 0) & (i > 0), (s - 1, e + 1, i), infect * s * i),
        (e > 0, (s, e - 1, i + 1), onset * e),
        (i > 0, (s, e, i - 1), removal * i),
    ):
        source = np.flatnonzero(ok)
        rows.append(source)
        cols.append(index[tuple(t[source] for t in target)])
        rates.append(rate[source].astype(float))
    rows, cols, rates = map(np.concatenate, (rows, cols, rates))
    diagonal = np.arange(len(s))
    exit_rates = np.bincount(rows, weights=rates, minlength=len(s))
    q = sparse.csr_matrix(
        (np.concatenate([rates, -exit_rates]), (np.concatenate([rows, diagonal]), np.concatenate([cols, diagonal]))),
        shape=(len(s), len(s)),
    )

    start = np.zeros(len(s))
    start[index[population - 1, 0, 1]] = 1.0
    prior = np.clip(expm_multiply(q.T * horizon, start), 0.0, None)
    carriers = np.arange(population + 1)
    likelihood = np.array([
        sum(binom.pmf(k, n, sensitivity) * binom.pmf(observed - k, population - n, fpr) for k in range(observed + 1))
        for n in carriers
    ])
    weights = prior * likelihood[i]
    return index, weights / weights.sum()


def test_rare_event_reproduces_analytic_value(rare_bounds):
    assert BOTH_ABOVE_64 == pytest.approx(1.8625e-29, rel=1e-4)
    assert rare_bounds[1e-4].bound == pytest.approx(BOTH_ABOVE_64, rel=1e-3)
    assert rare_bounds[1e-5].bound == pytest.approx(BOTH_ABOVE_64, rel=1e-5)


def test_rare_event_table_shape(rare_bounds):
    atol = 1e-40
    deltas = sorted(rare_bounds, reverse=True)
    estimates = [rare_bounds[d].bound for d in deltas]
    assert all(later >= earlier - 10 * atol for earlier, later in zip(estimates, estimates[1:]))
    # integration error may lift the finest estimate slightly above the exact value
    assert all(estimate <= BOTH_ABOVE_64 * (1 + 1e-5) for estimate in estimates)
    reference_sizes = {1e-2: 1154, 1e-3: 2354, 1e-4: 3170, 1e-5: 3898}
    for delta, size in reference_sizes.items():
        assert size / 2 <= rare_bounds[delta].trace.final_size <= size * 2


def test_birth_death_bridge_duality():
    document = load_model(CORPUS / "birth_death.mjp")
    bridging, trace = refine(document)
    record = trace.records[-1]
    value = max(record.normalizer, record.forward_evidence)
    gap = abs(record.forward_evidence - record.normalizer)
    assert gap <= 10 * (document.options.rtol * value + record.atol)
    np.testing.assert_allclose(bridging.gamma.sum(axis=1), 1.0, atol=1e-6)


def test_exclusive_switch_modes_are_occupancies():
    document = load_model(CORPUS / "exclusive_switch.mjp")
    bridging, trace = refine(document)
    assert trace.records[-1].atol <= 1e-6 * bridging.normalizer
    np.testing.assert_allclose(bridging.gamma.sum(axis=1), 1.0, atol=1e-5)
    for box in bridging.space.states:
        assert box.lower[2:] == box.upper[2:]
        assert sum(box.lower[2:]) == 1


def test_toggle_switch_first_passage_accumulates_at_goal(toggle_bridge):
    bridging, _ = toggle_bridge
    goal = bridging.space.row_of(MacroState.point((120, 0)))
    at_goal = bridging.gamma[:, goal]
    assert np.all(np.diff(at_goal) >= -1e-6)
    assert at_goal[-1] == pytest.approx(1.0, abs=1e-4)


def test_toggle_switch_occupation_favours_low_a(toggle_bridge):
    bridging, _ = toggle_bridge
    occupation = occupation_time(bridging)
    assert sum(occupation.values()) <= 10.0 * (1 + 1e-6)
    busiest = max(occupation, key=occupation.get)
    assert busiest[0] < 32


def test_seir_posterior_is_normalized():
    result = smooth(load_model(CORPUS / "seir.mjp"))
    assert result.evidence > 0
    assert result.posterior.sum() == pytest.approx(1.0)
    assert sum(q for _, q in result.latent_joint.values()) == pytest.approx(1.0)
    infected = result.marginals["I"]
    mean = float(np.dot(infected["values"], infected["posterior"]))
    assert 0 < mean < 100


def test_seir_posterior_matches_full_enumeration():
    document = load_model(CORPUS / "seir.mjp")
    result = smooth(with_options(document, delta=1e-6))
    index, exact = seir_posterior_by_enumeration(
        100, infect=0.5, onset=3.0, removal=3.0, horizon=0.3, sensitivity=0.99, fpr=0.05, observed=30
    )
    rows = np.array([index[state] for state in result.states])
    assert np.all(rows >= 0)
    covered = exact[rows]
    distance = 0.5 * (np.abs(result.posterior - covered).sum() + (1.0 - covered.sum()))
    assert distance <= 1e-4
