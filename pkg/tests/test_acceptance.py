"""End-to-end acceptance suite.

Every criterion is checked at a fixed tolerance and prints one PASS/FAIL line
(run pytest with ``-s`` to see them as they happen).  The random-channel suite
is seeded, so the whole module is reproducible.
"""

import math

import numpy as np
import pytest

import oracles
from entcost import cli, fileio, metrics, monotones as mono, simulate as sim, \
    tensorcore as tc
from entcost.monotones import FreeSetRelaxation
from entcost.tensorcore import DimSpec

PAIR = DimSpec.of(("A", 2), ("B", 2))
PPT_STATE = FreeSetRelaxation.ppt_state()
PPT_CHOI = FreeSetRelaxation.ppt_choi()
N_SUITE = 20


def _report(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name} {detail}"


@pytest.fixture(scope="module")
def suite_channels():
    return [tc.random_channel(PAIR, PAIR, 2 + (i % 3), seed=1000 + i)
            for i in range(N_SUITE)]


@pytest.fixture(scope="module")
def suite_brackets(suite_channels):
    return [sim.cost_bracket(ch, 0.0, PPT_CHOI, seed=0) for ch in suite_channels]


@pytest.fixture(scope="module")
def swap_bracket(swap2):
    return sim.cost_bracket(swap2, 0.0, PPT_CHOI, seed=0)


@pytest.fixture(scope="module")
def identity_bracket(identity2):
    return sim.cost_bracket(identity2, 0.0, PPT_CHOI, seed=0)


def test_criterion_1_max_entangled_robustness():
    worst = 0.0
    for k in (2, 3, 4):
        phi = tc.max_entangled(k)
        value = mono.gen_robustness_state(phi, ["A"], PPT_STATE).value
        worst = max(worst, abs(value - k))
        # the relaxation is tight here: the partial-transpose trace norm is k
        assert abs(oracles.negativity_norm(phi.mat, k, k) - k) < 1e-10
    _report("1 maximally entangled robustness = K (K=2,3,4)", worst < 1e-5,
            f"worst deviation {worst:.2e}")


def test_criterion_2_resource_ratio_of_dephased_resource():
    worst = 0.0
    triv = DimSpec.of(("t", 1))
    for k in (2, 3, 4):
        phi = tc.max_entangled(k)
        joint = tc.joint_dims(triv, phi.dims)
        as_channel = lambda m: tc.ChoiChannel(triv, phi.dims, tc.DensityMatrix(joint, m))
        bv = mono.dmax_channels(as_channel(phi.mat),
                                as_channel(np.diag(np.diag(phi.mat))))
        worst = max(worst, abs(bv.value - math.log2(k)))
    _report("2 dmax against the dephased resource = log2 K (K=2,3,4)", worst < 1e-6,
            f"worst deviation {worst:.2e}")


def test_criterion_3_gated_reproduction(suite_channels):
    fail = tc.replacer_channel(PAIR, tc.DensityMatrix(PAIR, np.eye(4) / 4))
    worst = 0.0
    for ch in suite_channels:
        for k in (2, 4):
            m = sim.bell_gated_channel(ch, fail, k)
            d = metrics.diamond_distance(sim.simulate_with_resource(m, k), ch)
            worst = max(worst, d.half_distance)
    _report("3 gated simulator reproduces its target on the resource "
            f"({N_SUITE} channels, K in {{2,4}})", worst <= 1e-9,
            f"worst distance {worst:.2e}")


def _certified_plans(suite_brackets, identity_bracket, swap_bracket):
    plans = [br.upper_certificate for br in suite_brackets]
    plans.append(identity_bracket.upper_certificate)
    plans.append(swap_bracket.upper_certificate)
    return plans


def test_criterion_4_separability_sampling(suite_brackets, identity_bracket,
                                           swap_bracket):
    worst = 0.0
    for plan in _certified_plans(suite_brackets, identity_bracket, swap_bracket):
        diag = sim.fsepp_sample_check(plan.m, samples=1000, seed=5, tol=1e-8)
        worst = min(worst, diag.worst_violation) if worst else diag.worst_violation
        assert diag.passed, f"{plan.method} plan failed sampling"
    adv_in = DimSpec.of(("A", 2), ("Ap", 2), ("B", 2), ("Bp", 2))
    adv = tc.replacer_channel(adv_in, tc.max_entangled(2))
    adv_diag = sim.fsepp_sample_check(adv, samples=1000, seed=5, tol=1e-8)
    ok = worst >= -1e-8 and (not adv_diag.passed) and adv_diag.worst_violation <= -0.4
    _report("4 certified plans pass separability sampling; the entangling "
            "simulator fails", ok,
            f"worst certified {worst:.2e}, adversary {adv_diag.worst_violation:.3f}")


def test_criterion_5_cost_chain_for_certified_plans(suite_channels, suite_brackets,
                                                    identity_bracket, swap_bracket):
    worst = -np.inf
    for plan in _certified_plans(suite_brackets, identity_bracket, swap_bracket):
        simulated = sim.simulate_with_resource(plan.m, plan.k)
        bits = mono.gen_log_robustness_channel(simulated, PPT_CHOI, 0.0).value
        worst = max(worst, bits - plan.ebits)
    _report("5 generalized log-robustness of every simulated channel is at "
            "most its plan's log2 K", worst <= 1e-5, f"worst excess {worst:.2e}")


def test_criterion_6_power_chain_and_swap_exhibit(suite_brackets, identity_bracket,
                                                  swap_bracket, swap2):
    worst = -np.inf
    for plan in _certified_plans(suite_brackets, identity_bracket, swap_bracket):
        simulated = sim.simulate_with_resource(plan.m, plan.k)
        power = mono.rob_gen_power(simulated, restarts=8, seed=0).value
        worst = max(worst, math.log2(power) - plan.ebits)
    power_swap = mono.rob_gen_power(swap2, restarts=8, seed=0).value
    exhibit = abs(power_swap - 1.0) < 1e-6 and swap_bracket.lower_bits >= 2 - 1e-5
    _report("6 log2 of generated robustness never exceeds log2 K; the swap "
            "generates nothing yet costs 2 bits",
            worst <= 1e-4 and exhibit,
            f"worst excess {worst:.2e}, power(swap) {power_swap:.8f}, "
            f"swap lower {swap_bracket.lower_bits:.6f}")


def test_criterion_7_swap_bracket_tight(swap_bracket):
    ok = (abs(swap_bracket.lower_bits - 2.0) < 1e-5
          and abs(swap_bracket.upper_bits - 2.0) < 1e-5
          and swap_bracket.upper_certificate.k == 4)
    _report("7 swap bracket is [2, 2] bits (lower by SDP, upper by teleport)",
            ok, f"[{swap_bracket.lower_bits:.7f}, {swap_bracket.upper_bits:.7f}]")


def test_criterion_8_diamond_validation(identity2):
    qubit = DimSpec.of(("A", 2))
    ident = tc.identity_channel(qubit)
    same = metrics.diamond_distance(ident, ident)
    flip = tc.unitary_channel(np.array([[0, 1], [1, 0]]), qubit)
    one = metrics.diamond_distance(ident, flip)
    gaps = [same.duality_gap, one.duality_gap]
    worst_dep = 0.0
    for p in (0.1, 0.25, 0.5, 0.75, 0.9):
        dep = tc.choi_from_kraus(oracles.depolarizing_kraus(p), qubit, qubit)
        r = metrics.diamond_distance(ident, dep)
        gaps.append(r.duality_gap)
        expected = oracles.cvxpy_half_diamond(ident.choi.mat, dep.choi.mat, 2, 2)
        worst_dep = max(worst_dep, abs(r.half_distance - expected))
    ok = (same.half_distance <= 1e-9 and abs(one.half_distance - 1.0) < 1e-6
          and worst_dep < 1e-5 and max(gaps) <= 1e-7)
    _report("8 diamond distance: zero on equal channels, one for orthogonal "
            "unitaries, matches the independent oracle on depolarizing noise",
            ok, f"dep. deviation {worst_dep:.2e}, max gap {max(gaps):.2e}")


def test_criterion_9_separable_overlap():
    worst = 0.0
    for k in (2, 3):
        best = mono.max_product_overlap(tc.max_entangled(k), restarts=32, seed=0)
        worst = max(worst, abs(best - 1.0 / k))
    _report("9 best product overlap with the resource state is 1/K (K=2,3)",
            worst < 1e-4, f"worst deviation {worst:.2e}")


def test_criterion_10_determinism_and_round_trips(tmp_path, swap2):
    # file round trip is bit exact
    ch = tc.random_channel(PAIR, PAIR, 3, seed=77)
    path = tmp_path / "ch.json"
    fileio.write_channel(path, ch, name="roundtrip")
    back, _ = fileio.read_channel(path)
    round_trip_ok = np.array_equal(back.choi.mat, ch.choi.mat)

    # fixed-seed CLI runs are bit identical (wall time is the one free column)
    swap_path = tmp_path / "swap.json"
    fileio.write_channel(swap_path, swap2, name="swap")
    reports = []
    for name in ("a.tsv", "b.tsv"):
        out = tmp_path / name
        assert cli.main(["bracket", "--channel", str(swap_path), "--seed", "3",
                         "--out", str(out)]) == 0
        lines = [l.split("\t") for l in out.read_text().splitlines()]
        wall = lines[0].index("wall_ms")
        for row in lines[1:]:
            row[wall] = "0"
        reports.append(lines)
    deterministic = reports[0] == reports[1]
    plans_equal = (tmp_path / "a.tsv.plan.json").read_text() == \
        (tmp_path / "b.tsv.plan.json").read_text()

    # smoothed monotones shrink as the ball grows
    n = tc.random_channel(PAIR, PAIR, 2, seed=11)
    monotone_ok = True
    for fn in (mono.gen_log_robustness_channel, mono.std_log_robustness_channel):
        vals = [fn(n, PPT_CHOI, eps).value for eps in (0.0, 0.01, 0.1)]
        monotone_ok &= vals[0] >= vals[1] - 1e-7 and vals[1] >= vals[2] - 1e-7
    ok = round_trip_ok and deterministic and plans_equal and monotone_ok
    _report("10 bit-exact round trips, bit-identical seeded reports, and "
            "epsilon-monotone smoothed values", ok,
            f"roundtrip {round_trip_ok}, reports {deterministic and plans_equal}, "
            f"monotone {monotone_ok}")
