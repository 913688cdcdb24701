import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from vertexfusion.affine import OutOfWindow, contragredient, generalized_weyl_example, induce
from vertexfusion.affine import vacuum_module, weyl_module
from vertexfusion.field import QQ_FIELD as F
from vertexfusion.formal import RegularFunction, WindowError
from vertexfusion.fusion import (FusionError, GammaRGenerator, KLModel, QzActions, TensorWindow,
                                 WindowFunctional, check_gamma_stability, check_intertwining_jacobi,
                                 check_lift_independence, check_slt, check_yprime_closure,
                                 compatibility_report, compute_circ, compute_hboxtr, compute_ZN,
                                 fusion_level, gamma_action, gamma_vector, lift, lprime_operator,
                                 minimal_slt_order, slt_descendant_bound, slt_solution_space,
                                 tau_component, tau_direct, tensor_lowest, tensor_mode,
                                 yprime_action)
from vertexfusion.linalg import EchelonBasis, add_into
from vertexfusion.sugawara import Sugawara

Z1 = F(1)


@pytest.fixture(scope="module")
def mods(sl2):
    return vacuum_module(sl2, -1, 5), weyl_module(sl2, 1, -1, 5)


@pytest.fixture(scope="module")
def vv(mods):
    V, _ = mods
    acts = QzActions(V, V, Z1)
    win = TensorWindow(V, V, 2)
    vac = WindowFunctional(win, {(0, 0): F(1)})
    return acts, win, vac


@pytest.fixture(scope="module")
def vacuum_kl(mods):
    # the degree-0 element of Z^1 extending the dual of 1 x 1
    V, _ = mods
    return KLModel(V, V, Z1, 1).basis_functional(0)


@pytest.fixture(scope="module")
def vm(mods):
    V, M = mods
    return QzActions(V, M, Z1), TensorWindow(V, M, 2)


def defined(lam, p):
    try:
        return lam.value(p)
    except WindowError:
        return None


def test_window_is_depth_prefix(mods):
    V, M = mods
    win = TensorWindow(V, M, 3)
    for d in range(4):
        assert all(win.depth(p) <= d for p in win.pairs[:win.size(d)])
        assert all(win.depth(p) > d for p in win.pairs[win.size(d):])
    with pytest.raises(FusionError):
        TensorWindow(V, M, 6)


def test_window_functional_is_undefined_outside(vv, mods):
    _, win, vac = vv
    outside = next(p for p in TensorWindow(*mods, 3).pairs if p not in win.index)
    with pytest.raises(WindowError):
        vac.value(outside)
    assert WindowFunctional(win, {}, extend_by_zero=True).value(outside) == 0
    with pytest.raises(FusionError):
        WindowFunctional(win, {outside: F(1)})


def test_gamma_vacuum_pair_example(vv, sl2):
    acts, win, vac = vv
    V = acts.W1
    f = RegularFunction.monomial(1, 0, z=Z1)
    for a in range(3):
        lam = gamma_action(a, f, vac, V, V)
        for b in range(3):
            w = {(0, j): c for j, c in V.act(b, -1, V.vacuum()).items()}
            assert lam(w) == -sl2.form[a][b] * V.level


@pytest.mark.parametrize("n", [-2, -1, 0, 1, 2])
def test_gamma_of_t_power_is_tensor_mode(vm, n):
    acts, win = vm
    W1, W2 = acts.W1, acts.W2
    f = RegularFunction.monomial(n, 0, z=Z1)
    for p in win.pairs:
        for a in range(3):
            assert gamma_vector(W1, W2, a, f, {p: F(1)}) == tensor_mode(W1, W2, a, n, {p: F(1)})


@pytest.mark.parametrize("z", [F(1), F(2)])
@pytest.mark.parametrize("n", [-2, -1, 1, 2])
def test_gamma_of_shifted_power_is_binomial_sum(mods, z, n):
    V, M = mods
    f = RegularFunction.monomial(0, n, z=z)

    def C(n, i):
        return F(math.comb(n, i)) if n >= 0 else F((-1) ** i * math.comb(i - n - 1, i))

    for p in TensorWindow(V, M, 2).pairs:
        d1, d2 = V.depths[p[0]], M.depths[p[1]]
        for a in range(3):
            expect = {}
            for i in range(0, max(d1 + n, -1) + 1):
                if n < 0 or i <= n:
                    for t, x in V.act_basis(a, i - n, p[0]).items():
                        add_into(expect, {(t, p[1]): C(n, i) * (-z) ** i * x})
            for i in range(0, d2 + 1):
                if n < 0 or i <= n:
                    for t, x in M.act_basis(a, i, p[1]).items():
                        add_into(expect, {(p[0], t): C(n, i) * (-z) ** (n - i) * x})
            assert gamma_vector(V, M, a, f, {p: F(1)}) == expect


def test_generator_validation():
    assert GammaRGenerator(0, RegularFunction.monomial(-1, 1, z=Z1)).validate()
    with pytest.raises(FusionError):
        GammaRGenerator(0, RegularFunction.monomial(1, 0, z=Z1)).validate()


def test_yprime_of_generator_is_gamma_action(mods):
    V, M = mods
    model = KLModel(V, M, Z1, 2)
    acts = QzActions(V, M, Z1)
    win = TensorWindow(V, M, 2)
    lam = model.functional({q: F(q + 1) for q in range(model.Q.dim)})
    for a in range(3):
        for m in range(-2, 3):
            y = yprime_action(acts, acts.generators[a], m, lam)
            g = gamma_action(a, lift(m, Z1, F), lam, V, M)
            assert all(y.value(p) == g.value(p) for p in win.pairs)


def test_vacuum_yprime_and_tau_basics(vv, vacuum_kl):
    acts, win, _ = vv
    vac = vacuum_kl
    assert vac.value((0, 0)) == 1
    one = acts.vacuum_state()
    ident = yprime_action(acts, one, -1, vac)
    for p in win.pairs:
        assert defined(ident, p) in (None, vac.value(p))
    for m in range(1, 4):
        for a in acts.generators:
            y = yprime_action(acts, a, m, vac)
            assert all(defined(y, p) in (None, 0) for p in win.pairs)
    for m in range(-1, 3):
        t = tau_component(acts, acts.generators[0], m, -1, vac)
        y = yprime_action(acts, acts.generators[0], m, vac)
        assert all(defined(t, p) == defined(y, p) for p in win.pairs)
    L0 = lprime_operator(acts, 0, vac)
    assert all(L0.value(p) == 0 for p in win.pairs)


def test_truncated_vacuum_dual_is_not_compatible(vv):
    # extending the dual of 1 x 1 by zero on the window breaks lower truncation
    acts, win, vac = vv
    y = yprime_action(acts, acts.generators[0], 1, vac)
    assert any(defined(y, p) for p in win.pairs)


def test_tau_component_needs_termination(vv):
    acts, win, vac = vv
    with pytest.raises(FusionError):
        tau_component(acts, acts.generators[0], 0, 1, vac)
    rand = WindowFunctional.from_coordinates(win, {i: F(1) for i in range(len(win))})
    with pytest.raises(FusionError):
        tau_component(acts, acts.generators[0], 0, 1, rand, vanish_from=0, window=win)


def test_yprime_commutator_is_affine_bracket(mods, sl2):
    V, M = mods
    acts = QzActions(V, M, Z1)
    model = KLModel(V, M, Z1, 2)
    win = TensorWindow(V, M, 1)
    lam = model.functional({q: F(1) for q in range(model.Q.dim)})
    gens = acts.generators
    checked = 0
    for a in range(3):
        for b in range(3):
            br = sl2.bracket({a: F(1)}, {b: F(1)})
            brstate = {}
            for k, c in br.items():
                add_into(brstate, gens[k], c)
            for m in (-1, 0, 1):
                for n in (-1, 0, 1):
                    x = yprime_action(acts, gens[a], m, yprime_action(acts, gens[b], n, lam))
                    y = yprime_action(acts, gens[b], n, yprime_action(acts, gens[a], m, lam))
                    zb = yprime_action(acts, brstate, m + n, lam)
                    for p in win.pairs:
                        try:
                            lhs = x.value(p) - y.value(p)
                            rhs = zb.value(p) if brstate else 0
                        except OutOfWindow:
                            continue
                        if m + n == 0:
                            rhs += m * sl2.form[a][b] * V.level * lam.value(p)
                        assert lhs == rhs
                        checked += 1
    assert checked > 100


@pytest.mark.parametrize("z", [F(1), F(2)])
def test_lprime_zero_closed_form(sl2, z):
    V, M = vacuum_module(sl2, -1, 5), weyl_module(sl2, 1, -1, 5)
    acts, model = QzActions(V, M, z), KLModel(V, M, z, 3)
    win = TensorWindow(V, M, 2)
    s1, s2 = Sugawara(V), Sugawara(M)

    def closed_form(p):
        j1, j2 = p
        out = {}
        for t, x in s1.L(0, {j1: F(1)}).items():
            add_into(out, {(t, j2): x})
        for t, x in s1.L(1, {j1: F(1)}).items():
            add_into(out, {(t, j2): -z * x})
        for t, x in s2.L(0, {j2: F(1)}).items():
            add_into(out, {(j1, t): -x})
        for t, x in s2.L(-1, {j2: F(1)}).items():
            add_into(out, {(j1, t): z * x})
        return out

    for q in range(0, model.Q.dim, 3):
        lam = model.basis_functional(q)
        L0 = lprime_operator(acts, 0, lam)
        for p in win.pairs:
            assert L0.value(p) == lam(closed_form(p))


def test_slt_examples(vv, vacuum_kl):
    acts, win, vac = vv
    for a in acts.generators:
        assert check_slt(acts, vacuum_kl, a, 1, win.pairs)
    rng = random.Random(2)
    lam = WindowFunctional.from_coordinates(win, {i: F(rng.randint(-2, 2)) for i in range(len(win))})
    assert check_slt(acts, lam, acts.vacuum_state(), 0, win.pairs)


def test_adversarial_slt_order(vm):
    acts, win = vm
    s2 = EchelonBasis(slt_solution_space(acts, win, 2))
    s3 = slt_solution_space(acts, win, 3)
    extra = next(b for b in s3 if not s2.contains(b))
    lam = WindowFunctional.from_coordinates(win, extra)
    a = next(v for v in acts.generators if not check_slt(acts, lam, v, 2, win.pairs))
    assert check_slt(acts, lam, a, 3, win.pairs)
    assert not compatibility_report(acts, lam, a, 2, win.pairs, 4, 4).holds
    assert compatibility_report(acts, lam, a, 3, win.pairs, 4, 4).holds
    assert minimal_slt_order(acts, lam, a, win.pairs, 4) == 3


def test_descendant_bound_examples():
    assert slt_descendant_bound(1, 1, 2, -1) == 4
    assert slt_descendant_bound(1, 1, 2, 3) == 0
    assert slt_descendant_bound(0, 0, 2, 9) == 0


@pytest.mark.parametrize("pair", ["VV", "VM", "MM"])
def test_kl_graded_dims(mods, pair):
    V, M = mods
    W = {"V": V, "M": M}
    space = compute_circ(W[pair[0]], W[pair[1]], Z1, 2)
    assert space.info["injective"]
    expected = {"VV": [1, 3, 9], "VM": [2, 6, 18], "MM": [4, 12, 36]}[pair]
    assert space.graded_dims == expected == space.info["model_dims"]
    # contragredient of the fusion product has the same graded dimensions
    assert contragredient(space.model.Q).graded_dims() == expected


def test_ZN_examples(mods):
    V, M = mods
    assert compute_ZN(V, V, Z1, 1, 2).dims[0] == 1
    for W2 in (V, M):
        spaces = [compute_ZN(V, W2, Z1, N, 2) for N in range(1, 5)]
        for d in range(3):
            for lo, hi in zip(spaces, spaces[1:]):
                assert all(hi.levels[d].contains(r) for r in lo.levels[d].basis())
            for N in range(d + 1, 4):
                assert spaces[N - 1].levels[d] == spaces[N].levels[d]
    with pytest.raises(FusionError):
        compute_ZN(V, V, Z1, 0, 2)


def test_bases_are_reduced_echelon(mods):
    V, M = mods
    for r in compute_ZN(V, M, Z1, 3, 2).levels:
        rows = r.basis()
        pivots = [min(v) for v in rows]
        assert pivots == sorted(pivots)
        assert all(v[min(v)] == 1 for v in rows)
        assert all(p not in other for p in pivots for other in rows if min(other) != p)


def test_hlz_equals_kl_small(mods):
    V, M = mods
    kl, hlz = compute_circ(V, M, Z1, 1), compute_hboxtr(V, M, Z1, 1)
    assert kl.graded_dims == hlz.graded_dims and kl.same_bases(hlz)
    assert hlz.tag == "HLZ_HBOXTR" and kl.tag == "KL_CIRC"


def test_hlz_parallel_is_identical(mods):
    V, M = mods
    a = compute_hboxtr(V, M, Z1, 1, jobs=1)
    b = compute_hboxtr(V, M, Z1, 1, jobs=2)
    assert a.same_bases(b)


def test_products_of_generators_annihilate_ZN(mods):
    V, M = mods
    N = 2
    model = KLModel(V, M, Z1, N)
    win = TensorWindow(V, M, 1)
    fs = [RegularFunction.monomial(m, 1, z=Z1) for m in (-1, 0, 1)]
    for f in fs:
        GammaRGenerator(0, f).validate()
    nonzero_single = 0
    lams = [model.basis_functional(q) for q in range(model.Q.dim)]
    for lam in lams[:4]:
        for a in range(3):
            for f in fs:
                once = gamma_action(a, f, lam, V, M)
                nonzero_single += any(once.value(p) for p in win.pairs)
                for b in range(3):
                    for g in fs[:2]:
                        twice = gamma_action(b, g, once, V, M)
                        assert all(twice.value(p) == 0 for p in win.pairs)
    assert nonzero_single > 0


def test_level_and_lift_independence(mods):
    V, M = mods
    model = KLModel(V, M, Z1, 2)
    win = TensorWindow(V, M, 1)
    assert fusion_level(model, win) == {V.level}
    shifts = [RegularFunction.monomial(-1, 0, z=Z1), RegularFunction.monomial(1, 0, z=Z1)]
    assert check_lift_independence(model, win, shifts, ks=(-1, 0, 1))


def test_gamma_stability_and_closure(mods):
    V, M = mods
    space = compute_circ(V, M, Z1, 2)
    fns = [(RegularFunction.monomial(0, -1, z=Z1), 1), (RegularFunction.monomial(-1, 1, z=Z1), 0),
           (RegularFunction.monomial(1, -2, z=Z1), 2)]
    assert check_gamma_stability(space, fns)
    acts = QzActions(V, M, Z1)
    assert check_yprime_closure(acts, space)


def test_intertwining_jacobi_small(mods):
    V, M = mods
    acts = QzActions(V, M, Z1)
    space = compute_circ(V, M, Z1, 1)
    samples = TensorWindow(V, M, 1).pairs
    rep = check_intertwining_jacobi(acts, space, samples, box=2)
    assert rep.holds and rep.checked > 0 and rep.truncation_checked > 0


def test_direct_tau_matches_series(mods):
    V, M = mods
    acts = QzActions(V, M, F(2))
    model = KLModel(V, M, F(2), 2)
    lam = model.functional({q: F(1) for q in range(model.Q.dim)})
    win = TensorWindow(V, M, 1)
    for v in acts.generators[:2]:
        for m in range(-1, 2):
            for n in range(-2, 2):
                lhs = tau_direct(acts, v, m, n, lam)
                rhs = tau_component(acts, v, m, n, lam, vanish_from=lam.degree + 1)
                assert all(lhs.value(p) == rhs.value(p) for p in win.pairs)


def test_ordinary_lowest_required(sl2):
    W = induce(sl2, generalized_weyl_example(sl2), -1, 2)
    with pytest.raises(FusionError):
        tensor_lowest(W.lowest, W.lowest)


def test_modules_must_share_algebra(sl2, sl3):
    with pytest.raises(FusionError):
        QzActions(vacuum_module(sl2, -1, 1), vacuum_module(sl3, -1, 1), Z1)
    with pytest.raises(FusionError):
        QzActions(vacuum_module(sl2, -1, 1), vacuum_module(sl2, -1, 1), F(0))


@settings(max_examples=10)
@given(st.integers(1, 3), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_kl_functionals_satisfy_slt(mods, N, coefs):
    V, M = mods
    model = KLModel(V, M, Z1, N)
    mu = {q: F(coefs[q % 4]) for q in range(model.Q.dim)}
    lam = model.functional(mu)
    acts = QzActions(V, M, Z1)
    pairs = TensorWindow(V, M, 1).pairs
    for v in acts.generators:
        assert check_slt(acts, lam, v, N, pairs)
