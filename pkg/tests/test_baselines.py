import numpy as np
import pytest

from conftest import clustered_rank_k, random_instance
from l21snf.baselines import PCA, SemiNMF, reconstruct
from l21snf.init import init_from_kmeans
from l21snf.linalg import frobenius_norm, make_rng, split_pos_neg, uniform_matrix
from l21snf.metrics import nfl
from l21snf.solver import FactorizationState, L21SNF, fit_factorization, step_h, step_w


def classical_snf_iteration(X, W, H):
    """Textbook Frobenius semi-NMF update pair, written independently."""
    WtX = W.T @ X
    WtW = W.T @ W
    Pp, Pn = split_pos_neg(WtX)
    Op, On = split_pos_neg(WtW)
    num = Pp + On @ H
    den = np.maximum(Pn + Op @ H, 1e-12)
    H = H * np.sqrt(num / den)
    W = np.linalg.solve(H @ H.T, (X @ H.T).T).T
    return W, H


class TestSemiNMFReduction:
    def test_bit_for_bit_same_as_frozen_weight_driver(self):
        # the baseline must be *the same computation* as the robust solver
        # with unit weights and no ridge, iterate for iterate
        rng = make_rng(0)
        X, W0, H0 = random_instance(rng, 15, 10, 3)
        manual = []
        W, H = W0.copy(), H0.copy()
        ones = np.ones(X.shape[1])
        for _ in range(25):
            H = step_h(X, W, H, ones)
            W = step_w(X, H, ones, 0.0)
            manual.append((W.copy(), H.copy()))
        captured = []
        fit_factorization(
            X, W0, H0, alpha=0.0, reweight=False, max_iter=25,
            callback=lambda t, Wc, Hc: captured.append((Wc.copy(), Hc.copy())),
        )
        for (Wm, Hm), (Wc, Hc) in zip(manual, captured[1:]):
            assert np.array_equal(Wm, Wc)
            assert np.array_equal(Hm, Hc)

    def test_matches_textbook_formulas(self):
        rng = make_rng(1)
        X, W, H = random_instance(rng, 12, 9, 3)
        ones = np.ones(9)
        Hn = step_h(X, W, H, ones)
        Wn = step_w(X, Hn, ones, 0.0)
        Wt, Ht = classical_snf_iteration(X, W.copy(), H.copy())
        assert np.allclose(Hn, Ht, rtol=1e-12, atol=1e-14)
        assert np.allclose(Wn, Wt, rtol=1e-9, atol=1e-11)

    def test_h_nonnegative_over_100_iterations(self):
        rng = make_rng(2)
        X = uniform_matrix(25, 18, -20, 20, rng)
        est = SemiNMF(rank=5, max_iter=100, random_state=3).fit(X)
        assert np.all(est.coefficients_ >= 0.0)

    def test_frobenius_loss_goes_to_zero_on_compatible_instance(self):
        X, _, _ = clustered_rank_k(24, 18, 3, seed=4)
        est = SemiNMF(rank=3, max_iter=400, random_state=1).fit(X)
        assert est.history_.final.nfl < 1e-3

    def test_logs_squared_frobenius_objective(self):
        rng = make_rng(3)
        X = uniform_matrix(10, 8, -5, 5, rng)
        est = SemiNMF(rank=2, max_iter=5, random_state=0).fit(X)
        final = est.history_.final
        expected = frobenius_norm(X - est.reconstruct()) ** 2
        assert final.objective == pytest.approx(expected, rel=1e-10)

    def test_alpha_is_pinned_not_tunable(self):
        est = SemiNMF(rank=2)
        assert "alpha" not in est.get_params()
        assert est.alpha == 0.0


class TestPCA:
    def test_full_rank_reconstruction(self):
        rng = make_rng(4)
        X = uniform_matrix(12, 7, -5, 5, rng)
        model = PCA(rank=7).fit(X)
        assert nfl(X, model.reconstruct()) < 1e-8

    def test_identical_columns_rank_one(self):
        rng = make_rng(5)
        col = uniform_matrix(9, 1, -3, 3, rng)
        X = np.tile(col, (1, 6))
        model = PCA(rank=1).fit(X)
        assert np.allclose(model.reconstruct(), X, atol=1e-10)

    def test_beats_random_factorizations(self):
        rng = make_rng(6)
        X = uniform_matrix(30, 20, -10, 10, rng)
        model = PCA(rank=5).fit(X)
        err = frobenius_norm(X - model.reconstruct())
        for _ in range(100):
            W = uniform_matrix(30, 5, -1, 1, rng)
            H = uniform_matrix(5, 20, -1, 1, rng)
            scale = np.linalg.lstsq(W, X, rcond=None)[0]
            assert err <= frobenius_norm(X - W @ scale) + 1e-9

    def test_error_non_increasing_in_rank(self):
        rng = make_rng(7)
        X = uniform_matrix(15, 10, -5, 5, rng)
        errs = [nfl(X, PCA(rank=k).fit(X).reconstruct()) for k in range(1, 11)]
        for prev, cur in zip(errs, errs[1:]):
            assert cur <= prev + 1e-12

    def test_basis_orthonormal(self):
        rng = make_rng(8)
        X = uniform_matrix(20, 12, -5, 5, rng)
        model = PCA(rank=6).fit(X)
        gram = model.basis_.T @ model.basis_
        assert np.max(np.abs(gram - np.eye(6))) < 1e-8

    def test_uncentered_flag(self):
        rng = make_rng(9)
        X = uniform_matrix(10, 6, 5, 6, rng)
        model = PCA(rank=6, center=False).fit(X)
        assert np.array_equal(model.mean_, np.zeros(10))
        assert nfl(X, model.reconstruct()) < 1e-8

    def test_rank_out_of_range(self):
        X = uniform_matrix(5, 4, -1, 1, make_rng(10))
        with pytest.raises(ValueError):
            PCA(rank=5).fit(X)
        with pytest.raises(ValueError):
            PCA(rank=0).fit(X)

    def test_transform_inverse_round_trip(self):
        rng = make_rng(11)
        X = uniform_matrix(10, 8, -5, 5, rng)
        model = PCA(rank=8).fit(X)
        S = model.transform(X)
        assert np.allclose(model.inverse_transform(S), X, atol=1e-8)

    def test_history_has_blank_objective(self):
        X = uniform_matrix(8, 6, -2, 2, make_rng(12))
        model = PCA(rank=3).fit(X)
        assert len(model.history_) == 1
        assert model.history_.final.objective is None


class TestReconstruct:
    def test_state_after_zero_iterations(self):
        rng = make_rng(13)
        X, W, H = random_instance(rng, 8, 6, 2)
        report = fit_factorization(X, W, H, max_iter=0)
        assert np.array_equal(reconstruct(report.state), W @ H)

    def test_estimator_dispatch(self):
        rng = make_rng(14)
        X = uniform_matrix(10, 8, -5, 5, rng)
        est = L21SNF(rank=2, max_iter=4, random_state=0).fit(X)
        assert np.array_equal(reconstruct(est), est.basis_ @ est.coefficients_)
        model = PCA(rank=2).fit(X)
        assert np.array_equal(reconstruct(model), model.reconstruct())

    def test_final_history_metrics_match_reconstruction(self):
        rng = make_rng(15)
        X = uniform_matrix(14, 11, -8, 8, rng)
        for est in (
            L21SNF(rank=3, alpha=0.2, max_iter=12, random_state=2).fit(X),
            SemiNMF(rank=3, max_iter=12, random_state=2).fit(X),
        ):
            assert nfl(X, reconstruct(est)) == pytest.approx(
                est.history_.final.nfl, rel=1e-10
            )

    def test_rejects_unknown_object(self):
        with pytest.raises(TypeError):
            reconstruct(42)

    def test_state_requires_factorization_state(self):
        state = FactorizationState(
            W=np.ones((3, 2)), H=np.ones((2, 4)), iteration=0
        )
        assert reconstruct(state).shape == (3, 4)
