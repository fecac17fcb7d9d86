import math
import re

import numpy as np
import pytest
from scipy.special import gammaln

from helpers import aff, author, grid_best_loglik, pub
from multiaff.ingest import Corpus
from multiaff.nbrm import (
    DESIGN_COLUMNS,
    DesignError,
    DesignTooSmall,
    RegressionInput,
    build_design,
    nb2_fit,
    nb2_hessian,
    nb2_loglik,
    nb2_score,
    percent_change,
    pseudo_r2,
    run_table,
    significance_stars,
    vif,
    wald_stats,
)
from multiaff.synth import SynthSpec, gen_corpus, gen_nb_counts


def make_input(y, x, names=None):
    x = np.asarray(x, dtype=float)
    names = tuple(names) if names else tuple(
        ["intercept"] + [f"x{j}" for j in range(1, x.shape[1])]
    )
    return RegressionInput(y=np.asarray(y), x=x, columns=names)


def synthetic_input(n, seed, beta=(1.0, 0.3, 0.5), alpha=0.8):
    """[intercept, binary, unit-normal] design with NB2 responses."""
    design_seed, count_seed = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(design_seed)
    x = np.column_stack([np.ones(n), rng.integers(0, 2, n).astype(float), rng.normal(size=n)])
    y = gen_nb_counts(x, beta, alpha, count_seed)
    return make_input(y, x)


class TestBuildDesign:
    def corpus(self):
        pubs = []
        for i in range(8):
            affs = [aff("i1", "FR"), aff("i2", "FR"), aff("i3", "US")]
            pubs.append(
                pub(affs, [author(0, 1), author(2), author(0)], pid=f"P{i}", n_refs=40, tc3=i)
            )
        return Corpus(publications=tuple(pubs), qc=())

    def test_counts_row(self):
        design = build_design(self.corpus(), min_rows=1, min_mark_positives=0)
        assert design.columns == DESIGN_COLUMNS
        row = design.x[0]
        # intercept, NM, IM, N_refs, N_ins, N_c, N_a
        assert list(row) == [1.0, 1.0, 0.0, 40.0, 3.0, 2.0, 3.0]
        assert design.y[0] == 0

    def test_eleven_author_publication_excluded(self):
        big = pub(
            [aff("i1", "FR"), aff("i2", "FR")],
            [author(0, 1)] + [author(0) for _ in range(10)],
            pid="BIG",
        )
        corpus = Corpus(self.corpus().publications + (big,), ())
        design = build_design(corpus, min_rows=1, min_mark_positives=0)
        assert design.n_obs == 8
        assert not np.any(design.x[:, -1] > 10)
        wider = build_design(corpus, min_rows=1, min_mark_positives=0, max_authors=15)
        assert wider.n_obs == 9

    def test_country_restriction(self):
        only_de = pub([aff("d1", "DE"), aff("d2", "DE")], [author(0, 1)], pid="DE1")
        corpus = Corpus(self.corpus().publications + (only_de,), ())
        design = build_design(corpus, country="FR", min_rows=1, min_mark_positives=0)
        assert design.n_obs == 8  # the DE-only publication has no FR address

    def test_country_mode_uses_domestic_marks(self):
        # a DE-DE NM author is foreign to FR: NM_mark must be 0 in FR mode
        p = pub(
            [aff("d1", "DE"), aff("d2", "DE"), aff("f1", "FR")],
            [author(0, 1), author(2)],
            pid="X",
        )
        corpus = Corpus((p,), ())
        fr = build_design(corpus, country="FR", min_rows=1, min_mark_positives=0)
        de = build_design(corpus, country="DE", min_rows=1, min_mark_positives=0)
        glob = build_design(corpus, min_rows=1, min_mark_positives=0)
        assert fr.x[0, 1] == 0.0 and de.x[0, 1] == 1.0 and glob.x[0, 1] == 1.0

    def test_too_few_rows(self):
        with pytest.raises(DesignTooSmall, match="rows"):
            build_design(self.corpus(), min_rows=50)

    def test_too_few_mark_positives(self):
        pubs = tuple(
            pub([aff("a", "FR"), aff("b", "FR")], [author(0), author(1)], pid=f"S{i}")
            for i in range(60)
        )
        with pytest.raises(DesignTooSmall, match="NM_mark"):
            build_design(Corpus(pubs, ()), min_rows=50)


class TestLoglik:
    def test_closed_form_value(self):
        data = make_input([0], [[1.0]], ["intercept"])
        assert nb2_loglik([0.0], 1.0, data) == pytest.approx(-math.log(2), abs=1e-12)

    def test_poisson_limit(self, rng):
        n = 200
        x = np.column_stack([np.ones(n), rng.normal(size=n)])
        y = rng.poisson(3.0, size=n)
        data = make_input(y, x)
        beta = np.array([0.9, 0.2])
        mu = np.exp(x @ beta)
        poisson = float(y @ np.log(mu) - mu.sum() - gammaln(y + 1.0).sum())
        assert nb2_loglik(beta, 1e-10, data) == pytest.approx(poisson, abs=1e-6)

    def test_negative_response_rejected(self):
        data_y = np.array([1, -2, 3])
        with pytest.raises(ValueError):
            nb2_loglik([0.0], 1.0, make_input(data_y, np.ones((3, 1)), ["intercept"]))

    def test_alpha_must_be_positive(self):
        data = make_input([1], [[1.0]], ["intercept"])
        with pytest.raises(ValueError):
            nb2_loglik([0.0], 0.0, data)

    def test_non_finite_predictor_rejected(self):
        data = make_input([1], [[np.inf]], ["intercept"])
        with pytest.raises(ValueError, match="linear predictor"):
            nb2_loglik([1.0], 1.0, data)

    def test_finite_for_extreme_finite_predictors(self):
        data = make_input([3, 0, 7], [[1.0, 15.0], [1.0, 2.0], [1.0, 9.0]])
        value = nb2_loglik([2.0, 60.0], 0.5, data)  # eta up to 902
        assert math.isfinite(value)


class TestDerivatives:
    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(77)
        data = synthetic_input(60, seed=5)
        worst = 0.0
        for _ in range(100):
            beta = rng.uniform(-1.0, 1.0, size=3)
            beta[0] += 0.5
            theta = rng.uniform(math.log(0.05), math.log(5.0))
            grad = nb2_score(beta, math.exp(theta), data)
            phi = np.append(beta, theta)
            fd = np.empty_like(phi)
            h = 1e-6
            for k in range(len(phi)):
                hi, lo = phi.copy(), phi.copy()
                hi[k] += h
                lo[k] -= h
                fd[k] = (
                    nb2_loglik(hi[:3], math.exp(hi[3]), data)
                    - nb2_loglik(lo[:3], math.exp(lo[3]), data)
                ) / (2 * h)
            rel = np.max(np.abs(grad - fd) / np.maximum(1.0, np.abs(fd)))
            worst = max(worst, rel)
        assert worst < 1e-5

    def test_hessian_matches_score_differences(self):
        data = synthetic_input(80, seed=6)
        beta = np.array([0.7, 0.2, 0.3])
        theta = math.log(0.6)
        hess = nb2_hessian(beta, math.exp(theta), data)
        assert np.allclose(hess, hess.T)
        phi = np.append(beta, theta)
        h = 1e-6
        fd = np.empty((4, 4))
        for k in range(4):
            hi, lo = phi.copy(), phi.copy()
            hi[k] += h
            lo[k] -= h
            fd[:, k] = (
                nb2_score(hi[:3], math.exp(hi[3]), data)
                - nb2_score(lo[:3], math.exp(lo[3]), data)
            ) / (2 * h)
        assert np.max(np.abs(hess - fd) / np.maximum(1.0, np.abs(fd))) < 1e-5


class TestFit:
    def test_parameter_recovery(self):
        data = synthetic_input(20_000, seed=42)
        fit = nb2_fit(data)
        assert fit.converged
        truth = np.array([1.0, 0.3, 0.5])
        assert np.all(np.abs(fit.beta - truth) <= 3 * fit.se)
        assert 0.7 <= fit.alpha <= 0.9

    def test_poisson_data_drives_alpha_to_floor(self):
        rng = np.random.default_rng(8)
        n = 4000
        x = np.column_stack([np.ones(n), rng.normal(size=n)])
        y = rng.poisson(np.exp(x @ np.array([1.0, 0.4])))
        fit = nb2_fit(make_input(y, x))
        assert fit.converged
        assert fit.alpha <= 0.01

    def test_duplicated_column_rejected(self):
        data = synthetic_input(200, seed=3)
        x = np.column_stack([data.x, data.x[:, 2]])
        with pytest.raises(DesignError, match="rank deficient"):
            nb2_fit(make_input(data.y, x))

    def test_constant_column_rejected(self):
        data = synthetic_input(200, seed=3)
        x = data.x.copy()
        x[:, 1] = 2.0
        with pytest.raises(DesignError, match="constant"):
            nb2_fit(make_input(data.y, x))

    def test_deterministic_bit_identical(self):
        data = synthetic_input(2000, seed=9)
        a, b = nb2_fit(data), nb2_fit(data)
        assert np.array_equal(a.beta, b.beta)
        assert a.alpha == b.alpha
        assert np.array_equal(a.se, b.se)
        assert a.loglik == b.loglik and a.iterations == b.iterations

    def test_optimum_conditions(self):
        data = synthetic_input(3000, seed=12)
        fit = nb2_fit(data)
        grad = nb2_score(fit.beta, fit.alpha, data)
        assert np.max(np.abs(grad)) < 1e-6 * max(1.0, abs(fit.loglik))
        hess = nb2_hessian(fit.beta, fit.alpha, data)
        np.linalg.cholesky(-hess)  # negative definite at the optimum

    def test_grid_search_never_beats_newton(self):
        for seed in (1, 2):
            data = synthetic_input(50, seed=seed, beta=(1.2, 0.4, 0.0), alpha=0.9)
            data = make_input(data.y, data.x[:, :2])
            fit = nb2_fit(data)
            best = grid_best_loglik(data, fit.beta, math.log(fit.alpha), steps=31)
            assert best <= fit.loglik + 1e-4

    def test_scaling_equivariance(self):
        data = synthetic_input(5000, seed=5, beta=(0.5, 0.3, 0.02), alpha=0.6)
        fit = nb2_fit(data)
        scaled_x = data.x.copy()
        scaled_x[:, 2] *= 10.0
        scaled = nb2_fit(make_input(data.y, scaled_x))
        assert scaled.beta[2] == pytest.approx(fit.beta[2] / 10.0, rel=1e-10)
        assert abs(scaled.loglik - fit.loglik) < 1e-8
        assert abs(scaled.alpha - fit.alpha) < 1e-8
        assert np.max(np.abs(scaled.z - fit.z)) < 1e-8
        assert np.max(np.abs(scaled.p - fit.p)) < 1e-8
        assert abs(scaled.beta[0] - fit.beta[0]) < 1e-8
        assert abs(scaled.beta[1] - fit.beta[1]) < 1e-8

    def test_non_convergence_flagged_not_raised(self):
        data = synthetic_input(2000, seed=9)
        fit = nb2_fit(data, max_iter=1)
        assert not fit.converged
        assert np.all(np.isnan(fit.se))
        with pytest.raises(Exception, match="converged"):
            wald_stats(fit)

    def test_run_table_skips_non_converged_cells(self):
        spec = SynthSpec(n_pubs=400, seed=33, discipline_mix={"CHE": 1.0})
        table = run_table(gen_corpus(spec), ("CHE",), min_rows=30, max_iter=1)
        assert table.rows[0][2] == "skipped"
        assert table.skipped[("CHE", None)] == "did not converge"

    def test_agreement_with_statsmodels(self):
        sm = pytest.importorskip("statsmodels.api")
        data = synthetic_input(3000, seed=17, beta=(0.8, 0.25, 0.4), alpha=0.7)
        mine = nb2_fit(data)
        theirs = sm.NegativeBinomial(np.asarray(data.y), data.x).fit(disp=0)
        assert np.allclose(mine.beta, theirs.params[:3], atol=1e-3)
        assert mine.alpha == pytest.approx(theirs.params[3], abs=1e-3)
        assert np.allclose(mine.se, theirs.bse[:3], atol=1e-4)
        assert mine.loglik == pytest.approx(theirs.llf, abs=1e-4)


class TestInference:
    def test_star_thresholds(self):
        assert significance_stars(0.049) == "*"
        assert significance_stars(0.009) == "**"
        assert significance_stars(0.0009) == "***"
        assert significance_stars(0.05) == ""
        assert significance_stars(0.2) == ""
        assert significance_stars(0.004) == "**"

    def test_wald_stats(self):
        data = synthetic_input(5000, seed=21)
        fit = nb2_fit(data)
        z, p, stars = wald_stats(fit)
        assert np.allclose(z, fit.beta / fit.se)
        assert np.allclose(p, fit.p)
        assert stars == fit.stars
        # z = 0 gives a two-sided p of exactly 1
        from scipy.special import erfc

        assert erfc(0.0 / math.sqrt(2)) == 1.0

    def test_percent_change_paper_values(self):
        assert percent_change(math.log(1.169)) == pytest.approx(16.9, abs=0.05)
        assert percent_change(0.0) == 0.0
        assert percent_change(math.log(0.973)) == pytest.approx(-2.7, abs=0.05)

    def test_percent_change_inverts_exactly(self, rng):
        for b in rng.uniform(-2, 2, size=200):
            pct = percent_change(b)
            assert abs(math.log1p(pct / 100.0) - b) <= 1e-13 * max(1.0, abs(b))

    def test_pseudo_r2_zero_for_intercept_only(self):
        data = synthetic_input(500, seed=4)
        only = make_input(data.y, data.x[:, :1], ["intercept"])
        fit = nb2_fit(only)
        assert fit.pseudo_r2 == 0.0
        assert pseudo_r2(fit) == 0.0

    def test_pseudo_r2_increases_with_predictive_column(self):
        data = synthetic_input(4000, seed=31, beta=(1.0, 0.0, 0.8), alpha=0.5)
        full = nb2_fit(data)
        reduced = nb2_fit(make_input(data.y, data.x[:, :2], ["intercept", "x1"]))
        assert 0.0 < full.pseudo_r2 < 1.0
        assert full.pseudo_r2 > reduced.pseudo_r2


class TestVIF:
    def test_orthogonal_columns_give_unity(self):
        n = 64
        base = np.arange(n)
        c1 = np.where(base % 2 == 0, 1.0, -1.0)
        c2 = np.where((base // 2) % 2 == 0, 1.0, -1.0)
        c3 = np.where((base // 4) % 2 == 0, 1.0, -1.0)
        x = np.column_stack([np.ones(n), c1, c2, c3])
        report = vif(make_input(np.zeros(n, dtype=int), x))
        assert report.infinite == ()
        for value in report.values.values():
            assert value == pytest.approx(1.0, abs=1e-9)

    def test_known_correlation(self):
        # sample correlation 0.6 by construction: x2 = 0.6*u + 0.8*v
        n = 400
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
        u = np.sqrt(2.0) * np.cos(t)
        v = np.sqrt(2.0) * np.sin(t)  # centered, orthogonal, equal norm
        x1 = u
        x2 = 0.6 * u + 0.8 * v
        x3 = np.sqrt(2.0) * np.cos(2 * t)  # orthogonal to both
        x = np.column_stack([np.ones(n), x1, x2, x3])
        report = vif(make_input(np.zeros(n, dtype=int), x, ("intercept", "a", "b", "c")))
        r = np.corrcoef(x1, x2)[0, 1]  # independent check of the construction
        assert r == pytest.approx(0.6, abs=1e-12)
        assert report.values["a"] == pytest.approx(1.5625, abs=1e-6)
        assert report.values["b"] == pytest.approx(1.5625, abs=1e-6)
        assert report.values["c"] == pytest.approx(1.0, abs=1e-9)

    def test_duplicated_column_flagged_infinite(self):
        rng = np.random.default_rng(2)
        n = 100
        c1 = rng.normal(size=n)
        x = np.column_stack([np.ones(n), c1, c1, rng.normal(size=n)])
        report = vif(make_input(np.zeros(n, dtype=int), x, ("intercept", "a", "b", "c")))
        assert set(report.infinite) == {"a", "b"}
        assert "c" in report.values

    def test_vif_at_least_one_and_row_permutation_invariant(self, rng):
        n = 300
        x = np.column_stack([np.ones(n)] + [rng.normal(size=n) for _ in range(4)])
        data = make_input(np.zeros(n, dtype=int), x, ("intercept", "a", "b", "c", "d"))
        report = vif(data)
        assert all(value >= 1.0 - 1e-12 for value in report.values.values())
        perm = rng.permutation(n)
        shuffled = vif(make_input(np.zeros(n, dtype=int), x[perm], data.columns))
        for key in report.values:
            assert shuffled.values[key] == pytest.approx(report.values[key], rel=1e-9)

    def test_design_vif_absence_of_multicollinearity(self):
        spec = SynthSpec(n_pubs=3000, seed=14, discipline_mix={"CHE": 1.0})
        design = build_design(gen_corpus(spec))
        report = vif(design)
        assert report.infinite == ()
        assert all(value < 10 for value in report.values.values())


CELL_PATTERN = re.compile(r"^-?\d+\.\d(\*{0,3})$")


class TestRunTable:
    def corpus(self):
        spec = SynthSpec(
            n_pubs=1200,
            seed=33,
            discipline_mix={"CHE": 0.5, "PHY": 0.5},
            countries=("FR", "DE", "US"),
            p_nm=0.45,
            p_im=0.25,
        )
        return gen_corpus(spec)

    def test_global_layout(self):
        table = run_table(self.corpus(), ("CHE", "PHY", "MATH"), min_rows=50)
        assert table.header == (
            "field",
            "discipline",
            "NM_mark",
            "IM_mark",
            "N_refs",
            "N_ins",
            "N_c",
            "N_a",
            "R-Squared",
        )
        rows = {r[1]: r for r in table.rows}
        assert set(rows) == {"CHE", "PHY", "MATH"}
        assert rows["MATH"][2] == "skipped"  # discipline absent from the mix
        assert ("MATH", None) in table.skipped
        for disc in ("CHE", "PHY"):
            assert CELL_PATTERN.match(rows[disc][2])
            float(rows[disc][-1])  # R-Squared parses, 2 decimals
            assert re.match(r"^\d+\.\d\d$", rows[disc][-1])
        assert rows["CHE"][0] == "Chemistry"

    def test_country_layout(self):
        table = run_table(self.corpus(), ("CHE",), ("FR", "DE"), min_rows=30)
        assert table.header == (
            "discipline",
            "FR_NM_mark",
            "FR_IM_mark",
            "DE_NM_mark",
            "DE_IM_mark",
        )
        row = table.rows[0]
        assert row[0] == "CHE"
        for cell in row[1:]:
            assert cell == "skipped" or CELL_PATTERN.match(cell)

    def test_skip_reasons_recorded(self):
        table = run_table(self.corpus(), ("CHE",), min_rows=10_000)
        assert table.rows[0][2] == "skipped"
        assert "rows" in table.skipped[("CHE", None)]
