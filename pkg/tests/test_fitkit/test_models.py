"""Tests for fit models and their parameter types."""

import math

import numpy as np
import pytest

from fourphoton.errors import FlatDataError
from fourphoton.fitkit.models import (
    DipModel,
    DipModelParams,
    FringeModel,
    FringeModelParams,
    ThetaModel,
    ThetaModelParams,
    eval_model,
    get_model,
)
from fourphoton.types import FitModelKind


class TestModelParams:
    """Test parameter dataclass validation."""

    @pytest.mark.parametrize(
        "values",
        [(0.0, 0.5, 0.0, 10.0), (1.0, 1.2, 0.0, 10.0), (1.0, 0.5, 0.0, -1.0)],
    )
    def test_dip_ranges(self, values):
        """Test baseline, visibility and width bounds."""
        with pytest.raises(ValueError):
            DipModelParams(*values)

    def test_dip_fwhm(self):
        """Test the width and FWHM conversion."""
        params = DipModelParams.from_fwhm(1.0, 0.9, 0.0, 196.0)
        assert params.fwhm == pytest.approx(196.0)
        assert params.width == pytest.approx(196.0 / (2 * math.sqrt(2 * math.log(2))))

    @pytest.mark.parametrize("values", [(-1.0, 0.5), (1.0, 1.5), (1.0, -0.1)])
    def test_theta_ranges(self, values):
        """Test scale and E/A bounds."""
        with pytest.raises(ValueError):
            ThetaModelParams(*values)

    def test_fringe_ranges(self):
        """Test amplitude bounds."""
        with pytest.raises(ValueError, match=r"\|V\| <= 1"):
            FringeModelParams(1.0, 1.1, 0.0)
        with pytest.raises(ValueError, match="positive"):
            FringeModelParams(0.0, 0.5, 0.0)
        assert FringeModelParams(1.0, -1.0, 1.0).phase == 0.0


class TestEvalModel:
    """Test model evaluation."""

    def test_fringe_at_zero(self):
        """Test C (1 + V4 + V2) at phi = 0."""
        value = eval_model("fringe", FringeModelParams(100.0, 0.62, 0.39), 0.0)
        assert isinstance(value, float)
        assert value == pytest.approx(201.0)

    def test_fringe_from_mapping(self):
        """Test that parameters may come as a mapping."""
        params = {"scale": 2.0, "v4": 1.0, "v2": 0.0}
        x = np.array([0.0, math.pi / 4])
        assert np.allclose(eval_model(FitModelKind.FRINGE, params, x), [4.0, 0.0])

    def test_fringe_phase_shift(self):
        """Test that a phase origin shifts the curve."""
        shifted = FringeModelParams(1.0, 0.5, 0.2, phase=0.3)
        plain = FringeModelParams(1.0, 0.5, 0.2)
        assert eval_model("fringe", shifted, 0.3) == pytest.approx(
            eval_model("fringe", plain, 0.0)
        )

    def test_dip_depth(self):
        """Test B (1 - V) at the center and B far away."""
        params = DipModelParams(1000.0, 0.88, 5.0, 80.0)
        assert eval_model("dip", params, 5.0) == pytest.approx(120.0)
        assert eval_model("dip", params, 5000.0) == pytest.approx(1000.0)

    def test_theta_limits(self):
        """Test the theta model at theta = 0 and for perfect mode match."""
        at_zero = eval_model("theta", ThetaModelParams(2.0, 0.5), 0.0)
        assert at_zero == pytest.approx(1.5)
        x = np.linspace(0.0, math.pi / 2, 37)
        s = np.sin(4 * x) ** 2
        y = eval_model("theta", ThetaModelParams(1.0, 1.0), x)
        assert np.allclose(y, (1 - 1.5 * s) ** 2)

    def test_missing_mapping_key(self):
        """Test that mappings must name every parameter."""
        with pytest.raises(ValueError, match="Missing dip parameters"):
            eval_model("dip", {"baseline": 1.0}, 0.0)

    def test_unknown_model(self):
        """Test that unknown model names raise."""
        with pytest.raises(ValueError, match="Unknown FitModelKind"):
            eval_model("lorentz", {"a": 1.0}, 0.0)


class TestModels:
    """Test model behaviour used by the solver."""

    def test_get_model(self):
        """Test model lookup and the fringe phase option."""
        assert isinstance(get_model("dip"), DipModel)
        assert isinstance(get_model(FitModelKind.THETA), ThetaModel)
        assert get_model("fringe").param_names == ("scale", "v4", "v2")
        assert get_model("fringe", free_phase=True).n_params == 4

    def test_theta_reparameterization(self):
        """Test that E/A maps through the logistic transform and back."""
        model = ThetaModel()
        internal = model.to_internal(np.array([3.0, 0.25]))
        assert internal[1] == pytest.approx(math.log(0.25 / 0.75))
        assert np.allclose(model.to_external(internal), [3.0, 0.25])

    def test_theta_external_stays_in_range(self):
        """Test that any internal value gives E/A in [0, 1]."""
        model = ThetaModel()
        for u in (-50.0, 0.0, 50.0):
            e = model.to_external(np.array([1.0, u]))[1]
            assert 0.0 <= e <= 1.0

    def test_fringe_phase_normalized(self):
        """Test that the fringe phase is folded into (-pi/2, pi/2]."""
        out = FringeModel(free_phase=True).normalize(np.array([1.0, 0.5, 0.2, 3.5]))
        assert out[3] == pytest.approx(3.5 - math.pi)

    def test_dip_width_sign(self):
        """Test that a negative fitted width is reported as positive."""
        out = DipModel().normalize(np.array([1.0, 0.5, 0.0, -20.0]))
        assert out[3] == 20.0

    def test_fringe_linear_solve_is_exact(self):
        """Test exact recovery from the linear system."""
        x = 2 * math.pi * np.arange(24) / 24
        y = eval_model("fringe", FringeModelParams(50.0, 0.3, -0.2), x)
        assert np.allclose(FringeModel().linear_solve(x, y), [50.0, 0.3, -0.2])

    def test_fringe_zero_mean(self):
        """Test that a zero-mean fringe has no defined amplitudes."""
        x = 2 * math.pi * np.arange(24) / 24
        with pytest.raises(FlatDataError):
            FringeModel().linear_solve(x, np.cos(4 * x))

    @pytest.mark.parametrize("model", [DipModel(), ThetaModel(), FringeModel()])
    def test_flat_data_has_no_guess(self, model):
        """Test that constant data raise FlatDataError."""
        x = np.linspace(0.0, 1.0, 10)
        with pytest.raises(FlatDataError):
            model.initial_guess(x, np.full(10, 3.0))

    def test_dip_initial_guess(self):
        """Test the data-derived dip start."""
        x = np.linspace(-600.0, 600.0, 121)
        truth = DipModelParams.from_fwhm(1000.0, 0.8, 0.0, 200.0)
        guess = DipModel().initial_guess(x, eval_model("dip", truth, x))
        assert guess[0] == pytest.approx(1000.0, rel=1e-3)
        assert guess[1] == pytest.approx(0.8, rel=1e-3)
        assert guess[2] == 0.0
        assert guess[3] * 2 * math.sqrt(2 * math.log(2)) == pytest.approx(
            200.0, rel=0.05
        )

    def test_dip_initial_guess_over_random_dips(self):
        """Test that guesses land within 20% of the truth for random dips."""
        rng = np.random.default_rng(8)
        x = np.linspace(-600.0, 600.0, 241)
        for _ in range(100):
            truth = DipModelParams.from_fwhm(
                rng.uniform(100.0, 5000.0),
                rng.uniform(0.2, 1.0),
                rng.uniform(-100.0, 100.0),
                rng.uniform(80.0, 250.0),
            )
            guess = DipModel().initial_guess(x, eval_model("dip", truth, x))
            assert guess[0] == pytest.approx(truth.baseline, rel=0.2)
            assert guess[1] == pytest.approx(truth.visibility, rel=0.2)
            assert abs(guess[2] - truth.center) <= 0.2 * truth.fwhm
            assert guess[3] == pytest.approx(truth.width, rel=0.2)
