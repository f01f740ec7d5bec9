"""Model JSON round trip and format validation."""

import json

import numpy as np
import pytest

from bracelearn import lstm, model
from bracelearn.dataset import NormStats
from bracelearn.errors import ModelFormatError, ValidationError
from bracelearn.model import ModelConfig, TrainedModel


@pytest.fixture()
def trained(tmp_path):
    net = lstm.init_network(4, 2, 1, rng=np.random.default_rng(40))
    return TrainedModel(
        net=net,
        config=ModelConfig("Model X", 4, 2, 6),
        stats=NormStats(mean_x=0.1, std_x=1.2, mean_y=-0.3, std_y=2.5),
    )


class TestRoundTrip:
    def test_save_load_identical(self, trained, tmp_path):
        path = tmp_path / "model.json"
        model.save_model(path, trained)
        loaded = model.load_model(path)
        assert loaded.config == trained.config
        assert loaded.stats == trained.stats
        for a, b in zip(
            lstm.parameter_arrays(loaded.net), lstm.parameter_arrays(trained.net)
        ):
            np.testing.assert_array_equal(a, b)

    def test_save_is_deterministic(self, trained, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        model.save_model(p1, trained)
        model.save_model(p2, trained)
        assert p1.read_bytes() == p2.read_bytes()

    def test_predictions_survive_round_trip(self, trained, tmp_path):
        path = tmp_path / "model.json"
        model.save_model(path, trained)
        loaded = model.load_model(path)
        windows = np.random.default_rng(41).normal(size=(5, 6, 1))
        np.testing.assert_array_equal(loaded.predict(windows), trained.predict(windows))


class TestFormatErrors:
    def _doc(self, trained):
        return model._model_dict(trained)

    def test_missing_normalization_field(self, trained, tmp_path):
        doc = self._doc(trained)
        del doc["normalization"]["std_y"]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError, match="normalization.std_y"):
            model.load_model(path)

    def test_missing_cell_block(self, trained, tmp_path):
        doc = self._doc(trained)
        del doc["parameters"]["cells"][1]["Wh_f"]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError, match=r"cells\[1\].Wh_f"):
            model.load_model(path)

    def test_wrong_version(self, trained, tmp_path):
        doc = self._doc(trained)
        doc["format_version"] = 99
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError, match="format_version"):
            model.load_model(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json at all")
        with pytest.raises(ModelFormatError, match="JSON"):
            model.load_model(path)

    def test_layer_count_mismatch(self, trained, tmp_path):
        doc = self._doc(trained)
        doc["model"]["hidden_layers"] = 3
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError, match="layers"):
            model.load_model(path)


class TestModelConfig:
    def test_rejects_non_positive(self):
        with pytest.raises(ValidationError):
            ModelConfig("m", 0, 1, 1)
        with pytest.raises(ValidationError):
            ModelConfig("", 1, 1, 1)

    def test_predict_checks_lookback(self, trained):
        with pytest.raises(ValidationError, match="windows"):
            trained.predict(np.zeros((2, 5, 1)))
