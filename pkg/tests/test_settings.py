"""Validation and persistence of Settings and ExperimentConfig."""

import math

import pytest
from pydantic import ValidationError

from relbox import ExperimentConfig, Settings, get_settings


class TestSettings:
    def test_defaults(self, settings):
        assert settings.speed_of_light == 1.0
        assert settings.alice_location == (0.0, 0.0, 0.0)
        assert settings.bob_location == (1.0, 0.0, 0.0)
        assert settings.emission_delay == 1.0
        assert settings.event_budget == 1_000_000
        assert settings.midpoint == (0.5, 0.0, 0.0)

    def test_location_by_side(self, settings):
        assert settings.location("alice") == settings.alice_location
        assert settings.location("bob") == settings.bob_location

    def test_parties_out_of_reach_rejected(self):
        with pytest.raises(ValidationError, match="emission_delay"):
            Settings(bob_location=(3.0, 0.0, 0.0))

    def test_longer_delay_allows_distant_parties(self):
        settings = Settings(bob_location=(3.0, 0.0, 0.0), emission_delay=3.0)
        assert settings.midpoint == (1.5, 0.0, 0.0)

    def test_non_finite_location_rejected(self):
        with pytest.raises(ValidationError):
            Settings(alice_location=(math.nan, 0.0, 0.0))

    def test_assignment_is_validated(self, settings):
        with pytest.raises(ValidationError):
            settings.speed_of_light = -1.0

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            Settings(colour="red")

    def test_file_round_trip(self, tmp_path):
        original = Settings(emission_delay=2.0, interval="wilson", workers=3)
        path = tmp_path / "settings.json"
        original.save_to_file(path)
        assert Settings.load_from_file(path) == original

    def test_dict_form(self):
        data = Settings(confidence=0.95).to_dict()
        assert data["confidence"] == 0.95
        assert Settings.from_dict(data).confidence == 0.95

    def test_process_default_is_shared(self):
        assert get_settings() is get_settings()


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig(command="construct", target="pi1")
        assert config.mode == "exact"
        assert config.k == 4
        assert config.n == 12
        assert config.p == [0.5]
        assert config.s == [1]

    @pytest.mark.parametrize("p", [[-0.1], [0.5, 1.5]])
    def test_bad_probability_rejected(self, p):
        with pytest.raises(ValidationError):
            ExperimentConfig(command="attack", target="rabin", p=p)

    @pytest.mark.parametrize("s", [[0], [1.5], [-2]])
    def test_bad_string_length_rejected(self, s):
        with pytest.raises(ValidationError):
            ExperimentConfig(command="bounds", s=s)

    def test_infinite_string_length_accepted(self):
        assert ExperimentConfig(command="bounds", s=[1, math.inf]).s[-1] == math.inf

    @pytest.mark.parametrize("n", [7, 8])
    def test_quantum_protocol_needs_valid_n(self, n):
        with pytest.raises(ValidationError, match="pi5"):
            ExperimentConfig(command="construct", target="pi5", n=n)

    def test_n_only_checked_for_quantum_protocol(self):
        assert ExperimentConfig(command="construct", target="pi4", n=7).n == 7

    def test_load_settings(self, tmp_path):
        path = tmp_path / "geometry.json"
        Settings(emission_delay=4.0).save_to_file(path)
        assert ExperimentConfig(command="list").load_settings() == Settings()
        assert ExperimentConfig(command="list", config=path).load_settings().emission_delay == 4.0
