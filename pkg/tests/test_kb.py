"""Knowledge base files: validation, round-tripping, determinism."""

import json
import math

import numpy as np
import pytest

from conceptspaces import (Concept, Core, Cuboid, KbFormatError,
                           KnowledgeBase, Space, UnknownNameError,
                           ValidationError, Weights)
from conceptspaces.kb import Defaults, concept_from_dict, concept_to_dict

from conftest import (LINE, PLANE, box_core, line_concept, random_concept,
                      sample_window, uniform_points)

MIXED = Space((("color", ("hue", "sat")), ("size", ("diam",))))


@pytest.fixture
def kb(fig_cross):
    base = KnowledgeBase(PLANE)
    return base.add_concept("cross", fig_cross).add_concept(
        "blob", Concept(box_core(PLANE, [({"x": 5.0, "y": 5.0},
                                          {"x": 6.0, "y": 7.0})]),
                        0.75, 1.5,
                        Weights.normalized({"width": 1.2, "height": 0.8},
                                           {"width": {"x": 1.0},
                                            "height": {"y": 1.0}})))


class TestAccessors:
    def test_add_then_get(self, fig_cross):
        kb = KnowledgeBase(PLANE).add_concept("cross", fig_cross)
        assert kb.get_concept("cross") == fig_cross

    def test_add_duplicate_leaves_kb_unchanged(self, fig_cross):
        kb = KnowledgeBase(PLANE).add_concept("cross", fig_cross)
        with pytest.raises(ValidationError):
            kb.add_concept("cross", fig_cross)
        assert list(kb.concepts) == ["cross"]

    def test_remove_then_get_is_missing(self, fig_cross):
        kb = KnowledgeBase(PLANE).add_concept("cross", fig_cross)
        smaller = kb.remove_concept("cross")
        with pytest.raises(UnknownNameError):
            smaller.get_concept("cross")
        # the original value is untouched
        assert "cross" in kb.concepts

    def test_concept_from_wrong_space_is_rejected(self):
        with pytest.raises(ValidationError):
            KnowledgeBase(PLANE).add_concept("line", line_concept(0, 1))


class TestRoundTrip:
    def test_save_load_preserves_memberships(self, kb, tmp_path):
        rng = np.random.default_rng(61)
        path = tmp_path / "kb.json"
        kb.save(path)
        loaded = KnowledgeBase.load(path)
        assert loaded.space == kb.space
        assert loaded.defaults == kb.defaults
        for name, concept in kb.concepts.items():
            twin = loaded.get_concept(name)
            assert twin == concept
            pts = uniform_points(rng, *sample_window(concept), 500)
            assert np.max(np.abs(twin.membership_batch(pts)
                                 - concept.membership_batch(pts))) <= 1e-12

    def test_repeated_save_is_byte_identical(self, kb, tmp_path):
        first = tmp_path / "one.json"
        second = tmp_path / "two.json"
        kb.save(first)
        kb.save(second)
        assert first.read_bytes() == second.read_bytes()

    def test_empty_concept_map_is_valid(self, tmp_path):
        path = tmp_path / "kb.json"
        KnowledgeBase(PLANE).save(path)
        loaded = KnowledgeBase.load(path)
        assert loaded.concepts == {}
        assert loaded.space == PLANE

    def test_partial_cuboid_round_trips_with_null_markers(self, tmp_path):
        # one cuboid bounds only the color domain; its size bounds are
        # serialized as explicit nulls
        partial = Cuboid.from_bounds(MIXED, ["color"],
                                     {"hue": 0.0, "sat": 0.0},
                                     {"hue": 2.0, "sat": 2.0})
        full = Cuboid.from_bounds(MIXED, ["color", "size"],
                                  {"hue": 1.0, "sat": 1.0, "diam": 0.0},
                                  {"hue": 3.0, "sat": 3.0, "diam": 1.0})
        concept = Concept(Core((partial, full)), 1.0, 1.0,
                          Weights.uniform(MIXED))
        kb = KnowledgeBase(MIXED).add_concept("mixed", concept)
        path = tmp_path / "kb.json"
        kb.save(path)
        raw = json.loads(path.read_text())
        stored = raw["concepts"]["mixed"]["cuboids"][0]
        assert stored["p_min"]["diam"] is None
        assert stored["p_max"]["diam"] is None
        loaded = KnowledgeBase.load(path)
        twin = loaded.get_concept("mixed")
        assert twin == concept
        assert math.isinf(twin.core.cuboids[0].p_min[2])

    def test_defaults_round_trip(self, tmp_path):
        kb = KnowledgeBase(PLANE, {}, Defaults(s=0.3, t=0.7, threshold=0.6,
                                               tolerance=1e-8))
        path = tmp_path / "kb.json"
        kb.save(path)
        assert KnowledgeBase.load(path).defaults == kb.defaults


def minimal_payload():
    return {
        "format_version": 1,
        "space": {"domains": [{"name": "width", "dimensions": ["x"]},
                              {"name": "height", "dimensions": ["y"]}]},
        "defaults": {"s": 0.5, "t": 0.5, "threshold": 0.5, "tolerance": 1e-6},
        "concepts": {
            "unit": {
                "cuboids": [{"domains": ["width", "height"],
                             "p_min": {"x": 0.0, "y": 0.0},
                             "p_max": {"x": 1.0, "y": 1.0}}],
                "mu0": 1.0,
                "c": 1.0,
                "weights": {"domains": {"width": 1.0, "height": 1.0},
                            "dimensions": {"x": 1.0, "y": 1.0}},
            }
        },
    }


def write_payload(tmp_path, payload):
    path = tmp_path / "kb.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


class TestValidation:
    def test_minimal_payload_loads(self, tmp_path):
        kb = KnowledgeBase.load(write_payload(tmp_path, minimal_payload()))
        assert kb.get_concept("unit").peak == 1.0

    def test_parse_error_is_position_annotated(self, tmp_path):
        path = tmp_path / "kb.json"
        path.write_text('{"format_version": 1,,}', encoding="utf-8")
        with pytest.raises(KbFormatError, match=r"line 1, column"):
            KnowledgeBase.load(path)

    def test_unsupported_version(self, tmp_path):
        payload = minimal_payload()
        payload["format_version"] = 99
        with pytest.raises(KbFormatError, match="not supported"):
            KnowledgeBase.load(write_payload(tmp_path, payload))

    def test_unnormalized_domain_weights_rejected(self, tmp_path):
        payload = minimal_payload()
        weights = payload["concepts"]["unit"]["weights"]
        weights["domains"] = {"width": 1.2, "height": 0.6}
        path = write_payload(tmp_path, payload)
        with pytest.raises(KbFormatError, match="domain weights sum"):
            KnowledgeBase.load(path)

    def test_auto_normalize_rescales_with_warning(self, tmp_path):
        payload = minimal_payload()
        weights = payload["concepts"]["unit"]["weights"]
        weights["domains"] = {"width": 1.2, "height": 0.6}
        path = write_payload(tmp_path, payload)
        with pytest.warns(UserWarning, match="concepts.unit.weights"):
            kb = KnowledgeBase.load(path, auto_normalize=True)
        got = kb.get_concept("unit").weights.domain_weights
        assert got["width"] == pytest.approx(2 * 1.2 / 1.8)
        assert got["height"] == pytest.approx(2 * 0.6 / 1.8)

    def test_unknown_dimension_in_cuboid_names_it(self, tmp_path):
        payload = minimal_payload()
        payload["concepts"]["unit"]["cuboids"][0]["p_min"]["wavelength"] = 0.0
        path = write_payload(tmp_path, payload)
        with pytest.raises(KbFormatError, match="wavelength"):
            KnowledgeBase.load(path)

    def test_missing_bound_names_dimension(self, tmp_path):
        payload = minimal_payload()
        del payload["concepts"]["unit"]["cuboids"][0]["p_min"]["y"]
        path = write_payload(tmp_path, payload)
        with pytest.raises(KbFormatError, match="'y'"):
            KnowledgeBase.load(path)

    def test_null_bound_on_covered_dimension_rejected(self, tmp_path):
        payload = minimal_payload()
        payload["concepts"]["unit"]["cuboids"][0]["p_max"]["x"] = None
        path = write_payload(tmp_path, payload)
        with pytest.raises(KbFormatError, match="'x'"):
            KnowledgeBase.load(path)

    def test_error_messages_name_the_concept(self, tmp_path):
        payload = minimal_payload()
        payload["concepts"]["unit"]["mu0"] = 2.0
        path = write_payload(tmp_path, payload)
        with pytest.raises(KbFormatError, match="concepts.unit"):
            KnowledgeBase.load(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(KbFormatError, match="cannot read"):
            KnowledgeBase.load(tmp_path / "absent.json")


def test_concept_dict_round_trip(fig_cross):
    data = concept_to_dict(fig_cross)
    twin = concept_from_dict(PLANE, data)
    assert twin == fig_cross


def test_fuzz_random_operation_sequences(tmp_path):
    rng = np.random.default_rng(62)
    kb = KnowledgeBase(PLANE)
    mirror: dict[str, Concept] = {}
    path = tmp_path / "kb.json"
    counter = 0
    for step in range(1000):
        roll = rng.random()
        if roll < 0.5 or not mirror:
            name = f"c{counter}"
            counter += 1
            concept = random_concept(rng, PLANE)
            kb = kb.add_concept(name, concept)
            mirror[name] = concept
        elif roll < 0.75:
            name = list(mirror)[int(rng.integers(len(mirror)))]
            kb = kb.remove_concept(name)
            del mirror[name]
        else:
            name = list(mirror)[int(rng.integers(len(mirror)))]
            assert kb.get_concept(name) == mirror[name]
        if step % 200 == 199:
            kb.save(path)
            kb = KnowledgeBase.load(path)
    assert set(kb.concepts) == set(mirror)
    for name, concept in mirror.items():
        assert kb.get_concept(name) == concept
