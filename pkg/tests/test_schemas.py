import json
import math
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conegauge import cones, horofunctions as hf, schemas
from conegauge.errors import ConeSpecError, InvalidPayloadError

from conftest import SQUARE_NORMALS

SPECS = Path(__file__).resolve().parent.parent / "specs"


class TestCones:
    @pytest.mark.parametrize("name, expected", [
        ("orthant3.json", cones.orthant(3)),
        ("lorentz3.json", cones.lorentz(3)),
        ("psd2.json", cones.psd(2)),
        ("square.json", cones.poly_h(SQUARE_NORMALS)),
        ("orthant2_lorentz3.json", cones.product(cones.orthant(2), cones.lorentz(3))),
    ])
    def test_spec_files(self, name, expected):
        assert schemas.load_cone(SPECS / name) == expected

    def test_missing_dimension(self):
        with pytest.raises(ConeSpecError):
            schemas.parse_cone({"kind": "orthant"})

    def test_unknown_kind(self):
        with pytest.raises(InvalidPayloadError):
            schemas.parse_cone({"kind": "cylinder", "dim": 3})

    def test_degenerate_polyhedron(self):
        with pytest.raises(ConeSpecError):
            schemas.parse_cone({"kind": "poly_h", "normals": [[1.0, 0.0], [-1.0, 0.0]]})


class TestMaps:
    def test_star_document(self):
        phi = schemas.load_map(SPECS / "star_psd3.json")
        assert phi.source == cones.psd(3)
        X = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 4.0]])
        assert_allclose(phi(cones.svec(X)), cones.svec(np.linalg.inv(X)), atol=1e-12)

    def test_product_document(self):
        phi = schemas.load_map(SPECS / "mixed_map.json")
        x = np.array([1.0, 2.0, 2.0, 1.0, 0.0])
        assert_allclose(phi(x), [2.0, 1.0, 2.0 / 3.0, -1.0 / 3.0, 0.0])

    def test_source_supplied_by_caller(self):
        phi = schemas.parse_map({"pipeline": [{"op": "scale", "alpha": 2.0}]}, cones.orthant(2))
        assert_allclose(phi([1.0, 3.0]), [2.0, 6.0])

    def test_missing_source(self):
        with pytest.raises(InvalidPayloadError):
            schemas.parse_map({"pipeline": [{"op": "orthant_inverse"}]})

    def test_missing_op_field(self):
        with pytest.raises(InvalidPayloadError, match="matrix"):
            schemas.parse_map({"pipeline": [{"op": "linear"}]}, cones.orthant(2))

    def test_product_op_needs_product_source(self):
        document = {"pipeline": [{"op": "product", "factors": [{"pipeline": [{"op": "star"}]}]}]}
        with pytest.raises(InvalidPayloadError):
            schemas.parse_map(document, cones.orthant(2))


class TestHorofunctions:
    def test_reverse_funk_file(self):
        h = schemas.parse_horofunction(schemas.load_json(SPECS / "reverse_funk_corner.json"), cones.orthant(3))
        assert isinstance(h, hf.ReverseFunk)
        assert hf.is_singleton(h)

    def test_infinite_shift_string(self):
        h = schemas.parse_horofunction(schemas.load_json(SPECS / "thompson_singleton.json"), cones.orthant(3))
        assert h.c == math.inf
        assert hf.is_singleton(h)
        finite = schemas.parse_horofunction(schemas.load_json(SPECS / "thompson_finite.json"), cones.orthant(3))
        assert not hf.is_singleton(finite)

    def test_bad_shift_string(self):
        document = {"tag": "combined", "first": {"tag": "reverse_funk", "x": [1.0, 0.0, 0.0]},
                    "second": {"tag": "funk_singleton", "functional": [0.0, 1.0, 0.0]}, "c": "infinity"}
        with pytest.raises(InvalidPayloadError):
            schemas.parse_horofunction(document, cones.orthant(3))

    def test_missing_payload_field(self):
        with pytest.raises(InvalidPayloadError):
            schemas.parse_horofunction({"tag": "thompson_r"}, cones.orthant(3))

    def test_product_payload_needs_product_cone(self):
        document = {"tag": "product", "first": {"tag": "reverse_funk", "x": [1.0, 0.0]},
                    "second": {"tag": "reverse_funk", "x": [0.0, 1.0]}, "c": 0.0}
        h = schemas.parse_horofunction(document, cones.product(cones.orthant(2), cones.orthant(2)))
        assert isinstance(h, hf.ProductHoro)
        with pytest.raises(InvalidPayloadError):
            schemas.parse_horofunction(document, cones.orthant(4))


class TestFiles:
    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidPayloadError, match="not found"):
            schemas.load_json(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{kind: orthant", encoding="utf-8")
        with pytest.raises(InvalidPayloadError, match="not valid JSON"):
            schemas.load_json(path)

    def test_dump_is_strict_json(self):
        text = schemas.dump_json({"value": math.inf, "low": -math.inf, "bad": math.nan,
                                  "vector": np.array([1.0, 2.0]), "flag": np.bool_(True)})
        data = json.loads(text)
        assert data == {"schema": 1, "value": "inf", "low": "-inf", "bad": "nan",
                        "vector": [1.0, 2.0], "flag": True}

    def test_dump_model(self):
        data = json.loads(schemas.dump_json(hf.DetourValue(H=0.0, delta=math.inf)))
        assert data == {"schema": 1, "H": 0.0, "delta": "inf"}

    def test_save_json(self, tmp_path):
        path = tmp_path / "report.json"
        schemas.save_json({"a": 1}, path)
        assert json.loads(path.read_text(encoding="utf-8")) == {"schema": 1, "a": 1}
