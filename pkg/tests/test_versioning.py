"""Tests for versioning utilities."""

import pytest

from htreg import __version__
from htreg.versioning import (
    PACKAGE_VERSION,
    SCHEMA_VERSION,
    create_header,
    inject_meta,
    is_supported,
)


class TestVersioning:
    """Tests for result headers and schema versions."""

    def test_create_header(self):
        """Header carries versions, kind, seed, scale and config."""
        header = create_header("mc", {"plan": {"d1": 20}}, seed=7, scale_label="desk")

        assert header["schema_version"] == SCHEMA_VERSION
        assert header["package_version"] == PACKAGE_VERSION == __version__
        assert header["kind"] == "mc"
        assert header["seed"] == 7
        assert header["scale"] == "desk"
        assert header["config"] == {"plan": {"d1": 20}}

    def test_header_without_scale(self):
        """Calibration headers have no scale key."""
        header = create_header("calibration", {})
        assert "scale" not in header
        assert header["seed"] is None

    def test_unknown_kind(self):
        """Unknown result kinds are rejected."""
        with pytest.raises(ValueError):
            create_header("pipeline", {})

    def test_inject_meta(self):
        """Meta excludes the config and leaves the input alone."""
        original = {"groups": []}
        result = inject_meta(original, create_header("vicm", {"big": 1}, seed=3))

        assert result["groups"] == []
        assert result["meta"]["kind"] == "vicm"
        assert result["meta"]["seed"] == 3
        assert "config" not in result["meta"]
        assert "meta" not in original

    def test_is_supported(self):
        """The current schema is supported, others are not."""
        assert is_supported(SCHEMA_VERSION)
        assert is_supported(int(SCHEMA_VERSION))
        assert not is_supported("0")
        assert not is_supported(None)
