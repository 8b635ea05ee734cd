"""Tests for report rendering and logging setup."""

import json
import logging
from fractions import Fraction

import pytest

from halo_slopes.utils.log import PACKAGE_LOGGER, setup_logging
from halo_slopes.utils.reporting import Report, format_fraction, write_report


@pytest.fixture
def report():
    rows = [{"n": 0, "slope": Fraction(1, 2), "certified": True}, {"n": 1, "slope": None, "certified": False}]
    return Report("newton", ["n", "slope", "certified"], rows, approx_source="slope")


class TestFormatFraction:
    """Test cases for format_fraction."""

    def test_values(self):
        """Test integers, proper fractions and missing values."""
        assert format_fraction(Fraction(4, 2)) == "2"
        assert format_fraction(Fraction(-3, 6)) == "-1/2"
        assert format_fraction(None) == ""


class TestReport:
    """Test cases for Report."""

    def test_header_lines(self, report):
        """Test the three header lines."""
        lines = report.header_lines({"p": 3, "eps": None}, "abc")
        assert lines[0] == "# halo-slopes 1.0.0 newton"
        assert lines[1] == '# config {"eps": null, "p": 3}'
        assert lines[2] == "# dataset sha256 abc"

    def test_csv(self, report):
        """Test the CSV body with exact fractions and lowercase booleans."""
        text = report.render("csv", {"p": 3})
        assert text.splitlines()[3:] == ["n,slope,certified", "0,1/2,true", "1,,false"]
        assert text.splitlines()[2] == "# dataset sha256 none"

    def test_text(self):
        """Test the JSON body of the text format."""
        body = {"rank": 2, "slope": Fraction(1, 3)}
        text = Report("halo", ["rank"], [], body).render("text", {})
        parsed = json.loads("\n".join(line for line in text.splitlines() if not line.startswith("#")))
        assert parsed == {"rank": 2, "slope": "1/3"}

    def test_unknown_format(self, report):
        """Test that only csv and text are rendered."""
        with pytest.raises(ValueError, match="unknown output format"):
            report.render("json", {})

    def test_approx_column(self, report):
        """Test the decimal column."""
        approx = report.with_approx("approx", "slope")
        assert approx.columns == ["n", "slope", "certified", "approx"]
        assert approx.rows[0]["approx"] == "0.500000"
        assert approx.rows[1]["approx"] == ""
        assert "approx" not in report.rows[0]

    def test_write_report(self, report, tmp_path):
        """Test writing to a file with LF line endings."""
        path = tmp_path / "out.csv"
        text = write_report(report, "csv", {"p": 3}, "abc", str(path))
        assert path.read_bytes() == text.encode("utf-8")
        assert b"\r\n" not in path.read_bytes()


class TestLogging:
    """Test cases for setup_logging."""

    def test_levels(self):
        """Test the verbose switch."""
        assert setup_logging(True).level == logging.DEBUG
        assert setup_logging(False).level == logging.WARNING

    def test_single_handler(self):
        """Test that repeated setup replaces its own handler."""
        setup_logging()
        setup_logging()
        logger = logging.getLogger(PACKAGE_LOGGER)
        assert sum(1 for h in logger.handlers if getattr(h, "_halo_slopes", False)) == 1
