from pathlib import Path

import pytest

from sketchmatch.image import save_pgm
from synthetic import face_photo, tone_mapped_sketch


def write_dataset(root: Path, n: int, sketch=tone_mapped_sketch, with_sketches=True, size=(50, 65)):
    (root / "photos").mkdir(parents=True)
    if with_sketches:
        (root / "sketches").mkdir()
    for i in range(n):
        photo = face_photo(i, *size)
        save_pgm(root / "photos" / f"p{i:03d}.pgm", photo)
        if with_sketches:
            s = photo if sketch is None else sketch(photo, i)
            save_pgm(root / "sketches" / f"p{i:03d}.pgm", s)
    return root


@pytest.fixture
def dataset(tmp_path):
    return write_dataset(tmp_path / "data", 12)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
