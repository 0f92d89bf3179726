"""Deck source/PDF pairing: compiled decks persist .tex and .pdf with
matching checksum manifest entries. Driven through a controllable fake
LaTeX binary so the invariant is exercised without a TeX distribution."""

from __future__ import annotations

import hashlib
import os
import stat

import pytest

from conftest import fixture_course
from courseforge.model import CompileStatus, ModeId
from courseforge.pipeline.state import EventKind
from courseforge.util import read_json, sha256_hex


@pytest.fixture
def fake_latex_on_path(tmp_path_factory, monkeypatch):
    bin_dir = tmp_path_factory.mktemp("fakebin")
    binary = bin_dir / "fakelatex"
    binary.write_text(
        "#!/bin/bash\n"
        'job="${@: -1}"; job="${job%.tex}"\n'
        'echo "ok" > "$job.log"\n'
        'printf "%%PDF-1.5 deterministic-fake" > "$job.pdf"\n'
        "exit 0\n",
        encoding="utf-8",
    )
    binary.chmod(binary.stat().st_mode | stat.S_IEXEC)
    monkeypatch.setenv("PATH", str(bin_dir) + os.pathsep + os.environ["PATH"])
    return binary.name


def test_compiled_decks_pair_tex_and_pdf_with_checksums(engine_factory, fake_latex_on_path):
    engine = engine_factory(latex_enabled=None, latex_binary=fake_latex_on_path)
    package = engine.run(fixture_course(ModeId.AUTONOMOUS))
    paths = engine.paths_for(package.manifest.run_id)
    decks_dir = paths.artifacts_dir / "decks"
    checksums = read_json(decks_dir / "checksums.json")

    assert all(d.compile_status is CompileStatus.SUCCESS for d in package.decks)
    for deck in package.decks:
        key = f"chapter_{deck.chapter_index:02d}"
        tex = (decks_dir / f"{key}.tex").read_text(encoding="utf-8")
        pdf = paths.artifact(deck.pdf_path).read_bytes()
        assert checksums[key]["tex_sha256"] == sha256_hex(tex)
        assert checksums[key]["pdf_sha256"] == hashlib.sha256(pdf).hexdigest()
        assert deck.pdf_path == f"artifacts/decks/{key}.pdf"  # run-relative

    events = engine.events_for(package.manifest.run_id).read_all()
    attempts = [e for e in events if e.kind is EventKind.COMPILE_ATTEMPT]
    assert len(attempts) == len(package.decks)
    assert all(e.payload["status"] == "success" for e in attempts)


def test_uncompiled_decks_record_tex_checksums_only(engine_factory):
    engine = engine_factory()  # latex disabled by the fixture
    package = engine.run(fixture_course(ModeId.AUTONOMOUS))
    paths = engine.paths_for(package.manifest.run_id)
    checksums = read_json(paths.artifacts_dir / "decks" / "checksums.json")
    for deck in package.decks:
        assert deck.compile_status is CompileStatus.UNCOMPILED
        entry = checksums[f"chapter_{deck.chapter_index:02d}"]
        assert entry["tex_sha256"] == sha256_hex(deck.tex_source)
        assert "pdf_sha256" not in entry
