from collections import Counter
import json

import pytest

from locsplit.manifest import RunManifest, digest_file
from locsplit.workers import merge_counters, run_chunks, split_range


def test_split_range():
    assert split_range(1, 11, 4) == [(1, 5), (5, 9), (9, 11)]
    assert split_range(5, 5, 4) == []


def test_run_chunks_keeps_order():
    chunks = [list(range(i, i + 10)) for i in range(0, 100, 10)]
    assert run_chunks(sum, chunks, jobs=4) == run_chunks(sum, chunks, jobs=1)


def test_run_chunks_reraises_first_failure():
    def explode(chunk):
        if chunk >= 3:
            raise ValueError(chunk)
        return chunk

    with pytest.raises(ValueError) as info:
        run_chunks(explode, range(8), jobs=3)
    assert info.value.args == (3,)


def test_merge_counters():
    assert merge_counters([Counter(a=1), Counter(a=2, b=1)]) == Counter(a=3, b=1)


def test_manifest(tmp_path):
    instance = tmp_path / "x.inst"
    instance.write_text("entry: P=t; g=x^2+1; b=1\n")
    first = RunManifest("check-t0", digest_file(str(instance)), {"t0": "25", "seed": 0})
    second = RunManifest("check-t0", digest_file(str(instance)), {"seed": 0, "t0": "25"})
    assert first.same_run(second.finish(0))
    assert not first.same_run(RunManifest("check-t0", None, {"t0": "25", "seed": 0}))
    path = tmp_path / "manifest.json"
    first.finish(1).write(str(path))
    record = json.loads(path.read_text())
    assert record["exit_code"] == 1
    assert record["parameters"] == {"seed": 0, "t0": "25"}
    assert len(record["input_sha256"]) == 64
    assert digest_file(None) is None
