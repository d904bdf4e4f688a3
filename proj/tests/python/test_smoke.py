# Copyright 2026 The subsel Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Smoke tests for the python bindings, cross-checked against numpy."""

import math

import numpy as np
import pytest

import subsel


@pytest.fixture(scope="module")
def pool():
    return subsel.synth_pool(seed=3, n_utts=300)


def test_pool_shape(pool):
    assert len(pool) == 300
    assert pool.total_duration_sec > 0
    utts = pool.utterances
    assert len(utts) == 300
    first = utts[0]
    assert first.id
    assert first.duration_sec > 0
    assert first.gender in ("female", "male", "unknown")
    assert pool.utterance(first.id).id == first.id
    # Ids come back sorted.
    ids = [u.id for u in utts]
    assert ids == sorted(ids)


def test_rle():
    assert subsel.rle_collapse([1, 1, 2, 2, 1]) == [1, 2, 1]
    assert subsel.rle_collapse([]) == []


def test_score_and_select(pool):
    scores = subsel.score_ppl(pool, bpe_vocab_size=200, workers=2)
    assert len(scores) == 300
    assert all(v > 0 and math.isfinite(v) for v in scores.values())

    picked = subsel.select(
        pool, "score_tail", budget_sec=120.0, seed=9, replicates=3,
        scores=scores)
    assert len(picked) == 3
    for i, subset in enumerate(picked):
        assert subset["replicate_index"] == i
        assert subset["total_duration_sec"] >= 120.0
        assert len(set(subset["utterance_ids"])) == len(subset["utterance_ids"])

    again = subsel.select(
        pool, "score_tail", budget_sec=120.0, seed=9, replicates=3,
        scores=scores)
    assert [s["utterance_ids"] for s in again] == [
        s["utterance_ids"] for s in picked]

    stats = subsel.subset_stats(pool, picked[0]["utterance_ids"],
                                scores=scores)
    assert stats["n_utts"] == len(picked[0]["utterance_ids"])
    assert stats["avg_scores"]["ppl"] > 0
    assert stats["n_unique_words"] > 0


def test_select_constraints(pool):
    subsets = subsel.select(pool, "speaker_diverse", budget_sec=120.0,
                            seed=1, num_speakers=2)
    ids = subsets[0]["utterance_ids"]
    speakers = {pool.utterance(i).speaker_id for i in ids}
    assert len(speakers) <= 2

    with pytest.raises(RuntimeError):  # score criterion without scores
        subsel.select(pool, "score_tail", budget_sec=120.0)
    with pytest.raises(ValueError):  # unknown criterion name
        subsel.select(pool, "best_effort", budget_sec=120.0)


def test_box_stats_matches_numpy():
    values = [0.5, 1.25, -3.0, 8.0, 2.5, 2.5, 7.75]
    box = subsel.box_stats(values)
    assert box["mean"] == pytest.approx(np.mean(values), abs=1e-12)
    assert box["median"] == pytest.approx(np.median(values), abs=1e-12)
    assert box["min"] == min(values)
    assert box["max"] == max(values)
    assert box["p25"] == pytest.approx(
        np.percentile(values, 25, method="linear"), abs=1e-12)
    assert box["p75"] == pytest.approx(
        np.percentile(values, 75, method="linear"), abs=1e-12)


def test_pearson_matches_numpy():
    rng = np.random.default_rng(17)
    x = rng.normal(size=40)
    y = 0.3 * x + rng.normal(size=40)
    ours = subsel.pearson(list(x), list(y))
    theirs = np.corrcoef(x, y)[0, 1]
    assert ours == pytest.approx(theirs, abs=1e-12)
    assert subsel.pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)


def test_werr():
    assert subsel.werr_percent(9.61, 8.93) == pytest.approx(7.07596253902185)
    assert subsel.werr_percent(5.0, 5.0) == 0.0


def test_proxy_quality(pool):
    all_ids = [u.id for u in pool.utterances]
    assert subsel.proxy_quality(pool, all_ids) == 1.0
    assert subsel.proxy_quality(pool, []) == 0.0
    half = subsel.proxy_quality(pool, all_ids[: len(all_ids) // 2])
    assert 0.0 < half <= 1.0
