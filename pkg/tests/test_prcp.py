import math

import numpy as np
import pytest

from conftest import TABLE5_GOLD, table5_case
from sandhiseg.charlm import CharLM
from sandhiseg.labels import LabelVocab, build_label_vocab, chunk_words
from sandhiseg.lattice import Span, build_lattice
from sandhiseg.metrics import eval_sentence
from sandhiseg.prcp import (
    apply_prcp, detect_corrupted, path_loglikelihood, rerank_chunk, score_path,
)
from sandhiseg.symbols import normalize
from sandhiseg.tensor.ops import log_softmax_np


def test_detect_corrupted():
    assert detect_corrupted(["vā", "aambike"], {"vā", "ambike"})
    assert not detect_corrupted(["vā", "ambike"], {"vā", "ambike", "x"})
    assert detect_corrupted(["x"], set())


def test_score_arithmetic():
    assert score_path(-3.0, 2.0, 3, mode="raw") == -0.5
    assert math.isclose(score_path(4 * math.log(0.8), 2.0, 2, mode="prob", length=4), 0.2, rel_tol=1e-15)
    assert score_path(-1.0, 1.5, 2, "prob", 5) > score_path(-1.0, 1.5, 3, "prob", 5)
    with pytest.raises(ValueError):
        score_path(-1.0, 0.0, 1, "raw")
    with pytest.raises(ValueError):
        score_path(-1.0, 1.0, 1, "prob")
    with pytest.raises(ValueError):
        score_path(-1.0, 1.0, 1, "other", 3)


def test_raw_mode_rewards_more_words():
    # the verbatim formula divides a negative number: a bigger penalty raises S
    assert score_path(-3.0, 2.0, 3, "raw") > score_path(-3.0, 2.0, 2, "raw")


def hand_case():
    seq = normalize("abc")
    vocab = LabelVocab(["", "<UNK>", "a", "b", "c", "b_"])
    logits = np.array([[0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
                       [0.0, 0.0, 0.0, 1.0, 0.0, 3.0],
                       [0.5, 0.0, 0.0, 0.0, 1.5, 0.0]])
    return seq, vocab, logits


def test_path_loglikelihood_by_hand():
    seq, vocab, logits = hand_case()
    lp = log_softmax_np(logits)

    def lse(row):
        return math.log(sum(math.exp(v) for v in row))

    ab_c = [Span("ab", 0, 1), Span("c", 2, 2)]
    want = (2.0 - lse(logits[0])) + (3.0 - lse(logits[1])) + (1.5 - lse(logits[2]))
    assert math.isclose(path_loglikelihood(lp, seq, (0, 2), ab_c, vocab), want, rel_tol=1e-14)
    abc = [Span("abc", 0, 2)]
    want = (2.0 - lse(logits[0])) + (1.0 - lse(logits[1])) + (1.5 - lse(logits[2]))
    assert math.isclose(path_loglikelihood(lp, seq, (0, 2), abc, vocab), want, rel_tol=1e-14)


def test_path_loglikelihood_limits():
    seq = normalize("abc")
    vocab = build_label_vocab([list("abc")])
    flat = log_softmax_np(np.zeros((3, len(vocab))))
    path = [Span("abc", 0, 2)]
    assert math.isclose(path_loglikelihood(flat, seq, (0, 2), path, vocab), -3 * math.log(len(vocab)))
    sure = np.full((3, len(vocab)), -np.inf)
    for i, ch in enumerate("abc"):
        sure[i, vocab.id(ch)] = 0.0
    assert path_loglikelihood(sure, seq, (0, 2), path, vocab) == 0.0


def test_out_of_vocabulary_labels_use_unk():
    seq = normalize("ab")
    vocab = LabelVocab(["", "<UNK>", "a"])
    lp = log_softmax_np(np.array([[0.0, 0.0, 1.0], [0.0, 2.0, 0.0]]))
    got = path_loglikelihood(lp, seq, (0, 1), [Span("ab", 0, 1)], vocab)
    assert math.isclose(got, lp[0, 2] + lp[1, 1])


def test_gold_path_wins_two_path_lattice_in_both_modes():
    seq, vocab, logits = hand_case()
    lp = log_softmax_np(logits)
    lm = CharLM.fit(["ab c", "abc"], order=2)
    lat = build_lattice(seq, [Span("ab", 0, 1), Span("c", 2, 2), Span("abc", 0, 2)])
    for mode in ("raw", "prob"):
        res = rerank_chunk(lp, lm, lat, (0, 2), vocab, ["x"], mode)
        assert len(res.scores) == 2
        by_text = {s.text: s for s in res.scores}
        # "abc" has one word and, here, the higher likelihood
        a, b = by_text["abc"], by_text["ab c"]
        assert a.S == score_path(a.ll, a.rho, 1, mode, 3)
        assert b.S == score_path(b.ll, b.rho, 2, mode, 3)
        if mode == "prob":
            assert res.words == (["abc"] if a.S > b.S else ["ab", "c"])


def test_single_path_always_returned():
    seq = normalize("abc")
    vocab = build_label_vocab([list("abc")])
    lp = log_softmax_np(np.random.default_rng(0).normal(size=(3, len(vocab))))
    lat = build_lattice(seq, [Span("abc", 0, 2)])
    res = rerank_chunk(lp, CharLM.fit(["zz"], 2), lat, (0, 2), vocab, ["ab", "c"])
    assert res.words == ["abc"] and res.changed


def test_no_path_keeps_prediction():
    seq = normalize("abc")
    vocab = build_label_vocab([list("abc")])
    lp = log_softmax_np(np.zeros((3, len(vocab))))
    lat = build_lattice(seq, [Span("ab", 0, 1)])
    res = rerank_chunk(lp, CharLM.fit(["ab"], 2), lat, (0, 2), vocab, ["abq"])
    assert res.words == ["abq"] and not res.changed


def test_tie_break_prefers_fewer_words_then_text():
    seq = normalize("ab")
    vocab = LabelVocab(["", "<UNK>"])
    lm = CharLM.fit(["q"], order=1)
    # zero log-probabilities give LL = 0, so every raw score is exactly 0
    zero = np.zeros((2, 2))
    lat = build_lattice(seq, [Span("ab", 0, 1), Span("a", 0, 0), Span("b", 1, 1)])
    res = rerank_chunk(zero, lm, lat, (0, 1), vocab, ["zz"], "raw")
    assert len({s.S for s in res.scores}) == 1
    assert res.words == ["ab"]
    # equal scores and word counts: lexicographically smaller text wins
    lat = build_lattice(seq, [Span("xy", 0, 1), Span("ab", 0, 1)])
    res = rerank_chunk(log_softmax_np(zero), lm, lat, (0, 1), vocab, ["zz"], "prob")
    assert res.scores[0].S == res.scores[1].S
    assert res.words == ["ab"]


def test_table5_case_rectified():
    seq, gold, pred, vocab, lp, cands, lm = table5_case()
    before = " ".join(" ".join(ws) for ws in chunk_words(seq, pred))
    assert "aambike" in before
    for mode in ("prob", "raw"):
        words, records = apply_prcp(seq, vocab.encode(pred), lp, cands, lm, vocab, mode)
        after = " ".join(" ".join(ws) for ws in words)
        assert after == TABLE5_GOLD
        assert eval_sentence(after.split(), TABLE5_GOLD.split()).F > \
            eval_sentence(before.split(), TABLE5_GOLD.split()).F
        texts = {c.text for c in cands}
        assert not any(detect_corrupted(ws, texts) for ws in words)
        changed = [r for r in records if r["changed"]]
        assert [r["chunk"] for r in changed] == [2] and changed[0]["paths_scored"] == 2


def test_prob_mode_invariant_to_common_rho_scale():
    scores = [(-2.0, 1.3, 2), (-1.0, 1.9, 3), (-4.0, 1.1, 1)]
    for k in (0.5, 3.0):
        plain = max(range(3), key=lambda i: score_path(scores[i][0], scores[i][1], scores[i][2], "prob", 4))
        scaled = max(range(3), key=lambda i: score_path(scores[i][0], k * scores[i][1], scores[i][2], "prob", 4))
        assert plain == scaled


def test_reranking_is_deterministic():
    seq, gold, pred, vocab, lp, cands, lm = table5_case()
    a = apply_prcp(seq, vocab.encode(pred), lp, cands, lm, vocab)
    b = apply_prcp(seq, vocab.encode(pred), lp, cands, lm, vocab)
    assert a == b
