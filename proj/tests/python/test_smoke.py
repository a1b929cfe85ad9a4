import math

import pytest

import voxweave as vw


def test_mux_demux_round_trip():
    text = [72, 105]
    audio = [1, 2, 3, 4, 5]
    seq = vw.mux(text, audio, n_text=1, n_audio=2)
    assert seq[:3] == [(0, 72), (1, 1), (1, 2)]
    assert len(seq) == vw.interleaved_length(2, 5, n_text=1, n_audio=2) == 9
    assert vw.demux(seq, strip=True, n_text=1, n_audio=2) == (text, audio)


def test_codec_errors():
    with pytest.raises(vw.InvalidToken):
        vw.mux([], [6600])
    with pytest.raises(vw.MalformedSequence):
        vw.demux([(0, 1), (1, 1), (1, 2), (0, 2)], n_text=1, n_audio=1)
    assert issubclass(vw.InvalidToken, vw.VoxweaveError)


def test_frames_and_vad():
    assert vw.encoder_frames(48000) == 50
    assert vw.adaptor_frames(25) == 13
    assert vw.vad([0.0] * 24000) == []
    spans = vw.vad([0.5] * 24000)
    assert spans == [(0.0, 1000.0)]


def test_metrics():
    assert round(vw.error_rate("a b c", "a x c"), 2) == 33.33
    assert round(vw.error_rate("你好吗", "你好", unit="chars"), 2) == 33.33
    assert vw.edit_distance(["a", "b"], []) == (2, 0, 0, 2)
    assert vw.bleu([["a", "b", "c", "d"]], ["a", "b", "c", "d"]) == pytest.approx(100.0)
    assert vw.bleu([["a", "b", "c", "d", "e"]], ["a", "b", "c", "d"]) == pytest.approx(100 * math.exp(-0.25))
    assert vw.round_half_away(38.835) == 38.84
    assert vw.mean_of_subsets([98, 92, 78, 64, 46, 72, 78, 70, 78, 84, 82]) == 76.55
    with pytest.raises(vw.EmptyReference):
        vw.error_rate("", "x")


def test_tool_calls():
    span = '<tool_call>{"name":"weather","arguments":{"location":"Beijing"}}</tool_call>'
    assert vw.parse_tool_call(span) == ("weather", {"location": "Beijing"})
    assert vw.serialize_tool_call("weather", {"location": "Beijing"}) == span
    with pytest.raises(vw.MissingParameter):
        vw.parse_tool_call('<tool_call>{"name":"weather","arguments":{}}</tool_call>')
    with pytest.raises(vw.ParseError):
        vw.parse_tool_call("<tool_call>{</tool_call>")

    hit = {"gold_trigger": True, "gold_tool": "weather", "gold_params": {"location": "x"},
           "predicted": {"name": "weather", "arguments": {"location": "x"}}}
    miss = {"gold_trigger": False, "predicted": None}
    m = vw.toolcall_metrics([hit] * 195 + [dict(hit, predicted=None)] * 5
                            + [dict(miss, predicted=hit["predicted"])] * 10 + [miss] * 190)
    assert round(m["precision"]["value"], 2) == 95.12
    assert m["recall"]["value"] == 97.5
    assert vw.toolcall_metrics([miss])["precision"]["value"] is None


def test_rewards():
    assert vw.binary_length_reward(0, 10) == 0
    assert vw.binary_length_reward(10, 10) == 1
    assert vw.binary_length_reward(11, 10) == 0
    assert vw.group_advantage([1, 0, 1, 0]) == [1, -1, 1, -1]
    with pytest.raises(vw.GroupTooSmall):
        vw.group_advantage([1.0])


def test_embedding_is_unit_length():
    v = vw.embed_text("a calm voice")
    assert len(v) == 256
    assert sum(x * x for x in v) == pytest.approx(1.0)


def test_cli_in_process():
    code, out, _ = vw.run_cli(["score", "table"])
    assert code == 0
    assert "76.55" in out
    code, _, err = vw.run_cli(["frobnicate"])
    assert code == 1
    assert err
