#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "voxweave/audio.hpp"
#include "voxweave/cli.hpp"
#include "voxweave/error.hpp"
#include "voxweave/interleave.hpp"
#include "voxweave/metrics.hpp"
#include "voxweave/rewards.hpp"
#include "voxweave/tooling.hpp"

namespace py = pybind11;
using namespace voxweave;

namespace {

InterleaveConfig make_config(std::uint32_t n_text, std::uint32_t n_audio, std::uint32_t text_pad,
                             std::uint32_t audio_pad, std::uint32_t vocab) {
    InterleaveConfig cfg;
    cfg.n_text = n_text;
    cfg.n_audio = n_audio;
    cfg.text_pad = text_pad;
    cfg.audio_pad = audio_pad;
    cfg.audio_vocab_size = vocab;
    cfg.validate();
    return cfg;
}

NormalizationProfile profile_for(const std::string& unit) {
    if (unit == "words") return NormalizationProfile::english_words();
    if (unit == "chars") return NormalizationProfile::chinese_chars();
    throw InvalidConfig("unit must be 'words' or 'chars'");
}

// Interleaved streams cross the boundary as (channel, id) pairs; channel 0 is text.
std::vector<std::pair<int, std::uint32_t>> to_pairs(const InterleavedSequence& seq) {
    std::vector<std::pair<int, std::uint32_t>> out;
    out.reserve(seq.size());
    for (const Token& t : seq.tokens()) out.emplace_back(static_cast<int>(t.channel), t.id);
    return out;
}

PcmClip make_clip(std::vector<float> samples, std::uint32_t rate) {
    PcmClip clip{std::move(samples), rate};
    clip.normalize();
    return clip;
}

std::optional<ToolCall> call_from(const py::object& obj) {
    if (obj.is_none()) return std::nullopt;
    const auto d = obj.cast<py::dict>();
    ToolCall c;
    c.name = d["name"].cast<std::string>();
    if (d.contains("arguments")) c.arguments = d["arguments"].cast<std::map<std::string, std::string>>();
    return c;
}

py::dict ratio_dict(const Ratio& r) {
    py::dict d;
    d["value"] = r.percent() ? py::cast(*r.percent()) : py::none();
    d["numerator"] = r.numerator;
    d["denominator"] = r.denominator;
    return d;
}

}  // namespace

PYBIND11_MODULE(_voxweave, m) {
    m.doc() = "Interleaved speech/text token codec, metrics and tooling";

    auto base = py::register_exception<Error>(m, "VoxweaveError");
    py::register_exception<InvalidToken>(m, "InvalidToken", base.ptr());
    py::register_exception<MalformedSequence>(m, "MalformedSequence", base.ptr());
    py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
    py::register_exception<EmptyAudio>(m, "EmptyAudio", base.ptr());
    py::register_exception<EmptyReference>(m, "EmptyReference", base.ptr());
    py::register_exception<UnknownTool>(m, "UnknownTool", base.ptr());
    py::register_exception<MissingParameter>(m, "MissingParameter", base.ptr());
    py::register_exception<UnexpectedParameter>(m, "UnexpectedParameter", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<GroupTooSmall>(m, "GroupTooSmall", base.ptr());

    m.def(
        "mux",
        [](const std::vector<std::uint32_t>& text, const std::vector<std::uint32_t>& audio, std::uint32_t n_text,
           std::uint32_t n_audio, std::uint32_t text_pad, std::uint32_t audio_pad, std::uint32_t vocab) {
            return to_pairs(mux(text, audio, make_config(n_text, n_audio, text_pad, audio_pad, vocab)));
        },
        py::arg("text"), py::arg("audio"), py::arg("n_text") = 1, py::arg("n_audio") = 3, py::arg("text_pad") = 0,
        py::arg("audio_pad") = kDefaultAudioVocabSize - 1, py::arg("vocab") = kDefaultAudioVocabSize,
        "Interleave text and audio ids into (channel, id) pairs.");
    m.def(
        "demux",
        [](const std::vector<std::pair<int, std::uint32_t>>& tokens, bool strip, std::uint32_t n_text,
           std::uint32_t n_audio, std::uint32_t text_pad, std::uint32_t audio_pad, std::uint32_t vocab) {
            std::vector<Token> seq;
            seq.reserve(tokens.size());
            for (const auto& [ch, id] : tokens) {
                if (ch != 0 && ch != 1) throw InvalidConfig("channel must be 0 (text) or 1 (audio)");
                seq.push_back({static_cast<Channel>(ch), id});
            }
            const Channels out = demux(seq, make_config(n_text, n_audio, text_pad, audio_pad, vocab), strip);
            return py::make_tuple(out.text, out.audio);
        },
        py::arg("tokens"), py::arg("strip") = true, py::arg("n_text") = 1, py::arg("n_audio") = 3,
        py::arg("text_pad") = 0, py::arg("audio_pad") = kDefaultAudioVocabSize - 1,
        py::arg("vocab") = kDefaultAudioVocabSize);
    m.def(
        "interleaved_length",
        [](std::size_t text_len, std::size_t audio_len, std::uint32_t n_text, std::uint32_t n_audio) {
            return interleaved_length(text_len, audio_len, make_config(n_text, n_audio, 0, kDefaultAudioVocabSize - 1,
                                                                       kDefaultAudioVocabSize));
        },
        py::arg("text_len"), py::arg("audio_len"), py::arg("n_text") = 1, py::arg("n_audio") = 3);

    m.def(
        "encoder_frames",
        [](std::size_t n_samples, std::uint32_t sample_rate) {
            PcmClip clip;
            clip.sample_rate = sample_rate;
            clip.samples.resize(n_samples);
            return encoder_frames(clip);
        },
        py::arg("n_samples"), py::arg("sample_rate") = kDefaultSampleRate);
    m.def("adaptor_frames", [](std::size_t n) { return adaptor_frames(n); }, py::arg("encoder_frames"));
    m.def(
        "vad",
        [](std::vector<float> samples, std::uint32_t sample_rate, double threshold_dbfs) {
            VadConfig cfg;
            cfg.energy_threshold_dbfs = threshold_dbfs;
            std::vector<std::pair<double, double>> spans;
            for (const SpeechSpan& s : vad_segments(make_clip(std::move(samples), sample_rate), cfg))
                spans.emplace_back(s.start_ms, s.end_ms);
            return spans;
        },
        py::arg("samples"), py::arg("sample_rate") = kDefaultSampleRate, py::arg("threshold_dbfs") = -40.0,
        "Speech spans as (start_ms, end_ms).");

    m.def(
        "error_rate",
        [](const std::string& ref, const std::string& hyp, const std::string& unit) {
            return error_rate(ref, hyp, profile_for(unit));
        },
        py::arg("ref"), py::arg("hyp"), py::arg("unit") = "words");
    m.def(
        "edit_distance",
        [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
            const EditCounts c = edit_distance(ref, hyp);
            return py::make_tuple(c.distance, c.substitutions, c.insertions, c.deletions);
        },
        py::arg("ref"), py::arg("hyp"), "(distance, substitutions, insertions, deletions)");
    m.def(
        "bleu", [](const std::vector<TokenList>& refs, const TokenList& hyp, std::size_t max_n) { return bleu(refs, hyp, max_n); },
        py::arg("refs"), py::arg("hyp"), py::arg("max_n") = 4);
    m.def(
        "corpus_bleu",
        [](const std::vector<std::vector<TokenList>>& refs, const std::vector<TokenList>& hyps, std::size_t max_n,
           bool smooth) { return corpus_bleu(refs, hyps, max_n, smooth ? BleuSmoothing::Floor : BleuSmoothing::None); },
        py::arg("refs"), py::arg("hyps"), py::arg("max_n") = 4, py::arg("smooth") = false);
    m.def("round_half_away", &round_half_away, py::arg("value"), py::arg("dp") = 2);
    m.def(
        "mean_of_subsets", [](const std::vector<double>& v, int dp) { return mean_of_subsets(v, dp); }, py::arg("values"),
        py::arg("dp") = 2);

    m.def(
        "parse_tool_call",
        [](const std::string& span) {
            const ToolCall c = parse_tool_call(span);
            return py::make_tuple(c.name, c.arguments);
        },
        py::arg("span"), "Returns (name, arguments).");
    m.def(
        "serialize_tool_call",
        [](const std::string& name, const std::map<std::string, std::string>& arguments) {
            return serialize_tool_call({name, arguments});
        },
        py::arg("name"), py::arg("arguments") = std::map<std::string, std::string>{});
    m.def(
        "toolcall_metrics",
        [](const py::list& outcomes) {
            std::vector<ToolCallOutcome> outs;
            for (const auto& item : outcomes) {
                const auto d = item.cast<py::dict>();
                ToolCallOutcome o;
                o.gold_trigger = d["gold_trigger"].cast<bool>();
                if (d.contains("gold_tool") && !d["gold_tool"].is_none()) o.gold_tool = d["gold_tool"].cast<std::string>();
                if (d.contains("gold_params") && !d["gold_params"].is_none())
                    o.gold_params = d["gold_params"].cast<std::map<std::string, std::string>>();
                if (d.contains("predicted")) o.predicted_call = call_from(d["predicted"]);
                outs.push_back(std::move(o));
            }
            const ToolCallMetrics m = toolcall_metrics(outs);
            py::dict r;
            r["precision"] = ratio_dict(m.precision);
            r["recall"] = ratio_dict(m.recall);
            r["type_accuracy"] = ratio_dict(m.type_accuracy);
            r["parameter_accuracy"] = ratio_dict(m.parameter_accuracy);
            return r;
        },
        py::arg("outcomes"),
        "Each outcome is a dict {gold_trigger, gold_tool?, gold_params?, predicted?: {name, arguments} | None}.");
    m.def(
        "embed_text", [](const std::string& text) { return embed_text(text).values; }, py::arg("text"));

    m.def(
        "binary_length_reward",
        [](std::size_t thinking_tokens, std::size_t max_len) {
            return binary_length_reward({thinking_tokens, 0}, max_len);
        },
        py::arg("thinking_tokens"), py::arg("max_len"));
    m.def(
        "group_advantage", [](const std::vector<double>& rewards) { return group_advantage(rewards); },
        py::arg("rewards"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
