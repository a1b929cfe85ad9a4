#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"
#include "voxweave/cli.hpp"
#include "voxweave/wav.hpp"

using namespace voxweave;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_CASE("unknown or missing subcommands exit 1 with usage") {
    const auto r = cli({"frobnicate"});
    CHECK(r.code == kExitInputError);
    CHECK_FALSE(r.err.empty());
    CHECK(cli({}).code == kExitInputError);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("mux then demux --strip restores the token files") {
    testsupport::TempDir dir("cli");
    std::mt19937 rng(6);
    std::uniform_int_distribution<int> len(0, 50);
    std::uniform_int_distribution<std::uint32_t> text_id(1, 255), audio_id(0, 6598);
    for (int iter = 0; iter < 10; ++iter) {
        std::string text, audio;
        for (int k = len(rng); k > 0; --k) text += std::to_string(text_id(rng)) + "\n";
        for (int k = len(rng); k > 0; --k) audio += std::to_string(audio_id(rng)) + "\n";
        spit(dir / "t.txt", text);
        spit(dir / "a.txt", audio);
        const std::string ratio = std::to_string(1 + iter % 3) + ":" + std::to_string(1 + iter % 4);
        const auto m = cli({"mux", "--text", (dir / "t.txt").string(), "--audio", (dir / "a.txt").string(), "-o",
                            (dir / "s.ilv").string(), "--ratio", ratio});
        REQUIRE(m.code == 0);
        const auto d = cli({"demux", "-i", (dir / "s.ilv").string(), "--text", (dir / "t2.txt").string(), "--audio",
                            (dir / "a2.txt").string(), "--strip"});
        REQUIRE(d.code == 0);
        CHECK(slurp(dir / "t2.txt") == text);
        CHECK(slurp(dir / "a2.txt") == audio);
    }
}

TEST_CASE("mux input errors") {
    testsupport::TempDir dir("cli");
    spit(dir / "t.txt", "1\n");
    spit(dir / "a.txt", "7000\n");
    const auto r = cli({"mux", "--text", (dir / "t.txt").string(), "--audio", (dir / "a.txt").string(), "-o",
                        (dir / "s.ilv").string()});
    CHECK(r.code == kExitInputError);
    CHECK(r.err.find("index 0") != std::string::npos);
    CHECK(cli({"mux", "--text", (dir / "none").string(), "--audio", (dir / "a.txt").string(), "-o", "x"}).code ==
          kExitInputError);
    CHECK(cli({"mux", "--text", (dir / "t.txt").string(), "--audio", (dir / "t.txt").string(), "-o",
               (dir / "s.ilv").string(), "--ratio", "1-3"})
              .code == kExitInputError);
}

TEST_CASE("score table recomputes the bundled averages") {
    const auto r = cli({"score", "table"});
    CHECK(r.code == 0);
    CHECK(r.out.find("76.55") != std::string::npos);
    CHECK(r.out.find("43.45") != std::string::npos);
    CHECK(r.out.find("38.84") != std::string::npos);
    CHECK(r.out.find("27.86") != std::string::npos);
    CHECK(r.out.find("77.4") != std::string::npos);
    CHECK(r.out.find("3.18") != std::string::npos);
    CHECK(r.out.find("3.11") != std::string::npos);
    CHECK(r.out.find("MISMATCH") == std::string::npos);
    CHECK(r.out.find("source-reported") != std::string::npos);
}

TEST_CASE("score asr and bleu from JSON lines") {
    testsupport::TempDir dir("cli");
    spit(dir / "asr.jsonl", R"({"id":"u1","ref":"a b c","hyp":"a x c"})" "\n" R"({"id":"u2","ref":"d e f","hyp":"d e f"})" "\n");
    const auto w = cli({"score", "asr", "--input", (dir / "asr.jsonl").string()});
    CHECK(w.code == 0);
    CHECK(w.out.find("16.67") != std::string::npos);

    spit(dir / "zh.jsonl", R"({"id":"u1","ref":"你好吗","hyp":"你好"})" "\n");
    const auto c = cli({"score", "asr", "--unit", "chars", "--input", (dir / "zh.jsonl").string()});
    CHECK(c.out.find("33.33") != std::string::npos);

    spit(dir / "bleu.jsonl", R"({"id":"s1","ref":"the cat sat on the mat","hyp":"the cat sat on the mat"})" "\n");
    const auto b = cli({"score", "bleu", "--input", (dir / "bleu.jsonl").string()});
    CHECK(b.code == 0);
    CHECK(b.out.find("100.00") != std::string::npos);

    spit(dir / "empty_ref.jsonl", R"({"id":"u1","ref":"","hyp":"x"})" "\n");
    CHECK(cli({"score", "asr", "--input", (dir / "empty_ref.jsonl").string()}).code == kExitInputError);
}

TEST_CASE("score toolcall") {
    testsupport::TempDir dir("cli");
    spit(dir / "tc.jsonl",
         R"({"id":"1","tool":"weather","gold":{"trigger":true,"tool":"weather","arguments":{"location":"Paris"}},"predicted":{"name":"weather","arguments":{"location":"paris"}}})"
         "\n"
         R"({"id":"2","tool":"weather","gold":{"trigger":false},"predicted":null})"
         "\n");
    const auto r = cli({"score", "toolcall", "--input", (dir / "tc.jsonl").string(), "--json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("weather") != std::string::npos);
    CHECK(r.out.find("100") != std::string::npos);
}

TEST_CASE("vad on a wav file") {
    testsupport::TempDir dir("cli");
    write_wav(dir / "x.wav",
              testsupport::concat({testsupport::constant(0.f, 0.3), testsupport::tone(0.5), testsupport::constant(0.f, 0.3)}));
    const auto r = cli({"vad", (dir / "x.wav").string(), "--frames"});
    CHECK(r.code == 0);
    CHECK(r.out.find("start_ms") != std::string::npos);
    CHECK(r.out.find("encoder_frames") != std::string::npos);
}

TEST_CASE("bench toolcall on the shipped fixture scores 100") {
    const std::filesystem::path data(VOXWEAVE_DATA_DIR);
    const auto r = cli({"bench", "toolcall", "--dataset", (data / "fixtures" / "toolcall.jsonl").string(), "--model",
                        "scripted:" + (data / "fixtures" / "toolcall_perfect.script.jsonl").string(), "--json"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"unscored\": 0") != std::string::npos);
    CHECK(r.out.find("95.") == std::string::npos);
    for (const char* tool : {"audio_search", "datetime", "weather", "web_search"}) CHECK(r.out.find(tool) != std::string::npos);
}

TEST_CASE("bench fixtures and paralinguistic bench") {
    testsupport::TempDir dir("cli");
    const auto f = cli({"bench", "fixtures", "--out", dir.path().string(), "--per-tool", "3", "--per-task", "2"});
    REQUIRE(f.code == 0);
    const auto p = cli({"bench", "paralinguistic", "--dataset", (dir / "paralinguistic.jsonl").string(), "--model",
                        "scripted:" + (dir / "paralinguistic_perfect.script.jsonl").string()});
    CHECK(p.code == 0);
    CHECK(p.out.find("100.00") != std::string::npos);
}

TEST_CASE("reward score") {
    testsupport::TempDir dir("cli");
    spit(dir / "tr.jsonl", R"({"id":"a","group_id":"g","thinking_tokens":5})" "\n"
                           R"({"id":"b","group_id":"g","thinking_tokens":0})" "\n"
                           R"({"id":"c","group_id":"h","thinking_tokens":3})" "\n");
    const auto r = cli({"reward", "score", "--traces", (dir / "tr.jsonl").string(), "--max-len", "10"});
    CHECK(r.code == 0);
    CHECK(r.out.find(R"("id":"a","group_id":"g","reward":1.0,"advantage":1.0)") != std::string::npos);
    CHECK(r.out.find(R"("advantage":-1.0)") != std::string::npos);
    CHECK(r.err.find("single record") != std::string::npos);
}
