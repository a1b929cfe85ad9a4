#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "support.hpp"
#include "voxweave/error.hpp"
#include "voxweave/eval.hpp"
#include "voxweave/service.hpp"
#include "voxweave/transcript.hpp"

using namespace voxweave;
using namespace std::chrono_literals;

namespace {

std::vector<GenEvent> say(const std::string& text, std::initializer_list<std::uint32_t> audio) {
    std::vector<GenEvent> out;
    for (unsigned char c : text) out.push_back(GenEvent::text(c));
    for (std::uint32_t a : audio) out.push_back(GenEvent::audio(a));
    return out;
}

std::string write_script(const testsupport::TempDir& dir, const std::vector<ScriptedConversation>& convs) {
    const auto path = dir / "script.jsonl";
    std::ofstream out(path);
    for (const auto& c : convs) out << script_line(c) << "\n";
    return "scripted:" + path.string();
}

/// Speech followed by enough silence to end the utterance.
PcmClip utterance(double freq = 220.0) {
    return testsupport::concat({testsupport::tone(0.4, 0.5, freq), testsupport::constant(0.f, 0.8)});
}

/// Renders the frames a turn is expected to stream, payload-for-payload
/// where the payload is cheap to predict.
std::vector<std::pair<FrameType, std::string>> summarize(const std::vector<Frame>& frames) {
    std::vector<std::pair<FrameType, std::string>> out;
    for (const Frame& f : frames) {
        if (f.type == FrameType::AudioOut)
            out.emplace_back(f.type, std::to_string(parse_audio_out(f).token));
        else if (f.type == FrameType::TurnEnd)
            out.emplace_back(f.type, "");
        else
            out.emplace_back(f.type, f.payload_text());
    }
    return out;
}

std::vector<std::pair<FrameType, std::string>> expected(const std::string& text, std::initializer_list<std::uint32_t> audio) {
    std::vector<std::pair<FrameType, std::string>> out;
    for (char c : text) out.emplace_back(FrameType::TextPartial, std::string(1, c));
    for (std::uint32_t a : audio) out.emplace_back(FrameType::AudioOut, std::to_string(a));
    out.emplace_back(FrameType::TurnEnd, "");
    return out;
}

ServiceConfig test_config(const std::string& backend) {
    ServiceConfig cfg;
    cfg.backend = backend;
    cfg.log_level = "off";
    return cfg;
}

}  // namespace

TEST_CASE("config parsing, env overrides and validation") {
    testsupport::TempDir dir("svc");
    {
        std::ofstream f(dir / "svc.conf");
        f << "# comment\nport = 9100\nend_of_utterance_ms=400\nsystem_prompt=be kind\n";
    }
    ServiceConfig cfg = load_service_config(dir / "svc.conf");
    CHECK(cfg.port == 9100);
    CHECK(cfg.end_of_utterance_ms == 400.0);
    CHECK(cfg.session.system_prompt == "be kind");

    const std::map<std::string, std::string> env{{"VOXWEAVE_PORT", "9200"}, {"VOXWEAVE_VAD_THRESHOLD_DBFS", "-35"}};
    apply_env_overrides(cfg, [&](const char* k) -> const char* {
        const auto it = env.find(k);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    CHECK(cfg.port == 9200);
    CHECK(cfg.session.vad.energy_threshold_dbfs == -35.0);

    CHECK_THROWS_AS(cfg.set("colour", "blue"), InvalidConfig);
    CHECK_THROWS_AS(cfg.set("port", "abc"), InvalidConfig);
    CHECK_THROWS_AS(cfg.set("port", "70000"), InvalidConfig);
    CHECK_THROWS_AS(cfg.set("log_level", "loud"), InvalidConfig);
    CHECK_THROWS_AS(load_service_config(dir / "missing.conf"), IoError);
}

TEST_CASE("logger writes key=value lines") {
    std::ostringstream out;
    Logger log(&out, Logger::Level::Info);
    log.log(Logger::Level::Debug, "hidden");
    log.log(Logger::Level::Info, "session_open", {{"session", "3"}, {"peer", "a b"}});
    const std::string s = out.str();
    CHECK(s.find("hidden") == std::string::npos);
    CHECK(s.find("level=info event=session_open session=3 peer=\"a b\"") != std::string::npos);
}

TEST_CASE("endpoint detector") {
    EndpointDetector ep(VadConfig{}, 24000, 600, 30000);
    CHECK_FALSE(ep.push(testsupport::constant(0.f, 1.0).samples));
    CHECK_FALSE(ep.speech_seen());
    CHECK_FALSE(ep.push(testsupport::tone(0.4).samples));
    CHECK(ep.speech_seen());
    CHECK_FALSE(ep.push(testsupport::constant(0.f, 0.3).samples));
    CHECK(ep.push(testsupport::constant(0.f, 0.4).samples));
    const PcmClip clip = ep.take();
    CHECK(clip.samples.size() == 24000 * 21 / 10);
    CHECK(ep.buffered_samples() == 0);
    CHECK_FALSE(ep.speech_seen());

    EndpointDetector capped(VadConfig{}, 24000, 600, 500);
    CHECK(capped.push(testsupport::tone(0.6).samples));
}

TEST_CASE("silence produces no generation frames") {
    Server server(test_config("stub:"));
    server.start();
    {
        ServiceClient client("127.0.0.1", server.port(), 400ms);
        client.hello();
        client.send_audio(testsupport::constant(0.f, 2.0));
        client.flush();
        CHECK_THROWS_AS(client.read_frame(), IoError);  // nothing arrives before the timeout
        client.close();
    }
    std::this_thread::sleep_for(50ms);
    const auto stats = server.stats();
    CHECK(stats.turns == 0);
    CHECK(stats.frames_out == 1);  // the Hello reply only
    server.stop();
}

TEST_CASE("a scripted turn streams in script order") {
    testsupport::TempDir dir("svc");
    ScriptedConversation conv{"c1", {say("hi", {11, 12, 13}), say("bye", {14})}};
    Server server(test_config(write_script(dir, {conv})));
    server.start();
    ServiceClient client("127.0.0.1", server.port());
    const auto sid = client.hello("c1");
    CHECK(sid > 0);
    client.send_audio(utterance());
    const auto t1 = client.read_turn();
    CHECK(summarize(t1) == expected("hi", {11, 12, 13}));
    for (const Frame& f : t1) CHECK(f.session_id == sid);
    CHECK(parse_audio_out(t1[2]).samples.size() == 960);

    client.send_audio(testsupport::tone(0.4));
    client.flush();  // explicit end of utterance
    CHECK(summarize(client.read_turn()) == expected("bye", {14}));
    client.close();
    server.stop();
}

TEST_CASE("tool calls stream their span and result; thinking stays private") {
    testsupport::TempDir dir("svc");
    const std::string span = R"(<tool_call>{"name":"datetime","arguments":{}}</tool_call>)";
    std::vector<GenEvent> turn{GenEvent::think_start(), GenEvent::text('x'), GenEvent::think_end(),
                               GenEvent::tool_call(span), GenEvent::text('k'), GenEvent::audio(3)};
    Server server(test_config(write_script(dir, {{"c", {turn}}})));
    server.start();
    ServiceClient client("127.0.0.1", server.port());
    client.hello("c");
    client.send_audio(utterance());
    const auto frames = client.read_turn();
    REQUIRE(frames.size() == 5);
    CHECK(frames[0].type == FrameType::ToolCallEvent);
    CHECK(frames[0].payload_text() == span);
    CHECK(frames[1].type == FrameType::ToolResultEvent);
    CHECK(frames[1].payload_text().find("\"ok\":true") != std::string::npos);
    CHECK(frames[2].payload_text() == "k");
    CHECK(frames[3].type == FrameType::AudioOut);
    CHECK(frames[4].type == FrameType::TurnEnd);
    server.stop();
}

TEST_CASE("eight concurrent sessions stay isolated") {
    testsupport::TempDir dir("svc");
    std::vector<ScriptedConversation> convs;
    for (std::uint32_t i = 0; i < 8; ++i) {
        const std::string tag = "s" + std::to_string(i);
        convs.push_back({tag, {say(tag + "a", {100 + i, 200 + i}), say(tag + "b", {300 + i})}});
    }
    ServiceConfig cfg = test_config(write_script(dir, convs));
    cfg.transcript_dir = dir.path();
    Server server(cfg);
    server.start();

    std::vector<std::string> failures(8);
    std::vector<std::uint64_t> sids(8);
    {
        std::vector<std::jthread> threads;
        for (std::uint32_t i = 0; i < 8; ++i) {
            threads.emplace_back([&, i] {
                try {
                    const std::string tag = "s" + std::to_string(i);
                    ServiceClient client("127.0.0.1", server.port());
                    sids[i] = client.hello(tag);
                    client.send_audio(utterance(200.0 + 20 * i));
                    const auto t1 = client.read_turn();
                    client.send_audio(utterance(300.0 + 20 * i));
                    const auto t2 = client.read_turn();
                    for (const auto* t : {&t1, &t2})
                        for (const Frame& f : *t)
                            if (f.session_id != sids[i]) failures[i] = "foreign session id";
                    if (summarize(t1) != expected(tag + "a", {100 + i, 200 + i})) failures[i] = "turn 1 differs";
                    if (summarize(t2) != expected(tag + "b", {300 + i})) failures[i] = "turn 2 differs";
                } catch (const std::exception& e) {
                    failures[i] = e.what();
                }
            });
        }
    }
    for (std::size_t i = 0; i < 8; ++i) CHECK_MESSAGE(failures[i].empty(), "session ", i, ": ", failures[i]);
    std::sort(sids.begin(), sids.end());
    CHECK(std::adjacent_find(sids.begin(), sids.end()) == sids.end());
    server.stop();

    for (std::uint64_t sid : sids) {
        std::ifstream in(dir / ("session-" + std::to_string(sid) + ".jsonl"));
        REQUIRE(in.good());
        const auto report = replay_transcript(in);
        CHECK(report.turns == 2);
        CHECK(report.identical());
    }
}

TEST_CASE("a backend error is reported and the session survives") {
    testsupport::TempDir dir("svc");
    ScriptedConversation conv{"c", {say("", {9999}), say("ok", {1})}};
    Server server(test_config(write_script(dir, {conv})));
    server.start();
    ServiceClient client("127.0.0.1", server.port());
    client.hello("c");
    client.send_audio(utterance());
    const auto t1 = client.read_turn();
    REQUIRE_FALSE(t1.empty());
    CHECK(t1.back().type == FrameType::Error);
    client.send_audio(utterance());
    CHECK(summarize(client.read_turn()) == expected("ok", {1}));
    CHECK(server.stats().turn_errors == 1);
    server.stop();
}

TEST_CASE("protocol violations get an Error frame and a close") {
    Server server(test_config("stub:"));
    server.start();
    {
        ServiceClient client("127.0.0.1", server.port());
        const std::vector<std::uint8_t> junk{20, 0, 0, 0, 99, 1, 2, 3};
        client.send_raw(junk);
        auto f = client.read_frame();
        REQUIRE(f.has_value());
        CHECK(f->type == FrameType::Error);
        CHECK_FALSE(client.read_frame().has_value());
    }
    {
        ServiceClient client("127.0.0.1", server.port());
        client.send_frame(make_frame(FrameType::AudioIn, 0, 0, ""));  // audio before Hello
        auto f = client.read_frame();
        REQUIRE(f.has_value());
        CHECK(f->type == FrameType::Error);
        CHECK_FALSE(client.read_frame().has_value());
    }
    {
        ServiceClient client("127.0.0.1", server.port());
        client.hello();
        client.send_frame(make_frame(FrameType::AudioIn, client.session_id(), 5, ""));  // seq gap
        auto f = client.read_frame();
        REQUIRE(f.has_value());
        CHECK(f->type == FrameType::Error);
        CHECK_FALSE(client.read_frame().has_value());
    }
    // The server keeps serving new sessions afterwards.
    ServiceClient ok("127.0.0.1", server.port());
    CHECK(ok.hello() > 0);
    server.stop();
}

TEST_CASE("stop drains live sessions") {
    Server server(test_config("stub:"));
    server.start();
    ServiceClient a("127.0.0.1", server.port(), 2000ms);
    ServiceClient b("127.0.0.1", server.port(), 2000ms);
    a.hello();
    b.hello();
    std::this_thread::sleep_for(50ms);
    CHECK(server.live_sessions() == 2);
    server.stop();
    CHECK(server.live_sessions() == 0);
    CHECK_FALSE(a.read_frame().has_value());
    CHECK_FALSE(b.read_frame().has_value());
}
