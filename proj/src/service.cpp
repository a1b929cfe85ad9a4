#include "voxweave/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "voxweave/error.hpp"
#include "voxweave/text.hpp"
#include "voxweave/transcript.hpp"

namespace voxweave {

using nlohmann::json;

namespace {

double parse_double(std::string_view key, std::string_view v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(std::string(v), &used);
        if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw InvalidConfig("setting '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
    }
}

std::uint64_t parse_uint(std::string_view key, std::string_view v, std::uint64_t max) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || out > max)
        throw InvalidConfig("setting '" + std::string(key) + "' expects an integer <= " + std::to_string(max) +
                            ", got '" + std::string(v) + "'");
    return out;
}

std::map<std::string, std::string> load_answers(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fixture " + path.string());
    try {
        return json::parse(in).get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw InvalidConfig("fixture " + path.string() + ": " + e.what());
    }
}

void send_all(int fd, std::span<const std::uint8_t> bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError(std::string("send failed: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::uint64_t elapsed_us(std::chrono::steady_clock::time_point since) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - since).count());
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void ServiceConfig::set(std::string_view key, std::string_view value) {
    const std::string v(trim(value));
    if (key == "host") host = v;
    else if (key == "port") port = static_cast<std::uint16_t>(parse_uint(key, v, 65535));
    else if (key == "backend") backend = v;
    else if (key == "library") library = v;
    else if (key == "transcript_dir") transcript_dir = v;
    else if (key == "weather_fixture") weather_fixture = v;
    else if (key == "web_search_fixture") web_search_fixture = v;
    else if (key == "sample_rate") sample_rate = static_cast<std::uint32_t>(parse_uint(key, v, 384000));
    else if (key == "end_of_utterance_ms") end_of_utterance_ms = parse_double(key, v);
    else if (key == "max_utterance_ms") max_utterance_ms = parse_double(key, v);
    else if (key == "log_level") {
        Logger::parse_level(v);
        log_level = v;
    }
    else if (key == "system_prompt") session.system_prompt = v;
    else if (key == "budget") session.budget = parse_uint(key, v, 1ULL << 32);
    else if (key == "vad_threshold_dbfs") session.vad.energy_threshold_dbfs = parse_double(key, v);
    else if (key == "vad_window_ms") session.vad.window_ms = parse_double(key, v);
    else if (key == "vad_hangover_ms") session.vad.hangover_ms = parse_double(key, v);
    else if (key == "vad_min_segment_ms") session.vad.min_segment_ms = parse_double(key, v);
    else throw InvalidConfig("unknown setting '" + std::string(key) + "'");
}

void ServiceConfig::validate() const {
    if (sample_rate == 0) throw InvalidConfig("sample_rate must be positive");
    if (end_of_utterance_ms <= 0) throw InvalidConfig("end_of_utterance_ms must be positive");
    if (max_utterance_ms < end_of_utterance_ms) throw InvalidConfig("max_utterance_ms is below end_of_utterance_ms");
    Logger::parse_level(log_level);
    session.initial_state();
}

ServiceConfig load_service_config(const std::filesystem::path& path, ServiceConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw InvalidConfig(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        base.set(trim(s.substr(0, eq)), s.substr(eq + 1));
    }
    return base;
}

void apply_env_overrides(ServiceConfig& config, const std::function<const char*(const char*)>& getenv_fn) {
    static constexpr std::string_view kKeys[] = {
        "host",          "port",           "backend",         "library",           "transcript_dir",
        "weather_fixture", "web_search_fixture", "sample_rate", "end_of_utterance_ms", "max_utterance_ms",
        "log_level",     "system_prompt",  "budget",          "vad_threshold_dbfs", "vad_window_ms",
        "vad_hangover_ms", "vad_min_segment_ms"};
    for (std::string_view key : kKeys) {
        std::string var = "VOXWEAVE_";
        for (char c : key) var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        if (const char* v = getenv_fn(var.c_str())) config.set(key, v);
    }
}

// ---------------------------------------------------------------------------
// Logging

Logger::Level Logger::parse_level(std::string_view name) {
    if (name == "debug") return Level::Debug;
    if (name == "info") return Level::Info;
    if (name == "warn") return Level::Warn;
    if (name == "error") return Level::Error;
    if (name == "off") return Level::Off;
    throw InvalidConfig("unknown log level '" + std::string(name) + "'");
}

void Logger::log(Level level, std::string_view event,
                 std::initializer_list<std::pair<std::string_view, std::string>> fields) {
    if (!out_ || level < level_ || level_ == Level::Off) return;
    static constexpr std::string_view kNames[] = {"debug", "info", "warn", "error"};
    std::ostringstream line;
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
    line << "ts=" << ts << " level=" << kNames[static_cast<int>(level)] << " event=" << event;
    for (const auto& [k, v] : fields) {
        line << ' ' << k << '=';
        if (v.find_first_of(" \"=") != std::string::npos)
            line << json(v).dump();
        else
            line << v;
    }
    line << '\n';
    std::lock_guard lock(mu_);
    *out_ << line.str();
    out_->flush();
}

// ---------------------------------------------------------------------------
// Endpointing

EndpointDetector::EndpointDetector(const VadConfig& vad, std::uint32_t sample_rate, double silence_ms, double max_ms)
    : vad_(vad),
      sample_rate_(sample_rate),
      window_(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(vad.window_ms * sample_rate / 1000.0)))),
      silence_ms_(silence_ms),
      max_samples_(static_cast<std::size_t>(max_ms * sample_rate / 1000.0)) {
    vad.validate();
}

bool EndpointDetector::push(std::span<const float> samples) {
    buffer_.insert(buffer_.end(), samples.begin(), samples.end());
    const double window_ms = 1000.0 * static_cast<double>(window_) / sample_rate_;
    while (scanned_ + window_ <= buffer_.size()) {
        const double p = power_dbfs(std::span<const float>(buffer_).subspan(scanned_, window_));
        scanned_ += window_;
        if (p > vad_.energy_threshold_dbfs) {
            speech_seen_ = true;
            trailing_silence_ms_ = 0.0;
        } else if (speech_seen_) {
            trailing_silence_ms_ += window_ms;
        }
    }
    if (speech_seen_ && trailing_silence_ms_ >= silence_ms_) return true;
    return buffer_.size() >= max_samples_;
}

PcmClip EndpointDetector::take() {
    PcmClip clip;
    clip.sample_rate = sample_rate_;
    clip.samples = std::move(buffer_);
    buffer_.clear();
    scanned_ = 0;
    speech_seen_ = false;
    trailing_silence_ms_ = 0.0;
    return clip;
}

// ---------------------------------------------------------------------------
// Server

struct Server::Connection {
    int fd = -1;
    std::uint64_t session_id = 0;
    std::thread thread;
    std::atomic<bool> done{false};
};

struct Server::Shared {
    explicit Shared(const ServiceConfig& c, std::ostream* log)
        : factory(c.backend, c.session.interleave), logger(log, Logger::parse_level(c.log_level)) {}

    BackendFactory factory;
    Logger logger;
    std::shared_ptr<const VoiceLibrary> library;
    std::shared_ptr<WeatherClient> weather;
    std::shared_ptr<WebSearchClient> web_search;

    mutable std::mutex mu;  // guards connections, next_id and stopped
    std::map<std::uint64_t, std::shared_ptr<Connection>> connections;
    std::vector<std::shared_ptr<Connection>> pending;  // accepted, before Hello
    std::uint64_t next_id = 1;
    bool stopped = false;
    std::condition_variable stopped_cv;

    std::atomic<std::uint64_t> sessions{0}, turns{0}, turn_errors{0}, frames_in{0}, frames_out{0};
    std::atomic<std::uint64_t> first_output_us_total{0}, first_output_us_max{0}, turn_us_total{0};
};

namespace {

/// Writes frames for one session, keeping its outgoing seq_no contiguous.
class FrameSink {
public:
    FrameSink(int fd, std::uint64_t session_id, std::atomic<std::uint64_t>& counter)
        : fd_(fd), session_id_(session_id), counter_(counter) {}

    void send(FrameType type, std::vector<std::uint8_t> payload) {
        const Frame f{type, session_id_, seq_++, std::move(payload)};
        send_all(fd_, encode_frame(f));
        ++counter_;
    }
    void send(FrameType type, std::string_view text) {
        send(type, std::vector<std::uint8_t>(text.begin(), text.end()));
    }
    void set_session(std::uint64_t id) { session_id_ = id; }

private:
    int fd_;
    std::uint64_t session_id_;
    std::atomic<std::uint64_t>& counter_;
    std::uint64_t seq_ = 0;
};

/// Streams generation events as frames in the order they are produced.
class StreamingObserver : public TurnObserver {
public:
    StreamingObserver(FrameSink& sink, const InterleaveConfig& cfg, StubDetokenizer& detok)
        : sink_(sink), cfg_(cfg), detok_(detok) {}

    void on_turn_begin(std::size_t index, const Segment&) override {
        thinking_ = false;
        index_ = index;
        first_output_.reset();
    }

    void on_event(const GenEvent& ev) override {
        switch (ev.type) {
            case EventType::ThinkStart: thinking_ = true; return;
            case EventType::ThinkEnd: thinking_ = false; return;
            case EventType::TextToken: {
                if (thinking_ || ev.id == cfg_.text_pad) return;
                mark();
                const std::uint32_t ids[] = {ev.id};
                sink_.send(FrameType::TextPartial, decode_text(ids));
                return;
            }
            case EventType::AudioToken: {
                if (ev.id == cfg_.audio_pad || ev.id >= cfg_.audio_vocab_size) return;
                mark();
                std::vector<float> chunk;
                detok_.render_token(ev.id, chunk);
                PcmClip clip{std::move(chunk), detok_.sample_rate()};
                sink_.send(FrameType::AudioOut, audio_out_payload(ev.id, clip.to_pcm16()));
                return;
            }
            case EventType::ToolCallSpan:
                mark();
                sink_.send(FrameType::ToolCallEvent, ev.span);
                return;
            case EventType::EndOfTurn: return;
        }
    }

    void on_tool_result(const ToolResult& r) override {
        const json j{{"name", r.call.name}, {"ok", r.ok}, {"payload", r.payload}};
        sink_.send(FrameType::ToolResultEvent, j.dump());
    }

    void on_turn_end(const TurnResult& r) override {
        const json j{{"turn", index_},
                     {"text", r.text},
                     {"audio_tokens", r.audio_tokens.size()},
                     {"tool_calls", r.tool_calls.size()},
                     {"pcm_samples", r.pcm.samples.size()}};
        sink_.send(FrameType::TurnEnd, j.dump());
    }

    void on_turn_error(const std::string& what) override { sink_.send(FrameType::Error, what); }

    std::optional<std::chrono::steady_clock::time_point> first_output() const { return first_output_; }

private:
    void mark() {
        if (!first_output_) first_output_ = std::chrono::steady_clock::now();
    }

    FrameSink& sink_;
    const InterleaveConfig& cfg_;
    StubDetokenizer& detok_;
    bool thinking_ = false;
    std::size_t index_ = 0;
    std::optional<std::chrono::steady_clock::time_point> first_output_;
};

class ProtocolViolation : public WireError {
public:
    using WireError::WireError;
};

}  // namespace

Server::Server(ServiceConfig config, std::ostream* log) : config_(std::move(config)) {
    config_.validate();
    shared_ = std::make_shared<Shared>(config_, log);
    if (!config_.library.empty())
        shared_->library = std::make_shared<const VoiceLibrary>(VoiceLibrary::load(config_.library));
    if (!config_.weather_fixture.empty())
        shared_->weather = std::make_shared<FixtureWeatherClient>(load_answers(config_.weather_fixture));
    if (!config_.web_search_fixture.empty())
        shared_->web_search = std::make_shared<FixtureWebSearchClient>(load_answers(config_.web_search_fixture));
    if (!config_.transcript_dir.empty()) std::filesystem::create_directories(config_.transcript_dir);
}

Server::~Server() { stop(); }

void Server::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(config_.port);
    if (::inet_pton(AF_INET, config_.host.c_str(), &addr.sin_addr) != 1)
        throw InvalidConfig("host must be an IPv4 address, got '" + config_.host + "'");
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 64) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw IoError("cannot listen on " + config_.host + ":" + std::to_string(config_.port) + ": " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    shared_->logger.log(Logger::Level::Info, "listening",
                        {{"host", config_.host}, {"port", std::to_string(port_)}, {"backend", config_.backend}});
    acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::accept_loop() {
    std::vector<std::shared_ptr<Connection>> all;
    while (!stopping_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 100);
        // Reap finished connections.
        for (auto it = all.begin(); it != all.end();) {
            if ((*it)->done) {
                (*it)->thread.join();
                it = all.erase(it);
            } else {
                ++it;
            }
        }
        if (ready <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        auto conn = std::make_shared<Connection>();
        conn->fd = fd;
        {
            std::lock_guard lock(shared_->mu);
            shared_->pending.push_back(conn);
        }
        conn->thread = std::thread([this, conn] { serve_connection(conn); });
        all.push_back(conn);
    }
    // Wake every connection so its thread can exit, then join.
    {
        std::lock_guard lock(shared_->mu);
        for (auto& c : all)
            if (c->fd >= 0) ::shutdown(c->fd, SHUT_RDWR);
    }
    for (auto& c : all) c->thread.join();
}

void Server::serve_connection(std::shared_ptr<Connection> conn) {
    Shared& sh = *shared_;
    FrameSink sink(conn->fd, 0, sh.frames_out);
    FrameDecoder decoder;
    std::uint64_t expected_seq = 0;
    bool greeted = false;

    std::unique_ptr<GeneratorBackend> backend;
    SessionState state;
    StubDetokenizer detok(kDefaultSampleRate, 25);
    ToolClients clients;
    clients.library = sh.library;
    clients.weather = sh.weather;
    clients.web_search = sh.web_search;
    ClientDispatcher tools(clients);
    EndpointDetector endpoint(config_.session.vad, config_.sample_rate, config_.end_of_utterance_ms,
                              config_.max_utterance_ms);
    std::ofstream transcript_file;
    std::unique_ptr<TranscriptWriter> transcript;

    const auto run_utterance = [&] {
        PcmClip clip = endpoint.take();
        if (clip.empty()) return;
        StreamingObserver stream(sink, config_.session.interleave, detok);
        std::vector<TurnObserver*> observers{&stream};
        if (transcript) observers.push_back(transcript.get());
        ObserverFanout fanout(observers);
        const auto began = std::chrono::steady_clock::now();
        try {
            run_turn(state, clip, {*backend, tools, detok, config_.session, &fanout});
            ++sh.turns;
        } catch (const SilenceRejected&) {
            sh.logger.log(Logger::Level::Debug, "utterance_rejected", {{"session", std::to_string(conn->session_id)}});
            return;
        } catch (const IoError&) {
            throw;
        } catch (const Error& e) {
            // run_turn_features already reported the error to the client.
            ++sh.turn_errors;
            sh.logger.log(Logger::Level::Warn, "turn_error",
                          {{"session", std::to_string(conn->session_id)}, {"what", e.what()}});
        }
        if (auto first = stream.first_output()) {
            const auto us = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::microseconds>(*first - began).count());
            sh.first_output_us_total += us;
            std::uint64_t prev = sh.first_output_us_max;
            while (us > prev && !sh.first_output_us_max.compare_exchange_weak(prev, us)) {
            }
        }
        sh.turn_us_total += elapsed_us(began);
    };

    const auto handle = [&](const Frame& f) {
        ++sh.frames_in;
        if (f.seq_no != expected_seq)
            throw ProtocolViolation("expected seq_no " + std::to_string(expected_seq) + ", got " +
                                    std::to_string(f.seq_no));
        ++expected_seq;
        if (!greeted) {
            const HelloInfo hello = parse_hello(f);
            if (hello.version != kWireVersion)
                throw ProtocolViolation("unsupported protocol version " + std::to_string(hello.version));
            if (f.session_id != 0) throw ProtocolViolation("Hello must carry session_id 0");
            backend = sh.factory.make(hello.conversation);
            {
                std::lock_guard lock(sh.mu);
                conn->session_id = sh.next_id++;
                std::erase(sh.pending, conn);
                sh.connections.emplace(conn->session_id, conn);
            }
            ++sh.sessions;
            state = config_.session.initial_state();
            if (!config_.transcript_dir.empty()) {
                transcript_file.open(config_.transcript_dir / ("session-" + std::to_string(conn->session_id) + ".jsonl"));
                transcript = std::make_unique<TranscriptWriter>(transcript_file, config_.session, detok);
            }
            sink.set_session(conn->session_id);
            sink.send(FrameType::Hello, hello_payload(hello.conversation));
            greeted = true;
            sh.logger.log(Logger::Level::Info, "session_open",
                          {{"session", std::to_string(conn->session_id)}, {"conversation", hello.conversation}});
            return;
        }
        if (f.session_id != conn->session_id)
            throw ProtocolViolation("frame for session " + std::to_string(f.session_id) + " on session " +
                                    std::to_string(conn->session_id));
        if (f.type != FrameType::AudioIn)
            throw ProtocolViolation("unexpected " + std::string(to_string(f.type)) + " frame from client");
        if (f.payload.empty()) {
            if (endpoint.speech_seen()) run_utterance();
            else endpoint.take();
            return;
        }
        const std::vector<std::int16_t> pcm = parse_pcm16(f.payload);
        const PcmClip chunk = PcmClip::from_pcm16(pcm, config_.sample_rate);
        if (endpoint.push(chunk.samples)) {
            if (endpoint.speech_seen()) run_utterance();
            else endpoint.take();
        }
    };

    std::uint8_t buf[16384];
    try {
        for (;;) {
            const ssize_t n = ::recv(conn->fd, buf, sizeof buf, 0);
            if (n == 0) break;
            if (n < 0) {
                if (errno == EINTR) continue;
                break;
            }
            decoder.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
            while (auto f = decoder.next()) handle(*f);
        }
    } catch (const WireError& e) {
        sh.logger.log(Logger::Level::Warn, "protocol_error",
                      {{"session", std::to_string(conn->session_id)}, {"what", e.what()}});
        try {
            sink.send(FrameType::Error, e.what());
        } catch (const Error&) {
        }
    } catch (const IoError& e) {
        sh.logger.log(Logger::Level::Info, "peer_gone",
                      {{"session", std::to_string(conn->session_id)}, {"what", e.what()}});
    } catch (const Error& e) {
        // Session setup failures such as an unknown scripted conversation.
        sh.logger.log(Logger::Level::Warn, "session_error",
                      {{"session", std::to_string(conn->session_id)}, {"what", e.what()}});
        try {
            sink.send(FrameType::Error, e.what());
        } catch (const Error&) {
        }
    } catch (const std::exception& e) {
        sh.logger.log(Logger::Level::Error, "internal_error",
                      {{"session", std::to_string(conn->session_id)}, {"what", e.what()}});
    }

    {
        std::lock_guard lock(sh.mu);
        std::erase(sh.pending, conn);
        if (conn->session_id != 0) sh.connections.erase(conn->session_id);
        ::shutdown(conn->fd, SHUT_RDWR);
        ::close(conn->fd);
        conn->fd = -1;
    }
    if (conn->session_id != 0)
        sh.logger.log(Logger::Level::Info, "session_close", {{"session", std::to_string(conn->session_id)}});
    conn->done = true;
}

void Server::stop() {
    if (stopping_.exchange(true)) return;
    if (acceptor_.joinable()) acceptor_.join();
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    {
        std::lock_guard lock(shared_->mu);
        shared_->stopped = true;
    }
    shared_->stopped_cv.notify_all();
    const LatencySnapshot s = stats();
    shared_->logger.log(Logger::Level::Info, "stopped",
                        {{"sessions", std::to_string(s.sessions)},
                         {"turns", std::to_string(s.turns)},
                         {"turn_errors", std::to_string(s.turn_errors)},
                         {"first_output_us_max", std::to_string(s.first_output_us_max)}});
}

void Server::wait() {
    std::unique_lock lock(shared_->mu);
    shared_->stopped_cv.wait(lock, [this] { return shared_->stopped; });
}

std::size_t Server::live_sessions() const {
    std::lock_guard lock(shared_->mu);
    return shared_->connections.size();
}

LatencySnapshot Server::stats() const {
    const Shared& s = *shared_;
    return {s.sessions, s.turns, s.turn_errors, s.frames_in, s.frames_out,
            s.first_output_us_total, s.first_output_us_max, s.turn_us_total};
}

// ---------------------------------------------------------------------------
// Client

ServiceClient::ServiceClient(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw InvalidConfig("host must be an IPv4 address, got '" + host + "'");
    }
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        const std::string err = std::strerror(errno);
        ::close(fd_);
        throw IoError("cannot connect to " + host + ":" + std::to_string(port) + ": " + err);
    }
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

ServiceClient::~ServiceClient() { close(); }

void ServiceClient::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

void ServiceClient::send_raw(std::span<const std::uint8_t> bytes) { send_all(fd_, bytes); }

void ServiceClient::send_frame(const Frame& frame) {
    send_raw(encode_frame(frame));
    ++next_out_seq_;
}

std::uint64_t ServiceClient::hello(std::string_view conversation) {
    send_frame({FrameType::Hello, 0, next_out_seq_, hello_payload(conversation)});
    const std::optional<Frame> reply = read_frame();
    if (!reply) throw IoError("connection closed during handshake");
    if (reply->type == FrameType::Error) throw WireError("server refused session: " + reply->payload_text());
    parse_hello(*reply);
    session_id_ = reply->session_id;
    return session_id_;
}

void ServiceClient::send_audio(const PcmClip& clip) {
    const std::vector<std::int16_t> pcm = clip.to_pcm16();
    constexpr std::size_t kChunk = kMaxAudioInPayload / 2;
    for (std::size_t i = 0; i < pcm.size(); i += kChunk) {
        const std::size_t n = std::min(kChunk, pcm.size() - i);
        send_frame({FrameType::AudioIn, session_id_, next_out_seq_,
                    pcm16_payload(std::span<const std::int16_t>(pcm).subspan(i, n))});
    }
}

void ServiceClient::flush() { send_frame({FrameType::AudioIn, session_id_, next_out_seq_, {}}); }

std::optional<Frame> ServiceClient::read_frame() {
    std::uint8_t buf[16384];
    for (;;) {
        if (auto f = decoder_.next()) {
            if (f->seq_no != next_in_seq_)
                throw WireError("server seq_no " + std::to_string(f->seq_no) + ", expected " +
                                std::to_string(next_in_seq_));
            ++next_in_seq_;
            return f;
        }
        if (fd_ < 0) return std::nullopt;
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n == 0) return std::nullopt;
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) throw IoError("timed out waiting for a frame");
            return std::nullopt;
        }
        decoder_.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
    }
}

std::vector<Frame> ServiceClient::read_turn() {
    std::vector<Frame> out;
    while (auto f = read_frame()) {
        out.push_back(std::move(*f));
        if (out.back().type == FrameType::TurnEnd || out.back().type == FrameType::Error) break;
    }
    return out;
}

}  // namespace voxweave
