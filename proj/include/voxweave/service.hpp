#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "voxweave/backends.hpp"
#include "voxweave/session.hpp"
#include "voxweave/wire.hpp"

namespace voxweave {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks a free port
    std::string backend = "stub:";
    std::filesystem::path library;
    std::filesystem::path transcript_dir;
    std::filesystem::path weather_fixture;     // JSON object location -> forecast
    std::filesystem::path web_search_fixture;  // JSON object query -> result
    std::uint32_t sample_rate = kDefaultSampleRate;
    double end_of_utterance_ms = 600.0;
    double max_utterance_ms = 30000.0;
    std::string log_level = "info";
    SessionConfig session;

    /// Applies one key=value setting. Throws InvalidConfig on an unknown key or bad value.
    void set(std::string_view key, std::string_view value);
    void validate() const;
};

/// Reads key=value lines; '#' starts a comment.
ServiceConfig load_service_config(const std::filesystem::path& path, ServiceConfig base = {});

/// Overrides settings from VOXWEAVE_<KEY> variables (key upper-cased),
/// e.g. VOXWEAVE_PORT or VOXWEAVE_VAD_THRESHOLD_DBFS.
void apply_env_overrides(ServiceConfig& config,
                         const std::function<const char*(const char*)>& getenv_fn = std::getenv);

/// Structured logs: one `ts=... level=... event=... key=value` line each.
class Logger {
public:
    enum class Level { Debug, Info, Warn, Error, Off };

    explicit Logger(std::ostream* out = nullptr, Level level = Level::Info) : out_(out), level_(level) {}
    static Level parse_level(std::string_view name);

    void log(Level level, std::string_view event,
             std::initializer_list<std::pair<std::string_view, std::string>> fields = {});

private:
    std::mutex mu_;
    std::ostream* out_;
    Level level_;
};

/// Streaming end-of-utterance detector. Audio is buffered; once speech has
/// been seen, an utterance ends after `silence_ms` of inactive windows or
/// when the buffer reaches `max_ms`.
class EndpointDetector {
public:
    EndpointDetector(const VadConfig& vad, std::uint32_t sample_rate, double silence_ms, double max_ms);

    /// Returns true when the buffered audio forms a complete utterance.
    bool push(std::span<const float> samples);
    bool speech_seen() const { return speech_seen_; }
    std::size_t buffered_samples() const { return buffer_.size(); }

    /// Hands over the buffered audio and resets.
    PcmClip take();

private:
    VadConfig vad_;
    std::uint32_t sample_rate_;
    std::size_t window_;
    double silence_ms_;
    std::size_t max_samples_;
    std::vector<float> buffer_;
    std::size_t scanned_ = 0;
    bool speech_seen_ = false;
    double trailing_silence_ms_ = 0.0;
};

struct LatencySnapshot {
    std::uint64_t sessions = 0;
    std::uint64_t turns = 0;
    std::uint64_t turn_errors = 0;
    std::uint64_t frames_in = 0;
    std::uint64_t frames_out = 0;
    std::uint64_t first_output_us_total = 0;  // utterance end -> first generated frame
    std::uint64_t first_output_us_max = 0;
    std::uint64_t turn_us_total = 0;
};

class Server {
public:
    Server(ServiceConfig config, std::ostream* log = nullptr);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts accepting. Throws IoError when the socket cannot be bound.
    void start();
    void stop();
    /// Blocks until stop() is called from another thread or a signal handler path.
    void wait();

    std::uint16_t port() const { return port_; }
    std::size_t live_sessions() const;
    LatencySnapshot stats() const;

private:
    struct Connection;
    struct Shared;

    void accept_loop();
    void serve_connection(std::shared_ptr<Connection> conn);

    ServiceConfig config_;
    std::shared_ptr<Shared> shared_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::thread acceptor_;
    std::atomic<bool> stopping_{false};
};

/// Blocking loopback client used by tests, benchmarks and the CLI.
class ServiceClient {
public:
    ServiceClient(const std::string& host, std::uint16_t port,
                  std::chrono::milliseconds timeout = std::chrono::seconds(10));
    ~ServiceClient();
    ServiceClient(const ServiceClient&) = delete;
    ServiceClient& operator=(const ServiceClient&) = delete;

    /// Sends Hello and returns the session id the server assigned.
    std::uint64_t hello(std::string_view conversation = {});
    void send_audio(const PcmClip& clip);
    void flush();
    void send_frame(const Frame& frame);
    void send_raw(std::span<const std::uint8_t> bytes);

    /// Next frame, or nullopt once the server closed the connection. Throws
    /// WireError when the server breaks seq_no contiguity.
    std::optional<Frame> read_frame();

    /// Frames up to and including the next TurnEnd or Error.
    std::vector<Frame> read_turn();
    void close();

    std::uint64_t session_id() const { return session_id_; }

private:
    int fd_ = -1;
    std::uint64_t session_id_ = 0;
    std::uint64_t next_out_seq_ = 0;
    std::uint64_t next_in_seq_ = 0;
    FrameDecoder decoder_;
};

}  // namespace voxweave
