#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "specsmith/core.hpp"

namespace specsmith::gateway {

enum class Role { System, User, Assistant };

const char* role_name(Role role);
std::optional<Role> parse_role(std::string_view text);

struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

struct ChatParams {
    std::string model_name = "gpt-4";
    double temperature = 0.0; // [0, 2]
    int max_output_tokens = 4096;
};

struct Conversation {
    std::vector<ChatMessage> messages;
    ChatParams params;
};

// Throws Err::InvalidConversation on rule violations: empty conversation,
// Assistant-first, two consecutive Assistant messages, empty System/User
// content, out-of-range params.
void validate_conversation(const Conversation& conv);

// Stable digest over the NFC-normalized message contents and params.
std::string request_digest(const Conversation& conv);

struct Interaction {
    std::string request_digest;
    Conversation request;
    ChatMessage response;
};

struct Cassette {
    std::vector<Interaction> interactions;

    std::optional<ChatMessage> find(const std::string& digest) const;
    bool contains(const std::string& digest) const;
};

Cassette parse_cassette(const std::string& json_text);
Cassette load_cassette(const std::string& path);
std::string cassette_to_json(const Cassette& cassette);
void save_cassette(const Cassette& cassette, const std::string& path);

class Gateway {
public:
    virtual ~Gateway() = default;

    // Returns one Assistant message. Errors: ProviderError, CassetteMiss,
    // ContextOverflow (provider signalled its token limit).
    virtual ChatMessage complete(const Conversation& conv) = 0;

    virtual std::string backend_name() const = 0;
};

// ---- deterministic mock ----------------------------------------------------

struct MockRule {
    std::vector<std::string> contains; // all must appear in the last user message
    std::string response;
};

class MockGateway : public Gateway {
public:
    MockGateway(std::vector<MockRule> rules, std::optional<std::string> default_response);

    ChatMessage complete(const Conversation& conv) override;
    std::string backend_name() const override { return "mock"; }

private:
    std::vector<MockRule> rules_;
    std::optional<std::string> default_response_;
};

// Rule file: {"schema":1, "rules":[{"contains": <string or array>,
// "response": "..." | "response_file": "relative/path"}], "default": "..."}.
std::shared_ptr<MockGateway> load_mock_gateway(const std::string& rule_file_path);

// ---- cassette replay -------------------------------------------------------

class ReplayGateway : public Gateway {
public:
    explicit ReplayGateway(Cassette cassette);

    ChatMessage complete(const Conversation& conv) override;
    std::string backend_name() const override { return "replay"; }

private:
    Cassette cassette_;
};

// ---- live HTTP -------------------------------------------------------------

struct HttpResponse {
    int status = 0;
    std::string body;
    bool network_error = false;
    std::string error;
};

// (path, json_body) -> response. Injectable for tests.
using Transport = std::function<HttpResponse(const std::string&, const std::string&)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct LiveConfig {
    std::string api_base = "https://api.openai.com/v1";
    std::string api_key;
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    int parallelism = 4;
    double requests_per_minute = 30.0;
};

// Token bucket guarding the live backend. Thread-safe; the clock is
// injectable so refill arithmetic is testable without real waiting.
class RateLimiter {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    RateLimiter(double permits_per_minute, Clock clock = nullptr, Sleeper sleeper = nullptr);

    void acquire();

    // Milliseconds a caller would have to wait right now; 0 when a permit is
    // available.
    std::chrono::milliseconds wait_needed();

private:
    double capacity_;
    double tokens_;
    double per_ms_;
    std::chrono::steady_clock::time_point last_refill_;
    Clock clock_;
    Sleeper sleeper_;
    std::mutex mutex_;

    void refill_locked();
};

// Bounds in-flight requests; plain mutex/condvar so the limit is runtime-set.
class ConcurrencyLimit {
public:
    explicit ConcurrencyLimit(int limit);
    void acquire();
    void release();

private:
    int available_;
    std::mutex mutex_;
    std::condition_variable cv_;
};

class LiveGateway : public Gateway {
public:
    explicit LiveGateway(LiveConfig config, Transport transport = nullptr,
                         Sleeper sleeper = nullptr);

    ChatMessage complete(const Conversation& conv) override;
    std::string backend_name() const override { return "live"; }

private:
    LiveConfig config_;
    Transport transport_;
    Sleeper sleeper_;
    RateLimiter rate_limiter_;
    ConcurrencyLimit concurrency_;

    HttpResponse http_post(const std::string& path, const std::string& body);
};

// Serializes a Conversation to the chat-completion request body
// {model, messages[{role, content}], temperature, max_tokens}.
std::string build_request_body(const Conversation& conv);

// Extracts choices[0].message.content; throws ProviderError on shape errors.
ChatMessage parse_completion_response(const std::string& body);

// ---- record / replay wrapper -----------------------------------------------

// Wraps any backend and appends each new interaction to a cassette file.
// Idempotent: a request whose digest is already recorded is answered from the
// cassette without touching the inner backend.
class RecordingGateway : public Gateway {
public:
    RecordingGateway(std::shared_ptr<Gateway> inner, std::string cassette_path);

    ChatMessage complete(const Conversation& conv) override;
    std::string backend_name() const override { return "record(" + inner_->backend_name() + ")"; }

    const Cassette& cassette() const { return cassette_; }

private:
    std::shared_ptr<Gateway> inner_;
    std::string cassette_path_;
    Cassette cassette_;
    std::mutex write_mutex_;
};

} // namespace specsmith::gateway
