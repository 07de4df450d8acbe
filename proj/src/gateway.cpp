#include "specsmith/gateway.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "specsmith/text.hpp"

// httplib is pulled in only here; keep it out of the public header.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace specsmith::gateway {

namespace {

using nlohmann::json;

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return buf;
}

std::string read_file_or_raise(const std::string& path, Err code) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(code, "cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Conversation conversation_from_json(const json& node) {
    Conversation conv;
    if (node.contains("params")) {
        const auto& p = node.at("params");
        conv.params.model_name = p.value("model_name", std::string("gpt-4"));
        conv.params.temperature = p.value("temperature", 0.0);
        conv.params.max_output_tokens = p.value("max_output_tokens", 4096);
    }
    for (const auto& m : node.at("messages")) {
        auto role = parse_role(m.at("role").get<std::string>());
        if (!role) raise(Err::ParseError, "unknown role in cassette message");
        conv.messages.push_back({*role, m.at("content").get<std::string>()});
    }
    return conv;
}

json conversation_to_json(const Conversation& conv) {
    json node;
    node["params"] = {{"model_name", conv.params.model_name},
                      {"temperature", conv.params.temperature},
                      {"max_output_tokens", conv.params.max_output_tokens}};
    json messages = json::array();
    for (const auto& m : conv.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    node["messages"] = messages;
    return node;
}

bool looks_like_context_overflow(int status, const std::string& body) {
    if (status != 400 && status != 413) return false;
    const std::string lower = text::to_lower(body);
    return lower.find("context_length") != std::string::npos ||
           lower.find("context length") != std::string::npos ||
           lower.find("maximum context") != std::string::npos ||
           lower.find("too many tokens") != std::string::npos ||
           lower.find("token limit") != std::string::npos;
}

bool is_retryable(const HttpResponse& resp) {
    if (resp.network_error) return true;
    if (resp.status == 429 || resp.status == 408) return true;
    return resp.status >= 500 && resp.status < 600;
}

} // namespace

const char* role_name(Role role) {
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    }
    return "user";
}

std::optional<Role> parse_role(std::string_view word) {
    const std::string norm = text::to_lower(word);
    if (norm == "system") return Role::System;
    if (norm == "user") return Role::User;
    if (norm == "assistant") return Role::Assistant;
    return std::nullopt;
}

void validate_conversation(const Conversation& conv) {
    if (conv.messages.empty()) raise(Err::InvalidConversation, "conversation has no messages");
    if (conv.messages.front().role == Role::Assistant) {
        raise(Err::InvalidConversation, "first message must be System or User");
    }
    for (size_t i = 0; i < conv.messages.size(); ++i) {
        const auto& msg = conv.messages[i];
        if ((msg.role == Role::System || msg.role == Role::User) && msg.content.empty()) {
            raise(Err::InvalidConversation,
                  "message " + std::to_string(i) + " has empty content");
        }
        if (i > 0 && msg.role == Role::Assistant &&
            conv.messages[i - 1].role == Role::Assistant) {
            raise(Err::InvalidConversation, "two consecutive Assistant messages");
        }
    }
    if (conv.params.temperature < 0.0 || conv.params.temperature > 2.0) {
        raise(Err::InvalidConversation, "temperature must be in [0, 2]");
    }
    if (conv.params.max_output_tokens <= 0) {
        raise(Err::InvalidConversation, "max_output_tokens must be positive");
    }
    if (conv.params.model_name.empty()) {
        raise(Err::InvalidConversation, "model_name must not be empty");
    }
}

std::string request_digest(const Conversation& conv) {
    std::string canonical;
    canonical.append(conv.params.model_name);
    canonical.push_back('\x1e');
    canonical.append(format_temperature(conv.params.temperature));
    canonical.push_back('\x1e');
    canonical.append(std::to_string(conv.params.max_output_tokens));
    canonical.push_back('\x1e');
    for (const auto& msg : conv.messages) {
        canonical.append(role_name(msg.role));
        canonical.push_back('\x1f');
        canonical.append(text::nfc_compose(msg.content));
        canonical.push_back('\x1e');
    }
    return text::fnv1a_hex(canonical);
}

std::optional<ChatMessage> Cassette::find(const std::string& digest) const {
    for (const auto& interaction : interactions) {
        if (interaction.request_digest == digest) return interaction.response;
    }
    return std::nullopt;
}

bool Cassette::contains(const std::string& digest) const {
    return find(digest).has_value();
}

Cassette parse_cassette(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        raise(Err::ParseError, "cassette is not valid JSON");
    }
    if (root.value("schema", 0) != 1) raise(Err::ParseError, "unsupported cassette schema");

    Cassette cassette;
    std::set<std::string> digests;
    for (const auto& node : root.at("interactions")) {
        Interaction interaction;
        interaction.request_digest = node.at("request_digest").get<std::string>();
        interaction.request = conversation_from_json(node.at("request"));
        auto role = parse_role(node.at("response").at("role").get<std::string>());
        interaction.response = {role.value_or(Role::Assistant),
                                node.at("response").at("content").get<std::string>()};
        if (!digests.insert(interaction.request_digest).second) {
            raise(Err::ParseError,
                  "duplicate digest in cassette: " + interaction.request_digest);
        }
        cassette.interactions.push_back(std::move(interaction));
    }
    return cassette;
}

Cassette load_cassette(const std::string& path) {
    return parse_cassette(read_file_or_raise(path, Err::IoError));
}

std::string cassette_to_json(const Cassette& cassette) {
    json root;
    root["schema"] = 1;
    json interactions = json::array();
    for (const auto& interaction : cassette.interactions) {
        json node;
        node["request_digest"] = interaction.request_digest;
        node["request"] = conversation_to_json(interaction.request);
        node["response"] = {{"role", role_name(interaction.response.role)},
                            {"content", interaction.response.content}};
        interactions.push_back(std::move(node));
    }
    root["interactions"] = interactions;
    return root.dump(2) + "\n";
}

void save_cassette(const Cassette& cassette, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Err::CassetteWriteError, "cannot open " + path + " for writing");
    out << cassette_to_json(cassette);
    if (!out.good()) raise(Err::CassetteWriteError, "write failed for " + path);
}

// ---- mock -------------------------------------------------------------------

MockGateway::MockGateway(std::vector<MockRule> rules, std::optional<std::string> default_response)
    : rules_(std::move(rules)), default_response_(std::move(default_response)) {}

ChatMessage MockGateway::complete(const Conversation& conv) {
    validate_conversation(conv);
    const ChatMessage* last_user = nullptr;
    for (const auto& msg : conv.messages) {
        if (msg.role == Role::User) last_user = &msg;
    }
    const std::string& haystack = last_user ? last_user->content : conv.messages.back().content;

    for (const auto& rule : rules_) {
        bool all = true;
        for (const auto& needle : rule.contains) {
            if (haystack.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (all) return {Role::Assistant, rule.response};
    }
    if (default_response_) return {Role::Assistant, *default_response_};
    raise(Err::ProviderError, "no mock rule matched the request");
}

std::shared_ptr<MockGateway> load_mock_gateway(const std::string& rule_file_path) {
    const std::string raw = read_file_or_raise(rule_file_path, Err::IoError);
    json root = json::parse(raw, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        raise(Err::ParseError, "mock rule file is not valid JSON");
    }
    if (root.value("schema", 0) != 1) raise(Err::ParseError, "unsupported mock rule schema");

    const auto base_dir = std::filesystem::path(rule_file_path).parent_path();
    std::vector<MockRule> rules;
    for (const auto& node : root.value("rules", json::array())) {
        MockRule rule;
        const auto& contains = node.at("contains");
        if (contains.is_string()) {
            rule.contains.push_back(contains.get<std::string>());
        } else {
            for (const auto& needle : contains) rule.contains.push_back(needle.get<std::string>());
        }
        if (node.contains("response_file")) {
            const auto path = base_dir / node.at("response_file").get<std::string>();
            rule.response = read_file_or_raise(path.string(), Err::IoError);
        } else {
            rule.response = node.at("response").get<std::string>();
        }
        rules.push_back(std::move(rule));
    }
    std::optional<std::string> fallback;
    if (root.contains("default")) fallback = root.at("default").get<std::string>();
    return std::make_shared<MockGateway>(std::move(rules), std::move(fallback));
}

// ---- replay -----------------------------------------------------------------

ReplayGateway::ReplayGateway(Cassette cassette) : cassette_(std::move(cassette)) {}

ChatMessage ReplayGateway::complete(const Conversation& conv) {
    validate_conversation(conv);
    const std::string digest = request_digest(conv);
    auto response = cassette_.find(digest);
    if (!response) {
        raise(Err::CassetteMiss, "no recorded response for request digest " + digest);
    }
    return *response;
}

// ---- rate limiting ----------------------------------------------------------

RateLimiter::RateLimiter(double permits_per_minute, Clock clock, Sleeper sleeper)
    : capacity_(permits_per_minute),
      tokens_(permits_per_minute),
      per_ms_(permits_per_minute / 60000.0),
      clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }),
      sleeper_(sleeper ? std::move(sleeper)
                       : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    last_refill_ = clock_();
}

void RateLimiter::refill_locked() {
    auto now = clock_();
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(now - last_refill_);
    if (elapsed.count() > 0) {
        tokens_ = std::min(capacity_, tokens_ + elapsed.count() * per_ms_);
        last_refill_ = now;
    }
}

std::chrono::milliseconds RateLimiter::wait_needed() {
    std::lock_guard<std::mutex> lock(mutex_);
    refill_locked();
    if (tokens_ >= 1.0) return std::chrono::milliseconds(0);
    double deficit = 1.0 - tokens_;
    return std::chrono::milliseconds(static_cast<long long>(deficit / per_ms_) + 1);
}

void RateLimiter::acquire() {
    for (;;) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            refill_locked();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
        }
        auto wait = wait_needed();
        if (wait.count() > 0) sleeper_(wait);
    }
}

ConcurrencyLimit::ConcurrencyLimit(int limit) : available_(limit > 0 ? limit : 1) {}

void ConcurrencyLimit::acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
}

void ConcurrencyLimit::release() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++available_;
    }
    cv_.notify_one();
}

// ---- live -------------------------------------------------------------------

std::string build_request_body(const Conversation& conv) {
    json body;
    body["model"] = conv.params.model_name;
    body["temperature"] = conv.params.temperature;
    body["max_tokens"] = conv.params.max_output_tokens;
    json messages = json::array();
    for (const auto& msg : conv.messages) {
        messages.push_back({{"role", role_name(msg.role)}, {"content", msg.content}});
    }
    body["messages"] = messages;
    return body.dump();
}

ChatMessage parse_completion_response(const std::string& body) {
    json root = json::parse(body, nullptr, false);
    if (root.is_discarded()) raise(Err::ProviderError, "response is not valid JSON");
    if (!root.contains("choices") || !root.at("choices").is_array() ||
        root.at("choices").empty()) {
        raise(Err::ProviderError, "response has no choices");
    }
    const auto& message = root.at("choices").at(0).at("message");
    return {Role::Assistant, message.at("content").get<std::string>()};
}

LiveGateway::LiveGateway(LiveConfig config, Transport transport, Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(sleeper ? std::move(sleeper)
                       : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      rate_limiter_(config_.requests_per_minute),
      concurrency_(config_.parallelism) {}

HttpResponse LiveGateway::http_post(const std::string& path, const std::string& body) {
    if (transport_) return transport_(path, body);

    // Split api_base into scheme://host[:port] and a path prefix.
    std::string base = config_.api_base;
    std::string prefix;
    auto scheme_end = base.find("://");
    auto path_start = (scheme_end == std::string::npos) ? base.find('/')
                                                        : base.find('/', scheme_end + 3);
    if (path_start != std::string::npos) {
        prefix = base.substr(path_start);
        base = base.substr(0, path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }

    httplib::Client client(base);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
    auto result = client.Post(prefix + path, headers, body, "application/json");
    if (!result) {
        return {0, "", true, httplib::to_string(result.error())};
    }
    return {result->status, result->body, false, ""};
}

ChatMessage LiveGateway::complete(const Conversation& conv) {
    validate_conversation(conv);
    concurrency_.acquire();
    struct Release {
        ConcurrencyLimit& limit;
        ~Release() { limit.release(); }
    } release{concurrency_};

    const std::string body = build_request_body(conv);
    auto backoff = config_.initial_backoff;
    HttpResponse last;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        rate_limiter_.acquire();
        last = http_post("/chat/completions", body);
        if (!last.network_error && last.status == 200) {
            return parse_completion_response(last.body);
        }
        if (looks_like_context_overflow(last.status, last.body)) {
            raise(Err::ContextOverflow, "provider reported a token-limit failure");
        }
        if (!is_retryable(last) || attempt == config_.max_attempts) break;
        sleeper_(backoff);
        backoff *= 2;
    }
    std::string detail = last.network_error
                             ? "network failure: " + last.error
                             : "HTTP " + std::to_string(last.status) + ": " + last.body;
    raise(Err::ProviderError, detail);
}

// ---- recording --------------------------------------------------------------

RecordingGateway::RecordingGateway(std::shared_ptr<Gateway> inner, std::string cassette_path)
    : inner_(std::move(inner)), cassette_path_(std::move(cassette_path)) {
    if (std::filesystem::exists(cassette_path_)) {
        cassette_ = load_cassette(cassette_path_);
    }
}

ChatMessage RecordingGateway::complete(const Conversation& conv) {
    validate_conversation(conv);
    const std::string digest = request_digest(conv);
    {
        std::lock_guard<std::mutex> lock(write_mutex_);
        if (auto recorded = cassette_.find(digest)) return *recorded;
    }
    ChatMessage response = inner_->complete(conv);
    {
        std::lock_guard<std::mutex> lock(write_mutex_);
        if (!cassette_.contains(digest)) {
            cassette_.interactions.push_back({digest, conv, response});
            save_cassette(cassette_, cassette_path_);
        }
    }
    return response;
}

} // namespace specsmith::gateway
