#pragma once

#include "ccm/error.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ccm {

struct ChatMessage {
    std::string role;  // "system", "user" or "assistant"
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
    std::string model;
    double temperature = 0.0;
    std::vector<ChatMessage> messages;
};

/// The backend could not be reached or answered with an error.
class TransportError : public Error {
public:
    using Error::Error;
};

/// A chat-completion backend: send messages, receive the assistant text.
/// Implementations must be safe to call from several threads at once.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Token bucket limiting requests per minute. Zero disables limiting.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_minute, double burst = 1.0);

    /// Blocks until a token is available.
    void acquire();

    /// Takes a token if one is available at `now`; otherwise returns the wait.
    std::chrono::nanoseconds try_acquire(std::chrono::steady_clock::time_point now);

private:
    double rate_per_ns_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

/// Deterministic offline backend. Reads the description out of the user
/// message and answers with a schema-compliant payload derived from keyword
/// cues; every cited sentence is a verbatim slice of the description.
class MockChatClient : public ChatClient {
public:
    std::string complete(const ChatRequest& request) override;
};

/// Test double answering through a callback. Also counts calls.
class ScriptedChatClient : public ChatClient {
public:
    using Handler = std::function<std::string(const ChatRequest&, int call)>;
    explicit ScriptedChatClient(Handler h) : handler_(std::move(h)) {}

    std::string complete(const ChatRequest& request) override;
    int calls() const;

private:
    Handler handler_;
    mutable std::mutex mu_;
    int calls_ = 0;
};

struct HttpClientOptions {
    std::string base_url;  // e.g. "https://api.example.com/v1"
    std::string api_key;
    double requests_per_minute = 0.0;
    int timeout_seconds = 120;
};

/// Generic chat-completions endpoint: POST {base_url}/chat/completions with
/// {"model", "temperature", "messages": [{role, content}]}, reading
/// choices[0].message.content from the response.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(HttpClientOptions options);
    std::string complete(const ChatRequest& request) override;

private:
    HttpClientOptions options_;
    RateLimiter limiter_;
};

/// Request body for the generic chat schema (exposed for tests).
std::string chat_request_body(const ChatRequest& request);

/// Pulls the assistant text out of a chat-completions response body.
std::string parse_chat_response(const std::string& body);  // throws TransportError

}  // namespace ccm
