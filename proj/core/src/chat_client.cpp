#include "ccm/chat_client.hpp"

#include "json.hpp"

#include <algorithm>
#include <thread>

namespace ccm {

using json = nlohmann::json;

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_ns_(requests_per_minute / 60e9),
      capacity_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(std::chrono::steady_clock::now()) {}

std::chrono::nanoseconds RateLimiter::try_acquire(std::chrono::steady_clock::time_point now) {
    if (rate_per_ns_ <= 0.0) return std::chrono::nanoseconds::zero();
    std::lock_guard lock(mu_);
    if (now > last_) {
        tokens_ = std::min(capacity_, tokens_ + rate_per_ns_ * static_cast<double>((now - last_).count()));
        last_ = now;
    }
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return std::chrono::nanoseconds::zero();
    }
    return std::chrono::nanoseconds(static_cast<long long>((1.0 - tokens_) / rate_per_ns_) + 1);
}

void RateLimiter::acquire() {
    for (;;) {
        auto wait = try_acquire(std::chrono::steady_clock::now());
        if (wait.count() == 0) return;
        std::this_thread::sleep_for(wait);
    }
}

std::string ScriptedChatClient::complete(const ChatRequest& request) {
    int n;
    {
        std::lock_guard lock(mu_);
        n = calls_++;
    }
    return handler_(request, n);
}

int ScriptedChatClient::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::string chat_request_body(const ChatRequest& request) {
    json body;
    body["model"] = request.model;
    body["temperature"] = request.temperature;
    body["messages"] = json::array();
    for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string parse_chat_response(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw TransportError(std::string("backend returned non-JSON body: ") + e.what());
    }
    if (j.contains("error")) throw TransportError("backend error: " + j.at("error").dump());
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected response shape: ") + e.what());
    }
}

}  // namespace ccm
