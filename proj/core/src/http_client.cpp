#include "ccm/chat_client.hpp"

#include "httplib.h"

namespace ccm {

namespace {

struct Endpoint {
    std::string scheme_host_port;
    std::string path_prefix;
};

Endpoint split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("endpoint '" + url + "' has no scheme");
    auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.scheme_host_port = url.substr(0, path_start);
    if (path_start != std::string::npos) ep.path_prefix = url.substr(path_start);
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
    return ep;
}

}  // namespace

HttpChatClient::HttpChatClient(HttpClientOptions options)
    : options_(std::move(options)), limiter_(options_.requests_per_minute) {
    split_url(options_.base_url);
}

std::string HttpChatClient::complete(const ChatRequest& request) {
    limiter_.acquire();
    Endpoint ep = split_url(options_.base_url);
    httplib::Client cli(ep.scheme_host_port);
    if (!cli.is_valid()) throw TransportError("cannot create client for " + ep.scheme_host_port);
    cli.set_connection_timeout(options_.timeout_seconds);
    cli.set_read_timeout(options_.timeout_seconds);
    cli.set_write_timeout(options_.timeout_seconds);
    if (!options_.api_key.empty()) cli.set_bearer_token_auth(options_.api_key);

    auto res = cli.Post(ep.path_prefix + "/chat/completions", chat_request_body(request), "application/json");
    if (!res) throw TransportError("request to " + options_.base_url + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw TransportError("backend answered HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
    return parse_chat_response(res->body);
}

}  // namespace ccm
