#pragma once
// OpenAI-compatible chat-completions client. Retries connection errors and
// timeouts with exponential backoff; a non-success HTTP status is never
// retried, and neither is a request that already succeeded.

#include "persim/backend.hpp"
#include "persim/core.hpp"

#include <httplib.h>

#include <chrono>
#include <string>
#include <thread>

namespace persim {

namespace detail {

struct ParsedEndpoint {
    std::string host_port;  // scheme://host:port
    std::string base_path;  // e.g. "/v1", may be empty
};

inline ParsedEndpoint parse_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw InvalidArgument("endpoint url must start with http:// or https://: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedEndpoint e;
    if (path_start == std::string::npos) {
        e.host_port = url;
    } else {
        e.host_port = url.substr(0, path_start);
        e.base_path = url.substr(path_start);
        while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
    }
    return e;
}

}  // namespace detail

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(std::string api_key = "") : api_key_(std::move(api_key)) {}

    GenerationResponse generate(const GenerationRequest& request) override {
        request.config.validate();
        if (request.config.endpoint_url.empty())
            throw InvalidArgument("http backend: no endpoint configured");
        const auto endpoint = detail::parse_endpoint(request.config.endpoint_url);
        const std::string path = endpoint.base_path + "/chat/completions";
        const std::string body = request.to_wire().dump();

        std::string last_error;
        for (int attempt = 1; attempt <= request.config.max_retries; ++attempt) {
            httplib::Client client(endpoint.host_port);
            const auto timeout = request.config.timeout;
            client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
            client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
            client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

            const auto start = std::chrono::steady_clock::now();
            httplib::Result result = client.Post(path, headers, body, "application/json");
            const auto elapsed = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();

            if (result) {
                if (result->status < 200 || result->status >= 300) {
                    std::string excerpt = result->body.substr(0, 200);
                    throw BackendRejectedError("http backend: endpoint returned status " +
                                                   std::to_string(result->status),
                                               result->status, std::move(excerpt));
                }
                return parse_response(result->body, elapsed);
            }
            last_error = httplib::to_string(result.error());
            if (attempt < request.config.max_retries) {
                const auto backoff = request.config.retry_backoff * (1 << (attempt - 1));
                std::this_thread::sleep_for(backoff);
            }
        }
        throw BackendUnavailableError("http backend: endpoint unreachable after " +
                                          std::to_string(request.config.max_retries) +
                                          " attempts (" + last_error + ")",
                                      request.config.max_retries);
    }

    std::string id() const override { return "http"; }

private:
    GenerationResponse parse_response(const std::string& body, double latency_ms) const {
        json j = json::parse(body, nullptr, false);
        if (j.is_discarded())
            throw BackendRejectedError("http backend: response is not valid JSON", 200,
                                       body.substr(0, 200));
        GenerationResponse resp;
        try {
            resp.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw BackendRejectedError("http backend: response missing choices[0].message.content",
                                       200, body.substr(0, 200));
        }
        if (j.contains("usage") && j["usage"].is_object() &&
            j["usage"].contains("completion_tokens") &&
            j["usage"]["completion_tokens"].is_number()) {
            resp.token_count = j["usage"]["completion_tokens"].get<int>();
        } else {
            resp.token_count = count_tokens(resp.text);
        }
        resp.latency_ms = latency_ms;
        resp.backend_id = id();
        return resp;
    }

    std::string api_key_;
};

}  // namespace persim
