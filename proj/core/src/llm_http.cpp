// SPDX-License-Identifier: Apache-2.0
#include "esforge/errors.hpp"
#include "esforge/llm.hpp"

#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <random>
#include <thread>

namespace esforge {

namespace {

thread_local int t_last_retries = 0;

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // full path of the completions route
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint_url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.origin = url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? std::string{} : url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    constexpr std::string_view kRoute = "/chat/completions";
    if (path.size() < kRoute.size() || path.compare(path.size() - kRoute.size(), kRoute.size(), kRoute) != 0) {
        path += kRoute;
    }
    ep.path = path;
    return ep;
}

bool transient_status(int status) noexcept { return status == 429 || status >= 500; }

}  // namespace

std::chrono::milliseconds backoff_upper_bound(std::chrono::milliseconds base, int attempt) noexcept {
    const int shift = attempt < 20 ? attempt : 20;
    return base * (std::int64_t{1} << shift);
}

struct HttpBackend::Impl {
    Endpoint endpoint;
    std::mutex mutex;
    std::condition_variable cv;
    std::size_t in_flight = 0;

    class Slot {
    public:
        Slot(Impl& impl, std::size_t limit) : impl_(impl) {
            std::unique_lock lock(impl_.mutex);
            impl_.cv.wait(lock, [&] { return impl_.in_flight < limit; });
            ++impl_.in_flight;
        }
        ~Slot() {
            {
                std::lock_guard lock(impl_.mutex);
                --impl_.in_flight;
            }
            impl_.cv.notify_one();
        }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        Impl& impl_;
    };
};

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
    config_.validate();
    impl_->endpoint = split_endpoint(config_.endpoint_url);
}

HttpBackend::~HttpBackend() = default;

int HttpBackend::last_retry_count() noexcept { return t_last_retries; }

nlohmann::json HttpBackend::request_body(const ChatRequest& request, std::string_view model) {
    nlohmann::json messages = nlohmann::json::array();
    if (!request.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role == ChatRole::User ? "user" : "assistant"}, {"content", m.text}});
    }
    return {{"model", model},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens},
            {"stream", false}};
}

std::string HttpBackend::complete(const ChatRequest& request) {
    request.validate();
    t_last_retries = 0;

    const std::string body = request_body(request, config_.model_name).dump();
    httplib::Headers headers;
    if (!config_.api_key_env_var.empty()) {
        if (const char* key = std::getenv(config_.api_key_env_var.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    thread_local std::mt19937_64 jitter{std::random_device{}()};
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout);

    for (int attempt = 0;; ++attempt) {
        std::string failure;
        {
            Impl::Slot slot(*impl_, config_.max_concurrent);
            httplib::Client client(impl_->endpoint.origin);
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);
            auto res = client.Post(impl_->endpoint.path, headers, body, "application/json");
            if (!res) {
                failure = "connection error: " + httplib::to_string(res.error());
            } else if (res->status >= 200 && res->status < 300) {
                const auto j = nlohmann::json::parse(res->body, nullptr, false);
                if (j.is_discarded()) throw ProtocolError("completion response is not JSON");
                const auto choices = j.find("choices");
                if (choices == j.end() || !choices->is_array() || choices->empty()) {
                    throw ProtocolError("completion response without choices");
                }
                const auto& msg = (*choices)[0].value("message", nlohmann::json::object());
                const auto content = msg.find("content");
                if (content == msg.end() || !content->is_string()) {
                    throw ProtocolError("completion response without message content");
                }
                std::string text = content->get<std::string>();
                if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ProtocolError("empty completion");
                return text;
            } else if (transient_status(res->status)) {
                failure = "http status " + std::to_string(res->status);
            } else {
                throw TransportError("http status " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
            }
        }
        if (attempt >= config_.max_retries) {
            throw TransportError("giving up after " + std::to_string(attempt) + " retries, last " + failure);
        }
        const auto upper = backoff_upper_bound(config_.backoff_base, attempt);
        std::uniform_int_distribution<std::int64_t> dist(0, upper.count());
        std::this_thread::sleep_for(std::chrono::milliseconds(dist(jitter)));
        ++t_last_retries;
    }
}

}  // namespace esforge
