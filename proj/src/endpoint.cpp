#include "staterecall/endpoint.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "staterecall/error.hpp"

namespace staterecall {

using nlohmann::json;

std::string_view variant_token(Variant v) { return v == Variant::Think ? "think" : "instruct"; }

Variant parse_variant(std::string_view token) {
  if (token == "think") return Variant::Think;
  if (token == "instruct") return Variant::Instruct;
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(token) + "'");
}

std::uint32_t default_max_output_tokens(Variant v) { return v == Variant::Think ? 6000 : 40; }

EndpointConfig EndpointConfig::preset(Variant variant, std::string base_url, std::string model_id) {
  EndpointConfig cfg;
  cfg.base_url = std::move(base_url);
  cfg.model_id = std::move(model_id);
  cfg.variant = variant;
  cfg.temperature = 0.0;
  cfg.max_output_tokens = default_max_output_tokens(variant);
  return cfg;
}

void EndpointConfig::validate() const {
  if (base_url.empty()) throw Error(ErrorCode::InvalidArgument, "endpoint base_url is empty");
  if (model_id.empty()) throw Error(ErrorCode::InvalidArgument, "endpoint model id is empty");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
  if (max_output_tokens < 1) throw Error(ErrorCode::InvalidArgument, "max_output_tokens must be >= 1");
  if (max_in_flight < 1) throw Error(ErrorCode::InvalidArgument, "max_in_flight must be >= 1");
  if (!(request_timeout_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "request timeout must be > 0");
  if (backoff_factor < 1.0) throw Error(ErrorCode::InvalidArgument, "backoff factor must be >= 1");
}

bool is_retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

std::chrono::milliseconds backoff_delay(const EndpointConfig& cfg, std::uint32_t retry,
                                        std::chrono::milliseconds previous, Rng& rng) {
  const double ceiling = std::min(static_cast<double>(cfg.backoff_cap.count()),
                                  static_cast<double>(cfg.backoff_base.count()) *
                                      std::pow(cfg.backoff_factor, static_cast<double>(retry)));
  const auto bound = static_cast<std::uint64_t>(std::max(0.0, std::floor(ceiling)));
  const auto jittered = std::chrono::milliseconds(static_cast<std::int64_t>(rng.uniform(bound + 1)));
  return std::max(previous, jittered);
}

class EndpointClient::Slot {
 public:
  explicit Slot(EndpointClient& c) : c_(c) {
    std::unique_lock lock(c_.gate_mutex_);
    c_.gate_cv_.wait(lock, [&] { return c_.in_flight_ < c_.cfg_.max_in_flight; });
    ++c_.in_flight_;
  }
  ~Slot() {
    {
      std::lock_guard lock(c_.gate_mutex_);
      --c_.in_flight_;
    }
    c_.gate_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  EndpointClient& c_;
};

namespace {

void split_url(const std::string& url, std::string& origin, std::string& prefix) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin = url.substr(0, path_start);
  prefix = path_start == std::string::npos ? std::string{} : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

}  // namespace

EndpointClient::EndpointClient(EndpointConfig cfg)
    : cfg_(std::move(cfg)), jitter_(std::random_device{}()) {
  cfg_.validate();
  std::string prefix;
  split_url(cfg_.base_url, origin_, prefix);
  path_ = prefix + "/v1/chat/completions";
  if (cfg_.api_key && !cfg_.api_key->empty()) {
    bearer_ = *cfg_.api_key;
  } else if (const char* env = std::getenv(kApiKeyEnv); env != nullptr && *env != '\0') {
    bearer_ = env;
  }
}

json EndpointClient::build_request(const std::string& prompt_text) const {
  return {
      {"model", cfg_.model_id},
      {"messages", json::array({{{"role", "user"}, {"content", prompt_text}}})},
      {"temperature", cfg_.temperature},
      {"max_tokens", cfg_.max_output_tokens},
  };
}

CompletionResult EndpointClient::parse_response(std::string_view body) {
  auto fail = [](const std::string& why) {
    return EndpointError(EndpointError::Kind::MalformedResponse, why, 200, 0);
  };
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw fail("response body is not a JSON object");
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw fail("response has no choices");
  }
  const auto& choice = j["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw fail("choices[0].message missing");
  }
  const auto& message = choice["message"];
  CompletionResult out;
  if (message.contains("content") && message["content"].is_string()) {
    out.raw_text = message["content"].get<std::string>();
  } else if (message.contains("content") && !message["content"].is_null()) {
    throw fail("choices[0].message.content is not a string");
  }
  if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
    out.finish_reason = parse_finish_reason(choice["finish_reason"].get<std::string>());
  }
  return out;
}

std::chrono::milliseconds EndpointClient::next_backoff(std::uint32_t retry,
                                                       std::chrono::milliseconds previous) {
  std::lock_guard lock(rng_mutex_);
  return backoff_delay(cfg_, retry, previous, jitter_);
}

CompletionResult EndpointClient::complete(const RenderedPrompt& prompt) {
  return complete(prompt.text);
}

CompletionResult EndpointClient::complete(const std::string& prompt_text) {
  const std::string body = build_request(prompt_text).dump();
  const auto timeout = std::chrono::duration<double>(cfg_.request_timeout_s);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

  Slot slot(*this);
  const auto started = std::chrono::steady_clock::now();
  std::vector<std::chrono::milliseconds> delays;
  std::chrono::milliseconds previous{0};

  EndpointError last(EndpointError::Kind::Transport, "no attempt made", 0, 0);
  for (std::uint32_t attempt = 1; attempt <= cfg_.max_retries + 1; ++attempt) {
    if (attempt > 1) {
      previous = next_backoff(attempt - 2, previous);
      delays.push_back(previous);
      std::this_thread::sleep_for(previous);
    }

    httplib::Client http(origin_);
    const auto secs = static_cast<time_t>(timeout_us.count() / 1000000);
    const auto usecs = static_cast<time_t>(timeout_us.count() % 1000000);
    http.set_connection_timeout(secs, usecs);
    http.set_read_timeout(secs, usecs);
    http.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (bearer_) headers.emplace("Authorization", "Bearer " + *bearer_);

    const auto attempt_start = std::chrono::steady_clock::now();
    auto res = http.Post(path_, headers, body, "application/json");
    const auto attempt_elapsed = std::chrono::steady_clock::now() - attempt_start;

    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             attempt_elapsed >= timeout * 0.99;
      last = EndpointError(timed_out ? EndpointError::Kind::Timeout : EndpointError::Kind::Transport,
                           "request to " + origin_ + path_ + " failed: " + httplib::to_string(err),
                           0, attempt);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      EndpointError status_error(EndpointError::Kind::HttpStatus,
                                 "HTTP " + std::to_string(res->status) + " from " + origin_ + path_,
                                 res->status, attempt);
      if (!is_retryable_status(res->status)) throw status_error;
      last = status_error;
      continue;
    }

    CompletionResult out;
    try {
      out = parse_response(res->body);
    } catch (const EndpointError& e) {
      throw EndpointError(e.kind(), e.what(), res->status, attempt);
    }
    out.attempt_count = attempt;
    out.backoff_delays = std::move(delays);
    out.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return out;
  }
  throw last;
}

}  // namespace staterecall
