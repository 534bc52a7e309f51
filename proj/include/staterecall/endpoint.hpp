#pragma once

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "staterecall/prompt.hpp"
#include "staterecall/record.hpp"
#include "staterecall/rng.hpp"

namespace staterecall {

inline constexpr const char* kApiKeyEnv = "STATERECALL_API_KEY";

enum class Variant { Think, Instruct };

std::string_view variant_token(Variant v);
Variant parse_variant(std::string_view token);
/// Output-token cap per variant: 6000 for Think, 40 for Instruct.
std::uint32_t default_max_output_tokens(Variant v);

struct EndpointConfig {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string model_id;
  std::optional<std::string> api_key;
  Variant variant = Variant::Think;
  double temperature = 0.0;
  std::uint32_t max_output_tokens = 6000;
  double request_timeout_s = 600.0;
  std::uint32_t max_retries = 3;
  std::size_t max_in_flight = 8;

  // Exponential backoff with full jitter, held nondecreasing per request.
  std::chrono::milliseconds backoff_base{1000};
  double backoff_factor = 2.0;
  std::chrono::milliseconds backoff_cap{30000};

  static EndpointConfig preset(Variant variant, std::string base_url, std::string model_id);
  void validate() const;
};

struct CompletionResult {
  std::string raw_text;
  FinishReason finish_reason = FinishReason::Other;
  double latency_ms = 0.0;
  std::uint32_t attempt_count = 0;
  std::vector<std::chrono::milliseconds> backoff_delays;  // one per retry
};

class EndpointError : public std::runtime_error {
 public:
  enum class Kind { Transport, HttpStatus, MalformedResponse, Timeout };

  EndpointError(Kind kind, const std::string& detail, int http_status, std::uint32_t attempts)
      : std::runtime_error(detail), kind_(kind), http_status_(http_status), attempts_(attempts) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] int http_status() const noexcept { return http_status_; }
  [[nodiscard]] std::uint32_t attempts() const noexcept { return attempts_; }

 private:
  Kind kind_;
  int http_status_;
  std::uint32_t attempts_;
};

/// Delay before retry number `retry` (0-based): uniform in
/// [0, min(cap, base * factor^retry)], raised to `previous` if lower.
std::chrono::milliseconds backoff_delay(const EndpointConfig& cfg, std::uint32_t retry,
                                        std::chrono::milliseconds previous, Rng& rng);

/// Whether an HTTP status is worth another attempt (429 and 5xx).
bool is_retryable_status(int status);

/// Client for POST {base_url}/v1/chat/completions. Safe to share between
/// threads; at most cfg.max_in_flight requests are outstanding at once.
class EndpointClient {
 public:
  explicit EndpointClient(EndpointConfig cfg);

  CompletionResult complete(const RenderedPrompt& prompt);
  CompletionResult complete(const std::string& prompt_text);

  [[nodiscard]] const EndpointConfig& config() const { return cfg_; }

  /// Request body: model, one user message, temperature, max_tokens. Nothing
  /// else, so server-side generation defaults apply.
  [[nodiscard]] nlohmann::json build_request(const std::string& prompt_text) const;

  /// Reads choices[0].message.content and choices[0].finish_reason.
  static CompletionResult parse_response(std::string_view body);

 private:
  class Slot;

  std::chrono::milliseconds next_backoff(std::uint32_t retry, std::chrono::milliseconds previous);

  EndpointConfig cfg_;
  std::string origin_;  // scheme://host:port
  std::string path_;    // prefix + /v1/chat/completions
  std::optional<std::string> bearer_;

  std::mutex gate_mutex_;
  std::condition_variable gate_cv_;
  std::size_t in_flight_ = 0;

  std::mutex rng_mutex_;
  Rng jitter_;
};

}  // namespace staterecall
