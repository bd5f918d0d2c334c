#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tagraid/confusables.hpp"
#include "tagraid/galguard.hpp"

namespace tagraid {

/// Line that prefixes the corrected text in the model's reply.
inline constexpr std::string_view kCorrectedMarker = "CORRECTED_TEXT:";

/// Chat-completion client for an LLM text validator. Sends
/// {model, messages: [system prompt, user text]} and reads
/// choices[0].message.content. Any failure falls back to sanitize_text.
class RemoteCorrector {
 public:
  struct Result {
    std::string text;
    bool fallback = false;
    std::string error;
  };

  RemoteCorrector(RemoteCorrectorConfig cfg, const ConfusablesTable& table);

  Result correct(std::string_view text) const;

  /// Request body for one text.
  std::string request_body(std::string_view text) const;
  /// Corrected text from a response body, or nullopt if the body does not
  /// follow the contract.
  static std::optional<std::string> parse_response(std::string_view body);

  const std::string& prompt() const noexcept { return prompt_; }

 private:
  RemoteCorrectorConfig cfg_;
  const ConfusablesTable& table_;
  std::string prompt_;
};

/// Prompt template text: cfg.prompt_file if set, else the installed copy.
std::string load_corrector_prompt(const std::string& path = {});

}  // namespace tagraid
