#include "tagraid/corrector.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "tagraid/error.hpp"
#include "tagraid/sanitize.hpp"

namespace tagraid {

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string base = url.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {url.substr(0, path_start), base};
}

}  // namespace

std::string load_corrector_prompt(const std::string& path) {
  std::filesystem::path file = path;
  if (file.empty()) {
    if (const char* dir = std::getenv("TAGRAID_DATA_DIR")) {
      file = std::filesystem::path(dir) / "corrector_prompt.txt";
    } else {
      file = std::filesystem::path(TAGRAID_DATA_DIR) / "corrector_prompt.txt";
    }
  }
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open corrector prompt {}", file.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RemoteCorrector::RemoteCorrector(RemoteCorrectorConfig cfg, const ConfusablesTable& table)
    : cfg_(std::move(cfg)), table_(table), prompt_(load_corrector_prompt(cfg_.prompt_file)) {
  if (cfg_.endpoint.empty()) throw InputError("remote corrector: endpoint is not configured");
  if (!(cfg_.timeout_seconds > 0.0)) throw InputError("remote corrector: timeout must be positive");
}

std::string RemoteCorrector::request_body(std::string_view text) const {
  nlohmann::json body = {
      {"model", cfg_.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", prompt_}}, {{"role", "user"}, {"content", text}}})},
  };
  return body.dump();
}

std::optional<std::string> RemoteCorrector::parse_response(std::string_view body) {
  nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) return std::nullopt;
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    return std::nullopt;
  }
  const std::string content = first["message"]["content"].get<std::string>();
  const auto at = content.find(kCorrectedMarker);
  if (at == std::string::npos) return std::nullopt;
  std::string out = content.substr(at + kCorrectedMarker.size());
  if (!out.empty() && out.front() == ' ') out.erase(0, 1);
  if (!out.empty() && out.front() == '\n') out.erase(0, 1);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

RemoteCorrector::Result RemoteCorrector::correct(std::string_view text) const {
  auto fallback = [&](std::string why) {
    return Result{sanitize_text(text, table_), true, std::move(why)};
  };
  try {
    const auto endpoint = split_endpoint(cfg_.endpoint);
    httplib::Client client(endpoint.scheme_host_port);
    const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
    const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
      if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }
    const auto res = client.Post(endpoint.base_path + cfg_.path, headers, request_body(text), "application/json");
    if (!res) return fallback(fmt::format("request failed: {}", httplib::to_string(res.error())));
    if (res->status != 200) return fallback(fmt::format("HTTP status {}", res->status));
    auto parsed = parse_response(res->body);
    if (!parsed) return fallback("malformed response");
    return Result{std::move(*parsed), false, {}};
  } catch (const std::exception& e) {
    return fallback(e.what());
  }
}

}  // namespace tagraid
