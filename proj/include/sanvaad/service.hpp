#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sanvaad/content.hpp"
#include "sanvaad/model.hpp"
#include "sanvaad/signplan.hpp"

namespace sanvaad {

struct ServiceConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  std::filesystem::path model_path;
  std::filesystem::path dictionary_path;  // optional
  std::filesystem::path store_dir;        // optional
  std::size_t top_k = 3;
  std::optional<std::vector<std::string>> stop_keywords;
  std::size_t max_message_bytes = 64 * 1024;
  std::size_t max_pending_frames = 16;  // per stream connection
  std::size_t io_threads = 1;
  std::size_t compute_threads = 1;

  void validate() const;
};

/// Keys mirror the field names; paths are resolved against `base_dir`.
ServiceConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ServiceConfig load_service_config(const std::filesystem::path& path);

using EnvLookup = std::function<const char*(const char*)>;
/// SANVAAD_MODEL replaces model_path, SANVAAD_PORT replaces port.
void apply_env_overrides(ServiceConfig& config, const EnvLookup& getenv_fn = {});

/// Everything the endpoints read. Immutable once built and shared by all
/// connections.
class ServiceState {
 public:
  ServiceState(ServiceConfig config, ResidualMlpModel model, PhraseDictionary dictionary, NewsLibrary news);

  /// Loads the model, dictionary and stores named in `config`; errors name
  /// the offending file.
  static std::shared_ptr<const ServiceState> load(const ServiceConfig& config);

  const ServiceConfig& config() const noexcept { return config_; }
  const ResidualMlpModel& model() const noexcept { return model_; }
  const PhraseDictionary& dictionary() const noexcept { return dictionary_; }
  const NewsLibrary& news() const noexcept { return news_; }

 private:
  ServiceConfig config_;
  ResidualMlpModel model_;
  PhraseDictionary dictionary_;
  NewsLibrary news_;
};

/// Accepts {"left","right"} slots or {"hands": [{"handedness", "keypoints"}]}.
LandmarkFrame message_frame(const nlohmann::json& message);

nlohmann::json prediction_message(std::uint64_t seq, const Prediction& prediction);
nlohmann::json error_message(std::optional<std::uint64_t> seq, std::string_view error, std::string_view code);
nlohmann::json drop_message(std::optional<std::uint64_t> seq, std::size_t pending_limit);

/// Best-effort read of a message's "seq" for replies to rejected frames.
std::optional<std::uint64_t> peek_seq(std::string_view message);

/// One FrameMessage in, one reply out: a prediction or an error.
nlohmann::json handle_stream_message(const ServiceState& state, std::string_view message);

struct HttpReply {
  unsigned status = 200;
  nlohmann::json body;
};

/// Routes a unary request. `target` includes any query string.
HttpReply handle_request(const ServiceState& state, std::string_view method, std::string_view target,
                         std::string_view body);

/// Percent-decoding with '+' as space.
std::string url_decode(std::string_view text);

/// HTTP and WebSocket server on one port. Unary endpoints: GET /health,
/// POST /classify, POST /translate, GET /content. WebSocket: /stream.
class Server {
 public:
  explicit Server(std::shared_ptr<const ServiceState> state);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the worker threads; returns the bound port.
  std::uint16_t start();
  std::uint16_t port() const;
  void stop();
  /// Blocks until SIGINT or SIGTERM, then stops.
  void run_until_signal();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sanvaad
