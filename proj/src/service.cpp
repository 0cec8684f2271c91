#include "sanvaad/service.hpp"

#include <charconv>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "sanvaad/dataset.hpp"
#include "sanvaad/error.hpp"
#include "sanvaad/quantize.hpp"
#include "text_util.hpp"

namespace sanvaad {

using nlohmann::json;

void ServiceConfig::validate() const {
  if (top_k < 1 || top_k > kNumClasses) throw Error(ErrorCode::invalid_argument, "top_k must lie in [1, 35]");
  if (max_message_bytes < 1024) throw Error(ErrorCode::invalid_argument, "max_message_bytes must be at least 1024");
  if (max_pending_frames < 1) throw Error(ErrorCode::invalid_argument, "max_pending_frames must be at least 1");
  if (io_threads < 1 || compute_threads < 1) throw Error(ErrorCode::invalid_argument, "thread counts must be positive");
}

ServiceConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "service config must be a JSON object");
  ServiceConfig c;
  auto path_of = [&](const char* key) {
    std::filesystem::path p = doc.at(key).get<std::string>();
    return (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
  };
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "address") c.address = value.get<std::string>();
      else if (key == "port") {
        const auto port = value.get<std::uint64_t>();
        if (port > 65535) throw Error(ErrorCode::invalid_argument, "port " + std::to_string(port) + " is out of range");
        c.port = static_cast<std::uint16_t>(port);
      }
      else if (key == "model_path") c.model_path = path_of("model_path");
      else if (key == "dictionary_path") c.dictionary_path = path_of("dictionary_path");
      else if (key == "store_dir") c.store_dir = path_of("store_dir");
      else if (key == "top_k") c.top_k = value.get<std::size_t>();
      else if (key == "stop_keywords") c.stop_keywords = value.get<std::vector<std::string>>();
      else if (key == "max_message_bytes") c.max_message_bytes = value.get<std::size_t>();
      else if (key == "max_pending_frames") c.max_pending_frames = value.get<std::size_t>();
      else if (key == "io_threads") c.io_threads = value.get<std::size_t>();
      else if (key == "compute_threads") c.compute_threads = value.get<std::size_t>();
      else throw Error(ErrorCode::parse, "unknown service config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("service config: ") + e.what());
  }
  c.validate();
  return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open service config " + path.string());
  try {
    return config_from_json(json::parse(in), path.parent_path());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void apply_env_overrides(ServiceConfig& config, const EnvLookup& getenv_fn) {
  const EnvLookup lookup = getenv_fn ? getenv_fn : EnvLookup([](const char* name) { return std::getenv(name); });
  if (const char* model = lookup("SANVAAD_MODEL"); model != nullptr && *model != '\0') config.model_path = model;
  if (const char* port = lookup("SANVAAD_PORT"); port != nullptr && *port != '\0') {
    const std::string_view text(port);
    unsigned value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || value > 65535) {
      throw Error(ErrorCode::invalid_argument, "SANVAAD_PORT='" + std::string(text) + "' is not a port number");
    }
    config.port = static_cast<std::uint16_t>(value);
  }
}

ServiceState::ServiceState(ServiceConfig config, ResidualMlpModel model, PhraseDictionary dictionary, NewsLibrary news)
    : config_(std::move(config)), model_(std::move(model)), dictionary_(std::move(dictionary)), news_(std::move(news)) {
  config_.validate();
}

std::shared_ptr<const ServiceState> ServiceState::load(const ServiceConfig& config) {
  config.validate();
  if (config.model_path.empty()) throw Error(ErrorCode::invalid_argument, "no model configured");
  if (!std::filesystem::exists(config.model_path)) {
    throw Error(ErrorCode::io, "model file " + config.model_path.string() + " not found");
  }
  ResidualMlpModel model = load_model(config.model_path);

  PhraseDictionary dictionary;
  if (!config.dictionary_path.empty()) {
    std::ifstream in(config.dictionary_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "dictionary file " + config.dictionary_path.string() + " not found");
    json manifest;
    try {
      manifest = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse, config.dictionary_path.string() + ": " + e.what());
    }
    if (config.stop_keywords && manifest.is_object()) manifest["stop_keywords"] = *config.stop_keywords;
    try {
      dictionary = dictionary_from_json(manifest);
    } catch (const Error& e) {
      throw Error(e.code(), config.dictionary_path.string() + ": " + e.what());
    }
  } else if (config.stop_keywords) {
    dictionary.set_stop_keywords(*config.stop_keywords);
  }

  NewsLibrary news;
  if (!config.store_dir.empty()) news = NewsLibrary::load_directory(config.store_dir);

  return std::make_shared<const ServiceState>(config, std::move(model), std::move(dictionary), std::move(news));
}

LandmarkFrame message_frame(const json& message) {
  if (!message.is_object()) throw Error(ErrorCode::parse, "frame must be a JSON object");
  auto hands_it = message.find("hands");
  if (hands_it == message.end()) return frame_from_json(message);
  if (!hands_it->is_array() || hands_it->size() > 2) throw Error(ErrorCode::parse, "\"hands\" must be an array of at most 2");
  std::vector<DetectedHand> detected;
  for (const auto& h : *hands_it) {
    if (!h.is_object() || !h.contains("keypoints")) throw Error(ErrorCode::parse, "each hand needs \"keypoints\"");
    auto hand = hand_from_json(h.at("keypoints"));
    if (!hand) continue;
    DetectedHand d{*hand, std::nullopt};
    if (auto it = h.find("handedness"); it != h.end() && it->is_string()) {
      const std::string side = detail::ascii_lower(it->get<std::string>());
      if (side == "left") d.handedness = Handedness::left;
      else if (side == "right") d.handedness = Handedness::right;
      else throw Error(ErrorCode::parse, "handedness must be \"left\" or \"right\"");
    }
    detected.push_back(std::move(d));
  }
  return assign_hand_slots(detected);
}

json prediction_message(std::uint64_t seq, const Prediction& prediction) {
  json top = json::array();
  for (const auto& [label, p] : prediction.top_k) top.push_back({{"label", label}, {"probability", p}});
  return {{"type", "prediction"},
          {"seq", seq},
          {"label", prediction.label},
          {"confidence", prediction.confidence},
          {"top_k", top}};
}

json error_message(std::optional<std::uint64_t> seq, std::string_view error, std::string_view code) {
  json out{{"type", "error"}, {"error", error}, {"code", code}};
  out["seq"] = seq ? json(*seq) : json(nullptr);
  return out;
}

json drop_message(std::optional<std::uint64_t> seq, std::size_t pending_limit) {
  json out{{"type", "dropped"}, {"reason", "too many unanswered frames"}, {"pending_limit", pending_limit}};
  out["seq"] = seq ? json(*seq) : json(nullptr);
  return out;
}

std::optional<std::uint64_t> peek_seq(std::string_view message) {
  const json doc = json::parse(message, nullptr, false);
  if (doc.is_object()) {
    if (auto it = doc.find("seq"); it != doc.end() && it->is_number_unsigned()) return it->get<std::uint64_t>();
  }
  return std::nullopt;
}

namespace {

bool has_hand(const LandmarkFrame& frame) { return frame.left.has_value() || frame.right.has_value(); }

std::string_view code_name(const Error& e) { return to_string(e.code()); }

}  // namespace

json handle_stream_message(const ServiceState& state, std::string_view message) {
  json doc = json::parse(message, nullptr, false);
  if (doc.is_discarded()) return error_message(std::nullopt, "malformed message: not valid JSON", "parse");
  if (!doc.is_object()) return error_message(std::nullopt, "malformed message: expected a JSON object", "parse");
  auto seq_it = doc.find("seq");
  if (seq_it == doc.end() || !seq_it->is_number_unsigned()) {
    return error_message(std::nullopt, "malformed message: \"seq\" must be an unsigned integer", "parse");
  }
  const auto seq = seq_it->get<std::uint64_t>();
  try {
    const LandmarkFrame frame = message_frame(doc);
    if (!has_hand(frame)) return error_message(seq, "no hands", "no_hands");
    return prediction_message(seq, predict(state.model(), frame, state.config().top_k));
  } catch (const Error& e) {
    return error_message(seq, e.what(), code_name(e));
  }
}

std::string url_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '+') {
      out += ' ';
    } else if (text[i] == '%' && i + 2 < text.size() && hex(text[i + 1]) >= 0 && hex(text[i + 2]) >= 0) {
      out += static_cast<char>(hex(text[i + 1]) * 16 + hex(text[i + 2]));
      i += 2;
    } else {
      out += text[i];
    }
  }
  return out;
}

namespace {

std::map<std::string, std::string> parse_query(std::string_view query) {
  std::map<std::string, std::string> out;
  while (!query.empty()) {
    const auto amp = query.find('&');
    const auto pair = query.substr(0, amp);
    const auto eq = pair.find('=');
    if (!pair.empty()) {
      out[url_decode(pair.substr(0, eq))] = eq == std::string_view::npos ? "" : url_decode(pair.substr(eq + 1));
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return out;
}

HttpReply fail(unsigned status, std::string_view error, std::string_view code) {
  return {status, {{"error", error}, {"code", code}}};
}

json health_body(const ServiceState& state) {
  json languages = json::array();
  for (Language lang : kLanguages) {
    if (state.news().store(lang) != nullptr) languages.push_back(to_string(lang));
  }
  return {{"status", "ok"},
          {"model", model_metadata(state.model())},
          {"dictionary_phrases", state.dictionary().size()},
          {"news_languages", languages}};
}

HttpReply classify(const ServiceState& state, std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return fail(400, "request body must be a JSON object", "parse");
  std::uint64_t seq = 0;
  if (auto it = doc.find("seq"); it != doc.end()) {
    if (!it->is_number_unsigned()) return fail(400, "\"seq\" must be an unsigned integer", "parse");
    seq = it->get<std::uint64_t>();
  }
  try {
    const LandmarkFrame frame = message_frame(doc.contains("frame") ? doc.at("frame") : doc);
    if (!has_hand(frame)) return fail(422, "no hands", "no_hands");
    return {200, prediction_message(seq, predict(state.model(), frame, state.config().top_k))};
  } catch (const Error& e) {
    return fail(e.code() == ErrorCode::parse ? 400 : 422, e.what(), code_name(e));
  }
}

HttpReply translate_text(const ServiceState& state, std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("text") || !doc.at("text").is_string()) {
    return fail(400, "request body must be {\"text\": string}", "parse");
  }
  TranslateOptions options;
  if (auto it = doc.find("strict"); it != doc.end() && it->is_boolean()) options.strict = it->get<bool>();
  return {200, plan_to_json(translate(doc.at("text").get<std::string>(), state.dictionary(), options))};
}

HttpReply content(const ServiceState& state, std::string_view query) {
  const auto params = parse_query(query);
  auto topic = params.find("topic");
  if (topic == params.end() || detail::trim(topic->second).empty()) return fail(400, "missing \"topic\" parameter", "parse");
  auto lang = params.find("lang");
  const ContentRequest request = make_request(lang == params.end() ? "english" : lang->second, topic->second);
  return {200, bundle_to_json(build_bundle(state.news(), request))};
}

}  // namespace

HttpReply handle_request(const ServiceState& state, std::string_view method, std::string_view target,
                         std::string_view body) {
  const auto qpos = target.find('?');
  const std::string_view path = target.substr(0, qpos);
  const std::string_view query = qpos == std::string_view::npos ? std::string_view{} : target.substr(qpos + 1);

  if (method == "OPTIONS") return {204, nullptr};
  auto expect = [&](std::string_view m) { return method == m; };
  if (path == "/health") return expect("GET") ? HttpReply{200, health_body(state)} : fail(405, "use GET", "method");
  if (path == "/classify") return expect("POST") ? classify(state, body) : fail(405, "use POST", "method");
  if (path == "/translate") return expect("POST") ? translate_text(state, body) : fail(405, "use POST", "method");
  if (path == "/content") return expect("GET") ? content(state, query) : fail(405, "use GET", "method");
  if (path == "/stream") return fail(426, "/stream requires a WebSocket upgrade", "upgrade");
  return fail(404, "no such endpoint", "not_found");
}

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

constexpr std::size_t kHardMessageLimit = 1 << 20;

std::string_view to_std(beast::string_view s) { return {s.data(), s.size()}; }

struct Shared {
  std::shared_ptr<const ServiceState> state;
  net::thread_pool* compute = nullptr;
};

void add_cors(http::response<http::string_body>& res) {
  res.set(http::field::access_control_allow_origin, "*");
  res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
  res.set(http::field::access_control_allow_headers, "Content-Type");
}

http::response<http::string_body> make_response(const HttpReply& reply, unsigned version, bool keep_alive) {
  http::response<http::string_body> res{static_cast<http::status>(reply.status), version};
  res.set(http::field::server, "sanvaad");
  add_cors(res);
  if (!reply.body.is_null()) {
    res.set(http::field::content_type, "application/json");
    res.body() = reply.body.dump();
  }
  res.keep_alive(keep_alive);
  res.prepare_payload();
  return res;
}

class StreamSession : public std::enable_shared_from_this<StreamSession> {
 public:
  StreamSession(tcp::socket&& socket, Shared shared) : ws_(std::move(socket)), shared_(std::move(shared)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.set_option(websocket::stream_base::decorator([](websocket::response_type& res) {
      res.set(http::field::server, "sanvaad");
    }));
    ws_.read_message_max(kHardMessageLimit);
    ws_.async_accept(req, beast::bind_front_handler(&StreamSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (!ec) do_read();
  }

  void do_read() {
    reading_ = true;
    ws_.async_read(buffer_, beast::bind_front_handler(&StreamSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    reading_ = false;
    if (ec) {
      closed_ = true;
      return;
    }
    std::string message = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    const auto& cfg = shared_.state->config();

    if (!ws_.got_text()) {
      send(error_message(std::nullopt, "binary messages are not accepted", "parse").dump());
    } else if (message.size() > cfg.max_message_bytes) {
      send(error_message(std::nullopt,
                         "message of " + std::to_string(message.size()) + " bytes exceeds the " +
                             std::to_string(cfg.max_message_bytes) + " byte limit",
                         "too_large")
               .dump());
    } else if (unanswered() >= cfg.max_pending_frames) {
      send(drop_message(peek_seq(message), cfg.max_pending_frames).dump());
    } else {
      pending_.push_back(std::move(message));
      pump();
    }
    if (outbox_.size() < outbox_limit()) do_read();
  }

  std::size_t unanswered() const { return pending_.size() + (busy_ ? 1 : 0); }
  std::size_t outbox_limit() const { return 4 * shared_.state->config().max_pending_frames; }

  void pump() {
    if (busy_ || pending_.empty()) return;
    busy_ = true;
    std::string message = std::move(pending_.front());
    pending_.pop_front();
    net::post(*shared_.compute, [self = shared_from_this(), message = std::move(message)]() mutable {
      std::string reply = handle_stream_message(*self->shared_.state, message).dump();
      net::post(self->ws_.get_executor(), [self, reply = std::move(reply)]() mutable {
        self->busy_ = false;
        self->send(std::move(reply));
        self->pump();
      });
    });
  }

  void send(std::string reply) {
    if (closed_) return;
    outbox_.push_back(std::move(reply));
    if (!writing_) do_write();
  }

  void do_write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()), beast::bind_front_handler(&StreamSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      writing_ = false;
      return;
    }
    outbox_.pop_front();
    if (!outbox_.empty()) {
      do_write();
    } else {
      writing_ = false;
    }
    if (!reading_ && !closed_ && outbox_.size() < outbox_limit()) do_read();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Shared shared_;
  beast::flat_buffer buffer_;
  std::deque<std::string> pending_;
  std::deque<std::string> outbox_;
  bool busy_ = false;
  bool writing_ = false;
  bool reading_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Shared shared) : stream_(std::move(socket)), shared_(std::move(shared)) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    parser_.emplace();
    parser_->body_limit(shared_.state->config().max_message_bytes);
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return close();
    if (ec == http::error::body_limit) {
      const HttpReply reply{413,
                            {{"error", "request body exceeds " + std::to_string(shared_.state->config().max_message_bytes) +
                                           " bytes"},
                             {"code", "too_large"}}};
      return write(make_response(reply, 11, false));
    }
    if (ec) return;

    http::request<http::string_body> req = parser_->release();
    if (websocket::is_upgrade(req)) {
      if (req.target() == "/stream") {
        stream_.expires_never();
        std::make_shared<StreamSession>(stream_.release_socket(), shared_)->run(std::move(req));
        return;
      }
      return write(make_response({404, {{"error", "no such stream"}, {"code", "not_found"}}}, req.version(), false));
    }
    const HttpReply reply = handle_request(*shared_.state, to_std(req.method_string()), to_std(req.target()), req.body());
    write(make_response(reply, req.version(), req.keep_alive()));
  }

  void write(http::response<http::string_body> res) {
    auto sp = std::make_shared<http::response<http::string_body>>(std::move(res));
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (sp->need_eof()) return self->close();
      self->do_read();
    });
  }

  void close() {
    beast::error_code ignored;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
  }

  beast::tcp_stream stream_;
  Shared shared_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
};

class Listener : public std::enable_shared_from_this<Listener> {
 public:
  Listener(net::io_context& ioc, tcp::endpoint endpoint, Shared shared)
      : ioc_(ioc), acceptor_(net::make_strand(ioc)), shared_(std::move(shared)) {
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }

  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  void run() { do_accept(); }

 private:
  void do_accept() {
    acceptor_.async_accept(net::make_strand(ioc_), beast::bind_front_handler(&Listener::on_accept, shared_from_this()));
  }

  void on_accept(beast::error_code ec, tcp::socket socket) {
    if (ec == net::error::operation_aborted) return;
    if (!ec) {
      socket.set_option(tcp::no_delay(true), ec);
      std::make_shared<HttpSession>(std::move(socket), shared_)->run();
    }
    do_accept();
  }

  net::io_context& ioc_;
  tcp::acceptor acceptor_;
  Shared shared_;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<const ServiceState> state;
  net::io_context ioc;
  std::optional<net::thread_pool> compute;
  std::shared_ptr<Listener> listener;
  std::vector<std::thread> threads;
  std::uint16_t port = 0;
  bool running = false;
};

Server::Server(std::shared_ptr<const ServiceState> state) : impl_(std::make_unique<Impl>()) {
  if (!state) throw Error(ErrorCode::invalid_argument, "server needs a loaded service state");
  impl_->state = std::move(state);
}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  if (impl_->running) throw Error(ErrorCode::state, "server already started");
  const auto& cfg = impl_->state->config();
  beast::error_code ec;
  const auto address = net::ip::make_address(cfg.address, ec);
  if (ec) throw Error(ErrorCode::invalid_argument, "bad bind address '" + cfg.address + "'");
  impl_->compute.emplace(cfg.compute_threads);
  try {
    impl_->listener = std::make_shared<Listener>(impl_->ioc, tcp::endpoint{address, cfg.port},
                                                 Shared{impl_->state, &*impl_->compute});
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::io, "cannot listen on " + cfg.address + ":" + std::to_string(cfg.port) + ": " + e.what());
  }
  impl_->port = impl_->listener->port();
  impl_->listener->run();
  impl_->running = true;
  for (std::size_t i = 0; i < cfg.io_threads; ++i) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  return impl_->port;
}

std::uint16_t Server::port() const { return impl_->port; }

void Server::stop() {
  if (!impl_ || !impl_->running) return;
  impl_->running = false;
  impl_->compute->stop();
  impl_->compute->join();
  impl_->ioc.stop();
  for (auto& t : impl_->threads) t.join();
  impl_->threads.clear();
  impl_->listener.reset();
}

void Server::run_until_signal() {
  net::io_context signals_ctx;
  net::signal_set signals(signals_ctx, SIGINT, SIGTERM);
  signals.async_wait([](beast::error_code, int) {});
  signals_ctx.run();
  stop();
}

}  // namespace sanvaad
