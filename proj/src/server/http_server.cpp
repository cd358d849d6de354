#include "shapebots/server/http_server.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

#include "shapebots/server/protocol.hpp"

namespace shapebots {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

unsigned short default_port() {
  if (const char* env = std::getenv("SHAPEBOTS_PORT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 65536) return static_cast<unsigned short>(v);
  }
  return 8080;
}

namespace {

constexpr const char* kPlaceholder =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>shapebots</title></head>"
    "<body><h1>shapebots</h1><p>Simulation server is running. No UI assets are installed; "
    "connect a WebSocket client to this address or GET <a href=\"/state\">/state</a>.</p>"
    "</body></html>";

std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, SimulationService& service) : ws_(std::move(socket)), service_(service) {}

  ~WsSession() {
    if (sub_) service_.unsubscribe(sub_);
  }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(8 << 20);
    ws_.text(true);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsSession> weak = weak_from_this();
    auto executor = ws_.get_executor();
    sub_ = service_.subscribe([weak, executor] {
      if (auto self = weak.lock()) net::post(executor, [self] { self->pump(); });
    });
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    for (const json& reply : service_.handle_text(text)) {
      direct_.push_back(std::make_shared<const std::string>(reply.dump()));
    }
    pump();
    read();
  }

  // Direct replies first, then events in order, then the newest snapshot.
  void pump() {
    if (writing_ || closed_) return;
    if (direct_.empty() && sub_) {
      for (auto& e : sub_->take_events()) direct_.push_back(std::move(e));
      if (direct_.empty()) {
        if (auto s = sub_->take_snapshot()) direct_.push_back(std::move(*s));
      }
    }
    if (direct_.empty()) return;
    current_ = std::move(direct_.front());
    direct_.pop_front();
    writing_ = true;
    ws_.async_write(net::buffer(*current_), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    current_.reset();
    if (ec) {
      closed_ = true;
      return;
    }
    pump();
  }

  websocket::stream<beast::tcp_stream> ws_;
  SimulationService& service_;
  std::shared_ptr<SimulationService::Subscription> sub_;
  beast::flat_buffer buffer_;
  std::deque<SimulationService::Message> direct_;
  SimulationService::Message current_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, SimulationService& service, const std::filesystem::path& ui_dir)
      : stream_(std::move(socket)), service_(service), ui_dir_(ui_dir) {}

  void run() { net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read, shared_from_this())); }

 private:
  void read() {
    parser_.emplace();
    parser_->body_limit(8 << 20);
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      beast::error_code ignore;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignore);
      return;
    }
    if (ec) return;
    http::request<http::string_body> req = parser_->release();
    if (websocket::is_upgrade(req)) {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), service_)->run(std::move(req));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(respond(req));
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code wec, std::size_t) {
      if (wec) return;
      if (res->need_eof()) {
        beast::error_code ignore;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignore);
        return;
      }
      self->read();
    });
  }

  http::response<http::string_body> reply(const http::request<http::string_body>& req, http::status status,
                                          std::string body, const std::string& type) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "shapebots");
    res.set(http::field::content_type, type);
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  http::response<http::string_body> respond(const http::request<http::string_body>& req) {
    const std::string target(req.target());
    const std::string path = target.substr(0, target.find('?'));
    if (path == "/state") {
      if (req.method() != http::verb::get) return reply(req, http::status::method_not_allowed, "", "text/plain");
      return reply(req, http::status::ok, service_.snapshot().dump(), "application/json");
    }
    if (path == "/scenario") {
      if (req.method() != http::verb::post) return reply(req, http::status::method_not_allowed, "", "text/plain");
      json doc;
      try {
        doc = json::parse(req.body());
      } catch (const json::parse_error& e) {
        return reply(req, http::status::bad_request, protocol::error("bad_json", e.what()).dump(), "application/json");
      }
      try {
        service_.load_scenario(doc);
      } catch (const std::exception& e) {
        return reply(req, http::status::bad_request, protocol::error_from(e).dump(), "application/json");
      }
      const json ok = {{"v", protocol::kVersion}, {"type", "ack"}, {"request", "load_scenario"}};
      return reply(req, http::status::ok, ok.dump(), "application/json");
    }
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
      return reply(req, http::status::method_not_allowed, "", "text/plain");
    }
    if (ui_dir_.empty()) {
      if (path == "/" || path == "/index.html") return reply(req, http::status::ok, kPlaceholder, "text/html");
      return reply(req, http::status::not_found, "not found\n", "text/plain");
    }
    if (path.find("..") != std::string::npos || path.empty() || path[0] != '/') {
      return reply(req, http::status::bad_request, "bad path\n", "text/plain");
    }
    std::filesystem::path file = ui_dir_ / path.substr(1);
    if (path.back() == '/') file /= "index.html";
    std::ifstream in(file, std::ios::binary);
    if (!in) return reply(req, http::status::not_found, "not found\n", "text/plain");
    std::ostringstream body;
    body << in.rdbuf();
    return reply(req, http::status::ok, body.str(), mime_type(file));
  }

  beast::tcp_stream stream_;
  SimulationService& service_;
  const std::filesystem::path& ui_dir_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
};

}  // namespace

struct HttpServer::Impl {
  SimulationService& service;
  HttpServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable cv;
  bool stopped = false;

  Impl(SimulationService& s, HttpServerOptions o)
      : service(s), options(std::move(o)), ioc(std::max(1, options.threads)), acceptor(net::make_strand(ioc)) {
    const tcp::endpoint endpoint{net::ip::make_address(options.address), options.port};
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen(net::socket_base::max_listen_connections);
  }

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (!ec) std::make_shared<HttpSession>(std::move(socket), service, options.ui_dir)->run();
      if (acceptor.is_open()) accept();
    });
  }
};

HttpServer::HttpServer(SimulationService& service, HttpServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpServer::~HttpServer() { stop(); }

unsigned short HttpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void HttpServer::start() {
  impl_->accept();
  for (int i = 0; i < std::max(1, impl_->options.threads); ++i) {
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  }
}

void HttpServer::stop() {
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->stopped) return;
    impl_->stopped = true;
  }
  impl_->cv.notify_all();
  net::post(impl_->acceptor.get_executor(), [this] {
    beast::error_code ignore;
    impl_->acceptor.close(ignore);
  });
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

void HttpServer::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->cv.wait(lock, [&] { return impl_->stopped; });
}

}  // namespace shapebots
