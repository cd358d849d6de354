#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>

#include "doctest.h"
#include "shapebots/server/http_server.hpp"

using namespace shapebots;
using nlohmann::json;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

Scenario two_robots() {
  Scenario s;
  s.params.tracking_loss_rate = 0;
  s.robots = make_robots({{100, 100, 0}, {300, 100, 0}}, {Mount::Horizontal});
  return s;
}

struct Fixture {
  SimulationService service{two_robots(), [] {
                              ServiceOptions o;
                              o.scenario_dir = SHAPEBOTS_SCENARIO_DIR;
                              return o;
                            }()};
  HttpServer server{service, [] {
                      HttpServerOptions o;
                      o.address = "127.0.0.1";
                      o.port = 0;
                      return o;
                    }()};
  Fixture() { server.start(); }
  ~Fixture() { server.stop(); }
};

http::response<http::string_body> request(unsigned short port, http::verb verb, const std::string& target,
                                          const std::string& body = {}) {
  net::io_context ioc;
  tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "localhost");
  if (!body.empty()) {
    req.set(http::field::content_type, "application/json");
    req.body() = body;
  }
  req.prepare_payload();
  http::write(stream, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return res;
}

struct Client {
  net::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};

  explicit Client(unsigned short port) {
    tcp::resolver resolver(ioc);
    net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("localhost", "/");
  }
  json read() {
    beast::flat_buffer b;
    ws.read(b);
    return json::parse(beast::buffers_to_string(b.data()));
  }
  void send(const json& j) { ws.write(net::buffer(j.dump())); }
  // Next message of the given type, skipping others.
  json next(const std::string& type) {
    for (int i = 0; i < 200; ++i) {
      json m = read();
      if (m["type"] == type) return m;
    }
    FAIL("no " << type << " message");
    return {};
  }
};

}  // namespace

TEST_CASE("GET /state returns the snapshot") {
  Fixture f;
  REQUIRE(f.server.port() != 0);
  const auto res = request(f.server.port(), http::verb::get, "/state");
  CHECK(res.result() == http::status::ok);
  CHECK(res[http::field::content_type] == "application/json");
  const json s = json::parse(res.body());
  CHECK(s["type"] == "snapshot");
  CHECK(s["robots"].size() == 2);
  CHECK(request(f.server.port(), http::verb::post, "/state", "{}").result() == http::status::method_not_allowed);
}

TEST_CASE("POST /scenario loads a document") {
  Fixture f;
  const auto ok = request(f.server.port(), http::verb::post, "/scenario", R"({"robots": [[200, 200], [400, 200], [600, 200]]})");
  CHECK(ok.result() == http::status::ok);
  CHECK(json::parse(ok.body()) == json{{"v", 1}, {"type", "ack"}, {"request", "load_scenario"}});
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  CHECK(json::parse(request(f.server.port(), http::verb::get, "/state").body())["robots"].size() == 3);

  const auto bad = request(f.server.port(), http::verb::post, "/scenario", "{oops");
  CHECK(bad.result() == http::status::bad_request);
  CHECK(json::parse(bad.body())["code"] == "bad_json");
  const auto schema = request(f.server.port(), http::verb::post, "/scenario", R"({"robots": []})");
  CHECK(schema.result() == http::status::bad_request);
  CHECK(json::parse(schema.body())["path"] == "$.robots");
}

TEST_CASE("placeholder page without UI assets") {
  Fixture f;
  const auto res = request(f.server.port(), http::verb::get, "/");
  CHECK(res.result() == http::status::ok);
  CHECK(res.body().find("shapebots") != std::string::npos);
  CHECK(request(f.server.port(), http::verb::get, "/app.js").result() == http::status::not_found);
}

TEST_CASE("WebSocket: snapshot on join, acks, errors, events") {
  Fixture f;
  Client c(f.server.port());
  const json first = c.read();
  CHECK(first["type"] == "snapshot");
  CHECK(first["tick"] == 0);

  c.send({{"v", 1}, {"type", "step"}, {"ticks", 10}, {"id", "s"}});
  const json ack = c.next("ack");
  CHECK(ack["id"] == "s");
  CHECK(ack["tick"] == 10);

  c.ws.write(net::buffer(std::string("not json")));
  CHECK(c.next("error")["code"] == "bad_json");
  c.send({{"v", 1}, {"type", "warp"}});
  const json err = c.next("error");
  CHECK(err["code"] == "schema");
  CHECK(err["path"] == "$.type");

  c.send({{"v", 1}, {"type", "place_robot"}, {"pose", {800, 500}}});
  CHECK(c.next("ack")["robot"] == 2);
  c.send({{"v", 1}, {"type", "step"}, {"ticks", 100}});
  const json ev = c.next("event");
  CHECK(ev["event"].contains("kind"));

  // A second client joins and is synced to the same state.
  Client late(f.server.port());
  const json sync = late.read();
  CHECK(sync["type"] == "snapshot");
  CHECK(sync["robots"].size() == 3);

  c.send({{"v", 1}, {"type", "request_metrics"}, {"id", 3}});
  const json m = c.next("metrics");
  CHECK(m["id"] == 3);
  c.ws.close(websocket::close_code::normal);
  late.ws.close(websocket::close_code::normal);
}

TEST_CASE("default port honours the environment") {
  ::setenv("SHAPEBOTS_PORT", "9123", 1);
  CHECK(default_port() == 9123);
  ::setenv("SHAPEBOTS_PORT", "junk", 1);
  CHECK(default_port() == 8080);
  ::unsetenv("SHAPEBOTS_PORT");
  CHECK(default_port() == 8080);
}
