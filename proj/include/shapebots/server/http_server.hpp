#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "shapebots/server/service.hpp"

namespace shapebots {

struct HttpServerOptions {
  std::string address = "0.0.0.0";
  unsigned short port = 8080;  ///< 0 picks a free port
  std::filesystem::path ui_dir;  ///< static files for GET /; empty serves a placeholder page
  int threads = 2;
};

/// Port from SHAPEBOTS_PORT if set and valid, else 8080.
unsigned short default_port();

/// HTTP and WebSocket front end on one port.
///   GET /state      latest snapshot
///   POST /scenario  load a scenario document
///   GET /...        static UI files
///   upgrade on any path opens the message channel
class HttpServer {
 public:
  HttpServer(SimulationService& service, HttpServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Bound port, valid once constructed.
  unsigned short port() const;
  /// Serves on background threads.
  void start();
  void stop();
  /// Blocks until stop() is called from elsewhere.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace shapebots
