#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "apifuzz/util.hpp"

namespace apifuzz {

/// Time source seam. The fuzzing loop, the rate limiter and token lifetimes
/// only ever see this interface, so tests can run minutes of session time in
/// milliseconds of wall time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now() = 0;
  virtual void sleep_for(Millis d) = 0;
};

class RealClock final : public Clock {
 public:
  Millis now() override;
  void sleep_for(Millis d) override;

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Virtual clock: sleeping advances time instantly.
class SimClock final : public Clock {
 public:
  Millis now() override { return t_; }
  void sleep_for(Millis d) override { t_ += d; }

 private:
  Millis t_{0};
};

struct HttpRequest {
  std::string verb;  // lowercase
  std::string path;  // concrete path, no query string
  std::vector<std::pair<std::string, std::string>> query;  // unencoded
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::string content_type;
};

struct HttpResponse {
  int status = 0;  // 0 = transport failure, see error
  std::string error;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;

  bool ok() const { return status >= 200 && status < 300; }
  const std::string* header(std::string_view name) const;
};

/// "path?a=1&b=2" with RFC 3986 encoding applied to names and values.
std::string encode_target(const HttpRequest& req);

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& req) = 0;
};

/// Real HTTP/1.1 client bound to a base URL like "http://localhost:8080".
class RealTransport final : public HttpTransport {
 public:
  explicit RealTransport(const std::string& base_url, Millis timeout = Millis(60000));
  ~RealTransport() override;
  HttpResponse send(const HttpRequest& req) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// A fixture API as a plain function: request in, response out.
using FixtureRouter = std::function<HttpResponse(const HttpRequest&)>;

/// Invokes a fixture router directly, charging a fixed virtual latency per
/// request on the given clock. Pairs with SimClock for deterministic tests.
class InProcessTransport final : public HttpTransport {
 public:
  InProcessTransport(FixtureRouter router, Clock* clock = nullptr, Millis latency = Millis(50));
  HttpResponse send(const HttpRequest& req) override;

 private:
  FixtureRouter router_;
  Clock* clock_;
  Millis latency_;
};

}  // namespace apifuzz
