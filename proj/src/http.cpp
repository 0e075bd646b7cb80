#include "apifuzz/http.hpp"

#include <thread>

#include <httplib.h>

namespace apifuzz {

Millis RealClock::now() {
  return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start_);
}

void RealClock::sleep_for(Millis d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

const std::string* HttpResponse::header(std::string_view name) const {
  for (const auto& [n, v] : headers)
    if (to_lower(n) == to_lower(name)) return &v;
  return nullptr;
}

std::string encode_target(const HttpRequest& req) {
  std::string target = req.path;
  bool first = true;
  for (const auto& [name, value] : req.query) {
    target += first ? '?' : '&';
    first = false;
    target += url_encode(name);
    target += '=';
    target += url_encode(value);
  }
  return target;
}

struct RealTransport::Impl {
  httplib::Client client;
  explicit Impl(const std::string& base) : client(base) {}
};

RealTransport::RealTransport(const std::string& base_url, Millis timeout)
    : impl_(std::make_unique<Impl>(base_url)) {
  time_t secs = timeout.count() / 1000;
  time_t usecs = (timeout.count() % 1000) * 1000;
  impl_->client.set_connection_timeout(secs, usecs);
  impl_->client.set_read_timeout(secs, usecs);
  impl_->client.set_write_timeout(secs, usecs);
}

RealTransport::~RealTransport() = default;

HttpResponse RealTransport::send(const HttpRequest& req) {
  httplib::Headers headers;
  for (const auto& [name, value] : req.headers) headers.emplace(name, value);
  std::string target = encode_target(req);
  std::string content_type = req.content_type.empty() ? "application/json" : req.content_type;

  httplib::Result result;
  if (req.verb == "get") {
    result = impl_->client.Get(target, headers);
  } else if (req.verb == "post") {
    result = impl_->client.Post(target, headers, req.body, content_type);
  } else if (req.verb == "put") {
    result = impl_->client.Put(target, headers, req.body, content_type);
  } else if (req.verb == "delete") {
    result = req.body.empty() ? impl_->client.Delete(target, headers)
                              : impl_->client.Delete(target, headers, req.body, content_type);
  } else if (req.verb == "patch") {
    result = impl_->client.Patch(target, headers, req.body, content_type);
  } else if (req.verb == "head") {
    result = impl_->client.Head(target, headers);
  } else if (req.verb == "options") {
    result = impl_->client.Options(target, headers);
  } else {
    return {0, "unsupported verb: " + req.verb, {}, ""};
  }

  if (!result) return {0, "transport error: " + httplib::to_string(result.error()), {}, ""};
  HttpResponse out;
  out.status = result->status;
  out.body = result->body;
  for (const auto& [name, value] : result->headers) out.headers.emplace_back(name, value);
  return out;
}

InProcessTransport::InProcessTransport(FixtureRouter router, Clock* clock, Millis latency)
    : router_(std::move(router)), clock_(clock), latency_(latency) {}

HttpResponse InProcessTransport::send(const HttpRequest& req) {
  if (clock_) clock_->sleep_for(latency_);
  return router_(req);
}

}  // namespace apifuzz
