#include "egat/http_routes.hpp"

#include <httplib.h>

namespace egat::serve {

namespace {

void send(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  for (const auto& [k, v] : r.headers) res.set_header(k, v);
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_content(r.body, r.content_type);
}

}  // namespace

void register_routes(httplib::Server& server, PredictionService& service) {
  // httplib answers 413 itself beyond this; the service repeats the check.
  server.set_payload_max_length(service.config().max_upload_bytes + 1);

  server.Post("/api/chains", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.chains(req.body));
  });
  server.Post("/api/predict", [&service](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> threshold;
    if (req.has_param("threshold")) threshold = req.get_param_value("threshold");
    send(res, service.predict(req.body, req.get_param_value("chains"), threshold));
  });
  server.Get(R"(/api/download/([^/]+)/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.download(req.matches[1], req.matches[2]));
  });
  server.Get("/api/example", [&service](const httplib::Request&, httplib::Response& res) {
    send(res, service.example());
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

}  // namespace egat::serve
