// HTTP prediction service. Configuration comes from flags, falling back to
// PORT, CHECKPOINT_PATH, MAX_UPLOAD_BYTES and ARTIFACT_TTL_HOURS.
#include "egat/http_routes.hpp"
#include "egat/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <iostream>

#ifndef EGAT_DATA_DIR
#define EGAT_DATA_DIR "data"
#endif

int main(int argc, char** argv) {
  egat::serve::ServiceConfig cfg;
  cfg.checkpoint_path = EGAT_DATA_DIR "/toy_checkpoint.egat";
  cfg.example_path = EGAT_DATA_DIR "/structures/1ubi.pdb";
  int port = 5000;
  try {
    cfg = egat::serve::config_from_env(cfg, &port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::string host = "0.0.0.0";
  CLI::App app{"Binding-site prediction HTTP service"};
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str()->check(CLI::Range(1, 65535));
  app.add_option("--checkpoint", cfg.checkpoint_path)->capture_default_str();
  app.add_option("--example", cfg.example_path)->capture_default_str();
  app.add_option("--max-upload-bytes", cfg.max_upload_bytes)->capture_default_str();
  app.add_option("--ttl-hours", cfg.artifact_ttl_hours)->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    egat::serve::PredictionService service(cfg);
    httplib::Server server;
    egat::serve::register_routes(server, service);
    std::cerr << "listening on " << host << ":" << port << " (checkpoint " << service.checkpoint_id() << ")\n";
    if (!server.listen(host, port)) {
      std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
