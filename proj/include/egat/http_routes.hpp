#pragma once

#include "egat/service.hpp"

namespace httplib {
class Server;
}

namespace egat::serve {

// Installs POST /api/chains, POST /api/predict, GET /api/download/{job}/{class}
// and GET /api/example on `server`, all backed by `service`.
void register_routes(httplib::Server& server, PredictionService& service);

}  // namespace egat::serve
