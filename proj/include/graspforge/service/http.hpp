#pragma once

#include <filesystem>
#include <functional>
#include <string>

namespace httplib
{
class Server;
}

namespace graspforge
{

class GraspService;

/// REST routes over `service`. Static assets under `ui_dir` are served at
/// /ui when the directory exists; otherwise /ui answers 404 with a hint.
void install_routes(httplib::Server& server, GraspService& service, const std::filesystem::path& ui_dir = {});

struct ServeOptions
{
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path ui_dir;
};

/// Blocks until the server stops. `on_ready` receives the bound port.
/// Returns false when the address cannot be bound.
bool serve(GraspService& service, const ServeOptions& options, const std::function<void(int)>& on_ready = {});

}  // namespace graspforge
