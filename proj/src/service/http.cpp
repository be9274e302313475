#include "graspforge/service/http.hpp"

#include <chrono>
#include <thread>

#include "graspforge/geometry/errors.hpp"
#include "graspforge/service/service.hpp"

// after Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro
#include <httplib.h>

namespace graspforge
{

using nlohmann::json;

namespace
{

void send_error(httplib::Response& res, int status, const std::string& path, const std::string& message,
                const json& details = json::object())
{
  json body = details.is_object() ? details : json::object();
  body["error"] = message;
  body["path"] = path;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json body_of(const httplib::Request& req)
{
  if (req.body.empty())
  {
    return json::object();
  }
  try
  {
    return json::parse(req.body);
  }
  catch (const json::parse_error& e)
  {
    throw ServiceError(400, "", std::string("malformed JSON: ") + e.what());
  }
}

using JsonHandler = std::function<json(const httplib::Request&)>;

httplib::Server::Handler wrap(JsonHandler f, int ok_status = 200)
{
  return [f = std::move(f), ok_status](const httplib::Request& req, httplib::Response& res) {
    try
    {
      const json out = f(req);
      res.status = ok_status;
      res.set_content(out.dump(), "application/json");
    }
    catch (const ServiceError& e)
    {
      send_error(res, e.status(), e.path(), e.what(), e.details());
    }
    catch (const SchemaError& e)
    {
      send_error(res, 400, e.path(), e.what());
    }
    catch (const UnknownPluginError& e)
    {
      send_error(res, 400, "/config", e.what());
    }
    catch (const InvalidGeometryError& e)
    {
      send_error(res, 400, "", e.what());
    }
    catch (const json::exception& e)
    {
      send_error(res, 400, "", e.what());
    }
    catch (const std::exception& e)
    {
      send_error(res, 500, "", e.what());
    }
  };
}

}  // namespace

void install_routes(httplib::Server& server, GraspService& service, const std::filesystem::path& ui_dir)
{
  // a 5e6-point text cloud is well under this
  server.set_payload_max_length(std::size_t{1} << 30);

  server.Get("/health", wrap([](const httplib::Request&) { return json{{"status", "ok"}}; }));

  server.Post("/sessions", wrap([&service](const httplib::Request& req) { return service.create_session(body_of(req)); }, 201));
  server.Get("/sessions", wrap([&service](const httplib::Request&) { return json{{"sessions", service.session_ids()}}; }));

  server.Get(R"(/sessions/([^/]+))",
             wrap([&service](const httplib::Request& req) { return service.state(req.matches[1]); }));
  server.Get(R"(/sessions/([^/]+)/scene)",
             wrap([&service](const httplib::Request& req) { return service.scene(req.matches[1]); }));
  server.Post(R"(/sessions/([^/]+)/grasps)",
              wrap([&service](const httplib::Request& req) { return service.plan(req.matches[1], body_of(req)); }));
  server.Get(R"(/sessions/([^/]+)/grasps)",
             wrap([&service](const httplib::Request& req) { return service.grasps(req.matches[1]); }));
  server.Get(R"(/sessions/([^/]+)/progress)",
             wrap([&service](const httplib::Request& req) { return service.progress(req.matches[1]); }));
  server.Post(R"(/sessions/([^/]+)/select)",
              wrap([&service](const httplib::Request& req) { return service.select(req.matches[1], body_of(req)); }));
  server.Post(R"(/sessions/([^/]+)/object)", wrap([&service](const httplib::Request& req) {
                return service.update_object(req.matches[1], body_of(req));
              }));
  server.Post(R"(/sessions/([^/]+)/steps)", wrap([&service](const httplib::Request& req) {
                return service.update_steps(req.matches[1], body_of(req));
              }));
  server.Post(R"(/sessions/([^/]+)/roi)",
              wrap([&service](const httplib::Request& req) { return service.apply_roi(req.matches[1], body_of(req)); }));

  // push channel: one "progress" event per poll until the plan is no longer running
  server.Get(R"(/sessions/([^/]+)/events)", [&service](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    try
    {
      service.progress(id);
    }
    catch (const ServiceError& e)
    {
      send_error(res, e.status(), e.path(), e.what());
      return;
    }
    res.set_chunked_content_provider("text/event-stream", [&service, id](std::size_t, httplib::DataSink& sink) {
      const json p = service.progress(id);
      const std::string event = "event: progress\ndata: " + p.dump() + "\n\n";
      if (!sink.write(event.data(), event.size()))
      {
        return false;
      }
      if (!p.value("running", false))
      {
        sink.done();
        return true;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      return true;
    });
  });

  if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir))
  {
    server.set_mount_point("/ui", ui_dir.string());
    server.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });
  }
  else
  {
    server.Get(R"(/ui(/.*)?)", [](const httplib::Request&, httplib::Response& res) {
      send_error(res, 404, "/ui", "UI assets are not installed; start the server with --ui <dir>");
    });
  }
}

bool serve(GraspService& service, const ServeOptions& options, const std::function<void(int)>& on_ready)
{
  httplib::Server server;
  install_routes(server, service, options.ui_dir);
  int port = options.port;
  if (port == 0)
  {
    port = server.bind_to_any_port(options.host);
    if (port < 0)
    {
      return false;
    }
  }
  else if (!server.bind_to_port(options.host, port))
  {
    return false;
  }
  if (on_ready)
  {
    on_ready(port);
  }
  return server.listen_after_bind();
}

}  // namespace graspforge
