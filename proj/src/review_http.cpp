#include "sqg/review_http.hpp"

#include <nlohmann/json.hpp>

namespace sqg {

using nlohmann::json;

namespace {

json stats_json(const SessionStats& s) {
  json j{{"total", s.total},
         {"marked", s.marked},
         {"accepted", s.accepted},
         {"rejected", s.rejected},
         {"remaining", s.remaining},
         {"acceptance_ratio", nullptr},
         {"acceptance_display", nullptr}};
  if (s.acceptance_ratio) {
    j["acceptance_ratio"] = *s.acceptance_ratio;
    j["acceptance_display"] = format_percent(s.accepted, s.marked);
  }
  return j;
}

json item_json(const ReviewItem& item, const ReviewSession& session) {
  std::size_t position = 0;
  for (std::size_t i = 0; i < session.queue.size(); ++i)
    if (session.queue[i].item_id == item.item_id) position = i + 1;
  return json{{"item_id", item.item_id},
              {"pair_id", item.pair_id},
              {"text", item.text},
              {"source_question", item.source_question},
              {"answer", item.answer},
              {"position", position},
              {"total", session.queue.size()}};
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

template <typename F>
void guarded(httplib::Response& res, F&& handler) {
  try {
    handler();
  } catch (const NotFound& e) {
    reply(res, 404, {{"error", e.what()}});
  } catch (const StateError& e) {
    reply(res, 409, {{"error", e.what()}});
  } catch (const InvalidArgument& e) {
    reply(res, 400, {{"error", e.what()}});
  } catch (const json::exception& e) {
    reply(res, 400, {{"error", std::string("bad request body: ") + e.what()}});
  } catch (const std::exception& e) {
    reply(res, 500, {{"error", e.what()}});
  }
}

}  // namespace

void mount_review_routes(httplib::Server& server, ReviewService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      const auto s = service.create_session(body.at("run_id").get<std::string>(),
                                            body.value("reviewer_id", std::string("reviewer")),
                                            body.value("seed", std::uint64_t{0}));
      json queue = json::array();
      for (const auto& item : s.queue) queue.push_back(item.item_id);
      reply(res, 201, {{"session_id", s.session_id},
                       {"run_id", s.run_id},
                       {"reviewer_id", s.reviewer_id},
                       {"seed", s.seed},
                       {"queue", queue},
                       {"stats", stats_json(service.session_stats(s.session_id))}});
    });
  });

  server.Get(R"(/sessions/([^/]+)/next)", [&service](const httplib::Request& req,
                                                    httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const auto item = service.next_item(id);
      if (!item) {
        reply(res, 200, {{"done", true}, {"stats", stats_json(service.session_stats(id))}});
        return;
      }
      auto j = item_json(*item, service.session(id));
      j["done"] = false;
      j["stats"] = stats_json(service.session_stats(id));
      reply(res, 200, j);
    });
  });

  server.Post(R"(/sessions/([^/]+)/marks)", [&service](const httplib::Request& req,
                                                      httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const auto body = json::parse(req.body);
      const auto verdict = parse_verdict(body.at("verdict").get<std::string>());
      std::string note;
      if (body.contains("note") && !body["note"].is_null()) note = body["note"].get<std::string>();
      const auto stats = service.submit_mark(id, body.at("item_id").get<std::string>(), verdict, note);
      reply(res, 200, stats_json(stats));
    });
  });

  server.Get(R"(/sessions/([^/]+)/stats)", [&service](const httplib::Request& req,
                                                     httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, stats_json(service.session_stats(req.matches[1].str()))); });
  });
}

}  // namespace sqg
