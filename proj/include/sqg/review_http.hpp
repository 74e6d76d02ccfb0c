#pragma once

#include <httplib.h>

#include "sqg/review.hpp"

namespace sqg {

/// Registers the review REST endpoints on `server`:
///
///   POST /sessions              {run_id, reviewer_id, seed} -> session
///   GET  /sessions/{id}/next    -> item, or {"done": true, "stats": ...}
///   POST /sessions/{id}/marks   {item_id, verdict, note?} -> stats
///   GET  /sessions/{id}/stats   -> stats
///
/// Errors come back as {"error": message} with 400 (bad request), 404
/// (unknown run, session or item) or 409 (item already marked).
void mount_review_routes(httplib::Server& server, ReviewService& service);

}  // namespace sqg
