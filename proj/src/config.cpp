#include "brw/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "brw/error.hpp"
#include "brw/laws.hpp"

namespace brw {

const std::vector<std::string> kCommands = {"solve-tail",  "evolve",   "conditional", "superposition",
                                            "simulate",    "survival", "ode-check",   "pde-check",
                                            "cross-scale", "martingale", "overshoot", "fk-brownian",
                                            "heavy-tail-report", "verify"};

namespace {

#define BRW_CONFIG_FIELDS(X)                                                                                   \
  X(command) X(offspring) X(step) X(x_max) X(tol) X(iter_cap) X(trees) X(gen_cap) X(n) X(paths) X(start_x) X(y) \
  X(y_max) X(sigma) X(eta) X(dt) X(reaction) X(xs) X(xs_scaled) X(heights) X(eps) X(cutoff) X(mode) X(seed)    \
  X(threads) X(out_dir) X(out) X(format) X(strict)

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::BadNumeric, what); }

}  // namespace

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json::object();
#define BRW_PUT(name) j[#name] = c.name;
  BRW_CONFIG_FIELDS(BRW_PUT)
#undef BRW_PUT
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  if (!j.is_object()) bad("config must be a JSON object");
  static const std::set<std::string> known = {
#define BRW_NAME(name) #name,
      BRW_CONFIG_FIELDS(BRW_NAME)
#undef BRW_NAME
  };
  for (const auto& item : j.items())
    if (!known.count(item.key())) bad("unknown config key '" + item.key() + "'");
  try {
#define BRW_GET(name) \
  if (j.contains(#name)) j.at(#name).get_to(c.name);
    BRW_CONFIG_FIELDS(BRW_GET)
#undef BRW_GET
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("config value has the wrong type: ") + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
    throw Error(Errc::UnknownCommand, "unknown command '" + c.command + "'");
  parse_offspring_spec(c.offspring);
  parse_step_spec(c.step);
  if (c.x_max < 0) bad("--xmax must be positive");
  if (!(c.tol >= 1e-14 && c.tol <= 1e-2)) bad("--tol must lie in [1e-14, 1e-2]");
  if (c.iter_cap < 0) bad("--iter-cap must be nonnegative");
  if (c.trees < 1) bad("--trees must be at least 1");
  if (c.gen_cap < 1) bad("--gen-cap must be at least 1");
  if (c.n < 0) bad("--n must be positive");
  if (c.paths < 1) bad("--paths must be at least 1");
  if (c.start_x < 0) bad("--x must be nonnegative");
  if (!(c.y > 0.0)) bad("--y must be positive");
  if (c.y_max < 0.0 || c.sigma < 0.0 || c.eta < 0.0 || c.reaction < 0.0) bad("negative scale parameter");
  if (!(c.dt > 0.0)) bad("--dt must be positive");
  for (auto x : c.xs)
    if (x < 1) bad("--xs entries must be positive");
  for (auto x : c.xs_scaled)
    if (!(x > 0.0)) bad("--xs-scaled entries must be positive");
  for (std::size_t i = 0; i < c.heights.size(); ++i)
    if (c.heights[i] < 1 || (i > 0 && c.heights[i] <= c.heights[i - 1])) bad("--heights must be positive and increasing");
  if (!(c.eps > 0.0 && c.eps < 2.0)) bad("--eps must lie in (0, 2)");
  if (c.cutoff < 1000) bad("--cutoff must be at least 1000");
  if (c.mode != "ladder" && c.mode != "direct") bad("--mode must be ladder or direct");
  if (c.threads < 1) bad("--threads must be at least 1");
  if (c.format != "csv" && c.format != "json") bad("--format must be csv or json");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoFailure, "cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    bad("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return j.get<ExperimentConfig>();
}

}  // namespace brw
