#include "infground/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>

#include <json.hpp>

#include "infground/error.hpp"

namespace infground {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
  throw InvalidParameter(path + ": " + reason);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path.empty() ? "config" : path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  check_object(j, path);
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) fail(join(path, key), "unknown key");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double number_in(const json& j, const std::string& path, double lo, double hi, bool lo_open, bool hi_open) {
  const double v = number(j, path);
  const bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  if (!ok) {
    auto fmt = [](double x) {
      if (std::isinf(x)) return std::string(x > 0 ? "inf" : "-inf");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", x);
      return std::string(buf);
    };
    fail(path, "must lie in " + std::string(lo_open ? "(" : "[") + fmt(lo) + "," + fmt(hi) + (hi_open ? ")" : "]"));
  }
  return v;
}

double positive(const json& j, const std::string& path) {
  return number_in(j, path, 0.0, std::numeric_limits<double>::infinity(), true, true);
}

std::size_t count(const json& j, const std::string& path, std::size_t min) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  if (j.is_number_unsigned()) {
    const auto v = j.get<std::uint64_t>();
    if (v < min) fail(path, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }
  const auto v = j.get<std::int64_t>();
  if (v < static_cast<std::int64_t>(min)) fail(path, "must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Point point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool flag(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

SeedStrategy seed_strategy(const json& j, const std::string& path) {
  const std::string s = text(j, path);
  if (s == "distance") return SeedStrategy::Distance;
  if (s == "constant") return SeedStrategy::Constant;
  fail(path, "expected \"distance\" or \"constant\"");
}

const char* seed_name(SeedStrategy s) { return s == SeedStrategy::Constant ? "constant" : "distance"; }

const char* pin_name(PinStrategy s) {
  switch (s) {
    case PinStrategy::RightRidge:
      return "right-ridge";
    case PinStrategy::FullRidge:
      return "full-ridge";
    case PinStrategy::Explicit:
      return "explicit";
  }
  return "right-ridge";
}

DomainKind preset_kind(const std::string& preset, const std::string& path) {
  if (preset == "dumbbell") return DomainKind::Dumbbell;
  if (preset == "dumbbell-asym") return DomainKind::DumbbellAsym;
  if (preset == "stadium") return DomainKind::Stadium;
  if (preset == "ball") return DomainKind::Ball;
  if (preset == "disjoint-balls") return DomainKind::DisjointBalls;
  if (preset == "custom") return DomainKind::Custom;
  fail(path, "unknown preset '" + preset + "' (dumbbell, dumbbell-asym, stadium, ball, disjoint-balls, custom)");
}

Primitive primitive(const json& j, const std::string& path) {
  check_object(j, path);
  if (!j.contains("type")) fail(path + ".type", "required");
  const std::string type = text(j["type"], path + ".type");
  if (type == "ball") {
    check_keys(j, path, {"type", "center", "radius"});
    if (!j.contains("center")) fail(path + ".center", "required");
    if (!j.contains("radius")) fail(path + ".radius", "required");
    return make_ball(point(j["center"], path + ".center"), positive(j["radius"], path + ".radius"));
  }
  if (type == "rect") {
    check_keys(j, path, {"type", "xmin", "xmax", "ymin", "ymax"});
    for (const char* k : {"xmin", "xmax", "ymin", "ymax"}) {
      if (!j.contains(k)) fail(path + "." + k, "required");
    }
    const double xmin = number(j["xmin"], path + ".xmin"), xmax = number(j["xmax"], path + ".xmax");
    const double ymin = number(j["ymin"], path + ".ymin"), ymax = number(j["ymax"], path + ".ymax");
    if (!(xmin < xmax)) fail(path, "xmin must be less than xmax");
    if (!(ymin < ymax)) fail(path, "ymin must be less than ymax");
    return make_rect(xmin, xmax, ymin, ymax);
  }
  fail(path + ".type", "expected \"ball\" or \"rect\"");
}

ordered_json primitive_json(const Primitive& p) {
  if (const auto* b = std::get_if<Ball>(&p)) {
    return {{"type", "ball"}, {"center", {b->center.x, b->center.y}}, {"radius", b->radius}};
  }
  const auto& r = std::get<Rect>(p);
  return {{"type", "rect"}, {"xmin", r.xmin}, {"xmax", r.xmax}, {"ymin", r.ymin}, {"ymax", r.ymax}};
}

/// Reads a key that may appear both at the top level and inside a block.
const json* either(const json& root, const json* block, const char* key, std::string& path) {
  const bool top = root.contains(key);
  const bool inner = block != nullptr && block->contains(key);
  if (top && inner) fail(key, "given both at the top level and in the domain block");
  if (top) {
    path = key;
    return &root[key];
  }
  if (inner) {
    path = std::string("domain.") + key;
    return &(*block)[key];
  }
  return nullptr;
}

}  // namespace

std::string command_name(Command command) {
  switch (command) {
    case Command::Domain:
      return "domain";
    case Command::Plap:
      return "plap";
    case Command::Inf:
      return "inf";
    case Command::Sweep:
      return "sweep";
    case Command::Witness:
      return "witness";
    case Command::Verify:
      return "verify";
  }
  return "domain";
}

RunConfig parse_config(std::string_view source) {
  json root;
  try {
    root = json::parse(source.begin(), source.end());
  } catch (const json::parse_error& e) {
    fail("config", std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, "", {"command", "preset", "delta", "epsilon", "domain", "grid", "plap", "inf", "experiment",
                        "probes", "threads", "out"});

  RunConfig config;
  ExperimentConfig& ex = config.experiment;

  const json* domain = nullptr;
  if (root.contains("domain")) {
    domain = &root["domain"];
    check_keys(*domain, "domain", {"preset", "delta", "epsilon", "primitives"});
  }
  std::string path;
  if (const json* j = either(root, domain, "delta", path)) ex.delta = number_in(*j, path, 0.0, 1.0, true, true);
  if (const json* j = either(root, domain, "epsilon", path)) ex.epsilon = number_in(*j, path, 0.0, 1.0, false, true);
  bool has_primitives = false;
  if (domain != nullptr && domain->contains("primitives")) {
    const json& list = (*domain)["primitives"];
    if (!list.is_array() || list.empty()) fail("domain.primitives", "expected a non-empty array");
    std::vector<Primitive> prims;
    for (std::size_t i = 0; i < list.size(); ++i) {
      prims.push_back(primitive(list[i], "domain.primitives[" + std::to_string(i) + "]"));
    }
    try {
      ex.custom = DomainSpec("custom", std::move(prims));
    } catch (const InvalidParameter& e) {
      fail("domain.primitives", e.what());
    }
    has_primitives = true;
  }
  if (const json* j = either(root, domain, "preset", path)) {
    config.preset = text(*j, path);
    ex.domain = preset_kind(config.preset, path);
  } else if (has_primitives) {
    config.preset = "custom";
    ex.domain = DomainKind::Custom;
  }
  if (has_primitives && ex.domain != DomainKind::Custom) fail("domain.primitives", "only allowed with preset \"custom\"");
  if (ex.domain == DomainKind::Custom && !has_primitives) fail("domain.primitives", "required for preset \"custom\"");

  if (root.contains("grid")) {
    const json& g = root["grid"];
    check_keys(g, "grid", {"h", "padding", "node_budget"});
    if (g.contains("h")) ex.h = positive(g["h"], "grid.h");
    if (g.contains("padding")) ex.padding = positive(g["padding"], "grid.padding");
    if (g.contains("node_budget")) ex.node_budget = count(g["node_budget"], "grid.node_budget", 1);
  }
  if (ex.padding > 0.0 && ex.padding < resolved_h(ex)) fail("grid.padding", "must be at least grid.h");

  if (root.contains("plap")) {
    const json& p = root["plap"];
    check_keys(p, "plap", {"p", "p_schedule", "battery_ps", "tol", "max_iters", "method", "seed"});
    if (p.contains("p")) config.p = number_in(p["p"], "plap.p", 2.0, kMaxP, false, false);
    if (p.contains("p_schedule")) ex.p_schedule = numbers(p["p_schedule"], "plap.p_schedule");
    if (p.contains("battery_ps")) ex.battery_ps = numbers(p["battery_ps"], "plap.battery_ps");
    if (p.contains("tol")) ex.plap_tol = positive(p["tol"], "plap.tol");
    if (p.contains("max_iters")) ex.plap_max_iters = count(p["max_iters"], "plap.max_iters", 1);
    if (p.contains("method")) {
      const std::string m = text(p["method"], "plap.method");
      if (m == "lbfgs") {
        ex.plap_method = DescentMethod::Lbfgs;
      } else if (m == "gradient") {
        ex.plap_method = DescentMethod::Gradient;
      } else {
        fail("plap.method", "expected \"lbfgs\" or \"gradient\"");
      }
    }
    if (p.contains("seed")) config.plap_seed = seed_strategy(p["seed"], "plap.seed");
  }

  if (root.contains("inf")) {
    const json& f = root["inf"];
    check_keys(f, "inf", {"tol", "max_iters", "pin", "pins", "seed", "stencil", "accelerate"});
    if (f.contains("tol")) ex.inf_tol = positive(f["tol"], "inf.tol");
    if (f.contains("max_iters")) ex.inf_max_iters = count(f["max_iters"], "inf.max_iters", 1);
    if (f.contains("pin")) {
      const std::string s = text(f["pin"], "inf.pin");
      if (s == "right-ridge") {
        config.pin = PinStrategy::RightRidge;
      } else if (s == "full-ridge") {
        config.pin = PinStrategy::FullRidge;
      } else if (s == "explicit") {
        config.pin = PinStrategy::Explicit;
      } else {
        fail("inf.pin", "expected \"right-ridge\", \"full-ridge\" or \"explicit\"");
      }
    }
    if (f.contains("pins")) {
      const json& list = f["pins"];
      if (!list.is_array()) fail("inf.pins", "expected an array of [x, y]");
      for (std::size_t i = 0; i < list.size(); ++i) {
        config.pin_points.push_back(point(list[i], "inf.pins[" + std::to_string(i) + "]"));
      }
    }
    if (f.contains("seed")) config.inf_seed = seed_strategy(f["seed"], "inf.seed");
    if (f.contains("stencil")) {
      const std::size_t s = count(f["stencil"], "inf.stencil", 4);
      if (s != 4 && s != 8) fail("inf.stencil", "expected 4 or 8");
      ex.stencil = s == 4 ? Stencil::Four : Stencil::Eight;
    }
    if (f.contains("accelerate")) ex.accelerate = flag(f["accelerate"], "inf.accelerate");
  }
  if (config.pin == PinStrategy::Explicit && config.pin_points.empty()) {
    fail("inf.pins", "required when inf.pin is \"explicit\"");
  }
  if (config.pin != PinStrategy::Explicit && !config.pin_points.empty()) {
    fail("inf.pins", "only allowed when inf.pin is \"explicit\"");
  }

  if (root.contains("experiment")) {
    const json& e = root["experiment"];
    check_keys(e, "experiment", {"epsilon_schedule", "deltas", "gap_threshold"});
    if (e.contains("epsilon_schedule")) {
      ex.epsilon_schedule = numbers(e["epsilon_schedule"], "experiment.epsilon_schedule");
    }
    if (e.contains("deltas")) ex.deltas = numbers(e["deltas"], "experiment.deltas");
    if (e.contains("gap_threshold")) ex.gap_threshold = positive(e["gap_threshold"], "experiment.gap_threshold");
  }

  if (root.contains("probes")) {
    const json& p = root["probes"];
    check_keys(p, "probes", {"left", "right"});
    if (p.contains("left")) ex.probes.left = point(p["left"], "probes.left");
    if (p.contains("right")) ex.probes.right = point(p["right"], "probes.right");
  }

  if (root.contains("threads")) {
    ex.threads = static_cast<unsigned>(count(root["threads"], "threads", 0));
  }
  if (root.contains("out")) config.out = text(root["out"], "out");

  validate(ex);

  if (root.contains("command")) {
    const std::string c = text(root["command"], "command");
    for (Command cmd : {Command::Domain, Command::Plap, Command::Inf, Command::Sweep, Command::Witness,
                        Command::Verify}) {
      if (c == command_name(cmd)) config.command = cmd;
    }
    if (!config.command) fail("command", "expected domain, plap, inf, sweep, witness or verify");
  }
  return config;
}

std::string canonicalize(const RunConfig& config) {
  const ExperimentConfig& ex = config.experiment;
  ordered_json j;
  if (config.command) j["command"] = command_name(*config.command);

  ordered_json domain;
  domain["preset"] = config.preset;
  domain["delta"] = ex.delta;
  domain["epsilon"] = ex.epsilon;
  if (ex.domain == DomainKind::Custom && ex.custom) {
    ordered_json prims = ordered_json::array();
    for (const Primitive& p : ex.custom->primitives()) prims.push_back(primitive_json(p));
    domain["primitives"] = prims;
  }
  j["domain"] = domain;

  const double h = resolved_h(ex);
  j["grid"] = {{"h", h}, {"padding", ex.padding > 0.0 ? ex.padding : 2.0 * h}, {"node_budget", ex.node_budget}};

  ordered_json plap;
  if (config.p) plap["p"] = *config.p;
  plap["p_schedule"] = ex.p_schedule;
  plap["battery_ps"] = ex.battery_ps;
  plap["tol"] = ex.plap_tol;
  plap["max_iters"] = ex.plap_max_iters;
  plap["method"] = ex.plap_method == DescentMethod::Lbfgs ? "lbfgs" : "gradient";
  plap["seed"] = seed_name(config.plap_seed);
  j["plap"] = plap;

  ordered_json inf;
  inf["tol"] = ex.inf_tol;
  inf["max_iters"] = ex.inf_max_iters;
  inf["pin"] = pin_name(config.pin);
  if (config.pin == PinStrategy::Explicit) {
    ordered_json pins = ordered_json::array();
    for (const Point& p : config.pin_points) pins.push_back({p.x, p.y});
    inf["pins"] = pins;
  }
  inf["seed"] = seed_name(config.inf_seed);
  inf["stencil"] = static_cast<int>(ex.stencil);
  inf["accelerate"] = ex.accelerate;
  j["inf"] = inf;

  j["experiment"] = {
      {"epsilon_schedule", ex.epsilon_schedule}, {"deltas", ex.deltas}, {"gap_threshold", ex.gap_threshold}};
  j["probes"] = {{"left", {ex.probes.left.x, ex.probes.left.y}}, {"right", {ex.probes.right.x, ex.probes.right.y}}};
  return j.dump(2) + '\n';
}

std::uint64_t config_hash(const RunConfig& config) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonicalize(config)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string config_hash_hex(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  return buf;
}

}  // namespace infground
