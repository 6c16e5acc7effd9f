#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infground/config.hpp"
#include "infground/error.hpp"
#include "infground/runner.hpp"

namespace {

using nlohmann::json;

// Sets a dotted key, creating intermediate objects. The value is read as JSON
// when it parses, otherwise as a string.
void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw infground::InvalidParameter("--set " + assignment + ": expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw infground::InvalidParameter("--set " + assignment + ": empty key segment");
    if (!node->is_object()) throw infground::InvalidParameter("--set " + key + ": parent is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json load_document(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw infground::IoError("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw infground::InvalidParameter("config: malformed JSON in " + path);
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinity ground states and p-Laplacian eigenfunctions on planar domains"};
  std::string command, config_path, out_dir, preset;
  int threads = -1;
  std::vector<std::string> overrides;
  app.add_option("command", command, "domain | plap | inf | sweep | witness | verify (overrides the config)");
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "run directory (default: \"out\" from the config, else ./run)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--preset", preset, "domain preset: dumbbell, dumbbell-asym, stadium, ball, disjoint-balls");
  app.add_option("--set", overrides, "override a config key, e.g. --set grid.h=0.0125")->expected(1)->take_all();
  app.add_flag_callback("--version", [] {
    std::cout << "infground " << infground::version() << '\n';
    throw CLI::Success();
  });
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : infground::kExitConfigError;
  }

  infground::RunConfig config;
  try {
    json doc = load_document(config_path);
    if (!doc.is_object()) throw infground::InvalidParameter("config: expected an object");
    if (!preset.empty()) doc["preset"] = preset;
    for (const std::string& s : overrides) apply_override(doc, s);
    if (!command.empty()) doc["command"] = command;
    if (threads >= 0) doc["threads"] = threads;
    config = infground::parse_config(doc.dump());
    if (!out_dir.empty()) config.out = out_dir;
    if (config.out.empty()) config.out = "run";
  } catch (const infground::Error& e) {
    std::cerr << "infground: " << e.what() << '\n';
    if (!out_dir.empty()) infground::config_error_summary(e.what(), out_dir);
    return infground::kExitConfigError;
  }

  const infground::RunSummary summary = infground::run(config, config.out);
  std::cout << summary.report;
  if (summary.exit_code != infground::kExitOk) {
    std::cerr << "infground: " << summary.status << " (exit " << summary.exit_code << ")\n";
  }
  return summary.exit_code;
}
