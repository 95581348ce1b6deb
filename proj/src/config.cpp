#include "texseg/config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace texseg::config {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<double> numbers_after(const std::string& text, const std::string& kind,
                                  std::size_t expected) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(trim(item)));
    } catch (const std::exception&) {
      throw ConfigError(kind + ": bad number '" + item + "'");
    }
  }
  if (out.size() != expected)
    throw ConfigError(kind + ": expected " + std::to_string(expected) + " numbers");
  return out;
}

const std::string& require(const std::map<std::string, std::string>& kv,
                           const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str());
}

level_set::InitShape parse_init_shape(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0)
    throw ConfigError("init shape: expected '<kind>:<args>', got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string args = text.substr(colon + 1);
  if (kind == "circle") {
    const auto v = numbers_after(args, "circle", 3);
    return level_set::Circle{v[0], v[1], v[2]};
  }
  if (kind == "rectangle") {
    const auto v = numbers_after(args, "rectangle", 4);
    return level_set::Rectangle{v[0], v[1], v[2], v[3]};
  }
  if (kind == "multi_circle") {
    const auto v = numbers_after(args, "multi_circle", 2);
    return level_set::MultiCircle{v[0], v[1]};
  }
  throw ConfigError("init shape: unknown kind '" + kind + "'");
}

void RunConfig::validate() const {
  if (mode != "texture" && mode != "chanvese")
    throw ConfigError("mode must be 'texture' or 'chanvese', got '" + mode + "'");
  if (input_path.has_value() == synth_spec.has_value())
    throw ConfigError("exactly one of --input and --synth is required");
  if (threads < 1) throw ConfigError("--threads must be >= 1");
  if (snapshot_stride < 0) throw ConfigError("--snapshot-stride must be >= 0");
  if (mode == "texture") evolve_params.validate();
  else cv_params.validate();
}

synth::CompositeSpec composite_from_keys(const std::map<std::string, std::string>& kv) {
  synth::CompositeSpec spec;
  try {
    spec.width = std::stoi(require(kv, "width"));
    spec.height = std::stoi(require(kv, "height"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("width/height: expected integers");
  }
  try {
    spec.background = synth::parse_texture(require(kv, "background"));
    spec.foreground = synth::parse_texture(require(kv, "foreground"));
    spec.region = synth::parse_region(require(kv, "region"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (const auto it = kv.find("seed"); it != kv.end()) {
    try {
      spec.seed = std::stoull(it->second);
    } catch (const std::exception&) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
  }
  return spec;
}

}  // namespace texseg::config
