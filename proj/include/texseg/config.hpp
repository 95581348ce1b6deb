#pragma once

#include <map>
#include <optional>
#include <string>

#include "texseg/chan_vese.hpp"
#include "texseg/evolution.hpp"
#include "texseg/level_set.hpp"
#include "texseg/synth.hpp"

namespace texseg::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text, one key per line, `#` starts a comment. Duplicate
/// keys keep the last value.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// `circle:cx,cy,r`, `rectangle:x0,y0,x1,y1`, or `multi_circle:spacing,r`.
level_set::InitShape parse_init_shape(const std::string& text);

struct RunConfig {
  std::string mode = "texture";  // texture | chanvese
  std::optional<std::string> input_path;
  std::optional<synth::CompositeSpec> synth_spec;
  std::optional<level_set::InitShape> init;  // default: centered circle, r = min(w,h)/3
  evolve::EvolveParams evolve_params;
  cv::ChanVeseParams cv_params;
  int threads = 1;
  std::optional<std::string> out_mask, out_overlay, out_cost;
  int snapshot_stride = 0;  // 0 = no snapshots

  void validate() const;
};

/// Builds a CompositeSpec from config keys: width, height, background,
/// foreground, region, seed. Unknown keys are allowed (run keys share files
/// with synth specs); missing composite keys are an error.
synth::CompositeSpec composite_from_keys(const std::map<std::string, std::string>& kv);

}  // namespace texseg::config
