#pragma once

// Parameter checkpoint text format:
//
//   axppo-checkpoint v1 obs_dim=4 hidden=64,64 actions=2 count=4675
//   <one hexfloat value per line, canonical layout order>
//
// Hexfloat keeps the round trip bitwise exact.

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "axppo/network.hpp"

namespace axppo {

struct Checkpoint {
  NetworkConfig config;
  ParameterSet params;
};

inline void write_checkpoint(std::ostream& out, const NetworkConfig& config, const ParameterSet& params) {
  const NetworkLayout layout = make_layout(config);
  detail::check_params(params, layout);
  out << "axppo-checkpoint v1 obs_dim=" << config.obs_dim << " hidden=";
  for (std::size_t i = 0; i < config.hidden_sizes.size(); ++i) {
    if (i > 0) out << ',';
    out << config.hidden_sizes[i];
  }
  out << " actions=" << config.action_count << " count=" << layout.parameter_count << '\n';
  std::ostringstream line;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    line.str("");
    line << std::hexfloat << params.values[i];
    out << line.str() << '\n';
  }
}

inline Checkpoint read_checkpoint(std::istream& in) {
  auto fail = [](const std::string& what) -> ContractViolation {
    return ContractViolation("checkpoint: " + what);
  };

  std::string header;
  if (!std::getline(in, header)) throw fail("missing header");
  std::istringstream fields(header);
  std::string magic, version;
  fields >> magic >> version;
  if (magic != "axppo-checkpoint" || version != "v1") throw fail("unrecognized header '" + header + "'");

  Checkpoint ckpt;
  ckpt.config.hidden_sizes.clear();
  long long count = -1;
  std::string token;
  while (fields >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw fail("malformed header field '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "obs_dim") {
      ckpt.config.obs_dim = std::stoi(value);
    } else if (key == "actions") {
      ckpt.config.action_count = std::stoi(value);
    } else if (key == "count") {
      count = std::stoll(value);
    } else if (key == "hidden") {
      std::istringstream sizes(value);
      std::string item;
      while (std::getline(sizes, item, ',')) ckpt.config.hidden_sizes.push_back(std::stoi(item));
    } else {
      throw fail("unknown header field '" + key + "'");
    }
  }
  ckpt.config.validate();
  const auto expected = static_cast<long long>(parameter_count(ckpt.config));
  if (count != expected) throw fail("count does not match network shape");

  ckpt.params.values.resize(expected);
  std::string line;
  for (long long i = 0; i < expected; ++i) {
    if (!std::getline(in, line)) throw fail("truncated value list");
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) throw fail("unparseable value '" + line + "'");
    ckpt.params.values[i] = v;
  }
  if (!ckpt.params.all_finite()) throw fail("non-finite parameter");
  return ckpt;
}

inline void save_checkpoint(const std::string& path, const NetworkConfig& config, const ParameterSet& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_checkpoint(out, config, params);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace axppo
