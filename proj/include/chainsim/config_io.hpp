// Copyright 2026 The Chainsim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "chainsim/model.hpp"

namespace chainsim {

// A full experiment description as loaded from one config file.
struct Scenario {
  SimConfig cfg;
  Topology topo;    // structure only; caps are sampled at run setup
  ChainSet chains;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + v);
  }
}

inline long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + v);
}

// Splits on any of ", \t"; empty fields dropped.
inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

// Key-value text format with [topology], [chains], [distributions] and
// [algorithm] sections. Unknown sections or keys are load errors. VM and VNF
// ids are 1-based in files and 0-based in memory.
inline Scenario load_scenario(std::istream& in) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_long;
  using detail::split_list;
  using detail::trim;

  SimConfig cfg;
  int n_vms = 0;
  std::string adjacency = "complete";
  std::vector<std::pair<int, int>> link_list;
  std::vector<std::pair<int, int>> host_list;  // (vm, host)
  std::vector<ServiceChain> chains;

  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "topology" && section != "chains" &&
          section != "distributions" && section != "algorithm")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config: key '" + key + "' outside any section");

    if (section == "topology") {
      if (key == "n_vms") {
        n_vms = static_cast<int>(parse_long(val, key));
      } else if (key == "adjacency") {
        if (val != "complete" && val != "list")
          throw ConfigError("config: adjacency must be complete or list");
        adjacency = val;
      } else if (key == "links") {
        for (const std::string& tok : split_list(val)) {
          std::size_t gt = tok.find('>');
          if (gt == std::string::npos)
            throw ConfigError("config: link must look like a>b: " + tok);
          int a = static_cast<int>(parse_long(tok.substr(0, gt), key));
          int b = static_cast<int>(parse_long(tok.substr(gt + 1), key));
          link_list.emplace_back(a - 1, b - 1);
        }
      } else if (key == "hosts") {
        for (const std::string& tok : split_list(val)) {
          std::size_t colon = tok.find(':');
          if (colon == std::string::npos)
            throw ConfigError("config: host entry must look like vm:host: " + tok);
          int vm = static_cast<int>(parse_long(tok.substr(0, colon), key));
          int host = static_cast<int>(parse_long(tok.substr(colon + 1), key));
          host_list.emplace_back(vm - 1, host);
        }
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [topology]");
      }
    } else if (section == "chains") {
      if (key.rfind("chain.", 0) == 0) {
        int id = static_cast<int>(parse_long(key.substr(6), key)) - 1;
        ServiceChain c;
        c.id = id;
        for (const std::string& tok : split_list(val))
          c.vnfs.push_back(static_cast<int>(parse_long(tok, key)) - 1);
        chains.push_back(std::move(c));
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [chains]");
      }
    } else if (section == "distributions") {
      if (key == "price_lo") cfg.price.lo = parse_double(val, key);
      else if (key == "price_hi") cfg.price.hi = parse_double(val, key);
      else if (key == "arrival_mean") cfg.arrival_mean = parse_double(val, key);
      else if (key == "cap_lo") cfg.capacity.lo = parse_double(val, key);
      else if (key == "cap_hi") cfg.capacity.hi = parse_double(val, key);
      else if (key == "beta_floor") cfg.beta_floor = parse_double(val, key);
      else
        throw ConfigError("config: unknown key '" + key +
                          "' in [distributions]");
    } else {  // [algorithm]
      if (key == "policy") {
        auto p = policy_from_name(val);
        if (!p) throw ConfigError("config: unknown policy '" + val + "'");
        cfg.policy = *p;
      } else if (key == "placement") {
        if (val == "per_slot") cfg.placement = PlacementMode::PerSlot;
        else if (val == "two_timescale")
          cfg.placement = PlacementMode::TwoTimescale;
        else throw ConfigError("config: unknown placement mode '" + val + "'");
      } else if (key == "epsilon") {
        cfg.epsilon = parse_double(val, key);
      } else if (key == "horizon") {
        cfg.horizon = static_cast<int>(parse_long(val, key));
      } else if (key == "t_delta") {
        cfg.t_delta = static_cast<int>(parse_long(val, key));
      } else if (key == "theta") {
        cfg.theta = (val == "auto") ? SimConfig::kThetaAuto
                                    : parse_double(val, key);
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_long(val, key));
      } else if (key == "tail_fraction") {
        cfg.tail_fraction = parse_double(val, key);
      } else if (key == "eta_scale") {
        cfg.eta_scale = parse_double(val, key);
      } else if (key == "strict_drain") {
        cfg.strict_drain = parse_bool(val, key);
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [algorithm]");
      }
    }
  }

  if (n_vms <= 0) throw ConfigError("config: [topology] n_vms is required");
  if (chains.empty()) throw ConfigError("config: [chains] needs at least one chain");
  std::sort(chains.begin(), chains.end(),
            [](const ServiceChain& a, const ServiceChain& b) { return a.id < b.id; });
  for (int i = 0; i < static_cast<int>(chains.size()); ++i)
    if (chains[i].id != i)
      throw ConfigError("config: chain ids must run 1.." +
                        std::to_string(chains.size()));

  Topology topo;
  if (adjacency == "complete") {
    topo = Topology::complete(n_vms);
  } else {
    topo.n_vms = n_vms;
    topo.proc_cap.assign(n_vms, 1.0);
    topo.host_of.assign(n_vms, -1);
    for (auto [a, b] : link_list) topo.links.push_back({a, b, 1.0, false});
    topo.finalize();
  }
  for (auto [vm, host] : host_list) {
    if (vm < 0 || vm >= n_vms)
      throw ConfigError("config: host entry references unknown vm");
    topo.host_of[vm] = host;
  }
  // Structural validation with placeholder caps; real caps are sampled later.
  {
    Topology probe = topo;
    if (probe.proc_cap.empty() || probe.proc_cap[0] == 0.0)
      probe.proc_cap.assign(n_vms, 1.0);
    for (Link& e : probe.links)
      if (e.cap == 0.0) e.cap = 1.0;
    probe.validate();
  }

  cfg.validate();

  Scenario sc;
  sc.cfg = cfg;
  sc.topo = expand_colocated(topo);
  sc.chains = ChainSet(std::move(chains));
  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return load_scenario(in);
}

inline Scenario load_scenario_string(const std::string& text) {
  std::istringstream in(text);
  return load_scenario(in);
}

}  // namespace chainsim
