// Copyright 2026 The qvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qvlab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qvlab/algorithms.hpp"
#include "qvlab/cost_model.hpp"
#include "qvlab/numeric.hpp"

namespace qvlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto t = trim(text);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size()) {
    throw std::invalid_argument("config: bad value '" + text + "' for " + key);
  }
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  const auto t = trim(text);
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size()) throw std::invalid_argument("config: bad value '" + text + "' for " + key);
  return v;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + f(xs[i]);
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n.empty()) throw std::invalid_argument("config: n must list at least one size");
  for (auto v : n) {
    if (v == 0) throw std::invalid_argument("config: n entries must be positive");
  }
  if (K < 0 || K > 24) throw std::invalid_argument("config: K must lie in [0, 24]");
  if (reps == 0) throw std::invalid_argument("config: reps must be positive");
  if (grid.empty()) throw std::invalid_argument("config: grid must not be empty");
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("config: grid points must lie in [0, 1]");
  }
  if (!CostModel::from_name(cost)) throw std::invalid_argument("config: unknown cost '" + cost + "'");
  if (!scheme_from_name(scheme)) throw std::invalid_argument("config: unknown scheme '" + scheme + "'");
  if (out.empty()) throw std::invalid_argument("config: out must not be empty");
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "n") {
    n.clear();
    for (const auto& v : split(value)) n.push_back(parse_number<std::size_t>(key, v));
  } else if (key == "K") {
    K = parse_number<int>(key, value);
  } else if (key == "reps") {
    reps = parse_number<std::size_t>(key, value);
  } else if (key == "grid") {
    grid.clear();
    for (const auto& v : split(value)) grid.push_back(parse_double(key, v));
  } else if (key == "cost") {
    cost = trim(value);
  } else if (key == "scheme") {
    scheme = trim(value);
  } else if (key == "out") {
    out = trim(value);
  } else if (key == "suite") {
    suite = trim(value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "seed=" << seed << '\n'
     << "n=" << join(n, [](std::size_t v) { return std::to_string(v); }) << '\n'
     << "K=" << K << '\n'
     << "reps=" << reps << '\n'
     << "grid=" << join(grid, [](double v) { return format_double(v); }) << '\n'
     << "cost=" << cost << '\n'
     << "scheme=" << scheme << '\n'
     << "out=" << out << '\n'
     << "suite=" << suite << '\n';
  return os.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("config: cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::hash() const {
  ExperimentConfig c = *this;
  c.out.clear();
  return hex64(fnv1a(c.to_text()));
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"seed", seed}, {"n", n},       {"K", K},     {"reps", reps},   {"grid", grid},
          {"cost", cost}, {"scheme", scheme}, {"out", out}, {"suite", suite}, {"hash", hash()}};
}

}  // namespace qvlab
