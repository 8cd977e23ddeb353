// Copyright 2026 The heraldsim Authors
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

#ifndef HERALDSIM_TOOLS_CLI_HPP_
#define HERALDSIM_TOOLS_CLI_HPP_

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "heraldsim/heraldsim.hpp"

// Command-line front end. Output goes to `out` as CSV (header row, one row
// per point) or as one JSON object per run with the manifest embedded.
//
// Exit codes: 0 success, 2 bad parameters or input, 3 degenerate result.

namespace heraldsim::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Seconds since the epoch as ISO 8601 UTC; SOURCE_DATE_EPOCH pins it.
inline std::string run_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::atoll(env));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Everything needed to repeat a run: the argument vector is replayed as is.
struct RunManifest {
  std::string command;
  json parameters = json::object();
  std::optional<std::uint64_t> seed;
  std::string tool_version = kVersion;
  std::string timestamp;
  std::optional<std::string> input_hash;  // FNV-1a 64 of the input file bytes
  std::vector<std::string> argv;

  json to_json() const {
    json j = {{"command", command}, {"parameters", parameters}, {"tool_version", tool_version},
              {"timestamp", timestamp}, {"argv", argv}};
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["input_hash"] = input_hash ? json(*input_hash) : json(nullptr);
    return j;
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.parameters = j.value("parameters", json::object());
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
    m.tool_version = j.value("tool_version", std::string());
    m.timestamp = j.value("timestamp", std::string());
    if (j.contains("input_hash") && !j["input_hash"].is_null()) m.input_hash = j["input_hash"].get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    return m;
  }
};

// Rows of named cells; numbers print as shortest round-trip decimals.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<json> row) {
    if (row.size() != header_.size()) throw std::logic_error("table row width mismatch");
    rows_.push_back(std::move(row));
  }
  std::size_t size() const { return rows_.size(); }

  std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
    s += "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + cell(r[i]);
      s += "\n";
    }
    return s;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& r : rows_) {
      json o = json::object();
      for (std::size_t i = 0; i < r.size(); ++i) o[header_[i]] = r[i];
      arr.push_back(std::move(o));
    }
    return arr;
  }

 private:
  static std::string cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    return ::heraldsim::detail::format_double(v.get<double>());
  }

  std::vector<std::string> header_;
  std::vector<std::vector<json>> rows_;
};

// NaN and infinities become null so the JSON stays valid.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
inline json num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

namespace detail {

struct Emit {
  std::string format = "csv";
  std::string manifest_path;
};

inline void write_manifest(const RunManifest& m, const Emit& emit) {
  if (emit.manifest_path.empty()) return;
  std::ofstream f(emit.manifest_path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + emit.manifest_path);
  f << m.to_json().dump(2) << "\n";
}

// CSV: the table alone. JSON: {"manifest", "result"} with `extra` merged in.
inline void emit(std::ostream& out, const RunManifest& m, const Emit& e, const Table& table, json extra = json::object()) {
  write_manifest(m, e);
  if (e.format == "json") {
    extra["rows"] = table.to_json();
    out << json{{"manifest", m.to_json()}, {"result", extra}}.dump(2) << "\n";
  } else {
    out << table.csv();
  }
}

inline std::vector<double> parse_range(std::string s) {
  if (s.rfind("eta=", 0) == 0) s = s.substr(4);
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw UsageError("--sweep expects a:b:n");
  double a = 0.0, b = 0.0;
  long n = 0;
  try {
    std::size_t ia = 0, ib = 0, in = 0;
    a = std::stod(parts[0], &ia);
    b = std::stod(parts[1], &ib);
    n = std::stol(parts[2], &in);
    if (ia != parts[0].size() || ib != parts[1].size() || in != parts[2].size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw UsageError("--sweep expects numbers a:b:n");
  }
  if (n < 1 || n > 10000) throw UsageError("--sweep point count must lie in [1, 10000]");
  std::vector<double> v;
  for (long i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

inline std::vector<protocol::InputState> parse_inputs(const std::string& s) {
  if (s == "all") return {protocol::kAllInputs.begin(), protocol::kAllInputs.end()};
  std::vector<protocol::InputState> v;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');) {
    auto in = protocol::parse_input(p);
    if (!in) throw UsageError("unknown input state '" + p + "' (use all, H, V, +, -, R or L)");
    v.push_back(*in);
  }
  if (v.empty()) throw UsageError("--inputs is empty");
  return v;
}

inline circuit::CircuitSpec load_circuit(const std::string& path, RunManifest& m) {
  const std::string text = read_file(path);
  m.input_hash = fnv1a_hex(text);
  circuit::CircuitSpec spec = circuitdsl::parse(text);
  if (auto v = circuit::validate(spec); !v.empty()) {
    std::string msg = path + ": invalid circuit";
    for (const auto& s : v) msg += "\n  " + s;
    throw UsageError(msg);
  }
  return spec;
}

inline json budget_json(const analytic::NoiseBudget& b) {
  return {{"p0", b.p0}, {"p1", b.p1}, {"p2", b.p2}, {"p3", b.p3},
          {"success_rate", b.success_rate}, {"heralding_eff_model", b.heralding_eff_model}};
}

inline json rho_json(const QubitDensityMatrix& rho) {
  json re = json::array(), im = json::array();
  for (int r = 0; r < 4; ++r) {
    json a = json::array(), b = json::array();
    for (int c = 0; c < 4; ++c) {
      a.push_back(rho(r, c).real());
      b.push_back(rho(r, c).imag());
    }
    re.push_back(a);
    im.push_back(b);
  }
  return {{"re", re}, {"im", im}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// analytic

struct AnalyticArgs {
  double gamma = 1.0;
  double eps = 0.02;
  double eta = 1.0;
  std::string sweep;
  double constant = protocol::kDefaultSweepConstant;
  bool fig1d = false;
  bool classical = false;
  double f0 = 0.826;
};

inline void cmd_analytic(const AnalyticArgs& a, RunManifest& m, const detail::Emit& e, std::ostream& out) {
  m.parameters = {{"gamma", a.gamma}, {"eps", a.eps}, {"eta", a.eta}, {"sweep", a.sweep},
                  {"const", a.constant}, {"fig1d", a.fig1d}, {"classical", a.classical}, {"f0", a.f0}};
  try {
    if (a.classical) {
      const auto s = analytic::classical_rate(a.f0, a.eta);
      Table t({"f0", "eta", "n_copies", "rate"});
      t.add({a.f0, a.eta, s.n_copies, s.rate});
      detail::emit(out, m, e, t);
      return;
    }
    std::vector<double> etas;
    if (a.fig1d) {
      etas.assign(protocol::kChannelPoints.begin(), protocol::kChannelPoints.end());
    } else if (!a.sweep.empty()) {
      etas = detail::parse_range(a.sweep);
    }
    if (etas.empty()) {
      const auto b = analytic::noise_budget(a.gamma, a.eps, a.eta);
      Table t({"gamma", "eps", "eta", "p0", "p1", "p2", "p3", "success_rate", "heralding_eff_model"});
      t.add({a.gamma, a.eps, a.eta, b.p0, b.p1, b.p2, b.p3, b.success_rate, b.heralding_eff_model});
      detail::emit(out, m, e, t);
      return;
    }
    Table t({"eta", "km", "gamma", "p0", "p1", "p2", "p3", "success_rate", "heralding_eff_model", "direct_transmission"});
    for (double eta : etas) {
      const double g = analytic::sweep_constraint(a.eps, eta, a.constant);
      const auto b = analytic::noise_budget(g, a.eps, eta);
      t.add({eta, protocol::equivalent_km(eta), g, b.p0, b.p1, b.p2, b.p3, b.success_rate, b.heralding_eff_model, eta});
    }
    detail::emit(out, m, e, t);
  } catch (const std::domain_error& ex) {
    throw UsageError(ex.what());
  }
}

// ---------------------------------------------------------------------------
// swap

struct SwapArgs {
  std::string file;
  std::string preset;
  bool exact = false;
  std::uint64_t mc = 0;
  std::uint64_t seed = 1;
  std::optional<double> eta;
  bool same_basis = false;
  double constant = protocol::kDefaultSweepConstant;
};

inline const std::vector<std::string>& swap_columns() {
  static const std::vector<std::string> c = {"herald_probability", "a0",
                                             "a1",                 "a2",
                                             "overflow",           "heralding_eff",
                                             "estimator_expectation", "fidelity"};
  return c;
}

inline const std::vector<std::string>& mc_columns() {
  static const std::vector<std::string> c = {"shots", "seed", "c4", "c6", "a2_estimate", "a2_sigma"};
  return c;
}

inline void cmd_swap(const SwapArgs& a, RunManifest& m, const detail::Emit& e, std::ostream& out) {
  if (a.file.empty() == a.preset.empty()) throw UsageError("swap needs exactly one of FILE or --preset");
  if (a.exact && a.mc > 0) throw UsageError("--exact and --mc are exclusive");
  m.parameters = {{"file", a.file}, {"preset", a.preset}, {"exact", a.mc == 0}, {"mc", a.mc},
                  {"same_basis", a.same_basis}, {"const", a.constant}};
  m.parameters["eta"] = a.eta ? json(*a.eta) : json(nullptr);
  if (a.mc > 0) m.seed = a.seed;

  auto mc_cells = [&](const protocol::SwapResult& r, std::uint64_t seed) -> std::vector<json> {
    const auto s = protocol::sample_swap(r, a.mc, seed);
    return {s.counts.shots, s.counts.seed, s.counts.c4, s.counts.c6, num(s.a2_estimate), num(s.a2_sigma)};
  };

  if (a.preset == "fig2") {
    if (a.eta) throw UsageError("--eta does not apply to the fig2 preset");
    protocol::SwapConfig base = protocol::presets::lab_swap(1.0, a.constant);
    base.same_basis = a.same_basis;
    std::vector<protocol::SweepRow> rows;
    try {
      rows = protocol::sweep_heralding(base, {protocol::kChannelPoints.begin(), protocol::kChannelPoints.end()},
                                       a.constant);
    } catch (const std::domain_error& ex) {
      if (dynamic_cast<const protocol::DegenerateResult*>(&ex)) throw;
      throw UsageError(ex.what());
    }
    std::vector<std::string> cols = {"eta", "km", "gamma", "a2", "heralding_eff", "heralding_eff_model",
                                     "estimator_expectation", "success_rate", "direct_transmission", "fidelity"};
    if (a.mc > 0) cols.insert(cols.end(), mc_columns().begin(), mc_columns().end());
    Table t(cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      std::vector<json> cells = {r.eta, r.equiv_km, r.gamma, r.a2, r.heralding_eff_exact, r.heralding_eff_model,
                                 num(r.estimator_expectation), r.success_rate, r.direct_transmission, num(r.fidelity)};
      if (a.mc > 0) {
        auto extra = mc_cells(r.result, a.seed + i);
        cells.insert(cells.end(), extra.begin(), extra.end());
      }
      t.add(std::move(cells));
    }
    detail::emit(out, m, e, t);
    return;
  }

  circuit::CircuitSpec spec;
  if (!a.file.empty()) {
    if (a.eta || a.same_basis) throw UsageError("--eta and --same-basis apply to presets only");
    spec = detail::load_circuit(a.file, m);
  } else {
    protocol::SwapConfig cfg;
    if (a.preset == "ideal") {
      cfg = protocol::SwapConfig::ideal();
      if (a.eta) cfg.eta = *a.eta;
    } else if (a.preset == "lab") {
      try {
        cfg = protocol::presets::lab_swap(a.eta.value_or(protocol::presets::kTeleportChannel), a.constant);
      } catch (const std::domain_error& ex) {
        throw UsageError(ex.what());
      }
    } else {
      throw UsageError("unknown swap preset '" + a.preset + "' (use fig2, ideal or lab)");
    }
    cfg.same_basis = a.same_basis;
    cfg.validate();
    spec = protocol::build_swap_circuit(cfg);
  }
  const protocol::SwapResult r = protocol::run_swap(spec, protocol::corrections_for(spec));
  std::vector<std::string> cols = swap_columns();
  if (a.mc > 0) cols.insert(cols.end(), mc_columns().begin(), mc_columns().end());
  Table t(cols);
  std::vector<json> cells = {r.herald_probability,   r.weights.a0, r.weights.a1, r.weights.a2, r.weights.overflow,
                             r.heralding_efficiency, num(r.estimator_expectation), num(r.fidelity)};
  if (a.mc > 0) {
    auto extra = mc_cells(r, a.seed);
    cells.insert(cells.end(), extra.begin(), extra.end());
  }
  t.add(std::move(cells));

  json extra = json::object();
  json outcomes = json::array();
  for (const auto& o : r.outcomes) {
    outcomes.push_back({{"outcome", o.outcome}, {"probability", o.probability},
                        {"correction", pauli_name(o.correction)}, {"fidelity", num(o.fidelity)}});
  }
  extra["outcomes"] = outcomes;
  if (r.rho) extra["rho"] = detail::rho_json(*r.rho);
  extra["budget"] = r.budget ? detail::budget_json(*r.budget) : json(nullptr);
  detail::emit(out, m, e, t, extra);
}

// ---------------------------------------------------------------------------
// teleport

struct TeleportArgs {
  std::string file;
  std::string preset;
  std::string inputs = "all";
  std::uint64_t mc = 0;
  std::uint64_t seed = 1;
};

inline void cmd_teleport(const TeleportArgs& a, RunManifest& m, const detail::Emit& e, std::ostream& out,
                         std::ostream& err) {
  if (a.file.empty() == a.preset.empty()) throw UsageError("teleport needs exactly one of FILE or --preset");
  m.parameters = {{"file", a.file}, {"preset", a.preset}, {"inputs", a.inputs}, {"mc", a.mc}};
  if (a.mc > 0) m.seed = a.seed;
  const auto inputs = detail::parse_inputs(a.inputs);

  protocol::TeleportSummary s;
  if (!a.file.empty()) {
    const auto spec = detail::load_circuit(a.file, m);
    s = protocol::run_teleport_inputs(spec, inputs, protocol::corrections_for(spec));
  } else {
    protocol::TeleportConfig cfg;
    if (a.preset == "ideal") {
      cfg = protocol::TeleportConfig::ideal();
    } else if (a.preset == "lab") {
      cfg = protocol::presets::lab_teleport();
    } else {
      throw UsageError("unknown teleport preset '" + a.preset + "' (use ideal or lab)");
    }
    cfg.validate();
    s = protocol::run_teleport_all(cfg, inputs);
  }

  std::vector<std::string> cols = {"input", "fidelity", "efficiency", "c5_probability", "c8_probability"};
  if (a.mc > 0) {
    for (const char* c : {"shots", "seed", "c5", "c8", "efficiency_estimate", "efficiency_sigma"}) cols.push_back(c);
  }
  Table t(cols);
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    std::vector<json> cells = {protocol::input_name(r.input), num(r.fidelity), r.efficiency, r.c5_probability,
                               r.c8_probability};
    if (a.mc > 0) {
      const auto mc = protocol::sample_teleport(r, a.mc, a.seed + i);
      for (json v : {json(mc.counts.shots), json(mc.counts.seed), json(mc.counts.c5), json(mc.counts.c8),
                     num(mc.efficiency_estimate), num(mc.efficiency_sigma)}) {
        cells.push_back(v);
      }
    }
    t.add(std::move(cells));
  }

  json summary = {{"average_fidelity", num(s.average_fidelity)},
                  {"average_efficiency", s.average_efficiency},
                  {"model_efficiency", num(s.model_efficiency)},
                  {"direct_transmission", s.baseline},
                  {"classical_rate", s.classical ? num(s.classical->rate) : json(nullptr)},
                  {"cloning_copies", s.classical ? num(s.classical->n_copies) : json(nullptr)},
                  {"advantage_ratio", num(s.advantage_ratio)},
                  {"beats_classical_fidelity", s.beats_classical_fidelity()},
                  {"beats_direct", s.beats_direct()},
                  {"beats_cloning", s.beats_cloning()}};
  if (e.format != "json") {
    for (const auto& [k, v] : summary.items()) {
      err << k << "=" << (v.is_number_float() ? ::heraldsim::detail::format_double(v.get<double>()) : v.dump()) << "\n";
    }
  }
  detail::emit(out, m, e, t, {{"summary", summary}});
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

namespace detail {

// Re-runs a manifest; with `check`, compares against a saved output (JSON
// outputs are compared on their result part, the manifest carries a clock).
inline int cmd_replay(const std::string& path, const std::string& check, std::ostream& out, std::ostream& err) {
  RunManifest m;
  try {
    json j = json::parse(read_file(path));
    m = RunManifest::from_json(j.contains("manifest") ? j["manifest"] : j);
  } catch (const json::exception& ex) {
    throw UsageError(path + ": not a run manifest (" + ex.what() + ")");
  }
  if (m.input_hash && m.parameters.contains("file")) {
    const std::string file = m.parameters["file"].get<std::string>();
    if (fnv1a_hex(read_file(file)) != *m.input_hash) throw UsageError(file + " changed since the manifest was written");
  }
  std::vector<std::string> argv;
  for (std::size_t i = 0; i < m.argv.size(); ++i) {
    if (m.argv[i] == "--manifest") {
      ++i;
      continue;
    }
    if (m.argv[i].rfind("--manifest=", 0) == 0) continue;
    argv.push_back(m.argv[i]);
  }
  std::ostringstream fresh;
  const int code = run_cli(argv, fresh, err);
  if (code != kExitOk || check.empty()) {
    out << fresh.str();
    return code;
  }
  const std::string saved = read_file(check);
  bool same = saved == fresh.str();
  if (!same) {
    try {
      same = json::parse(saved).at("result") == json::parse(fresh.str()).at("result");
    } catch (const json::exception&) {
      same = false;
    }
  }
  out << (same ? "reproduced\n" : "MISMATCH\n");
  return same ? kExitOk : kExitDegenerate;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heralded entanglement swapping and teleportation simulator", "heraldsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  detail::Emit emit;
  auto add_emit = [&](CLI::App* sub) {
    sub->add_option("--out", emit.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--manifest", emit.manifest_path, "Also write the run manifest to this file");
  };

  AnalyticArgs an;
  auto* a_cmd = app.add_subcommand("analytic", "Leading-order noise budget and classical bounds");
  a_cmd->add_option("--gamma", an.gamma, "Midpoint source scaling");
  a_cmd->add_option("--eps", an.eps, "Pair probability per source");
  a_cmd->add_option("--eta", an.eta, "Channel efficiency");
  a_cmd->add_option("--sweep", an.sweep, "Channel sweep a:b:n (gamma from --const)");
  a_cmd->add_option("--const", an.constant, "gamma * eps * eta held by sweeps");
  a_cmd->add_flag("--fig1d", an.fig1d, "Sweep over the five reference channel points");
  a_cmd->add_flag("--classical", an.classical, "Cloning-boosted classical rate at --f0 and --eta");
  a_cmd->add_option("--f0", an.f0, "Target fidelity for --classical");
  add_emit(a_cmd);

  SwapArgs sw;
  std::optional<double> sw_eta;
  auto* s_cmd = app.add_subcommand("swap", "Heralded entanglement swapping");
  s_cmd->add_option("file", sw.file, "Circuit file (.qc)");
  s_cmd->add_option("--preset", sw.preset, "fig2, ideal or lab");
  s_cmd->add_flag("--exact", sw.exact, "Exact evaluation only (default)");
  s_cmd->add_option("--mc", sw.mc, "Also sample this many pulses")->check(CLI::PositiveNumber);
  s_cmd->add_option("--seed", sw.seed, "Sampling seed");
  s_cmd->add_option("--eta", sw_eta, "Channel efficiency for the ideal and lab presets");
  s_cmd->add_flag("--same-basis", sw.same_basis, "Read BSM II out like BSM I");
  s_cmd->add_option("--const", sw.constant, "gamma * eps * eta for the fig2 and lab presets");
  add_emit(s_cmd);

  TeleportArgs tp;
  auto* t_cmd = app.add_subcommand("teleport", "Teleportation over the swapped link");
  t_cmd->add_option("file", tp.file, "Circuit file (.qc)");
  t_cmd->add_option("--preset", tp.preset, "ideal or lab");
  t_cmd->add_option("--inputs", tp.inputs, "all, or a comma list of H,V,+,-,R,L");
  t_cmd->add_option("--mc", tp.mc, "Also sample this many pulses per input")->check(CLI::PositiveNumber);
  t_cmd->add_option("--seed", tp.seed, "Sampling seed");
  add_emit(t_cmd);

  std::string replay_file, replay_check;
  auto* r_cmd = app.add_subcommand("replay", "Re-run a saved manifest");
  r_cmd->add_option("manifest", replay_file, "Manifest or JSON output file")->required();
  r_cmd->add_option("--check", replay_check, "Compare with a saved output");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunManifest m;
  m.argv = args;
  m.timestamp = run_timestamp();
  try {
    if (*a_cmd) {
      m.command = "analytic";
      cmd_analytic(an, m, emit, out);
    } else if (*s_cmd) {
      m.command = "swap";
      sw.eta = sw_eta;
      cmd_swap(sw, m, emit, out);
    } else if (*t_cmd) {
      m.command = "teleport";
      cmd_teleport(tp, m, emit, out, err);
    } else if (*r_cmd) {
      return detail::cmd_replay(replay_file, replay_check, out, err);
    }
  } catch (const protocol::DegenerateResult& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitDegenerate;
  } catch (const circuitdsl::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace heraldsim::cli

#endif  // HERALDSIM_TOOLS_CLI_HPP_
