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

#ifndef HERALDSIM_CIRCUITDSL_HPP_
#define HERALDSIM_CIRCUITDSL_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "heraldsim/circuit.hpp"
#include "heraldsim/fock.hpp"

// Line-oriented circuit description, one statement per line, '#' comments:
//
//   modes N
//   source a b epsilon=E [gamma=G] [nmax=N] [pairs=K] [state=phi+|phi-|psi+|psi-]
//   hwp m angle=DEG            qwp m angle=DEG
//   phase m phi=RAD pol=H|V
//   pbs a b                    cpbs a b
//   loss m eta=X
//   distinguish m visibility=V
//   detector m eff=X [dark=Y] [pol=H|V]
//   herald group:outcome = clicks(d1, d2, ...)
//   param key=value [key=value ...]

namespace heraldsim::circuitdsl {

/// First offending location in the input. Line and column are 1-based and
/// always point at a byte of the text.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, std::string token, std::string message, std::string suggestion = {})
      : std::runtime_error(format(line, column, message, suggestion)),
        line_(line),
        column_(column),
        token_(std::move(token)),
        message_(std::move(message)),
        suggestion_(std::move(suggestion)) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& token() const { return token_; }
  const std::string& message() const { return message_; }
  const std::string& suggestion() const { return suggestion_; }

 private:
  static std::string format(int line, int column, const std::string& message, const std::string& suggestion) {
    std::string s = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    if (!suggestion.empty()) s += " (did you mean '" + suggestion + "'?)";
    return s;
  }

  int line_;
  int column_;
  std::string token_;
  std::string message_;
  std::string suggestion_;
};

namespace detail {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
         c == '+' || c == '-' || c == ':';
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Closest candidate within edit distance 2, or empty.
inline std::string closest(std::string_view word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = 3;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

class LineParser {
 public:
  LineParser(int line_no, std::string_view line) : line_(line_no) { tokenize(line); }

  bool empty() const { return tokens_.empty(); }
  const Token& keyword() const { return tokens_.front(); }

  [[noreturn]] void fail(const Token& t, const std::string& message, std::string suggestion = {}) const {
    throw ParseError(line_, t.column, t.text, message, std::move(suggestion));
  }

  // Next token, or an error at the last token of the line naming what was expected.
  const Token& next(const std::string& expected) {
    if (pos_ >= tokens_.size()) fail(tokens_.back(), "expected " + expected);
    return tokens_[pos_++];
  }
  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }

  void expect(const std::string& symbol) {
    const Token& t = next("'" + symbol + "'");
    if (t.text != symbol) fail(t, "expected '" + symbol + "'");
  }

  int integer(const Token& t, const std::string& what) const {
    int v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size()) fail(t, what + " must be an integer");
    return v;
  }

  double number(const Token& t, const std::string& what) const {
    double v = 0.0;
    const char* begin = t.text.data();
    const char* end = begin + t.text.size();
    if (begin != end && *begin == '+') ++begin;
    auto [p, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) fail(t, what + " must be a finite number");
    return v;
  }

  int mode(const Token& t, int declared) const {
    const int m = integer(t, "mode");
    if (m < 1 || m > declared) fail(t, "mode " + t.text + " is not declared (modes 1.." + std::to_string(declared) + ")");
    return m;
  }

  // key=value pairs until the end of the line, checked against `allowed`.
  std::map<std::string, Token> options(const std::vector<std::string>& allowed, bool any_key = false) {
    std::map<std::string, Token> out;
    while (!done()) {
      const Token& key = next("key=value");
      if (!any_key && std::find(allowed.begin(), allowed.end(), key.text) == allowed.end()) {
        fail(key, "unknown key '" + key.text + "' for " + keyword().text, closest(key.text, allowed));
      }
      if (key.text == "=" || key.text == "(" || key.text == ")" || key.text == ",") fail(key, "expected a key");
      expect("=");
      const Token& value = next("a value for " + key.text);
      if (!is_word_char(value.text.front())) fail(value, "expected a value for " + key.text);
      if (!out.emplace(key.text, value).second) fail(key, "duplicate key '" + key.text + "'");
    }
    return out;
  }

  const Token& required(const std::map<std::string, Token>& opts, const std::string& key) const {
    auto it = opts.find(key);
    if (it == opts.end()) fail(keyword(), keyword().text + " needs " + key + "=");
    return it->second;
  }

  double in_range(const Token& t, const std::string& key, double lo, double hi, bool lo_open, bool hi_open) const {
    const double v = number(t, key);
    const bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
    if (!ok) {
      std::ostringstream range;
      range << (lo_open ? "(" : "[") << lo << ", " << hi << (hi_open ? ")" : "]");
      fail(t, key + " = " + t.text + " is outside " + range.str());
    }
    return v;
  }

 private:
  void tokenize(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == '#') break;
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        continue;
      }
      if (c == '=' || c == '(' || c == ')' || c == ',') {
        tokens_.push_back({std::string(1, c), static_cast<int>(i) + 1});
        ++i;
        continue;
      }
      if (!is_word_char(c)) {
        throw ParseError(line_, static_cast<int>(i) + 1, std::string(1, c), "unexpected character");
      }
      const std::size_t start = i;
      while (i < line.size() && is_word_char(line[i])) ++i;
      tokens_.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
    }
  }

  int line_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

inline const std::vector<std::string>& keywords() {
  static const std::vector<std::string> k = {"modes", "source", "hwp",      "qwp",    "phase", "pbs",
                                             "cpbs",  "loss",   "distinguish", "detector", "herald", "param"};
  return k;
}

inline Pol parse_pol(const LineParser& lp, const Token& t) {
  if (t.text == "H") return Pol::H;
  if (t.text == "V") return Pol::V;
  lp.fail(t, "pol must be H or V");
}

}  // namespace detail

/// Parses circuit text. Throws ParseError at the first problem; structural
/// checks across statements are left to circuit::validate.
inline circuit::CircuitSpec parse(std::string_view text) {
  using detail::LineParser;
  using detail::Token;
  circuit::CircuitSpec spec;
  std::set<std::string> detector_labels;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    LineParser lp(line_no, line);
    if (lp.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const Token& kw = lp.next("a statement");
    const std::string& k = kw.text;
    if (std::find(detail::keywords().begin(), detail::keywords().end(), k) == detail::keywords().end()) {
      lp.fail(kw, "unknown statement '" + k + "'", detail::closest(k, detail::keywords()));
    }
    if (k == "modes") {
      if (spec.modes != 0) lp.fail(kw, "modes declared twice");
      const Token& n = lp.next("the number of spatial modes");
      spec.modes = lp.integer(n, "modes");
      if (spec.modes < 1 || spec.modes > 32) lp.fail(n, "modes must lie in [1, 32]");
      if (!lp.done()) lp.fail(lp.peek(), "unexpected token after modes");
    } else if (spec.modes == 0) {
      lp.fail(kw, "declare 'modes N' before other statements");
    } else if (k == "source") {
      circuit::Source s;
      s.a = lp.mode(lp.next("two modes"), spec.modes);
      s.b = lp.mode(lp.next("two modes"), spec.modes);
      auto o = lp.options({"epsilon", "gamma", "nmax", "pairs", "state"});
      s.epsilon = lp.in_range(lp.required(o, "epsilon"), "epsilon", 0.0, 0.25, true, true);
      if (o.count("gamma")) s.gamma = lp.in_range(o.at("gamma"), "gamma", 0.0, 1.0, false, false);
      if (o.count("nmax")) {
        s.n_max = lp.integer(o.at("nmax"), "nmax");
        if (s.n_max < 1 || s.n_max > 3) lp.fail(o.at("nmax"), "nmax must be 1, 2 or 3");
      }
      if (o.count("pairs")) {
        s.pairs = lp.integer(o.at("pairs"), "pairs");
        if (*s.pairs < 0 || *s.pairs > s.n_max) lp.fail(o.at("pairs"), "pairs must lie in [0, nmax]");
      }
      if (o.count("state")) {
        auto b = parse_bell(o.at("state").text);
        if (!b) lp.fail(o.at("state"), "state must be phi+, phi-, psi+ or psi-");
        s.state = *b;
      }
      if (s.a == s.b) lp.fail(kw, "source needs two different modes");
      spec.elements.push_back(s);
    } else if (k == "hwp" || k == "qwp") {
      const int m = lp.mode(lp.next("a mode"), spec.modes);
      auto o = lp.options({"angle"});
      const double angle = lp.number(lp.required(o, "angle"), "angle");
      if (k == "hwp") {
        spec.elements.push_back(circuit::Hwp{m, angle});
      } else {
        spec.elements.push_back(circuit::Qwp{m, angle});
      }
    } else if (k == "phase") {
      const int m = lp.mode(lp.next("a mode"), spec.modes);
      auto o = lp.options({"phi", "pol"});
      const double phi = lp.number(lp.required(o, "phi"), "phi");
      spec.elements.push_back(circuit::Phase{m, detail::parse_pol(lp, lp.required(o, "pol")), phi});
    } else if (k == "pbs" || k == "cpbs") {
      const int a = lp.mode(lp.next("two modes"), spec.modes);
      const Token& tb = lp.next("two modes");
      const int b = lp.mode(tb, spec.modes);
      if (a == b) lp.fail(tb, k + " needs two different modes");
      if (!lp.done()) lp.fail(lp.peek(), "unexpected token after " + k);
      if (k == "pbs") {
        spec.elements.push_back(circuit::Pbs{a, b});
      } else {
        spec.elements.push_back(circuit::Cpbs{a, b});
      }
    } else if (k == "loss") {
      const int m = lp.mode(lp.next("a mode"), spec.modes);
      auto o = lp.options({"eta"});
      spec.elements.push_back(circuit::Loss{m, lp.in_range(lp.required(o, "eta"), "eta", 0.0, 1.0, false, false)});
    } else if (k == "distinguish") {
      const int m = lp.mode(lp.next("a mode"), spec.modes);
      auto o = lp.options({"visibility"});
      spec.elements.push_back(
          circuit::Distinguish{m, lp.in_range(lp.required(o, "visibility"), "visibility", 0.0, 1.0, false, false)});
    } else if (k == "detector") {
      const Token& tm = lp.next("a mode");
      circuit::Detector d;
      d.mode = lp.mode(tm, spec.modes);
      auto o = lp.options({"dark", "eff", "pol"});
      d.efficiency = lp.in_range(lp.required(o, "eff"), "eff", 0.0, 1.0, false, false);
      if (o.count("dark")) d.dark = lp.in_range(o.at("dark"), "dark", 0.0, 1.0, false, true);
      if (o.count("pol")) d.pol = detail::parse_pol(lp, o.at("pol"));
      if (!detector_labels.insert(d.label()).second) lp.fail(tm, "detector " + d.label() + " declared twice");
      spec.detectors.push_back(d);
    } else if (k == "herald") {
      const Token& name = lp.next("a herald name");
      if (!detail::is_word_char(name.text.front())) lp.fail(name, "expected a herald name");
      lp.expect("=");
      const Token& fn = lp.next("clicks(...)");
      if (fn.text != "clicks") lp.fail(fn, "expected clicks(...)", detail::closest(fn.text, {"clicks"}));
      lp.expect("(");
      circuit::Herald h{name.text, {}};
      const std::vector<std::string> known(detector_labels.begin(), detector_labels.end());
      while (true) {
        const Token& d = lp.next("a detector label");
        if (!detail::is_word_char(d.text.front())) lp.fail(d, "expected a detector label");
        if (!detector_labels.count(d.text)) lp.fail(d, "unknown detector " + d.text, detail::closest(d.text, known));
        if (std::find(h.clicks.begin(), h.clicks.end(), d.text) != h.clicks.end()) {
          lp.fail(d, "detector " + d.text + " listed twice");
        }
        h.clicks.push_back(d.text);
        const Token& sep = lp.next("',' or ')'");
        if (sep.text == ")") break;
        if (sep.text != ",") lp.fail(sep, "expected ',' or ')'");
      }
      if (!lp.done()) lp.fail(lp.peek(), "unexpected token after herald");
      spec.heralds.push_back(std::move(h));
    } else if (k == "param") {
      if (lp.done()) lp.fail(kw, "param needs key=value");
      for (const auto& [key, tok] : lp.options({}, true)) {
        if (!spec.params.emplace(key, lp.number(tok, key)).second) lp.fail(tok, "param " + key + " set twice");
      }
    }
    if (end == text.size()) break;
  }
  return spec;
}

inline circuit::CircuitSpec parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

/// Canonical text: one statement per line, single spaces, keys sorted,
/// shortest round-trip numbers, defaults written out.
inline std::string serialize(const circuit::CircuitSpec& spec) {
  using ::heraldsim::detail::format_double;
  std::string out = "modes " + std::to_string(spec.modes) + "\n";
  for (const auto& e : spec.elements) {
    out += std::visit(
        [&](const auto& x) -> std::string {
          using T = std::decay_t<decltype(x)>;
          using namespace circuit;
          if constexpr (std::is_same_v<T, Source>) {
            std::string s = "source " + std::to_string(x.a) + " " + std::to_string(x.b) +
                            " epsilon=" + format_double(x.epsilon) + " gamma=" + format_double(x.gamma) +
                            " nmax=" + std::to_string(x.n_max);
            if (x.pairs) s += " pairs=" + std::to_string(*x.pairs);
            return s + " state=" + bell_name(x.state);
          } else if constexpr (std::is_same_v<T, Hwp>) {
            return "hwp " + std::to_string(x.mode) + " angle=" + format_double(x.angle_deg);
          } else if constexpr (std::is_same_v<T, Qwp>) {
            return "qwp " + std::to_string(x.mode) + " angle=" + format_double(x.angle_deg);
          } else if constexpr (std::is_same_v<T, Phase>) {
            return "phase " + std::to_string(x.mode) + " phi=" + format_double(x.phi) + " pol=" + pol_char(x.pol);
          } else if constexpr (std::is_same_v<T, Pbs>) {
            return "pbs " + std::to_string(x.a) + " " + std::to_string(x.b);
          } else if constexpr (std::is_same_v<T, Cpbs>) {
            return "cpbs " + std::to_string(x.a) + " " + std::to_string(x.b);
          } else if constexpr (std::is_same_v<T, Loss>) {
            return "loss " + std::to_string(x.mode) + " eta=" + format_double(x.eta);
          } else {
            return "distinguish " + std::to_string(x.mode) + " visibility=" + format_double(x.visibility);
          }
        },
        e);
    out += "\n";
  }
  for (const auto& d : spec.detectors) {
    out += "detector " + std::to_string(d.mode) + " dark=" + format_double(d.dark) + " eff=" + format_double(d.efficiency);
    if (d.pol) out += std::string(" pol=") + pol_char(*d.pol);
    out += "\n";
  }
  for (const auto& h : spec.heralds) {
    out += "herald " + h.name + " = clicks(";
    for (std::size_t i = 0; i < h.clicks.size(); ++i) out += (i ? "," : "") + h.clicks[i];
    out += ")\n";
  }
  for (const auto& [k, v] : spec.params) out += "param " + k + "=" + format_double(v) + "\n";
  return out;
}

}  // namespace heraldsim::circuitdsl

#endif  // HERALDSIM_CIRCUITDSL_HPP_
