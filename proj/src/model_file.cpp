#include "qpbound/model_file.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace qpb {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, int line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end)
    throw ParseError("line " + std::to_string(line) + ": '" + s + "' is not a number");
  return v;
}

int to_int(const std::string& s, int line) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end)
    throw ParseError("line " + std::to_string(line) + ": '" + s + "' is not an integer");
  return v;
}

bool to_bool(const std::string& s, int line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParseError("line " + std::to_string(line) + ": '" + s + "' is not a boolean");
}

}  // namespace

ModelSpec parse_model(const std::string& text) {
  std::array<RateTable, 4> tables{};  // interior, horizontal, vertical, origin
  const std::array<Component, 4> components{Component::Interior, Component::Horizontal,
                                            Component::Vertical, Component::Origin};
  double gamma = 0.0;
  std::vector<GeometricTerm> terms;
  bool normalize_terms = true;
  std::optional<double> h10, v01;
  bool auto_threshold = false;

  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError("line " + std::to_string(line) + ": bad section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (section != "interior" && section != "horizontal" && section != "vertical" &&
          section != "origin" && section != "pi" && section != "perturb")
        throw ParseError("line " + std::to_string(line) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));

    if (section.empty()) {
      if (key != "gamma") throw ParseError("line " + std::to_string(line) + ": unknown key " + key);
      gamma = to_double(value, line);
    } else if (section == "pi") {
      if (key == "term") {
        const auto parts = split(value, ',');
        if (parts.size() != 3)
          throw ParseError("line " + std::to_string(line) + ": term needs rho, sigma, weight");
        terms.push_back({to_double(parts[0], line), to_double(parts[1], line),
                         to_double(parts[2], line)});
      } else if (key == "normalize") {
        normalize_terms = to_bool(value, line);
      } else {
        throw ParseError("line " + std::to_string(line) + ": unknown key " + key);
      }
    } else if (section == "perturb") {
      if (key == "h_bar_10") h10 = to_double(value, line);
      else if (key == "v_bar_01") v01 = to_double(value, line);
      else if (key == "auto_threshold") auto_threshold = to_bool(value, line);
      else throw ParseError("line " + std::to_string(line) + ": unknown key " + key);
    } else {
      const auto ij = split(key, ',');
      if (ij.size() != 2) throw ParseError("line " + std::to_string(line) + ": expected i,j = rate");
      const Direction d{to_int(ij[0], line), to_int(ij[1], line)};
      const std::size_t slot = section == "interior" ? 0 : section == "horizontal" ? 1
                               : section == "vertical" ? 2 : 3;
      if (!in_neighborhood(components[slot], d))
        throw ParseError("line " + std::to_string(line) + ": direction " + ij[0] + "," + ij[1] +
                         " is not allowed in [" + section + "]");
      tables[slot].set(d, to_double(value, line));
    }
  }
  return ModelSpec{RandomWalk(tables[0], tables[1], tables[2], tables[3], gamma),
                   std::move(terms), normalize_terms, h10, v01, auto_threshold};
}

ModelSpec load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open model file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_model(ss.str());
}

}  // namespace qpb
