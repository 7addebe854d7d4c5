#include "quadwalk/config.hpp"

#include <fstream>
#include <sstream>

namespace quadwalk {

const JumpMeasure& RunConfig::require_measure() const {
  if (!measure) throw Error("config: no measure block given");
  return *measure;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "config line " << line << ": " << msg;
  throw Error(os.str());
}

double parse_num(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) fail(line, "malformed number '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(line, "malformed number '" + s + "'");
  }
}

int parse_int(const std::string& s, int line) {
  double v = parse_num(s, line);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) fail(line, "expected an integer, got '" + s + "'");
  return i;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool in_measure = false;
  std::vector<std::pair<Offset, double>> entries;
  std::vector<std::pair<Offset, int>> entry_lines;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;

    if (in_measure) {
      if (s == "end") {
        in_measure = false;
        try {
          cfg.measure = JumpMeasure::from_entries(entries);
        } catch (const Error& e) {
          fail(line, e.what());
        }
        continue;
      }
      auto toks = split_ws(s);
      if (toks.size() != 3) fail(line, "measure rows are 'dx dy mass'");
      Offset w{parse_int(toks[0], line), parse_int(toks[1], line)};
      for (const auto& [prev, pl] : entry_lines)
        if (prev == w) fail(line, "duplicate offset (also on line " + std::to_string(pl) + ")");
      entries.push_back({w, parse_num(toks[2], line)});
      entry_lines.push_back({w, line});
      continue;
    }

    if (s == "measure:") {
      in_measure = true;
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    auto toks = split_ws(val);
    auto want = [&](std::size_t n) {
      if (toks.size() != n) fail(line, "key '" + key + "' expects " + std::to_string(n) + " value(s)");
    };

    if (key == "name") {
      want(1);
      cfg.name = toks[0];
    } else if (key == "q") {
      want(2);
      cfg.q = Vec2(parse_num(toks[0], line), parse_num(toks[1], line));
    } else if (key == "radii") {
      if (toks.empty()) continue;  // empty list keeps the documented default
      cfg.radii.clear();
      for (auto& t : toks) cfg.radii.push_back(parse_num(t, line));
      for (std::size_t i = 1; i < cfg.radii.size(); ++i)
        if (cfg.radii[i] <= cfg.radii[i - 1]) fail(line, "radii must be strictly increasing");
    } else if (key == "margin") {
      want(1);
      cfg.margin = parse_int(toks[0], line);
    } else if (key == "delta") {
      want(1);
      cfg.delta = parse_num(toks[0], line);
    } else if (key == "sigma") {
      want(1);
      cfg.sigma = parse_num(toks[0], line);
    } else if (key == "seed") {
      want(1);
      cfg.seed = static_cast<std::uint64_t>(std::stoull(toks[0]));
    } else if (key == "threads") {
      want(1);
      cfg.threads = parse_int(toks[0], line);
    } else if (key == "htol") {
      want(1);
      cfg.htol = parse_num(toks[0], line);
    } else if (key == "window") {
      want(1);
      cfg.window = parse_int(toks[0], line);
    } else if (key == "kind") {
      want(1);
      if (toks[0] != "free" && toks[0] != "quadrant" && toks[0] != "halfplane1" &&
          toks[0] != "halfplane2")
        fail(line, "kind must be free|quadrant|halfplane1|halfplane2");
      cfg.kind = toks[0];
    } else if (key == "twist") {
      want(2);
      cfg.twist = Vec2(parse_num(toks[0], line), parse_num(toks[1], line));
    } else if (key == "z0") {
      want(2);
      cfg.z0 = {parse_int(toks[0], line), parse_int(toks[1], line)};
    } else if (key == "horizon") {
      want(1);
      cfg.horizon = parse_int(toks[0], line);
    } else if (key == "samples") {
      want(1);
      cfg.samples = static_cast<std::uint64_t>(std::stoull(toks[0]));
    } else if (key == "target") {
      want(2);
      cfg.target = {parse_int(toks[0], line), parse_int(toks[1], line)};
    } else if (key == "box") {
      want(4);
      cfg.box = std::vector<int>{parse_int(toks[0], line), parse_int(toks[1], line),
                                 parse_int(toks[2], line), parse_int(toks[3], line)};
    } else if (key == "sweep") {
      want(1);
      cfg.sweep = parse_int(toks[0], line);
    } else if (key == "force_log_domain") {
      want(1);
      if (toks[0] != "true" && toks[0] != "false") fail(line, "expected true|false");
      cfg.force_log_domain = toks[0] == "true";
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  if (in_measure) throw Error("config: measure block not closed with 'end'");
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace quadwalk
