#include "chq/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chq {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Parser {
  std::vector<std::string> errors;

  void fail(int line, const std::string& what) {
    errors.push_back("line " + std::to_string(line) + ": " + what);
  }

  bool as_double(int line, const std::string& key, const std::string& val, double& out) {
    const char* c = val.c_str();
    char* end = nullptr;
    out = std::strtod(c, &end);
    if (end == c || *end != '\0') {
      fail(line, key + ": expected a number, got '" + val + "'");
      return false;
    }
    return true;
  }

  bool as_int(int line, const std::string& key, const std::string& val, int& out) {
    double d;
    if (!as_double(line, key, val, d)) return false;
    if (d != static_cast<double>(static_cast<int>(d))) {
      fail(line, key + ": expected an integer, got '" + val + "'");
      return false;
    }
    out = static_cast<int>(d);
    return true;
  }

  bool as_u64(int line, const std::string& key, const std::string& val, std::uint64_t& out) {
    if (val.empty() || val.find_first_not_of("0123456789") != std::string::npos) {
      fail(line, key + ": expected an unsigned integer, got '" + val + "'");
      return false;
    }
    errno = 0;
    char* end = nullptr;
    out = std::strtoull(val.c_str(), &end, 10);
    if (errno != 0 || *end != '\0') {
      fail(line, key + ": unsigned integer out of range: '" + val + "'");
      return false;
    }
    return true;
  }

  bool as_string(int line, const std::string& key, const std::string& val, std::string& out) {
    if (val.size() < 2 || val.front() != '"' || val.back() != '"') {
      fail(line, key + ": expected a quoted string, got '" + val + "'");
      return false;
    }
    out = val.substr(1, val.size() - 2);
    return true;
  }
};

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xfULL];
    h >>= 4;
  }
  return out;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  cfg.raw_text = text;
  cfg.hash = fnv1a_hex(text);

  Parser P;
  std::string section;
  std::string potential_name = "cosine";
  double pot_c0 = cfg.potential.c0, pot_V0 = cfg.potential.V0;
  std::string profile_name = "quintic";
  std::string fractions_text;
  bool have_fractions = false;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    // Strip a trailing comment when the hash sits outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        P.fail(lineno, "malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "grid" && section != "riesz" &&
          section != "solver" && section != "ansatz" && section != "schedule" &&
          section != "output") {
        P.fail(lineno, "unknown section [" + section + "]");
        section.clear();
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      P.fail(lineno, "expected key = value, got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty()) {
      P.fail(lineno, "key '" + key + "' before any section header");
      continue;
    }

    if (section == "model") {
      if (key == "N") P.as_int(lineno, key, val, cfg.N);
      else if (key == "alpha") P.as_double(lineno, key, val, cfg.alpha);
      else if (key == "p") P.as_double(lineno, key, val, cfg.p);
      else if (key == "potential") P.as_string(lineno, key, val, potential_name);
      else if (key == "c0") P.as_double(lineno, key, val, pot_c0);
      else if (key == "V0") P.as_double(lineno, key, val, pot_V0);
      else P.fail(lineno, "unknown key '" + key + "' in [model]");
    } else if (section == "grid") {
      if (key == "M") P.as_int(lineno, key, val, cfg.M);
      else if (key == "s") P.as_int(lineno, key, val, cfg.s);
      else P.fail(lineno, "unknown key '" + key + "' in [grid]");
    } else if (section == "riesz") {
      if (key == "zero_mode") {
        std::string sv;
        double dv;
        if (!val.empty() && val.front() == '"') {
          if (P.as_string(lineno, key, val, sv)) {
            if (sv == "default" || sv == "matched") cfg.zero_mode = sv;
            else P.fail(lineno, "zero_mode: expected \"default\", \"matched\", or a number");
          }
        } else if (P.as_double(lineno, key, val, dv)) {
          cfg.zero_mode = val;
        }
      } else {
        P.fail(lineno, "unknown key '" + key + "' in [riesz]");
      }
    } else if (section == "solver") {
      if (key == "max_newton_iters") P.as_int(lineno, key, val, cfg.solver.max_newton_iters);
      else if (key == "residual_tol") P.as_double(lineno, key, val, cfg.solver.residual_tol);
      else if (key == "krylov_tol") P.as_double(lineno, key, val, cfg.solver.krylov_tol);
      else if (key == "krylov_max_iters") P.as_int(lineno, key, val, cfg.solver.krylov_max_iters);
      else if (key == "max_backtrack") P.as_int(lineno, key, val, cfg.solver.max_backtrack);
      else if (key == "max_amplitude") P.as_double(lineno, key, val, cfg.solver.max_amplitude);
      else P.fail(lineno, "unknown key '" + key + "' in [solver]");
    } else if (section == "ansatz") {
      if (key == "profile") P.as_string(lineno, key, val, profile_name);
      else if (key == "r1") P.as_double(lineno, key, val, cfg.cutoff.r1);
      else if (key == "r2") P.as_double(lineno, key, val, cfg.cutoff.r2);
      else P.fail(lineno, "unknown key '" + key + "' in [ansatz]");
    } else if (section == "schedule") {
      if (key == "fractions") {
        if (P.as_string(lineno, key, val, fractions_text)) have_fractions = true;
      } else {
        P.fail(lineno, "unknown key '" + key + "' in [schedule]");
      }
    } else if (section == "output") {
      if (key == "dir") P.as_string(lineno, key, val, cfg.out_dir);
      else if (key == "seed") P.as_u64(lineno, key, val, cfg.seed);
      else P.fail(lineno, "unknown key '" + key + "' in [output]");
    }
  }

  if (potential_name == "zero") {
    cfg.potential = PotentialSpec::zero();
  } else if (potential_name == "cosine") {
    cfg.potential = PotentialSpec::cosine(pot_c0, pot_V0);
  } else {
    P.errors.push_back("potential: expected \"zero\" or \"cosine\", got '" + potential_name +
                       "'");
  }
  if (profile_name == "quintic") {
    cfg.cutoff.profile = CutoffSpec::Profile::quintic;
  } else if (profile_name == "bump") {
    cfg.cutoff.profile = CutoffSpec::Profile::bump;
  } else {
    P.errors.push_back("profile: expected \"quintic\" or \"bump\", got '" + profile_name + "'");
  }
  if (have_fractions) {
    cfg.schedule_fractions.clear();
    std::istringstream fs(fractions_text);
    std::string tok;
    while (fs >> tok) {
      const char* c = tok.c_str();
      char* end = nullptr;
      const double f = std::strtod(c, &end);
      if (end == c || *end != '\0') {
        P.errors.push_back("fractions: expected numbers separated by spaces, got '" + tok + "'");
        break;
      }
      cfg.schedule_fractions.push_back(f);
    }
    if (cfg.schedule_fractions.empty())
      P.errors.push_back("fractions: the schedule must contain at least one value");
  }
  for (double f : cfg.schedule_fractions) {
    if (!(f > 0.0) || !(f < 1.0)) {
      P.errors.push_back("fractions: gap fractions must lie strictly inside (0, 1)");
      break;
    }
  }

  // Structural validation; every violation is reported.
  try {
    make_grid(cfg.N, cfg.M, cfg.s);
  } catch (const std::exception& e) {
    P.errors.push_back(e.what());
  }
  if (!(cfg.alpha > 0.0) || !(cfg.alpha < static_cast<double>(cfg.N)))
    P.errors.push_back("alpha out of range (0, N)");
  else {
    NonlocalParams np;
    np.p = cfg.p;
    np.alpha = cfg.alpha;
    if (!(cfg.p > np.p_low(cfg.N)) || !(cfg.p < np.p_high(cfg.N)))
      P.errors.push_back("p out of admissible range");
  }
  if (cfg.zero_mode != "default" && cfg.zero_mode != "matched") {
    const char* c = cfg.zero_mode.c_str();
    char* end = nullptr;
    std::strtod(c, &end);
    if (end == c || *end != '\0')
      P.errors.push_back("zero_mode: expected \"default\", \"matched\", or a number");
  }
  try {
    validate_solver_options(cfg.solver);
  } catch (const std::exception& e) {
    P.errors.push_back(e.what());
  }
  if (!(cfg.cutoff.r1 > 0.0) || !(cfg.cutoff.r2 > cfg.cutoff.r1))
    P.errors.push_back("cutoff radii must satisfy 0 < r1 < r2");

  if (!P.errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : P.errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

TorusGrid config_grid(const RunConfig& c) { return make_grid(c.N, c.M, c.s); }

Field config_potential(const RunConfig& c) {
  return sample_potential(c.potential, config_grid(c));
}

RieszParams config_riesz(const RunConfig& c) {
  RieszParams rp;
  rp.alpha = c.alpha;
  const TorusGrid g = config_grid(c);
  if (c.zero_mode == "default") {
    rp.zero_mode = default_zero_mode(c.alpha, g);
  } else if (c.zero_mode == "matched") {
    rp.zero_mode = matched_zero_mode(c.alpha, g);
  } else {
    rp.zero_mode = std::strtod(c.zero_mode.c_str(), nullptr);
  }
  return rp;
}

NonlocalParams config_nonlocal(const RunConfig& c) {
  NonlocalParams np;
  np.p = c.p;
  np.alpha = c.alpha;
  return np;
}

}  // namespace chq
