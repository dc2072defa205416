#include "resample_es/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace resample_es {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto result = std::from_chars(first, last, out);
  return result.ec == std::errc{} && result.ptr == last;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t start = 0;
  const auto is_sep = [](char c) {
    return c == ' ' || c == '\t' || c == ',';
  };
  while (start < s.size()) {
    while (start < s.size() && is_sep(s[start])) ++start;
    std::size_t end = start;
    while (end < s.size() && !is_sep(s[end])) ++end;
    if (end > start) tokens.push_back(s.substr(start, end - start));
    start = end;
  }
  return tokens;
}

bool parse_real_list(std::string_view s, std::vector<double>& out) {
  out.clear();
  for (const std::string_view token : split_list(s)) {
    double v = 0.0;
    if (!parse_number(token, v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

bool parse_int_list(std::string_view s, std::vector<int>& out) {
  out.clear();
  for (const std::string_view token : split_list(s)) {
    int v = 0;
    if (!parse_number(token, v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

// Applies one key to the config; returns an error message or empty.
std::string apply_kv(ExperimentConfig& cfg, std::string_view section,
                     std::string_view key, std::string_view value) {
  const auto bad_value = [&] {
    std::ostringstream out;
    out << "invalid value '" << value << "' for " << section << "." << key;
    return out.str();
  };
  if (section == "problem") {
    ProblemSpec& p = cfg.problem;
    if (key == "d") return parse_number(value, p.d) ? "" : bad_value();
    if (key == "p") return parse_number(value, p.p) ? "" : bad_value();
    if (key == "z") return parse_number(value, p.z) ? "" : bad_value();
    if (key == "noise") {
      if (value == "gaussian") {
        p.noise = NoiseKind::gaussian;
      } else if (value == "zero") {
        p.noise = NoiseKind::zero;
      } else if (value == "uniform") {
        p.noise = NoiseKind::uniform;
      } else if (value.rfind("uniform:", 0) == 0) {
        p.noise = NoiseKind::uniform;
        if (!parse_number(value.substr(8), p.uniform_halfwidth)) {
          return bad_value();
        }
      } else {
        return bad_value();
      }
      return "";
    }
    if (key == "optimum") {
      if (value == "origin") {
        p.optimum.clear();
        return "";
      }
      return parse_real_list(value, p.optimum) ? "" : bad_value();
    }
  } else if (section == "strategy") {
    StrategyConfig& s = cfg.strategy;
    if (key == "mu") return parse_number(value, s.mu) ? "" : bad_value();
    if (key == "lambda") {
      return parse_number(value, s.lambda) ? "" : bad_value();
    }
    if (key == "resamplings") {
      return parse_number(value, s.resamplings) ? "" : bad_value();
    }
    if (key == "sigma0") {
      return parse_number(value, s.sigma0) ? "" : bad_value();
    }
    if (key == "tau") {
      if (value == "default") {
        s.tau.reset();
        return "";
      }
      double v = 0.0;
      if (!parse_number(value, v)) return bad_value();
      s.tau = v;
      return "";
    }
    if (key == "budget") {
      return parse_number(value, s.budget) ? "" : bad_value();
    }
    if (key == "init") {
      if (value == "unit-vector") {
        s.x0.clear();
        s.x0_scale = 1.0;
        return "";
      }
      if (value.rfind("unit-vector:", 0) == 0) {
        double scale = 0.0;
        if (!parse_number(value.substr(12), scale)) return bad_value();
        s.x0.clear();
        s.x0_scale = scale;
        return "";
      }
      return parse_real_list(value, s.x0) ? "" : bad_value();
    }
  } else if (section == "experiment") {
    if (key == "runs") return parse_number(value, cfg.runs) ? "" : bad_value();
    if (key == "seed") return parse_number(value, cfg.seed) ? "" : bad_value();
    if (key == "y_sweep") {
      if (value == "none") {
        cfg.y_sweep.clear();
        return "";
      }
      return parse_int_list(value, cfg.y_sweep) ? "" : bad_value();
    }
    if (key == "jobs") return parse_number(value, cfg.jobs) ? "" : bad_value();
    if (key == "out_dir") {
      cfg.out_dir = std::string(value);
      return "";
    }
  } else if (section == "probe") {
    ProbeConfig& pr = cfg.probe;
    if (key == "gamma") {
      return parse_number(value, pr.gamma) ? "" : bad_value();
    }
    if (key == "delta0") {
      return parse_number(value, pr.delta0) ? "" : bad_value();
    }
    if (key == "trials") {
      return parse_number(value, pr.trials) ? "" : bad_value();
    }
    if (key == "iterations") {
      return parse_int_list(value, pr.iterations) ? "" : bad_value();
    }
    if (key == "source") {
      if (value == "synthetic") {
        pr.source = StateSource::synthetic;
      } else if (value == "replay") {
        pr.source = StateSource::replay;
      } else {
        return bad_value();
      }
      return "";
    }
    if (key == "alpha") {
      return parse_number(value, pr.alpha) ? "" : bad_value();
    }
    if (key == "alpha_prime") {
      return parse_number(value, pr.alpha_prime) ? "" : bad_value();
    }
    if (key == "scale_c") {
      return parse_number(value, pr.scale_c) ? "" : bad_value();
    }
    if (key == "scale_v") {
      return parse_number(value, pr.scale_v) ? "" : bad_value();
    }
    if (key == "trace") {
      pr.trace = std::string(value);
      return "";
    }
  } else {
    std::ostringstream out;
    out << "unknown section [" << section << "]";
    return out.str();
  }
  std::ostringstream out;
  out << "unknown key '" << key << "' in [" << section << "]";
  return out.str();
}

}  // namespace

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  for (const std::string& e : problem.validate()) {
    errors.push_back("problem: " + e);
  }
  for (const std::string& e : strategy.validate(problem)) {
    errors.push_back("strategy: " + e);
  }
  for (const std::string& e : probe.validate()) {
    errors.push_back("probe: " + e);
  }
  if (runs < 1) errors.push_back("experiment: runs must be at least 1");
  for (const int y : y_sweep) {
    if (y < 1) {
      errors.push_back("experiment: y_sweep entries must be at least 1");
      break;
    }
  }
  if (jobs < 0) errors.push_back("experiment: jobs must be non-negative");
  return errors;
}

ExperimentConfig default_experiment() { return ExperimentConfig{}; }

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  std::string section;
  bool section_known = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto fail = [&](const std::string& message) {
      std::ostringstream out;
      out << "line " << line_no << ": " << message;
      errors.push_back(out.str());
    };
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail("malformed section header");
        section_known = false;
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      section_known = section == "problem" || section == "strategy" ||
                      section == "experiment" || section == "probe";
      if (!section_known) fail("unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail("expected key = value");
      continue;
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) {
      fail("key outside any section");
      continue;
    }
    // Keys under an unknown section are skipped: the header already failed.
    if (!section_known) continue;
    const std::string error = apply_kv(cfg, section, key, value);
    if (!error.empty()) fail(error);
  }
  if (!errors.empty()) {
    std::ostringstream out;
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (i > 0) out << "; ";
      out << errors[i];
    }
    throw std::invalid_argument(out.str());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[problem]\n";
  out << "d = " << cfg.problem.d << "\n";
  out << "p = " << cfg.problem.p << "\n";
  out << "z = " << format_double(cfg.problem.z) << "\n";
  if (cfg.problem.noise == NoiseKind::uniform) {
    out << "noise = uniform:" << format_double(cfg.problem.uniform_halfwidth)
        << "\n";
  } else {
    out << "noise = " << to_string(cfg.problem.noise) << "\n";
  }
  out << "optimum = ";
  if (cfg.problem.optimum.empty()) {
    out << "origin";
  } else {
    for (std::size_t i = 0; i < cfg.problem.optimum.size(); ++i) {
      if (i > 0) out << " ";
      out << format_double(cfg.problem.optimum[i]);
    }
  }
  out << "\n\n[strategy]\n";
  out << "mu = " << cfg.strategy.mu << "\n";
  out << "lambda = " << cfg.strategy.lambda << "\n";
  out << "resamplings = " << cfg.strategy.resamplings << "\n";
  out << "sigma0 = " << format_double(cfg.strategy.sigma0) << "\n";
  out << "tau = "
      << (cfg.strategy.tau ? format_double(*cfg.strategy.tau) : "default")
      << "\n";
  out << "budget = " << cfg.strategy.budget << "\n";
  out << "init = ";
  if (cfg.strategy.x0.empty()) {
    if (cfg.strategy.x0_scale == 1.0) {
      out << "unit-vector";
    } else {
      out << "unit-vector:" << format_double(cfg.strategy.x0_scale);
    }
  } else {
    for (std::size_t i = 0; i < cfg.strategy.x0.size(); ++i) {
      if (i > 0) out << " ";
      out << format_double(cfg.strategy.x0[i]);
    }
  }
  out << "\n\n[experiment]\n";
  out << "runs = " << cfg.runs << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "y_sweep = ";
  if (cfg.y_sweep.empty()) {
    out << "none";
  } else {
    for (std::size_t i = 0; i < cfg.y_sweep.size(); ++i) {
      if (i > 0) out << " ";
      out << cfg.y_sweep[i];
    }
  }
  out << "\n";
  out << "jobs = " << cfg.jobs << "\n";
  out << "out_dir = " << cfg.out_dir << "\n";
  out << "\n[probe]\n";
  out << "gamma = " << format_double(cfg.probe.gamma) << "\n";
  out << "delta0 = " << format_double(cfg.probe.delta0) << "\n";
  out << "trials = " << cfg.probe.trials << "\n";
  out << "iterations = ";
  for (std::size_t i = 0; i < cfg.probe.iterations.size(); ++i) {
    if (i > 0) out << " ";
    out << cfg.probe.iterations[i];
  }
  out << "\n";
  out << "source = "
      << (cfg.probe.source == StateSource::synthetic ? "synthetic" : "replay")
      << "\n";
  out << "alpha = " << format_double(cfg.probe.alpha) << "\n";
  out << "alpha_prime = " << format_double(cfg.probe.alpha_prime) << "\n";
  out << "scale_c = " << format_double(cfg.probe.scale_c) << "\n";
  out << "scale_v = " << format_double(cfg.probe.scale_v) << "\n";
  out << "trace = " << cfg.probe.trace << "\n";
  return out.str();
}

void apply_override(ExperimentConfig& cfg, std::string_view dotted_key,
                    std::string_view value) {
  const std::size_t dot = dotted_key.find('.');
  if (dot == std::string_view::npos || dot == 0 ||
      dot + 1 == dotted_key.size()) {
    throw std::invalid_argument("override key must look like section.key: '" +
                                std::string(dotted_key) + "'");
  }
  const std::string_view section = trim(dotted_key.substr(0, dot));
  const std::string_view key = trim(dotted_key.substr(dot + 1));
  const std::string error = apply_kv(cfg, section, key, trim(value));
  if (!error.empty()) throw std::invalid_argument(error);
}

}  // namespace resample_es
