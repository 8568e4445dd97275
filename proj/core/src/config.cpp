#include "sentdoc/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sentdoc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

[[noreturn]] void bad(std::size_t line_no, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line_no) + ": " +
                              what);
}

std::uint64_t parse_u64(const std::string& v, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(v, &used);
    if (used != v.size()) bad(line_no, "trailing characters in '" + v + "'");
    return out;
  } catch (const std::invalid_argument&) {
    bad(line_no, "expected an unsigned integer, got '" + v + "'");
  } catch (const std::out_of_range&) {
    bad(line_no, "integer out of range: '" + v + "'");
  }
}

double parse_real(const std::string& v, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) bad(line_no, "trailing characters in '" + v + "'");
    return out;
  } catch (const std::invalid_argument&) {
    bad(line_no, "expected a number, got '" + v + "'");
  } catch (const std::out_of_range&) {
    bad(line_no, "number out of range: '" + v + "'");
  }
}

bool parse_bool(const std::string& v, std::size_t line_no) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(line_no, "expected true/false, got '" + v + "'");
}

}  // namespace

void TrainingConfig::validate() const {
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("config: alpha must lie in [0,1]");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("config: learning_rate must be > 0");
  if (docs_per_step < 1)
    throw std::invalid_argument("config: docs_per_step must be >= 1");
  if (precision != 32 && precision != 64)
    throw std::invalid_argument("config: precision must be 32 or 64");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw std::invalid_argument("config: dropout_rate must lie in [0,1)");
}

TrainingConfig parse_config_text(const std::string& text) {
  TrainingConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) bad(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) bad(line_no, "empty key");
    if (value.empty()) bad(line_no, "empty value for key '" + key + "'");

    if (key == "k") {
      c.k = parse_u64(value, line_no);
    } else if (key == "r") {
      c.r = parse_u64(value, line_no);
    } else if (key == "alpha") {
      c.alpha = parse_real(value, line_no);
    } else if (key == "epochs") {
      c.epochs = parse_u64(value, line_no);
    } else if (key == "learning_rate") {
      c.learning_rate = parse_real(value, line_no);
    } else if (key == "optimizer") {
      if (value == "sgd") {
        c.optimizer = OptimizerKind::sgd;
      } else if (value == "adam") {
        c.optimizer = OptimizerKind::adam;
      } else {
        bad(line_no, "optimizer must be sgd or adam, got '" + value + "'");
      }
    } else if (key == "adam_beta1") {
      c.adam_beta1 = parse_real(value, line_no);
    } else if (key == "adam_beta2") {
      c.adam_beta2 = parse_real(value, line_no);
    } else if (key == "adam_eps") {
      c.adam_eps = parse_real(value, line_no);
    } else if (key == "docs_per_step") {
      c.docs_per_step = parse_u64(value, line_no);
    } else if (key == "seed") {
      c.seed = parse_u64(value, line_no);
    } else if (key == "loss_form") {
      if (value == "standard") {
        c.loss_form = LossForm::standard;
      } else if (value == "literal") {
        c.loss_form = LossForm::literal;
      } else {
        bad(line_no, "loss_form must be standard or literal, got '" + value +
                         "'");
      }
    } else if (key == "precision") {
      c.precision = static_cast<int>(parse_u64(value, line_no));
    } else if (key == "deterministic") {
      c.deterministic = parse_bool(value, line_no);
    } else if (key == "threads") {
      c.threads = parse_u64(value, line_no);
    } else if (key == "checked") {
      c.checked = parse_bool(value, line_no);
    } else if (key == "dropout_rate") {
      c.dropout_rate = parse_real(value, line_no);
    } else if (key == "linear_convs") {
      c.linear_convs = parse_bool(value, line_no);
    } else {
      bad(line_no, "unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

TrainingConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_text(const TrainingConfig& config) {
  std::ostringstream out;
  out << "k = " << config.k << '\n'
      << "r = " << config.r << '\n'
      << "alpha = " << config.alpha << '\n'
      << "epochs = " << config.epochs << '\n'
      << "learning_rate = " << config.learning_rate << '\n'
      << "optimizer = "
      << (config.optimizer == OptimizerKind::adam ? "adam" : "sgd") << '\n'
      << "docs_per_step = " << config.docs_per_step << '\n'
      << "seed = " << config.seed << '\n'
      << "loss_form = "
      << (config.loss_form == LossForm::standard ? "standard" : "literal")
      << '\n'
      << "precision = " << config.precision << '\n'
      << "deterministic = " << (config.deterministic ? "true" : "false")
      << '\n'
      << "threads = " << config.threads << '\n'
      << "checked = " << (config.checked ? "true" : "false") << '\n'
      << "dropout_rate = " << config.dropout_rate << '\n'
      << "linear_convs = " << (config.linear_convs ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace sentdoc
