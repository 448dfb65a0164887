#include "dnff/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <type_traits>
#include <sstream>

#include "dnff/errors.hpp"

namespace dnff {

namespace {

static_assert(std::is_same_v<std::size_t, std::uint64_t>);

[[noreturn]] void fail(int line, const std::string& msg) {
  throw InvalidInput("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool bare_key(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

class ValueParser {
 public:
  ValueParser(const std::string& text, int line) : s_(text), line_(line) {}

  TomlValue parse() {
    TomlValue out;
    out.line = line_;
    skip_ws();
    if (peek() == '[') {
      ++pos_;
      std::vector<TomlScalar> items;
      skip_ws();
      while (peek() != ']') {
        items.push_back(scalar());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
        } else if (peek() != ']') {
          fail(line_, "expected ',' or ']' in array");
        }
      }
      ++pos_;
      out.value = std::move(items);
    } else {
      std::visit([&](auto&& v) { out.value = v; }, scalar());
    }
    skip_ws();
    if (pos_ != s_.size()) fail(line_, "unexpected trailing text '" + s_.substr(pos_) + "'");
    return out;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  TomlScalar scalar() {
    if (peek() == '"') return string();
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != ' ' &&
           s_[end] != '\t') {
      ++end;
    }
    std::string tok = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (tok.empty()) fail(line_, "missing value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string digits;
    for (char c : tok) {
      if (c != '_') digits.push_back(c);
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos ||
                          digits.find("inf") != std::string::npos ||
                          digits.find("nan") != std::string::npos;
    const char* b = digits.data();
    const char* e = digits.data() + digits.size();
    if (*b == '+') ++b;
    if (is_float) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e) fail(line_, "bad number '" + tok + "'");
      return v;
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) fail(line_, "bad value '" + tok + "'");
    return v;
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail(line_, "unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= s_.size()) fail(line_, "unterminated escape");
        const char n = s_[pos_++];
        switch (n) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail(line_, std::string("unsupported escape \\") + n);
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_;
};

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

// Typed access with a record of which keys were read.
class Reader {
 public:
  explicit Reader(const TomlDocument& doc) : doc_(doc) {}

  template <typename T>
  void get(const std::string& key, T& target) {
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    used_.insert(key);
    assign(key, it->second, target);
  }

  void check_unknown(const std::set<std::string>& sections) const {
    for (const auto& [key, value] : doc_) {
      if (used_.count(key)) continue;
      const auto dot = key.find('.');
      const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
      if (!sections.count(section)) fail(value.line, "unknown section '" + section + "'");
      fail(value.line, "unknown key '" + key + "'");
    }
  }

 private:
  static double as_double(const std::string& key, const TomlScalar& v, int line) {
    if (auto p = std::get_if<double>(&v)) return *p;
    if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
    fail(line, "'" + key + "' must be a number");
  }
  static std::int64_t as_int(const std::string& key, const TomlScalar& v, int line) {
    if (auto p = std::get_if<std::int64_t>(&v)) return *p;
    fail(line, "'" + key + "' must be an integer");
  }
  static std::string as_string(const std::string& key, const TomlScalar& v, int line) {
    if (auto p = std::get_if<std::string>(&v)) return *p;
    fail(line, "'" + key + "' must be a string");
  }
  static TomlScalar scalar_of(const std::string& key, const TomlValue& v) {
    TomlScalar out;
    std::visit(
        [&](auto&& x) {
          using X = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<X, std::vector<TomlScalar>>) {
            fail(v.line, "'" + key + "' must be a scalar, not an array");
          } else {
            out = x;
          }
        },
        v.value);
    return out;
  }
  static const std::vector<TomlScalar>& array_of(const std::string& key, const TomlValue& v) {
    if (auto p = std::get_if<std::vector<TomlScalar>>(&v.value)) return *p;
    fail(v.line, "'" + key + "' must be an array");
  }

  static void assign(const std::string& key, const TomlValue& v, double& t) {
    t = as_double(key, scalar_of(key, v), v.line);
  }
  static void assign(const std::string& key, const TomlValue& v, bool& t) {
    auto s = scalar_of(key, v);
    if (auto p = std::get_if<bool>(&s)) {
      t = *p;
      return;
    }
    fail(v.line, "'" + key + "' must be true or false");
  }
  static void assign(const std::string& key, const TomlValue& v, long& t) {
    t = static_cast<long>(as_int(key, scalar_of(key, v), v.line));
  }
  static void assign(const std::string& key, const TomlValue& v, std::uint64_t& t) {
    const auto x = as_int(key, scalar_of(key, v), v.line);
    if (x < 0) fail(v.line, "'" + key + "' must be >= 0");
    t = static_cast<std::uint64_t>(x);
  }
  static void assign(const std::string& key, const TomlValue& v, std::vector<double>& t) {
    t.clear();
    for (const auto& x : array_of(key, v)) t.push_back(as_double(key, x, v.line));
  }
  static void assign(const std::string& key, const TomlValue& v, std::vector<std::size_t>& t) {
    t.clear();
    for (const auto& x : array_of(key, v)) {
      const auto i = as_int(key, x, v.line);
      if (i < 0) fail(v.line, "'" + key + "' entries must be >= 0");
      t.push_back(static_cast<std::size_t>(i));
    }
  }
  static void assign(const std::string& key, const TomlValue& v, std::vector<std::string>& t) {
    t.clear();
    for (const auto& x : array_of(key, v)) t.push_back(as_string(key, x, v.line));
  }

  const TomlDocument& doc_;
  std::set<std::string> used_;
};

}  // namespace

TomlDocument parse_toml(const std::string& text) {
  TomlDocument doc;
  std::set<std::string> sections;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!bare_key(section)) fail(line_no, "bad section name '" + section + "'");
      if (!sections.insert(section).second) fail(line_no, "duplicate section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!bare_key(key)) fail(line_no, "bad key '" + key + "'");
    const std::string path = section.empty() ? key : section + "." + key;
    if (doc.count(path)) fail(line_no, "duplicate key '" + path + "'");
    doc[path] = ValueParser(trim(line.substr(eq + 1)), line_no).parse();
  }
  return doc;
}

ExperimentPlan RunConfig::plan() const {
  ExperimentPlan p;
  p.system = system;
  p.data_sampler = sampler;
  p.eval_sampler = sampler;
  p.eval_sampler.n_steps = experiment.eval_steps;
  p.eval_sampler.n_equilibration = 0;
  p.noise = noise;
  p.hyper = model;
  p.train = train;
  p.train.epochs = experiment.train_epochs;
  p.rdf = rdf;
  p.pool_frames = experiment.pool_frames;
  p.heldout_frames = experiment.heldout_frames;
  p.master_seed = experiment.master_seed;
  return p;
}

RunConfig parse_run_config(const std::string& text) {
  const TomlDocument doc = parse_toml(text);
  Reader r(doc);
  RunConfig c;

  r.get("system.species", c.system.names);
  r.get("system.counts", c.system.counts);
  r.get("system.box_length", c.system.box_length);

  // Pair parameters are listed in upper-triangular pair order.
  auto pp = c.system.potential.all_params();
  std::vector<double> lj_sigma, charge_product;
  double epsilon = pp.front().epsilon;
  double kappa = pp.front().kappa;
  double cutoff = pp.front().cutoff;
  for (const auto& p : pp) {
    lj_sigma.push_back(p.lj_sigma);
    charge_product.push_back(p.charge_product);
  }
  const bool custom_potential =
      doc.count("potential.epsilon") || doc.count("potential.kappa") ||
      doc.count("potential.cutoff") || doc.count("potential.lj_sigma") ||
      doc.count("potential.charge_product") || doc.count("system.species");
  r.get("potential.epsilon", epsilon);
  r.get("potential.kappa", kappa);
  r.get("potential.cutoff", cutoff);
  r.get("potential.lj_sigma", lj_sigma);
  r.get("potential.charge_product", charge_product);
  if (custom_potential) {
    const std::size_t n = c.system.names.size();
    const std::size_t np = pair_count(n);
    if (lj_sigma.size() != np || charge_product.size() != np) {
      throw InvalidInput("config: potential.lj_sigma and potential.charge_product need " +
                         std::to_string(np) + " entries for " + std::to_string(n) + " species");
    }
    std::vector<PairParams> params(np);
    for (std::size_t k = 0; k < np; ++k) {
      params[k] = PairParams{epsilon, lj_sigma[k], charge_product[k], kappa, cutoff};
    }
    c.system.potential = PairPotential(n, std::move(params));
  }

  r.get("sampler.timestep", c.sampler.timestep);
  r.get("sampler.friction", c.sampler.friction);
  r.get("sampler.temperature", c.sampler.temperature);
  r.get("sampler.n_steps", c.sampler.n_steps);
  r.get("sampler.n_equilibration", c.sampler.n_equilibration);
  r.get("sampler.dump_interval", c.sampler.dump_interval);
  r.get("sampler.seed", c.sampler.seed);

  r.get("noise.sigma", c.noise.sigma);
  r.get("noise.duplicates", c.noise.duplicates);
  r.get("noise.seed", c.noise.seed);

  r.get("model.n_rbf", c.model.n_rbf);
  r.get("model.r_cut", c.model.r_cut);
  r.get("model.hidden_sizes", c.model.hidden_sizes);
  c.model.n_species = c.system.names.size();

  r.get("train.batch_size", c.train.batch_size);
  r.get("train.learning_rate", c.train.learning_rate);
  r.get("train.beta1", c.train.beta1);
  r.get("train.beta2", c.train.beta2);
  r.get("train.epsilon", c.train.epsilon);
  r.get("train.epochs", c.train.epochs);
  r.get("train.seed", c.train.seed);
  r.get("train.validation_fraction", c.train.validation_fraction);

  r.get("rdf.r_max", c.rdf.r_max);
  r.get("rdf.n_bins", c.rdf.n_bins);
  r.get("rdf.compare_min", c.rdf.compare_min);
  r.get("rdf.compare_max", c.rdf.compare_max);
  r.get("rdf.window_min", c.rdf.window_min);
  r.get("rdf.window_max", c.rdf.window_max);
  r.get("rdf.threshold", c.rdf.threshold);
  r.get("rdf.burn_in_fraction", c.rdf.burn_in_fraction);
  r.get("rdf.pairs", c.rdf.pairs);

  r.get("experiment.pool_frames", c.experiment.pool_frames);
  r.get("experiment.heldout_frames", c.experiment.heldout_frames);
  r.get("experiment.eval_steps", c.experiment.eval_steps);
  r.get("experiment.train_epochs", c.experiment.train_epochs);
  r.get("experiment.master_seed", c.experiment.master_seed);

  r.check_unknown({"system", "potential", "sampler", "noise", "model", "train", "rdf",
                   "experiment"});
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_run_config(buf.str());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

}  // namespace dnff
