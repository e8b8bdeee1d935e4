#include "iterreg/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "iterreg/data.hpp"
#include "iterreg/errors.hpp"

namespace iterreg {

namespace {

// Field access with the dotted path in every error message.
class Node {
 public:
  Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const Json& json() const { return j_; }
  const std::string& path() const { return path_; }

  void require_object() const {
    if (!j_.is_object()) fail("must be an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    require_object();
    for (const auto& [k, _] : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&k](const char* a) { return k == a; })) {
        throw ConfigError(sub_path(k) + ": unknown field");
      }
    }
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }

  Node at(const char* key) const {
    if (!has(key)) throw ConfigError(sub_path(key) + ": missing");
    return Node(j_.at(key), sub_path(key));
  }

  double number() const {
    if (!j_.is_number()) fail("must be a number");
    return j_.get<double>();
  }

  std::int64_t integer() const {
    if (j_.is_number_integer() || j_.is_number_unsigned()) return j_.get<std::int64_t>();
    if (j_.is_number_float()) {
      const double v = j_.get<double>();
      if (v == static_cast<double>(static_cast<std::int64_t>(v))) return static_cast<std::int64_t>(v);
    }
    fail("must be an integer");
  }

  std::string string() const {
    if (!j_.is_string()) fail("must be a string");
    return j_.get<std::string>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("must be true or false");
    return j_.get<bool>();
  }

  double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }
  std::int64_t integer_or(const char* key, std::int64_t fallback) const {
    return has(key) ? at(key).integer() : fallback;
  }
  bool boolean_or(const char* key, bool fallback) const { return has(key) ? at(key).boolean() : fallback; }

  std::vector<double> numbers() const {
    if (!j_.is_array()) fail("must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(Node(j_[i], path_ + "[" + std::to_string(i) + "]").number());
    return out;
  }

  [[noreturn]] void fail(const std::string& why) const { throw ConfigError(path_ + ": " + why); }

 private:
  std::string sub_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const Json& j_;
  std::string path_;
};

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

Matrix matrix_from(const Node& n) {
  if (!n.json().is_array() || n.json().empty()) n.fail("must be a nonempty array of points");
  const auto first = Node(n.json()[0], n.path() + "[0]").numbers();
  Matrix out(static_cast<Eigen::Index>(n.json().size()), static_cast<Eigen::Index>(first.size()));
  for (std::size_t i = 0; i < n.json().size(); ++i) {
    const auto row = Node(n.json()[i], n.path() + "[" + std::to_string(i) + "]").numbers();
    if (row.size() != first.size()) n.fail("points differ in dimension");
    out.row(static_cast<Eigen::Index>(i)) = to_vector(row).transpose();
  }
  return out;
}

// DomainError from a constructor becomes a ConfigError at the field.
template <class F>
auto at_field(const Node& n, F build) {
  try {
    return build();
  } catch (const DomainError& e) {
    n.fail(e.what());
  } catch (const DimensionError& e) {
    n.fail(e.what());
  }
}

StepMode mode_from(const Node& n) {
  const std::string s = n.string();
  if (s == "nonsmooth") return StepMode::nonsmooth;
  if (s == "smooth") return StepMode::smooth;
  n.fail("must be \"nonsmooth\" or \"smooth\"");
}

IterateKind iterate_from(const Node& n) {
  const std::string s = n.string();
  if (s == "last") return IterateKind::last;
  if (s == "averaged") return IterateKind::averaged;
  if (s == "best") return IterateKind::best;
  n.fail("must be \"last\", \"averaged\" or \"best\"");
}

StoppingConfig stopping_from(const Node& n) {
  n.allow_only({"fixed", "theoretical", "holdout"});
  if (n.json().size() != 1) n.fail("needs exactly one of fixed, theoretical, holdout");
  if (n.has("fixed")) {
    const Node f = n.at("fixed");
    f.allow_only({"T"});
    FixedStop s{f.at("T").integer()};
    if (s.T < 1) f.at("T").fail("must be >= 1");
    return s;
  }
  if (n.has("theoretical")) {
    const Node t = n.at("theoretical");
    t.allow_only({"rule", "tau", "beta", "zeta", "eps", "iterate"});
    TheoreticalStop s;
    if (t.has("rule")) {
      const std::string r = t.at("rule").string();
      if (r == "general") {
        s.rule = TheoreticalStop::Rule::general;
      } else if (r == "hinge") {
        s.rule = TheoreticalStop::Rule::hinge;
      } else if (r == "hinge_fixed") {
        s.rule = TheoreticalStop::Rule::hinge_fixed;
      } else {
        t.at("rule").fail("must be \"general\", \"hinge\" or \"hinge_fixed\"");
      }
    }
    s.tau = t.number_or("tau", s.tau);
    s.beta = t.number_or("beta", s.beta);
    s.zeta = t.number_or("zeta", s.zeta);
    s.eps = t.number_or("eps", s.eps);
    if (t.has("iterate")) s.iterate = iterate_from(t.at("iterate"));
    return s;
  }
  const Node h = n.at("holdout");
  h.allow_only({"split", "T_max"});
  HoldoutStop s;
  s.split = h.number_or("split", s.split);
  s.T_max = h.integer_or("T_max", s.T_max);
  if (!(s.split > 0.0 && s.split < 1.0)) h.at("split").fail("must lie in (0, 1)");
  if (s.T_max < 1) h.at("T_max").fail("must be >= 1");
  return s;
}

DataConfig data_from(const Node& n) {
  n.allow_only({"synthetic", "csv"});
  if (n.json().size() != 1) n.fail("needs exactly one of synthetic, csv");
  if (n.has("csv")) return CsvData{n.at("csv").string()};
  const Node s = n.at("synthetic");
  s.allow_only({"dist", "m"});
  SyntheticData d;
  d.dist = s.at("dist").json();
  d.m = s.at("m").integer();
  if (d.m < 1) s.at("m").fail("must be >= 1");
  at_field(s.at("dist"), [&] { return dist_from_json(d.dist); });
  return d;
}

std::optional<std::filesystem::path> optional_path(const Node& n, const char* key) {
  if (!n.has(key)) return std::nullopt;
  return std::filesystem::path(n.at(key).string());
}

void dump_into(std::string& out, const Json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += pad + Json(k).dump() + sep;
        dump_into(out, v, indent, depth + 1);
      }
      out += close + '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ',';
        out += pad;
        dump_into(out, j[i], indent, depth + 1);
      }
      out += close + ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_into(out, j, indent, 0);
  return out;
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not of the form path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json* cur = &doc;
  std::stringstream parts(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(parts, key, '.')) {
    if (key.empty()) throw ConfigError("override path '" + path + "' has an empty component");
    keys.push_back(key);
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!cur->is_object()) {
      if (!cur->is_null()) throw ConfigError("override path '" + path + "' runs through a non-object");
      *cur = Json::object();
    }
    cur = &(*cur)[keys[i]];
  }
  *cur = std::move(value);
}

Kernel kernel_from_json(const Json& spec, std::optional<Eigen::Index> dim) {
  const Node n(spec, "kernel");
  n.allow_only({"type", "dim", "bandwidth", "degree", "offset", "features"});
  Eigen::Index d = 0;
  if (n.has("dim")) {
    d = n.at("dim").integer();
    if (dim && *dim != d) n.at("dim").fail("is " + std::to_string(d) + " but the data has dimension " + std::to_string(*dim));
  } else if (dim) {
    d = *dim;
  } else {
    n.at("dim");  // reports the missing field
  }
  const std::string type = n.at("type").string();
  return at_field(n, [&] {
    if (type == "linear") return Kernel::linear(d);
    if (type == "polynomial") {
      return Kernel::polynomial(d, static_cast<int>(n.integer_or("degree", 2)), n.number_or("offset", 1.0));
    }
    if (type == "gaussian") return Kernel::gaussian(d, n.number_or("bandwidth", 1.0));
    if (type == "dictionary") {
      const Node fs = n.at("features");
      if (!fs.json().is_array()) fs.fail("must be an array");
      std::vector<FeatureMap> features;
      for (std::size_t i = 0; i < fs.json().size(); ++i) {
        const Node f(fs.json()[i], fs.path() + "[" + std::to_string(i) + "]");
        f.allow_only({"coord", "power"});
        features.push_back(FeatureMap::from_monomial(
            {static_cast<Eigen::Index>(f.at("coord").integer()), static_cast<int>(f.at("power").integer())}));
      }
      return Kernel::dictionary(d, std::move(features));
    }
    n.at("type").fail("unknown kernel type '" + type + "'");
  });
}

Json kernel_to_json(const Kernel& k) {
  Json j{{"type", k.name()}, {"dim", k.dim()}};
  if (const auto* p = std::get_if<PolynomialKernel>(&k.variant())) {
    j["degree"] = p->degree;
    j["offset"] = p->offset;
  } else if (const auto* g = std::get_if<GaussianKernel>(&k.variant())) {
    j["bandwidth"] = g->bandwidth;
  } else if (const auto* d = std::get_if<DictionaryKernel>(&k.variant())) {
    Json fs = Json::array();
    for (const auto& f : d->features) {
      if (!f.monomial) throw ConfigError("dictionary kernel with custom feature maps cannot be serialized");
      fs.push_back({{"coord", f.monomial->coord}, {"power", f.monomial->power}});
    }
    j["features"] = fs;
  }
  return j;
}

Loss loss_from_json(const Json& spec) {
  const Node n(spec, "loss");
  n.allow_only({"name", "label_bound", "p", "epsilon"});
  const std::string name = n.at("name").string();
  return at_field(n, [&] {
    const double b = n.number_or("label_bound", 1.0);
    switch (Loss::kind_from_name(name)) {
      case LossKind::square:
        return Loss::square(b);
      case LossKind::absolute:
        return Loss::absolute(b);
      case LossKind::p_loss: {
        const std::int64_t p = n.integer_or("p", 2);
        return Loss::p_loss(static_cast<int>(p), b);
      }
      case LossKind::hinge:
        return Loss::hinge();
      case LossKind::eps_insensitive:
        return Loss::eps_insensitive(n.number_or("epsilon", 0.1), b);
      case LossKind::eps_insensitive_p:
        return Loss::eps_insensitive_p(n.number_or("epsilon", 0.1), n.number_or("p", 2.0), b);
      case LossKind::logistic:
        return Loss::logistic();
    }
    n.fail("unknown loss");
  });
}

Json loss_to_json(const Loss& loss) {
  Json j{{"name", loss.name()}};
  if (!loss.is_classification()) j["label_bound"] = loss.label_bound();
  if (loss.kind() == LossKind::p_loss || loss.kind() == LossKind::eps_insensitive_p) j["p"] = loss.p();
  if (loss.kind() == LossKind::eps_insensitive || loss.kind() == LossKind::eps_insensitive_p) {
    j["epsilon"] = loss.epsilon();
  }
  return j;
}

SyntheticDist dist_from_json(const Json& spec) {
  const Node n(spec, "dist");
  n.require_object();
  const std::string type = n.at("type").string();
  return at_field(n, [&] {
    if (type == "flip") {
      n.allow_only({"type", "w", "bias", "flip"});
      return SyntheticDist::flip_linear(to_vector(n.at("w").numbers()), n.number_or("bias", 0.0),
                                        n.number_or("flip", 0.0));
    }
    if (type == "margin") {
      n.allow_only({"type", "dim", "s"});
      return SyntheticDist::margin(n.integer_or("dim", 1), n.number_or("s", 1.0));
    }
    if (type == "regression_rkhs" || type == "median_regression") {
      n.allow_only({"type", "noise", "kernel", "dim", "centers", "coefficients", "n_centers", "target_seed"});
      const Kernel k = kernel_from_json(n.at("kernel").json(), n.has("dim") ? std::optional(n.at("dim").integer())
                                                                             : std::nullopt);
      std::optional<KernelExpansion> target;
      if (n.has("centers") || n.has("coefficients")) {
        target.emplace(k, matrix_from(n.at("centers")), to_vector(n.at("coefficients").numbers()));
      } else {
        target = random_expansion(k, n.integer_or("n_centers", 5), static_cast<std::uint64_t>(n.integer_or("target_seed", 0)));
      }
      const double noise = n.number_or("noise", 0.0);
      return type == "regression_rkhs" ? SyntheticDist::regression_rkhs(std::move(*target), noise)
                                       : SyntheticDist::median_regression(std::move(*target), noise);
    }
    n.at("type").fail("unknown distribution type '" + type + "'");
  });
}

RunConfig parse_config(const Json& doc) {
  const Node root(doc, "");
  root.allow_only({"kernel", "loss", "schedule", "kappa", "stopping", "data", "seed", "evaluation", "engine", "output",
                   "rates"});
  RunConfig c;
  c.kernel = root.at("kernel").json();
  c.loss = root.at("loss").json();
  try {
    loss_from_json(c.loss);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("loss: ") + e.what());
  }
  {
    const Node k = root.at("kernel");
    k.require_object();
    k.at("type").string();
  }

  const Node s = root.at("schedule");
  s.allow_only({"theta", "eta1", "mode", "force"});
  c.theta = s.at("theta").number();
  if (s.has("eta1")) c.eta1 = s.at("eta1").number();
  if (s.has("mode")) c.mode = mode_from(s.at("mode"));
  c.force = s.boolean_or("force", false);

  if (root.has("kappa")) c.kappa = root.at("kappa").number();
  c.stopping = stopping_from(root.at("stopping"));
  c.data = data_from(root.at("data"));
  if (root.has("seed")) {
    const std::int64_t seed = root.at("seed").integer();
    if (seed < 0) root.at("seed").fail("must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  if (root.has("evaluation")) {
    const Node e = root.at("evaluation");
    e.allow_only({"mc_samples"});
    c.mc_samples = e.integer_or("mc_samples", c.mc_samples);
    if (c.mc_samples < 2) e.at("mc_samples").fail("must be >= 2");
  }
  if (root.has("engine")) {
    const Node e = root.at("engine");
    e.allow_only({"incremental"});
    c.incremental = e.boolean_or("incremental", false);
  }
  if (root.has("output")) {
    const Node o = root.at("output");
    o.allow_only({"path_csv", "model_json", "report_json"});
    c.outputs = {optional_path(o, "path_csv"), optional_path(o, "model_json"), optional_path(o, "report_json")};
  }
  if (root.has("rates")) {
    const Node r = root.at("rates");
    r.allow_only({"m_grid", "repetitions", "timing", "csv", "summary_json"});
    RatesConfig rc;
    for (double m : r.at("m_grid").numbers()) {
      if (m < 1 || m != static_cast<double>(static_cast<Eigen::Index>(m))) r.at("m_grid").fail("entries must be integers >= 1");
      rc.m_grid.push_back(static_cast<Eigen::Index>(m));
    }
    if (rc.m_grid.empty()) r.at("m_grid").fail("must not be empty");
    if (!std::is_sorted(rc.m_grid.begin(), rc.m_grid.end()) ||
        std::adjacent_find(rc.m_grid.begin(), rc.m_grid.end()) != rc.m_grid.end()) {
      r.at("m_grid").fail("must be strictly increasing");
    }
    rc.repetitions = static_cast<int>(r.integer_or("repetitions", 1));
    if (rc.repetitions < 1) r.at("repetitions").fail("must be >= 1");
    rc.timing = r.boolean_or("timing", true);
    rc.csv = optional_path(r, "csv");
    rc.summary_json = optional_path(r, "summary_json");
    c.rates = rc;
  }
  return c;
}

}  // namespace iterreg
