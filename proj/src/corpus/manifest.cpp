#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pint/corpus.hpp"
#include "pint/error.hpp"

namespace pint::corpus {

namespace {

constexpr std::pair<Role, std::string_view> kRoles[] = {
    {Role::textbook, "textbook"}, {Role::web, "web"},           {Role::code, "code"},
    {Role::finetune, "finetune"}, {Role::alignment, "alignment"},
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError("invalid value for " + what);
  }
}

void check_keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParseError("unknown key '" + key + "' in " + where);
  }
}

std::uint64_t non_negative(const YAML::Node& node, const std::string& what) {
  auto v = scalar<long long>(node, what);
  if (v < 0) throw ValidationError(what + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

clean::CleaningRule parse_rule(const YAML::Node& node, const std::string& dataset) {
  std::string kind_name;
  YAML::Node params;
  if (node.IsScalar()) {
    kind_name = node.as<std::string>();
  } else if (node.IsMap() && node.size() == 1) {
    auto it = node.begin();
    kind_name = it->first.as<std::string>();
    params = it->second;
  } else {
    throw ParseError("dataset '" + dataset + "': cleaning rule must be a name or a single-key map");
  }
  auto kind = clean::rule_kind_from_name(kind_name);
  if (!kind) throw ParseError("dataset '" + dataset + "': unknown cleaning rule '" + kind_name + "'");

  clean::CleaningRule rule = clean::CleaningRule::of(*kind);
  const std::string what = "'" + kind_name + "' in dataset '" + dataset + "'";
  switch (*kind) {
    case clean::RuleKind::strip_first_lines:
    case clean::RuleKind::min_chars:
      if (!params || !params.IsScalar()) throw ParseError(what + " needs a count");
      rule.n = non_negative(params, what);
      break;
    case clean::RuleKind::language_filter:
      if (!params || !params.IsMap() || !params["lang"]) throw ParseError(what + " needs {lang, min_confidence}");
      rule.lang = scalar<std::string>(params["lang"], what);
      rule.min_confidence = params["min_confidence"] ? scalar<double>(params["min_confidence"], what) : 0.0;
      break;
    default:
      if (params && !params.IsNull()) throw ParseError(what + " takes no parameters");
      break;
  }
  rule.validate();
  return rule;
}

DatasetSpec parse_dataset(const YAML::Node& node, const std::filesystem::path& base) {
  if (!node.IsMap()) throw ParseError("dataset entry must be a map");
  DatasetSpec spec;
  if (!node["name"]) throw ParseError("dataset entry without 'name'");
  spec.name = scalar<std::string>(node["name"], "dataset name");
  if (spec.name.empty()) throw ValidationError("dataset name must not be empty");
  check_keys(node, {"name", "role", "inputs", "cleaning_rules", "token_budget", "order"}, "dataset '" + spec.name + "'");

  if (!node["role"]) throw ParseError("dataset '" + spec.name + "' has no role");
  auto role_name = scalar<std::string>(node["role"], "role");
  auto role = role_from_string(role_name);
  if (!role) throw ValidationError("dataset '" + spec.name + "': unknown role '" + role_name + "'");
  spec.role = *role;

  if (const auto& inputs = node["inputs"]) {
    if (inputs.IsScalar()) {
      spec.inputs.push_back(resolve(base, inputs.as<std::string>()));
    } else {
      for (const auto& in : inputs) spec.inputs.push_back(resolve(base, scalar<std::string>(in, "input path")));
    }
  }
  if (const auto& rules = node["cleaning_rules"]) {
    for (const auto& r : rules) spec.cleaning_rules.push_back(parse_rule(r, spec.name));
  }
  if (const auto& budget = node["token_budget"]) spec.token_budget = non_negative(budget, "token_budget");
  if (const auto& order = node["order"]) {
    auto name = scalar<std::string>(order, "order");
    auto o = order_from_string(name);
    if (!o) throw ValidationError("dataset '" + spec.name + "': unknown order '" + name + "'");
    spec.order = *o;
  } else if (spec.token_budget) {
    throw ValidationError("dataset '" + spec.name + "': token_budget requires an explicit order");
  }
  return spec;
}

}  // namespace

std::string_view to_string(Role role) {
  for (const auto& [r, name] : kRoles)
    if (r == role) return name;
  return "unknown";
}

std::string_view to_string(Order order) {
  return order == Order::date_descending ? "date_descending" : "file_order";
}

std::optional<Role> role_from_string(std::string_view s) {
  for (const auto& [r, name] : kRoles)
    if (name == s) return r;
  return std::nullopt;
}

std::optional<Order> order_from_string(std::string_view s) {
  if (s == "date_descending") return Order::date_descending;
  if (s == "file_order") return Order::file_order;
  return std::nullopt;
}

const DatasetSpec* Manifest::find(std::string_view name) const {
  for (const auto& d : datasets)
    if (d.name == name) return &d;
  return nullptr;
}

const DatasetSpec& Manifest::at(std::string_view name) const {
  if (const auto* d = find(name)) return *d;
  throw Error("unknown dataset '" + std::string(name) + "'");
}

void validate(const Manifest& manifest) {
  std::set<std::string> names;
  for (const auto& d : manifest.datasets) {
    if (!names.insert(d.name).second) throw ValidationError("duplicate dataset name '" + d.name + "'");
    for (const auto& r : d.cleaning_rules) r.validate();
  }
  double sum = 0.0;
  for (const auto& [role, fraction] : manifest.target_proportions) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
      throw ValidationError("proportion for '" + std::string(to_string(role)) + "' must be in [0,1]");
    sum += fraction;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "target proportions sum to " << sum << ", expected 1";
    throw ValidationError(msg.str());
  }
}

Manifest parse_manifest(std::string_view yaml, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (!root.IsMap()) throw ParseError("manifest must be a map");
  check_keys(root, {"datasets", "target_proportions", "total_token_target", "tokenizer"}, "manifest");

  Manifest m;
  if (const auto& datasets = root["datasets"]) {
    if (!datasets.IsSequence()) throw ParseError("'datasets' must be a list");
    for (const auto& d : datasets) m.datasets.push_back(parse_dataset(d, base_dir));
  }
  if (const auto& props = root["target_proportions"]) {
    if (!props.IsMap()) throw ParseError("'target_proportions' must be a map");
    for (const auto& kv : props) {
      auto name = kv.first.as<std::string>();
      auto role = role_from_string(name);
      if (!role) throw ValidationError("unknown role '" + name + "' in target_proportions");
      m.target_proportions[*role] = scalar<double>(kv.second, "proportion of '" + name + "'");
    }
  } else {
    throw ParseError("manifest has no 'target_proportions'");
  }
  if (const auto& total = root["total_token_target"]) m.total_token_target = non_negative(total, "total_token_target");
  if (const auto& tok = root["tokenizer"]) m.tokenizer = resolve(base_dir, scalar<std::string>(tok, "tokenizer"));

  validate(m);
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

}  // namespace pint::corpus
