#include "sliceq/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "sliceq/error.hpp"
#include "sliceq/slice_model.hpp"

namespace sliceq {

namespace {

using nlohmann::json;

const char* base_name(AdjustBase base) {
  return base == AdjustBase::CurrentRate ? "current-rate" : "link-capacity";
}

// Walks a JSON tree, collecting every problem instead of stopping at the first.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  // Returns the sub-object at key, or nullptr when absent or malformed.
  const json* section(const json& parent, const char* key, std::initializer_list<std::string_view> allowed) {
    if (!parent.contains(key)) return nullptr;
    const json& j = parent.at(key);
    if (!j.is_object()) {
      fail(key, "must be an object");
      return nullptr;
    }
    check_keys(j, key, allowed);
    return &j;
  }

  void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& item : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
        fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
      }
    }
  }

  bool number(const json& j, const std::string& path, const char* key, double& out) {
    if (!j.contains(key)) return false;
    const json& v = j.at(key);
    if (!v.is_number()) return fail(path + "." + key, "must be a number");
    out = v.get<double>();
    return true;
  }

  template <typename Int>
  bool integer(const json& j, const std::string& path, const char* key, Int& out, long long min) {
    if (!j.contains(key)) return false;
    const json& v = j.at(key);
    if (!v.is_number_integer()) return fail(path + "." + key, "must be an integer");
    const auto value = v.get<long long>();
    if (value < min) {
      return fail(path + "." + key, "must be >= " + std::to_string(min) + ", got " + std::to_string(value));
    }
    out = static_cast<Int>(value);
    return true;
  }

  bool text(const json& j, const std::string& path, const char* key, std::string& out) {
    if (!j.contains(key)) return false;
    const json& v = j.at(key);
    if (!v.is_string()) return fail(path + "." + key, "must be a string");
    out = v.get<std::string>();
    return true;
  }

  template <typename T>
  bool list(const json& j, const std::string& path, const char* key, std::vector<T>& out) {
    if (!j.contains(key)) return false;
    const json& v = j.at(key);
    const std::string field = path + "." + key;
    if (!v.is_array()) return fail(field, "must be an array");
    std::vector<T> values;
    for (const auto& item : v) {
      if constexpr (std::is_floating_point_v<T>) {
        if (!item.is_number()) return fail(field, "entries must be numbers");
      } else {
        if (!item.is_number_integer()) return fail(field, "entries must be integers");
        if (item.get<long long>() < 0) return fail(field, "entries must be non-negative");
      }
      values.push_back(item.get<T>());
    }
    out = std::move(values);
    return true;
  }

  bool fail(const std::string& field, const std::string& reason) {
    errors_.push_back(field + ": " + reason);
    return false;
  }

 private:
  std::vector<std::string>& errors_;
};

void apply_slice_model(RunConfig& config, bool queue_count_given, std::vector<std::string>& errors) {
  const auto& ref = *config.slice_model;
  try {
    const SliceModel model = load_slice_model(ref.path);
    const ValidationReport report = validate_model(model);
    for (const auto& v : report.violations) {
      errors.push_back("slice_model: " + v.kind + " '" + v.subject + "'");
    }
    const auto domain = std::find_if(model.domains.begin(), model.domains.end(),
                                     [&](const Domain& d) { return d.id == ref.domain; });
    if (domain == model.domains.end()) {
      errors.push_back("slice_model.domain: no domain '" + ref.domain + "' in " + ref.path);
      return;
    }
    const GatewayPlan plan = build_gateway_plan(*domain);
    if (queue_count_given && plan.queue_count() != config.scenario.gateway.queue_count) {
      errors.push_back("gateway.queue_count: " + std::to_string(config.scenario.gateway.queue_count) +
                       " disagrees with the " + std::to_string(plan.queue_count()) +
                       " constraint classes of domain '" + ref.domain + "'");
      return;
    }
    config.scenario.gateway.queue_count = plan.queue_count();
  } catch (const Error& e) {
    errors.push_back(std::string("slice_model.path: ") + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const json& doc, const ConfigOverrides& overrides, const std::string& base_dir) {
  std::vector<std::string> errors;
  Reader read(errors);
  RunConfig config;
  ScenarioSpec& spec = config.scenario;

  if (!doc.is_object()) {
    throw ConfigError({"config: top level must be an object"});
  }
  read.check_keys(doc, "", {"seed", "gateway", "agent", "scenario", "output", "slice_model"});
  read.integer(doc, "config", "seed", spec.seed, 0);

  bool queue_count_given = false;
  bool weights_given = false;
  bool overloaded_given = false;
  double phase_duration = 60.0;
  std::vector<double> multipliers{1.3, 1.5, 1.8, 2.0};

  if (const json* g = read.section(doc, "gateway",
                                   {"queue_count", "capacity", "threshold_fraction", "link_capacity",
                                    "min_rate_fraction", "dt", "priorities"})) {
    auto& sizing = spec.gateway;
    queue_count_given = read.integer(*g, "gateway", "queue_count", sizing.queue_count, 1);
    read.integer(*g, "gateway", "capacity", sizing.capacity, 1);
    read.number(*g, "gateway", "threshold_fraction", sizing.threshold_fraction);
    read.number(*g, "gateway", "link_capacity", sizing.link_capacity);
    read.number(*g, "gateway", "min_rate_fraction", sizing.min_rate_fraction);
    read.number(*g, "gateway", "dt", spec.dt);
    std::vector<std::size_t> priorities;
    if (read.list(*g, "gateway", "priorities", priorities)) {
      sizing.priorities.assign(priorities.begin(), priorities.end());
    }
  }

  if (const json* a = read.section(doc, "agent",
                                   {"epsilon", "alpha", "gamma", "adjust_fraction", "adjust_base",
                                    "max_attempts", "priority_weights", "reward_mode", "step_cost"})) {
    auto& agent = spec.agent;
    read.number(*a, "agent", "epsilon", agent.epsilon);
    read.number(*a, "agent", "alpha", agent.alpha);
    read.number(*a, "agent", "gamma", agent.gamma);
    read.number(*a, "agent", "adjust_fraction", agent.adjust_fraction);
    std::string base;
    if (read.text(*a, "agent", "adjust_base", base)) {
      if (base == "current-rate") {
        agent.adjust_base = AdjustBase::CurrentRate;
      } else if (base == "link-capacity") {
        agent.adjust_base = AdjustBase::LinkCapacity;
      } else {
        read.fail("agent.adjust_base", "must be \"current-rate\" or \"link-capacity\", got \"" + base + "\"");
      }
    }
    read.integer(*a, "agent", "max_attempts", agent.max_attempts, 1);
    read.number(*a, "agent", "step_cost", agent.step_cost);
    std::string mode;
    if (read.text(*a, "agent", "reward_mode", mode)) {
      if (mode == "state") {
        agent.reward_mode = RewardMode::State;
      } else if (mode == "state-action") {
        agent.reward_mode = RewardMode::StateAction;
      } else {
        read.fail("agent.reward_mode", "must be \"state\" or \"state-action\", got \"" + mode + "\"");
      }
    }
    weights_given = read.list(*a, "agent", "priority_weights", agent.priority_weights);
  }

  if (const json* s = read.section(doc, "scenario",
                                   {"id", "overloaded_queues", "nominal_rate", "phase_duration",
                                    "multipliers", "lead_in", "tail"})) {
    read.integer(*s, "scenario", "id", spec.id, 0);
    overloaded_given = read.list(*s, "scenario", "overloaded_queues", spec.overloaded_queues);
    read.number(*s, "scenario", "nominal_rate", spec.nominal_rate);
    read.number(*s, "scenario", "phase_duration", phase_duration);
    read.list(*s, "scenario", "multipliers", multipliers);
    read.number(*s, "scenario", "lead_in", spec.lead_in);
    read.number(*s, "scenario", "tail", spec.tail);
  }

  if (const json* o = read.section(doc, "output", {"dir"})) {
    std::string dir;
    if (read.text(*o, "output", "dir", dir)) config.output_dir = dir;
  }

  if (const json* m = read.section(doc, "slice_model", {"path", "domain"})) {
    SliceModelRef ref;
    const bool has_path = read.text(*m, "slice_model", "path", ref.path);
    const bool has_domain = read.text(*m, "slice_model", "domain", ref.domain);
    if (!has_path || !has_domain) {
      read.fail("slice_model", "needs both \"path\" and \"domain\"");
    } else {
      if (std::filesystem::path(ref.path).is_relative()) {
        ref.path = (std::filesystem::path(base_dir) / ref.path).lexically_normal().string();
      }
      config.slice_model = ref;
    }
  }

  // Command-line overrides.
  if (overrides.scenario) {
    spec.id = *overrides.scenario;
    overloaded_given = false;
  }
  if (overrides.seed) spec.seed = *overrides.seed;
  if (overrides.out_dir) config.output_dir = *overrides.out_dir;
  if (overrides.phase_duration) phase_duration = *overrides.phase_duration;
  if (overrides.epsilon) spec.agent.epsilon = *overrides.epsilon;
  if (overrides.alpha) spec.agent.alpha = *overrides.alpha;
  if (overrides.gamma) spec.agent.gamma = *overrides.gamma;

  if (config.slice_model) {
    apply_slice_model(config, queue_count_given, errors);
  }

  spec.schedule.phases.clear();
  for (double m : multipliers) {
    spec.schedule.phases.push_back({m, phase_duration});
  }
  if (!overloaded_given) {
    spec.overloaded_queues = ScenarioSpec::standard(spec.id).overloaded_queues;
  }
  if (!weights_given) {
    // Higher priority (smaller rank) weighs more: ranks 1..N map to N..1.
    const std::size_t n = spec.gateway.queue_count;
    spec.agent.priority_weights.assign(n, 1.0);
    for (std::size_t q = 0; q < n; ++q) {
      const int rank = spec.gateway.priorities.size() == n ? spec.gateway.priorities[q]
                                                           : static_cast<int>(q) + 1;
      spec.agent.priority_weights[q] = std::max(1.0, static_cast<double>(n) + 1.0 - rank);
    }
  }

  auto invariants = spec.validate();
  errors.insert(errors.end(), invariants.begin(), invariants.end());
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }
  return config;
}

RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides) {
  if (path.empty()) {
    return parse_run_config(json::object(), overrides);
  }
  std::ifstream in(path);
  if (!in) {
    throw ConfigError({"config: cannot open '" + path + "'"});
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: malformed JSON: ") + e.what()});
  }
  const auto base = std::filesystem::path(path).parent_path();
  return parse_run_config(doc, overrides, base.empty() ? "." : base.string());
}

json to_json(const RunConfig& config) {
  const ScenarioSpec& spec = config.scenario;
  const auto& g = spec.gateway;
  const auto& a = spec.agent;
  std::vector<double> multipliers;
  for (const auto& p : spec.schedule.phases) multipliers.push_back(p.multiplier);
  const double phase_duration = spec.schedule.phases.empty() ? 0.0 : spec.schedule.phases.front().duration;

  json gateway = {{"queue_count", g.queue_count},
                  {"capacity", g.capacity},
                  {"threshold_fraction", g.threshold_fraction},
                  {"link_capacity", g.link_capacity},
                  {"min_rate_fraction", g.min_rate_fraction},
                  {"dt", spec.dt}};
  if (!g.priorities.empty()) gateway["priorities"] = g.priorities;

  json doc = {{"seed", spec.seed},
              {"gateway", gateway},
              {"agent",
               {{"epsilon", a.epsilon},
                {"alpha", a.alpha},
                {"gamma", a.gamma},
                {"adjust_fraction", a.adjust_fraction},
                {"adjust_base", base_name(a.adjust_base)},
                {"max_attempts", a.max_attempts},
                {"reward_mode", a.reward_mode == RewardMode::State ? "state" : "state-action"},
                {"step_cost", a.step_cost},
                {"priority_weights", a.priority_weights}}},
              {"scenario",
               {{"id", spec.id},
                {"overloaded_queues", spec.overloaded_queues},
                {"nominal_rate", spec.nominal_rate},
                {"phase_duration", phase_duration},
                {"multipliers", multipliers},
                {"lead_in", spec.lead_in},
                {"tail", spec.tail}}}};
  if (config.slice_model) {
    doc["slice_model"] = {{"path", config.slice_model->path}, {"domain", config.slice_model->domain}};
  }
  return doc;
}

json default_config_json() { return to_json(RunConfig{}); }

}  // namespace sliceq
