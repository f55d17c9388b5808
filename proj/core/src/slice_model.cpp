#include "sliceq/slice_model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "sliceq/error.hpp"

namespace sliceq {

namespace {

std::string pair_key(const std::array<std::string, 2>& endpoints) {
  const auto& [a, b] = std::minmax(endpoints[0], endpoints[1]);
  return a + "|" + b;
}

const char* kind_name(ResourceKind kind) {
  return kind == ResourceKind::Communication ? "communication" : "infrastructure-service";
}

ResourceKind parse_kind(const std::string& name) {
  if (name == "communication") {
    return ResourceKind::Communication;
  }
  if (name == "infrastructure-service") {
    return ResourceKind::InfrastructureService;
  }
  throw Error("unknown resource kind '" + name + "'");
}

}  // namespace

bool SliceParams::valid() const {
  return bandwidth >= 0.0 && loss >= 0.0 && loss <= 1.0 && delay >= 0.0;
}

ValidationReport validate_model(const std::vector<Domain>& domains,
                                const std::vector<CommunicationSlice>& slices,
                                const std::vector<SlicedVirtualNetwork>& svns) {
  ValidationReport report;
  auto add = [&](const char* kind, std::string subject) {
    report.violations.push_back({kind, std::move(subject)});
  };

  std::map<std::string, int> domain_count;
  std::map<std::string, int> resource_count;
  for (const auto& domain : domains) {
    ++domain_count[domain.id];
    for (const auto& resource : domain.resources) {
      ++resource_count[resource.id];
      if (resource.constraint_class < 0) {
        add(violation::kNegativeClass, resource.id);
      }
    }
  }
  for (const auto& [id, count] : domain_count) {
    if (count > 1) {
      add(violation::kDuplicateDomain, id);
    }
  }
  for (const auto& [id, count] : resource_count) {
    if (count > 1) {
      add(violation::kDuplicateResource, id);
    }
  }

  std::map<std::string, int> link_count;
  for (const auto& slice : slices) {
    const std::string key = pair_key(slice.endpoints);
    if (slice.endpoints[0] == slice.endpoints[1]) {
      add(violation::kSelfLink, key);
    }
    for (const auto& endpoint : slice.endpoints) {
      if (!domain_count.contains(endpoint)) {
        add(violation::kUnknownEndpoint, endpoint);
      }
    }
    if (!slice.params.valid()) {
      add(violation::kInvalidParams, key);
    }
    if (++link_count[key] == 2) {
      add(violation::kDuplicateLink, key);
    }
  }

  std::set<std::string> svn_ids;
  for (const auto& svn : svns) {
    if (!svn_ids.insert(svn.id).second) {
      add(violation::kDuplicateSvn, svn.id);
    }
    for (const auto& member : svn.members) {
      if (!resource_count.contains(member)) {
        add(violation::kUnresolvedMember, member);
      }
    }
  }

  std::sort(report.violations.begin(), report.violations.end());
  return report;
}

ValidationReport validate_model(const SliceModel& model) {
  return validate_model(model.domains, model.communication_slices, model.svns);
}

std::size_t GatewayPlan::queue_for(int constraint_class) const {
  for (const auto& q : queues) {
    if (q.constraint_class == constraint_class) {
      return q.queue_index;
    }
  }
  throw Error("no queue for constraint class " + std::to_string(constraint_class));
}

GatewayPlan build_gateway_plan(const Domain& domain) {
  if (domain.resources.empty()) {
    throw Error("nothing to slice");
  }
  std::set<int> classes;
  for (const auto& resource : domain.resources) {
    classes.insert(resource.constraint_class);
  }
  GatewayPlan plan;
  std::size_t index = 0;
  for (int c : classes) {
    plan.queues.push_back({c, index++});
  }
  return plan;
}

void to_json(nlohmann::json& j, const SliceParams& params) {
  j = {{"bandwidth", params.bandwidth}, {"loss", params.loss}, {"delay", params.delay}};
}

void from_json(const nlohmann::json& j, SliceParams& params) {
  j.at("bandwidth").get_to(params.bandwidth);
  j.at("loss").get_to(params.loss);
  j.at("delay").get_to(params.delay);
}

void to_json(nlohmann::json& j, const SliceModel& model) {
  nlohmann::json domains = nlohmann::json::array();
  for (const auto& domain : model.domains) {
    nlohmann::json resources = nlohmann::json::array();
    for (const auto& r : domain.resources) {
      resources.push_back(
          {{"id", r.id}, {"kind", kind_name(r.kind)}, {"constraint_class", r.constraint_class}});
    }
    domains.push_back({{"id", domain.id}, {"location", domain.location}, {"resources", resources}});
  }
  nlohmann::json slices = nlohmann::json::array();
  for (const auto& slice : model.communication_slices) {
    slices.push_back({{"endpoints", slice.endpoints}, {"params", slice.params}});
  }
  nlohmann::json svns = nlohmann::json::array();
  for (const auto& svn : model.svns) {
    svns.push_back({{"id", svn.id}, {"members", svn.members}});
  }
  j = {{"domains", domains}, {"communication_slices", slices}, {"svns", svns}};
}

void from_json(const nlohmann::json& j, SliceModel& model) {
  model = {};
  for (const auto& d : j.value("domains", nlohmann::json::array())) {
    Domain domain;
    d.at("id").get_to(domain.id);
    domain.location = d.value("location", "");
    for (const auto& r : d.value("resources", nlohmann::json::array())) {
      Resource resource;
      r.at("id").get_to(resource.id);
      resource.kind = parse_kind(r.at("kind").get<std::string>());
      r.at("constraint_class").get_to(resource.constraint_class);
      domain.resources.push_back(std::move(resource));
    }
    model.domains.push_back(std::move(domain));
  }
  for (const auto& s : j.value("communication_slices", nlohmann::json::array())) {
    CommunicationSlice slice;
    s.at("endpoints").get_to(slice.endpoints);
    s.at("params").get_to(slice.params);
    model.communication_slices.push_back(std::move(slice));
  }
  for (const auto& v : j.value("svns", nlohmann::json::array())) {
    SlicedVirtualNetwork svn;
    v.at("id").get_to(svn.id);
    v.at("members").get_to(svn.members);
    model.svns.push_back(std::move(svn));
  }
}

SliceModel parse_slice_model(const std::string& text) {
  try {
    return nlohmann::json::parse(text).get<SliceModel>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed slice model: ") + e.what());
  }
}

SliceModel load_slice_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open slice model '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_slice_model(buffer.str());
}

}  // namespace sliceq
