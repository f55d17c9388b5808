#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sliceq {

enum class ResourceKind { InfrastructureService, Communication };

/// A shareable resource offered by one domain. Traffic it generates is
/// grouped with all other traffic of the same constraint class.
struct Resource {
  std::string id;
  ResourceKind kind = ResourceKind::InfrastructureService;
  int constraint_class = 0;

  friend bool operator==(const Resource&, const Resource&) = default;
};

/// A network domain federating its resources, located at an opaque site.
struct Domain {
  std::string id;
  std::string location;
  std::vector<Resource> resources;

  friend bool operator==(const Domain&, const Domain&) = default;
};

/// Bandwidth (packets/s), loss fraction and delay (s) of a communication slice.
struct SliceParams {
  double bandwidth = 0.0;
  double loss = 0.0;
  double delay = 0.0;

  bool valid() const;

  friend bool operator==(const SliceParams&, const SliceParams&) = default;
};

/// The single interdomain link between an unordered pair of domains.
struct CommunicationSlice {
  std::array<std::string, 2> endpoints;
  SliceParams params;

  friend bool operator==(const CommunicationSlice&, const CommunicationSlice&) = default;
};

/// An end-to-end virtual network built from resources of one or more domains.
struct SlicedVirtualNetwork {
  std::string id;
  std::vector<std::string> members;

  friend bool operator==(const SlicedVirtualNetwork&, const SlicedVirtualNetwork&) = default;
};

struct SliceModel {
  std::vector<Domain> domains;
  std::vector<CommunicationSlice> communication_slices;
  std::vector<SlicedVirtualNetwork> svns;

  friend bool operator==(const SliceModel&, const SliceModel&) = default;
};

/// Violation kinds reported by validate_model.
namespace violation {
inline constexpr const char* kDuplicateDomain = "duplicate domain id";
inline constexpr const char* kDuplicateResource = "duplicate resource id";
inline constexpr const char* kNegativeClass = "negative constraint class";
inline constexpr const char* kSelfLink = "self link";
inline constexpr const char* kUnknownEndpoint = "unknown endpoint";
inline constexpr const char* kDuplicateLink = "duplicate interdomain link";
inline constexpr const char* kInvalidParams = "invalid slice params";
inline constexpr const char* kDuplicateSvn = "duplicate svn id";
inline constexpr const char* kUnresolvedMember = "unresolved member";
}  // namespace violation

struct Violation {
  std::string kind;
  std::string subject;  // offending id; "A|B" for a domain pair

  friend auto operator<=>(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;  // sorted; empty means valid

  bool ok() const { return violations.empty(); }
};

/// Checks every structural invariant of a model. The result does not depend on
/// the order of the input lists.
ValidationReport validate_model(const std::vector<Domain>& domains,
                                const std::vector<CommunicationSlice>& slices,
                                const std::vector<SlicedVirtualNetwork>& svns);
ValidationReport validate_model(const SliceModel& model);

struct QueueAssignment {
  int constraint_class = 0;
  std::size_t queue_index = 0;

  friend bool operator==(const QueueAssignment&, const QueueAssignment&) = default;
};

/// Gateway queues for one domain, one per distinct constraint class, indexed
/// in ascending class order.
struct GatewayPlan {
  std::vector<QueueAssignment> queues;

  std::size_t queue_count() const { return queues.size(); }
  /// Queue serving the given class. Throws sliceq::Error if the class is absent.
  std::size_t queue_for(int constraint_class) const;
};

/// Throws sliceq::Error("nothing to slice") for a domain without resources.
GatewayPlan build_gateway_plan(const Domain& domain);

// JSON form: top-level keys "domains", "communication_slices", "svns".
void to_json(nlohmann::json& j, const SliceModel& model);
void from_json(const nlohmann::json& j, SliceModel& model);
void to_json(nlohmann::json& j, const SliceParams& params);
void from_json(const nlohmann::json& j, SliceParams& params);

SliceModel parse_slice_model(const std::string& text);
SliceModel load_slice_model(const std::string& path);

}  // namespace sliceq
