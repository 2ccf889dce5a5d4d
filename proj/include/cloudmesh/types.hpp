#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cloudmesh {

using Tick = std::int64_t;
using Mac = std::uint64_t;  // low 48 bits used

enum class Errc {
  DuplicateCloudId,
  UnknownCloud,
  HardwareSwitchInPublicCloud,
  DuplicateNodeId,
  NoPath,
  DifferentClouds,
  UnknownNode,
  TenantSpaceExhausted,
  LocalSpaceExhausted,
  InfeasibleConstraint,
  CapacityExceeded,
  UnknownTenant,
  NoVirtualRoute,
  UnknownNetwork,
  UnknownSwitch,
  MalformedSnapshot,
  TargetFull,
  UnknownVm,
  SameCloud,
  BarrierTimeout,
  MigrationInProgress,
  UnknownEndpoint,
  InvalidSpec,
  TickLimitExceeded,
  MalformedScenario,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DuplicateCloudId: return "DuplicateCloudId";
    case Errc::UnknownCloud: return "UnknownCloud";
    case Errc::HardwareSwitchInPublicCloud: return "HardwareSwitchInPublicCloud";
    case Errc::DuplicateNodeId: return "DuplicateNodeId";
    case Errc::NoPath: return "NoPath";
    case Errc::DifferentClouds: return "DifferentClouds";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::TenantSpaceExhausted: return "TenantSpaceExhausted";
    case Errc::LocalSpaceExhausted: return "LocalSpaceExhausted";
    case Errc::InfeasibleConstraint: return "InfeasibleConstraint";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::UnknownTenant: return "UnknownTenant";
    case Errc::NoVirtualRoute: return "NoVirtualRoute";
    case Errc::UnknownNetwork: return "UnknownNetwork";
    case Errc::UnknownSwitch: return "UnknownSwitch";
    case Errc::MalformedSnapshot: return "MalformedSnapshot";
    case Errc::TargetFull: return "TargetFull";
    case Errc::UnknownVm: return "UnknownVm";
    case Errc::SameCloud: return "SameCloud";
    case Errc::BarrierTimeout: return "BarrierTimeout";
    case Errc::MigrationInProgress: return "MigrationInProgress";
    case Errc::UnknownEndpoint: return "UnknownEndpoint";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::TickLimitExceeded: return "TickLimitExceeded";
    case Errc::MalformedScenario: return "MalformedScenario";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}
  explicit Error(Errc code) : std::runtime_error(errc_name(code)), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace cloudmesh
