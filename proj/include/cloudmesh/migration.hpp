#pragma once

#include <set>
#include <string>
#include <vector>

#include "cloudmesh/fabric.hpp"
#include "cloudmesh/types.hpp"

namespace cloudmesh {

enum class MigrationStep {
  Clone,
  DualReplica,
  SerializeUpdates,
  MoveVm,
  Cutover,
  Decommission,
};

inline const char* migration_step_name(MigrationStep s) {
  switch (s) {
    case MigrationStep::Clone: return "Clone";
    case MigrationStep::DualReplica: return "DualReplica";
    case MigrationStep::SerializeUpdates: return "SerializeUpdates";
    case MigrationStep::MoveVm: return "MoveVm";
    case MigrationStep::Cutover: return "Cutover";
    case MigrationStep::Decommission: return "Decommission";
  }
  return "?";
}

struct MigrationPlan {
  std::string vm_id;
  std::string source_cloud;
  std::string target_cloud;
  // Switches holding rules for flows touching the VM, cloned one at a
  // time in lexicographic order. Always contains the VM's own switch.
  std::vector<std::string> switch_order;
  // Existing fabric tunnels on the source->target path, plus one
  // temporary direct tunnel when the clouds are not fabric-adjacent.
  std::vector<Tunnel> bridge_tunnels;
  bool needs_temp_tunnel = false;
  struct Step {
    std::string switch_id;
    MigrationStep step;
  };
  std::vector<Step> steps;
};

struct MigrationStatus {
  MigrationStep phase = MigrationStep::Clone;
  bool active = false;
  std::set<std::string> frozen_flows;
  std::set<std::int64_t> suppressed_timers;
};

struct PhaseSpan {
  std::string switch_id;
  MigrationStep step = MigrationStep::Clone;
  Tick begin = 0;
  Tick end = 0;
};

struct MigrationReport {
  std::vector<PhaseSpan> phases;
  long long packets_redirected = 0;
  long long packets_lost = 0;
  long long ordering_violations = 0;
  long long stale_rule_inconsistencies = 0;
  bool completed = false;
  bool aborted = false;
  std::string abort_reason;
  Tick begin_tick = 0;
  Tick end_tick = 0;
};

}  // namespace cloudmesh
