#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wfl/topology.hpp"

namespace wfl {

// Deterministic assignment of cells to a pool of workers. The server lives on
// its own logical rank (== n_workers); every other agent gets a
// (rank_id, node_id) address, node ids numbering the agents of a rank in id
// order.
struct WorkerPlan {
  int n_workers = 1;
  std::map<std::string, int> cell_to_worker;
  std::map<std::string, std::pair<int, int>> address;

  int server_rank() const { return n_workers; }
  int worker_of_cell(const std::string& cell) const;
};

// Cells are distributed round-robin over workers by sorted cell id.
WorkerPlan plan_partition(const Topology& topo, int n_workers);

// Run `fn` once per listed client. Clients are grouped by their cell's
// worker; each worker processes its cells serially in id order, workers run
// concurrently and join before this returns. `fn` must only touch state owned
// by its client. A throwing client surfaces as Error(worker_failure) naming
// the cell.
void for_each_client(const WorkerPlan& plan, const Topology& topo,
                     const std::vector<std::string>& client_ids,
                     const std::function<void(const std::string&)>& fn);

}  // namespace wfl
