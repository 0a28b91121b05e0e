#include "wfl/exec.hpp"

#include <algorithm>
#include <exception>
#include <set>
#include <thread>

#include "wfl/errors.hpp"

namespace wfl {

int WorkerPlan::worker_of_cell(const std::string& cell) const {
  auto it = cell_to_worker.find(cell);
  if (it == cell_to_worker.end()) fail(Errc::unknown_id, "no cell '" + cell + "' in plan");
  return it->second;
}

WorkerPlan plan_partition(const Topology& topo, int n_workers) {
  if (n_workers < 1) fail(Errc::invalid_parameter, "n_workers must be >= 1");
  WorkerPlan plan;
  plan.n_workers = n_workers;

  std::set<std::string> cells;
  for (const auto& [id, agent] : topo.agents()) {
    if (agent.role != Role::server && !agent.cell_id.empty()) cells.insert(agent.cell_id);
  }
  int next = 0;
  for (const std::string& cell : cells) {
    plan.cell_to_worker[cell] = next;
    next = (next + 1) % n_workers;
  }

  std::vector<int> node_counter(static_cast<std::size_t>(n_workers) + 1, 0);
  for (const auto& [id, agent] : topo.agents()) {  // id order
    const int rank = agent.role == Role::server ? plan.server_rank()
                                                : plan.cell_to_worker.at(agent.cell_id);
    plan.address[id] = {rank, node_counter[static_cast<std::size_t>(rank)]++};
  }
  return plan;
}

void for_each_client(const WorkerPlan& plan, const Topology& topo,
                     const std::vector<std::string>& client_ids,
                     const std::function<void(const std::string&)>& fn) {
  std::vector<std::vector<std::string>> per_worker(static_cast<std::size_t>(plan.n_workers));
  for (const std::string& id : client_ids) {
    const int w = plan.cell_to_worker.at(topo.agent(id).cell_id);
    per_worker[static_cast<std::size_t>(w)].push_back(id);
  }

  if (plan.n_workers == 1) {
    for (const std::string& id : per_worker[0]) fn(id);
    return;
  }

  std::vector<std::exception_ptr> errors(per_worker.size());
  std::vector<std::string> failed_cell(per_worker.size());
  std::vector<std::thread> pool;
  pool.reserve(per_worker.size());
  for (std::size_t w = 0; w < per_worker.size(); ++w) {
    pool.emplace_back([&, w]() {
      for (const std::string& id : per_worker[w]) {
        try {
          fn(id);
        } catch (...) {
          errors[w] = std::current_exception();
          failed_cell[w] = topo.agent(id).cell_id;
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (std::size_t w = 0; w < errors.size(); ++w) {
    if (errors[w]) {
      try {
        std::rethrow_exception(errors[w]);
      } catch (const std::exception& e) {
        fail(Errc::worker_failure, "cell '" + failed_cell[w] + "': " + e.what());
      }
    }
  }
}

}  // namespace wfl
