#pragma once

#include <stdexcept>
#include <string>

namespace wfl {

// Error classes surfaced by the library. The CLI maps config-class codes to a
// distinct exit status, so every validation failure must carry one of these.
enum class Errc {
  // configuration / document validation
  config_error,
  duplicate_id,
  missing_server,
  multiple_servers,
  unreachable_client,
  malformed_attribute,
  unknown_id,
  unknown_agent,
  invalid_parameter,
  io_error,
  // numeric / runtime
  degenerate_snr,
  probability_out_of_range,
  dimension_mismatch,
  non_finite,
  empty_dataset,
  batch_too_large,
  mode_mismatch,
  empty_set,
  insufficient_replicas,
  replica_mismatch,
  inconsistent_inputs,
  zero_duration,
  degenerate_metric,
  unsupported_task,
  worker_failure,
};

const char* errc_name(Errc c);

// Config-class errors are caused by user input (documents, flags, file paths)
// as opposed to conditions arising while a valid simulation runs.
bool is_config_error(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace wfl
