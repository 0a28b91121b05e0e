#include "wfl/errors.hpp"

namespace wfl {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::config_error: return "config-error";
    case Errc::duplicate_id: return "duplicate-id";
    case Errc::missing_server: return "missing-server";
    case Errc::multiple_servers: return "multiple-servers";
    case Errc::unreachable_client: return "unreachable-client";
    case Errc::malformed_attribute: return "malformed-attribute";
    case Errc::unknown_id: return "unknown-id";
    case Errc::unknown_agent: return "unknown-agent";
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::io_error: return "io-error";
    case Errc::degenerate_snr: return "degenerate-snr";
    case Errc::probability_out_of_range: return "probability-out-of-range";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::non_finite: return "non-finite";
    case Errc::empty_dataset: return "empty-dataset";
    case Errc::batch_too_large: return "batch-too-large";
    case Errc::mode_mismatch: return "mode-mismatch";
    case Errc::empty_set: return "empty-set";
    case Errc::insufficient_replicas: return "insufficient-replicas";
    case Errc::replica_mismatch: return "replica-mismatch";
    case Errc::inconsistent_inputs: return "inconsistent-inputs";
    case Errc::zero_duration: return "zero-duration";
    case Errc::degenerate_metric: return "degenerate-metric";
    case Errc::unsupported_task: return "unsupported-task";
    case Errc::worker_failure: return "worker-failure";
  }
  return "unknown-error";
}

bool is_config_error(Errc c) {
  switch (c) {
    case Errc::config_error:
    case Errc::duplicate_id:
    case Errc::missing_server:
    case Errc::multiple_servers:
    case Errc::unreachable_client:
    case Errc::malformed_attribute:
    case Errc::unknown_id:
    case Errc::invalid_parameter:
    case Errc::io_error:
      return true;
    default:
      return false;
  }
}

}  // namespace wfl
