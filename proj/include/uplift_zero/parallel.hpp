#pragma once

namespace uplift_zero {

enum class ExecPolicy { Serial, Parallel };

/// Worker count for Parallel policies: UPLIFT_ZERO_THREADS when set to a
/// positive integer, otherwise the OpenMP default.
int worker_count();

/// Applies UPLIFT_ZERO_THREADS to the OpenMP runtime. Idempotent.
void configure_threads_from_env();

}  // namespace uplift_zero
